use log::debug;

use super::{BackendError, LanguageSpec, Transliterator};

/// Replace every ASCII digit with the target script's digit. Other
/// characters, including digits of other scripts, are untouched, so the
/// code-point length never changes.
pub fn convert_digits(text: &str, tgt: &LanguageSpec) -> String {
    text.chars()
        .map(|c| match c.to_digit(10) {
            Some(d) if c.is_ascii_digit() => tgt.digit_map[d as usize],
            _ => c,
        })
        .collect()
}

/// Render `text` in the target script.
///
/// Text without letters (numbers, punctuation) is handled by
/// [`convert_digits`] and never reaches the backend. With no backend
/// configured the text passes through unchanged.
pub fn transliterate(
    backend: Option<&dyn Transliterator>,
    text: &str,
    tgt: &LanguageSpec,
) -> Result<String, BackendError> {
    if !text.chars().any(char::is_alphabetic) {
        return Ok(convert_digits(text, tgt));
    }
    let Some(backend) = backend else {
        debug!("no transliteration backend configured; passing {text:?} through");
        return Ok(text.to_string());
    };
    let mut out = backend.transliterate_batch(&[text.to_string()], tgt)?;
    super::check_batch_len(1, out.len())?;
    Ok(out.pop().unwrap_or_default())
}
