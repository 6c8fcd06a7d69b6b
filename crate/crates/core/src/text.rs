//! Code-point offset helpers.
//!
//! Every offset in this crate counts Unicode scalar values (Rust `char`s),
//! never UTF-8 bytes. Indic scripts use three bytes per code point, so byte
//! and character offsets diverge immediately on translated text.

/// Number of code points in `s`.
pub fn char_len(s: &str) -> usize {
    s.chars().count()
}

/// Byte index of the `char_idx`-th code point, or `None` past the end.
/// `char_idx == char_len(s)` maps to `s.len()`.
pub fn byte_index(s: &str, char_idx: usize) -> Option<usize> {
    if char_idx == 0 {
        return Some(0);
    }
    let mut iter = s.char_indices();
    match iter.nth(char_idx) {
        Some((b, _)) => Some(b),
        None => (char_len(s) == char_idx).then_some(s.len()),
    }
}

/// Substring by code-point range `[start, end)`.
pub fn char_slice(s: &str, start: usize, end: usize) -> Option<&str> {
    if start > end {
        return None;
    }
    let b0 = byte_index(s, start)?;
    let b1 = b0 + byte_index(&s[b0..], end - start)?;
    Some(&s[b0..b1])
}

/// Code-point offset of the first occurrence of `needle` in `haystack`.
pub fn find_chars(haystack: &str, needle: &str) -> Option<usize> {
    haystack.find(needle).map(|b| char_len(&haystack[..b]))
}

/// Trim and collapse every whitespace run to one ASCII space.
pub fn normalize_whitespace(s: &str) -> String {
    s.split_whitespace().collect::<Vec<_>>().join(" ")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn slicing_counts_code_points() {
        let s = "नमस्ते world";
        assert_eq!(char_len(s), 12);
        assert_eq!(char_slice(s, 7, 12), Some("world"));
        assert_eq!(char_slice(s, 0, 6), Some("नमस्ते"));
        assert_eq!(char_slice(s, 12, 12), Some(""));
        assert_eq!(char_slice(s, 12, 13), None);
        assert_eq!(find_chars(s, "wor"), Some(7));
    }

    #[test]
    fn whitespace_collapse() {
        assert_eq!(normalize_whitespace("  a \n\t b  "), "a b");
    }
}
