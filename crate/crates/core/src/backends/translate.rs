use super::{BackendError, LanguageSpec, Translator, Transliterator};

pub const MOCK_MARKER: char = '§';

/// Returns every input unchanged.
#[derive(Debug, Clone, Copy, Default)]
pub struct IdentityTranslator;

impl Translator for IdentityTranslator {
    fn name(&self) -> &str {
        "identity"
    }

    fn translate_batch(
        &self,
        texts: &[String],
        _: &LanguageSpec,
        _: &LanguageSpec,
    ) -> Result<Vec<String>, BackendError> {
        Ok(texts.to_vec())
    }
}

/// Deterministic stand-in for a real translator: prefixes every
/// whitespace token with a marker and joins the tokens with single spaces.
/// Token `i` of the output is token `i` of the input, so span recovery can
/// be checked exactly.
#[derive(Debug, Clone, Copy)]
pub struct MockTranslator {
    pub marker: char,
}

impl Default for MockTranslator {
    fn default() -> Self {
        MockTranslator { marker: MOCK_MARKER }
    }
}

impl MockTranslator {
    pub fn mark(&self, text: &str) -> String {
        text.split_whitespace().map(|tok| format!("{}{tok}", self.marker)).collect::<Vec<_>>().join(" ")
    }
}

impl Translator for MockTranslator {
    fn name(&self) -> &str {
        "mock"
    }

    fn translate_batch(
        &self,
        texts: &[String],
        _: &LanguageSpec,
        _: &LanguageSpec,
    ) -> Result<Vec<String>, BackendError> {
        Ok(texts.iter().map(|t| self.mark(t)).collect())
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct IdentityTransliterator;

impl Transliterator for IdentityTransliterator {
    fn name(&self) -> &str {
        "identity"
    }

    fn transliterate_batch(&self, texts: &[String], _: &LanguageSpec) -> Result<Vec<String>, BackendError> {
        Ok(texts.to_vec())
    }
}
