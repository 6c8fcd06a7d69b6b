//! Target-language registry.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::BackendError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Family {
    #[serde(rename = "Indo-Aryan")]
    IndoAryan,
    Dravidian,
    /// Source languages outside the two target families (English).
    Other,
}

/// Language metadata. `digit_map[d]` is the script's glyph for ASCII digit `d`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct LanguageSpec {
    pub code: String,
    pub name: String,
    pub family: Family,
    pub script: String,
    #[serde(with = "digit_string")]
    pub digit_map: [char; 10],
}

mod digit_string {
    use serde::{de::Error, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(digits: &[char; 10], s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&digits.iter().collect::<String>())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<[char; 10], D::Error> {
        let raw = String::deserialize(d)?;
        let chars: Vec<char> = raw.chars().collect();
        chars
            .try_into()
            .map_err(|v: Vec<char>| D::Error::custom(format!("digit_map needs 10 characters, got {}", v.len())))
    }
}

/// Ten consecutive digits starting at `zero`, the layout every Indic block
/// uses.
fn digits_from(zero: u32) -> [char; 10] {
    std::array::from_fn(|d| char::from_u32(zero + d as u32).expect("valid digit code point"))
}

impl LanguageSpec {
    fn builtin(code: &str, name: &str, family: Family, script: &str, zero: u32) -> Self {
        LanguageSpec {
            code: code.into(),
            name: name.into(),
            family,
            script: script.into(),
            digit_map: digits_from(zero),
        }
    }

    pub fn english() -> Self {
        Self::builtin("en", "English", Family::Other, "Latin", '0' as u32)
    }

    /// True when the digit map is the ASCII identity.
    pub fn uses_ascii_digits(&self) -> bool {
        self.digit_map.iter().enumerate().all(|(d, &c)| c == char::from(b'0' + d as u8))
    }
}

#[derive(Debug, Clone)]
pub struct LanguageRegistry {
    langs: BTreeMap<String, LanguageSpec>,
}

#[derive(Deserialize)]
struct RegistryFile {
    #[serde(default)]
    language: Vec<LanguageSpec>,
}

impl Default for LanguageRegistry {
    fn default() -> Self {
        use Family::*;
        let rows = [
            LanguageSpec::english(),
            LanguageSpec::builtin("mr", "Marathi", IndoAryan, "Devanagari", 0x0966),
            LanguageSpec::builtin("hi", "Hindi", IndoAryan, "Devanagari", 0x0966),
            LanguageSpec::builtin("pa", "Punjabi", IndoAryan, "Gurmukhi", 0x0A66),
            LanguageSpec::builtin("bn", "Bengali", IndoAryan, "Bengali", 0x09E6),
            LanguageSpec::builtin("gu", "Gujarati", IndoAryan, "Gujarati", 0x0AE6),
            LanguageSpec::builtin("or", "Oriya", IndoAryan, "Oriya", 0x0B66),
            LanguageSpec::builtin("ta", "Tamil", Dravidian, "Tamil", 0x0BE6),
            LanguageSpec::builtin("te", "Telugu", Dravidian, "Telugu", 0x0C66),
            LanguageSpec::builtin("kn", "Kannada", Dravidian, "Kannada", 0x0CE6),
            LanguageSpec::builtin("ml", "Malayalam", Dravidian, "Malayalam", 0x0D66),
        ];
        LanguageRegistry { langs: rows.into_iter().map(|l| (l.code.clone(), l)).collect() }
    }
}

impl LanguageRegistry {
    pub fn get(&self, code: &str) -> Option<&LanguageSpec> {
        self.langs.get(code)
    }

    pub fn require(&self, code: &str) -> Result<&LanguageSpec, BackendError> {
        self.get(code).ok_or_else(|| BackendError::UnknownLanguage(code.to_string()))
    }

    pub fn iter(&self) -> impl Iterator<Item = &LanguageSpec> {
        self.langs.values()
    }

    /// Add or replace an entry. Codes stay unique because the registry is
    /// keyed by code.
    pub fn insert(&mut self, lang: LanguageSpec) {
        self.langs.insert(lang.code.clone(), lang);
    }

    /// Extend with `[[language]]` tables from a TOML file:
    ///
    /// ```toml
    /// [[language]]
    /// code = "as"
    /// name = "Assamese"
    /// family = "Indo-Aryan"
    /// script = "Bengali"
    /// digit_map = "০১২৩৪৫৬৭৮৯"
    /// ```
    pub fn extend_from_toml(&mut self, raw: &str) -> Result<(), BackendError> {
        let file: RegistryFile = toml::from_str(raw).map_err(|e| BackendError::Config(e.to_string()))?;
        let mut seen = std::collections::HashSet::new();
        for lang in file.language {
            if !seen.insert(lang.code.clone()) {
                return Err(BackendError::Config(format!("duplicate language code {}", lang.code)));
            }
            self.insert(lang);
        }
        Ok(())
    }

    pub fn extend_from_file(&mut self, path: &Path) -> Result<(), BackendError> {
        let raw =
            std::fs::read_to_string(path).map_err(|e| BackendError::Config(format!("{}: {e}", path.display())))?;
        self.extend_from_toml(&raw)
    }
}
