//! Buckwalter transliteration, Arabic-script normalization and diacritic
//! classification.
//!
//! The code table ships as `data/buckwalter.tsv` (one `code<TAB>U+XXXX` pair
//! per line). Whitespace, ASCII digits, a fixed set of ASCII punctuation that
//! does not collide with Buckwalter codes, Arabic punctuation and
//! Arabic-Indic digits pass through unchanged in both directions.

use std::collections::HashMap;
use std::fmt;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};
use thiserror::Error;
use unicode_normalization::UnicodeNormalization;

const BUNDLED_TABLE: &str = include_str!("../data/buckwalter.tsv");

const ASCII_PASS_THROUGH: &str = ".,!?:;-()\"/%[]";
const ARABIC_PASS_THROUGH: &[char] = &['\u{060C}', '\u{061B}', '\u{061F}', '\u{06D4}', '\u{00AB}', '\u{00BB}'];

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CodecError {
    #[error("unsupported character {ch:?} at position {position}")]
    UnsupportedCharacter { position: usize, ch: char },
    #[error("codec table line {line}: {message}")]
    Table { line: usize, message: String },
}

/// Broad class of a table character, used by normalization.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CharClass {
    Letter,
    /// Harakat, tanween, shadda, sukun, dagger alef.
    Diacritic,
    /// Hamza-carrying or wasla alef (folds to bare alef).
    AlefVariant,
    TehMarbuta,
    Tatweel,
}

fn class_of(arabic: char) -> CharClass {
    match arabic {
        '\u{064B}'..='\u{0652}' | '\u{0670}' => CharClass::Diacritic,
        '\u{0622}' | '\u{0623}' | '\u{0625}' | '\u{0671}' => CharClass::AlefVariant,
        '\u{0629}' => CharClass::TehMarbuta,
        '\u{0640}' => CharClass::Tatweel,
        _ => CharClass::Letter,
    }
}

pub fn is_pass_through(c: char) -> bool {
    c.is_whitespace()
        || c.is_ascii_digit()
        || ASCII_PASS_THROUGH.contains(c)
        || ARABIC_PASS_THROUGH.contains(&c)
        || ('\u{0660}'..='\u{0669}').contains(&c)
}

/// Bidirectional Buckwalter code table.
#[derive(Debug, Clone)]
pub struct CodecTable {
    to_arabic: HashMap<char, char>,
    to_code: HashMap<char, char>,
    entries: Vec<(char, char)>,
}

impl CodecTable {
    pub fn parse(text: &str) -> Result<Self, CodecError> {
        let mut table = CodecTable { to_arabic: HashMap::new(), to_code: HashMap::new(), entries: Vec::new() };
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            if raw.trim().is_empty() || raw.starts_with('#') {
                continue;
            }
            let err = |message: &str| CodecError::Table { line, message: message.to_string() };
            let (code, point) = raw.split_once('\t').ok_or_else(|| err("expected two tab-separated columns"))?;
            let mut code_chars = code.chars();
            let code = match (code_chars.next(), code_chars.next()) {
                (Some(c), None) if c.is_ascii() => c,
                _ => return Err(err("code must be a single ASCII character")),
            };
            let hex = point.trim().strip_prefix("U+").ok_or_else(|| err("codepoint must look like U+XXXX"))?;
            let arabic = u32::from_str_radix(hex, 16)
                .ok()
                .and_then(char::from_u32)
                .ok_or_else(|| err("invalid codepoint"))?;
            if is_pass_through(code) || is_pass_through(arabic) {
                return Err(err("code collides with the pass-through set"));
            }
            if table.to_arabic.insert(code, arabic).is_some() || table.to_code.insert(arabic, code).is_some() {
                return Err(err("duplicate mapping"));
            }
            table.entries.push((code, arabic));
        }
        Ok(table)
    }

    pub fn bundled() -> &'static CodecTable {
        static TABLE: OnceLock<CodecTable> = OnceLock::new();
        TABLE.get_or_init(|| CodecTable::parse(BUNDLED_TABLE).expect("bundled Buckwalter table is valid"))
    }

    /// `(code, arabic)` pairs in table order.
    pub fn entries(&self) -> &[(char, char)] {
        &self.entries
    }

    pub fn arabic_for(&self, code: char) -> Option<char> {
        self.to_arabic.get(&code).copied()
    }

    pub fn code_for(&self, arabic: char) -> Option<char> {
        self.to_code.get(&arabic).copied()
    }

    /// Class of a Buckwalter code, `None` for pass-through or unknown characters.
    pub fn class_of_code(&self, code: char) -> Option<CharClass> {
        self.arabic_for(code).map(class_of)
    }
}

/// Arabic-script text held in composed (NFC) form.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct ArabicText(String);

impl ArabicText {
    pub fn new(s: &str) -> Result<Self, CodecError> {
        let composed: String = s.nfc().collect();
        let table = CodecTable::bundled();
        for (position, ch) in composed.chars().enumerate() {
            if table.code_for(ch).is_none() && !is_pass_through(ch) {
                return Err(CodecError::UnsupportedCharacter { position, ch });
            }
        }
        Ok(ArabicText(composed))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    pub fn char_len(&self) -> usize {
        self.0.chars().count()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Substring by character offsets `[start, end)`.
    pub fn slice_chars(&self, start: usize, end: usize) -> ArabicText {
        ArabicText(self.0.chars().skip(start).take(end.saturating_sub(start)).collect())
    }
}

impl TryFrom<String> for ArabicText {
    type Error = CodecError;
    fn try_from(s: String) -> Result<Self, Self::Error> {
        ArabicText::new(&s)
    }
}

impl From<ArabicText> for String {
    fn from(t: ArabicText) -> String {
        t.0
    }
}

impl fmt::Display for ArabicText {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// Buckwalter-transliterated text.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct Translit(String);

impl Translit {
    pub fn new(s: &str) -> Result<Self, CodecError> {
        let table = CodecTable::bundled();
        for (position, ch) in s.chars().enumerate() {
            if table.arabic_for(ch).is_none() && !is_pass_through(ch) {
                return Err(CodecError::UnsupportedCharacter { position, ch });
            }
        }
        Ok(Translit(s.to_string()))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl TryFrom<String> for Translit {
    type Error = CodecError;
    fn try_from(s: String) -> Result<Self, Self::Error> {
        Translit::new(&s)
    }
}

impl From<Translit> for String {
    fn from(t: Translit) -> String {
        t.0
    }
}

impl fmt::Display for Translit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

pub fn to_translit(text: &ArabicText) -> Result<Translit, CodecError> {
    let table = CodecTable::bundled();
    text.0
        .chars()
        .enumerate()
        .map(|(position, ch)| match table.code_for(ch) {
            Some(code) => Ok(code),
            None if is_pass_through(ch) => Ok(ch),
            None => Err(CodecError::UnsupportedCharacter { position, ch }),
        })
        .collect::<Result<String, _>>()
        .map(Translit)
}

pub fn from_translit(t: &Translit) -> Result<ArabicText, CodecError> {
    let table = CodecTable::bundled();
    let raw = t
        .0
        .chars()
        .enumerate()
        .map(|(position, ch)| match table.arabic_for(ch) {
            Some(arabic) => Ok(arabic),
            None if is_pass_through(ch) => Ok(ch),
            None => Err(CodecError::UnsupportedCharacter { position, ch }),
        })
        .collect::<Result<String, _>>()?;
    ArabicText::new(&raw)
}

/// Convenience for literals known to be valid Buckwalter.
pub fn arabic_from_bw(bw: &str) -> Result<ArabicText, CodecError> {
    from_translit(&Translit::new(bw)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct NormalizationPolicy {
    pub strip_diacritics: bool,
    pub fold_alef_variants: bool,
    pub fold_teh_marbuta: bool,
}

impl NormalizationPolicy {
    /// Policy used for lexicon and concordance lookup keys.
    pub const LOOKUP: NormalizationPolicy =
        NormalizationPolicy { strip_diacritics: true, fold_alef_variants: true, fold_teh_marbuta: false };

    pub const STRIP: NormalizationPolicy =
        NormalizationPolicy { strip_diacritics: true, fold_alef_variants: false, fold_teh_marbuta: false };

    fn apply_char(&self, class: CharClass) -> Action {
        match class {
            CharClass::Diacritic | CharClass::Tatweel if self.strip_diacritics => Action::Drop,
            CharClass::AlefVariant if self.fold_alef_variants => Action::Replace,
            CharClass::TehMarbuta if self.fold_teh_marbuta => Action::Replace,
            _ => Action::Keep,
        }
    }
}

enum Action {
    Keep,
    Drop,
    Replace,
}

pub fn normalize(text: &ArabicText, policy: NormalizationPolicy) -> ArabicText {
    let table = CodecTable::bundled();
    let mut out = String::with_capacity(text.0.len());
    for ch in text.0.chars() {
        if table.code_for(ch).is_none() {
            out.push(ch);
            continue;
        }
        match policy.apply_char(class_of(ch)) {
            Action::Keep => out.push(ch),
            Action::Drop => {}
            Action::Replace => out.push(if ch == '\u{0629}' { '\u{0647}' } else { '\u{0627}' }),
        }
    }
    // Folding only replaces base letters with base letters, so the result stays composed.
    ArabicText(out)
}

/// Applies a normalization policy directly to a Buckwalter string.
pub fn normalize_translit(t: &str, policy: NormalizationPolicy) -> String {
    let table = CodecTable::bundled();
    let mut out = String::with_capacity(t.len());
    for ch in t.chars() {
        let Some(class) = table.class_of_code(ch) else {
            out.push(ch);
            continue;
        };
        match policy.apply_char(class) {
            Action::Keep => out.push(ch),
            Action::Drop => {}
            Action::Replace => out.push(if ch == 'p' { 'h' } else { 'A' }),
        }
    }
    out
}

/// Lexicon/concordance key of a Buckwalter string: diacritics stripped, alef variants folded.
pub fn lookup_key(t: &str) -> String {
    normalize_translit(t, NormalizationPolicy::LOOKUP)
}

/// True for Buckwalter diacritic codes (`aiuoFNK~` and dagger alef).
pub fn is_diacritic_code(c: char) -> bool {
    CodecTable::bundled().class_of_code(c) == Some(CharClass::Diacritic)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ar(s: &str) -> ArabicText {
        ArabicText::new(s).unwrap()
    }

    #[test]
    fn translit_examples() {
        // Letter-by-letter per the table: the fatha on heh is kept.
        assert_eq!(to_translit(&ar("فَأَكَلَتُهَا")).unwrap().as_str(), "fa>akalatuhaA");
        assert_eq!(to_translit(&ar("كتاب")).unwrap().as_str(), "ktAb");
        assert_eq!(to_translit(&ar("")).unwrap().as_str(), "");
        // The golden segmentation string carries a sukun on the teh.
        assert_eq!(to_translit(&ar("فَأَكَلَتْهَا")).unwrap().as_str(), "fa>akalatohaA");
    }

    #[test]
    fn from_translit_examples() {
        assert_eq!(arabic_from_bw("ktAb").unwrap().as_str(), "كتاب");
        assert_eq!(arabic_from_bw("").unwrap().as_str(), "");
        assert_eq!(arabic_from_bw(">akala").unwrap().as_str(), "أَكَلَ");
    }

    #[test]
    fn unsupported_characters_report_position() {
        assert_eq!(
            ArabicText::new("كتاب x").unwrap_err(),
            CodecError::UnsupportedCharacter { position: 5, ch: 'x' }
        );
        assert_eq!(
            Translit::new("ktAbc").unwrap_err(),
            CodecError::UnsupportedCharacter { position: 4, ch: 'c' }
        );
    }

    #[test]
    fn punctuation_and_digits_pass_through() {
        let t = ar("كتب 12، قلم.");
        assert_eq!(to_translit(&t).unwrap().as_str(), "ktb 12، qlm.");
        assert_eq!(from_translit(&to_translit(&t).unwrap()).unwrap(), t);
    }

    #[test]
    fn decomposed_hamza_is_recomposed() {
        let decomposed = "\u{0627}\u{0654}\u{0643}\u{0644}";
        assert_eq!(to_translit(&ar(decomposed)).unwrap().as_str(), ">kl");
    }

    #[test]
    fn normalize_examples() {
        let p = NormalizationPolicy { strip_diacritics: true, fold_alef_variants: true, fold_teh_marbuta: false };
        assert_eq!(normalize(&ar("فَأَكَلَتُهَا"), p).as_str(), "فاكلتها");
        for strip in [false, true] {
            for alef in [false, true] {
                for teh in [false, true] {
                    let p = NormalizationPolicy { strip_diacritics: strip, fold_alef_variants: alef, fold_teh_marbuta: teh };
                    assert_eq!(normalize(&ar("كتاب"), p).as_str(), "كتاب");
                }
            }
        }
        let teh = NormalizationPolicy { fold_teh_marbuta: true, ..Default::default() };
        assert_eq!(normalize(&ar("مدرسة"), teh).as_str(), "مدرسه");
    }

    #[test]
    fn translit_normalization_matches_arabic_route() {
        let bw = "<ilaY Almadrasapi {lo>umi";
        let arabic = arabic_from_bw(bw).unwrap();
        let via_arabic = to_translit(&normalize(&arabic, NormalizationPolicy::LOOKUP)).unwrap();
        assert_eq!(lookup_key(bw), via_arabic.as_str());
        assert_eq!(lookup_key(bw), "AlY Almdrsp AlAm");
    }

    #[test]
    fn table_rejects_bad_lines() {
        assert!(matches!(CodecTable::parse("ab\tU+0627"), Err(CodecError::Table { line: 1, .. })));
        assert!(matches!(CodecTable::parse("A\tU+0627\nA\tU+0628"), Err(CodecError::Table { line: 2, .. })));
        assert!(matches!(CodecTable::parse(".\tU+0627"), Err(CodecError::Table { .. })));
    }
}
