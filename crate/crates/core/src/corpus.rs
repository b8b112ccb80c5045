//! Corpus document model: corpora, sub-corpora, paragraphs, sentence and
//! token segmentation, and lemma concordances.
//!
//! The XML form is a root `asbc` element (`corpusID`, `subCID`, optional
//! `pattern`) holding one `text` element per paragraph:
//!
//! ```text
//! <asbc corpusID="EDU" subCID="5A">
//! <text paragID="5A-p0">...</text>
//! </asbc>
//! ```

use std::collections::HashSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::morph::{analyze, Lexicon};
use crate::script::{is_pass_through, lookup_key, to_translit, ArabicText, CodecError, Translit};
use crate::xml::{self, Element, XmlError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CorpusError {
    #[error(transparent)]
    Xml(#[from] XmlError),
    #[error("schema violation at {path}: {message}")]
    SchemaViolation { path: String, message: String },
    #[error("duplicate id {0:?}")]
    DuplicateId(String),
    #[error("cannot merge corpus {found:?} into {expected:?}")]
    CorpusMismatch { expected: String, found: String },
    #[error("lemma {0:?} is not in the lexicon")]
    UnknownLemma(String),
}

fn schema(path: impl Into<String>, message: impl Into<String>) -> CorpusError {
    CorpusError::SchemaViolation { path: path.into(), message: message.into() }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Paragraph {
    pub parag_id: String,
    pub text: ArabicText,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubCorpus {
    pub sub_cid: String,
    /// Syntactic pattern the sub-corpus groups, when known.
    pub pattern_key: Option<String>,
    pub paragraphs: Vec<Paragraph>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Corpus {
    pub corpus_id: String,
    pub subcorpora: Vec<SubCorpus>,
}

/// Half-open character range.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct CharSpan {
    pub start: usize,
    pub end: usize,
}

impl CharSpan {
    pub fn new(start: usize, end: usize) -> Self {
        CharSpan { start, end }
    }

    pub fn len(&self) -> usize {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.start == self.end
    }

    pub fn overlaps(&self, other: &CharSpan) -> bool {
        self.start < other.end && other.start < self.end
    }

    pub fn contains(&self, other: &CharSpan) -> bool {
        self.start <= other.start && other.end <= self.end
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Token {
    pub token_id: String,
    pub surface: ArabicText,
    /// Offsets within the sentence.
    pub char_span: CharSpan,
}

impl Token {
    pub fn translit(&self) -> Translit {
        to_translit(&self.surface).expect("token text is validated Arabic")
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Sentence {
    pub sentence_id: String,
    pub parag_id: String,
    /// Offsets within the paragraph.
    pub char_span: CharSpan,
    pub text: ArabicText,
    pub tokens: Vec<Token>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SentenceRef {
    pub sub_cid: String,
    pub parag_id: String,
    pub sentence_id: String,
    pub char_span: CharSpan,
    /// Indices of the tokens whose readings carry the lemma.
    pub hits: Vec<usize>,
}

impl Corpus {
    pub fn new(corpus_id: &str) -> Self {
        Corpus { corpus_id: corpus_id.to_string(), subcorpora: Vec::new() }
    }

    /// Adds the sub-corpora of another document of the same corpus.
    pub fn absorb(&mut self, other: Corpus) -> Result<(), CorpusError> {
        if other.corpus_id != self.corpus_id {
            return Err(CorpusError::CorpusMismatch { expected: self.corpus_id.clone(), found: other.corpus_id });
        }
        for sub in other.subcorpora {
            if self.subcorpora.iter().any(|s| s.sub_cid == sub.sub_cid) {
                return Err(CorpusError::DuplicateId(sub.sub_cid));
            }
            self.subcorpora.push(sub);
        }
        Ok(())
    }

    pub fn paragraphs(&self) -> impl Iterator<Item = (&SubCorpus, &Paragraph)> {
        self.subcorpora.iter().flat_map(|s| s.paragraphs.iter().map(move |p| (s, p)))
    }

    pub fn sentences(&self) -> Vec<(&SubCorpus, Sentence)> {
        self.paragraphs().flat_map(|(s, p)| split_sentences(p).into_iter().map(move |sent| (s, sent))).collect()
    }

    pub fn sentence(&self, sentence_id: &str) -> Option<Sentence> {
        let (parag_id, _) = sentence_id.rsplit_once("-s")?;
        let (_, p) = self.paragraphs().find(|(_, p)| p.parag_id == parag_id)?;
        split_sentences(p).into_iter().find(|s| s.sentence_id == sentence_id)
    }
}

pub fn import_corpus(doc: &str) -> Result<Corpus, CorpusError> {
    let root = xml::parse(doc)?;
    if root.name != "asbc" {
        return Err(schema(format!("/{}", root.name), "root element must be asbc"));
    }
    let required = |el: &Element, path: &str, name: &str| -> Result<String, CorpusError> {
        match el.attr(name) {
            Some(v) if !v.is_empty() => Ok(v.to_string()),
            _ => Err(schema(path, format!("missing attribute {name}"))),
        }
    };
    let corpus_id = required(&root, "/asbc", "corpusID")?;
    let sub_cid = required(&root, "/asbc", "subCID")?;
    if root.stray_text().is_some() {
        return Err(schema("/asbc", "unexpected text content"));
    }
    let mut seen = HashSet::new();
    let mut paragraphs = Vec::new();
    for (i, el) in root.elements().enumerate() {
        let path = format!("/asbc/{}[{}]", el.name, i + 1);
        if el.name != "text" {
            return Err(schema(path, "expected text element"));
        }
        if el.elements().next().is_some() {
            return Err(schema(path, "text element must not contain elements"));
        }
        let parag_id = required(el, &path, "paragID")?;
        if !parag_id.starts_with(&format!("{sub_cid}-")) {
            return Err(schema(path, format!("paragID {parag_id:?} does not start with {sub_cid}-")));
        }
        if !seen.insert(parag_id.clone()) {
            return Err(CorpusError::DuplicateId(parag_id));
        }
        let raw = el.text();
        if raw.trim().is_empty() {
            return Err(schema(path, "empty paragraph"));
        }
        let text = ArabicText::new(&raw).map_err(|e: CodecError| schema(path.clone(), e.to_string()))?;
        paragraphs.push(Paragraph { parag_id, text });
    }
    let pattern_key = root.attr("pattern").map(str::to_string);
    Ok(Corpus { corpus_id, subcorpora: vec![SubCorpus { sub_cid, pattern_key, paragraphs }] })
}

fn export_subcorpus(corpus_id: &str, sub: &SubCorpus) -> String {
    let mut attrs = vec![("corpusID", corpus_id), ("subCID", sub.sub_cid.as_str())];
    if let Some(p) = &sub.pattern_key {
        attrs.push(("pattern", p));
    }
    let head = xml::attrs(&attrs);
    if sub.paragraphs.is_empty() {
        return format!("<asbc{head}/>\n");
    }
    let mut out = format!("<asbc{head}>\n");
    for p in &sub.paragraphs {
        out.push_str(&format!(
            "<text{}>{}</text>\n",
            xml::attrs(&[("paragID", &p.parag_id)]),
            xml::escape_text(p.text.as_str())
        ));
    }
    out.push_str("</asbc>\n");
    out
}

/// One canonical document per sub-corpus, in corpus order.
pub fn export_corpus(c: &Corpus) -> Vec<(String, String)> {
    c.subcorpora.iter().map(|s| (s.sub_cid.clone(), export_subcorpus(&c.corpus_id, s))).collect()
}

fn is_terminator(c: char) -> bool {
    matches!(c, '.' | '!' | '?' | '\u{061F}' | '\u{06D4}')
}

fn is_token_char(c: char) -> bool {
    !c.is_whitespace() && (!is_pass_through(c) || c.is_ascii_digit() || ('\u{0660}'..='\u{0669}').contains(&c))
}

/// Splits after each run of sentence-final punctuation; trailing whitespace
/// stays with the preceding sentence so the spans tile the paragraph.
pub fn split_sentences(p: &Paragraph) -> Vec<Sentence> {
    let chars: Vec<char> = p.text.as_str().chars().collect();
    let mut bounds = Vec::new();
    let mut start = 0;
    let mut i = 0;
    while i < chars.len() {
        if is_terminator(chars[i]) {
            while i < chars.len() && is_terminator(chars[i]) {
                i += 1;
            }
            while i < chars.len() && chars[i].is_whitespace() {
                i += 1;
            }
            bounds.push((start, i));
            start = i;
        } else {
            i += 1;
        }
    }
    if start < chars.len() {
        // A trailing run of whitespace alone does not form a sentence.
        if chars[start..].iter().all(|c| c.is_whitespace()) && !bounds.is_empty() {
            bounds.last_mut().unwrap().1 = chars.len();
        } else {
            bounds.push((start, chars.len()));
        }
    }
    bounds
        .into_iter()
        .enumerate()
        .map(|(n, (s, e))| {
            let sentence_id = format!("{}-s{n}", p.parag_id);
            let text = p.text.slice_chars(s, e);
            let tokens = tokenize(&sentence_id, &text);
            Sentence { sentence_id, parag_id: p.parag_id.clone(), char_span: CharSpan::new(s, e), text, tokens }
        })
        .collect()
}

/// Maximal runs of letters, marks and digits; whitespace and punctuation separate tokens.
pub fn tokenize(sentence_id: &str, text: &ArabicText) -> Vec<Token> {
    let chars: Vec<char> = text.as_str().chars().collect();
    let mut tokens = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        if !is_token_char(chars[i]) {
            i += 1;
            continue;
        }
        let start = i;
        while i < chars.len() && is_token_char(chars[i]) {
            i += 1;
        }
        tokens.push(Token {
            token_id: format!("{sentence_id}-t{}", tokens.len()),
            surface: text.slice_chars(start, i),
            char_span: CharSpan::new(start, i),
        });
    }
    tokens
}

/// Sort key that orders `5A-p2` before `5A-p10`.
pub fn natural_key(id: &str) -> Vec<(String, u64)> {
    let mut parts = Vec::new();
    let mut text = String::new();
    let mut digits = String::new();
    for c in id.chars() {
        if c.is_ascii_digit() {
            digits.push(c);
        } else {
            if !digits.is_empty() {
                parts.push((std::mem::take(&mut text), digits.parse().unwrap_or(u64::MAX)));
                digits.clear();
            }
            text.push(c);
        }
    }
    parts.push((text, if digits.is_empty() { 0 } else { digits.parse().unwrap_or(u64::MAX) }));
    parts
}

/// Every sentence with a token that has a reading of `lemma`.
pub fn concordance(c: &Corpus, lemma: &ArabicText, lex: &Lexicon) -> Result<Vec<SentenceRef>, CorpusError> {
    let bw = to_translit(lemma).expect("ArabicText is always transliterable");
    if !lex.has_lemma(bw.as_str()) {
        return Err(CorpusError::UnknownLemma(lemma.to_string()));
    }
    let key = lookup_key(bw.as_str());
    let mut refs = Vec::new();
    for (sub, sentence) in c.sentences() {
        let hits: Vec<usize> = sentence
            .tokens
            .iter()
            .enumerate()
            .filter(|(_, t)| analyze(&t.token_id, &t.translit(), lex).iter().any(|a| lookup_key(a.lemma.as_str()) == key))
            .map(|(i, _)| i)
            .collect();
        if !hits.is_empty() {
            refs.push(SentenceRef {
                sub_cid: sub.sub_cid.clone(),
                parag_id: sentence.parag_id.clone(),
                sentence_id: sentence.sentence_id.clone(),
                char_span: sentence.char_span,
                hits,
            });
        }
    }
    refs.sort_by(|a, b| {
        natural_key(&a.parag_id).cmp(&natural_key(&b.parag_id)).then(a.char_span.start.cmp(&b.char_span.start))
    });
    Ok(refs)
}
