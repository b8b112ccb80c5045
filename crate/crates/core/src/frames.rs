//! Frame database: frames with frame elements, lexical units in Arabic and
//! English, and annotated English exemplar sentences.
//!
//! ```text
//! <frames>
//! <frame name="Placing">
//! <definition>An Agent places a Theme at a Goal.</definition>
//! <FE name="Agent" core="core"/>
//! <lu id="waDaEa.v" lemma="waDaEa" pos="v" lang="ar"/>
//! <exemplar lu="put.v"><fe name="Agent">Kim</fe> put ...</exemplar>
//! </frame>
//! <lu id="..." lemma="..." pos="..." lang="..." frame="Placing"/>
//! </frames>
//! ```
//!
//! Lexical units may sit inside their frame or at top level with a `frame`
//! attribute.

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::lexsem::{EvidencePath, FrameIndex, LexNet};
use crate::script::lookup_key;
use crate::xml::{self, Element, Node, XmlError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FrameError {
    #[error(transparent)]
    Xml(#[from] XmlError),
    #[error("frame database format error at {path}: {message}")]
    Format { path: String, message: String },
    #[error("lexical unit {lu:?} references unknown frame {frame:?}")]
    DanglingFrame { lu: String, frame: String },
    #[error("duplicate frame {0:?}")]
    DuplicateFrame(String),
    #[error("duplicate frame element {fe:?} in frame {frame:?}")]
    DuplicateFe { frame: String, fe: String },
    #[error("duplicate lexical unit {0:?}")]
    DuplicateLu(String),
    #[error("exemplar {index} of frame {frame:?}: {message}")]
    BadExemplar { frame: String, index: usize, message: String },
    #[error("cannot read {path}: {message}")]
    Io { path: String, message: String },
}

fn format_err(path: impl Into<String>, message: impl Into<String>) -> FrameError {
    FrameError::Format { path: path.into(), message: message.into() }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CoreType {
    Core,
    Peripheral,
    ExtraThematic,
}

impl CoreType {
    pub fn code(self) -> &'static str {
        match self {
            CoreType::Core => "core",
            CoreType::Peripheral => "peripheral",
            CoreType::ExtraThematic => "extra-thematic",
        }
    }
}

impl FromStr for CoreType {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "core" => Ok(CoreType::Core),
            "peripheral" => Ok(CoreType::Peripheral),
            "extra-thematic" => Ok(CoreType::ExtraThematic),
            other => Err(format!("unknown coreness {other:?}")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Lang {
    Ar,
    En,
}

impl fmt::Display for Lang {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Lang::Ar => "ar",
            Lang::En => "en",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FrameElementDef {
    pub name: String,
    pub core: CoreType,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LexicalUnit {
    pub lu_id: String,
    /// Buckwalter for Arabic units, plain English otherwise.
    pub lemma: String,
    pub pos: String,
    pub lang: Lang,
    pub frame_name: String,
}

impl LexicalUnit {
    /// `lemma.pos`, lower-cased: the key English links are matched against.
    pub fn english_key(&self) -> String {
        format!("{}.{}", self.lemma, self.pos).to_lowercase()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExemplarLabel {
    pub fe: String,
    pub start: usize,
    pub end: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Exemplar {
    pub lu_id: String,
    pub text: String,
    pub labels: Vec<ExemplarLabel>,
}

impl Exemplar {
    pub fn label_text(&self, label: &ExemplarLabel) -> String {
        self.text.chars().skip(label.start).take(label.end - label.start).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Frame {
    pub name: String,
    pub definition: String,
    pub fe_defs: Vec<FrameElementDef>,
    pub lus: Vec<LexicalUnit>,
    pub exemplars: Vec<Exemplar>,
}

impl Frame {
    pub fn fe(&self, name: &str) -> Option<&FrameElementDef> {
        self.fe_defs.iter().find(|f| f.name == name)
    }

    pub fn core_fes(&self) -> impl Iterator<Item = &FrameElementDef> {
        self.fe_defs.iter().filter(|f| f.core == CoreType::Core)
    }
}

#[derive(Debug, Clone)]
pub struct FrameDb {
    frames: Vec<Frame>,
    by_name: HashMap<String, usize>,
    lus: HashMap<String, (usize, usize)>,
}

fn required<'a>(el: &'a Element, path: &str, name: &str) -> Result<&'a str, FrameError> {
    match el.attr(name) {
        Some(v) if !v.trim().is_empty() => Ok(v),
        _ => Err(format_err(path, format!("missing attribute {name}"))),
    }
}

fn valid_lu_id(id: &str) -> bool {
    !id.is_empty() && !id.chars().any(|c| c.is_whitespace() || c.is_control() || matches!(c, '/' | '\\'))
}

fn parse_lu(el: &Element, path: &str, frame_name: &str) -> Result<LexicalUnit, FrameError> {
    let lu_id = required(el, path, "id")?;
    if !valid_lu_id(lu_id) {
        return Err(format_err(path, format!("lexical unit id {lu_id:?} must not contain whitespace or path separators")));
    }
    let lang = match el.attr("lang").unwrap_or("en") {
        "ar" => Lang::Ar,
        "en" => Lang::En,
        other => return Err(format_err(path, format!("unknown lang {other:?}"))),
    };
    Ok(LexicalUnit {
        lu_id: lu_id.to_string(),
        lemma: required(el, path, "lemma")?.to_string(),
        pos: required(el, path, "pos")?.to_string(),
        lang,
        frame_name: frame_name.to_string(),
    })
}

fn parse_exemplar(el: &Element) -> Result<Exemplar, String> {
    let lu_id = el.attr("lu").ok_or("missing attribute lu")?.to_string();
    let mut text = String::new();
    let mut labels = Vec::new();
    for child in &el.children {
        match child {
            Node::Text(t) => text.push_str(t),
            Node::Element(fe) if fe.name == "fe" => {
                let name = fe.attr("name").ok_or("fe without name")?;
                let start = text.chars().count();
                text.push_str(&fe.text());
                labels.push(ExemplarLabel { fe: name.to_string(), start, end: text.chars().count() });
            }
            Node::Element(other) => return Err(format!("unexpected element {}", other.name)),
        }
    }
    Ok(Exemplar { lu_id, text, labels })
}

impl FrameDb {
    pub fn new(frames: Vec<Frame>) -> Result<Self, FrameError> {
        let mut by_name = HashMap::new();
        let mut lus = HashMap::new();
        for (fi, f) in frames.iter().enumerate() {
            if by_name.insert(f.name.clone(), fi).is_some() {
                return Err(FrameError::DuplicateFrame(f.name.clone()));
            }
            let mut seen = HashSet::new();
            for fe in &f.fe_defs {
                if !seen.insert(fe.name.as_str()) {
                    return Err(FrameError::DuplicateFe { frame: f.name.clone(), fe: fe.name.clone() });
                }
            }
            for (li, lu) in f.lus.iter().enumerate() {
                if lu.frame_name != f.name {
                    return Err(FrameError::DanglingFrame { lu: lu.lu_id.clone(), frame: lu.frame_name.clone() });
                }
                if lus.insert(lu.lu_id.clone(), (fi, li)).is_some() {
                    return Err(FrameError::DuplicateLu(lu.lu_id.clone()));
                }
            }
        }
        for f in &frames {
            for (index, ex) in f.exemplars.iter().enumerate() {
                let bad = |message: String| FrameError::BadExemplar { frame: f.name.clone(), index, message };
                match lus.get(&ex.lu_id) {
                    Some(&(fi, _)) if frames[fi].name == f.name => {}
                    _ => return Err(bad(format!("unknown lexical unit {:?}", ex.lu_id))),
                }
                for l in &ex.labels {
                    if f.fe(&l.fe).is_none() {
                        return Err(bad(format!("unknown frame element {:?}", l.fe)));
                    }
                    if l.start >= l.end {
                        return Err(bad(format!("empty span for {:?}", l.fe)));
                    }
                }
            }
        }
        Ok(FrameDb { frames, by_name, lus })
    }

    pub fn parse(doc: &str) -> Result<Self, FrameError> {
        let root = xml::parse(doc)?;
        if root.name != "frames" {
            return Err(format_err(format!("/{}", root.name), "root element must be frames"));
        }
        let mut frames: Vec<Frame> = Vec::new();
        let mut loose: Vec<LexicalUnit> = Vec::new();
        for (i, el) in root.elements().enumerate() {
            let path = format!("/frames/{}[{}]", el.name, i + 1);
            match el.name.as_str() {
                "frame" => {
                    let name = required(el, &path, "name")?.to_string();
                    let mut frame =
                        Frame { name: name.clone(), definition: String::new(), fe_defs: Vec::new(), lus: Vec::new(), exemplars: Vec::new() };
                    for (j, child) in el.elements().enumerate() {
                        let cpath = format!("{path}/{}[{}]", child.name, j + 1);
                        match child.name.as_str() {
                            "definition" => frame.definition = child.text().trim().to_string(),
                            "FE" => {
                                let core = child.attr("core").unwrap_or("core").parse().map_err(|e: String| format_err(&cpath, e))?;
                                frame.fe_defs.push(FrameElementDef { name: required(child, &cpath, "name")?.to_string(), core });
                            }
                            "lu" => frame.lus.push(parse_lu(child, &cpath, &name)?),
                            "exemplar" => {
                                let ex = parse_exemplar(child).map_err(|message| FrameError::BadExemplar {
                                    frame: name.clone(),
                                    index: frame.exemplars.len(),
                                    message,
                                })?;
                                frame.exemplars.push(ex);
                            }
                            other => return Err(format_err(cpath, format!("unexpected element {other}"))),
                        }
                    }
                    frames.push(frame);
                }
                "lu" => {
                    let frame = required(el, &path, "frame")?.to_string();
                    loose.push(parse_lu(el, &path, &frame)?);
                }
                other => return Err(format_err(path, format!("unexpected element {other}"))),
            }
        }
        for lu in loose {
            match frames.iter_mut().find(|f| f.name == lu.frame_name) {
                Some(f) => f.lus.push(lu),
                None => return Err(FrameError::DanglingFrame { lu: lu.lu_id, frame: lu.frame_name }),
            }
        }
        FrameDb::new(frames)
    }

    pub fn frames(&self) -> &[Frame] {
        &self.frames
    }

    pub fn frame(&self, name: &str) -> Option<&Frame> {
        self.by_name.get(name).map(|&i| &self.frames[i])
    }

    pub fn lu(&self, lu_id: &str) -> Option<&LexicalUnit> {
        self.lus.get(lu_id).map(|&(f, l)| &self.frames[f].lus[l])
    }

    /// Arabic lexical units whose lemma matches under lookup normalization, in database order.
    pub fn arabic_lus(&self, lemma: &str) -> Vec<&LexicalUnit> {
        let key = lookup_key(lemma);
        self.frames.iter().flat_map(|f| &f.lus).filter(|lu| lu.lang == Lang::Ar && lookup_key(&lu.lemma) == key).collect()
    }

    /// The Arabic lexical unit of `frame` for `lemma`, if any.
    pub fn lu_for(&self, frame: &str, lemma: &str) -> Option<&LexicalUnit> {
        self.arabic_lus(lemma).into_iter().find(|lu| lu.frame_name == frame)
    }

    pub fn exemplars(&self, frame: &str) -> &[Exemplar] {
        self.frame(frame).map_or(&[], |f| f.exemplars.as_slice())
    }
}

impl FrameIndex for FrameDb {
    fn frames_for_english(&self, key: &str) -> Vec<String> {
        let key = key.to_lowercase();
        let mut out: Vec<String> = Vec::new();
        for f in &self.frames {
            if f.lus.iter().any(|lu| lu.lang == Lang::En && lu.english_key() == key) && !out.contains(&f.name) {
                out.push(f.name.clone());
            }
        }
        out
    }
}

pub fn load_framedb(path: &Path) -> Result<FrameDb, FrameError> {
    let doc = std::fs::read_to_string(path).map_err(|e| FrameError::Io { path: path.display().to_string(), message: e.to_string() })?;
    FrameDb::parse(&doc)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum SuggestionSource {
    /// The lemma has a lexical unit in the frame.
    Lexical { lu_id: String },
    /// Reached through the lexical-semantic net.
    Net { path: EvidencePath },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FrameSuggestion {
    pub frame: String,
    pub source: SuggestionSource,
}

/// Frames for a target lemma: direct lexical-unit matches first, then net
/// candidates not already listed.
pub fn suggest_frames(lemma: &str, db: &FrameDb, net: &LexNet) -> Vec<FrameSuggestion> {
    let mut out: Vec<FrameSuggestion> = Vec::new();
    for lu in db.arabic_lus(lemma) {
        if !out.iter().any(|s| s.frame == lu.frame_name) {
            out.push(FrameSuggestion { frame: lu.frame_name.clone(), source: SuggestionSource::Lexical { lu_id: lu.lu_id.clone() } });
        }
    }
    for c in net.frame_candidates(lemma, db) {
        if !out.iter().any(|s| s.frame == c.frame) {
            out.push(FrameSuggestion { frame: c.frame, source: SuggestionSource::Net { path: c.path } });
        }
    }
    out
}
