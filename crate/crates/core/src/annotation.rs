//! Layered frame-semantic annotation sets.
//!
//! A set annotates one target in one sentence with five layers. FE, GF and PT
//! share one list of realized anchors; null-instantiated FEs live on the FE
//! layer only.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::{natural_key, CharSpan, Sentence};
use crate::frames::FrameDb;
use crate::lexsem::LexNet;
use crate::morph::{MorphAnalysis, Pos, Voice};
use crate::script::ArabicText;
use crate::syntax::{self, DepRelation, DependencyGraph, GrammFunction, PhraseBase, PhraseType};
use crate::xml::{self, Element, XmlError};

/// Phrase type written for incorporated pronouns.
pub const PRO_INCORP: &str = "Pro-incorp";

macro_rules! code_enum {
    ($name:ident { $($variant:ident => $code:literal),+ $(,)? }) => {
        #[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
        pub enum $name { $(#[serde(rename = $code)] $variant),+ }

        impl $name {
            pub const ALL: &'static [$name] = &[$($name::$variant),+];

            pub fn code(self) -> &'static str {
                match self { $($name::$variant => $code),+ }
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(self.code())
            }
        }

        impl FromStr for $name {
            type Err = String;
            fn from_str(s: &str) -> Result<Self, String> {
                match s {
                    $($code => Ok($name::$variant),)+
                    other => Err(format!("unknown {} {other:?}", stringify!($name))),
                }
            }
        }
    };
}

code_enum!(LayerKind { Target => "Target", FE => "FE", GF => "GF", PT => "PT", Sumo => "Sumo" });
code_enum!(NullKind { INI => "INI", DNI => "DNI", CNI => "CNI" });
code_enum!(Origin { Human => "human", Auto => "auto" });
code_enum!(VoiceCode { A => "A", P => "P" });
code_enum!(Status { Auto => "auto", HumanVerified => "human-verified" });

/// Where a label sits in the sentence.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Anchor {
    /// Character span of the sentence.
    Span(CharSpan),
    /// Zero-width reference to segment `seg` of the token starting at char `at`.
    Segment { at: usize, seg: usize },
    /// FE not realized in the sentence.
    Null(NullKind),
}

impl Anchor {
    pub fn span(start: usize, end: usize) -> Self {
        Anchor::Span(CharSpan::new(start, end))
    }

    /// Surface position used for ordering; null anchors have none.
    pub fn position(&self) -> Option<usize> {
        match self {
            Anchor::Span(s) => Some(s.start),
            Anchor::Segment { at, .. } => Some(*at),
            Anchor::Null(_) => None,
        }
    }

    pub fn is_realized(&self) -> bool {
        !matches!(self, Anchor::Null(_))
    }

    fn sort_key(&self) -> (u8, usize, u8, usize) {
        match *self {
            Anchor::Span(s) => (0, s.start, 0, s.end),
            Anchor::Segment { at, seg } => (0, at, 1, seg),
            Anchor::Null(k) => (1, 0, 2, k as usize),
        }
    }

    /// Only spans overlap; segment and null anchors never do.
    pub fn overlaps(&self, other: &Anchor) -> bool {
        match (self, other) {
            (Anchor::Span(a), Anchor::Span(b)) => a.overlaps(b),
            _ => false,
        }
    }

    /// `segref` attribute value.
    pub fn segref(&self) -> Option<String> {
        match self {
            Anchor::Segment { at, seg } => Some(format!("{at}.{seg}")),
            _ => None,
        }
    }
}

impl PartialOrd for Anchor {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Anchor {
    fn cmp(&self, other: &Self) -> Ordering {
        self.sort_key().cmp(&other.sort_key())
    }
}

impl fmt::Display for Anchor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Anchor::Span(s) => write!(f, "{}-{}", s.start, s.end),
            Anchor::Segment { at, seg } => write!(f, "@{at}.{seg}"),
            Anchor::Null(k) => write!(f, "{k}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Label {
    pub anchor: Anchor,
    /// Empty for an unfilled GF or PT slot.
    pub value: String,
    pub origin: Origin,
    /// Preposition in Arabic script, PT labels of PPs only.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub prep: Option<String>,
}

impl Label {
    pub fn new(anchor: Anchor, value: &str, origin: Origin) -> Self {
        Label { anchor, value: value.to_string(), origin, prep: None }
    }

    pub fn is_empty(&self) -> bool {
        self.value.is_empty()
    }

    /// Human-entered non-empty values are never replaced by autofill.
    pub fn is_protected(&self) -> bool {
        self.origin == Origin::Human && !self.value.is_empty()
    }

    /// PT with its preposition spliced in: `PP(في)-gen`.
    pub fn pt_display(&self) -> String {
        match &self.prep {
            Some(p) => {
                let (base, rest) = self.value.split_once('-').map_or((self.value.as_str(), ""), |(b, r)| (b, r));
                if rest.is_empty() {
                    format!("{base}({p})")
                } else {
                    format!("{base}({p})-{rest}")
                }
            }
            None => self.value.clone(),
        }
    }
}

/// Splits `PP(في)-gen` into `("PP-gen", Some("في"))`.
pub fn split_pt(value: &str) -> (String, Option<String>) {
    if let (Some(open), Some(close)) = (value.find('('), value.find(')')) {
        if open < close {
            let prep = value[open + 1..close].to_string();
            let joined = format!("{}{}", &value[..open], &value[close + 1..]);
            return (joined, (!prep.is_empty()).then_some(prep));
        }
    }
    (value.to_string(), None)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnnotationSet {
    pub aset_id: String,
    pub subcorpus: String,
    pub sentence_id: String,
    pub text: ArabicText,
    pub lu_id: String,
    pub frame: String,
    /// Phrase type of the target's constituent.
    pub target_pt: PhraseBase,
    pub voice: VoiceCode,
    pub status: Status,
    pub layers: BTreeMap<LayerKind, Vec<Label>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AnnotationError {
    #[error("unknown frame {0:?}")]
    UnknownFrame(String),
    #[error("unknown lexical unit {0:?}")]
    UnknownLu(String),
    #[error("frame {frame:?} has no lexical unit for lemma {lemma:?}")]
    NoLexicalUnit { frame: String, lemma: String },
    #[error("span {anchor} is outside the sentence (length {len}) or empty")]
    BadSpan { anchor: Anchor, len: usize },
    #[error("frame {frame:?} has no frame element {fe:?}")]
    UnknownFe { frame: String, fe: String },
    #[error("{layer} label at {anchor} overlaps the label at {other}")]
    OverlapViolation { layer: LayerKind, anchor: Anchor, other: Anchor },
    #[error("{layer} label at {anchor} has no FE label to align with")]
    Unaligned { layer: LayerKind, anchor: Anchor },
    #[error("{layer} does not accept anchor {anchor}")]
    AnchorNotAllowed { layer: LayerKind, anchor: Anchor },
    #[error("bad {layer} value {value:?}: {message}")]
    BadValue { layer: LayerKind, value: String, message: String },
    #[error("the target layer is fixed when the set is created")]
    TargetFixed,
    #[error("no {layer} label at {anchor}")]
    NoSuchLabel { layer: LayerKind, anchor: Anchor },
    #[error("annotation set {aset_id} fails validation: {violations:?}")]
    ValidationFailed { aset_id: String, violations: Vec<Violation> },
    #[error("annotation set {aset_id} belongs to lexical unit {found:?}, not {expected:?}")]
    WrongLexicalUnit { aset_id: String, expected: String, found: String },
    #[error("sentence {0} appears with different texts")]
    InconsistentSentence(String),
    #[error(transparent)]
    Xml(#[from] XmlError),
    #[error("annotation format error at {path}: {message}")]
    Format { path: String, message: String },
}

/// A broken invariant found by [`validate`].
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum Violation {
    UnknownFrame { frame: String },
    UnknownLu { lu_id: String },
    LuFrameMismatch { lu_id: String, frame: String },
    MissingTarget,
    BadSpan { layer: LayerKind, anchor: Anchor },
    AnchorNotAllowed { layer: LayerKind, anchor: Anchor },
    UnknownFe { fe: String },
    Overlap { layer: LayerKind, anchor: Anchor, other: Anchor },
    DuplicateAnchor { layer: LayerKind, anchor: Anchor },
    Misaligned { layer: LayerKind, anchor: Anchor },
    MissingGf { anchor: Anchor },
    MissingPt { anchor: Anchor },
    BadValue { layer: LayerKind, anchor: Anchor, value: String },
    MissingCoreFe { fe: String },
    NullAndRealized { fe: String },
}

fn target_base(pos: Pos) -> PhraseBase {
    match pos {
        Pos::V => PhraseBase::VP,
        Pos::Adj => PhraseBase::AJP,
        Pos::Prep => PhraseBase::PP,
        _ => PhraseBase::NP,
    }
}

/// Starts a set for `target_span`, whose head token has analysis `target`.
pub fn new_annotation_set(
    aset_id: &str,
    subcorpus: &str,
    sentence: &Sentence,
    target_span: CharSpan,
    frame_name: &str,
    db: &FrameDb,
    target: &MorphAnalysis,
) -> Result<AnnotationSet, AnnotationError> {
    if db.frame(frame_name).is_none() {
        return Err(AnnotationError::UnknownFrame(frame_name.to_string()));
    }
    let anchor = Anchor::Span(target_span);
    let len = sentence.text.char_len();
    if target_span.is_empty() || target_span.end > len {
        return Err(AnnotationError::BadSpan { anchor, len });
    }
    let lu = db
        .lu_for(frame_name, target.lemma.as_str())
        .ok_or_else(|| AnnotationError::NoLexicalUnit { frame: frame_name.to_string(), lemma: target.lemma.to_string() })?;
    let voice = match target.features.voice {
        Some(Voice::Passive) => VoiceCode::P,
        _ => VoiceCode::A,
    };
    let mut layers: BTreeMap<LayerKind, Vec<Label>> = LayerKind::ALL.iter().map(|&k| (k, Vec::new())).collect();
    layers.insert(LayerKind::Target, vec![Label::new(anchor, "Target", Origin::Human)]);
    Ok(AnnotationSet {
        aset_id: aset_id.to_string(),
        subcorpus: subcorpus.to_string(),
        sentence_id: sentence.sentence_id.clone(),
        text: sentence.text.clone(),
        lu_id: lu.lu_id.clone(),
        frame: frame_name.to_string(),
        target_pt: target_base(target.pos),
        voice,
        status: Status::Auto,
        layers,
    })
}

impl AnnotationSet {
    pub fn layer(&self, kind: LayerKind) -> &[Label] {
        self.layers.get(&kind).map_or(&[], |v| v.as_slice())
    }

    fn layer_mut(&mut self, kind: LayerKind) -> &mut Vec<Label> {
        self.layers.entry(kind).or_default()
    }

    pub fn target_span(&self) -> Option<CharSpan> {
        self.layer(LayerKind::Target).iter().find_map(|l| match l.anchor {
            Anchor::Span(s) => Some(s),
            _ => None,
        })
    }

    /// The label on `layer` at a realized `anchor`.
    pub fn label_at(&self, layer: LayerKind, anchor: &Anchor) -> Option<&Label> {
        self.layer(layer).iter().find(|l| &l.anchor == anchor)
    }

    /// Realized FE labels in surface order, each with its GF and PT slots.
    pub fn slots(&self) -> Vec<(&Label, Option<&Label>, Option<&Label>)> {
        self.layer(LayerKind::FE)
            .iter()
            .filter(|l| l.anchor.is_realized())
            .map(|fe| (fe, self.label_at(LayerKind::GF, &fe.anchor), self.label_at(LayerKind::PT, &fe.anchor)))
            .collect()
    }

    pub fn surface(&self, span: CharSpan) -> String {
        self.text.slice_chars(span.start, span.end).to_string()
    }

    fn check_bounds(&self, anchor: &Anchor) -> Result<(), AnnotationError> {
        let len = self.text.char_len();
        let ok = match anchor {
            Anchor::Span(s) => !s.is_empty() && s.end <= len,
            Anchor::Segment { at, .. } => *at < len,
            Anchor::Null(_) => true,
        };
        if ok {
            Ok(())
        } else {
            Err(AnnotationError::BadSpan { anchor: *anchor, len })
        }
    }

    fn check_overlap(&self, layer: LayerKind, anchor: &Anchor) -> Result<(), AnnotationError> {
        match self.layer(layer).iter().find(|l| l.anchor != *anchor && l.anchor.overlaps(anchor)) {
            Some(other) => Err(AnnotationError::OverlapViolation { layer, anchor: *anchor, other: other.anchor }),
            None => Ok(()),
        }
    }

    fn sort_layer(&mut self, layer: LayerKind) {
        self.layer_mut(layer).sort_by(|a, b| a.anchor.cmp(&b.anchor).then_with(|| a.value.cmp(&b.value)));
    }

    /// Writes `label` over whatever sits at its anchor.
    fn put(&mut self, layer: LayerKind, label: Label) {
        let labels = self.layer_mut(layer);
        match labels.iter_mut().find(|l| l.anchor == label.anchor) {
            Some(slot) => *slot = label,
            None => labels.push(label),
        }
        self.sort_layer(layer);
    }

    /// Sets a label value. FE values create empty GF and PT slots at the same
    /// anchor; GF and PT values go into existing slots. PT values may name a
    /// preposition as in `PP(في)-gen`.
    pub fn set_label(&mut self, layer: LayerKind, anchor: Anchor, value: &str, origin: Origin, db: &FrameDb) -> Result<(), AnnotationError> {
        let value = value.trim();
        let not_allowed = || AnnotationError::AnchorNotAllowed { layer, anchor };
        if value.is_empty() {
            return Err(AnnotationError::BadValue { layer, value: value.to_string(), message: "empty value".into() });
        }
        self.check_bounds(&anchor)?;
        match layer {
            LayerKind::Target => Err(AnnotationError::TargetFixed),
            LayerKind::FE => {
                let frame = db.frame(&self.frame).ok_or_else(|| AnnotationError::UnknownFrame(self.frame.clone()))?;
                if frame.fe(value).is_none() {
                    return Err(AnnotationError::UnknownFe { frame: self.frame.clone(), fe: value.to_string() });
                }
                if let Anchor::Null(_) = anchor {
                    // One null label per FE; its kind may change.
                    let labels = self.layer_mut(LayerKind::FE);
                    labels.retain(|l| l.anchor.is_realized() || l.value != value);
                    labels.push(Label::new(anchor, value, origin));
                    self.sort_layer(LayerKind::FE);
                    return Ok(());
                }
                self.check_overlap(LayerKind::FE, &anchor)?;
                self.put(LayerKind::FE, Label::new(anchor, value, origin));
                for slot in [LayerKind::GF, LayerKind::PT] {
                    if self.label_at(slot, &anchor).is_none() {
                        self.put(slot, Label::new(anchor, "", Origin::Auto));
                    }
                }
                Ok(())
            }
            LayerKind::GF | LayerKind::PT => {
                if !anchor.is_realized() {
                    return Err(not_allowed());
                }
                if self.label_at(LayerKind::FE, &anchor).is_none() {
                    return Err(AnnotationError::Unaligned { layer, anchor });
                }
                let label = if layer == LayerKind::GF {
                    value.parse::<GrammFunction>().map_err(|message| AnnotationError::BadValue { layer, value: value.to_string(), message })?;
                    Label::new(anchor, value, origin)
                } else {
                    let (pt, prep) = split_pt(value);
                    check_pt(&anchor, &pt, prep.as_deref()).map_err(|message| AnnotationError::BadValue { layer, value: value.to_string(), message })?;
                    Label { anchor, value: pt, origin, prep }
                };
                self.put(layer, label);
                Ok(())
            }
            LayerKind::Sumo => {
                if !matches!(anchor, Anchor::Span(_)) {
                    return Err(not_allowed());
                }
                self.check_overlap(LayerKind::Sumo, &anchor)?;
                self.put(LayerKind::Sumo, Label::new(anchor, value, origin));
                Ok(())
            }
        }
    }

    /// Removes an FE label with its slots, empties a GF or PT slot, or drops a
    /// Sumo label. Null FE labels are addressed by anchor and value.
    pub fn remove_label(&mut self, layer: LayerKind, anchor: Anchor, value: Option<&str>) -> Result<(), AnnotationError> {
        let missing = || AnnotationError::NoSuchLabel { layer, anchor };
        match layer {
            LayerKind::Target => Err(AnnotationError::TargetFixed),
            LayerKind::FE => {
                let labels = self.layer_mut(LayerKind::FE);
                let before = labels.len();
                labels.retain(|l| !(l.anchor == anchor && (anchor.is_realized() || value.is_none_or(|v| v == l.value))));
                if labels.len() == before {
                    return Err(missing());
                }
                if anchor.is_realized() {
                    for slot in [LayerKind::GF, LayerKind::PT] {
                        self.layer_mut(slot).retain(|l| l.anchor != anchor);
                    }
                }
                Ok(())
            }
            LayerKind::GF | LayerKind::PT => {
                let slot = self.layer_mut(layer).iter_mut().find(|l| l.anchor == anchor).ok_or_else(missing)?;
                *slot = Label::new(anchor, "", Origin::Auto);
                Ok(())
            }
            LayerKind::Sumo => {
                let labels = self.layer_mut(LayerKind::Sumo);
                let before = labels.len();
                labels.retain(|l| l.anchor != anchor);
                if labels.len() == before {
                    Err(missing())
                } else {
                    Ok(())
                }
            }
        }
    }

    /// Marks the set human-verified if it validates.
    pub fn mark_verified(&mut self, db: &FrameDb) -> Result<(), Vec<Violation>> {
        let v = validate(self, db);
        if v.is_empty() {
            self.status = Status::HumanVerified;
            Ok(())
        } else {
            Err(v)
        }
    }
}

fn check_pt(anchor: &Anchor, pt: &str, prep: Option<&str>) -> Result<(), String> {
    match anchor {
        Anchor::Segment { .. } if pt == PRO_INCORP && prep.is_none() => Ok(()),
        Anchor::Segment { .. } => Err(format!("segment anchors take {PRO_INCORP}")),
        _ if pt == PRO_INCORP => Err(format!("{PRO_INCORP} needs a segment anchor")),
        _ => {
            let parsed: PhraseType = pt.parse()?;
            if prep.is_some() && parsed.base != PhraseBase::PP {
                return Err("only PP takes a preposition".into());
            }
            Ok(())
        }
    }
}

/// Fills GF, PT and Sumo from a parse of the set's sentence. Human-entered
/// values are kept; earlier automatic values are replaced, or cleared when
/// the new parse has no matching constituent.
pub fn autofill_syntax_layers(aset: &mut AnnotationSet, g: &DependencyGraph, net: &LexNet) {
    let projection = syntax::constituents(g);
    let anchors: Vec<Anchor> = aset.layer(LayerKind::FE).iter().map(|l| l.anchor).filter(Anchor::is_realized).collect();
    let mut heads: Vec<usize> = Vec::new();
    for anchor in anchors {
        let (gf, pt, prep) = match anchor {
            Anchor::Span(span) => match projection.with_span(span) {
                Some(c) => {
                    heads.push(semantic_head(c, g));
                    (Some(syntax::grammatical_function(c, g).to_string()), Some(c.pt.to_string()), c.prep_display())
                }
                None => (None, None, None),
            },
            Anchor::Segment { at, seg } => {
                let verb = g.nodes.iter().position(|n| n.token.char_span.start == at);
                match verb.and_then(|v| g.incorporated.iter().find(|i| i.verb == v && i.segment == seg)) {
                    Some(inc) => (Some(syntax::incorporated_function(inc.relation).to_string()), Some(PRO_INCORP.to_string()), None),
                    None => (None, None, None),
                }
            }
            Anchor::Null(_) => continue,
        };
        fill(aset, LayerKind::GF, anchor, gf, None);
        fill(aset, LayerKind::PT, anchor, pt, prep);
    }

    if let Some(target) = aset.target_span() {
        if let Some(t) = g.nodes.iter().position(|n| target.contains(&n.token.char_span)) {
            prefill_sumo(aset, target, &g.nodes[t].analysis, net);
        }
    }
    for h in heads {
        let node = &g.nodes[h];
        prefill_sumo(aset, node.token.char_span, &node.analysis, net);
    }
}

/// Content word of a constituent: the object noun for separate prepositions.
fn semantic_head(c: &syntax::Constituent, g: &DependencyGraph) -> usize {
    if g.nodes[c.head].analysis.pos == Pos::Prep {
        if let Some(d) = g.dependents(c.head).find(|d| d.relation == DepRelation::PrepObject) {
            return d.dep;
        }
    }
    c.head
}

fn fill(aset: &mut AnnotationSet, layer: LayerKind, anchor: Anchor, value: Option<String>, prep: Option<String>) {
    let current = aset.label_at(layer, &anchor);
    if current.is_some_and(Label::is_protected) {
        return;
    }
    let label = match value {
        Some(v) => Label { anchor, value: v, origin: Origin::Auto, prep },
        None => Label::new(anchor, "", Origin::Auto),
    };
    aset.put(layer, label);
}

fn prefill_sumo(aset: &mut AnnotationSet, span: CharSpan, analysis: &MorphAnalysis, net: &LexNet) {
    let anchor = Anchor::Span(span);
    let clashes = aset.layer(LayerKind::Sumo).iter().filter(|l| l.anchor.overlaps(&anchor) || l.anchor == anchor);
    if clashes.clone().any(|l| l.origin == Origin::Human) {
        return;
    }
    let Some(link) = net.concept_for(analysis.lemma.as_str()) else {
        return;
    };
    aset.layer_mut(LayerKind::Sumo).retain(|l| !(l.anchor.overlaps(&anchor) || l.anchor == anchor));
    aset.put(LayerKind::Sumo, Label::new(anchor, &link.concept, Origin::Auto));
}

/// All broken invariants of the set; empty iff the set is valid.
pub fn validate(aset: &AnnotationSet, db: &FrameDb) -> Vec<Violation> {
    let mut out = Vec::new();
    let frame = db.frame(&aset.frame);
    if frame.is_none() {
        out.push(Violation::UnknownFrame { frame: aset.frame.clone() });
    }
    match db.lu(&aset.lu_id) {
        None => out.push(Violation::UnknownLu { lu_id: aset.lu_id.clone() }),
        Some(lu) if lu.frame_name != aset.frame => out.push(Violation::LuFrameMismatch { lu_id: aset.lu_id.clone(), frame: aset.frame.clone() }),
        Some(_) => {}
    }
    if aset.target_span().is_none() {
        out.push(Violation::MissingTarget);
    }
    let len = aset.text.char_len();
    for (&layer, labels) in &aset.layers {
        for (i, l) in labels.iter().enumerate() {
            let in_bounds = match l.anchor {
                Anchor::Span(s) => !s.is_empty() && s.end <= len,
                Anchor::Segment { at, .. } => at < len,
                Anchor::Null(_) => true,
            };
            if !in_bounds {
                out.push(Violation::BadSpan { layer, anchor: l.anchor });
            }
            let allowed = matches!(
                (layer, l.anchor),
                (_, Anchor::Span(_)) | (LayerKind::FE | LayerKind::GF | LayerKind::PT, Anchor::Segment { .. }) | (LayerKind::FE, Anchor::Null(_))
            );
            if !allowed {
                out.push(Violation::AnchorNotAllowed { layer, anchor: l.anchor });
            }
            for other in &labels[..i] {
                if other.anchor == l.anchor && l.anchor.is_realized() {
                    out.push(Violation::DuplicateAnchor { layer, anchor: l.anchor });
                } else if other.anchor.overlaps(&l.anchor) {
                    out.push(Violation::Overlap { layer, anchor: l.anchor, other: other.anchor });
                }
            }
        }
    }

    let fe_anchors: Vec<Anchor> = aset.layer(LayerKind::FE).iter().map(|l| l.anchor).filter(Anchor::is_realized).collect();
    for layer in [LayerKind::GF, LayerKind::PT] {
        for l in aset.layer(layer) {
            if !fe_anchors.contains(&l.anchor) {
                out.push(Violation::Misaligned { layer, anchor: l.anchor });
            }
        }
    }
    for (fe, gf, pt) in aset.slots() {
        match gf {
            None => out.push(Violation::Misaligned { layer: LayerKind::GF, anchor: fe.anchor }),
            Some(l) if l.is_empty() => out.push(Violation::MissingGf { anchor: fe.anchor }),
            Some(l) if l.value.parse::<GrammFunction>().is_err() => {
                out.push(Violation::BadValue { layer: LayerKind::GF, anchor: l.anchor, value: l.value.clone() })
            }
            Some(_) => {}
        }
        match pt {
            None => out.push(Violation::Misaligned { layer: LayerKind::PT, anchor: fe.anchor }),
            Some(l) if l.is_empty() => out.push(Violation::MissingPt { anchor: fe.anchor }),
            Some(l) if check_pt(&l.anchor, &l.value, l.prep.as_deref()).is_err() => {
                out.push(Violation::BadValue { layer: LayerKind::PT, anchor: l.anchor, value: l.pt_display() })
            }
            Some(_) => {}
        }
    }

    if let Some(frame) = frame {
        let fe_labels = aset.layer(LayerKind::FE);
        for l in fe_labels {
            if frame.fe(&l.value).is_none() {
                out.push(Violation::UnknownFe { fe: l.value.clone() });
            }
        }
        for def in frame.core_fes() {
            if !fe_labels.iter().any(|l| l.value == def.name) {
                out.push(Violation::MissingCoreFe { fe: def.name.clone() });
            }
        }
        for def in &frame.fe_defs {
            let realized = fe_labels.iter().any(|l| l.value == def.name && l.anchor.is_realized());
            let null = fe_labels.iter().any(|l| l.value == def.name && !l.anchor.is_realized());
            if realized && null {
                out.push(Violation::NullAndRealized { fe: def.name.clone() });
            }
        }
    }
    out
}

fn sort_sets(sets: &mut [&AnnotationSet]) {
    sets.sort_by_cached_key(|s| (natural_key(&s.subcorpus), natural_key(&s.sentence_id), natural_key(&s.aset_id)));
}

fn write_label(out: &mut String, layer: LayerKind, l: &Label) {
    let mut pairs: Vec<(&str, String)> = Vec::new();
    match l.anchor {
        Anchor::Span(s) => {
            pairs.push(("start", s.start.to_string()));
            pairs.push(("end", s.end.to_string()));
        }
        Anchor::Segment { .. } => pairs.push(("segref", l.anchor.segref().unwrap())),
        Anchor::Null(k) => pairs.push(("itype", k.to_string())),
    }
    pairs.push(("value", l.value.clone()));
    if layer == LayerKind::PT {
        if let Some(p) = &l.prep {
            pairs.push(("prep", p.clone()));
        }
    }
    pairs.push(("origin", l.origin.to_string()));
    let borrowed: Vec<(&str, &str)> = pairs.iter().map(|(k, v)| (*k, v.as_str())).collect();
    out.push_str(&format!("<label{}/>\n", xml::attrs(&borrowed)));
}

/// Serializes sets without validating them. `layers` selects the layers to
/// write besides Target; `None` writes all of them.
pub fn write_annotation(lu_id: &str, frame: &str, sets: &[AnnotationSet], layers: Option<&[LayerKind]>) -> Result<String, AnnotationError> {
    let mut sorted: Vec<&AnnotationSet> = sets.iter().collect();
    sort_sets(&mut sorted);
    let head = xml::attrs(&[("luID", lu_id), ("frame", frame)]);
    if sorted.is_empty() {
        return Ok(format!("<lexunit{head}/>\n"));
    }
    let included = |k: LayerKind| k == LayerKind::Target || layers.is_none_or(|ls| ls.contains(&k));
    let mut out = format!("<lexunit{head}>\n");
    let mut i = 0;
    while i < sorted.len() {
        let sub = &sorted[i].subcorpus;
        out.push_str(&format!("<subcorpus{}>\n", xml::attrs(&[("name", sub)])));
        while i < sorted.len() && &sorted[i].subcorpus == sub {
            let first = sorted[i];
            out.push_str(&format!("<sentence{}>\n", xml::attrs(&[("sentID", &first.sentence_id)])));
            out.push_str(&format!("<text>{}</text>\n", xml::escape_text(first.text.as_str())));
            while i < sorted.len() && sorted[i].subcorpus == *sub && sorted[i].sentence_id == first.sentence_id {
                let s = sorted[i];
                if s.text != first.text {
                    return Err(AnnotationError::InconsistentSentence(s.sentence_id.clone()));
                }
                if s.lu_id != lu_id {
                    return Err(AnnotationError::WrongLexicalUnit { aset_id: s.aset_id.clone(), expected: lu_id.to_string(), found: s.lu_id.clone() });
                }
                let target_pt = s.target_pt.to_string();
                out.push_str(&format!(
                    "<annotationSet{}>\n",
                    xml::attrs(&[("asetID", &s.aset_id), ("voice", s.voice.code()), ("status", s.status.code()), ("targetPT", &target_pt)])
                ));
                for &kind in LayerKind::ALL.iter().filter(|&&k| included(k)) {
                    let labels = s.layer(kind);
                    if labels.is_empty() {
                        out.push_str(&format!("<layer{}/>\n", xml::attrs(&[("name", kind.code())])));
                        continue;
                    }
                    out.push_str(&format!("<layer{}>\n", xml::attrs(&[("name", kind.code())])));
                    for l in labels {
                        write_label(&mut out, kind, l);
                    }
                    out.push_str("</layer>\n");
                }
                out.push_str("</annotationSet>\n");
                i += 1;
            }
            out.push_str("</sentence>\n");
        }
        out.push_str("</subcorpus>\n");
    }
    out.push_str("</lexunit>\n");
    Ok(out)
}

/// Validates every set, then writes them as one lexical-unit file.
pub fn export_annotation(lu_id: &str, sets: &[AnnotationSet], layers: Option<&[LayerKind]>, db: &FrameDb) -> Result<String, AnnotationError> {
    let lu = db.lu(lu_id).ok_or_else(|| AnnotationError::UnknownLu(lu_id.to_string()))?;
    for s in sets {
        let violations = validate(s, db);
        if !violations.is_empty() {
            return Err(AnnotationError::ValidationFailed { aset_id: s.aset_id.clone(), violations });
        }
    }
    write_annotation(lu_id, &lu.frame_name, sets, layers)
}

/// Contents of one lexical-unit annotation file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnnotationFile {
    pub lu_id: String,
    pub frame: String,
    pub sets: Vec<AnnotationSet>,
}

fn format_err(path: &str, message: impl Into<String>) -> AnnotationError {
    AnnotationError::Format { path: path.to_string(), message: message.into() }
}

fn attr<'a>(el: &'a Element, path: &str, name: &str) -> Result<&'a str, AnnotationError> {
    el.attr(name).ok_or_else(|| format_err(path, format!("missing attribute {name}")))
}

fn parsed<T: FromStr>(el: &Element, path: &str, name: &str) -> Result<T, AnnotationError>
where
    T::Err: fmt::Display,
{
    let raw = attr(el, path, name)?;
    raw.parse().map_err(|e: T::Err| format_err(path, format!("attribute {name}: {e}")))
}

fn parse_label(el: &Element, path: &str, layer: LayerKind) -> Result<Label, AnnotationError> {
    let anchor = if let Some(seg) = el.attr("segref") {
        let (at, seg) = seg.split_once('.').ok_or_else(|| format_err(path, "segref must be at.segment"))?;
        let num = |s: &str| s.parse::<usize>().map_err(|e| format_err(path, format!("segref: {e}")));
        Anchor::Segment { at: num(at)?, seg: num(seg)? }
    } else if let Some(kind) = el.attr("itype") {
        Anchor::Null(kind.parse().map_err(|e: String| format_err(path, e))?)
    } else {
        Anchor::span(parsed(el, path, "start")?, parsed(el, path, "end")?)
    };
    if let Anchor::Span(s) = anchor {
        if s.start > s.end {
            return Err(format_err(path, "start after end"));
        }
    }
    let prep = el.attr("prep").map(str::to_string);
    if prep.is_some() && layer != LayerKind::PT {
        return Err(format_err(path, "prep only applies to PT labels"));
    }
    Ok(Label {
        anchor,
        value: attr(el, path, "value")?.to_string(),
        origin: el.attr("origin").map_or(Ok(Origin::Human), |o| o.parse().map_err(|e: String| format_err(path, e)))?,
        prep,
    })
}

pub fn import_annotation(doc: &str) -> Result<AnnotationFile, AnnotationError> {
    let root = xml::parse(doc)?;
    if root.name != "lexunit" {
        return Err(format_err(&format!("/{}", root.name), "root element must be lexunit"));
    }
    let lu_id = attr(&root, "/lexunit", "luID")?.to_string();
    let frame = attr(&root, "/lexunit", "frame")?.to_string();
    let mut sets = Vec::new();
    for (si, sub) in root.elements().enumerate() {
        let sp = format!("/lexunit/subcorpus[{}]", si + 1);
        if sub.name != "subcorpus" {
            return Err(format_err(&sp, format!("unexpected element {}", sub.name)));
        }
        let name = attr(sub, &sp, "name")?;
        for (ti, sent) in sub.elements().enumerate() {
            let tp = format!("{sp}/sentence[{}]", ti + 1);
            if sent.name != "sentence" {
                return Err(format_err(&tp, format!("unexpected element {}", sent.name)));
            }
            let sent_id = attr(sent, &tp, "sentID")?;
            let text_el = sent.elements().find(|e| e.name == "text").ok_or_else(|| format_err(&tp, "missing text"))?;
            let text = ArabicText::new(&text_el.text()).map_err(|e| format_err(&tp, e.to_string()))?;
            for (ai, aset) in sent.elements().filter(|e| e.name != "text").enumerate() {
                let ap = format!("{tp}/annotationSet[{}]", ai + 1);
                if aset.name != "annotationSet" {
                    return Err(format_err(&ap, format!("unexpected element {}", aset.name)));
                }
                let target_pt: PhraseType = parsed(aset, &ap, "targetPT")?;
                let mut layers: BTreeMap<LayerKind, Vec<Label>> = LayerKind::ALL.iter().map(|&k| (k, Vec::new())).collect();
                for (li, layer) in aset.elements().enumerate() {
                    let lp = format!("{ap}/layer[{}]", li + 1);
                    if layer.name != "layer" {
                        return Err(format_err(&lp, format!("unexpected element {}", layer.name)));
                    }
                    let kind: LayerKind = parsed(layer, &lp, "name")?;
                    let mut labels = Vec::new();
                    for (bi, label) in layer.elements().enumerate() {
                        labels.push(parse_label(label, &format!("{lp}/label[{}]", bi + 1), kind)?);
                    }
                    layers.insert(kind, labels);
                }
                let mut set = AnnotationSet {
                    aset_id: attr(aset, &ap, "asetID")?.to_string(),
                    subcorpus: name.to_string(),
                    sentence_id: sent_id.to_string(),
                    text: text.clone(),
                    lu_id: lu_id.clone(),
                    frame: frame.clone(),
                    target_pt: target_pt.base,
                    voice: parsed(aset, &ap, "voice")?,
                    status: parsed(aset, &ap, "status")?,
                    layers,
                };
                for kind in LayerKind::ALL {
                    set.sort_layer(*kind);
                }
                sets.push(set);
            }
        }
    }
    Ok(AnnotationFile { lu_id, frame, sets })
}
