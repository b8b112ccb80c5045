//! Scripted annotation decisions: which frame a target evokes and where its
//! frame elements are, in a tab-separated file.
//!
//! ```text
//! PLC-p1-s0<TAB>t0<TAB>Placing<TAB>Agent=t1 Theme=t2 Source=t3..t4 Goal=DNI
//! ```
//!
//! Element references are `tN`, `tN..tM`, `tN.S` (segment `S` of token `N`)
//! or a null-instantiation code.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::annotation::{autofill_syntax_layers, new_annotation_set, Anchor, AnnotationError, AnnotationSet, LayerKind, NullKind, Origin};
use crate::corpus::{CharSpan, Sentence};
use crate::frames::FrameDb;
use crate::lexsem::LexNet;
use crate::syntax::DependencyGraph;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("decisions line {line}: {message}")]
pub struct DecisionError {
    pub line: usize,
    pub message: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ElementRef {
    /// Inclusive token index range.
    Tokens(usize, usize),
    Segment { token: usize, seg: usize },
    Null(NullKind),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Decision {
    pub sentence_id: String,
    pub target: usize,
    pub frame: String,
    pub elements: Vec<(String, ElementRef)>,
}

impl Decision {
    pub fn aset_id(&self) -> String {
        format!("{}-t{}", self.sentence_id, self.target)
    }
}

fn token_index(s: &str) -> Result<usize, String> {
    s.strip_prefix('t').and_then(|n| n.parse().ok()).ok_or_else(|| format!("bad token reference {s:?}"))
}

fn parse_ref(s: &str) -> Result<ElementRef, String> {
    if let Ok(kind) = s.parse::<NullKind>() {
        return Ok(ElementRef::Null(kind));
    }
    if let Some((a, b)) = s.split_once("..") {
        let (a, b) = (token_index(a)?, token_index(b)?);
        if a > b {
            return Err(format!("reversed range {s:?}"));
        }
        return Ok(ElementRef::Tokens(a, b));
    }
    if let Some((t, seg)) = s.split_once('.') {
        let seg = seg.parse().map_err(|_| format!("bad segment in {s:?}"))?;
        return Ok(ElementRef::Segment { token: token_index(t)?, seg });
    }
    let t = token_index(s)?;
    Ok(ElementRef::Tokens(t, t))
}

pub fn parse_decisions(tsv: &str) -> Result<Vec<Decision>, DecisionError> {
    let mut out = Vec::new();
    for (i, line) in tsv.lines().enumerate() {
        let err = |message: String| DecisionError { line: i + 1, message };
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let cols: Vec<&str> = line.split('\t').collect();
        if cols.len() != 4 {
            return Err(err(format!("expected 4 columns, found {}", cols.len())));
        }
        let mut elements = Vec::new();
        for item in cols[3].split_whitespace() {
            let (fe, r) = item.split_once('=').ok_or_else(|| err(format!("expected FE=ref, found {item:?}")))?;
            elements.push((fe.to_string(), parse_ref(r).map_err(err)?));
        }
        out.push(Decision { sentence_id: cols[0].to_string(), target: token_index(cols[1]).map_err(err)?, frame: cols[2].to_string(), elements });
    }
    Ok(out)
}

fn anchor_for(sentence: &Sentence, r: ElementRef) -> Result<Anchor, AnnotationError> {
    let span = |t: usize| {
        sentence.tokens.get(t).map(|tok| tok.char_span).ok_or(AnnotationError::BadSpan { anchor: Anchor::span(0, 0), len: sentence.tokens.len() })
    };
    Ok(match r {
        ElementRef::Tokens(a, b) => Anchor::Span(CharSpan::new(span(a)?.start, span(b)?.end)),
        ElementRef::Segment { token, seg } => Anchor::Segment { at: span(token)?.start, seg },
        ElementRef::Null(k) => Anchor::Null(k),
    })
}

/// Builds the annotation set a decision describes and fills its syntax
/// layers from `graph`, the parse of `sentence`.
pub fn apply_decision(
    d: &Decision,
    subcorpus: &str,
    sentence: &Sentence,
    graph: &DependencyGraph,
    db: &FrameDb,
    net: &LexNet,
) -> Result<AnnotationSet, AnnotationError> {
    let target = sentence.tokens.get(d.target).ok_or(AnnotationError::BadSpan { anchor: Anchor::span(0, 0), len: sentence.tokens.len() })?;
    let mut aset = new_annotation_set(&d.aset_id(), subcorpus, sentence, target.char_span, &d.frame, db, &graph.nodes[d.target].analysis)?;
    for (fe, r) in &d.elements {
        aset.set_label(LayerKind::FE, anchor_for(sentence, *r)?, fe, Origin::Human, db)?;
    }
    autofill_syntax_layers(&mut aset, graph, net);
    Ok(aset)
}
