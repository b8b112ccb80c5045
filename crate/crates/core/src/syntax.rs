//! Rule-based dependency analysis driven by agreement features, and
//! projection of dependency subtrees to case-bearing constituents.
//!
//! The cascade runs in a fixed order: nominal chunking (idafa, Sifa),
//! preposition objects, then per-verb clause roles (subject before
//! accusatives before obliques). Ties between candidate subjects go to the
//! one nearest the verb.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::{CharSpan, Sentence, Token};
use crate::lexsem::LexNet;
use crate::morph::{analyze_best, Case, Definiteness, Derivation, Lexicon, MorphAnalysis, Number, Person, Pos, SegmentRole};
use crate::script::{from_translit, normalize_translit, NormalizationPolicy, Translit};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SyntaxError {
    #[error("no finite verb or nominal can anchor the clause")]
    NoRoot,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum DepRelation {
    Subject,
    Object,
    Object2,
    /// Sifa: attributive adjective.
    Adjective,
    Idafa,
    PrepObject,
    CognateAccusative,
    AccusativeOfCause,
    Conjunct,
    Marker,
}

impl DepRelation {
    pub const ALL: [DepRelation; 10] = [
        DepRelation::Subject,
        DepRelation::Object,
        DepRelation::Object2,
        DepRelation::Adjective,
        DepRelation::Idafa,
        DepRelation::PrepObject,
        DepRelation::CognateAccusative,
        DepRelation::AccusativeOfCause,
        DepRelation::Conjunct,
        DepRelation::Marker,
    ];

    pub fn code(self) -> &'static str {
        match self {
            DepRelation::Subject => "subject",
            DepRelation::Object => "object",
            DepRelation::Object2 => "object2",
            DepRelation::Adjective => "adjective",
            DepRelation::Idafa => "idafa",
            DepRelation::PrepObject => "prep-object",
            DepRelation::CognateAccusative => "cognate-accusative",
            DepRelation::AccusativeOfCause => "accusative-of-cause",
            DepRelation::Conjunct => "conjunct",
            DepRelation::Marker => "marker",
        }
    }
}

impl fmt::Display for DepRelation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

impl FromStr for DepRelation {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        DepRelation::ALL.into_iter().find(|r| r.code() == s).ok_or_else(|| format!("unknown relation {s:?}"))
    }
}

/// A token with its selected reading.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Node {
    pub token: Token,
    pub analysis: MorphAnalysis,
    /// Number of readings the analyzer produced before selection.
    pub readings: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DepArc {
    pub head: usize,
    pub dep: usize,
    pub relation: DepRelation,
}

/// A clause role realized by a pronoun segment inside the verb token.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Incorporated {
    pub verb: usize,
    pub segment: usize,
    pub relation: DepRelation,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DependencyGraph {
    pub nodes: Vec<Node>,
    pub arcs: Vec<DepArc>,
    pub root: usize,
    pub incorporated: Vec<Incorporated>,
}

impl DependencyGraph {
    pub fn head_of(&self, i: usize) -> Option<(usize, DepRelation)> {
        self.arcs.iter().find(|a| a.dep == i).map(|a| (a.head, a.relation))
    }

    pub fn dependents(&self, i: usize) -> impl Iterator<Item = &DepArc> {
        self.arcs.iter().filter(move |a| a.head == i)
    }

    pub fn token_id(&self, i: usize) -> &str {
        &self.nodes[i].token.token_id
    }

    /// Token indices of the subtree rooted at `i`, ascending.
    pub fn subtree(&self, i: usize) -> Vec<usize> {
        let mut out = BTreeSet::from([i]);
        let mut stack = vec![i];
        while let Some(n) = stack.pop() {
            for a in self.dependents(n) {
                if out.insert(a.dep) {
                    stack.push(a.dep);
                }
            }
        }
        out.into_iter().collect()
    }

    /// Single root, one head per other node, no cycles.
    pub fn check_tree(&self) -> Result<(), String> {
        let n = self.nodes.len();
        if self.arcs.len() + 1 != n {
            return Err(format!("{} arcs for {} nodes", self.arcs.len(), n));
        }
        let mut heads = vec![None; n];
        for a in &self.arcs {
            if a.dep >= n || a.head >= n {
                return Err(format!("arc {a:?} out of range"));
            }
            if heads[a.dep].replace(a.head).is_some() {
                return Err(format!("node {} has two heads", a.dep));
            }
        }
        if heads[self.root].is_some() {
            return Err("root has a head".into());
        }
        for start in 0..n {
            let mut cur = start;
            let mut steps = 0;
            while let Some(h) = heads[cur] {
                cur = h;
                steps += 1;
                if steps > n {
                    return Err(format!("cycle through node {start}"));
                }
            }
            if cur != self.root {
                return Err(format!("node {start} does not reach the root"));
            }
        }
        Ok(())
    }
}

/// Semantic information the parser consults for ditransitive objects.
pub trait Animacy {
    fn is_animate(&self, lemma: &str) -> bool;
}

impl Animacy for LexNet {
    fn is_animate(&self, lemma: &str) -> bool {
        LexNet::is_animate(self, lemma)
    }
}

/// Animacy oracle that knows nothing; ditransitive objects fall back to linear order.
pub struct NoSemantics;

impl Animacy for NoSemantics {
    fn is_animate(&self, _: &str) -> bool {
        false
    }
}

pub fn analyze_tokens(tokens: &[Token], lex: &Lexicon) -> Vec<Node> {
    let mut previous = None;
    tokens
        .iter()
        .map(|t| {
            let (analysis, readings) = analyze_best(&t.token_id, &t.translit(), previous, lex);
            previous = Some(analysis.pos);
            Node { token: t.clone(), analysis, readings }
        })
        .collect()
}

pub fn analyze_sentence(sentence: &Sentence, lex: &Lexicon) -> Vec<Node> {
    analyze_tokens(&sentence.tokens, lex)
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct AgreementReport {
    pub violated: Vec<&'static str>,
}

impl AgreementReport {
    pub fn ok(&self) -> bool {
        self.violated.is_empty()
    }
}

fn token_position(id: &str) -> Option<usize> {
    id.rsplit_once("-t").and_then(|(_, n)| n.parse().ok())
}

fn differs<T: PartialEq>(a: Option<T>, b: Option<T>) -> bool {
    matches!((a, b), (Some(x), Some(y)) if x != y)
}

/// Agreement between a head and its dependent for `rel`. Unspecified
/// features never conflict. For subjects, a singular verb may precede a
/// plural subject; the order is read from the token ids and defaults to
/// verb-first when they carry no position.
pub fn agreement_check(head: &MorphAnalysis, dep: &MorphAnalysis, rel: DepRelation) -> AgreementReport {
    let (h, d) = (&head.features, &dep.features);
    let mut violated = Vec::new();
    match rel {
        DepRelation::Adjective => {
            if differs(h.gender, d.gender) {
                violated.push("gender");
            }
            if differs(h.number, d.number) {
                violated.push("number");
            }
            if differs(h.case, d.case) {
                violated.push("case");
            }
            if differs(h.definiteness, d.definiteness) {
                violated.push("definiteness");
            }
        }
        DepRelation::Subject => {
            let postverbal = match (token_position(&head.token_id), token_position(&dep.token_id)) {
                (Some(v), Some(s)) => s > v,
                _ => true,
            };
            if differs(h.gender, d.gender) {
                violated.push("gender");
            }
            let vso_exempt = postverbal && h.number == Some(Number::Sg);
            if !vso_exempt && differs(h.number, d.number) {
                violated.push("number");
            }
            if dep.pos != Pos::Pro && h.person.is_some_and(|p| p != Person::Third) {
                violated.push("person");
            }
        }
        DepRelation::Idafa if d.case.is_some_and(|c| c != Case::Gen) => violated.push("case"),
        _ => {}
    }
    AgreementReport { violated }
}

/// A maximal nominal chunk: head plus idafa and Sifa dependents.
struct Chunk {
    head: usize,
    members: Vec<usize>,
}

struct Builder<'a> {
    nodes: &'a [Node],
    heads: Vec<Option<(usize, DepRelation)>>,
}

impl Builder<'_> {
    fn a(&self, i: usize) -> &MorphAnalysis {
        &self.nodes[i].analysis
    }

    fn attach(&mut self, head: usize, dep: usize, rel: DepRelation) {
        debug_assert!(self.heads[dep].is_none());
        self.heads[dep] = Some((head, rel));
    }

    fn chunks(&mut self) -> Vec<Chunk> {
        let n = self.nodes.len();
        let mut chunks: Vec<Chunk> = Vec::new();
        for i in 0..n {
            let a = self.a(i).clone();
            let adjacent = chunks.last().filter(|c| c.members.last() == Some(&(i.wrapping_sub(1)))).is_some();
            let free = a.proclitic_preposition().is_none() && !a.has_conjunction_proclitic();
            match a.pos {
                Pos::Adj if adjacent && free => {
                    let chunk = chunks.last().unwrap();
                    let target = chunk.members.iter().rev().copied().find(|&m| {
                        matches!(self.a(m).pos, Pos::N | Pos::PN)
                            && agreement_check(self.a(m), &a, DepRelation::Adjective).ok()
                    });
                    if let Some(noun) = target {
                        self.attach(noun, i, DepRelation::Adjective);
                        chunks.last_mut().unwrap().members.push(i);
                        continue;
                    }
                    chunks.push(Chunk { head: i, members: vec![i] });
                }
                Pos::N | Pos::PN if adjacent && free => {
                    let prev = i - 1;
                    let p = self.a(prev);
                    let head_ok = p.pos == Pos::N
                        && p.features.definiteness.is_none()
                        && !p.segments.iter().any(|s| s.pos == Pos::Pro && s.role == SegmentRole::EncliticOther);
                    let dep_ok = a.features.case == Some(Case::Gen)
                        || (a.features.case.is_none() && a.features.definiteness == Some(Definiteness::Def));
                    if head_ok && dep_ok && agreement_check(p, &a, DepRelation::Idafa).ok() {
                        self.attach(prev, i, DepRelation::Idafa);
                        chunks.last_mut().unwrap().members.push(i);
                        continue;
                    }
                    chunks.push(Chunk { head: i, members: vec![i] });
                }
                Pos::N | Pos::PN | Pos::Pro | Pos::Adj => chunks.push(Chunk { head: i, members: vec![i] }),
                _ => {}
            }
        }
        chunks
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Unit {
    /// Nominal chunk head without a preposition.
    Np(usize),
    /// Standalone preposition, or a noun carrying a clitic preposition.
    Pp(usize),
    /// Adjective-headed chunk.
    Ajp(usize),
}

impl Unit {
    fn index(self) -> usize {
        match self {
            Unit::Np(i) | Unit::Pp(i) | Unit::Ajp(i) => i,
        }
    }
}

/// Builds the dependency tree. The animacy oracle separates recipient and
/// theme when a ditransitive verb takes two accusatives.
pub fn parse(nodes: Vec<Node>, sem: &dyn Animacy) -> Result<DependencyGraph, SyntaxError> {
    let n = nodes.len();
    if n == 0 {
        return Err(SyntaxError::NoRoot);
    }
    let mut b = Builder { nodes: &nodes, heads: vec![None; n] };
    let chunks = b.chunks();
    let chunk_heads: BTreeSet<usize> = chunks.iter().map(|c| c.head).collect();

    let mut units: Vec<Unit> = Vec::new();
    for i in 0..n {
        let a = b.a(i);
        if a.pos == Pos::Prep {
            if chunk_heads.contains(&(i + 1)) && b.a(i + 1).proclitic_preposition().is_none() {
                b.attach(i, i + 1, DepRelation::PrepObject);
            }
            units.push(Unit::Pp(i));
        } else if chunk_heads.contains(&i) && b.heads[i].is_none() {
            if a.proclitic_preposition().is_some() {
                units.push(Unit::Pp(i));
            } else if a.pos == Pos::Adj {
                units.push(Unit::Ajp(i));
            } else {
                units.push(Unit::Np(i));
            }
        }
    }

    let verbs: Vec<usize> = (0..n).filter(|&i| b.a(i).pos == Pos::V).collect();
    let mut incorporated = Vec::new();
    let root;
    if verbs.is_empty() {
        root = units
            .iter()
            .find_map(|u| match u {
                Unit::Np(i) | Unit::Ajp(i) => Some(*i),
                Unit::Pp(_) => None,
            })
            .or_else(|| units.first().map(|u| u.index()))
            .ok_or(SyntaxError::NoRoot)?;
        for u in &units {
            let i = u.index();
            if i == root {
                continue;
            }
            let rel = if matches!(u, Unit::Pp(_)) { DepRelation::PrepObject } else { DepRelation::Marker };
            b.attach(root, i, rel);
        }
    } else {
        root = verbs[0];
        for w in verbs.windows(2) {
            b.attach(w[0], w[1], DepRelation::Conjunct);
        }
        let owner = |i: usize| verbs.iter().rev().copied().find(|&v| v < i).unwrap_or(verbs[0]);
        for &v in &verbs {
            let mine: Vec<Unit> = units.iter().copied().filter(|u| owner(u.index()) == v).collect();
            clause(&mut b, v, &mine, sem, &mut incorporated);
        }
        // Particles and free conjunctions mark the next verb.
        for i in 0..n {
            if b.heads[i].is_none() && i != root && matches!(b.a(i).pos, Pos::Part | Pos::Conj) {
                if let Some(&v) = verbs.iter().find(|&&v| v > i) {
                    b.attach(v, i, DepRelation::Marker);
                }
            }
        }
    }
    for i in 0..n {
        if i != root && b.heads[i].is_none() {
            b.attach(root, i, DepRelation::Marker);
        }
    }
    let arcs = b
        .heads
        .iter()
        .enumerate()
        .filter_map(|(dep, h)| h.map(|(head, relation)| DepArc { head, dep, relation }))
        .collect();
    Ok(DependencyGraph { nodes, arcs, root, incorporated })
}

fn clause(b: &mut Builder<'_>, v: usize, units: &[Unit], sem: &dyn Animacy, incorporated: &mut Vec<Incorporated>) {
    let verb = b.a(v).clone();
    let nps: Vec<usize> = units.iter().filter_map(|u| if let Unit::Np(i) = u { Some(*i) } else { None }).collect();
    let case = |b: &Builder<'_>, i: usize| b.a(i).features.case;

    // Subject: nearest agreeing nominative after the verb, else before it.
    let agrees = |b: &Builder<'_>, i: usize| agreement_check(&verb, b.a(i), DepRelation::Subject).ok();
    let pick = |b: &Builder<'_>, cands: Vec<usize>| -> Option<usize> {
        cands.iter().copied().find(|&i| case(b, i) == Some(Case::Nom)).or_else(|| cands.iter().copied().find(|&i| case(b, i).is_none()))
    };
    let post: Vec<usize> = nps.iter().copied().filter(|&i| i > v && agrees(b, i)).collect();
    let mut pre: Vec<usize> = nps.iter().copied().filter(|&i| i < v && agrees(b, i)).collect();
    pre.reverse();
    let subject = pick(b, post).or_else(|| pick(b, pre));
    match subject {
        Some(s) => b.attach(v, s, DepRelation::Subject),
        None => {
            if let Some(seg) = verb.pronoun_segment(SegmentRole::SubjPronoun) {
                incorporated.push(Incorporated { verb: v, segment: seg, relation: DepRelation::Subject });
            }
        }
    }
    let object_pronoun = verb.pronoun_segment(SegmentRole::ObjPronoun);
    if let Some(seg) = object_pronoun {
        incorporated.push(Incorporated { verb: v, segment: seg, relation: DepRelation::Object });
    }

    let mut objects = Vec::new();
    for &i in nps.iter().filter(|&&i| i > v && Some(i) != subject) {
        let a = b.a(i);
        if !matches!(a.features.case, Some(Case::Acc) | None) {
            continue;
        }
        if a.derivation == Derivation::VerbalNoun && a.root.is_some() && a.root == verb.root {
            b.attach(v, i, DepRelation::CognateAccusative);
        } else if a.derivation == Derivation::VerbalNoun && a.features.definiteness == Some(Definiteness::Indef) {
            b.attach(v, i, DepRelation::AccusativeOfCause);
        } else {
            objects.push(i);
        }
    }
    match (verb.ditransitive, object_pronoun.is_some(), objects.as_slice()) {
        (true, false, [x, y, ..]) => {
            let (first, second) = match (sem.is_animate(b.a(*x).lemma.as_str()), sem.is_animate(b.a(*y).lemma.as_str())) {
                (false, true) => (*y, *x),
                _ => (*x, *y),
            };
            b.attach(v, first, DepRelation::Object);
            b.attach(v, second, DepRelation::Object2);
        }
        (true, true, [x, ..]) => b.attach(v, *x, DepRelation::Object2),
        (_, _, [x, ..]) => b.attach(v, *x, DepRelation::Object),
        _ => {}
    }

    for u in units {
        let i = u.index();
        if b.heads[i].is_some() {
            continue;
        }
        let rel = match u {
            Unit::Pp(_) => DepRelation::PrepObject,
            _ => DepRelation::Marker,
        };
        b.attach(v, i, rel);
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum PhraseBase {
    NP,
    PP,
    VP,
    AJP,
    S,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct PhraseType {
    pub base: PhraseBase,
    pub case: Option<Case>,
}

impl PhraseType {
    pub fn new(base: PhraseBase, case: Option<Case>) -> Self {
        let case = if matches!(base, PhraseBase::VP | PhraseBase::S) { None } else { case };
        PhraseType { base, case }
    }
}

impl PhraseBase {
    pub fn code(self) -> &'static str {
        match self {
            PhraseBase::NP => "NP",
            PhraseBase::PP => "PP",
            PhraseBase::VP => "VP",
            PhraseBase::AJP => "AJP",
            PhraseBase::S => "S",
        }
    }
}

impl fmt::Display for PhraseBase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

impl fmt::Display for PhraseType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let base = self.base.code();
        match self.case {
            Some(c) => write!(f, "{base}-{c}"),
            None => f.write_str(base),
        }
    }
}

impl FromStr for PhraseType {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        let (base, case) = match s.split_once('-') {
            Some((b, c)) => (b, Some(c.parse::<Case>()?)),
            None => (s, None),
        };
        let base = match base {
            "NP" => PhraseBase::NP,
            "PP" => PhraseBase::PP,
            "VP" => PhraseBase::VP,
            "AJP" => PhraseBase::AJP,
            "S" => PhraseBase::S,
            other => return Err(format!("unknown phrase type {other:?}")),
        };
        if case.is_some() && matches!(base, PhraseBase::VP | PhraseBase::S) {
            return Err(format!("{s:?}: VP and S carry no case"));
        }
        Ok(PhraseType { base, case })
    }
}

/// Half-open range of token indices.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct TokenRange {
    pub start: usize,
    pub end: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Constituent {
    pub tokens: TokenRange,
    /// Sentence character offsets covered by the tokens.
    pub char_span: CharSpan,
    pub pt: PhraseType,
    pub head: usize,
    pub prep_lemma: Option<Translit>,
}

impl Constituent {
    /// Preposition in undiacritized Arabic script, as written inside `PP(...)`.
    pub fn prep_display(&self) -> Option<String> {
        self.prep_lemma.as_ref().map(prep_display)
    }
}

pub fn prep_display(lemma: &Translit) -> String {
    let bare = Translit::new(&normalize_translit(lemma.as_str(), NormalizationPolicy::STRIP)).expect("stripping keeps valid codes");
    from_translit(&bare).expect("valid Buckwalter").to_string()
}

/// A subtree whose tokens are not contiguous; its constituent is split at the gaps.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NonProjective {
    pub head: usize,
    pub hull: TokenRange,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Projection {
    pub constituents: Vec<Constituent>,
    pub nonprojective: Vec<NonProjective>,
}

impl Projection {
    pub fn headed_by(&self, head: usize) -> impl Iterator<Item = &Constituent> {
        self.constituents.iter().filter(move |c| c.head == head)
    }

    pub fn with_span(&self, span: CharSpan) -> Option<&Constituent> {
        self.constituents.iter().find(|c| c.char_span == span)
    }
}

fn phrase_of(g: &DependencyGraph, head: usize) -> Option<(PhraseType, Option<Translit>)> {
    let a = &g.nodes[head].analysis;
    let case = a.features.case;
    let pt = match a.pos {
        Pos::V => (PhraseType::new(PhraseBase::VP, None), None),
        Pos::Prep => {
            let object_case = g
                .dependents(head)
                .find(|d| d.relation == DepRelation::PrepObject)
                .and_then(|d| g.nodes[d.dep].analysis.features.case);
            (PhraseType::new(PhraseBase::PP, object_case), Some(a.lemma.clone()))
        }
        Pos::N | Pos::PN | Pos::Pro => match a.proclitic_preposition() {
            Some(seg) => (PhraseType::new(PhraseBase::PP, case), Some(seg.surface.clone())),
            None => (PhraseType::new(PhraseBase::NP, case), None),
        },
        Pos::Adj => (PhraseType::new(PhraseBase::AJP, case), None),
        _ => return None,
    };
    Some(pt)
}

/// One constituent per content-word subtree.
pub fn constituents(g: &DependencyGraph) -> Projection {
    let mut out = Projection::default();
    for head in 0..g.nodes.len() {
        let Some((pt, prep_lemma)) = phrase_of(g, head) else {
            continue;
        };
        let members = g.subtree(head);
        let mut runs: Vec<TokenRange> = Vec::new();
        for &m in &members {
            match runs.last_mut() {
                Some(r) if r.end == m => r.end = m + 1,
                _ => runs.push(TokenRange { start: m, end: m + 1 }),
            }
        }
        if runs.len() > 1 {
            out.nonprojective.push(NonProjective {
                head,
                hull: TokenRange { start: runs[0].start, end: runs.last().unwrap().end },
            });
        }
        for r in runs {
            // A piece cut off from the head is headed by its own topmost node.
            let piece_head = if (r.start..r.end).contains(&head) {
                head
            } else {
                (r.start..r.end).find(|&m| g.head_of(m).is_none_or(|(h, _)| !(r.start..r.end).contains(&h))).unwrap()
            };
            let char_span = CharSpan::new(g.nodes[r.start].token.char_span.start, g.nodes[r.end - 1].token.char_span.end);
            out.constituents.push(Constituent { tokens: r, char_span, pt, head: piece_head, prep_lemma: prep_lemma.clone() });
        }
    }
    out.constituents.sort_by_key(|c| (c.tokens.start, std::cmp::Reverse(c.tokens.end), c.head));
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum GrammFunction {
    Subj,
    Obj,
    Obj2,
    OBL,
    Pred,
    Mod,
    Gen,
}

impl GrammFunction {
    pub const ALL: [GrammFunction; 7] =
        [GrammFunction::Subj, GrammFunction::Obj, GrammFunction::Obj2, GrammFunction::OBL, GrammFunction::Pred, GrammFunction::Mod, GrammFunction::Gen];

    pub fn code(self) -> &'static str {
        match self {
            GrammFunction::Subj => "Subj",
            GrammFunction::Obj => "Obj",
            GrammFunction::Obj2 => "Obj2",
            GrammFunction::OBL => "OBL",
            GrammFunction::Pred => "Pred",
            GrammFunction::Mod => "Mod",
            GrammFunction::Gen => "Gen",
        }
    }
}

impl fmt::Display for GrammFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

impl FromStr for GrammFunction {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        GrammFunction::ALL.into_iter().find(|g| g.code() == s).ok_or_else(|| format!("unknown grammatical function {s:?}"))
    }
}

/// Function of a constituent from the arc entering its head.
pub fn grammatical_function(c: &Constituent, g: &DependencyGraph) -> GrammFunction {
    match g.head_of(c.head) {
        None => GrammFunction::Pred,
        Some((_, DepRelation::Subject)) => GrammFunction::Subj,
        Some((_, DepRelation::Object)) => GrammFunction::Obj,
        Some((_, DepRelation::Object2)) => GrammFunction::Obj2,
        Some((h, DepRelation::PrepObject)) if g.nodes[h].analysis.pos == Pos::V => GrammFunction::OBL,
        Some((_, DepRelation::Idafa)) => GrammFunction::Gen,
        Some(_) => GrammFunction::Mod,
    }
}

pub fn incorporated_function(rel: DepRelation) -> GrammFunction {
    match rel {
        DepRelation::Subject => GrammFunction::Subj,
        DepRelation::Object => GrammFunction::Obj,
        DepRelation::Object2 => GrammFunction::Obj2,
        _ => GrammFunction::Mod,
    }
}

/// Tab-separated rows: token_id, surface, lemma, pos, features, head_id, relation.
/// Incorporated pronouns follow as `token_id.segment` rows headed by their verb.
pub fn export_graph_tsv(g: &DependencyGraph) -> String {
    let mut out = String::new();
    for (i, node) in g.nodes.iter().enumerate() {
        let a = &node.analysis;
        let (head, rel) = match g.head_of(i) {
            Some((h, r)) => (g.token_id(h).to_string(), r.to_string()),
            None => ("-".to_string(), "root".to_string()),
        };
        out.push_str(&format!(
            "{}\t{}\t{}\t{}\t{}\t{}\t{}\n",
            node.token.token_id,
            node.token.translit(),
            a.lemma,
            a.pos,
            a.features,
            head,
            rel
        ));
    }
    for inc in &g.incorporated {
        let seg = &g.nodes[inc.verb].analysis.segments[inc.segment];
        let vid = g.token_id(inc.verb);
        out.push_str(&format!("{vid}.{}\t{}\t-\t{}\t{}\t{vid}\t{}\n", inc.segment, seg.surface, seg.pos, seg.features, inc.relation));
    }
    out
}
