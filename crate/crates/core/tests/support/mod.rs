//! Generators and property checks shared by the property tests and the
//! acceptance suite.
#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet, HashSet};

use framebench_core::annotation::{autofill_syntax_layers, new_annotation_set, Anchor, AnnotationSet, LayerKind, NullKind, Origin};
use framebench_core::bundled;
use framebench_core::corpus::{import_corpus, CharSpan, Sentence};
use framebench_core::decisions::parse_decisions;
use framebench_core::frames::FrameDb;
use framebench_core::lexsem::LexNet;
use framebench_core::morph::{analyze, AffixEntry, AffixSegment, CompatSet, Derivation, FeatureBundle, Lexicon, Pos, SegmentRole, Split, StemEntry};
use framebench_core::rules::{aggregate, MappingRule, RuleGroup, ValencePattern};
use framebench_core::annotation::VoiceCode;
use framebench_core::script::{from_translit, to_translit, ArabicText, CodecTable, Translit};
use framebench_core::syntax::{analyze_sentence, parse, DependencyGraph, GrammFunction};
use proptest::prelude::*;
use proptest::test_runner::{Config, RngAlgorithm, TestCaseError, TestError, TestRng, TestRunner};
use unicode_normalization::char::canonical_combining_class;

/// Deterministic runner with `cases` cases and no shrinking-time surprises.
pub fn runner(cases: u32) -> TestRunner {
    let config = Config { cases, failure_persistence: None, ..Config::default() };
    TestRunner::new_with_rng(config, TestRng::deterministic_rng(RngAlgorithm::ChaCha))
}

pub fn describe<T: std::fmt::Debug>(r: Result<(), TestError<T>>) -> Result<(), String> {
    r.map_err(|e| match e {
        TestError::Fail(why, value) => format!("{why} for {value:?}"),
        TestError::Abort(why) => format!("aborted: {why}"),
    })
}

// Codec.

const PASS_THROUGH: &[char] = &[' ', '.', ',', '0', '7', '\u{060C}', '\u{061F}', '\u{0663}'];

fn table_codes() -> Vec<char> {
    CodecTable::bundled().entries().iter().map(|&(code, _)| code).collect()
}

/// Reorders each run of combining marks by combining class, the order NFC
/// produces. Runs of equal class keep their relative order.
fn canonical_order(bw: Vec<char>) -> String {
    let table = CodecTable::bundled();
    let class = |c: char| table.arabic_for(c).map_or(0, canonical_combining_class);
    let mut out: Vec<char> = Vec::with_capacity(bw.len());
    let mut run: Vec<char> = Vec::new();
    for c in bw {
        if class(c) == 0 {
            run.sort_by_key(|&m| class(m));
            out.append(&mut run);
            out.push(c);
        } else {
            run.push(c);
        }
    }
    run.sort_by_key(|&m| class(m));
    out.append(&mut run);
    out.into_iter().collect()
}

/// Buckwalter strings over the whole table plus pass-through characters,
/// with mark runs in canonical order.
pub fn bw_string() -> impl Strategy<Value = String> {
    let alphabet: Vec<char> = table_codes().into_iter().chain(PASS_THROUGH.iter().copied()).collect();
    prop::collection::vec(prop::sample::select(alphabet), 0..40).prop_map(canonical_order)
}

/// Arabic-script strings over the table's Arabic side.
pub fn arabic_string() -> impl Strategy<Value = String> {
    let alphabet: Vec<char> = CodecTable::bundled().entries().iter().map(|&(_, a)| a).chain(PASS_THROUGH.iter().copied()).collect();
    prop::collection::vec(prop::sample::select(alphabet), 0..40).prop_map(|v| v.into_iter().collect())
}

pub fn check_bw_round_trip(bw: &str) -> Result<(), TestCaseError> {
    let t = Translit::new(bw).map_err(|e| TestCaseError::fail(e.to_string()))?;
    let arabic = from_translit(&t).map_err(|e| TestCaseError::fail(e.to_string()))?;
    let back = to_translit(&arabic).map_err(|e| TestCaseError::fail(e.to_string()))?;
    prop_assert_eq!(back.as_str(), bw);
    Ok(())
}

pub fn check_arabic_round_trip(s: &str) -> Result<(), TestCaseError> {
    let a = ArabicText::new(s).map_err(|e| TestCaseError::fail(e.to_string()))?;
    let t = to_translit(&a).map_err(|e| TestCaseError::fail(e.to_string()))?;
    let back = from_translit(&t).map_err(|e| TestCaseError::fail(e.to_string()))?;
    prop_assert_eq!(back, a);
    Ok(())
}

// Morphology.

const LETTERS: &[char] = &['b', 'd', 'k', 'l', 'm', 'n', 'r', 's', 't'];

fn word(min: usize, max: usize) -> impl Strategy<Value = String> {
    prop::collection::vec(prop::sample::select(LETTERS.to_vec()), min..=max).prop_map(|v| v.into_iter().collect())
}

fn translit(s: &str) -> Translit {
    Translit::new(s).expect("generated letters are Buckwalter codes")
}

#[derive(Debug, Clone)]
pub struct LexiconSpec {
    /// (surface, category); empty surface is the category's null affix.
    pub prefixes: Vec<(String, usize)>,
    pub stems: Vec<(String, usize, bool)>,
    pub suffixes: Vec<(String, usize)>,
    pub ab: BTreeSet<(usize, usize)>,
    pub bc: BTreeSet<(usize, usize)>,
    pub ac: BTreeSet<(usize, usize)>,
}

const CATS: usize = 3;

fn affixes(max: usize) -> impl Strategy<Value = Vec<(String, usize)>> {
    (prop::collection::vec((word(1, 2), 0..CATS), 1..=max), prop::collection::vec(any::<bool>(), CATS)).prop_map(|(mut v, nulls)| {
        for (cat, has_null) in nulls.into_iter().enumerate() {
            if has_null || cat == 0 {
                v.push((String::new(), cat));
            }
        }
        v
    })
}

fn pairs() -> impl Strategy<Value = BTreeSet<(usize, usize)>> {
    prop::collection::btree_set((0..CATS, 0..CATS), 1..=CATS * CATS)
}

/// Random lexicons of at most 50 entries over a small alphabet, so that
/// surfaces collide and tokens have several splits.
pub fn lexicon_spec() -> impl Strategy<Value = LexiconSpec> {
    (affixes(8), prop::collection::vec((word(1, 3), 0..CATS, any::<bool>()), 1..=28), affixes(8), pairs(), pairs(), pairs()).prop_map(
        |(prefixes, stems, suffixes, ab, bc, ac)| LexiconSpec { prefixes, stems, suffixes, ab, bc, ac },
    )
}

impl LexiconSpec {
    pub fn entry_count(&self) -> usize {
        self.prefixes.len() + self.stems.len() + self.suffixes.len()
    }

    fn cat(side: &str, n: usize) -> String {
        format!("{side}{n}")
    }

    fn affix(side: &str, (surface, cat): &(String, usize), role: SegmentRole, pos: Pos) -> AffixEntry {
        let category = Self::cat(side, *cat);
        if surface.is_empty() {
            return AffixEntry::null(&category, FeatureBundle::default());
        }
        AffixEntry::from_segments(
            &category,
            vec![AffixSegment { surface: translit(surface), pos, role, features: FeatureBundle::default(), gloss: surface.clone() }],
        )
    }

    /// Builds the lexicon. Categories used by no entry are dropped from the
    /// tables and every used category gets at least one pair.
    pub fn build(&self) -> Lexicon {
        let prefixes: Vec<AffixEntry> = self.prefixes.iter().map(|p| Self::affix("P", p, SegmentRole::Proclitic, Pos::Conj)).collect();
        let suffixes: Vec<AffixEntry> = self.suffixes.iter().map(|s| Self::affix("X", s, SegmentRole::EncliticOther, Pos::Pro)).collect();
        let stems: Vec<StemEntry> = self
            .stems
            .iter()
            .map(|(surface, cat, verb)| StemEntry {
                surface: translit(surface),
                lemma: translit(surface),
                root: None,
                pattern: None,
                category: Self::cat("S", *cat),
                pos: if *verb { Pos::V } else { Pos::N },
                gloss: surface.clone(),
                derivation: Derivation::Plain,
            })
            .collect();
        let used = |cats: &mut dyn Iterator<Item = usize>| cats.collect::<BTreeSet<usize>>();
        let (pc, sc, xc) = (
            used(&mut self.prefixes.iter().map(|p| p.1)),
            used(&mut self.stems.iter().map(|s| s.1)),
            used(&mut self.suffixes.iter().map(|s| s.1)),
        );
        let table = |set: &BTreeSet<(usize, usize)>, l: &BTreeSet<usize>, r: &BTreeSet<usize>, ls: &str, rs: &str| -> CompatSet {
            let mut out: CompatSet = set.iter().filter(|(a, b)| l.contains(a) && r.contains(b)).map(|&(a, b)| (Self::cat(ls, a), Self::cat(rs, b))).collect();
            let first = |s: &BTreeSet<usize>| *s.iter().next().unwrap();
            for &a in l {
                if !out.iter().any(|(x, _)| *x == Self::cat(ls, a)) {
                    out.insert((Self::cat(ls, a), Self::cat(rs, first(r))));
                }
            }
            for &b in r {
                if !out.iter().any(|(_, y)| *y == Self::cat(rs, b)) {
                    out.insert((Self::cat(ls, first(l)), Self::cat(rs, b)));
                }
            }
            out
        };
        Lexicon::new(prefixes, stems, suffixes, table(&self.ab, &pc, &sc, "P", "S"), table(&self.bc, &sc, &xc, "S", "X"), table(&self.ac, &pc, &xc, "P", "X"))
            .expect("generated lexicon is consistent")
    }
}

/// Every split of `token` found by trying all prefix, stem and suffix
/// combinations and keeping those that spell the token and pass all three
/// compatibility tables.
pub fn oracle_splits(token: &str, lex: &Lexicon) -> BTreeSet<Split> {
    let mut out = BTreeSet::new();
    for (pi, p) in lex.prefixes().iter().enumerate() {
        for (si, s) in lex.stems().iter().enumerate() {
            for (xi, x) in lex.suffixes().iter().enumerate() {
                let spelled = format!("{}{}{}", p.surface, s.surface, x.surface);
                if spelled == token
                    && lex.compat_ab(&p.category, &s.category)
                    && lex.compat_bc(&s.category, &x.category)
                    && lex.compat_ac(&p.category, &x.category)
                {
                    out.insert(Split { prefix: pi, stem: si, suffix: xi });
                }
            }
        }
    }
    out
}

/// All tokens spelled by some prefix, stem and suffix, compatible or not.
pub fn formable_tokens(lex: &Lexicon) -> BTreeSet<String> {
    let mut out = BTreeSet::new();
    for p in lex.prefixes() {
        for s in lex.stems() {
            for x in lex.suffixes() {
                out.insert(format!("{}{}{}", p.surface, s.surface, x.surface));
            }
        }
    }
    out
}

/// Compares the analyzer with the oracle on every formable token and a few
/// unformable ones. Returns the number of tokens checked.
pub fn check_morph_oracle(spec: &LexiconSpec) -> Result<usize, TestCaseError> {
    prop_assert!(spec.entry_count() <= 50);
    let lex = spec.build();
    let mut tokens = formable_tokens(&lex);
    tokens.extend(["q", "bbbbbbbbbb", "tq"].map(String::from));
    for token in &tokens {
        let readings = analyze("t", &translit(token), &lex);
        let got: Vec<Split> = readings.iter().map(|a| a.source.expect("lexicon readings carry their split")).collect();
        let got_set: BTreeSet<Split> = got.iter().copied().collect();
        prop_assert_eq!(got.len(), got_set.len(), "duplicate readings for {}", token);
        prop_assert_eq!(&got_set, &oracle_splits(token, &lex), "token {}", token);
        for a in &readings {
            prop_assert_eq!(a.surface(), token.clone());
        }
    }
    Ok(tokens.len())
}

// Annotation.

/// Unannotated sets, one per desk decision, with their parses.
pub struct AnnotationFixture {
    pub db: FrameDb,
    pub net: LexNet,
    pub cases: Vec<(AnnotationSet, Sentence, DependencyGraph)>,
}

impl AnnotationFixture {
    pub fn load() -> Self {
        let (lex, net, db) = (bundled::lexicon(), bundled::net(), bundled::frames());
        let mut sentences: BTreeMap<String, (String, Sentence)> = BTreeMap::new();
        for (_, doc) in bundled::DESK_CORPUS {
            let corpus = import_corpus(doc).expect("desk corpus parses");
            for (sub, s) in corpus.sentences() {
                sentences.insert(s.sentence_id.clone(), (sub.sub_cid.clone(), s));
            }
        }
        let mut cases = Vec::new();
        for d in parse_decisions(bundled::DESK_DECISIONS).expect("desk decisions parse") {
            let (sub, s) = sentences[&d.sentence_id].clone();
            let g = parse(analyze_sentence(&s, &lex), &net).expect("desk sentences parse");
            let target = s.tokens[d.target].char_span;
            let aset = new_annotation_set(&d.aset_id(), &sub, &s, target, &d.frame, &db, &g.nodes[d.target].analysis).expect("desk targets have units");
            cases.push((aset, s, g));
        }
        AnnotationFixture { db, net, cases }
    }
}

#[derive(Debug, Clone)]
pub enum AnchorPick {
    Tokens(usize, usize),
    Segment(usize, usize),
    Null(NullKind),
    /// Arbitrary char span, possibly not token-aligned or out of range.
    Chars(usize, usize),
}

#[derive(Debug, Clone)]
pub enum Op {
    Set { layer: LayerKind, anchor: AnchorPick, value: usize, origin: Origin },
    Remove { layer: LayerKind, anchor: AnchorPick },
    Autofill,
}

const GF_VALUES: &[&str] = &["Subj", "Obj", "Obj2", "OBL", "Pred", "Mod", "Gen", "Bogus"];
const PT_VALUES: &[&str] = &["NP-nom", "NP-acc", "NP-gen", "PP-gen", "PP(في)-gen", "PP(إلى)-gen", "VP", "AJP-nom", "Pro-incorp", "XP", "VP-nom"];
const SUMO_VALUES: &[&str] = &["Putting", "Motion", "Human", "Artifact"];

fn anchor_pick() -> impl Strategy<Value = AnchorPick> {
    prop_oneof![
        4 => (0..6usize, 0..3usize).prop_map(|(a, n)| AnchorPick::Tokens(a, a + n)),
        1 => (0..3usize, 0..4usize).prop_map(|(t, s)| AnchorPick::Segment(t, s)),
        1 => prop::sample::select(NullKind::ALL.to_vec()).prop_map(AnchorPick::Null),
        1 => (0..60usize, 0..8usize).prop_map(|(a, n)| AnchorPick::Chars(a, a + n)),
    ]
}

fn op() -> impl Strategy<Value = Op> {
    let layer = prop::sample::select(vec![LayerKind::FE, LayerKind::FE, LayerKind::GF, LayerKind::PT, LayerKind::Sumo, LayerKind::Target]);
    let origin = prop_oneof![3 => Just(Origin::Human), 1 => Just(Origin::Auto)];
    prop_oneof![
        6 => (layer.clone(), anchor_pick(), 0..16usize, origin).prop_map(|(layer, anchor, value, origin)| Op::Set { layer, anchor, value, origin }),
        2 => (layer, anchor_pick()).prop_map(|(layer, anchor)| Op::Remove { layer, anchor }),
        2 => Just(Op::Autofill),
    ]
}

/// Index into the fixture's cases and an operation sequence.
pub fn op_sequence(cases: usize) -> impl Strategy<Value = (usize, Vec<Op>)> {
    (0..cases, prop::collection::vec(op(), 1..25))
}

fn resolve(pick: &AnchorPick, s: &Sentence) -> Anchor {
    let n = s.tokens.len();
    match *pick {
        AnchorPick::Tokens(a, b) => {
            let (a, b) = (a.min(n - 1), b.min(n - 1));
            Anchor::Span(CharSpan::new(s.tokens[a].char_span.start, s.tokens[b].char_span.end))
        }
        AnchorPick::Segment(t, seg) => Anchor::Segment { at: s.tokens[t.min(n - 1)].char_span.start, seg },
        AnchorPick::Null(k) => Anchor::Null(k),
        AnchorPick::Chars(a, b) => Anchor::Span(CharSpan::new(a, b)),
    }
}

fn value_for(layer: LayerKind, aset: &AnnotationSet, db: &FrameDb, i: usize) -> String {
    match layer {
        LayerKind::FE => {
            let mut names: Vec<String> = db.frame(&aset.frame).map(|f| f.fe_defs.iter().map(|d| d.name.clone()).collect()).unwrap_or_default();
            names.push("NotAnFe".into());
            names[i % names.len()].clone()
        }
        LayerKind::GF => GF_VALUES[i % GF_VALUES.len()].into(),
        LayerKind::PT => PT_VALUES[i % PT_VALUES.len()].into(),
        _ => SUMO_VALUES[i % SUMO_VALUES.len()].into(),
    }
}

/// Checks that FE, GF and PT stay aligned after every step, that failed
/// operations change nothing, and that human values survive autofill.
pub fn check_annotation_ops(fx: &AnnotationFixture, case: usize, ops: &[Op]) -> Result<(), TestCaseError> {
    let (base, s, g) = &fx.cases[case];
    let mut aset = base.clone();
    // Human values entered so far, keyed by layer and anchor.
    let mut human: BTreeMap<(LayerKind, Anchor), String> = BTreeMap::new();
    for op in ops {
        let before = aset.clone();
        match op {
            Op::Set { layer, anchor, value, origin } => {
                let anchor = resolve(anchor, s);
                let value = value_for(*layer, &aset, &fx.db, *value);
                match aset.set_label(*layer, anchor, &value, *origin, &fx.db) {
                    Ok(()) => {
                        let stored = match (layer, anchor) {
                            (LayerKind::FE, Anchor::Null(_)) => None,
                            _ => aset.label_at(*layer, &anchor),
                        };
                        if let Some(l) = stored {
                            let shown = if *layer == LayerKind::PT { l.pt_display() } else { l.value.clone() };
                            prop_assert_eq!(&shown, &value);
                            if *origin == Origin::Human {
                                human.insert((*layer, anchor), value);
                            } else {
                                human.remove(&(*layer, anchor));
                            }
                        }
                    }
                    Err(_) => prop_assert_eq!(&aset, &before, "failed set changed the set"),
                }
            }
            Op::Remove { layer, anchor } => {
                let anchor = resolve(anchor, s);
                match aset.remove_label(*layer, anchor, None) {
                    Ok(()) => {
                        human.remove(&(*layer, anchor));
                        if *layer == LayerKind::FE {
                            human.remove(&(LayerKind::GF, anchor));
                            human.remove(&(LayerKind::PT, anchor));
                        }
                    }
                    Err(_) => prop_assert_eq!(&aset, &before, "failed remove changed the set"),
                }
            }
            Op::Autofill => autofill_syntax_layers(&mut aset, g, &fx.net),
        }
        check_alignment(&aset)?;
        for ((layer, anchor), value) in &human {
            let l = aset.label_at(*layer, anchor);
            prop_assert!(l.is_some(), "human {:?} label at {} vanished after {:?}", layer, anchor, op);
            let l = l.unwrap();
            let shown = if *layer == LayerKind::PT { l.pt_display() } else { l.value.clone() };
            prop_assert_eq!(&shown, value, "human value overwritten by {:?}", op);
            prop_assert_eq!(l.origin, Origin::Human);
        }
        prop_assert_eq!(aset.target_span(), base.target_span());
    }
    Ok(())
}

fn check_alignment(aset: &AnnotationSet) -> Result<(), TestCaseError> {
    let fe: Vec<Anchor> = aset.layer(LayerKind::FE).iter().map(|l| l.anchor).filter(Anchor::is_realized).collect();
    let fe_set: HashSet<Anchor> = fe.iter().copied().collect();
    prop_assert_eq!(fe.len(), fe_set.len(), "duplicate FE anchors");
    for (i, a) in fe.iter().enumerate() {
        for b in &fe[..i] {
            if let (Anchor::Span(x), Anchor::Span(y)) = (a, b) {
                prop_assert!(x.end <= y.start || y.end <= x.start, "FE anchors {} and {} overlap", a, b);
            }
        }
    }
    for layer in [LayerKind::GF, LayerKind::PT] {
        let anchors: Vec<Anchor> = aset.layer(layer).iter().map(|l| l.anchor).collect();
        let set: HashSet<Anchor> = anchors.iter().copied().collect();
        prop_assert_eq!(anchors.len(), set.len(), "duplicate {:?} anchors", layer);
        prop_assert_eq!(&set, &fe_set, "{:?} anchors differ from FE anchors", layer);
    }
    Ok(())
}

// Rule groups.

fn rule_group() -> impl Strategy<Value = RuleGroup> {
    let fe = prop::sample::select(vec!["Agent", "Theme", "Goal", "Source"]);
    let pt = prop::sample::select(vec!["NP-nom", "NP-acc", "PP-gen"]);
    let gf = prop::sample::select(GrammFunction::ALL.to_vec());
    (
        prop::collection::vec((fe, pt, gf), 1..3),
        prop::sample::select(vec![VoiceCode::A, VoiceCode::P]),
        any::<bool>(),
        1..5usize,
        prop::option::of(prop::sample::select(vec!["Putting", "Motion"])),
    )
        .prop_map(|(triples, voice, cons, support, field)| {
            let mut elements = vec![if cons { "VP".to_string() } else { "NP".to_string() }];
            elements.extend(triples.iter().map(|(_, pt, _)| pt.to_string()));
            RuleGroup {
                group_id: "00".into(),
                pattern: ValencePattern { elements },
                voice,
                cons,
                rules: triples
                    .iter()
                    .map(|(fe, pt, gf)| MappingRule { rule_id: String::new(), fe: fe.to_string(), pt: pt.to_string(), gf: gf.code().to_string() })
                    .collect(),
                support,
                semantic_field: field.map(String::from),
            }
        })
}

/// A multiset of groups with many repeats, and a permutation of it.
pub fn group_multiset() -> impl Strategy<Value = (Vec<RuleGroup>, Vec<RuleGroup>)> {
    prop::collection::vec(rule_group(), 1..6)
        .prop_flat_map(|distinct| prop::collection::vec(prop::sample::select(distinct), 1..20))
        .prop_flat_map(|groups| (Just(groups.clone()), Just(groups).prop_shuffle()))
}

type Key = (String, VoiceCode, bool, Vec<(String, String, String)>);

fn key(g: &RuleGroup) -> Key {
    (g.pattern.to_string(), g.voice, g.cons, g.rules.iter().map(|r| (r.fe.clone(), r.pt.clone(), r.gf.clone())).collect())
}

pub fn check_aggregate(groups: &[RuleGroup], shuffled: &[RuleGroup]) -> Result<(), TestCaseError> {
    let once = aggregate(groups);
    prop_assert_eq!(&aggregate(&once), &once, "not idempotent");
    prop_assert_eq!(&aggregate(shuffled), &once, "order dependent");
    let total: usize = groups.iter().map(|g| g.support).sum();
    prop_assert_eq!(once.iter().map(|g| g.support).sum::<usize>(), total, "support not conserved");
    let mut expected: BTreeMap<Key, usize> = BTreeMap::new();
    for g in groups {
        *expected.entry(key(g)).or_default() += g.support;
    }
    let got: BTreeMap<Key, usize> = once.iter().map(|g| (key(g), g.support)).collect();
    prop_assert_eq!(got.len(), once.len(), "equal groups left unmerged");
    prop_assert_eq!(got, expected);
    for w in once.windows(2) {
        prop_assert!(w[0].support >= w[1].support, "not sorted by support");
    }
    for (i, g) in once.iter().enumerate() {
        let id = format!("{:02}", i + 1);
        prop_assert_eq!(&g.group_id, &id);
        for (j, r) in g.rules.iter().enumerate() {
            prop_assert_eq!(&r.rule_id, &format!("{id}{}", j + 1));
        }
    }
    Ok(())
}
