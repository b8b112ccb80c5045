use std::fmt;

use serde::{Deserialize, Serialize};

use super::features::{Derivation, FeatureBundle, Pos, SegmentRole};
use super::lexicon::{AffixEntry, Lexicon, StemEntry};
use crate::script::{lookup_key, CharClass, CodecTable, Translit};

/// Indices of the prefix, stem and suffix entries that make up one split.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Split {
    pub prefix: usize,
    pub stem: usize,
    pub suffix: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub surface: Translit,
    pub pos: Pos,
    pub role: SegmentRole,
    pub gloss: String,
    pub features: FeatureBundle,
}

impl Segment {
    /// Tag such as `Conj`, `V` or `Pro(obj,3sg,f)`.
    pub fn tag(&self) -> String {
        if self.pos != Pos::Pro {
            return self.pos.to_string();
        }
        let role = match self.role {
            SegmentRole::SubjPronoun => "subj",
            SegmentRole::ObjPronoun => "obj",
            _ => "poss",
        };
        let mut agr = String::new();
        if let Some(p) = self.features.person {
            agr.push_str(p.code());
        }
        if let Some(n) = self.features.number {
            agr.push_str(n.code());
        }
        match self.features.gender {
            Some(g) if agr.is_empty() => format!("Pro({role},{g})"),
            Some(g) => format!("Pro({role},{agr},{g})"),
            None if agr.is_empty() => format!("Pro({role})"),
            None => format!("Pro({role},{agr})"),
        }
    }
}

/// One prefix/stem/suffix reading of a token.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MorphAnalysis {
    pub token_id: String,
    pub segments: Vec<Segment>,
    pub lemma: Translit,
    pub root: Option<Translit>,
    pub pattern: Option<Translit>,
    pub pos: Pos,
    pub category: String,
    pub derivation: Derivation,
    pub ditransitive: bool,
    pub features: FeatureBundle,
    pub score: f64,
    /// Set on the fallback reading for tokens the lexicon cannot analyze.
    pub unknown: bool,
    pub source: Option<Split>,
}

impl MorphAnalysis {
    /// Fallback for an unanalyzable token: one stem segment tagged `UNK`.
    pub fn unknown(token_id: &str, surface: &Translit) -> Self {
        MorphAnalysis {
            token_id: token_id.to_string(),
            segments: vec![Segment {
                surface: surface.clone(),
                pos: Pos::Unk,
                role: SegmentRole::Stem,
                gloss: String::new(),
                features: FeatureBundle::default(),
            }],
            lemma: surface.clone(),
            root: None,
            pattern: None,
            pos: Pos::Unk,
            category: "UNK".to_string(),
            derivation: Derivation::Plain,
            ditransitive: false,
            features: FeatureBundle::default(),
            score: 0.0,
            unknown: true,
            source: None,
        }
    }

    pub fn stem_index(&self) -> usize {
        self.segments.iter().position(|s| s.role == SegmentRole::Stem).expect("exactly one stem segment")
    }

    pub fn stem(&self) -> &Segment {
        &self.segments[self.stem_index()]
    }

    pub fn surface(&self) -> String {
        self.segments.iter().map(|s| s.surface.as_str()).collect()
    }

    pub fn glosses(&self) -> Vec<&str> {
        self.segments.iter().map(|s| s.gloss.as_str()).collect()
    }

    pub fn tags(&self) -> Vec<String> {
        self.segments.iter().map(Segment::tag).collect()
    }

    /// Preposition carried as a proclitic (e.g. `bi` on a noun).
    pub fn proclitic_preposition(&self) -> Option<&Segment> {
        self.segments[..self.stem_index()].iter().rev().find(|s| s.pos == Pos::Prep)
    }

    pub fn has_conjunction_proclitic(&self) -> bool {
        self.segments[..self.stem_index()].iter().any(|s| s.pos == Pos::Conj)
    }

    pub fn has_article(&self) -> bool {
        self.segments[..self.stem_index()].iter().any(|s| s.pos == Pos::Det)
    }

    pub fn pronoun_segment(&self, role: SegmentRole) -> Option<usize> {
        self.segments.iter().position(|s| s.role == role)
    }
}

impl fmt::Display for MorphAnalysis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let segs: Vec<String> = self.segments.iter().map(|s| format!("{}/{}", s.surface, s.tag())).collect();
        write!(f, "{} [{}] {}", segs.join("--"), self.lemma, self.features)
    }
}

/// Returns every split of `token` into a prefix, stem and suffix whose
/// diacritic-stripped, alef-folded surfaces concatenate to the token's key.
/// Null affixes participate. Order: prefix length, stem length, then lexicon order.
pub fn segment(token: &Translit, lex: &Lexicon) -> Vec<Split> {
    let key: Vec<char> = lookup_key(token.as_str()).chars().collect();
    let n = key.len();
    let mut out = Vec::new();
    for i in 0..=n {
        let prefix_key: String = key[..i].iter().collect();
        let prefixes = lex.prefixes_with_key(&prefix_key);
        if prefixes.is_empty() {
            continue;
        }
        for j in (i + 1)..=n {
            let stems = lex.stems_with_key(&key[i..j].iter().collect::<String>());
            if stems.is_empty() {
                continue;
            }
            let suffixes = lex.suffixes_with_key(&key[j..].iter().collect::<String>());
            for &p in prefixes {
                for &s in stems {
                    for &x in suffixes {
                        out.push(Split { prefix: p, stem: s, suffix: x });
                    }
                }
            }
        }
    }
    out
}

/// A base letter with the diacritics written after it.
struct Cluster {
    base: char,
    marks: Vec<char>,
}

fn clusters(s: &str) -> (Vec<char>, Vec<Cluster>) {
    let table = CodecTable::bundled();
    let mut leading = Vec::new();
    let mut out: Vec<Cluster> = Vec::new();
    for ch in s.chars() {
        match table.class_of_code(ch) {
            Some(CharClass::Tatweel) => {}
            Some(CharClass::Diacritic) => match out.last_mut() {
                Some(c) => c.marks.push(ch),
                None => leading.push(ch),
            },
            _ => out.push(Cluster { base: ch, marks: Vec::new() }),
        }
    }
    (leading, out)
}

/// Compares input vocalization with an entry's vocalized surface (same
/// lookup key). Returns `None` on a hard conflict, otherwise the number of
/// input marks the entry leaves unexplained.
pub fn vocalization_fit(input: &str, entry: &str) -> Option<usize> {
    let table = CodecTable::bundled();
    let (in_lead, in_clusters) = clusters(input);
    let (en_lead, en_clusters) = clusters(entry);
    if in_clusters.len() != en_clusters.len() {
        return None;
    }
    let mut unexplained = 0;
    let mut compare = |inp: &[char], ent: &[char]| -> bool {
        if ent.is_empty() {
            unexplained += inp.len();
            return true;
        }
        inp.iter().all(|m| ent.contains(m))
    };
    if !compare(&in_lead, &en_lead) {
        return None;
    }
    for (i, e) in in_clusters.iter().zip(&en_clusters) {
        if i.base != e.base {
            let specific_alef = |c: char| table.class_of_code(c) == Some(CharClass::AlefVariant);
            if specific_alef(i.base) && e.base != 'A' {
                return None;
            }
        }
        if !compare(&i.marks, &e.marks) {
            return None;
        }
    }
    Some(unexplained)
}

const AFFIX_PENALTY: i64 = 1;
const UNEXPLAINED_PENALTY: i64 = 10;

fn assemble(token_id: &str, split: Split, prefix: &AffixEntry, stem: &StemEntry, suffix: &AffixEntry, unexplained: usize) -> MorphAnalysis {
    let mut segments: Vec<Segment> = Vec::new();
    let affix_segments = |e: &AffixEntry| {
        e.segments
            .iter()
            .map(|s| Segment {
                surface: s.surface.clone(),
                pos: s.pos,
                role: s.role,
                gloss: s.gloss.clone(),
                features: s.features,
            })
            .collect::<Vec<_>>()
    };
    segments.extend(affix_segments(prefix));
    let mut features = stem.default_features();
    segments.push(Segment {
        surface: stem.surface.clone(),
        pos: stem.pos,
        role: SegmentRole::Stem,
        gloss: stem.gloss.clone(),
        features,
    });
    segments.extend(affix_segments(suffix));
    features.overlay(&prefix.features);
    features.overlay(&suffix.features);
    features.sanitize_for(stem.pos);
    let stem_seg = segments.iter_mut().find(|s| s.role == SegmentRole::Stem).unwrap();
    stem_seg.features = features;

    let affix_count = (prefix.segments.len() + suffix.segments.len()) as i64;
    let units = -(UNEXPLAINED_PENALTY * unexplained as i64 + AFFIX_PENALTY * affix_count);
    MorphAnalysis {
        token_id: token_id.to_string(),
        segments,
        lemma: stem.lemma.clone(),
        root: stem.root.clone(),
        pattern: stem.pattern.clone(),
        pos: stem.pos,
        category: stem.category.clone(),
        derivation: stem.derivation,
        ditransitive: stem.is_ditransitive(),
        features,
        score: units as f64 / 10.0,
        unknown: false,
        source: Some(split),
    }
}

/// All readings of `token`: segmentations that pass the three compatibility
/// tables and the vocalization check, ordered by split position, then
/// category, then lexicon order.
pub fn analyze(token_id: &str, token: &Translit, lex: &Lexicon) -> Vec<MorphAnalysis> {
    let mut readings: Vec<(usize, usize, MorphAnalysis)> = Vec::new();
    for split in segment(token, lex) {
        let prefix = &lex.prefixes()[split.prefix];
        let stem = &lex.stems()[split.stem];
        let suffix = &lex.suffixes()[split.suffix];
        if !(lex.compat_ab(&prefix.category, &stem.category)
            && lex.compat_bc(&stem.category, &suffix.category)
            && lex.compat_ac(&prefix.category, &suffix.category))
        {
            continue;
        }
        let full = format!("{}{}{}", prefix.surface, stem.surface, suffix.surface);
        let Some(unexplained) = vocalization_fit(token.as_str(), &full) else {
            continue;
        };
        let prefix_len = lookup_key(prefix.surface.as_str()).chars().count();
        let stem_len = lookup_key(stem.surface.as_str()).chars().count();
        readings.push((prefix_len, stem_len, assemble(token_id, split, prefix, stem, suffix, unexplained)));
    }
    readings.sort_by(|a, b| {
        let (sa, sb) = (a.2.source.unwrap(), b.2.source.unwrap());
        (a.0, a.1)
            .cmp(&(b.0, b.1))
            .then_with(|| lex.prefixes()[sa.prefix].category.cmp(&lex.prefixes()[sb.prefix].category))
            .then_with(|| lex.stems()[sa.stem].category.cmp(&lex.stems()[sb.stem].category))
            .then_with(|| lex.suffixes()[sa.suffix].category.cmp(&lex.suffixes()[sb.suffix].category))
            .then_with(|| (sa.stem, sa.prefix, sa.suffix).cmp(&(sb.stem, sb.prefix, sb.suffix)))
    });
    readings.into_iter().map(|(_, _, a)| a).collect()
}

/// Sentence-position information available to [`select_best`].
#[derive(Debug, Clone)]
pub struct Context<'a> {
    pub token_id: &'a str,
    pub surface: &'a Translit,
    pub previous_pos: Option<Pos>,
}

fn contextual_score(a: &MorphAnalysis, ctx: &Context<'_>) -> f64 {
    // A preposition governs a nominal.
    if ctx.previous_pos == Some(Pos::Prep) && a.pos == Pos::V {
        a.score - 0.5
    } else {
        a.score
    }
}

/// Picks the highest-scoring reading; ties go to the earliest lexicon entries.
/// An empty list yields the `UNK` fallback.
pub fn select_best(readings: &[MorphAnalysis], ctx: &Context<'_>) -> MorphAnalysis {
    let lexicon_order = |a: &MorphAnalysis| a.source.map(|s| (s.stem, s.prefix, s.suffix));
    readings
        .iter()
        .min_by(|a, b| {
            contextual_score(b, ctx)
                .total_cmp(&contextual_score(a, ctx))
                .then_with(|| lexicon_order(a).cmp(&lexicon_order(b)))
        })
        .cloned()
        .unwrap_or_else(|| MorphAnalysis::unknown(ctx.token_id, ctx.surface))
}

/// Analyzes and selects in one step.
pub fn analyze_best(token_id: &str, token: &Translit, previous_pos: Option<Pos>, lex: &Lexicon) -> (MorphAnalysis, usize) {
    let readings = analyze(token_id, token, lex);
    let ctx = Context { token_id, surface: token, previous_pos };
    (select_best(&readings, &ctx), readings.len())
}
