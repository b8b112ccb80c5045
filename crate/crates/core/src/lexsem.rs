//! Wordnet-style synset graph with SUMO concept links.
//!
//! `synsets.tsv`: id, pos, lemmas (`;`-joined Buckwalter), gloss,
//! english links (`;`-joined `lemma.pos`), SUMO concept, SUMO relation.
//! `relations.tsv`: from, to, kind. `-` marks an empty cell.

use std::collections::{HashMap, HashSet, VecDeque};
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::script::{lookup_key, Translit};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum NetError {
    #[error("{file} line {line}: {message}")]
    Format { file: &'static str, line: usize, message: String },
    #[error("duplicate synset id {0:?}")]
    DuplicateSynset(String),
    #[error("relation references unknown synset {0:?}")]
    DanglingSynset(String),
    #[error("hypernym cycle through {0:?}")]
    HypernymCycle(String),
    #[error("cannot read {path}: {message}")]
    Io { path: String, message: String },
}

macro_rules! code_enum {
    ($name:ident { $($variant:ident => $code:literal),+ $(,)? }) => {
        #[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
        pub enum $name { $($variant),+ }

        impl $name {
            pub fn code(self) -> &'static str {
                match self { $($name::$variant => $code),+ }
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

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(self.code())
            }
        }
    };
}

code_enum!(SynsetPos { Noun => "n", Verb => "v", Adjective => "a", Adverb => "r" });
code_enum!(ConceptRelation { Equivalent => "equivalent", Subsuming => "subsuming", Instance => "instance" });
code_enum!(RelationKind {
    Hypernym => "hypernym",
    Hyponym => "hyponym",
    SynonymNear => "synonym-near",
    Antonym => "antonym",
    Related => "related",
});

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConceptLink {
    pub concept: String,
    pub relation: ConceptRelation,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Synset {
    pub synset_id: String,
    pub pos: SynsetPos,
    pub lemmas: Vec<Translit>,
    pub gloss: String,
    pub english_links: Vec<String>,
    pub sumo: Option<ConceptLink>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SemRelation {
    pub from: String,
    pub to: String,
    pub kind: RelationKind,
}

/// SUMO concepts treated as animate when choosing recipients.
pub const ANIMATE_CONCEPTS: &[&str] = &["Human", "Animal", "Organism", "GroupOfPeople", "FamilyGroup"];

/// Lookup of frames by English lexical unit, implemented by the frame database.
pub trait FrameIndex {
    /// Frame names having an LU whose lower-cased `lemma.pos` equals `key`.
    fn frames_for_english(&self, key: &str) -> Vec<String>;
}

/// How a frame was reached from an Arabic lemma.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EvidencePath {
    /// Sense of the lemma the search started from.
    pub sense: String,
    /// Hypernyms walked, nearest first. Empty for a direct link.
    pub via: Vec<String>,
    /// English LU key that matched.
    pub english: String,
}

impl EvidencePath {
    pub fn depth(&self) -> usize {
        self.via.len()
    }

    pub fn is_direct(&self) -> bool {
        self.via.is_empty()
    }
}

impl fmt::Display for EvidencePath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.sense)?;
        for v in &self.via {
            write!(f, " > {v}")?;
        }
        write!(f, " ~ {}", self.english)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FrameCandidate {
    pub frame: String,
    pub path: EvidencePath,
}

#[derive(Debug, Clone)]
pub struct LexNet {
    synsets: Vec<Synset>,
    relations: Vec<SemRelation>,
    by_id: HashMap<String, usize>,
    by_lemma: HashMap<String, Vec<usize>>,
    edges: HashMap<(usize, RelationKind), Vec<usize>>,
}

fn cells(line: &str) -> Vec<&str> {
    line.split('\t').map(str::trim).collect()
}

fn list(cell: &str) -> Vec<&str> {
    if cell == "-" || cell.is_empty() {
        Vec::new()
    } else {
        cell.split(';').map(str::trim).filter(|s| !s.is_empty()).collect()
    }
}

fn data_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines().enumerate().map(|(i, l)| (i + 1, l)).filter(|(_, l)| !l.trim().is_empty() && !l.starts_with('#'))
}

impl LexNet {
    pub const FILES: [&'static str; 2] = ["synsets.tsv", "relations.tsv"];

    pub fn new(mut synsets: Vec<Synset>, relations: Vec<SemRelation>) -> Result<Self, NetError> {
        synsets.sort_by(|a, b| a.synset_id.cmp(&b.synset_id));
        let mut by_id = HashMap::new();
        let mut by_lemma: HashMap<String, Vec<usize>> = HashMap::new();
        for (i, s) in synsets.iter().enumerate() {
            if by_id.insert(s.synset_id.clone(), i).is_some() {
                return Err(NetError::DuplicateSynset(s.synset_id.clone()));
            }
            let mut keys: Vec<String> = s.lemmas.iter().map(|l| lookup_key(l.as_str())).collect();
            keys.dedup();
            for k in keys {
                by_lemma.entry(k).or_default().push(i);
            }
        }
        let mut edges: HashMap<(usize, RelationKind), Vec<usize>> = HashMap::new();
        for r in &relations {
            let from = *by_id.get(&r.from).ok_or_else(|| NetError::DanglingSynset(r.from.clone()))?;
            let to = *by_id.get(&r.to).ok_or_else(|| NetError::DanglingSynset(r.to.clone()))?;
            let targets = edges.entry((from, r.kind)).or_default();
            if !targets.contains(&to) {
                targets.push(to);
            }
        }
        let net = LexNet { synsets, relations, by_id, by_lemma, edges };
        net.check_hypernyms_acyclic()?;
        Ok(net)
    }

    /// Treats `a hyponym b` as `b hypernym a` so both spellings of the taxonomy are checked.
    fn check_hypernyms_acyclic(&self) -> Result<(), NetError> {
        let n = self.synsets.len();
        let mut up: Vec<Vec<usize>> = vec![Vec::new(); n];
        for ((from, kind), targets) in &self.edges {
            for &to in targets {
                match kind {
                    RelationKind::Hypernym => up[*from].push(to),
                    RelationKind::Hyponym => up[to].push(*from),
                    _ => {}
                }
            }
        }
        // 0 = unvisited, 1 = on stack, 2 = done
        let mut state = vec![0u8; n];
        for start in 0..n {
            if state[start] != 0 {
                continue;
            }
            let mut stack = vec![(start, 0usize)];
            state[start] = 1;
            while let Some((node, next)) = stack.pop() {
                if next < up[node].len() {
                    stack.push((node, next + 1));
                    let child = up[node][next];
                    match state[child] {
                        0 => {
                            state[child] = 1;
                            stack.push((child, 0));
                        }
                        1 => return Err(NetError::HypernymCycle(self.synsets[child].synset_id.clone())),
                        _ => {}
                    }
                } else {
                    state[node] = 2;
                }
            }
        }
        Ok(())
    }

    pub fn parse(synsets_tsv: &str, relations_tsv: &str) -> Result<Self, NetError> {
        let fmt_err = |file: &'static str, line: usize, message: String| NetError::Format { file, line, message };
        let mut synsets = Vec::new();
        for (line, text) in data_lines(synsets_tsv) {
            let c = cells(text);
            if c.len() != 7 {
                return Err(fmt_err("synsets.tsv", line, format!("expected 7 columns, found {}", c.len())));
            }
            let pos = c[1].parse().map_err(|e| fmt_err("synsets.tsv", line, e))?;
            let lemmas = list(c[2])
                .into_iter()
                .map(Translit::new)
                .collect::<Result<Vec<_>, _>>()
                .map_err(|e| fmt_err("synsets.tsv", line, e.to_string()))?;
            if lemmas.is_empty() {
                return Err(fmt_err("synsets.tsv", line, "synset has no lemmas".into()));
            }
            let sumo = match (c[5], c[6]) {
                ("-", "-") => None,
                ("-", _) | ("", _) => return Err(fmt_err("synsets.tsv", line, "relation without concept".into())),
                (concept, rel) => Some(ConceptLink {
                    concept: concept.to_string(),
                    relation: rel.parse().map_err(|e| fmt_err("synsets.tsv", line, e))?,
                }),
            };
            synsets.push(Synset {
                synset_id: c[0].to_string(),
                pos,
                lemmas,
                gloss: if c[3] == "-" { String::new() } else { c[3].to_string() },
                english_links: list(c[4]).into_iter().map(str::to_lowercase).collect(),
                sumo,
            });
        }
        let mut relations = Vec::new();
        for (line, text) in data_lines(relations_tsv) {
            let c = cells(text);
            if c.len() != 3 {
                return Err(fmt_err("relations.tsv", line, format!("expected 3 columns, found {}", c.len())));
            }
            let kind = c[2].parse().map_err(|e| fmt_err("relations.tsv", line, e))?;
            relations.push(SemRelation { from: c[0].to_string(), to: c[1].to_string(), kind });
        }
        LexNet::new(synsets, relations)
    }

    pub fn synsets(&self) -> &[Synset] {
        &self.synsets
    }

    pub fn relations(&self) -> &[SemRelation] {
        &self.relations
    }

    pub fn synset(&self, id: &str) -> Option<&Synset> {
        self.by_id.get(id).map(|&i| &self.synsets[i])
    }

    /// Synsets containing the lemma (diacritic-stripped, alef-folded), by id.
    pub fn senses(&self, lemma: &str) -> Vec<&Synset> {
        self.by_lemma.get(&lookup_key(lemma)).map_or_else(Vec::new, |ix| ix.iter().map(|&i| &self.synsets[i]).collect())
    }

    /// Breadth-first walk over `kind` edges up to `max_depth`, excluding `s`.
    pub fn closure(&self, s: &Synset, kind: RelationKind, max_depth: usize) -> Vec<&Synset> {
        self.closure_with_paths(s, kind, max_depth).into_iter().map(|(i, _)| &self.synsets[i]).collect()
    }

    /// Closure members with the path of intermediate nodes used to reach them.
    fn closure_with_paths(&self, s: &Synset, kind: RelationKind, max_depth: usize) -> Vec<(usize, Vec<usize>)> {
        let Some(&start) = self.by_id.get(&s.synset_id) else {
            return Vec::new();
        };
        let mut seen = HashSet::from([start]);
        let mut out = Vec::new();
        let mut queue = VecDeque::from([(start, Vec::new())]);
        while let Some((node, path)) = queue.pop_front() {
            if path.len() == max_depth {
                continue;
            }
            for &next in self.edges.get(&(node, kind)).map_or(&[][..], Vec::as_slice) {
                if seen.insert(next) {
                    let mut p = path.clone();
                    p.push(next);
                    out.push((next, p.clone()));
                    queue.push_back((next, p));
                }
            }
        }
        out
    }

    /// Frames reachable from the lemma's senses through English links, first
    /// directly and then through hypernyms up to depth 2. Each frame appears
    /// once with its shortest path; ranking is by depth, then sense order.
    pub fn frame_candidates(&self, lemma: &str, frames: &dyn FrameIndex) -> Vec<FrameCandidate> {
        self.frame_candidates_within(lemma, frames, 2)
    }

    pub fn frame_candidates_within(&self, lemma: &str, frames: &dyn FrameIndex, max_depth: usize) -> Vec<FrameCandidate> {
        let mut found: Vec<(usize, usize, usize, FrameCandidate)> = Vec::new();
        for (sense_rank, sense) in self.senses(lemma).into_iter().enumerate() {
            let mut reach = vec![(self.by_id[&sense.synset_id], Vec::new())];
            reach.extend(self.closure_with_paths(sense, RelationKind::Hypernym, max_depth));
            for (node, via) in reach {
                for (link_rank, english) in self.synsets[node].english_links.iter().enumerate() {
                    for frame in frames.frames_for_english(english) {
                        let path = EvidencePath {
                            sense: sense.synset_id.clone(),
                            via: via.iter().map(|&i| self.synsets[i].synset_id.clone()).collect(),
                            english: english.clone(),
                        };
                        found.push((path.depth(), sense_rank, link_rank, FrameCandidate { frame, path }));
                    }
                }
            }
        }
        found.sort_by_key(|a| (a.0, a.1, a.2));
        let mut seen = HashSet::new();
        found.into_iter().filter(|(_, _, _, c)| seen.insert(c.frame.clone())).map(|(_, _, _, c)| c).collect()
    }

    /// SUMO link of the lemma's first sense that has one.
    pub fn concept_for(&self, lemma: &str) -> Option<&ConceptLink> {
        self.senses(lemma).into_iter().find_map(|s| s.sumo.as_ref())
    }

    /// True if a sense of the lemma, or a hypernym within three steps, maps to an animate concept.
    pub fn is_animate(&self, lemma: &str) -> bool {
        let animate = |s: &Synset| s.sumo.as_ref().is_some_and(|c| ANIMATE_CONCEPTS.contains(&c.concept.as_str()));
        self.senses(lemma)
            .into_iter()
            .any(|s| animate(s) || self.closure(s, RelationKind::Hypernym, 3).into_iter().any(animate))
    }
}

pub fn load_net(dir: &Path) -> Result<LexNet, NetError> {
    let read = |name: &str| {
        let path = dir.join(name);
        std::fs::read_to_string(&path).map_err(|e| NetError::Io { path: path.display().to_string(), message: e.to_string() })
    };
    LexNet::parse(&read("synsets.tsv")?, &read("relations.tsv")?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bundled;

    fn syn(id: &str, lemmas: &[&str], links: &[&str]) -> Synset {
        Synset {
            synset_id: id.to_string(),
            pos: SynsetPos::Verb,
            lemmas: lemmas.iter().map(|l| Translit::new(l).unwrap()).collect(),
            gloss: String::new(),
            english_links: links.iter().map(|s| s.to_string()).collect(),
            sumo: None,
        }
    }

    fn rel(from: &str, to: &str) -> SemRelation {
        SemRelation { from: from.into(), to: to.into(), kind: RelationKind::Hypernym }
    }

    struct Frames(Vec<(&'static str, &'static str)>);

    impl FrameIndex for Frames {
        fn frames_for_english(&self, key: &str) -> Vec<String> {
            self.0.iter().filter(|(k, _)| *k == key).map(|(_, f)| f.to_string()).collect()
        }
    }

    fn ids(v: Vec<&Synset>) -> Vec<&str> {
        v.into_iter().map(|s| s.synset_id.as_str()).collect()
    }

    #[test]
    fn closure_on_chain_and_diamond() {
        let net = LexNet::new(vec![syn("a", &["x"], &[]), syn("b", &["y"], &[]), syn("c", &["z"], &[])], vec![rel("a", "b"), rel("b", "c")])
            .unwrap();
        let a = net.synset("a").unwrap();
        assert!(net.closure(a, RelationKind::Hypernym, 0).is_empty());
        assert_eq!(ids(net.closure(a, RelationKind::Hypernym, 1)), ["b"]);
        assert_eq!(ids(net.closure(a, RelationKind::Hypernym, 2)), ["b", "c"]);

        let net = LexNet::new(
            vec![syn("a", &["x"], &[]), syn("b", &["y"], &[]), syn("c", &["z"], &[]), syn("d", &["w"], &[])],
            vec![rel("a", "b"), rel("a", "c"), rel("b", "d"), rel("c", "d")],
        )
        .unwrap();
        assert_eq!(ids(net.closure(net.synset("a").unwrap(), RelationKind::Hypernym, 5)), ["b", "c", "d"]);
    }

    #[test]
    fn load_errors() {
        let cyclic = LexNet::new(vec![syn("a", &["x"], &[]), syn("b", &["y"], &[])], vec![rel("a", "b"), rel("b", "a")]);
        assert!(matches!(cyclic, Err(NetError::HypernymCycle(_))));
        let hypo_cycle = LexNet::new(
            vec![syn("a", &["x"], &[]), syn("b", &["y"], &[])],
            vec![rel("a", "b"), SemRelation { from: "a".into(), to: "b".into(), kind: RelationKind::Hyponym }],
        );
        assert!(matches!(hypo_cycle, Err(NetError::HypernymCycle(_))));
        let dangling = LexNet::new(vec![syn("a", &["x"], &[])], vec![rel("a", "q")]);
        assert_eq!(dangling.unwrap_err(), NetError::DanglingSynset("q".into()));
        let dup = LexNet::new(vec![syn("a", &["x"], &[]), syn("a", &["y"], &[])], vec![]);
        assert!(matches!(dup, Err(NetError::DuplicateSynset(_))));
        assert!(matches!(LexNet::parse("s1\tv\t-\tg\t-\t-\t-\n", ""), Err(NetError::Format { line: 1, .. })));
        assert!(matches!(LexNet::parse("s1\tq\tktb\tg\t-\t-\t-\n", ""), Err(NetError::Format { .. })));
    }

    #[test]
    fn senses_are_normalized_and_ordered() {
        let net = LexNet::new(vec![syn("s2", &["kataba"], &[]), syn("s1", &["katab"], &[])], vec![]).unwrap();
        assert_eq!(ids(net.senses("ktb")), ["s1", "s2"]);
        assert!(net.senses("qlm").is_empty());
    }

    #[test]
    fn frame_candidates_rank_and_dedup() {
        let net = LexNet::new(
            vec![syn("s1", &["w"], &["put.v"]), syn("s2", &["w"], &[]), syn("up", &["q"], &["put.v", "move.v"])],
            vec![rel("s2", "up")],
        )
        .unwrap();
        let frames = Frames(vec![("put.v", "Placing"), ("move.v", "Motion")]);
        let got = net.frame_candidates("w", &frames);
        assert_eq!(got.len(), 2);
        assert_eq!(got[0].frame, "Placing");
        assert!(got[0].path.is_direct());
        assert_eq!(got[0].path.sense, "s1");
        assert_eq!(got[1].frame, "Motion");
        assert_eq!(got[1].path.via, ["up"]);
        assert!(net.frame_candidates("zz", &frames).is_empty());
    }

    #[test]
    fn bundled_net_motion_sense() {
        let net = bundled::net();
        let senses = net.senses("*ahaba");
        assert!(senses.iter().any(|s| s.english_links.contains(&"go.v".to_string())));
        assert!(net.is_animate("walad"));
        assert!(net.is_animate("Tifl"));
        assert!(!net.is_animate("kitAb"));
        assert_eq!(net.concept_for("kitAb").unwrap().concept, "Book");
    }
}
