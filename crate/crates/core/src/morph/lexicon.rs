//! Three-table lexicon (prefixes, stems, suffixes) with three compatibility
//! tables between their morphological categories.
//!
//! Affix rows: `surface  category  pos_sequence  features  gloss`. A compound
//! affix lists its segments joined by `+` in the surface, POS, feature and
//! gloss columns; `-` marks an empty column. POS items may carry a role as
//! `Pro:subj`. Stem rows: `surface  lemma  root  pattern  category  pos  gloss
//! derivation`. Stem categories encode default features as `_`-separated
//! tags after the base (`PV_Pass`, `N_f`, `N_pl`, `PV_Dtr`, ...).

use std::collections::{HashMap, HashSet};
use std::fs;
use std::path::Path;

use thiserror::Error;

use super::features::{Definiteness, Derivation, FeatureBundle, Gender, Number, Pos, SegmentRole, Tense, Voice};
use crate::script::{lookup_key, Translit};

#[derive(Debug, Error)]
pub enum LexiconError {
    #[error("{file}:{line}: {message}")]
    Format { file: String, line: usize, message: String },
    #[error("{table} references unknown category {name:?}")]
    DanglingCategory { table: &'static str, name: String },
    #[error("category {0:?} appears in no compatibility pair")]
    OrphanCategory(String),
    #[error("category {0:?} has more than one null affix")]
    DuplicateNullAffix(String),
    #[error("reading {path}: {source}")]
    Io { path: String, source: std::io::Error },
}

#[derive(Debug, Clone, PartialEq)]
pub struct AffixSegment {
    pub surface: Translit,
    pub pos: Pos,
    pub role: SegmentRole,
    pub features: FeatureBundle,
    pub gloss: String,
}

impl AffixSegment {
    /// Whether this segment's features describe the host word (as opposed to
    /// an attached object or possessor pronoun).
    pub fn contributes_to_word(&self) -> bool {
        !(self.role == SegmentRole::ObjPronoun || (self.role == SegmentRole::EncliticOther && self.pos == Pos::Pro))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AffixEntry {
    pub surface: Translit,
    pub category: String,
    pub segments: Vec<AffixSegment>,
    /// Contribution to the word-level feature bundle.
    pub features: FeatureBundle,
    pub gloss: String,
}

impl AffixEntry {
    pub fn null(category: &str, features: FeatureBundle) -> Self {
        AffixEntry {
            surface: Translit::new("").unwrap(),
            category: category.to_string(),
            segments: Vec::new(),
            features,
            gloss: String::new(),
        }
    }

    pub fn from_segments(category: &str, segments: Vec<AffixSegment>) -> Self {
        let surface: String = segments.iter().map(|s| s.surface.as_str()).collect();
        let mut features = FeatureBundle::default();
        for seg in segments.iter().filter(|s| s.contributes_to_word()) {
            features.overlay(&seg.features);
        }
        let gloss = segments.iter().map(|s| s.gloss.as_str()).collect::<Vec<_>>().join("+");
        AffixEntry {
            surface: Translit::new(&surface).expect("segment surfaces are valid Buckwalter"),
            category: category.to_string(),
            segments,
            features,
            gloss,
        }
    }

    pub fn is_null(&self) -> bool {
        self.surface.is_empty()
    }

    pub fn pos_sequence(&self) -> Vec<Pos> {
        self.segments.iter().map(|s| s.pos).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StemEntry {
    pub surface: Translit,
    pub lemma: Translit,
    pub root: Option<Translit>,
    pub pattern: Option<Translit>,
    pub category: String,
    pub pos: Pos,
    pub gloss: String,
    pub derivation: Derivation,
}

impl StemEntry {
    fn tags(&self) -> impl Iterator<Item = &str> {
        self.category.split('_').skip(1)
    }

    fn base_category(&self) -> &str {
        self.category.split('_').next().unwrap_or("")
    }

    pub fn is_ditransitive(&self) -> bool {
        self.tags().any(|t| t == "Dtr")
    }

    /// Default feature values implied by the POS and category tags.
    pub fn default_features(&self) -> FeatureBundle {
        let mut fb = FeatureBundle::default();
        match self.pos {
            Pos::V => {
                fb.voice = Some(Voice::Active);
                fb.tense = match self.base_category() {
                    base if base.starts_with("IV") => Some(Tense::Present),
                    base if base.starts_with("CV") => Some(Tense::Imperative),
                    _ => Some(Tense::Past),
                };
            }
            Pos::N | Pos::Adj => {
                fb.gender = Some(Gender::M);
                fb.number = Some(Number::Sg);
            }
            Pos::PN => {
                fb.gender = Some(Gender::M);
                fb.number = Some(Number::Sg);
                fb.definiteness = Some(Definiteness::Def);
            }
            _ => {}
        }
        for tag in self.tags() {
            match tag {
                "Pass" => fb.voice = Some(Voice::Passive),
                "f" => fb.gender = Some(Gender::F),
                "m" => fb.gender = Some(Gender::M),
                "sg" => fb.number = Some(Number::Sg),
                "du" => fb.number = Some(Number::Du),
                "pl" => fb.number = Some(Number::Pl),
                "def" => fb.definiteness = Some(Definiteness::Def),
                _ => {}
            }
        }
        fb
    }
}

/// Raw text of the six lexicon tables.
#[derive(Debug, Clone, Default)]
pub struct LexiconSources {
    pub prefixes: String,
    pub stems: String,
    pub suffixes: String,
    pub compat_ab: String,
    pub compat_bc: String,
    pub compat_ac: String,
}

impl LexiconSources {
    pub const FILES: [&'static str; 6] =
        ["prefixes.tsv", "stems.tsv", "suffixes.tsv", "compat_ab.tsv", "compat_bc.tsv", "compat_ac.tsv"];

    pub fn read_dir(dir: &Path) -> Result<Self, LexiconError> {
        let read = |name: &str| {
            let path = dir.join(name);
            fs::read_to_string(&path).map_err(|source| LexiconError::Io { path: path.display().to_string(), source })
        };
        Ok(LexiconSources {
            prefixes: read("prefixes.tsv")?,
            stems: read("stems.tsv")?,
            suffixes: read("suffixes.tsv")?,
            compat_ab: read("compat_ab.tsv")?,
            compat_bc: read("compat_bc.tsv")?,
            compat_ac: read("compat_ac.tsv")?,
        })
    }

    pub fn files(&self) -> [(&'static str, &str); 6] {
        [
            ("prefixes.tsv", &self.prefixes),
            ("stems.tsv", &self.stems),
            ("suffixes.tsv", &self.suffixes),
            ("compat_ab.tsv", &self.compat_ab),
            ("compat_bc.tsv", &self.compat_bc),
            ("compat_ac.tsv", &self.compat_ac),
        ]
    }
}

pub type CompatSet = HashSet<(String, String)>;

#[derive(Debug, Clone)]
pub struct Lexicon {
    prefixes: Vec<AffixEntry>,
    stems: Vec<StemEntry>,
    suffixes: Vec<AffixEntry>,
    compat_ab: CompatSet,
    compat_bc: CompatSet,
    compat_ac: CompatSet,
    prefix_index: HashMap<String, Vec<usize>>,
    stem_index: HashMap<String, Vec<usize>>,
    suffix_index: HashMap<String, Vec<usize>>,
    lemma_keys: HashSet<String>,
}

fn index_by_key<'a>(surfaces: impl Iterator<Item = &'a Translit>) -> HashMap<String, Vec<usize>> {
    let mut index: HashMap<String, Vec<usize>> = HashMap::new();
    for (i, s) in surfaces.enumerate() {
        index.entry(lookup_key(s.as_str())).or_default().push(i);
    }
    index
}

impl Lexicon {
    pub fn new(
        prefixes: Vec<AffixEntry>,
        stems: Vec<StemEntry>,
        suffixes: Vec<AffixEntry>,
        compat_ab: CompatSet,
        compat_bc: CompatSet,
        compat_ac: CompatSet,
    ) -> Result<Self, LexiconError> {
        let prefix_cats: HashSet<&str> = prefixes.iter().map(|e| e.category.as_str()).collect();
        let stem_cats: HashSet<&str> = stems.iter().map(|e| e.category.as_str()).collect();
        let suffix_cats: HashSet<&str> = suffixes.iter().map(|e| e.category.as_str()).collect();

        let check = |table: &'static str, set: &CompatSet, left: &HashSet<&str>, right: &HashSet<&str>| {
            let mut pairs: Vec<_> = set.iter().collect();
            pairs.sort();
            for (a, b) in pairs {
                for (name, known) in [(a, left), (b, right)] {
                    if !known.contains(name.as_str()) {
                        return Err(LexiconError::DanglingCategory { table, name: name.clone() });
                    }
                }
            }
            Ok(())
        };
        check("compat_ab", &compat_ab, &prefix_cats, &stem_cats)?;
        check("compat_bc", &compat_bc, &stem_cats, &suffix_cats)?;
        check("compat_ac", &compat_ac, &prefix_cats, &suffix_cats)?;

        let mut used: HashSet<&str> = HashSet::new();
        for (a, b) in compat_ab.iter().chain(&compat_bc).chain(&compat_ac) {
            used.insert(a);
            used.insert(b);
        }
        let mut all: Vec<&str> = prefix_cats.iter().chain(&stem_cats).chain(&suffix_cats).copied().collect();
        all.sort();
        if let Some(orphan) = all.into_iter().find(|c| !used.contains(c)) {
            return Err(LexiconError::OrphanCategory(orphan.to_string()));
        }

        for table in [&prefixes, &suffixes] {
            let mut nulls: HashSet<&str> = HashSet::new();
            for e in table.iter().filter(|e| e.is_null()) {
                if !nulls.insert(&e.category) {
                    return Err(LexiconError::DuplicateNullAffix(e.category.clone()));
                }
            }
        }

        Ok(Lexicon {
            prefix_index: index_by_key(prefixes.iter().map(|e| &e.surface)),
            stem_index: index_by_key(stems.iter().map(|e| &e.surface)),
            suffix_index: index_by_key(suffixes.iter().map(|e| &e.surface)),
            lemma_keys: stems.iter().map(|e| lookup_key(e.lemma.as_str())).collect(),
            prefixes,
            stems,
            suffixes,
            compat_ab,
            compat_bc,
            compat_ac,
        })
    }

    pub fn from_sources(src: &LexiconSources) -> Result<Self, LexiconError> {
        let prefixes = parse_affixes("prefixes.tsv", &src.prefixes, SegmentRole::Proclitic)?;
        let stems = parse_stems("stems.tsv", &src.stems)?;
        let suffixes = parse_affixes("suffixes.tsv", &src.suffixes, SegmentRole::EncliticOther)?;
        Lexicon::new(
            prefixes,
            stems,
            suffixes,
            parse_compat("compat_ab.tsv", &src.compat_ab)?,
            parse_compat("compat_bc.tsv", &src.compat_bc)?,
            parse_compat("compat_ac.tsv", &src.compat_ac)?,
        )
    }

    pub fn prefixes(&self) -> &[AffixEntry] {
        &self.prefixes
    }

    pub fn stems(&self) -> &[StemEntry] {
        &self.stems
    }

    pub fn suffixes(&self) -> &[AffixEntry] {
        &self.suffixes
    }

    pub fn compat_ab(&self, prefix_cat: &str, stem_cat: &str) -> bool {
        self.compat_ab.contains(&(prefix_cat.to_string(), stem_cat.to_string()))
    }

    pub fn compat_bc(&self, stem_cat: &str, suffix_cat: &str) -> bool {
        self.compat_bc.contains(&(stem_cat.to_string(), suffix_cat.to_string()))
    }

    pub fn compat_ac(&self, prefix_cat: &str, suffix_cat: &str) -> bool {
        self.compat_ac.contains(&(prefix_cat.to_string(), suffix_cat.to_string()))
    }

    pub(crate) fn prefixes_with_key(&self, key: &str) -> &[usize] {
        self.prefix_index.get(key).map_or(&[], Vec::as_slice)
    }

    pub(crate) fn stems_with_key(&self, key: &str) -> &[usize] {
        self.stem_index.get(key).map_or(&[], Vec::as_slice)
    }

    pub(crate) fn suffixes_with_key(&self, key: &str) -> &[usize] {
        self.suffix_index.get(key).map_or(&[], Vec::as_slice)
    }

    /// True if some stem has this lemma under diacritic-stripped, alef-folded comparison.
    pub fn has_lemma(&self, lemma: &str) -> bool {
        self.lemma_keys.contains(&lookup_key(lemma))
    }
}

pub fn load_lexicon(dir: &Path) -> Result<Lexicon, LexiconError> {
    Lexicon::from_sources(&LexiconSources::read_dir(dir)?)
}

fn data_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim_end_matches('\r')))
        .filter(|(_, l)| !l.trim().is_empty() && !l.starts_with('#'))
}

fn format_err(file: &str, line: usize, message: impl Into<String>) -> LexiconError {
    LexiconError::Format { file: file.to_string(), line, message: message.into() }
}

fn split_multi(col: &str) -> Vec<&str> {
    if col == "-" || col.is_empty() {
        Vec::new()
    } else {
        col.split('+').collect()
    }
}

fn parse_affixes(file: &str, text: &str, default_role: SegmentRole) -> Result<Vec<AffixEntry>, LexiconError> {
    let mut out = Vec::new();
    for (line, raw) in data_lines(text) {
        let cols: Vec<&str> = raw.split('\t').collect();
        if cols.len() != 5 {
            return Err(format_err(file, line, format!("expected 5 columns, found {}", cols.len())));
        }
        let category = cols[1].trim();
        if category.is_empty() || category == "-" {
            return Err(format_err(file, line, "missing category"));
        }
        let surfaces = split_multi(cols[0]);
        let pos_items = split_multi(cols[2]);
        let feature_items: Vec<&str> = if cols[3] == "-" { Vec::new() } else { cols[3].split('+').collect() };
        let glosses = split_multi(cols[4]);

        if surfaces.is_empty() {
            if !pos_items.is_empty() {
                return Err(format_err(file, line, "null affix cannot carry a POS sequence"));
            }
            let features = match feature_items.as_slice() {
                [] => FeatureBundle::default(),
                [one] => one.parse().map_err(|m: String| format_err(file, line, m))?,
                _ => return Err(format_err(file, line, "null affix takes at most one feature group")),
            };
            out.push(AffixEntry::null(category, features));
            continue;
        }

        let n = surfaces.len();
        if pos_items.len() != n {
            return Err(format_err(file, line, "POS sequence length differs from segment count"));
        }
        if !(feature_items.is_empty() || feature_items.len() == n) || !(glosses.is_empty() || glosses.len() == n) {
            return Err(format_err(file, line, "feature/gloss groups must match the segment count"));
        }
        let mut segments = Vec::with_capacity(n);
        for i in 0..n {
            let surface = Translit::new(surfaces[i]).map_err(|e| format_err(file, line, e.to_string()))?;
            if surface.is_empty() {
                return Err(format_err(file, line, "empty segment inside a compound affix"));
            }
            let (pos_s, role_s) = match pos_items[i].split_once(':') {
                Some((p, r)) => (p, Some(r)),
                None => (pos_items[i], None),
            };
            let pos: Pos = pos_s.parse().map_err(|m: String| format_err(file, line, m))?;
            let role = match role_s {
                Some(r) => r.parse().map_err(|m: String| format_err(file, line, m))?,
                None if pos == Pos::Pro => {
                    return Err(format_err(file, line, "pronoun segments need an explicit role (Pro:subj, Pro:obj, ...)"))
                }
                None => default_role,
            };
            if role == SegmentRole::Stem {
                return Err(format_err(file, line, "affix segments cannot have the stem role"));
            }
            let features = match feature_items.get(i) {
                Some(f) => f.parse().map_err(|m: String| format_err(file, line, m))?,
                None => FeatureBundle::default(),
            };
            segments.push(AffixSegment {
                surface,
                pos,
                role,
                features,
                gloss: glosses.get(i).map(|g| g.to_string()).unwrap_or_default(),
            });
        }
        out.push(AffixEntry::from_segments(category, segments));
    }
    Ok(out)
}

fn optional_translit(file: &str, line: usize, col: &str) -> Result<Option<Translit>, LexiconError> {
    if col == "-" {
        return Ok(None);
    }
    Translit::new(col).map(Some).map_err(|e| format_err(file, line, e.to_string()))
}

fn parse_stems(file: &str, text: &str) -> Result<Vec<StemEntry>, LexiconError> {
    let mut out = Vec::new();
    let mut last_line = 0;
    for (line, raw) in data_lines(text) {
        last_line = line;
        let cols: Vec<&str> = raw.split('\t').collect();
        if cols.len() != 8 {
            return Err(format_err(file, line, format!("expected 8 columns, found {}", cols.len())));
        }
        let surface = Translit::new(cols[0]).map_err(|e| format_err(file, line, e.to_string()))?;
        if surface.is_empty() || cols[0] == "-" {
            return Err(format_err(file, line, "stem surface cannot be empty"));
        }
        let lemma = Translit::new(cols[1]).map_err(|e| format_err(file, line, e.to_string()))?;
        let root = optional_translit(file, line, cols[2])?;
        let pattern = optional_translit(file, line, cols[3])?;
        let pos: Pos = cols[5].parse().map_err(|m: String| format_err(file, line, m))?;
        if matches!(pos, Pos::V | Pos::N | Pos::Adj) {
            let Some(root) = &root else {
                return Err(format_err(file, line, "verbs, nouns and adjectives need a root"));
            };
            let consonants = lookup_key(root.as_str()).chars().count();
            if !(2..=4).contains(&consonants) {
                return Err(format_err(file, line, format!("root must have 2-4 consonants, found {consonants}")));
            }
        }
        out.push(StemEntry {
            surface,
            lemma,
            root,
            pattern,
            category: cols[4].to_string(),
            pos,
            gloss: cols[6].to_string(),
            derivation: cols[7].parse().map_err(|m: String| format_err(file, line, m))?,
        });
    }
    if out.is_empty() {
        return Err(format_err(file, last_line.max(1), "lexicon must contain at least one stem"));
    }
    Ok(out)
}

fn parse_compat(file: &str, text: &str) -> Result<CompatSet, LexiconError> {
    let mut set = CompatSet::new();
    for (line, raw) in data_lines(text) {
        let cols: Vec<&str> = raw.split('\t').collect();
        if cols.len() != 2 || cols.iter().any(|c| c.trim().is_empty()) {
            return Err(format_err(file, line, "expected two category columns"));
        }
        set.insert((cols[0].trim().to_string(), cols[1].trim().to_string()));
    }
    Ok(set)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sources() -> LexiconSources {
        LexiconSources {
            prefixes: "-\tPref-0\t-\t-\t-\nfa\tPref-Wa\tConj\t-\tand\n".into(),
            stems: ">akal\t>akala\t>kl\tfaEal\tPV\tV\tEat\tplain\n".into(),
            suffixes: "tu+hA\tPVSuff-SO\tPro:subj+Pro:obj\tper=1,num=sg+per=3,num=sg,gen=f\tI+them\n".into(),
            compat_ab: "Pref-0\tPV\nPref-Wa\tPV\n".into(),
            compat_bc: "PV\tPVSuff-SO\n".into(),
            compat_ac: "Pref-0\tPVSuff-SO\nPref-Wa\tPVSuff-SO\n".into(),
        }
    }

    #[test]
    fn loads_small_lexicon() {
        let lex = Lexicon::from_sources(&sources()).unwrap();
        assert_eq!(lex.prefixes().len(), 2);
        let compound = &lex.suffixes()[0];
        assert_eq!(compound.surface.as_str(), "tuhA");
        assert_eq!(compound.pos_sequence(), vec![Pos::Pro, Pos::Pro]);
        // The object pronoun does not leak into the word-level bundle.
        assert_eq!(compound.features.gender, None);
        assert!(lex.has_lemma(">akala"));
        assert!(lex.has_lemma("Akl"));
    }

    #[test]
    fn dangling_category_is_reported() {
        let mut src = sources();
        src.compat_ab.push_str("Pref-0\tNoSuchStem\n");
        match Lexicon::from_sources(&src) {
            Err(LexiconError::DanglingCategory { table: "compat_ab", name }) => assert_eq!(name, "NoSuchStem"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn empty_stems_file_is_a_format_error() {
        let mut src = sources();
        src.stems = "# nothing here\n".into();
        assert!(matches!(Lexicon::from_sources(&src), Err(LexiconError::Format { .. })));
    }

    #[test]
    fn row_errors_carry_line_numbers() {
        let mut src = sources();
        src.stems.push_str("ktb\tkataba\tk\tfaEal\tPV\tV\twrite\tplain\n");
        match Lexicon::from_sources(&src) {
            Err(LexiconError::Format { line: 2, .. }) => {}
            other => panic!("unexpected {other:?}"),
        }
        let mut src = sources();
        src.prefixes.push_str("-\tPref-0\t-\t-\t-\n");
        assert!(matches!(Lexicon::from_sources(&src), Err(LexiconError::DuplicateNullAffix(_))));
    }

    #[test]
    fn orphan_category_is_rejected() {
        let mut src = sources();
        src.prefixes.push_str("wa\tPref-Lonely\tConj\t-\tand\n");
        assert!(matches!(Lexicon::from_sources(&src), Err(LexiconError::OrphanCategory(c)) if c == "Pref-Lonely"));
    }

    #[test]
    fn category_tags_drive_default_features() {
        let stem = |cat: &str, pos: Pos| StemEntry {
            surface: Translit::new("x").unwrap(),
            lemma: Translit::new("x").unwrap(),
            root: None,
            pattern: None,
            category: cat.into(),
            pos,
            gloss: String::new(),
            derivation: Derivation::Plain,
        };
        assert_eq!(stem("PV_Pass", Pos::V).default_features().voice, Some(Voice::Passive));
        assert_eq!(stem("IV", Pos::V).default_features().tense, Some(Tense::Present));
        assert_eq!(stem("N_f_pl", Pos::N).default_features().gender, Some(Gender::F));
        assert_eq!(stem("N_f_pl", Pos::N).default_features().number, Some(Number::Pl));
        assert!(stem("PVdef_Dtr", Pos::V).is_ditransitive());
    }
}
