//! Sample resources compiled into the crate.

use crate::frames::FrameDb;
use crate::lexsem::LexNet;
use crate::morph::{Lexicon, LexiconSources};

pub const BUCKWALTER_TABLE: &str = include_str!("../data/buckwalter.tsv");

pub fn lexicon_sources() -> LexiconSources {
    LexiconSources {
        prefixes: include_str!("../data/lexicon/prefixes.tsv").to_string(),
        stems: include_str!("../data/lexicon/stems.tsv").to_string(),
        suffixes: include_str!("../data/lexicon/suffixes.tsv").to_string(),
        compat_ab: include_str!("../data/lexicon/compat_ab.tsv").to_string(),
        compat_bc: include_str!("../data/lexicon/compat_bc.tsv").to_string(),
        compat_ac: include_str!("../data/lexicon/compat_ac.tsv").to_string(),
    }
}

pub fn lexicon() -> Lexicon {
    Lexicon::from_sources(&lexicon_sources()).expect("bundled lexicon is valid")
}

pub const SYNSETS: &str = include_str!("../data/net/synsets.tsv");
pub const RELATIONS: &str = include_str!("../data/net/relations.tsv");

pub fn net() -> LexNet {
    LexNet::parse(SYNSETS, RELATIONS).expect("bundled net is valid")
}

/// Sample corpus document with nine EDU/5A paragraphs.
pub const SAMPLE_CORPUS: &str = include_str!("../data/golden/sample_corpus.xml");

/// Single hand-built Placing sentence with its decision and expected rules.
pub const PLACING_CORPUS: &str = include_str!("../data/golden/placing_corpus.xml");
pub const PLACING_DECISIONS: &str = include_str!("../data/golden/placing_decisions.tsv");
pub const PLACING_RULES: &str = include_str!("../data/golden/placing_rules.xml");

pub const FRAMES: &str = include_str!("../data/frames.xml");

pub fn frames() -> FrameDb {
    FrameDb::parse(FRAMES).expect("bundled frame database is valid")
}

/// Desk corpus: one document per sub-corpus.
pub const DESK_CORPUS: [(&str, &str); 2] =
    [("plc.xml", include_str!("../data/desk/plc.xml")), ("mot.xml", include_str!("../data/desk/mot.xml"))];

/// Annotation decisions for the desk corpus, one target per line.
pub const DESK_DECISIONS: &str = include_str!("../data/desk/annotations.tsv");
