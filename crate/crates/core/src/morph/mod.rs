//! Clitic segmentation and lexicon-driven morphological analysis.

mod analyzer;
mod features;
mod lexicon;

pub use analyzer::{analyze, analyze_best, segment, select_best, vocalization_fit, Context, MorphAnalysis, Segment, Split};
pub use features::{Case, Definiteness, Derivation, FeatureBundle, Gender, Mood, Number, Person, Pos, SegmentRole, Tense, Voice};
pub use lexicon::{load_lexicon, AffixEntry, AffixSegment, CompatSet, Lexicon, LexiconError, LexiconSources, StemEntry};
