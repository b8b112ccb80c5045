use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

macro_rules! feature_enum {
    ($(#[$meta:meta])* $name:ident { $($variant:ident => $code:literal),+ $(,)? }) => {
        $(#[$meta])*
        #[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
        pub enum $name {
            $($variant),+
        }

        impl $name {
            pub const ALL: &'static [$name] = &[$($name::$variant),+];

            pub fn code(self) -> &'static str {
                match self {
                    $($name::$variant => $code),+
                }
            }
        }

        impl FromStr for $name {
            type Err = String;
            fn from_str(s: &str) -> Result<Self, Self::Err> {
                match s {
                    $($code => Ok($name::$variant),)+
                    other => Err(format!("unknown {} value {other:?}", stringify!($name))),
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

feature_enum!(Gender { M => "m", F => "f" });
feature_enum!(Number { Sg => "sg", Du => "du", Pl => "pl" });
feature_enum!(Person { First => "1", Second => "2", Third => "3" });
feature_enum!(Tense { Past => "past", Present => "pres", Imperative => "imp" });
feature_enum!(Voice { Active => "act", Passive => "pass" });
feature_enum!(Mood { Indicative => "ind", Subjunctive => "subj", Jussive => "juss" });
feature_enum!(Case { Nom => "nom", Acc => "acc", Gen => "gen" });
feature_enum!(Definiteness { Def => "def", Indef => "indef" });

feature_enum!(
    /// Closed part-of-speech tag set. `Infl` covers case and mood endings.
    Pos {
        Conj => "Conj",
        Prep => "Prep",
        Part => "Part",
        Det => "Det",
        V => "V",
        N => "N",
        PN => "PN",
        Adj => "Adj",
        Pro => "Pro",
        Adv => "Adv",
        Infl => "Infl",
        Unk => "UNK",
    }
);

impl Pos {
    pub fn is_nominal(self) -> bool {
        matches!(self, Pos::N | Pos::PN | Pos::Adj | Pos::Pro)
    }
}

feature_enum!(SegmentRole {
    Proclitic => "proclitic",
    Stem => "stem",
    SubjPronoun => "subj",
    ObjPronoun => "obj",
    EncliticOther => "enclitic",
});

feature_enum!(Derivation {
    VerbalNoun => "verbal-noun",
    ActiveParticiple => "active-participle",
    PassiveParticiple => "passive-participle",
    Plain => "plain",
});

/// Inflectional features of a word or segment. `None` means unspecified.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct FeatureBundle {
    pub gender: Option<Gender>,
    pub number: Option<Number>,
    pub person: Option<Person>,
    pub tense: Option<Tense>,
    pub voice: Option<Voice>,
    pub mood: Option<Mood>,
    pub case: Option<Case>,
    pub definiteness: Option<Definiteness>,
}

impl FeatureBundle {
    pub fn is_empty(&self) -> bool {
        *self == FeatureBundle::default()
    }

    /// Values set in `other` replace the values in `self`.
    pub fn overlay(&mut self, other: &FeatureBundle) {
        macro_rules! take {
            ($($field:ident),+) => { $( if other.$field.is_some() { self.$field = other.$field; } )+ };
        }
        take!(gender, number, person, tense, voice, mood, case, definiteness);
    }

    /// Verbs carry no case or definiteness; nominals carry no tense or mood.
    pub fn sanitize_for(&mut self, pos: Pos) {
        if pos == Pos::V {
            self.case = None;
            self.definiteness = None;
        } else if pos.is_nominal() {
            self.tense = None;
            self.mood = None;
        }
    }
}

impl fmt::Display for FeatureBundle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts: Vec<String> = Vec::new();
        macro_rules! push {
            ($($field:ident => $key:literal),+) => {
                $( if let Some(v) = self.$field { parts.push(format!("{}={}", $key, v)); } )+
            };
        }
        push!(gender => "gen", number => "num", person => "per", tense => "tense", voice => "voice",
              mood => "mood", case => "case", definiteness => "def");
        if parts.is_empty() {
            f.write_str("-")
        } else {
            f.write_str(&parts.join(","))
        }
    }
}

impl FromStr for FeatureBundle {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut fb = FeatureBundle::default();
        let s = s.trim();
        if s.is_empty() || s == "-" {
            return Ok(fb);
        }
        for item in s.split(',') {
            let (key, value) = item.split_once('=').ok_or_else(|| format!("feature {item:?} is not key=value"))?;
            match key.trim() {
                "gen" => fb.gender = Some(value.parse()?),
                "num" => fb.number = Some(value.parse()?),
                "per" => fb.person = Some(value.parse()?),
                "tense" => fb.tense = Some(value.parse()?),
                "voice" => fb.voice = Some(value.parse()?),
                "mood" => fb.mood = Some(value.parse()?),
                "case" => fb.case = Some(value.parse()?),
                "def" => fb.definiteness = Some(value.parse()?),
                other => return Err(format!("unknown feature key {other:?}")),
            }
        }
        Ok(fb)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn feature_string_round_trip() {
        let fb: FeatureBundle = "gen=f,num=sg,per=3,case=nom,def=def".parse().unwrap();
        assert_eq!(fb.gender, Some(Gender::F));
        assert_eq!(fb.to_string().parse::<FeatureBundle>().unwrap(), fb);
        assert_eq!(FeatureBundle::default().to_string(), "-");
        assert!("gen=x".parse::<FeatureBundle>().is_err());
        assert!("colour=red".parse::<FeatureBundle>().is_err());
    }

    #[test]
    fn overlay_and_sanitize() {
        let mut base: FeatureBundle = "gen=m,num=sg,tense=past,case=nom".parse().unwrap();
        base.overlay(&"gen=f".parse().unwrap());
        assert_eq!(base.gender, Some(Gender::F));
        assert_eq!(base.number, Some(Number::Sg));
        let mut verb = base;
        verb.sanitize_for(Pos::V);
        assert_eq!(verb.case, None);
        let mut noun = base;
        noun.sanitize_for(Pos::N);
        assert_eq!(noun.tense, None);
    }
}
