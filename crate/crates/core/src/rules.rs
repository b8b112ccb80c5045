//! Valence patterns and FE to PT/GF mapping rules mined from validated
//! annotation sets.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::annotation::{validate, Anchor, AnnotationSet, LayerKind, Violation, VoiceCode};
use crate::frames::FrameDb;
use crate::syntax::PhraseBase;
use crate::xml;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RuleError {
    #[error("annotation set {aset_id} is not valid: {violations:?}")]
    NotValidated { aset_id: String, violations: Vec<Violation> },
    #[error("annotation set {aset_id}: FE at {anchor} has no {layer} value")]
    MissingAlignment { aset_id: String, anchor: Anchor, layer: LayerKind },
}

/// Phrase types of the target and its realized frame elements.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ValencePattern {
    pub elements: Vec<String>,
}

impl fmt::Display for ValencePattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.elements.join("."))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct MappingRule {
    pub rule_id: String,
    pub fe: String,
    pub pt: String,
    pub gf: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RuleGroup {
    pub group_id: String,
    pub pattern: ValencePattern,
    pub voice: VoiceCode,
    /// True for verbal-clause targets.
    pub cons: bool,
    pub rules: Vec<MappingRule>,
    pub support: usize,
    pub semantic_field: Option<String>,
}

impl RuleGroup {
    pub fn triples(&self) -> Vec<(&str, &str, &str)> {
        self.rules.iter().map(|r| (r.fe.as_str(), r.pt.as_str(), r.gf.as_str())).collect()
    }

    fn merge_key(&self) -> (String, VoiceCode, bool, Vec<(String, String, String)>) {
        (
            self.pattern.to_string(),
            self.voice,
            self.cons,
            self.rules.iter().map(|r| (r.fe.clone(), r.pt.clone(), r.gf.clone())).collect(),
        )
    }

    fn renumber(&mut self, group_id: String) {
        for (i, r) in self.rules.iter_mut().enumerate() {
            r.rule_id = format!("{group_id}{}", i + 1);
        }
        self.group_id = group_id;
    }
}

fn group_id(n: usize) -> String {
    format!("{n:02}")
}

fn check_alignment(aset: &AnnotationSet) -> Result<(), RuleError> {
    for (fe, gf, pt) in aset.slots() {
        for (layer, slot) in [(LayerKind::GF, gf), (LayerKind::PT, pt)] {
            if slot.is_none_or(|l| l.is_empty()) {
                return Err(RuleError::MissingAlignment { aset_id: aset.aset_id.clone(), anchor: fe.anchor, layer });
            }
        }
    }
    Ok(())
}

fn require_valid(aset: &AnnotationSet, db: &FrameDb) -> Result<(), RuleError> {
    check_alignment(aset)?;
    let violations = validate(aset, db);
    if violations.is_empty() {
        Ok(())
    } else {
        Err(RuleError::NotValidated { aset_id: aset.aset_id.clone(), violations })
    }
}

fn pattern_of(aset: &AnnotationSet) -> ValencePattern {
    let mut elements = vec![aset.target_pt.to_string()];
    for (fe, _, pt) in aset.slots() {
        if !matches!(fe.anchor, Anchor::Span(_)) {
            continue;
        }
        let Some(pt) = pt else { continue };
        let element = match &pt.prep {
            Some(prep) if pt.value.split('-').next() == Some(PhraseBase::PP.code()) => format!("PP({prep})"),
            _ => pt.value.clone(),
        };
        elements.push(element);
    }
    ValencePattern { elements }
}

/// Target phrase type, then the PT of each FE span in surface order.
/// Incorporated pronouns are not phrases and are left out.
pub fn valence_pattern(aset: &AnnotationSet, db: &FrameDb) -> Result<ValencePattern, RuleError> {
    require_valid(aset, db)?;
    Ok(pattern_of(aset))
}

/// One rule per realized FE of a valid set, in surface order.
pub fn derive_rules(aset: &AnnotationSet, db: &FrameDb) -> Result<RuleGroup, RuleError> {
    require_valid(aset, db)?;
    let rules = aset
        .slots()
        .into_iter()
        .map(|(fe, gf, pt)| MappingRule {
            rule_id: String::new(),
            fe: fe.value.clone(),
            pt: pt.map(|l| l.value.clone()).unwrap_or_default(),
            gf: gf.map(|l| l.value.clone()).unwrap_or_default(),
        })
        .collect();
    let target = aset.target_span();
    let semantic_field = target.and_then(|t| aset.label_at(LayerKind::Sumo, &Anchor::Span(t))).map(|l| l.value.clone());
    let mut group = RuleGroup {
        group_id: String::new(),
        pattern: pattern_of(aset),
        voice: aset.voice,
        cons: aset.target_pt == PhraseBase::VP,
        rules,
        support: 1,
        semantic_field,
    };
    group.renumber(group_id(1));
    Ok(group)
}

/// Merges groups with equal pattern, voice, cons and rule triples, summing
/// supports. Output is sorted by support, then pattern, and renumbered.
pub fn aggregate(groups: &[RuleGroup]) -> Vec<RuleGroup> {
    let mut merged: Vec<RuleGroup> = Vec::new();
    let mut keyed: Vec<_> = groups.iter().map(|g| (g.merge_key(), g)).collect();
    keyed.sort_by(|a, b| a.0.cmp(&b.0));
    for (key, g) in keyed {
        match merged.last_mut() {
            Some(last) if last.merge_key() == key => {
                last.support += g.support;
                last.semantic_field = match (last.semantic_field.take(), &g.semantic_field) {
                    (Some(a), Some(b)) => Some(a.min(b.clone())),
                    (a, b) => a.or_else(|| b.clone()),
                };
            }
            _ => merged.push(g.clone()),
        }
    }
    merged.sort_by(|a, b| b.support.cmp(&a.support).then_with(|| a.merge_key().cmp(&b.merge_key())));
    for (i, g) in merged.iter_mut().enumerate() {
        g.renumber(group_id(i + 1));
    }
    merged
}

/// Rules document for one lexical unit.
pub fn export_rules(lu_id: &str, groups: &[RuleGroup]) -> String {
    let root = xml::attrs(&[("luID", lu_id)]);
    if groups.is_empty() {
        return format!("<rules{root}/>\n");
    }
    let mut out = format!("<rules{root}>\n");
    for g in groups {
        let pattern = g.pattern.to_string();
        let cons = if g.cons { "T" } else { "F" };
        out.push_str(&format!(
            "<m{}>\n",
            xml::attrs(&[("id", &g.group_id), ("pattern", &pattern), ("voice", g.voice.code()), ("cons", cons)])
        ));
        for r in &g.rules {
            out.push_str(&format!("  <rule{}/>\n", xml::attrs(&[("id", &r.rule_id), ("FE", &r.fe), ("PT", &r.pt), ("GF", &r.gf)])));
        }
        out.push_str("</m>\n");
    }
    out.push_str("</rules>\n");
    out
}

/// Derives and aggregates the rules of every set.
pub fn mine(sets: &[AnnotationSet], db: &FrameDb) -> Result<Vec<RuleGroup>, RuleError> {
    let groups = sets.iter().map(|s| derive_rules(s, db)).collect::<Result<Vec<_>, _>>()?;
    Ok(aggregate(&groups))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::annotation::{autofill_syntax_layers, new_annotation_set, NullKind, Origin};
    use crate::bundled;
    use crate::corpus::{split_sentences, Paragraph};
    use crate::script::arabic_from_bw;
    use crate::syntax::{analyze_sentence, parse};

    fn annotate(bw: &str, frame: &str, fes: &[(usize, usize, &str)], nulls: &[&str]) -> AnnotationSet {
        let text = arabic_from_bw(bw).unwrap();
        let s = split_sentences(&Paragraph { parag_id: "X-p1".into(), text }).remove(0);
        let net = bundled::net();
        let db = bundled::frames();
        let g = parse(analyze_sentence(&s, &bundled::lexicon()), &net).unwrap();
        let mut a = new_annotation_set("a1", "X", &s, s.tokens[0].char_span, frame, &db, &g.nodes[0].analysis).unwrap();
        for &(from, to, fe) in fes {
            let anchor = Anchor::span(s.tokens[from].char_span.start, s.tokens[to].char_span.end);
            a.set_label(LayerKind::FE, anchor, fe, Origin::Human, &db).unwrap();
        }
        for fe in nulls {
            a.set_label(LayerKind::FE, Anchor::Null(NullKind::INI), fe, Origin::Human, &db).unwrap();
        }
        autofill_syntax_layers(&mut a, &g, &net);
        a
    }

    fn placing() -> AnnotationSet {
        annotate("waDaEa Alwaladu AlkitAba fiy AlHaqiybapi.", "Placing", &[(1, 1, "Agent"), (2, 2, "Theme"), (3, 4, "Source")], &["Goal"])
    }

    #[test]
    fn placing_pattern_and_rules() {
        let db = bundled::frames();
        let a = placing();
        assert_eq!(valence_pattern(&a, &db).unwrap().to_string(), "VP.NP-nom.NP-acc.PP(في)");
        let g = derive_rules(&a, &db).unwrap();
        assert_eq!(g.triples(), [("Agent", "NP-nom", "Subj"), ("Theme", "NP-acc", "Obj"), ("Source", "PP-gen", "OBL")]);
        assert_eq!((g.voice, g.cons, g.support), (VoiceCode::A, true, 1));
        assert_eq!(g.semantic_field.as_deref(), Some("Putting"));
        let ids: Vec<_> = g.rules.iter().map(|r| r.rule_id.as_str()).collect();
        assert_eq!(ids, ["011", "012", "013"]);
    }

    #[test]
    fn target_only_and_two_pps() {
        let db = bundled::frames();
        let bare = annotate("*ahaba Alwaladu.", "Motion", &[], &["Theme", "Source", "Goal", "Path"]);
        assert_eq!(valence_pattern(&bare, &db).unwrap().to_string(), "VP");
        let two = annotate(
            "*ahaba Alwaladu mina Albayoti <ilaY Almadrasapi.",
            "Motion",
            &[(1, 1, "Theme"), (2, 3, "Source"), (4, 5, "Goal")],
            &["Path"],
        );
        assert_eq!(valence_pattern(&two, &db).unwrap().to_string(), "VP.NP-nom.PP(من).PP(إلى)");
    }

    #[test]
    fn missing_slots_are_reported() {
        let db = bundled::frames();
        let mut a = placing();
        let anchor = a.layer(LayerKind::FE)[0].anchor;
        a.remove_label(LayerKind::GF, anchor, None).unwrap();
        assert!(matches!(derive_rules(&a, &db), Err(RuleError::MissingAlignment { layer: LayerKind::GF, .. })));
        let mut b = placing();
        b.remove_label(LayerKind::FE, Anchor::Null(NullKind::INI), Some("Goal")).unwrap();
        assert!(matches!(derive_rules(&b, &db), Err(RuleError::NotValidated { .. })));
    }

    #[test]
    fn aggregation_merges_and_keeps_voices_apart() {
        let db = bundled::frames();
        let g = derive_rules(&placing(), &db).unwrap();
        let merged = aggregate(&[g.clone(), g.clone()]);
        assert_eq!(merged.len(), 1);
        assert_eq!(merged[0].support, 2);
        let mut passive = g.clone();
        passive.voice = VoiceCode::P;
        let kept = aggregate(&[g.clone(), passive, g.clone()]);
        assert_eq!(kept.iter().map(|g| (g.group_id.as_str(), g.support)).collect::<Vec<_>>(), [("01", 2), ("02", 1)]);
        assert_eq!(aggregate(&kept), kept);
    }

    #[test]
    fn export_shape() {
        let db = bundled::frames();
        let groups = aggregate(&[derive_rules(&placing(), &db).unwrap()]);
        let xml = export_rules("waDaEa.v", &groups);
        let expected = "<rules luID=\"waDaEa.v\">\n\
<m id=\"01\" pattern=\"VP.NP-nom.NP-acc.PP(في)\" voice=\"A\" cons=\"T\">\n  \
<rule id=\"011\" FE=\"Agent\" PT=\"NP-nom\" GF=\"Subj\"/>\n  \
<rule id=\"012\" FE=\"Theme\" PT=\"NP-acc\" GF=\"Obj\"/>\n  \
<rule id=\"013\" FE=\"Source\" PT=\"PP-gen\" GF=\"OBL\"/>\n\
</m>\n</rules>\n";
        assert_eq!(xml, expected);
        assert_eq!(export_rules("waDaEa.v", &groups), xml);
        assert_eq!(export_rules("waDaEa.v", &[]), "<rules luID=\"waDaEa.v\"/>\n");
    }
}
