mod support;

use framebench_core::annotation::{export_annotation, import_annotation, validate};
use framebench_core::bundled;
use framebench_core::corpus::{import_corpus, Sentence};
use framebench_core::decisions::{apply_decision, parse_decisions};
use framebench_core::frames::suggest_frames;
use framebench_core::syntax::{analyze_sentence, constituents, parse};
use proptest::prelude::*;
use support::*;

proptest! {
    #![proptest_config(ProptestConfig { cases: 2000, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn buckwalter_round_trip(bw in bw_string()) {
        check_bw_round_trip(&bw)?;
    }

    #[test]
    fn arabic_round_trip(s in arabic_string()) {
        check_arabic_round_trip(&s)?;
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 20, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn analyzer_matches_brute_force_oracle(spec in lexicon_spec()) {
        check_morph_oracle(&spec)?;
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 100, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn aggregate_is_idempotent_and_order_free((groups, shuffled) in group_multiset()) {
        check_aggregate(&groups, &shuffled)?;
    }
}

#[test]
fn annotation_ops_keep_alignment_and_human_values() {
    let fx = AnnotationFixture::load();
    let mut runner = runner(300);
    let result = runner.run(&op_sequence(fx.cases.len()), |(case, ops)| check_annotation_ops(&fx, case, &ops));
    if let Err(e) = describe(result) {
        panic!("{e}");
    }
}

fn desk_sentences() -> Vec<Sentence> {
    bundled::DESK_CORPUS.iter().flat_map(|(_, doc)| import_corpus(doc).unwrap().sentences().into_iter().map(|(_, s)| s).collect::<Vec<_>>()).collect()
}

#[test]
fn every_desk_parse_is_a_projective_tree() {
    let (lex, net) = (bundled::lexicon(), bundled::net());
    for s in desk_sentences() {
        let g = parse(analyze_sentence(&s, &lex), &net).unwrap();
        let n = g.nodes.len();
        let mut heads = vec![None; n];
        for a in &g.arcs {
            assert!(heads[a.dep].replace(a.head).is_none(), "{}: token {} has two heads", s.sentence_id, a.dep);
        }
        assert_eq!(heads.iter().filter(|h| h.is_none()).count(), 1, "{}", s.sentence_id);
        assert!(heads[g.root].is_none());
        for start in 0..n {
            let mut seen = 0;
            let mut at = start;
            while let Some(h) = heads[at] {
                at = h;
                seen += 1;
                assert!(seen <= n, "{}: cycle through {start}", s.sentence_id);
            }
            assert_eq!(at, g.root);
        }
        let projection = constituents(&g);
        for c in &projection.constituents {
            assert!(c.char_span.start < c.char_span.end);
        }
    }
}

#[test]
fn export_then_import_preserves_validity() {
    let (lex, net, db) = (bundled::lexicon(), bundled::net(), bundled::frames());
    let sentences = desk_sentences();
    let mut by_lu: std::collections::BTreeMap<String, Vec<_>> = Default::default();
    for d in parse_decisions(bundled::DESK_DECISIONS).unwrap() {
        let s = sentences.iter().find(|s| s.sentence_id == d.sentence_id).unwrap();
        let g = parse(analyze_sentence(s, &lex), &net).unwrap();
        let sub = s.sentence_id.split('-').next().unwrap();
        let aset = apply_decision(&d, sub, s, &g, &db, &net).unwrap();
        by_lu.entry(aset.lu_id.clone()).or_default().push(aset);
    }
    for (lu, sets) in by_lu {
        let doc = export_annotation(&lu, &sets, None, &db).unwrap();
        let back = import_annotation(&doc).unwrap();
        assert_eq!(back.lu_id, lu);
        for s in &back.sets {
            assert!(validate(s, &db).is_empty(), "{}", s.aset_id);
        }
        assert_eq!(export_annotation(&lu, &back.sets, None, &db).unwrap(), doc);
    }
}

#[test]
fn frame_suggestions_are_deterministic() {
    let (db, net) = (bundled::frames(), bundled::net());
    for lemma in ["waDaEa", "*ahaba", "jaEala", "waSala", ">akala", "kataba", "xaraja"] {
        let first = suggest_frames(lemma, &db, &net);
        for _ in 0..5 {
            assert_eq!(suggest_frames(lemma, &db, &net), first, "{lemma}");
        }
        let mut frames: Vec<&str> = first.iter().map(|s| s.frame.as_str()).collect();
        let n = frames.len();
        frames.dedup();
        assert_eq!(frames.len(), n, "{lemma}: duplicate suggestions");
    }
}
