use std::collections::BTreeMap;

use framebench_core::annotation::{validate, AnnotationSet};
use framebench_core::bundled;
use framebench_core::corpus::{import_corpus, Corpus};
use framebench_core::decisions::{apply_decision, parse_decisions};
use framebench_core::rules::{export_rules, mine};
use framebench_core::syntax::{analyze_sentence, parse};

fn desk_corpus() -> Corpus {
    let mut corpus = Corpus::new("DESK");
    for (_, doc) in bundled::DESK_CORPUS {
        corpus.absorb(import_corpus(doc).unwrap()).unwrap();
    }
    corpus
}

fn desk_sets() -> Vec<AnnotationSet> {
    let corpus = desk_corpus();
    let (lex, net, db) = (bundled::lexicon(), bundled::net(), bundled::frames());
    parse_decisions(bundled::DESK_DECISIONS)
        .unwrap()
        .iter()
        .map(|d| {
            let (sub, sentence) = corpus.sentences().into_iter().find(|(_, s)| s.sentence_id == d.sentence_id).expect("sentence exists");
            let g = parse(analyze_sentence(&sentence, &lex), &net).unwrap();
            apply_decision(d, &sub.sub_cid, &sentence, &g, &db, &net).unwrap()
        })
        .collect()
}

#[test]
fn desk_corpus_has_enough_sentences() {
    assert!(desk_corpus().sentences().len() >= 20);
}

#[test]
fn every_desk_decision_validates() {
    let db = bundled::frames();
    for s in desk_sets() {
        assert_eq!(validate(&s, &db), [], "{}", s.aset_id);
    }
}

#[test]
fn desk_rules_merge_identical_patterns() {
    let db = bundled::frames();
    let mut by_lu: BTreeMap<String, Vec<AnnotationSet>> = BTreeMap::new();
    for s in desk_sets() {
        by_lu.entry(s.lu_id.clone()).or_default().push(s);
    }
    assert!(by_lu.len() >= 2);
    let motion = mine(&by_lu["*ahaba.v"], &db).unwrap();
    assert_eq!(motion[0].pattern.to_string(), "VP.NP-nom.PP(إلى)");
    assert_eq!(motion[0].support, 6);
    assert_eq!(motion.iter().map(|g| g.support).sum::<usize>(), by_lu["*ahaba.v"].len());
    let placing = mine(&by_lu["waDaEa.v"], &db).unwrap();
    let xml = export_rules("waDaEa.v", &placing);
    assert!(xml.contains("pattern=\"VP.NP-nom.NP-acc.PP(في)\""), "{xml}");
    assert!(xml.contains("pattern=\"VP.NP-acc.PP(في)\""), "{xml}");
}
