//! Inputs shared by the pipeline benchmarks.

use framebench_core::bundled;
use framebench_core::corpus::{import_corpus, Sentence};

/// Every desk sentence with the sub-corpus it belongs to.
pub fn desk_sentences() -> Vec<(String, Sentence)> {
    bundled::DESK_CORPUS
        .iter()
        .flat_map(|(_, doc)| {
            let corpus = import_corpus(doc).expect("bundled desk corpus");
            corpus.sentences().into_iter().map(|(sub, s)| (sub.sub_cid.clone(), s.clone())).collect::<Vec<_>>()
        })
        .collect()
}
