//! Analyzes and parses Buckwalter sentences given as arguments.
//!
//! cargo run -p framebench-core --example parse_bw -- "waDaEa Alwaladu AlkitAba fy AlHaqiybapi."

use framebench_core::{bundled, corpus::tokenize, script::arabic_from_bw, syntax};

fn main() {
    let lex = bundled::lexicon();
    let net = bundled::net();
    for bw in std::env::args().skip(1) {
        let text = arabic_from_bw(&bw).unwrap();
        let nodes = syntax::analyze_tokens(&tokenize("s", &text), &lex);
        for n in &nodes {
            println!("  {} ({} readings)", n.analysis, n.readings);
        }
        match syntax::parse(nodes, &net) {
            Ok(g) => print!("{}", syntax::export_graph_tsv(&g)),
            Err(e) => println!("{e}"),
        }
    }
}
