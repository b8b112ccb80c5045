//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit if any fails.

#[path = "../../core/tests/support/mod.rs"]
mod support;

use std::fs;
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use framebench_core::bundled;
use framebench_core::morph::analyze;
use framebench_core::corpus::{export_corpus, import_corpus};
use framebench_core::script::Translit;
use framebench_service::stages::{mine, validate_all};
use framebench_service::Project;
use support::*;
use tempfile::TempDir;

type Outcome = Result<String, String>;
type Criterion = (&'static str, Option<Duration>, fn() -> Outcome);

fn ensure(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn framebench(project: &Path, args: &[&str]) -> Result<(i32, String), String> {
    let out = Command::new(env!("CARGO_BIN_EXE_framebench"))
        .arg("--project")
        .arg(project)
        .args(args)
        .output()
        .map_err(|e| e.to_string())?;
    let text = format!("{}{}", String::from_utf8_lossy(&out.stdout), String::from_utf8_lossy(&out.stderr));
    Ok((out.status.code().unwrap_or(-1), text))
}

fn run_ok(project: &Path, args: &[&str]) -> Result<String, String> {
    match framebench(project, args)? {
        (0, text) => Ok(text),
        (code, text) => Err(format!("framebench {} exited {code}: {text}", args.join(" "))),
    }
}

fn segmentation_golden() -> Outcome {
    let lex = bundled::lexicon();
    let readings = analyze("t0", &Translit::new("fa>akalotuhA").unwrap(), &lex);
    ensure(readings.len() == 1, format!("{} readings", readings.len()))?;
    let a = &readings[0];
    let surfaces: Vec<&str> = a.segments.iter().map(|s| s.surface.as_str()).collect();
    ensure(surfaces == ["fa", ">akal", "tu", "hA"], format!("segments {surfaces:?}"))?;
    let tags = a.tags().join("+");
    ensure(tags == "Conj+V+Pro(subj,1sg)+Pro(obj,3sg,f)", format!("tags {tags}"))?;
    let glosses = a.glosses().join("/");
    ensure(glosses == "and/Eat/I/them", format!("glosses {glosses}"))?;
    Ok(format!("{surfaces:?} {tags} {glosses}"))
}

fn placing_end_to_end() -> Outcome {
    let dir = TempDir::new().map_err(|e| e.to_string())?;
    let root = dir.path().join("project");
    let corpus = dir.path().join("placing.xml");
    let decisions = dir.path().join("placing.tsv");
    fs::write(&corpus, bundled::PLACING_CORPUS).map_err(|e| e.to_string())?;
    fs::write(&decisions, bundled::PLACING_DECISIONS).map_err(|e| e.to_string())?;
    run_ok(&root, &["init"])?;
    run_ok(&root, &["import", corpus.to_str().unwrap()])?;
    run_ok(&root, &["analyze"])?;
    run_ok(&root, &["annotate", "waDaEa.v", "--decisions", decisions.to_str().unwrap()])?;
    run_ok(&root, &["validate"])?;
    run_ok(&root, &["mine", "waDaEa.v"])?;
    run_ok(&root, &["export"])?;
    let rules = fs::read_to_string(root.join("rules/waDaEa.v.xml")).map_err(|e| e.to_string())?;
    ensure(rules == bundled::PLACING_RULES, format!("rules differ from golden:\n{rules}"))?;
    ensure(root.join("export/waDaEa.v.xml").exists(), "no export written")?;
    Ok("rules/waDaEa.v.xml byte-equal to golden".into())
}

fn corpus_round_trip() -> Outcome {
    let corpus = import_corpus(bundled::SAMPLE_CORPUS).map_err(|e| e.to_string())?;
    let sub = &corpus.subcorpora[0];
    ensure(corpus.corpus_id == "EDU" && sub.sub_cid == "5A" && sub.paragraphs.len() == 9, "unexpected document model")?;
    let out = export_corpus(&corpus);
    ensure(out.len() == 1 && out[0].1 == bundled::SAMPLE_CORPUS, "export differs from input")?;
    let again = export_corpus(&import_corpus(&out[0].1).map_err(|e| e.to_string())?);
    ensure(again == out, "second round differs")?;
    Ok(format!("EDU/5A, {} paragraphs, {} bytes", sub.paragraphs.len(), out[0].1.len()))
}

fn codec_round_trip() -> Outcome {
    describe(runner(10_000).run(&bw_string(), |s| check_bw_round_trip(&s)))?;
    describe(runner(10_000).run(&arabic_string(), |s| check_arabic_round_trip(&s)))?;
    Ok("10000 Buckwalter and 10000 Arabic strings".into())
}

fn morphology_oracle() -> Outcome {
    let tokens = std::cell::Cell::new(0);
    let entries = std::cell::RefCell::new(Vec::new());
    let mut r = runner(5);
    describe(r.run(&lexicon_spec(), |spec| {
        entries.borrow_mut().push(spec.entry_count());
        tokens.set(tokens.get() + check_morph_oracle(&spec)?);
        Ok(())
    }))?;
    let entries = entries.into_inner();
    ensure(entries.len() == 5, format!("{} lexicons checked", entries.len()))?;
    Ok(format!("5 lexicons of {entries:?} entries, {} tokens, 0 mismatches", tokens.get()))
}

fn annotation_invariants() -> Outcome {
    let fx = AnnotationFixture::load();
    let ops = std::cell::Cell::new(0);
    describe(runner(1000).run(&op_sequence(fx.cases.len()), |(case, seq)| {
        ops.set(ops.get() + seq.len());
        check_annotation_ops(&fx, case, &seq)
    }))?;
    Ok(format!("1000 sequences, {} operations, 0 violations", ops.get()))
}

fn rule_miner_properties() -> Outcome {
    describe(runner(100).run(&group_multiset(), |(groups, shuffled)| check_aggregate(&groups, &shuffled)))?;
    Ok("100 multisets: idempotent, order-free, support conserved".into())
}

fn desk_run() -> Outcome {
    let dir = TempDir::new().map_err(|e| e.to_string())?;
    let root = dir.path();
    run_ok(root, &["init", "--desk"])?;
    run_ok(root, &["analyze"])?;
    run_ok(root, &["annotate", "--decisions", root.join("decisions.tsv").to_str().unwrap()])?;
    let validate = run_ok(root, &["validate"])?;
    run_ok(root, &["mine", "--all"])?;
    let project = Project::open(root).map_err(|e| e.to_string())?;
    let sentences = project.corpus.sentences().len();
    let report = validate_all(&project);
    ensure(report.violations.is_empty(), validate)?;
    let units = project.annotations.len();
    let valid = report.sets_validated;
    ensure(sentences >= 20, format!("{sentences} sentences"))?;
    ensure(valid >= 10 && units >= 2, format!("{valid} validated sets over {units} units"))?;
    let (_, mined) = mine(&project, None).map_err(|e| e.to_string())?;
    let total: usize = mined.iter().flat_map(|(_, g)| g).map(|g| g.support).sum();
    ensure(total == valid, format!("supports sum to {total}, expected {valid}"))?;
    let merged = mined.iter().flat_map(|(_, g)| g).filter(|g| g.support > 1).count();
    ensure(merged > 0, "no groups merged")?;
    let best = mined.iter().flat_map(|(lu, g)| g.iter().map(move |g| (lu, g))).max_by_key(|(_, g)| g.support).unwrap();
    Ok(format!("{sentences} sentences, {valid} valid sets over {units} units, {merged} merged groups, top {} {} support {}", best.0, best.1.pattern, best.1.support))
}

fn main() {
    let criteria: [Criterion; 8] = [
        ("segmentation golden", Some(Duration::from_secs(1)), segmentation_golden),
        ("placing rules end to end", Some(Duration::from_secs(5)), placing_end_to_end),
        ("corpus document round trip", None, corpus_round_trip),
        ("codec round trip", Some(Duration::from_secs(10)), codec_round_trip),
        ("morphology oracle", Some(Duration::from_secs(60)), morphology_oracle),
        ("annotation invariants", None, annotation_invariants),
        ("rule miner properties", None, rule_miner_properties),
        ("desk corpus run", None, desk_run),
    ];
    let mut failed = 0;
    for (name, limit, check) in criteria {
        let started = Instant::now();
        let mut outcome = check();
        let elapsed = started.elapsed();
        if let (Ok(_), Some(limit)) = (&outcome, limit) {
            if elapsed > limit {
                outcome = Err(format!("took {elapsed:?}, limit {limit:?}"));
            }
        }
        match outcome {
            Ok(detail) => println!("PASS  {name:<28} {:>7.1} ms  {detail}", elapsed.as_secs_f64() * 1e3),
            Err(why) => {
                failed += 1;
                println!("FAIL  {name:<28} {:>7.1} ms  {why}", elapsed.as_secs_f64() * 1e3);
            }
        }
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
    println!("all criteria passed");
}
