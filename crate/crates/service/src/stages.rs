//! Batch stages over a project. Each stage reads what earlier stages wrote
//! and leaves files untouched when its output would not change.

use std::fmt;
use std::path::Path;
use std::time::Instant;

use framebench_core::annotation::{autofill_syntax_layers, export_annotation, new_annotation_set, validate, LayerKind, Violation};
use framebench_core::corpus::{concordance, SentenceRef};
use framebench_core::decisions::{apply_decision, parse_decisions};
use framebench_core::rules::{export_rules, mine as mine_rules, RuleGroup};
use framebench_core::script::{arabic_from_bw, lookup_key, ArabicText};
use framebench_core::syntax::{analyze_sentence, export_graph_tsv, parse};
use serde::Serialize;

use crate::project::{lu_file_name, read_file, write_if_changed, Project, ProjectError, ANALYSIS_DIR, EXPORT_DIR, RULES_DIR};

#[derive(Debug, Clone, Serialize, PartialEq, Eq)]
pub struct SetViolation {
    pub aset_id: String,
    pub lu_id: String,
    pub violation: Violation,
}

/// Counts and outcomes of one stage run.
#[derive(Debug, Clone, Default, Serialize)]
pub struct JobReport {
    pub stage: String,
    pub tokens_analyzed: usize,
    pub sentences_parsed: usize,
    pub sets_created: usize,
    pub sets_updated: usize,
    pub sets_validated: usize,
    pub files_written: Vec<String>,
    pub files_unchanged: Vec<String>,
    pub violations: Vec<SetViolation>,
    pub elapsed_ms: u128,
}

impl JobReport {
    fn new(stage: &str) -> Self {
        JobReport { stage: stage.to_string(), ..Default::default() }
    }

    fn file(&mut self, rel: String, changed: bool) {
        if changed {
            self.files_written.push(rel);
        } else {
            self.files_unchanged.push(rel);
        }
    }

    fn finish(mut self, started: Instant) -> Self {
        self.elapsed_ms = started.elapsed().as_millis();
        self
    }
}

impl fmt::Display for JobReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts = Vec::new();
        let counts = [
            (self.tokens_analyzed, "tokens analyzed"),
            (self.sentences_parsed, "sentences parsed"),
            (self.sets_created, "sets created"),
            (self.sets_updated, "sets updated"),
            (self.sets_validated, "sets valid"),
        ];
        for (n, what) in counts {
            if n > 0 {
                parts.push(format!("{n} {what}"));
            }
        }
        if !self.files_written.is_empty() || !self.files_unchanged.is_empty() {
            parts.push(format!("{} files written", self.files_written.len()));
            parts.push(format!("{} unchanged", self.files_unchanged.len()));
        }
        parts.push(format!("{} violations", self.violations.len()));
        writeln!(f, "{}: {} ({} ms)", self.stage, parts.join(", "), self.elapsed_ms)?;
        for path in &self.files_written {
            writeln!(f, "  wrote {path}")?;
        }
        for v in &self.violations {
            let detail = serde_json::to_string(&v.violation).unwrap_or_default();
            writeln!(f, "  {} [{}]: {detail}", v.aset_id, v.lu_id)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AnalysisLayer {
    Morph,
    Syntax,
    All,
}

/// Lemma given in Arabic script or Buckwalter.
pub fn lemma_text(input: &str) -> Result<ArabicText, ProjectError> {
    let arabic = input.chars().any(|c| ('\u{0600}'..='\u{06FF}').contains(&c));
    let text = if arabic { ArabicText::new(input) } else { arabic_from_bw(input) };
    text.map_err(|e| ProjectError::Usage(format!("bad lemma {input:?}: {e}")))
}

/// Writes per-sub-corpus morphology and dependency tables under `analysis/`.
pub fn analyze(project: &Project, layer: AnalysisLayer) -> Result<JobReport, ProjectError> {
    let started = Instant::now();
    let mut report = JobReport::new("analyze");
    for sub in &project.corpus.subcorpora {
        let mut morph = String::from("# token_id\tsurface\ttranslit\tlemma\tpos\tfeatures\tsegments\tglosses\treadings\n");
        let mut syntax = String::new();
        for (_, sentence) in project.corpus.sentences().into_iter().filter(|(s, _)| s.sub_cid == sub.sub_cid) {
            let nodes = analyze_sentence(&sentence, &project.lexicon);
            for node in &nodes {
                let (token, analysis) = (&node.token, &node.analysis);
                report.tokens_analyzed += 1;
                let segments: Vec<String> = analysis.segments.iter().map(|seg| format!("{}/{}", seg.surface, seg.tag())).collect();
                morph.push_str(&format!(
                    "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\n",
                    token.token_id,
                    token.surface,
                    token.translit(),
                    analysis.lemma,
                    analysis.pos,
                    analysis.features,
                    segments.join("+"),
                    analysis.glosses().join("/"),
                    node.readings
                ));
            }
            if layer != AnalysisLayer::Morph {
                let g = parse(nodes, &project.net)?;
                report.sentences_parsed += 1;
                if !syntax.is_empty() {
                    syntax.push('\n');
                }
                syntax.push_str(&export_graph_tsv(&g));
            }
        }
        if layer != AnalysisLayer::Syntax {
            let rel = format!("{ANALYSIS_DIR}/{}.morph.tsv", sub.sub_cid);
            let changed = write_if_changed(&project.root.join(&rel), &morph)?;
            report.file(rel, changed);
        }
        if layer != AnalysisLayer::Morph {
            let rel = format!("{ANALYSIS_DIR}/{}.syntax.tsv", sub.sub_cid);
            let changed = write_if_changed(&project.root.join(&rel), &syntax)?;
            report.file(rel, changed);
        }
    }
    Ok(report.finish(started))
}

pub fn concord(project: &Project, lemma: &str) -> Result<Vec<SentenceRef>, ProjectError> {
    let text = lemma_text(lemma)?;
    concordance(&project.corpus, &text, &project.lexicon).map_err(|source| ProjectError::Corpus { file: "corpus".into(), source })
}

/// Creates prefilled sets for every concordance hit of the unit's lemma.
/// Existing sets are left alone.
pub fn annotate_auto(project: &mut Project, lu_id: &str) -> Result<JobReport, ProjectError> {
    let started = Instant::now();
    let mut report = JobReport::new("annotate");
    let lu = project.frames.lu(lu_id).ok_or_else(|| ProjectError::UnknownLu(lu_id.to_string()))?.clone();
    let key = lookup_key(&lu.lemma);
    for hit in concord(project, &lu.lemma)? {
        let (sub, sentence) = project.sentence(&hit.sentence_id)?;
        let g = project.graph(&sentence)?;
        report.sentences_parsed += 1;
        for &t in &hit.hits {
            let aset_id = format!("{}-t{t}", sentence.sentence_id);
            let analysis = &g.nodes[t].analysis;
            if project.find_set(&aset_id).is_some() || lookup_key(analysis.lemma.as_str()) != key {
                continue;
            }
            let mut aset = new_annotation_set(&aset_id, &sub, &sentence, sentence.tokens[t].char_span, &lu.frame_name, &project.frames, analysis)
                .map_err(|source| ProjectError::Annotation { file: aset_id.clone(), source })?;
            if aset.lu_id != lu_id {
                continue;
            }
            autofill_syntax_layers(&mut aset, &g, &project.net);
            project.put_set(aset)?;
            report.sets_created += 1;
        }
    }
    Ok(report.finish(started))
}

/// Applies scripted decisions, optionally only those for one lexical unit.
/// Sets with the same id are replaced; valid ones are marked human-verified.
pub fn annotate_decisions(project: &mut Project, lu_filter: Option<&str>, path: &Path) -> Result<JobReport, ProjectError> {
    let started = Instant::now();
    let mut report = JobReport::new("annotate");
    if let Some(lu) = lu_filter {
        project.frame_of(lu)?;
    }
    let decisions = parse_decisions(&read_file(path)?)?;
    for d in &decisions {
        let (sub, sentence) = project.sentence(&d.sentence_id)?;
        let g = project.graph(&sentence)?;
        report.sentences_parsed += 1;
        let mut aset = apply_decision(d, &sub, &sentence, &g, &project.frames, &project.net)
            .map_err(|source| ProjectError::Annotation { file: format!("{}: {}", path.display(), d.aset_id()), source })?;
        let _ = aset.mark_verified(&project.frames);
        if lu_filter.is_some_and(|lu| lu != aset.lu_id) {
            continue;
        }
        let existed = project.find_set(&aset.aset_id).is_some();
        let (aset_id, lu_id) = (aset.aset_id.clone(), aset.lu_id.clone());
        let (_, violations) = project.put_set(aset)?;
        if existed {
            report.sets_updated += 1;
        } else {
            report.sets_created += 1;
        }
        for violation in violations {
            report.violations.push(SetViolation { aset_id: aset_id.clone(), lu_id: lu_id.clone(), violation });
        }
    }
    Ok(report.finish(started))
}

/// Checks every stored set.
pub fn validate_all(project: &Project) -> JobReport {
    let started = Instant::now();
    let mut report = JobReport::new("validate");
    for sets in project.annotations.values().chain(project.drafts.values()) {
        for s in sets {
            let violations = validate(s, &project.frames);
            if violations.is_empty() {
                report.sets_validated += 1;
            }
            for violation in violations {
                report.violations.push(SetViolation { aset_id: s.aset_id.clone(), lu_id: s.lu_id.clone(), violation });
            }
        }
    }
    report.finish(started)
}

/// Rule groups and rules document of one lexical unit, from its validated sets.
pub fn mine_lu(project: &Project, lu_id: &str) -> Result<(Vec<RuleGroup>, String), ProjectError> {
    project.frame_of(lu_id)?;
    let sets = project.annotations.get(lu_id).map(Vec::as_slice).unwrap_or(&[]);
    let groups = mine_rules(sets, &project.frames)?;
    let xml = export_rules(lu_id, &groups);
    Ok((groups, xml))
}

/// Rule groups per lexical unit.
pub type MinedUnits = Vec<(String, Vec<RuleGroup>)>;

/// Mines one lexical unit, or all with stored sets, into `rules/`.
pub fn mine(project: &Project, lu_id: Option<&str>) -> Result<(JobReport, MinedUnits), ProjectError> {
    let started = Instant::now();
    let mut report = JobReport::new("mine");
    let lus = match lu_id {
        Some(lu) => vec![lu.to_string()],
        None => project.lexical_units(),
    };
    let mut out = Vec::new();
    for lu in lus {
        let (groups, xml) = mine_lu(project, &lu)?;
        report.sets_validated += groups.iter().map(|g| g.support).sum::<usize>();
        let rel = format!("{RULES_DIR}/{}", lu_file_name(&lu));
        let changed = write_if_changed(&project.root.join(&rel), &xml)?;
        report.file(rel, changed);
        out.push((lu, groups));
    }
    Ok((report.finish(started), out))
}

/// Writes validated sets to `export/`, keeping only the chosen layers.
pub fn export(project: &Project, layers: Option<&[LayerKind]>, lu_id: Option<&str>) -> Result<JobReport, ProjectError> {
    let started = Instant::now();
    let mut report = JobReport::new("export");
    let lus: Vec<String> = match lu_id {
        Some(lu) => {
            project.frame_of(lu)?;
            vec![lu.to_string()]
        }
        None => project.annotations.keys().cloned().collect(),
    };
    for lu in lus {
        let sets = project.annotations.get(&lu).map(Vec::as_slice).unwrap_or(&[]);
        let doc = export_annotation(&lu, sets, layers, &project.frames).map_err(|source| ProjectError::Annotation { file: lu.clone(), source })?;
        let rel = format!("{EXPORT_DIR}/{}", lu_file_name(&lu));
        let changed = write_if_changed(&project.root.join(&rel), &doc)?;
        report.file(rel, changed);
    }
    Ok(report.finish(started))
}
