//! File-based project: corpus, resources, annotation files per lexical unit
//! and a checksum manifest.
//!
//! ```text
//! manifest
//! corpus/<subCID>.xml
//! resources/lexicon/*.tsv
//! resources/net/{synsets,relations}.tsv
//! resources/frames/frames.xml
//! annotations/<lu>.xml     validated sets
//! drafts/<lu>.xml          sets that do not validate yet
//! rules/<lu>.xml
//! ```

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use framebench_core::annotation::{export_annotation, import_annotation, validate, write_annotation, AnnotationError, AnnotationSet, Violation};
use framebench_core::bundled;
use framebench_core::corpus::{export_corpus, import_corpus, Corpus, CorpusError, Sentence};
use framebench_core::decisions::DecisionError;
use framebench_core::frames::{FrameDb, FrameError};
use framebench_core::lexsem::{LexNet, NetError};
use framebench_core::morph::{Lexicon, LexiconError, LexiconSources};
use framebench_core::rules::RuleError;
use framebench_core::syntax::{analyze_sentence, parse, DependencyGraph, SyntaxError};
use sha2::{Digest, Sha256};
use thiserror::Error;

pub const MANIFEST: &str = "manifest";
pub const CORPUS_DIR: &str = "corpus";
pub const LEXICON_DIR: &str = "resources/lexicon";
pub const NET_DIR: &str = "resources/net";
pub const FRAMES_FILE: &str = "resources/frames/frames.xml";
pub const ANNOTATIONS_DIR: &str = "annotations";
pub const DRAFTS_DIR: &str = "drafts";
pub const RULES_DIR: &str = "rules";
pub const ANALYSIS_DIR: &str = "analysis";
pub const EXPORT_DIR: &str = "export";
/// Annotation decisions for the desk corpus, written by `init --desk`.
pub const DESK_DECISIONS_FILE: &str = "decisions.tsv";

#[derive(Debug, Error)]
pub enum ProjectError {
    #[error("no project at {0} (run init first)")]
    MissingProject(String),
    #[error("a project already exists at {0}")]
    AlreadyInitialized(String),
    #[error("manifest mismatch for {resource}: {reason}")]
    ManifestMismatch { resource: String, reason: String },
    #[error("{path}: {message}")]
    Io { path: String, message: String },
    #[error("{file}: {source}")]
    Corpus { file: String, source: CorpusError },
    #[error(transparent)]
    Lexicon(#[from] LexiconError),
    #[error(transparent)]
    Net(#[from] NetError),
    #[error(transparent)]
    Frames(#[from] FrameError),
    #[error("{file}: {source}")]
    Annotation { file: String, source: AnnotationError },
    #[error("{file}: annotation set {aset_id} fails validation: {violations:?}")]
    InvalidAnnotation { file: String, aset_id: String, violations: Vec<Violation> },
    #[error(transparent)]
    Decisions(#[from] DecisionError),
    #[error(transparent)]
    Rules(#[from] RuleError),
    #[error(transparent)]
    Syntax(#[from] SyntaxError),
    #[error("unknown lexical unit {0:?}")]
    UnknownLu(String),
    #[error("unknown sentence {0:?}")]
    UnknownSentence(String),
    #[error("{0}")]
    Usage(String),
}

impl ProjectError {
    /// 2 when resources are missing or do not match the manifest, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            ProjectError::MissingProject(_) | ProjectError::ManifestMismatch { .. } | ProjectError::Lexicon(_) | ProjectError::Net(_) | ProjectError::Frames(_) => 2,
            _ => 1,
        }
    }
}

fn io_err(path: &Path, e: std::io::Error) -> ProjectError {
    ProjectError::Io { path: path.display().to_string(), message: e.to_string() }
}

pub fn read_file(path: &Path) -> Result<String, ProjectError> {
    fs::read_to_string(path).map_err(|e| io_err(path, e))
}

/// Writes `content` unless the file already holds exactly that. Returns
/// whether the file changed.
pub fn write_if_changed(path: &Path, content: &str) -> Result<bool, ProjectError> {
    if fs::read_to_string(path).is_ok_and(|old| old == content) {
        return Ok(false);
    }
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
    }
    fs::write(path, content).map_err(|e| io_err(path, e))?;
    Ok(true)
}

fn remove_if_exists(path: &Path) -> Result<bool, ProjectError> {
    match fs::remove_file(path) {
        Ok(()) => Ok(true),
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => Ok(false),
        Err(e) => Err(io_err(path, e)),
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    format!("{:x}", Sha256::digest(bytes))
}

/// File name for a lexical unit: bytes outside `[A-Za-z0-9._-]` become `%XX`.
pub fn lu_file_name(lu_id: &str) -> String {
    let mut out = String::new();
    for b in lu_id.bytes() {
        if b.is_ascii_alphanumeric() || matches!(b, b'.' | b'_' | b'-') {
            out.push(b as char);
        } else {
            out.push_str(&format!("%{b:02X}"));
        }
    }
    out.push_str(".xml");
    out
}

pub fn lu_from_file_name(name: &str) -> Option<String> {
    let stem = name.strip_suffix(".xml")?;
    let mut bytes = Vec::new();
    let mut it = stem.bytes();
    while let Some(b) = it.next() {
        if b == b'%' {
            let hex = [it.next()?, it.next()?];
            bytes.push(u8::from_str_radix(std::str::from_utf8(&hex).ok()?, 16).ok()?);
        } else {
            bytes.push(b);
        }
    }
    String::from_utf8(bytes).ok()
}

/// Checksums of every resource and corpus file, keyed by relative path.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Manifest {
    pub entries: BTreeMap<String, String>,
}

impl Manifest {
    pub fn parse(text: &str) -> Result<Self, ProjectError> {
        let mut entries = BTreeMap::new();
        for (i, line) in text.lines().enumerate() {
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let (sum, path) = line.split_once("  ").ok_or_else(|| ProjectError::ManifestMismatch {
                resource: MANIFEST.into(),
                reason: format!("line {} is not `sha256  path`", i + 1),
            })?;
            entries.insert(path.to_string(), sum.to_string());
        }
        Ok(Manifest { entries })
    }

    pub fn render(&self) -> String {
        self.entries.iter().map(|(path, sum)| format!("{sum}  {path}\n")).collect()
    }
}

fn tracked_files(root: &Path) -> Result<Vec<String>, ProjectError> {
    let mut out = Vec::new();
    for dir in [CORPUS_DIR, LEXICON_DIR, NET_DIR, "resources/frames"] {
        let abs = root.join(dir);
        let Ok(entries) = fs::read_dir(&abs) else { continue };
        for e in entries {
            let e = e.map_err(|e| io_err(&abs, e))?;
            if e.file_type().map_err(|err| io_err(&e.path(), err))?.is_file() {
                out.push(format!("{dir}/{}", e.file_name().to_string_lossy()));
            }
        }
    }
    out.sort();
    Ok(out)
}

#[derive(Debug, Clone)]
pub struct Project {
    pub root: PathBuf,
    pub manifest: Manifest,
    pub corpus: Corpus,
    pub lexicon: Lexicon,
    pub net: LexNet,
    pub frames: FrameDb,
    /// Validated sets per lexical unit.
    pub annotations: BTreeMap<String, Vec<AnnotationSet>>,
    /// Sets that do not validate yet, per lexical unit.
    pub drafts: BTreeMap<String, Vec<AnnotationSet>>,
}

/// Where a stored set lives.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Store {
    Annotations,
    Drafts,
}

impl Project {
    /// Creates a project with the bundled resources, optionally with the desk
    /// corpus and its annotation decisions.
    pub fn init(root: &Path, desk: bool) -> Result<Project, ProjectError> {
        if root.join(MANIFEST).exists() {
            return Err(ProjectError::AlreadyInitialized(root.display().to_string()));
        }
        for (name, text) in bundled::lexicon_sources().files() {
            write_if_changed(&root.join(LEXICON_DIR).join(name), text)?;
        }
        write_if_changed(&root.join(NET_DIR).join("synsets.tsv"), bundled::SYNSETS)?;
        write_if_changed(&root.join(NET_DIR).join("relations.tsv"), bundled::RELATIONS)?;
        write_if_changed(&root.join(FRAMES_FILE), bundled::FRAMES)?;
        for dir in [CORPUS_DIR, ANNOTATIONS_DIR, DRAFTS_DIR, RULES_DIR] {
            fs::create_dir_all(root.join(dir)).map_err(|e| io_err(&root.join(dir), e))?;
        }
        if desk {
            for (_, doc) in bundled::DESK_CORPUS {
                store_corpus_doc(root, doc)?;
            }
            write_if_changed(&root.join(DESK_DECISIONS_FILE), bundled::DESK_DECISIONS)?;
        }
        refresh_manifest(root)?;
        Project::open(root)
    }

    /// Loads a project, checking the manifest and validating annotation files.
    pub fn open(root: &Path) -> Result<Project, ProjectError> {
        let manifest_path = root.join(MANIFEST);
        if !manifest_path.exists() {
            return Err(ProjectError::MissingProject(root.display().to_string()));
        }
        let manifest = Manifest::parse(&read_file(&manifest_path)?)?;
        verify_manifest(root, &manifest)?;

        let lexicon = Lexicon::from_sources(&LexiconSources::read_dir(&root.join(LEXICON_DIR))?)?;
        let net = framebench_core::lexsem::load_net(&root.join(NET_DIR))?;
        let frames = framebench_core::frames::load_framedb(&root.join(FRAMES_FILE))?;
        let corpus = load_corpus(root)?;

        let mut project = Project {
            root: root.to_path_buf(),
            manifest,
            corpus,
            lexicon,
            net,
            frames,
            annotations: BTreeMap::new(),
            drafts: BTreeMap::new(),
        };
        project.annotations = project.load_sets(ANNOTATIONS_DIR, true)?;
        project.drafts = project.load_sets(DRAFTS_DIR, false)?;
        Ok(project)
    }

    fn load_sets(&self, dir: &str, check: bool) -> Result<BTreeMap<String, Vec<AnnotationSet>>, ProjectError> {
        let mut out = BTreeMap::new();
        let abs = self.root.join(dir);
        let Ok(entries) = fs::read_dir(&abs) else {
            return Ok(out);
        };
        let mut names: Vec<String> = entries.filter_map(|e| e.ok()).map(|e| e.file_name().to_string_lossy().into_owned()).collect();
        names.sort();
        for name in names.into_iter().filter(|n| n.ends_with(".xml")) {
            let file = format!("{dir}/{name}");
            let doc = read_file(&abs.join(&name))?;
            let parsed = import_annotation(&doc).map_err(|source| ProjectError::Annotation { file: file.clone(), source })?;
            if lu_from_file_name(&name).as_deref() != Some(parsed.lu_id.as_str()) {
                return Err(ProjectError::Annotation {
                    file,
                    source: AnnotationError::Format { path: "/lexunit".into(), message: format!("luID {:?} does not match the file name", parsed.lu_id) },
                });
            }
            if check {
                for s in &parsed.sets {
                    let violations = validate(s, &self.frames);
                    if !violations.is_empty() {
                        return Err(ProjectError::InvalidAnnotation { file, aset_id: s.aset_id.clone(), violations });
                    }
                }
            }
            out.insert(parsed.lu_id, parsed.sets);
        }
        Ok(out)
    }

    /// Adds or replaces a sub-corpus from an external document.
    pub fn import_corpus_doc(&mut self, doc: &str) -> Result<Vec<String>, ProjectError> {
        let written = store_corpus_doc(&self.root, doc)?;
        let corpus = load_corpus(&self.root)?;
        refresh_manifest(&self.root)?;
        self.manifest = Manifest::parse(&read_file(&self.root.join(MANIFEST))?)?;
        self.corpus = corpus;
        Ok(written)
    }

    pub fn sentence(&self, sentence_id: &str) -> Result<(String, Sentence), ProjectError> {
        self.corpus
            .sentences()
            .into_iter()
            .find(|(_, s)| s.sentence_id == sentence_id)
            .map(|(sub, s)| (sub.sub_cid.clone(), s))
            .ok_or_else(|| ProjectError::UnknownSentence(sentence_id.to_string()))
    }

    pub fn graph(&self, sentence: &Sentence) -> Result<DependencyGraph, ProjectError> {
        Ok(parse(analyze_sentence(sentence, &self.lexicon), &self.net)?)
    }

    pub fn frame_of(&self, lu_id: &str) -> Result<&str, ProjectError> {
        self.frames.lu(lu_id).map(|lu| lu.frame_name.as_str()).ok_or_else(|| ProjectError::UnknownLu(lu_id.to_string()))
    }

    pub fn find_set(&self, aset_id: &str) -> Option<(Store, &AnnotationSet)> {
        fn find<'a>(m: &'a BTreeMap<String, Vec<AnnotationSet>>, id: &str) -> Option<&'a AnnotationSet> {
            m.values().flatten().find(|s| s.aset_id == id)
        }
        find(&self.annotations, aset_id).map(|s| (Store::Annotations, s)).or_else(|| find(&self.drafts, aset_id).map(|s| (Store::Drafts, s)))
    }

    /// Stores a set, in annotations if it validates and in drafts otherwise,
    /// replacing any set with the same id, and rewrites the affected files.
    pub fn put_set(&mut self, aset: AnnotationSet) -> Result<(Store, Vec<Violation>), ProjectError> {
        let violations = validate(&aset, &self.frames);
        let mut touched = vec![aset.lu_id.clone()];
        for m in [&mut self.annotations, &mut self.drafts] {
            for (lu, sets) in m.iter_mut() {
                let before = sets.len();
                sets.retain(|s| s.aset_id != aset.aset_id);
                if sets.len() != before && !touched.contains(lu) {
                    touched.push(lu.clone());
                }
            }
        }
        let store = if violations.is_empty() { Store::Annotations } else { Store::Drafts };
        let target = match store {
            Store::Annotations => &mut self.annotations,
            Store::Drafts => &mut self.drafts,
        };
        target.entry(aset.lu_id.clone()).or_default().push(aset);
        for lu in touched {
            self.save_lu(&lu)?;
        }
        Ok((store, violations))
    }

    /// Rewrites the annotation and draft files of one lexical unit.
    pub fn save_lu(&mut self, lu_id: &str) -> Result<(), ProjectError> {
        let frame = self.frame_of(lu_id)?.to_string();
        let name = lu_file_name(lu_id);
        for (dir, map, check) in [(ANNOTATIONS_DIR, &mut self.annotations, true), (DRAFTS_DIR, &mut self.drafts, false)] {
            let path = self.root.join(dir).join(&name);
            let file = format!("{dir}/{name}");
            match map.get(lu_id) {
                Some(sets) if !sets.is_empty() => {
                    let doc = if check {
                        export_annotation(lu_id, sets, None, &self.frames)
                    } else {
                        write_annotation(lu_id, &frame, sets, None)
                    }
                    .map_err(|source| ProjectError::Annotation { file, source })?;
                    write_if_changed(&path, &doc)?;
                }
                _ => {
                    map.remove(lu_id);
                    remove_if_exists(&path)?;
                }
            }
        }
        Ok(())
    }

    /// Writes every annotation file and the manifest.
    pub fn save(&mut self) -> Result<(), ProjectError> {
        let lus: Vec<String> = self.annotations.keys().chain(self.drafts.keys()).cloned().collect();
        for lu in lus {
            self.save_lu(&lu)?;
        }
        write_if_changed(&self.root.join(MANIFEST), &self.manifest.render())?;
        Ok(())
    }

    pub fn lexical_units(&self) -> Vec<String> {
        let mut out: Vec<String> = self.annotations.keys().chain(self.drafts.keys()).cloned().collect();
        out.sort();
        out.dedup();
        out
    }
}

fn store_corpus_doc(root: &Path, doc: &str) -> Result<Vec<String>, ProjectError> {
    let corpus = import_corpus(doc).map_err(|source| ProjectError::Corpus { file: "<input>".into(), source })?;
    let existing = load_corpus(root)?;
    if !existing.subcorpora.is_empty() && existing.corpus_id != corpus.corpus_id {
        return Err(ProjectError::Corpus {
            file: "<input>".into(),
            source: CorpusError::CorpusMismatch { expected: existing.corpus_id, found: corpus.corpus_id },
        });
    }
    let mut written = Vec::new();
    for (sub, text) in export_corpus(&corpus) {
        let rel = format!("{CORPUS_DIR}/{sub}.xml");
        write_if_changed(&root.join(&rel), &text)?;
        written.push(rel);
    }
    Ok(written)
}

fn load_corpus(root: &Path) -> Result<Corpus, ProjectError> {
    let dir = root.join(CORPUS_DIR);
    let mut names: Vec<String> = match fs::read_dir(&dir) {
        Ok(entries) => entries.filter_map(|e| e.ok()).map(|e| e.file_name().to_string_lossy().into_owned()).filter(|n| n.ends_with(".xml")).collect(),
        Err(_) => Vec::new(),
    };
    names.sort();
    let mut corpus: Option<Corpus> = None;
    for name in names {
        let file = format!("{CORPUS_DIR}/{name}");
        let doc = read_file(&dir.join(&name))?;
        let part = import_corpus(&doc).map_err(|source| ProjectError::Corpus { file: file.clone(), source })?;
        match corpus.as_mut() {
            None => corpus = Some(part),
            Some(c) => c.absorb(part).map_err(|source| ProjectError::Corpus { file, source })?,
        }
    }
    Ok(corpus.unwrap_or_else(|| Corpus::new("")))
}

fn checksum_of(root: &Path, rel: &str) -> Result<String, ProjectError> {
    let path = root.join(rel);
    let bytes = fs::read(&path).map_err(|e| io_err(&path, e))?;
    Ok(sha256_hex(&bytes))
}

/// Recomputes the manifest from the tracked files on disk.
pub fn refresh_manifest(root: &Path) -> Result<Manifest, ProjectError> {
    let mut m = Manifest::default();
    for rel in tracked_files(root)? {
        let sum = checksum_of(root, &rel)?;
        m.entries.insert(rel, sum);
    }
    write_if_changed(&root.join(MANIFEST), &m.render())?;
    Ok(m)
}

fn verify_manifest(root: &Path, m: &Manifest) -> Result<(), ProjectError> {
    for (rel, sum) in &m.entries {
        let path = root.join(rel);
        if !path.exists() {
            return Err(ProjectError::ManifestMismatch { resource: rel.clone(), reason: "file is missing".into() });
        }
        if &checksum_of(root, rel)? != sum {
            return Err(ProjectError::ManifestMismatch { resource: rel.clone(), reason: "checksum differs".into() });
        }
    }
    for rel in tracked_files(root)? {
        if !m.entries.contains_key(&rel) {
            return Err(ProjectError::ManifestMismatch { resource: rel, reason: "file is not listed in the manifest".into() });
        }
    }
    for required in LexiconSources::FILES.iter().map(|f| format!("{LEXICON_DIR}/{f}")).chain([
        format!("{NET_DIR}/synsets.tsv"),
        format!("{NET_DIR}/relations.tsv"),
        FRAMES_FILE.to_string(),
    ]) {
        if !m.entries.contains_key(&required) {
            return Err(ProjectError::ManifestMismatch { resource: required, reason: "required resource is missing".into() });
        }
    }
    Ok(())
}
