//! JSON HTTP API over an open project.
//!
//! Mutations hold the state's write lock for their whole duration, so writes
//! to an annotation file never interleave and readers see committed state.
//! Every set carries a revision; a PATCH naming an older one gets 409.

use std::collections::HashMap;
use std::net::SocketAddr;
use std::sync::{Arc, RwLock};

use axum::extract::{Path, Query, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, patch, post};
use axum::{Json, Router};
use framebench_core::annotation::{autofill_syntax_layers, new_annotation_set, validate, Anchor, AnnotationError, AnnotationSet, LayerKind, Origin, Violation};
use framebench_core::corpus::Sentence;
use framebench_core::frames::{suggest_frames, Exemplar, FrameElementDef, SuggestionSource};
use framebench_core::morph::MorphAnalysis;
use framebench_core::rules::{export_rules, RuleGroup};
use framebench_core::script::to_translit;
use framebench_core::syntax::{constituents, grammatical_function, DepArc, DependencyGraph, Incorporated};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::project::{Project, ProjectError, Store};
use crate::stages;

pub struct AppState {
    inner: RwLock<Inner>,
}

struct Inner {
    project: Project,
    revisions: HashMap<String, u64>,
}

impl AppState {
    pub fn new(project: Project) -> Arc<Self> {
        let revisions = project.annotations.values().chain(project.drafts.values()).flatten().map(|s| (s.aset_id.clone(), 1)).collect();
        Arc::new(AppState { inner: RwLock::new(Inner { project, revisions }) })
    }

    /// Snapshot of the project as last committed.
    pub fn project(&self) -> Project {
        self.inner.read().expect("state lock").project.clone()
    }
}

#[derive(Debug)]
pub struct ApiError {
    status: StatusCode,
    body: Value,
}

impl ApiError {
    fn new(status: StatusCode, message: impl Into<String>) -> Self {
        ApiError { status, body: json!({ "error": message.into() }) }
    }

    fn not_found(what: impl Into<String>) -> Self {
        ApiError::new(StatusCode::NOT_FOUND, what)
    }

    fn violations(violations: Vec<Value>) -> Self {
        ApiError { status: StatusCode::UNPROCESSABLE_ENTITY, body: json!({ "error": "validation failed", "violations": violations }) }
    }

    fn stale(current: u64, sent: u64) -> Self {
        ApiError {
            status: StatusCode::CONFLICT,
            body: json!({ "error": "stale revision", "current_revision": current, "sent_revision": sent }),
        }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(self.body)).into_response()
    }
}

impl From<ProjectError> for ApiError {
    fn from(e: ProjectError) -> Self {
        match e {
            ProjectError::UnknownLu(_) | ProjectError::UnknownSentence(_) => ApiError::not_found(e.to_string()),
            ProjectError::Annotation { source, .. } => source.into(),
            ProjectError::Rules(_) => ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, e.to_string()),
            other => ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, other.to_string()),
        }
    }
}

fn error_kind(e: &AnnotationError) -> &'static str {
    match e {
        AnnotationError::UnknownFrame(_) => "UnknownFrame",
        AnnotationError::UnknownLu(_) => "UnknownLu",
        AnnotationError::NoLexicalUnit { .. } => "NoLexicalUnit",
        AnnotationError::BadSpan { .. } => "BadSpan",
        AnnotationError::UnknownFe { .. } => "UnknownFe",
        AnnotationError::OverlapViolation { .. } => "OverlapViolation",
        AnnotationError::Unaligned { .. } => "Unaligned",
        AnnotationError::AnchorNotAllowed { .. } => "AnchorNotAllowed",
        AnnotationError::BadValue { .. } => "BadValue",
        AnnotationError::TargetFixed => "TargetFixed",
        AnnotationError::NoSuchLabel { .. } => "NoSuchLabel",
        AnnotationError::ValidationFailed { .. } => "ValidationFailed",
        AnnotationError::WrongLexicalUnit { .. } => "WrongLexicalUnit",
        AnnotationError::InconsistentSentence(_) => "InconsistentSentence",
        AnnotationError::Xml(_) => "Xml",
        AnnotationError::Format { .. } => "Format",
    }
}

impl From<AnnotationError> for ApiError {
    fn from(e: AnnotationError) -> Self {
        match e {
            AnnotationError::ValidationFailed { violations, .. } => ApiError::violations(violations.iter().map(|v| json!(v)).collect()),
            other => ApiError::violations(vec![json!({ "kind": error_kind(&other), "message": other.to_string() })]),
        }
    }
}

type ApiResult<T> = Result<T, ApiError>;

#[derive(Serialize)]
struct CorpusView {
    corpus_id: String,
    sub_cid: String,
    pattern: Option<String>,
    paragraphs: usize,
    sentences: Vec<String>,
}

async fn corpora(State(state): State<Arc<AppState>>) -> Json<Vec<CorpusView>> {
    let inner = state.inner.read().expect("state lock");
    let corpus = &inner.project.corpus;
    let sentences = corpus.sentences();
    Json(
        corpus
            .subcorpora
            .iter()
            .map(|sub| CorpusView {
                corpus_id: corpus.corpus_id.clone(),
                sub_cid: sub.sub_cid.clone(),
                pattern: sub.pattern_key.clone(),
                paragraphs: sub.paragraphs.len(),
                sentences: sentences.iter().filter(|(s, _)| s.sub_cid == sub.sub_cid).map(|(_, s)| s.sentence_id.clone()).collect(),
            })
            .collect(),
    )
}

#[derive(Serialize)]
struct TokenView {
    token_id: String,
    surface: String,
    translit: String,
    start: usize,
    end: usize,
    analysis: MorphAnalysis,
    readings: usize,
}

#[derive(Serialize)]
struct ConstituentView {
    start: usize,
    end: usize,
    pt: String,
    gf: String,
    head: usize,
}

#[derive(Serialize)]
struct ParseView {
    root: usize,
    arcs: Vec<DepArc>,
    incorporated: Vec<Incorporated>,
    constituents: Vec<ConstituentView>,
}

#[derive(Serialize)]
struct SentenceView {
    sentence_id: String,
    sub_cid: String,
    text: String,
    tokens: Vec<TokenView>,
    parse: ParseView,
}

fn sentence_view(sub: String, s: &Sentence, g: &DependencyGraph) -> SentenceView {
    let projection = constituents(g);
    SentenceView {
        sentence_id: s.sentence_id.clone(),
        sub_cid: sub,
        text: s.text.to_string(),
        tokens: g
            .nodes
            .iter()
            .map(|n| TokenView {
                token_id: n.token.token_id.clone(),
                surface: n.token.surface.to_string(),
                translit: n.token.translit().to_string(),
                start: n.token.char_span.start,
                end: n.token.char_span.end,
                analysis: n.analysis.clone(),
                readings: n.readings,
            })
            .collect(),
        parse: ParseView {
            root: g.root,
            arcs: g.arcs.clone(),
            incorporated: g.incorporated.clone(),
            constituents: projection
                .constituents
                .iter()
                .map(|c| ConstituentView {
                    start: c.char_span.start,
                    end: c.char_span.end,
                    pt: match c.prep_display() {
                        Some(p) => format!("{}({p})", c.pt),
                        None => c.pt.to_string(),
                    },
                    gf: grammatical_function(c, g).to_string(),
                    head: c.head,
                })
                .collect(),
        },
    }
}

async fn sentence(State(state): State<Arc<AppState>>, Path(id): Path<String>) -> ApiResult<Json<SentenceView>> {
    let inner = state.inner.read().expect("state lock");
    let (sub, s) = inner.project.sentence(&id)?;
    let g = inner.project.graph(&s)?;
    Ok(Json(sentence_view(sub, &s, &g)))
}

#[derive(Deserialize)]
struct FramesQuery {
    lemma: Option<String>,
}

#[derive(Serialize)]
struct FrameView {
    frame: String,
    source: Option<SuggestionSource>,
    definition: String,
    fes: Vec<FrameElementDef>,
    exemplars: Vec<Exemplar>,
}

async fn frames(State(state): State<Arc<AppState>>, Query(q): Query<FramesQuery>) -> ApiResult<Json<Vec<FrameView>>> {
    let inner = state.inner.read().expect("state lock");
    let db = &inner.project.frames;
    let view = |name: &str, source: Option<SuggestionSource>| {
        let f = db.frame(name).expect("suggested frames exist");
        FrameView { frame: f.name.clone(), source, definition: f.definition.clone(), fes: f.fe_defs.clone(), exemplars: f.exemplars.clone() }
    };
    let out = match q.lemma {
        Some(lemma) => {
            let text = stages::lemma_text(&lemma).map_err(|e| ApiError::new(StatusCode::BAD_REQUEST, e.to_string()))?;
            let bw = to_translit(&text).map_err(|e| ApiError::new(StatusCode::BAD_REQUEST, e.to_string()))?;
            suggest_frames(bw.as_str(), db, &inner.project.net).into_iter().map(|s| view(&s.frame, Some(s.source))).collect()
        }
        None => db.frames().iter().map(|f| view(&f.name, None)).collect(),
    };
    Ok(Json(out))
}

#[derive(Serialize)]
struct AsetView {
    aset: AnnotationSet,
    revision: u64,
    stored: Store,
    violations: Vec<Violation>,
}

fn aset_view(inner: &Inner, id: &str) -> ApiResult<AsetView> {
    let (stored, aset) = inner.project.find_set(id).ok_or_else(|| ApiError::not_found(format!("unknown annotation set {id:?}")))?;
    Ok(AsetView {
        aset: aset.clone(),
        revision: inner.revisions.get(id).copied().unwrap_or(1),
        stored,
        violations: validate(aset, &inner.project.frames),
    })
}

#[derive(Deserialize)]
struct AsetsQuery {
    lu: Option<String>,
}

async fn list_asets(State(state): State<Arc<AppState>>, Query(q): Query<AsetsQuery>) -> ApiResult<Json<Vec<AsetView>>> {
    let inner = state.inner.read().expect("state lock");
    let p = &inner.project;
    let ids: Vec<String> = p
        .annotations
        .iter()
        .chain(p.drafts.iter())
        .filter(|(lu, _)| q.lu.as_ref().is_none_or(|want| want == *lu))
        .flat_map(|(_, sets)| sets.iter().map(|s| s.aset_id.clone()))
        .collect();
    ids.iter().map(|id| aset_view(&inner, id)).collect::<ApiResult<Vec<_>>>().map(Json)
}

async fn get_aset(State(state): State<Arc<AppState>>, Path(id): Path<String>) -> ApiResult<Json<AsetView>> {
    let inner = state.inner.read().expect("state lock");
    aset_view(&inner, &id).map(Json)
}

#[derive(Deserialize)]
struct NewAset {
    sentence_id: String,
    /// Token index of the target.
    target: usize,
    frame: String,
}

async fn create_aset(State(state): State<Arc<AppState>>, Json(req): Json<NewAset>) -> ApiResult<(StatusCode, Json<AsetView>)> {
    let mut inner = state.inner.write().expect("state lock");
    let (sub, s) = inner.project.sentence(&req.sentence_id)?;
    let token = s.tokens.get(req.target).ok_or_else(|| ApiError::not_found(format!("sentence {} has no token {}", s.sentence_id, req.target)))?;
    let g = inner.project.graph(&s)?;
    let base = format!("{}-t{}", s.sentence_id, req.target);
    let mut id = base.clone();
    let mut n = 2;
    while inner.project.find_set(&id).is_some() {
        id = format!("{base}-{n}");
        n += 1;
    }
    let aset = new_annotation_set(&id, &sub, &s, token.char_span, &req.frame, &inner.project.frames, &g.nodes[req.target].analysis)?;
    inner.project.put_set(aset)?;
    inner.revisions.insert(id.clone(), 1);
    Ok((StatusCode::CREATED, Json(aset_view(&inner, &id)?)))
}

#[derive(Deserialize)]
struct LabelPatch {
    revision: u64,
    layer: LayerKind,
    anchor: Anchor,
    /// New value; omitted together with `remove: true`.
    #[serde(default)]
    value: Option<String>,
    #[serde(default)]
    remove: bool,
}

fn check_revision(inner: &Inner, id: &str, sent: Option<u64>) -> ApiResult<u64> {
    if inner.project.find_set(id).is_none() {
        return Err(ApiError::not_found(format!("unknown annotation set {id:?}")));
    }
    let current = inner.revisions.get(id).copied().unwrap_or(1);
    match sent {
        Some(r) if r != current => Err(ApiError::stale(current, r)),
        _ => Ok(current),
    }
}

fn commit(inner: &mut Inner, aset: AnnotationSet, current: u64) -> ApiResult<AsetView> {
    let id = aset.aset_id.clone();
    inner.project.put_set(aset)?;
    inner.revisions.insert(id.clone(), current + 1);
    aset_view(inner, &id)
}

async fn patch_labels(State(state): State<Arc<AppState>>, Path(id): Path<String>, Json(req): Json<LabelPatch>) -> ApiResult<Json<AsetView>> {
    let mut inner = state.inner.write().expect("state lock");
    let current = check_revision(&inner, &id, Some(req.revision))?;
    let mut aset = inner.project.find_set(&id).expect("checked above").1.clone();
    if req.remove {
        aset.remove_label(req.layer, req.anchor, req.value.as_deref())?;
    } else {
        let value = req.value.as_deref().unwrap_or("");
        aset.set_label(req.layer, req.anchor, value, Origin::Human, &inner.project.frames)?;
    }
    commit(&mut inner, aset, current).map(Json)
}

#[derive(Deserialize, Default)]
struct RevisionBody {
    revision: Option<u64>,
}

async fn autofill(State(state): State<Arc<AppState>>, Path(id): Path<String>, body: Option<Json<RevisionBody>>) -> ApiResult<Json<AsetView>> {
    let mut inner = state.inner.write().expect("state lock");
    let current = check_revision(&inner, &id, body.unwrap_or_default().revision)?;
    let mut aset = inner.project.find_set(&id).expect("checked above").1.clone();
    let (_, s) = inner.project.sentence(&aset.sentence_id)?;
    let g = inner.project.graph(&s)?;
    autofill_syntax_layers(&mut aset, &g, &inner.project.net);
    commit(&mut inner, aset, current).map(Json)
}

async fn validate_aset(State(state): State<Arc<AppState>>, Path(id): Path<String>, body: Option<Json<RevisionBody>>) -> ApiResult<Json<AsetView>> {
    let mut inner = state.inner.write().expect("state lock");
    let current = check_revision(&inner, &id, body.unwrap_or_default().revision)?;
    let mut aset = inner.project.find_set(&id).expect("checked above").1.clone();
    aset.mark_verified(&inner.project.frames).map_err(|v| ApiError::violations(v.iter().map(|x| json!(x)).collect()))?;
    commit(&mut inner, aset, current).map(Json)
}

#[derive(Deserialize)]
struct RulesQuery {
    format: Option<String>,
}

#[derive(Serialize)]
struct RulesView {
    lu_id: String,
    groups: Vec<RuleGroup>,
    xml: String,
}

async fn rules(State(state): State<Arc<AppState>>, Path(lu): Path<String>, Query(q): Query<RulesQuery>) -> ApiResult<Response> {
    let inner = state.inner.write().expect("state lock");
    let (_, mut mined) = stages::mine(&inner.project, Some(&lu))?;
    let (_, groups) = mined.pop().expect("one lexical unit mined");
    let xml = export_rules(&lu, &groups);
    if q.format.as_deref() == Some("json") {
        return Ok(Json(RulesView { lu_id: lu, groups, xml }).into_response());
    }
    Ok(([(header::CONTENT_TYPE, "application/xml; charset=utf-8")], xml).into_response())
}

pub fn router(state: Arc<AppState>) -> Router {
    Router::new()
        .route("/corpora", get(corpora))
        .route("/sentences/{id}", get(sentence))
        .route("/frames", get(frames))
        .route("/asets", get(list_asets).post(create_aset))
        .route("/asets/{id}", get(get_aset))
        .route("/asets/{id}/labels", patch(patch_labels))
        .route("/asets/{id}/autofill", post(autofill))
        .route("/asets/{id}/validate", post(validate_aset))
        .route("/rules/{lu_id}", get(rules))
        .with_state(state)
}

/// Serves the project until interrupted.
pub async fn serve(project: Project, addr: SocketAddr) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    axum::serve(listener, router(AppState::new(project)))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
}
