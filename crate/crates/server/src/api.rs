//! Routes and handlers. All bodies are JSON; errors use [`ApiError`].

use std::collections::HashMap;
use std::sync::{Arc, RwLock, RwLockReadGuard};

use axum::body::Bytes;
use axum::extract::rejection::{PathRejection, QueryRejection};
use axum::extract::{FromRequest, Path, Query, Request, State};
use axum::http::{HeaderMap, StatusCode};
use axum::response::IntoResponse;
use axum::routing::{get, post};
use axum::{Json, Router};
use chrono::{DateTime, Utc};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use semaps_core::geo::Viewport;
use semaps_core::kb::{ConceptId, KnowledgeGraph, Language, MatchKind, Polarity};
use semaps_core::lod::LodService;
use semaps_core::ontology::{SourceType, TopClass, Verdict};
use semaps_core::platform::{Command, Outcome, Platform};
use semaps_core::rdf::Iri;
use semaps_core::sparql::{self, results};

use crate::error::ApiError;

/// Header naming the acting account.
pub const ACCOUNT_HEADER: &str = "x-account";

#[derive(Clone)]
pub struct AppState {
    pub platform: Arc<RwLock<Platform>>,
    pub kb: Arc<KnowledgeGraph>,
    pub lod: LodService,
    pub default_depth: u8,
}

impl AppState {
    fn read(&self) -> RwLockReadGuard<'_, Platform> {
        self.platform.read().unwrap_or_else(|p| p.into_inner())
    }

    /// Runs a command on a blocking thread under the write lock.
    async fn execute(&self, command: Command) -> Result<Outcome, ApiError> {
        let platform = self.platform.clone();
        tokio::task::spawn_blocking(move || {
            let mut guard = platform.write().unwrap_or_else(|p| p.into_inner());
            guard.execute(command)
        })
        .await
        .map_err(|e| ApiError::internal(e.to_string()))?
        .map_err(ApiError::from)
    }
}

pub fn router(state: AppState) -> Router {
    Router::new()
        .route("/health", get(health))
        .route("/api/characterize", post(characterize))
        .route("/api/accounts", post(create_account))
        .route("/api/accounts/{id}", get(get_account))
        .route("/api/users/{id}", get(get_user))
        .route("/api/users/{id}/friends", post(add_friend))
        .route("/api/maps", post(create_map))
        .route("/api/maps/{id}", get(get_map))
        .route("/api/maps/{id}/concepts", post(create_concept).get(list_concepts))
        .route("/api/maps/{id}/markers", post(create_marker).get(list_markers))
        .route("/api/markers/{id}", get(get_marker))
        .route("/api/markers/{id}/votes", post(vote))
        .route("/api/kb/concepts/{id}", get(kb_concept))
        .route("/api/kb/concepts/{id}/relations", get(kb_relations))
        .route("/api/lod/search", get(lod_search))
        .route("/sparql", get(sparql_endpoint))
        .fallback(|| async { ApiError::not_found("no such route") })
        .with_state(state)
}

/// A JSON body whose rejections are reported as validation errors.
pub struct Body<T>(pub T);

impl<S: Send + Sync, T: DeserializeOwned> FromRequest<S> for Body<T> {
    type Rejection = ApiError;

    async fn from_request(req: Request, state: &S) -> Result<Self, Self::Rejection> {
        let bytes = Bytes::from_request(req, state)
            .await
            .map_err(|e| ApiError::validation("body", e.body_text()))?;
        serde_json::from_slice(&bytes)
            .map(Body)
            .map_err(|e| ApiError::validation("body", e.to_string()))
    }
}

type IdPath = Result<Path<u64>, PathRejection>;
type Params = Result<Query<HashMap<String, String>>, QueryRejection>;

fn id(path: IdPath) -> Result<u64, ApiError> {
    path.map(|Path(id)| id).map_err(|e| ApiError::validation("id", e.body_text()))
}

fn params(query: Params) -> Result<HashMap<String, String>, ApiError> {
    query.map(|Query(q)| q).map_err(|e| ApiError::validation("query", e.body_text()))
}

fn acting_account(headers: &HeaderMap) -> Result<u64, ApiError> {
    let value = headers
        .get(ACCOUNT_HEADER)
        .ok_or_else(|| ApiError::validation("X-Account", "the X-Account header is required"))?;
    value
        .to_str()
        .ok()
        .and_then(|v| v.trim().parse().ok())
        .ok_or_else(|| ApiError::validation("X-Account", "X-Account must be an account id"))
}

fn bbox(params: &HashMap<String, String>) -> Result<Option<Viewport>, ApiError> {
    params.get("bbox").map(|b| b.parse::<Viewport>().map_err(ApiError::from)).transpose()
}

fn created<T: Serialize>(body: T) -> impl IntoResponse {
    (StatusCode::CREATED, Json(body))
}

fn unexpected(outcome: Outcome) -> ApiError {
    ApiError::internal(format!("unexpected command outcome {outcome:?}"))
}

async fn health(State(state): State<AppState>) -> Json<Value> {
    Json(json!({ "status": "ok", "seq": state.read().seq() }))
}

#[derive(Deserialize)]
struct CharacterizeRequest {
    expression: String,
    language: Option<String>,
}

#[derive(Serialize)]
struct CandidateView {
    concept_id: ConceptId,
    lemma: String,
    score: f64,
    match_kind: MatchKind,
    external_links: Vec<Iri>,
}

async fn characterize(
    State(state): State<AppState>,
    Body(req): Body<CharacterizeRequest>,
) -> Result<Json<Value>, ApiError> {
    let (language, warning) = match req.language.as_deref() {
        None => (Language::En, None),
        Some(tag) => match tag.parse::<Language>() {
            Ok(l) => (l, None),
            Err(e) => (Language::En, Some(format!("{e}; using \"en\""))),
        },
    };
    let candidates: Vec<CandidateView> = state
        .kb
        .characterize(&req.expression, language)?
        .into_iter()
        .map(|c| {
            let concept = state.kb.concept(c.concept_id).expect("candidates come from the graph");
            CandidateView {
                concept_id: c.concept_id,
                lemma: concept.lemma.clone(),
                score: c.score,
                match_kind: c.match_kind,
                external_links: concept.external_links.clone(),
            }
        })
        .collect();
    let mut body = json!({ "language": language, "candidates": candidates });
    if let Some(w) = warning {
        body["warning"] = json!(w);
    }
    Ok(Json(body))
}

#[derive(Deserialize)]
struct AccountRequest {
    login: String,
    #[serde(default)]
    display_name: String,
}

async fn create_account(
    State(state): State<AppState>,
    Body(req): Body<AccountRequest>,
) -> Result<impl IntoResponse, ApiError> {
    match state
        .execute(Command::CreateAccount {
            login: req.login,
            display_name: req.display_name,
        })
        .await?
    {
        Outcome::Account(a) => Ok(created(a)),
        other => Err(unexpected(other)),
    }
}

async fn get_account(State(state): State<AppState>, path: IdPath) -> Result<impl IntoResponse, ApiError> {
    let id = id(path)?;
    Ok(Json(state.read().ontology().account(id)?.clone()))
}

async fn get_user(State(state): State<AppState>, path: IdPath) -> Result<impl IntoResponse, ApiError> {
    let id = id(path)?;
    Ok(Json(state.read().ontology().user(id)?.clone()))
}

#[derive(Deserialize)]
struct FriendRequest {
    friend: u64,
}

async fn add_friend(
    State(state): State<AppState>,
    path: IdPath,
    Body(req): Body<FriendRequest>,
) -> Result<impl IntoResponse, ApiError> {
    let a = id(path)?;
    state.execute(Command::AddFriend { a, b: req.friend }).await?;
    Ok(Json(state.read().ontology().user(a)?.clone()))
}

#[derive(Deserialize)]
struct MapRequest {
    title: String,
    owner: u64,
    viewport: Option<Viewport>,
}

async fn create_map(State(state): State<AppState>, Body(req): Body<MapRequest>) -> Result<impl IntoResponse, ApiError> {
    match state
        .execute(Command::CreateMap {
            title: req.title,
            owner: req.owner,
            viewport: req.viewport,
        })
        .await?
    {
        Outcome::Map(m) => Ok(created(m)),
        other => Err(unexpected(other)),
    }
}

async fn get_map(State(state): State<AppState>, path: IdPath) -> Result<impl IntoResponse, ApiError> {
    let id = id(path)?;
    Ok(Json(state.read().ontology().map(id)?.clone()))
}

#[derive(Deserialize)]
struct ConceptRequest {
    label: String,
    top_class: String,
    kb_concept_id: ConceptId,
}

async fn create_concept(
    State(state): State<AppState>,
    path: IdPath,
    Body(req): Body<ConceptRequest>,
) -> Result<impl IntoResponse, ApiError> {
    let map = id(path)?;
    let top_class: TopClass = req.top_class.parse().map_err(|e: String| ApiError::validation("top_class", e))?;
    let concept = state
        .kb
        .concept(req.kb_concept_id)
        .ok_or_else(|| ApiError::not_found(format!("unknown KB concept {}", req.kb_concept_id)))?;
    match state
        .execute(Command::CreateConcept {
            map,
            label: req.label,
            top_class,
            kb_concept: req.kb_concept_id,
            external_links: concept.external_links.clone(),
        })
        .await?
    {
        Outcome::Concept(c) => Ok(created(c)),
        other => Err(unexpected(other)),
    }
}

async fn list_concepts(State(state): State<AppState>, path: IdPath) -> Result<impl IntoResponse, ApiError> {
    let map = id(path)?;
    let platform = state.read();
    let ontology = platform.ontology();
    let classes: Vec<_> = ontology
        .map(map)?
        .classes
        .iter()
        .map(|&c| ontology.class(c).cloned())
        .collect::<Result<_, _>>()?;
    Ok(Json(classes))
}

#[derive(Deserialize)]
struct MarkerRequest {
    class_id: u64,
    lat: f64,
    lon: f64,
    #[serde(default)]
    description: String,
    source_type: SourceType,
    created: Option<DateTime<Utc>>,
}

async fn create_marker(
    State(state): State<AppState>,
    headers: HeaderMap,
    path: IdPath,
    Body(req): Body<MarkerRequest>,
) -> Result<impl IntoResponse, ApiError> {
    let map = id(path)?;
    let creator = acting_account(&headers)?;
    match state
        .execute(Command::CreateMarker {
            map,
            class: req.class_id,
            creator,
            lat: req.lat,
            lon: req.lon,
            description: req.description,
            source_type: req.source_type,
            created: req.created.unwrap_or_else(Utc::now),
        })
        .await?
    {
        Outcome::Marker(m) => Ok(created(m)),
        other => Err(unexpected(other)),
    }
}

async fn list_markers(
    State(state): State<AppState>,
    path: IdPath,
    query: Params,
) -> Result<impl IntoResponse, ApiError> {
    let map = id(path)?;
    let viewport = bbox(&params(query)?)?.unwrap_or(Viewport::WORLD);
    let platform = state.read();
    let markers: Vec<_> = platform.ontology().markers_in(map, &viewport)?.into_iter().cloned().collect();
    Ok(Json(markers))
}

async fn get_marker(State(state): State<AppState>, path: IdPath) -> Result<impl IntoResponse, ApiError> {
    let id = id(path)?;
    Ok(Json(state.read().ontology().marker(id)?.clone()))
}

#[derive(Deserialize)]
struct VoteRequest {
    verdict: Verdict,
}

async fn vote(
    State(state): State<AppState>,
    headers: HeaderMap,
    path: IdPath,
    Body(req): Body<VoteRequest>,
) -> Result<impl IntoResponse, ApiError> {
    let marker = id(path)?;
    let account = acting_account(&headers)?;
    match state
        .execute(Command::Vote {
            marker,
            account,
            verdict: req.verdict,
        })
        .await?
    {
        Outcome::Vote(v) => Ok(Json(v)),
        other => Err(unexpected(other)),
    }
}

async fn kb_concept(State(state): State<AppState>, path: IdPath) -> Result<impl IntoResponse, ApiError> {
    let id = ConceptId(id(path)?);
    let concept = state
        .kb
        .concept(id)
        .ok_or(semaps_core::kb::KbError::UnknownConcept(id))?;
    Ok(Json(concept.clone()))
}

#[derive(Serialize)]
struct RelationView {
    name: String,
    target: ConceptId,
    target_lemma: String,
    polarity: Polarity,
}

async fn kb_relations(
    State(state): State<AppState>,
    path: IdPath,
    query: Params,
) -> Result<impl IntoResponse, ApiError> {
    let id = ConceptId(id(path)?);
    let q = params(query)?;
    let polarity = q
        .get("polarity")
        .map(|p| p.parse::<Polarity>().map_err(|e| ApiError::validation("polarity", e)))
        .transpose()?;
    let relations: Vec<RelationView> = state
        .kb
        .relations_of(id, q.get("name").map(String::as_str), polarity)?
        .into_iter()
        .map(|r| RelationView {
            name: r.name.clone(),
            target: r.target,
            target_lemma: state.kb.concept(r.target).map(|c| c.lemma.clone()).unwrap_or_default(),
            polarity: r.polarity,
        })
        .collect();
    Ok(Json(relations))
}

async fn lod_search(State(state): State<AppState>, query: Params) -> Result<impl IntoResponse, ApiError> {
    let q = params(query)?;
    let concept = q
        .get("concept")
        .ok_or_else(|| ApiError::validation("concept", "the concept parameter is required"))?
        .trim()
        .parse::<u64>()
        .map(ConceptId)
        .map_err(|e| ApiError::validation("concept", e.to_string()))?;
    let depth = match q.get("depth") {
        Some(d) => d.trim().parse::<u8>().map_err(|e| ApiError::validation("depth", e.to_string()))?,
        None => state.default_depth,
    };
    let viewport = bbox(&q)?;
    let (kb, lod) = (state.kb.clone(), state.lod.clone());
    let result = tokio::task::spawn_blocking(move || lod.search(&kb, concept, viewport, depth))
        .await
        .map_err(|e| ApiError::internal(e.to_string()))??;
    Ok(Json(result))
}

async fn sparql_endpoint(State(state): State<AppState>, query: Params) -> Result<impl IntoResponse, ApiError> {
    let q = params(query)?;
    let text = q
        .get("query")
        .ok_or_else(|| ApiError::validation("query", "the query parameter is required"))?;
    let rows = sparql::query(state.read().store(), text)?;
    Ok((
        [(axum::http::header::CONTENT_TYPE, "application/sparql-results+json")],
        Json(results::to_json(&rows)),
    ))
}
