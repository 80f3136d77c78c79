//! HTTP routes under `/api/v1`.

use std::collections::BTreeSet;
use std::path::PathBuf;
use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::{Path, Query, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::{Deserialize, Serialize};
use tower_http::services::ServeDir;
use vispipe_core::{Category, CorpusEntry, PipelinePlan, Session};

use super::{CreateSession, EvaluateRequest, SessionService};
use crate::error::{Error, Kind};

/// Problem document returned for every failed request.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Problem {
    #[serde(rename = "type")]
    pub kind: String,
    pub title: String,
    pub status: u16,
    pub code: String,
    pub detail: String,
}

pub struct ApiError(Error);

impl<E: Into<Error>> From<E> for ApiError {
    fn from(e: E) -> Self {
        ApiError(e.into())
    }
}

fn status_of(e: &Error) -> StatusCode {
    match (e, e.kind()) {
        (Error::Invalid(_), _) => StatusCode::BAD_REQUEST,
        (_, Kind::StageOrder) => StatusCode::CONFLICT,
        (_, Kind::NotFound) => StatusCode::NOT_FOUND,
        (_, Kind::Transport) => StatusCode::BAD_GATEWAY,
        (_, Kind::Storage) => StatusCode::INTERNAL_SERVER_ERROR,
        (_, Kind::Domain) => StatusCode::UNPROCESSABLE_ENTITY,
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let status = status_of(&self.0);
        if status.is_server_error() {
            tracing::error!(error = %self.0, "request failed");
        }
        let code = self.0.code();
        let problem = Problem {
            kind: format!("urn:vispipe:error:{code}"),
            title: status.canonical_reason().unwrap_or("Error").to_string(),
            status: status.as_u16(),
            code: code.to_string(),
            detail: self.0.to_string(),
        };
        let mut resp = (status, Json(problem)).into_response();
        resp.headers_mut().insert(
            axum::http::header::CONTENT_TYPE,
            axum::http::HeaderValue::from_static("application/problem+json"),
        );
        resp
    }
}

type ApiResult<T> = Result<Json<T>, ApiError>;
type Svc = State<Arc<SessionService>>;

fn parse_body<T: serde::de::DeserializeOwned>(body: &Bytes) -> Result<T, ApiError> {
    serde_json::from_slice(body).map_err(|e| ApiError(Error::Invalid(format!("request body: {e}"))))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EntrySummary {
    pub id: String,
    pub title: String,
    pub category: Category,
    pub modules: Vec<String>,
    pub summary: String,
}

const SUMMARY_CHARS: usize = 240;

impl From<&CorpusEntry> for EntrySummary {
    fn from(e: &CorpusEntry) -> Self {
        let text = e.description.trim();
        let mut summary: String = text.chars().take(SUMMARY_CHARS).collect();
        if summary.len() < text.len() {
            summary.push('…');
        }
        EntrySummary {
            id: e.id.clone(),
            title: e.title.clone(),
            category: e.category,
            modules: e.modules.clone(),
            summary,
        }
    }
}

#[derive(Debug, Deserialize)]
struct RetrieveParams {
    k: Option<usize>,
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum Rejections {
    Wrapped { ids: BTreeSet<String> },
    Bare(BTreeSet<String>),
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum Correction {
    Wrapped { html: String },
    Bare(String),
}

async fn create(State(svc): Svc, body: Bytes) -> Result<(StatusCode, Json<Session>), ApiError> {
    let req: CreateSession = parse_body(&body)?;
    Ok((StatusCode::CREATED, Json(svc.create_session(req).await?)))
}

async fn list(State(svc): Svc) -> ApiResult<Vec<Session>> {
    Ok(Json(svc.list()?))
}

async fn fetch(State(svc): Svc, Path(id): Path<String>) -> ApiResult<Session> {
    Ok(Json(svc.get(&id)?))
}

async fn remove(State(svc): Svc, Path(id): Path<String>) -> Result<StatusCode, ApiError> {
    svc.delete(&id).await?;
    Ok(StatusCode::NO_CONTENT)
}

async fn run_plan(State(svc): Svc, Path(id): Path<String>) -> ApiResult<Session> {
    Ok(Json(svc.run_plan(&id).await?))
}

async fn put_plan(State(svc): Svc, Path(id): Path<String>, body: Bytes) -> ApiResult<Session> {
    let plan: PipelinePlan = match serde_json::from_slice(&body) {
        Ok(p) => p,
        // the query is optional in edited plans; the session's query wins anyway
        Err(_) => {
            #[derive(Deserialize)]
            struct Nodes {
                nodes: Vec<vispipe_core::PipelineNode>,
            }
            let n: Nodes = parse_body(&body)?;
            PipelinePlan { query: String::new(), nodes: n.nodes }
        }
    };
    Ok(Json(svc.submit_plan(&id, plan).await?))
}

async fn run_retrieve(State(svc): Svc, Path(id): Path<String>, Query(q): Query<RetrieveParams>) -> ApiResult<Session> {
    Ok(Json(svc.run_retrieve(&id, q.k).await?))
}

async fn put_rejections(State(svc): Svc, Path(id): Path<String>, body: Bytes) -> ApiResult<Session> {
    let ids = match parse_body::<Rejections>(&body)? {
        Rejections::Wrapped { ids } | Rejections::Bare(ids) => ids,
    };
    Ok(Json(svc.set_rejections(&id, ids).await?))
}

async fn run_generate(State(svc): Svc, Path(id): Path<String>) -> ApiResult<Session> {
    Ok(Json(svc.run_generate(&id).await?))
}

async fn put_correction(State(svc): Svc, Path(id): Path<String>, body: Bytes) -> ApiResult<Session> {
    let html = match parse_body::<Correction>(&body)? {
        Correction::Wrapped { html } | Correction::Bare(html) => html,
    };
    Ok(Json(svc.submit_correction(&id, html).await?))
}

async fn run_evaluate(State(svc): Svc, Path(id): Path<String>, body: Bytes) -> ApiResult<Session> {
    let req = if body.iter().all(u8::is_ascii_whitespace) {
        EvaluateRequest::default()
    } else {
        parse_body(&body)?
    };
    Ok(Json(svc.run_evaluate(&id, req).await?))
}

async fn corpus_list(State(svc): Svc) -> Json<Vec<EntrySummary>> {
    Json(svc.corpus().entries().iter().map(EntrySummary::from).collect())
}

async fn corpus_entry(State(svc): Svc, Path(id): Path<String>) -> ApiResult<CorpusEntry> {
    svc.corpus()
        .get(&id)
        .cloned()
        .map(Json)
        .ok_or_else(|| ApiError(Error::NotFound(format!("corpus entry `{id}`"))))
}

async fn cases(State(svc): Svc) -> Json<Vec<vispipe_core::GroundTruthCase>> {
    Json(svc.cases().to_vec())
}

async fn case(State(svc): Svc, Path(id): Path<String>) -> ApiResult<vispipe_core::GroundTruthCase> {
    svc.cases()
        .iter()
        .find(|c| c.id == id)
        .cloned()
        .map(Json)
        .ok_or_else(|| ApiError(Error::NotFound(format!("case `{id}`"))))
}

async fn api_fallback() -> ApiError {
    ApiError(Error::NotFound("endpoint".into()))
}

pub fn router(svc: Arc<SessionService>, static_dir: Option<PathBuf>) -> Router {
    let api = Router::new()
        .route("/sessions", post(create).get(list))
        .route("/sessions/{id}", get(fetch).delete(remove))
        .route("/sessions/{id}/plan", post(run_plan).put(put_plan))
        .route("/sessions/{id}/retrieve", post(run_retrieve))
        .route("/sessions/{id}/rejections", axum::routing::put(put_rejections))
        .route("/sessions/{id}/generate", post(run_generate))
        .route("/sessions/{id}/correction", axum::routing::put(put_correction))
        .route("/sessions/{id}/evaluate", post(run_evaluate))
        .route("/corpus", get(corpus_list))
        .route("/corpus/{id}", get(corpus_entry))
        .route("/cases", get(cases))
        .route("/cases/{id}", get(case))
        .fallback(api_fallback)
        .with_state(svc);
    let app = Router::new().nest("/api/v1", api);
    match static_dir {
        Some(dir) => app.fallback_service(ServeDir::new(dir)),
        None => app,
    }
}
