//! The `/api/v1` surface driven in-process through the router.

mod common;

use std::sync::Arc;

use axum::body::Body;
use axum::http::{header, Method, Request, StatusCode};
use axum::Router;
use http_body_util::BodyExt;
use serde_json::{json, Value};
use tower::ServiceExt;
use vispipe::service::api::router;
use vispipe::service::SessionStore;

struct Api {
    app: Router,
    _dir: tempfile::TempDir,
    sessions: std::path::PathBuf,
}

impl Api {
    fn new() -> Self {
        let dir = tempfile::tempdir().unwrap();
        let sessions = dir.path().join("sessions");
        let svc = common::fixture_service(SessionStore::open(&sessions).unwrap());
        Api { app: router(Arc::new(svc), None), _dir: dir, sessions }
    }

    async fn call(&self, method: Method, uri: &str, body: Option<Value>) -> (StatusCode, Option<String>, Value) {
        let mut req = Request::builder().method(method).uri(uri);
        let body = match body {
            Some(v) => {
                req = req.header(header::CONTENT_TYPE, "application/json");
                Body::from(v.to_string())
            }
            None => Body::empty(),
        };
        let resp = self.app.clone().oneshot(req.body(body).unwrap()).await.unwrap();
        let status = resp.status();
        let ctype = resp.headers().get(header::CONTENT_TYPE).map(|v| v.to_str().unwrap().to_string());
        let bytes = resp.into_body().collect().await.unwrap().to_bytes();
        let value = if bytes.is_empty() { Value::Null } else { serde_json::from_slice(&bytes).unwrap() };
        (status, ctype, value)
    }
}

fn slice_query() -> String {
    common::read("cases/slice/description.txt").trim().to_string()
}

#[tokio::test]
async fn full_session_lifecycle() {
    let api = Api::new();
    let (s, _, created) = api
        .call(Method::POST, "/api/v1/sessions", Some(json!({"query": slice_query(), "case_id": "slice"})))
        .await;
    assert_eq!(s, StatusCode::CREATED);
    assert_eq!(created["status"], "created");
    let id = created["id"].as_str().unwrap().to_string();
    let base = format!("/api/v1/sessions/{id}");

    let (s, _, planned) = api.call(Method::POST, &format!("{base}/plan"), None).await;
    assert_eq!(s, StatusCode::OK, "{planned}");
    assert_eq!(planned["status"], "planned");
    assert_eq!(planned["plan"]["nodes"].as_array().unwrap().len(), 4);

    let (s, _, retrieved) = api.call(Method::POST, &format!("{base}/retrieve?k=3"), None).await;
    assert_eq!(s, StatusCode::OK);
    let ids: Vec<&str> =
        retrieved["retrieval"]["candidates"].as_array().unwrap().iter().map(|c| c["entry_id"].as_str().unwrap()).collect();
    assert_eq!(ids.len(), 3);

    let (s, _, generated) = api.call(Method::POST, &format!("{base}/generate"), None).await;
    assert_eq!(s, StatusCode::OK, "{generated}");
    assert_eq!(generated["status"], "generated");
    let html = generated["artifact"]["html"].as_str().unwrap().to_string();
    assert!(html.starts_with("<!DOCTYPE html>"));
    assert!(api.sessions.join(&id).join("generated.html").is_file());
    assert!(api.sessions.join(&id).join("provenance.json").is_file());

    let corrected = common::read("corrected/slice.html");
    let (s, _, fixed) = api.call(Method::PUT, &format!("{base}/correction"), Some(json!({"html": corrected}))).await;
    assert_eq!(s, StatusCode::OK);
    assert_eq!(fixed["status"], "corrected");

    let (s, _, evaluated) = api.call(Method::POST, &format!("{base}/evaluate"), None).await;
    assert_eq!(s, StatusCode::OK, "{evaluated}");
    assert_eq!(evaluated["status"], "evaluated");
    assert_eq!(evaluated["evaluation"]["cost"]["cost"], 3);
    assert_eq!(evaluated["evaluation"]["cost"]["options"]["mode"], "full_document");
    assert_eq!(evaluated["evaluation"]["grade"]["functionality"], 0.9);

    let (_, _, listed) = api.call(Method::GET, "/api/v1/sessions", None).await;
    assert_eq!(listed.as_array().unwrap().len(), 1);
    let (s, _, _) = api.call(Method::DELETE, &base, None).await;
    assert_eq!(s, StatusCode::NO_CONTENT);
    let (s, _, _) = api.call(Method::GET, &base, None).await;
    assert_eq!(s, StatusCode::NOT_FOUND);
    assert!(!api.sessions.join(&id).exists());
}

#[tokio::test]
async fn stages_out_of_order_conflict() {
    let api = Api::new();
    let (_, _, created) = api.call(Method::POST, "/api/v1/sessions", Some(json!({"query": "anything"}))).await;
    let base = format!("/api/v1/sessions/{}", created["id"].as_str().unwrap());
    for stage in ["retrieve", "generate", "evaluate"] {
        let (s, ctype, problem) = api.call(Method::POST, &format!("{base}/{stage}"), None).await;
        assert_eq!(s, StatusCode::CONFLICT, "{stage}");
        assert_eq!(ctype.as_deref(), Some("application/problem+json"));
        assert_eq!(problem["code"], "StageOrderError");
        assert_eq!(problem["status"], 409);
    }
}

#[tokio::test]
async fn edited_plans_and_rejections() {
    let api = Api::new();
    let (_, _, created) = api.call(Method::POST, "/api/v1/sessions", Some(json!({"query": "slice with a plane"}))).await;
    let base = format!("/api/v1/sessions/{}", created["id"].as_str().unwrap());

    let mut plan: Value = serde_json::from_str(&common::read("plans/rotor.json")).unwrap();
    plan["nodes"][1]["weight"] = json!(11);
    let (s, _, problem) = api.call(Method::PUT, &format!("{base}/plan"), Some(json!({"nodes": plan["nodes"]}))).await;
    assert_eq!(s, StatusCode::UNPROCESSABLE_ENTITY);
    assert_eq!(problem["code"], "PlanValidationError");

    plan["nodes"][1]["weight"] = json!(10);
    let (s, _, planned) = api.call(Method::PUT, &format!("{base}/plan"), Some(plan)).await;
    assert_eq!(s, StatusCode::OK);
    assert_eq!(planned["plan"]["query"], "slice with a plane");

    let (_, _, r) = api.call(Method::POST, &format!("{base}/retrieve"), None).await;
    assert_eq!(r["retrieval"]["candidates"][0]["entry_id"], "image_slice");

    let (s, _, problem) = api.call(Method::PUT, &format!("{base}/rejections"), Some(json!({"ids": ["cone"]}))).await;
    assert_eq!(s, StatusCode::CONFLICT);
    assert_eq!(problem["code"], "RejectUnknownId");

    let (s, _, _) = api.call(Method::PUT, &format!("{base}/rejections"), Some(json!(["image_slice"]))).await;
    assert_eq!(s, StatusCode::OK);
    let (_, _, r) = api.call(Method::POST, &format!("{base}/retrieve?k=2"), None).await;
    let ids: Vec<&str> = r["retrieval"]["candidates"].as_array().unwrap().iter().map(|c| c["entry_id"].as_str().unwrap()).collect();
    assert_eq!(ids, ["volume_clip", "plane_cutter"]);
}

#[tokio::test]
async fn bad_input_and_unknown_resources() {
    let api = Api::new();
    let (s, _, p) = api.call(Method::POST, "/api/v1/sessions", Some(json!({"nope": 1}))).await;
    assert_eq!(s, StatusCode::BAD_REQUEST, "{p}");
    let (s, _, _) = api.call(Method::POST, "/api/v1/sessions", Some(json!({"query": "   "}))).await;
    assert_eq!(s, StatusCode::UNPROCESSABLE_ENTITY);
    let (s, _, _) = api.call(Method::POST, "/api/v1/sessions", Some(json!({"query": "q", "case_id": "missing"}))).await;
    assert_eq!(s, StatusCode::NOT_FOUND);
    let (s, _, _) = api.call(Method::GET, "/api/v1/sessions/..%2Fetc", None).await;
    assert_eq!(s, StatusCode::NOT_FOUND);
    let (s, ctype, _) = api.call(Method::GET, "/api/v1/no-such-route", None).await;
    assert_eq!(s, StatusCode::NOT_FOUND);
    assert_eq!(ctype.as_deref(), Some("application/problem+json"));
}

#[tokio::test]
async fn unrecorded_prompt_is_a_bad_gateway() {
    let api = Api::new();
    let (_, _, created) = api.call(Method::POST, "/api/v1/sessions", Some(json!({"query": "never recorded"}))).await;
    let base = format!("/api/v1/sessions/{}", created["id"].as_str().unwrap());
    let (s, _, problem) = api.call(Method::POST, &format!("{base}/plan"), None).await;
    assert_eq!(s, StatusCode::BAD_GATEWAY);
    assert_eq!(problem["code"], "LlmProtocolError");
    let (_, _, still) = api.call(Method::GET, &base, None).await;
    assert_eq!(still["status"], "created");
}

#[tokio::test]
async fn corpus_and_cases_are_browsable() {
    let api = Api::new();
    let (_, _, corpus) = api.call(Method::GET, "/api/v1/corpus", None).await;
    assert_eq!(corpus.as_array().unwrap().len(), 9);
    let (s, _, entry) = api.call(Method::GET, "/api/v1/corpus/image_slice", None).await;
    assert_eq!(s, StatusCode::OK);
    assert!(entry["modules"].as_array().unwrap().iter().any(|m| m == "vtkImageSlice"));
    let (_, _, cases) = api.call(Method::GET, "/api/v1/cases", None).await;
    assert_eq!(cases.as_array().unwrap().len(), 4);
    let (s, _, case) = api.call(Method::GET, "/api/v1/cases/streamline", None).await;
    assert_eq!(s, StatusCode::OK);
    assert!(case["description"].as_str().unwrap().contains("Velocity"));
    let (s, _, _) = api.call(Method::GET, "/api/v1/cases/nope", None).await;
    assert_eq!(s, StatusCode::NOT_FOUND);
}
