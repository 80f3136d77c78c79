#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::sync::Arc;

use vispipe::config::generation_config;
use vispipe::io::{load_cases, load_corpus};
use vispipe::llm::{BackendConfig, LlmClient};
use vispipe::planner::PlanOptions;
use vispipe::service::store::SessionStore;
use vispipe::service::{ServiceParts, SessionService};
use vispipe_core::retrieve::DEFAULT_K;
use vispipe_core::WeightMode;

pub fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

pub fn fixture(rel: &str) -> PathBuf {
    fixtures().join(rel)
}

pub fn read(rel: &str) -> String {
    std::fs::read_to_string(fixture(rel)).unwrap()
}

pub fn backend_config() -> BackendConfig {
    BackendConfig::load(&fixture("backend/fixture.json")).unwrap()
}

pub fn fixture_client() -> LlmClient {
    LlmClient::from_config(&backend_config()).unwrap()
}

/// Service over the fixture corpus and cases, replaying recorded responses.
pub fn fixture_service(store: SessionStore) -> SessionService {
    let cfg = backend_config();
    let llm = LlmClient::from_config(&cfg).unwrap();
    SessionService::new(ServiceParts {
        store,
        corpus: Arc::new(load_corpus(&fixture("corpus")).unwrap()),
        cases: Arc::new(load_cases(&fixture("cases")).unwrap()),
        planner: llm.clone(),
        generator: llm.clone(),
        grader: Some(llm),
        generation: generation_config(&cfg, None, None, true),
        default_k: DEFAULT_K,
        weight_mode: WeightMode::Raw,
        plan_options: PlanOptions::default(),
    })
}
