//! Session operations behind the HTTP API.

pub mod api;
pub mod store;

use std::collections::{BTreeSet, HashMap};
use std::sync::{Arc, Mutex};

use serde::{Deserialize, Serialize};
use tokio::sync::OwnedMutexGuard;
use vispipe_core::diff::{correction_cost_with, DiffOptions, LineMode};
use vispipe_core::plan::check_plan;
use vispipe_core::retrieve::DEFAULT_K;
use vispipe_core::session::Evaluation;
use vispipe_core::{
    Corpus, ErrorAnnotation, GenerationConfig, GradeReport, GroundTruthCase, PipelinePlan, Session, WeightMode,
};

use crate::error::{Error, Result};
use crate::evaluator::grade;
use crate::generator::{evidence, generate_for_plan, now, save_artifact, ARTIFACT_FILE};
use crate::llm::LlmClient;
use crate::planner::{plan, PlanOptions};
use crate::retriever::timed_retrieve;

pub use store::{CrashHook, CrashPoint, SessionStore};

/// Everything a service instance needs. Corpus and cases are fixed for the
/// life of the process.
pub struct ServiceParts {
    pub store: SessionStore,
    pub corpus: Arc<Corpus>,
    pub cases: Arc<Vec<GroundTruthCase>>,
    pub planner: LlmClient,
    pub generator: LlmClient,
    pub grader: Option<LlmClient>,
    pub generation: GenerationConfig,
    pub default_k: usize,
    pub weight_mode: WeightMode,
    pub plan_options: PlanOptions,
}

impl ServiceParts {
    pub fn new(store: SessionStore, corpus: Corpus, llm: LlmClient) -> Self {
        ServiceParts {
            store,
            corpus: Arc::new(corpus),
            cases: Arc::new(Vec::new()),
            planner: llm.clone(),
            generator: llm,
            grader: None,
            generation: GenerationConfig::default(),
            default_k: DEFAULT_K,
            weight_mode: WeightMode::Raw,
            plan_options: PlanOptions::default(),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
pub struct CreateSession {
    pub query: String,
    #[serde(default)]
    pub case_id: Option<String>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(default)]
pub struct EvaluateRequest {
    pub script_only: bool,
    pub trim_trailing_whitespace: bool,
    pub human: Option<GradeReport>,
    pub annotations: Vec<ErrorAnnotation>,
}

#[derive(Debug, Clone, Serialize)]
pub struct RetrieveTiming {
    pub elapsed_ms: f64,
}

pub struct SessionService {
    parts: ServiceParts,
    locks: Mutex<HashMap<String, Arc<tokio::sync::Mutex<()>>>>,
}

impl SessionService {
    pub fn new(parts: ServiceParts) -> Self {
        SessionService { parts, locks: Mutex::new(HashMap::new()) }
    }

    pub fn corpus(&self) -> &Corpus {
        &self.parts.corpus
    }

    pub fn cases(&self) -> &[GroundTruthCase] {
        &self.parts.cases
    }

    pub fn store(&self) -> &SessionStore {
        &self.parts.store
    }

    async fn lock(&self, id: &str) -> OwnedMutexGuard<()> {
        let m = self
            .locks
            .lock()
            .expect("session lock table poisoned")
            .entry(id.to_string())
            .or_default()
            .clone();
        m.lock_owned().await
    }

    /// Loads a session under its lock, applies `f`, persists, returns the result.
    async fn update<F>(&self, id: &str, f: F) -> Result<Session>
    where
        F: AsyncFnOnce(&mut Session) -> Result<()>,
    {
        let _guard = self.lock(id).await;
        let mut session = self.parts.store.load(id)?;
        f(&mut session).await?;
        self.parts.store.save(&session)?;
        Ok(session)
    }

    pub async fn create_session(&self, req: CreateSession) -> Result<Session> {
        if let Some(case) = &req.case_id {
            if !self.parts.cases.iter().any(|c| &c.id == case) {
                return Err(Error::NotFound(format!("case `{case}`")));
            }
        }
        let id = uuid::Uuid::new_v4().simple().to_string();
        let mut session = Session::new(id, req.query, &now())?;
        session.case_id = req.case_id;
        let _guard = self.lock(&session.id).await;
        self.parts.store.save(&session)?;
        Ok(session)
    }

    pub fn get(&self, id: &str) -> Result<Session> {
        self.parts.store.load(id)
    }

    pub fn list(&self) -> Result<Vec<Session>> {
        self.parts.store.list()
    }

    pub async fn delete(&self, id: &str) -> Result<()> {
        let _guard = self.lock(id).await;
        self.parts.store.delete(id)?;
        self.locks.lock().expect("session lock table poisoned").remove(id);
        Ok(())
    }

    pub async fn run_plan(&self, id: &str) -> Result<Session> {
        self.update(id, async |s: &mut Session| {
            let p = plan(&s.query, &self.parts.planner, self.parts.plan_options).await?;
            Ok(s.set_plan(p, &now())?)
        })
        .await
    }

    /// Installs a human-edited plan after validation.
    pub async fn submit_plan(&self, id: &str, mut edited: PipelinePlan) -> Result<Session> {
        self.update(id, async |s: &mut Session| {
            edited.query = s.query.clone();
            let checked = check_plan(edited)?;
            Ok(s.set_plan(checked, &now())?)
        })
        .await
    }

    pub async fn run_retrieve(&self, id: &str, k: Option<usize>) -> Result<Session> {
        let k = k.unwrap_or(self.parts.default_k);
        self.update(id, async |s: &mut Session| {
            let plan = s.require_plan()?;
            let (result, elapsed) =
                timed_retrieve(&self.parts.corpus, plan, k, self.parts.weight_mode, &s.rejected_ids)?;
            tracing::debug!(session = %s.id, elapsed_us = elapsed.as_micros() as u64, "retrieved");
            Ok(s.set_retrieval(result, &now())?)
        })
        .await
    }

    pub async fn set_rejections(&self, id: &str, ids: BTreeSet<String>) -> Result<Session> {
        self.update(id, async |s: &mut Session| Ok(s.set_rejections(ids)?)).await
    }

    pub async fn run_generate(&self, id: &str) -> Result<Session> {
        self.update(id, async |s: &mut Session| {
            let plan = s.require_plan()?;
            let retrieval = s.require_retrieval()?;
            let entries = evidence(&self.parts.corpus, retrieval, &s.rejected_ids)?;
            let g = generate_for_plan(&s.query, plan, &entries, &self.parts.generator, &self.parts.generation).await?;
            save_artifact(&g.artifact, &self.parts.store.artifact_dir(&s.id).join(ARTIFACT_FILE))?;
            Ok(s.set_artifact(g.artifact, &now())?)
        })
        .await
    }

    pub async fn submit_correction(&self, id: &str, html: String) -> Result<Session> {
        self.update(id, async |s: &mut Session| Ok(s.set_correction(html, &now())?)).await
    }

    pub async fn run_evaluate(&self, id: &str, req: EvaluateRequest) -> Result<Session> {
        self.update(id, async |s: &mut Session| {
            let artifact = s.require_artifact()?;
            let options = DiffOptions {
                mode: if req.script_only { LineMode::ScriptOnly } else { LineMode::FullDocument },
                trim_trailing_whitespace: req.trim_trailing_whitespace,
            };
            let cost = s.edited_html.as_deref().map(|fixed| correction_cost_with(&artifact.html, fixed, options));
            let case = s.case_id.as_ref().and_then(|c| self.parts.cases.iter().find(|x| &x.id == c));
            let grade = match (&self.parts.grader, case) {
                (Some(grader), Some(case)) => Some(grade(&artifact.html, case, grader).await?),
                _ => None,
            };
            let evaluation = Evaluation { cost, grade, human: req.human, annotations: req.annotations };
            Ok(s.set_evaluation(evaluation, &now())?)
        })
        .await
    }
}
