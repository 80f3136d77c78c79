//! Rebuilds `fixtures/llm/` by running the real workflows against canned
//! model replies from `fixtures/transcripts/`.
//!
//! cargo run --example record_fixtures [-- <fixtures dir>]

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::Deserialize;
use vispipe::evaluator::{bench, grade, Arm, BenchOptions, PipelineWorkflow, Workflow};
use vispipe::generator::{evidence, generate_for_plan};
use vispipe::io::{load_cases, load_corpus};
use vispipe::llm::{BackendConfig, ChatRequest, LlmClient, LlmError, RecordingBackend, Role, ScriptedBackend};
use vispipe::planner::{plan, PlanOptions};
use vispipe::retriever::semantic_retrieve_baseline;
use vispipe_core::generate::{ABLATION_NOTICE, GENERATION_SYSTEM};
use vispipe_core::grade::GRADING_SYSTEM;
use vispipe_core::plan::PLANNING_TEMPLATE;
use vispipe_core::retrieve::{retrieve, DEFAULT_K};
use vispipe_core::WeightMode;

#[derive(Deserialize)]
struct Transcript {
    kind: String,
    key: String,
    #[serde(default)]
    arm: Option<String>,
    response: String,
}

struct Script {
    dir: PathBuf,
    transcripts: Vec<Transcript>,
    /// (key, query text) pairs used to recognise which case a prompt is for.
    queries: Vec<(String, String)>,
}

impl Script {
    fn reply(&self, req: &ChatRequest) -> Result<String, LlmError> {
        let system = req.messages.iter().find(|m| m.role == Role::System).map(|m| m.content.as_str()).unwrap_or("");
        let user = req.messages.iter().rev().find(|m| m.role == Role::User).map(|m| m.content.as_str()).unwrap_or("");
        let kind = if system == PLANNING_TEMPLATE.trim_end() {
            "plan"
        } else if system == GENERATION_SYSTEM {
            "generate"
        } else if system == GRADING_SYSTEM {
            "grade"
        } else {
            "baseline"
        };
        let key = if kind == "baseline" {
            "toy"
        } else {
            self.queries
                .iter()
                .find(|(_, q)| user.contains(q.trim()))
                .map(|(k, _)| k.as_str())
                .ok_or_else(|| LlmError::Protocol(format!("no transcript key matches this {kind} prompt")))?
        };
        let arm = (kind == "generate").then(|| if user.contains(ABLATION_NOTICE) { "no-rag" } else { "rag" });
        let t = self
            .transcripts
            .iter()
            .find(|t| t.kind == kind && t.key == key && t.arm.as_deref() == arm)
            .ok_or_else(|| LlmError::Protocol(format!("no transcript for {kind}/{key}/{arm:?}")))?;
        std::fs::read_to_string(self.dir.join("transcripts").join(&t.response)).map_err(LlmError::Io)
    }
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> T {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[tokio::main]
async fn main() {
    let root = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures"));
    let llm_dir = root.join("llm");
    if llm_dir.exists() {
        std::fs::remove_dir_all(&llm_dir).unwrap();
    }
    std::fs::create_dir_all(&llm_dir).unwrap();

    let cases = load_cases(&root.join("cases")).unwrap();
    let rotor_query = std::fs::read_to_string(root.join("queries/rotor.txt")).unwrap();
    let mut queries: Vec<(String, String)> = cases.iter().map(|c| (c.id.clone(), c.description.clone())).collect();
    queries.push(("rotor".into(), rotor_query.clone()));
    let script = Script {
        transcripts: read_json(&root.join("transcripts/index.json")),
        dir: root.clone(),
        queries,
    };
    let scripted = Arc::new(ScriptedBackend::new(move |req| script.reply(req)));
    let backend_cfg = BackendConfig::load(&root.join("backend/fixture.json")).unwrap();
    let llm = LlmClient::new(Arc::new(RecordingBackend::new(scripted, &llm_dir)), &backend_cfg.model);
    let generation = vispipe::config::generation_config(&backend_cfg, None, None, true);
    let corpus = Arc::new(load_corpus(&root.join("corpus")).unwrap());

    let workflow = PipelineWorkflow {
        corpus: corpus.clone(),
        planner: llm.clone(),
        generator: llm.clone(),
        generation: generation.clone(),
        k: DEFAULT_K,
        weight_mode: WeightMode::Raw,
        plan_options: PlanOptions::default(),
    };
    let options = BenchOptions { corrected_dir: Some(root.join("corrected")), ..Default::default() };
    let table = bench(&cases, &workflow, &options).await.unwrap();
    for r in table.rows() {
        println!("{} {} cost={:?} static={:?} error={:?}", r.case_id, r.config, r.cost, r.static_pass, r.error);
    }

    let slice = cases.iter().find(|c| c.id == "slice").unwrap();
    let slice_run = workflow.run(slice, Arm::Rag).await.unwrap();
    let g = grade(&slice_run.artifact.html, slice, &llm).await.unwrap();
    println!("slice grade {} {} {}", g.functionality(), g.visual_fidelity(), g.code_quality());

    let rotor_plan = plan(rotor_query.trim(), &llm, PlanOptions::default()).await.unwrap();
    let retrieval = retrieve(&corpus, &rotor_plan, DEFAULT_K, WeightMode::Raw).unwrap();
    println!("rotor retrieval {:?}", retrieval.ids().collect::<Vec<_>>());
    let entries = evidence(&corpus, &retrieval, &BTreeSet::new()).unwrap();
    let rotor = generate_for_plan(rotor_query.trim(), &rotor_plan, &entries, &llm, &generation).await.unwrap();
    println!("rotor document ok: {}", rotor.report.document_ok());

    let toy = load_corpus(&root.join("toy_corpus")).unwrap();
    let baseline = semantic_retrieve_baseline(&toy, "slice with a plane and show actors", &llm, 2).await.unwrap();
    println!("baseline {:?}", baseline.ids().collect::<Vec<_>>());

    let n = std::fs::read_dir(&llm_dir).unwrap().count();
    println!("{n} fixture files in {}", llm_dir.display());
}
