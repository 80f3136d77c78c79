//! Grading and the benchmark harness.

use std::fmt;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use async_trait::async_trait;
use futures::stream::{self, StreamExt};
use serde::{Deserialize, Serialize};
use vispipe_core::diff::{correction_cost_with, CostReport, DiffOptions};
use vispipe_core::grade::{grading_prompt, parse_grade_output};
use vispipe_core::retrieve::retrieve;
use vispipe_core::static_check::StaticReport;
use vispipe_core::{Corpus, GeneratedArtifact, GenerationConfig, GradeReport, GroundTruthCase, WeightMode};

use crate::error::{Error, Result};
use crate::generator::{evidence, generate_for_plan};
use crate::llm::LlmClient;
use crate::planner::{plan, PlanOptions};

/// Asks the grader model to score `generated` against the case.
pub async fn grade(generated: &str, case: &GroundTruthCase, grader: &LlmClient) -> Result<GradeReport> {
    let prompt = grading_prompt(generated, case);
    let response = grader.chat(LlmClient::prompt_messages(&prompt)).await?;
    Ok(parse_grade_output(&response.content, &grader.model)?)
}

/// Benchmark configuration: with retrieved evidence, or the ablation without.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Arm {
    #[serde(rename = "rag")]
    Rag,
    #[serde(rename = "no-rag")]
    NoRag,
}

impl Arm {
    pub fn label(self) -> &'static str {
        match self {
            Arm::Rag => "rag",
            Arm::NoRag => "no-rag",
        }
    }
}

impl fmt::Display for Arm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub artifact: GeneratedArtifact,
    pub report: StaticReport,
}

/// One end-to-end run (plan, retrieve, generate) for a case.
#[async_trait]
pub trait Workflow: Send + Sync {
    async fn run(&self, case: &GroundTruthCase, arm: Arm) -> Result<RunOutput>;
}

/// The real workflow. The case description is the user query.
pub struct PipelineWorkflow {
    pub corpus: Arc<Corpus>,
    pub planner: LlmClient,
    pub generator: LlmClient,
    pub generation: GenerationConfig,
    pub k: usize,
    pub weight_mode: WeightMode,
    pub plan_options: PlanOptions,
}

#[async_trait]
impl Workflow for PipelineWorkflow {
    async fn run(&self, case: &GroundTruthCase, arm: Arm) -> Result<RunOutput> {
        let query = case.description.trim();
        let plan = plan(query, &self.planner, self.plan_options).await?;
        let entries = match arm {
            Arm::Rag => {
                let retrieval = retrieve(&self.corpus, &plan, self.k, self.weight_mode)?;
                evidence(&self.corpus, &retrieval, &Default::default())?
            }
            Arm::NoRag => Vec::new(),
        };
        let g = generate_for_plan(query, &plan, &entries, &self.generator, &self.generation).await?;
        Ok(RunOutput { artifact: g.artifact, report: g.report })
    }
}

#[derive(Debug, Clone)]
pub struct BenchOptions {
    pub arms: Vec<Arm>,
    pub corrected_dir: Option<PathBuf>,
    pub diff: DiffOptions,
    /// Cases run concurrently; 1 means sequential.
    pub parallelism: usize,
}

impl Default for BenchOptions {
    fn default() -> Self {
        BenchOptions {
            arms: vec![Arm::Rag, Arm::NoRag],
            corrected_dir: None,
            diff: DiffOptions::default(),
            parallelism: 1,
        }
    }
}

/// A CSV row. Absent values serialize as empty fields.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BenchRow {
    pub case_id: String,
    pub config: String,
    pub cost: Option<usize>,
    pub added: Option<usize>,
    pub deleted: Option<usize>,
    pub static_pass: Option<bool>,
    pub error: Option<String>,
}

/// Full record for the structured mirror of the table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRecord {
    #[serde(flatten)]
    pub row: BenchRow,
    pub error_code: Option<String>,
    pub cost_report: Option<CostReport>,
    pub static_report: Option<StaticReport>,
    pub context_ids: Vec<String>,
    pub prompt_digest: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchTable {
    pub diff_options: DiffOptions,
    pub records: Vec<BenchRecord>,
}

impl BenchTable {
    pub fn rows(&self) -> impl Iterator<Item = &BenchRow> {
        self.records.iter().map(|r| &r.row)
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        for row in self.rows() {
            w.serialize(row).map_err(|e| Error::Storage(e.to_string()))?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Storage(e.to_string()))?;
        String::from_utf8(bytes).map_err(|e| Error::Storage(e.to_string()))
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        crate::fsutil::write_atomic(path, self.to_csv()?.as_bytes())?;
        Ok(())
    }

    pub fn write_json(&self, path: &Path) -> Result<()> {
        crate::fsutil::write_json(path, self)?;
        Ok(())
    }
}

fn read_corrected(dir: Option<&Path>, case_id: &str) -> Result<Option<String>> {
    let Some(dir) = dir else { return Ok(None) };
    match std::fs::read_to_string(dir.join(format!("{case_id}.html"))) {
        Ok(text) => Ok(Some(text)),
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => Ok(None),
        Err(e) => Err(e.into()),
    }
}

async fn bench_one(
    case: &GroundTruthCase,
    arm: Arm,
    workflow: &dyn Workflow,
    options: &BenchOptions,
) -> BenchRecord {
    let mut record = BenchRecord {
        row: BenchRow {
            case_id: case.id.clone(),
            config: arm.label().to_string(),
            cost: None,
            added: None,
            deleted: None,
            static_pass: None,
            error: None,
        },
        error_code: None,
        cost_report: None,
        static_report: None,
        context_ids: Vec::new(),
        prompt_digest: None,
    };
    let outcome = async {
        let out = workflow.run(case, arm).await?;
        let corrected = read_corrected(options.corrected_dir.as_deref(), &case.id)?;
        Ok::<_, Error>((out, corrected))
    }
    .await;
    match outcome {
        Ok((out, corrected)) => {
            record.row.static_pass = Some(out.report.structural_pass());
            if let Some(corrected) = corrected {
                let report = correction_cost_with(&out.artifact.html, &corrected, options.diff);
                record.row.cost = Some(report.stats.cost);
                record.row.added = Some(report.stats.added);
                record.row.deleted = Some(report.stats.deleted);
                record.cost_report = Some(report);
            }
            record.context_ids = out.artifact.context_ids.clone();
            record.prompt_digest = Some(out.artifact.prompt_digest.clone());
            record.static_report = Some(out.report);
        }
        Err(e) => {
            tracing::warn!(case = %case.id, arm = %arm, error = %e, "bench run failed");
            record.row.error = Some(e.to_string());
            record.error_code = Some(e.code().to_string());
        }
    }
    record
}

/// Runs every case under every arm. Failures become rows carrying an error;
/// the run itself only fails on an empty case list.
pub async fn bench(cases: &[GroundTruthCase], workflow: &dyn Workflow, options: &BenchOptions) -> Result<BenchTable> {
    if cases.is_empty() {
        return Err(Error::Invalid("no benchmark cases".into()));
    }
    let jobs: Vec<(&GroundTruthCase, Arm)> = cases
        .iter()
        .flat_map(|c| options.arms.iter().map(move |a| (c, *a)))
        .collect();
    let records = stream::iter(jobs)
        .map(|(case, arm)| bench_one(case, arm, workflow, options))
        .buffered(options.parallelism.max(1))
        .collect()
        .await;
    Ok(BenchTable { diff_options: options.diff, records })
}
