//! Prompt assembly, generation call and artifact persistence.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use vispipe_core::generate::{assemble_prompt, extract_html, GENERATION_SYSTEM};
use vispipe_core::static_check::{static_check, StaticReport};
use vispipe_core::{Corpus, CorpusEntry, GeneratedArtifact, GenerationConfig, PipelinePlan, RetrievalResult};

use crate::error::{Error, Result};
use crate::fsutil::{write_atomic, write_json};
use crate::llm::{ChatMessage, ChatRequest, LlmClient};

pub const ARTIFACT_FILE: &str = "generated.html";
pub const PROVENANCE_FILE: &str = "provenance.json";

pub fn now() -> String {
    chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Millis, true)
}

/// Evidence entries in retrieval rank order, skipping `rejected` ids.
pub fn evidence<'c>(
    corpus: &'c Corpus,
    retrieval: &RetrievalResult,
    rejected: &BTreeSet<String>,
) -> Result<Vec<&'c CorpusEntry>> {
    retrieval
        .ids()
        .filter(|id| !rejected.contains(*id))
        .map(|id| corpus.get(id).ok_or_else(|| Error::NotFound(format!("corpus entry `{id}`"))))
        .collect()
}

/// Sends an assembled prompt to the generation model and wraps the extracted
/// document. `context_ids` are the evidence ids the prompt was built from.
pub async fn generate(
    prompt: &str,
    llm: &LlmClient,
    context_ids: Vec<String>,
    config: &GenerationConfig,
) -> Result<GeneratedArtifact> {
    config.validate()?;
    let request = ChatRequest {
        model: config.model.clone(),
        messages: vec![ChatMessage::system(GENERATION_SYSTEM), ChatMessage::user(prompt)],
        temperature: config.temperature,
        max_output: config.max_output,
        timeout: llm.timeout,
    };
    let response = llm.complete(&request).await?;
    let html = extract_html(&response.content)?;
    Ok(GeneratedArtifact::new(html, prompt, context_ids, config, now())?)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Generation {
    pub artifact: GeneratedArtifact,
    pub report: StaticReport,
}

/// Assembles the prompt from `evidence` (possibly empty), generates, and
/// runs the static checks against `plan`.
pub async fn generate_for_plan(
    query: &str,
    plan: &PipelinePlan,
    evidence: &[&CorpusEntry],
    llm: &LlmClient,
    config: &GenerationConfig,
) -> Result<Generation> {
    let prompt = assemble_prompt(query, plan, evidence, config);
    let ids = evidence.iter().map(|e| e.id.clone()).collect();
    let artifact = generate(&prompt, llm, ids, config).await?;
    let report = static_check(&artifact, plan, config);
    Ok(Generation { artifact, report })
}

/// Provenance record stored next to the document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub prompt_digest: String,
    pub template_digest: String,
    pub context_ids: Vec<String>,
    pub model: String,
    pub vtkjs_version: String,
    pub include_plan: bool,
    pub created_at: String,
}

impl From<&GeneratedArtifact> for Provenance {
    fn from(a: &GeneratedArtifact) -> Self {
        Provenance {
            prompt_digest: a.prompt_digest.clone(),
            template_digest: a.template_digest.clone(),
            context_ids: a.context_ids.clone(),
            model: a.model.clone(),
            vtkjs_version: a.vtkjs_version.clone(),
            include_plan: a.include_plan,
            created_at: a.created_at.clone(),
        }
    }
}

/// Writes `html_path` and its provenance beside it; returns the provenance path.
pub fn save_artifact(artifact: &GeneratedArtifact, html_path: &Path) -> std::io::Result<PathBuf> {
    if let Some(dir) = html_path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    write_atomic(html_path, artifact.html.as_bytes())?;
    let stem = html_path.file_stem().and_then(|s| s.to_str()).unwrap_or("generated");
    let prov = if html_path.file_name().and_then(|n| n.to_str()) == Some(ARTIFACT_FILE) {
        html_path.with_file_name(PROVENANCE_FILE)
    } else {
        html_path.with_file_name(format!("{stem}.provenance.json"))
    };
    write_json(&prov, &Provenance::from(artifact))?;
    Ok(prov)
}
