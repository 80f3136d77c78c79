//! Constrained generation prompts and the generated-document contract.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::corpus::CorpusEntry;
use crate::digest::sha256_hex;
use crate::html::{find_ci, rfind_ci, script_tags};
use crate::plan::PipelinePlan;
use crate::retrieve::RetrievalResult;

pub const GENERATION_TEMPLATE: &str = include_str!("../templates/generation_prompt.txt");
pub const GENERATION_CONSTRAINTS: &str = include_str!("../templates/generation_constraints.txt");

pub const DEFAULT_VTKJS_VERSION: &str = "34.4.0";
pub const DEFAULT_CDN_TEMPLATE: &str = "https://unpkg.com/vtk.js@{version}/vtk.js";
pub const VERSION_PLACEHOLDER: &str = "{version}";

/// System message sent alongside the assembled generation prompt.
pub const GENERATION_SYSTEM: &str =
    "You write complete, self-contained HTML documents that build scientific visualization pipelines with vtk.js.";

/// Printed in place of the evidence section when no examples are supplied.
pub const ABLATION_NOTICE: &str =
    "No reference examples are provided for this request. Build the document from the plan and the documented vtk.js API only.";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenerationConfig {
    pub vtkjs_version: String,
    pub cdn_url_template: String,
    pub model: String,
    pub temperature: f64,
    pub max_output: u32,
    /// Include the serialized plan in the prompt.
    #[serde(default = "default_true")]
    pub include_plan: bool,
}

fn default_true() -> bool {
    true
}

impl Default for GenerationConfig {
    fn default() -> Self {
        GenerationConfig {
            vtkjs_version: DEFAULT_VTKJS_VERSION.to_string(),
            cdn_url_template: DEFAULT_CDN_TEMPLATE.to_string(),
            model: "fixture".to_string(),
            temperature: 0.0,
            max_output: 8192,
            include_plan: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ConfigError {
    #[error("vtk.js version is empty")]
    EmptyVersion,
    #[error("CDN URL template must contain `{{version}}` exactly once, found {0}")]
    Placeholder(usize),
}

impl GenerationConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.vtkjs_version.trim().is_empty() {
            return Err(ConfigError::EmptyVersion);
        }
        let n = self.cdn_url_template.matches(VERSION_PLACEHOLDER).count();
        if n != 1 {
            return Err(ConfigError::Placeholder(n));
        }
        Ok(())
    }

    pub fn cdn_url(&self) -> String {
        self.cdn_url_template
            .replace(VERSION_PLACEHOLDER, &self.vtkjs_version)
    }
}

/// Replaces `{name}` placeholders in one pass, so substituted text is never
/// rescanned.
pub fn fill_template(template: &str, values: &[(&str, &str)]) -> String {
    let mut out = String::with_capacity(template.len());
    let mut rest = template;
    while let Some(open) = rest.find('{') {
        out.push_str(&rest[..open]);
        let tail = &rest[open..];
        let hit = values.iter().find_map(|(name, value)| {
            let key_len = name.len() + 2;
            (tail.len() >= key_len
                && tail.as_bytes()[key_len - 1] == b'}'
                && &tail[1..key_len - 1] == *name)
                .then_some((key_len, *value))
        });
        match hit {
            Some((len, value)) => {
                out.push_str(value);
                rest = &tail[len..];
            }
            None => {
                out.push('{');
                rest = &tail[1..];
            }
        }
    }
    out.push_str(rest);
    out
}

pub fn constraints_text(config: &GenerationConfig) -> String {
    fill_template(
        GENERATION_CONSTRAINTS.trim_end(),
        &[("version", &config.vtkjs_version), ("cdn_url", &config.cdn_url())],
    )
}

fn plan_section(plan: &PipelinePlan) -> String {
    let mut s = String::new();
    for (i, n) in plan.nodes.iter().enumerate() {
        s.push_str(&format!(
            "{}. [{}] {} (weight {}; modules: {})\n   {}\n",
            i + 1,
            n.phase,
            n.name,
            n.weight,
            n.modules.join(", "),
            n.description.trim()
        ));
    }
    s.trim_end().to_string()
}

fn evidence_section(evidence: &[&CorpusEntry]) -> String {
    if evidence.is_empty() {
        return ABLATION_NOTICE.to_string();
    }
    let mut s = String::new();
    for (i, e) in evidence.iter().enumerate() {
        if i > 0 {
            s.push_str("\n\n");
        }
        s.push_str(&format!(
            "### Example {}: {}\nDescription: {}\n```html\n{}\n```",
            i + 1,
            e.id,
            e.description.trim(),
            e.code.trim_end()
        ));
    }
    s
}

/// The full generation prompt: constraints, plan, evidence in the given
/// order, then the query.
pub fn assemble_prompt(
    query: &str,
    plan: &PipelinePlan,
    evidence: &[&CorpusEntry],
    config: &GenerationConfig,
) -> String {
    let constraints = constraints_text(config);
    let plan_text = if config.include_plan {
        plan_section(plan)
    } else {
        String::from("(plan omitted)")
    };
    let evidence_text = evidence_section(evidence);
    fill_template(
        GENERATION_TEMPLATE,
        &[
            ("constraints", &constraints),
            ("plan", &plan_text),
            ("evidence", &evidence_text),
            ("query", query.trim()),
        ],
    )
}

pub fn template_digest() -> String {
    let mut both = String::from(GENERATION_TEMPLATE);
    both.push_str(GENERATION_CONSTRAINTS);
    sha256_hex(both.as_bytes())
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum GenerateError {
    #[error("no HTML document found in the model output")]
    Extraction { raw: String },
    #[error("generated document does not start with a document type declaration")]
    MissingDoctype,
    #[error("generated document must load {url} exactly once, found {found} script references")]
    CdnScript { url: String, found: usize },
    #[error("context id `{0}` was not part of the retrieval result")]
    UnknownContext(String),
}

/// Pulls the HTML document out of free-form model output.
///
/// A candidate region starts at a `<!DOCTYPE` (any case) and ends at the last
/// `</html>` before the next declaration. The longest candidate wins; lines
/// that are bare code fences are dropped from it.
pub fn extract_html(raw: &str) -> Result<String, GenerateError> {
    let mut starts = Vec::new();
    let mut from = 0;
    while let Some(i) = find_ci(raw, "<!doctype", from) {
        starts.push(i);
        from = i + 1;
    }
    let mut best: Option<&str> = None;
    for (n, &s) in starts.iter().enumerate() {
        let window_end = starts.get(n + 1).copied().unwrap_or(raw.len());
        let window = &raw[s..window_end];
        if let Some(close) = rfind_ci(window, "</html>") {
            let region = &window[..close + "</html>".len()];
            if best.is_none_or(|b| region.len() > b.len()) {
                best = Some(region);
            }
        }
    }
    let region = best.ok_or_else(|| GenerateError::Extraction {
        raw: raw.to_string(),
    })?;
    let mut out = String::with_capacity(region.len());
    for line in region.split_inclusive('\n') {
        if is_fence_line(line) {
            continue;
        }
        out.push_str(line);
    }
    Ok(out)
}

fn is_fence_line(line: &str) -> bool {
    line.trim()
        .strip_prefix("```")
        .is_some_and(|info| info.chars().all(|c| c.is_ascii_alphanumeric()))
}

/// Number of `<script src=...>` elements loading exactly `url`.
pub fn cdn_script_count(html: &str, url: &str) -> usize {
    script_tags(html)
        .iter()
        .filter(|t| t.src == Some(url))
        .count()
}

pub fn has_doctype(html: &str) -> bool {
    html.trim_start()
        .get(..9)
        .is_some_and(|p| p.eq_ignore_ascii_case("<!doctype"))
}

/// A generated document plus where it came from. Construction enforces the
/// document contract.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneratedArtifact {
    pub html: String,
    pub prompt_digest: String,
    pub template_digest: String,
    pub context_ids: Vec<String>,
    pub model: String,
    pub vtkjs_version: String,
    pub include_plan: bool,
    pub created_at: String,
}

impl GeneratedArtifact {
    pub fn new(
        html: String,
        prompt: &str,
        context_ids: Vec<String>,
        config: &GenerationConfig,
        created_at: String,
    ) -> Result<Self, GenerateError> {
        check_document(&html, config)?;
        Ok(GeneratedArtifact {
            html,
            prompt_digest: sha256_hex(prompt.as_bytes()),
            template_digest: template_digest(),
            context_ids,
            model: config.model.clone(),
            vtkjs_version: config.vtkjs_version.clone(),
            include_plan: config.include_plan,
            created_at,
        })
    }

    /// Every context id must come from `retrieval`.
    pub fn check_context(&self, retrieval: &RetrievalResult) -> Result<(), GenerateError> {
        for id in &self.context_ids {
            if !retrieval.ids().any(|r| r == id) {
                return Err(GenerateError::UnknownContext(id.clone()));
            }
        }
        Ok(())
    }
}

pub fn check_document(html: &str, config: &GenerationConfig) -> Result<(), GenerateError> {
    if !has_doctype(html) {
        return Err(GenerateError::MissingDoctype);
    }
    let url = config.cdn_url();
    let found = cdn_script_count(html, &url);
    if found != 1 {
        return Err(GenerateError::CdnScript { url, found });
    }
    Ok(())
}
