//! Service configuration (TOML) and the `./vispipe.toml` CLI defaults.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::Deserialize;
use vispipe_core::generate::{DEFAULT_CDN_TEMPLATE, DEFAULT_VTKJS_VERSION};
use vispipe_core::retrieve::DEFAULT_K;
use vispipe_core::{GenerationConfig, WeightMode};

use crate::error::{Error, Result};
use crate::io::{load_cases, load_corpus};
use crate::llm::{BackendConfig, LlmClient};
use crate::planner::PlanOptions;
use crate::service::{ServiceParts, SessionService, SessionStore};

pub const DEFAULT_CONFIG_FILE: &str = "vispipe.toml";

fn default_listen() -> String {
    "127.0.0.1:8080".into()
}

fn default_k() -> usize {
    DEFAULT_K
}

fn default_true() -> bool {
    true
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ServeConfig {
    #[serde(default = "default_listen")]
    pub listen: String,
    pub corpus_root: PathBuf,
    #[serde(default)]
    pub cases_root: Option<PathBuf>,
    pub sessions_dir: PathBuf,
    #[serde(default)]
    pub static_dir: Option<PathBuf>,
    /// Backend config used for planning, and for generation unless overridden.
    pub backend: PathBuf,
    #[serde(default)]
    pub generator_backend: Option<PathBuf>,
    #[serde(default)]
    pub grader_backend: Option<PathBuf>,
    #[serde(default = "default_k")]
    pub k: usize,
    #[serde(default)]
    pub weight_mode: WeightMode,
    #[serde(default)]
    pub vtkjs_version: Option<String>,
    #[serde(default)]
    pub cdn_url_template: Option<String>,
    #[serde(default = "default_true")]
    pub include_plan: bool,
}

fn resolve(base: &Path, p: &mut PathBuf) {
    if p.is_relative() {
        *p = base.join(&*p);
    }
}

impl ServeConfig {
    /// Parses the file; relative paths are taken from the file's directory.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Storage(format!("reading {}: {e}", path.display())))?;
        let mut cfg: ServeConfig =
            toml::from_str(&text).map_err(|e| Error::Invalid(format!("{}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new("."));
        resolve(base, &mut cfg.corpus_root);
        resolve(base, &mut cfg.sessions_dir);
        resolve(base, &mut cfg.backend);
        for p in [&mut cfg.cases_root, &mut cfg.static_dir, &mut cfg.generator_backend, &mut cfg.grader_backend]
            .into_iter()
            .flatten()
        {
            resolve(base, p);
        }
        Ok(cfg)
    }

    pub fn build_service(&self) -> Result<SessionService> {
        let corpus = load_corpus(&self.corpus_root)?;
        let cases = match &self.cases_root {
            Some(root) => load_cases(root)?,
            None => Vec::new(),
        };
        let planner_cfg = BackendConfig::load(&self.backend)?;
        let generator_cfg = match &self.generator_backend {
            Some(p) => BackendConfig::load(p)?,
            None => planner_cfg.clone(),
        };
        let grader = match &self.grader_backend {
            Some(p) => Some(LlmClient::from_config(&BackendConfig::load(p)?)?),
            None => None,
        };
        let generation = generation_config(
            &generator_cfg,
            self.vtkjs_version.as_deref(),
            self.cdn_url_template.as_deref(),
            self.include_plan,
        );
        generation.validate()?;
        Ok(SessionService::new(ServiceParts {
            store: SessionStore::open(&self.sessions_dir)?,
            corpus: Arc::new(corpus),
            cases: Arc::new(cases),
            planner: LlmClient::from_config(&planner_cfg)?,
            generator: LlmClient::from_config(&generator_cfg)?,
            grader,
            generation,
            default_k: self.k,
            weight_mode: self.weight_mode,
            plan_options: PlanOptions::default(),
        }))
    }
}

/// Generation settings: model parameters from the backend, pinning from the caller.
pub fn generation_config(
    backend: &BackendConfig,
    vtkjs_version: Option<&str>,
    cdn_url_template: Option<&str>,
    include_plan: bool,
) -> GenerationConfig {
    GenerationConfig {
        vtkjs_version: vtkjs_version.unwrap_or(DEFAULT_VTKJS_VERSION).to_string(),
        cdn_url_template: cdn_url_template.unwrap_or(DEFAULT_CDN_TEMPLATE).to_string(),
        model: backend.model.clone(),
        temperature: backend.temperature,
        max_output: backend.max_output,
        include_plan,
    }
}

/// Fallback values for CLI flags, read from `./vispipe.toml` when present.
#[derive(Debug, Clone, Default, Deserialize)]
pub struct CliDefaults {
    pub backend: Option<PathBuf>,
    pub corpus: Option<PathBuf>,
    pub cases: Option<PathBuf>,
    pub corrected: Option<PathBuf>,
    pub k: Option<usize>,
    pub weight_mode: Option<WeightMode>,
    pub vtkjs_version: Option<String>,
    pub cdn_url_template: Option<String>,
}

impl CliDefaults {
    pub fn discover(dir: &Path) -> Result<Self> {
        let path = dir.join(DEFAULT_CONFIG_FILE);
        if !path.is_file() {
            return Ok(Self::default());
        }
        let text = std::fs::read_to_string(&path)?;
        let mut d: CliDefaults =
            toml::from_str(&text).map_err(|e| Error::Invalid(format!("{}: {e}", path.display())))?;
        for p in [&mut d.backend, &mut d.corpus, &mut d.cases, &mut d.corrected].into_iter().flatten() {
            resolve(dir, p);
        }
        Ok(d)
    }
}
