//! Chat-completion client over OpenAI-compatible HTTP endpoints, with a
//! digest-keyed fixture backend for offline runs.

use std::fmt;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::{Duration, Instant};

use async_trait::async_trait;
use serde::{Deserialize, Serialize};
use serde_json::json;
use tokio::sync::Semaphore;
use tracing::debug;
use vispipe_core::digest::sha256_hex;
use vispipe_core::Prompt;

use crate::fsutil::write_atomic;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    System,
    User,
    Assistant,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChatMessage {
    pub role: Role,
    pub content: String,
}

impl ChatMessage {
    pub fn system(content: impl Into<String>) -> Self {
        Self { role: Role::System, content: content.into() }
    }

    pub fn user(content: impl Into<String>) -> Self {
        Self { role: Role::User, content: content.into() }
    }

    pub fn assistant(content: impl Into<String>) -> Self {
        Self { role: Role::Assistant, content: content.into() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChatRequest {
    pub model: String,
    pub messages: Vec<ChatMessage>,
    pub temperature: f64,
    pub max_output: u32,
    #[serde(skip, default = "default_timeout")]
    pub timeout: Duration,
}

fn default_timeout() -> Duration {
    Duration::from_secs(120)
}

impl ChatRequest {
    /// Identity of the request for fixture lookup. Covers model, messages,
    /// temperature and output budget; never the timeout.
    pub fn digest(&self) -> String {
        let canonical = json!({
            "model": self.model,
            "messages": self.messages,
            "temperature": self.temperature,
            "max_output": self.max_output,
        });
        sha256_hex(canonical.to_string().as_bytes())
    }

    pub fn validate(&self) -> Result<(), LlmError> {
        match self.messages.first() {
            None => Err(LlmError::InvalidRequest("no messages".into())),
            Some(m) if m.role == Role::Assistant => {
                Err(LlmError::InvalidRequest("first message must be system or user".into()))
            }
            _ if !(self.temperature >= 0.0) => Err(LlmError::InvalidRequest("negative temperature".into())),
            _ if self.max_output == 0 => Err(LlmError::InvalidRequest("max_output must be positive".into())),
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Usage {
    #[serde(default)]
    pub prompt_tokens: u64,
    #[serde(default)]
    pub completion_tokens: u64,
    #[serde(default)]
    pub total_tokens: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChatResponse {
    pub content: String,
    pub model: String,
    #[serde(default)]
    pub usage: Option<Usage>,
    #[serde(skip)]
    pub latency: Duration,
}

#[derive(Debug, thiserror::Error)]
pub enum LlmError {
    #[error("transport error{}: {message}", status.map(|s| format!(" (HTTP {s})")).unwrap_or_default())]
    Transport { status: Option<u16>, message: String },
    #[error("protocol error: {0}")]
    Protocol(String),
    #[error("environment variable `{0}` with the API key is not set")]
    MissingCredential(String),
    #[error("invalid request: {0}")]
    InvalidRequest(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl LlmError {
    pub fn code(&self) -> &'static str {
        match self {
            LlmError::Transport { .. } => "LlmTransportError",
            LlmError::Protocol(_) => "LlmProtocolError",
            LlmError::MissingCredential(_) => "MissingCredential",
            LlmError::InvalidRequest(_) => "LlmInvalidRequest",
            LlmError::Io(_) => "IoError",
        }
    }
}

#[async_trait]
pub trait ChatBackend: Send + Sync {
    async fn complete(&self, request: &ChatRequest) -> Result<ChatResponse, LlmError>;
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BackendMode {
    #[default]
    Live,
    Fixture,
}

/// Backend configuration file contents. Credentials are only read from the
/// environment variable named by `api_key_env`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BackendConfig {
    pub name: String,
    #[serde(default)]
    pub endpoint_url: Option<String>,
    pub model: String,
    #[serde(default)]
    pub api_key_env: Option<String>,
    #[serde(default)]
    pub temperature: f64,
    #[serde(default = "default_max_output")]
    pub max_output: u32,
    #[serde(default = "default_timeout_ms")]
    pub timeout_ms: u64,
    #[serde(default)]
    pub mode: BackendMode,
    #[serde(default)]
    pub fixture_dir: Option<PathBuf>,
    #[serde(default = "default_in_flight")]
    pub max_in_flight: usize,
}

fn default_max_output() -> u32 {
    8192
}

fn default_timeout_ms() -> u64 {
    120_000
}

fn default_in_flight() -> usize {
    4
}

impl BackendConfig {
    /// A fixture-mode config replaying from `dir`.
    pub fn fixture(model: &str, dir: impl Into<PathBuf>) -> Self {
        BackendConfig {
            name: "fixture".into(),
            endpoint_url: None,
            model: model.into(),
            api_key_env: None,
            temperature: 0.0,
            max_output: default_max_output(),
            timeout_ms: default_timeout_ms(),
            mode: BackendMode::Fixture,
            fixture_dir: Some(dir.into()),
            max_in_flight: default_in_flight(),
        }
    }

    /// Reads a JSON config; a relative `fixture_dir` is resolved against the
    /// config file's directory.
    pub fn load(path: &Path) -> crate::Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| crate::Error::Storage(format!("reading backend config {}: {e}", path.display())))?;
        let mut cfg: BackendConfig = serde_json::from_str(&text)
            .map_err(|e| crate::Error::Invalid(format!("backend config {}: {e}", path.display())))?;
        if let Some(dir) = &cfg.fixture_dir {
            if dir.is_relative() {
                let base = path.parent().unwrap_or(Path::new("."));
                cfg.fixture_dir = Some(base.join(dir));
            }
        }
        Ok(cfg)
    }

    pub fn timeout(&self) -> Duration {
        Duration::from_millis(self.timeout_ms)
    }
}

/// Shareable client: a backend plus per-request defaults and a bound on
/// concurrent in-flight requests.
#[derive(Clone)]
pub struct LlmClient {
    backend: Arc<dyn ChatBackend>,
    permits: Arc<Semaphore>,
    pub model: String,
    pub temperature: f64,
    pub max_output: u32,
    pub timeout: Duration,
}

impl fmt::Debug for LlmClient {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("LlmClient")
            .field("model", &self.model)
            .field("temperature", &self.temperature)
            .field("max_output", &self.max_output)
            .finish_non_exhaustive()
    }
}

impl LlmClient {
    pub fn new(backend: Arc<dyn ChatBackend>, model: impl Into<String>) -> Self {
        LlmClient {
            backend,
            permits: Arc::new(Semaphore::new(default_in_flight())),
            model: model.into(),
            temperature: 0.0,
            max_output: default_max_output(),
            timeout: default_timeout(),
        }
    }

    pub fn from_config(cfg: &BackendConfig) -> Result<Self, LlmError> {
        let backend: Arc<dyn ChatBackend> = match cfg.mode {
            BackendMode::Fixture => {
                let dir = cfg
                    .fixture_dir
                    .clone()
                    .ok_or_else(|| LlmError::InvalidRequest("fixture mode needs fixture_dir".into()))?;
                Arc::new(FixtureBackend::new(dir))
            }
            BackendMode::Live => Arc::new(HttpBackend::from_config(cfg)?),
        };
        Ok(LlmClient {
            backend,
            permits: Arc::new(Semaphore::new(cfg.max_in_flight.max(1))),
            model: cfg.model.clone(),
            temperature: cfg.temperature,
            max_output: cfg.max_output,
            timeout: cfg.timeout(),
        })
    }

    pub fn with_max_in_flight(mut self, n: usize) -> Self {
        self.permits = Arc::new(Semaphore::new(n.max(1)));
        self
    }

    pub fn request(&self, messages: Vec<ChatMessage>) -> ChatRequest {
        ChatRequest {
            model: self.model.clone(),
            messages,
            temperature: self.temperature,
            max_output: self.max_output,
            timeout: self.timeout,
        }
    }

    pub fn prompt_messages(prompt: &Prompt) -> Vec<ChatMessage> {
        vec![ChatMessage::system(&prompt.system), ChatMessage::user(&prompt.user)]
    }

    pub async fn complete(&self, request: &ChatRequest) -> Result<ChatResponse, LlmError> {
        request.validate()?;
        let _permit = self
            .permits
            .acquire()
            .await
            .map_err(|_| LlmError::Protocol("client closed".into()))?;
        let started = Instant::now();
        let mut response = self.backend.complete(request).await?;
        response.latency = started.elapsed();
        debug!(model = %request.model, latency_ms = response.latency.as_millis() as u64, "chat completion");
        Ok(response)
    }

    pub async fn chat(&self, messages: Vec<ChatMessage>) -> Result<ChatResponse, LlmError> {
        self.complete(&self.request(messages)).await
    }
}

/// OpenAI-compatible `/chat/completions` over HTTP. Never retries.
pub struct HttpBackend {
    client: reqwest::Client,
    url: String,
    api_key: Option<String>,
}

impl HttpBackend {
    pub fn new(endpoint_url: &str, api_key: Option<String>) -> Self {
        let base = endpoint_url.trim_end_matches('/');
        let url = if base.ends_with("/chat/completions") {
            base.to_string()
        } else {
            format!("{base}/chat/completions")
        };
        HttpBackend {
            client: reqwest::Client::new(),
            url,
            api_key,
        }
    }

    pub fn from_config(cfg: &BackendConfig) -> Result<Self, LlmError> {
        let endpoint = cfg
            .endpoint_url
            .as_deref()
            .ok_or_else(|| LlmError::InvalidRequest("live mode needs endpoint_url".into()))?;
        let api_key = match &cfg.api_key_env {
            Some(var) => Some(std::env::var(var).map_err(|_| LlmError::MissingCredential(var.clone()))?),
            None => None,
        };
        Ok(Self::new(endpoint, api_key))
    }
}

#[derive(Deserialize)]
struct WireResponse {
    #[serde(default)]
    model: String,
    choices: Vec<WireChoice>,
    #[serde(default)]
    usage: Option<Usage>,
}

#[derive(Deserialize)]
struct WireChoice {
    message: WireMessage,
}

#[derive(Deserialize)]
struct WireMessage {
    #[serde(default)]
    content: Option<String>,
}

#[async_trait]
impl ChatBackend for HttpBackend {
    async fn complete(&self, request: &ChatRequest) -> Result<ChatResponse, LlmError> {
        let body = json!({
            "model": request.model,
            "messages": request.messages,
            "temperature": request.temperature,
            "max_tokens": request.max_output,
            "stream": false,
        });
        let mut builder = self.client.post(&self.url).timeout(request.timeout).json(&body);
        if let Some(key) = &self.api_key {
            builder = builder.bearer_auth(key);
        }
        let resp = builder.send().await.map_err(|e| LlmError::Transport {
            status: e.status().map(|s| s.as_u16()),
            message: e.to_string(),
        })?;
        let status = resp.status();
        let text = resp.text().await.map_err(|e| LlmError::Transport {
            status: Some(status.as_u16()),
            message: e.to_string(),
        })?;
        if !status.is_success() {
            return Err(LlmError::Transport {
                status: Some(status.as_u16()),
                message: text.chars().take(500).collect(),
            });
        }
        let wire: WireResponse =
            serde_json::from_str(&text).map_err(|e| LlmError::Protocol(format!("unparseable provider payload: {e}")))?;
        let content = wire
            .choices
            .into_iter()
            .next()
            .and_then(|c| c.message.content)
            .ok_or_else(|| LlmError::Protocol("response has no message content".into()))?;
        Ok(ChatResponse {
            content,
            model: if wire.model.is_empty() { request.model.clone() } else { wire.model },
            usage: wire.usage,
            latency: Duration::ZERO,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MessageSummary {
    pub role: Role,
    pub chars: usize,
    pub sha256: String,
    pub preview: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RequestSummary {
    pub model: String,
    pub temperature: f64,
    pub max_output: u32,
    pub messages: Vec<MessageSummary>,
}

/// On-disk fixture: `<dir>/<digest>.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FixtureFile {
    pub digest: String,
    pub request: RequestSummary,
    pub response: FixtureResponse,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FixtureResponse {
    pub content: String,
    pub model: String,
    #[serde(default)]
    pub usage: Option<Usage>,
}

const PREVIEW_CHARS: usize = 160;

fn summarize(request: &ChatRequest) -> RequestSummary {
    RequestSummary {
        model: request.model.clone(),
        temperature: request.temperature,
        max_output: request.max_output,
        messages: request
            .messages
            .iter()
            .map(|m| MessageSummary {
                role: m.role,
                chars: m.content.chars().count(),
                sha256: sha256_hex(m.content.as_bytes()),
                preview: m.content.chars().take(PREVIEW_CHARS).collect(),
            })
            .collect(),
    }
}

/// Persists `request → response` under `dir`; returns the fixture id (the
/// request digest). Re-recording an identical pair rewrites the same file.
pub fn record_fixture(request: &ChatRequest, response: &ChatResponse, dir: &Path) -> std::io::Result<String> {
    std::fs::create_dir_all(dir)?;
    let digest = request.digest();
    let file = FixtureFile {
        digest: digest.clone(),
        request: summarize(request),
        response: FixtureResponse {
            content: response.content.clone(),
            model: response.model.clone(),
            usage: response.usage.clone(),
        },
    };
    let mut bytes = serde_json::to_vec_pretty(&file)?;
    bytes.push(b'\n');
    let path = dir.join(format!("{digest}.json"));
    if std::fs::read(&path).ok().as_deref() != Some(bytes.as_slice()) {
        write_atomic(&path, &bytes)?;
    }
    Ok(digest)
}

/// Replays recorded responses by request digest.
pub struct FixtureBackend {
    dir: PathBuf,
}

impl FixtureBackend {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        FixtureBackend { dir: dir.into() }
    }
}

#[async_trait]
impl ChatBackend for FixtureBackend {
    async fn complete(&self, request: &ChatRequest) -> Result<ChatResponse, LlmError> {
        let digest = request.digest();
        let path = self.dir.join(format!("{digest}.json"));
        let bytes = match tokio::fs::read(&path).await {
            Ok(b) => b,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => {
                return Err(LlmError::Protocol(format!(
                    "no recorded response for request digest {digest} in {}",
                    self.dir.display()
                )))
            }
            Err(e) => return Err(e.into()),
        };
        let file: FixtureFile = serde_json::from_slice(&bytes)
            .map_err(|e| LlmError::Protocol(format!("fixture {digest} is malformed: {e}")))?;
        Ok(ChatResponse {
            content: file.response.content,
            model: file.response.model,
            usage: file.response.usage,
            latency: Duration::ZERO,
        })
    }
}

/// Wraps another backend and records every successful exchange.
pub struct RecordingBackend {
    inner: Arc<dyn ChatBackend>,
    dir: PathBuf,
}

impl RecordingBackend {
    pub fn new(inner: Arc<dyn ChatBackend>, dir: impl Into<PathBuf>) -> Self {
        RecordingBackend { inner, dir: dir.into() }
    }
}

#[async_trait]
impl ChatBackend for RecordingBackend {
    async fn complete(&self, request: &ChatRequest) -> Result<ChatResponse, LlmError> {
        let response = self.inner.complete(request).await?;
        record_fixture(request, &response, &self.dir)?;
        Ok(response)
    }
}

type Script = dyn Fn(&ChatRequest) -> Result<String, LlmError> + Send + Sync;

/// Answers from a closure. Used for tests and for authoring fixtures.
pub struct ScriptedBackend {
    script: Box<Script>,
}

impl ScriptedBackend {
    pub fn new(script: impl Fn(&ChatRequest) -> Result<String, LlmError> + Send + Sync + 'static) -> Self {
        ScriptedBackend { script: Box::new(script) }
    }
}

#[async_trait]
impl ChatBackend for ScriptedBackend {
    async fn complete(&self, request: &ChatRequest) -> Result<ChatResponse, LlmError> {
        Ok(ChatResponse {
            content: (self.script)(request)?,
            model: request.model.clone(),
            usage: None,
            latency: Duration::ZERO,
        })
    }
}
