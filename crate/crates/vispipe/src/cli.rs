//! Command-line driver. Documents go to stdout (or `-o`), logs to stderr.

use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use vispipe_core::diff::{correction_cost_with, CostReport, DiffOptions, LineMode};
use vispipe_core::plan::check_plan;
use vispipe_core::retrieve::DEFAULT_K;
use vispipe_core::{Corpus, GradeReport, PipelinePlan, RetrievalResult, WeightMode};

use crate::config::{generation_config, CliDefaults, ServeConfig};
use crate::error::{Error, Result};
use crate::evaluator::{bench, grade, Arm, BenchOptions, PipelineWorkflow};
use crate::generator::{evidence, generate_for_plan, save_artifact};
use crate::io::{load_cases, load_corpus};
use crate::llm::{BackendConfig, LlmClient};
use crate::planner::{plan, PlanOptions};
use crate::retriever::{semantic_retrieve_baseline, timed_retrieve};

#[derive(Debug, Parser)]
#[command(name = "vispipe", version, about = "Plan, retrieve, generate and evaluate vtk.js visualization documents")]
pub struct Cli {
    /// More log output on stderr (-v debug, -vv trace).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    pub verbose: u8,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Validate a corpus and print entry/module statistics.
    Index(IndexArgs),
    /// Decompose a query into a pipeline plan.
    Plan(PlanArgs),
    /// Rank corpus entries against a plan.
    Retrieve(RetrieveArgs),
    /// Assemble the prompt, generate a document and check it statically.
    Generate(GenerateArgs),
    /// Correction cost between a generated and a corrected document.
    Evaluate(EvaluateArgs),
    /// Run every case end to end and write the cost table.
    Bench(BenchArgs),
    /// Start the HTTP service.
    Serve(ServeArgs),
}

#[derive(Debug, Args)]
pub struct IndexArgs {
    pub corpus_root: PathBuf,
    /// Print the statistics as JSON.
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Args)]
pub struct BackendArg {
    /// LLM backend config file.
    #[arg(long, env = "VISPIPE_BACKEND")]
    pub backend: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct PlanArgs {
    /// Query text, or a path to a file holding it.
    #[arg(long)]
    pub query: String,
    #[command(flatten)]
    pub backend: BackendArg,
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct RetrieveArgs {
    #[arg(long, env = "VISPIPE_CORPUS")]
    pub corpus: Option<PathBuf>,
    #[arg(long)]
    pub plan: PathBuf,
    #[arg(short)]
    pub k: Option<usize>,
    #[arg(long)]
    pub weight_mode: Option<WeightMode>,
    /// Entry ids to leave out, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub exclude: Vec<String>,
    /// Use the model-ranked description baseline instead of module matching.
    #[arg(long)]
    pub semantic: bool,
    #[command(flatten)]
    pub backend: BackendArg,
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct PinArgs {
    #[arg(long)]
    pub vtkjs_version: Option<String>,
    /// CDN URL with a `{version}` placeholder.
    #[arg(long)]
    pub cdn_url_template: Option<String>,
    /// Leave the plan out of the generation prompt.
    #[arg(long)]
    pub omit_plan: bool,
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    /// Query text, or a path to a file holding it. Defaults to the plan's query.
    #[arg(long)]
    pub query: Option<String>,
    #[arg(long)]
    pub plan: PathBuf,
    /// Retrieval result whose candidates become the evidence, in rank order.
    #[arg(long)]
    pub retrieval: Option<PathBuf>,
    #[arg(long, env = "VISPIPE_CORPUS")]
    pub corpus: Option<PathBuf>,
    /// Generate without evidence.
    #[arg(long)]
    pub no_rag: bool,
    #[command(flatten)]
    pub backend: BackendArg,
    #[command(flatten)]
    pub pin: PinArgs,
    /// Write the document here and its provenance beside it.
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct DiffArgs {
    /// Compare only inline script contents.
    #[arg(long)]
    pub script_only: bool,
    #[arg(long)]
    pub trim_trailing_whitespace: bool,
}

impl DiffArgs {
    fn options(&self) -> DiffOptions {
        DiffOptions {
            mode: if self.script_only { LineMode::ScriptOnly } else { LineMode::FullDocument },
            trim_trailing_whitespace: self.trim_trailing_whitespace,
        }
    }
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    #[arg(long)]
    pub generated: PathBuf,
    #[arg(long)]
    pub corrected: PathBuf,
    #[command(flatten)]
    pub diff: DiffArgs,
    /// Also grade the generated document against this case (needs --cases and --backend).
    #[arg(long)]
    pub case: Option<String>,
    #[arg(long, env = "VISPIPE_CASES")]
    pub cases: Option<PathBuf>,
    #[command(flatten)]
    pub backend: BackendArg,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    #[arg(long, env = "VISPIPE_CASES")]
    pub cases: Option<PathBuf>,
    #[arg(long, env = "VISPIPE_CORPUS")]
    pub corpus: Option<PathBuf>,
    #[command(flatten)]
    pub backend: BackendArg,
    /// Run only the arm without retrieved evidence.
    #[arg(long, conflicts_with = "rag_only")]
    pub no_rag: bool,
    /// Run only the arm with retrieved evidence.
    #[arg(long)]
    pub rag_only: bool,
    /// Directory of `<case_id>.html` corrected documents.
    #[arg(long)]
    pub corrected: Option<PathBuf>,
    #[arg(short)]
    pub k: Option<usize>,
    #[arg(long)]
    pub weight_mode: Option<WeightMode>,
    #[command(flatten)]
    pub diff: DiffArgs,
    #[command(flatten)]
    pub pin: PinArgs,
    /// Cases run concurrently.
    #[arg(long, default_value_t = 1)]
    pub parallelism: usize,
    /// CSV table; the JSON mirror is written beside it.
    #[arg(short, long)]
    pub output: Option<PathBuf>,
    /// Explicit path for the JSON mirror.
    #[arg(long)]
    pub json: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ServeArgs {
    #[arg(long, env = "VISPIPE_SERVE_CONFIG")]
    pub config: PathBuf,
    /// Overrides the configured listen address.
    #[arg(long)]
    pub listen: Option<String>,
}

fn require(value: Option<PathBuf>, fallback: &Option<PathBuf>, what: &str) -> Result<PathBuf> {
    value
        .or_else(|| fallback.clone())
        .ok_or_else(|| Error::Invalid(format!("no {what} given (flag, environment or {})", crate::config::DEFAULT_CONFIG_FILE)))
}

fn read_text(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::Storage(format!("{}: {e}", path.display())))
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    serde_json::from_str(&read_text(path)?).map_err(|e| Error::Invalid(format!("{}: {e}", path.display())))
}

/// A value that is either literal text or the path of a file containing it.
fn text_or_file(value: &str) -> Result<String> {
    let p = Path::new(value);
    if p.is_file() {
        read_text(p)
    } else {
        Ok(value.to_string())
    }
}

fn emit<T: Serialize>(value: &T, output: Option<&Path>) -> Result<()> {
    let text = serde_json::to_string_pretty(value).map_err(|e| Error::Storage(e.to_string()))?;
    match output {
        Some(p) => crate::fsutil::write_atomic(p, format!("{text}\n").as_bytes())?,
        None => print_stdout(&format!("{text}\n"))?,
    }
    Ok(())
}

/// Writes to stdout; a closed pipe (as with `| head`) is not an error.
fn print_stdout(text: &str) -> Result<()> {
    use std::io::Write;
    let mut out = std::io::stdout().lock();
    match out.write_all(text.as_bytes()).and_then(|_| out.flush()) {
        Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(e.into()),
        _ => Ok(()),
    }
}

fn client(path: &Path) -> Result<(BackendConfig, LlmClient)> {
    let cfg = BackendConfig::load(path)?;
    tracing::debug!(config = %path.display(), model = %cfg.model, mode = ?cfg.mode, "backend");
    let client = LlmClient::from_config(&cfg)?;
    Ok((cfg, client))
}

fn load_plan(path: &Path) -> Result<PipelinePlan> {
    Ok(check_plan(read_json(path)?)?)
}

fn corpus_at(path: &Path) -> Result<Corpus> {
    tracing::debug!(corpus = %path.display(), "loading corpus");
    Ok(load_corpus(path)?)
}

#[derive(Serialize)]
struct IndexStats {
    entries: usize,
    modules: usize,
    categories: BTreeMap<String, usize>,
    module_frequency: BTreeMap<String, usize>,
}

fn index(args: IndexArgs) -> Result<()> {
    let corpus = corpus_at(&args.corpus_root)?;
    let mut categories = BTreeMap::new();
    for e in corpus.entries() {
        *categories.entry(e.category.as_str().to_string()).or_insert(0) += 1;
    }
    let stats = IndexStats {
        entries: corpus.len(),
        modules: corpus.module_index().len(),
        categories,
        module_frequency: corpus.module_index().iter().map(|(m, ids)| (m.clone(), ids.len())).collect(),
    };
    if args.json {
        return emit(&stats, None);
    }
    let mut text = format!("entries: {}\ndistinct modules: {}\n", stats.entries, stats.modules);
    for (c, n) in &stats.categories {
        text.push_str(&format!("category {c}: {n}\n"));
    }
    let mut by_freq: Vec<_> = stats.module_frequency.iter().collect();
    by_freq.sort_by(|a, b| b.1.cmp(a.1).then(a.0.cmp(b.0)));
    for (m, n) in by_freq.into_iter().take(15) {
        text.push_str(&format!("  {n:>4}  {m}\n"));
    }
    print_stdout(&text)?;
    Ok(())
}

async fn plan_cmd(args: PlanArgs, d: &CliDefaults) -> Result<()> {
    let (_, llm) = client(&require(args.backend.backend, &d.backend, "backend config")?)?;
    let query = text_or_file(&args.query)?;
    let p = plan(query.trim(), &llm, PlanOptions::default()).await?;
    emit(&p, args.output.as_deref())
}

async fn retrieve_cmd(args: RetrieveArgs, d: &CliDefaults) -> Result<()> {
    let corpus = corpus_at(&require(args.corpus, &d.corpus, "corpus root")?)?;
    let plan = load_plan(&args.plan)?;
    let k = args.k.or(d.k).unwrap_or(DEFAULT_K);
    let result: RetrievalResult = if args.semantic {
        let (_, llm) = client(&require(args.backend.backend, &d.backend, "backend config")?)?;
        semantic_retrieve_baseline(&corpus, &plan.query, &llm, k).await?
    } else {
        let mode = args.weight_mode.or(d.weight_mode).unwrap_or_default();
        let excluded: BTreeSet<String> = args.exclude.into_iter().filter(|s| !s.is_empty()).collect();
        let (r, elapsed) = timed_retrieve(&corpus, &plan, k, mode, &excluded)?;
        tracing::info!(elapsed_us = elapsed.as_micros() as u64, candidates = r.candidates.len(), "retrieved");
        r
    };
    emit(&result, args.output.as_deref())
}

async fn generate_cmd(args: GenerateArgs, d: &CliDefaults) -> Result<()> {
    let (cfg, llm) = client(&require(args.backend.backend, &d.backend, "backend config")?)?;
    let plan = load_plan(&args.plan)?;
    let query = match &args.query {
        Some(q) => text_or_file(q)?,
        None => plan.query.clone(),
    };
    let generation = generation_config(
        &cfg,
        args.pin.vtkjs_version.as_deref().or(d.vtkjs_version.as_deref()),
        args.pin.cdn_url_template.as_deref().or(d.cdn_url_template.as_deref()),
        !args.pin.omit_plan,
    );
    let corpus;
    let entries = if args.no_rag {
        Vec::new()
    } else {
        let retrieval_path = args
            .retrieval
            .as_deref()
            .ok_or_else(|| Error::Invalid("--retrieval is required unless --no-rag is set".into()))?;
        let retrieval: RetrievalResult = read_json(retrieval_path)?;
        corpus = corpus_at(&require(args.corpus, &d.corpus, "corpus root")?)?;
        evidence(&corpus, &retrieval, &BTreeSet::new())?
    };
    let g = generate_for_plan(query.trim(), &plan, &entries, &llm, &generation).await?;
    match &args.output {
        Some(out) => {
            let prov = save_artifact(&g.artifact, out)?;
            tracing::info!(document = %out.display(), provenance = %prov.display(), "written");
            emit(&g.report, None)
        }
        None => emit(&g, None),
    }
}

#[derive(Serialize)]
struct EvaluateOutput {
    #[serde(flatten)]
    cost: CostReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    grade: Option<GradeReport>,
}

async fn evaluate_cmd(args: EvaluateArgs, d: &CliDefaults) -> Result<()> {
    let generated = read_text(&args.generated)?;
    let corrected = read_text(&args.corrected)?;
    let cost = correction_cost_with(&generated, &corrected, args.diff.options());
    let grade = match &args.case {
        Some(id) => {
            let cases = load_cases(&require(args.cases, &d.cases, "cases root")?)?;
            let case = cases
                .iter()
                .find(|c| &c.id == id)
                .ok_or_else(|| Error::NotFound(format!("case `{id}`")))?;
            let (_, llm) = client(&require(args.backend.backend, &d.backend, "backend config")?)?;
            Some(grade(&generated, case, &llm).await?)
        }
        None => None,
    };
    emit(&EvaluateOutput { cost, grade }, None)
}

async fn bench_cmd(args: BenchArgs, d: &CliDefaults) -> Result<()> {
    let cases = load_cases(&require(args.cases, &d.cases, "cases root")?)?;
    let corpus = corpus_at(&require(args.corpus, &d.corpus, "corpus root")?)?;
    let (cfg, llm) = client(&require(args.backend.backend, &d.backend, "backend config")?)?;
    let llm = llm.with_max_in_flight(args.parallelism.max(1));
    let generation = generation_config(
        &cfg,
        args.pin.vtkjs_version.as_deref().or(d.vtkjs_version.as_deref()),
        args.pin.cdn_url_template.as_deref().or(d.cdn_url_template.as_deref()),
        !args.pin.omit_plan,
    );
    generation.validate()?;
    let workflow = PipelineWorkflow {
        corpus: Arc::new(corpus),
        planner: llm.clone(),
        generator: llm,
        generation,
        k: args.k.or(d.k).unwrap_or(DEFAULT_K),
        weight_mode: args.weight_mode.or(d.weight_mode).unwrap_or_default(),
        plan_options: PlanOptions::default(),
    };
    let arms = if args.no_rag {
        vec![Arm::NoRag]
    } else if args.rag_only {
        vec![Arm::Rag]
    } else {
        vec![Arm::Rag, Arm::NoRag]
    };
    let options = BenchOptions {
        arms,
        corrected_dir: args.corrected.or_else(|| d.corrected.clone()),
        diff: args.diff.options(),
        parallelism: args.parallelism,
    };
    let table = bench(&cases, &workflow, &options).await?;
    let failed = table.rows().filter(|r| r.error.is_some()).count();
    if failed > 0 {
        tracing::warn!(failed, "some benchmark runs failed");
    }
    match &args.output {
        Some(out) => {
            table.write_csv(out)?;
            let mirror = args.json.clone().unwrap_or_else(|| out.with_extension("json"));
            table.write_json(&mirror)?;
        }
        None => {
            print_stdout(&table.to_csv()?)?;
            if let Some(j) = &args.json {
                table.write_json(j)?;
            }
        }
    }
    Ok(())
}

async fn serve_cmd(args: ServeArgs) -> Result<()> {
    let cfg = ServeConfig::load(&args.config)?;
    tracing::debug!(?cfg, "effective service configuration");
    let svc = Arc::new(cfg.build_service()?);
    let app = crate::service::api::router(svc, cfg.static_dir.clone());
    let addr = args.listen.unwrap_or(cfg.listen);
    let listener = tokio::net::TcpListener::bind(&addr)
        .await
        .map_err(|e| Error::Storage(format!("binding {addr}: {e}")))?;
    tracing::info!(%addr, "listening");
    axum::serve(listener, app)
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
        .map_err(|e| Error::Storage(e.to_string()))
}

pub async fn run(cli: Cli) -> Result<()> {
    let defaults = CliDefaults::discover(Path::new("."))?;
    tracing::debug!(?defaults, "defaults from {}", crate::config::DEFAULT_CONFIG_FILE);
    match cli.command {
        Command::Index(a) => index(a),
        Command::Plan(a) => plan_cmd(a, &defaults).await,
        Command::Retrieve(a) => retrieve_cmd(a, &defaults).await,
        Command::Generate(a) => generate_cmd(a, &defaults).await,
        Command::Evaluate(a) => evaluate_cmd(a, &defaults).await,
        Command::Bench(a) => bench_cmd(a, &defaults).await,
        Command::Serve(a) => serve_cmd(a).await,
    }
}
