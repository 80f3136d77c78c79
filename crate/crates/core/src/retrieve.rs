//! Structure-aware example retrieval by weighted module matching, plus prompt
//! and parsing support for the model-driven semantic baseline.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::corpus::{Corpus, CorpusEntry};
use crate::digest::sha256_hex;
use crate::plan::PipelinePlan;
use crate::prompt::{fenced_blocks, Prompt};

pub const DEFAULT_K: usize = 3;

/// Which weight a node contributes per hit: its integer weight, or that
/// weight divided by the plan's total.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WeightMode {
    #[default]
    Raw,
    Normalized,
}

impl core::str::FromStr for WeightMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "raw" => Ok(WeightMode::Raw),
            "normalized" => Ok(WeightMode::Normalized),
            other => Err(format!("unknown weight mode `{other}`")),
        }
    }
}

/// How candidate scores were produced.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scoring {
    #[default]
    ModuleMatch,
    /// Scores are rank positions (k, k-1, ...) assigned to the model's list;
    /// they carry no similarity meaning.
    SemanticRankPosition,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct NodeHit {
    pub node: usize,
    pub hits: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoredCandidate {
    pub entry_id: String,
    pub score: f64,
    /// Nodes with at least one hit, in node order.
    pub node_hits: Vec<NodeHit>,
}

impl ScoredCandidate {
    pub fn total_hits(&self) -> usize {
        self.node_hits.iter().map(|h| h.hits).sum()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RetrievalResult {
    pub plan_digest: String,
    pub k: usize,
    pub weight_mode: WeightMode,
    #[serde(default)]
    pub scoring: Scoring,
    pub candidates: Vec<ScoredCandidate>,
}

impl RetrievalResult {
    pub fn ids(&self) -> impl Iterator<Item = &str> {
        self.candidates.iter().map(|c| c.entry_id.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum RetrieveError {
    #[error("the corpus has no entries")]
    EmptyCorpus,
    #[error("k must be at least 1")]
    ZeroK,
    #[error("could not read a ranked id list from the model output: {reason}")]
    BaselineParse { raw: String, reason: String },
}

/// Size of the overlap between an entry's modules and a node's candidates.
/// Duplicates in `node_modules` count once.
pub fn count_hits(entry_modules: &[String], node_modules: &[String]) -> usize {
    let node: BTreeSet<&str> = node_modules.iter().map(String::as_str).collect();
    let entry: BTreeSet<&str> = entry_modules.iter().map(String::as_str).collect();
    node.intersection(&entry).count()
}

/// Ranks corpus entries against `plan` and keeps the top `k`.
pub fn retrieve(
    corpus: &Corpus,
    plan: &PipelinePlan,
    k: usize,
    mode: WeightMode,
) -> Result<RetrievalResult, RetrieveError> {
    retrieve_excluding(corpus, plan, k, mode, &BTreeSet::new())
}

/// [`retrieve`] with `excluded` entry ids removed from the pool before ranking.
pub fn retrieve_excluding(
    corpus: &Corpus,
    plan: &PipelinePlan,
    k: usize,
    mode: WeightMode,
    excluded: &BTreeSet<String>,
) -> Result<RetrievalResult, RetrieveError> {
    if corpus.is_empty() {
        return Err(RetrieveError::EmptyCorpus);
    }
    if k == 0 {
        return Err(RetrieveError::ZeroK);
    }

    // candidate pool: every entry holding at least one module of some node
    let mut pool: BTreeMap<&str, &CorpusEntry> = BTreeMap::new();
    for node in &plan.nodes {
        for m in &node.modules {
            for id in corpus.lookup(m) {
                if excluded.contains(id) {
                    continue;
                }
                if let Some(entry) = corpus.get(id) {
                    pool.insert(id, entry);
                }
            }
        }
    }

    let total_weight = plan.total_weight() as f64;
    let mut candidates: Vec<ScoredCandidate> = pool
        .into_values()
        .map(|entry| {
            let mut raw = 0i64;
            let mut node_hits = Vec::new();
            for (i, node) in plan.nodes.iter().enumerate() {
                let hits = count_hits(&entry.modules, &node.modules);
                if hits > 0 {
                    raw += hits as i64 * node.weight;
                    node_hits.push(NodeHit { node: i, hits });
                }
            }
            let score = match mode {
                WeightMode::Raw => raw as f64,
                // one division per candidate keeps equal raw scores equal
                WeightMode::Normalized => raw as f64 / total_weight,
            };
            ScoredCandidate {
                entry_id: entry.id.clone(),
                score,
                node_hits,
            }
        })
        .collect();

    candidates.sort_by(rank_order);
    candidates.truncate(k);
    Ok(RetrievalResult {
        plan_digest: plan.digest(),
        k,
        weight_mode: mode,
        scoring: Scoring::ModuleMatch,
        candidates,
    })
}

/// Score descending, then entry id ascending.
pub fn rank_order(a: &ScoredCandidate, b: &ScoredCandidate) -> Ordering {
    b.score
        .partial_cmp(&a.score)
        .unwrap_or(Ordering::Equal)
        .then_with(|| a.entry_id.cmp(&b.entry_id))
}

pub const BASELINE_TEMPLATE: &str = include_str!("../templates/baseline_prompt.txt");

/// Prompt for the semantic baseline: every entry's id and description plus the query.
pub fn baseline_prompt(corpus: &Corpus, query: &str, k: usize) -> Prompt {
    let mut listing = String::new();
    for e in corpus.entries() {
        listing.push_str(&format!("- id: {}\n  summary: {}\n", e.id, e.description.trim()));
    }
    Prompt {
        system: BASELINE_TEMPLATE.trim_end().replace("{k}", &k.to_string()),
        user: format!("Examples:\n{listing}\nRequest:\n{}", query.trim()),
    }
}

/// Turns the model's ranked id list into a result. Unknown ids are dropped;
/// survivors keep their order and get scores k, k-1, ...
pub fn parse_baseline_output(
    raw: &str,
    corpus: &Corpus,
    query: &str,
    k: usize,
) -> Result<RetrievalResult, RetrieveError> {
    let parse_err = |reason: &str| RetrieveError::BaselineParse {
        raw: raw.to_string(),
        reason: reason.to_string(),
    };
    if k == 0 {
        return Err(RetrieveError::ZeroK);
    }
    if raw.trim().is_empty() {
        return Err(parse_err("empty response"));
    }
    let body = fenced_blocks(raw)
        .into_iter()
        .map(|b| b.body)
        .find(|b| b.trim_start().starts_with('['))
        .or_else(|| {
            let start = raw.find('[')?;
            let end = raw.rfind(']')?;
            (end > start).then(|| &raw[start..=end])
        })
        .ok_or_else(|| parse_err("no JSON list of ids found"))?;
    let ids: Vec<String> =
        serde_json::from_str(body).map_err(|_| parse_err("id list is not a JSON array of strings"))?;

    let mut seen = BTreeSet::new();
    let candidates = ids
        .into_iter()
        .filter(|id| corpus.get(id).is_some() && seen.insert(id.clone()))
        .take(k)
        .enumerate()
        .map(|(rank, entry_id)| ScoredCandidate {
            entry_id,
            score: (k - rank) as f64,
            node_hits: Vec::new(),
        })
        .collect();
    Ok(RetrievalResult {
        plan_digest: format!("query:{}", sha256_hex(query.as_bytes())),
        k,
        weight_mode: WeightMode::Raw,
        scoring: Scoring::SemanticRankPosition,
        candidates,
    })
}
