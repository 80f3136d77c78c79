use std::collections::BTreeSet;
use std::time::{Duration, Instant};

use vispipe_core::retrieve::{baseline_prompt, parse_baseline_output, retrieve_excluding};
use vispipe_core::{Corpus, PipelinePlan, RetrievalResult, WeightMode};

use crate::error::{Error, Result};
use crate::llm::LlmClient;

/// Structure-aware retrieval plus the monotonic-clock time it took.
pub fn timed_retrieve(
    corpus: &Corpus,
    plan: &PipelinePlan,
    k: usize,
    mode: WeightMode,
    excluded: &BTreeSet<String>,
) -> Result<(RetrievalResult, Duration)> {
    let started = Instant::now();
    let result = retrieve_excluding(corpus, plan, k, mode, excluded)?;
    Ok((result, started.elapsed()))
}

/// Comparison baseline: the model ranks entries from their descriptions.
pub async fn semantic_retrieve_baseline(
    corpus: &Corpus,
    query: &str,
    llm: &LlmClient,
    k: usize,
) -> Result<RetrievalResult> {
    if corpus.is_empty() {
        return Err(Error::Retrieve(vispipe_core::retrieve::RetrieveError::EmptyCorpus));
    }
    let prompt = baseline_prompt(corpus, query, k);
    let response = llm.chat(LlmClient::prompt_messages(&prompt)).await?;
    Ok(parse_baseline_output(&response.content, corpus, query, k)?)
}
