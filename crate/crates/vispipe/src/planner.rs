//! Intent decomposition: query to validated pipeline plan.

use vispipe_core::plan::{parse_plan_output, planning_prompt, planning_retry_message, PlanError};
use vispipe_core::PipelinePlan;

use crate::error::{Error, Result};
use crate::llm::{ChatMessage, LlmClient};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PlanOptions {
    /// Re-prompt once when the output cannot be parsed.
    pub retry_on_parse_error: bool,
}

impl Default for PlanOptions {
    fn default() -> Self {
        PlanOptions { retry_on_parse_error: true }
    }
}

pub async fn plan(query: &str, llm: &LlmClient, options: PlanOptions) -> Result<PipelinePlan> {
    if query.trim().is_empty() {
        return Err(Error::Invalid("query is empty".into()));
    }
    let prompt = planning_prompt(query);
    let mut messages = LlmClient::prompt_messages(&prompt);
    let first = llm.chat(messages.clone()).await?;
    match parse_plan_output(&first.content, query) {
        Err(err @ PlanError::Parse { .. }) if options.retry_on_parse_error => {
            tracing::warn!(error = %err, "planner output unparseable, re-prompting once");
            messages.push(ChatMessage::assistant(first.content));
            messages.push(ChatMessage::user(planning_retry_message(&err)));
            let second = llm.chat(messages).await?;
            Ok(parse_plan_output(&second.content, query)?)
        }
        other => Ok(other?),
    }
}
