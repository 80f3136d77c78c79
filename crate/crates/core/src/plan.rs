//! Weighted pipeline plans: schema, validation, weight tiers and parsing of
//! planner model output.

use alloc::boxed::Box;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;
use core::ops::RangeInclusive;

use serde::{Deserialize, Serialize};

use crate::digest::sha256_hex;
use crate::modules::is_module_name;
use crate::prompt::{fenced_blocks, Prompt};

pub const MIN_WEIGHT: i64 = 1;
pub const MAX_WEIGHT: i64 = 10;

/// One planned step of the visualization pipeline.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PipelineNode {
    pub phase: String,
    pub name: String,
    pub modules: Vec<String>,
    /// Kept signed so that out-of-range input survives parsing and can be
    /// reported by [`validate_plan`].
    pub weight: i64,
    pub description: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PipelinePlan {
    pub query: String,
    pub nodes: Vec<PipelineNode>,
}

impl PipelinePlan {
    /// Stable identifier of the plan contents.
    pub fn digest(&self) -> String {
        let bytes = serde_json::to_vec(self).expect("plan serializes");
        sha256_hex(&bytes)
    }

    pub fn total_weight(&self) -> i64 {
        self.nodes.iter().map(|n| n.weight).sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WeightTier {
    CoreProcess,
    ContextualConfiguration,
    SceneManagement,
}

impl WeightTier {
    pub const ALL: [WeightTier; 3] = [
        WeightTier::CoreProcess,
        WeightTier::ContextualConfiguration,
        WeightTier::SceneManagement,
    ];

    pub fn range(self) -> RangeInclusive<i64> {
        match self {
            WeightTier::CoreProcess => 8..=10,
            WeightTier::ContextualConfiguration => 5..=7,
            WeightTier::SceneManagement => 1..=4,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            WeightTier::CoreProcess => "core_process",
            WeightTier::ContextualConfiguration => "contextual_configuration",
            WeightTier::SceneManagement => "scene_management",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
#[error("weight {0} is outside [1, 10]")]
pub struct OutOfRange(pub i64);

pub fn tier_of(weight: i64) -> Result<WeightTier, OutOfRange> {
    WeightTier::ALL
        .into_iter()
        .find(|t| t.range().contains(&weight))
        .ok_or(OutOfRange(weight))
}

/// One broken invariant. `node` is `None` for plan-level problems.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub node: Option<usize>,
    pub field: String,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.node {
            Some(i) => write!(f, "node {i} / {}: {}", self.field, self.message),
            None => write!(f, "plan / {}: {}", self.field, self.message),
        }
    }
}

/// Every invariant violation in `plan`; empty means valid.
pub fn validate_plan(plan: &PipelinePlan) -> Vec<Violation> {
    let mut out = Vec::new();
    if plan.nodes.is_empty() {
        out.push(Violation {
            node: None,
            field: "nodes".into(),
            message: "plan has no nodes".into(),
        });
    }
    for (i, n) in plan.nodes.iter().enumerate() {
        let mut push = |field: &str, message: String| {
            out.push(Violation {
                node: Some(i),
                field: field.to_string(),
                message,
            })
        };
        if n.phase.trim().is_empty() {
            push("phase", "empty phase".into());
        }
        if n.name.trim().is_empty() {
            push("name", "empty name".into());
        }
        if n.modules.is_empty() {
            push("modules", "no candidate modules".into());
        }
        for m in &n.modules {
            if !is_module_name(m) {
                push("modules", format!("`{m}` is not a vtk.js module name"));
            }
        }
        if !(MIN_WEIGHT..=MAX_WEIGHT).contains(&n.weight) {
            push("weight", format!("weight {} is outside [1, 10]", n.weight));
        }
    }
    out
}

/// Each node's weight divided by the total, in node order.
pub fn normalize_weights(plan: &PipelinePlan) -> Vec<f64> {
    let total = plan.total_weight() as f64;
    plan.nodes.iter().map(|n| n.weight as f64 / total).collect()
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum PlanError {
    #[error("planner output is not a plan: {reason}")]
    Parse { raw: String, reason: String },
    #[error("plan violates the node schema: {}", .violations.first().map(|v| v.to_string()).unwrap_or_default())]
    Validation {
        violations: Vec<Violation>,
        /// The first offending node.
        node: Option<Box<PipelineNode>>,
    },
}

#[derive(Deserialize)]
#[serde(untagged)]
enum PlanDoc {
    Full { nodes: Vec<PipelineNode> },
    Bare(Vec<PipelineNode>),
}

/// Extracts the plan from planner output: the first fenced JSON block, or the
/// whole output when it is a bare JSON document. The user's `query` always
/// replaces whatever the model echoed.
pub fn parse_plan_output(raw: &str, query: &str) -> Result<PipelinePlan, PlanError> {
    let parse_err = |reason: String| PlanError::Parse {
        raw: raw.to_string(),
        reason,
    };
    let body = match fenced_blocks(raw)
        .into_iter()
        .find(|b| b.lang.is_empty() || b.lang.eq_ignore_ascii_case("json"))
    {
        Some(block) => block.body,
        None => {
            let t = raw.trim();
            if t.starts_with('{') || t.starts_with('[') {
                t
            } else {
                return Err(parse_err("no fenced JSON block found".into()));
            }
        }
    };
    let doc: PlanDoc =
        serde_json::from_str(body).map_err(|e| parse_err(format!("{e}")))?;
    let nodes = match doc {
        PlanDoc::Full { nodes } | PlanDoc::Bare(nodes) => nodes,
    };
    let plan = PipelinePlan {
        query: query.to_string(),
        nodes,
    };
    check_plan(plan)
}

/// Passes a plan through [`validate_plan`], turning violations into an error
/// that carries the first offending node.
pub fn check_plan(plan: PipelinePlan) -> Result<PipelinePlan, PlanError> {
    let violations = validate_plan(&plan);
    if violations.is_empty() {
        return Ok(plan);
    }
    let node = violations
        .iter()
        .find_map(|v| v.node)
        .and_then(|i| plan.nodes.get(i).cloned().map(Box::new));
    Err(PlanError::Validation { violations, node })
}

pub const PLANNING_TEMPLATE: &str = include_str!("../templates/planning_prompt.txt");

/// Prompt asking the planner model for a plan of `query`.
pub fn planning_prompt(query: &str) -> Prompt {
    Prompt {
        system: PLANNING_TEMPLATE.trim_end().to_string(),
        user: format!("User request:\n{}", query.trim()),
    }
}

/// Follow-up message used for the single re-prompt after unparseable output.
pub fn planning_retry_message(error: &PlanError) -> String {
    format!(
        "Your previous answer could not be used ({error}). Reply again with only one fenced ```json block containing {{\"nodes\": [...]}} that follows the schema."
    )
}
