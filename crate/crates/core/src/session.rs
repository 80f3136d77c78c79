//! Human-in-the-loop session state machine.
//!
//! A session moves through `created → planned → retrieved → generated →
//! corrected → evaluated`. Redoing a stage clears everything downstream of it
//! and moves the status back to that stage.

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use serde::{Deserialize, Serialize};

use crate::diff::CostReport;
use crate::generate::GeneratedArtifact;
use crate::grade::{ErrorAnnotation, GradeReport};
use crate::plan::{validate_plan, PipelinePlan, Violation};
use crate::retrieve::RetrievalResult;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SessionStatus {
    Created,
    Planned,
    Retrieved,
    Generated,
    Corrected,
    Evaluated,
}

impl SessionStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            SessionStatus::Created => "created",
            SessionStatus::Planned => "planned",
            SessionStatus::Retrieved => "retrieved",
            SessionStatus::Generated => "generated",
            SessionStatus::Corrected => "corrected",
            SessionStatus::Evaluated => "evaluated",
        }
    }
}

impl fmt::Display for SessionStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Transition {
    pub status: SessionStatus,
    pub at: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Evaluation {
    /// Present when a human correction existed at evaluation time.
    pub cost: Option<CostReport>,
    /// Present when a grading backend was configured.
    pub grade: Option<GradeReport>,
    /// Human ratings on the same three dimensions.
    #[serde(default)]
    pub human: Option<GradeReport>,
    #[serde(default)]
    pub annotations: Vec<ErrorAnnotation>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Session {
    pub id: String,
    pub query: String,
    /// Ground-truth case this session is graded against, if any.
    #[serde(default)]
    pub case_id: Option<String>,
    pub plan: Option<PipelinePlan>,
    pub retrieval: Option<RetrievalResult>,
    /// Every entry id any retrieval of this session has returned.
    #[serde(default)]
    pub seen_ids: BTreeSet<String>,
    #[serde(default)]
    pub rejected_ids: BTreeSet<String>,
    pub artifact: Option<GeneratedArtifact>,
    pub edited_html: Option<String>,
    pub evaluation: Option<Evaluation>,
    pub status: SessionStatus,
    pub transitions: Vec<Transition>,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SessionError {
    #[error("stage `{missing}` must run first")]
    StageOrder { missing: SessionStatus },
    #[error("entry `{0}` was never retrieved in this session")]
    RejectUnknownId(String),
    #[error("plan is invalid: {}", .0.first().map(|v| v.to_string()).unwrap_or_default())]
    InvalidPlan(Vec<Violation>),
    #[error("artifact context id `{0}` is not in the current retrieval")]
    ContextMismatch(String),
    #[error("query is empty")]
    EmptyQuery,
}

impl Session {
    pub fn new(id: String, query: String, now: &str) -> Result<Self, SessionError> {
        if query.trim().is_empty() {
            return Err(SessionError::EmptyQuery);
        }
        Ok(Session {
            id,
            query,
            case_id: None,
            plan: None,
            retrieval: None,
            seen_ids: BTreeSet::new(),
            rejected_ids: BTreeSet::new(),
            artifact: None,
            edited_html: None,
            evaluation: None,
            status: SessionStatus::Created,
            transitions: alloc::vec![Transition {
                status: SessionStatus::Created,
                at: now.to_string(),
            }],
        })
    }

    fn enter(&mut self, status: SessionStatus, now: &str) {
        self.status = status;
        self.transitions.push(Transition {
            status,
            at: now.to_string(),
        });
    }

    fn clear_after(&mut self, stage: SessionStatus) {
        if stage < SessionStatus::Retrieved {
            self.retrieval = None;
        }
        if stage < SessionStatus::Generated {
            self.artifact = None;
        }
        if stage < SessionStatus::Corrected {
            self.edited_html = None;
        }
        self.evaluation = None;
    }

    /// Installs a planner-produced or human-edited plan.
    pub fn set_plan(&mut self, plan: PipelinePlan, now: &str) -> Result<(), SessionError> {
        let violations = validate_plan(&plan);
        if !violations.is_empty() {
            return Err(SessionError::InvalidPlan(violations));
        }
        self.plan = Some(plan);
        self.clear_after(SessionStatus::Planned);
        self.enter(SessionStatus::Planned, now);
        Ok(())
    }

    pub fn require_plan(&self) -> Result<&PipelinePlan, SessionError> {
        self.plan.as_ref().ok_or(SessionError::StageOrder {
            missing: SessionStatus::Planned,
        })
    }

    pub fn require_retrieval(&self) -> Result<&RetrievalResult, SessionError> {
        self.retrieval.as_ref().ok_or(SessionError::StageOrder {
            missing: SessionStatus::Retrieved,
        })
    }

    pub fn require_artifact(&self) -> Result<&GeneratedArtifact, SessionError> {
        self.artifact.as_ref().ok_or(SessionError::StageOrder {
            missing: SessionStatus::Generated,
        })
    }

    pub fn set_retrieval(&mut self, result: RetrievalResult, now: &str) -> Result<(), SessionError> {
        self.require_plan()?;
        self.seen_ids
            .extend(result.candidates.iter().map(|c| c.entry_id.clone()));
        self.retrieval = Some(result);
        self.clear_after(SessionStatus::Retrieved);
        self.enter(SessionStatus::Retrieved, now);
        Ok(())
    }

    /// Replaces the rejection set. Takes effect on the next retrieval.
    pub fn set_rejections(&mut self, ids: BTreeSet<String>) -> Result<(), SessionError> {
        self.require_retrieval()?;
        if let Some(unknown) = ids.iter().find(|id| !self.seen_ids.contains(*id)) {
            return Err(SessionError::RejectUnknownId(unknown.clone()));
        }
        self.rejected_ids = ids;
        Ok(())
    }

    pub fn set_artifact(&mut self, artifact: GeneratedArtifact, now: &str) -> Result<(), SessionError> {
        let retrieval = self.require_retrieval()?;
        if let Some(bad) = artifact
            .context_ids
            .iter()
            .find(|id| !retrieval.ids().any(|r| r == id.as_str()))
        {
            return Err(SessionError::ContextMismatch(bad.clone()));
        }
        self.artifact = Some(artifact);
        self.clear_after(SessionStatus::Generated);
        self.enter(SessionStatus::Generated, now);
        Ok(())
    }

    pub fn set_correction(&mut self, html: String, now: &str) -> Result<(), SessionError> {
        self.require_artifact()?;
        self.edited_html = Some(html);
        self.clear_after(SessionStatus::Corrected);
        self.enter(SessionStatus::Corrected, now);
        Ok(())
    }

    pub fn set_evaluation(&mut self, evaluation: Evaluation, now: &str) -> Result<(), SessionError> {
        self.require_artifact()?;
        self.evaluation = Some(evaluation);
        self.enter(SessionStatus::Evaluated, now);
        Ok(())
    }

    /// All broken invariants, as human-readable messages.
    pub fn invariant_violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        let s = self.status;
        let mut expect = |ok: bool, msg: &str| {
            if !ok {
                out.push(format!("{}: {msg}", self.id));
            }
        };
        expect(!self.id.is_empty(), "empty id");
        expect(!self.query.trim().is_empty(), "empty query");
        expect(self.plan.is_some() == (s >= SessionStatus::Planned), "plan presence does not match status");
        expect(
            self.retrieval.is_some() == (s >= SessionStatus::Retrieved),
            "retrieval presence does not match status",
        );
        expect(
            self.artifact.is_some() == (s >= SessionStatus::Generated),
            "artifact presence does not match status",
        );
        expect(
            self.edited_html.is_none() || s >= SessionStatus::Corrected,
            "correction present before the corrected stage",
        );
        expect(
            s != SessionStatus::Corrected || self.edited_html.is_some(),
            "corrected without a correction",
        );
        expect(
            self.evaluation.is_some() == (s == SessionStatus::Evaluated),
            "evaluation presence does not match status",
        );
        expect(self.rejected_ids.is_subset(&self.seen_ids), "rejected ids were never retrieved");
        if let Some(r) = &self.retrieval {
            expect(
                r.candidates.iter().all(|c| self.seen_ids.contains(&c.entry_id)),
                "retrieved ids missing from the seen set",
            );
        }
        if let Some(p) = &self.plan {
            expect(validate_plan(p).is_empty(), "stored plan is invalid");
        }
        if let (Some(a), Some(r)) = (&self.artifact, &self.retrieval) {
            expect(
                a.context_ids.iter().all(|id| r.ids().any(|x| x == id)),
                "artifact context is not part of the retrieval",
            );
        }
        expect(
            self.transitions.last().map(|t| t.status) == Some(s),
            "last transition does not match status",
        );
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generate::GenerationConfig;
    use crate::plan::PipelineNode;
    use crate::retrieve::{ScoredCandidate, Scoring, WeightMode};
    use alloc::vec;

    fn plan() -> PipelinePlan {
        PipelinePlan {
            query: "q".into(),
            nodes: vec![PipelineNode {
                phase: "P".into(),
                name: "n".into(),
                modules: vec!["vtkActor".into()],
                weight: 3,
                description: String::new(),
            }],
        }
    }

    fn retrieval(ids: &[&str]) -> RetrievalResult {
        RetrievalResult {
            plan_digest: "d".into(),
            k: 3,
            weight_mode: WeightMode::Raw,
            scoring: Scoring::ModuleMatch,
            candidates: ids
                .iter()
                .map(|id| ScoredCandidate {
                    entry_id: id.to_string(),
                    score: 1.0,
                    node_hits: vec![],
                })
                .collect(),
        }
    }

    fn artifact(ctx: &[&str]) -> GeneratedArtifact {
        let c = GenerationConfig::default();
        let html = format!(
            "<!DOCTYPE html><html><script src=\"{}\"></script></html>",
            c.cdn_url()
        );
        GeneratedArtifact::new(html, "p", ctx.iter().map(|s| s.to_string()).collect(), &c, "t".into()).unwrap()
    }

    #[test]
    fn full_walk_keeps_invariants() {
        let mut s = Session::new("s1".into(), "slice".into(), "t0").unwrap();
        assert!(s.invariant_violations().is_empty());
        s.set_plan(plan(), "t1").unwrap();
        s.set_retrieval(retrieval(&["a", "b"]), "t2").unwrap();
        s.set_artifact(artifact(&["a"]), "t3").unwrap();
        s.set_correction("<fixed/>".into(), "t4").unwrap();
        s.set_evaluation(
            Evaluation {
                cost: None,
                grade: None,
                human: None,
                annotations: vec![],
            },
            "t5",
        )
        .unwrap();
        assert_eq!(s.status, SessionStatus::Evaluated);
        assert!(s.invariant_violations().is_empty(), "{:?}", s.invariant_violations());

        // regenerating resets downstream fields
        s.set_retrieval(retrieval(&["b"]), "t6").unwrap();
        assert_eq!(s.status, SessionStatus::Retrieved);
        assert!(s.artifact.is_none() && s.edited_html.is_none() && s.evaluation.is_none());
        assert!(s.invariant_violations().is_empty());
    }

    #[test]
    fn stage_order_errors() {
        let mut s = Session::new("s".into(), "q".into(), "t").unwrap();
        assert_eq!(
            s.set_artifact(artifact(&[]), "t"),
            Err(SessionError::StageOrder {
                missing: SessionStatus::Retrieved
            })
        );
        assert_eq!(
            s.set_retrieval(retrieval(&[]), "t"),
            Err(SessionError::StageOrder {
                missing: SessionStatus::Planned
            })
        );
        assert!(Session::new("s".into(), " ".into(), "t").is_err());
    }

    #[test]
    fn rejections_must_be_known() {
        let mut s = Session::new("s".into(), "q".into(), "t").unwrap();
        s.set_plan(plan(), "t").unwrap();
        assert!(matches!(
            s.set_rejections(["a".to_string()].into()),
            Err(SessionError::StageOrder { .. })
        ));
        s.set_retrieval(retrieval(&["a"]), "t").unwrap();
        assert_eq!(
            s.set_rejections(["zzz".to_string()].into()),
            Err(SessionError::RejectUnknownId("zzz".into()))
        );
        s.set_rejections(["a".to_string()].into()).unwrap();
        assert!(s.invariant_violations().is_empty());
    }

    #[test]
    fn artifact_context_must_come_from_retrieval() {
        let mut s = Session::new("s".into(), "q".into(), "t").unwrap();
        s.set_plan(plan(), "t").unwrap();
        s.set_retrieval(retrieval(&["a"]), "t").unwrap();
        assert_eq!(
            s.set_artifact(artifact(&["b"]), "t"),
            Err(SessionError::ContextMismatch("b".into()))
        );
    }

    #[test]
    fn invalid_plan_rejected() {
        let mut s = Session::new("s".into(), "q".into(), "t").unwrap();
        let mut p = plan();
        p.nodes[0].weight = 0;
        assert!(matches!(s.set_plan(p, "t"), Err(SessionError::InvalidPlan(_))));
        assert_eq!(s.status, SessionStatus::Created);
    }
}
