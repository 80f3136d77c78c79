//! Grading reports, human error annotations and ground-truth cases.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use serde::{Deserialize, Serialize};

use crate::corpus::Category;
use crate::generate::fill_template;
use crate::prompt::{fenced_blocks, Prompt};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Dimension {
    Functionality,
    VisualFidelity,
    CodeQuality,
}

impl Dimension {
    pub const ALL: [Dimension; 3] = [
        Dimension::Functionality,
        Dimension::VisualFidelity,
        Dimension::CodeQuality,
    ];

    pub fn key(self) -> &'static str {
        match self {
            Dimension::Functionality => "functionality",
            Dimension::VisualFidelity => "visual_fidelity",
            Dimension::CodeQuality => "code_quality",
        }
    }
}

impl fmt::Display for Dimension {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.key())
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct GradeReasoning {
    pub functionality: String,
    pub visual_fidelity: String,
    pub code_quality: String,
}

/// Scores in [0, 1] for the three grading dimensions. Fields are private so
/// that a report outside the bounds cannot be built.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawGradeReport")]
pub struct GradeReport {
    functionality: f64,
    visual_fidelity: f64,
    code_quality: f64,
    reasoning: GradeReasoning,
    grader_model: String,
}

#[derive(Deserialize)]
struct RawGradeReport {
    functionality: f64,
    visual_fidelity: f64,
    code_quality: f64,
    #[serde(default)]
    reasoning: GradeReasoning,
    #[serde(default)]
    grader_model: String,
}

impl TryFrom<RawGradeReport> for GradeReport {
    type Error = GradeError;

    fn try_from(r: RawGradeReport) -> Result<Self, Self::Error> {
        GradeReport::new(
            [r.functionality, r.visual_fidelity, r.code_quality],
            r.reasoning,
            r.grader_model,
        )
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum GradeError {
    #[error("could not read grades from the grader output: {reason}")]
    Parse { raw: String, reason: String },
    #[error("{dimension} score {value} is outside [0.0, 1.0]")]
    ScoreOutOfRange { dimension: Dimension, value: f64 },
}

impl GradeReport {
    /// `scores` in [`Dimension::ALL`] order.
    pub fn new(scores: [f64; 3], reasoning: GradeReasoning, grader_model: String) -> Result<Self, GradeError> {
        for (dimension, value) in Dimension::ALL.into_iter().zip(scores) {
            if !(0.0..=1.0).contains(&value) {
                return Err(GradeError::ScoreOutOfRange { dimension, value });
            }
        }
        Ok(GradeReport {
            functionality: scores[0],
            visual_fidelity: scores[1],
            code_quality: scores[2],
            reasoning,
            grader_model,
        })
    }

    pub fn score(&self, d: Dimension) -> f64 {
        match d {
            Dimension::Functionality => self.functionality,
            Dimension::VisualFidelity => self.visual_fidelity,
            Dimension::CodeQuality => self.code_quality,
        }
    }

    pub fn functionality(&self) -> f64 {
        self.functionality
    }

    pub fn visual_fidelity(&self) -> f64 {
        self.visual_fidelity
    }

    pub fn code_quality(&self) -> f64 {
        self.code_quality
    }

    pub fn reasoning(&self) -> &GradeReasoning {
        &self.reasoning
    }

    pub fn grader_model(&self) -> &str {
        &self.grader_model
    }
}

/// Error taxonomy for human annotation, ordered from easiest to hardest to fix.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ErrorCategory {
    ModuleImport,
    Parameterization,
    ApiHallucination,
    WrongIntent,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ErrorAnnotation {
    pub category: ErrorCategory,
    #[serde(default)]
    pub note: String,
    #[serde(default)]
    pub line_refs: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroundTruthCase {
    pub id: String,
    pub description: String,
    pub reference_code: String,
    pub category: Category,
}

pub const GRADING_TEMPLATE: &str = include_str!("../templates/grading_prompt.txt");

pub const GRADING_SYSTEM: &str =
    "You are a strict reviewer of vtk.js scientific visualization code.";

pub fn grading_prompt(generated: &str, case: &GroundTruthCase) -> Prompt {
    Prompt {
        system: GRADING_SYSTEM.to_string(),
        user: fill_template(
            GRADING_TEMPLATE,
            &[
                ("description", case.description.trim()),
                ("reference", case.reference_code.trim_end()),
                ("generated", generated.trim_end()),
            ],
        ),
    }
}

#[derive(Deserialize)]
#[serde(untagged)]
enum DimensionValue {
    Detailed {
        score: f64,
        #[serde(default)]
        reasoning: String,
    },
    Bare(f64),
}

pub fn parse_grade_output(raw: &str, grader_model: &str) -> Result<GradeReport, GradeError> {
    let parse_err = |reason: String| GradeError::Parse {
        raw: raw.to_string(),
        reason,
    };
    let body = fenced_blocks(raw)
        .into_iter()
        .find(|b| b.body.trim_start().starts_with('{'))
        .map(|b| b.body)
        .or_else(|| {
            let s = raw.find('{')?;
            let e = raw.rfind('}')?;
            (e > s).then(|| &raw[s..=e])
        })
        .ok_or_else(|| parse_err("no JSON object found".into()))?;
    let doc: serde_json::Map<String, serde_json::Value> =
        serde_json::from_str(body).map_err(|e| parse_err(format!("{e}")))?;

    let mut scores = [0.0; 3];
    let mut reasons: [String; 3] = Default::default();
    for (i, d) in Dimension::ALL.into_iter().enumerate() {
        let v = doc
            .get(d.key())
            .ok_or_else(|| parse_err(format!("missing `{}`", d.key())))?;
        let parsed: DimensionValue = serde_json::from_value(v.clone())
            .map_err(|_| parse_err(format!("`{}` has no numeric score", d.key())))?;
        match parsed {
            DimensionValue::Detailed { score, reasoning } => {
                scores[i] = score;
                reasons[i] = reasoning;
            }
            DimensionValue::Bare(score) => scores[i] = score,
        }
    }
    let [functionality, visual_fidelity, code_quality] = reasons;
    GradeReport::new(
        scores,
        GradeReasoning {
            functionality,
            visual_fidelity,
            code_quality,
        },
        grader_model.to_string(),
    )
}
