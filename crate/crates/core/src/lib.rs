//! Pure building blocks of the vispipe workflow: module scanning, corpus
//! indexing, pipeline plans, weighted module-matching retrieval, prompt
//! assembly, static checks of generated documents, the line-based correction
//! cost, grading reports and the session state machine.
//!
//! Everything here works on in-memory values; file, network and clock access
//! live in the `vispipe` crate.

#![no_std]
#![forbid(unsafe_code)]

extern crate alloc;

pub mod corpus;
pub mod diff;
pub mod digest;
pub mod generate;
pub mod grade;
pub mod html;
pub mod modules;
pub mod plan;
pub mod prompt;
pub mod retrieve;
pub mod session;
pub mod static_check;

pub use corpus::{Category, Corpus, CorpusEntry, CorpusError, EntryMeta};
pub use diff::{correction_cost, DiffOptions, DiffStats, LineMode};
pub use generate::{GeneratedArtifact, GenerationConfig};
pub use grade::{ErrorAnnotation, ErrorCategory, GradeReport, GroundTruthCase};
pub use modules::{extract_modules, is_module_name};
pub use plan::{normalize_weights, tier_of, validate_plan, PipelineNode, PipelinePlan, WeightTier};
pub use prompt::Prompt;
pub use retrieve::{count_hits, retrieve, RetrievalResult, ScoredCandidate, WeightMode};
pub use session::{Session, SessionStatus};
