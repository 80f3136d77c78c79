use vispipe_core::generate::{ConfigError, GenerateError};
use vispipe_core::grade::GradeError;
use vispipe_core::plan::PlanError;
use vispipe_core::retrieve::RetrieveError;
use vispipe_core::session::SessionError;

use crate::io::LoadError;
use crate::llm::LlmError;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error(transparent)]
    Plan(#[from] PlanError),
    #[error(transparent)]
    Retrieve(#[from] RetrieveError),
    #[error(transparent)]
    Generate(#[from] GenerateError),
    #[error(transparent)]
    Grade(#[from] GradeError),
    #[error(transparent)]
    Session(#[from] SessionError),
    #[error(transparent)]
    GenerationConfig(#[from] ConfigError),
    #[error(transparent)]
    Llm(#[from] LlmError),
    #[error(transparent)]
    Load(#[from] LoadError),
    #[error("{0} not found")]
    NotFound(String),
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("storage error: {0}")]
    Storage(String),
}

/// Broad failure class, used for exit codes and HTTP statuses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kind {
    Domain,
    StageOrder,
    NotFound,
    Transport,
    Storage,
}

impl Error {
    /// Machine-readable error name.
    pub fn code(&self) -> &'static str {
        match self {
            Error::Plan(PlanError::Parse { .. }) => "PlanParseError",
            Error::Plan(PlanError::Validation { .. }) => "PlanValidationError",
            Error::Retrieve(RetrieveError::EmptyCorpus) => "EmptyCorpus",
            Error::Retrieve(RetrieveError::ZeroK) => "InvalidK",
            Error::Retrieve(RetrieveError::BaselineParse { .. }) => "BaselineParseError",
            Error::Generate(GenerateError::Extraction { .. }) => "ExtractionError",
            Error::Generate(_) => "ArtifactContractError",
            Error::Grade(GradeError::Parse { .. }) => "GradeParseError",
            Error::Grade(GradeError::ScoreOutOfRange { .. }) => "ScoreOutOfRange",
            Error::Session(SessionError::StageOrder { .. }) => "StageOrderError",
            Error::Session(SessionError::RejectUnknownId(_)) => "RejectUnknownId",
            Error::Session(SessionError::InvalidPlan(_)) => "PlanValidationError",
            Error::Session(SessionError::ContextMismatch(_)) => "ContextMismatch",
            Error::Session(SessionError::EmptyQuery) => "EmptyQuery",
            Error::GenerationConfig(_) => "GenerationConfigError",
            Error::Llm(e) => e.code(),
            Error::Load(e) => e.code(),
            Error::NotFound(_) => "NotFound",
            Error::Invalid(_) => "InvalidInput",
            Error::Storage(_) => "StorageError",
        }
    }

    pub fn kind(&self) -> Kind {
        match self {
            Error::Session(SessionError::StageOrder { .. } | SessionError::RejectUnknownId(_)) => Kind::StageOrder,
            Error::NotFound(_) => Kind::NotFound,
            Error::Llm(LlmError::InvalidRequest(_)) => Kind::Domain,
            Error::Llm(_) => Kind::Transport,
            Error::Load(LoadError::Io { .. }) => Kind::Transport,
            Error::Storage(_) => Kind::Storage,
            _ => Kind::Domain,
        }
    }

    /// 1 for domain errors (validation, parsing), 2 for transport and IO.
    pub fn exit_code(&self) -> i32 {
        match self.kind() {
            Kind::Transport | Kind::Storage => 2,
            _ => 1,
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Storage(e.to_string())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
