use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("invalid trajectory: {0}")]
    InvalidTrajectory(String),

    #[error("invalid input sequence: {0}")]
    InvalidInputs(String),

    #[error("choice set is empty")]
    EmptyChoiceSet,

    #[error("trajectory is not a member of the choice set; insert it before evaluating")]
    NotInChoiceSet,

    #[error("invalid belief: {0}")]
    InvalidBelief(String),

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("posterior mass is numerically zero for every hypothesis (beta = {beta})")]
    DegeneratePosterior { beta: f64 },

    #[error("normal equations are singular (lambda = {lambda})")]
    SingularSystem { lambda: f64 },

    #[error("could only build a choice set of {achieved} trajectories, {requested} requested")]
    ChoiceSetTooSmall { requested: usize, achieved: usize },

    #[error("hypothesis lists differ between beliefs")]
    HypothesisMismatch,

    #[error("unknown {kind} `{name}`; expected one of: {valid}")]
    UnknownName {
        kind: &'static str,
        name: String,
        valid: String,
    },

    #[error("parse error on line {line}: {reason}")]
    Parse { line: usize, reason: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("at beta = {beta}, seed = {seed}: {source}")]
    Cell {
        beta: f64,
        seed: u64,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}
