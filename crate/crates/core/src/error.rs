use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FlgError {
    #[error("invalid input: {0}")]
    Input(String),

    #[error("scalar syntax error at byte {pos}: {msg}")]
    ScalarSyntax { pos: usize, msg: String },

    #[error("unknown vertex {0}")]
    UnknownVertex(usize),

    #[error("facility {facility} out of range (k = {k})")]
    FacilityOutOfRange { facility: usize, k: usize },

    #[error("infeasible client profile: client {client}: {reason}")]
    Infeasible { client: usize, reason: String },

    #[error("client {0} is uncovered and has no waiting time")]
    UncoveredClient(usize),

    #[error("operation requires an unweighted instance (all weights 1)")]
    UnsupportedWeighted,

    #[error("not a permutation of the facilities: {0:?}")]
    NotBijective(Vec<usize>),

    #[error("{what}: size {actual} exceeds guard {limit} (micro instances only)")]
    GuardExceeded { what: String, limit: usize, actual: usize },

    #[error("malformed flow network: {0}")]
    Network(String),

    #[error("certificate error: {0}")]
    Certificate(String),

    #[error("state is not a subgame perfect equilibrium: {0}")]
    NotAnEquilibrium(String),

    #[error("internal invariant violated: {0}")]
    Internal(String),

    #[error("line {line}: {field}: {msg}")]
    Document { line: usize, field: String, msg: String },
}

pub type Result<T> = std::result::Result<T, FlgError>;
