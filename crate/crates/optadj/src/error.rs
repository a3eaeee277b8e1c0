use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("duplicate vertex `{0}`")]
    DuplicateVertex(String),
    #[error("unknown vertex `{0}`")]
    UnknownVertex(String),
    #[error("graph contains a cycle: {}", .0.join(" -> "))]
    Cycle(Vec<String>),
    #[error("vertex sets overlap at `{0}`")]
    Overlap(String),
    #[error("vertex `{vertex}` must have exactly one child, found {children}")]
    NotSingleChild { vertex: String, children: usize },
    #[error("invalid query: {0}")]
    InvalidQuery(String),
    #[error("operation requires a single treatment")]
    JointTreatment,
    #[error("treatment `{0}` is not an ancestor of the outcome")]
    NotAncestor(String),
    #[error("no valid time independent adjustment set exists")]
    NoAdjustmentSet,
    #[error("invalid adjustment set: {0}")]
    InvalidSet(String),
    #[error("{what} {size} exceeds the limit {limit}")]
    GuardExceeded {
        what: &'static str,
        size: u128,
        limit: u128,
    },
    #[error("invalid law: {0}")]
    InvalidLaw(String),
    #[error("hypothesis does not hold: {0}")]
    Hypothesis(String),
    #[error("internal invariant violated: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, Error>;
