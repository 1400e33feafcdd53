use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    Dimension { expected: usize, found: usize },

    #[error("matrix is not unitary (max |U†U - I| = {deviation:e})")]
    NotUnitary { deviation: f64 },

    #[error("invalid bit string {0:?}: expected a non-empty string of '0'/'1'")]
    InvalidBits(String),

    #[error("invalid truth table {0:?}: expected 2^m characters '0'/'1' with m >= 1")]
    InvalidTable(String),

    #[error("arity mismatch: expected {expected}, found {found}")]
    Arity { expected: String, found: usize },

    #[error("size limit exceeded: {what} = {value}, maximum {max}")]
    Size { what: &'static str, value: usize, max: usize },

    #[error("{what} = {value} is out of range {min}..={max}")]
    Range { what: &'static str, value: usize, min: usize, max: usize },

    #[error("invalid machine: {0}")]
    InvalidMachine(String),

    #[error("invalid circuit: {0}")]
    InvalidCircuit(String),

    #[error("machine is stuck: no rule for configuration {0}")]
    Stuck(String),

    #[error("machine did not halt within {steps} steps")]
    Timeout { steps: usize },

    #[error("cannot measure: {0}")]
    Measure(String),

    #[error("structure not recognized: {0}")]
    Structure(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
