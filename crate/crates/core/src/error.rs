use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// A conditional distribution does not sum to one (or has entries outside `[0, 1]`).
    #[error("row (s'={s_prev}, x={x}) is not a probability distribution: sum = {sum}")]
    NotStochastic { s_prev: usize, x: usize, sum: f64 },

    #[error("entry {what} = {value} lies outside [0, 1]")]
    OutOfUnitInterval { what: String, value: f64 },

    #[error("next-state table entry f(s'={s_prev}, x={x}, y={y}) = {next} exceeds state count {s_size}")]
    BadNextState {
        s_prev: usize,
        x: usize,
        y: usize,
        next: usize,
        s_size: usize,
    },

    #[error("{what} index {index} out of range (size {size})")]
    Index {
        what: &'static str,
        index: usize,
        size: usize,
    },

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("{0} is outside its domain")]
    Domain(String),

    #[error("{what} needs {needed} entries, over the budget of {limit}")]
    Resource {
        what: &'static str,
        needed: u128,
        limit: u128,
    },

    #[error("joint law is not normalized: total mass {0}")]
    NotNormalized(f64),

    #[error("contract violation: {0}")]
    Contract(String),

    #[error("oracle error: {0}")]
    Oracle(String),

    #[error("parse error: {0}")]
    Parse(String),
}
