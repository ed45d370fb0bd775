use crate::circuit::Violation;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("input count {0} outside supported range 1..={max}", max = crate::bits::MAX_INPUTS)]
    InputCount(usize),

    #[error("length {0} is not a power of two with at most 64 positions")]
    Length(usize),

    #[error("index {index} out of range for a string of length {len}")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("invalid symbol {0:?}; expected one of '0', '1', '*'")]
    Symbol(char),

    #[error("argument of length {got} is longer than n = {max}")]
    TooLong { got: usize, max: usize },

    #[error("circuit has {circuit} inputs but the pattern needs {pattern}")]
    ArityMismatch { circuit: u8, pattern: u8 },

    #[error("invalid circuit: {}", format_violations(.0))]
    InvalidCircuit(Vec<Violation>),

    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("invalid size prior: {0}")]
    Nu(String),

    #[error("enumeration budget of {budget} circuits exceeded at L={inputs}, g={size}")]
    BudgetExceeded { inputs: u8, size: usize, budget: usize },

    #[error("infeasible: {0}")]
    Infeasible(String),

    #[error("{0}")]
    InvalidArgument(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

fn format_violations(v: &[Violation]) -> String {
    v.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; ")
}
