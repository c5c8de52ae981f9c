use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("malformed FCIDUMP header: {0}")]
    Header(String),

    #[error("FCIDUMP line {line}: {msg}")]
    Integral { line: usize, msg: String },

    #[error("invalid integral set: {0}")]
    InvalidIntegrals(String),

    #[error("index out of range: {0}")]
    IndexOutOfRange(String),

    #[error("occupation mask has popcount {found}, expected {expected}")]
    Popcount { found: u32, expected: u32 },

    #[error("dimension overflow for n={n}, k_alpha={k_alpha}, k_beta={k_beta}")]
    DimensionOverflow { n: u32, k_alpha: u32, k_beta: u32 },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("ansatz line {line}: {msg}")]
    Ansatz { line: usize, msg: String },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("layered mode needs {needed} bytes, budget is {budget} bytes; use overlap mode")]
    MemoryBudget { needed: u128, budget: u128 },

    #[error("dense oracle dimension {dim} exceeds cap {cap}")]
    OracleCap { dim: usize, cap: usize },

    #[error("numerical breakdown: {0}")]
    Numerical(String),
}

pub type Result<T> = std::result::Result<T, Error>;
