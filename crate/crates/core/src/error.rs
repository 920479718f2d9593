use thiserror::Error;

/// Errors produced by set construction, norm evaluation and selection.
#[derive(Error, Debug)]
pub enum Error {
    #[error("invalid manifold: {0}")]
    InvalidManifold(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("scale R={r} rejected: {reason}")]
    BadScale { r: u64, reason: String },

    #[error("empty selection")]
    EmptySelection,

    #[error("work budget exceeded: {op} needs ~{needed} units, budget is {budget}")]
    BudgetExceeded {
        op: &'static str,
        needed: u128,
        budget: u128,
    },

    #[error("quadrature resolution {requested} is below the Nyquist-style floor {floor}")]
    UnderResolved { requested: u64, floor: u64 },

    #[error("retry budget exhausted after {attempts} draws: {context}")]
    RetriesExhausted { attempts: u32, context: String },

    #[error("size window violated: got {got}, expected within [{lo}, {hi}] ({context})")]
    SizeWindow {
        got: u64,
        lo: u64,
        hi: u64,
        context: String,
    },

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("serialization error: {0}")]
    Serde(#[from] serde_json::Error),

    #[error("unsupported schema version {found:?}, expected {expected:?}")]
    SchemaMismatch { found: String, expected: String },

    #[error("invalid frequency set: {0}")]
    InvalidSet(String),
}

pub type Result<T> = std::result::Result<T, Error>;
