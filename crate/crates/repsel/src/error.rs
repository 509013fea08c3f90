use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("space of size {size} exceeds the enumeration cap {cap}")]
    SpaceTooLarge { size: u128, cap: u64 },

    #[error("solver budget exhausted after {nodes} nodes")]
    BudgetExhausted { nodes: u64 },

    #[error("no program in the space satisfies the examples")]
    Unsat,

    #[error("duplicate input in dataset: {0}")]
    DuplicateInput(String),

    #[error("subset admits no consistent program; conditional probability undefined")]
    UnsatisfiableSubset,

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("training loss became non-finite at step {step}")]
    DivergedLoss { step: u64 },

    #[error("ordering relations are contradictory (cycle)")]
    CyclicData,

    #[error("out of bounds: {0}")]
    OutOfBounds(String),

    #[error("domain error: {0}")]
    DomainError(String),

    #[error("dataset of {len} examples is too large for exhaustive subset search")]
    TooLarge { len: usize },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error("internal error: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, Error>;
