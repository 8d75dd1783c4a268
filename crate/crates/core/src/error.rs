use thiserror::Error;

/// Every failure the library reports.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("negative or non-finite entry in factor {0}")]
    NegativeEntry(String),
    #[error("unknown variable {0}")]
    UnknownVariable(String),
    #[error("variable {0} is repeated in a factor scope")]
    RepeatedVariable(String),
    #[error("variable {0} is not used by any factor")]
    IsolatedVariable(String),
    #[error("graph has no variables")]
    EmptyGraph,
    #[error("graph class {found} does not support {wanted}")]
    ClassMismatch { found: String, wanted: String },
    #[error("dimension mismatch on axis {0}")]
    DimensionMismatch(usize),
    #[error("axis {0} requested but not present")]
    UnknownAxis(usize),
    #[error("contraction intermediate of {0} entries exceeds the memory budget")]
    MemoryBudgetExceeded(u128),
    #[error("tensor has no positive entry")]
    ZeroTensor,
    #[error("cycle enumeration exceeded the budget of {0} nodes")]
    EnumerationBudgetExceeded(usize),
    #[error("node {0} not found")]
    NodeNotFound(String),
    #[error("node {0} is not in the neighborhood of {1}")]
    NotInNeighborhood(usize, usize),
    #[error("composite variable of dimension {0} exceeds the budget")]
    AlphabetBlowupExceeded(u128),
    #[error("invalid size: {0}")]
    InvalidSize(String),
    #[error("invalid temperature {0}")]
    InvalidTemperature(f64),
    #[error("inconsistent specification: {0}")]
    InconsistentSpec(String),
    #[error("enumeration of {0} assignments exceeds the budget")]
    BudgetExceeded(u128),
    #[error("syndrome is inconsistent with the code")]
    InconsistentSyndrome,
    #[error("messages on channel {0}->{1} have zero overlap")]
    RescaleImpossible(usize, usize),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
