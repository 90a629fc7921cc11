use thiserror::Error;

#[derive(Debug, Error)]
pub enum OtError {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("infeasible marginals: total mass differs by {defect:e}")]
    Infeasible { defect: f64 },

    #[error("cost matrix has a non-finite entry at ({i}, {j})")]
    NonFiniteCost { i: usize, j: usize },

    #[error("instance has {cells} cost entries, above the cap of {cap}")]
    SizeCap { cells: usize, cap: usize },

    #[error("network simplex exceeded {0} iterations")]
    IterationLimit(usize),

    #[error("unsupported cost: {0}")]
    UnsupportedCost(String),

    #[error("chain is not distinct: {0}")]
    ChainNotDistinct(String),

    #[error("perturbation {t} outside the feasible window [{lower}, {upper}]")]
    OutsideSlack { t: f64, lower: f64, upper: f64 },

    #[error("marginal mismatch: {0}")]
    MarginalMismatch(String),

    #[error("plan splits the mass of source {0}; it is not induced by a map")]
    NotAMap(usize),

    #[error("internal inconsistency: {0}")]
    Inconsistent(String),
}

pub type Result<T> = std::result::Result<T, OtError>;
