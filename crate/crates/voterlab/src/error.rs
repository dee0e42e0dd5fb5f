use thiserror::Error;

#[derive(Debug, Error)]
pub enum VoterlabError {
    #[error("invalid dimension d={0}")]
    InvalidDimension(usize),
    #[error("integral diverges for d={0} (finite only for d >= 5)")]
    DivergentIntegral(usize),
    #[error("scaling h_d is undefined: log t <= 0 at t={t} for d={d}")]
    ScaleDomain { d: usize, t: f64 },
    #[error("occupation-time scaling requires d >= 3, got d={0}")]
    UnsupportedDimension(usize),
    #[error("time arguments out of order: expected {0} <= {1}")]
    ArgumentOrder(f64, f64),
    #[error("grid must be increasing and start at 0")]
    NonMonotoneGrid,
    #[error("covariance matrix not positive semidefinite beyond jitter (pivot {0:.3e})")]
    NotPositiveDefinite(f64),
    #[error("degenerate sample set: {0}")]
    DegenerateSamples(String),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("predicted event count {predicted:.3e} exceeds budget {budget:.3e}; reduce L, T or replicas")]
    ResourceBudget { predicted: f64, budget: f64 },
    #[error("invalid profile parameters: {0}")]
    InvalidProfile(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, VoterlabError>;
