use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("sensing map is informationally incomplete: rank {rank} < dimension {dimension}")]
    InformationallyIncomplete { rank: usize, dimension: usize },

    #[error("extreme eigenvalues of the covariance matrix are degenerate (relative gap {gap:.3e})")]
    DegenerateSpectrum { gap: f64 },

    #[error("basis {0} does not support Fock block indexing")]
    UnsupportedBasis(&'static str),

    #[error("invalid probability distribution: {0}")]
    InvalidDistribution(String),

    #[error("coefficient matrix is not positive semidefinite (min eigenvalue {0:.3e})")]
    NotPositiveSemidefinite(f64),

    #[error("need at least {needed} measurement settings, got {got}")]
    InsufficientSettings { needed: usize, got: usize },

    #[error("no separated coherent components found: {0}")]
    NotACat(String),

    #[error("greedy selection exhausted its budget of {budget} displacements at m_c = {reached_mc}")]
    BudgetExceeded {
        budget: usize,
        reached_mc: usize,
        partial: Box<crate::design::DesignReport>,
    },

    #[error("optimizer failure: {0}")]
    Optimizer(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
