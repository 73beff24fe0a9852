use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid harvest model: {0}")]
    InvalidModel(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("infeasible energy use: requested {requested}, available {available}")]
    InfeasibleEnergy { requested: f64, available: f64 },

    #[error("no input distribution configured for harvest value {harvest}")]
    MissingDistribution { harvest: f64 },

    #[error("quadrature did not converge with {intervals} intervals")]
    QuadratureFailure { intervals: usize },

    #[error("solver did not converge after {iterations} iterations (gap {gap:e} nats)")]
    NonConvergence { iterations: usize, gap: f64 },

    #[error("density fit needs at least 3 support points, found {support_points}")]
    FitFailure { support_points: usize },
}
