use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("fields live on different grids")]
    GridMismatch,

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("non-positive state: min {field} = {min:e} (threshold {threshold:e})")]
    NonPositiveState {
        field: &'static str,
        min: f64,
        threshold: f64,
    },

    #[error("non-finite values detected at t = {time}")]
    BlowUp { time: f64 },

    #[error("positivity lost while building perturbed data: min {field} = {min:e}")]
    PositivityLost { field: &'static str, min: f64 },

    #[error("state times differ: {eps_time} vs {limit_time}")]
    TimeMismatch { eps_time: f64, limit_time: f64 },

    #[error("invalid ordinate set: {0}")]
    InvalidOrdinates(String),

    #[error("intensity is off the P1 subspace (projection residual {residual:e})")]
    OffClosureManifold { residual: f64 },

    #[error("degenerate rate fit: {0}")]
    DegenerateFit(String),
}
