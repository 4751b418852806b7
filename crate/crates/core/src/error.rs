use thiserror::Error;

/// Errors raised by the numerical routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("degenerate deformation: det F = {det:e} is not positive")]
    DegenerateDeformation { det: f64 },
    #[error("zero denominator in {0}")]
    ZeroDenominator(&'static str),
    #[error("no real non-negative dispersion branch at k = {k}")]
    NoRealBranch { k: f64 },
    #[error("imaginary wave speed: radicand {radicand:e} is negative")]
    ImaginarySpeed { radicand: f64 },
    #[error("infeasible implied density: rho = {rho:e}, varrho_rot = {varrho_rot:e}")]
    InfeasibleDensity { rho: f64, varrho_rot: f64 },
    #[error("state became non-finite at step {step}")]
    NonFiniteState { step: usize },
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("fields live on different grids")]
    GridMismatch,
}

pub type Result<T> = std::result::Result<T, Error>;
