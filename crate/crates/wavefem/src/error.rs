use thiserror::Error;

/// Failures reported by the solver and estimator routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid mesh: {0}")]
    InvalidMesh(String),

    #[error("unsupported polynomial degree {0}, expected 1, 2 or 3")]
    UnsupportedDegree(usize),

    #[error("matrix not SPD: pivot {pivot:e} at row {row}")]
    NotSpd { row: usize, pivot: f64 },

    #[error("x = {x} lies outside the domain [{left}, {right}]")]
    OutsideDomain { x: f64, left: f64, right: f64 },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("blow-up detected at step {step}")]
    BlowUp { step: usize },

    #[error("CFL violated: mu0 = 1 - tau^2 lambda_max / 4 = {mu0:.6e} is not positive")]
    CflViolated { mu0: f64 },

    #[error("invalid time grid: {0}")]
    InvalidGrid(String),

    #[error("damping rate rho = {0} must be positive and finite")]
    InvalidDamping(f64),

    #[error("rho * tau = {0} exceeds 1")]
    DampingTooLarge(f64),

    #[error("interval {interval} needs state {needed}, but only states 0..={last} are stored")]
    StencilOutOfRange {
        interval: usize,
        needed: usize,
        last: usize,
    },

    #[error("time t = {t} outside the reconstructed range [0, {end}]")]
    TimeOutOfRange { t: f64, end: f64 },

    #[error("regularity exponent theta = {0} must lie in (1/2, 1]")]
    InvalidExponent(f64),

    #[error("{0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, Error>;
