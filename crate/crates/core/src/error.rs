use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid model parameter: {0}")]
    InvalidModel(String),

    #[error("x = {x} lies below the domain floor {floor}")]
    Domain { x: f64, floor: f64 },

    #[error("quadrature did not converge on [{a}, {b}]: error estimate {estimate:e} exceeds tolerance {tol:e}")]
    Quadrature { a: f64, b: f64, estimate: f64, tol: f64 },

    #[error("Neumann iteration for lambda = {lambda} did not converge after {iterations} iterations (last increment {residual:e})")]
    NeumannDivergence { lambda: f64, iterations: usize, residual: f64 },

    #[error("character evaluation failed at lambda = {lambda}, x = {x}: {reason}")]
    Character { lambda: f64, x: f64, reason: String },

    #[error("Plancherel calibration unusable: round-trip error {error:e} exceeds tolerance {tol:e}")]
    Calibration { error: f64, tol: f64 },

    #[error("resolution error: spatial extent {extent} exceeds the lambda grid limit {limit}")]
    Resolution { extent: f64, limit: f64 },

    #[error("coordinate mismatch: expected {expected}, found {found}")]
    Coordinate { expected: &'static str, found: &'static str },

    #[error("invalid argument: {0}")]
    Invalid(String),
}
