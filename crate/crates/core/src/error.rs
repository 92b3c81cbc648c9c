use thiserror::Error;

/// Errors raised by the solvers and the geometric preprocessing.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid domain: {0}")]
    Domain(String),

    #[error("invalid argument: {0}")]
    Argument(String),

    #[error("mesh generation failed: {0}")]
    Mesh(String),

    #[error("degenerate triangle {index} (signed area {area:e})")]
    Assembly { index: usize, area: f64 },

    #[error("conjugate gradients did not converge after {iterations} iterations (relative residual {residual:e})")]
    Solver { iterations: usize, residual: f64 },

    #[error("eigensolver stagnated after {iterations} iterations (residual {residual:e})")]
    Eigen { iterations: usize, residual: f64 },

    #[error("negative source value {value} sampled at ({x}, {y})")]
    NegativeSource { value: f64, x: f64, y: f64 },

    #[error("radial profile is not monotone at r = {0}")]
    NonMonotone(f64),

    #[error("point at distance {distance} lies outside the symmetrized disk of radius {radius}")]
    OutsideDisk { distance: f64, radius: f64 },

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
