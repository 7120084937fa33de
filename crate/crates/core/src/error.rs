use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("coincident points: separation {distance:e} is below {threshold:e}")]
    CoincidentPoints { distance: f64, threshold: f64 },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("singular matrix: pivot {pivot:e} in column {column}")]
    SingularMatrix { column: usize, pivot: f64 },

    #[error("solver did not converge: relative residual {residual:e} after {iterations} iterations")]
    NotConverged { iterations: usize, residual: f64 },

    #[error("evaluation point lies inside or on the body (distance {distance:e}, body radius {radius:e})")]
    InsideBody { distance: f64, radius: f64 },

    #[error("degenerate surface parametrization at (u, v) = ({u}, {v})")]
    DegenerateJacobian { u: f64, v: f64 },

    #[error("division by zero: {0}")]
    ZeroNorm(&'static str),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidInput(msg.into())
}
