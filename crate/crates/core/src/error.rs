use thiserror::Error;

/// Errors raised by the factorization, propagation, and update routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("{op}: dimension mismatch between {left:?} and {right:?}")]
    DimensionMismatch {
        op: &'static str,
        left: (usize, usize),
        right: (usize, usize),
    },

    #[error("{what}: entry {index} is not finite ({value})")]
    NonFinite {
        what: &'static str,
        index: usize,
        value: f64,
    },

    #[error("matrix is not square: {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("matrix is not symmetric: max asymmetry {asymmetry:e} exceeds {limit:e}")]
    NotSymmetric { asymmetry: f64, limit: f64 },

    #[error("pivot {index} is {pivot:e} (tolerance {tol:e}) but column above it is nonzero")]
    SingularPivot { index: usize, pivot: f64, tol: f64 },

    #[error("prior D entry {index} is negative ({value:e})")]
    NegativePriorD { index: usize, value: f64 },

    #[error("{what}: weight {index} is negative ({value:e})")]
    NegativeWeight {
        what: &'static str,
        index: usize,
        value: f64,
    },

    #[error("innovation variance {alpha:e} is not above tolerance {tol:e}")]
    ZeroInnovationVariance { alpha: f64, tol: f64 },

    #[error("updated pivot {index} is {pivot:e} but must be divided by")]
    ZeroPivot { index: usize, pivot: f64 },

    #[error("matrix is not positive definite: D entry {index} is {value:e}")]
    NotPositiveDefinite { index: usize, value: f64 },

    #[error("innovation for measurement {index} is not finite")]
    InnovationNotFinite { index: usize },

    #[error("{what} must be non-negative, got {value:e}")]
    NegativeScalar { what: &'static str, value: f64 },

    #[error("innovation covariance is singular")]
    SingularInnovation,
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_finite(what: &'static str, values: &[f64]) -> Result<()> {
    match values.iter().position(|v| !v.is_finite()) {
        Some(index) => Err(Error::NonFinite {
            what,
            index,
            value: values[index],
        }),
        None => Ok(()),
    }
}
