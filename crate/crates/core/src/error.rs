use thiserror::Error;

use crate::scalar::Scalar;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("mixed-mode arithmetic: {left} value combined with {right} value")]
    ModeMismatch {
        left: &'static str,
        right: &'static str,
    },

    #[error("exponent overflow")]
    ExponentOverflow,

    #[error("negative power of omega ({0}) in a potential slice")]
    NegativeOmegaExponent(i64),

    #[error("expected a vector of length {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("potential is not normalized: term (d={d}, k={k}) lies outside 0 <= k <= {bound}")]
    NotNormalized { d: u32, k: i64, bound: i64 },

    #[error("superpotential is not a homogeneous quadratic form")]
    NotQuadratic,

    #[error("superpotential is not univariate (n = {0})")]
    NotUnivariate(u32),

    #[error("dW/dx_0 vanishes identically: every point is critical")]
    EveryPointCritical,

    #[error("point is not critical: gluing leaves positive powers {offending:?} in the U1 chart")]
    Obstruction { offending: Vec<(i64, Scalar)> },

    #[error("invalid input: {0}")]
    Input(String),
}
