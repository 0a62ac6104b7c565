use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    /// Spectra of `A` and `-B` overlap, so `AX + XB = C` has no unique solution.
    #[error("shared spectrum{}: eigenvalue distance {distance:e} <= tolerance {tolerance:e}",
        order.map(|n| format!(" at moment order {n}")).unwrap_or_default())]
    SharedSpectrum {
        order: Option<usize>,
        distance: f64,
        tolerance: f64,
    },

    #[error("coefficient F_{index} has degree {degree}, exceeding the bound {index}")]
    DegreeBound { index: usize, degree: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("mass matrix is not positive semidefinite")]
    NotPsd,

    #[error("kernel moment of order {order} diverges")]
    DivergentMoment { order: usize },

    #[error("moment mu_{index} is not available")]
    MissingMoment { index: usize },

    #[error("moment mu_{index} is not symmetric")]
    NotSymmetric { index: usize },

    #[error("moment matrix ill-conditioned at degree {degree} (condition {condition:e})")]
    IllConditionedMoments { degree: usize, condition: f64 },

    #[error("operator nullspace unstable: dimension {with_last} with the last equations, {without_last} without")]
    RankInstability { with_last: usize, without_last: usize },

    #[error("t0 = {t0} is an excluded point for this family")]
    ExcludedPoint { t0: f64 },

    #[error("moment equations inconsistent at order {order} (relative residual {residual:e})")]
    Inconsistent { order: usize, residual: f64 },

    #[error("mu_0 lies outside the span of the reference weight and mass (relative residual {residual:e})")]
    OutsideSpan { residual: f64 },

    #[error("weight has no continuous part")]
    NoContinuousPart,

    #[error("quadrature needs at least {needed} nodes, got {given}")]
    InsufficientNodes { needed: usize, given: usize },

    #[error("unsupported: {0}")]
    Unsupported(String),
}
