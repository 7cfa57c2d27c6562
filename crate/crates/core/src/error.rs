use thiserror::Error;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(&'static str),
    #[error("precision {0:e} is outside the supported range")]
    UnsupportedPrecision(f64),
    #[error("prolate expansion did not converge for c = {c} with {terms} terms")]
    NotConverged { c: f64, terms: usize },
    #[error("window too narrow for grid: |window transform| = {0:e} at an in-band mode")]
    WindowTooNarrow(f64),
    #[error("grid of {n} points per dimension is below the truncation minimum (level {level:e} > {eps:e})")]
    GridTooCoarse { n: usize, level: f64, eps: f64 },
    #[error("system is not charge neutral (net charge {0:e})")]
    NonNeutral(f64),
    #[error("shape mismatch: expected {expected:?}, found {found:?}")]
    ShapeMismatch { expected: [usize; 3], found: [usize; 3] },
    #[error("grid data is in the wrong space for this operation")]
    WrongSpace,
    #[error("pair distance is zero")]
    ZeroDistance,
    #[error("reference force norm is zero")]
    ZeroReference,
    #[error("length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("reference sum did not reach tolerance {tol:e} (split disagreement {residual:e})")]
    ReferenceNotConverged { tol: f64, residual: f64 },
}
