use num_complex::Complex64;
use thiserror::Error;

/// Errors raised by the numerical routines in this crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("exponent p = {0} is outside [1, inf]")]
    InvalidExponent(f64),

    #[error("space has dimension zero")]
    EmptySpace,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("non-finite entry in {0}")]
    NonFinite(&'static str),

    #[error("domain dimension {dim} exceeds brute-force limit {max}; use the ascent estimator instead")]
    DimensionTooLarge { dim: usize, max: usize },

    #[error("denominator vanishes (|q| = {magnitude:e}) near z = {z}")]
    PoleProximity { z: Complex64, magnitude: f64 },

    #[error("spectrum escapes the region: offending eigenvalues {0:?}")]
    SpectralInclusion(Vec<Complex64>),

    #[error("not a contraction on the probed vector: |Tx| = {image} > |x| = {input}")]
    ContractionViolation { input: f64, image: f64 },

    #[error("operator norm {0} is not certified below 1")]
    NotStrictContraction(f64),

    #[error("linear solve failed: {0}")]
    SingularSolve(String),

    #[error("empty family")]
    EmptyFamily,

    #[error("evaluation radius {r} exceeds disk radius {radius}")]
    OutsideDisk { r: f64, radius: f64 },

    #[error("parse error at byte {pos}: {msg}")]
    Parse { pos: usize, msg: String },

    #[error("unknown scenario `{0}`")]
    UnknownScenario(String),

    #[error("config: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;
