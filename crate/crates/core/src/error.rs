use num_complex::Complex64;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("singular gauge: determinant {0} is not a monomial")]
    SingularGauge(String),

    #[error("resonance obstruction at order {order}")]
    Resonance { order: usize },

    #[error("incompatible pole structure for expansion at {0}")]
    PoleStructure(&'static str),

    #[error("invariant violated: {what} (residual {residual:e})")]
    Invariant { what: &'static str, residual: f64 },

    #[error("not in chart domain: {0}")]
    ChartDomain(&'static str),

    #[error("pole: {0}")]
    Pole(&'static str),

    #[error("singular locus: leaf identity value {leaf}")]
    SingularLocus { leaf: Complex64 },

    #[error("constraint violated: {0}")]
    Constraint(String),

    #[error("spectrum mismatch: {0}")]
    Spectrum(String),

    #[error("convention error: {0}")]
    Convention(String),

    #[error("internal consistency failure: {0}")]
    Consistency(String),

    #[error("normal form not found: {0}")]
    NoNormalForm(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),
}

pub type Result<T> = std::result::Result<T, Error>;
