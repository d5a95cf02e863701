use thiserror::Error;

use crate::metric::Classification;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("derivative order {0} is not supported (maximum is 4)")]
    UnsupportedOrder(usize),

    #[error("1-forms are not linearly independent (|det| = {det:e})")]
    DegenerateForms { det: f64 },

    #[error("power of a vanishing base A = {0:e}")]
    ZeroBase(f64),

    #[error("point is outside the regular domain ({classification:?}, A = {a_value:e})")]
    DegenerateDomain {
        classification: Classification,
        a_value: f64,
    },

    #[error("metric is numerically singular (condition estimate {condition:e})")]
    SingularMetric { condition: f64 },

    #[error("Einstein constant must be nonzero")]
    ZeroKappa,

    #[error("Einstein-like equations are only defined for n > 2 (got n = {0})")]
    NotApplicableDimension(usize),

    #[error("finite-difference step {step:e} is too small to be useful")]
    StepUnderflow { step: f64 },

    #[error("printed formula divides by y^{index} = 0")]
    HyperplaneSingularity { index: usize },

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("non-finite input: {0}")]
    NonFinite(String),

    #[error("invalid metric definition: {0}")]
    InvalidMetric(String),
}
