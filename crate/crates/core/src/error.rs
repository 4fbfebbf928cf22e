//! Crate-wide error type.

use thiserror::Error;

/// Any failure surfaced by the library.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    /// Operands belong to different coefficient fields.
    #[error("field mismatch: {left} vs {right}")]
    FieldMismatch { left: String, right: String },

    /// Division by zero (or inversion of zero).
    #[error("division by zero")]
    DivisionByZero,

    /// A denominator reduces to zero modulo the field characteristic.
    #[error("denominator {den} is not invertible modulo {modulus}")]
    NonInvertibleDenominator { den: String, modulus: u64 },

    /// Requested prime-field modulus is not prime.
    #[error("{0} is not prime")]
    NotPrime(u64),

    /// Series operands have incompatible variable counts or fields.
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    /// Substitution target has a nonzero constant term.
    #[error("composition argument {index} has a nonzero constant term")]
    CompositionDomain { index: usize },

    /// A homogeneous part beyond the stored precision was requested.
    #[error("degree {requested} exceeds stored precision {available}")]
    OutOfPrecision { requested: u32, available: u32 },

    /// Invalid argument (degree bounds, metric base, modulus range, ...).
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// Source text failed to parse.
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    /// An operation is not available over the requested field.
    #[error("unsupported over this field: {0}")]
    UnsupportedField(String),

    /// Map has a nonzero constant term in some component.
    #[error("component {component} does not vanish at the origin")]
    NotOriginPreserving { component: usize },

    /// Some component deviates from the identity at linear order.
    #[error(
        "component {component} is not of the form X_i + (higher order); \
         apply linear normalization first"
    )]
    NotNormalForm { component: usize },

    /// The linear part of the map is not invertible.
    #[error("the linear part of the map is singular")]
    SingularLinearPart,

    /// The computed inverse failed its internal composition check.
    /// Indicates an arithmetic bug, never expected in normal operation.
    #[error("internal verification failed: {0}")]
    InternalVerification(String),
}

pub type Result<T> = std::result::Result<T, Error>;
