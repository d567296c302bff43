//! Error type shared across the solver core.

use std::fmt;

/// Everything that can go wrong when assembling or evaluating the model.
///
/// Runtime integration failures (overflow, step collapse) are *not* errors:
/// they are encoded as [`crate::integrator::StopReason`] values so a run
/// always produces a usable record.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// Grid size rejected: must be even and at least 8.
    GridSize(usize),
    /// Two values built on different grids were combined.
    GridMismatch { left: usize, right: usize },
    /// A physical-space buffer had the wrong length for its grid.
    LengthMismatch { expected: usize, got: usize },
    /// A model or solver parameter is outside its admissible range.
    Parameter { name: &'static str, value: f64, requirement: &'static str },
    /// Derivative order outside the supported 1..=3 range.
    DerivativeOrder(usize),
    /// The second-derivative resolvent identity is undefined without viscosity.
    IdentityUndefined,
    /// The requested right-hand-side variant contradicts the parameters.
    VariantMismatch(String),
    /// The dense convolution reference is quadratic in the grid size and
    /// refuses to run above its cap.
    ConvolutionGridTooLarge { n: usize, max: usize },
    /// A field or product stopped being finite outside the integrator
    /// (inside a run this becomes a stop reason instead).
    NonFinite,
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::GridSize(n) => {
                write!(f, "grid size {n} not supported: n must be even and >= 8")
            }
            Error::GridMismatch { left, right } => {
                write!(f, "grid mismatch: operands live on n={left} and n={right}")
            }
            Error::LengthMismatch { expected, got } => {
                write!(f, "buffer length {got} does not match grid size {expected}")
            }
            Error::Parameter { name, value, requirement } => {
                write!(f, "parameter {name} = {value}: {requirement}")
            }
            Error::DerivativeOrder(order) => {
                write!(f, "derivative order {order} not supported (1..=3)")
            }
            Error::IdentityUndefined => {
                write!(f, "resolvent identity requires nu > 0")
            }
            Error::VariantMismatch(msg) => write!(f, "rhs variant mismatch: {msg}"),
            Error::ConvolutionGridTooLarge { n, max } => {
                write!(f, "convolution reference limited to n <= {max}, got n = {n}")
            }
            Error::NonFinite => write!(f, "non-finite value encountered"),
        }
    }
}

impl std::error::Error for Error {}

pub type Result<T> = std::result::Result<T, Error>;
