use thiserror::Error;

/// Errors raised by the entropy, divergence and geometry operations.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies outside the domain of the function (e.g. `x <= 0`).
    #[error("domain error: {0}")]
    Domain(String),

    /// A deformation or family parameter is outside its admissible range.
    #[error("parameter error: {0}")]
    Param(String),

    /// Input data does not describe a valid probability object.
    #[error("validation error: {0}")]
    Validation(String),

    /// Operand shapes do not agree.
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    /// `p[index] > 0` while `q[index] = 0`; the divergence is infinite.
    #[error("absolute continuity violated: q[{index}] = 0 but p[{index}] = {p}")]
    AbsoluteContinuity { index: usize, p: f64 },

    /// A verification sweep was configured with unknown names or bad ranges.
    #[error("configuration error: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn ensure_dims(expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::Dimension { expected, got })
    }
}
