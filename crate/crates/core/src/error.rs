//! Error type shared by every module, with the CLI exit code each variant maps to.

use std::fmt;

use thiserror::Error;

/// Direction of the one-sided bound reported when the outlier frequency is 0 or 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundKind {
    /// The index is at most `value`.
    Upper,
    /// The index is at least `value`.
    Lower,
}

impl fmt::Display for BoundKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BoundKind::Upper => f.write_str("alpha <="),
            BoundKind::Lower => f.write_str("alpha >="),
        }
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("parameter out of domain: {0}")]
    ParameterDomain(String),

    #[error("family `{family}` lacks the `{capability}` capability")]
    Capability {
        family: String,
        capability: &'static str,
    },

    #[error("insufficient data: need at least {needed} values, got {got}")]
    InsufficientData { needed: usize, got: usize },

    #[error("quadrature did not reach tolerance: best estimate {estimate} with error bound {error_bound}")]
    Accuracy { estimate: f64, error_bound: f64 },

    #[error("singular ratio: p(kappa*x) = 0 at x = {x}")]
    Singularity { x: f64 },

    #[error("degenerate event frequency p_hat = {p_hat} over {blocks} blocks; one-sided bound: {kind} {bound}")]
    DegenerateFrequency {
        p_hat: f64,
        blocks: usize,
        kind: BoundKind,
        bound: f64,
    },

    #[error("cannot parse {what}: {detail}")]
    Parse { what: &'static str, detail: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::ParameterDomain(msg.into())
    }

    /// Process exit status used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::ParameterDomain(_) | Error::Parse { .. } | Error::Singularity { .. } => 2,
            Error::Capability { .. } => 3,
            Error::InsufficientData { .. } => 4,
            Error::Accuracy { .. } => 5,
            Error::DegenerateFrequency { .. } => 6,
            Error::Io(_) => 1,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

/// Rejects `kappa` outside the open unit interval.
pub(crate) fn check_kappa(kappa: f64) -> Result<()> {
    if kappa > 0.0 && kappa < 1.0 {
        Ok(())
    } else {
        Err(Error::domain(format!("kappa must lie in (0, 1), got {kappa}")))
    }
}

pub(crate) fn check_confidence(confidence: f64) -> Result<()> {
    if confidence > 0.0 && confidence < 1.0 {
        Ok(())
    } else {
        Err(Error::domain(format!(
            "confidence must lie in (0, 1), got {confidence}"
        )))
    }
}
