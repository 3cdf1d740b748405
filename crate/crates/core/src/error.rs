use thiserror::Error;

/// Failure of a single right-hand-side or integrand evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Error)]
pub enum EvalError {
    /// The abscissa hit a point where the coefficient is undefined.
    #[error("evaluation at singular point t = {t}")]
    Singular { t: f64 },
    /// The coefficient produced NaN or an infinity.
    #[error("non-finite value at t = {t}")]
    NonFinite { t: f64 },
}

#[derive(Debug, Error)]
pub enum Error {
    /// Invalid parameter or precondition violation.
    #[error("{0}")]
    Domain(String),

    #[error("step {step} (t = {t}): {source}")]
    Eval {
        step: usize,
        t: f64,
        #[source]
        source: EvalError,
    },

    /// The numerical state left the finite range.
    #[error("step {step} (t = {t}): state became non-finite; the step size is too large for this problem or the problem is misposed")]
    Overflow { step: usize, t: f64 },

    /// A Monte Carlo sample failed after exhausting its re-seed attempts.
    #[error("sample {sample} at h = {h}: {source}")]
    Sample {
        sample: usize,
        h: f64,
        #[source]
        source: Box<Error>,
    },

    #[error("malformed input: {0}")]
    Malformed(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    /// True for errors caused by bad input rather than a numerical failure.
    pub fn is_usage(&self) -> bool {
        matches!(self, Error::Domain(_) | Error::Malformed(_))
    }

    /// True when the root cause is an evaluation at a singular abscissa.
    pub fn is_singular_hit(&self) -> bool {
        match self {
            Error::Eval {
                source: EvalError::Singular { .. },
                ..
            } => true,
            Error::Sample { source, .. } => source.is_singular_hit(),
            _ => false,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
