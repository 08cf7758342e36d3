use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("integration failed at x = {x:e}: {reason}")]
    Integration { x: f64, reason: String },
    #[error("singular linear system (condition number {condition:e})")]
    Singular { condition: f64 },
    #[error("ill-conditioned fit (condition number {condition:e}); widen the x_max grid")]
    IllConditioned { condition: f64 },
    #[error("pole between {lo} and {hi}")]
    Pole { lo: f64, hi: f64 },
    #[error("trace crosses a resonance; fit refused")]
    Resonant,
    #[error("diagnostics: {0}")]
    Diagnostics(String),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    /// True for failures of the numerics rather than of the inputs.
    pub fn is_numerical(&self) -> bool {
        !matches!(self, Error::Domain(_) | Error::Unsupported(_))
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
