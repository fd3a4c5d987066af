use thiserror::Error;

use crate::spatial::Profile;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// A precondition on user-supplied parameters does not hold.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    /// Existence threshold such as `λ > a(0)·j²` or `λ > 2j²` not met.
    #[error("threshold violated: {0}")]
    Threshold(String),

    #[error("blow-up at step {step} (t = {time}): |u| exceeded {limit:e}")]
    BlowUp {
        step: usize,
        time: f64,
        limit: f64,
        last: Box<Profile>,
    },

    #[error("{what} did not converge: {detail}")]
    NoConvergence { what: &'static str, detail: String },

    #[error("root bracket failure: g(lo) = {g_lo:e}, g(hi) = {g_hi:e}")]
    Bracket { g_lo: f64, g_hi: f64 },

    #[error("trajectory left the region by {distance:e} at t = {time}")]
    RegionExit { distance: f64, time: f64 },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    /// True for errors caused by bad parameters rather than by the numerics.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::InvalidInput(_) | Error::GridMismatch(_) | Error::Threshold(_)
        )
    }
}
