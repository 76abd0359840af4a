use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// An argument outside the operation's domain.
    #[error("domain error in {op}: {msg}")]
    Domain { op: &'static str, msg: String },

    /// An invalid configuration record.
    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("{op}: quadrature did not converge (value {value:.6e}, error estimate {error:.3e}, {panels} panels)")]
    Quadrature {
        op: &'static str,
        value: f64,
        error: f64,
        panels: usize,
    },

    #[error("picard iteration did not converge after {} iterations (last difference {:.3e})", history.len(), history.last().copied().unwrap_or(f64::NAN))]
    NonConvergence { history: Vec<f64> },

    #[error("iterate {iteration} left the admissible ball: sup |u| = {sup:.6e} > 1/A = {bound:.6e}")]
    DomainEscape { iteration: usize, sup: f64, bound: f64 },

    #[error("finite-difference instability at t = {t}, r = {r}")]
    Instability { t: f64, r: f64 },

    #[error("no admissible epsilon: {0}")]
    Threshold(String),

    #[error("fit error: {0}")]
    Fit(String),
}

impl Error {
    pub(crate) fn domain(op: &'static str, msg: impl Into<String>) -> Self {
        Error::Domain { op, msg: msg.into() }
    }

    /// Whether the error stems from invalid inputs rather than a numerical failure.
    pub fn is_config(&self) -> bool {
        matches!(self, Error::Config(_) | Error::Domain { .. })
    }
}
