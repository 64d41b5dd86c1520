use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("invalid truncation n = {0} (need n >= 2)")]
    InvalidTruncation(usize),

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("mean field did not converge after {iterations} iterations (last phi = {last_phi})")]
    Convergence { iterations: usize, last_phi: f64 },

    #[error("no sign change in bracket [{lo}, {hi}]: {what}")]
    Bracket { lo: f64, hi: f64, what: String },

    #[error("unstable quadratic block at t = {t}, mu = {mu}, k = {k:?}: {reason}")]
    Instability {
        t: f64,
        mu: f64,
        k: Vec<f64>,
        reason: String,
    },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("degenerate fit: {0}")]
    Fit(String),

    #[error("momentum {0:?} is not on the grid")]
    OffGrid(Vec<f64>),

    #[error("exact diagonalization too large: dimension {0} exceeds cap")]
    DimensionCap(usize),
}

impl Error {
    /// Attach phase-point context to an instability raised deep inside a block.
    pub(crate) fn with_point(self, t: f64, mu: f64, k: &[f64]) -> Self {
        match self {
            Error::Instability { reason, .. } => Error::Instability {
                t,
                mu,
                k: k.to_vec(),
                reason,
            },
            other => other,
        }
    }

    /// True for failures of the numerics (as opposed to bad input).
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::Convergence { .. }
                | Error::Bracket { .. }
                | Error::Instability { .. }
                | Error::Fit(_)
        )
    }
}
