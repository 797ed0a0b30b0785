use thiserror::Error;

/// Errors produced by the solvers and parameter constructors.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    /// The weak-leakage expansion needs a strong atom-field coupling.
    #[error("approximation out of range: coupling kappa = {kappa} must exceed 1")]
    ApproximationRange { kappa: f64 },

    #[error("Newton iteration hit a vanishing derivative at theta = {re} {im:+}i")]
    ZeroDerivative { re: f64, im: f64 },

    #[error("mode did not converge (residual {residual:e})")]
    Unconverged { residual: f64 },

    #[error("contour passes through a root (min |f| = {min_abs:e}) after {retries} inflations")]
    ContourThroughRoot { min_abs: f64, retries: usize },

    #[error(
        "contour undersampled: winding deviates from an integer by {deviation:.3} turns; \
         increase samples_per_edge (was {samples_per_edge})"
    )]
    Undersampled { samples_per_edge: usize, deviation: f64 },

    #[error("fit window rejected: {0}")]
    FitWindow(String),

    #[error("amplitude underflow at s = {time}")]
    Underflow { time: f64 },

    #[error("atomic amplitude exceeded unity (|w| = {abs}) at s = {time}")]
    Overflow { time: f64, abs: f64 },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter { name, reason: reason.into() }
}
