use thiserror::Error;

/// Everything that can go wrong inside the simulation kernels.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("size mismatch: expected {expected}, got {actual}")]
    SizeMismatch { expected: usize, actual: usize },

    #[error("state is not normalized: |norm - 1| = {deviation:e}")]
    NotNormalized { deviation: f64 },

    #[error("momentum tail mass {mass:e} exceeds {limit:e}; increase basis_size")]
    TailMass { mass: f64, limit: f64 },

    #[error("kick window [{start}, {end}] is empty or outside the {recorded} recorded kicks")]
    InvalidWindow { start: usize, end: usize, recorded: usize },

    #[error("elliptic modulus |k| = {k} reaches the logarithmic divergence at |k| = 1")]
    Divergence { k: f64 },

    #[error("initial angle {theta0} lies on the separatrix (|k| = 1)")]
    Separatrix { theta0: f64 },

    #[error("no sign change of the caustic equation in [{lo}, {hi}] for k = {k}")]
    NoRoot { k: f64, lo: f64, hi: f64 },

    #[error("quadrature did not converge: relative change {change:e} between {nodes} and {doubled} nodes")]
    NonConvergence { change: f64, nodes: usize, doubled: usize },

    #[error("ODE integration failed at t = {t}: {reason}")]
    Integration { t: f64, reason: String },

    #[error("non-finite input `{name}`")]
    NonFinite { name: &'static str },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}

pub(crate) fn finite(name: &'static str, value: f64) -> Result<f64> {
    if value.is_finite() {
        Ok(value)
    } else {
        Err(Error::NonFinite { name })
    }
}
