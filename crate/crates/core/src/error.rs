use thiserror::Error;

/// Errors raised anywhere in the free-fermion and oracle pipelines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),

    /// A mode (or the continuum dispersion) closes the gap at momentum `phi`.
    #[error("gap closes at phi = {phi:.6} (energy {energy:.3e}); parameters are critical")]
    GapClosure { phi: f64, energy: f64 },

    #[error("quadrature did not converge: estimate {estimate:.12e}, error {error:.3e}")]
    NonConvergence { estimate: f64, error: f64 },

    #[error("parameters (alpha = {alpha}, lambda = {lambda}) lie on a critical line")]
    AmbiguousPhase { alpha: f64, lambda: f64 },

    #[error("distance {requested} exceeds the available range {available}")]
    Range { requested: usize, available: usize },

    #[error("internal consistency violated: {0}")]
    Consistency(String),

    #[error("probabilities sum to {sum}, not 1")]
    Normalization { sum: f64 },

    #[error("parameters outside the required phase: {0}")]
    Phase(String),

    #[error("winding loop passes through the origin (min gap {gap:.3e})")]
    OriginCrossing { gap: f64 },

    #[error("winding number not resolved: raw = {raw}, increase the step count")]
    Resolution { raw: f64 },

    #[error("profile has {len} entries, need at least {needed}")]
    InsufficientData { len: usize, needed: usize },

    #[error("chain length {0} exceeds the exact-diagonalization limit")]
    Capacity(usize),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("decay mode undetermined for {0}")]
    Undetermined(String),
}

impl Error {
    /// True for failures caused by the input rather than the numerics.
    pub fn is_config(&self) -> bool {
        matches!(self, Error::Config(_) | Error::Capacity(_) | Error::Range { .. })
    }
}

pub type Result<T> = std::result::Result<T, Error>;
