//! Error type shared by every module in the crate.

use thiserror::Error;

/// Convenience alias used throughout the crate.
pub type Result<T> = std::result::Result<T, TgmError>;

/// All failure modes surfaced by the library.
#[derive(Debug, Error)]
pub enum TgmError {
    /// A caller-supplied value is out of range or malformed.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// An operator description is structurally unusable.
    #[error("invalid operator: {0}")]
    InvalidOperator(String),

    /// An inverse transform produced a field that is not real to tolerance.
    #[error("non-real field: imaginary residue {residue:.3e} exceeds {threshold:.3e} of peak")]
    NonRealField { residue: f64, threshold: f64 },

    /// Two fields live on different grids.
    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    /// A mode plan is degenerate and must go through the zero-mode path.
    #[error("degenerate mode: {0}")]
    DegenerateMode(String),

    /// A degenerate mode does not match any supported special-case form.
    #[error("unsupported degeneracy: {0}")]
    UnsupportedDegeneracy(String),

    /// A numeric input was non-finite or a step width was not positive.
    #[error("numerical input error: {0}")]
    NumericalInput(String),

    /// Reconstruction was requested before the state's current time.
    #[error("out of window: evaluation time {t} precedes state time {t_state}")]
    OutOfWindow { t: f64, t_state: f64 },

    /// The driving frequency sits too close to a mode's natural frequency.
    #[error("near resonance: |omega0 - c|k|| = {gap:.3e} is below guard {guard:.3e}")]
    NearResonance { gap: f64, guard: f64 },

    /// A configuration file or value is invalid.
    #[error("config error: {0}")]
    Config(String),

    /// Not enough usable records for a fit.
    #[error("insufficient data: {0}")]
    InsufficientData(String),

    /// Wrapped I/O failure from reading configs or writing outputs.
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    /// A condition the solver guarantees can never happen was observed.
    #[error("internal error: {0}")]
    Internal(String),

    /// One or more self-test checks failed.
    #[error("self-test failed: {0}")]
    SelftestFailed(String),
}

impl TgmError {
    /// Process exit code for the CLI: 1 config/usage, 2 I/O, 3 self-test.
    pub fn exit_code(&self) -> i32 {
        match self {
            TgmError::Io(_) => 2,
            TgmError::SelftestFailed(_) => 3,
            _ => 1,
        }
    }
}
