//! Conditionally stable finite-difference baselines.
//!
//! Forward Euler (diffusion) and leapfrog (wave) act on the same Fourier
//! modes as the spectral stepper, so the comparison isolates the time
//! discretization: identical spatial treatment, different stability and
//! accuracy in `dt`.

use num_complex::Complex64;

use crate::equations::EquationKind;
use crate::error::{Result, TgmError};
use crate::spectral::SpectralGrid;

/// One mode of a finite-difference run. Leapfrog carries two time levels;
/// Euler leaves `previous` unset.
#[derive(Debug, Clone)]
pub struct FdmModeState {
    pub current: Complex64,
    pub previous: Option<Complex64>,
    pub time: f64,
}

impl FdmModeState {
    /// Quiescent single-level state for forward Euler.
    pub fn euler_from_rest(t0: f64) -> Self {
        FdmModeState {
            current: Complex64::new(0.0, 0.0),
            previous: None,
            time: t0,
        }
    }
}

/// Forward-Euler update for one diffusion mode, sampling the source at the
/// current time level: `u <- (1 - c k^2 dt) u + dt s`.
pub fn fdm_euler_diffusion_step(
    state: &FdmModeState,
    k: f64,
    c: f64,
    source_amp: Complex64,
    dt: f64,
) -> Result<FdmModeState> {
    if !(dt.is_finite() && dt > 0.0) {
        return Err(TgmError::NumericalInput(format!(
            "step width must be positive and finite, got {dt}"
        )));
    }
    let factor = 1.0 - c * k * k * dt;
    Ok(FdmModeState {
        current: state.current * factor + source_amp * dt,
        previous: None,
        time: state.time + dt,
    })
}

/// Builds the two starting levels for leapfrog from initial value `u0`,
/// initial rate `du0`, and the source at the starting time:
/// `u1 = u0 + dt du0 + (dt^2 / 2) c^2 (s0 - k^2 u0)`.
pub fn leapfrog_start(
    k: f64,
    c: f64,
    u0: Complex64,
    du0: Complex64,
    source_amp: Complex64,
    t0: f64,
    dt: f64,
) -> Result<FdmModeState> {
    if !(dt.is_finite() && dt > 0.0) {
        return Err(TgmError::NumericalInput(format!(
            "step width must be positive and finite, got {dt}"
        )));
    }
    let accel = c * c * (source_amp - k * k * u0);
    Ok(FdmModeState {
        current: u0 + du0 * dt + accel * (0.5 * dt * dt),
        previous: Some(u0),
        time: t0 + dt,
    })
}

/// Leapfrog update for one wave mode, sampling the source at the current
/// time level: `u_next = 2 u - u_prev + (c dt)^2 (s - k^2 u)`.
pub fn fdm_leapfrog_wave_step(
    state: &FdmModeState,
    k: f64,
    c: f64,
    source_amp: Complex64,
    dt: f64,
) -> Result<FdmModeState> {
    if !(dt.is_finite() && dt > 0.0) {
        return Err(TgmError::NumericalInput(format!(
            "step width must be positive and finite, got {dt}"
        )));
    }
    let previous = state.previous.ok_or_else(|| {
        TgmError::InvalidArgument(
            "leapfrog needs two history levels; initialize with leapfrog_start".into(),
        )
    })?;
    let next =
        2.0 * state.current - previous + (c * dt) * (c * dt) * (source_amp - k * k * state.current);
    Ok(FdmModeState {
        current: next,
        previous: Some(state.current),
        time: state.time + dt,
    })
}

/// Largest stable step widths for the finite-difference schemes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CflThreshold {
    /// Exact mode-space bound from the amplification factor of the highest
    /// mode: `2 / (c k_max^2)` for Euler diffusion, `2 / (c k_max)` for
    /// leapfrog wave, with `k_max = pi / dx`.
    pub mode_space: f64,
    /// Coarser spacing-based estimate `2 dx^2 / c`, customary for the
    /// diffusion equation only.
    pub grid_estimate: Option<f64>,
}

/// Stability thresholds of the baseline scheme for `kind` on `grid`.
pub fn cfl_threshold(kind: EquationKind, grid: &SpectralGrid, c: f64) -> Result<CflThreshold> {
    if !(c.is_finite() && c > 0.0) {
        return Err(TgmError::InvalidArgument(format!(
            "coefficient must be positive, got {c}"
        )));
    }
    let k_max = grid.k_max();
    Ok(match kind {
        EquationKind::Diffusion => CflThreshold {
            mode_space: 2.0 / (c * k_max * k_max),
            grid_estimate: Some(2.0 * grid.dx * grid.dx / c),
        },
        EquationKind::Wave => CflThreshold {
            mode_space: 2.0 / (c * k_max),
            grid_estimate: None,
        },
    })
}
