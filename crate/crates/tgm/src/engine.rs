//! Generic per-mode time stepper.
//!
//! Each Fourier mode of a linear constant-coefficient PDE obeys an ODE whose
//! characteristic polynomial is `L(lambda) = sum_n a_n lambda^n + kappa(k)`.
//! The stepper propagates the homogeneous part exactly through
//! `exp(lambda_j dt)` and injects one boxcar pulse of source per step through
//! closed-form Green weights, which makes it explicit and stable for any step
//! width. Modes whose roots collide or vanish (in practice only `k = 0` for
//! the supported equations) are advanced by a polynomial special case.

use num_complex::Complex64;

use crate::error::{Result, TgmError};
use crate::spectral::{spatial_symbol, OperatorSpec, SpectralField, SpectralGrid};

/// Roots closer than this (relative to the largest root magnitude, clamped
/// at 1) to each other or to zero mark a plan as degenerate.
pub const DEGENERACY_TOLERANCE: f64 = 1e-9;

/// Iterative root refinement targets `|L(lambda)| <= RESIDUAL_TOLERANCE * max(1, |kappa|)`.
pub const RESIDUAL_TOLERANCE: f64 = 1e-9;

/// Everything the stepper needs about one Fourier mode.
#[derive(Debug, Clone)]
pub struct ModePlan {
    /// Wave vector of the mode (one component per spatial dimension).
    pub wave_vector: Vec<f64>,
    /// Spatial symbol `kappa(k)` of the operator at this mode.
    pub kappa: Complex64,
    /// Time-derivative coefficients `a_0 ... a_p` of the operator.
    pub time_coeffs: Vec<f64>,
    /// Roots of the characteristic polynomial, sorted by (re, im).
    pub eigenvalues: Vec<Complex64>,
    /// Derivative `L'(lambda_j)` at each root, same order as `eigenvalues`.
    pub lprime: Vec<Complex64>,
    /// True when roots collide or vanish to tolerance; such modes must go
    /// through [`zero_mode_step`] instead of [`step`].
    pub degenerate: bool,
}

/// Evaluates `L(lambda) = sum_n a_n lambda^n + kappa` by Horner's rule.
fn characteristic(time_coeffs: &[f64], kappa: Complex64, lambda: Complex64) -> Complex64 {
    let mut acc = Complex64::new(0.0, 0.0);
    for &a in time_coeffs.iter().rev() {
        acc = acc * lambda + a;
    }
    acc + kappa
}

/// Evaluates `L'(lambda) = sum_n n a_n lambda^(n-1)`.
fn characteristic_derivative(time_coeffs: &[f64], lambda: Complex64) -> Complex64 {
    let mut acc = Complex64::new(0.0, 0.0);
    for (n, &a) in time_coeffs
        .iter()
        .enumerate()
        .rev()
        .take_while(|&(n, _)| n >= 1)
    {
        acc = acc * lambda + n as f64 * a;
    }
    acc
}

/// Durand-Kerner iteration for the monic polynomial with the given
/// low-to-high coefficients (implicit leading 1).
fn durand_kerner(monic: &[Complex64]) -> Vec<Complex64> {
    let p = monic.len();
    let eval = |z: Complex64| -> Complex64 {
        let mut acc = Complex64::new(1.0, 0.0);
        for &c in monic.iter().rev() {
            acc = acc * z + c;
        }
        acc
    };
    let seed = Complex64::new(0.4, 0.9);
    let mut roots: Vec<Complex64> = (0..p).map(|i| seed.powu(i as u32 + 1)).collect();
    for _ in 0..500 {
        let mut shift = 0.0f64;
        for i in 0..p {
            let mut denom = Complex64::new(1.0, 0.0);
            for j in 0..p {
                if j != i {
                    denom *= roots[i] - roots[j];
                }
            }
            if denom.norm() == 0.0 {
                continue;
            }
            let delta = eval(roots[i]) / denom;
            roots[i] -= delta;
            shift = shift.max(delta.norm());
        }
        let scale = roots.iter().map(|r| r.norm()).fold(1.0f64, f64::max);
        if shift <= 1e-15 * scale {
            break;
        }
    }
    roots
}

/// Roots of `sum_n a_n lambda^n + kappa = 0`, sorted by (re, im).
///
/// Degrees 1 and 2 use closed forms; higher degrees use Durand-Kerner with a
/// Newton polish, and the result is checked against [`RESIDUAL_TOLERANCE`].
pub fn find_eigenvalues(spec: &OperatorSpec, kappa: Complex64) -> Result<Vec<Complex64>> {
    characteristic_roots(&spec.time_coeffs, kappa)
}

/// Root finder underlying [`find_eigenvalues`], usable without a full
/// operator description.
pub fn characteristic_roots(time_coeffs: &[f64], kappa: Complex64) -> Result<Vec<Complex64>> {
    if !(kappa.re.is_finite() && kappa.im.is_finite()) {
        return Err(TgmError::NumericalInput("kappa is not finite".into()));
    }
    let p = time_coeffs.len().saturating_sub(1);
    if p == 0 || time_coeffs.last().copied().unwrap_or(0.0) == 0.0 {
        return Err(TgmError::InvalidOperator(
            "characteristic polynomial must have degree >= 1".into(),
        ));
    }
    let mut roots = match p {
        1 => {
            let a1 = time_coeffs[1];
            vec![-(kappa + time_coeffs[0]) / a1]
        }
        2 => {
            let (a2, a1, a0) = (time_coeffs[2], time_coeffs[1], time_coeffs[0]);
            let disc = (Complex64::new(a1 * a1, 0.0) - 4.0 * a2 * (kappa + a0)).sqrt();
            vec![(-a1 + disc) / (2.0 * a2), (-a1 - disc) / (2.0 * a2)]
        }
        _ => {
            let top = time_coeffs[p];
            let mut monic: Vec<Complex64> = time_coeffs[..p]
                .iter()
                .map(|&a| Complex64::new(a / top, 0.0))
                .collect();
            monic[0] += kappa / top;
            let mut roots = durand_kerner(&monic);
            for root in roots.iter_mut() {
                for _ in 0..3 {
                    let deriv = characteristic_derivative(time_coeffs, *root);
                    if deriv.norm() == 0.0 {
                        break;
                    }
                    *root -= characteristic(time_coeffs, kappa, *root) / deriv;
                }
            }
            roots
        }
    };
    let budget = RESIDUAL_TOLERANCE * kappa.norm().max(1.0);
    for &root in &roots {
        let residual = characteristic(time_coeffs, kappa, root).norm();
        if !residual.is_finite() || residual > budget {
            return Err(TgmError::Internal(format!(
                "root refinement left residual {residual:.3e} above budget {budget:.3e}"
            )));
        }
    }
    roots.sort_by(|a, b| (a.re, a.im).partial_cmp(&(b.re, b.im)).unwrap());
    Ok(roots)
}

impl ModePlan {
    /// Builds the plan for one mode of `spec` at wave vector `k`.
    pub fn new(spec: &OperatorSpec, k: &[f64]) -> Result<Self> {
        let kappa = spatial_symbol(spec, k)?;
        ModePlan::from_parts(spec.time_coeffs.clone(), kappa, k.to_vec())
    }

    /// Builds a plan directly from time coefficients and a symbol value.
    pub fn from_parts(
        time_coeffs: Vec<f64>,
        kappa: Complex64,
        wave_vector: Vec<f64>,
    ) -> Result<Self> {
        let eigenvalues = characteristic_roots(&time_coeffs, kappa)?;
        let lprime = eigenvalues
            .iter()
            .map(|&l| characteristic_derivative(&time_coeffs, l))
            .collect();
        let scale = eigenvalues.iter().map(|l| l.norm()).fold(1.0f64, f64::max);
        let mut degenerate = eigenvalues
            .iter()
            .any(|l| l.norm() <= DEGENERACY_TOLERANCE * scale);
        for i in 0..eigenvalues.len() {
            for j in 0..i {
                if (eigenvalues[i] - eigenvalues[j]).norm() <= DEGENERACY_TOLERANCE * scale {
                    degenerate = true;
                }
            }
        }
        Ok(ModePlan {
            wave_vector,
            kappa,
            time_coeffs,
            eigenvalues,
            lprime,
            degenerate,
        })
    }

    /// Time order `p` of the mode's ODE.
    pub fn order(&self) -> usize {
        self.time_coeffs.len() - 1
    }
}

/// Slack for the reconstruction window check: evaluation times up to this
/// much before the state time are treated as "now", so queries built from
/// externally accumulated step counts (`n * dt` vs `dt` added `n` times) do
/// not trip over float rounding.
pub(crate) fn window_slack(t_state: f64) -> f64 {
    1e-9 * t_state.abs().max(1.0)
}

/// `(e^z - 1) / z`, evaluated by series near zero to avoid cancellation.
fn expm1_over(z: Complex64) -> Complex64 {
    if z.norm() < 0.1 {
        let mut sum = Complex64::new(1.0, 0.0);
        let mut term = Complex64::new(1.0, 0.0);
        for n in 1..=12 {
            term *= z / (n as f64 + 1.0);
            sum += term;
        }
        sum
    } else {
        (z.exp() - 1.0) / z
    }
}

/// Green weights of one boxcar pulse: `w_j = (e^{lambda_j dt} - 1) / (lambda_j L'(lambda_j))`.
///
/// After a pulse of width `dt` ending at `t_N`, the mode's response for
/// `t >= t_N` is `sum_j w_j e^{lambda_j (t - t_N)}`; the weights therefore
/// add directly onto the state coefficients.
pub fn green_weights(plan: &ModePlan, dt: f64) -> Result<Vec<Complex64>> {
    if plan.degenerate {
        return Err(TgmError::DegenerateMode(
            "degenerate plan has no Green weights; use the zero-mode path".into(),
        ));
    }
    if !(dt.is_finite() && dt > 0.0) {
        return Err(TgmError::NumericalInput(format!(
            "step width must be positive and finite, got {dt}"
        )));
    }
    Ok(plan
        .eigenvalues
        .iter()
        .zip(plan.lprime.iter())
        .map(|(&l, &lp)| dt * expm1_over(l * dt) / lp)
        .collect())
}

/// Per-mode solver state.
///
/// For a regular plan, `values` holds the coefficients `F_j` of the
/// eigen-expansion `u(t) = sum_j F_j e^{lambda_j (t - time)}`, valid for
/// `t >= time`. For a degenerate plan, `values` holds the solution and its
/// time derivatives `(u, u', ...)` at `time` instead.
#[derive(Debug, Clone)]
pub struct ModeState {
    pub plan: ModePlan,
    pub values: Vec<Complex64>,
    pub time: f64,
}

/// Quiescent state at `t0`: zero field and zero derivatives.
pub fn init_from_rest(plan: ModePlan, t0: f64) -> ModeState {
    let n = plan.eigenvalues.len();
    ModeState {
        plan,
        values: vec![Complex64::new(0.0, 0.0); n],
        time: t0,
    }
}

/// Advances a regular mode by one pulse: exact homogeneous propagation plus
/// one boxcar of source at amplitude `source_amp` (already sampled at the
/// step midpoint by the caller).
pub fn step(state: &ModeState, source_amp: Complex64, dt: f64) -> Result<ModeState> {
    if !(source_amp.re.is_finite() && source_amp.im.is_finite()) {
        return Err(TgmError::NumericalInput(
            "source amplitude is not finite".into(),
        ));
    }
    let weights = green_weights(&state.plan, dt)?;
    let values = state
        .values
        .iter()
        .zip(state.plan.eigenvalues.iter())
        .zip(weights.iter())
        .map(|((&f, &l), &w)| f * (l * dt).exp() + source_amp * w)
        .collect();
    Ok(ModeState {
        plan: state.plan.clone(),
        values,
        time: state.time + dt,
    })
}

/// Advances a degenerate mode by one pulse.
///
/// Only the zero-symbol forms of the supported equations are handled: order
/// 1 (`a_1 u' = s`) and order 2 (`a_2 u'' = s`), with all lower time
/// coefficients zero. Anything else is reported, not approximated.
pub fn zero_mode_step(state: &ModeState, source_amp: Complex64, dt: f64) -> Result<ModeState> {
    if !state.plan.degenerate {
        return Err(TgmError::InvalidArgument(
            "zero-mode step on a non-degenerate plan; use step".into(),
        ));
    }
    if !(dt.is_finite() && dt > 0.0) {
        return Err(TgmError::NumericalInput(format!(
            "step width must be positive and finite, got {dt}"
        )));
    }
    if !(source_amp.re.is_finite() && source_amp.im.is_finite()) {
        return Err(TgmError::NumericalInput(
            "source amplitude is not finite".into(),
        ));
    }
    let coeffs = &state.plan.time_coeffs;
    let p = state.plan.order();
    let coeff_scale = coeffs.iter().fold(1.0f64, |acc, a| acc.max(a.abs()));
    let lower_vanish = coeffs[..p].iter().all(|&a| a.abs() <= 1e-12 * coeff_scale);
    let symbol_vanish = state.plan.kappa.norm() <= 1e-9 * coeff_scale;
    if p > 2 || !lower_vanish || !symbol_vanish {
        return Err(TgmError::UnsupportedDegeneracy(format!(
            "degenerate mode with order {p}, kappa {} is outside the zero-mode special case",
            state.plan.kappa
        )));
    }
    let rate = source_amp / coeffs[p];
    let mut values = state.values.clone();
    match p {
        1 => {
            values[0] += rate * dt;
        }
        2 => {
            values[0] += state.values[1] * dt + rate * (0.5 * dt * dt);
            values[1] += rate * dt;
        }
        _ => unreachable!("order checked above"),
    }
    Ok(ModeState {
        plan: state.plan.clone(),
        values,
        time: state.time + dt,
    })
}

/// Evaluates the mode at any `t >= state.time` without further stepping.
pub fn reconstruct(state: &ModeState, t: f64) -> Result<Complex64> {
    if !t.is_finite() {
        return Err(TgmError::NumericalInput(format!(
            "evaluation time must be finite, got {t}"
        )));
    }
    if t < state.time - window_slack(state.time) {
        return Err(TgmError::OutOfWindow {
            t,
            t_state: state.time,
        });
    }
    let tau = (t - state.time).max(0.0);
    if state.plan.degenerate {
        // Taylor polynomial in the derivatives held by the state.
        let mut acc = Complex64::new(0.0, 0.0);
        let mut factor = 1.0;
        for (l, &v) in state.values.iter().enumerate() {
            if l > 0 {
                factor *= tau / l as f64;
            }
            acc += v * factor;
        }
        Ok(acc)
    } else {
        Ok(state
            .values
            .iter()
            .zip(state.plan.eigenvalues.iter())
            .map(|(&f, &l)| f * (l * tau).exp())
            .sum())
    }
}

/// All modes of a grid advancing in lockstep.
#[derive(Debug, Clone)]
pub struct SolverState {
    pub grid: SpectralGrid,
    pub modes: Vec<ModeState>,
    pub steps_taken: usize,
    pub time: f64,
}

impl SolverState {
    /// Builds per-mode plans for `spec` over every wavenumber of `grid` and
    /// starts them all from rest at `t0`.
    pub fn from_rest(spec: &OperatorSpec, grid: &SpectralGrid, t0: f64) -> Result<Self> {
        if spec.dimension != 1 {
            return Err(TgmError::InvalidArgument(
                "grid stepping is one-dimensional".into(),
            ));
        }
        let modes = grid
            .wavenumbers
            .iter()
            .map(|&k| ModePlan::new(spec, &[k]).map(|plan| init_from_rest(plan, t0)))
            .collect::<Result<Vec<_>>>()?;
        Ok(SolverState {
            grid: grid.clone(),
            modes,
            steps_taken: 0,
            time: t0,
        })
    }

    /// Advances every mode by `dt`, sampling `source(k, t_mid)` at the step
    /// midpoint. Degenerate modes are routed through the zero-mode path.
    pub fn advance<F>(&mut self, dt: f64, source: F) -> Result<()>
    where
        F: Fn(f64, f64) -> Complex64,
    {
        let t_mid = self.time + 0.5 * dt;
        for mode in self.modes.iter_mut() {
            let amp = source(mode.plan.wave_vector[0], t_mid);
            *mode = if mode.plan.degenerate {
                zero_mode_step(mode, amp, dt)?
            } else {
                step(mode, amp, dt)?
            };
        }
        self.steps_taken += 1;
        self.time = self.modes[0].time;
        Ok(())
    }

    /// Reconstructs the full spectrum at any `t >= self.time`.
    pub fn field_at(&self, t: f64) -> Result<SpectralField> {
        let amplitudes = self
            .modes
            .iter()
            .map(|mode| reconstruct(mode, t))
            .collect::<Result<Vec<_>>>()?;
        SpectralField::from_amplitudes(self.grid.clone(), amplitudes)
    }
}
