//! Closed forms for the two reference equations.
//!
//! The wave equation `(1/c^2) u_tt - u_xx = S` and the diffusion equation
//! `u_t - c u_xx = S` admit per-mode update rules and Green's functions in
//! elementary functions, plus exact solutions for a Gaussian source with
//! sinusoidal switch-on. These are written out independently of the generic
//! engine so the two routes can be checked against each other.

use num_complex::Complex64;

use crate::error::{Result, TgmError};
use crate::spectral::SpectralGrid;

/// Modes whose natural frequency `c |k|` is within this relative distance of
/// the driving frequency have no usable closed-form exact solution.
pub const RESONANCE_GUARD: f64 = 1e-6;

/// Which of the two reference equations is being solved.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EquationKind {
    Wave,
    Diffusion,
}

impl std::str::FromStr for EquationKind {
    type Err = TgmError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "wave" => Ok(EquationKind::Wave),
            "diffusion" => Ok(EquationKind::Diffusion),
            other => Err(TgmError::Config(format!(
                "unknown equation '{other}' (expected wave or diffusion)"
            ))),
        }
    }
}

impl std::fmt::Display for EquationKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            EquationKind::Wave => write!(f, "wave"),
            EquationKind::Diffusion => write!(f, "diffusion"),
        }
    }
}

/// Wave-equation parameters.
#[derive(Debug, Clone)]
pub struct WaveParams {
    /// Wave speed, positive.
    pub c: f64,
    pub grid: SpectralGrid,
}

impl WaveParams {
    pub fn new(c: f64, grid: SpectralGrid) -> Result<Self> {
        if !(c.is_finite() && c > 0.0) {
            return Err(TgmError::InvalidArgument(format!(
                "wave speed must be positive, got {c}"
            )));
        }
        Ok(WaveParams { c, grid })
    }
}

/// Diffusion-equation parameters.
#[derive(Debug, Clone)]
pub struct DiffusionParams {
    /// Diffusion coefficient, positive.
    pub c: f64,
    pub grid: SpectralGrid,
}

impl DiffusionParams {
    pub fn new(c: f64, grid: SpectralGrid) -> Result<Self> {
        if !(c.is_finite() && c > 0.0) {
            return Err(TgmError::InvalidArgument(format!(
                "diffusion coefficient must be positive, got {c}"
            )));
        }
        Ok(DiffusionParams { c, grid })
    }
}

/// Gaussian source localized at `x0` with width `sigma`, switched on at
/// `t = 0` with `sin(omega0 t)` time dependence and an overall `amplitude`.
#[derive(Debug, Clone)]
pub struct SourceModel {
    pub x0: f64,
    pub sigma: f64,
    pub omega0: f64,
    pub amplitude: f64,
}

impl SourceModel {
    pub fn new(x0: f64, sigma: f64, omega0: f64) -> Result<Self> {
        SourceModel::with_amplitude(x0, sigma, omega0, 1.0)
    }

    pub fn with_amplitude(x0: f64, sigma: f64, omega0: f64, amplitude: f64) -> Result<Self> {
        if !(x0.is_finite() && sigma.is_finite() && omega0.is_finite() && amplitude.is_finite()) {
            return Err(TgmError::InvalidArgument(
                "source parameters must be finite".into(),
            ));
        }
        if sigma <= 0.0 {
            return Err(TgmError::InvalidArgument(format!(
                "source width must be positive, got {sigma}"
            )));
        }
        if omega0 <= 0.0 {
            return Err(TgmError::InvalidArgument(format!(
                "driving frequency must be positive, got {omega0}"
            )));
        }
        if amplitude < 0.0 {
            return Err(TgmError::InvalidArgument(format!(
                "source amplitude must be nonnegative, got {amplitude}"
            )));
        }
        Ok(SourceModel {
            x0,
            sigma,
            omega0,
            amplitude,
        })
    }
}

/// Spatial spectrum of the Gaussian source:
/// `amplitude * sqrt(2 pi sigma^2) e^{-k^2 sigma^2 / 2} e^{-i k x0}`.
pub fn gaussian_source_spectrum(src: &SourceModel, k: f64) -> Complex64 {
    let modulus = src.amplitude
        * (2.0 * std::f64::consts::PI * src.sigma * src.sigma).sqrt()
        * (-k * k * src.sigma * src.sigma / 2.0).exp();
    Complex64::from_polar(modulus, -k * src.x0)
}

/// Time factor of the source: `sin(omega0 t)` for `t >= 0`, zero before.
pub fn source_time_amplitude(src: &SourceModel, t: f64) -> f64 {
    if t < 0.0 {
        0.0
    } else {
        (src.omega0 * t).sin()
    }
}

/// Full per-mode source amplitude `S(k) sin(omega0 t)`.
pub fn source_mode_amplitude(src: &SourceModel, k: f64, t: f64) -> Complex64 {
    gaussian_source_spectrum(src, k) * source_time_amplitude(src, t)
}

/// `sinh(x)/x * e^{-x}` for `x >= 0`, evaluated as `-expm1(-2x)/(2x)` so
/// neither cancellation at small `x` nor overflow at large `x` occurs.
fn sinhc_exp(x: f64) -> f64 {
    if x == 0.0 {
        1.0
    } else {
        -(-2.0 * x).exp_m1() / (2.0 * x)
    }
}

// ---------------------------------------------------------------------------
// Wave equation.
// ---------------------------------------------------------------------------

/// One wave mode in the two-branch form: `F+` and `F-` multiply the
/// right- and left-going phases `e^{+-i k c (t - time)}`.
#[derive(Debug, Clone)]
pub struct WaveModeState {
    pub k: f64,
    pub f_plus: Complex64,
    pub f_minus: Complex64,
    pub time: f64,
}

impl WaveModeState {
    /// Quiescent mode at `t0`. The `k = 0` mode has no two-branch form and
    /// must go through the generic zero-mode path.
    pub fn from_rest(k: f64, t0: f64) -> Result<Self> {
        if k == 0.0 {
            return Err(TgmError::DegenerateMode(
                "the k = 0 wave mode has no two-branch closed form".into(),
            ));
        }
        Ok(WaveModeState {
            k,
            f_plus: Complex64::new(0.0, 0.0),
            f_minus: Complex64::new(0.0, 0.0),
            time: t0,
        })
    }
}

/// Green's function of one boxcar pulse for a wave mode, for `t >= t_n`:
/// `-(i/k^2) sin(k c dt / 2) [e^{i k c (t - t_n + dt/2)} - e^{-i k c (t - t_n + dt/2)}]`.
///
/// The bracket is `2i sin(...)`, so the value is real up to rounding; it
/// vanishes whenever the pulse spans a full period (`k c dt = 2 pi`).
pub fn wave_green(k: f64, params: &WaveParams, t: f64, t_n: f64, dt: f64) -> Result<Complex64> {
    if k == 0.0 {
        return Err(TgmError::DegenerateMode(
            "wave Green's function is undefined at k = 0".into(),
        ));
    }
    if !(dt.is_finite() && dt > 0.0) {
        return Err(TgmError::NumericalInput(format!(
            "pulse width must be positive and finite, got {dt}"
        )));
    }
    if t < t_n - crate::engine::window_slack(t_n) {
        return Err(TgmError::OutOfWindow { t, t_state: t_n });
    }
    let arg = k * params.c * ((t - t_n).max(0.0) + 0.5 * dt);
    let half = k * params.c * dt * 0.5;
    let bracket = Complex64::from_polar(1.0, arg) - Complex64::from_polar(1.0, -arg);
    Ok(-Complex64::new(0.0, 1.0) / (k * k) * half.sin() * bracket)
}

/// Advances one wave mode by one pulse:
/// `F+- <- F+- e^{+-i k c dt} + s e^{+-i k c dt / 2} sin(k c dt / 2)`.
pub fn wave_step(
    state: &WaveModeState,
    params: &WaveParams,
    source_amp: Complex64,
    dt: f64,
) -> Result<WaveModeState> {
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
    let theta = state.k * params.c * dt;
    let full = Complex64::from_polar(1.0, theta);
    let inject = Complex64::from_polar(1.0, 0.5 * theta) * (0.5 * theta).sin();
    Ok(WaveModeState {
        k: state.k,
        f_plus: state.f_plus * full + source_amp * inject,
        f_minus: state.f_minus * full.conj() + source_amp * inject.conj(),
        time: state.time + dt,
    })
}

/// Evaluates one wave mode at `t >= state.time`:
/// `u = -(i/k^2) [e^{i k c tau} F+ - e^{-i k c tau} F-]`.
pub fn wave_reconstruct(state: &WaveModeState, params: &WaveParams, t: f64) -> Result<Complex64> {
    if t < state.time - crate::engine::window_slack(state.time) {
        return Err(TgmError::OutOfWindow {
            t,
            t_state: state.time,
        });
    }
    let tau = (t - state.time).max(0.0);
    let phase = Complex64::from_polar(1.0, state.k * params.c * tau);
    let bracket = phase * state.f_plus - phase.conj() * state.f_minus;
    Ok(-Complex64::new(0.0, 1.0) / (state.k * state.k) * bracket)
}

// ---------------------------------------------------------------------------
// Diffusion equation.
// ---------------------------------------------------------------------------

/// One diffusion mode: a single coefficient `F` multiplying `e^{-c k^2 (t - time)}`.
#[derive(Debug, Clone)]
pub struct DiffusionModeState {
    pub k: f64,
    pub f: Complex64,
    pub time: f64,
}

impl DiffusionModeState {
    /// Quiescent mode at `t0`; the closed form handles `k = 0` as a limit.
    pub fn from_rest(k: f64, t0: f64) -> Self {
        DiffusionModeState {
            k,
            f: Complex64::new(0.0, 0.0),
            time: t0,
        }
    }
}

/// Green's function of one boxcar pulse for a diffusion mode, for `t >= t_n`:
/// `dt * (sinh(c k^2 dt / 2) / (c k^2 dt / 2)) e^{-c k^2 (t - t_n + dt/2)}`.
///
/// At `k = 0` this is exactly `dt`.
pub fn diffusion_green(k: f64, params: &DiffusionParams, t: f64, t_n: f64, dt: f64) -> Result<f64> {
    if !(dt.is_finite() && dt > 0.0) {
        return Err(TgmError::NumericalInput(format!(
            "pulse width must be positive and finite, got {dt}"
        )));
    }
    if t < t_n - crate::engine::window_slack(t_n) {
        return Err(TgmError::OutOfWindow { t, t_state: t_n });
    }
    let x = params.c * k * k * dt * 0.5;
    Ok(dt * sinhc_exp(x) * (-params.c * k * k * (t - t_n).max(0.0)).exp())
}

/// Advances one diffusion mode by one pulse:
/// `F <- F e^{-c k^2 dt} + dt (sinh(c k^2 dt/2)/(c k^2 dt/2)) e^{-c k^2 dt/2} s`.
pub fn diffusion_step(
    state: &DiffusionModeState,
    params: &DiffusionParams,
    source_amp: Complex64,
    dt: f64,
) -> Result<DiffusionModeState> {
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
    let rate = params.c * state.k * state.k;
    let inject = dt * sinhc_exp(0.5 * rate * dt);
    Ok(DiffusionModeState {
        k: state.k,
        f: state.f * (-rate * dt).exp() + source_amp * inject,
        time: state.time + dt,
    })
}

/// Evaluates one diffusion mode at `t >= state.time`: `u = F e^{-c k^2 tau}`.
pub fn diffusion_reconstruct(
    state: &DiffusionModeState,
    params: &DiffusionParams,
    t: f64,
) -> Result<Complex64> {
    if t < state.time - crate::engine::window_slack(state.time) {
        return Err(TgmError::OutOfWindow {
            t,
            t_state: state.time,
        });
    }
    let tau = (t - state.time).max(0.0);
    Ok(state.f * (-params.c * state.k * state.k * tau).exp())
}

// ---------------------------------------------------------------------------
// Exact solutions for the switched-on sinusoidal Gaussian source.
// ---------------------------------------------------------------------------

/// Exact wave-mode solution from rest under `S(k) sin(omega0 t)`:
/// `c^2 S(k) / (omega0^2 - (c k)^2) [(omega0 / (c k)) sin(c k t) - sin(omega0 t)]`.
///
/// Modes with `c |k|` within [`RESONANCE_GUARD`] of `omega0` are rejected;
/// the `k = 0` mode has its own form in [`exact_wave_zero_mode`].
pub fn exact_wave(k: f64, params: &WaveParams, src: &SourceModel, t: f64) -> Result<Complex64> {
    if k == 0.0 {
        return Err(TgmError::DegenerateMode(
            "use exact_wave_zero_mode for k = 0".into(),
        ));
    }
    if !(t.is_finite() && t >= 0.0) {
        return Err(TgmError::InvalidArgument(format!(
            "evaluation time must be nonnegative, got {t}"
        )));
    }
    let gap = (src.omega0 - params.c * k.abs()).abs();
    let guard = RESONANCE_GUARD * src.omega0;
    if gap <= guard {
        return Err(TgmError::NearResonance { gap, guard });
    }
    let ck = params.c * k;
    let bracket = (src.omega0 / ck) * (ck * t).sin() - (src.omega0 * t).sin();
    let denom = src.omega0 * src.omega0 - ck * ck;
    Ok(gaussian_source_spectrum(src, k) * (params.c * params.c * bracket / denom))
}

/// Exact `k = 0` wave solution: `(1/c^2) u_tt = S(0) sin(omega0 t)` from
/// rest integrates to `c^2 S(0) (t / omega0 - sin(omega0 t) / omega0^2)`.
pub fn exact_wave_zero_mode(params: &WaveParams, src: &SourceModel, t: f64) -> Result<Complex64> {
    if !(t.is_finite() && t >= 0.0) {
        return Err(TgmError::InvalidArgument(format!(
            "evaluation time must be nonnegative, got {t}"
        )));
    }
    let shape = t / src.omega0 - (src.omega0 * t).sin() / (src.omega0 * src.omega0);
    Ok(gaussian_source_spectrum(src, 0.0) * (params.c * params.c * shape))
}

/// Exact diffusion-mode solution from rest under `S(k) sin(omega0 t)`:
/// `S(k) [omega0 e^{-c k^2 t} + c k^2 sin(omega0 t) - omega0 cos(omega0 t)]
///  / ((c k^2)^2 + omega0^2)`.
///
/// At `k = 0` the bracket over the denominator reduces to
/// `(1 - cos(omega0 t)) / omega0`, the direct integral of the sine.
pub fn exact_diffusion(
    k: f64,
    params: &DiffusionParams,
    src: &SourceModel,
    t: f64,
) -> Result<Complex64> {
    if !(t.is_finite() && t >= 0.0) {
        return Err(TgmError::InvalidArgument(format!(
            "evaluation time must be nonnegative, got {t}"
        )));
    }
    let a = params.c * k * k;
    let w = src.omega0;
    let bracket = w * (-a * t).exp() + a * (w * t).sin() - w * (w * t).cos();
    Ok(gaussian_source_spectrum(src, k) * (bracket / (a * a + w * w)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine;
    use crate::harness::oracle;
    use crate::spectral::make_grid;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c64(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn rel(a: Complex64, b: Complex64) -> f64 {
        (a - b).norm() / b.norm().max(1e-300)
    }

    fn table_grid() -> SpectralGrid {
        make_grid(64, 10.0).unwrap()
    }

    fn source() -> SourceModel {
        SourceModel::new(5.0, 0.5, std::f64::consts::PI).unwrap()
    }

    #[test]
    fn spectrum_at_zero_wavenumber_is_the_gaussian_integral() {
        let src = source();
        let want = (2.0 * std::f64::consts::PI * 0.25).sqrt();
        let got = gaussian_source_spectrum(&src, 0.0);
        assert!(rel(got, c64(want, 0.0)) < 1e-15, "{got} vs {want}");
    }

    #[test]
    fn spectrum_modulus_ignores_the_source_position() {
        let a = SourceModel::new(5.0, 0.5, 1.0).unwrap();
        let b = SourceModel::new(-2.75, 0.5, 1.0).unwrap();
        for k in [0.3, 1.0, 4.5] {
            let ma = gaussian_source_spectrum(&a, k).norm();
            let mb = gaussian_source_spectrum(&b, k).norm();
            assert!((ma - mb).abs() < 1e-15 * ma, "k = {k}");
        }
    }

    #[test]
    fn spectrum_matches_trapezoid_quadrature_of_the_integral() {
        let src = source();
        for k in [0.5, 2.0, 6.0] {
            let got = gaussian_source_spectrum(&src, k);
            let want = oracle::gaussian_fourier_quadrature(5.0, 0.5, k);
            assert!(rel(got, want) < 1e-10, "k = {k}: {got} vs {want}");
        }
    }

    #[test]
    fn time_amplitude_switches_on_at_zero() {
        let src = SourceModel::new(5.0, 0.5, 2.0 * std::f64::consts::PI).unwrap();
        assert_eq!(source_time_amplitude(&src, -0.5), 0.0);
        assert_eq!(source_time_amplitude(&src, -1e-300), 0.0);
        let quarter = 0.25;
        assert!((source_time_amplitude(&src, quarter) - 1.0).abs() < 1e-15);
        let mid = 0.5 * (0.01 + 0.02);
        assert!(
            (source_time_amplitude(&src, mid) - (2.0 * std::f64::consts::PI * 0.015).sin()).abs()
                < 1e-15
        );
    }

    #[test]
    fn zero_amplitude_source_has_zero_spectrum() {
        let src = SourceModel::with_amplitude(5.0, 0.5, 1.0, 0.0).unwrap();
        for k in [0.0, 1.0, 10.0] {
            assert_eq!(gaussian_source_spectrum(&src, k).norm(), 0.0);
        }
    }

    #[test]
    fn source_model_rejects_bad_parameters() {
        assert!(SourceModel::new(5.0, 0.0, 1.0).is_err());
        assert!(SourceModel::new(5.0, -0.5, 1.0).is_err());
        assert!(SourceModel::new(5.0, 0.5, 0.0).is_err());
        assert!(SourceModel::new(f64::NAN, 0.5, 1.0).is_err());
        assert!(SourceModel::with_amplitude(5.0, 0.5, 1.0, -1.0).is_err());
    }

    #[test]
    fn wave_green_vanishes_for_a_full_period_pulse() {
        let params = WaveParams::new(1.0, table_grid()).unwrap();
        let k = 2.0;
        let dt = 2.0 * std::f64::consts::PI / (k * params.c);
        let g = wave_green(k, &params, 3.0 * dt, 2.0 * dt, dt).unwrap();
        assert!(g.norm() < 1e-14, "full-period pulse leaves {g}");
    }

    #[test]
    fn wave_green_is_real_and_matches_the_product_form() {
        let params = WaveParams::new(1.3, table_grid()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(43);
        for _ in 0..100 {
            let k = rng.gen_range(0.2..15.0) * if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
            let dt = rng.gen_range(1e-3..1.0);
            let t_n = rng.gen_range(0.0..3.0);
            let t = t_n + rng.gen_range(0.0..2.0);
            let g = wave_green(k, &params, t, t_n, dt).unwrap();
            assert!(
                g.im.abs() <= 1e-14 * g.norm().max(1e-30),
                "imag part {}",
                g.im
            );
            let want = 2.0 / (k * k)
                * (k * params.c * dt / 2.0).sin()
                * (k * params.c * (t - t_n + dt / 2.0)).sin();
            assert!((g.re - want).abs() <= 1e-13 * want.abs().max(1e-15));
        }
    }

    #[test]
    fn wave_green_matches_the_reference_integrator() {
        let params = WaveParams::new(1.0, table_grid()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(47);
        for _ in 0..25 {
            let k = rng.gen_range(0.3..10.0);
            let dt = rng.gen_range(0.01..0.5);
            let tail = rng.gen_range(0.0..1.0);
            let got = wave_green(k, &params, dt + tail, dt, dt).unwrap();
            let coeffs = [0.0, 0.0, 1.0 / (params.c * params.c)];
            let want = oracle::boxcar_response(&coeffs, c64(k * k, 0.0), dt, tail).unwrap();
            assert!(
                (got - want).norm() <= 1e-8 * want.norm().max(1e-12),
                "k {k}, dt {dt}, tail {tail}: {got} vs {want}"
            );
        }
    }

    #[test]
    fn wave_step_without_source_preserves_branch_magnitudes() {
        let params = WaveParams::new(2.0, table_grid()).unwrap();
        let mut state = WaveModeState::from_rest(1.5, 0.0).unwrap();
        state.f_plus = c64(0.3, -0.4);
        state.f_minus = c64(-0.1, 0.9);
        for _ in 0..50 {
            state = wave_step(&state, &params, c64(0.0, 0.0), 0.37).unwrap();
        }
        assert!((state.f_plus.norm() - 0.5).abs() < 1e-13);
        assert!((state.f_minus.norm() - (0.1f64 * 0.1 + 0.9 * 0.9).sqrt()).abs() < 1e-13);
    }

    #[test]
    fn single_pulse_reconstruction_equals_the_green_function() {
        let params = WaveParams::new(1.0, table_grid()).unwrap();
        let (k, dt, s) = (2.5, 0.03, c64(0.7, -0.2));
        let state = WaveModeState::from_rest(k, 0.0).unwrap();
        let state = wave_step(&state, &params, s, dt).unwrap();
        for tail in [0.0, 0.01, 0.4] {
            let got = wave_reconstruct(&state, &params, dt + tail).unwrap();
            let want = s * wave_green(k, &params, dt + tail, dt, dt).unwrap();
            assert!(rel(got, want) < 1e-13, "tail {tail}: {got} vs {want}");
        }
    }

    #[test]
    fn wave_closed_form_matches_the_generic_engine() {
        // Same pulses through both routes; the engine coefficients relate to
        // the two-branch ones by F_engine(+-) = -+(i/k^2) F(+-).
        let grid = table_grid();
        let params = WaveParams::new(1.0, grid.clone()).unwrap();
        let src = source();
        let spec = crate::spectral::OperatorSpec::wave_1d(params.c).unwrap();
        for &k in grid.wavenumbers.iter().filter(|&&k| k != 0.0).take(7) {
            let dt = 0.01;
            let mut closed = WaveModeState::from_rest(k, 0.0).unwrap();
            let plan = engine::ModePlan::new(&spec, &[k]).unwrap();
            let mut generic = engine::init_from_rest(plan, 0.0);
            for n in 0..20 {
                let t_mid = (n as f64 + 0.5) * dt;
                let amp = source_mode_amplitude(&src, k, t_mid);
                closed = wave_step(&closed, &params, amp, dt).unwrap();
                generic = engine::step(&generic, amp, dt).unwrap();
            }
            for tail in [0.0, 0.004] {
                let t = closed.time + tail;
                let a = wave_reconstruct(&closed, &params, t).unwrap();
                let b = engine::reconstruct(&generic, t).unwrap();
                assert!(
                    (a - b).norm() <= 1e-12 * a.norm().max(1e-30),
                    "k = {k}, tail = {tail}: {a} vs {b}"
                );
            }
            // The normalization map between the two state conventions.
            let plus_idx = generic
                .plan
                .eigenvalues
                .iter()
                .position(|l| (l - c64(0.0, k * params.c)).norm() < 1e-9 * k.abs())
                .expect("engine carries the +ikc branch");
            let factor = -c64(0.0, 1.0) / (k * k);
            assert!(rel(generic.values[plus_idx], factor * closed.f_plus) < 1e-12);
            assert!(rel(generic.values[1 - plus_idx], -factor * closed.f_minus) < 1e-12);
        }
    }

    #[test]
    fn diffusion_green_reduces_to_dt_at_zero_wavenumber() {
        let params = DiffusionParams::new(3.0, table_grid()).unwrap();
        let g = diffusion_green(0.0, &params, 1.0, 1.0, 0.125).unwrap();
        assert_eq!(g, 0.125, "k = 0 boxcar integrates to exactly dt");
    }

    #[test]
    fn diffusion_green_matches_the_reference_integrator() {
        let params = DiffusionParams::new(3.0, table_grid()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(53);
        for _ in 0..25 {
            let k = rng.gen_range(0.3..8.0);
            let dt = rng.gen_range(0.001..0.5);
            let tail = rng.gen_range(0.0..0.3);
            let got = diffusion_green(k, &params, dt + tail, dt, dt).unwrap();
            let want =
                oracle::boxcar_response(&[0.0, 1.0], c64(params.c * k * k, 0.0), dt, tail).unwrap();
            // The integrator's error is absolute (~1e-12 over the run), so
            // deeply decayed values cannot be compared relatively.
            assert!(
                (c64(got, 0.0) - want).norm() <= 1e-10 + 1e-8 * want.norm(),
                "k {k}, dt {dt}: {got} vs {want}"
            );
        }
    }

    #[test]
    fn diffusion_green_is_positive_and_decays_in_time() {
        let params = DiffusionParams::new(3.0, table_grid()).unwrap();
        let (k, dt) = (2.0, 0.05);
        let mut prev = f64::INFINITY;
        for i in 0..20 {
            let t = dt + i as f64 * 0.1;
            let g = diffusion_green(k, &params, t, dt, dt).unwrap();
            assert!(g > 0.0 && g < prev, "t = {t}: g = {g}, prev = {prev}");
            prev = g;
        }
    }

    #[test]
    fn diffusion_step_decays_without_source_for_any_step_width() {
        let params = DiffusionParams::new(3.0, table_grid()).unwrap();
        let mut state = DiffusionModeState::from_rest(1.2, 0.0);
        state.f = c64(1.0, 0.5);
        for dt in [1e-3, 0.1, 10.0, 1e4] {
            let next = diffusion_step(&state, &params, c64(0.0, 0.0), dt).unwrap();
            assert!(
                next.f.norm() < state.f.norm(),
                "dt = {dt} grew the mode: {} -> {}",
                state.f.norm(),
                next.f.norm()
            );
            state = next;
        }
    }

    #[test]
    fn diffusion_zero_mode_accumulates_the_boxcar_sums() {
        let params = DiffusionParams::new(3.0, table_grid()).unwrap();
        let src = source();
        let dt = 0.01;
        let mut state = DiffusionModeState::from_rest(0.0, 0.0);
        let mut acc = c64(0.0, 0.0);
        for n in 0..10 {
            let t_mid = (n as f64 + 0.5) * dt;
            let amp = source_mode_amplitude(&src, 0.0, t_mid);
            state = diffusion_step(&state, &params, amp, dt).unwrap();
            acc += amp * dt;
        }
        assert!(rel(state.f, acc) < 1e-13, "{} vs {acc}", state.f);
    }

    #[test]
    fn diffusion_closed_form_matches_the_generic_engine() {
        let grid = table_grid();
        let params = DiffusionParams::new(3.0, grid.clone()).unwrap();
        let src = SourceModel::new(5.0, 0.5, 40.0 * std::f64::consts::PI).unwrap();
        let spec = crate::spectral::OperatorSpec::diffusion_1d(params.c).unwrap();
        for &k in grid.wavenumbers.iter().filter(|&&k| k != 0.0).take(7) {
            let dt = 0.001;
            let mut closed = DiffusionModeState::from_rest(k, 0.0);
            let plan = engine::ModePlan::new(&spec, &[k]).unwrap();
            let mut generic = engine::init_from_rest(plan, 0.0);
            for n in 0..20 {
                let t_mid = (n as f64 + 0.5) * dt;
                let amp = source_mode_amplitude(&src, k, t_mid);
                closed = diffusion_step(&closed, &params, amp, dt).unwrap();
                generic = engine::step(&generic, amp, dt).unwrap();
            }
            for tail in [0.0, 0.0004] {
                let t = closed.time + tail;
                let a = diffusion_reconstruct(&closed, &params, t).unwrap();
                let b = engine::reconstruct(&generic, t).unwrap();
                assert!(
                    (a - b).norm() <= 1e-12 * a.norm().max(1e-30),
                    "k = {k}, tail = {tail}: {a} vs {b}"
                );
            }
        }
    }

    #[test]
    fn conjugate_wavenumber_pairs_stay_conjugate_under_stepping() {
        let grid = table_grid();
        let wave = WaveParams::new(1.0, grid.clone()).unwrap();
        let diff = DiffusionParams::new(3.0, grid.clone()).unwrap();
        let src = source();
        let (k, dt) = (grid.wavenumbers[3], 0.01);

        let mut wp = WaveModeState::from_rest(k, 0.0).unwrap();
        let mut wm = WaveModeState::from_rest(-k, 0.0).unwrap();
        let mut dp = DiffusionModeState::from_rest(k, 0.0);
        let mut dm = DiffusionModeState::from_rest(-k, 0.0);
        for n in 0..30 {
            let t_mid = (n as f64 + 0.5) * dt;
            let amp_p = source_mode_amplitude(&src, k, t_mid);
            let amp_m = source_mode_amplitude(&src, -k, t_mid);
            assert!(
                rel(amp_m, amp_p.conj()) < 1e-15,
                "source is conjugate-symmetric"
            );
            wp = wave_step(&wp, &wave, amp_p, dt).unwrap();
            wm = wave_step(&wm, &wave, amp_m, dt).unwrap();
            dp = diffusion_step(&dp, &diff, amp_p, dt).unwrap();
            dm = diffusion_step(&dm, &diff, amp_m, dt).unwrap();
        }
        // Evaluate at the accumulated state time; 30 * dt differs by one ulp.
        let t = wp.time;
        let uw_p = wave_reconstruct(&wp, &wave, t).unwrap();
        let uw_m = wave_reconstruct(&wm, &wave, t).unwrap();
        assert!(
            rel(uw_m, uw_p.conj()) < 1e-12,
            "wave: {uw_m} vs conj {uw_p}"
        );
        let ud_p = diffusion_reconstruct(&dp, &diff, t).unwrap();
        let ud_m = diffusion_reconstruct(&dm, &diff, t).unwrap();
        assert!(
            rel(ud_m, ud_p.conj()) < 1e-12,
            "diffusion: {ud_m} vs conj {ud_p}"
        );
    }

    #[test]
    fn exact_wave_starts_from_rest_and_matches_the_integrator() {
        let grid = table_grid();
        let params = WaveParams::new(1.0, grid.clone()).unwrap();
        let src = source();
        let k = grid.wavenumbers[1];
        assert!(exact_wave(k, &params, &src, 0.0).unwrap().norm() < 1e-15);

        let coeffs = [0.0, 0.0, 1.0 / (params.c * params.c)];
        let spectrum = gaussian_source_spectrum(&src, k);
        let omega0 = src.omega0;
        let forcing = move |t: f64| spectrum * (omega0 * t).sin();
        let want = oracle::forced_response(&coeffs, c64(k * k, 0.0), &forcing, 1.0).unwrap();
        let got = exact_wave(k, &params, &src, 1.0).unwrap();
        assert!(rel(got, want) < 1e-8, "{got} vs {want}");
    }

    #[test]
    fn exact_wave_rejects_resonant_and_degenerate_modes() {
        let params = WaveParams::new(1.0, table_grid()).unwrap();
        let src = SourceModel::new(5.0, 0.5, 2.0).unwrap();
        match exact_wave(2.0, &params, &src, 1.0) {
            Err(TgmError::NearResonance { .. }) => {}
            other => panic!("expected near-resonance, got {other:?}"),
        }
        // Just inside and just outside the guard band.
        assert!(exact_wave(2.0 * (1.0 + 0.5e-6), &params, &src, 1.0).is_err());
        assert!(exact_wave(2.0 * (1.0 + 5e-6), &params, &src, 1.0).is_ok());
        assert!(matches!(
            exact_wave(0.0, &params, &src, 1.0),
            Err(TgmError::DegenerateMode(_))
        ));
    }

    #[test]
    fn exact_wave_zero_mode_matches_the_integrator() {
        let params = WaveParams::new(1.0, table_grid()).unwrap();
        let src = source();
        let coeffs = [0.0, 0.0, 1.0 / (params.c * params.c)];
        let spectrum = gaussian_source_spectrum(&src, 0.0);
        let omega0 = src.omega0;
        let forcing = move |t: f64| spectrum * (omega0 * t).sin();
        let want = oracle::forced_response(&coeffs, c64(0.0, 0.0), &forcing, 1.0).unwrap();
        let got = exact_wave_zero_mode(&params, &src, 1.0).unwrap();
        assert!(rel(got, want) < 1e-8, "{got} vs {want}");
    }

    #[test]
    fn exact_diffusion_matches_the_integrator_across_modes() {
        let grid = table_grid();
        let params = DiffusionParams::new(3.0, grid.clone()).unwrap();
        let src = SourceModel::new(5.0, 0.5, 40.0 * std::f64::consts::PI).unwrap();
        for &k in [
            grid.wavenumbers[0],
            grid.wavenumbers[1],
            grid.wavenumbers[5],
        ]
        .iter()
        {
            assert!(exact_diffusion(k, &params, &src, 0.0).unwrap().norm() < 1e-15);
            let spectrum = gaussian_source_spectrum(&src, k);
            let omega0 = src.omega0;
            let forcing = move |t: f64| spectrum * (omega0 * t).sin();
            let want =
                oracle::forced_response(&[0.0, 1.0], c64(params.c * k * k, 0.0), &forcing, 0.1)
                    .unwrap();
            let got = exact_diffusion(k, &params, &src, 0.1).unwrap();
            // At k = 0 and omega0 t = 4 pi the exact value is identically
            // zero, so the comparison needs an absolute floor.
            assert!(
                (got - want).norm() <= 1e-10 + 1e-8 * want.norm(),
                "k = {k}: {got} vs {want}"
            );
        }
    }

    #[test]
    fn exact_diffusion_zero_mode_is_the_integral_of_the_sine() {
        let params = DiffusionParams::new(3.0, table_grid()).unwrap();
        let src = source();
        for t in [0.05, 0.3, 2.0] {
            let got = exact_diffusion(0.0, &params, &src, t).unwrap();
            let want =
                gaussian_source_spectrum(&src, 0.0) * ((1.0 - (src.omega0 * t).cos()) / src.omega0);
            assert!(rel(got, want) < 1e-13, "t = {t}: {got} vs {want}");
        }
    }
}
