//! Reference integrators used to validate closed forms.
//!
//! Nothing here shares code with the solver paths: per-mode ODEs are
//! integrated by adaptive step-doubling Runge-Kutta 4, and Fourier integrals
//! by trapezoid quadrature, so agreement is evidence rather than tautology.

use num_complex::Complex64;

use crate::error::{Result, TgmError};

/// Default local error tolerance for the adaptive integrator.
pub const DEFAULT_TOLERANCE: f64 = 1e-12;

/// Right-hand side of the first-order system for
/// `sum_n a_n u^(n) + kappa u = f(t)` with state `y = (u, u', ..., u^(p-1))`.
fn derivative(
    time_coeffs: &[f64],
    kappa: Complex64,
    t: f64,
    y: &[Complex64],
    forcing: &dyn Fn(f64) -> Complex64,
) -> Vec<Complex64> {
    let p = time_coeffs.len() - 1;
    let mut dy = vec![Complex64::new(0.0, 0.0); p];
    dy[..p - 1].copy_from_slice(&y[1..p]);
    let mut top = forcing(t) - kappa * y[0];
    for n in 0..p {
        top -= time_coeffs[n] * y[n];
    }
    dy[p - 1] = top / time_coeffs[p];
    dy
}

fn rk4_step(
    time_coeffs: &[f64],
    kappa: Complex64,
    t: f64,
    y: &[Complex64],
    h: f64,
    forcing: &dyn Fn(f64) -> Complex64,
) -> Vec<Complex64> {
    let k1 = derivative(time_coeffs, kappa, t, y, forcing);
    let mid1: Vec<Complex64> = y.iter().zip(&k1).map(|(&v, &d)| v + 0.5 * h * d).collect();
    let k2 = derivative(time_coeffs, kappa, t + 0.5 * h, &mid1, forcing);
    let mid2: Vec<Complex64> = y.iter().zip(&k2).map(|(&v, &d)| v + 0.5 * h * d).collect();
    let k3 = derivative(time_coeffs, kappa, t + 0.5 * h, &mid2, forcing);
    let end: Vec<Complex64> = y.iter().zip(&k3).map(|(&v, &d)| v + h * d).collect();
    let k4 = derivative(time_coeffs, kappa, t + h, &end, forcing);
    y.iter()
        .enumerate()
        .map(|(i, &v)| v + (h / 6.0) * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]))
        .collect()
}

/// Integrates the mode ODE from `(t0, y0)` to `t1` with step-doubling
/// adaptivity: each step is taken once at `h` and twice at `h/2`, the
/// difference drives acceptance and step-size control, and the accepted
/// value is the Richardson-extrapolated one.
pub fn integrate(
    time_coeffs: &[f64],
    kappa: Complex64,
    forcing: &dyn Fn(f64) -> Complex64,
    y0: &[Complex64],
    t0: f64,
    t1: f64,
    tol: f64,
) -> Result<Vec<Complex64>> {
    if time_coeffs.len() < 2 || time_coeffs.last().copied().unwrap_or(0.0) == 0.0 {
        return Err(TgmError::InvalidOperator(
            "reference integrator needs time order >= 1".into(),
        ));
    }
    if y0.len() != time_coeffs.len() - 1 {
        return Err(TgmError::InvalidArgument(format!(
            "state has {} components, operator order is {}",
            y0.len(),
            time_coeffs.len() - 1
        )));
    }
    let span = t1 - t0;
    if span < 0.0 {
        return Err(TgmError::InvalidArgument(
            "integration interval runs backwards".into(),
        ));
    }
    let mut y = y0.to_vec();
    if span == 0.0 {
        return Ok(y);
    }
    let mut t = t0;
    let mut h = span / 64.0;
    let h_floor = span * 1e-13;
    while t1 - t > span * 1e-15 {
        h = h.min(t1 - t);
        let big = rk4_step(time_coeffs, kappa, t, &y, h, forcing);
        let half = rk4_step(time_coeffs, kappa, t, &y, 0.5 * h, forcing);
        let small = rk4_step(time_coeffs, kappa, t + 0.5 * h, &half, 0.5 * h, forcing);
        let err = small
            .iter()
            .zip(&big)
            .map(|(s, b)| (s - b).norm())
            .fold(0.0f64, f64::max)
            / 15.0;
        let scale = small.iter().map(|s| s.norm()).fold(1.0f64, f64::max);
        if err <= tol * scale || h <= h_floor {
            for (yi, (s, b)) in y.iter_mut().zip(small.iter().zip(&big)) {
                *yi = s + (s - b) / 15.0;
            }
            t += h;
            let grow = if err == 0.0 {
                2.0
            } else {
                (0.9 * (tol * scale / err).powf(0.2)).clamp(0.5, 2.0)
            };
            h *= grow;
        } else {
            h *= 0.5;
        }
    }
    Ok(y)
}

/// Response of the mode ODE to one unit boxcar of width `width`, evaluated
/// `tail` after the pulse ends, starting from rest. The discontinuity at the
/// pulse edge is a breakpoint, so each segment is smooth for the integrator.
pub fn boxcar_response(
    time_coeffs: &[f64],
    kappa: Complex64,
    width: f64,
    tail: f64,
) -> Result<Complex64> {
    if !(width.is_finite() && width > 0.0 && tail.is_finite() && tail >= 0.0) {
        return Err(TgmError::InvalidArgument(format!(
            "boxcar needs width > 0 and tail >= 0, got {width} and {tail}"
        )));
    }
    let rest = vec![Complex64::new(0.0, 0.0); time_coeffs.len() - 1];
    let one = |_t: f64| Complex64::new(1.0, 0.0);
    let mut y = integrate(
        time_coeffs,
        kappa,
        &one,
        &rest,
        0.0,
        width,
        DEFAULT_TOLERANCE,
    )?;
    if tail > 0.0 {
        let zero = |_t: f64| Complex64::new(0.0, 0.0);
        y = integrate(
            time_coeffs,
            kappa,
            &zero,
            &y,
            width,
            width + tail,
            DEFAULT_TOLERANCE,
        )?;
    }
    Ok(y[0])
}

/// Solution of the mode ODE at `t_end` under smooth forcing, from rest at 0.
pub fn forced_response(
    time_coeffs: &[f64],
    kappa: Complex64,
    forcing: &dyn Fn(f64) -> Complex64,
    t_end: f64,
) -> Result<Complex64> {
    let rest = vec![Complex64::new(0.0, 0.0); time_coeffs.len() - 1];
    let y = integrate(
        time_coeffs,
        kappa,
        forcing,
        &rest,
        0.0,
        t_end,
        DEFAULT_TOLERANCE,
    )?;
    Ok(y[0])
}

/// Trapezoid quadrature of the Fourier integral of a Gaussian,
/// `int exp(-(x - x0)^2 / (2 sigma^2)) e^{-i k x} dx`, truncated where the
/// integrand is far below double precision.
pub fn gaussian_fourier_quadrature(x0: f64, sigma: f64, k: f64) -> Complex64 {
    let (a, b) = (x0 - 14.0 * sigma, x0 + 14.0 * sigma);
    // Resolve both the envelope and the oscillation.
    let cycles = (k.abs() * (b - a) / (2.0 * std::f64::consts::PI)).ceil();
    let n = (20_000.0 + 200.0 * cycles) as usize;
    let h = (b - a) / n as f64;
    let f = |x: f64| {
        Complex64::from_polar((-(x - x0) * (x - x0) / (2.0 * sigma * sigma)).exp(), -k * x)
    };
    let mut acc = 0.5 * (f(a) + f(b));
    for i in 1..n {
        acc += f(a + i as f64 * h);
    }
    acc * h
}
