//! Periodic grid, discrete Fourier transforms, and operator symbols.
//!
//! Everything downstream works per Fourier mode, so this module fixes the
//! conventions once: grid spacing `dx = length / (n_points - 1)`, transform
//! period `n_points * dx`, a `1/n` factor on the forward transform and none
//! on the inverse, and signed wavenumbers in standard FFT order.

use std::collections::BTreeMap;

use num_complex::Complex64;
use rustfft::{num_complex::Complex, FftPlanner};

use crate::error::{Result, TgmError};

/// Inverse transforms whose relative imaginary residue exceeds this are
/// rejected instead of silently truncated.
pub const REALITY_TOLERANCE: f64 = 1e-10;

/// Uniform periodic 1-D grid together with its signed wavenumbers.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralGrid {
    /// Number of sample points; even and at least 2.
    pub n_points: usize,
    /// Nominal domain length; the transform period is `n_points * dx`.
    pub length: f64,
    /// Grid spacing, `length / (n_points - 1)`.
    pub dx: f64,
    /// Signed wavenumbers `k_m = 2 pi m / (n_points * dx)` in FFT order:
    /// `m = 0, 1, ..., n/2 - 1, -n/2, ..., -1`.
    pub wavenumbers: Vec<f64>,
}

/// Builds the uniform grid and its wavenumber table.
///
/// `n_points` must be even (so the Nyquist bin is unambiguous) and at least
/// 2; `length` must be positive and finite.
pub fn make_grid(n_points: usize, length: f64) -> Result<SpectralGrid> {
    if n_points < 2 || !n_points.is_multiple_of(2) {
        return Err(TgmError::InvalidArgument(format!(
            "n_points must be even and >= 2, got {n_points}"
        )));
    }
    if !(length.is_finite() && length > 0.0) {
        return Err(TgmError::InvalidArgument(format!(
            "length must be positive and finite, got {length}"
        )));
    }
    let n = n_points;
    let dx = length / (n as f64 - 1.0);
    let period = n as f64 * dx;
    let dk = 2.0 * std::f64::consts::PI / period;
    let wavenumbers = (0..n)
        .map(|m| {
            let signed = if m < n / 2 {
                m as i64
            } else {
                m as i64 - n as i64
            };
            signed as f64 * dk
        })
        .collect();
    Ok(SpectralGrid {
        n_points: n,
        length,
        dx,
        wavenumbers,
    })
}

impl SpectralGrid {
    /// Sample position of grid point `j`.
    pub fn x(&self, j: usize) -> f64 {
        j as f64 * self.dx
    }

    /// Largest wavenumber magnitude on the grid, `pi / dx` (Nyquist).
    pub fn k_max(&self) -> f64 {
        std::f64::consts::PI / self.dx
    }

    /// Index of the bin whose wavenumber pairs with bin `m` under `k -> -k`.
    /// Bin 0 and the Nyquist bin pair with themselves.
    pub fn conjugate_bin(&self, m: usize) -> usize {
        if m == 0 {
            0
        } else {
            self.n_points - m
        }
    }

    /// Errors unless `other` describes the identical grid.
    pub fn check_same(&self, other: &SpectralGrid) -> Result<()> {
        if self.n_points != other.n_points || self.length != other.length {
            return Err(TgmError::GridMismatch(format!(
                "{} points / length {} vs {} points / length {}",
                self.n_points, self.length, other.n_points, other.length
            )));
        }
        Ok(())
    }
}

/// Complex mode amplitudes on a [`SpectralGrid`].
#[derive(Debug, Clone)]
pub struct SpectralField {
    pub grid: SpectralGrid,
    /// One amplitude per wavenumber, in the grid's bin order.
    pub amplitudes: Vec<Complex64>,
}

impl SpectralField {
    /// Wraps amplitudes after checking the length against the grid.
    pub fn from_amplitudes(grid: SpectralGrid, amplitudes: Vec<Complex64>) -> Result<Self> {
        if amplitudes.len() != grid.n_points {
            return Err(TgmError::InvalidArgument(format!(
                "expected {} amplitudes for the grid, got {}",
                grid.n_points,
                amplitudes.len()
            )));
        }
        Ok(SpectralField { grid, amplitudes })
    }

    /// All-zero field on `grid`.
    pub fn zeros(grid: SpectralGrid) -> Self {
        let n = grid.n_points;
        SpectralField {
            grid,
            amplitudes: vec![Complex64::new(0.0, 0.0); n],
        }
    }

    /// Largest violation of the real-signal symmetry `a(-k) = conj(a(k))`,
    /// relative to the largest amplitude magnitude (0 for an all-zero field).
    pub fn hermitian_residue(&self) -> f64 {
        let peak = self
            .amplitudes
            .iter()
            .map(|a| a.norm())
            .fold(0.0f64, f64::max);
        if peak == 0.0 {
            return 0.0;
        }
        let mut worst = 0.0f64;
        for m in 0..self.amplitudes.len() {
            let partner = self.grid.conjugate_bin(m);
            let defect = (self.amplitudes[partner] - self.amplitudes[m].conj()).norm();
            worst = worst.max(defect);
        }
        worst / peak
    }

    /// Projects onto the nearest real-signal spectrum: conjugate pairs are
    /// averaged and the self-conjugate bins (0 and Nyquist) are forced real.
    pub fn enforce_hermitian(&mut self) {
        let n = self.amplitudes.len();
        for m in 0..=n / 2 {
            let partner = self.grid.conjugate_bin(m);
            if partner == m {
                self.amplitudes[m] = Complex64::new(self.amplitudes[m].re, 0.0);
            } else {
                let avg = 0.5 * (self.amplitudes[m] + self.amplitudes[partner].conj());
                self.amplitudes[m] = avg;
                self.amplitudes[partner] = avg.conj();
            }
        }
    }

    /// True when every amplitude is finite.
    pub fn is_finite(&self) -> bool {
        self.amplitudes
            .iter()
            .all(|a| a.re.is_finite() && a.im.is_finite())
    }
}

/// Real samples recovered by an inverse transform, along with the imaginary
/// residue that was discarded (relative to the peak magnitude).
#[derive(Debug, Clone)]
pub struct RealSamples {
    pub values: Vec<f64>,
    pub imag_residue: f64,
}

/// Forward transform of real samples: `a_m = (1/n) sum_j s_j e^{-i k_m x_j}`.
pub fn dft_forward(samples: &[f64], grid: &SpectralGrid) -> Result<SpectralField> {
    if samples.len() != grid.n_points {
        return Err(TgmError::InvalidArgument(format!(
            "expected {} samples for the grid, got {}",
            grid.n_points,
            samples.len()
        )));
    }
    if samples.iter().any(|s| !s.is_finite()) {
        return Err(TgmError::NumericalInput(
            "forward transform input contains non-finite samples".into(),
        ));
    }
    let n = grid.n_points;
    let mut buf: Vec<Complex<f64>> = samples.iter().map(|&s| Complex::new(s, 0.0)).collect();
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);
    let scale = 1.0 / n as f64;
    let amplitudes = buf.into_iter().map(|a| a * scale).collect();
    Ok(SpectralField {
        grid: grid.clone(),
        amplitudes,
    })
}

/// Inverse transform: `s_j = sum_m a_m e^{+i k_m x_j}`.
///
/// The input must represent a real signal: if the imaginary part of the
/// result exceeds [`REALITY_TOLERANCE`] of the peak magnitude the transform
/// is rejected; otherwise the residue is reported alongside the samples.
pub fn dft_inverse(field: &SpectralField) -> Result<RealSamples> {
    if !field.is_finite() {
        return Err(TgmError::NumericalInput(
            "inverse transform input contains non-finite amplitudes".into(),
        ));
    }
    let n = field.grid.n_points;
    let mut buf: Vec<Complex<f64>> = field.amplitudes.clone();
    FftPlanner::new().plan_fft_inverse(n).process(&mut buf);
    let peak = buf.iter().map(|y| y.norm()).fold(0.0f64, f64::max);
    let worst_imag = buf.iter().map(|y| y.im.abs()).fold(0.0f64, f64::max);
    let imag_residue = if peak == 0.0 { 0.0 } else { worst_imag / peak };
    if imag_residue > REALITY_TOLERANCE {
        return Err(TgmError::NonRealField {
            residue: imag_residue,
            threshold: REALITY_TOLERANCE,
        });
    }
    Ok(RealSamples {
        values: buf.into_iter().map(|y| y.re).collect(),
        imag_residue,
    })
}

/// Linear constant-coefficient operator
/// `sum_n a_n d^n/dt^n + sum_{lmn} b_lmn d^l_x d^m_y d^n_z`.
#[derive(Debug, Clone, PartialEq)]
pub struct OperatorSpec {
    /// Time-derivative coefficients `a_0 ... a_p`, highest order nonzero.
    pub time_coeffs: Vec<f64>,
    /// Spatial-derivative coefficients keyed by multi-order `(l, m, n)`.
    pub spatial_coeffs: BTreeMap<(u32, u32, u32), f64>,
    /// Spatial dimension, 1 to 3.
    pub dimension: usize,
}

impl OperatorSpec {
    /// Validates and builds an operator description.
    pub fn new(
        time_coeffs: Vec<f64>,
        spatial_coeffs: BTreeMap<(u32, u32, u32), f64>,
        dimension: usize,
    ) -> Result<Self> {
        if !(1..=3).contains(&dimension) {
            return Err(TgmError::InvalidOperator(format!(
                "dimension must be 1..=3, got {dimension}"
            )));
        }
        if time_coeffs.iter().any(|a| !a.is_finite()) {
            return Err(TgmError::InvalidOperator(
                "time coefficients must be finite".into(),
            ));
        }
        let Some(&top) = time_coeffs.last() else {
            return Err(TgmError::InvalidOperator(
                "no time-derivative coefficients given".into(),
            ));
        };
        if top == 0.0 {
            return Err(TgmError::InvalidOperator(
                "highest time-derivative coefficient must be nonzero".into(),
            ));
        }
        if time_coeffs.len() < 2 {
            return Err(TgmError::InvalidOperator(
                "time order must be at least 1".into(),
            ));
        }
        if spatial_coeffs.values().all(|&b| b == 0.0) {
            return Err(TgmError::InvalidOperator(
                "at least one spatial coefficient must be nonzero".into(),
            ));
        }
        if spatial_coeffs.values().any(|b| !b.is_finite()) {
            return Err(TgmError::InvalidOperator(
                "spatial coefficients must be finite".into(),
            ));
        }
        for &(l, m, n) in spatial_coeffs.keys() {
            let used = [l, m, n];
            for (axis, &order) in used.iter().enumerate().skip(dimension) {
                if order != 0 {
                    return Err(TgmError::InvalidOperator(format!(
                        "derivative order {order} on axis {axis} exceeds dimension {dimension}"
                    )));
                }
            }
        }
        Ok(OperatorSpec {
            time_coeffs,
            spatial_coeffs,
            dimension,
        })
    }

    /// Wave operator `(1/c^2) d^2/dt^2 - d^2/dx^2` in one dimension.
    pub fn wave_1d(c: f64) -> Result<Self> {
        if !(c.is_finite() && c > 0.0) {
            return Err(TgmError::InvalidArgument(format!(
                "wave speed must be positive, got {c}"
            )));
        }
        let mut spatial = BTreeMap::new();
        spatial.insert((2, 0, 0), -1.0);
        OperatorSpec::new(vec![0.0, 0.0, 1.0 / (c * c)], spatial, 1)
    }

    /// Diffusion operator `d/dt - c d^2/dx^2` in one dimension.
    pub fn diffusion_1d(c: f64) -> Result<Self> {
        if !(c.is_finite() && c > 0.0) {
            return Err(TgmError::InvalidArgument(format!(
                "diffusion coefficient must be positive, got {c}"
            )));
        }
        let mut spatial = BTreeMap::new();
        spatial.insert((2, 0, 0), -c);
        OperatorSpec::new(vec![0.0, 1.0], spatial, 1)
    }

    /// Time order `p` of the operator.
    pub fn time_order(&self) -> usize {
        self.time_coeffs.len() - 1
    }
}

/// Fourier symbol of the spatial part:
/// `kappa(k) = sum b_lmn (i k_x)^l (i k_y)^m (i k_z)^n`.
pub fn spatial_symbol(spec: &OperatorSpec, k: &[f64]) -> Result<Complex64> {
    if k.len() != spec.dimension {
        return Err(TgmError::InvalidArgument(format!(
            "wave vector has {} components, operator dimension is {}",
            k.len(),
            spec.dimension
        )));
    }
    if k.iter().any(|c| !c.is_finite()) {
        return Err(TgmError::NumericalInput(
            "wave vector contains non-finite components".into(),
        ));
    }
    let ik = |axis: usize| -> Complex64 {
        let component = k.get(axis).copied().unwrap_or(0.0);
        Complex64::new(0.0, component)
    };
    let mut kappa = Complex64::new(0.0, 0.0);
    for (&(l, m, n), &b) in &spec.spatial_coeffs {
        let term = ik(0).powu(l) * ik(1).powu(m) * ik(2).powu(n);
        kappa += b * term;
    }
    Ok(kappa)
}

/// One-dimensional convenience wrapper around [`spatial_symbol`].
pub fn spatial_symbol_1d(spec: &OperatorSpec, k: f64) -> Result<Complex64> {
    spatial_symbol(spec, &[k])
}
