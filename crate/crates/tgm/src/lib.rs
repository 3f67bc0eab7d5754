//! Spectral transient solver for linear constant-coefficient PDEs.
//!
//! The method decomposes the field into Fourier modes, solves each mode's
//! ODE `sum_n a_n d^n/dt^n u + kappa(k) u = s(k, t)` exactly through its
//! characteristic roots, and folds the source in one step at a time with
//! quadrature weights built from the roots. Because every update factor is
//! a pure exponential `e^{lambda dt}` with `Re lambda <= 0`, the stepper is
//! stable at any step width — accuracy, not stability, limits `dt`.
//!
//! # Modules
//!
//! - [`spectral`]: grids, transforms, and operator descriptions.
//! - [`engine`]: the generic per-mode stepper for any operator order.
//! - [`equations`]: closed forms and exact solutions for the wave and
//!   diffusion equations with a localized oscillating source.
//! - [`baselines`]: forward-Euler and leapfrog finite-difference steppers
//!   with their stability thresholds, for comparison runs.
//! - [`harness`]: configuration files, experiment runs, error norms,
//!   step-width sweeps, order fits, CSV output, and a self-test battery.
//!
//! # Example
//!
//! Drive the diffusion equation with a localized oscillating source and
//! compare against the exact solution:
//!
//! ```
//! use tgm::equations::{source_mode_amplitude, EquationKind, SourceModel};
//! use tgm::harness::{error_norm, exact_spectrum};
//! use tgm::spectral::{make_grid, OperatorSpec};
//! use tgm::engine::SolverState;
//!
//! let grid = make_grid(64, 10.0)?;
//! let spec = OperatorSpec::diffusion_1d(3.0)?;
//! let src = SourceModel::new(5.0, 0.5, 40.0 * std::f64::consts::PI)?;
//!
//! let mut state = SolverState::from_rest(&spec, &grid, 0.0)?;
//! for _ in 0..100 {
//!     state.advance(0.001, |k, t| source_mode_amplitude(&src, k, t))?;
//! }
//!
//! let field = state.field_at(state.time)?;
//! let exact = exact_spectrum(EquationKind::Diffusion, &grid, 3.0, &src, state.time)?;
//! let err = error_norm(&field, &exact)?;
//! assert!(err.er < 1e-4);
//! # Ok::<(), tgm::TgmError>(())
//! ```

pub mod baselines;
pub mod engine;
pub mod equations;
pub mod error;
pub mod harness;
pub mod spectral;

pub use error::{Result, TgmError};
