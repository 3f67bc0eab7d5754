//! Experiment harness: configured runs, error norms against the exact
//! per-mode solutions, step-width sweeps, order fits, and CSV export.

pub mod config;
pub mod csv;
pub mod oracle;
pub mod selftest;

pub use config::{default_dt_sweep, load_config, parse_config, ExperimentConfig, Scheme};

use num_complex::Complex64;

use crate::baselines::{
    fdm_euler_diffusion_step, fdm_leapfrog_wave_step, leapfrog_start, FdmModeState,
};
use crate::engine::SolverState;
use crate::equations::{
    exact_diffusion, exact_wave, exact_wave_zero_mode, source_mode_amplitude, DiffusionParams,
    EquationKind, SourceModel, WaveParams,
};
use crate::error::{Result, TgmError};
use crate::spectral::{
    dft_inverse, make_grid, OperatorSpec, RealSamples, SpectralField, SpectralGrid,
};

/// A run whose mode-space error exceeds this (or stops being finite) is
/// flagged as diverged.
pub const DIVERGENCE_CUTOFF: f64 = 1e6;

/// Exact reference spectrum at one time. Wave modes driven too close to
/// their natural frequency have no evaluable closed form; their bins are
/// zeroed and listed in `flagged` so error norms can skip them.
#[derive(Debug, Clone)]
pub struct ExactSnapshot {
    pub field: SpectralField,
    pub flagged: Vec<usize>,
}

/// Evaluates the exact solution of every mode on `grid` at time `t`.
pub fn exact_spectrum(
    kind: EquationKind,
    grid: &SpectralGrid,
    c: f64,
    src: &SourceModel,
    t: f64,
) -> Result<ExactSnapshot> {
    let mut amplitudes = Vec::with_capacity(grid.n_points);
    let mut flagged = Vec::new();
    match kind {
        EquationKind::Wave => {
            let params = WaveParams::new(c, grid.clone())?;
            for (m, &k) in grid.wavenumbers.iter().enumerate() {
                if k == 0.0 {
                    amplitudes.push(exact_wave_zero_mode(&params, src, t)?);
                } else {
                    match exact_wave(k, &params, src, t) {
                        Ok(a) => amplitudes.push(a),
                        Err(TgmError::NearResonance { .. }) => {
                            amplitudes.push(Complex64::new(0.0, 0.0));
                            flagged.push(m);
                        }
                        Err(other) => return Err(other),
                    }
                }
            }
        }
        EquationKind::Diffusion => {
            let params = DiffusionParams::new(c, grid.clone())?;
            for &k in &grid.wavenumbers {
                amplitudes.push(exact_diffusion(k, &params, src, t)?);
            }
        }
    }
    Ok(ExactSnapshot {
        field: SpectralField::from_amplitudes(grid.clone(), amplitudes)?,
        flagged,
    })
}

/// Mode-space error `sqrt(sum_k |u_k - u_exact_k|^2)` with flagged bins
/// skipped; `excluded` counts how many were skipped.
#[derive(Debug, Clone, Copy)]
pub struct ErrorNorm {
    pub er: f64,
    pub excluded: usize,
}

/// Computes the mode-space error of `field` against an exact snapshot.
pub fn error_norm(field: &SpectralField, exact: &ExactSnapshot) -> Result<ErrorNorm> {
    field.grid.check_same(&exact.field.grid)?;
    let mut sum = 0.0;
    for (m, (a, e)) in field
        .amplitudes
        .iter()
        .zip(&exact.field.amplitudes)
        .enumerate()
    {
        if exact.flagged.contains(&m) {
            continue;
        }
        sum += (a - e).norm_sqr();
    }
    Ok(ErrorNorm {
        er: sum.sqrt(),
        excluded: exact.flagged.len(),
    })
}

enum Inner {
    Tgm(SolverState),
    Fdm {
        states: Vec<FdmModeState>,
        time: f64,
        started: bool,
        diverged: bool,
    },
}

/// One in-flight experiment: either the spectral stepper or the
/// finite-difference baseline, advanced step by step over a shared grid.
pub struct ExperimentRun {
    pub grid: SpectralGrid,
    pub kind: EquationKind,
    pub scheme: Scheme,
    src: SourceModel,
    c: f64,
    inner: Inner,
}

impl ExperimentRun {
    /// Starts a run from rest at `t = 0`.
    pub fn new(
        kind: EquationKind,
        scheme: Scheme,
        grid: &SpectralGrid,
        c: f64,
        src: SourceModel,
    ) -> Result<Self> {
        let inner = match scheme {
            Scheme::Tgm => {
                let spec = match kind {
                    EquationKind::Wave => OperatorSpec::wave_1d(c)?,
                    EquationKind::Diffusion => OperatorSpec::diffusion_1d(c)?,
                };
                Inner::Tgm(SolverState::from_rest(&spec, grid, 0.0)?)
            }
            Scheme::Fdm => Inner::Fdm {
                states: vec![FdmModeState::euler_from_rest(0.0); grid.n_points],
                time: 0.0,
                started: false,
                diverged: false,
            },
        };
        Ok(ExperimentRun {
            grid: grid.clone(),
            kind,
            scheme,
            src,
            c,
            inner,
        })
    }

    /// Time the run has reached; for a diverged baseline this is frozen at
    /// the step where divergence was detected.
    pub fn time(&self) -> f64 {
        match &self.inner {
            Inner::Tgm(solver) => solver.time,
            Inner::Fdm { time, .. } => *time,
        }
    }

    /// Whether the baseline has been flagged as diverged mid-run. The
    /// spectral stepper never sets this.
    pub fn diverged(&self) -> bool {
        match &self.inner {
            Inner::Tgm(_) => false,
            Inner::Fdm { diverged, .. } => *diverged,
        }
    }

    /// Advances one step of width `dt`. A diverged baseline stays frozen.
    pub fn advance(&mut self, dt: f64) -> Result<()> {
        let src = self.src.clone();
        let (kind, c) = (self.kind, self.c);
        match &mut self.inner {
            Inner::Tgm(solver) => solver.advance(dt, |k, t| source_mode_amplitude(&src, k, t)),
            Inner::Fdm {
                states,
                time,
                started,
                diverged,
            } => {
                if *diverged {
                    return Ok(());
                }
                let t_n = *time;
                for (state, &k) in states.iter_mut().zip(&self.grid.wavenumbers) {
                    let amp = source_mode_amplitude(&src, k, t_n);
                    *state = match kind {
                        EquationKind::Diffusion => fdm_euler_diffusion_step(state, k, c, amp, dt)?,
                        EquationKind::Wave => {
                            if *started {
                                fdm_leapfrog_wave_step(state, k, c, amp, dt)?
                            } else {
                                let zero = Complex64::new(0.0, 0.0);
                                leapfrog_start(k, c, zero, zero, amp, t_n, dt)?
                            }
                        }
                    };
                }
                *started = true;
                *time = t_n + dt;
                let worst = states
                    .iter()
                    .map(|s| s.current.norm())
                    .fold(0.0f64, f64::max);
                if !worst.is_finite() || worst > DIVERGENCE_CUTOFF {
                    *diverged = true;
                }
                Ok(())
            }
        }
    }

    /// Spectrum at the run's current time. A non-finite spectral-stepper
    /// state is reported as an internal error: the update factors all have
    /// magnitude at most one, so it cannot legitimately occur.
    pub fn spectrum(&self) -> Result<SpectralField> {
        match &self.inner {
            Inner::Tgm(solver) => {
                let field = solver.field_at(solver.time)?;
                if !field.is_finite() {
                    return Err(TgmError::Internal(
                        "spectral stepper produced non-finite amplitudes".into(),
                    ));
                }
                Ok(field)
            }
            Inner::Fdm { states, .. } => SpectralField::from_amplitudes(
                self.grid.clone(),
                states.iter().map(|s| s.current).collect(),
            ),
        }
    }
}

/// State of one run at one emitted time.
#[derive(Debug, Clone)]
pub struct Snapshot {
    /// Step-boundary time the snapshot was taken at.
    pub t: f64,
    pub spectrum: SpectralField,
    /// Real-space samples; absent when the run has diverged.
    pub real: Option<RealSamples>,
    pub exact: ExactSnapshot,
    pub exact_real: RealSamples,
    /// Mode-space error; absent when the spectrum is non-finite.
    pub error: Option<ErrorNorm>,
    pub diverged: bool,
}

/// Everything a configured run produced.
#[derive(Debug, Clone)]
pub struct RunResult {
    pub kind: EquationKind,
    pub scheme: Scheme,
    pub grid: SpectralGrid,
    pub snapshots: Vec<Snapshot>,
}

fn take_snapshot(run: &ExperimentRun) -> Result<Snapshot> {
    let t = run.time();
    let spectrum = run.spectrum()?;
    let exact = exact_spectrum(run.kind, &run.grid, run.c, &run.src, t)?;
    let exact_real = dft_inverse(&exact.field)?;
    let mut diverged = run.diverged();
    let (real, error) = if spectrum.is_finite() {
        let norm = error_norm(&spectrum, &exact)?;
        if !norm.er.is_finite() || norm.er > DIVERGENCE_CUTOFF {
            diverged = true;
        }
        let real = if diverged {
            None
        } else {
            Some(dft_inverse(&spectrum)?)
        };
        (real, Some(norm))
    } else {
        diverged = true;
        (None, None)
    };
    Ok(Snapshot {
        t,
        spectrum,
        real,
        exact,
        exact_real,
        error,
        diverged,
    })
}

/// Runs one configured experiment, emitting a snapshot at each requested
/// time (rounded to the nearest step boundary). If the baseline scheme
/// diverges mid-run, a final diverged snapshot is emitted and the remaining
/// times are skipped.
pub fn run_experiment(config: &ExperimentConfig) -> Result<RunResult> {
    config.validate()?;
    let grid = make_grid(config.n_points, config.length)?;
    let src =
        SourceModel::with_amplitude(config.x0, config.sigma, config.omega0, config.amplitude)?;
    let mut run = ExperimentRun::new(config.equation, config.scheme, &grid, config.c, src)?;

    let mut targets: Vec<usize> = config
        .snapshot_times
        .iter()
        .map(|&t| (t / config.dt).round() as usize)
        .collect();
    targets.sort_unstable();
    targets.dedup();
    let total = *targets.last().unwrap_or(&0);

    let mut snapshots = Vec::new();
    let mut next = 0;
    for step in 0..=total {
        if step > 0 {
            run.advance(config.dt)?;
        }
        if run.diverged() {
            snapshots.push(take_snapshot(&run)?);
            break;
        }
        while next < targets.len() && targets[next] == step {
            snapshots.push(take_snapshot(&run)?);
            next += 1;
        }
    }
    Ok(RunResult {
        kind: config.equation,
        scheme: config.scheme,
        grid,
        snapshots,
    })
}

/// Error of one scheme at one step width.
#[derive(Debug, Clone, Copy)]
pub struct ErrorRecord {
    pub dt: f64,
    /// Time the error was evaluated at, `round(t_end / dt) * dt`.
    pub t: f64,
    pub er: f64,
    pub diverged: bool,
}

/// Errors of both schemes at one step width. `t` is the comparison time;
/// a diverged baseline carries `er_fdm = inf` from its stopping point.
#[derive(Debug, Clone, Copy)]
pub struct SweepRecord {
    pub dt: f64,
    pub t: f64,
    pub er_tgm: f64,
    pub er_fdm: f64,
    pub tgm_diverged: bool,
    pub fdm_diverged: bool,
}

impl SweepRecord {
    pub fn tgm_record(&self) -> ErrorRecord {
        ErrorRecord {
            dt: self.dt,
            t: self.t,
            er: self.er_tgm,
            diverged: self.tgm_diverged,
        }
    }

    pub fn fdm_record(&self) -> ErrorRecord {
        ErrorRecord {
            dt: self.dt,
            t: self.t,
            er: self.er_fdm,
            diverged: self.fdm_diverged,
        }
    }
}

/// Runs both schemes to `t_end` for each step width and records their
/// mode-space errors. The step count is `round(t_end / dt)`, at least one,
/// so the reached time can differ slightly from `t_end` when the two are
/// not commensurate; the record carries the actual time.
pub fn dt_sweep(config: &ExperimentConfig, dt_list: &[f64]) -> Result<Vec<SweepRecord>> {
    config.validate()?;
    let grid = make_grid(config.n_points, config.length)?;
    let src =
        SourceModel::with_amplitude(config.x0, config.sigma, config.omega0, config.amplitude)?;
    let mut records = Vec::with_capacity(dt_list.len());
    for &dt in dt_list {
        if !(dt.is_finite() && dt > 0.0) {
            return Err(TgmError::InvalidArgument(format!(
                "sweep step width must be positive and finite, got {dt}"
            )));
        }
        let steps = ((config.t_end / dt).round() as usize).max(1);

        let mut tgm =
            ExperimentRun::new(config.equation, Scheme::Tgm, &grid, config.c, src.clone())?;
        for _ in 0..steps {
            tgm.advance(dt)?;
        }
        let t = tgm.time();
        let exact = exact_spectrum(config.equation, &grid, config.c, &src, t)?;
        let er_tgm = error_norm(&tgm.spectrum()?, &exact)?.er;
        let tgm_diverged = !er_tgm.is_finite() || er_tgm > DIVERGENCE_CUTOFF;

        let mut fdm =
            ExperimentRun::new(config.equation, Scheme::Fdm, &grid, config.c, src.clone())?;
        for _ in 0..steps {
            fdm.advance(dt)?;
            if fdm.diverged() {
                break;
            }
        }
        let (er_fdm, fdm_diverged) = if fdm.diverged() {
            (f64::INFINITY, true)
        } else {
            let field = fdm.spectrum()?;
            let exact_f = if fdm.time() == t {
                exact.clone()
            } else {
                exact_spectrum(config.equation, &grid, config.c, &src, fdm.time())?
            };
            let er = if field.is_finite() {
                error_norm(&field, &exact_f)?.er
            } else {
                f64::INFINITY
            };
            (er, !er.is_finite() || er > DIVERGENCE_CUTOFF)
        };

        records.push(SweepRecord {
            dt,
            t,
            er_tgm,
            er_fdm,
            tgm_diverged,
            fdm_diverged,
        });
    }
    Ok(records)
}

/// Least-squares slope of `ln er` against `ln dt` over the usable records
/// (finite, positive, not diverged). Needs at least three of them.
pub fn fit_order(records: &[ErrorRecord]) -> Result<f64> {
    let points: Vec<(f64, f64)> = records
        .iter()
        .filter(|r| !r.diverged && r.er.is_finite() && r.er > 0.0 && r.dt > 0.0)
        .map(|r| (r.dt.ln(), r.er.ln()))
        .collect();
    if points.len() < 3 {
        return Err(TgmError::InsufficientData(format!(
            "order fit needs at least 3 usable records, got {}",
            points.len()
        )));
    }
    let n = points.len() as f64;
    let sx: f64 = points.iter().map(|p| p.0).sum();
    let sy: f64 = points.iter().map(|p| p.1).sum();
    let sxx: f64 = points.iter().map(|p| p.0 * p.0).sum();
    let sxy: f64 = points.iter().map(|p| p.0 * p.1).sum();
    let denom = n * sxx - sx * sx;
    if denom <= 0.0 {
        return Err(TgmError::InsufficientData(
            "order fit needs at least two distinct step widths".into(),
        ));
    }
    Ok((n * sxy - sx * sy) / denom)
}
