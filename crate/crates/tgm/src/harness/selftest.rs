//! Built-in verification battery for the `selftest` CLI command.
//!
//! Each check is a fast, self-contained probe of one pillar: transforms,
//! root finding, quadrature weights against an independent integrator,
//! closed forms against the generic engine, exact solutions, baseline
//! stability thresholds, long-step boundedness, and CSV round-tripping.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::baselines::{cfl_threshold, fdm_euler_diffusion_step, FdmModeState};
use crate::engine::{characteristic_roots, green_weights, init_from_rest, step, ModePlan};
use crate::equations::{
    diffusion_reconstruct, diffusion_step, exact_diffusion, exact_wave, DiffusionModeState,
    DiffusionParams, EquationKind, SourceModel, WaveParams,
};
use crate::error::{Result, TgmError};
use crate::harness::oracle;
use crate::harness::{csv, dt_sweep, ExperimentConfig, ExperimentRun, Scheme};
use crate::spectral::{dft_forward, dft_inverse, make_grid};

type Check = std::result::Result<(), String>;

fn check_transform_round_trip() -> Check {
    let grid = make_grid(64, 10.0).map_err(|e| e.to_string())?;
    let mut rng = ChaCha8Rng::seed_from_u64(0x5e1f);
    let samples: Vec<f64> = (0..64).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let field = dft_forward(&samples, &grid).map_err(|e| e.to_string())?;
    let back = dft_inverse(&field).map_err(|e| e.to_string())?;
    let max_diff = samples
        .iter()
        .zip(&back.values)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0f64, f64::max);
    if max_diff > 1e-12 {
        return Err(format!("round-trip error {max_diff:.3e} exceeds 1e-12"));
    }
    let sum_sq: f64 = samples.iter().map(|s| s * s).sum();
    let spec_sq: f64 = field.amplitudes.iter().map(|a| a.norm_sqr()).sum();
    let parseval = (sum_sq - 64.0 * spec_sq).abs() / sum_sq;
    if parseval > 1e-12 {
        return Err(format!("energy identity off by {parseval:.3e}"));
    }
    Ok(())
}

fn check_characteristic_roots() -> Check {
    // Wave at c = 1.3, k = 2: roots +-i c k.
    let ck = 1.3 * 2.0;
    let roots = characteristic_roots(&[0.0, 0.0, 1.0], Complex64::new(ck * ck, 0.0))
        .map_err(|e| e.to_string())?;
    let expect = [Complex64::new(0.0, -ck), Complex64::new(0.0, ck)];
    for (r, e) in roots.iter().zip(expect) {
        if (r - e).norm() > 1e-12 {
            return Err(format!("wave root {r} != {e}"));
        }
    }
    // Diffusion at c = 3, k = 2: root -c k^2.
    let roots =
        characteristic_roots(&[0.0, 1.0], Complex64::new(12.0, 0.0)).map_err(|e| e.to_string())?;
    if (roots[0] - Complex64::new(-12.0, 0.0)).norm() > 1e-12 {
        return Err(format!("diffusion root {} != -12", roots[0]));
    }
    Ok(())
}

fn check_green_weights_against_integrator() -> Check {
    for (time_coeffs, kappa, dt) in [
        (
            vec![0.0, 0.0, 1.0],
            Complex64::new(1.7f64.powi(2), 0.0),
            0.37,
        ),
        (vec![0.0, 1.0], Complex64::new(3.0 * 1.7 * 1.7, 0.0), 0.05),
    ] {
        let plan = ModePlan::from_parts(time_coeffs.clone(), kappa, vec![1.7])
            .map_err(|e| e.to_string())?;
        let weights = green_weights(&plan, dt).map_err(|e| e.to_string())?;
        let summed: Complex64 = plan
            .eigenvalues
            .iter()
            .zip(&weights)
            .map(|(lambda, w)| w * (lambda * dt).exp())
            .sum();
        let reference =
            oracle::boxcar_response(&time_coeffs, kappa, dt, dt).map_err(|e| e.to_string())?;
        if (summed - reference).norm() > 1e-8 {
            return Err(format!(
                "weights give {summed} for the boxcar, integrator gives {reference}"
            ));
        }
    }
    Ok(())
}

fn check_closed_forms_match_engine() -> Check {
    let grid = make_grid(64, 10.0).map_err(|e| e.to_string())?;
    let params = DiffusionParams::new(3.0, grid).map_err(|e| e.to_string())?;
    let k = 1.3;
    let src = Complex64::new(0.4, -0.2);
    let dt = 10.0; // far beyond any baseline stability limit
    let mut closed = DiffusionModeState::from_rest(k, 0.0);
    let plan = ModePlan::from_parts(vec![0.0, 1.0], Complex64::new(3.0 * k * k, 0.0), vec![k])
        .map_err(|e| e.to_string())?;
    let mut generic = init_from_rest(plan, 0.0);
    for _ in 0..5 {
        closed = diffusion_step(&closed, &params, src, dt).map_err(|e| e.to_string())?;
        generic = step(&generic, src, dt).map_err(|e| e.to_string())?;
    }
    let a = diffusion_reconstruct(&closed, &params, closed.time).map_err(|e| e.to_string())?;
    let b = crate::engine::reconstruct(&generic, generic.time).map_err(|e| e.to_string())?;
    if (a - b).norm() > 1e-12 {
        return Err(format!("closed form {a} vs engine {b}"));
    }
    if !(a.re.is_finite() && a.norm() < 1.0) {
        return Err(format!("ten-unit steps should stay bounded, got {a}"));
    }
    Ok(())
}

fn check_exact_solutions_against_integrator() -> Check {
    let grid = make_grid(64, 10.0).map_err(|e| e.to_string())?;
    let src = SourceModel::new(5.0, 0.5, std::f64::consts::PI).map_err(|e| e.to_string())?;
    let k = 1.9;
    let t = 0.7;

    let wave = WaveParams::new(1.0, grid.clone()).map_err(|e| e.to_string())?;
    let closed = exact_wave(k, &wave, &src, t).map_err(|e| e.to_string())?;
    let forcing = |tau: f64| crate::equations::source_mode_amplitude(&src, k, tau);
    let reference =
        oracle::forced_response(&[0.0, 0.0, 1.0], Complex64::new(k * k, 0.0), &forcing, t)
            .map_err(|e| e.to_string())?;
    if (closed - reference).norm() > 1e-8 {
        return Err(format!("wave: closed {closed} vs integrated {reference}"));
    }

    let diffusion = DiffusionParams::new(3.0, grid).map_err(|e| e.to_string())?;
    let closed = exact_diffusion(k, &diffusion, &src, t).map_err(|e| e.to_string())?;
    let reference =
        oracle::forced_response(&[0.0, 1.0], Complex64::new(3.0 * k * k, 0.0), &forcing, t)
            .map_err(|e| e.to_string())?;
    if (closed - reference).norm() > 1e-8 {
        return Err(format!(
            "diffusion: closed {closed} vs integrated {reference}"
        ));
    }
    Ok(())
}

fn check_stability_thresholds() -> Check {
    let grid = make_grid(64, 10.0).map_err(|e| e.to_string())?;
    let wave = cfl_threshold(EquationKind::Wave, &grid, 1.0).map_err(|e| e.to_string())?;
    if (wave.mode_space - 0.10105).abs() > 1e-4 {
        return Err(format!("wave threshold {} != 0.10105", wave.mode_space));
    }
    let diffusion =
        cfl_threshold(EquationKind::Diffusion, &grid, 3.0).map_err(|e| e.to_string())?;
    if (diffusion.mode_space - 1.702e-3).abs() > 1e-5 {
        return Err(format!(
            "diffusion threshold {} != 1.702e-3",
            diffusion.mode_space
        ));
    }
    let estimate = diffusion
        .grid_estimate
        .ok_or("diffusion estimate missing")?;
    if (estimate - 0.016797).abs() > 1e-5 {
        return Err(format!("spacing-based estimate {estimate} != 0.016797"));
    }
    // At exactly the mode-space threshold the highest mode flips sign with
    // amplification factor -1.
    let k_max = grid.k_max();
    let state = FdmModeState {
        current: Complex64::new(1.0, 0.0),
        previous: None,
        time: 0.0,
    };
    let next = fdm_euler_diffusion_step(
        &state,
        k_max,
        3.0,
        Complex64::new(0.0, 0.0),
        diffusion.mode_space,
    )
    .map_err(|e| e.to_string())?;
    if (next.current.re + 1.0).abs() > 1e-12 {
        return Err(format!("marginal amplification {} != -1", next.current.re));
    }
    Ok(())
}

fn check_long_steps_stay_bounded() -> Check {
    let grid = make_grid(64, 10.0).map_err(|e| e.to_string())?;
    let src = SourceModel::new(5.0, 0.5, 40.0 * std::f64::consts::PI).map_err(|e| e.to_string())?;
    let mut run = ExperimentRun::new(EquationKind::Diffusion, Scheme::Tgm, &grid, 3.0, src)
        .map_err(|e| e.to_string())?;
    for _ in 0..50 {
        run.advance(10.0).map_err(|e| e.to_string())?;
    }
    let field = run.spectrum().map_err(|e| e.to_string())?;
    let peak = field
        .amplitudes
        .iter()
        .map(|a| a.norm())
        .fold(0.0f64, f64::max);
    if !(peak.is_finite() && peak < 1e3) {
        return Err(format!(
            "fifty ten-unit steps reached peak amplitude {peak}"
        ));
    }
    Ok(())
}

fn check_csv_round_trip() -> Check {
    let mut config = ExperimentConfig::diffusion_reference();
    config.t_end = 0.01;
    config.snapshot_times = vec![0.01];
    let records = dt_sweep(&config, &[0.002, 0.001]).map_err(|e| e.to_string())?;
    let path = std::env::temp_dir().join(format!(
        "tgm-selftest-{}-{}.csv",
        std::process::id(),
        std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map(|d| d.as_nanos())
            .unwrap_or(0)
    ));
    let outcome = (|| -> Check {
        csv::write_sweep(&path, &records).map_err(|e| e.to_string())?;
        let text = std::fs::read_to_string(&path).map_err(|e| e.to_string())?;
        let mut lines = text.lines();
        if lines.next() != Some("dt,er_tgm,er_fdm,diverged") {
            return Err("sweep header mismatch".into());
        }
        for (line, record) in lines.zip(&records) {
            let fields: Vec<&str> = line.split(',').collect();
            let dt: f64 = fields[0].parse().map_err(|_| "unparseable dt")?;
            let er: f64 = fields[1].parse().map_err(|_| "unparseable er")?;
            if dt.to_bits() != record.dt.to_bits() || er.to_bits() != record.er_tgm.to_bits() {
                return Err(format!("row for dt = {dt} did not round-trip bit-for-bit"));
            }
        }
        Ok(())
    })();
    let _ = std::fs::remove_file(&path);
    outcome
}

/// A named check: a human-readable label and the function that runs it.
type NamedCheck = (&'static str, fn() -> Check);

/// Runs the whole battery, printing one line per check. Returns an error
/// listing the failed checks, if any.
pub fn run() -> Result<()> {
    let checks: [NamedCheck; 8] = [
        (
            "transform round trip and energy identity",
            check_transform_round_trip,
        ),
        (
            "characteristic roots of the reference operators",
            check_characteristic_roots,
        ),
        (
            "quadrature weights vs adaptive integrator",
            check_green_weights_against_integrator,
        ),
        (
            "closed forms vs generic engine at large steps",
            check_closed_forms_match_engine,
        ),
        (
            "exact solutions vs adaptive integrator",
            check_exact_solutions_against_integrator,
        ),
        ("baseline stability thresholds", check_stability_thresholds),
        (
            "long-step boundedness of the spectral stepper",
            check_long_steps_stay_bounded,
        ),
        ("CSV round trip", check_csv_round_trip),
    ];
    let mut failures = Vec::new();
    for (name, check) in checks {
        match check() {
            Ok(()) => println!("selftest: {name} ... ok"),
            Err(msg) => {
                println!("selftest: {name} ... FAILED: {msg}");
                failures.push(name);
            }
        }
    }
    if failures.is_empty() {
        println!("selftest: all {} checks passed", 8);
        Ok(())
    } else {
        Err(TgmError::SelftestFailed(failures.join("; ")))
    }
}
