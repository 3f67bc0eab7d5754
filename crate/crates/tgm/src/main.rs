//! Command-line interface: configured runs, step-width sweeps, baseline
//! comparisons, and the built-in self-test battery.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use tgm::baselines::cfl_threshold;
use tgm::harness::{
    self, csv, default_dt_sweep, dt_sweep, fit_order, load_config, run_experiment, ErrorRecord,
    ExperimentConfig, Scheme,
};
use tgm::{Result, TgmError};

#[derive(Parser)]
#[command(
    name = "tgm",
    version,
    about = "Spectral transient solver for linear PDEs, with finite-difference baselines"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one configured experiment and write snapshots.csv / spectra.csv
    Run {
        /// Path to a `key = value` configuration file
        #[arg(long)]
        config: PathBuf,
        /// Override the configured output directory
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Sweep step widths for both schemes and write sweep.csv
    Sweep {
        /// Path to a `key = value` configuration file
        #[arg(long)]
        config: PathBuf,
        /// Comma-separated step widths (default: a built-in ladder that
        /// straddles the baseline stability threshold)
        #[arg(long)]
        dts: Option<String>,
        /// Override the configured output directory
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run both schemes at the configured step width and print their errors
    Compare {
        /// Path to a `key = value` configuration file
        #[arg(long)]
        config: PathBuf,
    },
    /// Run the built-in verification battery
    Selftest,
}

fn load(config: &Path, out: Option<PathBuf>) -> Result<ExperimentConfig> {
    let mut cfg = load_config(config)?;
    if let Some(dir) = out {
        cfg.out_dir = dir;
    }
    Ok(cfg)
}

fn cmd_run(config_path: PathBuf, out: Option<PathBuf>) -> Result<()> {
    let config = load(&config_path, out)?;
    let result = run_experiment(&config)?;
    std::fs::create_dir_all(&config.out_dir)?;
    let snap_path = config.out_dir.join("snapshots.csv");
    let spec_path = config.out_dir.join("spectra.csv");
    csv::write_snapshots(&snap_path, &result)?;
    csv::write_spectra(&spec_path, &result)?;
    println!(
        "{} / {} on {} points, dt = {}",
        config.equation, config.scheme, config.n_points, config.dt
    );
    for snap in &result.snapshots {
        match (&snap.error, &snap.real) {
            (Some(err), Some(real)) => println!(
                "t = {:.6}: er = {:.6e} ({} modes excluded), imag residue = {:.3e}",
                snap.t, err.er, err.excluded, real.imag_residue
            ),
            (Some(err), None) => println!(
                "t = {:.6}: er = {:.6e}, DIVERGED (no real-space output)",
                snap.t, err.er
            ),
            _ => println!("t = {:.6}: DIVERGED (non-finite state)", snap.t),
        }
    }
    println!("wrote {} and {}", snap_path.display(), spec_path.display());
    Ok(())
}

fn parse_dts(text: &str) -> Result<Vec<f64>> {
    text.split(',')
        .map(|part| {
            part.trim()
                .parse::<f64>()
                .map_err(|_| TgmError::Config(format!("cannot parse step width '{}'", part.trim())))
        })
        .collect()
}

fn print_order(label: &str, records: &[ErrorRecord]) {
    match fit_order(records) {
        Ok(order) => println!("{label} fitted order: {order:.3}"),
        Err(err) => println!("{label} fitted order: unavailable ({err})"),
    }
}

fn cmd_sweep(config_path: PathBuf, dts: Option<String>, out: Option<PathBuf>) -> Result<()> {
    let config = load(&config_path, out)?;
    let dt_list = match dts {
        Some(text) => parse_dts(&text)?,
        None => default_dt_sweep(config.equation),
    };
    let records = dt_sweep(&config, &dt_list)?;
    std::fs::create_dir_all(&config.out_dir)?;
    let path = config.out_dir.join("sweep.csv");
    csv::write_sweep(&path, &records)?;
    println!("{} sweep to t = {}:", config.equation, config.t_end);
    println!("{:>12} {:>14} {:>14}  note", "dt", "er_tgm", "er_fdm");
    for r in &records {
        let note = match (r.tgm_diverged, r.fdm_diverged) {
            (true, _) => "SPECTRAL DIVERGED",
            (false, true) => "fdm diverged",
            _ => "",
        };
        println!(
            "{:>12.6} {:>14.6e} {:>14.6e}  {note}",
            r.dt, r.er_tgm, r.er_fdm
        );
    }
    let tgm: Vec<ErrorRecord> = records.iter().map(|r| r.tgm_record()).collect();
    let fdm: Vec<ErrorRecord> = records.iter().map(|r| r.fdm_record()).collect();
    print_order("spectral", &tgm);
    print_order("baseline", &fdm);
    println!("wrote {}", path.display());
    Ok(())
}

fn cmd_compare(config_path: PathBuf) -> Result<()> {
    let config = load(&config_path, None)?;
    let grid = tgm::spectral::make_grid(config.n_points, config.length)?;
    let threshold = cfl_threshold(config.equation, &grid, config.c)?;
    println!(
        "{} on {} points: dt = {}, baseline stability threshold = {:.6e}",
        config.equation, config.n_points, config.dt, threshold.mode_space
    );
    if let Some(estimate) = threshold.grid_estimate {
        println!("spacing-based threshold estimate: {estimate:.6e}");
    }

    let mut results = Vec::new();
    for scheme in [Scheme::Tgm, Scheme::Fdm] {
        let mut cfg = config.clone();
        cfg.scheme = scheme;
        results.push((scheme, run_experiment(&cfg)?));
    }
    for (scheme, result) in &results {
        for snap in &result.snapshots {
            match &snap.error {
                Some(err) if !snap.diverged => {
                    println!("{scheme}: t = {:.6}, er = {:.6e}", snap.t, err.er)
                }
                _ => println!("{scheme}: t = {:.6}, DIVERGED", snap.t),
            }
        }
    }
    Ok(())
}

fn dispatch(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Run { config, out } => cmd_run(config, out),
        Command::Sweep { config, dts, out } => cmd_sweep(config, dts, out),
        Command::Compare { config } => cmd_compare(config),
        Command::Selftest => harness::selftest::run(),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(err.exit_code() as u8)
        }
    }
}
