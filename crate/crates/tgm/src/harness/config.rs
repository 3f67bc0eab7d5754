//! Flat `key = value` experiment configuration.
//!
//! Lines hold one `key = value` pair each; `#` starts a comment; unknown and
//! duplicate keys are errors so typos surface instead of silently running
//! the wrong experiment.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use crate::equations::EquationKind;
use crate::error::{Result, TgmError};

/// Which solver family a run uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scheme {
    /// Spectral stepper with exact per-mode propagation.
    Tgm,
    /// Finite-difference baseline (Euler for diffusion, leapfrog for wave).
    Fdm,
}

impl std::str::FromStr for Scheme {
    type Err = TgmError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "tgm" => Ok(Scheme::Tgm),
            "fdm" => Ok(Scheme::Fdm),
            other => Err(TgmError::Config(format!(
                "unknown scheme '{other}' (expected tgm or fdm)"
            ))),
        }
    }
}

impl std::fmt::Display for Scheme {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Scheme::Tgm => write!(f, "tgm"),
            Scheme::Fdm => write!(f, "fdm"),
        }
    }
}

/// Complete description of one experiment.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub equation: EquationKind,
    pub scheme: Scheme,
    pub n_points: usize,
    pub length: f64,
    /// Wave speed or diffusion coefficient, depending on `equation`.
    pub c: f64,
    pub dt: f64,
    pub t_end: f64,
    pub omega0: f64,
    pub x0: f64,
    pub sigma: f64,
    pub amplitude: f64,
    /// Times at which snapshots are emitted; each is rounded to the nearest
    /// step boundary when the run executes.
    pub snapshot_times: Vec<f64>,
    pub out_dir: PathBuf,
}

impl ExperimentConfig {
    /// Bundled wave demo: 64 points on a length-10 domain, unit speed,
    /// `dt = 0.01` to `t = 1`, driven at `omega0 = pi`.
    pub fn wave_reference() -> Self {
        ExperimentConfig {
            equation: EquationKind::Wave,
            scheme: Scheme::Tgm,
            n_points: 64,
            length: 10.0,
            c: 1.0,
            dt: 0.01,
            t_end: 1.0,
            omega0: std::f64::consts::PI,
            x0: 5.0,
            sigma: 0.5,
            amplitude: 1.0,
            snapshot_times: vec![1.0],
            out_dir: PathBuf::from("."),
        }
    }

    /// Bundled diffusion demo: 64 points on a length-10 domain, coefficient
    /// 3, `dt = 0.001` to `t = 0.1`, driven at `omega0 = 40 pi`.
    pub fn diffusion_reference() -> Self {
        ExperimentConfig {
            equation: EquationKind::Diffusion,
            scheme: Scheme::Tgm,
            n_points: 64,
            length: 10.0,
            c: 3.0,
            dt: 0.001,
            t_end: 0.1,
            omega0: 40.0 * std::f64::consts::PI,
            x0: 5.0,
            sigma: 0.5,
            amplitude: 1.0,
            snapshot_times: vec![0.1],
            out_dir: PathBuf::from("."),
        }
    }

    /// Checks every invariant the runner relies on.
    pub fn validate(&self) -> Result<()> {
        if self.n_points < 2 || !self.n_points.is_multiple_of(2) {
            return Err(TgmError::Config(format!(
                "n_points must be even and >= 2, got {}",
                self.n_points
            )));
        }
        for (name, value) in [
            ("length", self.length),
            ("c", self.c),
            ("dt", self.dt),
            ("t_end", self.t_end),
            ("omega0", self.omega0),
            ("sigma", self.sigma),
        ] {
            if !(value.is_finite() && value > 0.0) {
                return Err(TgmError::Config(format!(
                    "{name} must be positive and finite, got {value}"
                )));
            }
        }
        if !(self.x0.is_finite() && self.amplitude.is_finite() && self.amplitude >= 0.0) {
            return Err(TgmError::Config(format!(
                "x0 must be finite and amplitude nonnegative, got {} and {}",
                self.x0, self.amplitude
            )));
        }
        if self.dt > self.t_end {
            return Err(TgmError::Config(format!(
                "dt = {} exceeds t_end = {}",
                self.dt, self.t_end
            )));
        }
        for &t in &self.snapshot_times {
            if !(t.is_finite() && t > 0.0 && t <= self.t_end) {
                return Err(TgmError::Config(format!(
                    "snapshot time {t} must lie in (0, t_end]"
                )));
            }
        }
        Ok(())
    }
}

/// Default step-width sweeps; both straddle the baseline scheme's
/// mode-space stability threshold on the bundled grids.
pub fn default_dt_sweep(kind: EquationKind) -> Vec<f64> {
    match kind {
        EquationKind::Wave => vec![0.2, 0.1, 0.05, 0.025, 0.0125, 0.00625],
        EquationKind::Diffusion => vec![0.016, 0.008, 0.004, 0.002, 0.001, 0.0005],
    }
}

/// Parses the `key = value` text of a configuration.
pub fn parse_config(text: &str) -> Result<ExperimentConfig> {
    let mut pairs: BTreeMap<String, String> = BTreeMap::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = match raw.find('#') {
            Some(pos) => &raw[..pos],
            None => raw,
        }
        .trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            TgmError::Config(format!("line {}: expected 'key = value'", lineno + 1))
        })?;
        let key = key.trim().to_string();
        let value = value.trim().to_string();
        if pairs.insert(key.clone(), value).is_some() {
            return Err(TgmError::Config(format!(
                "line {}: duplicate key '{key}'",
                lineno + 1
            )));
        }
    }

    const KNOWN: &[&str] = &[
        "equation",
        "scheme",
        "n_points",
        "length",
        "c",
        "dt",
        "t_end",
        "omega0",
        "x0",
        "sigma",
        "amplitude",
        "snapshot_times",
        "out_dir",
    ];
    for key in pairs.keys() {
        if !KNOWN.contains(&key.as_str()) {
            return Err(TgmError::Config(format!("unknown key '{key}'")));
        }
    }

    let require = |key: &str| -> Result<&String> {
        pairs
            .get(key)
            .ok_or_else(|| TgmError::Config(format!("missing required key '{key}'")))
    };
    let parse_f64 = |key: &str, value: &str| -> Result<f64> {
        value.parse::<f64>().map_err(|_| {
            TgmError::Config(format!("key '{key}': cannot parse '{value}' as a number"))
        })
    };

    let equation: EquationKind = require("equation")?.parse()?;
    let scheme: Scheme = require("scheme")?.parse()?;
    let n_points = require("n_points")?.parse::<usize>().map_err(|_| {
        TgmError::Config(format!(
            "key 'n_points': cannot parse '{}' as an integer",
            pairs["n_points"]
        ))
    })?;
    let length = parse_f64("length", require("length")?)?;
    let c = parse_f64("c", require("c")?)?;
    let dt = parse_f64("dt", require("dt")?)?;
    let t_end = parse_f64("t_end", require("t_end")?)?;
    let omega0 = parse_f64("omega0", require("omega0")?)?;
    let x0 = match pairs.get("x0") {
        Some(v) => parse_f64("x0", v)?,
        None => 5.0,
    };
    let sigma = match pairs.get("sigma") {
        Some(v) => parse_f64("sigma", v)?,
        None => 0.5,
    };
    let amplitude = match pairs.get("amplitude") {
        Some(v) => parse_f64("amplitude", v)?,
        None => 1.0,
    };
    let snapshot_times = match pairs.get("snapshot_times") {
        Some(v) => v
            .split(',')
            .map(|part| parse_f64("snapshot_times", part.trim()))
            .collect::<Result<Vec<f64>>>()?,
        None => vec![t_end],
    };
    let out_dir = pairs
        .get("out_dir")
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from("."));

    let config = ExperimentConfig {
        equation,
        scheme,
        n_points,
        length,
        c,
        dt,
        t_end,
        omega0,
        x0,
        sigma,
        amplitude,
        snapshot_times,
        out_dir,
    };
    config.validate()?;
    Ok(config)
}

/// Reads and parses a configuration file.
pub fn load_config(path: &Path) -> Result<ExperimentConfig> {
    let text = std::fs::read_to_string(path)?;
    parse_config(&text)
}
