//! CSV writers for run snapshots, spectra, and sweep tables.
//!
//! Floats are written with 17 significant digits (`{:.16e}`) so parsing
//! them back reproduces the original `f64` bit for bit.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use crate::error::Result;
use crate::harness::{RunResult, SweepRecord};

fn fmt(v: f64) -> String {
    format!("{v:.16e}")
}

/// Writes real-space snapshots as `t,x,u_real,u_exact` rows. Snapshots of
/// diverged runs have no real-space data and are skipped.
pub fn write_snapshots(path: &Path, result: &RunResult) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    writeln!(out, "t,x,u_real,u_exact")?;
    for snap in &result.snapshots {
        let Some(real) = &snap.real else { continue };
        for (j, (&u, &u_exact)) in real.values.iter().zip(&snap.exact_real.values).enumerate() {
            writeln!(
                out,
                "{},{},{},{}",
                fmt(snap.t),
                fmt(result.grid.x(j)),
                fmt(u),
                fmt(u_exact)
            )?;
        }
    }
    out.flush()?;
    Ok(())
}

/// Writes mode amplitudes as `t,k,re,im` rows for every snapshot.
pub fn write_spectra(path: &Path, result: &RunResult) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    writeln!(out, "t,k,re,im")?;
    for snap in &result.snapshots {
        for (&k, a) in result
            .grid
            .wavenumbers
            .iter()
            .zip(&snap.spectrum.amplitudes)
        {
            writeln!(
                out,
                "{},{},{},{}",
                fmt(snap.t),
                fmt(k),
                fmt(a.re),
                fmt(a.im)
            )?;
        }
    }
    out.flush()?;
    Ok(())
}

/// Writes a sweep as `dt,er_tgm,er_fdm,diverged` rows; the flag is true when
/// either scheme diverged at that step width.
pub fn write_sweep(path: &Path, records: &[SweepRecord]) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    writeln!(out, "dt,er_tgm,er_fdm,diverged")?;
    for r in records {
        writeln!(
            out,
            "{},{},{},{}",
            fmt(r.dt),
            fmt(r.er_tgm),
            fmt(r.er_fdm),
            r.tgm_diverged || r.fdm_diverged
        )?;
    }
    out.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::{run_experiment, ExperimentConfig};

    fn parse_rows(text: &str, header: &str) -> Vec<Vec<String>> {
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some(header), "header row");
        lines
            .map(|l| l.split(',').map(|s| s.to_string()).collect())
            .collect()
    }

    #[test]
    fn sweep_rows_round_trip_bit_for_bit() {
        let records = vec![
            SweepRecord {
                dt: 0.1,
                t: 1.0,
                er_tgm: 1.2345678901234567e-5,
                er_fdm: 0.4999999999999999,
                tgm_diverged: false,
                fdm_diverged: false,
            },
            SweepRecord {
                dt: 0.2,
                t: 1.0,
                er_tgm: 3.3e-5,
                er_fdm: f64::INFINITY,
                tgm_diverged: false,
                fdm_diverged: true,
            },
        ];
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("sweep.csv");
        write_sweep(&path, &records).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        let rows = parse_rows(&text, "dt,er_tgm,er_fdm,diverged");
        assert_eq!(rows.len(), 2);
        for (row, rec) in rows.iter().zip(&records) {
            assert_eq!(row[0].parse::<f64>().unwrap().to_bits(), rec.dt.to_bits());
            assert_eq!(
                row[1].parse::<f64>().unwrap().to_bits(),
                rec.er_tgm.to_bits()
            );
            assert_eq!(
                row[2].parse::<f64>().unwrap().to_bits(),
                rec.er_fdm.to_bits()
            );
            assert_eq!(
                row[3].parse::<bool>().unwrap(),
                rec.tgm_diverged || rec.fdm_diverged
            );
        }
        assert_eq!(rows[1][2], "inf", "infinity serializes readably");
    }

    #[test]
    fn snapshot_and_spectra_files_cover_every_grid_point_and_mode() {
        let mut config = ExperimentConfig::wave_reference();
        config.dt = 0.05;
        config.t_end = 0.2;
        config.snapshot_times = vec![0.1, 0.2];
        let result = run_experiment(&config).unwrap();
        let dir = tempfile::tempdir().unwrap();

        let snap_path = dir.path().join("snapshots.csv");
        write_snapshots(&snap_path, &result).unwrap();
        let text = std::fs::read_to_string(&snap_path).unwrap();
        let rows = parse_rows(&text, "t,x,u_real,u_exact");
        assert_eq!(rows.len(), 2 * 64, "two snapshots of 64 points");
        let u: f64 = rows[70][2].parse().unwrap();
        let reference = result.snapshots[1].real.as_ref().unwrap().values[6];
        assert_eq!(u.to_bits(), reference.to_bits(), "bit-exact round trip");

        let spec_path = dir.path().join("spectra.csv");
        write_spectra(&spec_path, &result).unwrap();
        let text = std::fs::read_to_string(&spec_path).unwrap();
        let rows = parse_rows(&text, "t,k,re,im");
        assert_eq!(rows.len(), 2 * 64, "two snapshots of 64 modes");
        let re: f64 = rows[3][2].parse().unwrap();
        let im: f64 = rows[3][3].parse().unwrap();
        let a = result.snapshots[0].spectrum.amplitudes[3];
        assert_eq!(
            (re.to_bits(), im.to_bits()),
            (a.re.to_bits(), a.im.to_bits())
        );
    }

    #[test]
    fn diverged_snapshots_are_omitted_from_real_space_output() {
        let mut config = ExperimentConfig::diffusion_reference();
        config.scheme = crate::harness::Scheme::Fdm;
        config.dt = 0.01;
        config.t_end = 1.0;
        config.snapshot_times = vec![1.0];
        let result = run_experiment(&config).unwrap();
        assert!(result.snapshots.last().unwrap().diverged);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("snapshots.csv");
        write_snapshots(&path, &result).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert_eq!(text.lines().count(), 1, "header only");
    }
}
