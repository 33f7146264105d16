//! CSV and JSON writers for the contractual file formats.
//!
//! Floats are written with Rust's shortest-roundtrip formatting, so repeat
//! runs with identical inputs produce byte-identical files.

use std::io::{self, Write};

use crate::ensemble::Ensemble;
use crate::guidance::Trajectory;
use crate::protocol::{CorReport, OperationalVelocitySample};
use crate::stats::KsReport;
use crate::wavefield::WaveFunction;
use crate::weakvalue::PointerWave;

/// Wavefunction snapshot: one row per grid point, coordinates then Re, Im.
pub fn write_wavefunction_csv<W: Write>(mut w: W, psi: &WaveFunction) -> io::Result<()> {
    match psi.grid().dims() {
        1 => writeln!(w, "x,re,im")?,
        _ => writeln!(w, "x,y,re,im")?,
    }
    for (i, a) in psi.amplitudes().iter().enumerate() {
        let q = psi.grid().point(i);
        for c in &q {
            write!(w, "{c},")?;
        }
        writeln!(w, "{},{}", a.re, a.im)?;
    }
    Ok(())
}

/// Trajectory rows (t, x[, y]).
pub fn write_trajectory_csv<W: Write>(mut w: W, traj: &Trajectory) -> io::Result<()> {
    let dims = traj.positions.first().map(|q| q.len()).unwrap_or(1);
    writeln!(w, "{}", if dims == 1 { "t,x" } else { "t,x,y" })?;
    for (t, q) in traj.times.iter().zip(&traj.positions) {
        write!(w, "{t}")?;
        for c in q {
            write!(w, ",{c}")?;
        }
        writeln!(w)?;
    }
    Ok(())
}

/// Several trajectories in one file with a leading index column.
pub fn write_trajectories_csv<W: Write>(mut w: W, trajs: &[Trajectory]) -> io::Result<()> {
    let dims = trajs
        .first()
        .and_then(|t| t.positions.first())
        .map(|q| q.len())
        .unwrap_or(1);
    writeln!(w, "{}", if dims == 1 { "index,t,x" } else { "index,t,x,y" })?;
    for (i, traj) in trajs.iter().enumerate() {
        for (t, q) in traj.times.iter().zip(&traj.positions) {
            write!(w, "{i},{t}")?;
            for c in q {
                write!(w, ",{c}")?;
            }
            writeln!(w)?;
        }
    }
    Ok(())
}

/// Ensemble rows (index, t, position...).
pub fn write_ensemble_csv<W: Write>(mut w: W, e: &Ensemble) -> io::Result<()> {
    let dims = e.positions.first().map(|q| q.len()).unwrap_or(1);
    writeln!(w, "{}", if dims == 1 { "index,t,x" } else { "index,t,x,y" })?;
    for (i, q) in e.positions.iter().enumerate() {
        write!(w, "{i},{}", e.time)?;
        for c in q {
            write!(w, ",{c}")?;
        }
        writeln!(w)?;
    }
    Ok(())
}

/// KS report as `{statistic, p_value, n, m}`.
pub fn write_ks_report_json<W: Write>(w: W, report: &KsReport) -> io::Result<()> {
    serde_json::to_writer_pretty(w, report).map_err(io::Error::other)
}

/// Pointer profile rows (y, |phi|^2).
pub fn write_pointer_profile_csv<W: Write>(mut w: W, pw: &PointerWave) -> io::Result<()> {
    writeln!(w, "y,density")?;
    for (i, rho) in pw.density().iter().enumerate() {
        writeln!(w, "{},{rho}", pw.grid().point(i)[0])?;
    }
    Ok(())
}

/// Velocity-field rows (X, E_y, v_op, v_standard_oracle, abs_err).
pub fn write_velocity_field_csv<W: Write>(
    mut w: W,
    samples: &[OperationalVelocitySample],
    oracle: &[f64],
) -> io::Result<()> {
    writeln!(w, "X,E_y,v_op,v_standard_oracle,abs_err")?;
    for (s, v_ref) in samples.iter().zip(oracle) {
        writeln!(
            w,
            "{},{},{},{},{}",
            s.x_tau,
            s.weak_mean,
            s.v_op,
            v_ref,
            (s.v_op - v_ref).abs()
        )?;
    }
    Ok(())
}

/// COR reports as a JSON array.
pub fn write_cor_reports_json<W: Write>(w: W, reports: &[CorReport]) -> io::Result<()> {
    serde_json::to_writer_pretty(w, reports).map_err(io::Error::other)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constants::PhysicalConstants;
    use crate::grid::Grid;
    use crate::guidance::{integrate_trajectory, GuidanceLaw};
    use crate::provider::StationaryState;
    use crate::wavefield::gaussian_packet;

    #[test]
    fn wavefunction_csv_layout() {
        let grid = Grid::new_1d(-1.0, 1.0, 16).unwrap();
        let psi = gaussian_packet(&grid, &[0.0], 0.5, &[0.0]).unwrap();
        let mut buf = Vec::new();
        write_wavefunction_csv(&mut buf, &psi).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), "x,re,im");
        assert_eq!(text.lines().count(), 17);
        assert!(text.lines().nth(1).unwrap().starts_with("-1,"));
    }

    #[test]
    fn exports_are_byte_identical_across_runs() {
        let grid = Grid::new_1d(-10.0, 10.0, 64).unwrap();
        let psi = gaussian_packet(&grid, &[0.0], 1.0, &[0.7]).unwrap();
        let w = StationaryState::new(psi.clone(), PhysicalConstants::default());
        let run = || {
            let e = crate::ensemble::born_sample(&psi, 50, 9).unwrap();
            let traj =
                integrate_trajectory(&w, &GuidanceLaw::Standard, &[0.5], 0.0, 0.5, 1e-2, None)
                    .unwrap();
            let mut b1 = Vec::new();
            let mut b2 = Vec::new();
            write_ensemble_csv(&mut b1, &e).unwrap();
            write_trajectory_csv(&mut b2, &traj).unwrap();
            (b1, b2)
        };
        assert_eq!(run(), run());
    }

    #[test]
    fn ks_report_json_schema() {
        let rep = crate::stats::ks_two_sample(&[1.0, 2.0, 3.0], &[1.5, 2.5]).unwrap();
        let mut buf = Vec::new();
        write_ks_report_json(&mut buf, &rep).unwrap();
        let v: serde_json::Value = serde_json::from_slice(&buf).unwrap();
        for key in ["statistic", "p_value", "n", "m"] {
            assert!(v.get(key).is_some(), "missing {key}");
        }
    }
}
