//! The weak-velocity protocol run: map the operational velocity field at
//! the weak screen, compare with the phase gradient, and reconstruct a
//! Kocsis-style streamline fan from protocol data alone.

use pilotwave::analytic::AnalyticFreeState;
use pilotwave::export::write_velocity_field_csv;
use pilotwave::guidance::standard_velocity;
use pilotwave::protocol::{sample_points, weak_velocity_field, ProtocolConfig};
use pilotwave::wavefield::Potential;
use pilotwave::PhysicalConstants;

use crate::config::{validate_grid, WeakProtocolConfig};
use crate::manifest::RunRecorder;
use crate::svg::{render, Panel};
use crate::CliError;

pub fn run(cfg: &WeakProtocolConfig, rec: &mut RunRecorder) -> Result<(), CliError> {
    if cfg.tau <= 0.0 || cfg.pointer_sigma <= 0.0 {
        return Err(CliError::Config("tau and pointer_sigma must be positive".into()));
    }
    if cfg.fan_times < 2 || cfg.fan_lines == 0 || cfg.fan_t_end <= cfg.fan_t_start {
        return Err(CliError::Config("fan window must be ordered with >= 2 times".into()));
    }
    let grid = validate_grid(&cfg.grid).map_err(CliError::Config)?;
    let consts = PhysicalConstants::default();
    let state = AnalyticFreeState::double_slit_1d(cfg.separation, cfg.sigma0, consts, grid.clone())
        .map_err(CliError::run)?;
    let psi = state.on_grid(&grid, cfg.develop_time).map_err(CliError::run)?;
    let xs = sample_points(&psi, cfg.density_floor);
    let pconf = ProtocolConfig {
        pointer_sigma: cfg.pointer_sigma,
        tau: cfg.tau,
        seed: cfg.seed,
        ..Default::default()
    };

    let field = weak_velocity_field(&psi, &consts, &Potential::Free, &pconf, &xs, cfg.richardson)
        .map_err(CliError::run)?;
    let oracle: Vec<f64> = field
        .samples
        .iter()
        .map(|s| standard_velocity(&state, &[s.x_tau], psi.time()).map(|v| v[0]))
        .collect::<Result<_, _>>()
        .map_err(CliError::run)?;
    write_velocity_field_csv(rec.create("velocity_field.csv")?, &field.samples, &oracle)?;

    let vmax = oracle.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    let worst = field
        .samples
        .iter()
        .zip(&oracle)
        .map(|(s, v)| (s.v_op - v).abs())
        .fold(0.0_f64, f64::max);
    rec.check(
        "max |v_op - (hbar/m) grad S| <= 5% of max |v|",
        worst <= 0.05 * vmax,
        format!("max err {worst:.3e} vs gate {:.3e}", 0.05 * vmax),
    );

    // tau ladder on the raw (non-extrapolated) protocol
    let raw_err = |tau: f64| -> Result<f64, CliError> {
        let pc = ProtocolConfig {
            tau,
            ..pconf.clone()
        };
        let f = weak_velocity_field(&psi, &consts, &Potential::Free, &pc, &xs, false)
            .map_err(CliError::run)?;
        Ok(f.samples
            .iter()
            .map(|s| {
                let v = standard_velocity(&state, &[s.x_tau], psi.time()).unwrap()[0];
                (s.v_op - v).abs()
            })
            .fold(0.0_f64, f64::max))
    };
    let e_tau = raw_err(cfg.tau)?;
    let e_half = raw_err(cfg.tau / 2.0)?;
    serde_json::to_writer_pretty(
        rec.create("ladder.json")?,
        &serde_json::json!({
            "tau": cfg.tau, "raw_err_tau": e_tau, "raw_err_tau_half": e_half,
            "richardson_err": worst, "vmax": vmax,
        }),
    )
    .map_err(std::io::Error::other)?;
    rec.check(
        "raw error shrinks when tau is halved",
        e_half < e_tau,
        format!("{e_tau:.3e} -> {e_half:.3e}"),
    );

    // streamline fan reconstructed from protocol data only
    let times: Vec<f64> = (0..cfg.fan_times)
        .map(|i| {
            cfg.fan_t_start
                + (cfg.fan_t_end - cfg.fan_t_start) * i as f64 / (cfg.fan_times - 1) as f64
        })
        .collect();
    let mut tables = Vec::new();
    for &t in &times {
        let psi_t = state.on_grid(&grid, t).map_err(CliError::run)?;
        let xs_t = sample_points(&psi_t, cfg.density_floor);
        let f = weak_velocity_field(&psi_t, &consts, &Potential::Free, &pconf, &xs_t, cfg.richardson)
            .map_err(CliError::run)?;
        let mut pairs: Vec<(f64, f64)> = f.samples.iter().map(|s| (s.x_tau, s.v_op)).collect();
        pairs.sort_unstable_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        tables.push(pairs);
    }
    let v_at = |x: f64, t: f64| -> Option<f64> {
        let dt_tab = (cfg.fan_t_end - cfg.fan_t_start) / (cfg.fan_times - 1) as f64;
        let j = (((t - cfg.fan_t_start) / dt_tab).floor() as usize).min(cfg.fan_times - 2);
        let u = ((t - cfg.fan_t_start) / dt_tab - j as f64).clamp(0.0, 1.0);
        let va = interp_sorted(&tables[j], x)?;
        let vb = interp_sorted(&tables[j + 1], x)?;
        Some(va * (1.0 - u) + vb * u)
    };

    let mut half_fan: Vec<f64> = (0..cfg.fan_lines / 2)
        .map(|i| 0.35 + 3.0 * i as f64 / (cfg.fan_lines / 2).max(1) as f64)
        .collect();
    let mut starts: Vec<f64> = half_fan.iter().map(|&x| -x).collect();
    starts.append(&mut half_fan);
    starts.sort_unstable_by(|a, b| a.partial_cmp(b).unwrap());

    let fan_dt = (cfg.fan_t_end - cfg.fan_t_start) / 240.0;
    let mut lines: Vec<Vec<(f64, f64)>> = Vec::new();
    for &x0 in &starts {
        let mut x = x0;
        let mut line = vec![(cfg.fan_t_start, x)];
        let mut t = cfg.fan_t_start;
        while t < cfg.fan_t_end - 1e-12 {
            // midpoint rule on the tabulated field
            let Some(k1) = v_at(x, t) else { break };
            let Some(k2) = v_at(x + 0.5 * fan_dt * k1, t + 0.5 * fan_dt) else {
                break;
            };
            x += fan_dt * k2;
            t += fan_dt;
            line.push((t, x));
        }
        lines.push(line);
    }
    {
        use std::io::Write as _;
        let mut f = rec.create("streamlines.csv")?;
        writeln!(f, "line,t,x")?;
        for (i, line) in lines.iter().enumerate() {
            for (t, x) in line {
                writeln!(f, "{i},{t},{x}")?;
            }
        }
    }

    // symmetry of the fan about the axis
    let mut sym_err = 0.0_f64;
    let half = lines.len() / 2;
    for i in 0..half {
        let left = &lines[i];
        let right = &lines[lines.len() - 1 - i];
        let n = left.len().min(right.len());
        for s in 0..n {
            sym_err = sym_err.max((left[s].1 + right[s].1).abs());
        }
    }
    rec.check(
        "streamline fan symmetric about the axis",
        sym_err < 1e-6,
        format!("max |x_left + x_right| = {sym_err:.2e}"),
    );
    let mut ordered = true;
    let min_len = lines.iter().map(|l| l.len()).min().unwrap_or(0);
    for s in 0..min_len {
        for pair in lines.windows(2) {
            if pair[0][s].1 >= pair[1][s].1 {
                ordered = false;
            }
        }
    }
    rec.check(
        "streamlines preserve ordering",
        ordered,
        format!("{} lines over {min_len} steps", lines.len()),
    );

    // figure: field comparison + fan
    let mut field_panel = Panel::new("v_op vs phase gradient", (-7.0, 7.0), (-1.2 * vmax, 1.2 * vmax));
    let pts_oracle: Vec<(f64, f64)> = field
        .samples
        .iter()
        .zip(&oracle)
        .map(|(s, &v)| (s.x_tau, v))
        .collect();
    field_panel.polyline(&pts_oracle, "#888", 2.5);
    for (s, _) in field.samples.iter().zip(&oracle) {
        field_panel.marker(s.x_tau, s.v_op, 1.4, "#c43");
    }
    let mut fan_panel = Panel::new("reconstructed streamlines", (-7.0, 7.0), (cfg.fan_t_start, cfg.fan_t_end));
    for line in &lines {
        let pts: Vec<(f64, f64)> = line.iter().map(|&(t, x)| (x, t)).collect();
        fan_panel.polyline(&pts, "#1f5fa8", 0.9);
    }
    use std::io::Write as _;
    write!(rec.create("weak_protocol.svg")?, "{}", render(&[field_panel, fan_panel]))?;
    Ok(())
}

fn interp_sorted(pairs: &[(f64, f64)], x: f64) -> Option<f64> {
    if pairs.len() < 2 || x < pairs[0].0 || x > pairs[pairs.len() - 1].0 {
        return None;
    }
    let idx = pairs.partition_point(|p| p.0 < x).max(1);
    let (x0, v0) = pairs[idx - 1];
    let (x1, v1) = pairs[idx];
    if x1 == x0 {
        return Some(v0);
    }
    let u = (x - x0) / (x1 - x0);
    Some(v0 * (1.0 - u) + v1 * u)
}
