//! Three double-slit panels from one preparation and seed family:
//! standard, modified (vortex in the flight plane), and stochastic. The
//! screens cannot tell the panels apart; the trajectories can.

use num_complex::Complex64;
use pilotwave::analytic::{AnalyticFreeState, GaussianTerm};
use pilotwave::ensemble::{born_sample, push_ensemble, Ensemble};
use pilotwave::export::{write_trajectories_csv, write_wavefunction_csv};
use pilotwave::guidance::{integrate_trajectory, DivFreeField, GuidanceLaw, Trajectory};
use pilotwave::history::WaveHistory;
use pilotwave::provider::WaveAt;
use pilotwave::stats::ks_two_sample;
use pilotwave::wavefield::{gaussian_packet, superpose, Potential};
use pilotwave::PhysicalConstants;

use crate::config::{validate_grid, DoubleSlitConfig};
use crate::manifest::RunRecorder;
use crate::svg::{render, Panel};
use crate::CliError;

pub fn run(cfg: &DoubleSlitConfig, rec: &mut RunRecorder) -> Result<(), CliError> {
    if cfg.n_ensemble == 0 {
        return Err(CliError::Config("n_ensemble must be positive".into()));
    }
    if cfg.n_plot_paths == 0 || cfg.t_final <= 0.0 || cfg.dt <= 0.0 {
        return Err(CliError::Config(
            "n_plot_paths, t_final and dt must be positive".into(),
        ));
    }
    let grid = validate_grid(&cfg.grid).map_err(CliError::Config)?;
    let consts = PhysicalConstants::default();
    let half = cfg.separation / 2.0;

    // transverse preparation and its recorded history (standard/stochastic)
    let a = gaussian_packet(&grid, &[-half], cfg.sigma0, &[0.0]).map_err(CliError::run)?;
    let b = gaussian_packet(&grid, &[half], cfg.sigma0, &[0.0]).map_err(CliError::run)?;
    let psi0 = superpose(&a, &b, Complex64::ONE, Complex64::ONE).map_err(CliError::run)?;
    let steps = (cfg.t_final / cfg.dt).round() as usize;
    let snap = pick_snap_every(steps);
    let hist = WaveHistory::record(&psi0, consts, &Potential::Free, cfg.dt, steps, snap)
        .map_err(CliError::run)?;

    // 2D drift state for the modified panel (x transverse, z longitudinal)
    let kz = consts.mass * cfg.drift_velocity / consts.hbar;
    let zmax = cfg.drift_velocity * cfg.t_final + 8.0;
    let grid2 = pilotwave::Grid::new_2d(
        (cfg.grid.min, cfg.grid.max, 256),
        (-8.0, zmax, 256),
    )
    .map_err(CliError::run)?;
    let term = |x0: f64| GaussianTerm {
        coeff: Complex64::ONE,
        center: vec![x0, 0.0],
        sigma: vec![cfg.sigma0, 1.0],
        wavevector: vec![0.0, kz],
    };
    let drift = AnalyticFreeState::new(vec![term(-half), term(half)], consts, grid2)
        .map_err(CliError::run)?;
    let swirl = DivFreeField::localized_swirl(
        cfg.swirl.strength,
        cfg.swirl.center,
        cfg.swirl.width,
        cfg.swirl.exclusion_radius,
    );
    let modified = GuidanceLaw::Modified(swirl);
    let nelson = GuidanceLaw::Stochastic {
        diffusion: cfg.stochastic_diffusion,
    };

    // screens: endpoint x under each law
    let e0 = born_sample(&psi0, cfg.n_ensemble, cfg.seed).map_err(CliError::run)?;
    let (screen_std, stats_std) =
        push_ensemble(&e0, &hist, &GuidanceLaw::Standard, cfg.t_final, cfg.dt)
            .map_err(CliError::run)?;
    let (screen_sto, stats_sto) =
        push_ensemble(&e0, &hist, &nelson, cfg.t_final, 0.5 * cfg.dt).map_err(CliError::run)?;
    let psi2_0 = drift.reference_state(0.0).map_err(CliError::run)?;
    let e2 = born_sample(&psi2_0, cfg.n_ensemble, cfg.seed ^ 0xd5).map_err(CliError::run)?;
    let (screen_mod, stats_mod) =
        push_ensemble(&e2, &drift, &modified, cfg.t_final, 0.5 * cfg.dt).map_err(CliError::run)?;

    // plotted trajectory fans
    let starts = quantile_starts(&e0, cfg.n_plot_paths);
    let std_paths: Vec<Trajectory> = starts
        .iter()
        .map(|&x0| {
            integrate_trajectory(
                &hist,
                &GuidanceLaw::Standard,
                &[x0],
                0.0,
                cfg.t_final,
                cfg.dt,
                None,
            )
        })
        .collect::<Result<_, _>>()
        .map_err(CliError::run)?;
    let sto_paths: Vec<Trajectory> = starts
        .iter()
        .enumerate()
        .map(|(i, &x0)| {
            integrate_trajectory(
                &hist,
                &nelson,
                &[x0],
                0.0,
                cfg.t_final,
                0.5 * cfg.dt,
                Some(cfg.seed.wrapping_add(1000 + i as u64)),
            )
        })
        .collect::<Result<_, _>>()
        .map_err(CliError::run)?;
    let starts2 = quantile_starts_2d(&e2, cfg.n_plot_paths);
    let mod_paths: Vec<Trajectory> = starts2
        .iter()
        .map(|q0| {
            integrate_trajectory(&drift, &modified, q0, 0.0, cfg.t_final, 0.5 * cfg.dt, None)
        })
        .collect::<Result<_, _>>()
        .map_err(CliError::run)?;

    // exports
    write_trajectories_csv(rec.create("trajectories_standard.csv")?, &std_paths)?;
    write_trajectories_csv(rec.create("trajectories_stochastic.csv")?, &sto_paths)?;
    write_trajectories_csv(rec.create("trajectories_modified.csv")?, &mod_paths)?;
    for (name, law) in [
        ("trajectories_standard.meta.json", GuidanceLaw::Standard.label()),
        ("trajectories_stochastic.meta.json", nelson.label()),
        ("trajectories_modified.meta.json", modified.label()),
    ] {
        let meta = serde_json::json!({"law": law, "seed": cfg.seed, "dt": cfg.dt});
        serde_json::to_writer_pretty(rec.create(name)?, &meta).map_err(std::io::Error::other)?;
    }
    for (name, e) in [
        ("screen_standard.csv", &screen_std),
        ("screen_stochastic.csv", &screen_sto),
        ("screen_modified.csv", &screen_mod),
    ] {
        write_screen_csv(rec.create(name)?, e, &cfg.grid)?;
    }
    // density snapshots for the stochastic panel backdrop
    for (name, t) in [
        ("density_t0.csv", 0.0),
        ("density_mid.csv", cfg.t_final / 2.0),
        ("density_final.csv", cfg.t_final),
    ] {
        let snap_state = hist.reference_state(t).map_err(CliError::run)?;
        write_wavefunction_csv(rec.create(name)?, &snap_state)?;
    }

    // screen agreement
    let pairs = [
        ("standard_vs_modified", &screen_std, &screen_mod),
        ("standard_vs_stochastic", &screen_std, &screen_sto),
        ("modified_vs_stochastic", &screen_mod, &screen_sto),
    ];
    for (name, ea, eb) in pairs {
        let rep = ks_two_sample(&ea.axis(0), &eb.axis(0)).map_err(CliError::run)?;
        pilotwave::export::write_ks_report_json(rec.create(&format!("ks_{name}.json"))?, &rep)?;
        rec.check(
            &format!("screen KS {name} p >= 0.01"),
            rep.passes(0.01),
            format!("p = {:.4}, D = {:.4}", rep.p_value, rep.statistic),
        );
    }

    // standard panel keeps the ensemble ordering (no crossing)
    let ordered = no_crossing(&std_paths);
    rec.check(
        "standard trajectories never cross",
        ordered,
        format!("{} paths, ordering preserved = {ordered}", std_paths.len()),
    );
    let worst_rate = [&stats_std, &stats_sto, &stats_mod]
        .iter()
        .map(|s| s.truncated as f64 / s.requested as f64)
        .fold(0.0, f64::max);
    rec.check(
        "ensemble truncation within 1%",
        worst_rate <= 0.01,
        format!("worst rate {:.3}%", worst_rate * 100.0),
    );

    // figure
    let mut panels = Vec::new();
    let zend = cfg.drift_velocity * cfg.t_final;
    for (title, paths, as_z) in [
        ("standard", &std_paths, true),
        ("modified (vortex)", &mod_paths, false),
        ("stochastic (Nelson)", &sto_paths, true),
    ] {
        let mut panel = Panel::new(title, (-8.0, 8.0), (0.0, zend));
        for tr in paths.iter() {
            let pts: Vec<(f64, f64)> = tr
                .times
                .iter()
                .zip(&tr.positions)
                .map(|(t, q)| {
                    if as_z {
                        (q[0], cfg.drift_velocity * t)
                    } else {
                        (q[0], q[1])
                    }
                })
                .collect();
            panel.polyline(&pts, "#1f5fa8", 0.8);
        }
        let (centers, counts) = histogram(&screen_for(title, &screen_std, &screen_mod, &screen_sto), -8.0, 8.0, 80);
        panel.histogram(&centers, &counts, "#c44");
        panels.push(panel);
    }
    use std::io::Write as _;
    write!(rec.create("double_slit.svg")?, "{}", render(&panels))?;
    Ok(())
}

fn screen_for<'a>(
    title: &str,
    std_e: &'a Ensemble,
    mod_e: &'a Ensemble,
    sto_e: &'a Ensemble,
) -> Vec<f64> {
    let e = if title.starts_with("standard") {
        std_e
    } else if title.starts_with("modified") {
        mod_e
    } else {
        sto_e
    };
    e.axis(0)
}

fn pick_snap_every(steps: usize) -> usize {
    for cand in (2..=10).rev() {
        if steps % cand == 0 && steps / cand >= 3 {
            return cand;
        }
    }
    1
}

fn quantile_starts(e: &Ensemble, n: usize) -> Vec<f64> {
    let mut xs = e.axis(0);
    xs.sort_unstable_by(|a, b| a.partial_cmp(b).unwrap());
    (0..n)
        .map(|i| xs[(i * xs.len() + xs.len() / 2) / n.max(1)])
        .collect()
}

fn quantile_starts_2d(e: &Ensemble, n: usize) -> Vec<Vec<f64>> {
    let mut qs = e.positions.clone();
    qs.sort_unstable_by(|a, b| a[0].partial_cmp(&b[0]).unwrap());
    (0..n)
        .map(|i| qs[(i * qs.len() + qs.len() / 2) / n.max(1)].clone())
        .collect()
}

fn no_crossing(paths: &[Trajectory]) -> bool {
    let steps = paths.iter().map(|t| t.positions.len()).min().unwrap_or(0);
    for s in 0..steps {
        for pair in paths.windows(2) {
            if pair[0].positions[s][0] >= pair[1].positions[s][0] {
                return false;
            }
        }
    }
    true
}

fn histogram(xs: &[f64], lo: f64, hi: f64, bins: usize) -> (Vec<f64>, Vec<usize>) {
    let w = (hi - lo) / bins as f64;
    let mut counts = vec![0usize; bins];
    for &x in xs {
        if x >= lo && x < hi {
            counts[((x - lo) / w) as usize] += 1;
        }
    }
    let centers = (0..bins).map(|i| lo + (i as f64 + 0.5) * w).collect();
    (centers, counts)
}

fn write_screen_csv(
    mut w: impl std::io::Write,
    e: &Ensemble,
    grid: &crate::config::GridConfig,
) -> std::io::Result<()> {
    let (centers, counts) = histogram(&e.axis(0), grid.min, grid.max, 160);
    writeln!(w, "x,count")?;
    for (c, n) in centers.iter().zip(&counts) {
        writeln!(w, "{c},{n}")?;
    }
    Ok(())
}
