//! Quantum-equilibrium checks: pushed Born ensembles against |psi(t)|^2
//! for each guidance law, plus the deliberately broken negative control.

use std::collections::BTreeMap;

use num_complex::Complex64;
use pilotwave::analytic::AnalyticFreeState;
use pilotwave::ensemble::{
    born_sample, equivariance_test, equivariance_test_scaled, push_ensemble,
};
use pilotwave::export::write_ensemble_csv;
use pilotwave::guidance::{DivFreeField, GuidanceLaw};
use pilotwave::history::WaveHistory;
use pilotwave::provider::{StationaryState, WaveAt};
use pilotwave::stats::KsReport;
use pilotwave::wavefield::{gaussian_packet, superpose, Potential, WaveFunction};
use pilotwave::{Grid, PhysicalConstants};

use crate::config::{validate_grid, EquivarianceConfig};
use crate::manifest::RunRecorder;
use crate::CliError;

pub fn run(cfg: &EquivarianceConfig, rec: &mut RunRecorder) -> Result<(), CliError> {
    if cfg.n == 0 {
        return Err(CliError::Config("n must be positive".into()));
    }
    for law in &cfg.laws {
        if !matches!(law.as_str(), "standard" | "modified" | "stochastic" | "broken") {
            return Err(CliError::Config(format!(
                "unknown law '{law}' (expected standard|modified|stochastic|broken)"
            )));
        }
    }
    let grid = validate_grid(&cfg.grid).map_err(CliError::Config)?;
    let consts = PhysicalConstants::default();
    let half = cfg.separation / 2.0;

    let mut reports: BTreeMap<String, KsReport> = BTreeMap::new();

    // shared split-step history for the 1D runs
    let needs_history = cfg.laws.iter().any(|l| l == "standard");
    let hist = if needs_history {
        let a = gaussian_packet(&grid, &[-half], cfg.sigma0, &[0.0]).map_err(CliError::run)?;
        let b = gaussian_packet(&grid, &[half], cfg.sigma0, &[0.0]).map_err(CliError::run)?;
        let psi0 = superpose(&a, &b, Complex64::ONE, Complex64::ONE).map_err(CliError::run)?;
        let steps = (cfg.t_final / cfg.dt).round() as usize;
        let snap = (2..=10).rev().find(|s| steps % s == 0 && steps / s >= 3).unwrap_or(1);
        Some(
            WaveHistory::record(&psi0, consts, &Potential::Free, cfg.dt, steps, snap)
                .map_err(CliError::run)?,
        )
    } else {
        None
    };
    let slit = AnalyticFreeState::double_slit_1d(cfg.separation, cfg.sigma0, consts, grid.clone())
        .map_err(CliError::run)?;

    for law in &cfg.laws {
        let rep = match law.as_str() {
            "standard" => {
                let hist = hist.as_ref().expect("history built above");
                let rep = equivariance_test(
                    hist,
                    &GuidanceLaw::Standard,
                    0.0,
                    cfg.t_final,
                    cfg.n,
                    cfg.seed,
                    cfg.dt,
                )
                .map_err(CliError::run)?;
                if cfg.export_ensembles {
                    export_pushed(rec, "ensemble_standard.csv", hist, &GuidanceLaw::Standard, cfg)?;
                }
                rep
            }
            "stochastic" => {
                let law = GuidanceLaw::Stochastic {
                    diffusion: cfg.stochastic_diffusion,
                };
                let rep = equivariance_test(
                    &slit,
                    &law,
                    0.0,
                    cfg.t_final,
                    cfg.n,
                    cfg.seed.wrapping_add(1),
                    cfg.stochastic_dt,
                )
                .map_err(CliError::run)?;
                if cfg.export_ensembles {
                    export_pushed(rec, "ensemble_stochastic.csv", &slit, &law, cfg)?;
                }
                rep
            }
            "modified" => {
                let trapped = trapped_state(consts).map_err(CliError::run)?;
                let law = GuidanceLaw::Modified(DivFreeField::localized_swirl(
                    cfg.swirl_strength,
                    cfg.swirl_center,
                    cfg.swirl_width,
                    cfg.swirl_exclusion,
                ));
                let rep = equivariance_test(
                    &trapped,
                    &law,
                    0.0,
                    1.0,
                    cfg.n,
                    cfg.seed.wrapping_add(2),
                    2e-3,
                )
                .map_err(CliError::run)?;
                if cfg.export_ensembles {
                    export_pushed(rec, "ensemble_modified.csv", &trapped, &law, cfg)?;
                }
                rep
            }
            "broken" => equivariance_test_scaled(
                &slit,
                &GuidanceLaw::Standard,
                0.0,
                cfg.t_final,
                cfg.n,
                cfg.seed.wrapping_add(3),
                cfg.dt,
                2.0,
            )
            .map_err(CliError::run)?,
            _ => unreachable!("validated above"),
        };
        reports.insert(law.clone(), rep);
    }

    serde_json::to_writer_pretty(rec.create("ks_reports.json")?, &reports)
        .map_err(std::io::Error::other)?;

    for (law, rep) in &reports {
        if law == "broken" {
            rec.check(
                "broken-law negative control fails with p < 1e-6",
                rep.p_value < 1e-6,
                format!("p = {:.3e}", rep.p_value),
            );
        } else {
            rec.check(
                &format!("{law} law equivariant at alpha = 0.01"),
                rep.passes(0.01),
                format!("p = {:.4}, D = {:.4}", rep.p_value, rep.statistic),
            );
        }
    }
    Ok(())
}

fn trapped_state(consts: PhysicalConstants) -> pilotwave::Result<StationaryState> {
    let g2 = Grid::new_2d((-6.0, 6.0, 128), (-6.0, 6.0, 128))?;
    let amps: Vec<Complex64> = (0..g2.len())
        .map(|i| {
            let q = g2.point(i);
            Complex64::new((-(q[0] * q[0] + q[1] * q[1]) / 2.0).exp(), 0.0)
        })
        .collect();
    let psi = WaveFunction::from_amplitudes(g2, amps, 0.0)?;
    Ok(StationaryState::new(psi, consts))
}

fn export_pushed(
    rec: &mut RunRecorder,
    name: &str,
    w: &dyn WaveAt,
    law: &GuidanceLaw,
    cfg: &EquivarianceConfig,
) -> Result<(), CliError> {
    let t1 = if w.dims() == 2 { 1.0 } else { cfg.t_final };
    let dt = match law {
        GuidanceLaw::Stochastic { .. } => cfg.stochastic_dt,
        GuidanceLaw::Modified(_) => 2e-3,
        GuidanceLaw::Standard => cfg.dt,
    };
    let initial = w.reference_state(0.0).map_err(CliError::run)?;
    let e0 = born_sample(&initial, cfg.n, cfg.seed).map_err(CliError::run)?;
    let (pushed, _) = push_ensemble(&e0, w, law, t1, dt).map_err(CliError::run)?;
    write_ensemble_csv(rec.create(name)?, &pushed)?;
    Ok(())
}
