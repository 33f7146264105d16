//! Wiseman's weak-velocity measurement protocol on a particle⊗pointer
//! composite, and the correspondence-assumption (COR) discrepancy tests.
//!
//! The composite starts as Psi(x, y, 0) = psi(x) phi(y - x) with a Gaussian
//! pointer of spread sigma; only x evolves. Post-selecting the particle at
//! X after a delay tau and averaging the pointer gives
//! E(y | x = X) = int y |Psi(X,y)|^2 dy / int |Psi(X,y)|^2 dy,
//! and the operational velocity v_op = (X - E(y|x=X)) / tau. In the joint
//! limit tau -> 0, sigma -> inf this recovers (hbar/m) grad S — for the
//! standard guidance law and only for it.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::constants::PhysicalConstants;
use crate::error::{Error, Result};
use crate::fourier::AxisFft;
use crate::grid::Grid;
use crate::guidance::{flow_map, GuidanceLaw};
use crate::provider::WaveAt;
use crate::wavefield::{max_stable_dt, Potential, WaveFunction};

/// Particle (x) ⊗ pointer (y) state on a 2D grid.
#[derive(Debug, Clone)]
pub struct CompositeState {
    state: WaveFunction,
    consts: PhysicalConstants,
    sigma: f64,
}

/// Knobs of one protocol run.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ProtocolConfig {
    pub pointer_sigma: f64,
    pub tau: f64,
    pub postselect_bin: f64,
    pub ensemble_n: usize,
    pub seed: u64,
}

impl Default for ProtocolConfig {
    fn default() -> Self {
        Self {
            pointer_sigma: 8.0,
            tau: 0.02,
            postselect_bin: 0.0, // 0 = twice the particle spacing
            ensemble_n: 100_000,
            seed: 1,
        }
    }
}

impl CompositeState {
    pub fn state(&self) -> &WaveFunction {
        &self.state
    }

    pub fn grid(&self) -> &Grid {
        self.state.grid()
    }

    pub fn time(&self) -> f64 {
        self.state.time()
    }

    pub fn pointer_sigma(&self) -> f64 {
        self.sigma
    }

    /// Marginal density over the pointer, one value per x column.
    pub fn x_marginal(&self) -> Vec<f64> {
        let (nx, ny) = self.shape();
        let dy = self.grid().axis(1).spacing();
        let rho = self.state.density();
        (0..nx)
            .map(|ix| rho[ix * ny..(ix + 1) * ny].iter().sum::<f64>() * dy)
            .collect()
    }

    /// Marginal density over the particle, one value per y row.
    pub fn y_marginal(&self) -> Vec<f64> {
        let (nx, ny) = self.shape();
        let dx = self.grid().axis(0).spacing();
        let rho = self.state.density();
        (0..ny)
            .map(|iy| (0..nx).map(|ix| rho[ix * ny + iy]).sum::<f64>() * dx)
            .collect()
    }

    fn shape(&self) -> (usize, usize) {
        (self.grid().axis(0).n, self.grid().axis(1).n)
    }
}

/// Entangle a particle state with a fresh Gaussian pointer:
/// Psi(x, y) = psi(x) N exp(-(y-x)^2 / (4 sigma^2)).
///
/// The pointer grid is sized automatically: the particle extent plus
/// 6 sigma of headroom, with at least four points per sigma.
pub fn prepare_composite(
    psi: &WaveFunction,
    consts: &PhysicalConstants,
    pointer_sigma: f64,
) -> Result<CompositeState> {
    if psi.grid().dims() != 1 {
        return Err(Error::invalid("composite preparation needs a 1D particle state"));
    }
    if !(pointer_sigma > 0.0) {
        return Err(Error::invalid("pointer sigma must be positive"));
    }
    let ax = psi.grid().axis(0);
    let (ymin, ymax) = (ax.min - 6.0 * pointer_sigma, ax.max + 6.0 * pointer_sigma);
    let target_dy = pointer_sigma / 4.0;
    let ny = (((ymax - ymin) / target_dy).ceil() as usize)
        .next_power_of_two()
        .clamp(64, 2048);
    let grid = Grid::new_2d((ax.min, ax.max, ax.n), (ymin, ymax, ny))?;
    let dy = grid.axis(1).spacing();
    if pointer_sigma < 3.0 * dy {
        return Err(Error::WidthUnderResolved {
            sigma: pointer_sigma,
            min_sigma: 3.0 * dy,
        });
    }
    let norm = (2.0 * std::f64::consts::PI * pointer_sigma * pointer_sigma).powf(-0.25);
    let inv = 1.0 / (4.0 * pointer_sigma * pointer_sigma);
    let mut amps = vec![Complex64::ZERO; grid.len()];
    for ix in 0..ax.n {
        let x = ax.coord(ix);
        let psi_x = psi.amplitudes()[ix];
        if psi_x.norm_sqr() < 1e-300 {
            continue;
        }
        for iy in 0..ny {
            let y = grid.axis(1).coord(iy);
            let lump = norm * (-(y - x) * (y - x) * inv).exp();
            amps[ix * ny + iy] = psi_x * lump;
        }
    }
    let state = WaveFunction::from_amplitudes(grid, amps, psi.time())?;
    Ok(CompositeState {
        state,
        consts: *consts,
        sigma: pointer_sigma,
    })
}

/// Evolve the composite for `tau` with the Hamiltonian acting on x only;
/// the pointer is frozen. Free evolution applies the exact spectral phase
/// in one pass; potentials use Strang substeps under the x-axis stability
/// bound.
pub fn evolve_composite(
    c: &CompositeState,
    potential: &Potential,
    tau: f64,
) -> Result<CompositeState> {
    if tau == 0.0 {
        return Ok(c.clone());
    }
    if tau < 0.0 {
        return Err(Error::invalid("tau must be nonnegative"));
    }
    let (nx, ny) = c.shape();
    let ax = c.grid().axis(0);
    let consts = c.consts;
    let mut amps = c.state.amplitudes().to_vec();
    let fft = AxisFft::new(nx);

    // work column-wise: transpose to y-major so x lines are contiguous
    let mut ymajor = vec![Complex64::ZERO; amps.len()];
    for ix in 0..nx {
        for iy in 0..ny {
            ymajor[iy * nx + ix] = amps[ix * ny + iy];
        }
    }

    let kxs = ax.wavenumbers();
    match potential {
        Potential::Free => {
            let phases: Vec<Complex64> = kxs
                .iter()
                .map(|&k| Complex64::from_polar(1.0, -consts.hbar * k * k * tau / (2.0 * consts.mass)))
                .collect();
            fft.run(&mut ymajor, true);
            for row in ymajor.chunks_exact_mut(nx) {
                for (v, p) in row.iter_mut().zip(&phases) {
                    *v *= p;
                }
            }
            fft.run(&mut ymajor, false);
        }
        _ => {
            let x_grid = Grid::new_1d(ax.min, ax.max, ax.n)?;
            let dt_max = max_stable_dt(&x_grid, &consts);
            let steps = ((tau / (0.5 * dt_max)).ceil() as usize).max(1);
            let dt = tau / steps as f64;
            if dt >= dt_max {
                return Err(Error::StabilityBound { dt, dt_max });
            }
            let pot_1d = match potential {
                Potential::Harmonic { omega } => Potential::Harmonic { omega: *omega },
                Potential::Tabulated { values } => Potential::Tabulated {
                    values: values.clone(),
                },
                Potential::Free => unreachable!(),
            };
            let vals = pot_values_1d(&pot_1d, &x_grid, &consts)?;
            let half_v: Vec<Complex64> = vals
                .iter()
                .map(|&v| Complex64::from_polar(1.0, -0.5 * dt * v / consts.hbar))
                .collect();
            let kin: Vec<Complex64> = kxs
                .iter()
                .map(|&k| Complex64::from_polar(1.0, -consts.hbar * k * k * dt / (2.0 * consts.mass)))
                .collect();
            for _ in 0..steps {
                for row in ymajor.chunks_exact_mut(nx) {
                    for (v, h) in row.iter_mut().zip(&half_v) {
                        *v *= h;
                    }
                }
                fft.run(&mut ymajor, true);
                for row in ymajor.chunks_exact_mut(nx) {
                    for (v, k) in row.iter_mut().zip(&kin) {
                        *v *= k;
                    }
                }
                fft.run(&mut ymajor, false);
                for row in ymajor.chunks_exact_mut(nx) {
                    for (v, h) in row.iter_mut().zip(&half_v) {
                        *v *= h;
                    }
                }
            }
        }
    }

    for ix in 0..nx {
        for iy in 0..ny {
            amps[ix * ny + iy] = ymajor[iy * nx + ix];
        }
    }
    let state = WaveFunction::from_amplitudes(c.grid().clone(), amps, c.time() + tau)?;
    Ok(CompositeState {
        state,
        consts,
        sigma: c.sigma,
    })
}

fn pot_values_1d(p: &Potential, grid: &Grid, consts: &PhysicalConstants) -> Result<Vec<f64>> {
    match p {
        Potential::Free => Ok(vec![0.0; grid.len()]),
        Potential::Harmonic { omega } => {
            let w2 = 0.5 * consts.mass * omega * omega;
            Ok((0..grid.len()).map(|i| w2 * grid.point(i)[0].powi(2)).collect())
        }
        Potential::Tabulated { values } => {
            if values.len() != grid.len() {
                return Err(Error::GridMismatch);
            }
            Ok(values.clone())
        }
    }
}

/// Conditional pointer mean at a particle column.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct CondMean {
    /// X snapped to the nearest grid line.
    pub x: f64,
    pub mean_y: f64,
    /// Conditional mass of the column (the x-marginal density there).
    pub mass: f64,
}

/// E(y | x = X) = int y |Psi(X,y)|^2 dy / int |Psi(X,y)|^2 dy, with X
/// snapped to the nearest grid line.
pub fn conditional_pointer_mean(c: &CompositeState, x: f64) -> Result<CondMean> {
    let ax = c.grid().axis(0);
    if !ax.contains(x) {
        return Err(Error::OutOfBounds { q: vec![x] });
    }
    let ix = ax.nearest_index(x);
    column_mean(c, ix).ok_or_else(|| {
        let marg = c.x_marginal();
        let peak = marg.iter().cloned().fold(0.0, f64::max);
        Error::NodeProximity {
            q: vec![ax.coord(ix)],
            density: marg[ix],
            threshold: crate::provider::NODE_THRESHOLD_REL * peak,
        }
    })
}

fn column_mean(c: &CompositeState, ix: usize) -> Option<CondMean> {
    let (_, ny) = c.shape();
    let ay = c.grid().axis(1);
    let dy = ay.spacing();
    let rho = &c.state.density()[ix * ny..(ix + 1) * ny];
    let mass: f64 = rho.iter().sum::<f64>() * dy;
    let marg = c.x_marginal();
    let peak = marg.iter().cloned().fold(0.0, f64::max);
    if mass < crate::provider::NODE_THRESHOLD_REL * peak {
        return None;
    }
    let mean_y: f64 = rho
        .iter()
        .enumerate()
        .map(|(iy, r)| ay.coord(iy) * r)
        .sum::<f64>()
        * dy
        / mass;
    Some(CondMean {
        x: c.grid().axis(0).coord(ix),
        mean_y,
        mass,
    })
}

/// One operational velocity sample, `v_op = (X_tau - E(y|x=X_tau)) / tau`.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct OperationalVelocitySample {
    pub x_tau: f64,
    pub weak_mean: f64,
    pub v_op: f64,
    pub tau: f64,
}

pub fn operational_velocity(
    c_tau: &CompositeState,
    x_tau: f64,
    tau: f64,
) -> Result<OperationalVelocitySample> {
    if !(tau > 0.0) {
        return Err(Error::invalid("tau must be positive"));
    }
    let cm = conditional_pointer_mean(c_tau, x_tau)?;
    Ok(OperationalVelocitySample {
        x_tau: cm.x,
        weak_mean: cm.mean_y,
        v_op: (cm.x - cm.mean_y) / tau,
        tau,
    })
}

/// The operational velocity field over a set of post-selection points.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WeakVelocityField {
    pub samples: Vec<OperationalVelocitySample>,
    /// (X, reason) pairs for node-skipped points.
    pub skipped: Vec<(f64, String)>,
    pub tau: f64,
    pub sigma: f64,
    pub richardson: bool,
}

/// Run the protocol at every X in `xs`. With `richardson` the field is
/// evaluated at tau and tau/2 and extrapolated linearly to tau -> 0.
pub fn weak_velocity_field(
    psi: &WaveFunction,
    consts: &PhysicalConstants,
    potential: &Potential,
    cfg: &ProtocolConfig,
    xs: &[f64],
    richardson: bool,
) -> Result<WeakVelocityField> {
    let composite = prepare_composite(psi, consts, cfg.pointer_sigma)?;
    let at_tau = evolve_composite(&composite, potential, cfg.tau)?;
    let at_half = if richardson {
        Some(evolve_composite(&composite, potential, cfg.tau / 2.0)?)
    } else {
        None
    };
    let mut samples = Vec::with_capacity(xs.len());
    let mut skipped = Vec::new();
    for &x in xs {
        let full = match operational_velocity(&at_tau, x, cfg.tau) {
            Ok(s) => s,
            Err(e) => {
                skipped.push((x, e.to_string()));
                continue;
            }
        };
        let sample = match &at_half {
            Some(c_half) => match operational_velocity(c_half, x, cfg.tau / 2.0) {
                Ok(half) => OperationalVelocitySample {
                    x_tau: full.x_tau,
                    weak_mean: full.weak_mean,
                    v_op: 2.0 * half.v_op - full.v_op,
                    tau: cfg.tau,
                },
                Err(e) => {
                    skipped.push((x, e.to_string()));
                    continue;
                }
            },
            None => full,
        };
        samples.push(sample);
    }
    Ok(WeakVelocityField {
        samples,
        skipped,
        tau: cfg.tau,
        sigma: cfg.pointer_sigma,
        richardson,
    })
}

/// Grid points where the density of `psi` clears `floor_rel` times its
/// peak; the usual post-selection point set.
pub fn sample_points(psi: &WaveFunction, floor_rel: f64) -> Vec<f64> {
    let rho = psi.density();
    let peak = psi.peak_density();
    let ax = psi.grid().axis(0);
    (0..ax.n)
        .filter(|&i| rho[i] >= floor_rel * peak)
        .map(|i| ax.coord(i))
        .collect()
}

/// Monte Carlo realization: sample (x, y) pairs from |Psi(x,y,tau)|^2,
/// bin by x, average y per bin.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BinStat {
    pub x_lo: f64,
    pub x_hi: f64,
    pub count: usize,
    pub mean_y: f64,
    pub std_err: f64,
    /// Too few counts to be meaningful (node or tail bin).
    pub unreliable: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MonteCarloReport {
    pub bins: Vec<BinStat>,
    pub n: usize,
    pub tau: f64,
    pub sigma: f64,
    pub seed: u64,
}

const MIN_BIN_COUNT: usize = 5;

pub fn monte_carlo_protocol(
    psi: &WaveFunction,
    consts: &PhysicalConstants,
    potential: &Potential,
    cfg: &ProtocolConfig,
) -> Result<MonteCarloReport> {
    if cfg.ensemble_n < 1000 {
        return Err(Error::invalid("monte carlo protocol needs at least 10^3 samples"));
    }
    let ax = psi.grid().axis(0);
    let bin_width = if cfg.postselect_bin > 0.0 {
        cfg.postselect_bin
    } else {
        2.0 * ax.spacing()
    };
    if bin_width < ax.spacing() {
        return Err(Error::invalid(format!(
            "postselect bin {bin_width} below the particle spacing {}",
            ax.spacing()
        )));
    }
    let composite = prepare_composite(psi, consts, cfg.pointer_sigma)?;
    let at_tau = evolve_composite(&composite, potential, cfg.tau)?;
    let draws = crate::ensemble::born_sample(at_tau.state(), cfg.ensemble_n, cfg.seed)?;
    let nbins = ((ax.max - ax.min) / bin_width).ceil() as usize;
    let mut count = vec![0usize; nbins];
    let mut sum = vec![0.0f64; nbins];
    let mut sumsq = vec![0.0f64; nbins];
    for q in &draws.positions {
        let b = (((q[0] - ax.min) / bin_width) as usize).min(nbins - 1);
        count[b] += 1;
        sum[b] += q[1];
        sumsq[b] += q[1] * q[1];
    }
    let bins = (0..nbins)
        .map(|b| {
            let n = count[b];
            let mean = if n > 0 { sum[b] / n as f64 } else { 0.0 };
            let var = if n > 1 {
                (sumsq[b] - sum[b] * sum[b] / n as f64) / (n as f64 - 1.0)
            } else {
                0.0
            };
            BinStat {
                x_lo: ax.min + b as f64 * bin_width,
                x_hi: ax.min + (b + 1) as f64 * bin_width,
                count: n,
                mean_y: mean,
                std_err: if n > 1 { (var / n as f64).sqrt() } else { f64::INFINITY },
                unreliable: n < MIN_BIN_COUNT,
            }
        })
        .collect();
    Ok(MonteCarloReport {
        bins,
        n: cfg.ensemble_n,
        tau: cfg.tau,
        sigma: cfg.pointer_sigma,
        seed: cfg.seed,
    })
}

/// Weak mean versus backtracked position for one post-selected point.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CorReport {
    pub x_tau: f64,
    pub weak_mean: f64,
    pub backtracked: f64,
    pub discrepancy: f64,
    pub law: String,
}

/// COR test at one post-selection point: compare E(y|x=X_tau) on the
/// evolved composite against the backward flow of the chosen law through
/// the undisturbed particle wavefunction, from the composite's time back
/// by `tau`.
pub fn cor_discrepancy(
    c_tau: &CompositeState,
    history: &dyn WaveAt,
    law: &GuidanceLaw,
    x_tau: f64,
    tau: f64,
    flow_dt: f64,
) -> Result<CorReport> {
    if !law.is_deterministic() {
        return Err(Error::DeterministicLawRequired);
    }
    if !(tau > 0.0) {
        return Err(Error::invalid("tau must be positive"));
    }
    let cm = conditional_pointer_mean(c_tau, x_tau)?;
    let back = flow_map(history, law, &[cm.x], c_tau.time(), -tau, flow_dt)?;
    Ok(CorReport {
        x_tau: cm.x,
        weak_mean: cm.mean_y,
        backtracked: back[0],
        discrepancy: (cm.mean_y - back[0]).abs(),
        law: law.label(),
    })
}

/// COR reports over many post-selection points sharing one evolution.
pub fn cor_table(
    psi: &WaveFunction,
    consts: &PhysicalConstants,
    potential: &Potential,
    history: &dyn WaveAt,
    law: &GuidanceLaw,
    cfg: &ProtocolConfig,
    xs: &[f64],
    flow_dt: f64,
) -> Result<Vec<CorReport>> {
    let composite = prepare_composite(psi, consts, cfg.pointer_sigma)?;
    let at_tau = evolve_composite(&composite, potential, cfg.tau)?;
    xs.iter()
        .map(|&x| cor_discrepancy(&at_tau, history, law, x, cfg.tau, flow_dt))
        .collect()
}
