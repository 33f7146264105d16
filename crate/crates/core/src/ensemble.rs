//! Born-rule ensembles: sampling, pushing through guidance flows, and the
//! statistical tests behind quantum equilibrium and screen-level
//! indistinguishability.
//!
//! Sampling is inverse-CDF on the gridded density (exact per-axis
//! conditional sampling in 2D) and fully determined by the seed. Pushes
//! parallelize over members with per-member seeds derived from
//! (seed, index), so results are independent of the thread schedule.
//! Trajectories that truncate at nodes or leave the domain are dropped and
//! counted; more than 1% of them is a quality error.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::guidance::{flow_endpoint, GuidanceLaw};
use crate::provider::WaveAt;
use crate::stats::{ks_two_sample, KsReport};
use crate::wavefield::WaveFunction;

/// Seeded collection of particle positions at a common time.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Ensemble {
    pub positions: Vec<Vec<f64>>,
    pub time: f64,
    pub seed: u64,
}

impl Ensemble {
    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    /// The coordinates along one axis.
    pub fn axis(&self, d: usize) -> Vec<f64> {
        self.positions.iter().map(|q| q[d]).collect()
    }
}

/// Book-keeping from an ensemble push.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PushStats {
    pub requested: usize,
    pub truncated: usize,
}

fn member_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&seed.to_le_bytes());
    key[8..16].copy_from_slice(&index.to_le_bytes());
    key[16] = 0x9e;
    key[17] = 0x37;
    ChaCha8Rng::from_seed(key)
}

/// Draw one coordinate from a discrete cell distribution: pick the cell by
/// cumulative mass, then place the point uniformly inside the cell
/// centered on its grid point.
fn sample_cell(cdf: &[f64], rng: &mut ChaCha8Rng) -> (usize, f64) {
    let u: f64 = rng.random();
    let target = u * cdf[cdf.len() - 1];
    let cell = cdf.partition_point(|&c| c < target).min(cdf.len() - 1);
    let inner: f64 = rng.random::<f64>() - 0.5;
    (cell, inner)
}

/// `n` i.i.d. draws from |psi|^2 on the grid, deterministic per seed.
pub fn born_sample(psi: &WaveFunction, n: usize, seed: u64) -> Result<Ensemble> {
    if n == 0 {
        return Err(Error::invalid("ensemble size must be at least 1"));
    }
    let grid = psi.grid();
    let rho = psi.density();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut positions = Vec::with_capacity(n);
    match grid.dims() {
        1 => {
            let ax = grid.axis(0);
            let h = ax.spacing();
            let mut cdf = Vec::with_capacity(rho.len());
            let mut acc = 0.0;
            for r in &rho {
                acc += r;
                cdf.push(acc);
            }
            for _ in 0..n {
                let (cell, inner) = sample_cell(&cdf, &mut rng);
                positions.push(vec![ax.min + (cell as f64 + inner) * h]);
            }
        }
        2 => {
            let (ax, ay) = (grid.axis(0), grid.axis(1));
            let (hx, hy) = (ax.spacing(), ay.spacing());
            let ny = ay.n;
            // marginal over x, then the conditional column in y
            let mut xcdf = Vec::with_capacity(ax.n);
            let mut acc = 0.0;
            for ix in 0..ax.n {
                acc += rho[ix * ny..(ix + 1) * ny].iter().sum::<f64>();
                xcdf.push(acc);
            }
            let mut ycdf = vec![0.0; ny];
            for _ in 0..n {
                let (ix, ux) = sample_cell(&xcdf, &mut rng);
                let mut acc = 0.0;
                for (iy, slot) in ycdf.iter_mut().enumerate() {
                    acc += rho[ix * ny + iy];
                    *slot = acc;
                }
                let (iy, uy) = sample_cell(&ycdf, &mut rng);
                positions.push(vec![ax.min + (ix as f64 + ux) * hx, ay.min + (iy as f64 + uy) * hy]);
            }
        }
        _ => unreachable!(),
    }
    Ok(Ensemble {
        positions,
        time: psi.time(),
        seed,
    })
}

/// Push every member from the ensemble's time to `t`, dropping truncated
/// trajectories. `velocity_scale` != 1 deliberately breaks the law and is
/// used by the negative controls.
pub fn push_ensemble_scaled(
    e: &Ensemble,
    w: &dyn WaveAt,
    law: &GuidanceLaw,
    t: f64,
    dt: f64,
    velocity_scale: f64,
) -> Result<(Ensemble, PushStats)> {
    if t == e.time {
        return Ok((
            e.clone(),
            PushStats {
                requested: e.len(),
                truncated: 0,
            },
        ));
    }
    let endpoints: Vec<Option<Vec<f64>>> = e
        .positions
        .par_iter()
        .enumerate()
        .map(|(i, q0)| {
            let seed = match law {
                GuidanceLaw::Stochastic { .. } => {
                    Some(member_rng(e.seed, i as u64).random::<u64>())
                }
                _ => None,
            };
            flow_endpoint(w, law, q0, e.time, t, dt, seed, velocity_scale)
                .ok()
                .map(|q| q[..w.dims()].to_vec())
        })
        .collect();
    let requested = e.len();
    let positions: Vec<Vec<f64>> = endpoints.into_iter().flatten().collect();
    let truncated = requested - positions.len();
    let rate = truncated as f64 / requested as f64;
    if rate > 0.01 {
        return Err(Error::TruncationRate {
            truncated,
            total: requested,
            rate: rate * 100.0,
        });
    }
    Ok((
        Ensemble {
            positions,
            time: t,
            seed: e.seed,
        },
        PushStats {
            requested,
            truncated,
        },
    ))
}

pub fn push_ensemble(
    e: &Ensemble,
    w: &dyn WaveAt,
    law: &GuidanceLaw,
    t: f64,
    dt: f64,
) -> Result<(Ensemble, PushStats)> {
    push_ensemble_scaled(e, w, law, t, dt, 1.0)
}

/// Equivariance: KS of a pushed Born ensemble against a reference sample
/// drawn from the gridded |psi(t)|^2. For 2D states the per-axis marginals
/// are tested and the smaller p-value reported.
pub fn equivariance_test(
    w: &dyn WaveAt,
    law: &GuidanceLaw,
    t0: f64,
    t1: f64,
    n: usize,
    seed: u64,
    dt: f64,
) -> Result<KsReport> {
    equivariance_test_scaled(w, law, t0, t1, n, seed, dt, 1.0)
}

/// Equivariance with a deliberately mis-scaled velocity field; the
/// negative control for the statistical machinery.
pub fn equivariance_test_scaled(
    w: &dyn WaveAt,
    law: &GuidanceLaw,
    t0: f64,
    t1: f64,
    n: usize,
    seed: u64,
    dt: f64,
    velocity_scale: f64,
) -> Result<KsReport> {
    let initial = w.reference_state(t0)?;
    let drawn = born_sample(&initial.at_time(t0), n, seed)?;
    let (pushed, _stats) = push_ensemble_scaled(&drawn, w, law, t1, dt, velocity_scale)?;
    let target = w.reference_state(t1)?;
    let reference = born_sample(&target, n, derive_seed(seed, 1))?;
    ks_marginals(&pushed, &reference, w.dims())
}

/// Screen-level indistinguishability: two-sample KS between the pushed
/// marginals of two laws started from the same preparation.
pub fn indistinguishability_test(
    w: &dyn WaveAt,
    law_a: &GuidanceLaw,
    law_b: &GuidanceLaw,
    t0: f64,
    t1: f64,
    n: usize,
    seeds: (u64, u64),
    dt: f64,
) -> Result<KsReport> {
    indistinguishability_test_scaled(w, law_a, law_b, t0, t1, n, seeds, dt, (1.0, 1.0))
}

pub fn indistinguishability_test_scaled(
    w: &dyn WaveAt,
    law_a: &GuidanceLaw,
    law_b: &GuidanceLaw,
    t0: f64,
    t1: f64,
    n: usize,
    seeds: (u64, u64),
    dt: f64,
    scales: (f64, f64),
) -> Result<KsReport> {
    let initial = w.reference_state(t0)?;
    let ea = born_sample(&initial.at_time(t0), n, seeds.0)?;
    let eb = born_sample(&initial.at_time(t0), n, seeds.1)?;
    let (pa, _) = push_ensemble_scaled(&ea, w, law_a, t1, dt, scales.0)?;
    let (pb, _) = push_ensemble_scaled(&eb, w, law_b, t1, dt, scales.1)?;
    // The screen records the first coordinate.
    ks_two_sample(&pa.axis(0), &pb.axis(0))
}

fn ks_marginals(a: &Ensemble, b: &Ensemble, dims: usize) -> Result<KsReport> {
    let mut worst: Option<KsReport> = None;
    for d in 0..dims {
        let rep = ks_two_sample(&a.axis(d), &b.axis(d))?;
        worst = Some(match worst {
            Some(w) if w.p_value <= rep.p_value => w,
            _ => rep,
        });
    }
    Ok(worst.expect("at least one axis"))
}

fn derive_seed(seed: u64, stream: u64) -> u64 {
    // splitmix64 round
    let mut z = seed
        .wrapping_add(0x9e3779b97f4a7c15_u64.wrapping_mul(stream.wrapping_add(1)));
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
    z ^ (z >> 31)
}

/// Mean and max distance between paired trajectories of two deterministic
/// laws from the same starting points.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct PathDivergence {
    pub mean: f64,
    pub max: f64,
    pub pairs: usize,
}

/// Integrate each start under both laws and measure the largest pointwise
/// distance along the pair, then aggregate over pairs.
pub fn path_divergence(
    w: &dyn WaveAt,
    law_a: &GuidanceLaw,
    law_b: &GuidanceLaw,
    starts: &[Vec<f64>],
    t0: f64,
    t1: f64,
    dt: f64,
) -> Result<PathDivergence> {
    if !(law_a.is_deterministic() && law_b.is_deterministic()) {
        return Err(Error::DeterministicLawRequired);
    }
    if starts.is_empty() {
        return Err(Error::invalid("path_divergence needs at least one start"));
    }
    let per_pair: Vec<f64> = starts
        .par_iter()
        .map(|q0| -> Result<f64> {
            let ta = crate::guidance::integrate_trajectory(w, law_a, q0, t0, t1, dt, None)?;
            let tb = crate::guidance::integrate_trajectory(w, law_b, q0, t0, t1, dt, None)?;
            if !(ta.status.is_complete() && tb.status.is_complete()) {
                return Err(Error::FlowTruncated {
                    time: t1,
                    reason: "paired trajectory truncated".into(),
                });
            }
            let steps = ta.positions.len().min(tb.positions.len());
            let mut worst = 0.0_f64;
            for s in 0..steps {
                let d2: f64 = ta.positions[s]
                    .iter()
                    .zip(&tb.positions[s])
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum();
                worst = worst.max(d2.sqrt());
            }
            Ok(worst)
        })
        .collect::<Result<Vec<f64>>>()?;
    let mean = per_pair.iter().sum::<f64>() / per_pair.len() as f64;
    let max = per_pair.iter().cloned().fold(0.0, f64::max);
    Ok(PathDivergence {
        mean,
        max,
        pairs: per_pair.len(),
    })
}
