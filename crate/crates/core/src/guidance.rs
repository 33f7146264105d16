//! Guidance velocity fields and trajectory integration.
//!
//! The standard law moves particles with (hbar/m) Im(grad psi / psi). The
//! modified family adds j / |psi|^2 for a divergence-free field j, which
//! changes every trajectory while leaving |psi|^2 transport intact. The
//! stochastic variant is Nelson dynamics: forward drift v + nu grad rho /
//! rho with diffusion coefficient nu (hbar/2m by default).
//!
//! Deterministic laws integrate with classical fixed-step RK4; the
//! stochastic law with Euler–Maruyama. Velocity evaluation refuses near
//! nodes and near the singular points of j; trajectories hitting either
//! are truncated and flagged, never silently continued.

use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::provider::WaveAt;

/// A divergence-free vector field j with bookkeeping for its singular
/// points. The evaluator maps (position, time) to the field value.
#[derive(Clone)]
pub struct DivFreeField {
    eval: Arc<dyn Fn(&[f64], f64) -> [f64; 2] + Send + Sync>,
    singular_points: Vec<Vec<f64>>,
    exclusion_radius: f64,
    label: String,
}

impl std::fmt::Debug for DivFreeField {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("DivFreeField")
            .field("label", &self.label)
            .field("singular_points", &self.singular_points)
            .field("exclusion_radius", &self.exclusion_radius)
            .finish()
    }
}

impl DivFreeField {
    pub fn new(
        label: impl Into<String>,
        eval: impl Fn(&[f64], f64) -> [f64; 2] + Send + Sync + 'static,
        singular_points: Vec<Vec<f64>>,
        exclusion_radius: f64,
    ) -> Self {
        Self {
            eval: Arc::new(eval),
            singular_points,
            exclusion_radius,
            label: label.into(),
        }
    }

    /// The point-vortex field `strength * (-(y-cy), x-cx) / r^2`, singular
    /// at its core.
    pub fn swirl(strength: f64, center: [f64; 2], exclusion_radius: f64) -> Self {
        Self::new(
            format!("swirl(c={strength})"),
            move |q: &[f64], _t| {
                let dx = q[0] - center[0];
                let dy = q[1] - center[1];
                let r2 = dx * dx + dy * dy;
                [-strength * dy / r2, strength * dx / r2]
            },
            vec![center.to_vec()],
            exclusion_radius,
        )
    }

    /// The point vortex with a Gaussian radial envelope,
    /// `strength * exp(-r^2 / (2 width^2)) * (-(y-cy), x-cx) / r^2`.
    ///
    /// Any purely azimuthal field g(r) theta-hat is divergence free, so the
    /// envelope keeps j admissible while restoring the decay at infinity
    /// that |psi|^-2 amplification otherwise destroys on localized states.
    pub fn localized_swirl(strength: f64, center: [f64; 2], width: f64, exclusion_radius: f64) -> Self {
        Self::new(
            format!("localized-swirl(c={strength},w={width})"),
            move |q: &[f64], _t| {
                let dx = q[0] - center[0];
                let dy = q[1] - center[1];
                let r2 = dx * dx + dy * dy;
                let g = strength * (-r2 / (2.0 * width * width)).exp() / r2;
                [-g * dy, g * dx]
            },
            vec![center.to_vec()],
            exclusion_radius,
        )
    }

    /// Spatially constant field; the only divergence-free option in 1D.
    pub fn constant(components: Vec<f64>) -> Self {
        let mut c = [0.0; 2];
        for (slot, v) in c.iter_mut().zip(&components) {
            *slot = *v;
        }
        Self::new(
            format!("constant({components:?})"),
            move |_q: &[f64], _t| c,
            Vec::new(),
            0.0,
        )
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn singular_points(&self) -> &[Vec<f64>] {
        &self.singular_points
    }

    pub fn exclusion_radius(&self) -> f64 {
        self.exclusion_radius
    }

    pub fn evaluate(&self, q: &[f64], t: f64) -> [f64; 2] {
        (self.eval)(q, t)
    }

    /// The singular point whose exclusion ball contains `q`, if any.
    pub fn violated_singularity(&self, q: &[f64]) -> Option<&Vec<f64>> {
        self.singular_points.iter().find(|p| {
            let d2: f64 = p.iter().zip(q).map(|(a, b)| (a - b) * (a - b)).sum();
            d2 < self.exclusion_radius * self.exclusion_radius
        })
    }
}

/// Particle dynamics selector.
#[derive(Debug, Clone)]
pub enum GuidanceLaw {
    Standard,
    Modified(DivFreeField),
    Stochastic { diffusion: f64 },
}

impl GuidanceLaw {
    pub fn is_deterministic(&self) -> bool {
        !matches!(self, GuidanceLaw::Stochastic { .. })
    }

    pub fn label(&self) -> String {
        match self {
            GuidanceLaw::Standard => "standard".into(),
            GuidanceLaw::Modified(j) => format!("modified[{}]", j.label()),
            GuidanceLaw::Stochastic { diffusion } => format!("stochastic(nu={diffusion})"),
        }
    }
}

/// Standard guidance velocity (hbar/m) Im(grad psi / psi) at `q`, `t`.
pub fn standard_velocity(w: &dyn WaveAt, q: &[f64], t: f64) -> Result<Vec<f64>> {
    let v = eval_velocity(w, &GuidanceLaw::Standard, q, t, 1.0)?;
    Ok(v[..w.dims()].to_vec())
}

/// Modified velocity: standard plus `j(q) / |psi(q)|^2`.
pub fn modified_velocity(w: &dyn WaveAt, j: &DivFreeField, q: &[f64], t: f64) -> Result<Vec<f64>> {
    let law = GuidanceLaw::Modified(j.clone());
    let v = eval_velocity(w, &law, q, t, 1.0)?;
    Ok(v[..w.dims()].to_vec())
}

/// Drift of the selected law at (q, t); `scale` is a diagnostic multiplier
/// used by the broken-law negative controls.
pub(crate) fn eval_velocity(
    w: &dyn WaveAt,
    law: &GuidanceLaw,
    q: &[f64],
    t: f64,
    scale: f64,
) -> Result<[f64; 2]> {
    if !w.contains(q) {
        return Err(Error::OutOfBounds { q: q.to_vec() });
    }
    if let GuidanceLaw::Modified(j) = law {
        if let Some(p) = j.violated_singularity(q) {
            return Err(Error::SingularPointProximity {
                q: q.to_vec(),
                point: p.clone(),
                radius: j.exclusion_radius(),
            });
        }
    }
    let vg = w.value_grad(q, t)?;
    let rho = vg.density();
    let threshold = w.node_threshold();
    if rho < threshold {
        return Err(Error::NodeProximity {
            q: q.to_vec(),
            density: rho,
            threshold,
        });
    }
    let mut v = vg.velocity(w.constants());
    match law {
        GuidanceLaw::Standard => {}
        GuidanceLaw::Modified(j) => {
            let jv = j.evaluate(q, t);
            for d in 0..w.dims() {
                v[d] += jv[d] / rho;
            }
        }
        GuidanceLaw::Stochastic { diffusion } => {
            let osmotic = vg.log_density_gradient();
            for d in 0..w.dims() {
                v[d] += diffusion * osmotic[d];
            }
        }
    }
    for x in v.iter_mut() {
        *x *= scale;
    }
    Ok(v)
}

/// Max |div j| over the interior of `region` by central differences,
/// skipping points within `max(3 spacings, exclusion radius)` of any
/// singular point. The difference stencil is a thousandth of the grid
/// spacing: the region controls where we sample, not the truncation error.
pub fn check_divergence_free(j: &DivFreeField, region: &Grid, t: f64) -> f64 {
    let dims = region.dims();
    let hs: Vec<f64> = (0..dims)
        .map(|d| region.axis(d).spacing() * 1e-3)
        .collect();
    let guard = {
        let h3 = 3.0 * (0..dims).map(|d| region.axis(d).spacing()).fold(0.0, f64::max);
        h3.max(j.exclusion_radius())
    };
    let mut worst = 0.0_f64;
    for i in 0..region.len() {
        let q = region.point(i);
        // stay one stencil step inside the region
        let interior = (0..dims).all(|d| {
            let a = region.axis(d);
            q[d] - hs[d] >= a.min && q[d] + hs[d] <= a.max
        });
        if !interior {
            continue;
        }
        let near_singular = j.singular_points().iter().any(|p| {
            let d2: f64 = p.iter().zip(&q).map(|(a, b)| (a - b) * (a - b)).sum();
            d2 < guard * guard
        });
        if near_singular {
            continue;
        }
        let mut div = 0.0;
        for d in 0..dims {
            let mut qp = q.clone();
            let mut qm = q.clone();
            qp[d] += hs[d];
            qm[d] -= hs[d];
            div += (j.evaluate(&qp, t)[d] - j.evaluate(&qm, t)[d]) / (2.0 * hs[d]);
        }
        worst = worst.max(div.abs());
    }
    worst
}

/// Why a trajectory stopped early, if it did.
#[derive(Debug, Clone, PartialEq)]
pub enum TrajectoryStatus {
    Complete,
    TruncatedNode { time: f64 },
    TruncatedOutOfBounds { time: f64 },
    TruncatedSingular { time: f64 },
}

impl TrajectoryStatus {
    pub fn is_complete(&self) -> bool {
        matches!(self, TrajectoryStatus::Complete)
    }

    fn from_error(e: &Error, time: f64) -> Self {
        match e {
            Error::NodeProximity { .. } => TrajectoryStatus::TruncatedNode { time },
            Error::SingularPointProximity { .. } => TrajectoryStatus::TruncatedSingular { time },
            _ => TrajectoryStatus::TruncatedOutOfBounds { time },
        }
    }
}

/// A time-stamped particle path.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub positions: Vec<Vec<f64>>,
    pub law: String,
    pub seed: Option<u64>,
    pub status: TrajectoryStatus,
}

fn rk4_step(
    w: &dyn WaveAt,
    law: &GuidanceLaw,
    q: [f64; 2],
    t: f64,
    h: f64,
    scale: f64,
    dims: usize,
) -> Result<[f64; 2]> {
    let shift = |q: [f64; 2], k: [f64; 2], f: f64| {
        let mut out = q;
        for d in 0..dims {
            out[d] += f * k[d];
        }
        out
    };
    let k1 = eval_velocity(w, law, &q[..dims], t, scale)?;
    let k2 = eval_velocity(w, law, &shift(q, k1, h / 2.0)[..dims], t + h / 2.0, scale)?;
    let k3 = eval_velocity(w, law, &shift(q, k2, h / 2.0)[..dims], t + h / 2.0, scale)?;
    let k4 = eval_velocity(w, law, &shift(q, k3, h)[..dims], t + h, scale)?;
    let mut out = q;
    for d in 0..dims {
        out[d] += h / 6.0 * (k1[d] + 2.0 * k2[d] + 2.0 * k3[d] + k4[d]);
    }
    Ok(out)
}

fn em_step(
    w: &dyn WaveAt,
    law: &GuidanceLaw,
    q: [f64; 2],
    t: f64,
    h: f64,
    scale: f64,
    dims: usize,
    diffusion: f64,
    rng: &mut ChaCha8Rng,
) -> Result<[f64; 2]> {
    let drift = eval_velocity(w, law, &q[..dims], t, scale)?;
    let noise_amp = (2.0 * diffusion * h).sqrt();
    let mut out = q;
    for d in 0..dims {
        let z: f64 = StandardNormal.sample(rng);
        out[d] += drift[d] * h + noise_amp * z;
    }
    Ok(out)
}

/// Endpoint of the flow from `q0` at `t0` to `t1` (either direction for
/// deterministic laws). On truncation the error carries the stop time.
pub(crate) fn flow_endpoint(
    w: &dyn WaveAt,
    law: &GuidanceLaw,
    q0: &[f64],
    t0: f64,
    t1: f64,
    dt: f64,
    seed: Option<u64>,
    scale: f64,
) -> Result<[f64; 2]> {
    let dims = w.dims();
    let mut q = [0.0; 2];
    q[..dims].copy_from_slice(q0);
    if t1 == t0 {
        return Ok(q);
    }
    let span = t1 - t0;
    let nsteps = (span.abs() / dt).ceil().max(1.0) as usize;
    let h = span / nsteps as f64;
    let mut rng = match law {
        GuidanceLaw::Stochastic { .. } => {
            if span < 0.0 {
                return Err(Error::invalid("stochastic paths cannot run backward"));
            }
            Some(ChaCha8Rng::seed_from_u64(seed.ok_or(Error::SeedRequired)?))
        }
        _ => None,
    };
    let mut t = t0;
    for i in 0..nsteps {
        let stepped = match law {
            GuidanceLaw::Stochastic { diffusion } => em_step(
                w,
                law,
                q,
                t,
                h,
                scale,
                dims,
                *diffusion,
                rng.as_mut().expect("stochastic rng"),
            ),
            _ => rk4_step(w, law, q, t, h, scale, dims),
        };
        match stepped {
            Ok(next) => {
                q = next;
                t = t0 + span * (i + 1) as f64 / nsteps as f64;
            }
            Err(e) => {
                return Err(Error::FlowTruncated {
                    time: t,
                    reason: e.to_string(),
                })
            }
        }
    }
    Ok(q)
}

/// Integrate a single trajectory from `q0` over `[t0, t1]`, recording every
/// accepted step. Truncation is recorded in the status, not an error.
pub fn integrate_trajectory(
    w: &dyn WaveAt,
    law: &GuidanceLaw,
    q0: &[f64],
    t0: f64,
    t1: f64,
    dt: f64,
    seed: Option<u64>,
) -> Result<Trajectory> {
    if !(dt > 0.0) {
        return Err(Error::invalid("dt must be positive"));
    }
    if !(t1 > t0) {
        return Err(Error::invalid("t1 must exceed t0"));
    }
    if !w.contains(q0) {
        return Err(Error::OutOfBounds { q: q0.to_vec() });
    }
    let dims = w.dims();
    let mut rng = match law {
        GuidanceLaw::Stochastic { .. } => {
            Some(ChaCha8Rng::seed_from_u64(seed.ok_or(Error::SeedRequired)?))
        }
        _ => None,
    };
    let span = t1 - t0;
    let nsteps = (span / dt).ceil().max(1.0) as usize;
    let h = span / nsteps as f64;

    let mut q = [0.0; 2];
    q[..dims].copy_from_slice(q0);
    let mut times = Vec::with_capacity(nsteps + 1);
    let mut positions = Vec::with_capacity(nsteps + 1);
    let mut status = TrajectoryStatus::Complete;
    times.push(t0);
    positions.push(q[..dims].to_vec());
    for i in 0..nsteps {
        let t = t0 + span * i as f64 / nsteps as f64;
        let stepped = match law {
            GuidanceLaw::Stochastic { diffusion } => em_step(
                w,
                law,
                q,
                t,
                h,
                1.0,
                dims,
                *diffusion,
                rng.as_mut().expect("stochastic rng"),
            ),
            _ => rk4_step(w, law, q, t, h, 1.0, dims),
        };
        match stepped {
            Ok(next) => {
                q = next;
                times.push(t0 + span * (i + 1) as f64 / nsteps as f64);
                positions.push(q[..dims].to_vec());
            }
            Err(e) => {
                status = TrajectoryStatus::from_error(&e, t);
                break;
            }
        }
    }
    Ok(Trajectory {
        times,
        positions,
        law: law.label(),
        seed,
        status,
    })
}

/// Forward (tau > 0) or backward (tau < 0) flow endpoint under a
/// deterministic law, starting at `q` at time `t_start`.
pub fn flow_map(
    w: &dyn WaveAt,
    law: &GuidanceLaw,
    q: &[f64],
    t_start: f64,
    tau: f64,
    dt: f64,
) -> Result<Vec<f64>> {
    if !law.is_deterministic() {
        return Err(Error::DeterministicLawRequired);
    }
    if !w.contains(q) {
        return Err(Error::OutOfBounds { q: q.to_vec() });
    }
    let end = flow_endpoint(w, law, q, t_start, t_start + tau, dt, None, 1.0)?;
    Ok(end[..w.dims()].to_vec())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytic::{AnalyticFreeState, GaussianTerm};
    use crate::constants::PhysicalConstants;
    use crate::provider::StationaryState;
    use crate::wavefield::{gaussian_packet, WaveFunction};
    use num_complex::Complex64;

    fn consts() -> PhysicalConstants {
        PhysicalConstants::default()
    }

    /// Normalized on-lattice plane wave exp(i k x) on [-10 pi, 10 pi).
    fn plane_wave(k_index: i32) -> StationaryState {
        let l = 20.0 * std::f64::consts::PI;
        let grid = Grid::new_1d(-l / 2.0, l / 2.0, 512).unwrap();
        let k = 2.0 * std::f64::consts::PI * k_index as f64 / l;
        let amps: Vec<Complex64> = (0..grid.len())
            .map(|i| Complex64::from_polar(1.0, k * grid.point(i)[0]))
            .collect();
        let psi = WaveFunction::from_amplitudes(grid, amps, 0.0).unwrap();
        StationaryState::new(psi, consts())
    }

    fn double_slit() -> AnalyticFreeState {
        let grid = Grid::new_1d(-20.0, 20.0, 512).unwrap();
        AnalyticFreeState::double_slit_1d(4.0, 0.7, consts(), grid).unwrap()
    }

    #[test]
    fn plane_wave_velocity_is_hbar_k_over_m() {
        let w = plane_wave(20); // k = 2
        for q in [-3.0, 0.0, 5.5] {
            let v = standard_velocity(&w, &[q], 0.0).unwrap();
            assert!((v[0] - 2.0).abs() < 1e-8, "v({q}) = {}", v[0]);
        }
    }

    #[test]
    fn real_state_velocity_vanishes() {
        let grid = Grid::new_1d(-15.0, 15.0, 512).unwrap();
        let psi = gaussian_packet(&grid, &[0.0], 1.0, &[0.0]).unwrap();
        let w = StationaryState::new(psi, consts());
        let v = standard_velocity(&w, &[0.8], 0.0).unwrap();
        assert!(v[0].abs() < 1e-10);
    }

    #[test]
    fn symmetric_double_slit_axis_velocity_zero() {
        let w = double_slit();
        for t in [0.5, 1.0, 2.0] {
            let v = standard_velocity(&w, &[0.0], t).unwrap();
            assert!(v[0].abs() < 1e-12, "axis velocity {} at t={t}", v[0]);
        }
    }

    #[test]
    fn node_proximity_refused() {
        let grid = Grid::new_1d(-20.0, 20.0, 512).unwrap();
        // Odd superposition: exact node pinned at x = 0.
        let a = gaussian_packet(&grid, &[-2.0], 0.7, &[0.0]).unwrap();
        let b = gaussian_packet(&grid, &[2.0], 0.7, &[0.0]).unwrap();
        let odd = crate::wavefield::superpose(&a, &b, Complex64::ONE, -Complex64::ONE).unwrap();
        let w = StationaryState::new(odd, consts());
        let err = standard_velocity(&w, &[0.0], 0.0).unwrap_err();
        assert!(matches!(err, Error::NodeProximity { .. }));
    }

    #[test]
    fn modified_with_zero_field_matches_standard_exactly() {
        let w = double_slit();
        let j = DivFreeField::constant(vec![0.0]);
        for q in [-2.5, -0.3, 1.7] {
            let vs = standard_velocity(&w, &[q], 1.0).unwrap();
            let vm = modified_velocity(&w, &j, &[q], 1.0).unwrap();
            assert_eq!(vs, vm, "bit-compatibility at q={q}");
        }
    }

    #[test]
    fn swirl_addition_matches_vortex_arithmetic() {
        // At q = (1, 0) the swirl contributes (0, 1/rho); at (0, 1) it
        // contributes (-1/rho, 0).
        let grid = Grid::new_2d((-8.0, 8.0, 128), (-8.0, 8.0, 128)).unwrap();
        let term = GaussianTerm {
            coeff: Complex64::ONE,
            center: vec![0.0, 0.0],
            sigma: vec![1.0, 1.0],
            wavevector: vec![0.0, 0.0],
        };
        let w = AnalyticFreeState::new(vec![term], consts(), grid).unwrap();
        let j = DivFreeField::swirl(1.0, [0.0, 0.0], 0.25);
        for (q, dir) in [([1.0, 0.0], [0.0, 1.0]), ([0.0, 1.0], [-1.0, 0.0])] {
            let rho = w.value_grad(&q, 0.0).unwrap().density();
            let vs = standard_velocity(&w, &q, 0.0).unwrap();
            let vm = modified_velocity(&w, &j, &q, 0.0).unwrap();
            for d in 0..2 {
                let expect = vs[d] + dir[d] / rho;
                assert!(
                    (vm[d] - expect).abs() < 1e-12,
                    "q={q:?} d={d}: {} vs {expect}",
                    vm[d]
                );
            }
        }
    }

    #[test]
    fn singular_point_exclusion() {
        let grid = Grid::new_2d((-8.0, 8.0, 128), (-8.0, 8.0, 128)).unwrap();
        let term = GaussianTerm {
            coeff: Complex64::ONE,
            center: vec![0.0, 0.0],
            sigma: vec![1.0, 1.0],
            wavevector: vec![0.0, 0.0],
        };
        let w = AnalyticFreeState::new(vec![term], consts(), grid).unwrap();
        let j = DivFreeField::swirl(1.0, [0.0, 0.0], 0.25);
        let err = modified_velocity(&w, &j, &[0.1, 0.0], 0.0).unwrap_err();
        assert!(matches!(err, Error::SingularPointProximity { .. }));
    }

    #[test]
    fn divergence_check_examples() {
        let region = Grid::new_2d((-5.0, 5.0, 256), (-5.0, 5.0, 256)).unwrap();
        let swirl = DivFreeField::swirl(1.0, [0.0, 0.0], 0.5);
        let div = check_divergence_free(&swirl, &region, 0.0);
        assert!(div <= 1e-6, "swirl divergence {div}");

        let coarse = Grid::new_2d((-5.0, 5.0, 64), (-5.0, 5.0, 64)).unwrap();
        let radial = DivFreeField::new("radial", |q: &[f64], _| [q[0], q[1]], vec![], 0.0);
        let div = check_divergence_free(&radial, &coarse, 0.0);
        assert!((div - 2.0).abs() < 1e-8, "radial divergence {div}");

        let rigid = DivFreeField::new("rigid", |q: &[f64], _| [-q[1], q[0]], vec![], 0.0);
        assert!(check_divergence_free(&rigid, &coarse, 0.0) <= 1e-10);
    }

    #[test]
    fn plane_wave_trajectory_is_straight() {
        let w = plane_wave(20); // v = 2
        let traj = integrate_trajectory(&w, &GuidanceLaw::Standard, &[0.0], 0.0, 3.0, 1e-2, None).unwrap();
        assert!(traj.status.is_complete());
        for (t, q) in traj.times.iter().zip(&traj.positions) {
            assert!((q[0] - 2.0 * t).abs() < 1e-9, "q({t}) = {}", q[0]);
        }
    }

    #[test]
    fn stationary_state_particles_do_not_move() {
        // Harmonic ground state: real and stationary, v = 0 identically.
        let grid = Grid::new_1d(-12.0, 12.0, 512).unwrap();
        let c = consts();
        let amps: Vec<Complex64> = (0..grid.len())
            .map(|i| {
                let x = grid.point(i)[0];
                Complex64::new((-0.5 * x * x).exp(), 0.0)
            })
            .collect();
        let psi = WaveFunction::from_amplitudes(grid, amps, 0.0).unwrap();
        let w = StationaryState::new(psi, c);
        let traj = integrate_trajectory(&w, &GuidanceLaw::Standard, &[0.9], 0.0, 2.0, 1e-2, None).unwrap();
        assert!(traj.status.is_complete());
        let end = traj.positions.last().unwrap();
        assert!((end[0] - 0.9).abs() < 1e-9);
    }

    #[test]
    fn double_slit_trajectories_never_cross() {
        let w = double_slit();
        let starts: Vec<f64> = (0..16).map(|i| 0.15 + i as f64 * 0.35).collect();
        let trajs: Vec<Trajectory> = starts
            .iter()
            .map(|&x0| {
                integrate_trajectory(&w, &GuidanceLaw::Standard, &[x0], 0.0, 2.5, 2e-3, None).unwrap()
            })
            .collect();
        let steps = trajs.iter().map(|t| t.positions.len()).min().unwrap();
        assert!(trajs.iter().all(|t| t.status.is_complete()));
        for s in 0..steps {
            for pair in trajs.windows(2) {
                assert!(
                    pair[0].positions[s][0] < pair[1].positions[s][0],
                    "ordering broken at step {s}"
                );
            }
        }
        // Trajectories launched right of the axis stay there.
        for t in &trajs {
            assert!(t.positions.iter().all(|q| q[0] > 0.0));
        }
    }

    #[test]
    fn flow_map_identity_and_shift() {
        let w = plane_wave(20);
        let q = flow_map(&w, &GuidanceLaw::Standard, &[1.0], 0.0, 0.0, 1e-3).unwrap();
        assert_eq!(q[0], 1.0);
        let q = flow_map(&w, &GuidanceLaw::Standard, &[1.0], 0.0, 1.0, 1e-3).unwrap();
        assert!((q[0] - 3.0).abs() < 1e-9);
    }

    #[test]
    fn flow_map_roundtrip() {
        let w = double_slit();
        let q0 = [1.3];
        let tau = 1.0;
        let fwd = flow_map(&w, &GuidanceLaw::Standard, &q0, 0.5, tau, 1e-3).unwrap();
        let back = flow_map(&w, &GuidanceLaw::Standard, &fwd, 0.5 + tau, -tau, 1e-3).unwrap();
        assert!(
            (back[0] - q0[0]).abs() <= 1e-6,
            "roundtrip error {}",
            (back[0] - q0[0]).abs()
        );
    }

    #[test]
    fn flow_map_requires_deterministic_law() {
        let w = double_slit();
        let err = flow_map(
            &w,
            &GuidanceLaw::Stochastic { diffusion: 0.5 },
            &[1.0],
            0.0,
            1.0,
            1e-3,
        )
        .unwrap_err();
        assert!(matches!(err, Error::DeterministicLawRequired));
    }

    #[test]
    fn rk4_halving_dt_reduces_endpoint_error_16x() {
        let w = double_slit();
        let q0 = [1.1];
        let (t0, t1) = (0.0, 2.4);
        let run = |dt: f64| {
            flow_endpoint(&w, &GuidanceLaw::Standard, &q0, t0, t1, dt, None, 1.0).unwrap()[0]
        };
        let reference = run(0.08 / 64.0);
        let e1 = (run(0.08) - reference).abs();
        let e2 = (run(0.04) - reference).abs();
        let ratio = e1 / e2;
        assert!(
            (12.0..=20.0).contains(&ratio),
            "RK4 order ratio {ratio} (e1={e1:.3e}, e2={e2:.3e})"
        );
    }

    #[test]
    fn stochastic_requires_seed_and_is_reproducible() {
        let w = double_slit();
        let law = GuidanceLaw::Stochastic { diffusion: 0.5 };
        assert!(matches!(
            integrate_trajectory(&w, &law, &[1.0], 0.0, 1.0, 1e-3, None).unwrap_err(),
            Error::SeedRequired
        ));
        let a = integrate_trajectory(&w, &law, &[1.0], 0.0, 1.0, 1e-3, Some(42)).unwrap();
        let b = integrate_trajectory(&w, &law, &[1.0], 0.0, 1.0, 1e-3, Some(42)).unwrap();
        let c = integrate_trajectory(&w, &law, &[1.0], 0.0, 1.0, 1e-3, Some(43)).unwrap();
        assert_eq!(a.positions, b.positions);
        assert_ne!(a.positions, c.positions);
    }

    #[test]
    fn trajectory_truncates_at_node() {
        let grid = Grid::new_1d(-20.0, 20.0, 512).unwrap();
        let a = gaussian_packet(&grid, &[-2.0], 0.7, &[0.0]).unwrap();
        let b = gaussian_packet(&grid, &[2.0], 0.7, &[0.0]).unwrap();
        let odd = crate::wavefield::superpose(&a, &b, Complex64::ONE, -Complex64::ONE).unwrap();
        let w = StationaryState::new(odd, consts());
        let traj = integrate_trajectory(&w, &GuidanceLaw::Standard, &[0.0], 0.0, 1.0, 1e-2, None).unwrap();
        assert!(matches!(traj.status, TrajectoryStatus::TruncatedNode { .. }));
        assert_eq!(traj.positions.len(), 1);
    }

    #[test]
    fn trajectory_truncates_out_of_bounds() {
        let w = plane_wave(20); // v = 2, heading right
        let l = 10.0 * std::f64::consts::PI;
        let traj =
            integrate_trajectory(&w, &GuidanceLaw::Standard, &[l - 0.5], 0.0, 5.0, 1e-2, None).unwrap();
        assert!(matches!(
            traj.status,
            TrajectoryStatus::TruncatedOutOfBounds { .. }
        ));
    }
}
