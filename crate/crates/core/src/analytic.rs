//! Closed-form free evolution of Gaussian packet superpositions.
//!
//! A free Gaussian stays Gaussian with the complex width factor
//! `gamma(t) = 1 + i hbar t / (2 m sigma^2)`; superpositions of displaced,
//! boosted packets (the double-slit preparation) therefore evolve exactly.
//! This provider carries no grid state and is valid for all times, which
//! makes it the independent reference for the split-step propagator and a
//! cheap exact backdrop for trajectory ensembles.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::constants::PhysicalConstants;
use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::provider::{ValueGrad, WaveAt};
use crate::wavefield::WaveFunction;

/// One Gaussian packet factor per axis: center, width (std of |psi|^2) and
/// wavevector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaussianTerm {
    pub coeff: Complex64,
    pub center: Vec<f64>,
    pub sigma: Vec<f64>,
    pub wavevector: Vec<f64>,
}

impl GaussianTerm {
    pub fn new_1d(coeff: Complex64, center: f64, sigma: f64, k: f64) -> Self {
        Self {
            coeff,
            center: vec![center],
            sigma: vec![sigma],
            wavevector: vec![k],
        }
    }
}

pub struct AnalyticFreeState {
    terms: Vec<GaussianTerm>,
    consts: PhysicalConstants,
    dims: usize,
    ref_grid: Grid,
    peak: f64,
}

impl AnalyticFreeState {
    /// Build a normalized superposition. The reference grid is used for
    /// gridded snapshots, Born sampling and the node threshold; it should
    /// comfortably contain the state over the times of interest.
    pub fn new(terms: Vec<GaussianTerm>, consts: PhysicalConstants, ref_grid: Grid) -> Result<Self> {
        if terms.is_empty() {
            return Err(Error::invalid("analytic state needs at least one term"));
        }
        let dims = ref_grid.dims();
        for t in &terms {
            if t.center.len() != dims || t.sigma.len() != dims || t.wavevector.len() != dims {
                return Err(Error::GridMismatch);
            }
            if t.sigma.iter().any(|&s| !(s > 0.0)) {
                return Err(Error::invalid("gaussian width must be positive"));
            }
        }
        let mut state = Self {
            terms,
            consts,
            dims,
            ref_grid,
            peak: 0.0,
        };
        // Normalize through the Gram matrix of term overlaps at t = 0
        // (free evolution is unitary, so the norm is time independent).
        let mut norm_sq = Complex64::ZERO;
        for a in &state.terms {
            for b in &state.terms {
                norm_sq += a.coeff * b.coeff.conj() * overlap(b, a);
            }
        }
        let norm = norm_sq.re.sqrt();
        if !(norm > 1e-12) || !norm.is_finite() {
            return Err(Error::ZeroVector { norm });
        }
        for t in state.terms.iter_mut() {
            t.coeff /= norm;
        }
        state.peak = (0..state.ref_grid.len())
            .map(|i| state.value(&state.ref_grid.point(i), 0.0).norm_sqr())
            .fold(0.0, f64::max);
        Ok(state)
    }

    /// The symmetric double-slit preparation: two displaced transverse
    /// Gaussians with equal weight, optionally boosted along the axis.
    pub fn double_slit_1d(
        separation: f64,
        sigma: f64,
        consts: PhysicalConstants,
        ref_grid: Grid,
    ) -> Result<Self> {
        let half = separation / 2.0;
        Self::new(
            vec![
                GaussianTerm::new_1d(Complex64::ONE, -half, sigma, 0.0),
                GaussianTerm::new_1d(Complex64::ONE, half, sigma, 0.0),
            ],
            consts,
            ref_grid,
        )
    }

    pub fn terms(&self) -> &[GaussianTerm] {
        &self.terms
    }

    pub fn value(&self, q: &[f64], t: f64) -> Complex64 {
        self.terms
            .iter()
            .map(|term| term.coeff * term_value(term, q, t, &self.consts).0)
            .sum()
    }

    /// Sample the state on an arbitrary grid at time `t`.
    pub fn on_grid(&self, grid: &Grid, t: f64) -> Result<WaveFunction> {
        let amps: Vec<Complex64> = (0..grid.len()).map(|i| self.value(&grid.point(i), t)).collect();
        WaveFunction::from_amplitudes(grid.clone(), amps, t)
    }
}

/// Value of one (unit-normalized) term and its per-axis derivative factors.
fn term_value(
    term: &GaussianTerm,
    q: &[f64],
    t: f64,
    consts: &PhysicalConstants,
) -> (Complex64, [Complex64; 2]) {
    let mut val = Complex64::ONE;
    let mut dlog = [Complex64::ZERO; 2];
    for d in 0..term.center.len() {
        let sigma = term.sigma[d];
        let k = term.wavevector[d];
        let x = q[d];
        let gamma = Complex64::new(1.0, consts.hbar * t / (2.0 * consts.mass * sigma * sigma));
        let v = consts.hbar * k / consts.mass;
        let xc = term.center[d] + v * t;
        let amp_norm = (2.0 * std::f64::consts::PI * sigma * sigma).powf(-0.25);
        let phase = Complex64::new(0.0, k * x - consts.hbar * k * k * t / (2.0 * consts.mass));
        let spread = -Complex64::new((x - xc) * (x - xc) / (4.0 * sigma * sigma), 0.0) / gamma;
        val *= amp_norm / gamma.sqrt() * (phase + spread).exp();
        dlog[d] = Complex64::new(0.0, k) - Complex64::new((x - xc) / (2.0 * sigma * sigma), 0.0) / gamma;
    }
    (val, dlog)
}

/// Overlap `<b|a>` of two unit-normalized terms at t = 0.
fn overlap(b: &GaussianTerm, a: &GaussianTerm) -> Complex64 {
    let mut out = Complex64::ONE;
    for d in 0..a.center.len() {
        let (sa, sb) = (a.sigma[d], b.sigma[d]);
        let (ca, cb) = (a.center[d], b.center[d]);
        let (ka, kb) = (a.wavevector[d], b.wavevector[d]);
        let na = (2.0 * std::f64::consts::PI * sa * sa).powf(-0.25);
        let nb = (2.0 * std::f64::consts::PI * sb * sb).powf(-0.25);
        let alpha = Complex64::new(1.0 / (4.0 * sa * sa) + 1.0 / (4.0 * sb * sb), 0.0);
        let beta = Complex64::new(ca / (2.0 * sa * sa) + cb / (2.0 * sb * sb), ka - kb);
        let gamma0 = -ca * ca / (4.0 * sa * sa) - cb * cb / (4.0 * sb * sb);
        let integral = (std::f64::consts::PI / alpha).sqrt() * (beta * beta / (4.0 * alpha) + gamma0).exp();
        out *= na * nb * integral;
    }
    out
}

impl WaveAt for AnalyticFreeState {
    fn dims(&self) -> usize {
        self.dims
    }

    fn constants(&self) -> &PhysicalConstants {
        &self.consts
    }

    fn time_span(&self) -> (f64, f64) {
        (f64::NEG_INFINITY, f64::INFINITY)
    }

    fn contains(&self, q: &[f64]) -> bool {
        self.ref_grid.contains(q)
    }

    fn reference_peak_density(&self) -> f64 {
        self.peak
    }

    fn value_grad(&self, q: &[f64], t: f64) -> Result<ValueGrad> {
        if !self.contains(q) {
            return Err(Error::OutOfBounds { q: q.to_vec() });
        }
        let mut value = Complex64::ZERO;
        let mut grad = [Complex64::ZERO; 2];
        for term in &self.terms {
            let (v, dlog) = term_value(term, q, t, &self.consts);
            let v = term.coeff * v;
            value += v;
            for d in 0..self.dims {
                grad[d] += v * dlog[d];
            }
        }
        Ok(ValueGrad {
            value,
            grad,
            dims: self.dims,
        })
    }

    fn reference_state(&self, t: f64) -> Result<WaveFunction> {
        self.on_grid(&self.ref_grid, t)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::wavefield::{free_gaussian_sigma, gaussian_packet, propagate, superpose, Potential};

    fn consts() -> PhysicalConstants {
        PhysicalConstants::default()
    }

    #[test]
    fn single_term_matches_grid_packet_at_t0() {
        let grid = Grid::new_1d(-20.0, 20.0, 1024).unwrap();
        let state = AnalyticFreeState::new(
            vec![GaussianTerm::new_1d(Complex64::ONE, 1.0, 0.8, 1.5)],
            consts(),
            grid.clone(),
        )
        .unwrap();
        let on_grid = state.on_grid(&grid, 0.0).unwrap();
        let reference = gaussian_packet(&grid, &[1.0], 0.8, &[1.5]).unwrap();
        let err = on_grid
            .amplitudes()
            .iter()
            .zip(reference.amplitudes())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        assert!(err < 1e-12, "t=0 mismatch {err}");
    }

    #[test]
    fn dispersion_matches_analytic_formula() {
        let grid = Grid::new_1d(-30.0, 30.0, 1024).unwrap();
        let state = AnalyticFreeState::new(
            vec![GaussianTerm::new_1d(Complex64::ONE, 0.0, 1.0, 0.0)],
            consts(),
            grid.clone(),
        )
        .unwrap();
        let snap = state.on_grid(&grid, 2.0).unwrap();
        let sigma = snap.position_variance()[0].sqrt();
        let expect = free_gaussian_sigma(1.0, 2.0, &consts());
        assert!(((sigma - expect) / expect).abs() < 1e-9);
    }

    #[test]
    fn matches_split_step_evolution_of_double_slit() {
        let grid = Grid::new_1d(-20.0, 20.0, 512).unwrap();
        let c = consts();
        let state = AnalyticFreeState::double_slit_1d(4.0, 0.7, c, grid.clone()).unwrap();

        let a = gaussian_packet(&grid, &[-2.0], 0.7, &[0.0]).unwrap();
        let b = gaussian_packet(&grid, &[2.0], 0.7, &[0.0]).unwrap();
        let psi0 = superpose(&a, &b, Complex64::ONE, Complex64::ONE).unwrap();
        let t = 1.5;
        let numeric = propagate(&psi0, &c, &Potential::Free, 1e-3, 1500).unwrap();
        let exact = state.on_grid(&grid, t).unwrap();
        let err = numeric
            .amplitudes()
            .iter()
            .zip(exact.amplitudes())
            .map(|(x, y)| (x - y).norm())
            .fold(0.0, f64::max);
        assert!(err < 1e-7, "split-step vs closed form: {err}");
    }

    #[test]
    fn two_dimensional_product_terms() {
        let grid = Grid::new_2d((-15.0, 15.0, 128), (-15.0, 15.0, 128)).unwrap();
        let term = GaussianTerm {
            coeff: Complex64::ONE,
            center: vec![1.0, -2.0],
            sigma: vec![0.9, 1.3],
            wavevector: vec![0.5, 0.0],
        };
        let state = AnalyticFreeState::new(vec![term], consts(), grid.clone()).unwrap();
        let snap = state.on_grid(&grid, 0.7).unwrap();
        assert!((snap.norm() - 1.0).abs() < 1e-9);
        let mean = snap.mean_position();
        assert!((mean[0] - (1.0 + 0.5 * 0.7)).abs() < 1e-6);
        assert!((mean[1] + 2.0).abs() < 1e-6);
    }

    #[test]
    fn normalization_accounts_for_term_overlap() {
        let grid = Grid::new_1d(-20.0, 20.0, 1024).unwrap();
        // Heavily overlapping lumps: naive 1/sqrt(2) scaling would be wrong.
        let state = AnalyticFreeState::double_slit_1d(0.5, 1.0, consts(), grid.clone()).unwrap();
        let raw: f64 = state.terms().iter().map(|t| t.coeff.norm_sqr()).sum();
        assert!(raw < 0.6, "overlap must suppress coefficients, got {raw}");
        // The continuum norm, estimated by quadrature before any grid
        // renormalization, must already be 1.
        let dv = grid.cell_volume();
        let norm_sq: f64 = (0..grid.len())
            .map(|i| state.value(&grid.point(i), 0.0).norm_sqr())
            .sum::<f64>()
            * dv;
        assert!((norm_sq - 1.0).abs() < 1e-9, "continuum norm^2 {norm_sq}");
    }
}
