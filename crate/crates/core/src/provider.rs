//! Wavefunction-at-time providers: the interface trajectory integration
//! needs from a quantum state, plus grid interpolation machinery shared by
//! the concrete providers.

use num_complex::Complex64;

use crate::constants::PhysicalConstants;
use crate::error::{Error, Result};
use crate::fourier::spectral_gradient;
use crate::grid::Grid;
use crate::wavefield::WaveFunction;

/// Velocity evaluation refuses below this fraction of the reference peak
/// density; guidance fields are singular at nodes.
pub const NODE_THRESHOLD_REL: f64 = 1e-10;

/// Local value and spatial gradient of psi at a point.
#[derive(Debug, Clone, Copy)]
pub struct ValueGrad {
    pub value: Complex64,
    pub grad: [Complex64; 2],
    pub dims: usize,
}

impl ValueGrad {
    pub fn density(&self) -> f64 {
        self.value.norm_sqr()
    }

    /// Standard guidance velocity (hbar/m) Im(grad psi / psi), one entry
    /// per axis.
    pub fn velocity(&self, consts: &PhysicalConstants) -> [f64; 2] {
        let rho = self.value.norm_sqr();
        let scale = consts.hbar / consts.mass / rho;
        let mut v = [0.0; 2];
        for d in 0..self.dims {
            v[d] = scale * (self.grad[d] * self.value.conj()).im;
        }
        v
    }

    /// Logarithmic density gradient grad rho / rho = 2 Re(grad psi / psi).
    pub fn log_density_gradient(&self) -> [f64; 2] {
        let rho = self.value.norm_sqr();
        let mut g = [0.0; 2];
        for d in 0..self.dims {
            g[d] = 2.0 * (self.grad[d] * self.value.conj()).re / rho;
        }
        g
    }
}

/// A wavefunction history: something that can report psi and its gradient
/// at arbitrary positions and times, for trajectory integration.
pub trait WaveAt: Sync {
    fn dims(&self) -> usize;
    fn constants(&self) -> &PhysicalConstants;
    /// Time interval over which the provider is valid.
    fn time_span(&self) -> (f64, f64);
    /// Spatial domain check.
    fn contains(&self, q: &[f64]) -> bool;
    /// Peak density used for the node-proximity threshold.
    fn reference_peak_density(&self) -> f64;
    fn value_grad(&self, q: &[f64], t: f64) -> Result<ValueGrad>;
    /// Gridded snapshot at time `t`, for densities and Born sampling.
    fn reference_state(&self, t: f64) -> Result<WaveFunction>;

    fn node_threshold(&self) -> f64 {
        NODE_THRESHOLD_REL * self.reference_peak_density()
    }
}

/// Cubic Lagrange weights on four uniform nodes at offsets 0..4, evaluated
/// at fractional position `s` in node units.
pub(crate) fn lagrange4(s: f64) -> [f64; 4] {
    [
        -(s - 1.0) * (s - 2.0) * (s - 3.0) / 6.0,
        s * (s - 2.0) * (s - 3.0) / 2.0,
        -s * (s - 1.0) * (s - 3.0) / 2.0,
        s * (s - 1.0) * (s - 2.0) / 6.0,
    ]
}

/// Periodic 4-point stencil around coordinate `x`: wrapped indices plus the
/// Lagrange weights for interpolation within the central interval.
pub(crate) fn stencil(axis: &crate::grid::Axis, x: f64) -> ([usize; 4], [f64; 4]) {
    let h = axis.spacing();
    let s = (x - axis.min) / h;
    let i0 = s.floor() as isize;
    let u = s - i0 as f64;
    let n = axis.n as isize;
    let idx = [
        (i0 - 1).rem_euclid(n) as usize,
        i0.rem_euclid(n) as usize,
        (i0 + 1).rem_euclid(n) as usize,
        (i0 + 2).rem_euclid(n) as usize,
    ];
    (idx, lagrange4(u + 1.0))
}

/// Interpolate a complex grid array (and per-axis gradient arrays) to `q`.
pub(crate) fn interp_value_grad(
    grid: &Grid,
    amps: &[Complex64],
    grads: &[Vec<Complex64>],
    q: &[f64],
) -> ValueGrad {
    let dims = grid.dims();
    let mut out = ValueGrad {
        value: Complex64::ZERO,
        grad: [Complex64::ZERO; 2],
        dims,
    };
    match dims {
        1 => {
            let (idx, w) = stencil(grid.axis(0), q[0]);
            for (i, wi) in idx.iter().zip(w) {
                out.value += amps[*i] * wi;
                out.grad[0] += grads[0][*i] * wi;
            }
        }
        2 => {
            let (ix, wx) = stencil(grid.axis(0), q[0]);
            let (iy, wy) = stencil(grid.axis(1), q[1]);
            let ny = grid.axis(1).n;
            for (a, wa) in ix.iter().zip(wx) {
                for (b, wb) in iy.iter().zip(wy) {
                    let w = wa * wb;
                    let flat = a * ny + b;
                    out.value += amps[flat] * w;
                    out.grad[0] += grads[0][flat] * w;
                    out.grad[1] += grads[1][flat] * w;
                }
            }
        }
        _ => unreachable!(),
    }
    out
}

/// A time-independent state exposed as a provider: the wavefunction of a
/// stationary preparation (e.g. a harmonic ground state), or any fixed
/// snapshot treated as frozen.
pub struct StationaryState {
    psi: WaveFunction,
    consts: PhysicalConstants,
    grads: Vec<Vec<Complex64>>,
}

impl StationaryState {
    pub fn new(psi: WaveFunction, consts: PhysicalConstants) -> Self {
        let grads = (0..psi.grid().dims())
            .map(|d| spectral_gradient(psi.grid(), psi.amplitudes(), d))
            .collect();
        Self { psi, consts, grads }
    }

    pub fn state(&self) -> &WaveFunction {
        &self.psi
    }
}

impl WaveAt for StationaryState {
    fn dims(&self) -> usize {
        self.psi.grid().dims()
    }

    fn constants(&self) -> &PhysicalConstants {
        &self.consts
    }

    fn time_span(&self) -> (f64, f64) {
        (f64::NEG_INFINITY, f64::INFINITY)
    }

    fn contains(&self, q: &[f64]) -> bool {
        self.psi.grid().contains(q)
    }

    fn reference_peak_density(&self) -> f64 {
        self.psi.peak_density()
    }

    fn value_grad(&self, q: &[f64], _t: f64) -> Result<ValueGrad> {
        if !self.contains(q) {
            return Err(Error::OutOfBounds { q: q.to_vec() });
        }
        Ok(interp_value_grad(
            self.psi.grid(),
            self.psi.amplitudes(),
            &self.grads,
            q,
        ))
    }

    fn reference_state(&self, t: f64) -> Result<WaveFunction> {
        Ok(self.psi.at_time(t))
    }
}
