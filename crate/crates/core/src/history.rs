//! Recorded propagation history with cubic-in-time interpolation.
//!
//! Snapshots (amplitudes plus spectral gradients) are stored on a uniform
//! time lattice; evaluation between snapshots combines a 4-point Lagrange
//! stencil in time with the cubic spatial interpolation from `provider`.

use num_complex::Complex64;

use crate::constants::PhysicalConstants;
use crate::error::{Error, Result};
use crate::fourier::spectral_gradient;
use crate::grid::Grid;
use crate::provider::{interp_value_grad, lagrange4, ValueGrad, WaveAt};
use crate::wavefield::{propagate, Potential, WaveFunction};

struct Snap {
    amps: Vec<Complex64>,
    grads: Vec<Vec<Complex64>>,
}

pub struct WaveHistory {
    grid: Grid,
    consts: PhysicalConstants,
    t0: f64,
    dt_snap: f64,
    snaps: Vec<Snap>,
    peak: f64,
}

impl WaveHistory {
    /// Propagate `psi0` for `steps` steps of size `dt`, storing a snapshot
    /// every `snap_every` steps. `steps` must be a multiple of `snap_every`
    /// and at least three intervals are required for the cubic stencil.
    pub fn record(
        psi0: &WaveFunction,
        consts: PhysicalConstants,
        potential: &Potential,
        dt: f64,
        steps: usize,
        snap_every: usize,
    ) -> Result<Self> {
        if snap_every == 0 || steps % snap_every != 0 {
            return Err(Error::invalid(format!(
                "steps ({steps}) must be a positive multiple of snap_every ({snap_every})"
            )));
        }
        let intervals = steps / snap_every;
        if intervals < 3 {
            return Err(Error::invalid(
                "history needs at least 3 snapshot intervals for cubic interpolation",
            ));
        }
        let grid = psi0.grid().clone();
        let mut snaps = Vec::with_capacity(intervals + 1);
        let mut peak = 0.0_f64;
        let mut current = psi0.clone();
        for step in 0..=intervals {
            if step > 0 {
                current = propagate(&current, &consts, potential, dt, snap_every)?;
            }
            peak = peak.max(current.peak_density());
            let grads = (0..grid.dims())
                .map(|d| spectral_gradient(&grid, current.amplitudes(), d))
                .collect();
            snaps.push(Snap {
                amps: current.amplitudes().to_vec(),
                grads,
            });
        }
        Ok(Self {
            grid,
            consts,
            t0: psi0.time(),
            dt_snap: dt * snap_every as f64,
            snaps,
            peak,
        })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn t0(&self) -> f64 {
        self.t0
    }

    pub fn t1(&self) -> f64 {
        self.t0 + self.dt_snap * (self.snaps.len() - 1) as f64
    }

    /// Time stencil: index of the first of four snapshots plus the Lagrange
    /// evaluation offset, clamped at the history ends.
    fn time_stencil(&self, t: f64) -> Result<(usize, [f64; 4])> {
        let (t0, t1) = (self.t0, self.t1());
        let eps = 1e-9 * (1.0 + self.dt_snap);
        if t < t0 - eps || t > t1 + eps {
            return Err(Error::OutsideHistory { t, t0, t1 });
        }
        let s = ((t - t0) / self.dt_snap).clamp(0.0, (self.snaps.len() - 1) as f64);
        let start = (s.floor() as usize)
            .saturating_sub(1)
            .min(self.snaps.len() - 4);
        Ok((start, lagrange4(s - start as f64)))
    }
}

impl WaveAt for WaveHistory {
    fn dims(&self) -> usize {
        self.grid.dims()
    }

    fn constants(&self) -> &PhysicalConstants {
        &self.consts
    }

    fn time_span(&self) -> (f64, f64) {
        (self.t0, self.t1())
    }

    fn contains(&self, q: &[f64]) -> bool {
        self.grid.contains(q)
    }

    fn reference_peak_density(&self) -> f64 {
        self.peak
    }

    fn value_grad(&self, q: &[f64], t: f64) -> Result<ValueGrad> {
        if !self.contains(q) {
            return Err(Error::OutOfBounds { q: q.to_vec() });
        }
        let (start, wt) = self.time_stencil(t)?;
        let mut out = ValueGrad {
            value: Complex64::ZERO,
            grad: [Complex64::ZERO; 2],
            dims: self.grid.dims(),
        };
        for (snap, w) in self.snaps[start..start + 4].iter().zip(wt) {
            if w == 0.0 {
                continue;
            }
            let local = interp_value_grad(&self.grid, &snap.amps, &snap.grads, q);
            out.value += local.value * w;
            for d in 0..out.dims {
                out.grad[d] += local.grad[d] * w;
            }
        }
        Ok(out)
    }

    fn reference_state(&self, t: f64) -> Result<WaveFunction> {
        let (start, wt) = self.time_stencil(t)?;
        let mut amps = vec![Complex64::ZERO; self.grid.len()];
        for (snap, w) in self.snaps[start..start + 4].iter().zip(wt) {
            if w == 0.0 {
                continue;
            }
            for (acc, a) in amps.iter_mut().zip(&snap.amps) {
                *acc += a * w;
            }
        }
        WaveFunction::from_amplitudes(self.grid.clone(), amps, t)
    }
}
