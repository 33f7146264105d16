//! Thin FFT helpers over rustfft: in-place transforms along grid axes and
//! spectral derivatives. Forward transforms are unnormalized; the inverse
//! applies 1/n so that `inverse(forward(x)) == x`.

use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::grid::Grid;

pub struct AxisFft {
    forward: std::sync::Arc<dyn rustfft::Fft<f64>>,
    inverse: std::sync::Arc<dyn rustfft::Fft<f64>>,
    n: usize,
}

impl AxisFft {
    pub fn new(n: usize) -> Self {
        let mut planner = FftPlanner::new();
        Self {
            forward: planner.plan_fft_forward(n),
            inverse: planner.plan_fft_inverse(n),
            n,
        }
    }

    /// Transform every contiguous length-n chunk of `data` in place.
    pub fn run(&self, data: &mut [Complex64], fwd: bool) {
        debug_assert_eq!(data.len() % self.n, 0);
        let fft = if fwd { &self.forward } else { &self.inverse };
        let mut scratch = vec![Complex64::ZERO; fft.get_inplace_scratch_len()];
        for chunk in data.chunks_exact_mut(self.n) {
            fft.process_with_scratch(chunk, &mut scratch);
        }
        if !fwd {
            let scale = 1.0 / self.n as f64;
            for v in data.iter_mut() {
                *v *= scale;
            }
        }
    }
}

/// FFT plans for every axis of a grid, reusable across calls.
pub struct GridFft {
    plans: Vec<AxisFft>,
    shape: Vec<usize>,
}

impl GridFft {
    pub fn new(grid: &Grid) -> Self {
        let shape: Vec<usize> = (0..grid.dims()).map(|d| grid.axis(d).n).collect();
        let plans = shape.iter().map(|&n| AxisFft::new(n)).collect();
        Self { plans, shape }
    }

    /// Transform along one axis of row-major data (axis 1 is contiguous).
    pub fn along_axis(&self, data: &mut [Complex64], axis: usize, forward: bool) {
        match (self.shape.len(), axis) {
            (1, 0) => self.plans[0].run(data, forward),
            (2, 1) => self.plans[1].run(data, forward),
            (2, 0) => {
                let (nx, ny) = (self.shape[0], self.shape[1]);
                let mut col = vec![Complex64::ZERO; nx];
                for iy in 0..ny {
                    for ix in 0..nx {
                        col[ix] = data[ix * ny + iy];
                    }
                    self.plans[0].run(&mut col, forward);
                    for ix in 0..nx {
                        data[ix * ny + iy] = col[ix];
                    }
                }
            }
            _ => panic!("axis {axis} out of range for {}D grid", self.shape.len()),
        }
    }

    /// Full-dimensional transform.
    pub fn all_axes(&self, data: &mut [Complex64], forward: bool) {
        for axis in 0..self.shape.len() {
            self.along_axis(data, axis, forward);
        }
    }
}

/// Spectral partial derivative of a periodic grid function along `axis`.
pub fn spectral_gradient(grid: &Grid, amps: &[Complex64], axis: usize) -> Vec<Complex64> {
    let fft = GridFft::new(grid);
    let mut work = amps.to_vec();
    fft.along_axis(&mut work, axis, true);
    let ks = grid.axis(axis).wavenumbers();
    match grid.dims() {
        1 => {
            for (v, &k) in work.iter_mut().zip(&ks) {
                *v *= Complex64::new(0.0, k);
            }
        }
        2 => {
            let ny = grid.axis(1).n;
            for (i, v) in work.iter_mut().enumerate() {
                let k = if axis == 0 { ks[i / ny] } else { ks[i % ny] };
                *v *= Complex64::new(0.0, k);
            }
        }
        _ => unreachable!(),
    }
    fft.along_axis(&mut work, axis, false);
    work
}
