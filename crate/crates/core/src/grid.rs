//! Uniform 1D/2D grids with periodic (FFT) conventions.
//!
//! Points on an axis sit at `min + i * dx` for `i in 0..n` with
//! `dx = (max - min) / n`; the right endpoint is the periodic image of the
//! left one.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Axis {
    pub min: f64,
    pub max: f64,
    pub n: usize,
}

impl Axis {
    pub fn new(min: f64, max: f64, n: usize) -> Result<Self> {
        if !(min < max) || !min.is_finite() || !max.is_finite() {
            return Err(Error::BadAxis { axis: 0, min, max });
        }
        if n < 8 {
            return Err(Error::TooFewPoints { axis: 0, points: n });
        }
        Ok(Self { min, max, n })
    }

    pub fn spacing(&self) -> f64 {
        (self.max - self.min) / self.n as f64
    }

    pub fn coord(&self, i: usize) -> f64 {
        self.min + i as f64 * self.spacing()
    }

    pub fn coords(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.coord(i)).collect()
    }

    pub fn contains(&self, x: f64) -> bool {
        x >= self.min && x <= self.max
    }

    /// Index of the grid point nearest to `x` (periodic wrap at the ends).
    pub fn nearest_index(&self, x: f64) -> usize {
        let i = ((x - self.min) / self.spacing()).round() as isize;
        i.rem_euclid(self.n as isize) as usize
    }

    /// Angular wavenumbers in FFT layout: `k_j = 2 pi j / L` with
    /// `j = 0, 1, ..., n/2, -(n/2 - 1), ..., -1`.
    pub fn wavenumbers(&self) -> Vec<f64> {
        let length = self.max - self.min;
        let n = self.n as isize;
        (0..n)
            .map(|j| {
                let j = if j <= n / 2 { j } else { j - n };
                2.0 * std::f64::consts::PI * j as f64 / length
            })
            .collect()
    }

    /// Largest resolvable wavenumber (Nyquist), `pi / dx`.
    pub fn nyquist(&self) -> f64 {
        std::f64::consts::PI / self.spacing()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    axes: Vec<Axis>,
}

impl Grid {
    pub fn new_1d(min: f64, max: f64, n: usize) -> Result<Self> {
        Ok(Self {
            axes: vec![Axis::new(min, max, n)?],
        })
    }

    pub fn new_2d(x: (f64, f64, usize), y: (f64, f64, usize)) -> Result<Self> {
        let ax = Axis::new(x.0, x.1, x.2).map_err(|e| tag_axis(e, 0))?;
        let ay = Axis::new(y.0, y.1, y.2).map_err(|e| tag_axis(e, 1))?;
        Ok(Self { axes: vec![ax, ay] })
    }

    pub fn dims(&self) -> usize {
        self.axes.len()
    }

    pub fn axis(&self, d: usize) -> &Axis {
        &self.axes[d]
    }

    /// Total number of grid points.
    pub fn len(&self) -> usize {
        self.axes.iter().map(|a| a.n).product()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Volume element dx (1D) or dx * dy (2D).
    pub fn cell_volume(&self) -> f64 {
        self.axes.iter().map(|a| a.spacing()).product()
    }

    pub fn min_spacing(&self) -> f64 {
        self.axes
            .iter()
            .map(|a| a.spacing())
            .fold(f64::INFINITY, f64::min)
    }

    pub fn contains(&self, q: &[f64]) -> bool {
        q.len() == self.dims() && self.axes.iter().zip(q).all(|(a, &x)| a.contains(x))
    }

    /// Flat index with the second axis contiguous (row-major over axis 0).
    pub fn flat_index(&self, idx: &[usize]) -> usize {
        match self.dims() {
            1 => idx[0],
            2 => idx[0] * self.axes[1].n + idx[1],
            _ => unreachable!("grids are 1D or 2D"),
        }
    }

    /// Coordinates of the flat index `i`.
    pub fn point(&self, i: usize) -> Vec<f64> {
        match self.dims() {
            1 => vec![self.axes[0].coord(i)],
            2 => {
                let ny = self.axes[1].n;
                vec![self.axes[0].coord(i / ny), self.axes[1].coord(i % ny)]
            }
            _ => unreachable!(),
        }
    }

    /// Largest kinetic eigenvalue on the grid, `sum_d nyquist_d^2`.
    pub fn max_ksq(&self) -> f64 {
        self.axes.iter().map(|a| a.nyquist().powi(2)).sum()
    }
}

fn tag_axis(e: Error, axis: usize) -> Error {
    match e {
        Error::BadAxis { min, max, .. } => Error::BadAxis { axis, min, max },
        Error::TooFewPoints { points, .. } => Error::TooFewPoints { axis, points },
        other => other,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spacing_is_extent_over_points() {
        let g = Grid::new_1d(-20.0, 20.0, 1024).unwrap();
        assert!((g.axis(0).spacing() - 40.0 / 1024.0).abs() < 1e-15);
        assert_eq!(g.len(), 1024);
    }

    #[test]
    fn rejects_degenerate_axes() {
        assert!(Grid::new_1d(1.0, 1.0, 64).is_err());
        assert!(Grid::new_1d(0.0, 1.0, 4).is_err());
        assert!(Grid::new_2d((0.0, 1.0, 64), (3.0, 2.0, 64)).is_err());
    }

    #[test]
    fn wavenumbers_fft_layout() {
        let a = Axis::new(0.0, 8.0, 8).unwrap();
        let k = a.wavenumbers();
        let base = 2.0 * std::f64::consts::PI / 8.0;
        assert!((k[0] - 0.0).abs() < 1e-15);
        assert!((k[1] - base).abs() < 1e-15);
        assert!((k[4] - 4.0 * base).abs() < 1e-15);
        assert!((k[7] + base).abs() < 1e-15);
    }

    #[test]
    fn flat_index_row_major() {
        let g = Grid::new_2d((0.0, 1.0, 16), (0.0, 1.0, 8)).unwrap();
        assert_eq!(g.flat_index(&[2, 3]), 2 * 8 + 3);
        let p = g.point(2 * 8 + 3);
        assert!((p[0] - g.axis(0).coord(2)).abs() < 1e-15);
        assert!((p[1] - g.axis(1).coord(3)).abs() < 1e-15);
    }

    #[test]
    fn nearest_index_wraps() {
        let a = Axis::new(-1.0, 1.0, 8).unwrap();
        assert_eq!(a.nearest_index(-1.0), 0);
        assert_eq!(a.nearest_index(0.99), 0); // wraps to periodic image
        assert_eq!(a.nearest_index(0.5), 6);
    }
}
