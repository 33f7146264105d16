//! Python bindings for the core types and operations: grids and
//! wavefunctions, guidance velocities and trajectories, Born sampling and
//! the KS test, weak values and the qubit pointer simulation.

use num_complex::Complex64;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyDict;

use pilotwave::analytic::AnalyticFreeState;
use pilotwave::constants::PhysicalConstants;
use pilotwave::ensemble::born_sample;
use pilotwave::guidance::{integrate_trajectory, GuidanceLaw};
use pilotwave::provider::StationaryState;
use pilotwave::stats::ks_two_sample;
use pilotwave::weakvalue::{
    couple_pointer, pointer_mean_shift, postselect, three_box_experiment, weak_value as wv,
    CMatrix, KetVector, Observable, PointerState,
};
use pilotwave::wavefield;

fn err(e: pilotwave::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

/// Uniform 1D grid.
#[pyclass(frozen, name = "Grid", skip_from_py_object)]
#[derive(Clone)]
struct PyGrid {
    inner: pilotwave::Grid,
}

#[pymethods]
impl PyGrid {
    #[new]
    fn new(min: f64, max: f64, points: usize) -> PyResult<Self> {
        Ok(Self {
            inner: pilotwave::Grid::new_1d(min, max, points).map_err(err)?,
        })
    }

    fn coords(&self) -> Vec<f64> {
        self.inner.axis(0).coords()
    }

    fn spacing(&self) -> f64 {
        self.inner.axis(0).spacing()
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    fn __repr__(&self) -> String {
        let a = self.inner.axis(0);
        format!("Grid(min={}, max={}, points={})", a.min, a.max, a.n)
    }
}

/// Complex wavefunction on a 1D grid.
#[pyclass(name = "WaveFunction", skip_from_py_object)]
#[derive(Clone)]
struct PyWaveFunction {
    inner: wavefield::WaveFunction,
}

#[pymethods]
impl PyWaveFunction {
    /// Normalized Gaussian packet exp(-(x-center)^2/(4 sigma^2)) e^{ikx}.
    #[staticmethod]
    fn gaussian(grid: &PyGrid, center: f64, sigma: f64, k: f64) -> PyResult<Self> {
        Ok(Self {
            inner: wavefield::gaussian_packet(&grid.inner, &[center], sigma, &[k]).map_err(err)?,
        })
    }

    /// Normalized ca * self + cb * other.
    fn superpose(&self, other: &PyWaveFunction, ca: Complex64, cb: Complex64) -> PyResult<Self> {
        Ok(Self {
            inner: wavefield::superpose(&self.inner, &other.inner, ca, cb).map_err(err)?,
        })
    }

    /// Split-step evolution under the free Hamiltonian.
    fn propagate_free(&self, dt: f64, steps: usize) -> PyResult<Self> {
        let consts = PhysicalConstants::default();
        Ok(Self {
            inner: wavefield::propagate(&self.inner, &consts, &wavefield::Potential::Free, dt, steps)
                .map_err(err)?,
        })
    }

    /// Split-step evolution in a harmonic trap of frequency omega.
    fn propagate_harmonic(&self, omega: f64, dt: f64, steps: usize) -> PyResult<Self> {
        let consts = PhysicalConstants::default();
        Ok(Self {
            inner: wavefield::propagate(
                &self.inner,
                &consts,
                &wavefield::Potential::Harmonic { omega },
                dt,
                steps,
            )
            .map_err(err)?,
        })
    }

    fn density(&self) -> Vec<f64> {
        self.inner.density()
    }

    fn amplitudes(&self) -> Vec<Complex64> {
        self.inner.amplitudes().to_vec()
    }

    fn norm(&self) -> f64 {
        self.inner.norm()
    }

    fn time(&self) -> f64 {
        self.inner.time()
    }

    fn mean_position(&self) -> f64 {
        self.inner.mean_position()[0]
    }

    fn position_variance(&self) -> f64 {
        self.inner.position_variance()[0]
    }

    fn momentum_mean(&self) -> f64 {
        self.inner.momentum_mean(&PhysicalConstants::default())[0]
    }

    /// Standard guidance velocity (hbar/m) Im(grad psi / psi) at x.
    fn velocity(&self, x: f64) -> PyResult<f64> {
        let prov = StationaryState::new(self.inner.clone(), PhysicalConstants::default());
        let v = pilotwave::guidance::standard_velocity(&prov, &[x], self.inner.time())
            .map_err(err)?;
        Ok(v[0])
    }

    /// Draw n Born-distributed positions, deterministic per seed.
    fn born_sample(&self, n: usize, seed: u64) -> PyResult<Vec<f64>> {
        let e = born_sample(&self.inner, n, seed).map_err(err)?;
        Ok(e.axis(0))
    }

    fn __repr__(&self) -> String {
        format!(
            "WaveFunction(points={}, t={})",
            self.inner.grid().len(),
            self.inner.time()
        )
    }
}

/// Bohmian trajectory through the freely evolving double-slit state:
/// two Gaussian lumps `separation` apart with width `sigma`. Returns
/// (times, positions).
#[pyfunction]
fn double_slit_trajectory(
    separation: f64,
    sigma: f64,
    x0: f64,
    t1: f64,
    dt: f64,
) -> PyResult<(Vec<f64>, Vec<f64>)> {
    let consts = PhysicalConstants::default();
    let grid = pilotwave::Grid::new_1d(-20.0, 20.0, 512).map_err(err)?;
    let state = AnalyticFreeState::double_slit_1d(separation, sigma, consts, grid).map_err(err)?;
    let traj = integrate_trajectory(&state, &GuidanceLaw::Standard, &[x0], 0.0, t1, dt, None)
        .map_err(err)?;
    let xs = traj.positions.iter().map(|q| q[0]).collect();
    Ok((traj.times, xs))
}

/// Two-sample Kolmogorov-Smirnov test; returns a dict with statistic,
/// p_value, n, m.
#[pyfunction]
fn ks_test<'py>(py: Python<'py>, xs: Vec<f64>, ys: Vec<f64>) -> PyResult<Bound<'py, PyDict>> {
    let rep = ks_two_sample(&xs, &ys).map_err(err)?;
    let d = PyDict::new(py);
    d.set_item("statistic", rep.statistic)?;
    d.set_item("p_value", rep.p_value)?;
    d.set_item("n", rep.n)?;
    d.set_item("m", rep.m)?;
    Ok(d)
}

/// Weak value <psi_f| A |psi_i> / <psi_f | psi_i> for a Hermitian matrix A
/// given as a flat row-major list.
#[pyfunction]
fn weak_value(
    psi_i: Vec<Complex64>,
    psi_f: Vec<Complex64>,
    matrix: Vec<Complex64>,
) -> PyResult<Complex64> {
    let d = psi_i.len();
    let a = Observable::new(CMatrix::new(d, matrix).map_err(err)?).map_err(err)?;
    let ki = KetVector::new(psi_i).map_err(err)?;
    let kf = KetVector::new(psi_f).map_err(err)?;
    wv(&ki, &kf, &a, None).map_err(err)
}

/// The three-box projector weak values, as a list of dicts.
#[pyfunction]
fn three_box(py: Python<'_>) -> PyResult<Vec<Bound<'_, PyDict>>> {
    let reports = three_box_experiment().map_err(err)?;
    let labels = ["P_A", "P_B", "P_C"];
    reports
        .iter()
        .zip(labels)
        .map(|(r, l)| {
            let d = PyDict::new(py);
            d.set_item("projector", l)?;
            d.set_item("a_w_re", r.weak_value.re)?;
            d.set_item("a_w_im", r.weak_value.im)?;
            d.set_item("p_postselect", r.postselect_probability)?;
            Ok(d)
        })
        .collect()
}

/// Simulate the weak qubit measurement: couple a pointer of spread sigma to
/// Z on alpha|0> + beta|1>, post-select |+>, and return (pointer mean,
/// post-selection probability).
#[pyfunction]
fn qubit_pointer_mean(alpha: f64, beta: f64, sigma: f64) -> PyResult<(f64, f64)> {
    let psi = KetVector::from_reals(&[alpha, beta]).map_err(err)?;
    let plus = KetVector::from_reals(&[1.0, 1.0]).map_err(err)?;
    let pointer = PointerState::ready_auto(sigma, 1.0).map_err(err)?;
    let joint = couple_pointer(&psi, &Observable::pauli_z(), &pointer, 1.0).map_err(err)?;
    let (pw, prob) = postselect(&joint, &plus).map_err(err)?;
    Ok((pointer_mean_shift(&pw), prob))
}

#[pymodule]
fn pilotwave_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyGrid>()?;
    m.add_class::<PyWaveFunction>()?;
    m.add_function(wrap_pyfunction!(double_slit_trajectory, m)?)?;
    m.add_function(wrap_pyfunction!(ks_test, m)?)?;
    m.add_function(wrap_pyfunction!(weak_value, m)?)?;
    m.add_function(wrap_pyfunction!(three_box, m)?)?;
    m.add_function(wrap_pyfunction!(qubit_pointer_mean, m)?)?;
    Ok(())
}
