//! Von Neumann pointer coupling, post-selection and weak values in finite
//! dimensions.
//!
//! The weak value a_w = <f|U A|i> / <f|U|i> is computed exactly from the
//! formula; the pointer simulation (impulsive coupling, strong measurement
//! of the pointer after post-selecting the system) is the independent
//! check of its operational meaning, not its definition.

use num_complex::Complex64;

use crate::constants::PhysicalConstants;
use crate::error::{Error, Result};
use crate::fourier::AxisFft;
use crate::grid::Grid;

const HERMITICITY_TOL: f64 = 1e-12;

/// Finite-dimensional state vector.
#[derive(Debug, Clone, PartialEq)]
pub struct KetVector {
    amps: Vec<Complex64>,
}

impl KetVector {
    /// Normalize a nonzero amplitude vector.
    pub fn new(amps: Vec<Complex64>) -> Result<Self> {
        if amps.len() < 2 {
            return Err(Error::invalid("kets need dimension of at least 2"));
        }
        let norm = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if norm < 1e-12 {
            return Err(Error::ZeroVector { norm });
        }
        Ok(Self {
            amps: amps.into_iter().map(|a| a / norm).collect(),
        })
    }

    pub fn from_reals(amps: &[f64]) -> Result<Self> {
        Self::new(amps.iter().map(|&x| Complex64::new(x, 0.0)).collect())
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    /// `<self|other>`.
    pub fn inner(&self, other: &KetVector) -> Complex64 {
        self.amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }
}

/// Square complex matrix, row major.
#[derive(Debug, Clone, PartialEq)]
pub struct CMatrix {
    d: usize,
    data: Vec<Complex64>,
}

impl CMatrix {
    pub fn new(d: usize, data: Vec<Complex64>) -> Result<Self> {
        if data.len() != d * d {
            return Err(Error::invalid(format!(
                "matrix data length {} != {d}x{d}",
                data.len()
            )));
        }
        Ok(Self { d, data })
    }

    pub fn zeros(d: usize) -> Self {
        Self {
            d,
            data: vec![Complex64::ZERO; d * d],
        }
    }

    pub fn identity(d: usize) -> Self {
        let mut m = Self::zeros(d);
        for i in 0..d {
            m[(i, i)] = Complex64::ONE;
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn apply(&self, v: &[Complex64]) -> Vec<Complex64> {
        (0..self.d)
            .map(|i| (0..self.d).map(|j| self[(i, j)] * v[j]).sum())
            .collect()
    }

    pub fn max_hermiticity_deviation(&self) -> f64 {
        let mut worst = 0.0_f64;
        for i in 0..self.d {
            for j in 0..self.d {
                worst = worst.max((self[(i, j)] - self[(j, i)].conj()).norm());
            }
        }
        worst
    }
}

impl std::ops::Index<(usize, usize)> for CMatrix {
    type Output = Complex64;
    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        &self.data[i * self.d + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for CMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        &mut self.data[i * self.d + j]
    }
}

/// Hermitian observable.
#[derive(Debug, Clone, PartialEq)]
pub struct Observable {
    mat: CMatrix,
}

impl Observable {
    pub fn new(mat: CMatrix) -> Result<Self> {
        let dev = mat.max_hermiticity_deviation();
        if dev > HERMITICITY_TOL {
            return Err(Error::NotHermitian { deviation: dev });
        }
        Ok(Self { mat })
    }

    pub fn from_reals(d: usize, entries: &[f64]) -> Result<Self> {
        let data = entries.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        Self::new(CMatrix::new(d, data)?)
    }

    /// Projector |k><k| in the computational basis.
    pub fn basis_projector(d: usize, k: usize) -> Self {
        let mut m = CMatrix::zeros(d);
        m[(k, k)] = Complex64::ONE;
        Self { mat: m }
    }

    /// Pauli Z on a qubit: A|0> = |0>, A|1> = -|1>.
    pub fn pauli_z() -> Self {
        Self::from_reals(2, &[1.0, 0.0, 0.0, -1.0]).expect("hermitian")
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.mat
    }

    pub fn dim(&self) -> usize {
        self.mat.dim()
    }

    /// Eigendecomposition by cyclic complex Jacobi sweeps; returns
    /// ascending eigenvalues and the matching orthonormal eigencolumns.
    pub fn eigh(&self) -> (Vec<f64>, CMatrix) {
        let d = self.mat.dim();
        let mut a = self.mat.clone();
        let mut v = CMatrix::identity(d);
        for _sweep in 0..200 {
            let mut off = 0.0_f64;
            for p in 0..d {
                for q in (p + 1)..d {
                    off = off.max(a[(p, q)].norm());
                }
            }
            if off < 1e-14 {
                break;
            }
            for p in 0..d {
                for q in (p + 1)..d {
                    let apq = a[(p, q)];
                    if apq.norm() < 1e-300 {
                        continue;
                    }
                    let phase = apq / apq.norm();
                    let app = a[(p, p)].re;
                    let aqq = a[(q, q)].re;
                    let tau = (aqq - app) / (2.0 * apq.norm());
                    let t = if tau >= 0.0 {
                        1.0 / (tau + (1.0 + tau * tau).sqrt())
                    } else {
                        -1.0 / (-tau + (1.0 + tau * tau).sqrt())
                    };
                    let c = 1.0 / (1.0 + t * t).sqrt();
                    let s = phase * (t * c);
                    // A <- G^H A G with G mixing columns p and q.
                    for k in 0..d {
                        let akp = a[(k, p)];
                        let akq = a[(k, q)];
                        a[(k, p)] = c * akp - s.conj() * akq;
                        a[(k, q)] = s * akp + c * akq;
                    }
                    for k in 0..d {
                        let apk = a[(p, k)];
                        let aqk = a[(q, k)];
                        a[(p, k)] = c * apk - s * aqk;
                        a[(q, k)] = s.conj() * apk + c * aqk;
                    }
                    for k in 0..d {
                        let vkp = v[(k, p)];
                        let vkq = v[(k, q)];
                        v[(k, p)] = c * vkp - s.conj() * vkq;
                        v[(k, q)] = s * vkp + c * vkq;
                    }
                }
            }
        }
        let mut order: Vec<usize> = (0..d).collect();
        order.sort_by(|&i, &j| a[(i, i)].re.partial_cmp(&a[(j, j)].re).unwrap());
        let evals: Vec<f64> = order.iter().map(|&i| a[(i, i)].re).collect();
        let mut vecs = CMatrix::zeros(d);
        for (new_col, &old_col) in order.iter().enumerate() {
            for k in 0..d {
                vecs[(k, new_col)] = v[(k, old_col)];
            }
        }
        (evals, vecs)
    }
}

/// Unitary system evolution between the weak interaction and the
/// post-selection.
#[derive(Debug, Clone, PartialEq)]
pub struct Unitary {
    mat: CMatrix,
}

impl Unitary {
    pub fn new(mat: CMatrix) -> Result<Self> {
        let d = mat.dim();
        let mut worst = 0.0_f64;
        for i in 0..d {
            for j in 0..d {
                let mut acc = Complex64::ZERO;
                for k in 0..d {
                    acc += mat[(k, i)].conj() * mat[(k, j)];
                }
                let expect = if i == j { Complex64::ONE } else { Complex64::ZERO };
                worst = worst.max((acc - expect).norm());
            }
        }
        if worst > HERMITICITY_TOL {
            return Err(Error::invalid(format!(
                "matrix is not unitary: max |U^H U - I| entry = {worst:.3e}"
            )));
        }
        Ok(Self { mat })
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.mat
    }
}

/// Weak value `<f| U A |i> / <f| U |i>`; `u` defaults to the identity.
pub fn weak_value(
    psi_i: &KetVector,
    psi_f: &KetVector,
    a: &Observable,
    u: Option<&Unitary>,
) -> Result<Complex64> {
    if psi_i.dim() != psi_f.dim() || psi_i.dim() != a.dim() {
        return Err(Error::invalid("weak value dimension mismatch"));
    }
    let a_psi = a.matrix().apply(psi_i.amplitudes());
    let (num_vec, den_vec) = match u {
        Some(u) => (u.matrix().apply(&a_psi), u.matrix().apply(psi_i.amplitudes())),
        None => (a_psi, psi_i.amplitudes().to_vec()),
    };
    let inner = |v: &[Complex64]| -> Complex64 {
        psi_f
            .amplitudes()
            .iter()
            .zip(v)
            .map(|(f, x)| f.conj() * x)
            .sum()
    };
    let den = inner(&den_vec);
    if den.norm() <= 1e-12 {
        return Err(Error::OrthogonalPostselection { overlap: den.norm() });
    }
    Ok(inner(&num_vec) / den)
}

/// Gaussian pointer ready state centred at 0 with spread `sigma`.
#[derive(Debug, Clone)]
pub struct PointerState {
    grid: Grid,
    amps: Vec<Complex64>,
    sigma: f64,
}

impl PointerState {
    pub fn ready(sigma: f64, grid: Grid) -> Result<Self> {
        if grid.dims() != 1 {
            return Err(Error::invalid("pointer lives on a 1D grid"));
        }
        let dy = grid.axis(0).spacing();
        if sigma < 3.0 * dy {
            return Err(Error::WidthUnderResolved {
                sigma,
                min_sigma: 3.0 * dy,
            });
        }
        let inv = 1.0 / (4.0 * sigma * sigma);
        let mut amps: Vec<Complex64> = (0..grid.len())
            .map(|i| {
                let y = grid.point(i)[0];
                Complex64::new((-y * y * inv).exp(), 0.0)
            })
            .collect();
        let norm = crate::wavefield::grid_norm(&grid, &amps);
        for a in amps.iter_mut() {
            *a /= norm;
        }
        Ok(Self { grid, amps, sigma })
    }

    /// Ready state on an automatically sized grid: 8 sigma of headroom plus
    /// the largest coupling shift.
    pub fn ready_auto(sigma: f64, max_shift: f64) -> Result<Self> {
        if !(sigma > 0.0) {
            return Err(Error::invalid("pointer spread must be positive"));
        }
        let half_width = 8.0 * sigma + max_shift.abs();
        let target_dy = sigma / 4.0;
        let mut n = ((2.0 * half_width / target_dy).ceil() as usize).next_power_of_two();
        n = n.clamp(128, 16384);
        Self::ready(sigma, Grid::new_1d(-half_width, half_width, n)?)
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }
}

/// Entangled system-pointer state after the impulsive coupling.
#[derive(Debug, Clone)]
pub struct JointState {
    dim: usize,
    grid: Grid,
    /// d x ny, row major over the system index.
    amps: Vec<Complex64>,
    sigma: f64,
    strength: f64,
}

impl JointState {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn pointer_grid(&self) -> &Grid {
        &self.grid
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn norm(&self) -> f64 {
        let s: f64 = self.amps.iter().map(|a| a.norm_sqr()).sum();
        (s * self.grid.cell_volume()).sqrt()
    }
}

/// Impulsive von Neumann coupling `exp(-i strength A ⊗ P / hbar)`: each
/// eigencomponent of the system drags the pointer by `strength * a_i`.
/// Shifts are applied spectrally and are exact translations on the grid.
pub fn couple_pointer(
    psi: &KetVector,
    a: &Observable,
    pointer: &PointerState,
    strength: f64,
) -> Result<JointState> {
    if psi.dim() != a.dim() {
        return Err(Error::invalid("system/observable dimension mismatch"));
    }
    if !(strength > 0.0) {
        return Err(Error::invalid("coupling strength must be positive"));
    }
    let (evals, vecs) = a.eigh();
    let d = psi.dim();
    // alpha_i = <v_i | psi>
    let alphas: Vec<Complex64> = (0..d)
        .map(|i| {
            (0..d)
                .map(|s| vecs[(s, i)].conj() * psi.amplitudes()[s])
                .sum()
        })
        .collect();
    let axis = pointer.grid.axis(0);
    let half_width = (axis.max - axis.min) / 2.0;
    for (&a_i, alpha) in evals.iter().zip(&alphas) {
        if alpha.norm_sqr() < 1e-24 {
            continue;
        }
        let lump = strength * a_i;
        let required = lump.abs() + 5.0 * pointer.sigma;
        if required > half_width {
            return Err(Error::PointerGridTooNarrow {
                lump_center: lump,
                required,
                half_width,
            });
        }
    }
    // Spectral shift of the ready state for each distinct eigenvalue.
    let fft = AxisFft::new(axis.n);
    let mut spectrum = pointer.amps.clone();
    fft.run(&mut spectrum, true);
    let ks = axis.wavenumbers();
    let shifted: Vec<Vec<Complex64>> = evals
        .iter()
        .map(|&a_i| {
            let mut work: Vec<Complex64> = spectrum
                .iter()
                .zip(&ks)
                .map(|(s, &k)| s * Complex64::from_polar(1.0, -k * strength * a_i))
                .collect();
            fft.run(&mut work, false);
            work
        })
        .collect();
    let ny = axis.n;
    let mut amps = vec![Complex64::ZERO; d * ny];
    for s in 0..d {
        for i in 0..d {
            let w = vecs[(s, i)] * alphas[i];
            if w.norm_sqr() < 1e-30 {
                continue;
            }
            for y in 0..ny {
                amps[s * ny + y] += w * shifted[i][y];
            }
        }
    }
    let mut joint = JointState {
        dim: d,
        grid: pointer.grid.clone(),
        amps,
        sigma: pointer.sigma,
        strength,
    };
    let norm = joint.norm();
    if (norm - 1.0).abs() > 1e-9 {
        return Err(Error::invalid(format!(
            "joint state norm drifted to {norm}; pointer grid under-resolved"
        )));
    }
    for v in joint.amps.iter_mut() {
        *v /= norm;
    }
    Ok(joint)
}

/// Post-selected pointer wavefunction.
#[derive(Debug, Clone)]
pub struct PointerWave {
    grid: Grid,
    amps: Vec<Complex64>,
    sigma: f64,
    strength: f64,
}

impl PointerWave {
    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn strength(&self) -> f64 {
        self.strength
    }

    pub fn density(&self) -> Vec<f64> {
        self.amps.iter().map(|a| a.norm_sqr()).collect()
    }
}

/// Project the system onto `psi_f`; returns the conditional pointer state
/// and the post-selection success probability.
pub fn postselect(joint: &JointState, psi_f: &KetVector) -> Result<(PointerWave, f64)> {
    if psi_f.dim() != joint.dim {
        return Err(Error::invalid("post-selection dimension mismatch"));
    }
    let ny = joint.grid.axis(0).n;
    let mut chi = vec![Complex64::ZERO; ny];
    for s in 0..joint.dim {
        let f = psi_f.amplitudes()[s].conj();
        if f.norm_sqr() < 1e-30 {
            continue;
        }
        for y in 0..ny {
            chi[y] += f * joint.amps[s * ny + y];
        }
    }
    let prob: f64 = chi.iter().map(|a| a.norm_sqr()).sum::<f64>() * joint.grid.cell_volume();
    if prob < 1e-24 {
        return Err(Error::OrthogonalPostselection {
            overlap: prob.sqrt(),
        });
    }
    let scale = 1.0 / prob.sqrt();
    for v in chi.iter_mut() {
        *v *= scale;
    }
    Ok((
        PointerWave {
            grid: joint.grid.clone(),
            amps: chi,
            sigma: joint.sigma,
            strength: joint.strength,
        },
        prob,
    ))
}

/// First moment of the post-selected pointer density.
pub fn pointer_mean_shift(pw: &PointerWave) -> f64 {
    let dv = pw.grid.cell_volume();
    pw.amps
        .iter()
        .enumerate()
        .map(|(i, a)| pw.grid.point(i)[0] * a.norm_sqr() * dv)
        .sum()
}

/// Spectral first moment of the pointer momentum, `<p> = hbar <k>`.
pub fn pointer_momentum_mean(pw: &PointerWave, consts: &PhysicalConstants) -> f64 {
    let axis = pw.grid.axis(0);
    let fft = AxisFft::new(axis.n);
    let mut work = pw.amps.clone();
    fft.run(&mut work, true);
    let ks = axis.wavenumbers();
    let total: f64 = work.iter().map(|a| a.norm_sqr()).sum();
    let mean_k: f64 = work
        .iter()
        .zip(&ks)
        .map(|(a, &k)| a.norm_sqr() * k)
        .sum::<f64>()
        / total;
    consts.hbar * mean_k
}

/// Weak value plus the operational quantities around it.
#[derive(Debug, Clone, PartialEq)]
pub struct WeakValueReport {
    pub weak_value: Complex64,
    pub postselect_probability: f64,
    pub sigma: Option<f64>,
    pub pointer_mean_shift: Option<f64>,
}

impl WeakValueReport {
    /// The report schema used by the JSON exports.
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "a_w_re": self.weak_value.re,
            "a_w_im": self.weak_value.im,
            "p_postselect": self.postselect_probability,
            "sigma": self.sigma,
            "mean_shift": self.pointer_mean_shift,
        })
    }
}

/// The Three-Box pre/post-selected system: weak values of the box
/// projectors are (1, 1, -1).
pub fn three_box_experiment() -> Result<[WeakValueReport; 3]> {
    let s3 = 3.0_f64.sqrt();
    let psi_i = KetVector::from_reals(&[1.0 / s3, 1.0 / s3, 1.0 / s3])?;
    let psi_f = KetVector::from_reals(&[1.0 / s3, 1.0 / s3, -1.0 / s3])?;
    let prob = psi_f.inner(&psi_i).norm_sqr();
    let mut out = Vec::with_capacity(3);
    for k in 0..3 {
        let p = Observable::basis_projector(3, k);
        let wv = weak_value(&psi_i, &psi_f, &p, None)?;
        out.push(WeakValueReport {
            weak_value: wv,
            postselect_probability: prob,
            sigma: None,
            pointer_mean_shift: None,
        });
    }
    Ok([out[0].clone(), out[1].clone(), out[2].clone()])
}
