//! Dense complex matrices, density operators and pure states.
//!
//! Matrices are stored row-major. For composite systems the subsystem order
//! follows the Kronecker product: subsystem 0 is the most significant index.

use crate::{Error, Result};
use num_complex::Complex64;

pub type C64 = Complex64;

/// Relative eigenvalue cutoff separating support from kernel.
pub const SUPPORT_TOL: f64 = 1e-10;
/// Allowed deviation from Hermiticity, relative to the largest entry.
pub const HERMITICITY_TOL: f64 = 1e-10;
/// Allowed deviation of a density operator's trace from 1.
pub const TRACE_TOL: f64 = 1e-10;
/// Eigenvalues above -PSD_TOL count as nonnegative.
pub const PSD_TOL: f64 = 1e-10;
/// Allowed deviation of a pure state's norm from 1.
pub const UNIT_NORM_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct CMatrix {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl CMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<C64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::DimMismatch {
                expected: rows * cols,
                got: data.len(),
            });
        }
        Ok(CMatrix { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        CMatrix {
            rows,
            cols,
            data: vec![C64::new(0.0, 0.0); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = C64::new(1.0, 0.0);
        }
        m
    }

    pub fn from_fn<F: FnMut(usize, usize) -> C64>(rows: usize, cols: usize, mut f: F) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        CMatrix { rows, cols, data }
    }

    pub fn from_real_diag(diag: &[f64]) -> Self {
        let n = diag.len();
        let mut m = Self::zeros(n, n);
        for (i, &d) in diag.iter().enumerate() {
            m[(i, i)] = C64::new(d, 0.0);
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn data(&self) -> &[C64] {
        &self.data
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn matmul(&self, other: &CMatrix) -> Result<CMatrix> {
        if self.cols != other.rows {
            return Err(Error::DimMismatch {
                expected: self.cols,
                got: other.rows,
            });
        }
        let mut out = CMatrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == C64::new(0.0, 0.0) {
                    continue;
                }
                for j in 0..other.cols {
                    out[(i, j)] += a * other[(k, j)];
                }
            }
        }
        Ok(out)
    }

    pub fn add(&self, other: &CMatrix) -> Result<CMatrix> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &CMatrix) -> Result<CMatrix> {
        self.zip_with(other, |a, b| a - b)
    }

    fn zip_with<F: Fn(C64, C64) -> C64>(&self, other: &CMatrix, f: F) -> Result<CMatrix> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::DimMismatch {
                expected: self.rows * self.cols,
                got: other.rows * other.cols,
            });
        }
        let data = self
            .data
            .iter()
            .zip(other.data.iter())
            .map(|(&a, &b)| f(a, b))
            .collect();
        Ok(CMatrix {
            rows: self.rows,
            cols: self.cols,
            data,
        })
    }

    pub fn scale(&self, s: C64) -> CMatrix {
        CMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&a| a * s).collect(),
        }
    }

    pub fn scale_re(&self, s: f64) -> CMatrix {
        self.scale(C64::new(s, 0.0))
    }

    /// Conjugate transpose.
    pub fn dagger(&self) -> CMatrix {
        let mut out = CMatrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out[(j, i)] = self[(i, j)].conj();
            }
        }
        out
    }

    pub fn trace(&self) -> C64 {
        let n = self.rows.min(self.cols);
        (0..n).map(|i| self[(i, i)]).sum()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        if !self.is_square() {
            return false;
        }
        for i in 0..self.rows {
            for j in i..self.cols {
                if (self[(i, j)] - self[(j, i)].conj()).norm() > tol {
                    return false;
                }
            }
        }
        true
    }

    pub fn approx_eq(&self, other: &CMatrix, tol: f64) -> bool {
        self.rows == other.rows
            && self.cols == other.cols
            && self
                .data
                .iter()
                .zip(other.data.iter())
                .all(|(a, b)| (a - b).norm() <= tol)
    }

    /// Applies f entrywise to the real eigenvalues: f(M) = V f(Λ) V†.
    /// M must be Hermitian.
    pub fn hermitian_map<F: Fn(f64) -> f64>(&self, f: F) -> Result<CMatrix> {
        let (vals, vecs) = eig_hermitian(self)?;
        let n = self.rows;
        let mut out = CMatrix::zeros(n, n);
        for (k, &lam) in vals.iter().enumerate() {
            let flam = f(lam);
            if flam == 0.0 {
                continue;
            }
            for i in 0..n {
                for j in 0..n {
                    out[(i, j)] += vecs[(i, k)] * vecs[(j, k)].conj() * flam;
                }
            }
        }
        Ok(out)
    }
}

impl std::ops::Index<(usize, usize)> for CMatrix {
    type Output = C64;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for CMatrix {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        &mut self.data[i * self.cols + j]
    }
}

/// Kronecker product; the left factor is the most significant subsystem.
pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    let mut out = CMatrix::zeros(a.rows * b.rows, a.cols * b.cols);
    for ia in 0..a.rows {
        for ja in 0..a.cols {
            let v = a[(ia, ja)];
            if v == C64::new(0.0, 0.0) {
                continue;
            }
            for ib in 0..b.rows {
                for jb in 0..b.cols {
                    out[(ia * b.rows + ib, ja * b.cols + jb)] = v * b[(ib, jb)];
                }
            }
        }
    }
    out
}

/// Eigendecomposition of a Hermitian matrix.
///
/// Returns eigenvalues sorted in descending order and the matrix whose k-th
/// column is the k-th eigenvector. Each eigenvector is normalized so that its
/// largest-magnitude component (lowest index on ties) is real and positive.
pub fn eig_hermitian(m: &CMatrix) -> Result<(Vec<f64>, CMatrix)> {
    if !m.is_square() {
        return Err(Error::NotSquare {
            rows: m.rows,
            cols: m.cols,
        });
    }
    let scale = m.max_abs().max(1.0);
    let mut dev = 0.0f64;
    for i in 0..m.rows {
        for j in i..m.cols {
            dev = dev.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    if dev > HERMITICITY_TOL * scale {
        return Err(Error::NotHermitian { dev });
    }
    let n = m.rows;
    // Symmetrize before handing off so roundoff asymmetry cannot leak in.
    let dm = nalgebra::DMatrix::from_fn(n, n, |i, j| {
        (m[(i, j)] + m[(j, i)].conj()) * C64::new(0.5, 0.0)
    });
    let eig = nalgebra::linalg::SymmetricEigen::new(dm);

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        eig.eigenvalues[b]
            .partial_cmp(&eig.eigenvalues[a])
            .unwrap_or(std::cmp::Ordering::Equal)
    });

    let mut vals = Vec::with_capacity(n);
    let mut vecs = CMatrix::zeros(n, n);
    for (out_k, &src_k) in order.iter().enumerate() {
        vals.push(eig.eigenvalues[src_k]);
        let col = eig.eigenvectors.column(src_k);
        // Phase convention: largest-|component| entry made real positive.
        let mut best = 0usize;
        let mut best_mag = 0.0f64;
        for i in 0..n {
            let mag = col[i].norm();
            if mag > best_mag + 1e-15 {
                best_mag = mag;
                best = i;
            }
        }
        let phase = if best_mag > 0.0 {
            col[best].conj() / C64::new(best_mag, 0.0)
        } else {
            C64::new(1.0, 0.0)
        };
        for i in 0..n {
            vecs[(i, out_k)] = col[i] * phase;
        }
    }
    Ok((vals, vecs))
}

/// Operator norm (largest singular value) of a square matrix.
///
/// Computed from the spectrum of A†A, so Hermitian input costs one extra
/// multiply but needs no separate code path.
pub fn spectral_norm(m: &CMatrix) -> Result<f64> {
    if !m.is_square() {
        return Err(Error::NotSquare {
            rows: m.rows,
            cols: m.cols,
        });
    }
    let gram = m.dagger().matmul(m)?;
    let (vals, _) = eig_hermitian(&gram)?;
    Ok(vals.first().copied().unwrap_or(0.0).max(0.0).sqrt())
}

/// Projector onto the support of a Hermitian PSD matrix.
///
/// Eigenvalues at or below tol times the largest eigenvalue count as zero.
pub fn support_projector(m: &CMatrix, tol: f64) -> Result<CMatrix> {
    let (vals, vecs) = eig_hermitian(m)?;
    let n = m.rows;
    let top = vals.first().copied().unwrap_or(0.0);
    let mut proj = CMatrix::zeros(n, n);
    if top <= 0.0 {
        return Ok(proj);
    }
    let cutoff = tol * top;
    for (k, &lam) in vals.iter().enumerate() {
        if lam <= cutoff {
            continue;
        }
        for i in 0..n {
            for j in 0..n {
                proj[(i, j)] += vecs[(i, k)] * vecs[(j, k)].conj();
            }
        }
    }
    Ok(proj)
}

fn check_dims(total: usize, dims: &[usize]) -> Result<()> {
    let prod: usize = dims.iter().product();
    if dims.is_empty() || prod != total || dims.contains(&0) {
        return Err(Error::InvalidSubsystem(format!(
            "subsystem dims {:?} do not factor dimension {}",
            dims, total
        )));
    }
    Ok(())
}

fn check_keep(keep: &[usize], n_subsystems: usize) -> Result<()> {
    if keep.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidSubsystem(
            "kept subsystems must be strictly increasing".into(),
        ));
    }
    if keep.iter().any(|&k| k >= n_subsystems) {
        return Err(Error::InvalidSubsystem(format!(
            "subsystem index out of range (have {})",
            n_subsystems
        )));
    }
    Ok(())
}

/// Offsets into the flat composite index contributed by the chosen subsystems.
///
/// Entry t of the result is the flat offset obtained by writing t in the mixed
/// radix of `chosen` dims and placing each digit at its subsystem's stride.
fn subsystem_offsets(dims: &[usize], chosen: &[usize]) -> Vec<usize> {
    let n = dims.len();
    let mut strides = vec![1usize; n];
    for i in (0..n.saturating_sub(1)).rev() {
        strides[i] = strides[i + 1] * dims[i + 1];
    }
    let size: usize = chosen.iter().map(|&c| dims[c]).product();
    let mut offsets = vec![0usize; size];
    for (t, slot) in offsets.iter_mut().enumerate() {
        let mut rem = t;
        let mut off = 0usize;
        for idx in (0..chosen.len()).rev() {
            let c = chosen[idx];
            let digit = rem % dims[c];
            rem /= dims[c];
            off += digit * strides[c];
        }
        *slot = off;
    }
    offsets
}

/// Partial trace over the subsystems not listed in `keep`.
pub fn partial_trace_mat(m: &CMatrix, dims: &[usize], keep: &[usize]) -> Result<CMatrix> {
    if !m.is_square() {
        return Err(Error::NotSquare {
            rows: m.rows,
            cols: m.cols,
        });
    }
    check_dims(m.rows, dims)?;
    check_keep(keep, dims.len())?;
    let traced: Vec<usize> = (0..dims.len()).filter(|i| !keep.contains(i)).collect();
    let keep_off = subsystem_offsets(dims, keep);
    let traced_off = subsystem_offsets(dims, &traced);
    let dk = keep_off.len();
    let mut out = CMatrix::zeros(dk, dk);
    for (a, &ka) in keep_off.iter().enumerate() {
        for (b, &kb) in keep_off.iter().enumerate() {
            let mut acc = C64::new(0.0, 0.0);
            for &t in &traced_off {
                acc += m[(ka + t, kb + t)];
            }
            out[(a, b)] = acc;
        }
    }
    Ok(out)
}

#[derive(Debug, Clone)]
pub struct DensityOperator {
    mat: CMatrix,
    dims: Vec<usize>,
}

impl DensityOperator {
    /// Validates Hermiticity, unit trace and positive semidefiniteness.
    pub fn new(mat: CMatrix, dims: Vec<usize>) -> Result<Self> {
        if !mat.is_square() {
            return Err(Error::NotSquare {
                rows: mat.rows(),
                cols: mat.cols(),
            });
        }
        check_dims(mat.rows(), &dims)?;
        let scale = mat.max_abs().max(1.0);
        if !mat.is_hermitian(HERMITICITY_TOL * scale) {
            return Err(Error::InvalidDensity("not Hermitian".into()));
        }
        let tr = mat.trace();
        if (tr.re - 1.0).abs() > TRACE_TOL || tr.im.abs() > TRACE_TOL {
            return Err(Error::InvalidDensity(format!(
                "trace is {:.12e}+{:.3e}i, expected 1",
                tr.re, tr.im
            )));
        }
        let (vals, _) = eig_hermitian(&mat)?;
        if let Some(&min) = vals.last() {
            if min < -PSD_TOL {
                return Err(Error::InvalidDensity(format!(
                    "negative eigenvalue {:.3e}",
                    min
                )));
            }
        }
        Ok(DensityOperator { mat, dims })
    }

    pub fn maximally_mixed(d: usize) -> Self {
        DensityOperator {
            mat: CMatrix::identity(d).scale_re(1.0 / d as f64),
            dims: vec![d],
        }
    }

    pub fn from_pure(psi: &PureState) -> Self {
        let d = psi.dim();
        let mut mat = CMatrix::zeros(d, d);
        for i in 0..d {
            for j in 0..d {
                mat[(i, j)] = psi.amps[i] * psi.amps[j].conj();
            }
        }
        DensityOperator {
            mat,
            dims: psi.dims.clone(),
        }
    }

    pub fn from_diag(probs: &[f64], dims: Vec<usize>) -> Result<Self> {
        if probs.iter().any(|&p| p < -PSD_TOL) {
            return Err(Error::InvalidDensity("negative diagonal entry".into()));
        }
        let sum: f64 = probs.iter().sum();
        if (sum - 1.0).abs() > TRACE_TOL {
            return Err(Error::InvalidDensity(format!(
                "diagonal sums to {:.12e}, expected 1",
                sum
            )));
        }
        check_dims(probs.len(), &dims)?;
        Ok(DensityOperator {
            mat: CMatrix::from_real_diag(probs),
            dims,
        })
    }

    /// Qubit state with Bloch vector r (sin θ cos φ, sin θ sin φ, cos θ).
    pub fn from_bloch(r: f64, theta: f64, phi: f64) -> Result<Self> {
        if !(0.0..=1.0 + 1e-12).contains(&r) {
            return Err(Error::InvalidDensity(format!(
                "Bloch vector length {} outside [0, 1]",
                r
            )));
        }
        let (x, y, z) = (
            r * theta.sin() * phi.cos(),
            r * theta.sin() * phi.sin(),
            r * theta.cos(),
        );
        let mut mat = CMatrix::zeros(2, 2);
        mat[(0, 0)] = C64::new((1.0 + z) / 2.0, 0.0);
        mat[(1, 1)] = C64::new((1.0 - z) / 2.0, 0.0);
        mat[(0, 1)] = C64::new(x / 2.0, -y / 2.0);
        mat[(1, 0)] = C64::new(x / 2.0, y / 2.0);
        Ok(DensityOperator {
            mat,
            dims: vec![2],
        })
    }

    pub fn mat(&self) -> &CMatrix {
        &self.mat
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn dim(&self) -> usize {
        self.mat.rows()
    }

    pub fn tensor(&self, other: &DensityOperator) -> DensityOperator {
        let mut dims = self.dims.clone();
        dims.extend_from_slice(&other.dims);
        DensityOperator {
            mat: kron(&self.mat, &other.mat),
            dims,
        }
    }

    pub fn partial_trace(&self, keep: &[usize]) -> Result<DensityOperator> {
        let mat = partial_trace_mat(&self.mat, &self.dims, keep)?;
        let dims: Vec<usize> = keep.iter().map(|&k| self.dims[k]).collect();
        Ok(DensityOperator { mat, dims })
    }

    /// Eigenvalues in descending order.
    pub fn eigenvalues(&self) -> Vec<f64> {
        eig_hermitian(&self.mat).expect("validated Hermitian").0
    }

    pub fn rank(&self) -> usize {
        let vals = self.eigenvalues();
        let top = vals.first().copied().unwrap_or(0.0);
        if top <= 0.0 {
            return 0;
        }
        vals.iter().filter(|&&v| v > SUPPORT_TOL * top).count()
    }

    pub fn support_projector(&self) -> CMatrix {
        support_projector(&self.mat, SUPPORT_TOL).expect("validated Hermitian")
    }

    /// Spectral purification. The reference system R has dimension rank(ρ) and
    /// is the second (least significant) subsystem of the returned state.
    pub fn purify(&self) -> PureState {
        let (vals, vecs) = eig_hermitian(&self.mat).expect("validated Hermitian");
        let d = self.dim();
        let top = vals.first().copied().unwrap_or(0.0);
        let cutoff = if top > 0.0 { SUPPORT_TOL * top } else { 0.0 };
        let kept: Vec<usize> = (0..d).filter(|&k| vals[k] > cutoff).collect();
        let rank = kept.len().max(1);
        let mut amps = vec![C64::new(0.0, 0.0); d * rank];
        for (r_idx, &k) in kept.iter().enumerate() {
            let w = vals[k].sqrt();
            for x in 0..d {
                amps[x * rank + r_idx] = vecs[(x, k)] * C64::new(w, 0.0);
            }
        }
        PureState::renormalized(amps, vec![d, rank])
    }
}

#[derive(Debug, Clone)]
pub struct PureState {
    amps: Vec<C64>,
    dims: Vec<usize>,
}

impl PureState {
    pub fn new(amps: Vec<C64>, dims: Vec<usize>) -> Result<Self> {
        check_dims(amps.len(), &dims)?;
        let norm2: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
        if (norm2.sqrt() - 1.0).abs() > UNIT_NORM_TOL {
            return Err(Error::InvalidState(format!(
                "norm is {:.15}, expected 1",
                norm2.sqrt()
            )));
        }
        Ok(PureState { amps, dims })
    }

    /// Same as `new` but rescales to unit norm first. Zero vectors error.
    pub fn renormalized(mut amps: Vec<C64>, dims: Vec<usize>) -> PureState {
        let norm2: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
        assert!(norm2 > 0.0, "cannot normalize a zero vector");
        let inv = 1.0 / norm2.sqrt();
        for a in &mut amps {
            *a *= inv;
        }
        PureState { amps, dims }
    }

    pub fn basis_state(index: usize, dims: Vec<usize>) -> Result<Self> {
        let d: usize = dims.iter().product();
        if index >= d {
            return Err(Error::InvalidState(format!(
                "basis index {} out of range for dimension {}",
                index, d
            )));
        }
        let mut amps = vec![C64::new(0.0, 0.0); d];
        amps[index] = C64::new(1.0, 0.0);
        PureState::new(amps, dims)
    }

    pub fn amps(&self) -> &[C64] {
        &self.amps
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn to_density(&self) -> DensityOperator {
        DensityOperator::from_pure(self)
    }

    /// Reduced density operator on the kept subsystems.
    pub fn marginal(&self, keep: &[usize]) -> Result<DensityOperator> {
        check_keep(keep, self.dims.len())?;
        let traced: Vec<usize> = (0..self.dims.len()).filter(|i| !keep.contains(i)).collect();
        let keep_off = subsystem_offsets(&self.dims, keep);
        let traced_off = subsystem_offsets(&self.dims, &traced);
        let dk = keep_off.len();
        let mut mat = CMatrix::zeros(dk, dk);
        for (a, &ka) in keep_off.iter().enumerate() {
            for (b, &kb) in keep_off.iter().enumerate() {
                let mut acc = C64::new(0.0, 0.0);
                for &t in &traced_off {
                    acc += self.amps[ka + t] * self.amps[kb + t].conj();
                }
                mat[(a, b)] = acc;
            }
        }
        let dims: Vec<usize> = keep.iter().map(|&k| self.dims[k]).collect();
        Ok(DensityOperator { mat, dims })
    }
}
