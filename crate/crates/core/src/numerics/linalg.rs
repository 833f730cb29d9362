use std::f64::consts::PI;
use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{invalid, Error, Result};

pub type C64 = Complex64;

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);

/// Dense complex matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct CMatrix(DMatrix<C64>);

/// Dense complex column vector.
#[derive(Clone, Debug, PartialEq)]
pub struct CVector(DVector<C64>);

impl CMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        CMatrix(DMatrix::zeros(rows, cols))
    }

    pub fn identity(n: usize) -> Self {
        CMatrix(DMatrix::identity(n, n))
    }

    pub fn from_fn(rows: usize, cols: usize, f: impl FnMut(usize, usize) -> C64) -> Self {
        CMatrix(DMatrix::from_fn(rows, cols, f))
    }

    /// Builds a matrix from row-major entries.
    pub fn from_row_major(rows: usize, cols: usize, entries: &[C64]) -> Result<Self> {
        if entries.len() != rows * cols {
            return invalid(format!(
                "expected {} entries for a {rows}x{cols} matrix, got {}",
                rows * cols,
                entries.len()
            ));
        }
        Ok(CMatrix(DMatrix::from_row_slice(rows, cols, entries)))
    }

    pub fn from_real(rows: usize, cols: usize, entries: &[f64]) -> Result<Self> {
        let c: Vec<C64> = entries.iter().map(|&x| C64::new(x, 0.0)).collect();
        Self::from_row_major(rows, cols, &c)
    }

    pub fn diag(d: &[C64]) -> Self {
        let n = d.len();
        Self::from_fn(n, n, |i, j| if i == j { d[i] } else { ZERO })
    }

    pub fn diag_real(d: &[f64]) -> Self {
        let n = d.len();
        Self::from_fn(n, n, |i, j| if i == j { C64::new(d[i], 0.0) } else { ZERO })
    }

    pub fn from_inner(m: DMatrix<C64>) -> Self {
        CMatrix(m)
    }

    pub fn inner(&self) -> &DMatrix<C64> {
        &self.0
    }

    pub fn into_inner(self) -> DMatrix<C64> {
        self.0
    }

    pub fn rows(&self) -> usize {
        self.0.nrows()
    }

    pub fn cols(&self) -> usize {
        self.0.ncols()
    }

    pub fn is_square(&self) -> bool {
        self.rows() == self.cols()
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.0[(i, j)]
    }

    pub fn set(&mut self, i: usize, j: usize, v: C64) {
        self.0[(i, j)] = v;
    }

    /// Row-major copy of the entries.
    pub fn to_row_major(&self) -> Vec<C64> {
        let mut out = Vec::with_capacity(self.rows() * self.cols());
        for i in 0..self.rows() {
            for j in 0..self.cols() {
                out.push(self.0[(i, j)]);
            }
        }
        out
    }

    pub fn adjoint(&self) -> Self {
        CMatrix(self.0.adjoint())
    }

    pub fn transpose(&self) -> Self {
        CMatrix(self.0.transpose())
    }

    pub fn scale(&self, s: C64) -> Self {
        CMatrix(&self.0 * s)
    }

    pub fn scale_real(&self, s: f64) -> Self {
        self.scale(C64::new(s, 0.0))
    }

    pub fn trace(&self) -> C64 {
        self.0.trace()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.0.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// Kronecker product `self ⊗ other`.
    pub fn kron(&self, other: &CMatrix) -> Self {
        CMatrix(self.0.kronecker(&other.0))
    }

    pub fn mul_vec(&self, v: &CVector) -> CVector {
        CVector(&self.0 * &v.0)
    }

    pub fn column(&self, j: usize) -> CVector {
        CVector(self.0.column(j).into_owned())
    }

    pub fn set_column(&mut self, j: usize, v: &CVector) {
        self.0.set_column(j, &v.0);
    }

    pub fn block(&self, r0: usize, c0: usize, nr: usize, nc: usize) -> Self {
        CMatrix(self.0.view((r0, c0), (nr, nc)).into_owned())
    }

    pub fn set_block(&mut self, r0: usize, c0: usize, b: &CMatrix) {
        self.0.view_mut((r0, c0), (b.rows(), b.cols())).copy_from(&b.0);
    }

    /// `‖U†U − I‖_F ≤ tol`.
    pub fn is_unitary(&self, tol: f64) -> bool {
        if !self.is_square() {
            return false;
        }
        let g = self.0.adjoint() * &self.0;
        let n = self.rows();
        (g - DMatrix::<C64>::identity(n, n)).iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt() <= tol
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.is_square() && (&self.0 - self.0.adjoint()).iter().all(|z| z.norm() <= tol)
    }

    /// Hermitian part `(M + M†)/2`, used to scrub rounding noise.
    pub fn hermitian_part(&self) -> Self {
        CMatrix((&self.0 + self.0.adjoint()) * C64::new(0.5, 0.0))
    }

    pub fn powi(&self, e: u64) -> Self {
        let mut result = CMatrix::identity(self.rows());
        let mut base = self.clone();
        let mut e = e;
        while e > 0 {
            if e & 1 == 1 {
                result = &result * &base;
            }
            e >>= 1;
            if e > 0 {
                base = &base * &base;
            }
        }
        result
    }

    /// Applies `f` to the eigenvalues of a hermitian matrix.
    pub fn hermitian_fn(&self, f: impl Fn(f64) -> f64) -> Result<Self> {
        let (vals, vecs) = eig_hermitian(self)?;
        let d: Vec<f64> = vals.iter().map(|&x| f(x)).collect();
        Ok(&(&vecs * &CMatrix::diag_real(&d)) * &vecs.adjoint())
    }
}

impl Mul for &CMatrix {
    type Output = CMatrix;
    fn mul(self, rhs: &CMatrix) -> CMatrix {
        CMatrix(&self.0 * &rhs.0)
    }
}

impl Add for &CMatrix {
    type Output = CMatrix;
    fn add(self, rhs: &CMatrix) -> CMatrix {
        CMatrix(&self.0 + &rhs.0)
    }
}

impl Sub for &CMatrix {
    type Output = CMatrix;
    fn sub(self, rhs: &CMatrix) -> CMatrix {
        CMatrix(&self.0 - &rhs.0)
    }
}

impl Neg for &CMatrix {
    type Output = CMatrix;
    fn neg(self) -> CMatrix {
        CMatrix(-&self.0)
    }
}

impl CVector {
    pub fn zeros(dim: usize) -> Self {
        CVector(DVector::zeros(dim))
    }

    pub fn basis(dim: usize, i: usize) -> Self {
        let mut v = DVector::zeros(dim);
        v[i] = ONE;
        CVector(v)
    }

    pub fn from_slice(entries: &[C64]) -> Self {
        CVector(DVector::from_column_slice(entries))
    }

    pub fn from_fn(dim: usize, f: impl FnMut(usize, usize) -> C64) -> Self {
        CVector(DVector::from_fn(dim, f))
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn get(&self, i: usize) -> C64 {
        self.0[i]
    }

    pub fn set(&mut self, i: usize, v: C64) {
        self.0[i] = v;
    }

    pub fn entries(&self) -> &[C64] {
        self.0.as_slice()
    }

    pub fn norm(&self) -> f64 {
        self.0.norm()
    }

    pub fn normalized(&self) -> Result<Self> {
        let n = self.norm();
        if !(n.is_finite() && n > 0.0) {
            return invalid("cannot normalize a zero or non-finite vector");
        }
        Ok(CVector(&self.0 / C64::new(n, 0.0)))
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &CVector) -> C64 {
        self.0.dotc(&other.0)
    }

    pub fn kron(&self, other: &CVector) -> Self {
        CVector(self.0.kronecker(&other.0))
    }

    pub fn scale(&self, s: C64) -> Self {
        CVector(&self.0 * s)
    }

    pub fn add(&self, other: &CVector) -> Self {
        CVector(&self.0 + &other.0)
    }

    /// `|self⟩⟨other|`.
    pub fn outer(&self, other: &CVector) -> CMatrix {
        CMatrix(&self.0 * other.0.adjoint())
    }

    pub fn projector(&self) -> CMatrix {
        self.outer(self)
    }
}

/// Thin singular value decomposition `M = U diag(s) V†` with `s` sorted
/// descending.
pub fn svd(m: &CMatrix) -> Result<(CMatrix, Vec<f64>, CMatrix)> {
    if !m.is_finite() {
        return invalid("svd: non-finite entries");
    }
    let fm = faer::Mat::<faer::c64>::from_fn(m.rows(), m.cols(), |i, j| {
        let z = m.0[(i, j)];
        faer::c64::new(z.re, z.im)
    });
    let dec = fm.thin_svd().map_err(|e| Error::Numerical(format!("svd: {e:?}")))?;
    let (u, v, s) = (dec.U(), dec.V(), dec.S().column_vector());
    let k = s.nrows();
    let conv = |z: faer::c64| C64::new(z.re, z.im);
    let us = DMatrix::from_fn(u.nrows(), k, |i, j| conv(u[(i, j)]));
    let vs = DMatrix::from_fn(v.nrows(), k, |i, j| conv(v[(i, j)]));
    let ss = (0..k).map(|i| s[i].re).collect();
    Ok((CMatrix(us), ss, CMatrix(vs)))
}

pub fn spectral_norm(m: &CMatrix) -> Result<f64> {
    if !m.is_finite() {
        return invalid("spectral_norm: non-finite entries");
    }
    if m.rows() == 0 || m.cols() == 0 {
        return Ok(0.0);
    }
    Ok(svd(m)?.1.first().copied().unwrap_or(0.0))
}

/// Eigenvalues (ascending) and orthonormal eigenvectors of a hermitian matrix.
pub fn eig_hermitian(m: &CMatrix) -> Result<(Vec<f64>, CMatrix)> {
    if !m.is_finite() {
        return invalid("eig_hermitian: non-finite entries");
    }
    if !m.is_hermitian(1e-8 * m.max_abs().max(1.0)) {
        return invalid("eig_hermitian: matrix is not hermitian");
    }
    let eig = m.hermitian_part().0.symmetric_eigen();
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let vals = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let n = m.rows();
    let vecs = DMatrix::from_fn(n, n, |i, j| eig.eigenvectors[(i, order[j])]);
    Ok((vals, CMatrix(vecs)))
}

/// Eigenphases in `[0,1)` and eigenbasis of a unitary: `U b_j = e^{2πi φ_j} b_j`.
pub fn eig_unitary(u: &CMatrix) -> Result<(Vec<f64>, CMatrix)> {
    if !u.is_finite() || !u.is_unitary(1e-8 * (u.rows().max(1) as f64).sqrt()) {
        return invalid("eig_unitary: matrix is not unitary");
    }
    let n = u.rows();
    let schur = nalgebra::linalg::Schur::try_new(u.0.clone(), 1e-15, 100_000)
        .ok_or_else(|| Error::Numerical("eig_unitary: Schur iteration did not converge".into()))?;
    let (q, t) = schur.unpack();
    let mut phases = Vec::with_capacity(n);
    for j in 0..n {
        let z = t[(j, j)];
        let mut p = z.arg() / (2.0 * PI);
        if p < 0.0 {
            p += 1.0;
        }
        if p >= 1.0 {
            p -= 1.0;
        }
        phases.push(p);
    }
    // A normal matrix has a diagonal Schur form; check the residual anyway.
    let basis = CMatrix(q);
    for (j, &p) in phases.iter().enumerate() {
        let b = basis.column(j);
        let ub = u.mul_vec(&b);
        let e = C64::from_polar(1.0, 2.0 * PI * p);
        let r = ub.add(&b.scale(-e)).norm();
        if r > 1e-8 {
            return Err(Error::Numerical(format!("eig_unitary: residual {r:e} at column {j}")));
        }
    }
    Ok((phases, basis))
}

/// Haar-random unitary from the QR decomposition of a complex Gaussian matrix.
pub fn random_unitary<R: Rng + ?Sized>(n: usize, rng: &mut R) -> CMatrix {
    let g = DMatrix::from_fn(n, n, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        C64::new(re, im) / std::f64::consts::SQRT_2
    });
    let qr = g.qr();
    let (mut q, r) = qr.unpack();
    for j in 0..n {
        let d = r[(j, j)];
        let ph = if d.norm() > 0.0 { d / d.norm() } else { ONE };
        for i in 0..n {
            q[(i, j)] *= ph;
        }
    }
    CMatrix(q)
}

fn digits(mut idx: usize, dims: &[usize], out: &mut [usize]) {
    for (o, &d) in out.iter_mut().zip(dims).rev() {
        *o = idx % d;
        idx /= d;
    }
}

fn compose_index(ds: &[usize], dims: &[usize]) -> usize {
    ds.iter().zip(dims).fold(0, |acc, (&x, &d)| acc * d + x)
}

/// Lifts `op`, acting on the tensor factors `targets` (in that order), to the
/// full space with factor dimensions `dims`.
pub fn embed(op: &CMatrix, dims: &[usize], targets: &[usize]) -> Result<CMatrix> {
    let sub: usize = targets.iter().map(|&t| dims.get(t).copied().unwrap_or(0)).product();
    if targets.iter().any(|&t| t >= dims.len()) || op.rows() != sub || op.cols() != sub {
        return invalid("embed: operator does not match the target factors");
    }
    let n: usize = dims.iter().product();
    let tdims: Vec<usize> = targets.iter().map(|&t| dims[t]).collect();
    let mut out = DMatrix::<C64>::zeros(n, n);
    let mut ds = vec![0; dims.len()];
    let mut sub_ds = vec![0; targets.len()];
    for col in 0..n {
        digits(col, dims, &mut ds);
        let sc = compose_index(&targets.iter().map(|&t| ds[t]).collect::<Vec<_>>(), &tdims);
        for sr in 0..sub {
            let v = op.0[(sr, sc)];
            if v == ZERO {
                continue;
            }
            digits(sr, &tdims, &mut sub_ds);
            let mut rd = ds.clone();
            for (&t, &x) in targets.iter().zip(&sub_ds) {
                rd[t] = x;
            }
            out[(compose_index(&rd, dims), col)] = v;
        }
    }
    Ok(CMatrix(out))
}

/// Traces out every factor not listed in `keep` (kept factors stay in their
/// original order).
pub fn partial_trace(rho: &CMatrix, dims: &[usize], keep: &[usize]) -> Result<CMatrix> {
    let n: usize = dims.iter().product();
    if rho.rows() != n || rho.cols() != n {
        return invalid("partial_trace: dimension mismatch");
    }
    let kdims: Vec<usize> = keep.iter().map(|&k| dims[k]).collect();
    let kn: usize = kdims.iter().product();
    let mut out = DMatrix::<C64>::zeros(kn, kn);
    let mut dr = vec![0; dims.len()];
    let mut dc = vec![0; dims.len()];
    for r in 0..n {
        digits(r, dims, &mut dr);
        for c in 0..n {
            let v = rho.0[(r, c)];
            if v == ZERO {
                continue;
            }
            digits(c, dims, &mut dc);
            let traced_equal =
                (0..dims.len()).filter(|i| !keep.contains(i)).all(|i| dr[i] == dc[i]);
            if traced_equal {
                let kr = compose_index(&keep.iter().map(|&k| dr[k]).collect::<Vec<_>>(), &kdims);
                let kc = compose_index(&keep.iter().map(|&k| dc[k]).collect::<Vec<_>>(), &kdims);
                out[(kr, kc)] += v;
            }
        }
    }
    Ok(CMatrix(out))
}

/// Trace norm `‖M‖₁` of a hermitian matrix.
pub fn trace_norm_hermitian(m: &CMatrix) -> Result<f64> {
    let (vals, _) = eig_hermitian(m)?;
    Ok(vals.iter().map(|v| v.abs()).sum())
}
