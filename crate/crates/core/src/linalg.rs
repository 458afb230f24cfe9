//! Dense complex linear-algebra helpers shared by every module.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

pub type C64 = Complex64;
pub type CMat = DMatrix<C64>;
pub type CVec = DVector<C64>;

/// Default residual tolerance used across the crate.
pub const TOL: f64 = 1e-10;
/// Relative cutoff for numerical rank decisions.
pub const RANK_TOL: f64 = 1e-9;

#[inline]
pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

#[inline]
pub fn cr(re: f64) -> C64 {
    C64::new(re, 0.0)
}

pub fn identity(n: usize) -> CMat {
    CMat::identity(n, n)
}

/// Matrix unit E_ij of size n.
pub fn matrix_unit(n: usize, i: usize, j: usize) -> CMat {
    let mut m = CMat::zeros(n, n);
    m[(i, j)] = cr(1.0);
    m
}

pub fn diag(v: &[C64]) -> CMat {
    CMat::from_diagonal(&CVec::from_column_slice(v))
}

/// Outer product x_{a,b} = a b†.
pub fn outer(a: &CVec, b: &CVec) -> CMat {
    a * b.adjoint()
}

pub fn kron(a: &CMat, b: &CMat) -> CMat {
    a.kronecker(b)
}

/// Largest singular value.
pub fn spectral_norm(m: &CMat) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    let sv = m.clone().singular_values();
    sv.iter().cloned().fold(0.0, f64::max)
}

pub fn frobenius_norm(m: &CMat) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Singular values sorted in descending order.
pub fn singular_values(m: &CMat) -> Vec<f64> {
    if m.is_empty() {
        return Vec::new();
    }
    let mut sv: Vec<f64> = m.clone().singular_values().iter().cloned().collect();
    sv.sort_by(|a, b| b.partial_cmp(a).unwrap());
    sv
}

/// Number of singular values above `rel_tol` times the largest one.
pub fn numerical_rank(m: &CMat, rel_tol: f64) -> usize {
    rank_from_values(&singular_values(m), rel_tol)
}

pub fn rank_from_values(sorted_desc: &[f64], rel_tol: f64) -> usize {
    match sorted_desc.first() {
        None => 0,
        Some(&top) if top <= f64::MIN_POSITIVE => 0,
        Some(&top) => sorted_desc.iter().filter(|&&s| s > rel_tol * top).count(),
    }
}

pub fn hermitian_part(m: &CMat) -> CMat {
    (m + m.adjoint()) * cr(0.5)
}

pub fn is_hermitian(m: &CMat, tol: f64) -> bool {
    m.is_square() && spectral_norm(&(m - m.adjoint())) <= tol
}

/// Eigen-decomposition of the Hermitian part of `m`, eigenvalues in descending
/// order with matching eigenvector columns.
pub fn hermitian_eigen(m: &CMat) -> (Vec<f64>, CMat) {
    let n = m.nrows();
    if n == 0 {
        return (Vec::new(), CMat::zeros(0, 0));
    }
    let eig = hermitian_part(m).symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].partial_cmp(&eig.eigenvalues[a]).unwrap());
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut vectors = CMat::zeros(n, n);
    for (k, &i) in order.iter().enumerate() {
        vectors.set_column(k, &eig.eigenvectors.column(i));
    }
    (values, vectors)
}

pub fn min_eigenvalue(m: &CMat) -> f64 {
    hermitian_eigen(m).0.last().cloned().unwrap_or(0.0)
}

/// Orthonormal basis of the null space of `m`: right singular vectors whose
/// singular value is at most `abs_tol`.
pub fn null_space(m: &CMat, abs_tol: f64) -> Vec<CVec> {
    let cols = m.ncols();
    if cols == 0 {
        return Vec::new();
    }
    let padded;
    let work = if m.nrows() < cols {
        padded = {
            let mut p = CMat::zeros(cols, cols);
            p.view_mut((0, 0), (m.nrows(), cols)).copy_from(m);
            p
        };
        &padded
    } else {
        m
    };
    let svd = work.clone().svd(false, true);
    let v_t = svd.v_t.expect("right singular vectors requested");
    svd.singular_values
        .iter()
        .enumerate()
        .filter(|(_, &s)| s <= abs_tol)
        .map(|(k, _)| v_t.row(k).adjoint())
        .collect()
}

/// Column-stacking vectorization.
pub fn vec_of(m: &CMat) -> CVec {
    CVec::from_column_slice(m.as_slice())
}

pub fn unvec(v: &CVec, rows: usize, cols: usize) -> CMat {
    CMat::from_column_slice(rows, cols, v.as_slice())
}

/// Trace inner product tr(a† b).
pub fn hs_inner(a: &CMat, b: &CMat) -> C64 {
    a.iter().zip(b.iter()).map(|(x, y)| x.conj() * y).sum()
}

/// Incrementally built orthonormal basis of a complex vector space.
#[derive(Debug, Clone, Default)]
pub struct OrthoBasis {
    pub vectors: Vec<CVec>,
}

impl OrthoBasis {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn dim(&self) -> usize {
        self.vectors.len()
    }

    /// Component of `v` orthogonal to the current span.
    pub fn residual(&self, v: &CVec) -> CVec {
        let mut r = v.clone();
        // two passes of modified Gram-Schmidt
        for _ in 0..2 {
            for b in &self.vectors {
                let coef = b.dotc(&r);
                r -= b * coef;
            }
        }
        r
    }

    /// Adds `v` when its orthogonal residual exceeds `tol` (relative to `‖v‖`).
    pub fn try_add(&mut self, v: &CVec, tol: f64) -> bool {
        let scale = v.norm();
        if scale <= f64::MIN_POSITIVE {
            return false;
        }
        let r = self.residual(v);
        let rn = r.norm();
        if rn > tol * scale.max(1.0) {
            self.vectors.push(r / cr(rn));
            true
        } else {
            false
        }
    }

    pub fn project(&self, v: &CVec) -> CVec {
        v - self.residual(v)
    }
}

/// Hermitian-aware matrix logarithm in base 2, with eigenvalues clipped from
/// below at `floor`.
pub fn log2_psd(m: &CMat, floor: f64) -> CMat {
    let (vals, vecs) = hermitian_eigen(m);
    let logs: Vec<C64> = vals.iter().map(|&l| cr(l.max(floor).log2())).collect();
    &vecs * diag(&logs) * vecs.adjoint()
}

/// Solves for the max absolute entry difference.
pub fn max_abs_diff(a: &CMat, b: &CMat) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}
