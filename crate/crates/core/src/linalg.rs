//! Dense complex matrix helpers on top of `faer`.

use faer::linalg::solvers::DenseSolveCore;
use faer::{Mat, Side};

use crate::error::{LrError, Result};

pub use faer::c64;

/// Dense complex matrix used throughout the crate.
pub type CMat = Mat<c64>;

pub fn zeros(n: usize) -> CMat {
    Mat::zeros(n, n)
}

pub fn identity(n: usize) -> CMat {
    Mat::identity(n, n)
}

/// Builds a matrix from real row-major entries.
pub fn from_real_rows(rows: &[&[f64]]) -> CMat {
    let n = rows.len();
    let m = rows.first().map_or(0, |r| r.len());
    Mat::from_fn(n, m, |i, j| c64::new(rows[i][j], 0.0))
}

pub fn from_diag(d: &[f64]) -> CMat {
    let n = d.len();
    Mat::from_fn(n, n, |i, j| if i == j { c64::new(d[i], 0.0) } else { c64::new(0.0, 0.0) })
}

pub fn dagger(a: &CMat) -> CMat {
    a.adjoint().to_owned()
}

pub fn scale(a: &CMat, k: c64) -> CMat {
    Mat::from_fn(a.nrows(), a.ncols(), |i, j| a[(i, j)] * k)
}

pub fn scale_re(a: &CMat, k: f64) -> CMat {
    Mat::from_fn(a.nrows(), a.ncols(), |i, j| a[(i, j)] * k)
}

/// `a += k * b`, in place.
pub fn axpy(a: &mut CMat, k: c64, b: &CMat) {
    debug_assert_eq!(a.nrows(), b.nrows());
    for j in 0..a.ncols() {
        for i in 0..a.nrows() {
            a[(i, j)] += k * b[(i, j)];
        }
    }
}

pub fn commutator(a: &CMat, b: &CMat) -> CMat {
    a * b - b * a
}

pub fn kron(a: &CMat, b: &CMat) -> CMat {
    a.kron(b)
}

/// Largest absolute entry.
pub fn max_abs(a: &CMat) -> f64 {
    let mut m = 0.0f64;
    for j in 0..a.ncols() {
        for i in 0..a.nrows() {
            let v = a[(i, j)].norm();
            if v.is_nan() {
                return f64::NAN;
            }
            m = m.max(v);
        }
    }
    m
}

pub fn max_abs_diff(a: &CMat, b: &CMat) -> f64 {
    max_abs(&(a - b))
}

pub fn frobenius(a: &CMat) -> f64 {
    a.norm_l2()
}

pub fn is_finite(a: &CMat) -> bool {
    (0..a.ncols()).all(|j| (0..a.nrows()).all(|i| a[(i, j)].re.is_finite() && a[(i, j)].im.is_finite()))
}

/// Max-entry size of `a - a^dagger`.
pub fn hermiticity_defect(a: &CMat) -> f64 {
    let n = a.nrows();
    let mut m = 0.0f64;
    for j in 0..n {
        for i in 0..=j {
            m = m.max((a[(i, j)] - a[(j, i)].conj()).norm());
        }
    }
    m
}

fn anti_hermiticity_defect(a: &CMat) -> f64 {
    let n = a.nrows();
    let mut m = 0.0f64;
    for j in 0..n {
        for i in 0..=j {
            m = m.max((a[(i, j)] + a[(j, i)].conj()).norm());
        }
    }
    m
}

/// Returns `(a + a^dagger) / 2`.
pub fn hermitian_part(a: &CMat) -> CMat {
    Mat::from_fn(a.nrows(), a.ncols(), |i, j| (a[(i, j)] + a[(j, i)].conj()) * 0.5)
}

/// Operator (spectral) norm.
///
/// Self-adjoint and anti-self-adjoint inputs go through the Hermitian
/// eigenvalue solver; everything else through singular values.
pub fn spectral_norm(a: &CMat) -> Result<f64> {
    if a.nrows() == 0 || a.ncols() == 0 {
        return Ok(0.0);
    }
    if !is_finite(a) {
        return Err(LrError::NonFinite);
    }
    let scale = max_abs(a);
    if scale == 0.0 {
        return Ok(0.0);
    }
    if a.nrows() == a.ncols() {
        let tol = 1e-14 * scale;
        if hermiticity_defect(a) <= tol {
            let h = hermitian_part(a);
            return max_abs_eigenvalue(&h);
        }
        if anti_hermiticity_defect(a) <= tol {
            let h = Mat::from_fn(a.nrows(), a.ncols(), |i, j| {
                (a[(i, j)] - a[(j, i)].conj()) * c64::new(0.0, -0.5)
            });
            return max_abs_eigenvalue(&h);
        }
    }
    let sv = a.singular_values().map_err(|_| LrError::Eigen)?;
    Ok(sv.into_iter().fold(0.0, f64::max))
}

fn max_abs_eigenvalue(h: &CMat) -> Result<f64> {
    let ev = h.self_adjoint_eigenvalues(Side::Lower).map_err(|_| LrError::Eigen)?;
    Ok(ev.into_iter().fold(0.0, |m, v| m.max(v.abs())))
}

/// Eigendecomposition of a self-adjoint matrix, eigenvalues ascending.
#[derive(Clone, Debug)]
pub struct Eigh {
    pub values: Vec<f64>,
    pub vectors: CMat,
}

pub fn eigh(h: &CMat) -> Result<Eigh> {
    if !is_finite(h) {
        return Err(LrError::NonFinite);
    }
    let evd = h.self_adjoint_eigen(Side::Lower).map_err(|_| LrError::Eigen)?;
    let s = evd.S().column_vector();
    let values = (0..h.nrows()).map(|i| s[i].re).collect();
    Ok(Eigh { values, vectors: evd.U().to_owned() })
}

pub fn eigenvalues_hermitian(h: &CMat) -> Result<Vec<f64>> {
    if !is_finite(h) {
        return Err(LrError::NonFinite);
    }
    h.self_adjoint_eigenvalues(Side::Lower).map_err(|_| LrError::Eigen)
}

impl Eigh {
    /// `V diag(f(lambda)) V^dagger`.
    pub fn apply_fn(&self, f: impl Fn(f64) -> c64) -> CMat {
        let v = &self.vectors;
        let n = v.nrows();
        let phases: Vec<c64> = self.values.iter().map(|&l| f(l)).collect();
        let vd = Mat::from_fn(n, n, |i, k| v[(i, k)] * phases[k]);
        &vd * v.adjoint()
    }

    /// `exp(-i t H)`.
    pub fn propagator(&self, t: f64) -> CMat {
        self.apply_fn(|l| c64::cis(-l * t))
    }
}

fn one_norm(a: &CMat) -> f64 {
    (0..a.ncols())
        .map(|j| (0..a.nrows()).map(|i| a[(i, j)].norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Matrix exponential by scaling and squaring of a truncated Taylor series.
pub fn expm(a: &CMat) -> Result<CMat> {
    if !is_finite(a) {
        return Err(LrError::NonFinite);
    }
    let n = a.nrows();
    let norm = one_norm(a);
    let mut s = 0u32;
    if norm > 0.5 {
        s = (norm / 0.5).log2().ceil() as u32;
    }
    let scaled = scale_re(a, 0.5f64.powi(s as i32));
    let mut result = identity(n);
    let mut term = identity(n);
    for k in 1..=60 {
        term = scale_re(&(&term * &scaled), 1.0 / k as f64);
        result += &term;
        if one_norm(&term) <= 1e-18 * one_norm(&result) {
            break;
        }
    }
    for _ in 0..s {
        result = &result * &result;
    }
    Ok(result)
}

/// Inverse via LU with partial pivoting; fails on (numerically) singular input.
pub fn inverse(a: &CMat) -> Result<CMat> {
    if !is_finite(a) {
        return Err(LrError::NonFinite);
    }
    let n = a.nrows();
    if max_abs(a) == 0.0 {
        return Err(LrError::Singular);
    }
    let inv = a.partial_piv_lu().inverse();
    if !is_finite(&inv) {
        return Err(LrError::Singular);
    }
    let resid = max_abs(&(a * &inv - identity(n)));
    if !(resid <= 1e-8) {
        return Err(LrError::Singular);
    }
    Ok(inv)
}

/// Copies the sub-matrix `a[rows, cols]`.
pub fn submatrix(a: &CMat, rows: &[usize], cols: &[usize]) -> CMat {
    Mat::from_fn(rows.len(), cols.len(), |i, j| a[(rows[i], cols[j])])
}
