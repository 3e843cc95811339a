//! Seeded random inputs and independent numerical oracles for tests.
//!
//! The oracles deliberately avoid the crate's own linear algebra: they use
//! `nalgebra` decompositions or plain fixed-step integration.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::linalg::{c64, CMat};
use crate::propagator::GeneratorFamily;

pub type Rng64 = ChaCha8Rng;

pub fn rng(seed: u64) -> Rng64 {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Entries with real and imaginary parts uniform in `[-1, 1]`.
pub fn random_matrix(rng: &mut Rng64, n: usize) -> CMat {
    CMat::from_fn(n, n, |_, _| c64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
}

pub fn random_hermitian(rng: &mut Rng64, n: usize) -> CMat {
    let a = random_matrix(rng, n);
    CMat::from_fn(n, n, |i, j| (a[(i, j)] + a[(j, i)].conj()) * 0.5)
}

pub fn random_real_symmetric(rng: &mut Rng64, n: usize) -> CMat {
    let a = CMat::from_fn(n, n, |_, _| c64::new(rng.gen_range(-1.0..1.0), 0.0));
    CMat::from_fn(n, n, |i, j| (a[(i, j)] + a[(j, i)]) * 0.5)
}

/// Hermitian matrix rescaled to operator norm `norm`.
pub fn random_hermitian_with_norm(rng: &mut Rng64, n: usize, norm: f64) -> CMat {
    let h = random_hermitian(rng, n);
    let s = spectral_norm_oracle(&h);
    CMat::from_fn(n, n, |i, j| h[(i, j)] * (norm / s))
}

/// Smooth self-adjoint family `H₀ + sin(ωt + φ) H₁ + t² H₂ / 2` on `window`.
pub fn random_hamiltonian_family(rng: &mut Rng64, dim: usize, window: (f64, f64)) -> GeneratorFamily {
    let h0 = random_hermitian(rng, dim);
    let h1 = random_hermitian(rng, dim);
    let h2 = random_hermitian(rng, dim);
    let omega: f64 = rng.gen_range(0.5..3.0);
    let phase: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
    GeneratorFamily::hamiltonian(dim, window, move |t| {
        let s = (omega * t + phase).sin();
        CMat::from_fn(dim, dim, |i, j| h0[(i, j)] + h1[(i, j)] * s + h2[(i, j)] * (0.5 * t * t))
    })
    .expect("random family is valid")
}

/// Smooth general family `A₀ + cos(ωt) A₁`.
pub fn random_general_family(rng: &mut Rng64, dim: usize, window: (f64, f64)) -> GeneratorFamily {
    let a0 = random_matrix(rng, dim);
    let a1 = random_matrix(rng, dim);
    let omega: f64 = rng.gen_range(0.5..3.0);
    GeneratorFamily::general(dim, window, move |t| {
        let c = (omega * t).cos();
        CMat::from_fn(dim, dim, |i, j| a0[(i, j)] + a1[(i, j)] * c)
    })
    .expect("random family is valid")
}

pub fn to_nalgebra(m: &CMat) -> DMatrix<c64> {
    DMatrix::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)])
}

pub fn from_nalgebra(m: &DMatrix<c64>) -> CMat {
    CMat::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)])
}

/// Largest singular value from nalgebra's SVD.
pub fn spectral_norm_oracle(m: &CMat) -> f64 {
    if m.nrows() == 0 {
        return 0.0;
    }
    to_nalgebra(m).singular_values().iter().copied().fold(0.0, f64::max)
}

/// nalgebra's matrix exponential.
pub fn expm_oracle(m: &CMat) -> CMat {
    from_nalgebra(&to_nalgebra(m).exp())
}

/// `exp(-i t H)` from nalgebra's Hermitian eigendecomposition.
pub fn unitary_oracle(h: &CMat, t: f64) -> CMat {
    let eig = to_nalgebra(h).symmetric_eigen();
    let v = &eig.eigenvectors;
    let d = DMatrix::from_fn(h.nrows(), h.nrows(), |i, j| {
        if i == j {
            c64::cis(-t * eig.eigenvalues[i])
        } else {
            c64::new(0.0, 0.0)
        }
    });
    from_nalgebra(&(v * d * v.adjoint()))
}

/// Lowest eigenvalue from nalgebra.
pub fn ground_energy_oracle(h: &CMat) -> f64 {
    to_nalgebra(h).symmetric_eigen().eigenvalues.iter().copied().fold(f64::INFINITY, f64::min)
}

/// Dense Kronecker product by index arithmetic.
pub fn kron_oracle(a: &CMat, b: &CMat) -> CMat {
    let (p, q) = (b.nrows(), b.ncols());
    CMat::from_fn(a.nrows() * p, a.ncols() * q, |i, j| a[(i / p, j / q)] * b[(i % p, j % q)])
}

/// Classical fourth-order Runge-Kutta with a fixed number of steps.
pub fn rk4(f: impl Fn(f64, &CMat) -> CMat, y0: &CMat, t0: f64, t1: f64, steps: usize) -> CMat {
    let h = (t1 - t0) / steps as f64;
    let mut y = y0.clone();
    for k in 0..steps {
        let t = t0 + h * k as f64;
        let k1 = f(t, &y);
        let k2 = f(t + 0.5 * h, &(&y + &scale(&k1, 0.5 * h)));
        let k3 = f(t + 0.5 * h, &(&y + &scale(&k2, 0.5 * h)));
        let k4 = f(t + h, &(&y + &scale(&k3, h)));
        let incr = &k1 + &scale(&k2, 2.0) + scale(&k3, 2.0) + &k4;
        y = &y + &scale(&incr, h / 6.0);
    }
    y
}

fn scale(m: &CMat, k: f64) -> CMat {
    CMat::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)] * k)
}

pub fn max_abs_diff(a: &CMat, b: &CMat) -> f64 {
    let mut m = 0.0f64;
    for j in 0..a.ncols() {
        for i in 0..a.nrows() {
            m = m.max((a[(i, j)] - b[(i, j)]).norm());
        }
    }
    m
}
