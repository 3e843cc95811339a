//! Property suite for the propagator module on seeded random generator families.

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use lrlab_core::linalg::{self, c64};
use lrlab_core::testkit;
use lrlab_core::{
    dyson_inverse, dyson_solve, heisenberg_source_solve, unitary_propagator, GeneratorFamily, GeneratorKind, Result,
};

use crate::config::PropagatorSpec;

#[derive(Clone, Copy, Debug, Serialize)]
pub struct Thresholds {
    pub unitarity: f64,
    pub cocycle: f64,
    pub constant: f64,
    pub inverse: f64,
    /// Smallest acceptable slack in the sourced-equation norm bound.
    pub lemma_slack: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Thresholds { unitarity: 1e-8, cocycle: 1e-7, constant: 1e-8, inverse: 1e-7, lemma_slack: -1e-8 }
    }
}

/// Defects measured on one random instance.
#[derive(Clone, Debug, Serialize)]
pub struct Instance {
    pub instance: usize,
    pub dim: usize,
    /// `‖U(t,s)* U(t,s) - 𝟙‖`
    pub unitarity: f64,
    /// `‖U(t,s) U(s,r) - U(t,r)‖`
    pub cocycle: f64,
    /// Constant generator against the matrix exponential.
    pub constant: f64,
    /// `‖V W - 𝟙‖` for the forward and inverse solutions.
    pub inverse: f64,
    pub lemma_slack: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct Summary {
    pub unitarity: f64,
    pub cocycle: f64,
    pub constant: f64,
    pub inverse: f64,
    pub lemma_slack: f64,
    pub passed: bool,
}

const DIMS: [usize; 7] = [2, 3, 4, 6, 8, 12, 16];

fn instance(index: usize, spec: &PropagatorSpec, tol: f64) -> Result<Instance> {
    let mut rng = testkit::rng(spec.seed.wrapping_mul(0x9e37_79b9_7f4a_7c15).wrapping_add(index as u64));
    let dims: Vec<usize> = DIMS.iter().copied().filter(|&d| d <= spec.max_dim).collect();
    let dim = dims.get(index % dims.len().max(1)).copied().unwrap_or(spec.max_dim);
    let w = spec.window;
    let window = (-w, w);
    let id = linalg::identity(dim);

    let fam = testkit::random_hamiltonian_family(&mut rng, dim, window);
    let mut times = [rng.gen_range(-w..w), rng.gen_range(-w..w), rng.gen_range(-w..w)];
    times.sort_by(f64::total_cmp);
    let [r, s, t] = times;
    let ts = unitary_propagator(&fam, s, t, tol)?.value;
    let sr = unitary_propagator(&fam, r, s, tol)?.value;
    let tr = unitary_propagator(&fam, r, t, tol)?.value;
    let unitarity = linalg::spectral_norm(&(linalg::dagger(&ts) * &ts - &id))?;
    let cocycle = linalg::spectral_norm(&(&ts * &sr - &tr))?;

    let h0 = testkit::random_hermitian(&mut rng, dim);
    let constant_family = GeneratorFamily::constant(h0.clone(), GeneratorKind::Hamiltonian)?;
    let uc = unitary_propagator(&constant_family, 0.0, t, tol)?.value;
    let expect = linalg::expm(&linalg::scale(&h0, c64::new(0.0, -t)))?;
    let constant = linalg::spectral_norm(&(&uc - &expect))?;

    let general = testkit::random_general_family(&mut rng, dim, window);
    let v0 = testkit::random_matrix(&mut rng, dim) + linalg::scale_re(&id, 3.0);
    let v = dyson_solve(&general, 0.0, t, &v0, tol)?.value;
    let winv = dyson_inverse(&general, 0.0, t, &v0, tol)?.value;
    let inverse = linalg::spectral_norm(&(&v * &winv - &id))?;

    let source = testkit::random_general_family(&mut rng, dim, window);
    let f0 = testkit::random_matrix(&mut rng, dim);
    let lemma_slack = heisenberg_source_solve(&fam, &source, &f0, 0.0, t, tol)?.slack;

    Ok(Instance { instance: index, dim, unitarity, cocycle, constant, inverse, lemma_slack })
}

pub fn run_suite(spec: &PropagatorSpec, tol: f64) -> Result<Vec<Instance>> {
    (0..spec.instances).into_par_iter().map(|i| instance(i, spec, tol)).collect()
}

pub fn summarize(results: &[Instance]) -> Summary {
    let max = |f: fn(&Instance) -> f64| results.iter().map(f).fold(0.0, f64::max);
    let th = Thresholds::default();
    let unitarity = max(|r| r.unitarity);
    let cocycle = max(|r| r.cocycle);
    let constant = max(|r| r.constant);
    let inverse = max(|r| r.inverse);
    let lemma_slack = results.iter().map(|r| r.lemma_slack).fold(f64::INFINITY, f64::min);
    let passed = unitarity <= th.unitarity
        && cocycle <= th.cocycle
        && constant <= th.constant
        && inverse <= th.inverse
        && (results.is_empty() || lemma_slack >= th.lemma_slack);
    Summary { unitarity, cocycle, constant, inverse, lemma_slack, passed }
}
