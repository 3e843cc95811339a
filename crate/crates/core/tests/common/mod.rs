#![allow(dead_code)]

use lrlab_core::linalg::{self, c64, CMat};
use lrlab_core::observables::pauli;
use lrlab_core::{DecayFunction, Interaction, Lattice, SiteModel, SiteSpace};

/// `(σx σx + σy σy + σz σz) / 3`, unit operator norm.
pub fn heisenberg_bond() -> CMat {
    let mut m = linalg::zeros(4);
    for a in 0..3 {
        m += linalg::kron(&pauli(a), &pauli(a));
    }
    linalg::scale_re(&m, 1.0 / 3.0)
}

pub fn zz_bond() -> CMat {
    linalg::kron(&pauli(2), &pauli(2))
}

pub fn spin_space(n: usize, field: [f64; 3]) -> SiteSpace {
    SiteSpace::uniform(SiteModel::spin(2, field).unwrap(), n)
}

pub struct Chain {
    pub lattice: Lattice,
    pub space: SiteSpace,
    pub phi: Interaction,
}

/// Open spin-1/2 chain with Heisenberg bonds of norm `j`.
pub fn spin_chain(n: usize, field: [f64; 3], j: f64) -> Chain {
    let lattice = Lattice::chain(n).unwrap();
    let space = spin_space(n, field);
    let phi = Interaction::nearest_neighbor(&lattice, &space, &linalg::scale_re(&heisenberg_bond(), j)).unwrap();
    Chain { lattice, space, phi }
}

pub fn half_power() -> DecayFunction {
    DecayFunction::custom("2^-r", |r| 0.5f64.powf(r)).unwrap()
}

pub fn c(re: f64, im: f64) -> c64 {
    c64::new(re, im)
}
