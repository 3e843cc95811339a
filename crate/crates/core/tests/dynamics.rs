mod common;

use lrlab_core::linalg::{self, CMat};
use lrlab_core::observables::{pauli, spin_matrices};
use lrlab_core::testkit::{self, kron_oracle, max_abs_diff};
use lrlab_core::{
    operator_norm, symmetric_grid, volume_difference_profile, Interaction, LocalOperator, LrError, SiteModel, SiteSet,
    SiteSpace, VolumeSystem,
};

use common::{heisenberg_bond, spin_chain, spin_space};

fn three_site() -> (SiteSpace, Interaction, VolumeSystem) {
    let ch = spin_chain(3, [0.3, 0.1, 0.5], 1.0);
    let sys = VolumeSystem::assemble(&ch.lattice.sites(), &ch.space, &ch.phi).unwrap();
    (ch.space, ch.phi, sys)
}

#[test]
fn single_site_hamiltonian_is_onsite_term() {
    let sp = spin_space(1, [0.2, -0.4, 0.9]);
    let sys = VolumeSystem::assemble(&SiteSet::from([0]), &sp, &Interaction::new()).unwrap();
    assert_eq!(max_abs_diff(sys.hamiltonian(), sp.model(0).hamiltonian()), 0.0);
}

#[test]
fn two_site_hamiltonian_matches_kronecker_sum() {
    let ch = spin_chain(2, [0.3, 0.0, -0.7], 0.8);
    let sys = VolumeSystem::assemble(&ch.lattice.sites(), &ch.space, &ch.phi).unwrap();
    let hx = ch.space.model(0).hamiltonian();
    let id = linalg::identity(2);
    let expect = kron_oracle(hx, &id) + kron_oracle(&id, hx) + linalg::scale_re(&heisenberg_bond(), 0.8);
    assert!(max_abs_diff(sys.hamiltonian(), &expect) < 1e-15);
    assert!(linalg::hermiticity_defect(sys.hamiltonian()) <= 1e-12);
    let split = sys.local_part() + ch.phi.total(sys.volume(), &ch.space).unwrap();
    assert!(max_abs_diff(sys.hamiltonian(), &split) <= 1e-12);
}

#[test]
fn term_outside_volume_is_rejected() {
    let ch = spin_chain(4, [0.0; 3], 1.0);
    let err = VolumeSystem::assemble(&SiteSet::range(0, 3), &ch.space, &ch.phi).unwrap_err();
    assert!(matches!(err, LrError::SupportViolation { .. }));
    assert!(VolumeSystem::restricted(&SiteSet::range(0, 3), &ch.space, &ch.phi).is_ok());
}

#[test]
fn dimension_cap_is_enforced() {
    let ch = spin_chain(13, [0.0; 3], 1.0);
    let err = VolumeSystem::assemble(&ch.lattice.sites(), &ch.space, &ch.phi).unwrap_err();
    assert!(matches!(err, LrError::DimensionCap { dim: 8192, .. }));
}

#[test]
fn heisenberg_basics() {
    let (sp, _, sys) = three_site();
    let mut rng = testkit::rng(1);
    let a = LocalOperator::new(SiteSet::from([0, 1]), testkit::random_matrix(&mut rng, 4), &sp).unwrap();
    let t0 = sys.heisenberg_evolve(&a, 0.0).unwrap();
    assert_eq!(max_abs_diff(t0.matrix(), sys.embed(&a).unwrap().matrix()), 0.0);
    let n = operator_norm(&a).unwrap();
    for t in [-1.3, 0.4, 2.0] {
        let at = sys.heisenberg_evolve(&a, t).unwrap();
        assert!((operator_norm(&at).unwrap() - n).abs() <= 1e-10 * n);
    }
}

#[test]
fn free_dynamics_keeps_support() {
    let sp = spin_space(3, [0.4, 0.2, 0.9]);
    let sys = VolumeSystem::assemble(&SiteSet::range(0, 3), &sp, &Interaction::new()).unwrap();
    let mut rng = testkit::rng(2);
    let m = testkit::random_matrix(&mut rng, 2);
    let a = LocalOperator::on_site(1, m.clone(), &sp).unwrap();
    let t = 0.77;
    let u = testkit::unitary_oracle(sp.model(1).hamiltonian(), t);
    let local = linalg::dagger(&u) * &m * &u;
    let expect = kron_oracle(&kron_oracle(&linalg::identity(2), &local), &linalg::identity(2));
    let got = sys.heisenberg_evolve(&a, t).unwrap();
    assert!(max_abs_diff(got.matrix(), &expect) < 1e-12);
}

#[test]
fn interaction_picture_examples() {
    let (sp, _, sys) = three_site();
    let mut rng = testkit::rng(3);
    let a = LocalOperator::on_site(0, testkit::random_hermitian(&mut rng, 2), &sp).unwrap();
    let full = sys.interaction_picture(sys.volume()).unwrap();
    let ea = sys.embed(&a).unwrap();
    for t in [-0.8, 1.1] {
        assert!(max_abs_diff(full.evolve(&a, t).unwrap().matrix(), ea.matrix()) < 1e-10);
    }
    let ip = sys.interaction_picture(&SiteSet::from([0])).unwrap();
    assert!(max_abs_diff(ip.evolve(&a, 0.0).unwrap().matrix(), ea.matrix()) < 1e-14);
    for t in [-1.2, 0.5, 1.7] {
        let composed = ip.evolve(&ip.free_evolve(&a, t).unwrap(), t).unwrap();
        let direct = sys.heisenberg_evolve(&a, t).unwrap();
        assert!(max_abs_diff(composed.matrix(), direct.matrix()) <= 1e-9);
    }
}

#[test]
fn interaction_picture_routes_agree() {
    let (sp, _, sys) = three_site();
    let mut rng = testkit::rng(4);
    let a = LocalOperator::new(SiteSet::from([0, 1]), testkit::random_hermitian(&mut rng, 4), &sp).unwrap();
    let ip = sys.interaction_picture(&SiteSet::from([0, 1])).unwrap();
    for t in [-0.9, 0.6] {
        let exact = ip.evolve(&a, t).unwrap();
        let dyson = ip.evolve_dyson(&a, t, 1e-10).unwrap();
        assert!(max_abs_diff(exact.matrix(), dyson.matrix()) <= 1e-7);
    }
}

#[test]
fn surface_terms_reproduce_the_commutator() {
    let ch = spin_chain(4, [0.3, 0.0, 0.5], 1.0);
    let sys = VolumeSystem::assemble(&ch.lattice.sites(), &ch.space, &ch.phi).unwrap();
    let x = SiteSet::from([1, 2]);
    let ip = sys.interaction_picture(&x).unwrap();
    let mut rng = testkit::rng(5);
    let a = LocalOperator::new(x.clone(), testkit::random_matrix(&mut rng, 4), &ch.space).unwrap();
    let ea = sys.embed(&a).unwrap();
    for t in [-1.0, 0.0, 0.35, 2.0] {
        let lhs = linalg::commutator(&ip.interaction_hamiltonian(t), ea.matrix());
        let rhs = linalg::commutator(&ip.surface_hamiltonian(t), ea.matrix());
        assert!(linalg::spectral_norm(&(lhs - rhs)).unwrap() <= 1e-10);
    }
}

#[test]
fn automorphism_laws() {
    let (sp, _, sys) = three_site();
    let all = sys.volume().clone();
    let mut rng = testkit::rng(6);
    for _ in 0..3 {
        let a = LocalOperator::new(all.clone(), testkit::random_matrix(&mut rng, 8), &sp).unwrap();
        let b = LocalOperator::new(all.clone(), testkit::random_matrix(&mut rng, 8), &sp).unwrap();
        let (t, s) = (0.6, -1.1);
        let ta = sys.heisenberg_evolve(&a, t).unwrap();
        let tb = sys.heisenberg_evolve(&b, t).unwrap();
        let ab = LocalOperator::new(all.clone(), a.matrix() * b.matrix(), &sp).unwrap();
        let tab = sys.heisenberg_evolve(&ab, t).unwrap();
        assert!(max_abs_diff(tab.matrix(), &(ta.matrix() * tb.matrix())) <= 1e-10);
        let tadj = sys.heisenberg_evolve(&a.adjoint(), t).unwrap();
        assert!(max_abs_diff(tadj.matrix(), &linalg::dagger(ta.matrix())) <= 1e-10);
        let ts = sys.heisenberg_evolve(&sys.heisenberg_evolve(&a, s).unwrap(), t).unwrap();
        let direct = sys.heisenberg_evolve(&a, t + s).unwrap();
        assert!(max_abs_diff(ts.matrix(), direct.matrix()) <= 1e-9);
    }
}

#[test]
fn profile_examples() {
    let ch = spin_chain(4, [0.3, 0.0, 0.5], 1.0);
    let sys = VolumeSystem::assemble(&ch.lattice.sites(), &ch.space, &ch.phi).unwrap();
    let a = LocalOperator::on_site(0, pauli(2), &ch.space).unwrap();
    let b = LocalOperator::on_site(3, pauli(0), &ch.space).unwrap();
    let grid = symmetric_grid(2.0, 21);
    let p = sys.commutator_norm_profile(&a, &b, &grid).unwrap();
    assert_eq!(p.values[10], 0.0);
    let neg: Vec<f64> = grid.iter().map(|t| -t).collect();
    let q = sys.commutator_norm_profile(&b, &a, &neg).unwrap();
    for (x, y) in p.values.iter().zip(&q.values) {
        assert!((x - y).abs() <= 1e-10);
    }
    // dense recomputation at one point
    let t = grid[17];
    let ta = sys.heisenberg_evolve(&a, t).unwrap();
    let eb = sys.embed(&b).unwrap();
    let dense = linalg::spectral_norm(&linalg::commutator(ta.matrix(), eb.matrix())).unwrap();
    assert!((dense - p.values[17]).abs() <= 1e-9 * dense.max(1.0));
}

#[test]
fn conserved_observable_has_constant_profile() {
    let ch = spin_chain(4, [0.0; 3], 1.0);
    let sys = VolumeSystem::assemble(&ch.lattice.sites(), &ch.space, &ch.phi).unwrap();
    let [_, _, sz] = spin_matrices(2);
    let mut total = linalg::zeros(16);
    for x in 0..4 {
        total += LocalOperator::on_site(x, sz.clone(), &ch.space).unwrap().embed(sys.volume(), &ch.space).unwrap().matrix();
    }
    assert!(linalg::max_abs(&linalg::commutator(&total, sys.hamiltonian())) < 1e-12);
    let a = LocalOperator::new(sys.volume().clone(), total, &ch.space).unwrap();
    let b = LocalOperator::on_site(1, pauli(0), &ch.space).unwrap();
    let p = sys.commutator_norm_profile(&a, &b, &symmetric_grid(2.0, 11)).unwrap();
    for v in &p.values {
        assert!((v - p.values[0]).abs() <= 1e-10);
    }
}

#[test]
fn volume_difference_examples() {
    let ch = spin_chain(6, [0.3, 0.0, 0.5], 1.0);
    let small_v = SiteSet::range(0, 4);
    let large_v = SiteSet::range(0, 6);
    let a = LocalOperator::on_site(0, pauli(0), &ch.space).unwrap();
    let grid: Vec<f64> = (0..=20).map(|k| k as f64 * 0.05).collect();

    let same = VolumeSystem::restricted(&small_v, &ch.space, &ch.phi).unwrap();
    let p = volume_difference_profile(&same, &same, &a, &grid).unwrap();
    assert!(p.values.iter().all(|&v| v <= 1e-12));

    let free_s = VolumeSystem::assemble(&small_v, &ch.space, &Interaction::new()).unwrap();
    let free_l = VolumeSystem::assemble(&large_v, &ch.space, &Interaction::new()).unwrap();
    let p = volume_difference_profile(&free_s, &free_l, &a, &grid).unwrap();
    assert!(p.values.iter().all(|&v| v <= 1e-12));

    let small = VolumeSystem::restricted(&small_v, &ch.space, &ch.phi).unwrap();
    let large = VolumeSystem::restricted(&large_v, &ch.space, &ch.phi).unwrap();
    let p = volume_difference_profile(&small, &large, &a, &grid).unwrap();
    assert!(p.values[0] <= 1e-14);
    for w in p.values.windows(2) {
        assert!(w[1] >= w[0] - 1e-12, "{:?}", p.values);
    }
    assert!(volume_difference_profile(&large, &small, &a, &grid).is_err());
}

#[test]
fn block_structure_matches_dense_diagonalisation() {
    // diagonal bonds with a field along z split the Hamiltonian into blocks
    let n = 4;
    let lat = lrlab_core::Lattice::chain(n).unwrap();
    let sp = SiteSpace::uniform(SiteModel::spin(2, [0.0, 0.0, 0.4]).unwrap(), n);
    let phi = Interaction::nearest_neighbor(&lat, &sp, &common::zz_bond()).unwrap();
    let sys = VolumeSystem::assemble(&lat.sites(), &sp, &phi).unwrap();
    assert_eq!(sys.spectrum().unwrap().block_count(), 16);
    let a = LocalOperator::on_site(0, pauli(0), &sp).unwrap();
    let t = 0.9;
    let got = sys.heisenberg_evolve(&a, t).unwrap();
    let u = testkit::unitary_oracle(sys.hamiltonian(), t);
    let expect: CMat = linalg::dagger(&u) * sys.embed(&a).unwrap().matrix() * &u;
    assert!(max_abs_diff(got.matrix(), &expect) < 1e-12);
}
