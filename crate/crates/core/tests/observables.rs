mod common;

use lrlab_core::linalg::{self, c64, CMat};
use lrlab_core::observables::{pauli, position};
use lrlab_core::testkit::{self, ground_energy_oracle, kron_oracle, spectral_norm_oracle};
use lrlab_core::{commutator, operator_norm, truncate_oscillator, LocalOperator, SiteModel, SiteSet, SiteSpace};
use proptest::prelude::*;

use common::spin_space;

#[test]
fn identity_embeds_to_identity() {
    let sp = spin_space(3, [0.0; 3]);
    let id = LocalOperator::identity(SiteSet::from([1]), &sp).unwrap();
    let e = id.embed(&SiteSet::range(0, 3), &sp).unwrap();
    assert_eq!(linalg::max_abs_diff(e.matrix(), &linalg::identity(8)), 0.0);
}

#[test]
fn embedding_is_functorial() {
    let sp = SiteSpace::new(vec![
        SiteModel::spin(2, [0.0; 3]).unwrap(),
        truncate_oscillator(3, 0.0).unwrap(),
        SiteModel::spin(3, [0.0; 3]).unwrap(),
        SiteModel::spin(2, [0.0; 3]).unwrap(),
    ]);
    let mut rng = testkit::rng(3);
    let a = LocalOperator::new(SiteSet::from([1, 3]), testkit::random_matrix(&mut rng, 6), &sp).unwrap();
    let mid = a.embed(&SiteSet::from([0, 1, 3]), &sp).unwrap();
    let full = SiteSet::range(0, 4);
    let two_step = mid.embed(&full, &sp).unwrap();
    let direct = a.embed(&full, &sp).unwrap();
    assert_eq!(linalg::max_abs_diff(two_step.matrix(), direct.matrix()), 0.0);
}

#[test]
fn pauli_embedding_matches_dense_kronecker() {
    let sp = spin_space(2, [0.0; 3]);
    let a = LocalOperator::on_site(0, pauli(1), &sp).unwrap();
    let e = a.embed(&SiteSet::from([0, 1]), &sp).unwrap();
    let oracle = kron_oracle(&pauli(1), &linalg::identity(2));
    assert_eq!(linalg::max_abs_diff(e.matrix(), &oracle), 0.0);
    let n = spectral_norm_oracle(e.matrix());
    assert!((n - 1.0).abs() < 1e-12);
    assert!((operator_norm(&e).unwrap() - operator_norm(&a).unwrap()).abs() < 1e-12);
}

#[test]
fn middle_site_embedding_matches_kronecker() {
    let sp = SiteSpace::new(vec![
        SiteModel::spin(2, [0.0; 3]).unwrap(),
        truncate_oscillator(3, 0.0).unwrap(),
        SiteModel::spin(2, [0.0; 3]).unwrap(),
    ]);
    let x = position(3);
    let a = LocalOperator::on_site(1, x.clone(), &sp).unwrap();
    let e = a.embed(&SiteSet::range(0, 3), &sp).unwrap();
    let oracle = kron_oracle(&kron_oracle(&linalg::identity(2), &x), &linalg::identity(2));
    assert_eq!(linalg::max_abs_diff(e.matrix(), &oracle), 0.0);
}

#[test]
fn norm_examples() {
    let sp = spin_space(1, [0.0; 3]);
    let z = LocalOperator::on_site(0, linalg::zeros(2), &sp).unwrap();
    assert_eq!(operator_norm(&z).unwrap(), 0.0);
    let mut rng = testkit::rng(11);
    let h = testkit::random_hermitian(&mut rng, 2);
    let u = linalg::expm(&linalg::scale(&h, c64::new(0.0, 1.0))).unwrap();
    let uop = LocalOperator::on_site(0, u, &sp).unwrap();
    assert!((operator_norm(&uop).unwrap() - 1.0).abs() < 1e-12);
}

#[test]
fn random_norms_match_svd_oracle() {
    let sp = spin_space(3, [0.0; 3]);
    let all = SiteSet::range(0, 3);
    let mut rng = testkit::rng(17);
    for _ in 0..20 {
        let m = testkit::random_matrix(&mut rng, 8);
        let op = LocalOperator::new(all.clone(), m.clone(), &sp).unwrap();
        let n = operator_norm(&op).unwrap();
        let o = spectral_norm_oracle(&m);
        assert!((n - o).abs() <= 1e-10 * o);
        let h = testkit::random_hermitian(&mut rng, 8);
        let n = linalg::spectral_norm(&h).unwrap();
        let o = spectral_norm_oracle(&h);
        assert!((n - o).abs() <= 1e-10 * o);
    }
}

#[test]
fn commutator_examples() {
    let sp = spin_space(3, [0.0; 3]);
    let all = SiteSet::range(0, 3);
    let a = LocalOperator::on_site(0, pauli(0), &sp).unwrap();
    let b = LocalOperator::on_site(2, pauli(1), &sp).unwrap();
    assert_eq!(linalg::max_abs(commutator(&a, &b, &all, &sp).unwrap().matrix()), 0.0);
    assert_eq!(linalg::max_abs(commutator(&a, &a, &all, &sp).unwrap().matrix()), 0.0);
    let b0 = LocalOperator::on_site(0, pauli(1), &sp).unwrap();
    let c = commutator(&a, &b0, &all, &sp).unwrap();
    let n = operator_norm(&c).unwrap();
    assert!(n <= 2.0 + 1e-12);
    assert!((n - 2.0).abs() < 1e-12);
    let outside = LocalOperator::on_site(2, pauli(0), &sp).unwrap();
    assert!(commutator(&a, &outside, &SiteSet::from([0, 1]), &sp).is_err());
}

#[test]
fn anharmonic_ground_energy_against_larger_truncation() {
    let small = truncate_oscillator(8, 0.1).unwrap();
    let large = truncate_oscillator(16, 0.1).unwrap();
    let e8 = ground_energy_oracle(small.hamiltonian());
    let e16 = ground_energy_oracle(large.hamiltonian());
    assert!((e8 - e16).abs() < 1e-3, "{e8} vs {e16}");
    assert!(e16 > 0.5 && e16 < 0.6);
}

#[test]
fn oscillator_is_self_adjoint() {
    for lambda in [0.0, 0.5, 5.0] {
        let m = truncate_oscillator(6, lambda).unwrap();
        assert_eq!(linalg::hermiticity_defect(m.hamiltonian()), 0.0);
    }
}

fn small_matrix() -> impl Strategy<Value = (u64, usize)> {
    (any::<u64>(), 1usize..=16)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn embed_preserves_norm(seed in any::<u64>(), site in 0usize..3) {
        let sp = spin_space(3, [0.0; 3]);
        let mut rng = testkit::rng(seed);
        let a = LocalOperator::on_site(site, testkit::random_matrix(&mut rng, 2), &sp).unwrap();
        let n0 = operator_norm(&a).unwrap();
        let n1 = operator_norm(&a.embed(&SiteSet::range(0, 3), &sp).unwrap()).unwrap();
        prop_assert!((n0 - n1).abs() <= 1e-12 * n0);
    }

    #[test]
    fn commutator_is_antisymmetric_bilinear_and_jacobi((seed, n) in small_matrix()) {
        let mut rng = testkit::rng(seed);
        let a = testkit::random_matrix(&mut rng, n);
        let b = testkit::random_matrix(&mut rng, n);
        let c = testkit::random_matrix(&mut rng, n);
        let ab = linalg::commutator(&a, &b);
        let ba = linalg::commutator(&b, &a);
        prop_assert!(linalg::max_abs(&(&ab + &ba)) < 1e-12);
        let lhs = linalg::commutator(&(&a + linalg::scale_re(&c, 2.5)), &b);
        let rhs = &ab + linalg::scale_re(&linalg::commutator(&c, &b), 2.5);
        prop_assert!(linalg::max_abs(&(lhs - rhs)) < 1e-12);
        let jac = linalg::commutator(&a, &linalg::commutator(&b, &c))
            + linalg::commutator(&b, &linalg::commutator(&c, &a))
            + linalg::commutator(&c, &linalg::commutator(&a, &b));
        prop_assert!(linalg::spectral_norm(&jac).unwrap() <= 1e-10);
    }

    #[test]
    fn norm_is_submultiplicative_and_subadditive((seed, n) in small_matrix()) {
        let mut rng = testkit::rng(seed);
        let a: CMat = testkit::random_matrix(&mut rng, n);
        let b: CMat = testkit::random_matrix(&mut rng, n);
        let na = linalg::spectral_norm(&a).unwrap();
        let nb = linalg::spectral_norm(&b).unwrap();
        prop_assert!(linalg::spectral_norm(&(&a * &b)).unwrap() <= na * nb * (1.0 + 1e-12));
        prop_assert!(linalg::spectral_norm(&(&a + &b)).unwrap() <= (na + nb) * (1.0 + 1e-12));
    }
}
