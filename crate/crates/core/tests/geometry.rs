mod common;

use lrlab_core::geometry::pair_sum;
use lrlab_core::{convolution_constant, f_norm, DecayFunction, Lattice, SiteSet};
use proptest::prelude::*;

use common::half_power;

#[test]
fn four_site_convolution_by_triple_enumeration() {
    let lat = Lattice::chain(4).unwrap();
    let f = half_power();
    let mut best = 0.0f64;
    for x in 0..4i32 {
        for y in 0..4i32 {
            let s: f64 = (0..4i32).map(|z| 0.5f64.powi((x - z).abs() + (z - y).abs())).sum();
            best = best.max(s / 0.5f64.powi((x - y).abs()));
        }
    }
    let c = convolution_constant(&lat, &f);
    assert!((c - best).abs() < 1e-14);
    assert!(c >= f.evaluate(0.0));
}

#[test]
fn weighted_norm_is_smaller() {
    let lat = Lattice::chain(7).unwrap();
    let f = DecayFunction::power(2.0).unwrap();
    let fa = f.apply_exponential_weight(1.0).unwrap();
    assert!(f_norm(&lat, &fa) <= f_norm(&lat, &f));
}

#[test]
fn exp_power_matches_manual_formula() {
    let f = DecayFunction::exp_power(1.0, 2.0).unwrap();
    for r in [0.0f64, 0.5, 3.0] {
        let expect = (-r).exp() * (1.0 + r).powi(-2);
        assert!((f.evaluate(r) - expect).abs() < 1e-16);
    }
}

#[test]
fn pair_sum_counts_every_pair() {
    let lat = Lattice::chain(4).unwrap();
    let s = pair_sum(&lat, &half_power(), &SiteSet::from([0, 1]), &SiteSet::from([3]));
    assert!((s - (0.125 + 0.25)).abs() < 1e-15);
}

fn decay_strategy() -> impl Strategy<Value = DecayFunction> {
    prop_oneof![
        (0.0f64..4.0).prop_map(|p| DecayFunction::power(p).unwrap()),
        (0.01f64..2.0, 0.0f64..3.0).prop_map(|(a, p)| DecayFunction::exp_power(a, p).unwrap()),
    ]
}

proptest! {
    #[test]
    fn convolution_dominates_f0(n in 1usize..9, f in decay_strategy()) {
        let lat = Lattice::chain(n).unwrap();
        prop_assert!(convolution_constant(&lat, &f) >= f.evaluate(0.0) * (1.0 - 1e-15));
    }

    #[test]
    fn constants_grow_with_the_lattice(n in 1usize..8, f in decay_strategy()) {
        let small = Lattice::chain(n).unwrap();
        let large = Lattice::chain(n + 1).unwrap();
        prop_assert!(f_norm(&large, &f) >= f_norm(&small, &f));
        prop_assert!(convolution_constant(&large, &f) >= convolution_constant(&small, &f) * (1.0 - 1e-14));
    }

    #[test]
    fn grid_constants_grow_with_the_lattice(w in 1usize..4, h in 1usize..4, f in decay_strategy()) {
        let small = Lattice::grid2d(w, h).unwrap();
        let large = Lattice::grid2d(w + 1, h).unwrap();
        prop_assert!(f_norm(&large, &f) >= f_norm(&small, &f) * (1.0 - 1e-15));
        prop_assert!(convolution_constant(&large, &f) >= convolution_constant(&small, &f) * (1.0 - 1e-14));
    }

    #[test]
    fn weights_compose(a in 0.01f64..3.0, b in 0.01f64..3.0, p in 0.0f64..4.0, r in 0.0f64..20.0) {
        let f = DecayFunction::power(p).unwrap();
        let ab = f.apply_exponential_weight(a).unwrap().apply_exponential_weight(b).unwrap();
        let direct = f.apply_exponential_weight(a + b).unwrap();
        let (x, y) = (ab.evaluate(r), direct.evaluate(r));
        prop_assert!((x - y).abs() <= 1e-12 * y.abs().max(f64::MIN_POSITIVE));
    }

    #[test]
    fn decay_is_nonincreasing(f in decay_strategy(), r1 in 0.0f64..30.0, dr in 0.0f64..30.0) {
        prop_assert!(f.evaluate(r1 + dr) <= f.evaluate(r1));
        prop_assert!(f.evaluate(r1) > 0.0);
    }
}
