use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};

use lrlab_core::linalg::{self, c64, CMat};
use lrlab_core::observables::{pauli, spin_matrices};
use lrlab_core::{
    convolution_constant, dyson_solve, symmetric_grid, DecayFunction, GeneratorFamily, Interaction, Lattice,
    LocalOperator, SiteModel, SiteSet, SiteSpace, VolumeSystem,
};

fn heisenberg_bond() -> CMat {
    let s = spin_matrices(2);
    let m = (0..3).fold(linalg::zeros(4), |acc, a| acc + linalg::kron(&s[a], &s[a]));
    linalg::scale_re(&m, 4.0 / 3.0)
}

fn chain(n: usize) -> (SiteSpace, Interaction, SiteSet) {
    let lattice = Lattice::chain(n).unwrap();
    let space = SiteSpace::uniform(SiteModel::spin(2, [0.3, 0.0, 0.5]).unwrap(), n);
    let phi = Interaction::nearest_neighbor(&lattice, &space, &heisenberg_bond()).unwrap();
    (space, phi, lattice.sites())
}

fn assemble(c: &mut Criterion) {
    let mut group = c.benchmark_group("assemble");
    for n in [6, 8, 10] {
        let (space, phi, sites) = chain(n);
        group.bench_with_input(BenchmarkId::from_parameter(n), &n, |b, _| {
            b.iter(|| VolumeSystem::assemble(black_box(&sites), &space, &phi).unwrap())
        });
    }
    group.finish();
}

fn commutator_profile(c: &mut Criterion) {
    let mut group = c.benchmark_group("commutator_profile");
    group.sample_size(10);
    for n in [6, 8] {
        let (space, phi, sites) = chain(n);
        let a = LocalOperator::on_site(0, pauli(2), &space).unwrap();
        let b = LocalOperator::on_site(n - 1, pauli(2), &space).unwrap();
        let grid = symmetric_grid(2.0, 81);
        group.bench_with_input(BenchmarkId::from_parameter(n), &n, |bench, _| {
            bench.iter(|| {
                let sys = VolumeSystem::assemble(&sites, &space, &phi).unwrap();
                sys.commutator_norm_profile(&a, &b, black_box(&grid)).unwrap()
            })
        });
    }
    group.finish();
}

fn dyson(c: &mut Criterion) {
    let dim = 8;
    let h0 = CMat::from_fn(dim, dim, |i, j| c64::new(((i + 2 * j) % 5) as f64 - 2.0, 0.0));
    let h0 = linalg::hermitian_part(&h0);
    let h1 = linalg::from_diag(&(0..dim).map(|k| k as f64 / dim as f64).collect::<Vec<_>>());
    let fam = GeneratorFamily::hamiltonian(dim, (-1.0, 1.0), move |t| &h0 + linalg::scale_re(&h1, t.sin())).unwrap();
    let v0 = linalg::identity(dim);
    c.bench_function("dyson_solve_dim8", |b| b.iter(|| dyson_solve(&fam, 0.0, black_box(1.0), &v0, 1e-10).unwrap()));
}

fn decay_constants(c: &mut Criterion) {
    let lattice = Lattice::grid2d(6, 6).unwrap();
    let f = DecayFunction::exp_power(1.0, 2.0).unwrap();
    c.bench_function("convolution_constant_6x6", |b| b.iter(|| convolution_constant(black_box(&lattice), &f)));
}

criterion_group!(benches, assemble, commutator_profile, dyson, decay_constants);
criterion_main!(benches);
