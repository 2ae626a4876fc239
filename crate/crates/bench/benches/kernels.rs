use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};

use qdiff_bench::example_permutation;
use qdiff_core::diagram_integrator::{brute_force_omega, val_monte_carlo, GeneralGraph, TorusProfile, ValConfig};
use qdiff_core::lattice_schrodinger::{
    build_hamiltonian, chebyshev_evolve, wigner, LatticeBox, PotentialLaw, SpectralPropagator, WaveFunction,
};
use qdiff_core::permutation_graphs::{all_minors_unimodular, build_matrix, enumerate_by_degree};
use qdiff_core::stochastic_kinetics::{green_kubo_jump, JumpKernel};
use qdiff_core::{classify, Permutation};

fn combinatorics(c: &mut Criterion) {
    let p = example_permutation();
    c.bench_function("classify_n8", |b| b.iter(|| classify(black_box(&p))));
    c.bench_function("build_matrix_n8", |b| b.iter(|| build_matrix(black_box(&p))));
    let m = build_matrix(&p);
    c.bench_function("all_minors_n8", |b| b.iter(|| all_minors_unimodular(black_box(&m), 9)));
    c.bench_function("enumerate_degrees_n7", |b| b.iter(|| enumerate_by_degree(black_box(7))));
}

fn diagrams(c: &mut Criterion) {
    let mut g = c.benchmark_group("diagrams");
    g.sample_size(10);
    let cfg = ValConfig::kinetic(0.3, 20_000, 1);
    let cross = Permutation::new(vec![2, 1]).unwrap();
    g.bench_function("val_cross_20k", |b| b.iter(|| val_monte_carlo(black_box(&cross), &cfg)));
    let graph = GeneralGraph::new(3, vec![(0, 1), (1, 2), (2, 0), (0, 2)]).unwrap();
    let profile = TorusProfile::lattice_lorentzian(8, 2);
    g.bench_function("brute_force_omega_z8sq", |b| b.iter(|| brute_force_omega(&graph, black_box(&profile), 0)));
    g.finish();
}

fn kinetics(c: &mut Criterion) {
    let mut g = c.benchmark_group("kinetics");
    g.sample_size(10);
    let sphere = JumpKernel::uniform_sphere(1.0).unwrap();
    g.bench_function("green_kubo_sphere_10k", |b| b.iter(|| green_kubo_jump(&sphere, 8.0, 10_000, black_box(3))));
    g.finish();
}

fn lattice(c: &mut Criterion) {
    let mut g = c.benchmark_group("lattice");
    g.sample_size(10);
    let lat = LatticeBox::new(2, 16).unwrap();
    let h = build_hamiltonian(lat, 0.4, PotentialLaw::Bernoulli, 5).unwrap();
    let psi = WaveFunction::random(lat, 9);
    g.bench_function("diagonalize_256", |b| b.iter(|| SpectralPropagator::new(black_box(&h))));
    g.bench_function("chebyshev_256_t10", |b| b.iter(|| chebyshev_evolve(&h, black_box(&psi.amp), 10.0, 1e-12)));
    let line = LatticeBox::new(1, 64).unwrap();
    let state = WaveFunction::random(line, 4);
    g.bench_function("wigner_l64", |b| b.iter(|| wigner(black_box(&state), None)));
    let big = LatticeBox::new(3, 24).unwrap();
    let hb = build_hamiltonian(big, 0.3, PotentialLaw::Uniform, 7).unwrap();
    let pb = WaveFunction::delta(big, 0);
    g.bench_function("chebyshev_24cubed_t5", |b| b.iter(|| chebyshev_evolve(&hb, black_box(&pb.amp), 5.0, 1e-10)));
    g.finish();
}

criterion_group!(benches, combinatorics, diagrams, kinetics, lattice);
criterion_main!(benches);
