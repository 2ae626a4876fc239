use approx::assert_relative_eq;
use proptest::prelude::*;

use qdiff_core::diagram_integrator::{geometric_closed_form, geometric_partial_sum, wrap};
use qdiff_core::lattice_schrodinger::{build_hamiltonian, evolve, LatticeBox, PotentialLaw, WaveFunction};
use qdiff_core::permutation_graphs::{build_matrix, check_unimodular, classify, delta_constraints_residual, Permutation};
use qdiff_core::Complex64;

fn permutation(max_n: usize) -> impl Strategy<Value = Permutation> {
    (1..=max_n)
        .prop_flat_map(|n| Just((1..=n).collect::<Vec<usize>>()).prop_shuffle())
        .prop_map(|v| Permutation::new(v).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn classes_balance(p in permutation(12)) {
        let c = classify(&p);
        let n = p.n();
        prop_assert_eq!(c.peaks.len(), c.valleys.len());
        prop_assert_eq!(c.peaks.len() + c.valleys.len() + c.slopes.len() + c.ladders.len(), n);
        let d = c.degree();
        prop_assert!(d != 1);
        prop_assert!(2 * (c.valleys.len() + c.slopes.len()) >= d);
    }

    #[test]
    fn inverse_permutation_inverts_the_matrix(p in permutation(10)) {
        prop_assert!(build_matrix(&p.inverse()).is_inverse_of(&build_matrix(&p)));
    }

    #[test]
    fn sampled_minors_are_unimodular(p in permutation(12), seed in any::<u64>()) {
        let m = build_matrix(&p);
        let r = check_unimodular(&m, 4, seed);
        prop_assert!(r.unimodular, "{:?}", r.witness);
    }

    #[test]
    fn matrix_image_satisfies_the_delta_constraints(
        p in permutation(9),
        raw in prop::collection::vec(-5.0f64..5.0, 30),
    ) {
        let n = p.n();
        let loops: Vec<Vec<f64>> = (0..=n).map(|j| vec![raw[3 * j], raw[3 * j + 1], raw[3 * j + 2]]).collect();
        let tree = build_matrix(&p).apply(&loops).unwrap();
        prop_assert!(delta_constraints_residual(&p, &loops, &tree).unwrap() < 1e-12);
    }

    #[test]
    fn wrap_lands_in_the_brillouin_zone(x in -100.0f64..100.0) {
        let y = wrap(x);
        prop_assert!((-std::f64::consts::PI..=std::f64::consts::PI).contains(&y));
        let turns = (x - y) / std::f64::consts::TAU;
        prop_assert!((turns - turns.round()).abs() < 1e-9);
    }
}

#[test]
fn a_perturbed_momentum_breaks_the_constraints() {
    let p = Permutation::new(vec![3, 1, 2]).unwrap();
    let loops: Vec<Vec<f64>> = (0..4).map(|j| vec![j as f64, 0.5 * j as f64]).collect();
    let mut tree = build_matrix(&p).apply(&loops).unwrap();
    tree[1][0] += 1e-3;
    assert!(delta_constraints_residual(&p, &loops, &tree).unwrap() > 5e-4);
}

#[test]
fn geometric_partial_sums_converge() {
    for b in [-3.0, 2.0, 4.5] {
        let b = Complex64::new(b, 0.2);
        let (s, c) = (geometric_partial_sum(b, 0.1, 200), geometric_closed_form(b, 0.1));
        assert_relative_eq!(s.re, c.re, max_relative = 1e-10);
        assert_relative_eq!(s.im, c.im, max_relative = 1e-10);
    }
}

#[test]
fn evolution_is_unitary_for_both_laws() {
    let lat = LatticeBox::new(1, 32).unwrap();
    for law in [PotentialLaw::Bernoulli, PotentialLaw::Uniform] {
        let h = build_hamiltonian(lat, 0.5, law, 3).unwrap();
        let psi = evolve(&h, &WaveFunction::delta(lat, 0), 7.0).unwrap();
        assert_relative_eq!(psi.norm(), 1.0, epsilon = 1e-12);
    }
}
