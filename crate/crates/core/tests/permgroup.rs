mod common;

use common::{ginibre, max_abs};
use isotwirl::ensembles::substream;
use isotwirl::linalg::kron_all;
use isotwirl::permgroup::*;
use proptest::prelude::*;

fn pick(n: usize, i: usize) -> Permutation {
    let g = enumerate_group(n).unwrap();
    g[i % g.len()].clone()
}

#[test]
fn group_enumeration() {
    for (n, size) in [(1usize, 1usize), (2, 2), (3, 6), (4, 24), (5, 120), (8, 40320)] {
        let g = enumerate_group(n).unwrap();
        assert_eq!(g.len(), size);
        assert!(g[0].is_identity());
        let set: std::collections::HashSet<_> = g.iter().cloned().collect();
        assert_eq!(set.len(), size);
    }
    assert_eq!(enumerate_group(4).unwrap(), enumerate_group(4).unwrap());
    assert!(enumerate_group(9).is_err());
    assert!(enumerate_group(0).is_err());
}

#[test]
fn composition_applies_right_factor_first() {
    let a = Permutation::parse(3, "(12)").unwrap();
    let b = Permutation::parse(3, "(23)").unwrap();
    let ab = compose(&a, &b).unwrap();
    // b sends 2 → 3, a fixes 3.
    assert_eq!(ab.image(1), 2);
    assert_eq!(ab, Permutation::parse(3, "(123)").unwrap());
    assert!(compose(&a, &Permutation::identity(4)).is_err());
}

#[test]
fn weingarten_delta_identity() {
    for n in 2..=4usize {
        for d in n..=8 {
            let t = weingarten(n, d).unwrap();
            let r = t.delta_residual().unwrap();
            assert!(r < 1e-10, "n={n} d={d}: {r}");
        }
    }
}

#[test]
fn gram_entries_are_trace_powers() {
    let t = gram_matrix(3, 5).unwrap();
    for (i, p) in t.elements.iter().enumerate() {
        for (j, s) in t.elements.iter().enumerate() {
            assert_eq!(t.omega[(i, j)], trace_power(&compose(p, s).unwrap(), 5));
        }
    }
    assert!(weingarten(4, 3).is_err());
}

#[test]
fn weingarten_values_for_two_copies() {
    let d = 3.0;
    let t = weingarten(2, 3).unwrap();
    let e = Permutation::identity(2);
    let s = Permutation::parse(2, "(12)").unwrap();
    assert!((t.wg(&e, &e).unwrap() - 1.0 / (d * d - 1.0)).abs() < 1e-14);
    assert!((t.wg(&e, &s).unwrap() + 1.0 / (d * (d * d - 1.0))).abs() < 1e-14);
}

#[test]
fn dense_guard() {
    let p = Permutation::identity(5);
    assert!(permutation_matrix(&p, 6).is_err());
}

proptest! {
    #[test]
    fn permutation_matrices_form_a_representation(n in 2usize..=4, d in 1usize..=3, i in 0usize..24, j in 0usize..24) {
        let (p, s) = (pick(n, i), pick(n, j));
        let lhs = permutation_matrix(&p, d).unwrap() * permutation_matrix(&s, d).unwrap();
        let rhs = permutation_matrix(&compose(&p, &s).unwrap(), d).unwrap();
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn trace_of_permutation_matrix(n in 1usize..=4, d in 1usize..=3, i in 0usize..24) {
        let p = pick(n, i);
        let tr = permutation_matrix(&p, d).unwrap().trace();
        prop_assert_eq!(tr.re, trace_power(&p, d));
        prop_assert_eq!(tr.re, (d as f64).powi(cycle_count(&p) as i32));
        prop_assert_eq!(tr.im, 0.0);
    }

    #[test]
    fn permuted_trace_matches_dense(n in 1usize..=4, d in 1usize..=3, i in 0usize..24, seed in any::<u64>()) {
        let p = pick(n, i);
        let mut rng = substream(seed, 0);
        let ops: Vec<_> = (0..n).map(|_| ginibre(d, &mut rng)).collect();
        let fast = permuted_trace(&p, &ops).unwrap();
        let dense = (permutation_matrix(&p, d).unwrap() * kron_all(&ops)).trace();
        let scale = ops.iter().map(max_abs).product::<f64>() * (d as f64).powi(n as i32);
        prop_assert!((fast - dense).norm() <= 1e-10 * scale.max(1.0), "{} vs {}", fast, dense);
        let td = trace_with_dense(&p, d, &kron_all(&ops)).unwrap();
        prop_assert!((td - dense).norm() <= 1e-10 * scale.max(1.0));
    }

    #[test]
    fn group_laws(n in 1usize..=5, i in 0usize..120, j in 0usize..120, k in 0usize..120) {
        let (a, b, c) = (pick(n, i), pick(n, j), pick(n, k));
        let ab_c = compose(&compose(&a, &b).unwrap(), &c).unwrap();
        let a_bc = compose(&a, &compose(&b, &c).unwrap()).unwrap();
        prop_assert_eq!(ab_c, a_bc);
        prop_assert!(compose(&a, &a.inverse()).unwrap().is_identity());
        prop_assert_eq!(cycle_count(&a), cycle_count(&a.inverse()));
    }

    #[test]
    fn cycle_notation_round_trip(n in 1usize..=6, i in 0usize..720) {
        let p = pick(n, i);
        let text = p.to_string();
        prop_assert_eq!(Permutation::parse(n, &text).unwrap(), p.clone());
        let total: usize = p.cycles().iter().map(|c| c.len()).sum();
        prop_assert_eq!(total, n);
    }
}
