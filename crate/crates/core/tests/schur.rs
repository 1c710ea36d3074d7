mod common;

use common::{c, max_diff, rng};
use num_complex::Complex64;
use opcalc::doi::eval_f_ab;
use opcalc::ensemble::{random_complex_matrix, random_contraction, random_vector};
use opcalc::linalg::{norm2, operator_norm, ComplexMatrix};
use opcalc::schur::{
    build_counterexample, hilbert_witness, realize_systems, schur_norm_lower_bound,
    triangular_truncation,
};
use proptest::prelude::*;
use rand::Rng;
use std::f64::consts::PI;

/// Upper bounds on the Schur norm: `‖τ‖`, the largest row norm and the largest column norm.
fn analytic_upper(tau: &ComplexMatrix) -> f64 {
    let rows = (0..tau.rows())
        .map(|i| norm2(tau.row(i)))
        .fold(0.0, f64::max);
    let cols = (0..tau.cols())
        .map(|j| norm2(&tau.column(j)))
        .fold(0.0, f64::max);
    operator_norm(tau).min(rows).min(cols)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn witnesses_respect_upper_bounds(seed in any::<u64>(), rows in 1usize..7, cols in 1usize..7) {
        let mut r = rng(seed);
        let tau = random_complex_matrix(&mut r, rows, cols);
        let w = schur_norm_lower_bound(&tau, 2, 200, r.gen());
        prop_assert!(w.ratio <= analytic_upper(&tau) * (1.0 + 1e-10));
        prop_assert!(w.ratio >= tau.max_abs() * (1.0 - 1e-10));
        prop_assert!(operator_norm(&w.m) <= 1.0 + 1e-12);
        prop_assert!((operator_norm(&tau.hadamard(&w.m).unwrap()) - w.ratio).abs() <= 1e-10 * (1.0 + w.ratio));
    }

    #[test]
    fn rank_one_multipliers_are_exact(seed in any::<u64>(), n in 1usize..9) {
        let mut r = rng(seed);
        let (a, b) = (random_vector(&mut r, n), random_vector(&mut r, n));
        let tau = ComplexMatrix::from_fn(n, n, |j, k| a[j] * b[k].conj());
        let exact = tau.max_abs();
        let w = schur_norm_lower_bound(&tau, 2, 500, r.gen());
        prop_assert!(w.ratio <= exact * (1.0 + 1e-10));
        prop_assert!(w.ratio >= exact * (1.0 - 1e-6));
    }

    #[test]
    fn realization_reproduces_the_pairing(seed in any::<u64>(), n in 1usize..7, target in 0.1..0.999f64) {
        let mut r = rng(seed);
        let m = random_contraction(&mut r, n, target);
        let s = realize_systems(&m).unwrap();
        let eye = ComplexMatrix::identity(n);
        prop_assert!(max_diff(&s.f.adjoint_matmul(&s.f).unwrap(), &eye) <= 1e-10);
        prop_assert!(max_diff(&s.g.adjoint_matmul(&s.g).unwrap(), &eye) <= 1e-10);
        prop_assert!(max_diff(&s.pairing(), &m) <= 1e-10);
    }

    #[test]
    fn counterexample_identities(seed in any::<u64>(), n in 1usize..7) {
        let mut r = rng(seed);
        let m = random_contraction(&mut r, n, 0.9);
        let tau = random_complex_matrix(&mut r, n, n);
        let tau = tau.scale_real(1.0 / tau.max_abs());
        let inst = build_counterexample(n, &tau, &m).unwrap();
        let f1 = eval_f_ab(&inst.f, &inst.a1, &inst.b).unwrap().value;
        let f2 = eval_f_ab(&inst.f, &inst.a2, &inst.b).unwrap().value;
        prop_assert!(operator_norm(&f2) <= 1e-10);
        prop_assert!(operator_norm(&f1.sub(&inst.target()).unwrap()) <= 1e-10);
        let gap = operator_norm(inst.a1.sub(&inst.a2).unwrap().as_matrix());
        prop_assert!((gap - 2.0 * PI).abs() <= 1e-10);
        let schur = operator_norm(&tau.hadamard(&m).unwrap());
        let ratio = operator_norm(&f1.sub(&f2).unwrap()) / gap;
        prop_assert!((ratio - schur / (2.0 * PI)).abs() <= 1e-10);
    }
}

/// Best `‖τ∘(x y*)‖` over unimodular `x, y` with entries in `{±1, ±i}/√n`.
fn corner_search(tau: &ComplexMatrix) -> f64 {
    let n = tau.rows();
    let units = [c(1.0), c(-1.0), Complex64::i(), -Complex64::i()];
    let vectors: Vec<Vec<Complex64>> = (0..4usize.pow(n as u32))
        .map(|code| {
            (0..n)
                .map(|i| units[(code >> (2 * i)) & 3] / (n as f64).sqrt())
                .collect()
        })
        .collect();
    let mut best: f64 = 0.0;
    for x in &vectors {
        for y in &vectors {
            let m = ComplexMatrix::outer(x, y);
            best = best.max(operator_norm(&tau.hadamard(&m).unwrap()));
        }
    }
    best
}

#[test]
fn ascent_beats_corner_search() {
    let mut r = rng(21);
    for n in 2..=4 {
        for tau in [
            triangular_truncation(n),
            random_complex_matrix(&mut r, n, n),
        ] {
            let corners = corner_search(&tau);
            let w = schur_norm_lower_bound(&tau, 4, 300, 5);
            assert!(
                w.ratio >= corners * (1.0 - 1e-9),
                "n={n}: {} < {corners}",
                w.ratio
            );
            assert!(w.ratio <= analytic_upper(&tau) * (1.0 + 1e-10));
        }
    }
}

#[test]
fn two_by_two_truncation_has_norm_one() {
    let tau = triangular_truncation(2);
    let w = schur_norm_lower_bound(&tau, 2, 200, 0);
    assert!((w.ratio - 1.0).abs() <= 1e-12);
    let mut r = rng(8);
    let mut best: f64 = 0.0;
    for _ in 0..20_000 {
        let m = random_contraction(&mut r, 2, 1.0);
        best = best.max(operator_norm(&tau.hadamard(&m).unwrap()));
    }
    assert!(best <= 1.0 + 1e-12);
    assert!(best >= 0.9);
}

#[test]
fn truncation_witnesses_grow() {
    let ratios: Vec<f64> = [4, 8, 16, 32, 64]
        .iter()
        .map(|&n| schur_norm_lower_bound(&triangular_truncation(n), 0, 200, 0).ratio)
        .collect();
    assert!(ratios.windows(2).all(|w| w[1] >= w[0] - 1e-9), "{ratios:?}");
    assert!(ratios[4] > ratios[0] + 0.5);
}

#[test]
fn hilbert_witness_stays_below_pi() {
    for n in [1, 8, 64, 200] {
        assert!(operator_norm(&hilbert_witness(n)) <= PI * (1.0 + 1e-12));
    }
}

#[test]
fn bad_inputs_are_rejected() {
    let m = random_contraction(&mut rng(1), 3, 0.5);
    assert!(matches!(
        build_counterexample(3, &triangular_truncation(2), &m),
        Err(opcalc::Error::BadShape { .. })
    ));
    assert!(matches!(
        build_counterexample(3, &triangular_truncation(3).scale_real(2.0), &m),
        Err(opcalc::Error::InvalidArgument(_))
    ));
    assert!(matches!(
        realize_systems(&m.scale_real(3.0)),
        Err(opcalc::Error::NotContraction { .. })
    ));
}
