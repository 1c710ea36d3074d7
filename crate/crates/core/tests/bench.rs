mod common;

use common::{conjugate, hermitian, rng, unitary};
use opcalc::bench::{
    lipschitz_measures, run_crossvalidation, run_lipschitz_trace, run_opnorm_blowup, BlowupConfig,
    CrossValidationConfig, LipschitzConfig,
};
use opcalc::besov::besov_norm_estimate;
use opcalc::ensemble::{random_low_rank_hermitian, random_real_trig_poly};
use opcalc::functions::Function2D;
use proptest::prelude::*;
use std::f64::consts::PI;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn ratios_are_conjugation_invariant(seed in any::<u64>(), n in 2usize..8) {
        let mut r = rng(seed);
        let p = random_real_trig_poly(&mut r, 4, 1.0);
        let besov = besov_norm_estimate(&p);
        let f = Function2D::from(p);
        let (a1, b1) = (hermitian(&mut r, n), hermitian(&mut r, n));
        let a2 = a1.add(&random_low_rank_hermitian(&mut r, n, 1).scale(1e-2)).unwrap();
        let b2 = b1.add(&random_low_rank_hermitian(&mut r, n, n).scale(1e-2)).unwrap();
        let w = unitary(&mut r, n);
        let plain = lipschitz_measures(&f, &a1, &a2, &b1, &b2).unwrap();
        let moved = lipschitz_measures(
            &f,
            &conjugate(&a1, &w),
            &conjugate(&a2, &w),
            &conjugate(&b1, &w),
            &conjugate(&b2, &w),
        ).unwrap();
        let ratio = |m: &opcalc::bench::LipschitzMeasures| m.delta_f / ((m.delta_a + m.delta_b) * besov);
        prop_assert!((ratio(&plain) - ratio(&moved)).abs() <= 1e-9 * ratio(&plain));
        prop_assert!(plain.split_residual <= 1e-9 * plain.delta_f.max(1.0));
    }
}

#[test]
fn lipschitz_trace_is_deterministic() {
    let config = LipschitzConfig {
        trials: 9,
        n: 8,
        degree: 4,
        seed: 12,
        ..LipschitzConfig::default()
    };
    let first = run_lipschitz_trace(&config).unwrap();
    let second = run_lipschitz_trace(&config).unwrap();
    assert_eq!(first, second);
    assert!(first.max_ratio() > 0.0 && first.max_ratio().is_finite());
    let other = run_lipschitz_trace(&LipschitzConfig { seed: 13, ..config }).unwrap();
    assert_ne!(first, other);
}

#[test]
fn lipschitz_trace_validates_its_config() {
    for config in [
        LipschitzConfig {
            n: 0,
            ..LipschitzConfig::default()
        },
        LipschitzConfig {
            n: 65,
            ..LipschitzConfig::default()
        },
        LipschitzConfig {
            degree: 17,
            ..LipschitzConfig::default()
        },
        LipschitzConfig {
            epsilon: 0.0,
            ..LipschitzConfig::default()
        },
        LipschitzConfig {
            epsilon: f64::NAN,
            ..LipschitzConfig::default()
        },
    ] {
        assert!(run_lipschitz_trace(&config).is_err(), "{config:?}");
    }
    let empty = run_lipschitz_trace(&LipschitzConfig {
        trials: 0,
        ..LipschitzConfig::default()
    })
    .unwrap();
    assert!(empty.trials.is_empty());
    assert_eq!(empty.max_ratio(), 0.0);
}

#[test]
fn blowup_columns() {
    let config = BlowupConfig {
        sizes: BlowupConfig::powers_of_two(32),
        ..BlowupConfig::default()
    };
    let report = run_opnorm_blowup(&config).unwrap();
    assert_eq!(report, run_opnorm_blowup(&config).unwrap());
    assert_eq!(report.rows.len(), 6);
    let sup = report.rows[1].sup_norm;
    for row in &report.rows {
        assert!((row.perturbation - 2.0 * PI).abs() <= 1e-10);
        assert!((row.lipschitz_ratio - row.witness_ratio / (2.0 * PI)).abs() <= 1e-9);
        if row.n > 1 {
            assert!(row.sup_norm <= sup * (1.0 + 1e-12) && row.sup_norm > 0.0);
        }
    }
    assert!(report.monotone());
    assert!(report.growth_contract_held());
    let holder: Vec<f64> = report.rows.iter().map(|r| r.holder_ratio(0.5)).collect();
    assert!(holder.windows(2).all(|w| w[1] >= w[0] - 1e-9));
    assert!(holder[5] > 1.5 * holder[1]);
}

#[test]
fn crossvalidation_passes_and_fails_on_demand() {
    let summary = run_crossvalidation(&CrossValidationConfig::default());
    let failed: Vec<_> = summary.failures().map(|c| c.name).collect();
    assert!(summary.passed(), "{failed:?}");
    let strict = run_crossvalidation(&CrossValidationConfig {
        tolerance_override: Some(1e-15),
        ..CrossValidationConfig::default()
    });
    assert!(!strict.passed());
    assert!(strict.failures().any(|c| c.name == "sincrep.expansion"));
}
