//! Seeded experiment suites: trace-norm Lipschitz ratios, the operator-norm
//! blowup family, and cross-validation of the independent evaluation paths.
//!
//! Every suite is a pure function of its configuration. Trials run on the
//! rayon pool and are sorted by seed before they are reported.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::besov::{besov_norm_estimate, lp_decompose, projective_tensor_bound};
use crate::doi::{functional_calculus, product_split_check};
use crate::ensemble::{
    random_band_limited, random_contraction, random_hermitian, random_hermitian_in_window,
    random_low_rank_hermitian, random_trig_poly,
};
use crate::error::{Error, Result};
use crate::functions::{Bivariate, Function2D};
use crate::linalg::{
    eig_hermitian, operator_norm, schatten_1, ComplexMatrix, HermitianMatrix, SpectralDecomposition,
};
use crate::oracle::{projector_double_sum, projector_triple_sum};
use crate::schur::{
    build_counterexample, realize_systems, schur_norm_lower_bound, triangular_truncation,
};
use crate::sincrep::{
    expand_divided_difference, partition_deficit, perturbation_a_spectral, perturbation_b_spectral,
    sinc_haagerup_rep, Axis, KernelPath, DEFAULT_TRUNCATION,
};
use crate::toi::{s1_bound_check, toi_direct, toi_haagerup, toi_trace_duality_check};

fn rng_for(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn relative(residual: f64, scale: f64) -> f64 {
    if scale > 0.0 {
        residual / scale
    } else {
        residual
    }
}

// ---------------------------------------------------------------------------
// Trace-norm Lipschitz ratios

#[derive(Debug, Clone, PartialEq)]
pub struct LipschitzConfig {
    pub trials: usize,
    pub n: usize,
    pub degree: i32,
    pub seed: u64,
    /// Trace norm of each perturbation.
    pub epsilon: f64,
    /// Frequency step of the random polynomials.
    pub omega: f64,
    /// Spectra of `A1` and `B1` fill `[−half_width, half_width]`.
    pub half_width: f64,
}

impl LipschitzConfig {
    pub const MAX_DIMENSION: usize = 64;
    pub const MAX_DEGREE: i32 = 16;
}

impl Default for LipschitzConfig {
    fn default() -> Self {
        Self {
            trials: 200,
            n: 16,
            degree: 8,
            seed: 0,
            epsilon: 1e-2,
            omega: 1.0,
            half_width: PI,
        }
    }
}

/// Trace norms measured on one perturbed pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LipschitzMeasures {
    pub delta_a: f64,
    pub delta_b: f64,
    /// `‖f(A1,B1) − f(A2,B2)‖_S1`.
    pub delta_f: f64,
    /// `‖f(A1,B1) − f(A2,B1)‖_S1` by the A-side triple integral.
    pub a_step: f64,
    /// `‖f(A2,B1) − f(A2,B2)‖_S1` by the B-side triple integral.
    pub b_step: f64,
    /// `‖A-step + B-step − Δf‖_S1`.
    pub split_residual: f64,
}

/// Measures `f(A1,B1) − f(A2,B2)` directly and through the two one-sided steps.
pub fn lipschitz_measures(
    f: &Function2D,
    a1: &HermitianMatrix,
    a2: &HermitianMatrix,
    b1: &HermitianMatrix,
    b2: &HermitianMatrix,
) -> Result<LipschitzMeasures> {
    let n = a1.dim();
    for (context, m) in [("A2", a2), ("B1", b1), ("B2", b2)] {
        if m.dim() != n {
            return Err(Error::DimensionMismatch {
                context,
                left: n,
                right: m.dim(),
            });
        }
    }
    let (da1, da2, db1, db2) = (
        eig_hermitian(a1),
        eig_hermitian(a2),
        eig_hermitian(b1),
        eig_hermitian(b2),
    );
    let delta_a = a1.as_matrix().sub(a2.as_matrix())?;
    let delta_b = b1.as_matrix().sub(b2.as_matrix())?;
    let f11 = functional_calculus(f, &da1, &db1)?.value;
    let f22 = functional_calculus(f, &da2, &db2)?.value;
    let diff = f11.sub(&f22)?;
    let a_step = perturbation_a_spectral(f, KernelPath::Exact, &da1, &delta_a, &da2, &db1)?;
    let b_step = perturbation_b_spectral(f, KernelPath::Exact, &da2, &db1, &delta_b, &db2)?;
    let split = a_step.add(&b_step)?.sub(&diff)?;
    Ok(LipschitzMeasures {
        delta_a: schatten_1(&delta_a),
        delta_b: schatten_1(&delta_b),
        delta_f: schatten_1(&diff),
        a_step: schatten_1(&a_step),
        b_step: schatten_1(&b_step),
        split_residual: schatten_1(&split),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct PerturbTrial {
    pub seed: u64,
    pub n: usize,
    /// Rank of both perturbations.
    pub rank: usize,
    pub measures: LipschitzMeasures,
    pub besov: f64,
    /// `‖Δf‖_S1 / ((‖ΔA‖_S1 + ‖ΔB‖_S1) · besov)`.
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PerturbReport {
    pub config: LipschitzConfig,
    pub trials: Vec<PerturbTrial>,
}

impl PerturbReport {
    /// Empirical maximum of the ratio; not a certified constant.
    pub fn max_ratio(&self) -> f64 {
        self.trials.iter().map(|t| t.ratio).fold(0.0, f64::max)
    }

    pub fn max_split_residual(&self) -> f64 {
        self.trials
            .iter()
            .map(|t| relative(t.measures.split_residual, t.measures.delta_f))
            .fold(0.0, f64::max)
    }
}

fn lipschitz_ratio(m: &LipschitzMeasures, besov: f64) -> f64 {
    let denominator = (m.delta_a + m.delta_b) * besov;
    if m.delta_f == 0.0 || denominator == 0.0 {
        0.0
    } else {
        m.delta_f / denominator
    }
}

/// Rank of the perturbations in trial `index`: cycles through `1, n/4, n`.
pub fn perturbation_rank(index: usize, n: usize) -> usize {
    [1, (n / 4).max(1), n][index % 3]
}

fn lipschitz_trial(config: &LipschitzConfig, index: usize) -> Result<PerturbTrial> {
    let seed = config.seed.wrapping_add(index as u64);
    let mut rng = rng_for(seed);
    let n = config.n;
    let rank = perturbation_rank(index, n);
    let poly = random_trig_poly(&mut rng, config.degree, config.omega);
    let a1 = random_hermitian_in_window(&mut rng, n, config.half_width);
    let b1 = random_hermitian_in_window(&mut rng, n, config.half_width);
    let da = random_low_rank_hermitian(&mut rng, n, rank).scale(config.epsilon);
    let db = random_low_rank_hermitian(&mut rng, n, rank).scale(config.epsilon);
    let a2 = a1.add(&da)?;
    let b2 = b1.add(&db)?;
    let besov = besov_norm_estimate(&poly);
    let f = Function2D::from(poly);
    let measures = lipschitz_measures(&f, &a1, &a2, &b1, &b2)?;
    Ok(PerturbTrial {
        seed,
        n,
        rank,
        ratio: lipschitz_ratio(&measures, besov),
        measures,
        besov,
    })
}

/// Trial `i` uses seed `config.seed + i`; the random draws do not depend on
/// `epsilon`, so a sweep over magnitudes reuses the same functions, pairs and
/// perturbation directions.
pub fn run_lipschitz_trace(config: &LipschitzConfig) -> Result<PerturbReport> {
    if config.n == 0 || config.n > LipschitzConfig::MAX_DIMENSION {
        return Err(Error::InvalidArgument(format!(
            "dimension must lie in 1..={}, got {}",
            LipschitzConfig::MAX_DIMENSION,
            config.n
        )));
    }
    if !(0..=LipschitzConfig::MAX_DEGREE).contains(&config.degree) {
        return Err(Error::InvalidArgument(format!(
            "degree must lie in 0..={}, got {}",
            LipschitzConfig::MAX_DEGREE,
            config.degree
        )));
    }
    if !(config.epsilon.is_finite() && config.epsilon > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "perturbation magnitude must be positive, got {}",
            config.epsilon
        )));
    }
    let mut trials = (0..config.trials)
        .into_par_iter()
        .map(|i| lipschitz_trial(config, i))
        .collect::<Result<Vec<_>>>()?;
    trials.sort_by_key(|t| t.seed);
    Ok(PerturbReport {
        config: config.clone(),
        trials,
    })
}

// ---------------------------------------------------------------------------
// Operator-norm blowup

#[derive(Debug, Clone, PartialEq)]
pub struct BlowupRow {
    pub n: usize,
    /// `‖τ∘M‖` for the best witness `M`.
    pub witness_ratio: f64,
    /// `‖f(A1,B) − f(A2,B)‖`.
    pub difference: f64,
    /// `‖A1 − A2‖`.
    pub perturbation: f64,
    /// `difference / (‖A1 − A2‖ + ‖B − B‖)`.
    pub lipschitz_ratio: f64,
    /// `witness_ratio / ln N`; zero for `N = 1`.
    pub ratio_per_log: f64,
    /// Upper sup-norm estimate of the lattice function.
    pub sup_norm: f64,
}

impl BlowupRow {
    /// `‖f(A1,B) − f(A2,B)‖ / ‖A1 − A2‖^α`.
    pub fn holder_ratio(&self, alpha: f64) -> f64 {
        self.difference / self.perturbation.powf(alpha)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BlowupReport {
    pub rows: Vec<BlowupRow>,
}

impl BlowupReport {
    /// Witness ratios are nondecreasing in `N`.
    pub fn monotone(&self) -> bool {
        self.rows
            .windows(2)
            .all(|w| w[1].witness_ratio >= w[0].witness_ratio * (1.0 - 1e-9))
    }

    /// Monotone, and strictly larger at the largest `N` than at the smallest.
    pub fn growth_contract_held(&self) -> bool {
        let grows = match (self.rows.first(), self.rows.last()) {
            (Some(a), Some(b)) if self.rows.len() > 1 => b.witness_ratio > a.witness_ratio,
            _ => true,
        };
        self.monotone() && grows
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BlowupConfig {
    pub sizes: Vec<usize>,
    pub restarts: usize,
    pub iters: usize,
    pub seed: u64,
}

impl BlowupConfig {
    pub const MAX_SIZE: usize = 256;

    /// Sizes `1, 2, 4, …` up to `n_max`, with `n_max` itself appended.
    pub fn powers_of_two(n_max: usize) -> Vec<usize> {
        let mut sizes: Vec<usize> = std::iter::successors(Some(1usize), |&n| n.checked_mul(2))
            .take_while(|&n| n <= n_max)
            .collect();
        if n_max >= 1 && sizes.last() != Some(&n_max) {
            sizes.push(n_max);
        }
        sizes
    }
}

impl Default for BlowupConfig {
    fn default() -> Self {
        Self {
            sizes: Self::powers_of_two(Self::MAX_SIZE),
            restarts: 0,
            iters: 200,
            seed: 0,
        }
    }
}

fn blowup_row(n: usize, config: &BlowupConfig) -> Result<BlowupRow> {
    let tau = triangular_truncation(n);
    let witness = schur_norm_lower_bound(&tau, config.restarts, config.iters, config.seed);
    let instance = build_counterexample(n, &tau, &witness.m)?;
    let db = eig_hermitian(&instance.b);
    let f1 = functional_calculus(&instance.f, &eig_hermitian(&instance.a1), &db)?.value;
    let f2 = functional_calculus(&instance.f, &eig_hermitian(&instance.a2), &db)?.value;
    let difference = operator_norm(&f1.sub(&f2)?);
    let perturbation = operator_norm(instance.a1.sub(&instance.a2)?.as_matrix());
    let log = (n as f64).ln();
    Ok(BlowupRow {
        n,
        witness_ratio: witness.ratio,
        difference,
        perturbation,
        lipschitz_ratio: difference / perturbation,
        ratio_per_log: if log > 0.0 { witness.ratio / log } else { 0.0 },
        sup_norm: instance.f.sup_norm_estimate().upper,
    })
}

/// One row per size, in increasing `N`.
pub fn run_opnorm_blowup(config: &BlowupConfig) -> Result<BlowupReport> {
    let mut sizes = config.sizes.clone();
    sizes.sort_unstable();
    sizes.dedup();
    if let Some(&n) = sizes
        .iter()
        .find(|&&n| n == 0 || n > BlowupConfig::MAX_SIZE)
    {
        return Err(Error::InvalidArgument(format!(
            "sizes must lie in 1..={}, got {n}",
            BlowupConfig::MAX_SIZE
        )));
    }
    let rows = sizes
        .iter()
        .map(|&n| blowup_row(n, config))
        .collect::<Result<Vec<_>>>()?;
    Ok(BlowupReport { rows })
}

// ---------------------------------------------------------------------------
// Cross-validation

#[derive(Debug, Clone, PartialEq)]
pub struct CrossValidationConfig {
    pub seed: u64,
    /// Replaces every per-check tolerance when set.
    pub tolerance_override: Option<f64>,
    /// Truncation `J` of the sinc checks.
    pub truncation: usize,
}

impl Default for CrossValidationConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            tolerance_override: None,
            truncation: DEFAULT_TRUNCATION,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckOutcome {
    pub name: &'static str,
    pub seed: u64,
    pub residual: f64,
    pub tolerance: f64,
    pub passed: bool,
    /// Error text when the check could not be evaluated.
    pub error: Option<String>,
}

impl CheckOutcome {
    /// The module prefix of the check name.
    pub fn module(&self) -> &'static str {
        self.name.split('.').next().unwrap_or(self.name)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CrossValidationSummary {
    pub checks: Vec<CheckOutcome>,
}

impl CrossValidationSummary {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &CheckOutcome> {
        self.checks.iter().filter(|c| !c.passed)
    }
}

type CheckFn = fn(&mut ChaCha8Rng, usize) -> Result<f64>;

struct Check {
    name: &'static str,
    /// `None` means the tolerance depends on `J` and is `2/(πJ)`.
    tolerance: Option<f64>,
    run: CheckFn,
}

const CHECKS: &[Check] = &[
    Check {
        name: "doi.projector_sum",
        tolerance: Some(1e-10),
        run: check_doi_projector,
    },
    Check {
        name: "doi.product_split",
        tolerance: Some(1e-10),
        run: check_doi_product,
    },
    Check {
        name: "toi.projector_sum",
        tolerance: Some(1e-10),
        run: check_toi_projector,
    },
    Check {
        name: "toi.haagerup_direct",
        tolerance: Some(1e-10),
        run: check_toi_haagerup,
    },
    Check {
        name: "toi.trace_duality",
        tolerance: Some(1e-9),
        run: check_toi_duality,
    },
    Check {
        name: "toi.s1_bound",
        tolerance: Some(1e-9),
        run: check_toi_s1_bound,
    },
    Check {
        name: "sincrep.formula_a_exact",
        tolerance: Some(1e-8),
        run: check_formula_a_exact,
    },
    Check {
        name: "sincrep.formula_b_exact",
        tolerance: Some(1e-8),
        run: check_formula_b_exact,
    },
    Check {
        name: "sincrep.formula_a_sinc",
        tolerance: Some(1e-3),
        run: check_formula_a_sinc,
    },
    Check {
        name: "sincrep.formula_b_sinc",
        tolerance: Some(1e-3),
        run: check_formula_b_sinc,
    },
    Check {
        name: "sincrep.partition_of_unity",
        tolerance: None,
        run: check_partition,
    },
    Check {
        name: "sincrep.expansion",
        tolerance: Some(1e-3),
        run: check_expansion,
    },
    Check {
        name: "besov.lp_reconstruction",
        tolerance: Some(0.0),
        run: check_lp_reconstruction,
    },
    Check {
        name: "besov.projective_bound",
        tolerance: Some(1e-9),
        run: check_projective,
    },
    Check {
        name: "schur.realization",
        tolerance: Some(1e-10),
        run: check_realization,
    },
    Check {
        name: "schur.counterexample",
        tolerance: Some(1e-10),
        run: check_counterexample,
    },
    Check {
        name: "schur.rank_one_witness",
        tolerance: Some(1e-6),
        run: check_rank_one,
    },
];

/// Names of the checks run by [`run_crossvalidation`], in order.
pub fn crossvalidation_checks() -> Vec<&'static str> {
    CHECKS.iter().map(|c| c.name).collect()
}

/// Check `i` draws from its own generator seeded with `seed + i`.
pub fn run_crossvalidation(config: &CrossValidationConfig) -> CrossValidationSummary {
    let checks = CHECKS
        .par_iter()
        .enumerate()
        .map(|(i, check)| {
            let seed = config.seed.wrapping_add(i as u64);
            let tolerance = config.tolerance_override.unwrap_or(
                check
                    .tolerance
                    .unwrap_or(2.0 / (PI * config.truncation.max(1) as f64)),
            );
            let mut rng = rng_for(seed);
            match (check.run)(&mut rng, config.truncation) {
                Ok(residual) => CheckOutcome {
                    name: check.name,
                    seed,
                    residual,
                    tolerance,
                    passed: residual.is_finite() && residual <= tolerance,
                    error: None,
                },
                Err(e) => CheckOutcome {
                    name: check.name,
                    seed,
                    residual: f64::NAN,
                    tolerance,
                    passed: false,
                    error: Some(e.to_string()),
                },
            }
        })
        .collect();
    CrossValidationSummary { checks }
}

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

fn smooth_kernel(x1: f64, x2: f64, x3: f64) -> Complex64 {
    Complex64::cis(x1 - 2.0 * x2 + 0.5 * x3) / (1.0 + x1 * x1 + 0.5 * x2 * x2 + x3 * x3)
}

fn eig_random(rng: &mut ChaCha8Rng, n: usize) -> SpectralDecomposition {
    eig_hermitian(&random_hermitian(rng, n))
}

fn check_doi_projector(rng: &mut ChaCha8Rng, _: usize) -> Result<f64> {
    let (da, db) = (eig_random(rng, 5), eig_random(rng, 5));
    let f = random_trig_poly(rng, 3, 0.7);
    let fast = functional_calculus(&f, &da, &db)?.value;
    let slow = projector_double_sum(|x, y| f.eval(x, y), &da, &db);
    Ok(fast.sub(&slow)?.max_abs())
}

fn check_doi_product(rng: &mut ChaCha8Rng, _: usize) -> Result<f64> {
    let (a, b) = (random_hermitian(rng, 6), random_hermitian(rng, 6));
    product_split_check(Complex64::cis, |y| c(y.cos() + y * y), &a, &b)
}

fn check_toi_projector(rng: &mut ChaCha8Rng, _: usize) -> Result<f64> {
    let (d1, d2, d3) = (eig_random(rng, 5), eig_random(rng, 5), eig_random(rng, 5));
    let t = random_hermitian(rng, 5).into_matrix();
    let r = crate::ensemble::random_complex_matrix(rng, 5, 5);
    let fast = toi_direct(&smooth_kernel, &d1, &t, &d2, &r, &d3)?;
    let slow = projector_triple_sum(smooth_kernel, &d1, &t, &d2, &r, &d3);
    Ok(fast.sub(&slow)?.max_abs())
}

fn band_one(rng: &mut ChaCha8Rng) -> Function2D {
    Function2D::from(random_band_limited(rng, 3, 1.0, false))
}

fn check_toi_haagerup(rng: &mut ChaCha8Rng, truncation: usize) -> Result<f64> {
    let f = band_one(rng);
    let truncation = truncation.min(32);
    let mut worst: f64 = 0.0;
    for axis in [Axis::X, Axis::Y] {
        let rep = sinc_haagerup_rep(&f, axis, 1.0, truncation)?;
        let (d1, d2, d3) = (eig_random(rng, 5), eig_random(rng, 5), eig_random(rng, 5));
        let t = crate::ensemble::random_complex_matrix(rng, 5, 5);
        let r = crate::ensemble::random_complex_matrix(rng, 5, 5);
        let via_rep = toi_haagerup(&rep, &d1, &t, &d2, &r, &d3)?;
        let kernel = |a: f64, b: f64, x: f64| rep.eval(a, b, x);
        let direct = toi_direct(&kernel, &d1, &t, &d2, &r, &d3)?;
        worst = worst.max(relative(via_rep.sub(&direct)?.max_abs(), direct.max_abs()));
    }
    Ok(worst)
}

fn check_toi_duality(rng: &mut ChaCha8Rng, _: usize) -> Result<f64> {
    let (d1, d2, d3) = (eig_random(rng, 5), eig_random(rng, 4), eig_random(rng, 6));
    let t = crate::ensemble::random_complex_matrix(rng, 5, 4);
    let r = crate::ensemble::random_complex_matrix(rng, 4, 6);
    let q = crate::ensemble::random_complex_matrix(rng, 6, 5);
    toi_trace_duality_check(&smooth_kernel, &d1, &t, &d2, &r, &d3, &q)
}

fn check_toi_s1_bound(rng: &mut ChaCha8Rng, truncation: usize) -> Result<f64> {
    let f = band_one(rng);
    let rep = sinc_haagerup_rep(&f, Axis::X, 1.0, truncation.min(64))?;
    let (d1, d2, d3) = (eig_random(rng, 6), eig_random(rng, 6), eig_random(rng, 6));
    let t = random_low_rank_hermitian(rng, 6, 2).into_matrix();
    let r = crate::ensemble::random_complex_matrix(rng, 6, 6);
    let check = s1_bound_check(&rep, &d1, &t, &d2, &r, &d3)?;
    Ok((check.lhs / check.rhs - 1.0).max(0.0))
}

struct SidePair {
    f: Function2D,
    fixed: HermitianMatrix,
    first: HermitianMatrix,
    second: HermitianMatrix,
}

fn side_pair(rng: &mut ChaCha8Rng) -> Result<SidePair> {
    let f = band_one(rng);
    let fixed = random_hermitian_in_window(rng, 6, 3.0);
    let first = random_hermitian_in_window(rng, 6, 3.0);
    let second = first.add(&random_hermitian(rng, 6).scale(0.3))?;
    Ok(SidePair {
        f,
        fixed,
        first,
        second,
    })
}

/// Relative residual of the A-side (or B-side) formula against the doi difference.
fn formula_residual(rng: &mut ChaCha8Rng, axis: Axis, path: KernelPath) -> Result<f64> {
    let p = side_pair(rng)?;
    let (d_fixed, d1, d2) = (
        eig_hermitian(&p.fixed),
        eig_hermitian(&p.first),
        eig_hermitian(&p.second),
    );
    let delta = p.first.as_matrix().sub(p.second.as_matrix())?;
    let (formula, reference) = match axis {
        Axis::X => (
            perturbation_a_spectral(&p.f, path, &d1, &delta, &d2, &d_fixed)?,
            functional_calculus(&p.f, &d1, &d_fixed)?
                .value
                .sub(&functional_calculus(&p.f, &d2, &d_fixed)?.value)?,
        ),
        Axis::Y => (
            perturbation_b_spectral(&p.f, path, &d_fixed, &d1, &delta, &d2)?,
            functional_calculus(&p.f, &d_fixed, &d1)?
                .value
                .sub(&functional_calculus(&p.f, &d_fixed, &d2)?.value)?,
        ),
    };
    Ok(relative(
        operator_norm(&formula.sub(&reference)?),
        operator_norm(&reference),
    ))
}

fn check_formula_a_exact(rng: &mut ChaCha8Rng, _: usize) -> Result<f64> {
    formula_residual(rng, Axis::X, KernelPath::Exact)
}

fn check_formula_b_exact(rng: &mut ChaCha8Rng, _: usize) -> Result<f64> {
    formula_residual(rng, Axis::Y, KernelPath::Exact)
}

fn check_formula_a_sinc(rng: &mut ChaCha8Rng, truncation: usize) -> Result<f64> {
    formula_residual(
        rng,
        Axis::X,
        KernelPath::Sinc {
            sigma: 1.0,
            truncation,
        },
    )
}

fn check_formula_b_sinc(rng: &mut ChaCha8Rng, truncation: usize) -> Result<f64> {
    formula_residual(
        rng,
        Axis::Y,
        KernelPath::Sinc {
            sigma: 1.0,
            truncation,
        },
    )
}

fn check_partition(_: &mut ChaCha8Rng, truncation: usize) -> Result<f64> {
    Ok((0..=2000)
        .map(|i| -10.0 + 0.01 * i as f64)
        .map(|x| partition_deficit(x, truncation, PI))
        .fold(0.0, f64::max))
}

fn check_expansion(rng: &mut ChaCha8Rng, truncation: usize) -> Result<f64> {
    let f = band_one(rng);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let x1 = rng.gen_range(-5.0..5.0);
        let x2 = rng.gen_range(-5.0..5.0);
        let y = rng.gen_range(-5.0..5.0);
        let series = expand_divided_difference(&f, x1, x2, y, truncation)?;
        worst = worst.max((series - f.divided_difference_x(x1, x2, y)).norm());
    }
    Ok(worst)
}

fn check_lp_reconstruction(rng: &mut ChaCha8Rng, _: usize) -> Result<f64> {
    let f = random_trig_poly(rng, 10, 0.8);
    let back = lp_decompose(&f).reconstruct(f.omega());
    let diff = back.add(&f.scale(c(-1.0)))?;
    Ok(diff.terms().map(|(_, _, z)| z.norm()).fold(0.0, f64::max))
}

fn check_projective(rng: &mut ChaCha8Rng, _: usize) -> Result<f64> {
    let degree = rng.gen_range(1..=8);
    let f = random_trig_poly(rng, degree, 1.0);
    let p = projective_tensor_bound(&f);
    Ok((p.bound / p.certificate - 1.0).max(0.0))
}

fn check_realization(rng: &mut ChaCha8Rng, _: usize) -> Result<f64> {
    let m = random_contraction(rng, 6, 0.95);
    let s = realize_systems(&m)?;
    let eye = ComplexMatrix::identity(6);
    let gram_f = s.f.adjoint_matmul(&s.f)?.sub(&eye)?.max_abs();
    let gram_g = s.g.adjoint_matmul(&s.g)?.sub(&eye)?.max_abs();
    let pairing = s.pairing().sub(&m)?.max_abs();
    let tau = crate::ensemble::random_complex_matrix(rng, 6, 6);
    let tau = tau.scale_real(1.0 / tau.max_abs());
    let gap = (operator_norm(&s.projector_sum(&tau)?) - operator_norm(&tau.hadamard(&m)?)).abs();
    Ok(gram_f.max(gram_g).max(pairing).max(gap))
}

fn check_counterexample(rng: &mut ChaCha8Rng, _: usize) -> Result<f64> {
    let n = 4;
    let m = random_contraction(rng, n, 0.9);
    let inst = build_counterexample(n, &triangular_truncation(n), &m)?;
    let db = eig_hermitian(&inst.b);
    let f1 = functional_calculus(&inst.f, &eig_hermitian(&inst.a1), &db)?.value;
    let f2 = functional_calculus(&inst.f, &eig_hermitian(&inst.a2), &db)?.value;
    let zero = operator_norm(&f2);
    let target = operator_norm(&f1.sub(&inst.target())?);
    let gap = (operator_norm(inst.a1.sub(&inst.a2)?.as_matrix()) - 2.0 * PI).abs();
    Ok(zero.max(target).max(gap))
}

fn check_rank_one(rng: &mut ChaCha8Rng, _: usize) -> Result<f64> {
    let n = 6;
    let a = crate::ensemble::random_vector(rng, n);
    let b = crate::ensemble::random_vector(rng, n);
    let tau = ComplexMatrix::from_fn(n, n, |j, k| a[j] * b[k].conj());
    let tau = tau.scale_real(1.0 / tau.max_abs());
    let exact = tau.max_abs();
    let witness = schur_norm_lower_bound(&tau, 2, 500, rng.gen());
    Ok((exact - witness.ratio).abs())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn powers_of_two_sizes() {
        assert_eq!(BlowupConfig::powers_of_two(1), vec![1]);
        assert_eq!(BlowupConfig::powers_of_two(8), vec![1, 2, 4, 8]);
        assert_eq!(BlowupConfig::powers_of_two(12), vec![1, 2, 4, 8, 12]);
        assert!(BlowupConfig::powers_of_two(0).is_empty());
    }

    #[test]
    fn small_blowup_rows() {
        let config = BlowupConfig {
            sizes: vec![1, 2, 4],
            ..BlowupConfig::default()
        };
        let report = run_opnorm_blowup(&config).unwrap();
        assert_eq!(report.rows[0].witness_ratio, 0.0);
        assert!((report.rows[1].witness_ratio - 1.0).abs() <= 1e-10);
        for row in &report.rows {
            assert!((row.perturbation - 2.0 * PI).abs() <= 1e-10);
            assert!((row.difference - row.witness_ratio).abs() <= 1e-9);
        }
        assert!(report.growth_contract_held());
    }

    #[test]
    fn rejects_oversized_blowup() {
        let config = BlowupConfig {
            sizes: vec![512],
            ..BlowupConfig::default()
        };
        assert!(run_opnorm_blowup(&config).is_err());
    }

    #[test]
    fn lipschitz_trials_are_sorted_and_finite() {
        let config = LipschitzConfig {
            trials: 6,
            n: 6,
            degree: 3,
            seed: 40,
            ..LipschitzConfig::default()
        };
        let report = run_lipschitz_trace(&config).unwrap();
        let seeds: Vec<u64> = report.trials.iter().map(|t| t.seed).collect();
        assert_eq!(seeds, (40..46).collect::<Vec<_>>());
        assert!(report
            .trials
            .iter()
            .all(|t| t.ratio.is_finite() && t.ratio > 0.0));
        assert!(report.max_split_residual() <= 1e-8);
        let ranks: Vec<usize> = report.trials.iter().map(|t| t.rank).collect();
        assert_eq!(ranks, vec![1, 1, 6, 1, 1, 6]);
    }

    #[test]
    fn crossvalidation_names_are_unique() {
        let mut names = crossvalidation_checks();
        let len = names.len();
        names.sort_unstable();
        names.dedup();
        assert_eq!(names.len(), len);
    }
}
