//! Schur multiplier norms and the operator-norm counterexample.
//!
//! Inner products are linear in the first slot and conjugate-linear in the
//! second: `(u, w) = Σ u_i conj(w_i)`. Rank-one projections act as
//! `P_j u = (u, f_j) f_j`, so `P_j Q_k u = (u, g_k)(g_k, f_j) f_j` and the pairing
//! matrix is `M̃_jk = (g_k, f_j)`.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::ensemble::random_complex_matrix;
use crate::error::{Error, Result};
use crate::functions::PhiLattice;
use crate::linalg::{
    operator_norm, psd_sqrt, thin_svd, top_singular_pair, ComplexMatrix, HermitianMatrix,
};

const CONTRACTION_SLACK: f64 = 1e-10;

/// `τ_jk = 1` for `j < k`, else `0`.
pub fn triangular_truncation(n: usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(n, n, |j, k| {
        Complex64::new(if j < k { 1.0 } else { 0.0 }, 0.0)
    })
}

/// `K_jk = 1/(j − k + ½)`.
pub fn hilbert_witness(n: usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(n, n, |j, k| {
        Complex64::new(1.0 / (j as f64 - k as f64 + 0.5), 0.0)
    })
}

/// A contraction `m` with `ratio = ‖τ∘m‖`, a lower bound on the Schur norm of `τ`.
#[derive(Debug, Clone, PartialEq)]
pub struct SchurWitness {
    pub m: ComplexMatrix,
    pub ratio: f64,
}

fn normalized(m: &ComplexMatrix) -> ComplexMatrix {
    let norm = operator_norm(m);
    if norm > 1.0 {
        m.scale_real(1.0 / norm)
    } else {
        m.clone()
    }
}

fn schur_value(tau: &ComplexMatrix, m: &ComplexMatrix) -> f64 {
    operator_norm(&tau.hadamard(m).expect("same shape"))
}

/// Alternating ascent from `start`: the top singular pair `(u, v)` of `τ∘M`
/// fixes a linear functional `M ↦ Re u*(τ∘M)v`, whose maximiser over the unit
/// ball is the polar factor of `Z_jk = u_j conj(τ_jk) conj(v_k)`.
fn ascend(tau: &ComplexMatrix, start: ComplexMatrix, iters: usize) -> SchurWitness {
    let mut m = normalized(&start);
    let mut best = SchurWitness {
        ratio: schur_value(tau, &m),
        m: m.clone(),
    };
    let mut v_prev: Option<Vec<Complex64>> = None;
    for _ in 0..iters {
        let product = tau.hadamard(&m).expect("same shape");
        let (sigma, u, v) = top_singular_pair(&product, v_prev.as_deref(), 2000, 1e-13);
        if sigma == 0.0 {
            break;
        }
        let z = ComplexMatrix::from_fn(tau.rows(), tau.cols(), |j, k| {
            u[j] * tau[(j, k)].conj() * v[k].conj()
        });
        let svd = thin_svd(&z, 1e-12);
        if svd.sigma.is_empty() {
            break;
        }
        m = normalized(&svd.u.matmul_adjoint(&svd.v).expect("thin factors"));
        v_prev = Some(v);
        let value = schur_value(tau, &m);
        let gain = value - best.ratio;
        if value > best.ratio {
            best = SchurWitness {
                m: m.clone(),
                ratio: value,
            };
        }
        if gain <= 1e-10 * best.ratio.max(1e-300) {
            break;
        }
    }
    best
}

/// Best witness over the starts `{K_N/‖K_N‖, 1/‖1‖, restarts random}` and the
/// unit `E_jk` at the largest entry. Random restart `r` draws from stream `r`
/// of a ChaCha8 generator seeded by `seed`;
/// ties keep the earliest start, so the result does not depend on scheduling.
pub fn schur_norm_lower_bound(
    tau: &ComplexMatrix,
    restarts: usize,
    iters: usize,
    seed: u64,
) -> SchurWitness {
    let (rows, cols) = (tau.rows(), tau.cols());
    if rows == 0 || cols == 0 {
        return SchurWitness {
            m: ComplexMatrix::zeros(rows, cols),
            ratio: 0.0,
        };
    }
    let mut starts: Vec<Option<ComplexMatrix>> = Vec::new();
    if rows == cols {
        starts.push(Some(hilbert_witness(rows)));
    }
    starts.push(Some(ComplexMatrix::from_fn(rows, cols, |_, _| {
        Complex64::new(1.0, 0.0)
    })));
    starts.extend((0..restarts).map(|_| None));
    let results: Vec<SchurWitness> = starts
        .into_par_iter()
        .enumerate()
        .map(|(idx, start)| {
            let start = start.unwrap_or_else(|| {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                rng.set_stream(idx as u64);
                random_complex_matrix(&mut rng, rows, cols)
            });
            ascend(tau, start, iters)
        })
        .collect();
    results
        .into_iter()
        .chain([entry_witness(tau)])
        .reduce(|best, w| if w.ratio > best.ratio { w } else { best })
        .expect("at least one start")
}

/// `E_jk` at the largest `|τ_jk|`, attaining `max |τ_jk|`.
fn entry_witness(tau: &ComplexMatrix) -> SchurWitness {
    let (mut at, mut ratio) = ((0, 0), 0.0);
    for j in 0..tau.rows() {
        for k in 0..tau.cols() {
            if tau[(j, k)].norm() > ratio {
                (at, ratio) = ((j, k), tau[(j, k)].norm());
            }
        }
    }
    let m = ComplexMatrix::from_fn(tau.rows(), tau.cols(), |j, k| {
        Complex64::new(if (j, k) == at { 1.0 } else { 0.0 }, 0.0)
    });
    SchurWitness { m, ratio }
}

/// Orthonormal systems realising a contraction as a pairing matrix; columns of
/// `f` are `f_j`, columns of `g` are `g_k`.
#[derive(Debug, Clone, PartialEq)]
pub struct RealizedSystems {
    pub f: ComplexMatrix,
    pub g: ComplexMatrix,
}

impl RealizedSystems {
    /// `M̃_jk = (g_k, f_j)`.
    pub fn pairing(&self) -> ComplexMatrix {
        self.f
            .adjoint_matmul(&self.g)
            .expect("same ambient dimension")
    }

    /// `Σ τ_jk P_j Q_k = F (τ∘M̃) G*`.
    pub fn projector_sum(&self, tau: &ComplexMatrix) -> Result<ComplexMatrix> {
        let weighted = tau.hadamard(&self.pairing())?;
        self.f.matmul(&weighted)?.matmul_adjoint(&self.g)
    }
}

fn check_contraction(m: &ComplexMatrix) -> Result<f64> {
    if !m.is_square() {
        return Err(Error::NotSquare {
            rows: m.rows(),
            cols: m.cols(),
        });
    }
    if m.as_slice()
        .iter()
        .any(|z| !z.re.is_finite() || !z.im.is_finite())
    {
        return Err(Error::NonFinite("contraction"));
    }
    let norm = operator_norm(m);
    if norm > 1.0 + CONTRACTION_SLACK {
        return Err(Error::NotContraction { norm });
    }
    Ok(norm)
}

/// `f_j = e_j ⊕ 0` and `g_k = M e_k ⊕ (I − M*M)^{1/2} e_k` in dimension `2N`.
pub fn realize_systems(m: &ComplexMatrix) -> Result<RealizedSystems> {
    check_contraction(m)?;
    let n = m.rows();
    let defect = HermitianMatrix::from_hermitian_part(
        &ComplexMatrix::identity(n).sub(&m.adjoint_matmul(m)?)?,
    )?;
    let s = psd_sqrt(&defect);
    let f = ComplexMatrix::from_fn(2 * n, n, |r, c| {
        Complex64::new(if r == c { 1.0 } else { 0.0 }, 0.0)
    });
    let g = ComplexMatrix::from_fn(
        2 * n,
        n,
        |r, c| if r < n { m[(r, c)] } else { s[(r - n, c)] },
    );
    Ok(RealizedSystems { f, g })
}

/// Pair `A1, A2, B` with `f = φ-lattice(τ)` so that `f(A2,B) = 0` and
/// `f(A1,B) = Σ τ_jk P_j Q_k`.
#[derive(Debug, Clone)]
pub struct CounterexampleInstance {
    pub n: usize,
    pub tau: ComplexMatrix,
    pub a1: HermitianMatrix,
    pub a2: HermitianMatrix,
    pub b: HermitianMatrix,
    pub f: PhiLattice,
    pub systems: RealizedSystems,
}

impl CounterexampleInstance {
    /// `Σ τ_jk P_j Q_k`.
    pub fn target(&self) -> ComplexMatrix {
        self.systems
            .projector_sum(&self.tau)
            .expect("validated shapes")
    }
}

/// `Σ_j c_j x_j x_j*` over the columns of `x`.
fn weighted_projections(x: &ComplexMatrix, weights: &[f64]) -> Result<HermitianMatrix> {
    let scaled = ComplexMatrix::from_fn(x.rows(), x.cols(), |r, c| x[(r, c)] * weights[c]);
    HermitianMatrix::from_hermitian_part(&scaled.matmul_adjoint(x)?)
}

pub fn build_counterexample(
    n: usize,
    tau: &ComplexMatrix,
    m: &ComplexMatrix,
) -> Result<CounterexampleInstance> {
    if tau.rows() != n || tau.cols() != n {
        return Err(Error::BadShape {
            rows: n,
            cols: n,
            got: tau.rows() * tau.cols(),
        });
    }
    if m.rows() != n || m.cols() != n {
        return Err(Error::BadShape {
            rows: n,
            cols: n,
            got: m.rows() * m.cols(),
        });
    }
    let largest = tau.max_abs();
    if !largest.is_finite() {
        return Err(Error::NonFinite("tau"));
    }
    if largest > 1.0 + 1e-12 {
        return Err(Error::InvalidArgument(format!(
            "multiplier entries must satisfy |tau_jk| <= 1, found {largest}"
        )));
    }
    let systems = realize_systems(m)?;
    let first: Vec<f64> = (1..=n).map(|j| 4.0 * PI * j as f64).collect();
    let shifted: Vec<f64> = (1..=n).map(|j| (4.0 * j as f64 + 2.0) * PI).collect();
    let a1 = weighted_projections(&systems.f, &first)?;
    let a2 = weighted_projections(&systems.f, &shifted)?;
    let b = weighted_projections(&systems.g, &first)?;
    Ok(CounterexampleInstance {
        n,
        tau: tau.clone(),
        a1,
        a2,
        b,
        f: PhiLattice::new(tau.clone())?,
        systems,
    })
}
