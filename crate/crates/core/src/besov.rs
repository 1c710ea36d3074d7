//! Littlewood–Paley pieces, a `B¹_{∞,1}` norm estimate, and the row bound
//! for the projective tensor norm of trigonometric polynomials.
//!
//! Masks are tents in `t = log₂|ξ|` with knots at the integers:
//! `w_0 = 1` for `t ≤ 0` and `1 − t` on `(0, 1)`; `w_n = max(0, 1 − |t − n|)` for
//! `n ≥ 1`. Every frequency meets at most two masks and the weights sum to 1.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::functions::{SupNormEstimate, TrigPoly2D};

/// One Littlewood–Paley piece: frequencies with `2^{n−1} < |ξ| < 2^{n+1}`
/// (`|ξ| < 2` for `n = 0`).
#[derive(Debug, Clone, PartialEq)]
pub struct LpPiece {
    pub index: u32,
    pub piece: TrigPoly2D,
    pub sup: SupNormEstimate,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpDecomposition {
    pub pieces: Vec<LpPiece>,
}

impl LpDecomposition {
    /// Coefficient-wise sum of the pieces.
    pub fn reconstruct(&self, omega: f64) -> TrigPoly2D {
        self.pieces.iter().fold(TrigPoly2D::zero(omega), |acc, p| {
            acc.add(&p.piece).expect("shared frequency")
        })
    }
}

/// `(n, w_n)` with `w_n + w_{n+1} = 1` carrying the mask weight of the lower knot.
fn lower_knot(frequency: f64) -> (u32, f64) {
    if frequency <= 1.0 {
        return (0, 1.0);
    }
    let t = frequency.log2();
    let n = t.floor();
    (n as u32, 1.0 - (t - n))
}

/// `c·w` rounded to the ulp grid of `c`, per real component, so that
/// `c − result` is exact and the two parts add back to `c` bit for bit.
fn split_exact(c: Complex64, w: f64) -> (Complex64, Complex64) {
    let part = |x: f64| -> f64 {
        if x == 0.0 || w == 1.0 {
            return x * w;
        }
        let ulp = f64::EPSILON * 2f64.powi(x.abs().log2().floor() as i32);
        (x * w / ulp).round() * ulp
    };
    let low = Complex64::new(part(c.re), part(c.im));
    (low, c - low)
}

/// Dyadic pieces of `f`; empty for `f = 0`. Reconstruction is exact at the
/// coefficient level.
pub fn lp_decompose(f: &TrigPoly2D) -> LpDecomposition {
    let omega = f.omega();
    let mut buckets: Vec<Vec<(i32, i32, Complex64)>> = Vec::new();
    let mut push = |n: u32, term: (i32, i32, Complex64)| {
        let n = n as usize;
        if buckets.len() <= n {
            buckets.resize_with(n + 1, Vec::new);
        }
        buckets[n].push(term);
    };
    for (j, k, c) in f.terms() {
        let frequency = omega * ((j * j + k * k) as f64).sqrt();
        let (n, w) = lower_knot(frequency);
        let (low, high) = split_exact(c, w);
        push(n, (j, k, low));
        push(n + 1, (j, k, high));
    }
    let pieces = buckets
        .into_iter()
        .enumerate()
        .filter_map(|(n, terms)| {
            let piece = TrigPoly2D::new(omega, terms).expect("finite coefficients");
            if piece.is_zero() {
                return None;
            }
            let sup = piece.sup_norm_estimate();
            Some(LpPiece {
                index: n as u32,
                piece,
                sup,
            })
        })
        .collect();
    LpDecomposition { pieces }
}

/// `Σ_n 2ⁿ · sup|f_n|`, using the certified upper sup bound of every piece.
pub fn besov_norm_estimate(f: &TrigPoly2D) -> f64 {
    lp_decompose(f)
        .pieces
        .iter()
        .map(|p| 2f64.powi(p.index as i32) * p.sup.upper)
        .sum()
}

/// Row decomposition `Σ_j sup_y |Σ_k c_jk e^{iωky}|` against `(1 + 2N)·sup|f|`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProjectiveBound {
    pub bound: f64,
    pub certificate: f64,
    pub degree: i32,
}

impl ProjectiveBound {
    pub fn holds(&self) -> bool {
        self.bound <= self.certificate * (1.0 + 1e-9)
    }
}

fn row_value(row: &[(i32, Complex64)], omega: f64, y: f64) -> f64 {
    row.iter()
        .map(|&(k, c)| c * Complex64::cis(omega * k as f64 * y))
        .sum::<Complex64>()
        .norm()
}

/// `sup_y |Σ_k c_k e^{iωky}|` by a dense grid followed by golden-section
/// refinement around the best grid nodes.
fn row_sup(row: &[(i32, Complex64)], omega: f64) -> f64 {
    let band = row
        .iter()
        .map(|&(k, _)| (omega * k as f64).abs())
        .fold(0.0, f64::max);
    if band == 0.0 {
        return row.iter().map(|&(_, c)| c).sum::<Complex64>().norm();
    }
    let period = 2.0 * PI / omega;
    let samples = ((period * band / 0.2).ceil() as usize).max(32);
    let delta = period / samples as f64;
    let mut values: Vec<(f64, f64)> = (0..samples)
        .map(|i| {
            let y = i as f64 * delta;
            (row_value(row, omega, y), y)
        })
        .collect();
    values.sort_by(|a, b| b.0.total_cmp(&a.0));
    let ratio = (5f64.sqrt() - 1.0) / 2.0;
    let mut best = values[0].0;
    for &(_, centre) in values.iter().take(3) {
        let (mut lo, mut hi) = (centre - delta, centre + delta);
        let g = |y: f64| row_value(row, omega, y);
        let mut a = hi - ratio * (hi - lo);
        let mut b = lo + ratio * (hi - lo);
        let (mut ga, mut gb) = (g(a), g(b));
        for _ in 0..80 {
            if ga >= gb {
                hi = b;
                b = a;
                gb = ga;
                a = hi - ratio * (hi - lo);
                ga = g(a);
            } else {
                lo = a;
                a = b;
                ga = gb;
                b = lo + ratio * (hi - lo);
                gb = g(b);
            }
        }
        best = best.max(ga).max(gb);
    }
    best
}

/// The row bound on `‖f‖` in `L∞ ⊗̂ L∞` and its certificate `(1 + 2N)·sup|f|`.
pub fn projective_tensor_bound(f: &TrigPoly2D) -> ProjectiveBound {
    let degree = f.degree();
    let omega = f.omega();
    let bound = (-degree..=degree)
        .map(|j| {
            let row = f.row(j);
            if row.is_empty() {
                0.0
            } else {
                row_sup(&row, omega)
            }
        })
        .sum();
    let certificate = (1 + 2 * degree) as f64 * f.sup_norm_estimate().upper;
    ProjectiveBound {
        bound,
        certificate,
        degree,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    use crate::ensemble::random_trig_poly;
    use crate::functions::SUP_NORM_RATIO;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn zero_has_no_pieces() {
        let z = TrigPoly2D::zero(1.0);
        assert!(lp_decompose(&z).pieces.is_empty());
        assert_eq!(besov_norm_estimate(&z), 0.0);
    }

    #[test]
    fn harmonic_on_a_knot_lands_in_one_piece() {
        let f = TrigPoly2D::new(1.0, [(4, 0, Complex64::new(0.3, -0.7))]).unwrap();
        let d = lp_decompose(&f);
        assert!(d.pieces.iter().all(|p| p.index == 2 || p.index == 3));
        assert_eq!(d.reconstruct(1.0), f);
        let norm = besov_norm_estimate(&f);
        let modulus = Complex64::new(0.3, -0.7).norm();
        assert!(norm >= 4.0 * modulus * (1.0 - 1e-12));
        assert!(norm <= 4.0 * modulus * SUP_NORM_RATIO);
    }

    #[test]
    fn harmonic_between_knots_splits_in_two() {
        // |ξ| = 5 → t = log₂5, weights 2 − log₂5 and log₂5 − 2 on pieces 2 and 3
        let f = TrigPoly2D::new(1.0, [(3, 4, c(1.0))]).unwrap();
        let d = lp_decompose(&f);
        let idx: Vec<u32> = d.pieces.iter().map(|p| p.index).collect();
        assert_eq!(idx, vec![2, 3]);
        let t = 5f64.log2();
        assert!((d.pieces[0].piece.coefficient(3, 4).re - (3.0 - t)).abs() < 1e-15);
        assert_eq!(d.reconstruct(1.0), f);
    }

    #[test]
    fn reconstruction_is_exact_for_random_polynomials() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for omega in [1.0, 0.37, 2.5] {
            let f = random_trig_poly(&mut rng, 16, omega);
            let d = lp_decompose(&f);
            assert_eq!(d.reconstruct(omega), f);
            for p in &d.pieces {
                for (j, k, _) in p.piece.terms() {
                    let r = omega * ((j * j + k * k) as f64).sqrt();
                    let n = p.index as i32;
                    assert!(r < 2f64.powi(n + 1));
                    if n > 0 {
                        assert!(r > 2f64.powi(n - 1));
                    }
                }
            }
        }
    }

    #[test]
    fn besov_norm_is_homogeneous() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let f = random_trig_poly(&mut rng, 6, 1.0);
        let a = besov_norm_estimate(&f);
        let b = besov_norm_estimate(&f.scale(c(2.0)));
        assert!((b - 2.0 * a).abs() <= 1e-12 * b);
    }

    #[test]
    fn single_harmonic_row_bound_is_one() {
        let f = TrigPoly2D::new(1.0, [(2, -1, c(1.0))]).unwrap();
        let p = projective_tensor_bound(&f);
        assert!((p.bound - 1.0).abs() < 1e-12);
        assert_eq!(p.degree, 2);
        assert!(p.holds());
    }

    #[test]
    fn constant_rows_give_full_count() {
        let n = 5;
        let f = TrigPoly2D::new(1.0, (-n..=n).map(|j| (j, 0, c(1.0)))).unwrap();
        let p = projective_tensor_bound(&f);
        assert!((p.bound - (1 + 2 * n) as f64).abs() < 1e-12);
        assert!(p.holds());
        // sup|f| = 1 + 2N at x = 0, so the certificate is tight up to the sup factor
        assert!(p.certificate <= p.bound * (1 + 2 * n) as f64 * SUP_NORM_RATIO);
    }
}
