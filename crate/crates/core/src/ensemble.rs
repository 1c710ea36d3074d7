//! Seeded random ensembles shared by tests, verification and the benches.
//!
//! Every generator takes an explicit RNG so that a seed fully determines the output.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::functions::TrigPoly2D;
use crate::linalg::{eig_hermitian, operator_norm, ComplexMatrix, HermitianMatrix};

pub fn complex_normal<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

pub fn random_vector<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Vec<Complex64> {
    (0..n).map(|_| complex_normal(rng)).collect()
}

/// Matrix of i.i.d. standard complex Gaussian entries.
pub fn random_complex_matrix<R: Rng + ?Sized>(
    rng: &mut R,
    rows: usize,
    cols: usize,
) -> ComplexMatrix {
    ComplexMatrix::from_fn(rows, cols, |_, _| complex_normal(rng))
}

/// Gaussian entries, symmetrised: `(X + X*)/2`.
pub fn random_hermitian<R: Rng + ?Sized>(rng: &mut R, n: usize) -> HermitianMatrix {
    HermitianMatrix::from_hermitian_part(&random_complex_matrix(rng, n, n))
        .expect("square by construction")
}

/// Random Hermitian matrix whose spectrum is affinely mapped onto `[-half_width, half_width]`.
pub fn random_hermitian_in_window<R: Rng + ?Sized>(
    rng: &mut R,
    n: usize,
    half_width: f64,
) -> HermitianMatrix {
    let h = random_hermitian(rng, n);
    let d = eig_hermitian(&h);
    let lo = d.eigenvalues[0];
    let hi = d.eigenvalues[n - 1];
    let mapped: Vec<f64> = if hi > lo {
        d.eigenvalues
            .iter()
            .map(|&x| -half_width + 2.0 * half_width * (x - lo) / (hi - lo))
            .collect()
    } else {
        vec![0.0; n]
    };
    HermitianMatrix::from_spectrum(&d.vectors, &mapped).expect("shapes agree")
}

/// Haar-like random unitary (eigenvectors of a Gaussian Hermitian matrix).
pub fn random_unitary<R: Rng + ?Sized>(rng: &mut R, n: usize) -> ComplexMatrix {
    eig_hermitian(&random_hermitian(rng, n)).vectors
}

/// Hermitian matrix of rank `min(rank, n)` with unit trace norm.
pub fn random_low_rank_hermitian<R: Rng + ?Sized>(
    rng: &mut R,
    n: usize,
    rank: usize,
) -> HermitianMatrix {
    let rank = rank.clamp(1, n);
    let u = random_unitary(rng, n);
    let mut spectrum = vec![0.0; n];
    for s in spectrum.iter_mut().take(rank) {
        let magnitude: f64 = rng.gen_range(0.2..1.0);
        *s = if rng.gen_bool(0.5) {
            magnitude
        } else {
            -magnitude
        };
    }
    let total: f64 = spectrum.iter().map(|x: &f64| x.abs()).sum();
    spectrum.iter_mut().for_each(|x| *x /= total);
    HermitianMatrix::from_spectrum(&u, &spectrum).expect("shapes agree")
}

/// Random strict contraction: a Gaussian matrix rescaled to operator norm `target < 1`.
pub fn random_contraction<R: Rng + ?Sized>(rng: &mut R, n: usize, target: f64) -> ComplexMatrix {
    let m = random_complex_matrix(rng, n, n);
    let norm = operator_norm(&m);
    if norm == 0.0 {
        return m;
    }
    m.scale_real(target / norm)
}

/// Random trigonometric polynomial with all `(j, k)`, `|j|, |k| <= degree`,
/// Gaussian coefficients damped by `1/(1 + j² + k²)`.
pub fn random_trig_poly<R: Rng + ?Sized>(rng: &mut R, degree: i32, omega: f64) -> TrigPoly2D {
    let mut terms = Vec::new();
    for j in -degree..=degree {
        for k in -degree..=degree {
            let damp = 1.0 / (1.0 + (j * j + k * k) as f64);
            terms.push((j, k, complex_normal(rng) * damp));
        }
    }
    TrigPoly2D::new(omega, terms).expect("positive frequency")
}

/// Real-valued random trigonometric polynomial (`c_{-j,-k} = conj(c_{j,k})`).
pub fn random_real_trig_poly<R: Rng + ?Sized>(rng: &mut R, degree: i32, omega: f64) -> TrigPoly2D {
    let mut terms = Vec::new();
    for j in -degree..=degree {
        for k in -degree..=degree {
            if (j, k) < (0, 0) {
                continue;
            }
            let damp = 1.0 / (1.0 + (j * j + k * k) as f64);
            let z = complex_normal(rng) * damp;
            if (j, k) == (0, 0) {
                terms.push((0, 0, Complex64::new(z.re, 0.0)));
            } else {
                terms.push((j, k, z));
                terms.push((-j, -k, z.conj()));
            }
        }
    }
    TrigPoly2D::new(omega, terms).expect("positive frequency")
}

/// Random trigonometric polynomial whose Euclidean band radius is at most `band`.
///
/// Uses all frequencies inside the disc `j² + k² <= degree²` with
/// `omega = band / degree`.
pub fn random_band_limited<R: Rng + ?Sized>(
    rng: &mut R,
    degree: i32,
    band: f64,
    real: bool,
) -> TrigPoly2D {
    let omega = band / degree.max(1) as f64;
    let full = if real {
        random_real_trig_poly(rng, degree, omega)
    } else {
        random_trig_poly(rng, degree, omega)
    };
    let r2 = degree * degree;
    let terms: Vec<_> = full
        .terms()
        .filter(|&(j, k, _)| j * j + k * k <= r2)
        .collect();
    TrigPoly2D::new(omega, terms).expect("positive frequency")
}
