#![allow(dead_code)]

use num_complex::Complex64;
use opcalc::ensemble::{random_hermitian_in_window, random_unitary};
use opcalc::linalg::{eig_hermitian, ComplexMatrix, HermitianMatrix, SpectralDecomposition};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

pub fn relative(residual: f64, scale: f64) -> f64 {
    residual / scale.max(1.0)
}

pub fn max_diff(a: &ComplexMatrix, b: &ComplexMatrix) -> f64 {
    a.sub(b).unwrap().max_abs()
}

pub fn hermitian(rng: &mut ChaCha8Rng, n: usize) -> HermitianMatrix {
    random_hermitian_in_window(rng, n, 3.0)
}

pub fn decomposition(rng: &mut ChaCha8Rng, n: usize) -> SpectralDecomposition {
    eig_hermitian(&hermitian(rng, n))
}

pub fn conjugate(h: &HermitianMatrix, w: &ComplexMatrix) -> HermitianMatrix {
    h.conjugate_by(w).unwrap()
}

pub fn unitary(rng: &mut ChaCha8Rng, n: usize) -> ComplexMatrix {
    random_unitary(rng, n)
}
