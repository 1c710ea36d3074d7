//! Brute-force projector sums.
//!
//! These evaluate spectral integrals literally, one rank-one projector product
//! at a time. They are slow and share no code with the production contractions,
//! which makes them suitable as independent references.

use num_complex::Complex64;

use crate::linalg::{ComplexMatrix, SpectralDecomposition};

fn add_scaled(acc: &mut ComplexMatrix, w: Complex64, m: &ComplexMatrix) {
    for (a, b) in acc.as_mut_slice().iter_mut().zip(m.as_slice()) {
        *a += w * b;
    }
}

fn projectors(d: &SpectralDecomposition) -> Vec<ComplexMatrix> {
    (0..d.dim()).map(|i| d.projector(i)).collect()
}

/// `Σ_{i,j} f(λ_i, μ_j) P_i Q_j`.
pub fn projector_double_sum(
    f: impl Fn(f64, f64) -> Complex64,
    da: &SpectralDecomposition,
    db: &SpectralDecomposition,
) -> ComplexMatrix {
    let p = projectors(da);
    let q = projectors(db);
    let mut acc = ComplexMatrix::zeros(da.dim(), db.dim());
    for (i, pi) in p.iter().enumerate() {
        for (j, qj) in q.iter().enumerate() {
            let term = pi.matmul(qj).expect("square projectors");
            add_scaled(&mut acc, f(da.eigenvalues[i], db.eigenvalues[j]), &term);
        }
    }
    acc
}

/// `Σ_{i,j,k} Ψ(λ_i, μ_j, ν_k) P_i T Q_j R S_k`.
pub fn projector_triple_sum(
    psi: impl Fn(f64, f64, f64) -> Complex64,
    d1: &SpectralDecomposition,
    t: &ComplexMatrix,
    d2: &SpectralDecomposition,
    r: &ComplexMatrix,
    d3: &SpectralDecomposition,
) -> ComplexMatrix {
    let p = projectors(d1);
    let q = projectors(d2);
    let s = projectors(d3);
    let mut acc = ComplexMatrix::zeros(d1.dim(), d3.dim());
    for (i, pi) in p.iter().enumerate() {
        let pt = pi.matmul(t).expect("compatible shapes");
        for (j, qj) in q.iter().enumerate() {
            let ptqr = pt
                .matmul(qj)
                .and_then(|m| m.matmul(r))
                .expect("compatible shapes");
            for (k, sk) in s.iter().enumerate() {
                let term = ptqr.matmul(sk).expect("compatible shapes");
                let w = psi(d1.eigenvalues[i], d2.eigenvalues[j], d3.eigenvalues[k]);
                add_scaled(&mut acc, w, &term);
            }
        }
    }
    acc
}
