//! Double operator integrals and the functional calculus `f(A,B)`.
//!
//! For `A = U diag(λ) U*` and `B = V diag(μ) V*`,
//! `f(A,B) = Σ_{i,j} f(λ_i, μ_j) P_i Q_j = U (F ∘ (U*V)) V*` with `F_ij = f(λ_i, μ_j)`.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::functions::Bivariate;
use crate::linalg::{
    eig_hermitian, operator_norm, ComplexMatrix, HermitianMatrix, SpectralDecomposition,
};

/// `f(A,B)` together with the spectra it was computed from.
#[derive(Debug, Clone, PartialEq)]
pub struct FunctionalCalculusResult {
    pub value: ComplexMatrix,
    pub eigenvalues_a: Vec<f64>,
    pub eigenvalues_b: Vec<f64>,
}

/// `∬ ψ(x,y) dE₁(x) T dE₂(y) = U₁ (Ψ ∘ (U₁* T U₂)) U₂*`, where `Ψ_ij = ψ(λ_i, μ_j)`.
///
/// `psi` is the kernel already sampled on the two spectra (rows follow `d1`,
/// columns follow `d2`).
pub fn double_operator_integral(
    psi: &ComplexMatrix,
    d1: &SpectralDecomposition,
    t: &ComplexMatrix,
    d2: &SpectralDecomposition,
) -> Result<ComplexMatrix> {
    if t.rows() != d1.dim() {
        return Err(Error::DimensionMismatch {
            context: "T rows vs first spectral measure",
            left: t.rows(),
            right: d1.dim(),
        });
    }
    if t.cols() != d2.dim() {
        return Err(Error::DimensionMismatch {
            context: "T columns vs second spectral measure",
            left: t.cols(),
            right: d2.dim(),
        });
    }
    if psi.rows() != d1.dim() || psi.cols() != d2.dim() {
        return Err(Error::DimensionMismatch {
            context: "kernel samples vs spectra",
            left: psi.rows() * psi.cols(),
            right: d1.dim() * d2.dim(),
        });
    }
    let inner = d1.vectors.adjoint_matmul(t)?.matmul(&d2.vectors)?;
    let weighted = psi.hadamard(&inner)?;
    d1.vectors.matmul(&weighted)?.matmul_adjoint(&d2.vectors)
}

/// `f(A,B)` from precomputed spectral decompositions.
pub fn functional_calculus<F: Bivariate + ?Sized>(
    f: &F,
    da: &SpectralDecomposition,
    db: &SpectralDecomposition,
) -> Result<FunctionalCalculusResult> {
    if da.dim() != db.dim() {
        return Err(Error::DimensionMismatch {
            context: "A and B",
            left: da.dim(),
            right: db.dim(),
        });
    }
    let samples = f.eval_grid(&da.eigenvalues, &db.eigenvalues);
    let identity = ComplexMatrix::identity(da.dim());
    let value = double_operator_integral(&samples, da, &identity, db)?;
    Ok(FunctionalCalculusResult {
        value,
        eigenvalues_a: da.eigenvalues.clone(),
        eigenvalues_b: db.eigenvalues.clone(),
    })
}

/// `f(A,B) = ∬ f(x,y) dE_A(x) dE_B(y)`.
pub fn eval_f_ab<F: Bivariate + ?Sized>(
    f: &F,
    a: &HermitianMatrix,
    b: &HermitianMatrix,
) -> Result<FunctionalCalculusResult> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch {
            context: "A and B",
            left: a.dim(),
            right: b.dim(),
        });
    }
    functional_calculus(f, &eig_hermitian(a), &eig_hermitian(b))
}

/// `‖(g⊗h)(A,B) − g(A)h(B)‖`: the calculus splits over product functions.
pub fn product_split_check(
    g: impl Fn(f64) -> Complex64,
    h: impl Fn(f64) -> Complex64,
    a: &HermitianMatrix,
    b: &HermitianMatrix,
) -> Result<f64> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch {
            context: "A and B",
            left: a.dim(),
            right: b.dim(),
        });
    }
    let da = eig_hermitian(a);
    let db = eig_hermitian(b);
    let samples = ComplexMatrix::from_fn(da.dim(), db.dim(), |i, j| {
        g(da.eigenvalues[i]) * h(db.eigenvalues[j])
    });
    let joint = double_operator_integral(&samples, &da, &ComplexMatrix::identity(da.dim()), &db)?;
    let split = da.map(&g).matmul(&db.map(&h))?;
    Ok(operator_norm(&joint.sub(&split)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    use crate::ensemble::{random_hermitian, random_trig_poly, random_unitary};
    use crate::functions::{Closure2D, Function2D, TrigPoly2D};

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn zero(_: f64, _: f64) -> Complex64 {
        c(0.0)
    }

    #[test]
    fn constant_one_gives_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let a = random_hermitian(&mut rng, 5);
        let b = random_hermitian(&mut rng, 5);
        let one = Function2D::from(TrigPoly2D::constant(c(1.0)));
        let r = eval_f_ab(&one, &a, &b).unwrap();
        assert!(r.value.sub(&ComplexMatrix::identity(5)).unwrap().max_abs() < 1e-12);
        assert_eq!(r.eigenvalues_a.len(), 5);
    }

    #[test]
    fn coordinate_functions_recover_a_and_b() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let a = random_hermitian(&mut rng, 6);
        let b = random_hermitian(&mut rng, 6);
        let fx = Closure2D::new(|x, _| c(x), |_, _| c(1.0), zero);
        let fy = Closure2D::new(|_, y| c(y), zero, |_, _| c(1.0));
        let ra = eval_f_ab(&fx, &a, &b).unwrap().value;
        let rb = eval_f_ab(&fy, &a, &b).unwrap().value;
        assert!(ra.sub(a.as_matrix()).unwrap().max_abs() < 1e-12);
        assert!(rb.sub(b.as_matrix()).unwrap().max_abs() < 1e-12);
    }

    #[test]
    fn rejects_mismatched_dimensions() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let a = random_hermitian(&mut rng, 3);
        let b = random_hermitian(&mut rng, 4);
        let one = TrigPoly2D::constant(c(1.0));
        assert!(matches!(
            eval_f_ab(&one, &a, &b),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn product_of_coordinates_is_ab() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let a = random_hermitian(&mut rng, 6);
        let b = random_hermitian(&mut rng, 6);
        assert!(a.commutator_norm(&b).unwrap() > 0.1);
        let residual = product_split_check(c, c, &a, &b).unwrap();
        assert!(residual <= 1e-10);
        let ones = product_split_check(|_| c(1.0), |_| c(1.0), &a, &b).unwrap();
        assert!(ones <= 1e-12);
    }

    #[test]
    fn commuting_pair_is_diagonal_in_common_basis() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let w = random_unitary(&mut rng, 5);
        let lambda = [-1.0, 0.5, 0.2, 2.0, -0.3];
        let mu = [0.7, -0.4, 1.5, 0.0, 0.9];
        let a = HermitianMatrix::from_spectrum(&w, &lambda).unwrap();
        let b = HermitianMatrix::from_spectrum(&w, &mu).unwrap();
        let f = random_trig_poly(&mut rng, 3, 0.6);
        let value = eval_f_ab(&f, &a, &b).unwrap().value;
        let diag: Vec<Complex64> = (0..5).map(|i| f.eval(lambda[i], mu[i])).collect();
        let expected = w
            .matmul(&ComplexMatrix::from_fn(5, 5, |i, j| {
                if i == j {
                    diag[i]
                } else {
                    c(0.0)
                }
            }))
            .unwrap()
            .matmul_adjoint(&w)
            .unwrap();
        assert!(value.sub(&expected).unwrap().max_abs() <= 1e-10);
    }

    #[test]
    fn calculus_is_not_multiplicative() {
        // fixed 2x2 non-commuting pair; f = g = x + y, so fg = (x+y)²
        let a = HermitianMatrix::from_real_diagonal(&[1.0, -1.0]);
        let b = HermitianMatrix::new(
            ComplexMatrix::new(2, 2, vec![c(0.0), c(1.0), c(1.0), c(0.0)]).unwrap(),
        )
        .unwrap();
        let f = Closure2D::new(|x, y| c(x + y), |_, _| c(1.0), |_, _| c(1.0));
        let f2 = Closure2D::new(
            |x, y| c((x + y) * (x + y)),
            |x, y| c(2.0 * (x + y)),
            |x, y| c(2.0 * (x + y)),
        );
        let single = eval_f_ab(&f, &a, &b).unwrap().value;
        let squared = eval_f_ab(&f2, &a, &b).unwrap().value;
        let gap = operator_norm(&squared.sub(&single.matmul(&single).unwrap()).unwrap());
        assert!(gap >= 1e-2, "gap {gap}");
    }
}
