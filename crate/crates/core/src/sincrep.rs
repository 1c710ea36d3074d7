//! Sinc expansion of divided differences of band-limited functions.
//!
//! For `f` with Fourier support in the ball of radius `σ` and grid step
//! `h = π/σ`,
//!
//! ```text
//! (f(x1,y) − f(x2,y))/(x1 − x2) = Σ_{j,k} s_j(x1) s_k(x2) Γ_jk(y),
//! s_j(x) = sinc(π(x/h − j)),   Γ_jk(y) = (f(jh,y) − f(kh,y))/((j − k)h),
//! ```
//!
//! with `Γ_jj(y) = ∂f/∂x(jh, y)`. Truncating to `|j|, |k| <= J` gives a
//! representation of the kernel in the Haagerup shape with the matrix family in
//! the last variable.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;

use crate::doi::double_operator_integral;
use crate::error::{Error, Result};
use crate::functions::{Bivariate, Function2D};
use crate::linalg::{
    eig_hermitian, operator_norm, ComplexMatrix, HermitianMatrix, SpectralDecomposition,
};
use crate::toi::{toi_direct, toi_haagerup, toi_sampled, HaagerupRep, HaagerupShape, Kernel3};

/// Default truncation of the sinc series.
pub const DEFAULT_TRUNCATION: usize = 256;

/// Which variable the divided difference is taken in.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    X,
    Y,
}

/// `Ψ(x1, x2, y) = (f(x1,y) − f(x2,y))/(x1 − x2)` for [`Axis::X`] and
/// `Ψ(x, y1, y2) = (f(x,y1) − f(x,y2))/(y1 − y2)` for [`Axis::Y`], with the
/// partial derivative on the diagonal.
#[derive(Debug, Clone)]
pub struct DividedDifferenceKernel<F> {
    pub f: F,
    pub axis: Axis,
}

impl<F: Bivariate> DividedDifferenceKernel<F> {
    pub fn new(f: F, axis: Axis) -> Self {
        Self { f, axis }
    }
}

impl<F: Bivariate> Kernel3 for DividedDifferenceKernel<F> {
    fn eval(&self, x1: f64, x2: f64, x3: f64) -> Complex64 {
        match self.axis {
            Axis::X => self.f.divided_difference_x(x1, x2, x3),
            Axis::Y => self.f.divided_difference_y(x1, x2, x3),
        }
    }

    fn description(&self) -> String {
        format!("divided difference in {:?}", self.axis)
    }
}

/// `sin(πu)` with exact zeros at the integers.
fn sin_pi(u: f64) -> f64 {
    let n = u.round();
    let r = u - n;
    let s = (PI * r).sin();
    if n.rem_euclid(2.0) == 0.0 {
        s
    } else {
        -s
    }
}

/// `s_j(x) = sin(π(x/h − j))/(π(x/h − j))`, equal to 1 at `x = jh`.
pub fn sinc_basis(x: f64, j: i64, h: f64) -> f64 {
    let u = x / h - j as f64;
    if u == 0.0 {
        return 1.0;
    }
    if u.abs() < 1e-5 {
        let t = PI * u;
        return 1.0 - t * t / 6.0;
    }
    sin_pi(u) / (PI * u)
}

/// `(s_{−J}(x), …, s_J(x))`.
pub fn sinc_vector(x: f64, truncation: usize, h: f64) -> Vec<f64> {
    let j_max = truncation as i64;
    (-j_max..=j_max).map(|j| sinc_basis(x, j, h)).collect()
}

/// `1 − Σ_{|j|≤J} s_j(x)²`: how far the truncated family is from the partition of unity.
pub fn partition_deficit(x: f64, truncation: usize, h: f64) -> f64 {
    1.0 - sinc_vector(x, truncation, h)
        .iter()
        .map(|s| s * s)
        .sum::<f64>()
}

/// Truncated divided-difference matrix with its operator norm.
#[derive(Debug, Clone, PartialEq)]
pub struct GammaMatrix {
    pub matrix: ComplexMatrix,
    pub norm: f64,
}

fn check_band<F: Bivariate + ?Sized>(f: &F, h: f64) -> Result<()> {
    if !(h.is_finite() && h > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "grid step must be positive, got {h}"
        )));
    }
    let limit = PI / h;
    match f.band_radius() {
        Some(radius) if radius <= limit * (1.0 + 1e-12) => Ok(()),
        Some(radius) => Err(Error::BandViolation { radius, limit }),
        None => Err(Error::InvalidArgument(
            "the sinc expansion needs a function with known band radius".into(),
        )),
    }
}

/// `Γ(t)` along `axis` without the band check or the norm: rows and columns
/// are indexed by `j, k ∈ [−J, J]`, and `t` is the idle variable.
fn gamma_unchecked<F: Bivariate + ?Sized>(
    f: &F,
    axis: Axis,
    t: f64,
    truncation: usize,
    h: f64,
) -> ComplexMatrix {
    let j_max = truncation as i64;
    let nodes: Vec<f64> = (-j_max..=j_max).map(|j| j as f64 * h).collect();
    let (values, derivatives): (Vec<Complex64>, Vec<Complex64>) = match axis {
        Axis::X => (
            f.eval_grid(&nodes, &[t]).into_vec(),
            nodes.iter().map(|&x| f.partial_x(x, t)).collect(),
        ),
        Axis::Y => (
            f.eval_grid(&[t], &nodes).into_vec(),
            nodes.iter().map(|&y| f.partial_y(t, y)).collect(),
        ),
    };
    let m = nodes.len();
    ComplexMatrix::from_fn(m, m, |a, b| {
        if a == b {
            derivatives[a]
        } else {
            (values[a] - values[b]) / ((a as f64 - b as f64) * h)
        }
    })
}

/// `Γ(y)_{jk} = (f(jh,y) − f(kh,y))/((j−k)h)`, `∂f/∂x(jh,y)` on the diagonal.
pub fn gamma_matrix<F: Bivariate + ?Sized>(
    f: &F,
    y: f64,
    truncation: usize,
    h: f64,
) -> Result<GammaMatrix> {
    gamma_matrix_along(f, Axis::X, y, truncation, h)
}

/// [`gamma_matrix`] for either axis; for [`Axis::Y`] the roles of `x` and `y` swap.
pub fn gamma_matrix_along<F: Bivariate + ?Sized>(
    f: &F,
    axis: Axis,
    t: f64,
    truncation: usize,
    h: f64,
) -> Result<GammaMatrix> {
    check_band(f, h)?;
    let matrix = gamma_unchecked(f, axis, t, truncation, h);
    let norm = operator_norm(&matrix);
    Ok(GammaMatrix { matrix, norm })
}

/// `Σ_{|j|,|k|≤J} s_j(x1) s_k(x2) Γ_jk(y)` with grid step `π` (band radius ≤ 1).
pub fn expand_divided_difference<F: Bivariate + ?Sized>(
    f: &F,
    x1: f64,
    x2: f64,
    y: f64,
    truncation: usize,
) -> Result<Complex64> {
    expand_divided_difference_with_step(f, Axis::X, x1, x2, y, truncation, PI)
}

/// Truncated expansion for grid step `h`; for [`Axis::Y`] the arguments are
/// `(y1, y2, x)`.
pub fn expand_divided_difference_with_step<F: Bivariate + ?Sized>(
    f: &F,
    axis: Axis,
    t1: f64,
    t2: f64,
    idle: f64,
    truncation: usize,
    h: f64,
) -> Result<Complex64> {
    check_band(f, h)?;
    let gamma = gamma_unchecked(f, axis, idle, truncation, h);
    let s1 = sinc_vector(t1, truncation, h);
    let s2: Vec<Complex64> = sinc_vector(t2, truncation, h)
        .into_iter()
        .map(|s| Complex64::new(s, 0.0))
        .collect();
    let gs = gamma.mul_vec(&s2);
    Ok(s1.iter().zip(&gs).map(|(a, b)| b * *a).sum())
}

/// Haagerup representation of the divided difference of `f` along `axis`
/// from the truncated sinc expansion at band `σ` (grid step `π/σ`).
///
/// Axis X gives `α_j(x1) β_k(x2) Γ_jk(y)` (matrix family last); axis Y gives
/// `Γ_jk(x) α_j(y1) β_k(y2)` (matrix family first). Both vector families are
/// the sinc functions, whose pointwise `ℓ²` norm is at most 1.
pub fn sinc_haagerup_rep(
    f: &Function2D,
    axis: Axis,
    sigma: f64,
    truncation: usize,
) -> Result<HaagerupRep> {
    if !(sigma.is_finite() && sigma > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "band must be positive, got {sigma}"
        )));
    }
    let h = PI / sigma;
    check_band(f, h)?;
    let len = 2 * truncation + 1;
    let basis = move |x: f64| -> Vec<Complex64> {
        sinc_vector(x, truncation, h)
            .into_iter()
            .map(|s| Complex64::new(s, 0.0))
            .collect()
    };
    let owned = Arc::new(f.clone());
    let matrix = move |t: f64| gamma_unchecked(owned.as_ref(), axis, t, truncation, h);
    let shape = match axis {
        Axis::X => HaagerupShape::LastMatrix,
        Axis::Y => HaagerupShape::FirstMatrix,
    };
    Ok(HaagerupRep::new(
        shape,
        len,
        len,
        Arc::new(basis),
        Arc::new(basis),
        Arc::new(matrix),
    ))
}

/// Smallest truncation whose grid covers `|x| <= extent` under the rule
/// `extent <= J·h/2`.
pub fn required_truncation(extent: f64, h: f64) -> usize {
    (2.0 * extent / h).ceil().max(1.0) as usize
}

fn check_coverage(spectra: &[&SpectralDecomposition], truncation: usize, h: f64) -> Result<()> {
    let extent = spectra
        .iter()
        .map(|d| d.spectral_radius())
        .fold(0.0, f64::max);
    let covered = truncation as f64 * h / 2.0;
    if extent > covered {
        return Err(Error::SpectrumNotCovered {
            extent,
            covered,
            required: required_truncation(extent, h),
        });
    }
    Ok(())
}

/// How the divided-difference kernel is evaluated.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum KernelPath {
    /// Closed-form divided differences.
    Exact,
    /// Truncated sinc expansion at band `sigma`.
    Sinc { sigma: f64, truncation: usize },
}

fn same_dim(context: &'static str, a: usize, b: usize) -> Result<()> {
    if a != b {
        return Err(Error::DimensionMismatch {
            context,
            left: a,
            right: b,
        });
    }
    Ok(())
}

/// `∭ Ψ_x(x1,x2,y) dE_{A1}(x1) (A1 − A2) dE_{A2}(x2) dE_B(y)` from spectral data.
pub fn perturbation_a_spectral(
    f: &Function2D,
    path: KernelPath,
    d_a1: &SpectralDecomposition,
    delta: &ComplexMatrix,
    d_a2: &SpectralDecomposition,
    d_b: &SpectralDecomposition,
) -> Result<ComplexMatrix> {
    let identity = ComplexMatrix::identity(d_b.dim());
    match path {
        KernelPath::Exact => {
            let samples = f.divided_difference_x_tensor(
                &d_a1.eigenvalues,
                &d_a2.eigenvalues,
                &d_b.eigenvalues,
            );
            toi_sampled(&samples, d_a1, delta, d_a2, &identity, d_b)
        }
        KernelPath::Sinc { sigma, truncation } => {
            check_coverage(&[d_a1, d_a2], truncation, PI / sigma)?;
            let rep = sinc_haagerup_rep(f, Axis::X, sigma, truncation)?;
            toi_haagerup(&rep, d_a1, delta, d_a2, &identity, d_b)
        }
    }
}

/// `∭ Ψ_y(x,y1,y2) dE_A(x) dE_{B1}(y1) (B1 − B2) dE_{B2}(y2)` from spectral data.
pub fn perturbation_b_spectral(
    f: &Function2D,
    path: KernelPath,
    d_a: &SpectralDecomposition,
    d_b1: &SpectralDecomposition,
    delta: &ComplexMatrix,
    d_b2: &SpectralDecomposition,
) -> Result<ComplexMatrix> {
    let identity = ComplexMatrix::identity(d_a.dim());
    match path {
        KernelPath::Exact => {
            let samples = f.divided_difference_y_tensor(
                &d_a.eigenvalues,
                &d_b1.eigenvalues,
                &d_b2.eigenvalues,
            );
            toi_sampled(&samples, d_a, &identity, d_b1, delta, d_b2)
        }
        KernelPath::Sinc { sigma, truncation } => {
            check_coverage(&[d_b1, d_b2], truncation, PI / sigma)?;
            let rep = sinc_haagerup_rep(f, Axis::Y, sigma, truncation)?;
            toi_haagerup(&rep, d_a, &identity, d_b1, delta, d_b2)
        }
    }
}

/// `f(A1,B) − f(A2,B)` as a triple operator integral with the exact divided difference.
pub fn perturbation_formula_a<F: Bivariate + ?Sized>(
    f: &F,
    a1: &HermitianMatrix,
    a2: &HermitianMatrix,
    b: &HermitianMatrix,
) -> Result<ComplexMatrix> {
    same_dim("A1 and A2", a1.dim(), a2.dim())?;
    same_dim("A and B", a1.dim(), b.dim())?;
    let delta = a1.as_matrix().sub(a2.as_matrix())?;
    let kernel = DividedDifferenceKernel::new(f, Axis::X);
    let identity = ComplexMatrix::identity(b.dim());
    toi_direct(
        &kernel,
        &eig_hermitian(a1),
        &delta,
        &eig_hermitian(a2),
        &identity,
        &eig_hermitian(b),
    )
}

/// `f(A,B1) − f(A,B2)` as a triple operator integral with the exact divided difference.
pub fn perturbation_formula_b<F: Bivariate + ?Sized>(
    f: &F,
    a: &HermitianMatrix,
    b1: &HermitianMatrix,
    b2: &HermitianMatrix,
) -> Result<ComplexMatrix> {
    same_dim("B1 and B2", b1.dim(), b2.dim())?;
    same_dim("A and B", a.dim(), b1.dim())?;
    let delta = b1.as_matrix().sub(b2.as_matrix())?;
    let kernel = DividedDifferenceKernel::new(f, Axis::Y);
    let identity = ComplexMatrix::identity(a.dim());
    toi_direct(
        &kernel,
        &eig_hermitian(a),
        &identity,
        &eig_hermitian(b1),
        &delta,
        &eig_hermitian(b2),
    )
}

/// [`perturbation_formula_a`] through the truncated sinc representation.
pub fn perturbation_formula_a_sinc(
    f: &Function2D,
    a1: &HermitianMatrix,
    a2: &HermitianMatrix,
    b: &HermitianMatrix,
    sigma: f64,
    truncation: usize,
) -> Result<ComplexMatrix> {
    same_dim("A1 and A2", a1.dim(), a2.dim())?;
    same_dim("A and B", a1.dim(), b.dim())?;
    let delta = a1.as_matrix().sub(a2.as_matrix())?;
    perturbation_a_spectral(
        f,
        KernelPath::Sinc { sigma, truncation },
        &eig_hermitian(a1),
        &delta,
        &eig_hermitian(a2),
        &eig_hermitian(b),
    )
}

/// [`perturbation_formula_b`] through the truncated sinc representation.
pub fn perturbation_formula_b_sinc(
    f: &Function2D,
    a: &HermitianMatrix,
    b1: &HermitianMatrix,
    b2: &HermitianMatrix,
    sigma: f64,
    truncation: usize,
) -> Result<ComplexMatrix> {
    same_dim("B1 and B2", b1.dim(), b2.dim())?;
    same_dim("A and B", a.dim(), b1.dim())?;
    let delta = b1.as_matrix().sub(b2.as_matrix())?;
    perturbation_b_spectral(
        f,
        KernelPath::Sinc { sigma, truncation },
        &eig_hermitian(a),
        &eig_hermitian(b1),
        &delta,
        &eig_hermitian(b2),
    )
}

/// `U₁(Ψ∘(U₁* T U₂))U₂*` for the exact divided difference at a fixed idle
/// coordinate; used to check the two-variable reduction.
pub fn divided_difference_doi<F: Bivariate + ?Sized>(
    f: &F,
    y: f64,
    d1: &SpectralDecomposition,
    t: &ComplexMatrix,
    d2: &SpectralDecomposition,
) -> Result<ComplexMatrix> {
    let samples = ComplexMatrix::from_fn(d1.dim(), d2.dim(), |i, j| {
        f.divided_difference_x(d1.eigenvalues[i], d2.eigenvalues[j], y)
    });
    double_operator_integral(&samples, d1, t, d2)
}
