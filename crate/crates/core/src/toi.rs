//! Triple operator integrals `W = ∭ Ψ(x₁,x₂,x₃) dE₁(x₁) T dE₂(x₂) R dE₃(x₃)`.
//!
//! With `Eᵢ` the spectral measures of finite decompositions `Dᵢ = (Uᵢ, λ⁽ⁱ⁾)`,
//! `W = U₁ G U₃*` where `G_ik = Σ_j Ψ(λ_i, μ_j, ν_k) T'_ij R'_jk`,
//! `T' = U₁* T U₂` and `R' = U₂* R U₃`.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg::{norm2, operator_norm, schatten_1, ComplexMatrix, SpectralDecomposition};

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

/// A kernel `Ψ(x₁, x₂, x₃)`, including its values on diagonals.
pub trait Kernel3: Sync {
    fn eval(&self, x1: f64, x2: f64, x3: f64) -> Complex64;

    fn description(&self) -> String {
        String::from("kernel")
    }
}

impl<F> Kernel3 for F
where
    F: Fn(f64, f64, f64) -> Complex64 + Sync,
{
    fn eval(&self, x1: f64, x2: f64, x3: f64) -> Complex64 {
        self(x1, x2, x3)
    }
}

fn check_chain(
    d1: &SpectralDecomposition,
    t: &ComplexMatrix,
    d2: &SpectralDecomposition,
    r: &ComplexMatrix,
    d3: &SpectralDecomposition,
) -> Result<()> {
    let checks = [
        ("T rows vs first spectral measure", t.rows(), d1.dim()),
        ("T columns vs second spectral measure", t.cols(), d2.dim()),
        ("R rows vs second spectral measure", r.rows(), d2.dim()),
        ("R columns vs third spectral measure", r.cols(), d3.dim()),
    ];
    for (context, left, right) in checks {
        if left != right {
            return Err(Error::DimensionMismatch {
                context,
                left,
                right,
            });
        }
    }
    Ok(())
}

/// `U₁ G U₃*` for a kernel sampled through `psi(i, j, k)` on atom indices.
fn contract(
    psi: impl Fn(usize, usize, usize) -> Complex64 + Sync,
    d1: &SpectralDecomposition,
    t: &ComplexMatrix,
    d2: &SpectralDecomposition,
    r: &ComplexMatrix,
    d3: &SpectralDecomposition,
) -> Result<ComplexMatrix> {
    check_chain(d1, t, d2, r, d3)?;
    let (n1, n2, n3) = (d1.dim(), d2.dim(), d3.dim());
    let tp = d1.vectors.adjoint_matmul(t)?.matmul(&d2.vectors)?;
    let rp = d2.vectors.adjoint_matmul(r)?.matmul(&d3.vectors)?;
    let rows: Vec<Vec<Complex64>> = (0..n1)
        .into_par_iter()
        .map(|i| {
            let mut row = vec![ZERO; n3];
            for j in 0..n2 {
                let w = tp[(i, j)];
                if w == ZERO {
                    continue;
                }
                let rj = rp.row(j);
                for (k, g) in row.iter_mut().enumerate() {
                    *g += psi(i, j, k) * w * rj[k];
                }
            }
            row
        })
        .collect();
    let g = ComplexMatrix::new(n1, n3, rows.concat())?;
    d1.vectors.matmul(&g)?.matmul_adjoint(&d3.vectors)
}

/// `∭ Ψ dE₁ T dE₂ R dE₃` by direct spectral contraction, `O(n³)` kernel evaluations.
pub fn toi_direct<K: Kernel3 + ?Sized>(
    psi: &K,
    d1: &SpectralDecomposition,
    t: &ComplexMatrix,
    d2: &SpectralDecomposition,
    r: &ComplexMatrix,
    d3: &SpectralDecomposition,
) -> Result<ComplexMatrix> {
    let (l1, l2, l3) = (&d1.eigenvalues, &d2.eigenvalues, &d3.eigenvalues);
    contract(|i, j, k| psi.eval(l1[i], l2[j], l3[k]), d1, t, d2, r, d3)
}

/// `∭ Ψ dE₁ T dE₂ R dE₃` for a kernel already sampled on the atoms, stored
/// row-major as `samples[(i·n₂ + j)·n₃ + k] = Ψ(λ_i, μ_j, ν_k)`.
pub fn toi_sampled(
    samples: &[Complex64],
    d1: &SpectralDecomposition,
    t: &ComplexMatrix,
    d2: &SpectralDecomposition,
    r: &ComplexMatrix,
    d3: &SpectralDecomposition,
) -> Result<ComplexMatrix> {
    let (n2, n3) = (d2.dim(), d3.dim());
    let expected = d1.dim() * n2 * n3;
    if samples.len() != expected {
        return Err(Error::DimensionMismatch {
            context: "kernel samples vs spectra",
            left: samples.len(),
            right: expected,
        });
    }
    contract(|i, j, k| samples[(i * n2 + j) * n3 + k], d1, t, d2, r, d3)
}

/// Which variable carries the matrix-valued family.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HaagerupShape {
    /// `Σ α_p(x₁) β_pq(x₂) γ_q(x₃)`: bounded on `‖T‖·‖R‖`.
    MiddleMatrix,
    /// `Σ α_j(x₁) β_k(x₂) γ_jk(x₃)`: trace class when `T` is.
    LastMatrix,
    /// `Σ α_jk(x₁) β_j(x₂) γ_k(x₃)`: trace class when `R` is.
    FirstMatrix,
}

impl HaagerupShape {
    pub fn name(self) -> &'static str {
        match self {
            HaagerupShape::MiddleMatrix => "h-h",
            HaagerupShape::LastMatrix => "h-hT",
            HaagerupShape::FirstMatrix => "hT-h",
        }
    }
}

impl fmt::Display for HaagerupShape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

pub type VectorFamily = Arc<dyn Fn(f64) -> Vec<Complex64> + Send + Sync>;
pub type MatrixFamily = Arc<dyn Fn(f64) -> ComplexMatrix + Send + Sync>;

/// A kernel written as `left(x_a)ᵀ · M(x_m) · right(x_b)`, where the shape
/// decides which of `x₁, x₂, x₃` play the roles of `x_a`, `x_m`, `x_b`.
///
/// | shape          | left | right | matrix |
/// |----------------|------|-------|--------|
/// | `MiddleMatrix` | x₁   | x₃    | x₂     |
/// | `LastMatrix`   | x₁   | x₂    | x₃     |
/// | `FirstMatrix`  | x₂   | x₃    | x₁     |
#[derive(Clone)]
pub struct HaagerupRep {
    shape: HaagerupShape,
    left_len: usize,
    right_len: usize,
    left: VectorFamily,
    right: VectorFamily,
    matrix: MatrixFamily,
}

impl fmt::Debug for HaagerupRep {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("HaagerupRep")
            .field("shape", &self.shape)
            .field("left_len", &self.left_len)
            .field("right_len", &self.right_len)
            .finish_non_exhaustive()
    }
}

/// Product of the three factor norms of one representation, measured over
/// the atoms of the spectral measures in use (the `L∞(E)` norms).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HaagerupNormBound {
    pub value: f64,
    pub shape: HaagerupShape,
    pub left: f64,
    pub matrix: f64,
    pub right: f64,
}

impl HaagerupRep {
    pub fn new(
        shape: HaagerupShape,
        left_len: usize,
        right_len: usize,
        left: VectorFamily,
        right: VectorFamily,
        matrix: MatrixFamily,
    ) -> Self {
        Self {
            shape,
            left_len,
            right_len,
            left,
            right,
            matrix,
        }
    }

    /// One-term representation `α(x₁) β(x₂) γ(x₃)` in the given shape.
    pub fn separable(
        shape: HaagerupShape,
        alpha: impl Fn(f64) -> Complex64 + Send + Sync + 'static,
        beta: impl Fn(f64) -> Complex64 + Send + Sync + 'static,
        gamma: impl Fn(f64) -> Complex64 + Send + Sync + 'static,
    ) -> Self {
        let (alpha, beta, gamma) = (Arc::new(alpha), Arc::new(beta), Arc::new(gamma));
        let scalar = |g: Arc<dyn Fn(f64) -> Complex64 + Send + Sync>| -> VectorFamily {
            Arc::new(move |x| vec![g(x)])
        };
        let matrix = |g: Arc<dyn Fn(f64) -> Complex64 + Send + Sync>| -> MatrixFamily {
            Arc::new(move |x| ComplexMatrix::from_fn(1, 1, |_, _| g(x)))
        };
        let (left, right, middle) = match shape {
            HaagerupShape::MiddleMatrix => (scalar(alpha), scalar(gamma), matrix(beta)),
            HaagerupShape::LastMatrix => (scalar(alpha), scalar(beta), matrix(gamma)),
            HaagerupShape::FirstMatrix => (scalar(beta), scalar(gamma), matrix(alpha)),
        };
        Self::new(shape, 1, 1, left, right, middle)
    }

    pub fn shape(&self) -> HaagerupShape {
        self.shape
    }

    pub fn left_len(&self) -> usize {
        self.left_len
    }

    pub fn right_len(&self) -> usize {
        self.right_len
    }

    pub fn left_at(&self, x: f64) -> Vec<Complex64> {
        (self.left)(x)
    }

    pub fn right_at(&self, x: f64) -> Vec<Complex64> {
        (self.right)(x)
    }

    pub fn matrix_at(&self, x: f64) -> ComplexMatrix {
        (self.matrix)(x)
    }

    /// Spectra assigned to (left, right, matrix) under this shape.
    fn roles<'a>(
        &self,
        d1: &'a SpectralDecomposition,
        d2: &'a SpectralDecomposition,
        d3: &'a SpectralDecomposition,
    ) -> (&'a [f64], &'a [f64], &'a [f64]) {
        match self.shape {
            HaagerupShape::MiddleMatrix => (&d1.eigenvalues, &d3.eigenvalues, &d2.eigenvalues),
            HaagerupShape::LastMatrix => (&d1.eigenvalues, &d2.eigenvalues, &d3.eigenvalues),
            HaagerupShape::FirstMatrix => (&d2.eigenvalues, &d3.eigenvalues, &d1.eigenvalues),
        }
    }

    /// The represented kernel at one point.
    pub fn eval(&self, x1: f64, x2: f64, x3: f64) -> Complex64 {
        let (xa, xb, xm) = match self.shape {
            HaagerupShape::MiddleMatrix => (x1, x3, x2),
            HaagerupShape::LastMatrix => (x1, x2, x3),
            HaagerupShape::FirstMatrix => (x2, x3, x1),
        };
        let a = self.left_at(xa);
        let m = self.matrix_at(xm);
        let b = self.right_at(xb);
        let mb = m.mul_vec(&b);
        a.iter().zip(&mb).map(|(x, y)| x * y).sum()
    }

    fn family_matrix(&self, points: &[f64], left: bool) -> Result<ComplexMatrix> {
        let len = if left { self.left_len } else { self.right_len };
        let mut data = Vec::with_capacity(points.len() * len);
        for &x in points {
            let v = if left {
                self.left_at(x)
            } else {
                self.right_at(x)
            };
            if v.len() != len {
                return Err(Error::DimensionMismatch {
                    context: "Haagerup vector family length",
                    left: v.len(),
                    right: len,
                });
            }
            data.extend(v);
        }
        ComplexMatrix::new(points.len(), len, data).map_err(|_| Error::NonFinite("Haagerup factor"))
    }

    fn matrix_checked(&self, x: f64) -> Result<ComplexMatrix> {
        let m = self.matrix_at(x);
        if m.rows() != self.left_len || m.cols() != self.right_len {
            return Err(Error::DimensionMismatch {
                context: "Haagerup matrix family shape",
                left: m.rows() * m.cols(),
                right: self.left_len * self.right_len,
            });
        }
        if m.as_slice()
            .iter()
            .any(|z| !(z.re.is_finite() && z.im.is_finite()))
        {
            return Err(Error::NonFinite("Haagerup factor"));
        }
        Ok(m)
    }

    /// Factor norms over the atoms of `d1, d2, d3`.
    pub fn norm_bound(
        &self,
        d1: &SpectralDecomposition,
        d2: &SpectralDecomposition,
        d3: &SpectralDecomposition,
    ) -> Result<HaagerupNormBound> {
        let (pa, pb, pm) = self.roles(d1, d2, d3);
        let row_sup =
            |m: &ComplexMatrix| (0..m.rows()).map(|i| norm2(m.row(i))).fold(0.0, f64::max);
        let left = row_sup(&self.family_matrix(pa, true)?);
        let right = row_sup(&self.family_matrix(pb, false)?);
        let mut matrix = 0.0_f64;
        for &x in pm {
            matrix = matrix.max(operator_norm(&self.matrix_checked(x)?));
        }
        let value = left * matrix * right;
        if !value.is_finite() {
            return Err(Error::NonFinite("Haagerup norm bound"));
        }
        Ok(HaagerupNormBound {
            value,
            shape: self.shape,
            left,
            matrix,
            right,
        })
    }
}

/// `∭ Ψ dE₁ T dE₂ R dE₃` for `Ψ` given by a Haagerup representation.
///
/// The families are evaluated once per atom, giving the kernel tensor
/// `Ψ(λ_i, μ_j, ν_k)` as products `left · M · right`; the tensor is then
/// contracted exactly as in [`toi_direct`].
pub fn toi_haagerup(
    rep: &HaagerupRep,
    d1: &SpectralDecomposition,
    t: &ComplexMatrix,
    d2: &SpectralDecomposition,
    r: &ComplexMatrix,
    d3: &SpectralDecomposition,
) -> Result<ComplexMatrix> {
    check_chain(d1, t, d2, r, d3)?;
    let (pa, pb, pm) = rep.roles(d1, d2, d3);
    let la = rep.family_matrix(pa, true)?;
    let rb = rep.family_matrix(pb, false)?.transpose();
    let slices: Vec<ComplexMatrix> = pm
        .iter()
        .map(|&x| {
            let m = rep.matrix_checked(x)?;
            la.matmul(&m)?.matmul(&rb)
        })
        .collect::<Result<_>>()?;
    let shape = rep.shape;
    contract(
        |i, j, k| match shape {
            HaagerupShape::MiddleMatrix => slices[j][(i, k)],
            HaagerupShape::LastMatrix => slices[k][(i, j)],
            HaagerupShape::FirstMatrix => slices[i][(j, k)],
        },
        d1,
        t,
        d2,
        r,
        d3,
    )
}

/// Operator-norm inequality `‖W‖ ≤ ‖Ψ‖_h · ‖T‖ · ‖R‖` for the `MiddleMatrix` shape.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub bound: HaagerupNormBound,
}

impl BoundCheck {
    pub fn holds(&self) -> bool {
        self.lhs <= self.rhs * (1.0 + 1e-9) + 1e-300
    }
}

pub fn operator_bound_check(
    rep: &HaagerupRep,
    d1: &SpectralDecomposition,
    t: &ComplexMatrix,
    d2: &SpectralDecomposition,
    r: &ComplexMatrix,
    d3: &SpectralDecomposition,
) -> Result<BoundCheck> {
    if rep.shape != HaagerupShape::MiddleMatrix {
        return Err(Error::WrongShape {
            got: rep.shape.name(),
            expected: HaagerupShape::MiddleMatrix.name(),
        });
    }
    let w = toi_haagerup(rep, d1, t, d2, r, d3)?;
    let bound = rep.norm_bound(d1, d2, d3)?;
    Ok(BoundCheck {
        lhs: operator_norm(&w),
        rhs: bound.value * operator_norm(t) * operator_norm(r),
        bound,
    })
}

/// Trace-norm inequality: `‖W‖_S1 ≤ ‖Ψ‖ · ‖T‖_S1 · ‖R‖` for `LastMatrix`,
/// and `‖W‖_S1 ≤ ‖Ψ‖ · ‖T‖ · ‖R‖_S1` for `FirstMatrix`.
pub fn s1_bound_check(
    rep: &HaagerupRep,
    d1: &SpectralDecomposition,
    t: &ComplexMatrix,
    d2: &SpectralDecomposition,
    r: &ComplexMatrix,
    d3: &SpectralDecomposition,
) -> Result<BoundCheck> {
    let operators = match rep.shape {
        HaagerupShape::LastMatrix => schatten_1(t) * operator_norm(r),
        HaagerupShape::FirstMatrix => operator_norm(t) * schatten_1(r),
        HaagerupShape::MiddleMatrix => {
            return Err(Error::WrongShape {
                got: rep.shape.name(),
                expected: "h-hT or hT-h",
            })
        }
    };
    let w = toi_haagerup(rep, d1, t, d2, r, d3)?;
    let bound = rep.norm_bound(d1, d2, d3)?;
    Ok(BoundCheck {
        lhs: schatten_1(&w),
        rhs: bound.value * operators,
        bound,
    })
}

/// Both sides of the trace pairing of `W` against `Q`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceDuality {
    /// `trace(W Q)` with `W` from [`toi_direct`].
    pub direct: Complex64,
    /// The reassociated integral traced against `T` (or `R`).
    pub reassociated: Complex64,
}

impl TraceDuality {
    pub fn residual(&self) -> f64 {
        (self.direct - self.reassociated).norm()
    }
}

fn trace_of_product(a: &ComplexMatrix, b: &ComplexMatrix) -> Complex64 {
    // trace(AB) = Σ_ij A_ij B_ji
    let mut acc = ZERO;
    for i in 0..a.rows() {
        for j in 0..a.cols() {
            acc += a[(i, j)] * b[(j, i)];
        }
    }
    acc
}

/// `trace(W Q)` against `trace(V T)`, where
/// `V = ∭ Ψ(x₁,x₂,x₃) dE₂(x₂) R dE₃(x₃) Q dE₁(x₁)`.
pub fn toi_trace_duality<K: Kernel3 + ?Sized>(
    psi: &K,
    d1: &SpectralDecomposition,
    t: &ComplexMatrix,
    d2: &SpectralDecomposition,
    r: &ComplexMatrix,
    d3: &SpectralDecomposition,
    q: &ComplexMatrix,
) -> Result<TraceDuality> {
    check_q(q, d1, d3)?;
    let w = toi_direct(psi, d1, t, d2, r, d3)?;
    let permuted = |x2: f64, x3: f64, x1: f64| psi.eval(x1, x2, x3);
    let v = toi_direct(&permuted, d2, r, d3, q, d1)?;
    Ok(TraceDuality {
        direct: trace_of_product(&w, q),
        reassociated: trace_of_product(&v, t),
    })
}

/// `trace(W Q)` against `trace(V R)`, where
/// `V = ∭ Ψ(x₁,x₂,x₃) dE₃(x₃) Q dE₁(x₁) T dE₂(x₂)`.
pub fn toi_trace_duality_r<K: Kernel3 + ?Sized>(
    psi: &K,
    d1: &SpectralDecomposition,
    t: &ComplexMatrix,
    d2: &SpectralDecomposition,
    r: &ComplexMatrix,
    d3: &SpectralDecomposition,
    q: &ComplexMatrix,
) -> Result<TraceDuality> {
    check_q(q, d1, d3)?;
    let w = toi_direct(psi, d1, t, d2, r, d3)?;
    let permuted = |x3: f64, x1: f64, x2: f64| psi.eval(x1, x2, x3);
    let v = toi_direct(&permuted, d3, q, d1, t, d2)?;
    Ok(TraceDuality {
        direct: trace_of_product(&w, q),
        reassociated: trace_of_product(&v, r),
    })
}

/// `|trace(W Q) − trace(V T)|` for the reassociated integral `V` of [`toi_trace_duality`].
pub fn toi_trace_duality_check<K: Kernel3 + ?Sized>(
    psi: &K,
    d1: &SpectralDecomposition,
    t: &ComplexMatrix,
    d2: &SpectralDecomposition,
    r: &ComplexMatrix,
    d3: &SpectralDecomposition,
    q: &ComplexMatrix,
) -> Result<f64> {
    Ok(toi_trace_duality(psi, d1, t, d2, r, d3, q)?.residual())
}

fn check_q(
    q: &ComplexMatrix,
    d1: &SpectralDecomposition,
    d3: &SpectralDecomposition,
) -> Result<()> {
    if q.rows() != d3.dim() || q.cols() != d1.dim() {
        return Err(Error::DimensionMismatch {
            context: "Q must map the first space into the third",
            left: q.rows() * q.cols(),
            right: d3.dim() * d1.dim(),
        });
    }
    Ok(())
}
