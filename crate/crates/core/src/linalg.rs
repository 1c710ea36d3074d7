//! Dense complex matrices and the spectral kernels everything else is built on.
//!
//! Storage is row-major `Vec<Complex64>`. The Hermitian eigensolver is a cyclic
//! Jacobi method: each sweep visits every off-diagonal pair once, in the
//! round-robin order that lets a whole round of disjoint rotations be applied
//! row-by-row. Singular values are square roots of the eigenvalues of the Gram
//! matrix `M*M` (or `MM*` when the matrix is wider than tall).

use std::fmt;
use std::ops::{Index, IndexMut};

use num_complex::Complex64;

use crate::error::{Error, Result};

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };
const ONE: Complex64 = Complex64 { re: 1.0, im: 0.0 };

/// Relative tolerance of the Hermitian invariant, `‖H − H*‖_max ≤ tol·(1 + ‖H‖_max)`.
pub const HERMITIAN_TOLERANCE: f64 = 1e-12;

const MAX_SWEEPS: usize = 60;

#[derive(Clone, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix {}x{} [", self.rows, self.cols)?;
        for r in 0..self.rows {
            write!(f, "  ")?;
            for c in 0..self.cols {
                let z = self[(r, c)];
                write!(f, "{:+.6e}{:+.6e}i ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

impl ComplexMatrix {
    /// Builds a matrix from row-major entries, rejecting wrong lengths and non-finite values.
    pub fn new(rows: usize, cols: usize, data: Vec<Complex64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::BadShape {
                rows,
                cols,
                got: data.len(),
            });
        }
        if data.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite("matrix entries"));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![ZERO; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = ONE;
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(f(r, c));
            }
        }
        Self { rows, cols, data }
    }

    pub fn from_real_diagonal(diag: &[f64]) -> Self {
        let n = diag.len();
        let mut m = Self::zeros(n, n);
        for (i, &d) in diag.iter().enumerate() {
            m[(i, i)] = Complex64::new(d, 0.0);
        }
        m
    }

    /// Builds a matrix whose columns are the given vectors.
    pub fn from_columns(rows: usize, columns: &[Vec<Complex64>]) -> Result<Self> {
        let cols = columns.len();
        let mut m = Self::zeros(rows, cols);
        for (c, col) in columns.iter().enumerate() {
            if col.len() != rows {
                return Err(Error::DimensionMismatch {
                    context: "column length",
                    left: rows,
                    right: col.len(),
                });
            }
            for (r, &z) in col.iter().enumerate() {
                m[(r, c)] = z;
            }
        }
        Ok(m)
    }

    /// Rank-one matrix `u v*`.
    pub fn outer(u: &[Complex64], v: &[Complex64]) -> Self {
        Self::from_fn(u.len(), v.len(), |r, c| u[r] * v[c].conj())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [Complex64] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<Complex64> {
        self.data
    }

    pub fn row(&self, r: usize) -> &[Complex64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn column(&self, c: usize) -> Vec<Complex64> {
        (0..self.rows).map(|r| self[(r, c)]).collect()
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |r, c| self[(c, r)].conj())
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |r, c| self[(c, r)])
    }

    pub fn conj(&self) -> Self {
        self.map(|z| z.conj())
    }

    pub fn map(&self, f: impl Fn(Complex64) -> Complex64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&z| f(z)).collect(),
        }
    }

    pub fn scale(&self, a: Complex64) -> Self {
        self.map(|z| z * a)
    }

    pub fn scale_real(&self, a: f64) -> Self {
        self.map(|z| z * a)
    }

    fn check_same_shape(&self, other: &Self, context: &'static str) -> Result<()> {
        if self.rows != other.rows {
            return Err(Error::DimensionMismatch {
                context,
                left: self.rows,
                right: other.rows,
            });
        }
        if self.cols != other.cols {
            return Err(Error::DimensionMismatch {
                context,
                left: self.cols,
                right: other.cols,
            });
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_same_shape(other, "matrix addition")?;
        Ok(self.zip_with(other, |a, b| a + b))
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check_same_shape(other, "matrix subtraction")?;
        Ok(self.zip_with(other, |a, b| a - b))
    }

    /// Entrywise (Schur/Hadamard) product.
    pub fn hadamard(&self, other: &Self) -> Result<Self> {
        self.check_same_shape(other, "Hadamard product")?;
        Ok(self.zip_with(other, |a, b| a * b))
    }

    fn zip_with(&self, other: &Self, f: impl Fn(Complex64, Complex64) -> Complex64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        }
    }

    pub fn matmul(&self, other: &Self) -> Result<Self> {
        if self.cols != other.rows {
            return Err(Error::DimensionMismatch {
                context: "matrix product inner dimension",
                left: self.cols,
                right: other.rows,
            });
        }
        let mut out = Self::zeros(self.rows, other.cols);
        let oc = other.cols;
        for r in 0..self.rows {
            let dst = &mut out.data[r * oc..(r + 1) * oc];
            for (k, &a) in self.row(r).iter().enumerate() {
                if a == ZERO {
                    continue;
                }
                axpy(a, other.row(k), dst);
            }
        }
        Ok(out)
    }

    /// `self* · other` without materialising the adjoint.
    pub fn adjoint_matmul(&self, other: &Self) -> Result<Self> {
        if self.rows != other.rows {
            return Err(Error::DimensionMismatch {
                context: "adjoint product inner dimension",
                left: self.rows,
                right: other.rows,
            });
        }
        let mut out = Self::zeros(self.cols, other.cols);
        let oc = other.cols;
        for k in 0..self.rows {
            let brow = other.row(k);
            for (r, &a) in self.row(k).iter().enumerate() {
                if a == ZERO {
                    continue;
                }
                axpy(a.conj(), brow, &mut out.data[r * oc..(r + 1) * oc]);
            }
        }
        Ok(out)
    }

    /// `self · other*`.
    pub fn matmul_adjoint(&self, other: &Self) -> Result<Self> {
        if self.cols != other.cols {
            return Err(Error::DimensionMismatch {
                context: "product with adjoint inner dimension",
                left: self.cols,
                right: other.cols,
            });
        }
        Ok(Self::from_fn(self.rows, other.rows, |r, c| {
            self.row(r)
                .iter()
                .zip(other.row(c))
                .fold(ZERO, |acc, (&a, &b)| acc + a * b.conj())
        }))
    }

    pub fn mul_vec(&self, v: &[Complex64]) -> Vec<Complex64> {
        debug_assert_eq!(v.len(), self.cols);
        (0..self.rows)
            .map(|r| {
                self.row(r)
                    .iter()
                    .zip(v)
                    .fold(ZERO, |acc, (&a, &b)| acc + a * b)
            })
            .collect()
    }

    pub fn adjoint_mul_vec(&self, v: &[Complex64]) -> Vec<Complex64> {
        debug_assert_eq!(v.len(), self.rows);
        let mut out = vec![ZERO; self.cols];
        for (r, &x) in v.iter().enumerate() {
            for (o, &a) in out.iter_mut().zip(self.row(r)) {
                *o += a.conj() * x;
            }
        }
        out
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// `max |M − M*|` entrywise.
    pub fn hermitian_deviation(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let n = self.rows;
        let mut dev: f64 = 0.0;
        for r in 0..n {
            for c in r..n {
                dev = dev.max((self[(r, c)] - self[(c, r)].conj()).norm());
            }
        }
        dev
    }

    /// Conjugates by a unitary: `W · self · W*`.
    pub fn conjugate_by(&self, w: &Self) -> Result<Self> {
        w.matmul(self)?.matmul_adjoint(w)
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = Complex64;

    fn index(&self, (r, c): (usize, usize)) -> &Complex64 {
        &self.data[r * self.cols + c]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut Complex64 {
        &mut self.data[r * self.cols + c]
    }
}

#[inline]
fn axpy(a: Complex64, x: &[Complex64], y: &mut [Complex64]) {
    for (yi, &xi) in y.iter_mut().zip(x) {
        *yi += a * xi;
    }
}

/// A square matrix equal to its conjugate transpose (within [`HERMITIAN_TOLERANCE`]).
///
/// The stored matrix is exactly Hermitian: construction replaces the input by
/// `(M + M*)/2` after validating it.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianMatrix(ComplexMatrix);

impl HermitianMatrix {
    pub fn new(m: ComplexMatrix) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::NotSquare {
                rows: m.rows,
                cols: m.cols,
            });
        }
        let deviation = m.hermitian_deviation();
        let tolerance = HERMITIAN_TOLERANCE * (1.0 + m.max_abs());
        if deviation > tolerance {
            return Err(Error::NotHermitian {
                deviation,
                tolerance,
            });
        }
        Ok(Self(hermitian_part(&m)))
    }

    /// Projects an arbitrary square matrix onto its Hermitian part `(M + M*)/2`.
    pub fn from_hermitian_part(m: &ComplexMatrix) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::NotSquare {
                rows: m.rows,
                cols: m.cols,
            });
        }
        Ok(Self(hermitian_part(m)))
    }

    pub fn from_real_diagonal(diag: &[f64]) -> Self {
        Self(ComplexMatrix::from_real_diagonal(diag))
    }

    /// `U diag(λ) U*` for a given orthonormal column set `U`.
    pub fn from_spectrum(vectors: &ComplexMatrix, eigenvalues: &[f64]) -> Result<Self> {
        if vectors.cols() != eigenvalues.len() {
            return Err(Error::DimensionMismatch {
                context: "eigenvector count vs eigenvalue count",
                left: vectors.cols(),
                right: eigenvalues.len(),
            });
        }
        let scaled = ComplexMatrix::from_fn(vectors.rows(), vectors.cols(), |r, c| {
            vectors[(r, c)] * eigenvalues[c]
        });
        Self::from_hermitian_part(&scaled.matmul_adjoint(vectors)?)
    }

    pub fn dim(&self) -> usize {
        self.0.rows
    }

    pub fn as_matrix(&self) -> &ComplexMatrix {
        &self.0
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.0
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        Ok(Self(self.0.add(&other.0)?))
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        Ok(Self(self.0.sub(&other.0)?))
    }

    pub fn scale(&self, a: f64) -> Self {
        Self(self.0.scale_real(a))
    }

    /// `W H W*` for unitary `W`.
    pub fn conjugate_by(&self, w: &ComplexMatrix) -> Result<Self> {
        Self::from_hermitian_part(&self.0.conjugate_by(w)?)
    }

    pub fn commutator_norm(&self, other: &Self) -> Result<f64> {
        let ab = self.0.matmul(&other.0)?;
        let ba = other.0.matmul(&self.0)?;
        Ok(ab.sub(&ba)?.max_abs())
    }
}

fn hermitian_part(m: &ComplexMatrix) -> ComplexMatrix {
    let n = m.rows;
    let mut out = m.clone();
    for r in 0..n {
        out[(r, r)] = Complex64::new(m[(r, r)].re, 0.0);
        for c in r + 1..n {
            let z = (m[(r, c)] + m[(c, r)].conj()) * 0.5;
            out[(r, c)] = z;
            out[(c, r)] = z.conj();
        }
    }
    out
}

/// Eigenvalues (ascending) and orthonormal eigenvectors (columns of `vectors`).
///
/// This is the finite, atomic spectral measure of a Hermitian matrix: atom
/// `eigenvalues[i]` carries the rank-one projection onto column `i`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralDecomposition {
    pub eigenvalues: Vec<f64>,
    pub vectors: ComplexMatrix,
}

impl SpectralDecomposition {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn reconstruct(&self) -> ComplexMatrix {
        self.map_real(|x| x)
    }

    /// Functional calculus of a single Hermitian matrix: `U diag(g(λ)) U*`.
    pub fn map(&self, g: impl Fn(f64) -> Complex64) -> ComplexMatrix {
        let u = &self.vectors;
        let values: Vec<Complex64> = self.eigenvalues.iter().map(|&x| g(x)).collect();
        let scaled = ComplexMatrix::from_fn(u.rows(), u.cols(), |r, c| u[(r, c)] * values[c]);
        scaled
            .matmul_adjoint(u)
            .expect("eigenvector matrix is square")
    }

    pub fn map_real(&self, g: impl Fn(f64) -> f64) -> ComplexMatrix {
        self.map(|x| Complex64::new(g(x), 0.0))
    }

    /// Rank-one spectral projection `u_i u_i*`.
    pub fn projector(&self, i: usize) -> ComplexMatrix {
        let v = self.vectors.column(i);
        ComplexMatrix::outer(&v, &v)
    }

    /// Largest absolute eigenvalue.
    pub fn spectral_radius(&self) -> f64 {
        self.eigenvalues.iter().map(|x| x.abs()).fold(0.0, f64::max)
    }

    /// `max |U*U − I|`.
    pub fn orthonormality_residual(&self) -> f64 {
        let gram = self
            .vectors
            .adjoint_matmul(&self.vectors)
            .expect("square eigenvector matrix");
        gram.sub(&ComplexMatrix::identity(self.dim()))
            .expect("same shape")
            .max_abs()
    }

    /// Conjugates the decomposition by a unitary, giving the decomposition of `W H W*`.
    pub fn conjugate_by(&self, w: &ComplexMatrix) -> Result<Self> {
        Ok(Self {
            eigenvalues: self.eigenvalues.clone(),
            vectors: w.matmul(&self.vectors)?,
        })
    }
}

/// Full eigendecomposition of a Hermitian matrix by cyclic Jacobi sweeps.
///
/// Eigenvalues are sorted ascending; equal eigenvalues keep the column order in
/// which the sweeps left them (stable sort). The result is a deterministic
/// function of the input bits.
pub fn eig_hermitian(h: &HermitianMatrix) -> SpectralDecomposition {
    let n = h.dim();
    let mut work = h.as_matrix().clone();
    let mut vectors = ComplexMatrix::identity(n);
    jacobi_sweeps(&mut work, Some(&mut vectors));
    let raw: Vec<f64> = (0..n).map(|i| work[(i, i)].re).collect();
    let order = ascending_order(&raw);
    let eigenvalues = order.iter().map(|&i| raw[i]).collect();
    let vectors = ComplexMatrix::from_fn(n, n, |r, c| vectors[(r, order[c])]);
    SpectralDecomposition {
        eigenvalues,
        vectors,
    }
}

/// Eigenvalues only (ascending), by Householder reduction to a real
/// tridiagonal matrix followed by implicit QL iterations.
pub fn eigenvalues_hermitian(h: &HermitianMatrix) -> Vec<f64> {
    let reduced = tridiagonalize(h.as_matrix(), false);
    let mut d = reduced.diagonal;
    let mut e: Vec<f64> = reduced.subdiagonal.iter().map(|b| b.norm()).collect();
    tridiagonal_ql(&mut d, &mut e, None);
    d.sort_by(|a, b| a.total_cmp(b));
    d
}

/// Full eigendecomposition through Householder tridiagonalisation and implicit
/// QL with accumulated rotations. Faster than [`eig_hermitian`] for large `n`;
/// used where only an orthonormal eigenbasis is needed, not a particular one.
pub fn eig_hermitian_tridiagonal(h: &HermitianMatrix) -> SpectralDecomposition {
    let n = h.dim();
    let reduced = tridiagonalize(h.as_matrix(), true);
    let q = reduced.accumulate_q(n);
    // D = diag(phases) makes the subdiagonal real: A = (QD) T_real (QD)*.
    let mut phases = vec![ONE; n];
    for k in 0..n.saturating_sub(1) {
        let b = reduced.subdiagonal[k];
        phases[k + 1] = if b == ZERO {
            phases[k]
        } else {
            phases[k] * (b / b.norm())
        };
    }
    // rows of `zt` are the columns of QD
    let mut zt = ComplexMatrix::from_fn(n, n, |i, r| q[(r, i)] * phases[i]);
    let mut d = reduced.diagonal;
    let mut e: Vec<f64> = reduced.subdiagonal.iter().map(|b| b.norm()).collect();
    tridiagonal_ql(&mut d, &mut e, Some(&mut zt));
    let order = ascending_order(&d);
    SpectralDecomposition {
        eigenvalues: order.iter().map(|&i| d[i]).collect(),
        vectors: ComplexMatrix::from_fn(n, n, |r, c| zt[(order[c], r)]),
    }
}

struct Tridiagonal {
    diagonal: Vec<f64>,
    /// `subdiagonal[k]` is the `(k+1, k)` entry; the last entry is zero.
    subdiagonal: Vec<Complex64>,
    /// Unit Householder vectors acting on indices `k+1..n`, one per step `k`.
    reflectors: Vec<Vec<Complex64>>,
}

impl Tridiagonal {
    /// `Q = H_0 H_1 ⋯ H_{n-3}` with `A = Q T Q*`.
    fn accumulate_q(&self, n: usize) -> ComplexMatrix {
        let mut q = ComplexMatrix::identity(n);
        let mut w = vec![ZERO; n];
        for (k, v) in self.reflectors.iter().enumerate().rev() {
            if v.is_empty() {
                continue;
            }
            let lo = k + 1;
            let data = q.as_mut_slice();
            // w = v* Q[lo.., lo..]
            w[lo..].iter_mut().for_each(|z| *z = ZERO);
            for (i, vi) in v.iter().enumerate() {
                let row = &data[(lo + i) * n + lo..(lo + i + 1) * n];
                let vc = vi.conj();
                for (wj, x) in w[lo..].iter_mut().zip(row) {
                    *wj += vc * x;
                }
            }
            for (i, vi) in v.iter().enumerate() {
                let row = &mut data[(lo + i) * n + lo..(lo + i + 1) * n];
                let a = *vi * 2.0;
                for (x, wj) in row.iter_mut().zip(&w[lo..]) {
                    *x -= a * wj;
                }
            }
        }
        q
    }
}

/// Unitary similarity to a tridiagonal matrix by Householder reflections.
fn tridiagonalize(m: &ComplexMatrix, keep_reflectors: bool) -> Tridiagonal {
    let n = m.rows();
    let mut a = m.clone();
    let mut diagonal = vec![0.0; n];
    let mut subdiagonal = vec![ZERO; n];
    let mut reflectors = Vec::new();
    let mut v = vec![ZERO; n];
    let mut p = vec![ZERO; n];
    for k in 0..n.saturating_sub(2) {
        let len = n - k - 1;
        let data = a.as_mut_slice();
        let mut norm_x = 0.0;
        for i in 0..len {
            v[i] = data[(k + 1 + i) * n + k];
            norm_x += v[i].norm_sqr();
        }
        let norm_x = norm_x.sqrt();
        diagonal[k] = data[k * n + k].re;
        if norm_x == 0.0 {
            if keep_reflectors {
                reflectors.push(Vec::new());
            }
            continue;
        }
        let x0 = v[0];
        let phase = if x0 == ZERO { ONE } else { x0 / x0.norm() };
        let alpha = -phase * norm_x;
        subdiagonal[k] = alpha;
        v[0] -= alpha;
        let norm_v = norm2(&v[..len]);
        v[..len].iter_mut().for_each(|z| *z /= norm_v);
        // p = A v on the trailing block, K = v* p
        for i in 0..len {
            let row = &data[(k + 1 + i) * n + k + 1..(k + 1 + i) * n + n];
            p[i] = row.iter().zip(&v[..len]).map(|(x, y)| x * y).sum();
        }
        let kappa: f64 = v[..len]
            .iter()
            .zip(&p[..len])
            .map(|(x, y)| (x.conj() * y).re)
            .sum();
        // A ← A − v w* − w v*, w = 2p − 2K v
        for i in 0..len {
            p[i] = (p[i] - v[i] * kappa) * 2.0;
        }
        for i in 0..len {
            let vi = v[i];
            let wi = p[i];
            let row = &mut data[(k + 1 + i) * n + k + 1..(k + 1 + i) * n + n];
            for (j, x) in row.iter_mut().enumerate() {
                *x -= vi * p[j].conj() + wi * v[j].conj();
            }
        }
        if keep_reflectors {
            reflectors.push(v[..len].to_vec());
        }
    }
    if n >= 2 {
        diagonal[n - 2] = a[(n - 2, n - 2)].re;
        diagonal[n - 1] = a[(n - 1, n - 1)].re;
        subdiagonal[n - 2] = a[(n - 1, n - 2)];
    } else if n == 1 {
        diagonal[0] = a[(0, 0)].re;
    }
    Tridiagonal {
        diagonal,
        subdiagonal,
        reflectors,
    }
}

/// Implicit QL with Wilkinson-type shifts on a real symmetric tridiagonal matrix.
/// On return `d` holds the (unsorted) eigenvalues. Rotations are applied to the
/// rows of `zt` when given, so row `i` ends up as the eigenvector of `d[i]`.
fn tridiagonal_ql(d: &mut [f64], e: &mut [f64], mut zt: Option<&mut ComplexMatrix>) {
    let n = d.len();
    for l in 0..n {
        let mut iterations = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l || iterations == 60 {
                break;
            }
            iterations += 1;
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut deflated = false;
            let mut i = m;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    deflated = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
                if let Some(z) = zt.as_deref_mut() {
                    let cols = z.cols();
                    let (upper, lower) = z.as_mut_slice().split_at_mut((i + 1) * cols);
                    let row_i = &mut upper[i * cols..];
                    let row_next = &mut lower[..cols];
                    for (x, y) in row_i.iter_mut().zip(row_next.iter_mut()) {
                        let f = *y;
                        *y = *x * s + f * c;
                        *x = *x * c - f * s;
                    }
                }
            }
            if deflated {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
}

fn ascending_order(values: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    order
}

/// One 2x2 Hermitian Jacobi rotation `G = diag(1, e^{-iφ}) · [[c, s], [-s, c]]`
/// acting on the index pair `(p, q)`.
#[derive(Clone, Copy)]
struct Rotation {
    p: usize,
    q: usize,
    c: f64,
    s: f64,
    /// `s·e^{-iφ}`
    sp: Complex64,
    /// `c·e^{-iφ}`
    cp: Complex64,
    new_pp: f64,
    new_qq: f64,
}

impl Rotation {
    fn annihilating(p: usize, q: usize, a: f64, d: f64, b: Complex64) -> Self {
        let abs_b = b.norm();
        let phase = b / abs_b;
        let theta = (d - a) / (2.0 * abs_b);
        let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
        let c = 1.0 / (t * t + 1.0).sqrt();
        let s = t * c;
        let e = phase.conj();
        Self {
            p,
            q,
            c,
            s,
            sp: e * s,
            cp: e * c,
            new_pp: a - t * abs_b,
            new_qq: d + t * abs_b,
        }
    }

    /// Right multiplication on one row: `(x, y) ← (x, y)·G`.
    #[inline]
    fn apply_right(&self, row: &mut [Complex64]) {
        let x = row[self.p];
        let y = row[self.q];
        row[self.p] = x * self.c - y * self.sp;
        row[self.q] = x * self.s + y * self.cp;
    }
}

/// Round-robin ("chess tournament") schedule: `n'−1` rounds of disjoint pairs
/// covering every unordered pair exactly once, `n' = n` rounded up to even.
fn round_robin(n: usize) -> Vec<Vec<(usize, usize)>> {
    if n < 2 {
        return Vec::new();
    }
    let m = n + (n % 2);
    let mut ring: Vec<usize> = (0..m).collect();
    let mut rounds = Vec::with_capacity(m - 1);
    for _ in 0..m - 1 {
        let mut pairs = Vec::with_capacity(m / 2);
        for i in 0..m / 2 {
            let (a, b) = (ring[i], ring[m - 1 - i]);
            if a < n && b < n {
                pairs.push((a.min(b), a.max(b)));
            }
        }
        rounds.push(pairs);
        let last = ring.pop().expect("non-empty ring");
        ring.insert(1, last);
    }
    rounds
}

fn off_diagonal_norm_sqr(h: &ComplexMatrix) -> f64 {
    let n = h.rows();
    let mut off = 0.0;
    for r in 0..n {
        for c in r + 1..n {
            off += h[(r, c)].norm_sqr();
        }
    }
    2.0 * off
}

fn jacobi_sweeps(h: &mut ComplexMatrix, mut vectors: Option<&mut ComplexMatrix>) {
    let n = h.rows();
    if n < 2 {
        return;
    }
    let frob = h.frobenius_norm();
    if frob == 0.0 {
        return;
    }
    let stop = (1e-15 * frob).powi(2);
    let negligible = 1e-17 * frob / n as f64;
    let schedule = round_robin(n);
    let mut rotations: Vec<Rotation> = Vec::with_capacity(n / 2);
    let mut row_p = vec![ZERO; n];

    for _ in 0..MAX_SWEEPS {
        if off_diagonal_norm_sqr(h) <= stop {
            break;
        }
        for round in &schedule {
            rotations.clear();
            for &(p, q) in round {
                let b = h[(p, q)];
                if b.norm() <= negligible {
                    continue;
                }
                rotations.push(Rotation::annihilating(p, q, h[(p, p)].re, h[(q, q)].re, b));
            }
            if rotations.is_empty() {
                continue;
            }
            // H ← H·G, row by row.
            for r in 0..n {
                let row = &mut h.as_mut_slice()[r * n..(r + 1) * n];
                for rot in &rotations {
                    rot.apply_right(row);
                }
            }
            // H ← G*·H, two rows per rotation.
            for rot in &rotations {
                let (p, q) = (rot.p, rot.q);
                let data = h.as_mut_slice();
                row_p.copy_from_slice(&data[p * n..(p + 1) * n]);
                let spc = rot.sp.conj();
                let cpc = rot.cp.conj();
                for c in 0..n {
                    let x = row_p[c];
                    let y = data[q * n + c];
                    data[p * n + c] = x * rot.c - y * spc;
                    data[q * n + c] = x * rot.s + y * cpc;
                }
                data[p * n + p] = Complex64::new(rot.new_pp, 0.0);
                data[q * n + q] = Complex64::new(rot.new_qq, 0.0);
                data[p * n + q] = ZERO;
                data[q * n + p] = ZERO;
            }
            if let Some(v) = vectors.as_deref_mut() {
                for r in 0..n {
                    let row = &mut v.as_mut_slice()[r * n..(r + 1) * n];
                    for rot in &rotations {
                        rot.apply_right(row);
                    }
                }
            }
        }
    }
}

/// Gram matrix `M*M` if tall (or square), `MM*` if wide, as a Hermitian matrix.
fn gram(m: &ComplexMatrix) -> HermitianMatrix {
    let g = if m.rows() >= m.cols() {
        m.adjoint_matmul(m)
    } else {
        m.matmul_adjoint(m)
    }
    .expect("gram product shapes agree");
    HermitianMatrix::from_hermitian_part(&g).expect("gram matrix is square")
}

/// Singular values in descending order, `min(rows, cols)` of them.
///
/// `σ_i = ‖M v_i‖` over the Gram eigenvectors `v_i`, which resolves values
/// near zero to `ε·σ_max` rather than the `√ε·σ_max` of `√λ_i`.
pub fn singular_values(m: &ComplexMatrix) -> Vec<f64> {
    if m.rows() == 0 || m.cols() == 0 {
        return Vec::new();
    }
    let work = if m.rows() >= m.cols() {
        m.clone()
    } else {
        m.adjoint()
    };
    let vectors = eig_hermitian_tridiagonal(&gram(&work)).vectors;
    let image = work
        .matmul(&vectors)
        .expect("gram eigenvectors match the columns");
    let mut values: Vec<f64> = (0..image.cols()).map(|c| norm2(&image.column(c))).collect();
    values.sort_by(|a, b| b.total_cmp(a));
    values
}

/// Largest singular value.
pub fn operator_norm(m: &ComplexMatrix) -> f64 {
    if m.rows() == 0 || m.cols() == 0 {
        return 0.0;
    }
    eigenvalues_hermitian(&gram(m))
        .last()
        .map_or(0.0, |x| x.max(0.0).sqrt())
}

/// Trace norm: the sum of the singular values.
pub fn schatten_1(m: &ComplexMatrix) -> f64 {
    singular_values(m).iter().sum()
}

/// Thin singular value decomposition `M = U diag(σ) V*` through the Gram eigensystem.
///
/// Only singular values above `max(cutoff, GRAM_FLOOR)·σ_max` are kept: below
/// `√ε·σ_max` the Gram eigenvalues carry no information and `U = MV/σ` would
/// lose orthonormality.
#[derive(Debug, Clone)]
pub struct ThinSvd {
    pub u: ComplexMatrix,
    pub sigma: Vec<f64>,
    pub v: ComplexMatrix,
}

pub const GRAM_FLOOR: f64 = 1e-7;

pub fn thin_svd(m: &ComplexMatrix, cutoff: f64) -> ThinSvd {
    let cutoff = cutoff.max(GRAM_FLOOR);
    let tall = m.rows() >= m.cols();
    let work = if tall { m.clone() } else { m.adjoint() };
    let decomposition = eig_hermitian_tridiagonal(&gram(&work));
    let k = work.cols();
    let sigma_max = decomposition
        .eigenvalues
        .last()
        .map(|&x| x.max(0.0).sqrt())
        .unwrap_or(0.0);
    let mut sigma = Vec::new();
    let mut left = Vec::new();
    let mut right = Vec::new();
    for idx in (0..k).rev() {
        let s = decomposition.eigenvalues[idx].max(0.0).sqrt();
        if sigma_max == 0.0 || s <= cutoff * sigma_max {
            break;
        }
        let v = decomposition.vectors.column(idx);
        let u: Vec<Complex64> = work.mul_vec(&v).into_iter().map(|z| z / s).collect();
        sigma.push(s);
        left.push(u);
        right.push(v);
    }
    let u = ComplexMatrix::from_columns(work.rows(), &left).expect("column lengths agree");
    let v = ComplexMatrix::from_columns(work.cols(), &right).expect("column lengths agree");
    if tall {
        ThinSvd { u, sigma, v }
    } else {
        ThinSvd { u: v, sigma, v: u }
    }
}

/// Leading singular triple `(σ, u, v)` with `M v ≈ σ u`, by power iteration on `M*M`.
///
/// `start` seeds the right vector; a fixed deterministic vector is used otherwise.
pub fn top_singular_pair(
    m: &ComplexMatrix,
    start: Option<&[Complex64]>,
    max_iter: usize,
    tol: f64,
) -> (f64, Vec<Complex64>, Vec<Complex64>) {
    let n = m.cols();
    let mut v: Vec<Complex64> = match start {
        Some(s) if s.len() == n && norm2(s) > 0.0 => s.to_vec(),
        _ => (0..n)
            .map(|i| Complex64::new(1.0 + 0.01 * i as f64, 0.003 * i as f64))
            .collect(),
    };
    normalize(&mut v);
    let mut sigma = 0.0;
    for _ in 0..max_iter.max(1) {
        let mut u = m.mul_vec(&v);
        let s = norm2(&u);
        if s == 0.0 {
            return (0.0, vec![ZERO; m.rows()], v);
        }
        u.iter_mut().for_each(|z| *z /= s);
        let mut next = m.adjoint_mul_vec(&u);
        let t = norm2(&next);
        next.iter_mut().for_each(|z| *z /= t);
        let converged = (t - sigma).abs() <= tol * t;
        sigma = t;
        v = next;
        if converged {
            break;
        }
    }
    let mut u = m.mul_vec(&v);
    let s = norm2(&u);
    if s > 0.0 {
        u.iter_mut().for_each(|z| *z /= s);
    }
    (s, u, v)
}

pub fn norm2(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

fn normalize(v: &mut [Complex64]) {
    let s = norm2(v);
    if s > 0.0 {
        v.iter_mut().for_each(|z| *z /= s);
    }
}

/// Principal square root of a positive semidefinite Hermitian matrix; negative
/// rounding-level eigenvalues are clipped to zero.
pub fn psd_sqrt(h: &HermitianMatrix) -> ComplexMatrix {
    eig_hermitian(h).map_real(|x| x.max(0.0).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    use crate::ensemble::{random_complex_matrix, random_hermitian, random_unitary};

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn tridiagonal_route_matches_jacobi() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for n in [1, 2, 3, 5, 16, 33, 64] {
            let h = random_hermitian(&mut rng, n);
            let fast = eigenvalues_hermitian(&h);
            let slow = eig_hermitian(&h).eigenvalues;
            let scale = 1.0 + slow.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
            for (a, b) in fast.iter().zip(&slow) {
                assert!((a - b).abs() <= 1e-12 * scale, "n={n}: {a} vs {b}");
            }
        }
        // already tridiagonal, and with a zero column to skip
        let h = HermitianMatrix::from_real_diagonal(&[2.0, 0.0, -1.0, 5.0]);
        assert_eq!(eigenvalues_hermitian(&h), vec![-1.0, 0.0, 2.0, 5.0]);
    }

    #[test]
    fn tridiagonal_eigenvectors_reconstruct() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for n in [1, 2, 3, 4, 9, 32, 70] {
            let h = random_hermitian(&mut rng, n);
            let d = eig_hermitian_tridiagonal(&h);
            let scale = 1.0 + d.spectral_radius();
            assert!(d.reconstruct().sub(h.as_matrix()).unwrap().max_abs() <= 1e-10 * scale);
            assert!(d.orthonormality_residual() <= 1e-10);
            assert!(d.eigenvalues.windows(2).all(|w| w[0] <= w[1]));
        }
        let diag = HermitianMatrix::from_real_diagonal(&[3.0, 0.0, 0.0, -2.0]);
        let d = eig_hermitian_tridiagonal(&diag);
        assert_eq!(d.eigenvalues, vec![-2.0, 0.0, 0.0, 3.0]);
        assert!(d.reconstruct().sub(diag.as_matrix()).unwrap().max_abs() == 0.0);
    }

    #[test]
    fn identity_is_its_own_eigensystem() {
        let d = eig_hermitian(&HermitianMatrix::from_real_diagonal(&[1.0, 1.0, 1.0]));
        assert_eq!(d.eigenvalues, vec![1.0, 1.0, 1.0]);
        assert_eq!(d.vectors, ComplexMatrix::identity(3));
    }

    #[test]
    fn diagonal_input_gives_sorted_permutation() {
        let d = eig_hermitian(&HermitianMatrix::from_real_diagonal(&[3.0, 1.0, 2.0]));
        assert_eq!(d.eigenvalues, vec![1.0, 2.0, 3.0]);
        let expected = ComplexMatrix::new(
            3,
            3,
            vec![
                c(0.),
                c(0.),
                c(1.),
                c(1.),
                c(0.),
                c(0.),
                c(0.),
                c(1.),
                c(0.),
            ],
        )
        .unwrap();
        assert_eq!(d.vectors, expected);
    }

    #[test]
    fn rejects_non_square_and_non_hermitian() {
        let m = ComplexMatrix::zeros(2, 3);
        assert!(matches!(
            HermitianMatrix::new(m),
            Err(Error::NotSquare { rows: 2, cols: 3 })
        ));
        let m = ComplexMatrix::new(2, 2, vec![c(1.), c(2.), c(0.), c(1.)]).unwrap();
        assert!(matches!(
            HermitianMatrix::new(m),
            Err(Error::NotHermitian { .. })
        ));
    }

    #[test]
    fn rejects_non_finite_entries() {
        let err = ComplexMatrix::new(1, 1, vec![c(f64::NAN)]).unwrap_err();
        assert_eq!(err, Error::NonFinite("matrix entries"));
    }

    #[test]
    fn random_reconstruction_and_orthonormality() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for n in [1, 2, 3, 8, 17, 40] {
            let h = random_hermitian(&mut rng, n);
            let d = eig_hermitian(&h);
            let scale = 1.0 + d.spectral_radius();
            let residual = d.reconstruct().sub(h.as_matrix()).unwrap().max_abs();
            assert!(residual <= 1e-10 * scale, "n={n} residual {residual}");
            assert!(d.orthonormality_residual() <= 1e-10);
            assert!(d.eigenvalues.windows(2).all(|w| w[0] <= w[1]));
        }
    }

    #[test]
    fn eigenvalues_only_matches_full_solver() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let h = random_hermitian(&mut rng, 12);
        let full = eig_hermitian(&h).eigenvalues;
        let only = eigenvalues_hermitian(&h);
        for (a, b) in full.iter().zip(&only) {
            assert!((a - b).abs() <= 1e-12 * (1.0 + a.abs()));
        }
    }

    #[test]
    fn round_robin_covers_every_pair_once() {
        for n in [2, 3, 6, 9] {
            let mut seen = std::collections::BTreeSet::new();
            for round in round_robin(n) {
                let mut used = std::collections::BTreeSet::new();
                for (p, q) in round {
                    assert!(used.insert(p) && used.insert(q));
                    assert!(seen.insert((p, q)));
                }
            }
            assert_eq!(seen.len(), n * (n - 1) / 2);
        }
    }

    #[test]
    fn zero_matrix_norms_vanish() {
        let z = ComplexMatrix::zeros(4, 3);
        assert_eq!(operator_norm(&z), 0.0);
        assert_eq!(schatten_1(&z), 0.0);
    }

    #[test]
    fn rank_one_operator_norm() {
        let u = vec![c(1.0), Complex64::new(0.0, 2.0), c(-2.0)];
        let v = vec![c(3.0), c(4.0)];
        let m = ComplexMatrix::outer(&u, &v);
        assert_relative_eq!(operator_norm(&m), 3.0 * 5.0, max_relative = 1e-8);
        assert_relative_eq!(schatten_1(&m), 15.0, max_relative = 1e-7);
    }

    #[test]
    fn unitary_has_trace_norm_n() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let w = random_unitary(&mut rng, 9);
        assert_relative_eq!(schatten_1(&w), 9.0, max_relative = 1e-10);
        assert_relative_eq!(operator_norm(&w), 1.0, max_relative = 1e-10);
    }

    #[test]
    fn wide_and_tall_agree() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let m = random_complex_matrix(&mut rng, 4, 7);
        let a = singular_values(&m);
        let b = singular_values(&m.adjoint());
        assert_eq!(a.len(), 4);
        for (x, y) in a.iter().zip(&b) {
            assert_relative_eq!(x, y, max_relative = 1e-9);
        }
    }

    #[test]
    fn thin_svd_reconstructs() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for (r, c) in [(6, 6), (7, 4), (3, 5)] {
            let m = random_complex_matrix(&mut rng, r, c);
            let svd = thin_svd(&m, 1e-12);
            let us = ComplexMatrix::from_fn(svd.u.rows(), svd.u.cols(), |i, j| {
                svd.u[(i, j)] * svd.sigma[j]
            });
            let back = us.matmul_adjoint(&svd.v).unwrap();
            assert!(back.sub(&m).unwrap().max_abs() < 1e-10);
        }
        // rank one: rounding-level directions are dropped, factors stay isometric
        let x = random_complex_matrix(&mut rng, 16, 1);
        let y = random_complex_matrix(&mut rng, 16, 1);
        let svd = thin_svd(&x.matmul_adjoint(&y).unwrap(), 1e-12);
        assert_eq!(svd.sigma.len(), 1);
        let polar = svd.u.matmul_adjoint(&svd.v).unwrap();
        assert!((operator_norm(&polar) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn power_iteration_finds_top_pair() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let m = random_complex_matrix(&mut rng, 10, 10);
        let (s, u, v) = top_singular_pair(&m, None, 5000, 1e-15);
        assert_relative_eq!(s, operator_norm(&m), max_relative = 1e-8);
        let mv = m.mul_vec(&v);
        let resid: f64 = mv
            .iter()
            .zip(&u)
            .map(|(a, b)| (a - b * s).norm_sqr())
            .sum::<f64>()
            .sqrt();
        assert!(resid < 1e-6 * s);
    }

    #[test]
    fn psd_square_root_squares_back() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let m = random_complex_matrix(&mut rng, 6, 6);
        let p = HermitianMatrix::from_hermitian_part(&m.adjoint_matmul(&m).unwrap()).unwrap();
        let r = psd_sqrt(&p);
        let back = r.matmul(&r).unwrap();
        assert!(
            back.sub(p.as_matrix()).unwrap().max_abs() < 1e-10 * (1.0 + p.as_matrix().max_abs())
        );
    }
}
