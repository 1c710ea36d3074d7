//! Bounded, band-limited functions on the plane.
//!
//! Two concrete carriers: [`TrigPoly2D`] (a finite Fourier series with
//! fundamental frequency `omega`) and [`PhiLattice`] (shifted copies of the
//! product Fejér kernel `φ(x,y) = 4·(1−cos x)/x²·(1−cos y)/y²` on the lattice
//! `4π·{1..N}²`). [`Function2D`] wraps either and caches its sup-norm estimate.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::sync::OnceLock;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::ComplexMatrix;

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };
const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// Target ratio between the certified sup-norm bound and the sampled lower bound.
pub const SUP_NORM_RATIO: f64 = 1.05;

/// A function of two real variables with its first partial derivatives.
pub trait Bivariate: Sync {
    fn eval(&self, x: f64, y: f64) -> Complex64;
    fn partial_x(&self, x: f64, y: f64) -> Complex64;
    fn partial_y(&self, x: f64, y: f64) -> Complex64;

    /// Euclidean radius of a ball containing the Fourier support, when known.
    fn band_radius(&self) -> Option<f64> {
        None
    }

    /// `out[(a, b)] = f(xs[a], ys[b])`.
    fn eval_grid(&self, xs: &[f64], ys: &[f64]) -> ComplexMatrix {
        ComplexMatrix::from_fn(xs.len(), ys.len(), |a, b| self.eval(xs[a], ys[b]))
    }

    /// `(f(x1,y) − f(x2,y))/(x1 − x2)`, and `∂f/∂x` on the diagonal.
    fn divided_difference_x(&self, x1: f64, x2: f64, y: f64) -> Complex64 {
        if nearly_equal(x1, x2) {
            self.partial_x(0.5 * (x1 + x2), y)
        } else {
            (self.eval(x1, y) - self.eval(x2, y)) / (x1 - x2)
        }
    }

    /// `(f(x,y1) − f(x,y2))/(y1 − y2)`, and `∂f/∂y` on the diagonal.
    fn divided_difference_y(&self, x: f64, y1: f64, y2: f64) -> Complex64 {
        if nearly_equal(y1, y2) {
            self.partial_y(x, 0.5 * (y1 + y2))
        } else {
            (self.eval(x, y1) - self.eval(x, y2)) / (y1 - y2)
        }
    }

    /// Row-major tensor `out[(a·n₂ + b)·n₃ + c] = divided_difference_x(x1s[a], x2s[b], ys[c])`.
    fn divided_difference_x_tensor(&self, x1s: &[f64], x2s: &[f64], ys: &[f64]) -> Vec<Complex64> {
        let mut out = Vec::with_capacity(x1s.len() * x2s.len() * ys.len());
        for &x1 in x1s {
            for &x2 in x2s {
                out.extend(ys.iter().map(|&y| self.divided_difference_x(x1, x2, y)));
            }
        }
        out
    }

    /// Row-major tensor `out[(a·n₂ + b)·n₃ + c] = divided_difference_y(xs[a], y1s[b], y2s[c])`.
    fn divided_difference_y_tensor(&self, xs: &[f64], y1s: &[f64], y2s: &[f64]) -> Vec<Complex64> {
        let mut out = Vec::with_capacity(xs.len() * y1s.len() * y2s.len());
        for &x in xs {
            for &y1 in y1s {
                out.extend(y2s.iter().map(|&y2| self.divided_difference_y(x, y1, y2)));
            }
        }
        out
    }
}

/// Points this close are treated as coincident by the default divided
/// differences, which then use the derivative at the midpoint. The quotient
/// would lose all accuracy there, while the midpoint derivative is off only by
/// `O(|x1 − x2|²)`.
pub fn nearly_equal(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-9 * a.abs().max(b.abs()).max(1.0)
}

/// `sin t / t` with the limit 1 at the origin.
pub fn sinc(t: f64) -> f64 {
    if t.abs() < 1e-4 {
        let t2 = t * t;
        1.0 - t2 / 6.0 + t2 * t2 / 120.0
    } else {
        t.sin() / t
    }
}

/// A [`Bivariate`] built from closures for `f`, `∂f/∂x` and `∂f/∂y`.
pub struct Closure2D<F, Gx, Gy> {
    f: F,
    dx: Gx,
    dy: Gy,
}

impl<F, Gx, Gy> Closure2D<F, Gx, Gy>
where
    F: Fn(f64, f64) -> Complex64 + Sync,
    Gx: Fn(f64, f64) -> Complex64 + Sync,
    Gy: Fn(f64, f64) -> Complex64 + Sync,
{
    pub fn new(f: F, dx: Gx, dy: Gy) -> Self {
        Self { f, dx, dy }
    }
}

impl<F, Gx, Gy> Bivariate for Closure2D<F, Gx, Gy>
where
    F: Fn(f64, f64) -> Complex64 + Sync,
    Gx: Fn(f64, f64) -> Complex64 + Sync,
    Gy: Fn(f64, f64) -> Complex64 + Sync,
{
    fn eval(&self, x: f64, y: f64) -> Complex64 {
        (self.f)(x, y)
    }
    fn partial_x(&self, x: f64, y: f64) -> Complex64 {
        (self.dx)(x, y)
    }
    fn partial_y(&self, x: f64, y: f64) -> Complex64 {
        (self.dy)(x, y)
    }
}

impl<T: Bivariate + ?Sized> Bivariate for &T {
    fn eval(&self, x: f64, y: f64) -> Complex64 {
        (**self).eval(x, y)
    }
    fn partial_x(&self, x: f64, y: f64) -> Complex64 {
        (**self).partial_x(x, y)
    }
    fn partial_y(&self, x: f64, y: f64) -> Complex64 {
        (**self).partial_y(x, y)
    }
    fn band_radius(&self) -> Option<f64> {
        (**self).band_radius()
    }
    fn eval_grid(&self, xs: &[f64], ys: &[f64]) -> ComplexMatrix {
        (**self).eval_grid(xs, ys)
    }
    fn divided_difference_x(&self, x1: f64, x2: f64, y: f64) -> Complex64 {
        (**self).divided_difference_x(x1, x2, y)
    }
    fn divided_difference_y(&self, x: f64, y1: f64, y2: f64) -> Complex64 {
        (**self).divided_difference_y(x, y1, y2)
    }
    fn divided_difference_x_tensor(&self, x1s: &[f64], x2s: &[f64], ys: &[f64]) -> Vec<Complex64> {
        (**self).divided_difference_x_tensor(x1s, x2s, ys)
    }
    fn divided_difference_y_tensor(&self, xs: &[f64], y1s: &[f64], y2s: &[f64]) -> Vec<Complex64> {
        (**self).divided_difference_y_tensor(xs, y1s, y2s)
    }
}

/// Certified sup-norm bracket: `lower <= sup|f| <= upper`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SupNormEstimate {
    pub upper: f64,
    pub lower: f64,
}

/// `f(x,y) = Σ c_{jk} e^{iω(jx + ky)}` over finitely many integer pairs.
#[derive(Debug, Clone, PartialEq)]
pub struct TrigPoly2D {
    omega: f64,
    coefficients: BTreeMap<(i32, i32), Complex64>,
}

impl TrigPoly2D {
    /// Repeated `(j, k)` pairs are summed; exact zeros are dropped.
    pub fn new(omega: f64, terms: impl IntoIterator<Item = (i32, i32, Complex64)>) -> Result<Self> {
        if !(omega.is_finite() && omega > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "fundamental frequency must be positive and finite, got {omega}"
            )));
        }
        let mut coefficients = BTreeMap::new();
        for (j, k, c) in terms {
            if !(c.re.is_finite() && c.im.is_finite()) {
                return Err(Error::NonFinite("trigonometric coefficient"));
            }
            *coefficients.entry((j, k)).or_insert(ZERO) += c;
        }
        coefficients.retain(|_, c| *c != ZERO);
        Ok(Self {
            omega,
            coefficients,
        })
    }

    pub fn constant(c: Complex64) -> Self {
        Self::new(1.0, [(0, 0, c)]).expect("valid constant")
    }

    pub fn zero(omega: f64) -> Self {
        Self::new(omega, []).expect("valid frequency")
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }

    pub fn is_zero(&self) -> bool {
        self.coefficients.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (i32, i32, Complex64)> + '_ {
        self.coefficients.iter().map(|(&(j, k), &c)| (j, k, c))
    }

    pub fn num_terms(&self) -> usize {
        self.coefficients.len()
    }

    pub fn coefficient(&self, j: i32, k: i32) -> Complex64 {
        self.coefficients.get(&(j, k)).copied().unwrap_or(ZERO)
    }

    /// Smallest `N` with every coefficient inside `|j|, |k| <= N`.
    pub fn degree(&self) -> i32 {
        self.coefficients
            .keys()
            .map(|&(j, k)| j.abs().max(k.abs()))
            .max()
            .unwrap_or(0)
    }

    fn x_degree(&self) -> i32 {
        self.coefficients
            .keys()
            .map(|&(j, _)| j.abs())
            .max()
            .unwrap_or(0)
    }

    fn y_degree(&self) -> i32 {
        self.coefficients
            .keys()
            .map(|&(_, k)| k.abs())
            .max()
            .unwrap_or(0)
    }

    /// `ω · max √(j² + k²)`.
    pub fn band_radius(&self) -> f64 {
        self.omega
            * self
                .coefficients
                .keys()
                .map(|&(j, k)| ((j * j + k * k) as f64).sqrt())
                .fold(0.0, f64::max)
    }

    /// `ω · max(|j|, |k|)`: half-width of the smallest box holding the spectrum.
    pub fn box_radius(&self) -> f64 {
        self.omega * self.degree() as f64
    }

    /// `ω · max |j|`, the band in the first variable alone.
    pub fn x_band(&self) -> f64 {
        self.omega * self.x_degree() as f64
    }

    /// `ω · max |k|`.
    pub fn y_band(&self) -> f64 {
        self.omega * self.y_degree() as f64
    }

    /// The function `(x, y) ↦ f(σx, σy)`.
    pub fn dilate(&self, sigma: f64) -> Result<Self> {
        Self::new(self.omega * sigma, self.terms())
    }

    pub fn scale(&self, a: Complex64) -> Self {
        Self::new(self.omega, self.terms().map(|(j, k, c)| (j, k, c * a))).expect("finite")
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.omega != other.omega && !self.is_zero() && !other.is_zero() {
            return Err(Error::InvalidArgument(format!(
                "cannot add trigonometric polynomials with frequencies {} and {}",
                self.omega, other.omega
            )));
        }
        let omega = if self.is_zero() {
            other.omega
        } else {
            self.omega
        };
        Self::new(omega, self.terms().chain(other.terms()))
    }

    /// Row `j` of the coefficient array as a function of `y`: `Σ_k c_{jk} e^{iωky}`.
    pub fn row(&self, j: i32) -> Vec<(i32, Complex64)> {
        self.coefficients
            .range((j, i32::MIN)..=(j, i32::MAX))
            .map(|(&(_, k), &c)| (k, c))
            .collect()
    }

    fn powers(&self, t: f64, degree: i32) -> Vec<Complex64> {
        (-degree..=degree)
            .map(|m| Complex64::cis(self.omega * m as f64 * t))
            .collect()
    }

    /// `out[(a, m + degree)] = e^{iωm·ts[a]}`.
    fn power_table(&self, ts: &[f64], degree: i32) -> ComplexMatrix {
        ComplexMatrix::from_fn(ts.len(), (2 * degree + 1) as usize, |a, m| {
            Complex64::cis(self.omega * (m as i32 - degree) as f64 * ts[a])
        })
    }

    /// Dense `(2·x_degree + 1) × (2·y_degree + 1)` coefficient table.
    fn coefficient_matrix(&self) -> ComplexMatrix {
        let (dx, dy) = (self.x_degree(), self.y_degree());
        let mut m = ComplexMatrix::zeros((2 * dx + 1) as usize, (2 * dy + 1) as usize);
        for (&(j, k), &c) in &self.coefficients {
            m[((j + dx) as usize, (k + dy) as usize)] = c;
        }
        m
    }

    fn difference_quotients(&self, t1: f64, t2: f64, degree: i32) -> Vec<Complex64> {
        let mid = 0.5 * (t1 + t2);
        let half = 0.5 * (t1 - t2);
        (-degree..=degree)
            .map(|m| {
                let w = self.omega * m as f64;
                I * w * Complex64::cis(w * mid) * sinc(w * half)
            })
            .collect()
    }

    fn weighted_sum(&self, x: f64, y: f64, weight: impl Fn(i32, i32) -> Complex64) -> Complex64 {
        let dx = self.x_degree();
        let dy = self.y_degree();
        let px = self.powers(x, dx);
        let py = self.powers(y, dy);
        self.coefficients
            .iter()
            .map(|(&(j, k), &c)| c * weight(j, k) * px[(j + dx) as usize] * py[(k + dy) as usize])
            .sum()
    }

    pub fn sup_norm_estimate(&self) -> SupNormEstimate {
        trig_sup_norm(self)
    }
}

impl Bivariate for TrigPoly2D {
    fn eval(&self, x: f64, y: f64) -> Complex64 {
        self.weighted_sum(x, y, |_, _| Complex64::new(1.0, 0.0))
    }

    fn partial_x(&self, x: f64, y: f64) -> Complex64 {
        let w = self.omega;
        self.weighted_sum(x, y, |j, _| I * (w * j as f64))
    }

    fn partial_y(&self, x: f64, y: f64) -> Complex64 {
        let w = self.omega;
        self.weighted_sum(x, y, |_, k| I * (w * k as f64))
    }

    fn band_radius(&self) -> Option<f64> {
        Some(TrigPoly2D::band_radius(self))
    }

    // (e^{iωjx1} − e^{iωjx2})/(x1 − x2) = iωj·e^{iωj(x1+x2)/2}·sinc(ωj(x1−x2)/2),
    // which stays accurate as x2 → x1.
    fn divided_difference_x(&self, x1: f64, x2: f64, y: f64) -> Complex64 {
        let d = self.difference_quotients(x1, x2, self.x_degree());
        let py = self.powers(y, self.y_degree());
        let (dx, dy) = (self.x_degree(), self.y_degree());
        self.coefficients
            .iter()
            .map(|(&(j, k), &c)| c * d[(j + dx) as usize] * py[(k + dy) as usize])
            .sum()
    }

    fn divided_difference_y(&self, x: f64, y1: f64, y2: f64) -> Complex64 {
        let px = self.powers(x, self.x_degree());
        let d = self.difference_quotients(y1, y2, self.y_degree());
        let (dx, dy) = (self.x_degree(), self.y_degree());
        self.coefficients
            .iter()
            .map(|(&(j, k), &c)| c * px[(j + dx) as usize] * d[(k + dy) as usize])
            .sum()
    }

    fn divided_difference_x_tensor(&self, x1s: &[f64], x2s: &[f64], ys: &[f64]) -> Vec<Complex64> {
        let (dx, dy) = (self.x_degree(), self.y_degree());
        let quotients: Vec<Complex64> = x1s
            .iter()
            .flat_map(|&x1| {
                x2s.iter()
                    .flat_map(move |&x2| self.difference_quotients(x1, x2, dx))
            })
            .collect();
        let d = ComplexMatrix::new(x1s.len() * x2s.len(), (2 * dx + 1) as usize, quotients)
            .expect("quotient table shape");
        let ey_t = self.power_table(ys, dy).transpose();
        d.matmul(
            &self
                .coefficient_matrix()
                .matmul(&ey_t)
                .expect("coefficient shapes"),
        )
        .expect("tensor shapes")
        .into_vec()
    }

    fn divided_difference_y_tensor(&self, xs: &[f64], y1s: &[f64], y2s: &[f64]) -> Vec<Complex64> {
        let dy = self.y_degree();
        let g = self
            .power_table(xs, self.x_degree())
            .matmul(&self.coefficient_matrix())
            .expect("coefficient shapes");
        let quotients: Vec<Complex64> = y1s
            .iter()
            .flat_map(|&y1| {
                y2s.iter()
                    .flat_map(move |&y2| self.difference_quotients(y1, y2, dy))
            })
            .collect();
        let d = ComplexMatrix::new(y1s.len() * y2s.len(), (2 * dy + 1) as usize, quotients)
            .expect("quotient table shape");
        g.matmul(&d.transpose()).expect("tensor shapes").into_vec()
    }

    fn eval_grid(&self, xs: &[f64], ys: &[f64]) -> ComplexMatrix {
        let ey_t = self.power_table(ys, self.y_degree()).transpose();
        self.power_table(xs, self.x_degree())
            .matmul(&self.coefficient_matrix())
            .and_then(|m| m.matmul(&ey_t))
            .expect("grid shapes agree")
    }
}

/// `(1 − cos x)/x²`, with the limit `1/2` at the origin.
pub fn fejer(x: f64) -> f64 {
    if x.abs() < 1e-4 {
        let x2 = x * x;
        0.5 - x2 / 24.0 + x2 * x2 / 720.0 - x2 * x2 * x2 / 40320.0
    } else {
        let s = (0.5 * x).sin();
        2.0 * s * s / (x * x)
    }
}

/// Derivative of [`fejer`].
pub fn fejer_derivative(x: f64) -> f64 {
    if x.abs() < 1.0 {
        // Σ_{m≥1} (−1)^m 2m x^{2m−1} / (2m+2)!
        let x2 = x * x;
        let mut term_power = x;
        let mut factorial = 24.0; // (2m+2)! at m = 1
        let mut sum = 0.0;
        for m in 1..=10 {
            let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
            sum += sign * (2 * m) as f64 * term_power / factorial;
            term_power *= x2;
            factorial *= ((2 * m + 3) * (2 * m + 4)) as f64;
        }
        sum
    } else {
        let s = (0.5 * x).sin();
        let one_minus_cos = 2.0 * s * s;
        (x * x.sin() - 2.0 * one_minus_cos) / (x * x * x)
    }
}

/// `f(x,y) = Σ_{1≤j,k≤N} τ_{jk} φ(x − 4πj, y − 4πk)` with `φ(x,y) = 4·fejer(x)·fejer(y)`.
///
/// `tau[(j−1, k−1)]` stores `τ_{jk}`. The Fourier transform is supported in `[−1,1]²`.
#[derive(Debug, Clone, PartialEq)]
pub struct PhiLattice {
    tau: ComplexMatrix,
}

impl PhiLattice {
    pub fn new(tau: ComplexMatrix) -> Result<Self> {
        if !tau.is_square() {
            return Err(Error::NotSquare {
                rows: tau.rows(),
                cols: tau.cols(),
            });
        }
        Ok(Self { tau })
    }

    pub fn size(&self) -> usize {
        self.tau.rows()
    }

    pub fn tau(&self) -> &ComplexMatrix {
        &self.tau
    }

    /// Lattice node `4πj` for the 1-based index `j`.
    pub fn node(j: usize) -> f64 {
        4.0 * PI * j as f64
    }

    /// Euclidean band radius of the `[−1,1]²` box.
    pub fn band_radius(&self) -> f64 {
        std::f64::consts::SQRT_2
    }

    /// Half-width of the Fourier support box.
    pub fn box_radius(&self) -> f64 {
        1.0
    }

    pub fn scale(&self, a: Complex64) -> Self {
        Self {
            tau: self.tau.scale(a),
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        Ok(Self {
            tau: self.tau.add(&other.tau)?,
        })
    }

    /// `(2·fejer(x − 4πj))_{j=1..N}`.
    fn profile(&self, x: f64) -> Vec<Complex64> {
        (1..=self.size())
            .map(|j| Complex64::new(2.0 * fejer(x - Self::node(j)), 0.0))
            .collect()
    }

    fn profile_derivative(&self, x: f64) -> Vec<Complex64> {
        (1..=self.size())
            .map(|j| Complex64::new(2.0 * fejer_derivative(x - Self::node(j)), 0.0))
            .collect()
    }

    fn bilinear(&self, a: &[Complex64], b: &[Complex64]) -> Complex64 {
        let tb = self.tau.mul_vec(b);
        a.iter().zip(&tb).map(|(x, y)| x * y).sum()
    }

    fn profile_matrix(&self, points: &[f64]) -> ComplexMatrix {
        ComplexMatrix::from_fn(points.len(), self.size(), |a, j| {
            Complex64::new(2.0 * fejer(points[a] - Self::node(j + 1)), 0.0)
        })
    }

    /// `sup|f| <= max|τ|`: the periodised kernel satisfies
    /// `Σ_{j∈ℤ} 2·fejer(x − 4πj) = (1 + cos(x/2))/2 <= 1`, and all terms are nonnegative.
    /// The lower bound is `|f|` at the lattice node of the largest `|τ_{jk}|`.
    pub fn sup_norm_estimate(&self) -> SupNormEstimate {
        let n = self.size();
        if n == 0 {
            return SupNormEstimate {
                upper: 0.0,
                lower: 0.0,
            };
        }
        let mut best = (0, 0, -1.0);
        for j in 0..n {
            for k in 0..n {
                let m = self.tau[(j, k)].norm();
                if m > best.2 {
                    best = (j, k, m);
                }
            }
        }
        let lower = self
            .eval(Self::node(best.0 + 1), Self::node(best.1 + 1))
            .norm();
        SupNormEstimate {
            upper: best.2.max(lower),
            lower,
        }
    }
}

impl Bivariate for PhiLattice {
    fn eval(&self, x: f64, y: f64) -> Complex64 {
        self.bilinear(&self.profile(x), &self.profile(y))
    }

    fn partial_x(&self, x: f64, y: f64) -> Complex64 {
        self.bilinear(&self.profile_derivative(x), &self.profile(y))
    }

    fn partial_y(&self, x: f64, y: f64) -> Complex64 {
        self.bilinear(&self.profile(x), &self.profile_derivative(y))
    }

    fn band_radius(&self) -> Option<f64> {
        Some(PhiLattice::band_radius(self))
    }

    fn eval_grid(&self, xs: &[f64], ys: &[f64]) -> ComplexMatrix {
        let a = self.profile_matrix(xs);
        let b = self.profile_matrix(ys);
        a.matmul(&self.tau)
            .and_then(|m| m.matmul(&b.transpose()))
            .expect("grid shapes agree")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Representation {
    Trig(TrigPoly2D),
    Phi(PhiLattice),
}

/// A band-limited function on ℝ² with cached sup-norm metadata.
#[derive(Debug, Clone)]
pub struct Function2D {
    repr: Representation,
    sup: OnceLock<SupNormEstimate>,
}

impl PartialEq for Function2D {
    fn eq(&self, other: &Self) -> bool {
        self.repr == other.repr
    }
}

impl From<TrigPoly2D> for Function2D {
    fn from(p: TrigPoly2D) -> Self {
        Self::new(Representation::Trig(p))
    }
}

impl From<PhiLattice> for Function2D {
    fn from(p: PhiLattice) -> Self {
        Self::new(Representation::Phi(p))
    }
}

impl Function2D {
    pub fn new(repr: Representation) -> Self {
        Self {
            repr,
            sup: OnceLock::new(),
        }
    }

    pub fn representation(&self) -> &Representation {
        &self.repr
    }

    pub fn as_trig(&self) -> Option<&TrigPoly2D> {
        match &self.repr {
            Representation::Trig(p) => Some(p),
            Representation::Phi(_) => None,
        }
    }

    pub fn as_phi(&self) -> Option<&PhiLattice> {
        match &self.repr {
            Representation::Phi(p) => Some(p),
            Representation::Trig(_) => None,
        }
    }

    /// Euclidean band radius (ball containing the Fourier support).
    pub fn band_radius(&self) -> f64 {
        match &self.repr {
            Representation::Trig(p) => p.band_radius(),
            Representation::Phi(p) => p.band_radius(),
        }
    }

    /// Half-width of the Fourier support box.
    pub fn box_radius(&self) -> f64 {
        match &self.repr {
            Representation::Trig(p) => p.box_radius(),
            Representation::Phi(p) => p.box_radius(),
        }
    }

    pub fn sup_norm_estimate(&self) -> SupNormEstimate {
        *self.sup.get_or_init(|| match &self.repr {
            Representation::Trig(p) => p.sup_norm_estimate(),
            Representation::Phi(p) => p.sup_norm_estimate(),
        })
    }

    pub fn scale(&self, a: Complex64) -> Self {
        match &self.repr {
            Representation::Trig(p) => p.scale(a).into(),
            Representation::Phi(p) => p.scale(a).into(),
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        match (&self.repr, &other.repr) {
            (Representation::Trig(a), Representation::Trig(b)) => Ok(a.add(b)?.into()),
            (Representation::Phi(a), Representation::Phi(b)) => Ok(a.add(b)?.into()),
            _ => Err(Error::InvalidArgument(
                "cannot add functions with different representations".into(),
            )),
        }
    }

    fn inner(&self) -> &dyn Bivariate {
        match &self.repr {
            Representation::Trig(p) => p,
            Representation::Phi(p) => p,
        }
    }
}

impl Bivariate for Function2D {
    fn eval(&self, x: f64, y: f64) -> Complex64 {
        self.inner().eval(x, y)
    }
    fn partial_x(&self, x: f64, y: f64) -> Complex64 {
        self.inner().partial_x(x, y)
    }
    fn partial_y(&self, x: f64, y: f64) -> Complex64 {
        self.inner().partial_y(x, y)
    }
    fn band_radius(&self) -> Option<f64> {
        Some(Function2D::band_radius(self))
    }
    fn eval_grid(&self, xs: &[f64], ys: &[f64]) -> ComplexMatrix {
        self.inner().eval_grid(xs, ys)
    }
    fn divided_difference_x(&self, x1: f64, x2: f64, y: f64) -> Complex64 {
        self.inner().divided_difference_x(x1, x2, y)
    }
    fn divided_difference_y(&self, x: f64, y1: f64, y2: f64) -> Complex64 {
        self.inner().divided_difference_y(x, y1, y2)
    }
    fn divided_difference_x_tensor(&self, x1s: &[f64], x2s: &[f64], ys: &[f64]) -> Vec<Complex64> {
        self.inner().divided_difference_x_tensor(x1s, x2s, ys)
    }
    fn divided_difference_y_tensor(&self, xs: &[f64], y1s: &[f64], y2s: &[f64]) -> Vec<Complex64> {
        self.inner().divided_difference_y_tensor(xs, y1s, y2s)
    }
}

/// Number of samples per period and the resulting grid inflation factor.
///
/// At a maximiser `p` of `|f|`, the real band-limited function
/// `u = Re(e^{-i arg f(p)} f)` peaks with zero gradient, so a grid node `q`
/// within distance `d` satisfies `|f(q)| >= u(q) >= ‖f‖(1 − σ²d²/2)` by
/// Bernstein's inequality for second derivatives. With spacing `δ`,
/// `d² <= δ²/2`, which gives the factor `1/(1 − σ²δ²/4)`.
fn grid_resolution(period: f64, band: f64) -> (usize, f64) {
    if band == 0.0 {
        return (1, 1.0);
    }
    let max_sigma_delta = (4.0 * (1.0 - 1.0 / SUP_NORM_RATIO)).sqrt();
    let samples = (period * band / max_sigma_delta).ceil().max(1.0) as usize;
    let delta = period / samples as f64;
    let factor = 1.0 / (1.0 - band * band * delta * delta / 4.0);
    (samples, factor)
}

fn trig_sup_norm(p: &TrigPoly2D) -> SupNormEstimate {
    if p.is_zero() {
        return SupNormEstimate {
            upper: 0.0,
            lower: 0.0,
        };
    }
    let period = 2.0 * PI / p.omega();
    let (samples, factor) = grid_resolution(period, p.band_radius());
    let grid: Vec<f64> = (0..samples)
        .map(|i| period * i as f64 / samples as f64)
        .collect();
    let values = p.eval_grid(&grid, &grid);
    let lower = values.max_abs();
    SupNormEstimate {
        upper: lower * factor,
        lower,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    use crate::ensemble::{complex_normal, random_complex_matrix, random_trig_poly};

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn phi_at_origin_is_one() {
        let f = PhiLattice::new(ComplexMatrix::identity(1)).unwrap();
        let v = f.eval(PhiLattice::node(1), PhiLattice::node(1));
        assert!((v - c(1.0)).norm() < 1e-15);
        assert_eq!(4.0 * fejer(0.0) * fejer(0.0), 1.0);
    }

    #[test]
    fn fejer_branches_meet_smoothly() {
        for &x in &[9.9e-5, 1.0001e-4, 0.999, 1.001, -0.5, 3.0] {
            let closed = (1.0 - f64::cos(x)) / (x * x);
            // the naive closed form loses ~eps/x² near zero
            let tol = 1e-15 + 4.0 * f64::EPSILON / (x * x);
            assert!((fejer(x) - closed).abs() <= tol, "x={x}");
        }
        for &x in &[0.999_999, 1.000_001, -1.0, 0.5, 2.0] {
            let h = 1e-6;
            let fd = (fejer(x + h) - fejer(x - h)) / (2.0 * h);
            assert!((fejer_derivative(x) - fd).abs() < 1e-9, "x={x}");
        }
    }

    #[test]
    fn lattice_interpolation_and_zeros() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let n = 5;
        let tau = random_complex_matrix(&mut rng, n, n);
        let f = PhiLattice::new(tau.clone()).unwrap();
        for j in 1..=n {
            for k in 1..=n {
                let at_node = f.eval(PhiLattice::node(j), PhiLattice::node(k));
                assert!((at_node - tau[(j - 1, k - 1)]).norm() <= 1e-12);
                let shifted = f.eval((4 * j + 2) as f64 * PI, PhiLattice::node(k));
                assert!(shifted.norm() <= 1e-12);
            }
        }
    }

    #[test]
    fn phi_partials_match_central_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let f = PhiLattice::new(random_complex_matrix(&mut rng, 4, 4)).unwrap();
        let h = 1e-5;
        for _ in 0..50 {
            let x = rng.gen_range(-5.0..60.0);
            let y = rng.gen_range(-5.0..60.0);
            let fdx = (f.eval(x + h, y) - f.eval(x - h, y)) / (2.0 * h);
            let fdy = (f.eval(x, y + h) - f.eval(x, y - h)) / (2.0 * h);
            assert!((f.partial_x(x, y) - fdx).norm() <= 1e-8);
            assert!((f.partial_y(x, y) - fdy).norm() <= 1e-8);
        }
    }

    #[test]
    fn trig_partials_and_sine_lattice() {
        // sin x = (e^{ix} − e^{−ix}) / 2i
        let sin_x = TrigPoly2D::new(
            1.0,
            [
                (1, 0, Complex64::new(0.0, -0.5)),
                (-1, 0, Complex64::new(0.0, 0.5)),
            ],
        )
        .unwrap();
        for j in -4..=4 {
            let v = sin_x.partial_x(j as f64 * PI, 0.7);
            let expected = if j % 2 == 0 { 1.0 } else { -1.0 };
            assert!((v - c(expected)).norm() < 1e-14);
        }
        let constant = TrigPoly2D::constant(c(3.0));
        assert_eq!(constant.partial_x(0.3, 0.1), c(0.0));
        assert_eq!(constant.partial_y(0.3, 0.1), c(0.0));
    }

    #[test]
    fn trig_partials_match_central_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let f = random_trig_poly(&mut rng, 4, 0.7);
        let h = 1e-5;
        for _ in 0..30 {
            let x = rng.gen_range(-5.0..5.0);
            let y = rng.gen_range(-5.0..5.0);
            let fdx = (f.eval(x + h, y) - f.eval(x - h, y)) / (2.0 * h);
            assert!((f.partial_x(x, y) - fdx).norm() <= 1e-8);
        }
    }

    #[test]
    fn grid_evaluation_matches_pointwise() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let p = random_trig_poly(&mut rng, 3, 0.9);
        let phi = PhiLattice::new(random_complex_matrix(&mut rng, 3, 3)).unwrap();
        let xs = [0.1, 2.0, -3.5, 14.0];
        let ys = [1.5, 25.0, -0.2];
        for f in [Function2D::from(p), Function2D::from(phi)] {
            let g = f.eval_grid(&xs, &ys);
            for (a, &x) in xs.iter().enumerate() {
                for (b, &y) in ys.iter().enumerate() {
                    assert!((g[(a, b)] - f.eval(x, y)).norm() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn linearity_of_evaluation() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let f = Function2D::from(random_trig_poly(&mut rng, 3, 0.5));
        let g = Function2D::from(random_trig_poly(&mut rng, 2, 0.5));
        let (a, b) = (complex_normal(&mut rng), complex_normal(&mut rng));
        let combo = f.scale(a).add(&g.scale(b)).unwrap();
        for _ in 0..100 {
            let x = rng.gen_range(-10.0..10.0);
            let y = rng.gen_range(-10.0..10.0);
            let lhs = combo.eval(x, y);
            let rhs = a * f.eval(x, y) + b * g.eval(x, y);
            assert!((lhs - rhs).norm() <= 1e-12);
        }
    }

    #[test]
    fn trig_divided_differences_match_quotients() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let p = random_trig_poly(&mut rng, 4, 0.8);
        for _ in 0..50 {
            let x1 = rng.gen_range(-5.0..5.0);
            let x2 = rng.gen_range(-5.0..5.0);
            let y = rng.gen_range(-5.0..5.0);
            let qx = (p.eval(x1, y) - p.eval(x2, y)) / (x1 - x2);
            let qy = (p.eval(y, x1) - p.eval(y, x2)) / (x1 - x2);
            assert!((p.divided_difference_x(x1, x2, y) - qx).norm() <= 1e-11);
            assert!((p.divided_difference_y(y, x1, x2) - qy).norm() <= 1e-11);
        }
        assert!((p.divided_difference_x(0.3, 0.3, 1.1) - p.partial_x(0.3, 1.1)).norm() <= 1e-13);
        assert!((p.divided_difference_y(1.1, 0.3, 0.3) - p.partial_y(1.1, 0.3)).norm() <= 1e-13);
    }

    #[test]
    fn default_divided_difference_uses_midpoint_derivative() {
        let f = Closure2D::new(
            |x: f64, y: f64| c(x * x * y),
            |x: f64, y: f64| c(2.0 * x * y),
            |x: f64, _y: f64| c(x * x),
        );
        assert_eq!(f.divided_difference_x(1.0, 1.0, 2.0), c(4.0));
        assert!((f.divided_difference_x(1.0 + 1e-12, 1.0, 2.0) - c(4.0)).norm() < 1e-11);
        assert!((f.divided_difference_x(3.0, 1.0, 2.0) - c(8.0)).norm() < 1e-14);
        assert!((f.divided_difference_y(3.0, 1.0, 5.0) - c(9.0)).norm() < 1e-14);
    }

    #[test]
    fn band_radius_scales_under_dilation() {
        let p = TrigPoly2D::new(0.5, [(3, 4, c(1.0)), (-1, 0, c(2.0))]).unwrap();
        assert_relative_eq!(p.band_radius(), 2.5);
        assert_relative_eq!(p.box_radius(), 2.0);
        assert_relative_eq!(p.dilate(3.0).unwrap().band_radius(), 7.5);
    }

    #[test]
    fn sup_norm_of_constants_and_harmonics() {
        let f = Function2D::from(TrigPoly2D::constant(Complex64::new(0.0, -2.5)));
        let s = f.sup_norm_estimate();
        assert_eq!(s.lower, 2.5);
        assert!(s.upper >= 2.5 && s.upper <= 2.5 * SUP_NORM_RATIO);

        let h = TrigPoly2D::new(1.0, [(1, 1, c(1.0))]).unwrap();
        let s = h.sup_norm_estimate();
        assert!(s.lower <= 1.0 + 1e-12 && s.upper >= 1.0);
        assert!(s.upper <= SUP_NORM_RATIO * s.lower + 1e-12);
    }

    #[test]
    fn sup_norm_bracket_contains_dense_samples() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for _ in 0..5 {
            let p = random_trig_poly(&mut rng, 5, 1.0);
            let s = p.sup_norm_estimate();
            assert!(s.upper <= SUP_NORM_RATIO * s.lower * (1.0 + 1e-12));
            for _ in 0..2000 {
                let x = rng.gen_range(0.0..2.0 * PI);
                let y = rng.gen_range(0.0..2.0 * PI);
                assert!(p.eval(x, y).norm() <= s.upper);
            }
        }
    }

    #[test]
    fn sup_norm_is_homogeneous() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let p = random_trig_poly(&mut rng, 4, 1.0);
        let a = p.sup_norm_estimate();
        let b = p.scale(c(2.0)).sup_norm_estimate();
        assert_relative_eq!(b.upper, 2.0 * a.upper, max_relative = 1e-12);
        assert_relative_eq!(b.lower, 2.0 * a.lower, max_relative = 1e-12);

        let phi = PhiLattice::new(random_complex_matrix(&mut rng, 4, 4)).unwrap();
        let a = phi.sup_norm_estimate();
        let b = phi.scale(c(2.0)).sup_norm_estimate();
        assert_relative_eq!(b.upper, 2.0 * a.upper, max_relative = 1e-12);
        assert_relative_eq!(b.lower, 2.0 * a.lower, max_relative = 1e-12);
    }

    #[test]
    fn periodised_fejer_kernel_is_bounded_by_one() {
        // Σ_j 2·fejer(x − 4πj) = (1 + cos(x/2))/2
        for i in 0..40 {
            let x = -2.0 * PI + 4.0 * PI * i as f64 / 40.0;
            let s: f64 = (-4000..=4000)
                .map(|j| 2.0 * fejer(x - 4.0 * PI * j as f64))
                .sum();
            assert!((s - 0.5 * (1.0 + (0.5 * x).cos())).abs() < 1e-4, "x={x}");
        }
    }

    #[test]
    fn phi_lattice_sup_norm_is_max_tau() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let tau = random_complex_matrix(&mut rng, 6, 6);
        let f = PhiLattice::new(tau.clone()).unwrap();
        let s = f.sup_norm_estimate();
        assert_relative_eq!(s.upper, tau.max_abs(), max_relative = 1e-12);
        assert!(s.upper <= s.lower * (1.0 + 1e-12));
        for _ in 0..2000 {
            let x = rng.gen_range(-10.0..100.0);
            let y = rng.gen_range(-10.0..100.0);
            assert!(f.eval(x, y).norm() <= s.upper * (1.0 + 1e-12));
        }
    }

    #[test]
    fn divided_difference_tensors_match_pointwise() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let f = random_trig_poly(&mut rng, 4, 0.6);
        let xs: Vec<f64> = (0..4).map(|_| rng.gen_range(-3.0..3.0)).collect();
        let ys: Vec<f64> = vec![xs[1], -0.4, 2.2];
        let zs: Vec<f64> = vec![0.3, xs[0] + 1e-12];
        let tx = f.divided_difference_x_tensor(&xs, &ys, &zs);
        let ty = f.divided_difference_y_tensor(&zs, &xs, &ys);
        let generic = Closure2D::new(
            |x, y| f.eval(x, y),
            |x, y| f.partial_x(x, y),
            |x, y| f.partial_y(x, y),
        );
        let gx = generic.divided_difference_x_tensor(&xs, &ys, &zs);
        for (a, &x1) in xs.iter().enumerate() {
            for (b, &x2) in ys.iter().enumerate() {
                for (k, &y) in zs.iter().enumerate() {
                    let idx = (a * ys.len() + b) * zs.len() + k;
                    let point = f.divided_difference_x(x1, x2, y);
                    assert!((tx[idx] - point).norm() <= 1e-12);
                    assert!((gx[idx] - point).norm() <= 1e-6);
                }
            }
        }
        for (a, &x) in zs.iter().enumerate() {
            for (b, &y1) in xs.iter().enumerate() {
                for (k, &y2) in ys.iter().enumerate() {
                    let idx = (a * xs.len() + b) * ys.len() + k;
                    assert!((ty[idx] - f.divided_difference_y(x, y1, y2)).norm() <= 1e-12);
                }
            }
        }
    }
}
