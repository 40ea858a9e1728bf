//! Fiber symbols `a_λ`, Kohn–Nirenberg quantization on a line grid, the
//! twisted product `#`, and seminorm estimators for flag multipliers and
//! `Sym⁰` symbols.
//!
//! Convention: the first symbol slot is frequency `ξ`, the second is position
//! `η`, and `Op(a) u(η) = ∫ e^{2πiξ·η} a(ξ, η) û(ξ) dξ`.

mod report;

pub use report::{flag_estimate_report, sym0_seminorms, DerivativeMethod, EstimateGrid, SeminormReport, SeminormRow};

use num_complex::Complex;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::grid::Sign;
use crate::linalg::CMatrix;
use crate::scalar::{czero, expi2pi, Real};
use crate::schrodinger::{transform_all, FiberOperator, LineGrid};
use crate::spectrum::Spectrum;

/// Samples `a(ξ_m, η_j)` with `ξ` on the reciprocal of `line` and `η` on `line`,
/// stored `[m][j]`.
#[derive(Debug, Clone, PartialEq)]
pub struct SymbolGrid<T> {
    lambda: T,
    line: LineGrid<T>,
    values: Vec<Complex<T>>,
}

impl<T: Real> SymbolGrid<T> {
    pub fn new(lambda: T, line: LineGrid<T>, values: Vec<Complex<T>>) -> Result<Self> {
        if lambda == T::zero() || !lambda.is_finite() {
            return Err(Error::ZeroLambda);
        }
        let n = line.len();
        if values.len() != n * n {
            return Err(Error::DimensionMismatch(format!("{} symbol samples for {}² nodes", values.len(), n)));
        }
        if values.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
            return Err(Error::InvalidArgument("symbol samples must be finite".into()));
        }
        Ok(Self { lambda, line, values })
    }

    pub fn from_fn<F>(lambda: T, line: LineGrid<T>, f: F) -> Result<Self>
    where
        F: Fn(&[T], &[T]) -> Complex<T> + Sync,
    {
        let n = line.len();
        let dual = line.dual();
        let values: Vec<Complex<T>> = (0..n * n)
            .into_par_iter()
            .map(|p| f(&dual.coords_of(p / n), &line.coords_of(p % n)))
            .collect();
        Self::new(lambda, line, values)
    }

    pub fn constant(lambda: T, line: LineGrid<T>, c: Complex<T>) -> Result<Self> {
        let n = line.len();
        Self::new(lambda, line, vec![c; n * n])
    }

    pub fn lambda(&self) -> T {
        self.lambda
    }

    /// Position grid carrying `η`.
    pub fn line(&self) -> &LineGrid<T> {
        &self.line
    }

    /// Frequency grid carrying `ξ`.
    pub fn frequency_grid(&self) -> LineGrid<T> {
        self.line.dual()
    }

    pub fn values(&self) -> &[Complex<T>] {
        &self.values
    }

    pub fn get(&self, m: usize, j: usize) -> Complex<T> {
        self.values[m * self.line.len() + j]
    }

    /// `(ξ, η)` of sample `(m, j)` concatenated.
    pub fn point(&self, m: usize, j: usize) -> Vec<T> {
        let mut w = self.line.dual().coords_of(m);
        w.extend(self.line.coords_of(j));
        w
    }

    pub fn map<F: Fn(Complex<T>) -> Complex<T>>(&self, f: F) -> Self {
        Self { lambda: self.lambda, line: self.line.clone(), values: self.values.iter().map(|v| f(*v)).collect() }
    }

    pub fn scale(&self, s: Complex<T>) -> Self {
        self.map(|v| v * s)
    }

    fn check(&self, o: &Self) -> Result<()> {
        if !self.line.same_geometry(&o.line) {
            return Err(Error::GridMismatch("symbol grids differ".into()));
        }
        if self.lambda != o.lambda {
            return Err(Error::GridMismatch(format!("symbols at λ = {} and {}", self.lambda, o.lambda)));
        }
        Ok(())
    }

    fn zip<F: Fn(Complex<T>, Complex<T>) -> Complex<T>>(&self, o: &Self, f: F) -> Result<Self> {
        self.check(o)?;
        let values = self.values.iter().zip(&o.values).map(|(a, b)| f(*a, *b)).collect();
        Ok(Self { lambda: self.lambda, line: self.line.clone(), values })
    }

    pub fn add(&self, o: &Self) -> Result<Self> {
        self.zip(o, |a, b| a + b)
    }

    pub fn sub(&self, o: &Self) -> Result<Self> {
        self.zip(o, |a, b| a - b)
    }

    pub fn max_abs(&self) -> T {
        self.values.iter().fold(T::zero(), |m, v| m.max(v.norm()))
    }

    /// `‖a‖₂ = (Σ |a|² Δξⁿ dⁿ)^{1/2}`.
    pub fn l2_norm(&self) -> T {
        let w = self.line.weight() * self.line.dual().weight();
        (self.values.iter().fold(T::zero(), |s, v| s + v.norm_sqr()) * w).sqrt()
    }
}

/// `a_λ(ξ, η) = K̂(−sgn(λ)√|λ| ξ, −√|λ| η, −λ)`.
pub fn fiber_symbol<T: Real>(k: &dyn Spectrum<T>, lambda: T, line: &LineGrid<T>) -> Result<SymbolGrid<T>> {
    if lambda == T::zero() || !lambda.is_finite() {
        return Err(Error::ZeroLambda);
    }
    if k.n() != line.n() {
        return Err(Error::DimensionMismatch(format!("spectrum on ℍ^{} sampled over ℝ^{}", k.n(), line.n())));
    }
    let sigma = lambda.abs().sqrt();
    let sgn = lambda.signum();
    SymbolGrid::from_fn(lambda, line.clone(), |xi, eta| {
        let w: Vec<T> = xi.iter().map(|x| -sgn * sigma * *x).chain(eta.iter().map(|y| -sigma * *y)).collect();
        k.eval(&w, -lambda)
    })
}

/// `M[j, k] = Σ_m e^{2πiξ_m·(s_j − s_k)} a(ξ_m, s_j) Δξⁿ dⁿ`.
pub fn kn_quantize<T: Real>(a: &SymbolGrid<T>) -> Result<FiberOperator<T>> {
    let line = &a.line;
    let dual = line.dual();
    let n = line.len();
    let w = line.weight();
    let xi: Vec<Vec<T>> = (0..n).map(|m| dual.coords_of(m)).collect();
    let rows: Vec<Vec<Complex<T>>> = (0..n)
        .into_par_iter()
        .map(|j| {
            let sj = line.coords_of(j);
            let col: Vec<Complex<T>> = (0..n).map(|m| a.get(m, j) * expi2pi(dot(&xi[m], &sj))).collect();
            transform_all(&dual, &col, Sign::Minus).into_iter().map(|v| v.scale(w)).collect()
        })
        .collect();
    FiberOperator::new(a.lambda, line.clone(), CMatrix::from_vec(n, n, rows.concat())?)
}

/// Left inverse of [`kn_quantize`]: `a(ξ_m, s_j) = e^{−2πiξ_m·s_j} Σ_k M[j, k] e^{2πiξ_m·s_k}`.
pub fn kn_symbol_of<T: Real>(op: &FiberOperator<T>) -> Result<SymbolGrid<T>> {
    let line = op.grid();
    let dual = line.dual();
    let n = line.len();
    let inv_w = T::one() / line.weight();
    let mat = op.matrix();
    let cols: Vec<Vec<Complex<T>>> = (0..n)
        .into_par_iter()
        .map(|j| {
            let sj = line.coords_of(j);
            let spec = transform_all(line, mat.row(j), Sign::Plus);
            spec.into_iter()
                .enumerate()
                .map(|(m, v)| v * expi2pi(-dot(&dual.coords_of(m), &sj)).scale(inv_w))
                .collect()
        })
        .collect();
    let mut values = vec![czero(); n * n];
    for (j, col) in cols.iter().enumerate() {
        for (m, v) in col.iter().enumerate() {
            values[m * n + j] = *v;
        }
    }
    SymbolGrid::new(op.lambda(), line.clone(), values)
}

/// `a # b`, the symbol of `Op(a) Op(b)`.
pub fn twisted_product<T: Real>(a: &SymbolGrid<T>, b: &SymbolGrid<T>) -> Result<SymbolGrid<T>> {
    a.check(b)?;
    kn_symbol_of(&kn_quantize(a)?.compose(&kn_quantize(b)?)?)
}

fn dot<T: Real>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).fold(T::zero(), |s, (x, y)| s + *x * *y)
}
