//! Fiberwise inversion of flag multipliers: invert `π_K^λ` on each fiber,
//! read off the inverse symbols `b_λ`, and reassemble the inverse multiplier
//! `L̂(w, λ) = b_{−λ}(sgn(λ) w_ξ/√|λ|, −w_η/√|λ|)`, plus the oracles and
//! diagnostics that validate the result.

mod checks;
mod sampled;

pub use checks::{
    lambda_derivative_check, lemma_energy_check, uniform_invertibility_report, verify_inverse, EnergyCheck, EnergyRow,
    LambdaDerivativeCheck, RozkladRow, SpreadRow, UniformReport, UniformRow, VerifyReport,
};
pub use sampled::SampledInverse;

use std::fmt::Write as _;
use std::sync::Arc;

use num_complex::Complex;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::CMatrix;
use crate::scalar::{cone, Real};
use crate::schrodinger::{FiberOperator, LineGrid};
use crate::spectrum::Spectrum;
use crate::symbolcalc::{fiber_symbol, kn_quantize, kn_symbol_of, EstimateGrid, SymbolGrid};

pub const DEFAULT_COND_LIMIT: f64 = 1e8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum InverseRoute {
    /// `A⁻¹` directly (Hermitian fibers).
    Direct,
    /// `(A^H A)⁻¹ A^H`, the symmetrized route for non-symmetric kernels.
    Gramian,
}

#[derive(Debug, Clone)]
pub struct InversionOptions {
    pub cond_limit: f64,
    /// Reject non-Hermitian fibers instead of taking the Gramian route.
    pub strict_symmetric: bool,
    /// Relative Hermitian defect below which a fiber counts as self-adjoint.
    pub hermitian_tol: f64,
}

impl Default for InversionOptions {
    fn default() -> Self {
        Self { cond_limit: DEFAULT_COND_LIMIT, strict_symmetric: false, hermitian_tol: 1e-10 }
    }
}

/// `±2^{j}` for `j ∈ [−2, 2]` in steps of `1/per_octave`, ascending.
pub fn default_lambda_grid<T: Real>(per_octave: usize) -> Vec<T> {
    let per = per_octave.max(1);
    let mags: Vec<T> = (0..=4 * per).map(|k| T::c(2f64.powf(-2.0 + k as f64 / per as f64))).collect();
    mags.iter().rev().map(|m| -*m).chain(mags.iter().copied()).collect()
}

/// Fiber grid used by default: 64 nodes on `[−4, 4)` for `n = 1`, 16 on `[−2, 2)²` otherwise.
pub fn default_line<T: Real>(n: usize) -> Result<LineGrid<T>> {
    if n == 1 {
        LineGrid::new(1, 64, T::c(4.0))
    } else {
        LineGrid::new(n, 16, T::c(2.0))
    }
}

struct Inverted<T> {
    inverse: CMatrix<T>,
    sigma_min: f64,
    sigma_max: f64,
}

fn checked_inverse<T: Real>(a: &FiberOperator<T>, cond_limit: f64, route: InverseRoute) -> Result<Inverted<T>> {
    let s = a.matrix().singular_values();
    let sigma_max = s.first().map_or(0.0, |x| x.f64());
    let sigma_min = s.last().map_or(0.0, |x| x.f64());
    let cond = if sigma_min > 0.0 { sigma_max / sigma_min } else { f64::INFINITY };
    let fail = || Error::NonInvertible { lambda: a.lambda().f64(), cond, limit: cond_limit };
    if !(cond <= cond_limit) {
        return Err(fail());
    }
    let m = a.matrix();
    let inverse = match route {
        InverseRoute::Direct => m.inverse().map_err(|_| fail())?,
        InverseRoute::Gramian => {
            let h = m.adjoint();
            h.matmul(m)?.inverse().map_err(|_| fail())?.matmul(&h)?
        }
    };
    Ok(Inverted { inverse, sigma_min, sigma_max })
}

/// Dense inverse of a fiber operator, refusing condition numbers above `cond_limit`.
pub fn invert_fiber<T: Real>(a: &FiberOperator<T>, cond_limit: f64) -> Result<FiberOperator<T>> {
    if !a.matrix().is_square() {
        return Err(Error::DimensionMismatch("fiber operator must be square".into()));
    }
    a.with_matrix(checked_inverse(a, cond_limit, InverseRoute::Direct)?.inverse)
}

#[derive(Debug, Clone)]
pub struct NeumannInverse<T> {
    pub symbol: SymbolGrid<T>,
    /// `ε‖Op(s)‖`.
    pub contraction: f64,
    /// `(ε‖Op(s)‖)^{k_max+1} / (1 − ε‖Op(s)‖)`.
    pub truncation_bound: f64,
}

/// `b = Σ_{k=0}^{k_max} (−ε)^k s^{#k}`, the inverse symbol of `1 + ε s` as a
/// Neumann series. Independent of the dense inverse.
pub fn neumann_inverse<T: Real>(s: &SymbolGrid<T>, eps: T, k_max: usize) -> Result<NeumannInverse<T>> {
    let op = kn_quantize(s)?;
    let norm = op.matrix().singular_values().first().map_or(0.0, |x| x.f64());
    let q = eps.abs().f64() * norm;
    if q >= 1.0 {
        return Err(Error::Divergent(q));
    }
    let step = op.matrix().scale(Complex::new(-eps, T::zero()));
    let mut term = CMatrix::identity(op.grid().len());
    let mut sum = term.clone();
    for _ in 0..k_max {
        term = term.matmul(&step)?;
        sum = sum.add(&term)?;
    }
    let symbol = kn_symbol_of(&op.with_matrix(sum)?)?;
    Ok(NeumannInverse { symbol, contraction: q, truncation_bound: q.powi(k_max as i32 + 1) / (1.0 - q) })
}

#[derive(Debug, Clone)]
pub struct FiberInverse<T> {
    pub lambda: T,
    pub a: SymbolGrid<T>,
    pub b: SymbolGrid<T>,
    pub cond: f64,
    pub sigma_min: f64,
    pub sigma_max: f64,
    /// `‖A_λ⁻¹‖ = 1/σ_min`.
    pub inverse_norm: f64,
    /// `‖a_λ # b_λ − 1‖_∞`.
    pub residual: f64,
    pub hermitian_defect: f64,
    pub route: InverseRoute,
}

#[derive(Debug, Clone)]
pub struct InversionResult<T: Real> {
    kernel: Arc<dyn Spectrum<T>>,
    line: LineGrid<T>,
    options: InversionOptions,
    fibers: Vec<FiberInverse<T>>,
    spectrum: Arc<SampledInverse<T>>,
}

#[derive(Debug, Clone, Serialize)]
pub struct FiberSummary {
    pub lambda: f64,
    pub cond: f64,
    pub sigma_min: f64,
    pub inverse_norm: f64,
    pub residual: f64,
    pub hermitian_defect: f64,
    pub route: InverseRoute,
}

#[derive(Debug, Clone, Serialize)]
pub struct InversionSummary {
    pub kernel: String,
    pub n: usize,
    pub line_count: usize,
    pub line_half_width: f64,
    pub cond_limit: f64,
    pub max_residual: f64,
    pub uniform_bound: f64,
    pub min_sigma: f64,
    pub fibers: Vec<FiberSummary>,
}

impl<T: Real> InversionResult<T> {
    pub fn kernel(&self) -> &Arc<dyn Spectrum<T>> {
        &self.kernel
    }

    pub fn line(&self) -> &LineGrid<T> {
        &self.line
    }

    pub fn options(&self) -> &InversionOptions {
        &self.options
    }

    /// Fibers in increasing `λ`.
    pub fn fibers(&self) -> &[FiberInverse<T>] {
        &self.fibers
    }

    pub fn lambdas(&self) -> Vec<T> {
        self.fibers.iter().map(|f| f.lambda).collect()
    }

    /// The reconstructed inverse multiplier `L̂`.
    pub fn spectrum(&self) -> Arc<dyn Spectrum<T>> {
        self.spectrum.clone()
    }

    pub fn sampled(&self) -> &Arc<SampledInverse<T>> {
        &self.spectrum
    }

    pub fn max_residual(&self) -> f64 {
        self.fibers.iter().map(|f| f.residual).fold(0.0, f64::max)
    }

    /// `max_λ ‖A_λ⁻¹‖`.
    pub fn uniform_bound(&self) -> f64 {
        self.fibers.iter().map(|f| f.inverse_norm).fold(0.0, f64::max)
    }

    pub fn min_sigma(&self) -> f64 {
        self.fibers.iter().map(|f| f.sigma_min).fold(f64::INFINITY, f64::min)
    }

    pub fn summary(&self) -> InversionSummary {
        InversionSummary {
            kernel: self.kernel.name().to_string(),
            n: self.line.n(),
            line_count: self.line.count(),
            line_half_width: self.line.half_width().f64(),
            cond_limit: self.options.cond_limit,
            max_residual: self.max_residual(),
            uniform_bound: self.uniform_bound(),
            min_sigma: self.min_sigma(),
            fibers: self
                .fibers
                .iter()
                .map(|f| FiberSummary {
                    lambda: f.lambda.f64(),
                    cond: f.cond,
                    sigma_min: f.sigma_min,
                    inverse_norm: f.inverse_norm,
                    residual: f.residual,
                    hermitian_defect: f.hermitian_defect,
                    route: f.route,
                })
                .collect(),
        }
    }

    pub fn residual_csv(&self) -> String {
        let mut s = String::from("lambda,cond,sigma_min,inverse_norm,residual,hermitian_defect,route\n");
        for f in &self.fibers {
            let route = match f.route {
                InverseRoute::Direct => "direct",
                InverseRoute::Gramian => "gramian",
            };
            let _ = writeln!(
                s,
                "{:e},{:e},{:e},{:e},{:e},{:e},{}",
                f.lambda.f64(),
                f.cond,
                f.sigma_min,
                f.inverse_norm,
                f.residual,
                f.hermitian_defect,
                route
            );
        }
        s
    }

    /// Estimate grid inside the sampled footprint of `L̂`: radii up to
    /// `0.75·L·√λ_min`, and the interior `λ` nodes (both signs) so that
    /// finite differences in `λ` stay between fibers.
    pub fn estimate_grid(&self) -> Result<EstimateGrid<T>> {
        let mags: Vec<T> = self.fibers.iter().map(|f| f.lambda.abs()).collect();
        let lo = mags.iter().cloned().fold(T::infinity(), T::min);
        let hi = self.line.half_width().min(self.line.dual().half_width()) * T::c(0.75) * lo.sqrt();
        let r0 = T::c(1e-3);
        let radii = (0..16).map(|i| r0 * (hi / r0).powf(T::c(i as f64 / 15.0))).collect();
        let d = 2 * self.line.n();
        let mut dirs: Vec<Vec<T>> =
            (0..d).map(|i| (0..d).map(|k| if k == i { T::one() } else { T::zero() }).collect()).collect();
        dirs.push(vec![T::one(); d]);
        dirs.push((0..d).map(|k| if k % 2 == 0 { T::one() } else { -T::one() }).collect());
        let lambdas: Vec<T> = [false, true]
            .iter()
            .flat_map(|&neg| {
                let mut side: Vec<T> =
                    self.fibers.iter().map(|f| f.lambda).filter(|l| (*l < T::zero()) == neg).collect();
                side.sort_by(|a, b| a.abs().partial_cmp(&b.abs()).expect("finite"));
                let k = side.len();
                if k > 4 {
                    side[2..k - 2].to_vec()
                } else {
                    side
                }
            })
            .collect();
        EstimateGrid::new(radii, dirs, lambdas)
    }
}

/// The inversion pipeline: `a_λ = fiber_symbol(K, λ)`, `A_λ = Op(a_λ)`,
/// `B_λ = A_λ⁻¹`, `b_λ = symbol(B_λ)`, and `L̂` reassembled from the `b_λ`.
///
/// Fibers whose quantization is not Hermitian (to `hermitian_tol`) are inverted
/// as `(A^H A)⁻¹ A^H` unless `strict_symmetric` is set.
pub fn invert_flag<T: Real>(
    k: Arc<dyn Spectrum<T>>,
    lambdas: &[T],
    line: &LineGrid<T>,
    opts: &InversionOptions,
) -> Result<InversionResult<T>> {
    if lambdas.is_empty() {
        return Err(Error::InvalidArgument("empty λ grid".into()));
    }
    if lambdas.iter().any(|l| *l == T::zero() || !l.is_finite()) {
        return Err(Error::ZeroLambda);
    }
    let mut sorted = lambdas.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("finite λ"));
    if sorted.windows(2).any(|p| p[0] == p[1]) {
        return Err(Error::InvalidArgument("repeated λ in grid".into()));
    }
    if k.n() != line.n() {
        return Err(Error::DimensionMismatch(format!("kernel on ℍ^{} with fibers over ℝ^{}", k.n(), line.n())));
    }
    let outcomes: Vec<Result<FiberInverse<T>>> = sorted
        .par_iter()
        .map(|&lam| {
            let a = fiber_symbol(k.as_ref(), lam, line)?;
            let op = kn_quantize(&a)?;
            let defect = op.matrix().hermitian_defect().f64();
            let route = if defect <= opts.hermitian_tol {
                InverseRoute::Direct
            } else if opts.strict_symmetric {
                return Err(Error::NotSymmetric(defect));
            } else {
                InverseRoute::Gramian
            };
            let inv = checked_inverse(&op, opts.cond_limit, route)?;
            let prod = op.matrix().matmul(&inv.inverse)?;
            let b_op = op.with_matrix(inv.inverse)?;
            let b = kn_symbol_of(&b_op)?;
            let residual = kn_symbol_of(&op.with_matrix(prod)?)?.values().iter().fold(0.0f64, |m, v| {
                m.max((*v - cone::<T>()).norm().f64())
            });
            Ok(FiberInverse {
                lambda: lam,
                a,
                b,
                cond: inv.sigma_max / inv.sigma_min,
                sigma_min: inv.sigma_min,
                sigma_max: inv.sigma_max,
                inverse_norm: 1.0 / inv.sigma_min,
                residual,
                hermitian_defect: defect,
                route,
            })
        })
        .collect();

    let mut fibers = Vec::with_capacity(outcomes.len());
    let mut singular = Vec::new();
    let mut asym: Option<f64> = None;
    for o in outcomes {
        match o {
            Ok(f) => fibers.push(f),
            Err(Error::NonInvertible { lambda, .. }) => singular.push(lambda),
            Err(Error::NotSymmetric(d)) => asym = Some(asym.map_or(d, |x: f64| x.max(d))),
            Err(e) => return Err(e),
        }
    }
    if let Some(d) = asym {
        return Err(Error::NotSymmetric(d));
    }
    if !singular.is_empty() {
        return Err(Error::FibersNotInvertible(singular));
    }
    let name = format!("inverse of {}", k.name());
    let spectrum = Arc::new(SampledInverse::new(&name, fibers.iter().map(|f| f.b.clone()).collect()));
    Ok(InversionResult { kernel: k, line: line.clone(), options: opts.clone(), fibers, spectrum })
}
