use std::fmt::Write as _;

use num_complex::Complex;
use rayon::prelude::*;
use serde::Serialize;

use super::InversionResult;
use crate::error::{Error, Result};
use crate::grid::Sign;
use crate::linalg::{svd, CMatrix};
use crate::scalar::Real;
use crate::schrodinger::{pi_field, transform_all, FiberOperator, LineGrid};
use crate::spectrum::{realize, Spectrum};
use crate::symbolcalc::{fiber_symbol, kn_quantize, sym0_seminorms, SeminormReport, SeminormRow, SymbolGrid};
use crate::transform::{convolve, l2_norm, SampledField};

fn quantized<T: Real>(k: &dyn Spectrum<T>, lambda: T, line: &LineGrid<T>) -> Result<FiberOperator<T>> {
    kn_quantize(&fiber_symbol(k, lambda, line)?)
}

fn spectral_norm<T: Real>(m: &CMatrix<T>) -> f64 {
    m.singular_values().first().map_or(0.0, |s| s.f64())
}

#[derive(Debug, Clone, Serialize)]
pub struct UniformRow {
    pub lambda: f64,
    pub sigma_min: f64,
    pub sigma_max: f64,
    pub inverse_norm: f64,
    pub cond: f64,
    pub below_floor: bool,
    /// Phase-space radius `(⟨|η|²⟩ + ⟨|ξ|²⟩)^{1/2}` of the least singular vector, fiber units.
    pub min_vector_radius: f64,
    /// The same radius in `w` units (`√|λ|` times the above).
    pub min_vector_w_radius: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct UniformReport {
    pub kernel: String,
    pub sigma_floor: f64,
    pub rows: Vec<UniformRow>,
    /// Empirical `C_K = min_λ σ_min(A_λ)`.
    pub min_sigma: f64,
    pub max_inverse_norm: f64,
    /// No fiber has `σ_min` below the floor.
    pub invertible: bool,
}

impl UniformReport {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("lambda,sigma_min,sigma_max,inverse_norm,cond,below_floor,min_vector_radius\n");
        for r in &self.rows {
            let _ = writeln!(
                s,
                "{:e},{:e},{:e},{:e},{:e},{},{:e}",
                r.lambda, r.sigma_min, r.sigma_max, r.inverse_norm, r.cond, r.below_floor, r.min_vector_radius
            );
        }
        s
    }
}

fn second_moment<T: Real>(grid: &LineGrid<T>, v: &[Complex<T>]) -> f64 {
    let (mut num, mut den) = (0.0, 0.0);
    for (j, z) in v.iter().enumerate() {
        let p = z.norm_sqr().f64();
        num += p * grid.coords_of(j).iter().map(|x| x.f64() * x.f64()).sum::<f64>();
        den += p;
    }
    if den > 0.0 {
        num / den
    } else {
        0.0
    }
}

/// Per `λ`: `σ_min(A_λ)`, `‖A_λ⁻¹‖ = 1/σ_min`, and where in phase space the
/// least singular vector lives; fibers with `σ_min < sigma_floor` are flagged.
pub fn uniform_invertibility_report<T: Real>(
    k: &dyn Spectrum<T>,
    lambdas: &[T],
    line: &LineGrid<T>,
    sigma_floor: f64,
) -> Result<UniformReport> {
    let rows = lambdas
        .par_iter()
        .map(|&lam| {
            let a = quantized(k, lam, line)?;
            let d = svd(a.matrix());
            let last = d.s.len() - 1;
            let smin = d.s[last].f64();
            let smax = d.s[0].f64();
            let v: Vec<Complex<T>> = (0..d.v.rows()).map(|r| d.v[(r, last)]).collect();
            let spec = transform_all(line, &v, Sign::Minus);
            let radius = (second_moment(line, &v) + second_moment(&line.dual(), &spec)).sqrt();
            Ok(UniformRow {
                lambda: lam.f64(),
                sigma_min: smin,
                sigma_max: smax,
                inverse_norm: 1.0 / smin,
                cond: smax / smin,
                below_floor: smin < sigma_floor,
                min_vector_radius: radius,
                min_vector_w_radius: radius * lam.abs().f64().sqrt(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let min_sigma = rows.iter().map(|r| r.sigma_min).fold(f64::INFINITY, f64::min);
    let max_inverse_norm = rows.iter().map(|r| r.inverse_norm).fold(0.0, f64::max);
    Ok(UniformReport {
        kernel: k.name().to_string(),
        sigma_floor,
        invertible: rows.iter().all(|r| !r.below_floor),
        rows,
        min_sigma,
        max_inverse_norm,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct EnergyRow {
    pub field: usize,
    pub lambda: f64,
    /// `𝔊_{K⋆f}(λ)`.
    pub lhs: f64,
    /// `c² 𝔊_f(λ)`.
    pub rhs: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct EnergyCheck {
    pub c: f64,
    pub rows: Vec<EnergyRow>,
    /// `min (lhs − rhs) / max(rhs, 1)`; nonnegative when the bound holds exactly.
    pub worst_slack: f64,
}

impl EnergyCheck {
    pub fn holds(&self, tol: f64) -> bool {
        self.worst_slack >= -tol
    }
}

/// Bin-wise lower bound `𝔊_{K⋆f}(λ) ≥ c² 𝔊_f(λ)` with
/// `𝔊_{K⋆f}(λ) = |λ|ⁿ ‖π_K^λ π_f^λ‖²_HS`.
pub fn lemma_energy_check<T: Real>(
    k: &dyn Spectrum<T>,
    lambdas: &[T],
    line: &LineGrid<T>,
    fields: &[SampledField<T>],
    c: f64,
) -> Result<EnergyCheck> {
    let ops: Vec<FiberOperator<T>> = lambdas.iter().map(|&l| quantized(k, l, line)).collect::<Result<_>>()?;
    let n = line.n() as i32;
    let jobs: Vec<(usize, usize)> = (0..fields.len()).flat_map(|f| (0..lambdas.len()).map(move |l| (f, l))).collect();
    let rows = jobs
        .par_iter()
        .map(|&(fi, li)| {
            let lam = lambdas[li];
            let pf = pi_field(&fields[fi], lam, line)?;
            let scale = lam.abs().f64().powi(n);
            let g = |m: &CMatrix<T>| scale * m.frobenius_norm().f64().powi(2);
            let lhs = g(ops[li].compose(&pf)?.matrix());
            Ok(EnergyRow { field: fi, lambda: lam.f64(), lhs, rhs: c * c * g(pf.matrix()) })
        })
        .collect::<Result<Vec<_>>>()?;
    let worst_slack = rows.iter().map(|r| (r.lhs - r.rhs) / r.rhs.max(1.0)).fold(f64::INFINITY, f64::min);
    Ok(EnergyCheck { c, rows, worst_slack })
}

#[derive(Debug, Clone, Serialize)]
pub struct VerifyReport {
    pub lambdas: Vec<f64>,
    /// `‖π_K^λ π_L^λ − I‖` (spectral norm) per λ.
    pub left: Vec<f64>,
    /// `‖π_L^λ π_K^λ − I‖` per λ.
    pub right: Vec<f64>,
    pub max_left: f64,
    pub max_right: f64,
    /// `‖(f ⋆ K) ⋆ L − f‖₂ / ‖f‖₂` with `K`, `L` realized on each field's grid.
    pub field_residuals: Vec<f64>,
}

/// Residuals of `K ⋆ L = δ₀ = L ⋆ K`, fiberwise and on test fields. Reports only.
pub fn verify_inverse<T: Real>(
    k: &dyn Spectrum<T>,
    l: &dyn Spectrum<T>,
    lambdas: &[T],
    line: &LineGrid<T>,
    test_fields: &[SampledField<T>],
) -> Result<VerifyReport> {
    let pairs = lambdas
        .par_iter()
        .map(|&lam| {
            let a = quantized(k, lam, line)?;
            let b = quantized(l, lam, line)?;
            let id = CMatrix::identity(line.len());
            let left = spectral_norm(&a.matrix().matmul(b.matrix())?.sub(&id)?);
            let right = spectral_norm(&b.matrix().matmul(a.matrix())?.sub(&id)?);
            Ok((left, right))
        })
        .collect::<Result<Vec<_>>>()?;
    let field_residuals = test_fields
        .iter()
        .map(|f| {
            let kf = realize(k, f.grid())?;
            let lf = realize(l, f.grid())?;
            let g = convolve(&convolve(f, &kf)?, &lf)?;
            Ok((l2_norm(&g.sub(f)?) / l2_norm(f)).f64())
        })
        .collect::<Result<Vec<_>>>()?;
    let left: Vec<f64> = pairs.iter().map(|p| p.0).collect();
    let right: Vec<f64> = pairs.iter().map(|p| p.1).collect();
    Ok(VerifyReport {
        lambdas: lambdas.iter().map(|x| x.f64()).collect(),
        max_left: left.iter().cloned().fold(0.0, f64::max),
        max_right: right.iter().cloned().fold(0.0, f64::max),
        left,
        right,
        field_residuals,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct RozkladRow {
    pub lambda: f64,
    /// `‖∂_λ b_λ (differences) − (−b_λ # ∂_λ a_λ # b_λ)‖_∞ / ‖b_λ # ∂_λ a_λ # b_λ‖_∞`
    /// (denominator floored at `10⁻⁸‖b_λ‖_∞/|λ|`).
    pub rel_error: f64,
    pub scale: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct SpreadRow {
    pub order: usize,
    pub alpha: Vec<usize>,
    pub max: f64,
    pub min: f64,
    /// `max / min` over λ (1 when both vanish).
    pub ratio: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct LambdaDerivativeCheck {
    /// Rows `(α, β = M)`: `sup |∂^α(|λ|^M ∂_λ^M b_λ)|(1+‖w‖)^{|α|}`.
    pub report: SeminormReport,
    pub derivative_identity: Vec<RozkladRow>,
    pub max_identity_error: f64,
    pub spreads: Vec<SpreadRow>,
}

impl LambdaDerivativeCheck {
    pub fn max_spread(&self, order: usize) -> f64 {
        self.spreads.iter().filter(|s| s.order == order).map(|s| s.ratio).fold(0.0, f64::max)
    }
}

const LOG_STENCILS: [[f64; 5]; 4] = [
    [1.0 / 12.0, -8.0 / 12.0, 0.0, 8.0 / 12.0, -1.0 / 12.0],
    [-1.0 / 12.0, 16.0 / 12.0, -30.0 / 12.0, 16.0 / 12.0, -1.0 / 12.0],
    [-0.5, 1.0, 0.0, -1.0, 0.5],
    [1.0, -4.0, 6.0, -4.0, 1.0],
];

/// Signed Stirling numbers: `λ^M ∂_λ^M = Σ_j s(M, j) D^j` with `D = λ∂_λ = ∂_{log|λ|}`.
const STIRLING: [[f64; 5]; 4] = [
    [0.0, 1.0, 0.0, 0.0, 0.0],
    [0.0, -1.0, 1.0, 0.0, 0.0],
    [0.0, 2.0, -3.0, 1.0, 0.0],
    [0.0, -6.0, 11.0, -6.0, 1.0],
];

fn combine<T: Real>(terms: &[(&SymbolGrid<T>, f64)]) -> Result<SymbolGrid<T>> {
    let mut acc = terms[0].0.scale(Complex::new(T::c(terms[0].1), T::zero()));
    for (s, w) in &terms[1..] {
        acc = acc.add(&s.scale(Complex::new(T::c(*w), T::zero())))?;
    }
    Ok(acc)
}

/// Relabels `s` to `λ` (symbols from neighbouring fibers share the grid).
fn at_lambda<T: Real>(s: &SymbolGrid<T>, lambda: T) -> Result<SymbolGrid<T>> {
    SymbolGrid::new(lambda, s.line().clone(), s.values().to_vec())
}

/// λ-derivative structure of the inverse symbols: the identity
/// `∂_λ b_λ = −b_λ # ∂_λ a_λ # b_λ` (differences of the `b_λ` in `log|λ|`
/// against `∂_λ a_λ` from the kernel) and the boundedness of
/// `|λ|^M ∂_λ^M b_λ` in `Sym⁰`, for `M = 1..=m_max`.
pub fn lambda_derivative_check<T: Real>(
    result: &InversionResult<T>,
    m_max: usize,
    alpha_max: usize,
) -> Result<LambdaDerivativeCheck> {
    if m_max == 0 || m_max > 4 {
        return Err(Error::InvalidArgument(format!("derivative order {m_max} outside 1..=4")));
    }
    let line = result.line().clone();
    let k = result.kernel().clone();
    let mut per_order: Vec<Vec<SymbolGrid<T>>> = vec![Vec::new(); m_max];
    let mut identity = Vec::new();
    for negative in [true, false] {
        let mut side: Vec<&super::FiberInverse<T>> =
            result.fibers().iter().filter(|f| (f.lambda < T::zero()) == negative).collect();
        if side.is_empty() {
            continue;
        }
        side.sort_by(|a, b| a.lambda.abs().partial_cmp(&b.lambda.abs()).expect("finite"));
        if side.len() < 5 {
            return Err(Error::InsufficientResolution(format!("{} fibers on one side of λ = 0, need 5", side.len())));
        }
        let u: Vec<f64> = side.iter().map(|f| f.lambda.abs().f64().ln()).collect();
        let h = u[1] - u[0];
        if u.windows(2).any(|p| ((p[1] - p[0]) - h).abs() > 1e-9 * h) {
            return Err(Error::InsufficientResolution("λ grid is not log-uniform".into()));
        }
        if h > std::f64::consts::LN_2 / 3.0 + 1e-12 {
            return Err(Error::InsufficientResolution(format!(
                "{:.2} points per octave, need at least 3",
                std::f64::consts::LN_2 / h
            )));
        }
        for c in 2..side.len() - 2 {
            let lam = side[c].lambda;
            let window: Vec<SymbolGrid<T>> =
                (0..5).map(|q| at_lambda(&side[c + q - 2].b, lam)).collect::<Result<_>>()?;
            let d_u: Vec<SymbolGrid<T>> = LOG_STENCILS
                .iter()
                .take(m_max)
                .enumerate()
                .map(|(o, st)| {
                    let terms: Vec<(&SymbolGrid<T>, f64)> =
                        window.iter().zip(st).map(|(s, w)| (s, *w / h.powi(o as i32 + 1))).collect();
                    combine(&terms)
                })
                .collect::<Result<_>>()?;
            for (m, out) in per_order.iter_mut().enumerate() {
                let terms: Vec<(&SymbolGrid<T>, f64)> =
                    (1..=m + 1).map(|j| (&d_u[j - 1], STIRLING[m][j])).collect();
                out.push(combine(&terms)?);
            }
            // ∂_λ b = D b / λ against −B (∂_λ A) B
            let fd = d_u[0].scale(Complex::new(T::one() / lam, T::zero()));
            let step = lam.abs() * T::c(1e-3);
            let da = {
                let pts: Vec<SymbolGrid<T>> = [-2.0, -1.0, 1.0, 2.0]
                    .iter()
                    .map(|o| at_lambda(&fiber_symbol(k.as_ref(), lam + step * T::c(*o), &line)?, lam))
                    .collect::<Result<_>>()?;
                let wts = [1.0, -8.0, 8.0, -1.0].map(|w| w / (12.0 * step.f64()));
                combine(&pts.iter().zip(wts).map(|(s, w)| (s, w)).collect::<Vec<_>>())?
            };
            let b_op = kn_quantize(&side[c].b)?;
            let formula_op = b_op.compose(&kn_quantize(&da)?)?.compose(&b_op)?;
            let formula = crate::symbolcalc::kn_symbol_of(&formula_op)?.scale(Complex::new(-T::one(), T::zero()));
            // relative to the larger of the formula and a 1e-8 fraction of the
            // natural size ‖b‖/|λ| of a λ-derivative, so vanishing derivatives
            // are not judged on rounding noise
            let scale = formula.max_abs().f64();
            let floor = 1e-8 * side[c].b.max_abs().f64() / lam.abs().f64();
            let err = fd.sub(&formula)?.max_abs().f64();
            identity.push(RozkladRow { lambda: lam.f64(), rel_error: err / scale.max(floor), scale });
        }
    }
    if identity.is_empty() {
        return Err(Error::InsufficientResolution("no interior fibers".into()));
    }

    let mut rows: Vec<SeminormRow> = Vec::new();
    let mut spreads = Vec::new();
    let mut lambdas = Vec::new();
    for (m, syms) in per_order.iter().enumerate() {
        let rep = sym0_seminorms(syms, alpha_max)?;
        lambdas = rep.lambdas.clone();
        let mut alphas: Vec<Vec<usize>> = Vec::new();
        for r in &rep.rows {
            if !alphas.contains(&r.alpha) {
                alphas.push(r.alpha.clone());
            }
        }
        for a in alphas {
            let sups: Vec<f64> =
                rep.rows.iter().filter(|r| r.alpha == a && r.lambda.is_some()).map(|r| r.sup).collect();
            let max = sups.iter().cloned().fold(0.0, f64::max);
            let min = sups.iter().cloned().fold(f64::INFINITY, f64::min);
            let ratio = if max <= 1e-12 { 1.0 } else if min > 0.0 { max / min } else { f64::INFINITY };
            spreads.push(SpreadRow { order: m + 1, alpha: a, max, min, ratio });
        }
        rows.extend(rep.rows.into_iter().map(|r| SeminormRow { beta: m + 1, ..r }));
    }
    let max_identity_error = identity.iter().map(|r| r.rel_error).fold(0.0, f64::max);
    Ok(LambdaDerivativeCheck {
        report: SeminormReport {
            kind: "lambda-derivative".into(),
            subject: result.spectrum().name().to_string(),
            method: crate::symbolcalc::DerivativeMethod::FiniteDifference,
            fd_order: 4,
            fd_step: 0.0,
            radii: Vec::new(),
            directions: Vec::new(),
            lambdas,
            rows,
        },
        derivative_identity: identity,
        max_identity_error,
        spreads,
    })
}
