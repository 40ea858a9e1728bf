//! Flag multipliers `K̂(w, λ)`: the [`Spectrum`] trait, closed-form
//! expression spectra, the kernel catalog, and sampling onto dual grids.

use std::fmt::Debug;
use std::sync::Arc;

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::expr::{self, Expr};
use crate::grid::Grid;
use crate::jet::{Jet, JetSpace};
use crate::scalar::{czero, Real};
use crate::transform::{inverse_fourier, SampledField, Side};

/// A multiplier on the dual of `ℍⁿ`, defined for `λ ≠ 0`.
pub trait Spectrum<T: Real>: Send + Sync + Debug {
    fn name(&self) -> &str;

    /// `n` of `ℍⁿ`; `w` has `2n` components.
    fn n(&self) -> usize;

    fn eval(&self, w: &[T], lambda: T) -> Complex<T>;

    /// Whether `K = K*`, i.e. every fiber `π_K^λ` is self-adjoint.
    fn is_symmetric(&self) -> bool {
        false
    }

    /// Taylor jet in `(w, λ)`, when derivatives are known exactly.
    fn jet(&self, _space: &Arc<JetSpace>, _w: &[T], _lambda: T) -> Option<Jet<T>> {
        None
    }

    /// Whether `(w, λ)` lies outside the data a sampled spectrum was built from.
    fn extrapolated(&self, _w: &[T], _lambda: T) -> bool {
        false
    }
}

/// A closed-form multiplier given by an expression; derivatives are exact (jets).
#[derive(Debug, Clone)]
pub struct ExprSpectrum {
    name: String,
    n: usize,
    source: String,
    expr: Expr,
    symmetric: bool,
}

impl ExprSpectrum {
    pub fn parse(name: &str, source: &str, n: usize, symmetric: bool) -> Result<Self> {
        let expr = expr::parse(source, n)?;
        Ok(Self { name: name.to_string(), n, source: source.to_string(), expr, symmetric })
    }

    pub fn source(&self) -> &str {
        &self.source
    }
}

impl<T: Real> Spectrum<T> for ExprSpectrum {
    fn name(&self) -> &str {
        &self.name
    }

    fn n(&self) -> usize {
        self.n
    }

    fn eval(&self, w: &[T], lambda: T) -> Complex<T> {
        self.expr.eval(w, lambda)
    }

    fn is_symmetric(&self) -> bool {
        self.symmetric
    }

    fn jet(&self, space: &Arc<JetSpace>, w: &[T], lambda: T) -> Option<Jet<T>> {
        Some(self.expr.jet(space, w, lambda))
    }
}

/// A multiplier given by a Rust closure (no derivative information).
pub struct FnSpectrum<T> {
    name: String,
    n: usize,
    symmetric: bool,
    f: Box<dyn Fn(&[T], T) -> Complex<T> + Send + Sync>,
}

impl<T> FnSpectrum<T> {
    pub fn new<F>(name: &str, n: usize, symmetric: bool, f: F) -> Self
    where
        F: Fn(&[T], T) -> Complex<T> + Send + Sync + 'static,
    {
        Self { name: name.to_string(), n, symmetric, f: Box::new(f) }
    }
}

impl<T> Debug for FnSpectrum<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("FnSpectrum").field("name", &self.name).field("n", &self.n).finish()
    }
}

impl<T: Real> Spectrum<T> for FnSpectrum<T> {
    fn name(&self) -> &str {
        &self.name
    }

    fn n(&self) -> usize {
        self.n
    }

    fn eval(&self, w: &[T], lambda: T) -> Complex<T> {
        (self.f)(w, lambda)
    }

    fn is_symmetric(&self) -> bool {
        self.symmetric
    }
}

/// What the estimate verifier is expected to conclude for a catalog kernel.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
}

#[derive(Debug, Clone, Serialize)]
pub struct KernelCatalogEntry {
    pub name: &'static str,
    pub description: &'static str,
    /// Whether the formula uses the `eps` parameter.
    pub uses_eps: bool,
    pub analytic_derivatives: bool,
    pub expected_verdict: Verdict,
    pub invertible: bool,
    pub symmetric: bool,
}

const CATALOG: &[KernelCatalogEntry] = &[
    KernelCatalogEntry {
        name: "delta",
        description: "K̂ ≡ 1 (the unit δ₀)",
        uses_eps: false,
        analytic_derivatives: true,
        expected_verdict: Verdict::Pass,
        invertible: true,
        symmetric: true,
    },
    KernelCatalogEntry {
        name: "scalar",
        description: "K̂ ≡ eps (a multiple of δ₀)",
        uses_eps: true,
        analytic_derivatives: true,
        expected_verdict: Verdict::Pass,
        invertible: true,
        symmetric: true,
    },
    KernelCatalogEntry {
        name: "riesz",
        description: "‖w‖²/(‖w‖² + |λ|)",
        uses_eps: false,
        analytic_derivatives: true,
        expected_verdict: Verdict::Pass,
        invertible: false,
        symmetric: false,
    },
    KernelCatalogEntry {
        name: "perturbed-identity",
        description: "1 + eps·‖w‖²/(‖w‖² + |λ|)",
        uses_eps: true,
        analytic_derivatives: true,
        expected_verdict: Verdict::Pass,
        invertible: true,
        symmetric: false,
    },
    KernelCatalogEntry {
        name: "shifted-riesz",
        description: "‖w‖²/(‖w‖² + |λ| + λ²)",
        uses_eps: false,
        analytic_derivatives: true,
        expected_verdict: Verdict::Pass,
        invertible: false,
        symmetric: false,
    },
    KernelCatalogEntry {
        name: "perturbed-shifted",
        description: "1 + eps·‖w‖²/(‖w‖² + |λ| + λ²)",
        uses_eps: true,
        analytic_derivatives: true,
        expected_verdict: Verdict::Pass,
        invertible: true,
        symmetric: false,
    },
    KernelCatalogEntry {
        name: "perturbed-chirp",
        description: "1 + eps·‖w‖²/(‖w‖² + |λ|)·|λ|^i",
        uses_eps: true,
        analytic_derivatives: true,
        expected_verdict: Verdict::Pass,
        invertible: true,
        symmetric: false,
    },
    KernelCatalogEntry {
        name: "abs-w",
        description: "‖w‖₂ (not a flag multiplier)",
        uses_eps: false,
        analytic_derivatives: true,
        expected_verdict: Verdict::Fail,
        invertible: false,
        symmetric: false,
    },
];

pub fn catalog() -> &'static [KernelCatalogEntry] {
    CATALOG
}

pub fn catalog_entry(name: &str) -> Option<&'static KernelCatalogEntry> {
    CATALOG.iter().find(|e| e.name == name)
}

fn w_squared(n: usize) -> String {
    (1..=2 * n).map(|i| format!("w{i}^2")).collect::<Vec<_>>().join(" + ")
}

/// Expression source of a catalog kernel over `ℍⁿ`.
pub fn catalog_formula(name: &str, n: usize, eps: f64) -> Result<String> {
    let s = w_squared(n);
    let riesz = format!("({s})/({s} + abs(lambda))");
    let shifted = format!("({s})/({s} + abs(lambda) + lambda^2)");
    let e = format!("{eps:e}");
    Ok(match name {
        "delta" => "1".to_string(),
        "scalar" => e,
        "riesz" => riesz,
        "perturbed-identity" => format!("1 + {e}*{riesz}"),
        "shifted-riesz" => shifted,
        "perturbed-shifted" => format!("1 + {e}*{shifted}"),
        "perturbed-chirp" => format!("1 + {e}*{riesz}*exp(i*log(abs(lambda)))"),
        "abs-w" => format!("sqrt({s})"),
        _ => return Err(Error::UnknownKernel(name.to_string())),
    })
}

/// Catalog kernel by name; `eps` is ignored by kernels that do not use it.
pub fn kernel(name: &str, n: usize, eps: f64) -> Result<ExprSpectrum> {
    let entry = catalog_entry(name).ok_or_else(|| Error::UnknownKernel(name.to_string()))?;
    if entry.uses_eps && !eps.is_finite() {
        return Err(Error::InvalidArgument(format!("eps must be finite, got {eps}")));
    }
    let symmetric = entry.symmetric && (name != "scalar" || eps.is_finite());
    ExprSpectrum::parse(name, &catalog_formula(name, n, eps)?, n, symmetric)
}

/// Samples `K̂` on a dual-side grid `(w₁..w₂ₙ, λ)`. The `λ = 0` bins, where a flag
/// multiplier is undefined, are set to zero.
pub fn sample_dual<T: Real, S: Spectrum<T> + ?Sized>(k: &S, dual: &Grid<T>) -> Result<SampledField<T>> {
    let n = dual.group_n().ok_or_else(|| Error::InvalidGrid("expected a grid over the dual of ℍⁿ".into()))?;
    if n != k.n() {
        return Err(Error::DimensionMismatch(format!("multiplier over ℍ^{} on a grid over ℍ^{n}", k.n())));
    }
    let f = SampledField::from_fn(dual.clone(), |z| {
        let lam = z[2 * n];
        if lam == T::zero() {
            czero()
        } else {
            k.eval(&z[..2 * n], lam)
        }
    });
    if f.side() != Side::Dual {
        return Err(Error::WrongSide("sample_dual expects a dual-side grid".into()));
    }
    Ok(f)
}

/// The kernel `K` on a group grid, as the inverse transform of sampled `K̂`.
pub fn realize<T: Real, S: Spectrum<T> + ?Sized>(k: &S, group_grid: &Grid<T>) -> Result<SampledField<T>> {
    inverse_fourier(&sample_dual(k, &group_grid.dual())?)
}
