use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::SymbolGrid;
use crate::error::{Error, Result};
use crate::jet::JetSpace;
use crate::scalar::Real;
use crate::spectrum::{Spectrum, Verdict};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DerivativeMethod {
    /// Exact Taylor coefficients of a closed-form spectrum.
    Analytic,
    /// Fourth-order central differences.
    FiniteDifference,
}

/// Sample points `w = r·u`, `λ ∈ lambdas`, for the flag-estimate verifier.
#[derive(Debug, Clone)]
pub struct EstimateGrid<T> {
    pub radii: Vec<T>,
    /// ℓ¹-normalized directions in `ℝ²ⁿ`.
    pub directions: Vec<Vec<T>>,
    pub lambdas: Vec<T>,
}

impl<T: Real> EstimateGrid<T> {
    pub fn new(radii: Vec<T>, directions: Vec<Vec<T>>, lambdas: Vec<T>) -> Result<Self> {
        if radii.len() < 3 || radii.windows(2).any(|p| !(p[0] < p[1])) || !(radii[0] > T::zero()) {
            return Err(Error::InvalidGrid("radii must be ≥ 3 positive increasing values".into()));
        }
        if directions.is_empty() || lambdas.is_empty() {
            return Err(Error::InvalidGrid("empty direction or λ set".into()));
        }
        if lambdas.iter().any(|l| *l == T::zero() || !l.is_finite()) {
            return Err(Error::ZeroLambda);
        }
        let d = directions[0].len();
        let directions = directions
            .into_iter()
            .map(|u| {
                let s = l1(&u);
                if u.len() != d || !(s > T::zero()) {
                    return Err(Error::InvalidGrid("directions must be nonzero and of equal length".into()));
                }
                Ok(u.into_iter().map(|x| x / s).collect())
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { radii, directions, lambdas })
    }

    /// Radii `10^{-3} … 10^{2}` (16 shells), the coordinate axes plus two
    /// diagonals, and `λ = ±2^j`, `j = −6..=6`.
    pub fn standard(n: usize) -> Self {
        let radii = (0..16).map(|i| T::c(10f64.powf(-3.0 + 5.0 * i as f64 / 15.0))).collect();
        let d = 2 * n;
        let mut dirs: Vec<Vec<T>> = (0..d)
            .map(|i| (0..d).map(|k| if k == i { T::one() } else { T::zero() }).collect())
            .collect();
        dirs.push(vec![T::one(); d]);
        dirs.push((0..d).map(|k| if k % 2 == 0 { T::one() } else { -T::one() }).collect());
        let lambdas = (-6..=6)
            .flat_map(|j| {
                let l = T::c(2f64.powi(j));
                [l, -l]
            })
            .collect();
        Self::new(radii, dirs, lambdas).expect("standard estimate grid is valid")
    }

    fn dim(&self) -> usize {
        self.directions[0].len()
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SeminormRow {
    pub alpha: Vec<usize>,
    pub beta: usize,
    /// `None` on rows that summarize every λ.
    pub lambda: Option<f64>,
    pub sup: f64,
    pub argmax_w: Vec<f64>,
    pub argmax_lambda: f64,
    pub verdict: Verdict,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SeminormReport {
    pub kind: String,
    pub subject: String,
    pub method: DerivativeMethod,
    pub fd_order: usize,
    /// Flag reports: relative step (`h_w = step·(‖w‖+|λ|^{1/2})`, `h_λ = step·|λ|`).
    /// Symbol reports: unused, the grid spacing is the step.
    pub fd_step: f64,
    pub radii: Vec<f64>,
    pub directions: Vec<Vec<f64>>,
    pub lambdas: Vec<f64>,
    pub rows: Vec<SeminormRow>,
}

impl SeminormReport {
    pub fn verdict(&self) -> Verdict {
        if self.rows.iter().any(|r| r.verdict == Verdict::Fail) {
            Verdict::Fail
        } else {
            Verdict::Pass
        }
    }

    /// The all-λ row for `(α, β)` (or the only one, for flag reports).
    pub fn row(&self, alpha: &[usize], beta: usize) -> Option<&SeminormRow> {
        self.rows.iter().find(|r| r.alpha == alpha && r.beta == beta && r.lambda.is_none())
    }

    pub fn rows_of_order(&self, order: usize) -> impl Iterator<Item = &SeminormRow> {
        self.rows.iter().filter(move |r| r.alpha.iter().sum::<usize>() == order)
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("alpha,beta,lambda,sup_ratio,argmax_w,argmax_lambda,verdict\n");
        for r in &self.rows {
            let alpha: Vec<String> = r.alpha.iter().map(|a| a.to_string()).collect();
            let w: Vec<String> = r.argmax_w.iter().map(|x| format!("{x:e}")).collect();
            let lam = r.lambda.map(|l| format!("{l:e}")).unwrap_or_else(|| "all".into());
            let verdict = match r.verdict {
                Verdict::Pass => "pass",
                Verdict::Fail => "fail",
            };
            let _ = writeln!(
                s,
                "{},{},{},{:e},{},{:e},{}",
                alpha.join("-"),
                r.beta,
                lam,
                r.sup,
                w.join(";"),
                r.argmax_lambda,
                verdict
            );
        }
        s
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::Format(e.to_string()))
    }
}

/// All multi-indices in `ℕ^d` of total order `≤ max`, graded.
pub(crate) fn multi_indices(d: usize, max: usize) -> Vec<Vec<usize>> {
    let mut out = vec![vec![0; d]];
    for _ in 0..max {
        let mut next = Vec::new();
        for a in out.iter().filter(|a| a.iter().sum::<usize>() == out.last().map_or(0, |l| l.iter().sum())) {
            for i in 0..d {
                let mut b = a.clone();
                b[i] += 1;
                if !next.contains(&b) && !out.contains(&b) {
                    next.push(b);
                }
            }
        }
        out.extend(next);
    }
    out
}

/// Fourth-order central-difference stencil `(offset, weight)` for the `k`-th derivative.
pub(crate) fn stencil(k: usize) -> Result<&'static [(i32, f64)]> {
    const S0: &[(i32, f64)] = &[(0, 1.0)];
    const S1: &[(i32, f64)] = &[(-2, 1.0 / 12.0), (-1, -8.0 / 12.0), (1, 8.0 / 12.0), (2, -1.0 / 12.0)];
    const S2: &[(i32, f64)] =
        &[(-2, -1.0 / 12.0), (-1, 16.0 / 12.0), (0, -30.0 / 12.0), (1, 16.0 / 12.0), (2, -1.0 / 12.0)];
    const S3: &[(i32, f64)] = &[
        (-3, 1.0 / 8.0),
        (-2, -8.0 / 8.0),
        (-1, 13.0 / 8.0),
        (1, -13.0 / 8.0),
        (2, 8.0 / 8.0),
        (3, -1.0 / 8.0),
    ];
    const S4: &[(i32, f64)] = &[
        (-3, -1.0 / 6.0),
        (-2, 12.0 / 6.0),
        (-1, -39.0 / 6.0),
        (0, 56.0 / 6.0),
        (1, -39.0 / 6.0),
        (2, 12.0 / 6.0),
        (3, -1.0 / 6.0),
    ];
    match k {
        0 => Ok(S0),
        1 => Ok(S1),
        2 => Ok(S2),
        3 => Ok(S3),
        4 => Ok(S4),
        _ => Err(Error::InvalidArgument(format!("finite differences support order ≤ 4 per variable, got {k}"))),
    }
}

/// Tensor-product stencil for the multi-index `e`: `(offsets, weight)` pairs.
pub(crate) fn tensor_stencil(e: &[usize]) -> Result<Vec<(Vec<i32>, f64)>> {
    let mut out = vec![(Vec::new(), 1.0)];
    for &k in e {
        let s = stencil(k)?;
        out = out
            .into_iter()
            .flat_map(|(offs, w)| {
                s.iter().map(move |&(o, sw)| {
                    let mut v = offs.clone();
                    v.push(o);
                    (v, w * sw)
                })
            })
            .collect();
    }
    Ok(out)
}

const REL_STEP: f64 = 0.05;

struct Sample {
    w: Vec<f64>,
    lambda: f64,
    ri: usize,
    li: usize,
    ratios: Vec<f64>,
}

/// Estimates `sup |∂_w^α ∂_λ^β K̂(w, λ)|·(‖w‖ + |λ|^{1/2})^{|α|}·|λ|^β` over the grid
/// (`‖·‖` is the ℓ¹ norm) for every `|α| ≤ alpha_max`, `β ≤ beta_max`.
///
/// A row fails when its supremum sits on the first or last radius shell (or
/// `|λ|` level) and the profile keeps growing geometrically toward it: the
/// estimate is then not attained inside the grid.
pub fn flag_estimate_report<T: Real>(
    k: &dyn Spectrum<T>,
    alpha_max: usize,
    beta_max: usize,
    grid: &EstimateGrid<T>,
) -> Result<SeminormReport> {
    let d = grid.dim();
    if d != 2 * k.n() {
        return Err(Error::DimensionMismatch(format!("directions in ℝ^{d} for a spectrum on ℍ^{}", k.n())));
    }
    let alphas = multi_indices(d, alpha_max);
    let idx: Vec<(Vec<usize>, usize)> =
        alphas.iter().flat_map(|a| (0..=beta_max).map(move |b| (a.clone(), b))).collect();
    let space = JetSpace::new(d + 1, alpha_max + beta_max);
    let probe_w = vec![T::one(); d];
    let analytic = k.jet(&space, &probe_w, T::one()).is_some();
    let stencils: Vec<Vec<(Vec<i32>, f64)>> = if analytic {
        Vec::new()
    } else {
        idx.iter()
            .map(|(a, b)| {
                let mut e = a.clone();
                e.push(*b);
                tensor_stencil(&e)
            })
            .collect::<Result<_>>()?
    };

    let mut abs_levels: Vec<T> = grid.lambdas.iter().map(|l| l.abs()).collect();
    abs_levels.sort_by(|a, b| a.partial_cmp(b).expect("finite λ"));
    abs_levels.dedup();

    let points: Vec<(usize, usize, usize)> = (0..grid.radii.len())
        .flat_map(|ri| {
            (0..grid.directions.len()).flat_map(move |di| (0..grid.lambdas.len()).map(move |li| (ri, di, li)))
        })
        .collect();
    let samples: Vec<Sample> = points
        .par_iter()
        .map(|&(ri, di, li)| {
            let r = grid.radii[ri];
            let w: Vec<T> = grid.directions[di].iter().map(|u| *u * r).collect();
            let lam = grid.lambdas[li];
            let scale = l1(&w) + lam.abs().sqrt();
            let derivs: Vec<f64> = if analytic {
                let jet = k.jet(&space, &w, lam).expect("jet availability is uniform");
                idx.iter()
                    .map(|(a, b)| {
                        let mut e = a.clone();
                        e.push(*b);
                        jet.derivative(&e).map_or(f64::NAN, |v| v.norm().f64())
                    })
                    .collect()
            } else {
                let hw = T::c(REL_STEP) * scale;
                let hl = T::c(REL_STEP) * lam.abs();
                stencils
                    .iter()
                    .zip(&idx)
                    .map(|(st, (a, b))| {
                        let acc = st.iter().fold(num_complex::Complex::new(T::zero(), T::zero()), |acc, (offs, wt)| {
                            let wp: Vec<T> =
                                w.iter().zip(offs).map(|(x, o)| *x + hw * T::c(*o as f64)).collect();
                            let lp = lam + hl * T::c(offs[d] as f64);
                            acc + k.eval(&wp, lp).scale(T::c(*wt))
                        });
                        let denom = hw.powi(a.iter().sum::<usize>() as i32) * hl.powi(*b as i32);
                        (acc.norm() / denom).f64()
                    })
                    .collect()
            };
            let ratios = idx
                .iter()
                .zip(derivs)
                .map(|((a, b), dv)| {
                    dv * scale.f64().powi(a.iter().sum::<usize>() as i32) * lam.abs().f64().powi(*b as i32)
                })
                .collect();
            let lvl = abs_levels.iter().position(|l| *l == lam.abs()).expect("level present");
            Sample { w: w.iter().map(|x| x.f64()).collect(), lambda: lam.f64(), ri, li: lvl, ratios }
        })
        .collect();

    let rows = idx
        .iter()
        .enumerate()
        .map(|(q, (a, b))| {
            let mut radial = vec![0.0f64; grid.radii.len()];
            let mut vertical = vec![0.0f64; abs_levels.len()];
            let mut best: Option<&Sample> = None;
            let mut sup = 0.0f64;
            let mut finite = true;
            for s in &samples {
                let v = s.ratios[q];
                if !v.is_finite() {
                    finite = false;
                    continue;
                }
                radial[s.ri] = radial[s.ri].max(v);
                vertical[s.li] = vertical[s.li].max(v);
                if best.is_none() || v > sup {
                    sup = v;
                    best = Some(s);
                }
            }
            let fail = !finite || edge_growth(&radial) || edge_growth(&vertical);
            let best = best.expect("nonempty grid");
            SeminormRow {
                alpha: a.clone(),
                beta: *b,
                lambda: None,
                sup: if finite { sup } else { f64::INFINITY },
                argmax_w: best.w.clone(),
                argmax_lambda: best.lambda,
                verdict: if fail { Verdict::Fail } else { Verdict::Pass },
            }
        })
        .collect();

    Ok(SeminormReport {
        kind: "flag-estimate".into(),
        subject: k.name().to_string(),
        method: if analytic { DerivativeMethod::Analytic } else { DerivativeMethod::FiniteDifference },
        fd_order: 4,
        fd_step: if analytic { 0.0 } else { REL_STEP },
        radii: grid.radii.iter().map(|r| r.f64()).collect(),
        directions: grid.directions.iter().map(|u| u.iter().map(|x| x.f64()).collect()).collect(),
        lambdas: grid.lambdas.iter().map(|l| l.f64()).collect(),
        rows,
    })
}

/// Profile maximum on an end shell, reached by strictly increasing steps that
/// do not shrink (ratio ≥ 0.9) and amount to at least 50 % over two shells.
pub(crate) fn edge_growth(p: &[f64]) -> bool {
    let n = p.len();
    if n < 3 {
        return false;
    }
    let top = p.iter().cloned().fold(0.0, f64::max);
    if top <= 1e-12 {
        return false;
    }
    let grows = |a: f64, b: f64, c: f64| a > b && b > c && (a - b) >= 0.9 * (b - c) && a >= 1.5 * c;
    (p[0] == top && grows(p[0], p[1], p[2])) || (p[n - 1] == top && grows(p[n - 1], p[n - 2], p[n - 3]))
}

/// `sup |∂^α a_λ(w)|·(1 + ‖w‖)^{|α|}` per symbol and per `|α| ≤ alpha_max`, by
/// fourth-order differences on the sample grid (interior nodes only), plus one
/// all-λ row per `α` carrying the maximum.
pub fn sym0_seminorms<T: Real>(symbols: &[SymbolGrid<T>], alpha_max: usize) -> Result<SeminormReport> {
    let first = symbols.first().ok_or_else(|| Error::InvalidArgument("no symbols given".into()))?;
    for s in symbols {
        if !s.line().same_geometry(first.line()) {
            return Err(Error::GridMismatch("symbols on different grids".into()));
        }
    }
    let line = first.line();
    let n = line.n();
    let d = 2 * n;
    let count = line.count();
    let steps: Vec<f64> = (0..d)
        .map(|i| if i < n { line.dual().spacing().f64() } else { line.spacing().f64() })
        .collect();
    let alphas = multi_indices(d, alpha_max);
    let stencils: Vec<Vec<(Vec<i32>, f64)>> = alphas.iter().map(|a| tensor_stencil(a)).collect::<Result<_>>()?;
    let sub = line.grid();
    let strides = sub.strides();

    let per_lambda: Vec<Vec<SeminormRow>> = symbols
        .par_iter()
        .map(|s| {
            alphas
                .iter()
                .zip(&stencils)
                .map(|(a, st)| {
                    let reach = st.iter().flat_map(|(o, _)| o.iter().map(|x| x.unsigned_abs() as usize)).max().unwrap_or(0);
                    let order = a.iter().sum::<usize>() as i32;
                    let denom: f64 = a.iter().zip(&steps).map(|(k, h)| h.powi(*k as i32)).product();
                    let mut sup = 0.0f64;
                    let mut arg = vec![0.0; d];
                    let mut idx = vec![0usize; d];
                    let total = count.pow(d as u32);
                    for flat in 0..total {
                        let mut r = flat;
                        for i in (0..d).rev() {
                            idx[i] = r % count;
                            r /= count;
                        }
                        if idx.iter().any(|&i| i < reach || i + reach >= count) {
                            continue;
                        }
                        let v = st.iter().fold(num_complex::Complex::new(0.0, 0.0), |acc, (offs, wt)| {
                            let mi = (0..n).fold(0usize, |m, i| m + (idx[i] as i64 + offs[i] as i64) as usize * strides[i]);
                            let ji = (0..n)
                                .fold(0usize, |m, i| m + (idx[n + i] as i64 + offs[n + i] as i64) as usize * strides[i]);
                            let z = s.get(mi, ji);
                            acc + num_complex::Complex::new(z.re.f64(), z.im.f64()) * *wt
                        });
                        let mi = (0..n).fold(0usize, |m, i| m + idx[i] * strides[i]);
                        let ji = (0..n).fold(0usize, |m, i| m + idx[n + i] * strides[i]);
                        let w: Vec<f64> = s.point(mi, ji).iter().map(|x| x.f64()).collect();
                        let ratio = v.norm() / denom * (1.0 + w.iter().map(|x| x.abs()).sum::<f64>()).powi(order);
                        if ratio > sup || !ratio.is_finite() {
                            sup = ratio;
                            arg = w;
                        }
                    }
                    SeminormRow {
                        alpha: a.clone(),
                        beta: 0,
                        lambda: Some(s.lambda().f64()),
                        sup,
                        argmax_w: arg,
                        argmax_lambda: s.lambda().f64(),
                        verdict: if sup.is_finite() { Verdict::Pass } else { Verdict::Fail },
                    }
                })
                .collect()
        })
        .collect();

    let mut rows: Vec<SeminormRow> = per_lambda.iter().flatten().cloned().collect();
    for (q, a) in alphas.iter().enumerate() {
        let best = per_lambda
            .iter()
            .map(|r| &r[q])
            .max_by(|x, y| x.sup.partial_cmp(&y.sup).unwrap_or(std::cmp::Ordering::Greater))
            .expect("at least one symbol");
        rows.push(SeminormRow { alpha: a.clone(), lambda: None, ..best.clone() });
    }
    Ok(SeminormReport {
        kind: "sym0".into(),
        subject: "fiber symbols".into(),
        method: DerivativeMethod::FiniteDifference,
        fd_order: 4,
        fd_step: 0.0,
        radii: Vec::new(),
        directions: Vec::new(),
        lambdas: symbols.iter().map(|s| s.lambda().f64()).collect(),
        rows,
    })
}

fn l1<T: Real>(v: &[T]) -> T {
    v.iter().fold(T::zero(), |s, x| s + x.abs())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::schrodinger::LineGrid;
    use crate::spectrum::{kernel, ExprSpectrum, FnSpectrum};
    use num_complex::Complex;

    #[test]
    fn multi_index_enumeration() {
        let m = multi_indices(2, 3);
        assert_eq!(m.len(), 10);
        assert_eq!(m[0], vec![0, 0]);
        assert!(m.contains(&vec![1, 2]));
        assert_eq!(multi_indices(3, 2).len(), 10);
    }

    #[test]
    fn stencils_are_exact_on_polynomials() {
        for k in 0..=4usize {
            for p in 0..=4usize {
                let got: f64 = stencil(k).unwrap().iter().map(|(o, w)| w * (*o as f64).powi(p as i32)).sum();
                let want = if p == k { (1..=k).product::<usize>() as f64 } else if p < k { 0.0 } else { f64::NAN };
                if p <= k {
                    assert!((got - want).abs() < 1e-12, "k={k} p={p}");
                }
            }
        }
        assert!(stencil(5).is_err());
    }

    #[test]
    fn edge_rule() {
        let blow: Vec<f64> = (0..8).map(|i| 2f64.powi(8 - i)).collect();
        assert!(edge_growth(&blow));
        let sat: Vec<f64> = (0..8).map(|i| 1.0 - 0.5f64.powi(i)).collect();
        assert!(!edge_growth(&sat));
        let bump = [0.1, 0.5, 1.0, 0.5, 0.1];
        assert!(!edge_growth(&bump));
        assert!(!edge_growth(&[0.0; 6]));
    }

    #[test]
    fn delta_ratios() {
        let k = kernel("delta", 1, 0.0).unwrap();
        let r = flag_estimate_report::<f64>(&k, 2, 1, &EstimateGrid::standard(1)).unwrap();
        assert_eq!(r.method, DerivativeMethod::Analytic);
        assert_eq!(r.verdict(), Verdict::Pass);
        for row in &r.rows {
            let want = if row.alpha.iter().sum::<usize>() + row.beta == 0 { 1.0 } else { 0.0 };
            assert_eq!(row.sup, want);
        }
    }

    /// Frozen symbolic derivatives of `R = (ξ²+η²)/(ξ²+η²+λ)` (λ > 0) at
    /// `(ξ, η, λ) = (0.3, −0.7, 1.4)`.
    #[test]
    fn riesz_jets_match_symbolic_values() {
        let k = kernel("riesz", 1, 0.0).unwrap();
        let sp = JetSpace::new(3, 3);
        let j = Spectrum::<f64>::jet(&k, &sp, &[0.3, -0.7], 1.4).unwrap();
        let frozen: &[(&[usize], f64)] = &[
            (&[0, 0, 0], 0.58 / 1.98),
            (&[1, 0, 0], 2.0 * 0.3 * 1.4 / (1.98 * 1.98)),
            (&[0, 0, 1], -0.58 / (1.98 * 1.98)),
            (&[2, 0, 0], 0.5843559562567827),
            (&[1, 1, 1], -0.24266184491022405),
            (&[0, 0, 2], 2.0 * 0.58 / 1.98f64.powi(3)),
        ];
        for (e, want) in frozen {
            let got = j.derivative(e).unwrap();
            assert!((got.re - want).abs() < 1e-12 && got.im.abs() < 1e-14, "{e:?}: {got} vs {want}");
        }
    }

    #[test]
    fn riesz_is_a_flag_multiplier() {
        let k = kernel("riesz", 1, 0.0).unwrap();
        let r = flag_estimate_report::<f64>(&k, 3, 2, &EstimateGrid::standard(1)).unwrap();
        assert_eq!(r.verdict(), Verdict::Pass, "{}", r.to_csv());
        assert!(r.rows.iter().all(|x| x.sup.is_finite() && x.sup < 100.0));
    }

    #[test]
    fn euclidean_norm_fails_at_second_order_near_origin() {
        let k = kernel("abs-w", 1, 0.0).unwrap();
        let r = flag_estimate_report::<f64>(&k, 2, 0, &EstimateGrid::standard(1)).unwrap();
        for row in r.rows_of_order(2) {
            if row.alpha == [1, 1] {
                continue;
            }
            assert_eq!(row.verdict, Verdict::Fail, "{row:?}");
            assert!(row.argmax_w.iter().map(|x| x.abs()).sum::<f64>() < 1e-2);
        }
        assert_eq!(r.verdict(), Verdict::Fail);
    }

    #[test]
    fn finite_differences_track_jets() {
        let src = kernel("riesz", 1, 0.0).unwrap();
        let e = ExprSpectrum::parse("r", src.source(), 1, false).unwrap();
        let f = FnSpectrum::new("r-fd", 1, false, move |w: &[f64], l: f64| Spectrum::<f64>::eval(&e, w, l));
        let g = EstimateGrid::standard(1);
        let a = flag_estimate_report::<f64>(&src, 2, 1, &g).unwrap();
        let b = flag_estimate_report::<f64>(&f, 2, 1, &g).unwrap();
        assert_eq!(b.method, DerivativeMethod::FiniteDifference);
        for (x, y) in a.rows.iter().zip(&b.rows) {
            assert!((x.sup - y.sup).abs() <= 0.05 * x.sup.max(1e-3), "{x:?} vs {y:?}");
            assert_eq!(x.verdict, y.verdict);
        }
    }

    #[test]
    fn zero_lambda_is_rejected() {
        assert!(matches!(EstimateGrid::<f64>::new(vec![0.1, 1.0, 2.0], vec![vec![1.0, 0.0]], vec![0.0]), Err(Error::ZeroLambda)));
    }

    #[test]
    fn sym0_of_bessel_potential() {
        // a = (1 + ξ² + η²)^{−1/2}: every Sym⁰ seminorm is finite and grid-independent
        let line = LineGrid::new(1, 64, 8.0).unwrap();
        let syms: Vec<SymbolGrid<f64>> = [0.5, 1.0, -2.0]
            .iter()
            .map(|&l| {
                SymbolGrid::from_fn(l, line.clone(), |xi: &[f64], eta: &[f64]| {
                    Complex::new((1.0 + xi[0] * xi[0] + eta[0] * eta[0]).powf(-0.5), 0.0)
                })
                .unwrap()
            })
            .collect();
        let r = sym0_seminorms(&syms, 3).unwrap();
        assert_eq!(r.verdict(), Verdict::Pass);
        // ∂_ξ a = −ξ(1+ξ²+η²)^{−3/2}, weighted by (1+|ξ|+|η|), maximized on a fine mesh
        let first = r.row(&[1, 0], 0).unwrap();
        let oracle = (0..800)
            .flat_map(|i| (0..800).map(move |j| (i as f64 * 2.5e-3, j as f64 * 5e-3)))
            .map(|(x, y)| x * (1.0 + x * x + y * y).powf(-1.5) * (1.0 + x + y))
            .fold(0.0, f64::max);
        assert!(first.sup <= oracle * 1.02 && first.sup >= oracle * 0.9, "{} vs {}", first.sup, oracle);
        let zero = r.row(&[0, 0], 0).unwrap();
        assert!((zero.sup - 1.0).abs() < 1e-12);
    }
}
