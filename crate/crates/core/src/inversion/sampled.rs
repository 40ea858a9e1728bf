use num_complex::Complex;

use crate::grid::Axis;
use crate::scalar::{czero, Real};
use crate::schrodinger::LineGrid;
use crate::spectrum::Spectrum;
use crate::symbolcalc::SymbolGrid;

/// Multiplier `L̂(w, λ) = b_{−λ}(sgn(λ) w_ξ/√|λ|, −w_η/√|λ|)` assembled from inverse
/// fiber symbols: six-point Lagrange interpolation inside each symbol grid and
/// cubic Lagrange interpolation in `log|λ|` between fibers. Queries outside
/// the sampled footprint are clamped to it and reported by
/// [`Spectrum::extrapolated`].
#[derive(Debug, Clone)]
pub struct SampledInverse<T> {
    name: String,
    line: LineGrid<T>,
    /// `(log λ_src, b)` for `λ_src > 0` and `< 0`, sorted by `log|λ_src|`.
    pos: Vec<(T, SymbolGrid<T>)>,
    neg: Vec<(T, SymbolGrid<T>)>,
}

const SPATIAL_POINTS: usize = 6;
const LAMBDA_POINTS: usize = 4;

impl<T: Real> SampledInverse<T> {
    pub fn new(name: &str, symbols: Vec<SymbolGrid<T>>) -> Self {
        let line = symbols.first().map(|s| s.line().clone()).expect("at least one fiber");
        let mut pos = Vec::new();
        let mut neg = Vec::new();
        for b in symbols {
            let l = b.lambda();
            if l > T::zero() {
                pos.push((l.ln(), b));
            } else {
                neg.push(((-l).ln(), b));
            }
        }
        pos.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("finite λ"));
        neg.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("finite λ"));
        Self { name: name.to_string(), line, pos, neg }
    }

    pub fn line(&self) -> &LineGrid<T> {
        &self.line
    }

    /// Fiber symbols `b_λ` in increasing `λ`.
    pub fn symbols(&self) -> Vec<&SymbolGrid<T>> {
        self.neg.iter().rev().chain(self.pos.iter()).map(|(_, b)| b).collect()
    }

    fn locate(&self, w: &[T], lambda: T) -> (Complex<T>, bool) {
        let src = -lambda;
        let list = if src > T::zero() { &self.pos } else { &self.neg };
        if list.is_empty() || lambda == T::zero() {
            return (Complex::new(T::nan(), T::nan()), true);
        }
        let n = self.line.n();
        let sigma = lambda.abs().sqrt();
        let sgn = lambda.signum();
        let coords: Vec<T> =
            (0..2 * n).map(|i| if i < n { sgn * w[i] / sigma } else { -w[i] / sigma }).collect();
        let u = src.abs().ln();
        let nodes: Vec<T> = list.iter().map(|p| p.0).collect();
        let (uc, mut outside) = clamp(u, nodes[0], nodes[nodes.len() - 1]);
        let (start, len) = window(&nodes, uc, LAMBDA_POINTS);
        let lw = lagrange_weights(&nodes[start..start + len], uc);
        let mut acc = czero();
        for (k, wt) in lw.iter().enumerate() {
            let (v, out) = interp_symbol(&list[start + k].1, &coords);
            outside |= out;
            acc += v.scale(*wt);
        }
        (acc, outside)
    }
}

impl<T: Real> Spectrum<T> for SampledInverse<T> {
    fn name(&self) -> &str {
        &self.name
    }

    fn n(&self) -> usize {
        self.line.n()
    }

    fn eval(&self, w: &[T], lambda: T) -> Complex<T> {
        self.locate(w, lambda).0
    }

    fn extrapolated(&self, w: &[T], lambda: T) -> bool {
        self.locate(w, lambda).1
    }
}

fn clamp<T: Real>(x: T, lo: T, hi: T) -> (T, bool) {
    if x < lo {
        (lo, true)
    } else if x > hi {
        (hi, true)
    } else {
        (x, false)
    }
}

/// `(start, len)` of the `k`-point window of sorted `nodes` centred on `x`.
fn window<T: Real>(nodes: &[T], x: T, k: usize) -> (usize, usize) {
    let len = k.min(nodes.len());
    let below = nodes.iter().filter(|v| **v <= x).count().max(1) - 1;
    let start = below.saturating_sub((len - 1) / 2).min(nodes.len() - len);
    (start, len)
}

pub(crate) fn lagrange_weights<T: Real>(nodes: &[T], x: T) -> Vec<T> {
    (0..nodes.len())
        .map(|i| {
            nodes
                .iter()
                .enumerate()
                .filter(|(j, _)| *j != i)
                .fold(T::one(), |acc, (_, xj)| acc * (x - *xj) / (nodes[i] - *xj))
        })
        .collect()
}

/// Per-axis `(first index, weights)`, clamping into the axis' sampled range.
fn axis_stencil<T: Real>(axis: &Axis<T>, x: T) -> (usize, Vec<T>, bool) {
    let lo = axis.coord(0);
    let hi = axis.coord(axis.count - 1);
    let (xc, out) = clamp(x, lo, hi);
    let nodes = axis.coords();
    let (start, len) = window(&nodes, xc, SPATIAL_POINTS);
    (start, lagrange_weights(&nodes[start..start + len], xc), out)
}

fn interp_symbol<T: Real>(b: &SymbolGrid<T>, coords: &[T]) -> (Complex<T>, bool) {
    let line = b.line();
    let n = line.n();
    let pos_axis = *line.axis();
    let freq_axis = pos_axis.dual();
    let strides = line.grid().strides();
    let mut outside = false;
    let stencils: Vec<(usize, Vec<T>)> = coords
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let (s, w, out) = axis_stencil(if i < n { &freq_axis } else { &pos_axis }, x);
            outside |= out;
            (s, w)
        })
        .collect();
    let sizes: Vec<usize> = stencils.iter().map(|s| s.1.len()).collect();
    let total: usize = sizes.iter().product();
    let mut acc = czero();
    let mut idx = vec![0usize; 2 * n];
    for flat in 0..total {
        let mut r = flat;
        for i in (0..2 * n).rev() {
            idx[i] = r % sizes[i];
            r /= sizes[i];
        }
        let mut wt = T::one();
        let mut m = 0;
        let mut j = 0;
        for i in 0..2 * n {
            let (s, w) = &stencils[i];
            wt = wt * w[idx[i]];
            if i < n {
                m += (s + idx[i]) * strides[i];
            } else {
                j += (s + idx[i]) * strides[i - n];
            }
        }
        acc += b.get(m, j).scale(wt);
    }
    (acc, outside)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lagrange_reproduces_cubics() {
        let nodes = [0.0, 0.5, 1.5, 2.0];
        let f = |x: f64| 1.0 - 2.0 * x + 0.5 * x * x * x;
        let w = lagrange_weights(&nodes, 1.1);
        let got: f64 = w.iter().zip(&nodes).map(|(a, x)| a * f(*x)).sum();
        assert!((got - f(1.1)).abs() < 1e-13);
        assert_eq!(window(&[0.0, 1.0, 2.0, 3.0, 4.0, 5.0], 4.9, 4), (2, 4));
        assert_eq!(window(&[0.0, 1.0, 2.0, 3.0, 4.0, 5.0], 0.0, 4), (0, 4));
        assert_eq!(window(&[0.0, 1.0], 0.5, 4), (0, 2));
    }

    #[test]
    fn interpolates_smooth_symbols_and_flags_outside() {
        let line = LineGrid::new(1, 64, 4.0).unwrap();
        let f = |xi: f64, eta: f64| Complex::new((-(xi * xi + eta * eta) / 4.0).exp(), xi * 0.1);
        let mk = |lam: f64| SymbolGrid::from_fn(lam, line.clone(), |x, e| f(x[0], e[0])).unwrap();
        let s = SampledInverse::new("t", vec![mk(-1.0), mk(-2.0), mk(1.0), mk(0.5)]);
        // λ = −1 reads b_{1}: ξ = −w₁, η = −w₂
        let w = [0.37, -0.81];
        let got = s.eval(&w, -1.0);
        assert!((got - f(-0.37, 0.81)).norm() < 1e-7, "{got}");
        assert!(!s.extrapolated(&w, -1.0));
        // λ = 2 reads b_{−2}: ξ = w₁/√2, η = −w₂/√2
        let got = s.eval(&w, 2.0);
        let r = 2f64.sqrt();
        assert!((got - f(w[0] / r, -w[1] / r)).norm() < 1e-7);
        assert!(s.extrapolated(&[10.0, 0.0], 1.0));
        assert!(s.extrapolated(&w, 8.0));
    }
}
