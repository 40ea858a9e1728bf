//! Uniform periodic grids and the centered discrete Fourier transform that
//! approximates `∫ f(x) e^{∓2πi x·ζ} dx`.
//!
//! An axis with `N` points and half-width `L` samples `x_k = −L + k·2L/N`.
//! Its reciprocal axis has the same `N` and half-width `N/(4L)`, so that
//! `x_k ζ_m = N/4 − m/2 − k/2 + km/N` and the transform reduces to a plain FFT
//! between two `(−1)^k` modulations.

use std::sync::Arc;

use num_complex::Complex;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{cis, czero, Real};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum AxisRole {
    /// One of the `2n` horizontal coordinates `v = (x, y)` (or `w = (ξ, η)` on the dual side).
    V,
    /// The central coordinate `t` (or `λ` on the dual side).
    T,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Domain {
    Position,
    Frequency,
}

impl Domain {
    pub fn flip(self) -> Self {
        match self {
            Domain::Position => Domain::Frequency,
            Domain::Frequency => Domain::Position,
        }
    }
}

/// One periodic axis `[−L, L)` with `count` (a power of two) points.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Axis<T> {
    pub count: usize,
    pub half_width: T,
    pub role: AxisRole,
    pub domain: Domain,
}

impl<T: Real> Axis<T> {
    pub fn new(count: usize, half_width: T, role: AxisRole, domain: Domain) -> Result<Self> {
        if count < 2 || !count.is_power_of_two() {
            return Err(Error::InvalidGrid(format!("axis count {count} must be a power of two >= 2")));
        }
        if !(half_width > T::zero()) || !half_width.is_finite() {
            return Err(Error::InvalidGrid(format!("axis half-width {half_width} must be positive")));
        }
        Ok(Self { count, half_width, role, domain })
    }

    pub fn position(count: usize, half_width: T, role: AxisRole) -> Result<Self> {
        Self::new(count, half_width, role, Domain::Position)
    }

    pub fn spacing(&self) -> T {
        T::c(2.0) * self.half_width / T::from_usize_lossy(self.count)
    }

    pub fn coord(&self, k: usize) -> T {
        -self.half_width + T::from_usize_lossy(k) * self.spacing()
    }

    pub fn coords(&self) -> Vec<T> {
        (0..self.count).map(|k| self.coord(k)).collect()
    }

    /// Index of the node at coordinate zero.
    pub fn origin_index(&self) -> usize {
        self.count / 2
    }

    /// Reciprocal axis: same count, half-width `N/(4L)`, domain flipped.
    pub fn dual(&self) -> Self {
        Self {
            count: self.count,
            half_width: T::from_usize_lossy(self.count) / (T::c(4.0) * self.half_width),
            role: self.role,
            domain: self.domain.flip(),
        }
    }

    /// Grid index representing the displacement `x_j − x_k`, wrapped periodically.
    pub fn diff_index(&self, j: usize, k: usize) -> usize {
        (j + self.count + self.count / 2 - k) % self.count
    }

    /// Grid index representing `x_j + x_k` (the sum is re-centred and wrapped).
    pub fn sum_index(&self, j: usize, k: usize) -> usize {
        (j + k + self.count / 2) % self.count
    }

    /// Grid index of `−x_j`.
    pub fn neg_index(&self, j: usize) -> usize {
        (self.count - j) % self.count
    }

    pub fn same_geometry(&self, other: &Self) -> bool {
        self.count == other.count
            && (self.half_width - other.half_width).abs() <= T::epsilon() * T::c(16.0) * self.half_width
            && self.role == other.role
    }
}

/// Product of axes, stored row-major (last axis fastest).
#[derive(Debug, Clone, PartialEq)]
pub struct Grid<T> {
    axes: Vec<Axis<T>>,
}

impl<T: Real> Grid<T> {
    pub fn new(axes: Vec<Axis<T>>) -> Result<Self> {
        if axes.is_empty() {
            return Err(Error::InvalidGrid("grid needs at least one axis".into()));
        }
        Ok(Self { axes })
    }

    /// Group-side grid over `ℍⁿ`: `2n` v-axes (`v_count` points on `[−v_half, v_half)`) and one t-axis.
    pub fn heisenberg(n: usize, v_count: usize, v_half: T, t_count: usize, t_half: T) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidGrid("n must be positive".into()));
        }
        let mut axes = Vec::with_capacity(2 * n + 1);
        for _ in 0..2 * n {
            axes.push(Axis::position(v_count, v_half, AxisRole::V)?);
        }
        axes.push(Axis::position(t_count, t_half, AxisRole::T)?);
        Self::new(axes)
    }

    /// Grid over `ℝ^{2n}` (v-axes only).
    pub fn horizontal(n: usize, v_count: usize, v_half: T) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidGrid("n must be positive".into()));
        }
        Self::new(vec![Axis::position(v_count, v_half, AxisRole::V)?; 2 * n])
    }

    pub fn axes(&self) -> &[Axis<T>] {
        &self.axes
    }

    pub fn axis(&self, i: usize) -> Result<&Axis<T>> {
        self.axes.get(i).ok_or(Error::InvalidAxis(i))
    }

    pub fn ndim(&self) -> usize {
        self.axes.len()
    }

    pub fn shape(&self) -> Vec<usize> {
        self.axes.iter().map(|a| a.count).collect()
    }

    pub fn len(&self) -> usize {
        self.axes.iter().map(|a| a.count).product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn strides(&self) -> Vec<usize> {
        strides(&self.shape())
    }

    /// Quadrature weight of one cell.
    pub fn cell_volume(&self) -> T {
        self.axes.iter().fold(T::one(), |acc, a| acc * a.spacing())
    }

    pub fn dual(&self) -> Self {
        Self { axes: self.axes.iter().map(Axis::dual).collect() }
    }

    /// Index of the t-axis, when the grid has exactly one.
    pub fn t_axis(&self) -> Option<usize> {
        let mut it = self.axes.iter().enumerate().filter(|(_, a)| a.role == AxisRole::T);
        match (it.next(), it.next()) {
            (Some((i, _)), None) => Some(i),
            _ => None,
        }
    }

    pub fn v_axes(&self) -> Vec<usize> {
        self.axes.iter().enumerate().filter(|(_, a)| a.role == AxisRole::V).map(|(i, _)| i).collect()
    }

    /// `n` for a grid whose v-axes describe `ℝ^{2n}`.
    pub fn group_n(&self) -> Option<usize> {
        let v = self.v_axes().len();
        (v > 0 && v % 2 == 0).then_some(v / 2)
    }

    pub fn all_in(&self, d: Domain) -> bool {
        self.axes.iter().all(|a| a.domain == d)
    }

    pub fn same_geometry(&self, other: &Self) -> bool {
        self.axes.len() == other.axes.len()
            && self.axes.iter().zip(&other.axes).all(|(a, b)| a.same_geometry(b) && a.domain == b.domain)
    }

    pub fn unravel(&self, mut flat: usize, out: &mut [usize]) {
        for (i, a) in self.axes.iter().enumerate().rev() {
            out[i] = flat % a.count;
            flat /= a.count;
        }
    }

    pub fn ravel(&self, idx: &[usize]) -> usize {
        idx.iter().zip(&self.axes).fold(0, |acc, (i, a)| acc * a.count + i)
    }

    pub fn coords_of(&self, flat: usize) -> Vec<T> {
        let mut idx = vec![0; self.ndim()];
        self.unravel(flat, &mut idx);
        idx.iter().zip(&self.axes).map(|(&k, a)| a.coord(k)).collect()
    }

    pub(crate) fn with_axis(&self, i: usize, axis: Axis<T>) -> Self {
        let mut axes = self.axes.clone();
        axes[i] = axis;
        Self { axes }
    }
}

pub fn strides(shape: &[usize]) -> Vec<usize> {
    let mut s = vec![1; shape.len()];
    for i in (0..shape.len().saturating_sub(1)).rev() {
        s[i] = s[i + 1] * shape[i + 1];
    }
    s
}

/// Sign of the exponent in the transform kernel.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sign {
    /// `e^{−2πi x ζ}` (forward).
    Minus,
    /// `e^{+2πi x ζ}` (inverse).
    Plus,
}

/// Plans and caches 1-D FFTs.
pub struct Dft<T: Real> {
    planner: FftPlanner<T>,
}

impl<T: Real> Default for Dft<T> {
    fn default() -> Self {
        Self::new()
    }
}

impl<T: Real> Dft<T> {
    pub fn new() -> Self {
        Self { planner: FftPlanner::new() }
    }

    fn plan(&mut self, n: usize, sign: Sign) -> Arc<dyn Fft<T>> {
        match sign {
            Sign::Minus => self.planner.plan_fft_forward(n),
            Sign::Plus => self.planner.plan_fft_inverse(n),
        }
    }

    /// In-place centred transform of a single line sampled on `axis`:
    /// `out_m = h · Σ_k in_k e^{±2πi x_k ζ_m}` with `ζ` on `axis.dual()` and `h` the spacing.
    pub fn line(&mut self, axis: &Axis<T>, sign: Sign, line: &mut [Complex<T>]) {
        let fft = self.plan(axis.count, sign);
        centred_line(&*fft, axis, sign, line);
    }

    /// Transforms every line of `values` (row-major with `shape`) along `axis_index`.
    pub fn along(
        &mut self,
        values: &mut [Complex<T>],
        shape: &[usize],
        axis_index: usize,
        axis: &Axis<T>,
        sign: Sign,
    ) {
        let fft = self.plan(axis.count, sign);
        apply_along(values, shape, axis_index, |line| centred_line(&*fft, axis, sign, line));
    }
}

fn centred_line<T: Real>(fft: &dyn Fft<T>, axis: &Axis<T>, _sign: Sign, line: &mut [Complex<T>]) {
    let n = axis.count;
    debug_assert_eq!(line.len(), n);
    for (k, v) in line.iter_mut().enumerate() {
        if k % 2 == 1 {
            *v = -*v;
        }
    }
    fft.process(line);
    // e^{∓iπN/2}: 1 when 4 | N, −1 for N = 2.
    let global = if n % 4 == 0 { T::one() } else { -T::one() };
    let h = axis.spacing() * global;
    for (m, v) in line.iter_mut().enumerate() {
        let s = if m % 2 == 1 { -h } else { h };
        *v = v.scale(s);
    }
}

/// Runs `f` on every 1-D line of a row-major array along `axis`.
pub fn apply_along<T: Real, F>(values: &mut [Complex<T>], shape: &[usize], axis: usize, mut f: F)
where
    F: FnMut(&mut [Complex<T>]),
{
    let n = shape[axis];
    let inner: usize = shape[axis + 1..].iter().product();
    let outer: usize = shape[..axis].iter().product();
    let mut buf = vec![czero::<T>(); n];
    for o in 0..outer {
        for i in 0..inner {
            let base = o * n * inner + i;
            for k in 0..n {
                buf[k] = values[base + k * inner];
            }
            f(&mut buf);
            for k in 0..n {
                values[base + k * inner] = buf[k];
            }
        }
    }
}

/// Evaluates the band-limited (trigonometric) interpolant of samples on `axis`
/// at an arbitrary coordinate `x`, given the centred spectrum `spec` of the samples.
pub fn eval_spectrum<T: Real>(axis: &Axis<T>, spec: &[Complex<T>], x: T) -> Complex<T> {
    let dual = axis.dual();
    let dz = dual.spacing();
    spec.iter()
        .enumerate()
        .fold(czero::<T>(), |acc, (m, c)| acc + *c * cis(T::two_pi() * x * dual.coord(m)))
        * dz
}

#[cfg(test)]
mod tests {
    use super::*;

    fn naive(axis: &Axis<f64>, sign: Sign, v: &[Complex<f64>]) -> Vec<Complex<f64>> {
        let dual = axis.dual();
        let s = if sign == Sign::Minus { -1.0 } else { 1.0 };
        (0..axis.count)
            .map(|m| {
                (0..axis.count)
                    .map(|k| v[k] * cis(s * 2.0 * std::f64::consts::PI * axis.coord(k) * dual.coord(m)))
                    .sum::<Complex<f64>>()
                    * axis.spacing()
            })
            .collect()
    }

    #[test]
    fn centred_fft_matches_direct_sum() {
        for &(n, l) in &[(2usize, 1.0), (8, 3.0), (16, 4.0), (32, 0.7)] {
            let axis = Axis::position(n, l, AxisRole::V).unwrap();
            let v: Vec<Complex<f64>> =
                (0..n).map(|k| Complex::new((k as f64 * 0.37).sin(), (k as f64 * 1.3).cos())).collect();
            for sign in [Sign::Minus, Sign::Plus] {
                let mut w = v.clone();
                Dft::new().line(&axis, sign, &mut w);
                let r = naive(&axis, sign, &v);
                for (a, b) in w.iter().zip(&r) {
                    assert!((a - b).norm() < 1e-12, "n={n} {a} vs {b}");
                }
            }
        }
    }

    #[test]
    fn dual_of_dual_is_identity_and_round_trip() {
        let axis = Axis::position(16, 4.0, AxisRole::T).unwrap();
        assert_eq!(axis.dual().dual(), axis);
        assert_eq!(axis.dual().half_width, 1.0);
        let v: Vec<Complex<f64>> = (0..16).map(|k| Complex::new(k as f64, -(k as f64).sqrt())).collect();
        let mut w = v.clone();
        let mut dft = Dft::new();
        dft.line(&axis, Sign::Minus, &mut w);
        dft.line(&axis.dual(), Sign::Plus, &mut w);
        for (a, b) in w.iter().zip(&v) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn index_helpers() {
        let a = Axis::<f64>::position(8, 2.0, AxisRole::V).unwrap();
        assert_eq!(a.coord(a.origin_index()), 0.0);
        for j in 0..8 {
            for k in 0..8 {
                let d = a.coord(a.diff_index(j, k));
                let want = a.coord(j) - a.coord(k);
                let wrapped = (want + 2.0 + 4.0 * 4.0).rem_euclid(4.0) - 2.0;
                assert!((d - wrapped).abs() < 1e-12);
                let s = a.coord(a.sum_index(j, k));
                let want = (a.coord(j) + a.coord(k) + 2.0).rem_euclid(4.0) - 2.0;
                assert!((s - want).abs() < 1e-12);
            }
            assert!((a.coord(a.neg_index(j)) + a.coord(j)).abs() < 1e-12 || j == 0);
        }
        assert!(Axis::<f64>::position(12, 1.0, AxisRole::V).is_err());
        assert!(Axis::<f64>::position(8, 0.0, AxisRole::V).is_err());
    }

    #[test]
    fn interpolant_reproduces_nodes() {
        let axis = Axis::<f64>::position(16, 3.0, AxisRole::V).unwrap();
        let v: Vec<Complex<f64>> = axis.coords().iter().map(|x| Complex::new((-x * x).exp(), 0.0)).collect();
        let mut spec = v.clone();
        Dft::new().line(&axis, Sign::Minus, &mut spec);
        for k in 0..16 {
            assert!((eval_spectrum(&axis, &spec, axis.coord(k)) - v[k]).norm() < 1e-12);
        }
        let x: f64 = 0.123;
        assert!((eval_spectrum(&axis, &spec, x).re - (-x * x).exp()).abs() < 1e-6);
    }
}
