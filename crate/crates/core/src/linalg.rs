//! Small dense complex linear algebra: products, LU inversion, and a one-sided
//! Jacobi SVD (accurate singular values, which is what condition numbers need).

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::scalar::{cone, czero, Real};

/// Row-major complex matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct CMatrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<Complex<T>>,
}

impl<T: Real> CMatrix<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![czero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = cone();
        }
        m
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<Complex<T>>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch(format!("{} entries for a {rows}×{cols} matrix", data.len())));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_fn<F: FnMut(usize, usize) -> Complex<T>>(rows: usize, cols: usize, mut f: F) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    pub fn diagonal(d: &[Complex<T>]) -> Self {
        let mut m = Self::zeros(d.len(), d.len());
        for (i, v) in d.iter().enumerate() {
            m[(i, i)] = *v;
        }
        m
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

    pub fn data(&self) -> &[Complex<T>] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [Complex<T>] {
        &mut self.data
    }

    pub fn row(&self, i: usize) -> &[Complex<T>] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn conj(&self) -> Self {
        Self { rows: self.rows, cols: self.cols, data: self.data.iter().map(|v| v.conj()).collect() }
    }

    pub fn scale(&self, s: Complex<T>) -> Self {
        Self { rows: self.rows, cols: self.cols, data: self.data.iter().map(|v| *v * s).collect() }
    }

    fn check_same(&self, other: &Self) -> Result<()> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::DimensionMismatch(format!(
                "{}×{} vs {}×{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_same(other)?;
        let data = self.data.iter().zip(&other.data).map(|(a, b)| *a + *b).collect();
        Ok(Self { rows: self.rows, cols: self.cols, data })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check_same(other)?;
        let data = self.data.iter().zip(&other.data).map(|(a, b)| *a - *b).collect();
        Ok(Self { rows: self.rows, cols: self.cols, data })
    }

    pub fn matmul(&self, other: &Self) -> Result<Self> {
        if self.cols != other.rows {
            return Err(Error::DimensionMismatch(format!(
                "cannot multiply {}×{} by {}×{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            let orow = &mut out.data[i * other.cols..(i + 1) * other.cols];
            for k in 0..self.cols {
                let a = self.data[i * self.cols + k];
                if a == czero() {
                    continue;
                }
                for (o, b) in orow.iter_mut().zip(other.row(k)) {
                    *o += a * *b;
                }
            }
        }
        Ok(out)
    }

    pub fn matvec(&self, v: &[Complex<T>]) -> Result<Vec<Complex<T>>> {
        if v.len() != self.cols {
            return Err(Error::DimensionMismatch(format!("vector of length {} for {} columns", v.len(), self.cols)));
        }
        Ok((0..self.rows)
            .map(|i| self.row(i).iter().zip(v).fold(czero(), |acc, (a, b)| acc + *a * *b))
            .collect())
    }

    pub fn trace(&self) -> Complex<T> {
        (0..self.rows.min(self.cols)).fold(czero(), |acc, i| acc + self[(i, i)])
    }

    pub fn frobenius_norm(&self) -> T {
        self.data.iter().fold(T::zero(), |acc, v| acc + v.norm_sqr()).sqrt()
    }

    pub fn max_abs(&self) -> T {
        self.data.iter().fold(T::zero(), |m, v| m.max(v.norm()))
    }

    /// `‖A − A^H‖_F / ‖A‖_F` (zero for the zero matrix).
    pub fn hermitian_defect(&self) -> T {
        let f = self.frobenius_norm();
        if !self.is_square() || f == T::zero() {
            return if self.is_square() { T::zero() } else { T::infinity() };
        }
        let mut d = T::zero();
        for i in 0..self.rows {
            for j in 0..self.cols {
                d += (self[(i, j)] - self[(j, i)].conj()).norm_sqr();
            }
        }
        d.sqrt() / f
    }

    /// Inverse by Gauss–Jordan elimination with partial pivoting.
    pub fn inverse(&self) -> Result<Self> {
        if !self.is_square() {
            return Err(Error::DimensionMismatch(format!("cannot invert a {}×{} matrix", self.rows, self.cols)));
        }
        let n = self.rows;
        let mut a = self.clone();
        let mut inv = Self::identity(n);
        let scale = self.max_abs();
        if scale == T::zero() || !scale.is_finite() {
            return Err(Error::NonInvertible { lambda: f64::NAN, cond: f64::INFINITY, limit: f64::NAN });
        }
        let tiny = scale * T::epsilon() * T::from_usize_lossy(n);
        for col in 0..n {
            let (piv, pmax) = (col..n)
                .map(|r| (r, a[(r, col)].norm()))
                .fold((col, -T::one()), |best, c| if c.1 > best.1 { c } else { best });
            if pmax <= tiny {
                return Err(Error::NonInvertible { lambda: f64::NAN, cond: f64::INFINITY, limit: f64::NAN });
            }
            if piv != col {
                a.swap_rows(piv, col);
                inv.swap_rows(piv, col);
            }
            let d = cone::<T>() / a[(col, col)];
            for j in 0..n {
                a[(col, j)] *= d;
                inv[(col, j)] *= d;
            }
            for r in 0..n {
                if r == col {
                    continue;
                }
                let f = a[(r, col)];
                if f == czero() {
                    continue;
                }
                for j in 0..n {
                    let (ac, ic) = (a[(col, j)], inv[(col, j)]);
                    a[(r, j)] -= f * ac;
                    inv[(r, j)] -= f * ic;
                }
            }
        }
        Ok(inv)
    }

    fn swap_rows(&mut self, i: usize, j: usize) {
        for k in 0..self.cols {
            self.data.swap(i * self.cols + k, j * self.cols + k);
        }
    }

    /// Singular values in decreasing order.
    pub fn singular_values(&self) -> Vec<T> {
        svd(self).s
    }

    /// 2-norm condition number `σ_max / σ_min` (infinite if singular).
    pub fn condition_number(&self) -> T {
        let s = self.singular_values();
        match (s.first(), s.last()) {
            (Some(&hi), Some(&lo)) if lo > T::zero() => hi / lo,
            (Some(_), Some(_)) => T::infinity(),
            _ => T::zero(),
        }
    }
}

impl<T> std::ops::Index<(usize, usize)> for CMatrix<T> {
    type Output = Complex<T>;
    fn index(&self, (i, j): (usize, usize)) -> &Complex<T> {
        &self.data[i * self.cols + j]
    }
}

impl<T> std::ops::IndexMut<(usize, usize)> for CMatrix<T> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex<T> {
        &mut self.data[i * self.cols + j]
    }
}

/// `A = U diag(s) V^H` with `U` of size `m×k`, `V` of size `n×k`, `k = min(m, n)`.
#[derive(Debug, Clone)]
pub struct Svd<T> {
    pub u: CMatrix<T>,
    pub s: Vec<T>,
    pub v: CMatrix<T>,
}

/// One-sided Jacobi (Hestenes) SVD.
pub fn svd<T: Real>(a: &CMatrix<T>) -> Svd<T> {
    if a.rows < a.cols {
        let t = svd(&a.adjoint());
        return Svd { u: t.v, s: t.s, v: t.u };
    }
    let (m, n) = (a.rows, a.cols);
    // Work on columns: store A column-major so column rotations are contiguous.
    let mut cols: Vec<Vec<Complex<T>>> = (0..n).map(|j| (0..m).map(|i| a[(i, j)]).collect()).collect();
    let mut v: Vec<Vec<Complex<T>>> = (0..n)
        .map(|j| (0..n).map(|i| if i == j { cone() } else { czero() }).collect())
        .collect();
    let eps = T::epsilon();
    for _sweep in 0..60 {
        let mut rotated = false;
        for i in 0..n {
            for j in i + 1..n {
                let alpha = cols[i].iter().fold(T::zero(), |s, z| s + z.norm_sqr());
                let beta = cols[j].iter().fold(T::zero(), |s, z| s + z.norm_sqr());
                let gamma = cols[i].iter().zip(&cols[j]).fold(czero::<T>(), |s, (p, q)| s + p.conj() * *q);
                let g = gamma.norm();
                if g == T::zero() || g <= eps * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let phase = gamma / g; // e^{iφ}
                let zeta = (beta - alpha) / (T::c(2.0) * g);
                let t = zeta.signum() / (zeta.abs() + (T::one() + zeta * zeta).sqrt());
                let c = T::one() / (T::one() + t * t).sqrt();
                let s = c * t;
                rotate(&mut cols, i, j, phase, c, s);
                rotate(&mut v, i, j, phase, c, s);
            }
        }
        if !rotated {
            break;
        }
    }
    let mut order: Vec<(T, usize)> =
        cols.iter().enumerate().map(|(j, c)| (c.iter().fold(T::zero(), |s, z| s + z.norm_sqr()).sqrt(), j)).collect();
    order.sort_by(|p, q| q.0.partial_cmp(&p.0).unwrap_or(std::cmp::Ordering::Equal));
    let s: Vec<T> = order.iter().map(|p| p.0).collect();
    let u = CMatrix::from_fn(m, n, |r, k| {
        let (sv, j) = order[k];
        if sv > T::zero() {
            cols[j][r] / sv
        } else {
            czero()
        }
    });
    let vm = CMatrix::from_fn(n, n, |r, k| v[order[k].1][r]);
    Svd { u, s, v: vm }
}

/// `b = e^{−iφ} a_j`; `a_i ← c a_i − s b`, `a_j ← e^{iφ}(s a_i + c b)`.
fn rotate<T: Real>(cols: &mut [Vec<Complex<T>>], i: usize, j: usize, phase: Complex<T>, c: T, s: T) {
    let (lo, hi) = cols.split_at_mut(j);
    let (ci, cj) = (&mut lo[i], &mut hi[0]);
    let back = phase.conj();
    for (p, q) in ci.iter_mut().zip(cj.iter_mut()) {
        let b = *q * back;
        let a = *p;
        *p = a.scale(c) - b.scale(s);
        *q = (a.scale(s) + b.scale(c)) * phase;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    type C = Complex<f64>;

    fn random(n: usize, m: usize, seed: u64) -> CMatrix<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        CMatrix::from_fn(n, m, |_, _| C::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
    }

    fn reconstruct(d: &Svd<f64>) -> CMatrix<f64> {
        let s: Vec<C> = d.s.iter().map(|&x| C::new(x, 0.0)).collect();
        d.u.matmul(&CMatrix::diagonal(&s)).unwrap().matmul(&d.v.adjoint()).unwrap()
    }

    #[test]
    fn product_and_adjoint_examples() {
        let a = CMatrix::from_vec(2, 2, vec![C::new(1.0, 0.0), C::new(0.0, 1.0), C::new(2.0, 0.0), C::new(3.0, -1.0)])
            .unwrap();
        let b = a.matmul(&a.adjoint()).unwrap();
        // [[1, i], [2, 3−i]] · [[1, 2], [−i, 3+i]]
        assert_eq!(b[(0, 0)], C::new(2.0, 0.0));
        assert_eq!(b[(0, 1)], C::new(1.0, 3.0));
        assert_eq!(b[(1, 1)], C::new(14.0, 0.0));
        assert!(b.hermitian_defect() < 1e-15);
        assert!(a.hermitian_defect() > 0.1);
        assert!(matches!(a.matmul(&CMatrix::zeros(3, 1)), Err(Error::DimensionMismatch(_))));
        assert_eq!(a.trace(), C::new(4.0, -1.0));
    }

    #[test]
    fn inverse_of_random_matrices() {
        for (n, seed) in [(1, 1), (5, 2), (32, 3)] {
            let a = random(n, n, seed);
            let ai = a.inverse().unwrap();
            let e = a.matmul(&ai).unwrap().sub(&CMatrix::identity(n)).unwrap();
            assert!(e.max_abs() < 1e-10);
        }
        let mut sing = random(4, 4, 9);
        for j in 0..4 {
            let v = sing[(0, j)];
            sing[(1, j)] = v * 2.0;
        }
        assert!(sing.inverse().is_err());
        assert!(CMatrix::<f64>::zeros(3, 3).inverse().is_err());
    }

    #[test]
    fn svd_of_diagonal_and_known_matrix() {
        let d = CMatrix::diagonal(&[C::new(3.0, 0.0), C::new(0.0, -5.0), C::new(0.5, 0.0)]);
        let s = d.singular_values();
        assert!((s[0] - 5.0).abs() < 1e-14 && (s[1] - 3.0).abs() < 1e-14 && (s[2] - 0.5).abs() < 1e-14);
        assert!((d.condition_number() - 10.0).abs() < 1e-12);
        // [[1, 1], [0, 1]]: singular values (√5 ± 1)/2
        let j = CMatrix::from_vec(2, 2, vec![C::new(1.0, 0.0), C::new(1.0, 0.0), C::new(0.0, 0.0), C::new(1.0, 0.0)])
            .unwrap();
        let s = j.singular_values();
        assert!((s[0] - (5f64.sqrt() + 1.0) / 2.0).abs() < 1e-14);
        assert!((s[1] - (5f64.sqrt() - 1.0) / 2.0).abs() < 1e-14);
        assert_eq!(CMatrix::<f64>::zeros(2, 2).condition_number(), f64::INFINITY);
    }

    #[test]
    fn svd_reconstructs_rectangular_complex_matrices() {
        for (m, n, seed) in [(6, 6, 4), (7, 3, 5), (3, 8, 6), (24, 24, 7)] {
            let a = random(m, n, seed);
            let d = svd(&a);
            assert!(reconstruct(&d).sub(&a).unwrap().max_abs() < 1e-12);
            let k = m.min(n);
            let utu = d.u.adjoint().matmul(&d.u).unwrap();
            let vtv = d.v.adjoint().matmul(&d.v).unwrap();
            assert!(utu.sub(&CMatrix::identity(k)).unwrap().max_abs() < 1e-12);
            assert!(vtv.sub(&CMatrix::identity(k)).unwrap().max_abs() < 1e-12);
            assert!(d.s.windows(2).all(|w| w[0] >= w[1]));
            // Σσ² = ‖A‖_F²
            let f2: f64 = d.s.iter().map(|x| x * x).sum();
            assert!((f2 - a.frobenius_norm().powi(2)).abs() < 1e-10);
        }
    }

    #[test]
    fn single_precision_inverse() {
        let a = CMatrix::<f32>::from_fn(3, 3, |i, j| Complex::new(if i == j { 4.0 } else { 1.0 }, (i as f32) - (j as f32)));
        let e = a.matmul(&a.inverse().unwrap()).unwrap().sub(&CMatrix::identity(3)).unwrap();
        assert!(e.max_abs() < 1e-5);
    }

    proptest! {
        #[test]
        fn unitary_invariance_of_singular_values(seed in 0u64..1000, n in 2usize..7) {
            let a = random(n, n, seed);
            // Q from the SVD of an independent matrix is unitary
            let q = svd(&random(n, n, seed + 7919)).u;
            let s1 = a.singular_values();
            let s2 = q.matmul(&a).unwrap().singular_values();
            for (x, y) in s1.iter().zip(&s2) {
                prop_assert!((x - y).abs() < 1e-10 * s1[0]);
            }
        }

        #[test]
        fn adjoint_is_antimultiplicative(seed in 0u64..1000, n in 1usize..6) {
            let a = random(n, n + 1, seed);
            let b = random(n + 1, n, seed + 1);
            let l = a.matmul(&b).unwrap().adjoint();
            let r = b.adjoint().matmul(&a.adjoint()).unwrap();
            prop_assert!(l.sub(&r).unwrap().max_abs() < 1e-13);
        }
    }
}
