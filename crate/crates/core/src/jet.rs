//! Truncated multivariate Taylor polynomials ("jets") with complex
//! coefficients: forward-mode differentiation to arbitrary order.

use std::sync::Arc;

use num_complex::Complex;

use crate::scalar::{czero, Real};

/// Monomial bookkeeping shared by all jets with the same variable count and order.
#[derive(Debug)]
pub struct JetSpace {
    nvars: usize,
    order: usize,
    exps: Vec<Vec<usize>>,
    /// `(i, j, k)`: monomial `i` times monomial `j` is monomial `k`.
    products: Vec<(usize, usize, usize)>,
}

impl JetSpace {
    pub fn new(nvars: usize, order: usize) -> Arc<Self> {
        let mut exps = Vec::new();
        for deg in 0..=order {
            let mut cur = vec![0; nvars];
            push_degree(&mut exps, &mut cur, 0, deg);
        }
        let index = |e: &[usize]| exps.iter().position(|x| x.as_slice() == e);
        let mut products = Vec::new();
        for (i, a) in exps.iter().enumerate() {
            for (j, b) in exps.iter().enumerate() {
                let s: Vec<usize> = a.iter().zip(b).map(|(p, q)| p + q).collect();
                if s.iter().sum::<usize>() <= order {
                    products.push((i, j, index(&s).expect("monomial table is closed")));
                }
            }
        }
        Arc::new(Self { nvars, order, exps, products })
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn len(&self) -> usize {
        self.exps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.exps.is_empty()
    }

    pub fn index_of(&self, e: &[usize]) -> Option<usize> {
        self.exps.iter().position(|x| x.as_slice() == e)
    }

    pub fn exponents(&self) -> &[Vec<usize>] {
        &self.exps
    }
}

fn push_degree(out: &mut Vec<Vec<usize>>, cur: &mut Vec<usize>, pos: usize, left: usize) {
    if pos + 1 == cur.len() {
        cur[pos] = left;
        out.push(cur.clone());
        cur[pos] = 0;
        return;
    }
    if cur.is_empty() {
        if left == 0 {
            out.push(Vec::new());
        }
        return;
    }
    for k in (0..=left).rev() {
        cur[pos] = k;
        push_degree(out, cur, pos + 1, left - k);
    }
    cur[pos] = 0;
}

/// `Σ_e c_e (z − z₀)^e / …` stored as plain Taylor coefficients `c_e`.
#[derive(Debug, Clone)]
pub struct Jet<T> {
    space: Arc<JetSpace>,
    coeffs: Vec<Complex<T>>,
}

impl<T: Real> Jet<T> {
    pub fn constant(space: &Arc<JetSpace>, c: Complex<T>) -> Self {
        let mut coeffs = vec![czero(); space.len()];
        coeffs[0] = c;
        Self { space: space.clone(), coeffs }
    }

    /// The coordinate function `z_i` expanded at `value`.
    pub fn variable(space: &Arc<JetSpace>, i: usize, value: T) -> Self {
        let mut j = Self::constant(space, Complex::new(value, T::zero()));
        if space.order > 0 {
            let mut e = vec![0; space.nvars];
            e[i] = 1;
            let k = space.index_of(&e).expect("degree-one monomial");
            j.coeffs[k] = Complex::new(T::one(), T::zero());
        }
        j
    }

    pub fn value(&self) -> Complex<T> {
        self.coeffs[0]
    }

    pub fn space(&self) -> &Arc<JetSpace> {
        &self.space
    }

    pub fn coeffs(&self) -> &[Complex<T>] {
        &self.coeffs
    }

    /// Partial derivative `∂^e` at the expansion point (`e!` times the coefficient).
    pub fn derivative(&self, e: &[usize]) -> Option<Complex<T>> {
        let k = self.space.index_of(e)?;
        let fact = e.iter().fold(T::one(), |acc, &m| acc * factorial::<T>(m));
        Some(self.coeffs[k].scale(fact))
    }

    pub fn is_constant(&self) -> bool {
        self.coeffs[1..].iter().all(|c| *c == czero())
    }

    pub fn add(&self, o: &Self) -> Self {
        let coeffs = self.coeffs.iter().zip(&o.coeffs).map(|(a, b)| *a + *b).collect();
        Self { space: self.space.clone(), coeffs }
    }

    pub fn sub(&self, o: &Self) -> Self {
        let coeffs = self.coeffs.iter().zip(&o.coeffs).map(|(a, b)| *a - *b).collect();
        Self { space: self.space.clone(), coeffs }
    }

    pub fn neg(&self) -> Self {
        Self { space: self.space.clone(), coeffs: self.coeffs.iter().map(|c| -*c).collect() }
    }

    pub fn scale(&self, s: Complex<T>) -> Self {
        Self { space: self.space.clone(), coeffs: self.coeffs.iter().map(|c| *c * s).collect() }
    }

    pub fn mul(&self, o: &Self) -> Self {
        let mut coeffs = vec![czero(); self.space.len()];
        for &(i, j, k) in &self.space.products {
            coeffs[k] += self.coeffs[i] * o.coeffs[j];
        }
        Self { space: self.space.clone(), coeffs }
    }

    /// `g(self)` given `derivs[k] = g^{(k)}(value)` for `k = 0..=order`.
    pub fn compose(&self, derivs: &[Complex<T>]) -> Self {
        let mut h = self.clone();
        h.coeffs[0] = czero();
        let mut out = Self::constant(&self.space, derivs[0]);
        let mut power = Self::constant(&self.space, Complex::new(T::one(), T::zero()));
        for (k, d) in derivs.iter().enumerate().skip(1).take(self.space.order) {
            power = power.mul(&h);
            out = out.add(&power.scale(d.unscale(factorial(k))));
        }
        out
    }

    pub fn recip(&self) -> Self {
        self.powf(-T::one())
    }

    pub fn div(&self, o: &Self) -> Self {
        self.mul(&o.recip())
    }

    pub fn exp(&self) -> Self {
        let e = self.value().exp();
        self.compose(&vec![e; self.space.order + 1])
    }

    pub fn ln(&self) -> Self {
        let c = self.value();
        let mut d = vec![c.ln()];
        for k in 1..=self.space.order {
            let sign = if k % 2 == 1 { T::one() } else { -T::one() };
            d.push(Complex::new(sign * factorial::<T>(k - 1), T::zero()) / c.powi(k as i32));
        }
        self.compose(&d)
    }

    /// `self^p` for a real constant exponent (integer exponents allow negative bases).
    pub fn powf(&self, p: T) -> Self {
        let c = self.value();
        let integral = p == p.round();
        let mut d = Vec::with_capacity(self.space.order + 1);
        let mut falling = T::one();
        for k in 0..=self.space.order {
            if falling == T::zero() {
                d.push(czero());
                continue;
            }
            let e = p - T::from_usize_lossy(k);
            let base = if integral && c.im == T::zero() {
                Complex::new(c.re.powi(e.to_i32().unwrap_or(0)), T::zero())
            } else {
                c.powf(e)
            };
            d.push(base.scale(falling));
            falling = falling * e;
        }
        self.compose(&d)
    }

    pub fn pow(&self, o: &Self) -> Self {
        if o.is_constant() && o.value().im == T::zero() {
            self.powf(o.value().re)
        } else {
            o.mul(&self.ln()).exp()
        }
    }

    pub fn sqrt(&self) -> Self {
        self.powf(T::c(0.5))
    }

    pub fn sin(&self) -> Self {
        let c = self.value();
        let cyc = [c.sin(), c.cos(), -c.sin(), -c.cos()];
        self.compose(&(0..=self.space.order).map(|k| cyc[k % 4]).collect::<Vec<_>>())
    }

    pub fn cos(&self) -> Self {
        let c = self.value();
        let cyc = [c.cos(), -c.sin(), -c.cos(), c.sin()];
        self.compose(&(0..=self.space.order).map(|k| cyc[k % 4]).collect::<Vec<_>>())
    }

    /// `|x|` for a real argument: `sign(x)·x` away from zero.
    pub fn abs(&self) -> Self {
        let c = self.value();
        if c.im != T::zero() {
            return Self::constant(&self.space, Complex::new(c.norm(), T::zero()));
        }
        if c.re < T::zero() {
            self.neg()
        } else {
            self.clone()
        }
    }
}

pub(crate) fn factorial<T: Real>(k: usize) -> T {
    (1..=k).fold(T::one(), |a, i| a * T::from_usize_lossy(i))
}

#[cfg(test)]
mod tests {
    use super::*;

    type C = Complex<f64>;

    #[test]
    fn monomial_counts() {
        assert_eq!(JetSpace::new(3, 5).len(), 56);
        assert_eq!(JetSpace::new(1, 4).len(), 5);
        assert_eq!(JetSpace::new(2, 0).len(), 1);
    }

    #[test]
    fn polynomial_derivatives() {
        let sp = JetSpace::new(2, 4);
        let x = Jet::<f64>::variable(&sp, 0, 2.0);
        let y = Jet::variable(&sp, 1, -1.0);
        // f = x³y²
        let f = x.mul(&x).mul(&x).mul(&y).mul(&y);
        assert_eq!(f.value(), C::new(8.0, 0.0));
        assert_eq!(f.derivative(&[1, 0]).unwrap(), C::new(12.0, 0.0));
        assert_eq!(f.derivative(&[0, 1]).unwrap(), C::new(-16.0, 0.0));
        assert_eq!(f.derivative(&[2, 1]).unwrap(), C::new(-24.0, 0.0));
        assert_eq!(f.derivative(&[3, 1]).unwrap(), C::new(-12.0, 0.0));
        assert!(f.derivative(&[3, 2]).is_none());
    }

    #[test]
    fn elementary_functions() {
        let sp = JetSpace::new(1, 4);
        let x = Jet::<f64>::variable(&sp, 0, 0.7);
        let close = |a: C, b: f64| (a - C::new(b, 0.0)).norm() < 1e-12 * (1.0 + b.abs());
        let e = x.exp();
        for k in 0..=4 {
            assert!(close(e.derivative(&[k]).unwrap(), 0.7f64.exp()));
        }
        let r = x.recip();
        assert!(close(r.derivative(&[3]).unwrap(), -6.0 / 0.7f64.powi(4)));
        let s = x.sqrt();
        assert!(close(s.derivative(&[2]).unwrap(), -0.25 * 0.7f64.powf(-1.5)));
        let l = x.ln();
        assert!(close(l.derivative(&[4]).unwrap(), -6.0 / 0.7f64.powi(4)));
        let sn = x.sin();
        assert!(close(sn.derivative(&[3]).unwrap(), -(0.7f64).cos()));
        let ab = Jet::<f64>::variable(&sp, 0, -0.7).abs();
        assert!(close(ab.derivative(&[1]).unwrap(), -1.0));
        let q = x.div(&x.add(&Jet::constant(&sp, C::new(1.0, 0.0))));
        // d/dx x/(x+1) = 1/(x+1)²
        assert!(close(q.derivative(&[1]).unwrap(), 1.0 / 1.7f64.powi(2)));
    }

    #[test]
    fn integer_power_at_zero_stays_finite() {
        let sp = JetSpace::new(1, 4);
        let sq = Jet::<f64>::variable(&sp, 0, 0.0).powf(2.0);
        assert_eq!(sq.derivative(&[2]).unwrap(), C::new(2.0, 0.0));
        assert_eq!(sq.derivative(&[4]).unwrap(), C::new(0.0, 0.0));
    }

    #[test]
    fn general_power_matches_exp_log() {
        let sp = JetSpace::new(2, 3);
        let x = Jet::<f64>::variable(&sp, 0, 1.3);
        let y = Jet::variable(&sp, 1, 0.4);
        let a = x.pow(&y);
        let b = y.mul(&x.ln()).exp();
        for (p, q) in a.coeffs().iter().zip(b.coeffs()) {
            assert!((p - q).norm() < 1e-14);
        }
    }
}
