//! Arithmetic of the Heisenberg group `ℍⁿ = ℝⁿ × ℝⁿ × ℝ` in the global chart
//! `h = (x, y, t)` with product `(x, y, t)(x', y', t') = (x + x', y + y', t + t' + x·y')`.

use crate::error::{Error, Result};
use crate::scalar::Real;

/// A point `(x, y, t)` of `ℍⁿ`. Coordinates are always finite.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupPoint<T> {
    x: Vec<T>,
    y: Vec<T>,
    t: T,
}

/// Dimension data of `ℍⁿ`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GroupDims {
    pub n: usize,
}

impl GroupDims {
    pub fn new(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidArgument("group dimension n must be positive".into()));
        }
        Ok(Self { n })
    }

    /// Homogeneous dimension `Q = 2n + 2`.
    pub fn homogeneous_dim(&self) -> usize {
        2 * self.n + 2
    }

    /// Topological dimension `2n + 1`.
    pub fn topological_dim(&self) -> usize {
        2 * self.n + 1
    }
}

impl<T: Real> GroupPoint<T> {
    pub fn new(x: Vec<T>, y: Vec<T>, t: T) -> Result<Self> {
        if x.len() != y.len() {
            return Err(Error::DimensionMismatch(format!(
                "x has length {}, y has length {}",
                x.len(),
                y.len()
            )));
        }
        if x.is_empty() {
            return Err(Error::InvalidArgument("group dimension n must be positive".into()));
        }
        if !(x.iter().chain(y.iter()).all(|c| c.is_finite()) && t.is_finite()) {
            return Err(Error::InvalidArgument("group coordinates must be finite".into()));
        }
        Ok(Self { x, y, t })
    }

    /// Builds a point from `v = (x, y)` of length `2n` and `t`.
    pub fn from_vt(v: &[T], t: T) -> Result<Self> {
        if v.len() % 2 != 0 {
            return Err(Error::DimensionMismatch(format!("v has odd length {}", v.len())));
        }
        let n = v.len() / 2;
        Self::new(v[..n].to_vec(), v[n..].to_vec(), t)
    }

    /// Convenience constructor for `n = 1`.
    pub fn new1(x: T, y: T, t: T) -> Result<Self> {
        Self::new(vec![x], vec![y], t)
    }

    pub fn identity(n: usize) -> Self {
        Self { x: vec![T::zero(); n], y: vec![T::zero(); n], t: T::zero() }
    }

    pub fn n(&self) -> usize {
        self.x.len()
    }

    pub fn dims(&self) -> GroupDims {
        GroupDims { n: self.n() }
    }

    pub fn x(&self) -> &[T] {
        &self.x
    }

    pub fn y(&self) -> &[T] {
        &self.y
    }

    pub fn t(&self) -> T {
        self.t
    }

    /// `v = (x, y)`.
    pub fn v(&self) -> Vec<T> {
        self.x.iter().chain(self.y.iter()).copied().collect()
    }

    /// Largest coordinate difference, used for approximate comparisons.
    pub fn max_abs_diff(&self, other: &Self) -> T {
        self.x
            .iter()
            .zip(&other.x)
            .chain(self.y.iter().zip(&other.y))
            .map(|(a, b)| (*a - *b).abs())
            .fold((self.t - other.t).abs(), T::max)
    }
}

fn dot<T: Real>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).fold(T::zero(), |acc, (p, q)| acc + *p * *q)
}

/// Group product `a·b`.
pub fn group_mul<T: Real>(a: &GroupPoint<T>, b: &GroupPoint<T>) -> Result<GroupPoint<T>> {
    if a.n() != b.n() {
        return Err(Error::DimensionMismatch(format!("n = {} vs n = {}", a.n(), b.n())));
    }
    Ok(GroupPoint {
        x: a.x.iter().zip(&b.x).map(|(p, q)| *p + *q).collect(),
        y: a.y.iter().zip(&b.y).map(|(p, q)| *p + *q).collect(),
        t: a.t + b.t + dot(&a.x, &b.y),
    })
}

/// Group inverse `(−x, −y, −t + x·y)`.
pub fn group_inv<T: Real>(a: &GroupPoint<T>) -> GroupPoint<T> {
    GroupPoint {
        x: a.x.iter().map(|c| -*c).collect(),
        y: a.y.iter().map(|c| -*c).collect(),
        t: -a.t + dot(&a.x, &a.y),
    }
}

/// Dilation `δ_j(v, t) = (j v, j² t)`.
pub fn dilate<T: Real>(j: T, a: &GroupPoint<T>) -> Result<GroupPoint<T>> {
    if !(j > T::zero()) || !j.is_finite() {
        return Err(Error::InvalidArgument(format!("dilation factor must be positive, got {j}")));
    }
    Ok(GroupPoint {
        x: a.x.iter().map(|c| j * *c).collect(),
        y: a.y.iter().map(|c| j * *c).collect(),
        t: j * j * a.t,
    })
}

/// Homogeneous norm `Σ|v_i| + |t|^{1/2}` (ℓ¹ on `v`; any equivalent norm only changes constants).
pub fn homogeneous_norm<T: Real>(a: &GroupPoint<T>) -> T {
    a.x.iter().chain(a.y.iter()).fold(T::zero(), |acc, c| acc + c.abs()) + a.t.abs().sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn p(x: f64, y: f64, t: f64) -> GroupPoint<f64> {
        GroupPoint::new1(x, y, t).unwrap()
    }

    #[test]
    fn product_examples() {
        assert_eq!(group_mul(&p(1.0, 0.0, 0.0), &p(0.0, 1.0, 0.0)).unwrap(), p(1.0, 1.0, 1.0));
        assert_eq!(group_mul(&p(0.0, 0.0, 2.5), &p(0.0, 0.0, -1.0)).unwrap(), p(0.0, 0.0, 1.5));
        let lhs = group_mul(&group_mul(&p(1.0, 2.0, 3.0), &p(4.0, 5.0, 6.0)).unwrap(), &p(7.0, 8.0, 9.0)).unwrap();
        let rhs = group_mul(&p(1.0, 2.0, 3.0), &group_mul(&p(4.0, 5.0, 6.0), &p(7.0, 8.0, 9.0)).unwrap()).unwrap();
        // brute force: t = 3+6+9 + 1*5 + (1+4)*8 = 63
        assert_eq!(lhs, p(12.0, 15.0, 63.0));
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn mismatched_dimensions() {
        let a = GroupPoint::new(vec![1.0, 2.0], vec![0.0, 0.0], 0.0).unwrap();
        assert!(matches!(group_mul(&a, &p(0.0, 0.0, 0.0)), Err(Error::DimensionMismatch(_))));
        assert!(GroupPoint::new(vec![1.0], vec![0.0, 0.0], 0.0).is_err());
        assert!(GroupPoint::new1(f64::NAN, 0.0, 0.0).is_err());
    }

    #[test]
    fn inverse_examples() {
        assert_eq!(group_inv(&p(0.0, 0.0, 0.0)), p(0.0, 0.0, 0.0));
        assert_eq!(group_inv(&p(1.0, 1.0, 1.0)), p(-1.0, -1.0, 0.0));
    }

    #[test]
    fn dilation_and_norm_examples() {
        assert_eq!(dilate(3.0, &p(1.0, 2.0, 5.0)).unwrap(), p(3.0, 6.0, 45.0));
        assert_eq!(dilate(1.0, &p(1.0, 2.0, 5.0)).unwrap(), p(1.0, 2.0, 5.0));
        assert!(dilate(0.0, &p(1.0, 2.0, 5.0)).is_err());
        assert!(dilate(-1.0, &p(1.0, 2.0, 5.0)).is_err());
        assert_eq!(homogeneous_norm(&p(1.0, -2.0, 4.0)), 5.0);
        assert_eq!(homogeneous_norm(&p(0.0, 0.0, 0.0)), 0.0);
        assert_eq!(homogeneous_norm(&dilate(2.0, &p(1.0, -2.0, 4.0)).unwrap()), 10.0);
        assert_eq!(GroupDims::new(1).unwrap().homogeneous_dim(), 4);
        assert_eq!(GroupDims::new(3).unwrap().homogeneous_dim(), 8);
    }

    #[test]
    fn works_in_single_precision() {
        let a = GroupPoint::<f32>::new1(1.0, 2.0, 3.0).unwrap();
        let e = group_mul(&a, &group_inv(&a)).unwrap();
        assert!(e.max_abs_diff(&GroupPoint::identity(1)) < 1e-6);
    }

    fn point(n: usize) -> impl Strategy<Value = GroupPoint<f64>> {
        (
            prop::collection::vec(-10.0..10.0f64, n),
            prop::collection::vec(-10.0..10.0f64, n),
            -10.0..10.0f64,
        )
            .prop_map(|(x, y, t)| GroupPoint::new(x, y, t).unwrap())
    }

    fn triple() -> impl Strategy<Value = (GroupPoint<f64>, GroupPoint<f64>, GroupPoint<f64>)> {
        (1usize..4).prop_flat_map(|n| (point(n), point(n), point(n)))
    }

    proptest! {
        #[test]
        fn associativity((a, b, c) in triple()) {
            let l = group_mul(&group_mul(&a, &b).unwrap(), &c).unwrap();
            let r = group_mul(&a, &group_mul(&b, &c).unwrap()).unwrap();
            prop_assert!(l.max_abs_diff(&r) <= 1e-12 * (1.0 + homogeneous_norm(&l).powi(2)));
        }

        #[test]
        fn identity_and_inverse((a, _b, _c) in triple()) {
            let e = GroupPoint::identity(a.n());
            prop_assert_eq!(group_mul(&a, &e).unwrap(), a.clone());
            prop_assert_eq!(group_mul(&e, &a).unwrap(), a.clone());
            prop_assert!(group_mul(&a, &group_inv(&a)).unwrap().max_abs_diff(&e) <= 1e-12 * 100.0);
            prop_assert!(group_mul(&group_inv(&a), &a).unwrap().max_abs_diff(&e) <= 1e-12 * 100.0);
        }

        #[test]
        fn dilation_is_automorphism((a, b, _c) in triple(), j in 0.1..5.0f64) {
            let l = dilate(j, &group_mul(&a, &b).unwrap()).unwrap();
            let r = group_mul(&dilate(j, &a).unwrap(), &dilate(j, &b).unwrap()).unwrap();
            prop_assert!(l.max_abs_diff(&r) <= 1e-12 * (1.0 + homogeneous_norm(&l).powi(2)));
        }

        #[test]
        fn norm_homogeneity((a, _b, _c) in triple(), k in 0usize..3) {
            let j = [0.5, 2.0, 7.0][k];
            let lhs = homogeneous_norm(&dilate(j, &a).unwrap());
            let rhs = j * homogeneous_norm(&a);
            prop_assert!((lhs - rhs).abs() <= 1e-12 * rhs.max(1e-300));
        }
    }
}
