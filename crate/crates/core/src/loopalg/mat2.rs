use crate::scalar::{Cx, Real};
use num_complex::Complex;
use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};

/// Complex 2×2 matrix stored row-major as `[[a, b], [c, d]]`.
#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct Mat2<S> {
    pub a: Cx<S>,
    pub b: Cx<S>,
    pub c: Cx<S>,
    pub d: Cx<S>,
}

impl<S: Real> Mat2<S> {
    pub fn new(a: Cx<S>, b: Cx<S>, c: Cx<S>, d: Cx<S>) -> Self {
        Self { a, b, c, d }
    }

    pub fn zero() -> Self {
        let z = Complex::new(S::zero(), S::zero());
        Self::new(z, z, z, z)
    }

    pub fn identity() -> Self {
        let z = Complex::new(S::zero(), S::zero());
        let o = Complex::new(S::one(), S::zero());
        Self::new(o, z, z, o)
    }

    pub fn diag(a: Cx<S>, d: Cx<S>) -> Self {
        let z = Complex::new(S::zero(), S::zero());
        Self::new(a, z, z, d)
    }

    /// Entries in row-major order.
    pub fn entries(&self) -> [Cx<S>; 4] {
        [self.a, self.b, self.c, self.d]
    }

    pub fn from_entries(e: [Cx<S>; 4]) -> Self {
        Self::new(e[0], e[1], e[2], e[3])
    }

    pub fn det(&self) -> Cx<S> {
        self.a * self.d - self.b * self.c
    }

    pub fn trace(&self) -> Cx<S> {
        self.a + self.d
    }

    /// Inverse through the adjugate. Returns `None` for a singular matrix.
    pub fn inverse(&self) -> Option<Self> {
        let det = self.det();
        if det.norm() == S::zero() || !crate::scalar::finite(det) {
            return None;
        }
        let inv = det.inv();
        Some(Self::new(self.d * inv, -self.b * inv, -self.c * inv, self.a * inv))
    }

    /// Adjugate, equal to the inverse for unimodular matrices.
    pub fn adjugate(&self) -> Self {
        Self::new(self.d, -self.b, -self.c, self.a)
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        Self::new(self.a.conj(), self.c.conj(), self.b.conj(), self.d.conj())
    }

    pub fn transpose(&self) -> Self {
        Self::new(self.a, self.c, self.b, self.d)
    }

    pub fn conj(&self) -> Self {
        Self::new(self.a.conj(), self.b.conj(), self.c.conj(), self.d.conj())
    }

    pub fn scale(&self, s: Cx<S>) -> Self {
        Self::new(self.a * s, self.b * s, self.c * s, self.d * s)
    }

    pub fn scale_re(&self, s: S) -> Self {
        Self::new(self.a * s, self.b * s, self.c * s, self.d * s)
    }

    /// Commutator `[self, other]`.
    pub fn bracket(&self, other: &Self) -> Self {
        *self * *other - *other * *self
    }

    /// Frobenius norm.
    pub fn norm(&self) -> S {
        (self.a.norm_sqr() + self.b.norm_sqr() + self.c.norm_sqr() + self.d.norm_sqr()).sqrt()
    }

    /// Largest entry modulus.
    pub fn max_abs(&self) -> S {
        self.a.norm().max(self.b.norm()).max(self.c.norm()).max(self.d.norm())
    }

    pub fn is_finite(&self) -> bool {
        crate::scalar::finite(self.a) && crate::scalar::finite(self.b) && crate::scalar::finite(self.c) && crate::scalar::finite(self.d)
    }

    /// Matrix–vector product.
    pub fn apply(&self, v: [Cx<S>; 2]) -> [Cx<S>; 2] {
        [self.a * v[0] + self.b * v[1], self.c * v[0] + self.d * v[1]]
    }
}

impl<S: Real> Add for Mat2<S> {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self::new(self.a + o.a, self.b + o.b, self.c + o.c, self.d + o.d)
    }
}

impl<S: Real> Sub for Mat2<S> {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Self::new(self.a - o.a, self.b - o.b, self.c - o.c, self.d - o.d)
    }
}

impl<S: Real> AddAssign for Mat2<S> {
    fn add_assign(&mut self, o: Self) {
        *self = *self + o;
    }
}

impl<S: Real> SubAssign for Mat2<S> {
    fn sub_assign(&mut self, o: Self) {
        *self = *self - o;
    }
}

impl<S: Real> Neg for Mat2<S> {
    type Output = Self;
    fn neg(self) -> Self {
        Self::new(-self.a, -self.b, -self.c, -self.d)
    }
}

impl<S: Real> Mul for Mat2<S> {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        Self::new(
            self.a * o.a + self.b * o.c,
            self.a * o.b + self.b * o.d,
            self.c * o.a + self.d * o.c,
            self.c * o.b + self.d * o.d,
        )
    }
}

impl<S: Real> Mul<Cx<S>> for Mat2<S> {
    type Output = Self;
    fn mul(self, s: Cx<S>) -> Self {
        self.scale(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::c64;

    #[test]
    fn inverse_and_adjugate_agree_on_unimodular() {
        let m: Mat2<f64> = Mat2::new(c64(2.0, 0.0), c64(1.0, 1.0), c64(0.0, 0.0), c64(0.5, 0.0));
        let inv = m.inverse().unwrap();
        assert!((inv - m.adjugate()).norm() < 1e-15);
        assert!((m * inv - Mat2::identity()).norm() < 1e-15);
    }

    #[test]
    fn singular_has_no_inverse() {
        let m: Mat2<f64> = Mat2::new(c64(1.0, 0.0), c64(2.0, 0.0), c64(2.0, 0.0), c64(4.0, 0.0));
        assert!(m.inverse().is_none());
    }

    #[test]
    fn bracket_is_antisymmetric() {
        let x: Mat2<f64> = Mat2::new(c64(1.0, 2.0), c64(0.5, -1.0), c64(3.0, 0.0), c64(-1.0, -2.0));
        let y: Mat2<f64> = Mat2::new(c64(0.0, 1.0), c64(2.0, 0.0), c64(-1.0, 1.0), c64(0.0, -1.0));
        assert!((x.bracket(&y) + y.bracket(&x)).norm() < 1e-14);
        assert!(x.bracket(&y).trace().norm() < 1e-14);
    }
}
