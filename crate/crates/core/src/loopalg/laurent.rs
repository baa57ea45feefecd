use super::mat2::Mat2;
use crate::error::{Error, Result};
use crate::scalar::{Cx, Real};
use num_complex::Complex;
use std::ops::{Add, Mul, Neg, Sub};

/// Coefficient algebra of a Laurent polynomial: complex scalars or 2×2 matrices.
pub trait Coef<S: Real>:
    Copy + Add<Output = Self> + Sub<Output = Self> + Neg<Output = Self> + Mul<Output = Self> + Mul<Cx<S>, Output = Self>
{
    fn zero() -> Self;
    /// Size used for norms and trimming.
    fn size(&self) -> S;
    fn finite(&self) -> bool;
}

impl<S: Real> Coef<S> for Cx<S> {
    fn zero() -> Self {
        Complex::new(S::zero(), S::zero())
    }
    fn size(&self) -> S {
        self.norm()
    }
    fn finite(&self) -> bool {
        crate::scalar::finite(*self)
    }
}

impl<S: Real> Coef<S> for Mat2<S> {
    fn zero() -> Self {
        Mat2::zero()
    }
    fn size(&self) -> S {
        self.max_abs()
    }
    fn finite(&self) -> bool {
        self.is_finite()
    }
}

/// Finitely supported Laurent polynomial `Σ_{k=lo}^{hi} c_k λ^k` with dense storage.
#[derive(Clone, Debug, PartialEq)]
pub struct Laurent<S: Real, T: Coef<S>> {
    lo: i32,
    coeffs: Vec<T>,
    _s: std::marker::PhantomData<S>,
}

/// Laurent polynomial with 2×2 complex matrix coefficients.
pub type MatLaurent<S> = Laurent<S, Mat2<S>>;
/// Laurent polynomial with complex scalar coefficients.
pub type ScalarLaurent<S> = Laurent<S, Cx<S>>;

impl<S: Real, T: Coef<S>> Laurent<S, T> {
    /// Builds the polynomial and strips exactly-zero coefficients at both ends.
    pub fn new(lo: i32, coeffs: Vec<T>) -> Self {
        let mut p = Self { lo, coeffs, _s: std::marker::PhantomData };
        p.trim_exact();
        p
    }

    pub fn zero() -> Self {
        Self { lo: 0, coeffs: Vec::new(), _s: std::marker::PhantomData }
    }

    pub fn monomial(k: i32, c: T) -> Self {
        Self::new(k, vec![c])
    }

    pub fn constant(c: T) -> Self {
        Self::monomial(0, c)
    }

    fn trim_exact(&mut self) {
        while let Some(last) = self.coeffs.last() {
            if last.size() == S::zero() {
                self.coeffs.pop();
            } else {
                break;
            }
        }
        let lead = self.coeffs.iter().take_while(|c| c.size() == S::zero()).count();
        if lead == self.coeffs.len() {
            self.coeffs.clear();
            self.lo = 0;
        } else if lead > 0 {
            self.coeffs.drain(..lead);
            self.lo += lead as i32;
        }
    }

    /// Drops end coefficients whose size is at most `tol`.
    pub fn trimmed(&self, tol: S) -> Self {
        let mut lo = self.lo;
        let mut c = self.coeffs.clone();
        while c.last().map_or(false, |x| x.size() <= tol) {
            c.pop();
        }
        let lead = c.iter().take_while(|x| x.size() <= tol).count();
        c.drain(..lead);
        lo += lead as i32;
        Self::new(lo, c)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Lowest stored power (0 for the zero polynomial).
    pub fn lo(&self) -> i32 {
        self.lo
    }

    /// Highest stored power (`lo − 1` for the zero polynomial).
    pub fn hi(&self) -> i32 {
        self.lo + self.coeffs.len() as i32 - 1
    }

    pub fn coeffs(&self) -> &[T] {
        &self.coeffs
    }

    pub fn coeff(&self, k: i32) -> T {
        if k < self.lo || k > self.hi() {
            T::zero()
        } else {
            self.coeffs[(k - self.lo) as usize]
        }
    }

    /// Evaluates at `lambda` by Horner's scheme.
    pub fn eval(&self, lambda: Cx<S>) -> Result<T> {
        if self.is_zero() {
            return Ok(T::zero());
        }
        if self.lo < 0 && lambda.norm() == S::zero() {
            return Err(Error::Domain {
                op: "loopalg::eval",
                msg: "evaluation at 0 of a polynomial with negative powers".into(),
            });
        }
        let mut acc = T::zero();
        for c in self.coeffs.iter().rev() {
            acc = acc * lambda + *c;
        }
        Ok(acc * lambda.powi(self.lo))
    }

    /// Multiplication by `λ^n`.
    pub fn shift(&self, n: i32) -> Self {
        if self.is_zero() {
            return Self::zero();
        }
        Self::new(self.lo + n, self.coeffs.clone())
    }

    pub fn scale(&self, s: Cx<S>) -> Self {
        Self::new(self.lo, self.coeffs.iter().map(|c| *c * s).collect())
    }

    /// Applies `f(k, c_k)` to every stored coefficient.
    pub fn map(&self, mut f: impl FnMut(i32, T) -> T) -> Self {
        let lo = self.lo;
        Self::new(lo, self.coeffs.iter().enumerate().map(|(i, c)| f(lo + i as i32, *c)).collect())
    }

    /// Restriction to the powers `lo..=hi`.
    pub fn truncated(&self, lo: i32, hi: i32) -> Self {
        if hi < lo {
            return Self::zero();
        }
        Self::new(lo, (lo..=hi).map(|k| self.coeff(k)).collect())
    }

    /// Coefficients on the fixed range `lo..=hi`, zero-padded.
    pub fn dense(&self, lo: i32, hi: i32) -> Vec<T> {
        (lo..=hi).map(|k| self.coeff(k)).collect()
    }

    /// Derivative in λ.
    pub fn derivative(&self) -> Self {
        let lo = self.lo;
        Self::new(
            lo - 1,
            self.coeffs.iter().enumerate().map(|(i, c)| *c * Complex::new(S::from_i32(lo + i as i32).unwrap(), S::zero())).collect(),
        )
    }

    /// Largest coefficient size.
    pub fn max_norm(&self) -> S {
        self.coeffs.iter().fold(S::zero(), |m, c| m.max(c.size()))
    }

    pub fn is_finite(&self) -> bool {
        self.coeffs.iter().all(|c| c.finite())
    }

    /// Largest coefficient size of `self − other`.
    pub fn distance(&self, other: &Self) -> S {
        (self.clone() - other.clone()).max_norm()
    }

    fn combine(&self, other: &Self, sign: bool) -> Self {
        if self.is_zero() {
            return if sign { other.clone() } else { -other.clone() };
        }
        if other.is_zero() {
            return self.clone();
        }
        let lo = self.lo.min(other.lo);
        let hi = self.hi().max(other.hi());
        Self::new(
            lo,
            (lo..=hi)
                .map(|k| if sign { self.coeff(k) + other.coeff(k) } else { self.coeff(k) - other.coeff(k) })
                .collect(),
        )
    }
}

impl<S: Real, T: Coef<S>> Add for Laurent<S, T> {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        self.combine(&o, true)
    }
}

impl<S: Real, T: Coef<S>> Sub for Laurent<S, T> {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        self.combine(&o, false)
    }
}

impl<S: Real, T: Coef<S>> Neg for Laurent<S, T> {
    type Output = Self;
    fn neg(self) -> Self {
        Self::new(self.lo, self.coeffs.iter().map(|c| -*c).collect())
    }
}

impl<S: Real, T: Coef<S>> Mul for &Laurent<S, T> {
    type Output = Laurent<S, T>;
    fn mul(self, o: Self) -> Laurent<S, T> {
        if self.is_zero() || o.is_zero() {
            return Laurent::zero();
        }
        let mut out = vec![T::zero(); self.coeffs.len() + o.coeffs.len() - 1];
        for (i, x) in self.coeffs.iter().enumerate() {
            for (j, y) in o.coeffs.iter().enumerate() {
                out[i + j] = out[i + j] + *x * *y;
            }
        }
        Laurent::new(self.lo + o.lo, out)
    }
}

impl<S: Real, T: Coef<S>> Mul for Laurent<S, T> {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        &self * &o
    }
}

impl<S: Real> MatLaurent<S> {
    /// Exact determinant by coefficient convolution.
    pub fn det(&self) -> ScalarLaurent<S> {
        let part = |f: fn(&Mat2<S>) -> Cx<S>| ScalarLaurent::new(self.lo, self.coeffs.iter().map(f).collect());
        let a = part(|m| m.a);
        let b = part(|m| m.b);
        let c = part(|m| m.c);
        let d = part(|m| m.d);
        &a * &d - &b * &c
    }

    /// Commutator `[self, other]` of matrix-valued Laurent polynomials.
    pub fn bracket(&self, other: &Self) -> Self {
        self * other - other * self
    }

    /// Matrix trace as a scalar Laurent polynomial.
    pub fn trace(&self) -> ScalarLaurent<S> {
        ScalarLaurent::new(self.lo, self.coeffs.iter().map(|m| m.trace()).collect())
    }

    /// Left multiplication of every coefficient by a constant matrix.
    pub fn left_mul(&self, m: &Mat2<S>) -> Self {
        Self::new(self.lo, self.coeffs.iter().map(|c| *m * *c).collect())
    }

    /// Right multiplication of every coefficient by a constant matrix.
    pub fn right_mul(&self, m: &Mat2<S>) -> Self {
        Self::new(self.lo, self.coeffs.iter().map(|c| *c * *m).collect())
    }
}

impl<S: Real> ScalarLaurent<S> {
    /// Polynomial with the given roots and leading factor, `c·Π(λ − r)`.
    pub fn from_roots(c: Cx<S>, roots: &[Cx<S>]) -> Self {
        let mut p = Self::constant(c);
        for r in roots {
            p = &p * &Self::new(0, vec![-*r, Complex::new(S::one(), S::zero())]);
        }
        p
    }
}
