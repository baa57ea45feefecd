//! The potential spaces of CMC and minimal (KdV) polynomial Killing fields, their validity
//! invariants, the connection forms they induce, and the geometric scalars they encode.

use crate::error::{Error, Result};
use crate::loopalg::{Mat2, MatLaurent, ScalarLaurent};
use crate::scalar::{re, Cx, Real};
use num_complex::Complex;

/// One named invariant check with the magnitude of its violation.
#[derive(Clone, Debug, PartialEq)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    pub magnitude: f64,
}

/// Outcome of validating a potential: every invariant is listed, passing or not.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ValidationReport {
    pub checks: Vec<Check>,
}

impl ValidationReport {
    fn push(&mut self, name: impl Into<String>, pass: bool, magnitude: f64) {
        self.checks.push(Check { name: name.into(), pass, magnitude });
    }

    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn failures(&self) -> Vec<&Check> {
        self.checks.iter().filter(|c| !c.pass).collect()
    }
}

/// Connection form `α = U dz + V dz̄` as a pair of Laurent polynomials in λ.
#[derive(Clone, Debug, PartialEq)]
pub struct ConnectionPair<S: Real> {
    pub u: MatLaurent<S>,
    pub v: MatLaurent<S>,
}

impl<S: Real> ConnectionPair<S> {
    /// The x-derivative generator `U + V`.
    pub fn dx(&self) -> MatLaurent<S> {
        self.u.clone() + self.v.clone()
    }

    /// The y-derivative generator `i(U − V)`.
    pub fn dy(&self) -> MatLaurent<S> {
        (self.u.clone() - self.v.clone()).scale(Complex::new(S::zero(), S::one()))
    }

    /// Generator along the direction `T`: `T·U + T̄·V`.
    pub fn along(&self, t: Cx<S>) -> MatLaurent<S> {
        self.u.scale(t) + self.v.scale(t.conj())
    }
}

/// Element of the CMC potential space: coefficients `ζ_{-1}, …, ζ_g`.
#[derive(Clone, Debug, PartialEq)]
pub struct CmcPotential<S: Real> {
    g: usize,
    h: S,
    coeffs: Vec<Mat2<S>>,
}

impl<S: Real> CmcPotential<S> {
    /// Assembles a potential from `g + 2` coefficients for the powers `−1..=g`.
    ///
    /// No invariant is enforced here; call [`CmcPotential::validate`].
    pub fn new(g: usize, h: S, coeffs: Vec<Mat2<S>>) -> Result<Self> {
        if coeffs.len() != g + 2 {
            return Err(Error::Invalid {
                op: "potential::CmcPotential::new",
                msg: format!("expected {} coefficients, got {}", g + 2, coeffs.len()),
            });
        }
        Ok(Self { g, h, coeffs })
    }

    /// Reads the coefficients `−1..=g` off a Laurent polynomial.
    pub fn from_laurent(g: usize, h: S, l: &MatLaurent<S>) -> Self {
        Self { g, h, coeffs: l.dense(-1, g as i32) }
    }

    /// Genus-zero potential of the round cylinder with mean curvature `h` and real Hopf
    /// coefficient `q > 0`, so that `e^ω = 2q/h`.
    pub fn vacuum(h: S, q: S) -> Self {
        let two = S::lit(2.0);
        let v = (h * q / two).sqrt();
        let z = re(S::zero());
        Self {
            g: 0,
            h,
            coeffs: vec![Mat2::new(z, re(v), z, z), Mat2::new(z, z, re(-v), z)],
        }
    }

    pub fn genus(&self) -> usize {
        self.g
    }

    pub fn mean_curvature(&self) -> S {
        self.h
    }

    /// Coefficient of `λ^k`, zero outside `−1..=g`.
    pub fn coeff(&self, k: i32) -> Mat2<S> {
        if k < -1 || k > self.g as i32 {
            Mat2::zero()
        } else {
            self.coeffs[(k + 1) as usize]
        }
    }

    pub fn coeffs(&self) -> &[Mat2<S>] {
        &self.coeffs
    }

    pub fn laurent(&self) -> MatLaurent<S> {
        MatLaurent::new(-1, self.coeffs.clone())
    }

    pub fn u(&self, k: i32) -> Cx<S> {
        self.coeff(k).a
    }

    pub fn v(&self, k: i32) -> Cx<S> {
        self.coeff(k).b
    }

    pub fn w(&self, k: i32) -> Cx<S> {
        self.coeff(k).c
    }

    /// The real positive entry `v_{−1}`.
    pub fn v_minus1(&self) -> S {
        self.coeff(-1).b.re
    }

    /// Report on every invariant of the potential space, with `tol` relative to the largest
    /// coefficient.
    pub fn validate(&self, tol: S) -> ValidationReport {
        let mut r = ValidationReport::default();
        let scale = self.coeffs.iter().fold(S::zero(), |m, c| m.max(c.max_abs())).max(S::min_positive_value());
        let f = |x: S| (x / scale).to_f64_lossy();
        for k in -1..=self.g as i32 {
            let t = self.coeff(k).trace().norm();
            r.push(format!("trace-free at k={k}"), t <= tol * scale, f(t));
        }
        let m1 = self.coeff(-1);
        let shape = m1.a.norm().max(m1.c.norm()).max(m1.d.norm()).max(m1.b.im.abs());
        r.push("coeff(-1) = [[0, v],[0, 0]] with v real", shape <= tol * scale, f(shape));
        r.push("v_{-1} > 0", m1.b.re > S::zero(), m1.b.re.min(S::zero()).abs().to_f64_lossy());
        r.push("H > 0", self.h > S::zero(), self.h.min(S::zero()).abs().to_f64_lossy());
        for k in -1..=self.g as i32 {
            let partner = self.g as i32 - 1 - k;
            let dev = (self.coeff(k) + self.coeff(partner).adjoint()).max_abs();
            r.push(format!("reality at k={k}"), dev <= tol * scale, f(dev));
        }
        let tr = (m1 * self.coeff(0)).trace().norm();
        let pair = m1.max_abs() * self.coeff(0).max_abs();
        r.push("tr(coeff(-1) coeff(0)) != 0", tr > tol * pair, f(tr / scale));
        r
    }

    /// Conformal factor `ω = 2 ln(2 v_{−1}/H)`.
    pub fn conformal_factor(&self) -> S {
        let two = S::lit(2.0);
        two * (two * self.v_minus1() / self.h).ln()
    }

    /// Hopf coefficient `Q = −w₀ e^{ω/2}`.
    pub fn hopf(&self) -> Cx<S> {
        -self.w(0) * (self.conformal_factor() / S::lit(2.0)).exp()
    }

    /// `U = [[½u₀, v₋₁λ⁻¹],[w₀, −½u₀]]`, `V = −[[½ū₀, w̄₀],[v̄₋₁λ, −½ū₀]]`.
    pub fn alpha(&self) -> ConnectionPair<S> {
        let z = re(S::zero());
        let half = S::lit(0.5);
        let u0 = self.u(0) * half;
        let w0 = self.w(0);
        let vm1 = self.v(-1);
        let u = MatLaurent::new(-1, vec![self.coeff(-1), Mat2::new(u0, z, w0, -u0)]);
        let v = MatLaurent::new(0, vec![-Mat2::new(u0.conj(), w0.conj(), z, -u0.conj()), -Mat2::new(z, z, vm1.conj(), z)]);
        ConnectionPair { u, v }
    }

    /// The spectral polynomial `a(λ) = −λ det ζ(λ)`, required to have degree exactly `2g`.
    pub fn spectral_poly(&self) -> Result<ScalarLaurent<S>> {
        let a = self.laurent().det().shift(1).scale(re(-S::one()));
        let a = a.truncated(0, 2 * self.g as i32);
        let scale = a.max_norm();
        let top = a.coeff(2 * self.g as i32).norm();
        if scale == S::zero() || top <= S::lit(1e-13) * scale || a.coeff(0).norm() <= S::lit(1e-13) * scale {
            return Err(Error::Degree {
                op: "potential::spectral_poly_cmc",
                msg: format!("spectral polynomial degree dropped below {}", 2 * self.g),
            });
        }
        Ok(a)
    }

    /// Replaces the coefficients while keeping genus and mean curvature.
    pub fn with_coeffs(&self, coeffs: Vec<Mat2<S>>) -> Self {
        assert_eq!(coeffs.len(), self.g + 2);
        Self { g: self.g, h: self.h, coeffs }
    }

    /// Conjugation `ζ ↦ M⁻¹ ζ M` by a constant unimodular matrix.
    pub fn conjugated(&self, m: &Mat2<S>) -> Self {
        let mi = m.adjugate();
        self.with_coeffs(self.coeffs.iter().map(|c| mi * *c * *m).collect())
    }

    /// Largest coefficient distance to another potential.
    pub fn distance(&self, other: &Self) -> S {
        self.laurent().distance(&other.laurent())
    }
}

/// The connection form assembled from `(ω, ω_z, H, Q)` directly.
pub fn alpha_from_geometry<S: Real>(omega: S, omega_z: Cx<S>, h: S, q: Cx<S>) -> ConnectionPair<S> {
    let quarter = S::lit(0.25);
    let z = re(S::zero());
    let e = (omega / S::lit(2.0)).exp();
    let u = MatLaurent::new(
        -1,
        vec![
            Mat2::new(z, re(S::lit(2.0) * h * e), z, z).scale_re(quarter),
            Mat2::new(omega_z, z, -q * S::lit(4.0) / e, -omega_z).scale_re(quarter),
        ],
    );
    let v = MatLaurent::new(
        0,
        vec![
            Mat2::new(-omega_z.conj(), q.conj() * S::lit(4.0) / e, z, omega_z.conj()).scale_re(quarter),
            Mat2::new(z, z, re(-S::lit(2.0) * h * e), z).scale_re(quarter),
        ],
    );
    ConnectionPair { u, v }
}

/// Element of the KdV potential space: coefficients for the powers `1, 0, −1, …, −d`.
#[derive(Clone, Debug, PartialEq)]
pub struct KdvPotential<S: Real> {
    d: usize,
    coeffs: Vec<Mat2<S>>,
}

impl<S: Real> KdvPotential<S> {
    /// Assembles from `d + 2` coefficients listed for the powers `−d..=1` in ascending order.
    pub fn new(d: usize, coeffs: Vec<Mat2<S>>) -> Result<Self> {
        if coeffs.len() != d + 2 {
            return Err(Error::Invalid {
                op: "potential::KdvPotential::new",
                msg: format!("expected {} coefficients, got {}", d + 2, coeffs.len()),
            });
        }
        Ok(Self { d, coeffs })
    }

    pub fn from_laurent(d: usize, l: &MatLaurent<S>) -> Self {
        Self { d, coeffs: l.dense(-(d as i32), 1) }
    }

    /// Killing field of the helicoid `(sinh x cos y, sinh x sin y, y)` at the point `x`,
    /// with integration constant `c0`; `c0 = −¼` gives the degree-zero field.
    pub fn helicoid(x: S, c0: S) -> Self {
        let z = re(S::zero());
        let (ch, th) = (x.cosh(), x.tanh());
        let quarter = S::lit(0.25);
        let half = S::lit(0.5);
        let v0 = -half / ch + (quarter + c0) * ch;
        Self {
            d: 0,
            coeffs: vec![Mat2::new(re(half * th), re(v0), re(-half / ch), re(-half * th)), Mat2::new(z, re(quarter * ch), z, z)],
        }
    }

    pub fn degree(&self) -> usize {
        self.d
    }

    pub fn coeff(&self, k: i32) -> Mat2<S> {
        let i = k + self.d as i32;
        if i < 0 || k > 1 {
            Mat2::zero()
        } else {
            self.coeffs[i as usize]
        }
    }

    pub fn coeffs(&self) -> &[Mat2<S>] {
        &self.coeffs
    }

    pub fn laurent(&self) -> MatLaurent<S> {
        MatLaurent::new(-(self.d as i32), self.coeffs.clone())
    }

    pub fn v1(&self) -> S {
        self.coeff(1).b.re
    }

    pub fn validate(&self, tol: S) -> ValidationReport {
        let mut r = ValidationReport::default();
        let scale = self.coeffs.iter().fold(S::zero(), |m, c| m.max(c.max_abs())).max(S::min_positive_value());
        let f = |x: S| (x / scale).to_f64_lossy();
        for k in -(self.d as i32)..=1 {
            let t = self.coeff(k).trace().norm();
            r.push(format!("trace-free at k={k}"), t <= tol * scale, f(t));
        }
        let top = self.coeff(1);
        let shape = top.a.norm().max(top.c.norm()).max(top.d.norm()).max(top.b.im.abs());
        r.push("coeff(1) = [[0, v],[0, 0]] with v real", shape <= tol * scale, f(shape));
        r.push("v_1 > 0", top.b.re > S::zero(), top.b.re.min(S::zero()).abs().to_f64_lossy());
        let tr = (top * self.coeff(0)).trace().norm();
        let pair = top.max_abs() * self.coeff(0).max_abs();
        r.push("tr(coeff(1) coeff(0)) != 0", tr > tol * pair, f(tr / scale));
        r
    }

    /// `ω = 2 ln(4 v₁)`.
    pub fn conformal_factor(&self) -> S {
        S::lit(2.0) * (S::lit(4.0) * self.v1()).ln()
    }

    /// `Q = −w₀ e^{ω/2}` under the normalization `v₁ = ¼e^{ω/2}`.
    pub fn hopf(&self) -> Cx<S> {
        -self.coeff(0).c * (self.conformal_factor() / S::lit(2.0)).exp()
    }

    /// `U = [[½u₀, v₁λ],[w₀, −½u₀]]`, `V = −[[½ū₀, w̄₀],[0, −½ū₀]]`.
    pub fn alpha(&self) -> ConnectionPair<S> {
        let z = re(S::zero());
        let c0 = self.coeff(0);
        let u0 = c0.a * S::lit(0.5);
        let u = MatLaurent::new(0, vec![Mat2::new(u0, z, c0.c, -u0), self.coeff(1)]);
        let v = MatLaurent::new(0, vec![-Mat2::new(u0.conj(), c0.c.conj(), z, -u0.conj())]);
        ConnectionPair { u, v }
    }

    /// Rescales the spectral parameter, `ζ(λ) ↦ ζ(cλ)`.
    pub fn rescaled_lambda(&self, c: S) -> Self {
        let l = self.laurent().map(|k, m| m.scale_re(c.powi(k)));
        Self::from_laurent(self.d, &l)
    }

    pub fn with_coeffs(&self, coeffs: Vec<Mat2<S>>) -> Self {
        assert_eq!(coeffs.len(), self.d + 2);
        Self { d: self.d, coeffs }
    }

    pub fn distance(&self, other: &Self) -> S {
        self.laurent().distance(&other.laurent())
    }
}

/// Shared interface of the two potential families for the zero-curvature integrators.
pub trait KillingData<S: Real>: Clone + Send + Sync {
    fn connection(&self) -> ConnectionPair<S>;
    fn as_laurent(&self) -> MatLaurent<S>;
    /// Same family and shape with coefficients read from `l`.
    fn replaced(&self, l: &MatLaurent<S>) -> Self;
    /// Power range `(lo, hi)` of the stored coefficients.
    fn support(&self) -> (i32, i32);
    fn omega(&self) -> S;
}

impl<S: Real> KillingData<S> for CmcPotential<S> {
    fn connection(&self) -> ConnectionPair<S> {
        self.alpha()
    }
    fn as_laurent(&self) -> MatLaurent<S> {
        self.laurent()
    }
    fn replaced(&self, l: &MatLaurent<S>) -> Self {
        Self::from_laurent(self.g, self.h, l)
    }
    fn support(&self) -> (i32, i32) {
        (-1, self.g as i32)
    }
    fn omega(&self) -> S {
        self.conformal_factor()
    }
}

impl<S: Real> KillingData<S> for KdvPotential<S> {
    fn connection(&self) -> ConnectionPair<S> {
        self.alpha()
    }
    fn as_laurent(&self) -> MatLaurent<S> {
        self.laurent()
    }
    fn replaced(&self, l: &MatLaurent<S>) -> Self {
        Self::from_laurent(self.d, l)
    }
    fn support(&self) -> (i32, i32) {
        (-(self.d as i32), 1)
    }
    fn omega(&self) -> S {
        self.conformal_factor()
    }
}

/// Free-function form of [`CmcPotential::validate`].
pub fn validate_cmc<S: Real>(z: &CmcPotential<S>, tol: S) -> ValidationReport {
    z.validate(tol)
}

pub fn conformal_factor_cmc<S: Real>(z: &CmcPotential<S>) -> S {
    z.conformal_factor()
}

pub fn conformal_factor_kdv<S: Real>(z: &KdvPotential<S>) -> S {
    z.conformal_factor()
}

pub fn alpha_cmc<S: Real>(z: &CmcPotential<S>) -> ConnectionPair<S> {
    z.alpha()
}

pub fn alpha_kdv<S: Real>(z: &KdvPotential<S>) -> ConnectionPair<S> {
    z.alpha()
}

pub fn spectral_poly_cmc<S: Real>(z: &CmcPotential<S>) -> Result<ScalarLaurent<S>> {
    z.spectral_poly()
}

pub fn hopf_from_cmc<S: Real>(z: &CmcPotential<S>) -> Cx<S> {
    z.hopf()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::c64;

    fn m(a: Complex<f64>, b: Complex<f64>, c: Complex<f64>, d: Complex<f64>) -> Mat2<f64> {
        Mat2::new(a, b, c, d)
    }
    const Z: Complex<f64> = Complex { re: 0.0, im: 0.0 };

    #[test]
    fn reality_violation_is_named() {
        let p = CmcPotential::new(
            1,
            1.0,
            vec![
                m(Z, c64(1.0, 0.0), Z, Z),
                m(Z, Z, c64(-1.0, 0.0), Z),
                m(Z, Z, c64(-1.0, 0.0), Z),
            ],
        )
        .unwrap();
        let r = p.validate(1e-12);
        let names: Vec<_> = r.failures().iter().map(|c| c.name.clone()).collect();
        assert!(names.contains(&"reality at k=0".to_string()), "{names:?}");
    }

    #[test]
    fn vacuum_is_valid_and_flat_data() {
        let p = CmcPotential::vacuum(1.0f64, 0.5);
        assert!(p.validate(1e-12).all_pass());
        assert!(p.conformal_factor().abs() < 1e-15);
        assert!((p.hopf() - c64(0.5, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn negative_v_fails_positivity() {
        let p = CmcPotential::new(0, 1.0, vec![m(Z, c64(-0.5, 0.0), Z, Z), m(Z, Z, c64(0.5, 0.0), Z)]).unwrap();
        let r = p.validate(1e-12);
        assert!(r.failures().iter().any(|c| c.name == "v_{-1} > 0"));
    }

    #[test]
    fn conformal_factor_examples() {
        let p = CmcPotential::new(0, 1.0, vec![m(Z, c64(0.5, 0.0), Z, Z), m(Z, Z, c64(-0.5, 0.0), Z)]).unwrap();
        assert_eq!(p.conformal_factor(), 0.0);
        let e = std::f64::consts::E;
        let p = CmcPotential::new(0, 1.0, vec![m(Z, c64(e / 2.0, 0.0), Z, Z), m(Z, Z, c64(-e / 2.0, 0.0), Z)]).unwrap();
        assert!((p.conformal_factor() - 2.0).abs() < 1e-15);
        let k = KdvPotential::helicoid(1.0f64, -0.25);
        assert!((k.conformal_factor() - 2.0 * 1f64.cosh().ln()).abs() < 1e-15);
        assert!(KdvPotential::helicoid(0.0f64, -0.25).conformal_factor().abs() < 1e-15);
    }

    #[test]
    fn hopf_pure_phase() {
        let p = CmcPotential::new(0, 1.0, vec![m(Z, c64(0.5, 0.0), Z, Z), m(Z, Z, c64(0.0, -0.5), Z)]).unwrap();
        assert!((p.hopf() - c64(0.0, 0.5)).norm() < 1e-15);
    }

    #[test]
    fn alpha_vacuum_substitution() {
        let a = CmcPotential::vacuum(1.0, 0.5).alpha();
        assert_eq!(a.u.coeff(-1), m(Z, c64(0.5, 0.0), Z, Z));
        assert_eq!(a.u.coeff(0), m(Z, Z, c64(-0.5, 0.0), Z));
        assert_eq!(a.v.coeff(0), m(Z, c64(0.5, 0.0), Z, Z));
        assert_eq!(a.v.coeff(1), m(Z, Z, c64(-0.5, 0.0), Z));
    }

    #[test]
    fn alpha_kdv_helicoid_at_axis() {
        let a = KdvPotential::helicoid(0.0f64, -0.25).alpha();
        assert!((a.u.coeff(1) - m(Z, c64(0.25, 0.0), Z, Z)).norm() < 1e-15);
        assert!((a.u.coeff(0) - m(Z, Z, c64(-0.5, 0.0), Z)).norm() < 1e-15);
        assert!((a.v.coeff(0) - m(Z, c64(0.5, 0.0), Z, Z)).norm() < 1e-15);
        assert_eq!(a.v.hi(), 0);
        assert_eq!(a.v.lo(), 0);
    }

    #[test]
    fn kdv_helicoid_degree_zero_choice_is_isospectral() {
        let det_at = |x: f64, c0: f64| KdvPotential::helicoid(x, c0).laurent().det();
        let base = det_at(0.0, -0.25);
        for x in [-1.0, -0.3, 0.4, 1.2] {
            assert!(det_at(x, -0.25).distance(&base) < 1e-14);
        }
        // the constant -1 printed with v0 = -2 sech x moves the determinant
        let printed = |x: f64| {
            let mut k = KdvPotential::helicoid(x, -0.25);
            let mut c = k.coeffs().to_vec();
            c[0].b = c64(-2.0 / x.cosh(), 0.0);
            k = k.with_coeffs(c);
            k.laurent().det()
        };
        assert!(printed(0.0).distance(&printed(1.0)) > 1e-2);
    }
}
