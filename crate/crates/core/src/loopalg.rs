//! Complex 2×2 matrices, matrix- and scalar-valued Laurent polynomials in the spectral
//! parameter, the closed-form 𝔰𝔩(2) exponential, and polynomial root finding.

mod dense;
mod laurent;
mod mat2;
mod roots;

pub use dense::DenseMatrix;
pub use laurent::{Coef, Laurent, MatLaurent, ScalarLaurent};
pub use mat2::Mat2;
pub use roots::{hessenberg_eigenvalues, roots, sort_roots};

use crate::error::Result;
use crate::scalar::{Cx, Real};
use num_complex::Complex;

/// Evaluates a matrix Laurent polynomial.
pub fn eval<S: Real>(l: &MatLaurent<S>, lambda: Cx<S>) -> Result<Mat2<S>> {
    l.eval(lambda)
}

/// Determinant of a matrix Laurent polynomial by exact convolution.
pub fn det_laurent<S: Real>(l: &MatLaurent<S>) -> ScalarLaurent<S> {
    l.det()
}

/// Exponential of a trace-free 2×2 matrix, `cosh μ·I + (sinh μ/μ)·A` with `μ² = −det A`.
///
/// Both factors are even in μ, so they are computed from μ² alone; for `|μ| < 1e−4` a
/// six-term Taylor series replaces the closed form.
pub fn expm_sl2<S: Real>(a: &Mat2<S>) -> Mat2<S> {
    let mu2 = -a.det();
    let (ch, sh) = if mu2.norm() < S::lit(1e-8) {
        let cosh_c = [1.0, 1.0 / 2.0, 1.0 / 24.0, 1.0 / 720.0, 1.0 / 40320.0, 1.0 / 3628800.0];
        let sinh_c = [1.0, 1.0 / 6.0, 1.0 / 120.0, 1.0 / 5040.0, 1.0 / 362880.0, 1.0 / 39916800.0];
        let series = |coef: &[f64; 6]| {
            coef.iter().rev().fold(Complex::new(S::zero(), S::zero()), |acc, c| acc * mu2 + Complex::new(S::lit(*c), S::zero()))
        };
        (series(&cosh_c), series(&sinh_c))
    } else {
        let mu = mu2.sqrt();
        (mu.cosh(), mu.sinh() / mu)
    };
    Mat2::identity().scale(ch) + a.scale(sh)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{c64, cx};

    fn m(a: (f64, f64), b: (f64, f64), c: (f64, f64), d: (f64, f64)) -> Mat2<f64> {
        Mat2::new(c64(a.0, a.1), c64(b.0, b.1), c64(c.0, c.1), c64(d.0, d.1))
    }

    #[test]
    fn eval_constant_and_zero() {
        let a = m((1.0, 2.0), (0.0, 1.0), (3.0, 0.0), (-1.0, -2.0));
        let l = MatLaurent::constant(a);
        assert_eq!(eval(&l, c64(0.3, -2.0)).unwrap(), a);
        let z: MatLaurent<f64> = MatLaurent::zero();
        assert_eq!(eval(&z, c64(3.0, 1.0)).unwrap(), Mat2::zero());
    }

    #[test]
    fn eval_at_zero_with_negative_power_is_domain_error() {
        let l = MatLaurent::monomial(-1, m((0.0, 0.0), (1.0, 0.0), (0.0, 0.0), (0.0, 0.0)));
        assert!(eval(&l, c64(0.0, 0.0)).is_err());
    }

    #[test]
    fn eval_printed_helicoid_coefficients_at_one() {
        // Coefficients exactly as printed in the helicoid example at x = 0.
        let l = MatLaurent::new(
            0,
            vec![m((0.0, 0.0), (-2.0, 0.0), (-0.5, 0.0), (0.0, 0.0)), m((0.0, 0.0), (0.25, 0.0), (0.0, 0.0), (0.0, 0.0))],
        );
        let v = eval(&l, c64(1.0, 0.0)).unwrap();
        assert!((v - m((0.0, 0.0), (-1.75, 0.0), (-0.5, 0.0), (0.0, 0.0))).norm() < 1e-15);
    }

    #[test]
    fn det_identity_is_one() {
        let d = det_laurent(&MatLaurent::<f64>::constant(Mat2::identity()));
        assert_eq!(d.lo(), 0);
        assert_eq!(d.hi(), 0);
        assert!((d.coeff(0) - c64(1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn det_hand_convolution() {
        let (u, v, w) = (c64(0.3, 0.2), c64(1.5, 0.0), c64(-0.7, 0.4));
        let z = c64(0.0, 0.0);
        let l = MatLaurent::new(-1, vec![Mat2::new(z, v, z, z), Mat2::new(u, z, w, -u)]);
        let d = det_laurent(&l);
        assert!((d.coeff(-1) - (-v * w)).norm() < 1e-15);
        assert!((d.coeff(0) - (-u * u)).norm() < 1e-15);
    }

    #[test]
    fn roots_examples() {
        let p: ScalarLaurent<f64> = ScalarLaurent::new(0, vec![c64(-1.0, 0.0), c64(0.0, 0.0), c64(1.0, 0.0)]);
        let r = roots(&p, 1e-12).unwrap();
        assert!((r[0] - c64(1.0, 0.0)).norm() < 1e-12 || (r[0] - c64(-1.0, 0.0)).norm() < 1e-12);
        assert_eq!(r.len(), 2);
        // modulus ties are broken by argument: +1 (arg 0) before -1 (arg π)
        assert!((r[0] - c64(1.0, 0.0)).norm() < 1e-12);
        assert!((r[1] - c64(-1.0, 0.0)).norm() < 1e-12);

        let q = &ScalarLaurent::new(0, vec![c64(1.0, 0.0), c64(-4.0, 0.0)])
            * &ScalarLaurent::new(0, vec![c64(1.0, 0.0), c64(-0.25, 0.0)]);
        let r = roots(&q, 1e-12).unwrap();
        assert!((r[0] - c64(0.25, 0.0)).norm() < 1e-12);
        assert!((r[1] - c64(4.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn expm_examples() {
        assert!((expm_sl2(&Mat2::<f64>::zero()) - Mat2::identity()).norm() < 1e-15);
        let a = 0.7;
        let e = expm_sl2(&m((a, 0.0), (0.0, 0.0), (0.0, 0.0), (-a, 0.0)));
        assert!((e - m((a.exp(), 0.0), (0.0, 0.0), (0.0, 0.0), ((-a).exp(), 0.0))).norm() < 1e-14);
        let b = c64(2.5, -1.0);
        let n = Mat2::new(c64(0.0, 0.0), b, c64(0.0, 0.0), c64(0.0, 0.0));
        assert!((expm_sl2(&n) - Mat2::new(c64(1.0, 0.0), b, c64(0.0, 0.0), c64(1.0, 0.0))).norm() < 1e-15);
    }

    #[test]
    fn expm_small_mu_branch_is_continuous() {
        let x = m((3e-5, 1e-5), (2e-5, 0.0), (1e-5, -1e-5), (-3e-5, -1e-5));
        let y = x.scale_re(10.0);
        // compare series branch (x) against closed form on y scaled back through exp(y) = exp(x)^10
        let mut p = Mat2::identity();
        for _ in 0..10 {
            p = p * expm_sl2(&x);
        }
        assert!((p - expm_sl2(&y)).norm() < 1e-14);
    }

    #[test]
    fn works_in_single_precision() {
        let a: Mat2<f32> = Mat2::new(cx(0.5, 0.0), cx(1.0, 0.0), cx(-0.25, 0.0), cx(-0.5, 0.0));
        let p = expm_sl2(&a) * expm_sl2(&(-a));
        assert!((p - Mat2::identity()).norm() < 1e-5);
        let q: ScalarLaurent<f32> = ScalarLaurent::from_roots(cx(1.0, 0.0), &[cx(0.5, 0.0), cx(-2.0, 0.0)]);
        let r = roots(&q, 1e-5).unwrap();
        assert!((r[0] - cx::<f32>(0.5, 0.0)).norm() < 1e-4);
    }
}
