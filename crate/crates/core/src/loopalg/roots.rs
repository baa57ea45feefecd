use super::laurent::ScalarLaurent;
use crate::error::{Error, Result};
use crate::scalar::{Cx, Real};
use num_complex::Complex;

const OP: &str = "loopalg::roots";

/// All roots of the polynomial `λ^{−lo}·p(λ)` with multiplicity, sorted by modulus then argument.
///
/// Each returned root `r` satisfies `|p(r)| ≤ tol·Σ|c_j||r|^j`, the backward-error form of the
/// residual bound.
pub fn roots<S: Real>(p: &ScalarLaurent<S>, tol: S) -> Result<Vec<Cx<S>>> {
    if p.is_zero() {
        return Err(Error::Domain { op: OP, msg: "zero polynomial has no finite root set".into() });
    }
    let c: Vec<Cx<S>> = p.coeffs().to_vec();
    let n = c.len() - 1;
    if n == 0 {
        return Ok(Vec::new());
    }
    if n == 1 {
        return Ok(vec![-c[0] / c[1]]);
    }
    let budget = 2000;
    let mut found = durand_kerner(&c, budget).map(|r| polish(&c, r));
    if found.as_ref().map_or(true, |r| !accepted(&c, r, tol)) {
        found = companion_roots(&c).map(|r| polish(&c, r));
    }
    match found {
        Some(mut r) if accepted(&c, &r, tol) => {
            sort_roots(&mut r);
            Ok(r)
        }
        _ => Err(Error::Convergence {
            op: OP,
            msg: format!("no root set within tolerance for degree {n}"),
        }),
    }
}

/// Sorts by modulus, ties broken by argument.
pub fn sort_roots<S: Real>(r: &mut [Cx<S>]) {
    r.sort_by(|x, y| {
        x.norm()
            .partial_cmp(&y.norm())
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(x.arg().partial_cmp(&y.arg()).unwrap_or(std::cmp::Ordering::Equal))
    });
}

fn horner<S: Real>(c: &[Cx<S>], z: Cx<S>) -> (Cx<S>, Cx<S>, S) {
    let mut p = Complex::new(S::zero(), S::zero());
    let mut dp = p;
    let mut scale = S::zero();
    let az = z.norm();
    for ck in c.iter().rev() {
        dp = dp * z + p;
        p = p * z + *ck;
        scale = scale * az + ck.norm();
    }
    (p, dp, scale)
}

fn accepted<S: Real>(c: &[Cx<S>], r: &[Cx<S>], tol: S) -> bool {
    r.len() == c.len() - 1
        && r.iter().all(|z| {
            let (p, _, scale) = horner(c, *z);
            crate::scalar::finite(*z) && p.norm() <= tol * scale
        })
}

fn durand_kerner<S: Real>(c: &[Cx<S>], budget: usize) -> Option<Vec<Cx<S>>> {
    let n = c.len() - 1;
    let lead = c[n];
    let monic: Vec<Cx<S>> = c.iter().map(|x| *x / lead).collect();
    let mut radius = S::zero();
    for (j, cj) in monic.iter().enumerate().take(n) {
        radius = radius.max(cj.norm().powf(S::one() / S::from_usize(n - j).unwrap()));
    }
    if radius == S::zero() {
        radius = S::one();
    }
    let seed = Complex::new(S::lit(0.4), S::lit(0.9));
    let mut z: Vec<Cx<S>> = (0..n)
        .map(|k| seed.powi(k as i32) / seed.norm().powi(k as i32) * radius)
        .collect();
    let eps = S::epsilon() * S::lit(8.0);
    for _ in 0..budget {
        let mut delta = S::zero();
        for i in 0..n {
            let (p, _, _) = horner(&monic, z[i]);
            let mut den = Complex::new(S::one(), S::zero());
            for j in 0..n {
                if i != j {
                    den = den * (z[i] - z[j]);
                }
            }
            if den.norm() == S::zero() {
                den = Complex::new(eps, S::zero());
            }
            let step = p / den;
            z[i] = z[i] - step;
            delta = delta.max(step.norm() / (S::one() + z[i].norm()));
        }
        if !z.iter().all(|x| crate::scalar::finite(*x)) {
            return None;
        }
        if delta <= eps {
            return Some(z);
        }
    }
    None
}

/// Newton refinement on the original coefficients, keeping each update only if it lowers the residual.
fn polish<S: Real>(c: &[Cx<S>], mut r: Vec<Cx<S>>) -> Vec<Cx<S>> {
    for z in r.iter_mut() {
        for _ in 0..6 {
            let (p, dp, _) = horner(c, *z);
            if dp.norm() == S::zero() || p.norm() == S::zero() {
                break;
            }
            let cand = *z - p / dp;
            let (pc, _, _) = horner(c, cand);
            if crate::scalar::finite(cand) && pc.norm() < p.norm() {
                *z = cand;
            } else {
                break;
            }
        }
    }
    r
}

/// Eigenvalues of the companion matrix by shifted QR on its Hessenberg form.
fn companion_roots<S: Real>(c: &[Cx<S>]) -> Option<Vec<Cx<S>>> {
    let n = c.len() - 1;
    let zero = Complex::new(S::zero(), S::zero());
    let one = Complex::new(S::one(), S::zero());
    let mut h = vec![vec![zero; n]; n];
    for j in 0..n {
        h[0][j] = -c[n - 1 - j] / c[n];
    }
    for i in 1..n {
        h[i][i - 1] = one;
    }
    hessenberg_eigenvalues(h)
}

/// Eigenvalues of a complex upper Hessenberg matrix by single-shift QR with deflation.
pub fn hessenberg_eigenvalues<S: Real>(mut h: Vec<Vec<Cx<S>>>) -> Option<Vec<Cx<S>>> {
    let size = h.len();
    let eps = S::epsilon();
    let mut eig = Vec::with_capacity(size);
    let mut n = size;
    let mut iter = 0usize;
    while n > 0 {
        let mut l = n - 1;
        while l > 0 && h[l][l - 1].norm() > eps * (h[l][l].norm() + h[l - 1][l - 1].norm()) {
            l -= 1;
        }
        if l == n - 1 {
            eig.push(h[n - 1][n - 1]);
            n -= 1;
            iter = 0;
            continue;
        }
        iter += 1;
        if iter > 60 * size {
            return None;
        }
        let (a, b, cc, d) = (h[n - 2][n - 2], h[n - 2][n - 1], h[n - 1][n - 2], h[n - 1][n - 1]);
        let half = S::lit(0.5);
        let tr = (a + d) * half;
        let disc = (tr * tr - (a * d - b * cc)).sqrt();
        let mu1 = tr + disc;
        let mu2 = tr - disc;
        let mut mu = if (mu1 - d).norm() < (mu2 - d).norm() { mu1 } else { mu2 };
        if iter % 11 == 10 {
            mu = d + Complex::new(h[n - 1][n - 2].norm(), S::zero());
        }
        for k in l..n {
            h[k][k] = h[k][k] - mu;
        }
        let mut rots = Vec::with_capacity(n - l);
        for k in l..n - 1 {
            let x = h[k][k];
            let y = h[k + 1][k];
            let r = (x.norm_sqr() + y.norm_sqr()).sqrt();
            let (cs, sn) = if r == S::zero() {
                (Complex::new(S::one(), S::zero()), Complex::new(S::zero(), S::zero()))
            } else {
                (x / r, y / r)
            };
            for j in k..n {
                let u = h[k][j];
                let v = h[k + 1][j];
                h[k][j] = cs.conj() * u + sn.conj() * v;
                h[k + 1][j] = -sn * u + cs * v;
            }
            rots.push((k, cs, sn));
        }
        for (k, cs, sn) in rots {
            let top = (k + 2).min(n);
            for row in h.iter_mut().take(top).skip(l) {
                let u = row[k];
                let v = row[k + 1];
                row[k] = u * cs + v * sn;
                row[k + 1] = -u * sn.conj() + v * cs.conj();
            }
        }
        for k in l..n {
            h[k][k] = h[k][k] + mu;
        }
    }
    Some(eig)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::c64;

    #[test]
    fn companion_path_matches_durand_kerner() {
        let p: ScalarLaurent<f64> =
            ScalarLaurent::from_roots(c64(2.0, 1.0), &[c64(0.3, 0.1), c64(-1.2, 0.5), c64(2.0, -2.0), c64(0.0, 0.7)]);
        let mut a = companion_roots(p.coeffs()).unwrap();
        let mut b = durand_kerner(p.coeffs(), 2000).unwrap();
        sort_roots(&mut a);
        sort_roots(&mut b);
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).norm() < 1e-10, "{x} vs {y}");
        }
    }

    #[test]
    fn zero_polynomial_is_a_domain_error() {
        assert!(roots::<f64>(&ScalarLaurent::zero(), 1e-12).is_err());
    }
}
