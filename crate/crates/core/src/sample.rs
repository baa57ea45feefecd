//! Seeded random generators of valid potentials, used by the invariant checker and the tests.

use crate::error::{Error, Result};
use crate::potential::CmcPotential;
use crate::scalar::c64;
use crate::spectral::{potential_from_divisor, spectral_data};
use num_complex::Complex64;
use rand::Rng;

/// Random `u_0..u_{g−1}` with `u_{g−1−k} = −ū_k`.
pub fn real_u<R: Rng>(rng: &mut R, g: usize, scale: f64) -> Vec<Complex64> {
    let mut u = vec![c64(0.0, 0.0); g];
    for k in 0..g {
        let j = g - 1 - k;
        if k < j {
            u[k] = c64(rng.gen_range(-scale..scale), rng.gen_range(-scale..scale));
            u[j] = -u[k].conj();
        } else if k == j {
            u[k] = c64(0.0, rng.gen_range(-scale..scale));
        }
    }
    u
}

/// Random divisor abscissae with `(−1)^g Q̄ Π β_k > 0`.
pub fn phased_betas<R: Rng>(rng: &mut R, g: usize, q: Complex64) -> Vec<Complex64> {
    let mut b: Vec<Complex64> = (0..g)
        .map(|_| Complex64::from_polar(rng.gen_range(-1.2f64..1.2).exp(), rng.gen_range(-std::f64::consts::PI..std::f64::consts::PI)))
        .collect();
    if g > 0 {
        let sign = if g % 2 == 0 { 1.0 } else { -1.0 };
        let p = q.conj() * sign * b.iter().product::<Complex64>();
        b[g - 1] *= Complex64::from_polar(1.0, -p.arg());
    }
    b
}

/// A random valid genus-`g` potential whose spectral data is extractable (no root of `a` near
/// the unit circle, separated divisor).
pub fn random_potential<R: Rng>(rng: &mut R, g: usize) -> Result<CmcPotential<f64>> {
    for _ in 0..200 {
        let h = rng.gen_range(0.5..2.0);
        let q = Complex64::from_polar(rng.gen_range(0.2..1.0), rng.gen_range(-3.0..3.0));
        if g == 0 {
            return Ok(CmcPotential::vacuum(h, q.norm()));
        }
        let betas = phased_betas(rng, g, q);
        let u = real_u(rng, g, 0.4);
        let Ok(z) = potential_from_divisor(h, q, &betas, &u) else { continue };
        if let Ok(sd) = spectral_data(&z) {
            let margin = sd.branch.iter().map(|l| 1.0 - l.norm()).fold(f64::INFINITY, f64::min);
            if margin > 1e-3 {
                return Ok(z);
            }
        }
    }
    Err(Error::Convergence { op: "sample::random_potential", msg: format!("no admissible genus-{g} sample found") })
}
