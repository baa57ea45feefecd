//! Spectral data of CMC potentials: branch points, divisor, product and trace formulas,
//! the involutions of the spectral curve, the isospectral flows and the magic estimates.

use crate::error::{Error, Result};
use crate::loopalg::{roots, Mat2, MatLaurent, ScalarLaurent};
use crate::potential::CmcPotential;
use crate::scalar::{re, Cx, Real};
use num_complex::Complex;

/// Point `(λ, ν)` of the spectral curve `ν² = λ a(λ)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CurvePoint<S: Real> {
    pub lambda: Cx<S>,
    pub nu: Cx<S>,
}

/// Spectral curve data of a potential together with `(g, H, Q)`.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectralData<S: Real> {
    pub g: usize,
    pub h: S,
    pub q: Cx<S>,
    pub a: ScalarLaurent<S>,
    /// Roots of `a` inside the unit disk, sorted by modulus.
    pub branch: Vec<Cx<S>>,
    /// Divisor points sorted by `min(|β|, 1/|β|)`.
    pub divisor: Vec<CurvePoint<S>>,
}

impl<S: Real> SpectralData<S> {
    pub fn betas(&self) -> Vec<Cx<S>> {
        self.divisor.iter().map(|p| p.lambda).collect()
    }
}

fn one<S: Real>() -> Cx<S> {
    Complex::new(S::one(), S::zero())
}

/// Polynomial `Π(1 − λ/r_k)` in ascending coefficients.
fn unit_product<S: Real>(rs: &[Cx<S>], f: impl Fn(Cx<S>) -> Cx<S>) -> ScalarLaurent<S> {
    rs.iter().fold(ScalarLaurent::constant(one()), |p, r| &p * &ScalarLaurent::new(0, vec![one(), -f(*r)]))
}

/// `a(λ) = −½HQ·Π(1 − λ/λ_k)(1 − λ̄_kλ)`.
pub fn a_from_branch_points<S: Real>(h: S, q: Cx<S>, lambdas: &[Cx<S>]) -> ScalarLaurent<S> {
    let inner = unit_product(lambdas, |l| l.inv());
    let outer = unit_product(lambdas, |l| l.conj());
    (&inner * &outer).scale(q * (-h * S::lit(0.5)))
}

/// Sorts by `ρ(β) = min(|β|, 1/|β|)`, ties broken by modulus and then argument.
fn sort_by_rho<S: Real>(pts: &mut [CurvePoint<S>]) {
    let rho = |b: Cx<S>| b.norm().min(b.norm().recip());
    pts.sort_by(|x, y| {
        rho(x.lambda)
            .partial_cmp(&rho(y.lambda))
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(x.lambda.norm().partial_cmp(&y.lambda.norm()).unwrap_or(std::cmp::Ordering::Equal))
            .then(x.lambda.arg().partial_cmp(&y.lambda.arg()).unwrap_or(std::cmp::Ordering::Equal))
    });
}

const ROOT_TOL: f64 = 1e-12;
const UNIT_BAND: f64 = 1e-8;
const SEPARATION: f64 = 1e-10;

/// The `g` roots of `a` in the unit disk, modulus-sorted, after checking the unit-circle band
/// and the reality pairing `λ ↔ 1/λ̄`.
pub fn extract_branch_points<S: Real>(a: &ScalarLaurent<S>, h: S, q: Cx<S>) -> Result<Vec<Cx<S>>> {
    const OP: &str = "spectral::extract_branch_points";
    if a.is_zero() || a.lo() != 0 || a.hi() % 2 != 0 {
        return Err(Error::Degree { op: OP, msg: format!("expected a polynomial of even degree, got powers {}..{}", a.lo(), a.hi()) });
    }
    let g = (a.hi() / 2) as usize;
    let a0 = -q * h * S::lit(0.5);
    if (a.coeff(0) - a0).norm() > S::lit(1e-8) * a0.norm().max(S::min_positive_value()) {
        return Err(Error::Invalid { op: OP, msg: "a(0) differs from -HQ/2".into() });
    }
    let rs = roots(a, S::lit(ROOT_TOL))?;
    if let Some(r) = rs.iter().find(|r| (r.norm() - S::one()).abs() < S::lit(UNIT_BAND)) {
        return Err(Error::UnitCircleRoot { op: OP, msg: format!("root {r} has modulus {}", r.norm()) });
    }
    let inside: Vec<Cx<S>> = rs.iter().copied().filter(|r| r.norm() < S::one()).collect();
    let outside: Vec<Cx<S>> = rs.iter().copied().filter(|r| r.norm() > S::one()).collect();
    if inside.len() != g {
        return Err(Error::Pairing { op: OP, msg: format!("{} roots inside the disk, expected {g}", inside.len()) });
    }
    let mut used = vec![false; outside.len()];
    for l in &inside {
        let target = l.conj().inv();
        let best = outside
            .iter()
            .enumerate()
            .filter(|(i, _)| !used[*i])
            .min_by(|x, y| (x.1 - target).norm().partial_cmp(&(y.1 - target).norm()).unwrap_or(std::cmp::Ordering::Equal));
        match best {
            Some((i, o)) if (o - target).norm() <= S::lit(UNIT_BAND) * target.norm() => used[i] = true,
            _ => return Err(Error::Pairing { op: OP, msg: format!("no partner 1/conj(λ) for λ = {l}") }),
        }
    }
    Ok(inside)
}

fn check_separation<S: Real>(pts: &[Cx<S>], op: &'static str) -> Result<()> {
    for i in 0..pts.len() {
        for j in i + 1..pts.len() {
            let scale = S::one().max(pts[i].norm()).max(pts[j].norm());
            if (pts[i] - pts[j]).norm() <= S::lit(SEPARATION) * scale {
                return Err(Error::DegenerateDivisor { op, msg: format!("points {} and {} coincide", pts[i], pts[j]) });
            }
        }
    }
    Ok(())
}

/// `λv(λ)` as an ordinary polynomial: coefficient of `λ^{j+1}` is `v_j`.
fn lambda_v<S: Real>(z: &CmcPotential<S>) -> ScalarLaurent<S> {
    ScalarLaurent::new(0, (-1..z.genus() as i32).map(|k| z.v(k)).collect())
}

fn u_poly<S: Real>(z: &CmcPotential<S>) -> ScalarLaurent<S> {
    ScalarLaurent::new(0, (0..z.genus() as i32).map(|k| z.u(k)).collect())
}

/// Divisor points `β_k` (roots of `λv`) with `ν_k = −β_k u(β_k)`.
pub fn extract_divisor<S: Real>(z: &CmcPotential<S>) -> Result<Vec<CurvePoint<S>>> {
    const OP: &str = "spectral::extract_divisor";
    let g = z.genus();
    if g == 0 {
        return Ok(Vec::new());
    }
    let lv = lambda_v(z);
    let scale = lv.max_norm();
    if lv.coeff(g as i32).norm() <= S::lit(1e-13) * scale {
        return Err(Error::DegenerateDivisor { op: OP, msg: "a divisor point escaped to infinity".into() });
    }
    let betas = roots(&lv.truncated(0, g as i32), S::lit(ROOT_TOL))?;
    check_separation(&betas, OP)?;
    let u = u_poly(z);
    let mut pts: Vec<CurvePoint<S>> = betas
        .iter()
        .map(|b| CurvePoint { lambda: *b, nu: -*b * u.eval(*b).expect("polynomial evaluation") })
        .collect();
    sort_by_rho(&mut pts);
    Ok(pts)
}

/// Full spectral data of a potential.
pub fn spectral_data<S: Real>(z: &CmcPotential<S>) -> Result<SpectralData<S>> {
    let a = z.spectral_poly()?;
    let q = z.hopf();
    let branch = extract_branch_points(&a, z.mean_curvature(), q)?;
    let divisor = extract_divisor(z)?;
    Ok(SpectralData { g: z.genus(), h: z.mean_curvature(), q, a, branch, divisor })
}

fn check_phase<S: Real>(g: usize, q: Cx<S>, betas: &[Cx<S>], op: &'static str) -> Result<()> {
    let sign = if g % 2 == 0 { S::one() } else { -S::one() };
    let p = betas.iter().fold(q.conj() * sign, |acc, b| acc * *b);
    if !(p.re > S::zero() && p.im.abs() <= S::lit(1e-8) * p.norm()) {
        return Err(Error::Phase { op, msg: format!("(-1)^g conj(Q) prod(beta) = {p} is not a positive real") });
    }
    Ok(())
}

/// Assembles the potential from `H`, `Q`, the divisor abscissae `β_k` and the full polynomial
/// `u(λ)` of degree below `g`.
fn assemble<S: Real>(h: S, q: Cx<S>, betas: &[Cx<S>], u: &ScalarLaurent<S>) -> Result<CmcPotential<S>> {
    let g = betas.len();
    let two = S::lit(2.0);
    let e_omega = two * q.norm() / h * betas.iter().fold(S::one(), |p, b| p * b.norm());
    let e_half = e_omega.sqrt();
    let lv = unit_product(betas, |b| b.inv()).scale(re(h * e_half / two));
    let w = unit_product(betas, |b| b.conj()).scale(-q / e_half);
    let z = re(S::zero());
    let coeffs = (-1..=g as i32)
        .map(|k| {
            let uk = if k >= 0 { u.coeff(k) } else { z };
            let vk = if k < g as i32 { lv.coeff(k + 1) } else { z };
            let wk = if k >= 0 { w.coeff(k) } else { z };
            Mat2::new(uk, vk, wk, -uk)
        })
        .collect();
    let mut p = CmcPotential::new(g, h, coeffs)?;
    // v_{-1} is real by construction; remove rounding residue in its imaginary part.
    let mut c = p.coeffs().to_vec();
    c[0].b = re(c[0].b.re);
    p = p.with_coeffs(c);
    Ok(p)
}

/// Potential with prescribed divisor abscissae `β_k` and diagonal polynomial `u(λ)`
/// (coefficients `u_0..u_{g−1}`, which must satisfy `u_{g−1−k} = −ū_k`).
pub fn potential_from_divisor<S: Real>(h: S, q: Cx<S>, betas: &[Cx<S>], u: &[Cx<S>]) -> Result<CmcPotential<S>> {
    const OP: &str = "spectral::potential_from_divisor";
    let g = betas.len();
    if u.len() != g {
        return Err(Error::Invalid { op: OP, msg: format!("u needs {g} coefficients") });
    }
    for k in 0..g {
        if (u[k] + u[g - 1 - k].conj()).norm() > S::lit(1e-12) * (S::one() + u[k].norm()) {
            return Err(Error::Invalid { op: OP, msg: format!("u violates reality at k={k}") });
        }
    }
    check_separation(betas, OP)?;
    check_phase(g, q, betas, OP)?;
    assemble(h, q, betas, &ScalarLaurent::new(0, u.to_vec()))
}

/// Potential from spectral data by the trace formulas.
pub fn reconstruct_potential<S: Real>(sd: &SpectralData<S>) -> Result<CmcPotential<S>> {
    const OP: &str = "spectral::reconstruct_potential";
    let betas = sd.betas();
    if betas.len() != sd.g {
        return Err(Error::Invalid { op: OP, msg: format!("divisor has {} points, genus {}", betas.len(), sd.g) });
    }
    check_separation(&betas, OP)?;
    check_phase(sd.g, sd.q, &betas, OP)?;
    let mut u = ScalarLaurent::zero();
    for (k, p) in sd.divisor.iter().enumerate() {
        let mut chi = ScalarLaurent::constant(one());
        for (j, b) in betas.iter().enumerate() {
            if j != k {
                chi = &chi * &ScalarLaurent::new(0, vec![-*b, one()]).scale((p.lambda - *b).inv());
            }
        }
        u = u - chi.scale(p.nu / p.lambda);
    }
    let z = assemble(sd.h, sd.q, &betas, &u)?;
    let report = z.validate(S::lit(1e-8));
    if !report.all_pass() {
        let names: Vec<String> = report.failures().iter().map(|c| c.name.clone()).collect();
        return Err(Error::InconsistentDivisor { op: OP, msg: format!("reconstruction violates {}", names.join(", ")) });
    }
    Ok(z)
}

/// `ω_z(z₀)² = 8HQ Σ(λ_k⁻¹ − β_k⁻¹ + λ̄_k − β̄_k)`.
pub fn omega_z_squared<S: Real>(sd: &SpectralData<S>) -> Cx<S> {
    let sum = sd
        .branch
        .iter()
        .zip(sd.divisor.iter())
        .fold(re(S::zero()), |acc, (l, p)| acc + l.inv() - p.lambda.inv() + l.conj() - p.lambda.conj());
    sd.q * sd.h * S::lit(8.0) * sum
}

/// Sheet exchange `(λ, ν) ↦ (λ, −ν)`.
pub fn involution_sigma<S: Real>(p: CurvePoint<S>) -> CurvePoint<S> {
    CurvePoint { lambda: p.lambda, nu: -p.nu }
}

/// Real structure `(λ, ν) ↦ (1/λ̄, λ̄^{−(g+1)} ν̄)`.
pub fn involution_rho<S: Real>(p: CurvePoint<S>, g: usize) -> Result<CurvePoint<S>> {
    if p.lambda.norm() == S::zero() {
        return Err(Error::Domain { op: "spectral::involution_rho", msg: "λ = 0 has no image".into() });
    }
    let lb = p.lambda.conj();
    Ok(CurvePoint { lambda: lb.inv(), nu: lb.powi(-(g as i32 + 1)) * p.nu.conj() })
}

/// Splits `X = X_𝔲 + X_+` with `X_𝔲(λ) = −X_𝔲(1/λ̄)†` and `X_+` holomorphic at 0 with
/// upper-triangular, real-diagonal constant term.
pub fn split_iwasawa_lie<S: Real>(x: &MatLaurent<S>) -> (MatLaurent<S>, MatLaurent<S>) {
    let neg = x.truncated(x.lo().min(-1), -1);
    let reflected = if neg.is_zero() {
        MatLaurent::zero()
    } else {
        MatLaurent::new(1, (1..=-neg.lo()).map(|k| neg.coeff(-k).adjoint()).collect())
    };
    let x0 = x.coeff(0);
    let m = Mat2::new(
        Complex::new(S::zero(), x0.a.im),
        -x0.c.conj(),
        x0.c,
        Complex::new(S::zero(), -x0.a.im),
    );
    let unitary = neg - reflected + MatLaurent::constant(m);
    let plus = x.clone() - unitary.clone();
    (unitary, plus)
}

/// Flow generator `[(c·λⁿζ)_+, ζ]` restricted to the potential's support.
pub fn isospectral_field<S: Real>(z: &CmcPotential<S>, power: i32, phase: Cx<S>) -> Vec<Mat2<S>> {
    let l = z.laurent();
    let x = l.shift(power).scale(phase);
    let (_, plus) = split_iwasawa_lie(&x);
    plus.bracket(&l).dense(-1, z.genus() as i32)
}

/// One RK4 step of the isospectral flow with generator `c·λⁿζ`.
pub fn isospectral_step_with<S: Real>(z: &CmcPotential<S>, power: i32, phase: Cx<S>, dt: S) -> CmcPotential<S> {
    let add = |base: &CmcPotential<S>, k: &[Mat2<S>], f: S| {
        base.with_coeffs(base.coeffs().iter().zip(k).map(|(a, b)| *a + b.scale_re(f)).collect())
    };
    let half = dt * S::lit(0.5);
    let k1 = isospectral_field(z, power, phase);
    let k2 = isospectral_field(&add(z, &k1, half), power, phase);
    let k3 = isospectral_field(&add(z, &k2, half), power, phase);
    let k4 = isospectral_field(&add(z, &k3, dt), power, phase);
    let sixth = dt / S::lit(6.0);
    let two = S::lit(2.0);
    z.with_coeffs(
        z.coeffs()
            .iter()
            .enumerate()
            .map(|(i, c)| *c + (k1[i] + k2[i].scale_re(two) + k3[i].scale_re(two) + k4[i]).scale_re(sixth))
            .collect(),
    )
}

/// One RK4 step of `∂ζ/∂t_n = [(ζλⁿ)_+, ζ]`; `n = 0` is the x-translation of the base point.
pub fn isospectral_step<S: Real>(z: &CmcPotential<S>, n: i32, dt: S) -> CmcPotential<S> {
    isospectral_step_with(z, n, one(), dt)
}

/// Both chains of the magic estimates evaluated at one potential.
#[derive(Clone, Debug, PartialEq)]
pub struct MagicReport {
    /// `(|λ_k|, |β_k|, 1/|λ_k|)` in the orderings of the branch points and the divisor.
    pub chain1: Vec<(f64, f64, f64)>,
    /// `((2|Q|/H)Π|λ_k|, e^ω, (2|Q|/H)Π|λ_k|⁻¹)`.
    pub chain2: (f64, f64, f64),
}

impl MagicReport {
    /// Smallest relative margin over all inequalities; negative when one fails.
    pub fn min_margin(&self) -> f64 {
        let mut m = f64::INFINITY;
        for (lo, mid, hi) in self.chain1.iter().copied().chain(std::iter::once(self.chain2)) {
            m = m.min((mid - lo) / mid).min((hi - mid) / mid);
        }
        m
    }

    pub fn holds(&self, tol: f64) -> bool {
        self.min_margin() >= -tol
    }
}

pub fn magic_bounds_check<S: Real>(z: &CmcPotential<S>) -> Result<MagicReport> {
    let sd = spectral_data(z)?;
    let chain1 = sd
        .branch
        .iter()
        .zip(&sd.divisor)
        .map(|(l, p)| (l.norm().to_f64_lossy(), p.lambda.norm().to_f64_lossy(), l.norm().recip().to_f64_lossy()))
        .collect();
    let base = (S::lit(2.0) * sd.q.norm() / sd.h).to_f64_lossy();
    let prod: f64 = sd.branch.iter().map(|l| l.norm().to_f64_lossy()).product();
    let e_omega = z.conformal_factor().exp().to_f64_lossy();
    Ok(MagicReport { chain1, chain2: (base * prod, e_omega, base / prod) })
}
