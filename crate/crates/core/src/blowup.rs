//! Blowup of CMC potentials whose smallest branch point tends to zero.
//!
//! A sequence `ζ_n` is rescaled by `λ = ℓ_n λ̃`, `z = z_{n,0} + r_n z̃`, `f̃_n = h_n⁻¹(f_n − f_n(z_{n,0}))`
//! and `ζ̃_n(λ̃) = s_n ζ_n(ℓ_n λ̃)`. In `λ^KdV = 1/λ̃` the limit is a KdV potential whose
//! surface at `λ^KdV = 0` is minimal.

use crate::error::{Error, Result};
use crate::loopalg::{Mat2, MatLaurent, ScalarLaurent};
use crate::potential::{CmcPotential, ConnectionPair, KdvPotential, ValidationReport};
use crate::scalar::{re, Cx, Real};
use crate::spectral::{potential_from_divisor, spectral_data, SpectralData};
use crate::surface::{cmc_surface, minimal_surface, rigid_align_points, ImmersionPatch, R3};
use crate::zeroflow::{FlowOptions, ZGrid};
use rayon::prelude::*;
use serde_json::json;
use std::io::Write;
use std::path::Path;
use std::sync::Arc;

/// Scale factors for one member of the sequence.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BlowupFactors<S: Real> {
    /// Spectral scale `ℓ`.
    pub ell: S,
    /// Coordinate scale `r`.
    pub r: S,
    /// Potential scale `s`.
    pub s: S,
    /// Immersion scale `h`.
    pub h: S,
}

impl<S: Real> BlowupFactors<S> {
    /// `r = s = √ℓ`, `h = ℓ`.
    pub fn from_ell(ell: S) -> Self {
        let root = ell.sqrt();
        Self { ell, r: root, s: root, h: ell }
    }
}

/// `ζ̃(λ̃) = s·ζ(ℓλ̃)`, i.e. `coeff(k) ↦ s·ℓᵏ·coeff(k)`.
pub fn rescale_potential<S: Real>(zeta: &CmcPotential<S>, ell: S, s: S) -> MatLaurent<S> {
    zeta.laurent().map(|k, m| m.scale_re(s * ell.powi(k)))
}

/// Factors from the modulus-smallest branch point.
pub fn choose_factors<S: Real>(sd: &SpectralData<S>) -> Result<BlowupFactors<S>> {
    let ell = sd
        .branch
        .iter()
        .map(|l| l.norm())
        .fold(None, |m: Option<S>, x| Some(m.map_or(x, |m| m.min(x))))
        .ok_or_else(|| Error::Invalid { op: "blowup::choose_factors", msg: "no branch points inside the disk".into() })?;
    Ok(BlowupFactors::from_ell(ell))
}

/// Reflects a Laurent polynomial in `λ̃` to one in `λ^KdV = 1/λ̃`.
pub fn invert_parameter<S: Real>(l: &MatLaurent<S>) -> MatLaurent<S> {
    if l.is_zero() {
        return MatLaurent::zero();
    }
    let mut c = l.coeffs().to_vec();
    c.reverse();
    MatLaurent::new(-l.hi(), c)
}

/// Default magnitude below which a coefficient counts as vanished.
pub const RESIDUE_THRESHOLD: f64 = 1e-8;

fn residue_check<S: Real>(zt: &MatLaurent<S>, threshold: S) -> Result<()> {
    const OP: &str = "blowup::kdv_limit";
    for k in zt.lo()..-1 {
        let m = zt.coeff(k).max_abs();
        if m > threshold {
            return Err(Error::Residue { op: OP, msg: format!("power {k} has magnitude {m}") });
        }
    }
    let top = zt.coeff(-1);
    let off = top.a.norm().max(top.c.norm()).max(top.d.norm());
    if off > threshold {
        return Err(Error::Residue { op: OP, msg: format!("λ̃⁻¹ term is not upper-triangular nilpotent ({off})") });
    }
    Ok(())
}

/// The KdV potential `ζ^KdV(λ^KdV) = ζ̃(1/λ^KdV)`, keeping every `λ̃` power up to the highest
/// one above [`RESIDUE_THRESHOLD`].
pub fn kdv_limit<S: Real>(zt: &MatLaurent<S>) -> Result<KdvPotential<S>> {
    let threshold = S::lit(RESIDUE_THRESHOLD);
    residue_check(zt, threshold)?;
    let mut d = 0;
    for k in 0..=zt.hi().max(0) {
        if zt.coeff(k).max_abs() > threshold {
            d = k as usize;
        }
    }
    Ok(kdv_limit_truncated(zt, d)?.0)
}

/// Like [`kdv_limit`] with the KdV degree fixed to `d`; also returns the magnitude of the
/// discarded `λ̃` powers above `d`.
pub fn kdv_limit_truncated<S: Real>(zt: &MatLaurent<S>, d: usize) -> Result<(KdvPotential<S>, S)> {
    residue_check(zt, S::lit(RESIDUE_THRESHOLD))?;
    let tail = (d as i32 + 1..=zt.hi()).fold(S::zero(), |m, k| m.max(zt.coeff(k).max_abs()));
    let kept = zt.truncated(-1, d as i32);
    Ok((KdvPotential::from_laurent(d, &invert_parameter(&kept)), tail))
}

/// The rescaled connection `α_{ℓλ̃}(ζ) = Ũ dz̃ + Ṽ dz̃̄` written in `λ^KdV`.
pub fn rescaled_connection<S: Real>(zeta: &CmcPotential<S>, f: &BlowupFactors<S>) -> ConnectionPair<S> {
    let a = zeta.alpha();
    let scale = |l: &MatLaurent<S>| invert_parameter(&l.map(|k, m| m.scale_re(f.r * f.ell.powi(k))));
    ConnectionPair { u: scale(&a.u), v: scale(&a.v) }
}

/// Rescaled spectral polynomial `ã(λ̃) = a(ℓλ̃)`.
pub fn rescaled_spectral_poly<S: Real>(a: &ScalarLaurent<S>, ell: S) -> ScalarLaurent<S> {
    a.map(|k, c| c * ell.powi(k))
}

/// `ã_∞(λ̃) = −½HQ·Π(1 − λ̃/λ̃_k)` over the finite rescaled branch points.
pub fn limit_spectral_poly<S: Real>(h: S, q: Cx<S>, finite: &[Cx<S>]) -> ScalarLaurent<S> {
    let one = re(S::one());
    finite
        .iter()
        .fold(ScalarLaurent::constant(q * (-h * S::lit(0.5))), |p, l| &p * &ScalarLaurent::new(0, vec![one, -l.inv()]))
}

type Generator<S> = dyn Fn(usize) -> Result<(CmcPotential<S>, Cx<S>)> + Send + Sync;

/// A sequence of CMC potentials `ζ_n` with base points `z_{n,0}`, indexed from `n = 1`.
#[derive(Clone)]
pub struct BlowupSequenceSpec<S: Real> {
    pub n_max: usize,
    pub description: String,
    /// Unimodular Sym point `λ_s = e^{iφ}` for the CMC immersions.
    pub sym_point: Cx<S>,
    generator: Arc<Generator<S>>,
}

impl<S: Real> std::fmt::Debug for BlowupSequenceSpec<S> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("BlowupSequenceSpec")
            .field("n_max", &self.n_max)
            .field("description", &self.description)
            .field("sym_point", &self.sym_point)
            .finish()
    }
}

impl<S: Real> BlowupSequenceSpec<S> {
    pub fn new(
        n_max: usize,
        description: impl Into<String>,
        sym_point: Cx<S>,
        generator: impl Fn(usize) -> Result<(CmcPotential<S>, Cx<S>)> + Send + Sync + 'static,
    ) -> Self {
        Self { n_max, description: description.into(), sym_point, generator: Arc::new(generator) }
    }

    /// The `n`-th potential, validated to `1e-9`.
    pub fn generate(&self, n: usize) -> Result<(CmcPotential<S>, Cx<S>)> {
        let (zeta, z0) = (self.generator)(n)?;
        let report = zeta.validate(S::lit(1e-9));
        if !report.all_pass() {
            let names: Vec<&str> = report.failures().iter().map(|c| c.name.as_str()).collect();
            return Err(Error::Invalid { op: "blowup::BlowupSequenceSpec::generate", msg: format!("member {n} fails {names:?}") });
        }
        Ok((zeta, z0))
    }

    /// Rotation angle `φ = arg λ_s` of the limiting minimal surface.
    pub fn phi(&self) -> S {
        self.sym_point.arg()
    }
}

/// Genus-one sequence `λ_{n,1} = β_{n,1} = −4⁻ⁿ` with `u ≡ 0`, `H = 1`, `Q = ½`.
pub fn genus_one_sequence<S: Real>(n_max: usize) -> BlowupSequenceSpec<S> {
    BlowupSequenceSpec::new(n_max, "genus 1, lambda_1 = beta_1 = -4^-n, H = 1, Q = 1/2", re(S::one()), |n| {
        let ell = S::lit(4.0).powi(-(n as i32));
        let zeta = potential_from_divisor(S::one(), re(S::lit(0.5)), &[re(-ell)], &[re(S::zero())])?;
        Ok((zeta, re(S::zero())))
    })
}

/// Genus-three sequence converging to the helicoid potential at `x0`.
///
/// `β_{n,1} = 4⁻ⁿcosh²x₀`, `β_{n,2} = i·2⁻ⁿ`, `β_{n,3} = 1/β̄_{n,2}` and
/// `u(λ) = ½tanh(x₀)·2ⁿ(1 − λ²)`, with `H = 1`, `Q = ½` and Sym point `−i`.
pub fn helicoid_scenario<S: Real>(x0: S, n_max: usize) -> BlowupSequenceSpec<S> {
    let description = format!("helicoid endgame at x0 = {x0}, genus 3, H = 1, Q = 1/2, sym point -i");
    BlowupSequenceSpec::new(n_max, description, Cx::new(S::zero(), -S::one()), move |n| {
        let ell = S::lit(4.0).powi(-(n as i32));
        let r = ell.sqrt();
        let b = x0.cosh().powi(2);
        let u0 = re(S::lit(0.5) * x0.tanh() / r);
        let betas = [re(ell * b), Cx::new(S::zero(), r), Cx::new(S::zero(), r.recip())];
        let zeta = potential_from_divisor(S::one(), re(S::lit(0.5)), &betas, &[u0, re(S::zero()), -u0])?;
        Ok((zeta, re(S::zero())))
    })
}

/// Outcome of one hypothesis check.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    Pass,
    Warn,
}

#[derive(Clone, Debug, PartialEq)]
pub struct HypothesisCheck {
    pub verdict: Verdict,
    /// Per-`n` measured quantity.
    pub values: Vec<f64>,
    pub summary: String,
}

/// Thresholds for [`check_hypotheses`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HypothesisThresholds {
    /// Largest admissible geometric decay ratio of `|λ_{n,1}|`.
    pub decay_ratio: f64,
    /// Smallest admissible rescaled divisor separation.
    pub separation: f64,
    /// Smallest admissible ratio `last/first` of the separation trend.
    pub separation_trend: f64,
    /// Admissible band for `|λ_{n,1}|⁻¹e^{ω_n}`.
    pub ratio_band: (f64, f64),
}

impl Default for HypothesisThresholds {
    fn default() -> Self {
        Self { decay_ratio: 0.9, separation: 1e-3, separation_trend: 0.25, ratio_band: (1e-3, 1e3) }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct HypothesisReport {
    /// Branch point decay.
    pub decay: HypothesisCheck,
    /// Rescaled divisor separation.
    pub separation: HypothesisCheck,
    /// Conformal factor ratio.
    pub ratio: HypothesisCheck,
}

impl HypothesisReport {
    pub fn all_pass(&self) -> bool {
        [&self.decay, &self.separation, &self.ratio].iter().all(|c| c.verdict == Verdict::Pass)
    }
}

fn rescaled_separation<S: Real>(betas: &[Cx<S>], ell: S) -> f64 {
    let mut m = f64::INFINITY;
    for i in 0..betas.len() {
        for j in i + 1..betas.len() {
            let d = (betas[i] - betas[j]).norm().min((betas[i].inv() - betas[j].inv()).norm()) / ell;
            m = m.min(d.to_f64_lossy());
        }
    }
    m
}

/// Trend report for the decay, separation and conformal-ratio hypotheses over `n = 1..=n_max`.
pub fn check_hypotheses<S: Real>(spec: &BlowupSequenceSpec<S>, n_max: usize, th: HypothesisThresholds) -> Result<HypothesisReport> {
    let rows: Vec<(f64, f64, f64)> = (1..=n_max)
        .into_par_iter()
        .map(|n| {
            let (zeta, _) = spec.generate(n)?;
            let sd = spectral_data(&zeta)?;
            let f = choose_factors(&sd)?;
            let ratio = zeta.conformal_factor().exp() / f.ell;
            Ok((f.ell.to_f64_lossy(), rescaled_separation(&sd.betas(), f.ell), ratio.to_f64_lossy()))
        })
        .collect::<Result<_>>()?;
    let ells: Vec<f64> = rows.iter().map(|r| r.0).collect();
    let seps: Vec<f64> = rows.iter().map(|r| r.1).collect();
    let ratios: Vec<f64> = rows.iter().map(|r| r.2).collect();

    let monotone = ells.windows(2).all(|w| w[1] < w[0]);
    let rate = if ells.len() >= 2 { (ells[ells.len() - 1] / ells[0]).powf(1.0 / (ells.len() - 1) as f64) } else { f64::NAN };
    let decay_ok = monotone && rate <= th.decay_ratio;
    let decay = HypothesisCheck {
        verdict: if decay_ok { Verdict::Pass } else { Verdict::Warn },
        summary: format!("|lambda_1| monotone = {monotone}, mean decay ratio {rate:.4e}"),
        values: ells,
    };

    let min_sep = seps.iter().copied().fold(f64::INFINITY, f64::min);
    let trend = match (seps.first(), seps.last()) {
        (Some(a), Some(b)) if a.is_finite() && *a > 0.0 => b / a,
        _ => 1.0,
    };
    let sep_ok = min_sep >= th.separation && (seps.len() < 3 || trend >= th.separation_trend);
    let separation = HypothesisCheck {
        verdict: if sep_ok { Verdict::Pass } else { Verdict::Warn },
        summary: format!("min rescaled separation {min_sep:.4e}, last/first {trend:.4e}"),
        values: seps,
    };

    let lo = ratios.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = ratios.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let ratio_ok = lo >= th.ratio_band.0 && hi <= th.ratio_band.1;
    let ratio = HypothesisCheck {
        verdict: if ratio_ok { Verdict::Pass } else { Verdict::Warn },
        summary: format!("exp(omega)/|lambda_1| in [{lo:.6e}, {hi:.6e}]"),
        values: ratios,
    };
    Ok(HypothesisReport { decay, separation, ratio })
}

/// Settings for [`run_blowup`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BlowupOptions<S: Real> {
    /// Grid in the rescaled coordinate `z̃`.
    pub surface_grid: ZGrid<S>,
    /// Number of trailing members for which the rescaled CMC immersion is computed.
    pub surfaces: usize,
    pub flow: FlowOptions<S>,
    /// `|λ̃| ≤ finite_bound` counts as a finite limit branch point.
    pub finite_bound: S,
}

impl<S: Real> Default for BlowupOptions<S> {
    fn default() -> Self {
        let h = S::lit(0.01);
        Self {
            surface_grid: ZGrid::centered(re(S::zero()), 41, 41, h, h).expect("static grid"),
            surfaces: 3,
            flow: FlowOptions { substeps: 4, ..FlowOptions::default() },
            finite_bound: S::lit(1e3),
        }
    }
}

/// Measurements for one member of the sequence.
#[derive(Clone, Debug)]
pub struct BlowupRecord<S: Real> {
    pub n: usize,
    pub factors: BlowupFactors<S>,
    /// Rescaled branch points `λ̃_{n,k}`.
    pub branch: Vec<Cx<S>>,
    /// Rescaled divisor `β̃_{n,k}`.
    pub divisor: Vec<Cx<S>>,
    pub zeta: MatLaurent<S>,
    pub zeta_error: S,
    pub u_error: S,
    pub v_error: S,
    /// Lower-left `λ^KdV⁻¹` entry of `Ṽ_n`.
    pub v_corner: S,
    /// `ã_n − ã_∞`.
    pub a_error: S,
    /// `ω̃_n(0) = ω_n(z_{n,0}) − ln ℓ_n`.
    pub omega: S,
    pub surface_rms: Option<S>,
    pub h_measured: Option<S>,
}

/// Normalization of a degree-zero KdV potential onto the helicoid family.
#[derive(Clone, Debug, PartialEq)]
pub struct HelicoidMatch<S: Real> {
    /// `c` in `ζ ↦ c·ζ(dλ)`; the coordinate becomes `z/c`.
    pub coordinate_scale: S,
    pub lambda_scale: S,
    pub x: S,
    /// Integration constant of the normalized potential.
    pub c0: S,
    pub normalized: KdvPotential<S>,
    /// Coefficient distance from `KdvPotential::helicoid(x, −¼)`.
    pub coefficient_error: S,
}

/// Normalizes `ζ` so that `u₀ = ½tanh x`, `w₀ = −½sech x`, `v₁ = ¼cosh x` and reads off `x` and `C₀`.
pub fn match_helicoid<S: Real>(zeta: &KdvPotential<S>) -> Result<HelicoidMatch<S>> {
    const OP: &str = "blowup::match_helicoid";
    if zeta.degree() != 0 {
        return Err(Error::Degree { op: OP, msg: format!("helicoid potentials have degree 0, got {}", zeta.degree()) });
    }
    let half = S::lit(0.5);
    let c0 = zeta.coeff(0);
    let c = half / (c0.a.norm_sqr() + c0.c.norm_sqr()).sqrt();
    let vw = zeta.v1() * c0.c.re;
    if !(vw < S::zero()) {
        return Err(Error::Invalid { op: OP, msg: "v1 w0 must be negative".into() });
    }
    let d = -S::one() / (S::lit(8.0) * c * c * vw);
    let scaled = zeta.with_coeffs(zeta.coeffs().iter().map(|m| m.scale_re(c)).collect());
    let normalized = scaled.rescaled_lambda(d);
    let u0 = normalized.coeff(0).a.re;
    let x = (S::lit(2.0) * u0).atanh();
    let c0v = (normalized.coeff(0).b.re + half / x.cosh()) / x.cosh() - S::lit(0.25);
    let coefficient_error = normalized.distance(&KdvPotential::helicoid(x, S::lit(-0.25)));
    Ok(HelicoidMatch { coordinate_scale: c, lambda_scale: d, x, c0: c0v, normalized, coefficient_error })
}

/// Result of [`run_blowup`].
#[derive(Clone, Debug)]
pub struct BlowupReport<S: Real> {
    pub description: String,
    pub records: Vec<BlowupRecord<S>>,
    /// Extrapolated `ζ̃_∞`.
    pub zeta_limit: MatLaurent<S>,
    /// Observed contraction ratio of the last three differences.
    pub richardson_ratio: S,
    /// KdV limit in the normalization `v₁ = ¼e^{ω/2}`.
    pub limit: KdvPotential<S>,
    /// `c` in `ζ^KdV(λ) ↦ ζ^KdV(cλ)` applied to reach that normalization.
    pub lambda_scale: S,
    pub limit_validation: ValidationReport,
    /// Magnitude of the `λ̃` powers above `g̃` discarded from `ζ̃_∞`.
    pub discarded_tail: S,
    pub d_tilde: usize,
    pub g_tilde: usize,
    pub limit_branch: Vec<Cx<S>>,
    pub limit_surface: ImmersionPatch<S>,
    pub limit_h_measured: S,
}

fn limit_of_three<S: Real>(z: &[MatLaurent<S>]) -> Result<(MatLaurent<S>, S)> {
    const OP: &str = "blowup::run_blowup";
    let k = z.len();
    if k < 4 {
        return Err(Error::Invalid { op: OP, msg: "need at least four members".into() });
    }
    let d: Vec<S> = (k - 3..k).map(|i| z[i].distance(&z[i - 1])).collect();
    if !(d[1] < d[0] && d[2] < d[1]) {
        return Err(Error::NonConvergence {
            op: OP,
            msg: format!("successive differences {:.3e}, {:.3e}, {:.3e} do not decrease", d[0].to_f64_lossy(), d[1].to_f64_lossy(), d[2].to_f64_lossy()),
        });
    }
    let q = d[2] / d[1];
    let step = z[k - 1].clone() - z[k - 2].clone();
    Ok((z[k - 1].clone() + step.map(|_, m| m.scale_re(q / (S::one() - q))), q))
}

fn rescaled_cmc_immersion<S: Real>(
    zeta: &CmcPotential<S>,
    z0: Cx<S>,
    f: &BlowupFactors<S>,
    lambda_s: Cx<S>,
    opts: &BlowupOptions<S>,
) -> Result<ImmersionPatch<S>> {
    let g = opts.surface_grid;
    let grid = ZGrid::with_base(z0 + (g.origin - g.point(g.base.0, g.base.1)) * f.r, g.nx, g.ny, g.hx * f.r, g.hy * f.r, g.base)?;
    let patch = cmc_surface(zeta, &grid, lambda_s, opts.flow)?;
    let origin = patch.points[grid.base_index()];
    let points: Vec<R3<S>> = patch.points.iter().map(|p| [0, 1, 2].map(|i| (p[i] - origin[i]) / f.h)).collect();
    let omega = patch.omega.iter().map(|w| *w - f.ell.ln()).collect();
    ImmersionPatch::new(g, points, patch.normals, omega)
}

/// Runs the sequence `n = 1..=n_max`, extrapolates `ζ̃_∞` and builds the KdV limit and its surface.
pub fn run_blowup<S: Real>(spec: &BlowupSequenceSpec<S>, n_max: usize, opts: &BlowupOptions<S>) -> Result<BlowupReport<S>> {
    const OP: &str = "blowup::run_blowup";
    struct Member<S: Real> {
        zeta: CmcPotential<S>,
        z0: Cx<S>,
        sd: SpectralData<S>,
        f: BlowupFactors<S>,
        zt: MatLaurent<S>,
    }
    let members: Vec<Member<S>> = (1..=n_max)
        .into_par_iter()
        .map(|n| {
            let (zeta, z0) = spec.generate(n)?;
            let sd = spectral_data(&zeta)?;
            let f = choose_factors(&sd)?;
            let zt = rescale_potential(&zeta, f.ell, f.s);
            Ok(Member { zeta, z0, sd, f, zt })
        })
        .collect::<Result<_>>()?;
    let iterates: Vec<MatLaurent<S>> = members.iter().map(|m| m.zt.clone()).collect();
    let (zeta_limit, richardson_ratio) = limit_of_three(&iterates)?;

    let last = members.last().expect("non-empty");
    let scaled_branch: Vec<Cx<S>> = last.sd.branch.iter().map(|l| *l / last.f.ell).collect();
    let limit_branch: Vec<Cx<S>> = scaled_branch.iter().copied().filter(|l| l.norm() <= opts.finite_bound).collect();
    let d_tilde = limit_branch.len();
    let g_tilde = d_tilde / 2;
    let (raw, discarded_tail) = kdv_limit_truncated(&zeta_limit, g_tilde)?;
    let connection = raw.alpha();
    let h = last.zeta.mean_curvature();
    let lambda_scale = (S::lit(2.0) * h).recip();
    let limit = raw.rescaled_lambda(lambda_scale);
    let limit_validation = limit.validate(S::lit(1e-9));
    if !limit_validation.all_pass() {
        let names: Vec<&str> = limit_validation.failures().iter().map(|c| c.name.as_str()).collect();
        return Err(Error::Invalid { op: OP, msg: format!("limit potential fails {names:?}") });
    }
    let a_limit = limit_spectral_poly(h, last.zeta.hopf(), &limit_branch);
    let limit_surface = minimal_surface(&limit, &opts.surface_grid, spec.phi(), opts.flow)?;
    let limit_h_measured = limit_surface.max_over(|d| d.h.abs());

    let first_surface = n_max.saturating_sub(opts.surfaces) + 1;
    let records = members
        .par_iter()
        .enumerate()
        .map(|(i, m)| {
            let n = i + 1;
            let conn = rescaled_connection(&m.zeta, &m.f);
            let ell = m.f.ell;
            let (surface_rms, h_measured) = if n >= first_surface {
                let patch = rescaled_cmc_immersion(&m.zeta, m.z0, &m.f, spec.sym_point, opts)?;
                let al = rigid_align_points(&patch.points, &limit_surface.points, true)?;
                (Some(S::lit(al.rms)), Some(patch.max_over(|d| d.h.abs())))
            } else {
                (None, None)
            };
            Ok(BlowupRecord {
                n,
                factors: m.f,
                branch: m.sd.branch.iter().map(|l| *l / ell).collect(),
                divisor: m.sd.betas().iter().map(|b| *b / ell).collect(),
                zeta_error: m.zt.distance(&zeta_limit),
                u_error: conn.u.distance(&connection.u),
                v_error: conn.v.distance(&connection.v),
                v_corner: conn.v.coeff(-1).c.norm(),
                a_error: rescaled_spectral_poly(&m.sd.a, ell).distance(&a_limit),
                omega: m.zeta.conformal_factor() - ell.ln(),
                zeta: m.zt.clone(),
                surface_rms,
                h_measured,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    Ok(BlowupReport {
        description: spec.description.clone(),
        records,
        zeta_limit,
        richardson_ratio,
        limit,
        lambda_scale,
        limit_validation,
        discarded_tail,
        d_tilde,
        g_tilde,
        limit_branch,
        limit_surface,
        limit_h_measured,
    })
}

fn cjson<S: Real>(c: Cx<S>) -> serde_json::Value {
    json!([c.re.to_f64_lossy(), c.im.to_f64_lossy()])
}

fn mjson<S: Real>(m: &Mat2<S>) -> serde_json::Value {
    json!([cjson(m.a), cjson(m.b), cjson(m.c), cjson(m.d)])
}

fn ljson<S: Real>(l: &MatLaurent<S>) -> serde_json::Value {
    serde_json::Value::Array((l.lo()..=l.hi()).map(|k| json!({ "k": k, "m": mjson(&l.coeff(k)) })).collect())
}

fn opt<S: Real>(x: Option<S>) -> serde_json::Value {
    x.map_or(serde_json::Value::Null, |v| json!(v.to_f64_lossy()))
}

impl<S: Real> BlowupReport<S> {
    pub fn to_json(&self) -> serde_json::Value {
        let records: Vec<serde_json::Value> = self
            .records
            .iter()
            .map(|r| {
                json!({
                    "n": r.n,
                    "factors": { "ell": r.factors.ell.to_f64_lossy(), "r": r.factors.r.to_f64_lossy(), "s": r.factors.s.to_f64_lossy(), "h": r.factors.h.to_f64_lossy() },
                    "branch": r.branch.iter().map(|c| cjson(*c)).collect::<Vec<_>>(),
                    "divisor": r.divisor.iter().map(|c| cjson(*c)).collect::<Vec<_>>(),
                    "zeta_error": r.zeta_error.to_f64_lossy(),
                    "u_error": r.u_error.to_f64_lossy(),
                    "v_error": r.v_error.to_f64_lossy(),
                    "v_corner": r.v_corner.to_f64_lossy(),
                    "a_error": r.a_error.to_f64_lossy(),
                    "omega": r.omega.to_f64_lossy(),
                    "surface_rms": opt(r.surface_rms),
                    "H_meas": opt(r.h_measured),
                })
            })
            .collect();
        json!({
            "description": self.description,
            "d_tilde": self.d_tilde,
            "g_tilde": self.g_tilde,
            "limit": {
                "kind": "kdv",
                "g": self.limit.degree(),
                "coeff": ljson(&self.limit.laurent()),
            },
            "lambda_scale": self.lambda_scale.to_f64_lossy(),
            "zeta_limit": ljson(&self.zeta_limit),
            "richardson_ratio": self.richardson_ratio.to_f64_lossy(),
            "discarded_tail": self.discarded_tail.to_f64_lossy(),
            "limit_branch": self.limit_branch.iter().map(|c| cjson(*c)).collect::<Vec<_>>(),
            "limit_H_meas": self.limit_h_measured.to_f64_lossy(),
            "records": records,
        })
    }

    pub fn write_json(&self, path: &Path) -> Result<()> {
        let text = serde_json::to_string_pretty(&self.to_json()).expect("json values serialize");
        std::fs::write(path, text + "\n").map_err(|e| Error::Io { op: "blowup::BlowupReport::write_json", msg: format!("{}: {e}", path.display()) })
    }

    /// Convergence table with columns `n, ell, zeta_err, U_err, V_err, surface_rms, H_meas`.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let io = |e: std::io::Error| Error::Io { op: "blowup::BlowupReport::write_csv", msg: format!("{}: {e}", path.display()) };
        let mut out = std::io::BufWriter::new(std::fs::File::create(path).map_err(io)?);
        writeln!(out, "n,ell,zeta_err,U_err,V_err,surface_rms,H_meas").map_err(io)?;
        let cell = |x: Option<S>| x.map_or(String::new(), |v| format!("{:.12e}", v.to_f64_lossy()));
        for r in &self.records {
            writeln!(
                out,
                "{},{:.12e},{:.12e},{:.12e},{:.12e},{},{}",
                r.n,
                r.factors.ell.to_f64_lossy(),
                r.zeta_error.to_f64_lossy(),
                r.u_error.to_f64_lossy(),
                r.v_error.to_f64_lossy(),
                cell(r.surface_rms),
                cell(r.h_measured)
            )
            .map_err(io)?;
        }
        out.flush().map_err(io)
    }
}
