use super::grid::{sweep, PathOrder, Step, ZGrid};
use crate::error::{Error, Result};
use crate::loopalg::{Mat2, MatLaurent};
use crate::potential::{CmcPotential, KdvPotential, KillingData};
use crate::scalar::{re, Cx, Real};
use num_complex::Complex;
use rayon::prelude::*;

/// Integrator settings shared by the potential, frame and companion sweeps.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FlowOptions<S: Real> {
    /// RK4 steps per grid spacing.
    pub substeps: usize,
    pub order: PathOrder,
    /// Magnitude beyond which the flow is declared to have left the regular region.
    pub blowup_bound: S,
}

impl<S: Real> Default for FlowOptions<S> {
    fn default() -> Self {
        Self { substeps: 1, order: PathOrder::YThenX, blowup_bound: S::lit(1e12) }
    }
}

/// Polynomial Killing field sampled on a grid.
#[derive(Clone, Debug)]
pub struct PkfField<S: Real, P> {
    pub grid: ZGrid<S>,
    pub options: FlowOptions<S>,
    pub values: Vec<P>,
}

impl<S: Real, P: KillingData<S>> PkfField<S, P> {
    pub fn at(&self, i: usize, j: usize) -> &P {
        &self.values[self.grid.index(i, j)]
    }

    pub fn base_value(&self) -> &P {
        &self.values[self.grid.base_index()]
    }
}

/// Extended frames `F(z, λ_k)` on a grid.
#[derive(Clone, Debug)]
pub struct FrameGrid<S: Real> {
    pub grid: ZGrid<S>,
    pub lambdas: Vec<Cx<S>>,
    /// `frames[node][k]` is `F` at that node for `lambdas[k]`.
    pub frames: Vec<Vec<Mat2<S>>>,
    /// Largest `|det F − 1|` seen before each renormalization.
    pub det_drift: S,
}

impl<S: Real> FrameGrid<S> {
    pub fn at(&self, i: usize, j: usize, k: usize) -> Mat2<S> {
        self.frames[self.grid.index(i, j)][k]
    }

    pub fn lambda_index(&self, lambda: Cx<S>) -> Option<usize> {
        self.lambdas.iter().position(|l| (*l - lambda).norm() <= S::lit(1e-14) * (S::one() + lambda.norm()))
    }
}

/// Companion field `G` solving `dG = Gα + Fβ` at one spectral value.
#[derive(Clone, Debug)]
pub struct CompanionField<S: Real> {
    pub grid: ZGrid<S>,
    pub lambda: Cx<S>,
    pub frames: Vec<Mat2<S>>,
    pub values: Vec<Mat2<S>>,
}

/// Inhomogeneity of the companion equation.
#[derive(Clone, Copy, Debug)]
enum Companion<S: Real> {
    None,
    /// `β = ∂α/∂λ` at the frame's spectral value.
    LambdaDerivative,
    /// `β = e^{ω/2}(i/2)[[0, e^{−iφ}dz],[e^{iφ}dz̄, 0]]`.
    Minimal(S),
}

struct Derivs<S: Real> {
    xi: MatLaurent<S>,
    f: Vec<Mat2<S>>,
    g: Option<Mat2<S>>,
}

fn derivs<S: Real, P: KillingData<S>>(
    xi: &P,
    f: &[Mat2<S>],
    g: Option<Mat2<S>>,
    dz: Cx<S>,
    lambdas: &[Cx<S>],
    comp: Companion<S>,
) -> Result<Derivs<S>> {
    let a = xi.connection().along(dz);
    let (lo, hi) = xi.support();
    let l = xi.as_laurent();
    let dxi = a.bracket(&l).truncated(lo, hi).scale(re(-S::one()));
    let mut df = Vec::with_capacity(f.len());
    for (fk, lk) in f.iter().zip(lambdas) {
        df.push(*fk * a.eval(*lk)?);
    }
    let dg = match (g, comp) {
        (Some(g), Companion::LambdaDerivative) => {
            let beta = a.derivative().eval(lambdas[0])?;
            Some(g * a.eval(lambdas[0])? + f[0] * beta)
        }
        (Some(g), Companion::Minimal(phi)) => {
            let e = (xi.omega() / S::lit(2.0)).exp();
            let half_i = Complex::new(S::zero(), S::lit(0.5) * e);
            let ph = Complex::from_polar(S::one(), -phi);
            let z = re(S::zero());
            let beta = Mat2::new(z, half_i * ph * dz, half_i * ph.conj() * dz.conj(), z);
            Some(g * a.eval(lambdas[0])? + f[0] * beta)
        }
        _ => None,
    };
    Ok(Derivs { xi: dxi, f: df, g: dg })
}

fn shifted<S: Real, P: KillingData<S>>(
    xi: &P,
    f: &[Mat2<S>],
    g: Option<Mat2<S>>,
    d: &Derivs<S>,
    t: S,
) -> (P, Vec<Mat2<S>>, Option<Mat2<S>>) {
    let x = xi.replaced(&(xi.as_laurent() + d.xi.scale(re(t))));
    let f = f.iter().zip(&d.f).map(|(a, b)| *a + b.scale_re(t)).collect();
    let g = g.zip(d.g).map(|(a, b)| a + b.scale_re(t));
    (x, f, g)
}

/// One classical RK4 step moving the base point by `dz`.
fn rk4<S: Real, P: KillingData<S>>(
    xi: &P,
    f: &[Mat2<S>],
    g: Option<Mat2<S>>,
    dz: Cx<S>,
    lambdas: &[Cx<S>],
    comp: Companion<S>,
) -> Result<(P, Vec<Mat2<S>>, Option<Mat2<S>>)> {
    let half = S::lit(0.5);
    let k1 = derivs(xi, f, g, dz, lambdas, comp)?;
    let (x2, f2, g2) = shifted(xi, f, g, &k1, half);
    let k2 = derivs(&x2, &f2, g2, dz, lambdas, comp)?;
    let (x3, f3, g3) = shifted(xi, f, g, &k2, half);
    let k3 = derivs(&x3, &f3, g3, dz, lambdas, comp)?;
    let (x4, f4, g4) = shifted(xi, f, g, &k3, S::one());
    let k4 = derivs(&x4, &f4, g4, dz, lambdas, comp)?;
    let two = S::lit(2.0);
    let sixth = S::one() / S::lit(6.0);
    let comb = |a: Mat2<S>, b: Mat2<S>, c: Mat2<S>, d: Mat2<S>| (a + b.scale_re(two) + c.scale_re(two) + d).scale_re(sixth);
    let dxi = (k1.xi.clone() + k2.xi.scale(re(two)) + k3.xi.scale(re(two)) + k4.xi.clone()).scale(re(sixth));
    let xn = xi.replaced(&(xi.as_laurent() + dxi));
    let fnew = (0..f.len()).map(|k| f[k] + comb(k1.f[k], k2.f[k], k3.f[k], k4.f[k])).collect();
    let gnew = g.map(|g| g + comb(k1.g.unwrap(), k2.g.unwrap(), k3.g.unwrap(), k4.g.unwrap()));
    Ok((xn, fnew, gnew))
}

fn check_bound<S: Real>(l: &MatLaurent<S>, f: &[Mat2<S>], bound: S, op: &'static str) -> Result<()> {
    let m = l.max_norm();
    let fm = f.iter().fold(S::zero(), |acc, x| acc.max(x.max_abs()));
    if !(l.is_finite() && f.iter().all(|x| x.is_finite())) || m > bound || fm > bound {
        return Err(Error::Blowup { op, msg: format!("magnitude {} exceeds {}", m.max(fm), bound) });
    }
    Ok(())
}

/// Renormalizes `F ↦ F·det(F)^{−1/2}` and returns `|det F − 1|` before the correction.
fn renormalize<S: Real>(f: &mut Mat2<S>) -> S {
    let d = f.det();
    let drift = (d - re(S::one())).norm();
    *f = f.scale(d.sqrt().inv());
    drift
}

struct Walk<S: Real> {
    frames: Vec<Vec<Mat2<S>>>,
    companions: Vec<Mat2<S>>,
    drift: S,
}

/// Sweeps frames (and optionally one companion) over the grid, restarting each step from the
/// stored node value of the Killing field.
fn walk_frames<S: Real, P: KillingData<S>>(
    field: &PkfField<S, P>,
    lambdas: &[Cx<S>],
    comp: Companion<S>,
    op: &'static str,
) -> Result<Walk<S>> {
    let grid = &field.grid;
    let opts = field.options;
    let n = grid.len();
    let mut frames = vec![Vec::new(); n];
    let mut comps = vec![Mat2::zero(); n];
    frames[grid.base_index()] = vec![Mat2::identity(); lambdas.len()];
    let with_g = !matches!(comp, Companion::None);
    let mut drift = S::zero();
    let sub = S::from_usize(opts.substeps).unwrap();
    for Step { from, to, dz } in sweep(grid, opts.order) {
        let h = dz / sub;
        let mut xi = field.values[from].clone();
        let mut f = frames[from].clone();
        let mut g = with_g.then_some(comps[from]);
        for _ in 0..opts.substeps {
            let (x, mut fnext, gnext) = rk4(&xi, &f, g, h, lambdas, comp)?;
            for fk in fnext.iter_mut() {
                drift = drift.max(renormalize(fk));
            }
            check_bound(&x.as_laurent(), &fnext, opts.blowup_bound, op)?;
            if let Some(gv) = gnext {
                check_bound(&MatLaurent::zero(), &[gv], opts.blowup_bound, op)?;
            }
            xi = x;
            f = fnext;
            g = gnext;
        }
        frames[to] = f;
        if let Some(gv) = g {
            comps[to] = gv;
        }
    }
    Ok(Walk { frames, companions: comps, drift })
}

/// Integrates `dξ + [α(ξ), ξ] = 0` over the grid starting from `ζ₀` at the base node.
pub fn integrate_pkf<S: Real, P: KillingData<S>>(zeta0: &P, grid: &ZGrid<S>, opts: FlowOptions<S>) -> Result<PkfField<S, P>> {
    const OP: &str = "zeroflow::integrate_pkf";
    if opts.substeps == 0 {
        return Err(Error::Invalid { op: OP, msg: "substeps must be positive".into() });
    }
    let mut values: Vec<Option<P>> = vec![None; grid.len()];
    values[grid.base_index()] = Some(zeta0.clone());
    let sub = S::from_usize(opts.substeps).unwrap();
    for Step { from, to, dz } in sweep(grid, opts.order) {
        let mut xi = values[from].clone().expect("sweep visits predecessors first");
        for _ in 0..opts.substeps {
            xi = rk4(&xi, &[], None, dz / sub, &[], Companion::None)?.0;
            check_bound(&xi.as_laurent(), &[], opts.blowup_bound, OP)?;
        }
        values[to] = Some(xi);
    }
    Ok(PkfField { grid: *grid, options: opts, values: values.into_iter().map(|v| v.expect("every node reached")).collect() })
}

pub fn integrate_pkf_cmc<S: Real>(zeta0: &CmcPotential<S>, grid: &ZGrid<S>) -> Result<PkfField<S, CmcPotential<S>>> {
    integrate_pkf(zeta0, grid, FlowOptions::default())
}

pub fn integrate_pkf_kdv<S: Real>(zeta0: &KdvPotential<S>, grid: &ZGrid<S>) -> Result<PkfField<S, KdvPotential<S>>> {
    integrate_pkf(zeta0, grid, FlowOptions::default())
}

fn check_lambdas<S: Real, P: KillingData<S>>(field: &PkfField<S, P>, lambdas: &[Cx<S>], op: &'static str) -> Result<()> {
    let a = field.base_value().connection();
    if a.u.lo().min(a.v.lo()) < 0 {
        if let Some(l) = lambdas.iter().find(|l| l.norm() == S::zero()) {
            return Err(Error::Domain { op, msg: format!("frame undefined at λ = {l}") });
        }
    }
    Ok(())
}

/// Solves `dF = Fα` with `F(z₀) = 1` for every spectral value, in parallel over `λ`.
pub fn integrate_frame<S: Real, P: KillingData<S>>(field: &PkfField<S, P>, lambdas: &[Cx<S>]) -> Result<FrameGrid<S>> {
    const OP: &str = "zeroflow::integrate_frame";
    check_lambdas(field, lambdas, OP)?;
    let walks: Vec<Walk<S>> =
        lambdas.par_iter().map(|l| walk_frames(field, std::slice::from_ref(l), Companion::None, OP)).collect::<Result<_>>()?;
    let n = field.grid.len();
    let frames = (0..n).map(|i| walks.iter().map(|w| w.frames[i][0]).collect()).collect();
    let det_drift = walks.iter().fold(S::zero(), |m, w| m.max(w.drift));
    Ok(FrameGrid { grid: field.grid, lambdas: lambdas.to_vec(), frames, det_drift })
}

fn companion_walk<S: Real, P: KillingData<S>>(
    field: &PkfField<S, P>,
    frames: &FrameGrid<S>,
    lambda: Cx<S>,
    comp: Companion<S>,
    op: &'static str,
) -> Result<CompanionField<S>> {
    if frames.lambda_index(lambda).is_none() {
        return Err(Error::Invalid { op, msg: format!("λ = {lambda} is not among the frame samples") });
    }
    check_lambdas(field, &[lambda], op)?;
    let w = walk_frames(field, &[lambda], comp, op)?;
    Ok(CompanionField { grid: field.grid, lambda, frames: w.frames.into_iter().map(|f| f[0]).collect(), values: w.companions })
}

/// `G` with `G(z₀) = 0` and `dG = Gα + F ∂α/∂λ` at the Sym point `λ_s ∈ S¹`.
pub fn integrate_companion_cmc<S: Real>(
    field: &PkfField<S, CmcPotential<S>>,
    frames: &FrameGrid<S>,
    lambda_s: Cx<S>,
) -> Result<CompanionField<S>> {
    const OP: &str = "zeroflow::integrate_companion_cmc";
    if (lambda_s.norm() - S::one()).abs() > S::lit(1e-12) {
        return Err(Error::NonUnitSymPoint { op: OP, msg: format!("|λ_s| = {}", lambda_s.norm()) });
    }
    companion_walk(field, frames, lambda_s, Companion::LambdaDerivative, OP)
}

/// `G` at `λ = 0` with `G(z₀) = 0` for the minimal-surface Sym formula with angle `φ`.
pub fn integrate_companion_kdv<S: Real>(
    field: &PkfField<S, KdvPotential<S>>,
    frames: &FrameGrid<S>,
    phi: S,
) -> Result<CompanionField<S>> {
    companion_walk(field, frames, re(S::zero()), Companion::Minimal(phi), "zeroflow::integrate_companion_kdv")
}

/// Transports `(ξ, F)` along the straight segment `z₀ → z₀ + T` in `steps` RK4 steps.
pub fn transport<S: Real, P: KillingData<S>>(zeta0: &P, t: Cx<S>, lambdas: &[Cx<S>], steps: usize) -> Result<(P, Vec<Mat2<S>>)> {
    const OP: &str = "zeroflow::transport";
    if steps == 0 {
        return Err(Error::Invalid { op: OP, msg: "steps must be positive".into() });
    }
    let h = t / S::from_usize(steps).unwrap();
    let mut xi = zeta0.clone();
    let mut f = vec![Mat2::identity(); lambdas.len()];
    for _ in 0..steps {
        let (x, mut fnext, _) = rk4(&xi, &f, None, h, lambdas, Companion::None)?;
        fnext.iter_mut().for_each(|fk| {
            renormalize(fk);
        });
        check_bound(&x.as_laurent(), &fnext, S::lit(1e12), OP)?;
        xi = x;
        f = fnext;
    }
    Ok((xi, f))
}

/// Monodromy `F(z₀)⁻¹F(z₀ + T)` with `F(z₀) = 1`, integrated along the segment.
pub fn monodromy<S: Real>(zeta0: &CmcPotential<S>, t: Cx<S>, lambda: Cx<S>) -> Result<Mat2<S>> {
    let steps = ((t.norm() / S::lit(2e-3)).ceil().to_usize().unwrap_or(1)).max(200);
    monodromy_with_steps(zeta0, t, lambda, steps)
}

pub fn monodromy_with_steps<S: Real>(zeta0: &CmcPotential<S>, t: Cx<S>, lambda: Cx<S>, steps: usize) -> Result<Mat2<S>> {
    if lambda.norm() == S::zero() {
        return Err(Error::Domain { op: "zeroflow::monodromy", msg: "λ = 0".into() });
    }
    Ok(transport(zeta0, t, &[lambda], steps)?.1[0])
}
