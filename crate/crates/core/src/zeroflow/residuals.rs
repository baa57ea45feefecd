use super::integrate::PkfField;
use crate::error::{Error, Result};
use crate::loopalg::MatLaurent;
use crate::potential::{CmcPotential, KdvPotential, KillingData};
use crate::scalar::{re, Cx, Real};
use num_complex::Complex;

/// Max-norm residuals of the coefficient relations over interior nodes and all levels.
#[derive(Clone, Debug, PartialEq)]
pub struct PsReport {
    pub relations: Vec<(String, f64)>,
    pub linearized: f64,
}

impl PsReport {
    pub fn max(&self) -> f64 {
        self.relations.iter().map(|r| r.1).fold(self.linearized, f64::max)
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        self.relations.iter().find(|r| r.0 == name).map(|r| r.1)
    }
}

/// Entries `u_k, τ_k, σ_k` of `ξ_k = [[u, τe^{ω/2}],[σe^{ω/2}, −u]]` on every node.
struct Entries<S: Real> {
    lo: i32,
    hi: i32,
    omega: Vec<S>,
    u: Vec<Vec<Cx<S>>>,
    tau: Vec<Vec<Cx<S>>>,
    sigma: Vec<Vec<Cx<S>>>,
}

impl<S: Real> Entries<S> {
    fn new<P: KillingData<S>>(field: &PkfField<S, P>) -> Self {
        let (lo, hi) = field.values[0].support();
        let levels = (hi - lo + 1) as usize;
        let n = field.values.len();
        let mut e = Entries { lo, hi, omega: vec![S::zero(); n], u: vec![vec![]; levels], tau: vec![vec![]; levels], sigma: vec![vec![]; levels] };
        for p in &field.values {
            let om = p.omega();
            let s = (-om / S::lit(2.0)).exp();
            let l = p.as_laurent();
            for k in lo..=hi {
                let c = l.coeff(k);
                let i = (k - lo) as usize;
                e.u[i].push(c.a);
                e.tau[i].push(c.b * s);
                e.sigma[i].push(c.c * s);
            }
        }
        for (i, p) in field.values.iter().enumerate() {
            e.omega[i] = p.omega();
        }
        e
    }

    fn level<'a>(&self, arr: &'a [Vec<Cx<S>>], k: i32) -> Option<&'a [Cx<S>]> {
        (self.lo..=self.hi).contains(&k).then(|| arr[(k - self.lo) as usize].as_slice())
    }
}

/// Central-difference stencils at interior node `(i, j)`.
struct Stencil<S: Real> {
    nx: usize,
    hx: S,
    hy: S,
}

impl<S: Real> Stencil<S> {
    fn dx(&self, f: &[Cx<S>], n: usize) -> Cx<S> {
        (f[n + 1] - f[n - 1]) / (S::lit(2.0) * self.hx)
    }
    fn dy(&self, f: &[Cx<S>], n: usize) -> Cx<S> {
        (f[n + self.nx] - f[n - self.nx]) / (S::lit(2.0) * self.hy)
    }
    fn dz(&self, f: &[Cx<S>], n: usize) -> Cx<S> {
        (self.dx(f, n) - self.dy(f, n) * Complex::i()) * S::lit(0.5)
    }
    fn dzb(&self, f: &[Cx<S>], n: usize) -> Cx<S> {
        (self.dx(f, n) + self.dy(f, n) * Complex::i()) * S::lit(0.5)
    }
    /// `∂_z∂_z̄ = ¼Δ`.
    fn dzdzb(&self, f: &[Cx<S>], n: usize) -> Cx<S> {
        let xx = (f[n + 1] - f[n] * S::lit(2.0) + f[n - 1]) / (self.hx * self.hx);
        let yy = (f[n + self.nx] - f[n] * S::lit(2.0) + f[n - self.nx]) / (self.hy * self.hy);
        (xx + yy) * S::lit(0.25)
    }
}

type Relation<'a, S> = Box<dyn Fn(i32, usize) -> Cx<S> + 'a>;

fn evaluate<S: Real, P: KillingData<S>>(
    field: &PkfField<S, P>,
    build: impl for<'a> Fn(&'a Entries<S>, &'a Stencil<S>, &'a [Cx<S>], &'a [Cx<S>]) -> (Vec<(&'static str, Relation<'a, S>)>, Relation<'a, S>),
) -> PsReport {
    let e = Entries::new(field);
    let g = &field.grid;
    let st = Stencil { nx: g.nx, hx: g.hx, hy: g.hy };
    let om: Vec<Cx<S>> = e.omega.iter().map(|w| re(*w)).collect();
    let zeros = vec![re(S::zero()); om.len()];
    let (rels, lin) = build(&e, &st, &om, &zeros);
    let interior: Vec<usize> =
        (1..g.ny.saturating_sub(1)).flat_map(|j| (1..g.nx.saturating_sub(1)).map(move |i| (i, j))).map(|(i, j)| g.index(i, j)).collect();
    let worst = |f: &Relation<'_, S>| {
        let mut m = 0.0f64;
        for k in e.lo..=e.hi {
            for &n in &interior {
                m = m.max(f(k, n).norm().to_f64_lossy());
            }
        }
        m
    };
    PsReport { relations: rels.iter().map(|(name, f)| (name.to_string(), worst(f))).collect(), linearized: worst(&lin) }
}

/// Residuals of the six first-order relations and the linearized Gauss equation on a CMC field.
pub fn ps_residuals_cmc<S: Real>(field: &PkfField<S, CmcPotential<S>>, h: S, q: Cx<S>) -> PsReport {
    evaluate(field, |e, st, om, zeros| {
        let lvl = move |arr: &'static str, k: i32| -> &[Cx<S>] {
            let a = match arr {
                "u" => &e.u,
                "tau" => &e.tau,
                _ => &e.sigma,
            };
            e.level(a, k).unwrap_or(zeros)
        };
        let ew = move |n: usize| e.omega[n].exp();
        let eh = move |n: usize| (e.omega[n] / S::lit(2.0)).exp();
        let half = S::lit(0.5);
        let two = S::lit(2.0);
        let rels: Vec<(&'static str, Relation<S>)> = vec![
            ("u_z", Box::new(move |k, n| st.dz(lvl("u", k), n) + q * lvl("tau", k)[n] + lvl("sigma", k + 1)[n] * (half * h * ew(n)))),
            ("u_zbar", Box::new(move |k, n| st.dzb(lvl("u", k), n) + lvl("tau", k - 1)[n] * (half * h * ew(n)) + q.conj() * lvl("sigma", k)[n])),
            ("tau_z", Box::new(move |k, n| st.dz(lvl("tau", k), n) + st.dz(om, n) * lvl("tau", k)[n] - lvl("u", k + 1)[n] * h)),
            ("tau_zbar", Box::new(move |k, n| st.dzb(lvl("tau", k), n) * eh(n) - q.conj() * lvl("u", k)[n] * (two / eh(n)))),
            ("sigma_z", Box::new(move |k, n| st.dz(lvl("sigma", k), n) * eh(n) - q * lvl("u", k)[n] * (two / eh(n)))),
            ("sigma_zbar", Box::new(move |k, n| st.dzb(lvl("sigma", k), n) + st.dzb(om, n) * lvl("sigma", k)[n] - lvl("u", k - 1)[n] * h)),
        ];
        let lin: Relation<S> = Box::new(move |k, n| {
            st.dzdzb(lvl("u", k), n) * two + lvl("u", k)[n] * (h * h * ew(n) + S::lit(4.0) * q.norm_sqr() / ew(n))
        });
        (rels, lin)
    })
}

/// Residuals of the six first-order relations and the linearized Liouville equation on a
/// minimal-surface field.
pub fn ps_residuals_kdv<S: Real>(field: &PkfField<S, KdvPotential<S>>, q: Cx<S>) -> PsReport {
    evaluate(field, |e, st, om, zeros| {
        let lvl = move |arr: &'static str, k: i32| -> &[Cx<S>] {
            let a = match arr {
                "u" => &e.u,
                "tau" => &e.tau,
                _ => &e.sigma,
            };
            e.level(a, k).unwrap_or(zeros)
        };
        let ew = move |n: usize| e.omega[n].exp();
        let eh = move |n: usize| (e.omega[n] / S::lit(2.0)).exp();
        let two = S::lit(2.0);
        let rels: Vec<(&'static str, Relation<S>)> = vec![
            ("u_z", Box::new(move |k, n| st.dz(lvl("u", k), n) + q * lvl("tau", k)[n] + lvl("sigma", k - 1)[n] * (S::lit(0.25) * ew(n)))),
            ("u_zbar", Box::new(move |k, n| st.dzb(lvl("u", k), n) + q.conj() * lvl("sigma", k)[n])),
            ("tau_z", Box::new(move |k, n| st.dz(lvl("tau", k), n) + st.dz(om, n) * lvl("tau", k)[n] - lvl("u", k - 1)[n] * S::lit(0.5))),
            ("tau_zbar", Box::new(move |k, n| st.dzb(lvl("tau", k), n) * eh(n) - q.conj() * lvl("u", k)[n] * (two / eh(n)))),
            ("sigma_z", Box::new(move |k, n| st.dz(lvl("sigma", k), n) * eh(n) - q * lvl("u", k)[n] * (two / eh(n)))),
            ("sigma_zbar", Box::new(move |k, n| st.dzb(lvl("sigma", k), n) + st.dzb(om, n) * lvl("sigma", k)[n])),
        ];
        let lin: Relation<S> =
            Box::new(move |k, n| st.dzdzb(lvl("u", k), n) + lvl("u", k)[n] * (two * q.norm_sqr() / ew(n)));
        (rels, lin)
    })
}

/// Outcome of comparing two Killing fields with the same leading coefficient.
#[derive(Clone, Debug, PartialEq)]
pub enum DegreeVerdict<S: Real> {
    Identical,
    /// The difference starts at `level`; `witness = λ^{−level−1}·(H/2τ_level)·(ζ¹ − ζ²)` is a
    /// Killing field of degree `degree < g`.
    LowerDegree { level: i32, u_level: Cx<S>, sigma_level: Cx<S>, witness: MatLaurent<S>, degree: i32 },
}

pub fn minimal_degree_witness<S: Real>(z1: &CmcPotential<S>, z2: &CmcPotential<S>, tol: S) -> Result<DegreeVerdict<S>> {
    const OP: &str = "zeroflow::minimal_degree_witness";
    if z1.genus() != z2.genus() {
        return Err(Error::Invalid { op: OP, msg: "genera differ".into() });
    }
    let scale = z1.laurent().max_norm().max(z2.laurent().max_norm());
    if (z1.coeff(-1) - z2.coeff(-1)).max_abs() > tol * scale {
        return Err(Error::Invalid { op: OP, msg: "leading coefficients differ".into() });
    }
    let d = z1.laurent() - z2.laurent();
    let Some(l) = (0..=z1.genus() as i32).find(|k| d.coeff(*k).max_abs() > tol * scale) else {
        return Ok(DegreeVerdict::Identical);
    };
    let s = (-z1.conformal_factor() / S::lit(2.0)).exp();
    let dl = d.coeff(l);
    let tau = dl.b * s;
    if tau.norm() <= tol * scale * s {
        return Err(Error::Degenerate { op: OP, msg: format!("τ vanishes at the lowest differing level {l}") });
    }
    let witness = d.shift(-l - 1).scale(re(z1.mean_curvature()) / (tau * S::lit(2.0))).trimmed(tol * scale);
    let degree = witness.hi();
    Ok(DegreeVerdict::LowerDegree { level: l, u_level: dl.a, sigma_level: dl.c * s, witness, degree })
}
