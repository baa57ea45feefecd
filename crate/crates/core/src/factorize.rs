//! Loop-group factorizations on circles `|λ| = r`: the r-Iwasawa splitting `Φ = F·B` with `F`
//! unitary on the circle, the modified Birkhoff splitting with `F(0) ∈ SU(2)`, and the Symes
//! pipelines that turn `exp((z − z₀)ζ)` into extended frames.

use crate::error::{Error, Result};
use crate::loopalg::{expm_sl2, DenseMatrix, Mat2, MatLaurent};
use crate::potential::{CmcPotential, KdvPotential};
use crate::scalar::{re, Cx, Real};
use crate::zeroflow::{sweep, CompanionField, FrameGrid, PathOrder, ZGrid};
use num_complex::Complex;
use rayon::prelude::*;
use rustfft::FftPlanner;

/// Loop sampled at `λ_j = r·e^{2πij/N}`.
#[derive(Clone, Debug, PartialEq)]
pub struct CircleLoop<S: Real> {
    r: S,
    samples: Vec<Mat2<S>>,
}

impl<S: Real> CircleLoop<S> {
    /// Checks `N ≥ 4` a power of two, `r > 0` and `det = 1` to 1e−9.
    pub fn new(r: S, samples: Vec<Mat2<S>>) -> Result<Self> {
        const OP: &str = "factorize::CircleLoop";
        let n = samples.len();
        if n < 4 || !n.is_power_of_two() {
            return Err(Error::Invalid { op: OP, msg: format!("sample count {n} must be a power of two >= 4") });
        }
        if !(r > S::zero() && r.is_finite()) {
            return Err(Error::Invalid { op: OP, msg: "radius must be positive".into() });
        }
        if let Some((j, m)) = samples.iter().enumerate().find(|(_, m)| !m.is_finite() || (m.det() - re(S::one())).norm() > S::lit(1e-9)) {
            return Err(Error::Invalid { op: OP, msg: format!("sample {j} has det {}", m.det()) });
        }
        Ok(Self { r, samples })
    }

    pub fn from_fn(r: S, n: usize, f: impl Fn(Cx<S>) -> Mat2<S>) -> Result<Self> {
        let samples = (0..n).map(|j| f(circle_point(r, n, j))).collect();
        Self::new(r, samples)
    }

    pub fn radius(&self) -> S {
        self.r
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn samples(&self) -> &[Mat2<S>] {
        &self.samples
    }

    pub fn lambda(&self, j: usize) -> Cx<S> {
        circle_point(self.r, self.len(), j)
    }

    /// Fourier coefficients `c_n` of `Φ = Σ c_n (λ/r)^n`, index `n mod N`.
    pub fn fourier(&self) -> Vec<Mat2<S>> {
        fourier(&self.samples)
    }

    pub fn max_distance(&self, other: &Self) -> S {
        self.samples.iter().zip(&other.samples).fold(S::zero(), |m, (a, b)| m.max((*a - *b).max_abs()))
    }
}

fn circle_point<S: Real>(r: S, n: usize, j: usize) -> Cx<S> {
    let t = S::TAU() * S::from_usize(j).unwrap() / S::from_usize(n).unwrap();
    Complex::from_polar(r, t)
}

fn fft_entries<S: Real>(samples: &[Mat2<S>], inverse: bool) -> Vec<Mat2<S>> {
    let n = samples.len();
    let mut planner = FftPlanner::<S>::new();
    let plan = if inverse { planner.plan_fft_inverse(n) } else { planner.plan_fft_forward(n) };
    let mut cols: Vec<Vec<Cx<S>>> = (0..4).map(|e| samples.iter().map(|m| m.entries()[e]).collect()).collect();
    for c in cols.iter_mut() {
        plan.process(c);
    }
    let scale = if inverse { S::one() } else { S::one() / S::from_usize(n).unwrap() };
    (0..n).map(|j| Mat2::new(cols[0][j], cols[1][j], cols[2][j], cols[3][j]).scale_re(scale)).collect()
}

fn fourier<S: Real>(samples: &[Mat2<S>]) -> Vec<Mat2<S>> {
    fft_entries(samples, false)
}

fn synthesize<S: Real>(coeffs: &[Mat2<S>]) -> Vec<Mat2<S>> {
    fft_entries(coeffs, true)
}

fn signed(k: usize, n: usize) -> i64 {
    if k < n / 2 {
        k as i64
    } else {
        k as i64 - n as i64
    }
}

/// Largest `|n|` with `|c_n|` above `1e−15` of the peak, and the relative tail mass at `|n| ≥ N/4`.
fn bandwidth<S: Real>(c: &[Mat2<S>]) -> (usize, S) {
    let n = c.len();
    let peak = c.iter().fold(S::zero(), |m, x| m.max(x.max_abs())).max(S::min_positive_value());
    let mut band = 0;
    let mut tail = S::zero();
    for (k, x) in c.iter().enumerate() {
        let s = signed(k, n).unsigned_abs() as usize;
        let mag = x.max_abs() / peak;
        if mag > S::lit(1e-15) {
            band = band.max(s);
        }
        if s >= n / 4 {
            tail = tail.max(mag);
        }
    }
    (band, tail)
}

fn check_resolution<S: Real>(c: &[Mat2<S>], op: &'static str) -> Result<usize> {
    let (band, tail) = bandwidth(c);
    if tail > S::lit(1e-10) {
        return Err(Error::Resolution { op, msg: format!("Fourier tail {} above 1e-10 with N = {}", tail, c.len()) });
    }
    Ok(band)
}

fn section_size(band: usize, n: usize) -> usize {
    (2 * band + 8).clamp(4, n / 4)
}

/// Which splitting produced a [`FactorPair`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FactorKind {
    Iwasawa,
    Birkhoff,
}

/// `Φ = F·B` sampled on the circle.
#[derive(Clone, Debug, PartialEq)]
pub struct FactorPair<S: Real> {
    pub kind: FactorKind,
    pub f: CircleLoop<S>,
    pub b: CircleLoop<S>,
    /// `B(0)` for Iwasawa, `B(∞)` for Birkhoff: upper triangular with positive diagonal.
    pub distinguished: Mat2<S>,
    pub residual: S,
    /// Taylor coefficients in `λ/r` of `B` (Iwasawa) or `F` (Birkhoff).
    inner: Vec<Mat2<S>>,
}

impl<S: Real> FactorPair<S> {
    fn inner_at(&self, lambda: Cx<S>) -> Result<Mat2<S>> {
        let r = self.f.r;
        let mu = lambda / r;
        if mu.norm() > S::one() + S::lit(1e-9) {
            return Err(Error::Domain { op: "factorize::FactorPair", msg: format!("λ = {lambda} outside the disk of radius {r}") });
        }
        Ok(self.inner.iter().rev().fold(Mat2::zero(), |acc, c| acc * mu + *c))
    }

    /// The holomorphic-inside factor at `|λ| ≤ r`.
    pub fn b_inside(&self, lambda: Cx<S>) -> Result<Mat2<S>> {
        match self.kind {
            FactorKind::Iwasawa => self.inner_at(lambda),
            FactorKind::Birkhoff => Err(Error::Invalid { op: "factorize::FactorPair::b_inside", msg: "B is holomorphic outside".into() }),
        }
    }

    /// `F` at `|λ| ≤ r`; Iwasawa needs the value of the original loop there.
    pub fn frame_inside(&self, lambda: Cx<S>, phi: &Mat2<S>) -> Result<Mat2<S>> {
        match self.kind {
            FactorKind::Iwasawa => Ok(*phi * self.inner_at(lambda)?.inverse().ok_or_else(|| singular("frame_inside"))?),
            FactorKind::Birkhoff => self.inner_at(lambda),
        }
    }
}

fn singular(op: &str) -> Error {
    Error::Factorization { op: "factorize", msg: format!("{op}: singular factor") }
}

/// Classical Iwasawa splitting `g = u·b` of `SL(2,ℂ)` with `u ∈ SU(2)` and
/// `b = [[ρ, c],[0, ρ⁻¹]]`, `ρ > 0` (QR by Gram–Schmidt on the columns).
pub fn iwasawa_sl2<S: Real>(g: &Mat2<S>) -> Result<(Mat2<S>, Mat2<S>)> {
    let rho = (g.a.norm_sqr() + g.c.norm_sqr()).sqrt();
    if !(rho > S::zero()) {
        return Err(singular("iwasawa_sl2"));
    }
    let (q1a, q1c) = (g.a / rho, g.c / rho);
    let c = q1a.conj() * g.b + q1c.conj() * g.d;
    let (ra, rc) = (g.b - c * q1a, g.d - c * q1c);
    let rho2 = (ra.norm_sqr() + rc.norm_sqr()).sqrt();
    if !(rho2 > S::zero()) {
        return Err(singular("iwasawa_sl2"));
    }
    let u = Mat2::new(q1a, ra / rho2, q1c, rc / rho2);
    let b = Mat2::new(re(rho), c, re(S::zero()), re(rho2));
    Ok((u, b))
}

/// r-Iwasawa decomposition by block-Toeplitz Cholesky of `h = Φ†Φ`.
pub fn r_iwasawa<S: Real>(phi: &CircleLoop<S>) -> Result<FactorPair<S>> {
    const OP: &str = "factorize::r_iwasawa";
    let n = phi.len();
    check_resolution(&phi.fourier(), OP)?;
    let h: Vec<Mat2<S>> = phi.samples.iter().map(|m| m.adjoint() * *m).collect();
    let hc = fourier(&h);
    let (band, _) = bandwidth(&hc);
    let m = section_size(band, n);
    let hk = |k: i64| hc[k.rem_euclid(n as i64) as usize];
    let mut t = DenseMatrix::zeros(2 * m);
    for i in 0..m {
        for j in 0..m {
            let e = hk(j as i64 - i as i64).entries();
            for a in 0..2 {
                for b in 0..2 {
                    t.set(2 * i + a, 2 * j + b, e[2 * a + b]);
                }
            }
        }
    }
    let l = t.cholesky().map_err(|e| Error::Factorization { op: OP, msg: e.to_string() })?;
    let last = 2 * (m - 1);
    let coeffs: Vec<Mat2<S>> = (0..m)
        .map(|k| {
            let row = 2 * (m - 1 - k);
            let at = |a: usize, b: usize| l.get(last + b, row + a).conj();
            Mat2::new(at(0, 0), at(0, 1), at(1, 0), at(1, 1))
        })
        .collect();
    let mut padded = vec![Mat2::zero(); n];
    padded[..m].copy_from_slice(&coeffs);
    let b_samples = synthesize(&padded);
    let mut f_samples = Vec::with_capacity(n);
    let mut residual = S::zero();
    for (p, b) in phi.samples.iter().zip(&b_samples) {
        let f = *p * b.inverse().ok_or_else(|| singular(OP))?;
        residual = residual.max((f.adjoint() * f - Mat2::identity()).max_abs()).max((f * *b - *p).max_abs());
        f_samples.push(f);
    }
    if !residual.is_finite() {
        return Err(Error::Factorization { op: OP, msg: "non-finite factors".into() });
    }
    Ok(FactorPair {
        kind: FactorKind::Iwasawa,
        f: CircleLoop { r: phi.r, samples: f_samples },
        b: CircleLoop { r: phi.r, samples: b_samples },
        distinguished: coeffs[0],
        residual,
        inner: coeffs,
    })
}

/// Modified Birkhoff decomposition: `Φ = g₊g₋` from the finite-section Toeplitz system, then
/// `g₊(0) = u·b`, `F = g₊b⁻¹`, `B = b·g₋`.
pub fn modified_birkhoff<S: Real>(phi: &CircleLoop<S>) -> Result<FactorPair<S>> {
    const OP: &str = "factorize::modified_birkhoff";
    let n = phi.len();
    let c = phi.fourier();
    let band = check_resolution(&c, OP)?;
    let k = section_size(band, n);
    let ck = |i: i64| c[i.rem_euclid(n as i64) as usize];
    // Unknowns x_1..x_K of g₋⁻¹ = 1 + Σ x_k μ^{−k}; equations kill the modes μ^{−1}..μ^{−K} of Φ·g₋⁻¹.
    let mut a = DenseMatrix::zeros(2 * k);
    let mut rhs = vec![re(S::zero()); 4 * k];
    for mrow in 1..=k {
        for kcol in 1..=k {
            let e = ck(kcol as i64 - mrow as i64).entries();
            for p in 0..2 {
                for q in 0..2 {
                    a.set(2 * (mrow - 1) + p, 2 * (kcol - 1) + q, e[2 * p + q]);
                }
            }
        }
        let e = ck(-(mrow as i64)).entries();
        for p in 0..2 {
            for col in 0..2 {
                rhs[col * 2 * k + 2 * (mrow - 1) + p] = -e[2 * p + col];
            }
        }
    }
    let (x, ratio) = a.solve(&rhs, 2).map_err(|e| Error::BigCell { op: OP, msg: e.to_string() })?;
    if ratio < S::lit(1e-10) {
        return Err(Error::BigCell { op: OP, msg: format!("finite section is rank deficient (pivot ratio {ratio})") });
    }
    let xk = |i: usize| {
        let at = |p: usize, col: usize| x[col * 2 * k + 2 * (i - 1) + p];
        Mat2::new(at(0, 0), at(0, 1), at(1, 0), at(1, 1))
    };
    let mut xc = vec![Mat2::zero(); n];
    xc[0] = Mat2::identity();
    for i in 1..=k {
        xc[n - i] = xk(i);
    }
    let xs = synthesize(&xc);
    let mut gp = Vec::with_capacity(n);
    let mut gm = Vec::with_capacity(n);
    for (p, xj) in phi.samples.iter().zip(&xs) {
        let inv = xj.inverse().filter(|m| m.is_finite()).ok_or_else(|| Error::BigCell { op: OP, msg: "g₋ not invertible".into() })?;
        gp.push(*p * *xj);
        gm.push(inv);
    }
    let gpc = fourier(&gp);
    let (_, b) = iwasawa_sl2(&gpc[0]).map_err(|_| Error::BigCell { op: OP, msg: "g₊(0) is singular".into() })?;
    let binv = b.inverse().ok_or_else(|| singular(OP))?;
    let f_samples: Vec<Mat2<S>> = gp.iter().map(|g| *g * binv).collect();
    let b_samples: Vec<Mat2<S>> = gm.iter().map(|g| b * *g).collect();
    let peak = gpc.iter().fold(S::zero(), |m, x| m.max(x.max_abs()));
    let leak = gpc.iter().enumerate().filter(|(i, _)| signed(*i, n) < 0).fold(S::zero(), |m, (_, x)| m.max(x.max_abs()));
    let mut residual = leak / peak;
    for ((f, bb), p) in f_samples.iter().zip(&b_samples).zip(&phi.samples) {
        residual = residual.max((*f * *bb - *p).max_abs());
    }
    if !residual.is_finite() {
        return Err(Error::BigCell { op: OP, msg: "non-finite factors".into() });
    }
    let inner: Vec<Mat2<S>> = (0..n / 2).map(|i| gpc[i] * binv).collect();
    Ok(FactorPair {
        kind: FactorKind::Birkhoff,
        f: CircleLoop { r: phi.r, samples: f_samples },
        b: CircleLoop { r: phi.r, samples: b_samples },
        distinguished: b,
        residual,
        inner,
    })
}

/// Sample counts tried by the Symes pipelines.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SymesOptions {
    pub n: usize,
    pub n_max: usize,
}

impl Default for SymesOptions {
    fn default() -> Self {
        Self { n: 256, n_max: 2048 }
    }
}

/// Factorizes `exp(dz·ζ)` on the circle, doubling the sample count while the loop is
/// under-resolved.
fn factor_exp<S: Real>(
    zeta: &MatLaurent<S>,
    dz: Cx<S>,
    r: S,
    opts: SymesOptions,
    factor: fn(&CircleLoop<S>) -> Result<FactorPair<S>>,
) -> Result<FactorPair<S>> {
    let mut n = opts.n;
    loop {
        let phi = CircleLoop::from_fn(r, n, |l| expm_sl2(&zeta.eval(l).expect("λ on a circle of positive radius").scale(dz)))?;
        match factor(&phi) {
            Err(Error::Resolution { .. }) if n < opts.n_max => n *= 2,
            other => return other,
        }
    }
}

/// Frames from Symes' method with the `B`-side data needed for the conformal factor.
#[derive(Clone, Debug)]
pub struct SymesFrames<S: Real> {
    pub frames: FrameGrid<S>,
    /// `ρ` of the distinguished value `[[ρ, c],[0, ρ⁻¹]]` at every node.
    pub rho: Vec<S>,
    pub residual: S,
}

impl<S: Real> SymesFrames<S> {
    /// `ω(z) = ω(z₀) + 4 ln ρ(z)`, read off from `ξ = BζB⁻¹` at the leading coefficient.
    pub fn conformal_factor(&self, omega0: S) -> Vec<S> {
        self.rho.iter().map(|r| omega0 + S::lit(4.0) * r.ln()).collect()
    }
}

fn node_failure(e: Error, node: usize) -> Error {
    match e {
        Error::BigCell { op, msg } => Error::BigCell { op, msg: format!("node {node}: {msg}") },
        Error::Factorization { op, msg } => Error::Factorization { op, msg: format!("node {node}: {msg}") },
        Error::Resolution { op, msg } => Error::Resolution { op, msg: format!("node {node}: {msg}") },
        other => other,
    }
}

fn collect<S: Real>(grid: &ZGrid<S>, lambdas: &[Cx<S>], per_node: Vec<(Vec<Mat2<S>>, S, S)>) -> SymesFrames<S> {
    let residual = per_node.iter().fold(S::zero(), |m, p| m.max(p.2));
    let rho = per_node.iter().map(|p| p.1).collect();
    let frames = per_node.into_iter().map(|p| p.0).collect();
    SymesFrames { frames: FrameGrid { grid: *grid, lambdas: lambdas.to_vec(), frames, det_drift: S::zero() }, rho, residual }
}

/// Per-node r-Iwasawa of `exp((z − z₀)ζ)`, with frames evaluated at `lambdas` (`|λ| ≤ r`).
pub fn symes_cmc<S: Real>(zeta: &CmcPotential<S>, grid: &ZGrid<S>, r: S, lambdas: &[Cx<S>], opts: SymesOptions) -> Result<SymesFrames<S>> {
    let l = zeta.laurent();
    let per_node = (0..grid.len())
        .into_par_iter()
        .map(|node| {
            let dz = grid.point(node % grid.nx, node / grid.nx) - grid.origin;
            let pair = factor_exp(&l, dz, r, opts, r_iwasawa).map_err(|e| node_failure(e, node))?;
            let frames = lambdas
                .iter()
                .map(|lam| pair.frame_inside(*lam, &expm_sl2(&l.eval(*lam)?.scale(dz))))
                .collect::<Result<Vec<_>>>()?;
            Ok((frames, pair.distinguished.a.re, pair.residual))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(collect(grid, lambdas, per_node))
}

/// Per-node modified Birkhoff of `exp((z − z₀)ζ)` on the unit circle, frames at `|λ| ≤ 1`.
pub fn symes_kdv<S: Real>(zeta: &KdvPotential<S>, grid: &ZGrid<S>, lambdas: &[Cx<S>], opts: SymesOptions) -> Result<SymesFrames<S>> {
    let l = zeta.laurent();
    let per_node = (0..grid.len())
        .into_par_iter()
        .map(|node| {
            let dz = grid.point(node % grid.nx, node / grid.nx) - grid.origin;
            kdv_frame_at(&l, dz, lambdas, opts).map_err(|e| node_failure(e, node))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(collect(grid, lambdas, per_node))
}

fn kdv_frame_at<S: Real>(l: &MatLaurent<S>, dz: Cx<S>, lambdas: &[Cx<S>], opts: SymesOptions) -> Result<(Vec<Mat2<S>>, S, S)> {
    let pair = factor_exp(l, dz, S::one(), opts, modified_birkhoff)?;
    let frames = lambdas.iter().map(|lam| pair.frame_inside(*lam, &Mat2::identity())).collect::<Result<Vec<_>>>()?;
    Ok((frames, pair.distinguished.a.re, pair.residual))
}

/// Companion field for the minimal Sym formula built from factorization frames alone:
/// `f = ∫ FβF⁻¹` at `λ = 0` by Simpson's rule along the grid sweep (the frame is
/// refactorized at each step midpoint) and `G = f·F`. Also returns `ω` per node.
pub fn symes_companion_kdv<S: Real>(zeta: &KdvPotential<S>, grid: &ZGrid<S>, phi: S, opts: SymesOptions) -> Result<(CompanionField<S>, Vec<S>)> {
    let l = zeta.laurent();
    let omega0 = zeta.conformal_factor();
    let zero = [re(S::zero())];
    let ph = Complex::from_polar(S::one(), -phi);
    let tangent = |dz: Cx<S>, w: Cx<S>| -> Result<(Mat2<S>, Mat2<S>, S)> {
        let (f, rho, _) = kdv_frame_at(&l, dz, &zero, opts)?;
        let omega = omega0 + S::lit(4.0) * rho.ln();
        let hi = Complex::new(S::zero(), S::lit(0.5) * (omega / S::lit(2.0)).exp());
        let beta = Mat2::new(re(S::zero()), hi * ph * w, hi * ph.conj() * w.conj(), re(S::zero()));
        let f = f[0];
        Ok((f * beta * f.inverse().ok_or_else(|| singular("symes_companion_kdv"))?, f, omega))
    };
    let steps = sweep(grid, PathOrder::YThenX);
    let per_step = steps
        .par_iter()
        .map(|s| {
            let z0 = grid.point(s.from % grid.nx, s.from / grid.nx) - grid.origin;
            let (a, _, _) = tangent(z0, s.dz)?;
            let (m, _, _) = tangent(z0 + s.dz * S::lit(0.5), s.dz)?;
            let (b, frame, omega) = tangent(z0 + s.dz, s.dz)?;
            Ok(((a + m.scale_re(S::lit(4.0)) + b).scale_re(S::one() / S::lit(6.0)), frame, omega))
        })
        .collect::<Result<Vec<_>>>()?;
    let n = grid.len();
    let mut f = vec![Mat2::zero(); n];
    let mut frames = vec![Mat2::identity(); n];
    let mut omega = vec![omega0; n];
    for (s, (inc, frame, om)) in steps.iter().zip(per_step) {
        f[s.to] = f[s.from] + inc;
        frames[s.to] = frame;
        omega[s.to] = om;
    }
    let values = f.iter().zip(&frames).map(|(p, fr)| *p * *fr).collect();
    Ok((CompanionField { grid: *grid, lambda: re(S::zero()), frames, values }, omega))
}
