//! Sym–Bobenko reconstruction, the `𝔰𝔲(2) ↔ ℝ³` dictionary, finite-difference geometry
//! diagnostics, the helicoid reference, rigid alignment and mesh export.

use crate::error::{Error, Result};
use crate::loopalg::Mat2;
use crate::scalar::{Cx, Real};
use crate::factorize::{symes_companion_kdv, SymesOptions};
use crate::potential::{CmcPotential, KdvPotential};
use crate::zeroflow::{integrate_companion_cmc, integrate_companion_kdv, integrate_frame, integrate_pkf, CompanionField, FlowOptions, ZGrid};
use num_complex::Complex;
use rayon::prelude::*;
use std::io::Write;
use std::path::Path;

pub type R3<S> = [S; 3];

/// `(x₁, x₂, x₃) ↦ (i/2)[[x₃, x₁ + ix₂],[x₁ − ix₂, −x₃]]`.
pub fn r3_to_su2<S: Real>(v: &R3<S>) -> Mat2<S> {
    let h = S::lit(0.5);
    let i = Complex::new(S::zero(), h);
    Mat2::new(i * v[2], i * Complex::new(v[0], v[1]), i * Complex::new(v[0], -v[1]), -i * v[2])
}

/// Inverse of [`r3_to_su2`] on anti-Hermitian trace-free matrices; other components are dropped.
pub fn su2_to_r3<S: Real>(x: &Mat2<S>) -> R3<S> {
    let two = S::lit(2.0);
    let a = (x.a - x.d) / two;
    let b = (x.b - x.c.conj()) / two;
    [two * b.im, -two * b.re, two * a.im]
}

/// `⟨X, Y⟩ = −2 tr(XY)`.
pub fn su2_inner<S: Real>(x: &Mat2<S>, y: &Mat2<S>) -> Cx<S> {
    -(*x * *y).trace() * S::lit(2.0)
}

pub fn dot<S: Real>(a: &R3<S>, b: &R3<S>) -> S {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

pub fn cross<S: Real>(a: &R3<S>, b: &R3<S>) -> R3<S> {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

fn sub<S: Real>(a: &R3<S>, b: &R3<S>) -> R3<S> {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

fn lin<S: Real>(terms: &[(S, &R3<S>)]) -> R3<S> {
    let mut out = [S::zero(); 3];
    for (c, v) in terms {
        for k in 0..3 {
            out[k] += *c * v[k];
        }
    }
    out
}

fn normalized<S: Real>(v: R3<S>) -> R3<S> {
    let n = dot(&v, &v).sqrt();
    [v[0] / n, v[1] / n, v[2] / n]
}

/// Geometry measured at one node.
#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct NodeDiagnostics<S> {
    pub h: S,
    pub q: Cx<S>,
    /// `ln(2⟨f_z, f_z̄⟩)`.
    pub omega: S,
    pub defect: S,
    /// `max(|⟨N, f_x⟩|, |⟨N, f_y⟩|)`.
    pub normal_tangency: S,
}

/// Sampled immersion with per-node normals, stored conformal factor and measured geometry.
#[derive(Clone, Debug, PartialEq)]
pub struct ImmersionPatch<S: Real> {
    pub grid: ZGrid<S>,
    pub points: Vec<R3<S>>,
    pub normals: Vec<R3<S>>,
    pub omega: Vec<S>,
    pub diagnostics: Vec<NodeDiagnostics<S>>,
}

/// Derivative weights on `n` equally spaced nodes: central in the interior, one-sided
/// second order at the ends.
fn first_stencil(i: usize, n: usize) -> [(isize, f64); 3] {
    if i == 0 {
        [(0, -1.5), (1, 2.0), (2, -0.5)]
    } else if i + 1 == n {
        [(0, 1.5), (-1, -2.0), (-2, 0.5)]
    } else {
        [(-1, -0.5), (1, 0.5), (0, 0.0)]
    }
}

fn second_stencil(i: usize, n: usize) -> Vec<(isize, f64)> {
    if n < 4 {
        let c = i.clamp(1, n - 2) as isize - i as isize;
        return vec![(c - 1, 1.0), (c, -2.0), (c + 1, 1.0)];
    }
    if i == 0 {
        vec![(0, 2.0), (1, -5.0), (2, 4.0), (3, -1.0)]
    } else if i + 1 == n {
        vec![(0, 2.0), (-1, -5.0), (-2, 4.0), (-3, -1.0)]
    } else {
        vec![(-1, 1.0), (0, -2.0), (1, 1.0)]
    }
}

struct Derivatives<S: Real> {
    fx: R3<S>,
    fy: R3<S>,
    fxx: R3<S>,
    fyy: R3<S>,
    fxy: R3<S>,
}

fn derivatives<S: Real>(grid: &ZGrid<S>, p: &[R3<S>], i: usize, j: usize) -> Derivatives<S> {
    let (nx, ny) = (grid.nx, grid.ny);
    let at = |a: isize, b: isize| &p[grid.index((i as isize + a) as usize, (j as isize + b) as usize)];
    let lit = |x: f64| S::lit(x);
    let d1 = |dir: usize, off: isize| -> R3<S> {
        let (k, n, h) = if dir == 0 { (i, nx, grid.hx) } else { (j, ny, grid.hy) };
        let mut out = [S::zero(); 3];
        for (o, w) in first_stencil(k, n) {
            let v = if dir == 0 { at(o, off) } else { at(off, o) };
            for c in 0..3 {
                out[c] += lit(w) * v[c] / h;
            }
        }
        out
    };
    let d2 = |dir: usize| -> R3<S> {
        let (k, n, h) = if dir == 0 { (i, nx, grid.hx) } else { (j, ny, grid.hy) };
        let mut out = [S::zero(); 3];
        for (o, w) in second_stencil(k, n) {
            let v = if dir == 0 { at(o, 0) } else { at(0, o) };
            for c in 0..3 {
                out[c] += lit(w) * v[c] / (h * h);
            }
        }
        out
    };
    let mut fxy = [S::zero(); 3];
    for (o, w) in first_stencil(j, ny) {
        let gx = d1(0, o);
        for c in 0..3 {
            fxy[c] += lit(w) * gx[c] / grid.hy;
        }
    }
    Derivatives { fx: d1(0, 0), fy: d1(1, 0), fxx: d2(0), fyy: d2(1), fxy }
}

impl<S: Real> ImmersionPatch<S> {
    /// Patch with the given normals and stored conformal factor; diagnostics are measured.
    pub fn new(grid: ZGrid<S>, points: Vec<R3<S>>, normals: Vec<R3<S>>, omega: Vec<S>) -> Result<Self> {
        const OP: &str = "surface::ImmersionPatch";
        let n = grid.len();
        if points.len() != n || normals.len() != n || omega.len() != n {
            return Err(Error::Invalid { op: OP, msg: format!("expected {n} samples per field") });
        }
        if let Some(k) = normals.iter().position(|v| (dot(v, v).sqrt() - S::one()).abs() > S::lit(1e-9)) {
            return Err(Error::Invalid { op: OP, msg: format!("normal {k} is not unit length") });
        }
        let mut patch = Self { grid, points, normals, omega, diagnostics: Vec::new() };
        patch.diagnostics = patch.measure();
        Ok(patch)
    }

    /// Patch whose normal is `f_x × f_y / |f_x × f_y|` and whose stored `ω` is the measured one.
    pub fn from_points(grid: ZGrid<S>, points: Vec<R3<S>>) -> Result<Self> {
        let normals: Vec<R3<S>> = (0..grid.len())
            .map(|k| {
                let d = derivatives(&grid, &points, k % grid.nx, k / grid.nx);
                normalized(cross(&d.fx, &d.fy))
            })
            .collect();
        let mut patch = Self::new(grid, points, normals, vec![S::zero(); grid.len()])?;
        patch.omega = patch.diagnostics.iter().map(|d| d.omega).collect();
        Ok(patch)
    }

    fn measure(&self) -> Vec<NodeDiagnostics<S>> {
        let g = &self.grid;
        (0..g.len())
            .into_par_iter()
            .map(|k| {
                let d = derivatives(g, &self.points, k % g.nx, k / g.nx);
                let n = &self.normals[k];
                let (ex, ey, exy) = (dot(&d.fx, &d.fx), dot(&d.fy, &d.fy), dot(&d.fx, &d.fy));
                let quarter = S::lit(0.25);
                // ⟨f_z, f_z̄⟩ = ¼(|f_x|² + |f_y|²), f_zz̄ = ¼Δf, f_zz = ¼(f_xx − f_yy − 2i f_xy).
                let fzfzb = quarter * (ex + ey);
                let h = quarter * (dot(&d.fxx, n) + dot(&d.fyy, n)) / fzfzb;
                let q = Complex::new(dot(&d.fxx, n) - dot(&d.fyy, n), -S::lit(2.0) * dot(&d.fxy, n)) * quarter;
                NodeDiagnostics {
                    h,
                    q,
                    omega: (S::lit(2.0) * fzfzb).ln(),
                    defect: (ex - ey).abs() + exy.abs(),
                    normal_tangency: dot(n, &d.fx).abs().max(dot(n, &d.fy).abs()),
                }
            })
            .collect()
    }

    /// Indices of nodes at least `margin` away from the grid boundary.
    pub fn interior(&self, margin: usize) -> Vec<usize> {
        let g = &self.grid;
        (margin..g.ny.saturating_sub(margin))
            .flat_map(|j| (margin..g.nx.saturating_sub(margin)).map(move |i| g.index(i, j)))
            .collect()
    }

    /// Largest `|ω_measured − ω|` over all nodes.
    pub fn omega_error(&self) -> S {
        self.diagnostics.iter().zip(&self.omega).fold(S::zero(), |m, (d, w)| m.max((d.omega - *w).abs()))
    }

    /// Summary of a diagnostic quantity over all nodes.
    pub fn max_over(&self, f: impl Fn(&NodeDiagnostics<S>) -> S) -> S {
        self.diagnostics.iter().fold(S::zero(), |m, d| m.max(f(d)))
    }

    /// Writes vertices in row-major grid order, `vn` normals and quad faces.
    pub fn write_obj(&self, path: &Path) -> Result<()> {
        let mut out = String::new();
        for p in &self.points {
            out += &format!("v {} {} {}\n", p[0], p[1], p[2]);
        }
        for n in &self.normals {
            out += &format!("vn {} {} {}\n", n[0], n[1], n[2]);
        }
        let g = &self.grid;
        for j in 0..g.ny - 1 {
            for i in 0..g.nx - 1 {
                let v = [g.index(i, j), g.index(i + 1, j), g.index(i + 1, j + 1), g.index(i, j + 1)].map(|k| k + 1);
                out += &format!("f {0}//{0} {1}//{1} {2}//{2} {3}//{3}\n", v[0], v[1], v[2], v[3]);
            }
        }
        write_file(path, &out, "surface::write_obj")
    }

    /// CSV with columns `x, y, f1, f2, f3, omega, H_meas, ReQ_meas, ImQ_meas, defect`.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut out = String::from("x,y,f1,f2,f3,omega,H_meas,ReQ_meas,ImQ_meas,defect\n");
        let g = &self.grid;
        for k in 0..g.len() {
            let z = g.point(k % g.nx, k / g.nx);
            let (p, d) = (&self.points[k], &self.diagnostics[k]);
            out += &format!("{},{},{},{},{},{},{},{},{},{}\n", z.re, z.im, p[0], p[1], p[2], self.omega[k], d.h, d.q.re, d.q.im, d.defect);
        }
        write_file(path, &out, "surface::write_csv")
    }
}

fn write_file(path: &Path, contents: &str, op: &'static str) -> Result<()> {
    std::fs::File::create(path)
        .and_then(|mut f| f.write_all(contents.as_bytes()))
        .map_err(|e| Error::Io { op, msg: format!("{}: {e}", path.display()) })
}

fn normal_field<S: Real>(frames: &[Mat2<S>]) -> Result<Vec<R3<S>>> {
    let e3 = r3_to_su2(&[S::zero(), S::zero(), S::one()]);
    frames
        .iter()
        .map(|f| {
            let inv = f.inverse().ok_or(Error::Degenerate { op: "surface::normal", msg: "singular frame".into() })?;
            Ok(normalized(su2_to_r3(&(*f * e3 * inv))))
        })
        .collect()
}

/// `f = −(1/H)·iλ_s·G·F⁻¹` with `G = ∂F/∂λ` at the Sym point, `N = F (i/2)diag(1,−1) F⁻¹`.
pub fn sym_bobenko_cmc<S: Real>(field: &CompanionField<S>, h: S, omega: Vec<S>) -> Result<ImmersionPatch<S>> {
    const OP: &str = "surface::sym_bobenko_cmc";
    let l = field.lambda;
    if (l.norm() - S::one()).abs() > S::lit(1e-12) {
        return Err(Error::NonUnitSymPoint { op: OP, msg: format!("|λ_s| = {}", l.norm()) });
    }
    if h == S::zero() {
        return Err(Error::Invalid { op: OP, msg: "H must be non-zero".into() });
    }
    let c = -Complex::new(S::zero(), S::one()) * l / h;
    let points = field
        .values
        .iter()
        .zip(&field.frames)
        .map(|(g, f)| Ok(su2_to_r3(&(*g * f.inverse().ok_or(Error::Degenerate { op: OP, msg: "singular frame".into() })?).scale(c))))
        .collect::<Result<Vec<_>>>()?;
    ImmersionPatch::new(field.grid, points, normal_field(&field.frames)?, omega)
}

/// `f = G·F⁻¹` at `λ = 0`.
pub fn sym_bobenko_minimal<S: Real>(field: &CompanionField<S>, omega: Vec<S>) -> Result<ImmersionPatch<S>> {
    const OP: &str = "surface::sym_bobenko_minimal";
    if field.lambda.norm() > S::lit(1e-14) {
        return Err(Error::Invalid { op: OP, msg: format!("companion taken at λ = {} instead of 0", field.lambda) });
    }
    let points = field
        .values
        .iter()
        .zip(&field.frames)
        .map(|(g, f)| Ok(su2_to_r3(&(*g * f.inverse().ok_or(Error::Degenerate { op: OP, msg: "singular frame".into() })?))))
        .collect::<Result<Vec<_>>>()?;
    ImmersionPatch::new(field.grid, points, normal_field(&field.frames)?, omega)
}

/// `(sinh x cos y, sinh x sin y, y)`.
pub fn helicoid_reference<S: Real>(x: S, y: S) -> R3<S> {
    [x.sinh() * y.cos(), x.sinh() * y.sin(), y]
}

/// The helicoid sampled analytically on `grid`.
pub fn helicoid_patch<S: Real>(grid: &ZGrid<S>) -> Result<ImmersionPatch<S>> {
    let points = (0..grid.len())
        .map(|k| {
            let z = grid.point(k % grid.nx, k / grid.nx);
            helicoid_reference(z.re, z.im)
        })
        .collect();
    ImmersionPatch::from_points(*grid, points)
}

/// Least-squares rigid motion `x ↦ R x + t` carrying one point cloud onto another.
#[derive(Clone, Debug, PartialEq)]
pub struct Alignment {
    pub rotation: [[f64; 3]; 3],
    pub translation: [f64; 3],
    pub rms: f64,
    /// Whether `R` has determinant −1.
    pub reflected: bool,
}

impl Alignment {
    pub fn apply(&self, p: &[f64; 3]) -> [f64; 3] {
        let r = &self.rotation;
        std::array::from_fn(|i| r[i][0] * p[0] + r[i][1] * p[1] + r[i][2] * p[2] + self.translation[i])
    }
}

/// Orthogonal Procrustes fit of `a` onto `b` by SVD of the cross-covariance. An improper fit is
/// used only when `allow_reflection` is set and it is strictly better; it is then flagged.
pub fn rigid_align_points<S: Real>(a: &[R3<S>], b: &[R3<S>], allow_reflection: bool) -> Result<Alignment> {
    use nalgebra::{Matrix3, Vector3};
    const OP: &str = "surface::rigid_align";
    if a.len() != b.len() || a.is_empty() {
        return Err(Error::Invalid { op: OP, msg: format!("point counts {} and {} differ or are zero", a.len(), b.len()) });
    }
    let v = |p: &R3<S>| Vector3::new(p[0].to_f64_lossy(), p[1].to_f64_lossy(), p[2].to_f64_lossy());
    let n = a.len() as f64;
    let ca = a.iter().map(v).sum::<Vector3<f64>>() / n;
    let cb = b.iter().map(v).sum::<Vector3<f64>>() / n;
    let mut cov = Matrix3::zeros();
    let mut spread = Matrix3::zeros();
    for (p, q) in a.iter().zip(b) {
        let (pa, qb) = (v(p) - ca, v(q) - cb);
        cov += qb * pa.transpose();
        spread += pa * pa.transpose();
    }
    let sv = spread.symmetric_eigenvalues();
    let (lo, hi) = {
        let mut s = [sv[0], sv[1], sv[2]];
        s.sort_by(|x, y| x.total_cmp(y));
        (s[1], s[2])
    };
    if !(hi > 0.0) || lo <= 1e-12 * hi {
        return Err(Error::Degenerate { op: OP, msg: "point cloud spans fewer than two dimensions".into() });
    }
    let svd = cov.svd(true, true);
    let (u, vt) = (svd.u.unwrap(), svd.v_t.unwrap());
    let fit = |flip: bool| {
        let mut d = Matrix3::identity();
        if flip {
            d[(2, 2)] = -1.0;
        }
        let r = u * d * vt;
        let t = cb - r * ca;
        let sq: f64 = a.iter().zip(b).map(|(p, q)| (r * v(p) + t - v(q)).norm_squared()).sum();
        (r, t, (sq / n).sqrt())
    };
    let proper_flip = (u * vt).determinant() < 0.0;
    let (mut r, mut t, mut rms) = fit(proper_flip);
    if allow_reflection {
        let alt = fit(!proper_flip);
        if alt.2 < rms {
            (r, t, rms) = alt;
        }
    }
    Ok(Alignment {
        rotation: std::array::from_fn(|i| std::array::from_fn(|j| r[(i, j)])),
        translation: [t[0], t[1], t[2]],
        rms,
        reflected: r.determinant() < 0.0,
    })
}

/// Proper rigid alignment of `a` onto `b` (same grid shape).
pub fn rigid_align<S: Real>(a: &ImmersionPatch<S>, b: &ImmersionPatch<S>) -> Result<Alignment> {
    if (a.grid.nx, a.grid.ny) != (b.grid.nx, b.grid.ny) {
        return Err(Error::Invalid { op: "surface::rigid_align", msg: "grid shapes differ".into() });
    }
    rigid_align_points(&a.points, &b.points, false)
}

/// Geometry of the parallel surface at distance `1/H` on the side of the mean curvature vector.
#[derive(Clone, Debug, PartialEq)]
pub struct ParallelReport<S> {
    /// Largest deviation of `|p − f|` from `1/|H|`.
    pub distance_error: S,
    /// Mean of `|H|` measured on the parallel surface over interior nodes.
    pub mean_curvature: S,
    /// `|H_p|·e^{(ω_p + ω)/2}`: the curvature of the dual surface once the scale between the
    /// two metrics `e^{ω_p} = c²e^{−ω}` is undone.
    pub dual_curvature: S,
    /// `|Ȟ_measured − 2|Q||`.
    pub dual_error: S,
}

/// Builds `p = f + N/H` pointwise and measures its mean curvature and the dual curvature `Ȟ`.
pub fn parallel_surface_check<S: Real>(patch: &ImmersionPatch<S>, h: S, q: Cx<S>) -> Result<ParallelReport<S>> {
    let inv = S::one() / h;
    let points: Vec<R3<S>> = patch.points.iter().zip(&patch.normals).map(|(f, n)| lin(&[(S::one(), f), (inv, n)])).collect();
    let distance_error = points.iter().zip(&patch.points).fold(S::zero(), |m, (p, f)| {
        let d = sub(p, f);
        m.max((dot(&d, &d).sqrt() - inv.abs()).abs())
    });
    let par = ImmersionPatch::from_points(patch.grid, points)?;
    let idx = par.interior(1);
    let count = S::from_usize(idx.len().max(1)).unwrap();
    let half = S::lit(0.5);
    let mean_curvature = idx.iter().fold(S::zero(), |s, &k| s + par.diagnostics[k].h.abs()) / count;
    let dual_curvature = idx.iter().fold(S::zero(), |s, &k| {
        let (dp, d) = (&par.diagnostics[k], &patch.diagnostics[k]);
        s + dp.h.abs() * (half * (dp.omega + d.omega)).exp()
    }) / count;
    Ok(ParallelReport { distance_error, mean_curvature, dual_curvature, dual_error: (dual_curvature - S::lit(2.0) * q.norm()).abs() })
}

/// Maximum of `|a − b|` for complex-valued diagnostics over `nodes`.
pub fn max_complex_deviation<S: Real>(patch: &ImmersionPatch<S>, nodes: &[usize], f: impl Fn(&NodeDiagnostics<S>) -> Cx<S>, target: Cx<S>) -> S {
    nodes.iter().fold(S::zero(), |m, &k| m.max((f(&patch.diagnostics[k]) - target).norm()))
}

/// CMC immersion from the zero-curvature flow: potential field, frame and `λ`-derivative
/// companion at the Sym point, then the Sym–Bobenko formula.
pub fn cmc_surface<S: Real>(zeta: &CmcPotential<S>, grid: &ZGrid<S>, lambda_s: Cx<S>, opts: FlowOptions<S>) -> Result<ImmersionPatch<S>> {
    let field = integrate_pkf(zeta, grid, opts)?;
    let frames = integrate_frame(&field, &[lambda_s])?;
    let g = integrate_companion_cmc(&field, &frames, lambda_s)?;
    sym_bobenko_cmc(&g, zeta.mean_curvature(), field.values.iter().map(|v| v.conformal_factor()).collect())
}

/// Minimal immersion from the zero-curvature flow with rotation angle `φ`.
pub fn minimal_surface<S: Real>(zeta: &KdvPotential<S>, grid: &ZGrid<S>, phi: S, opts: FlowOptions<S>) -> Result<ImmersionPatch<S>> {
    let field = integrate_pkf(zeta, grid, opts)?;
    let frames = integrate_frame(&field, &[Cx::new(S::zero(), S::zero())])?;
    let g = integrate_companion_kdv(&field, &frames, phi)?;
    sym_bobenko_minimal(&g, field.values.iter().map(|v| v.conformal_factor()).collect())
}

/// Minimal immersion from modified Birkhoff factorizations of `exp((z − z₀)ζ)` alone.
pub fn minimal_surface_symes<S: Real>(zeta: &KdvPotential<S>, grid: &ZGrid<S>, phi: S, opts: SymesOptions) -> Result<ImmersionPatch<S>> {
    let (g, omega) = symes_companion_kdv(zeta, grid, phi, opts)?;
    sym_bobenko_minimal(&g, omega)
}
