use cmcflow::factorize::*;
use cmcflow::loopalg::{expm_sl2, Mat2, MatLaurent};
use cmcflow::potential::{CmcPotential, KdvPotential};
use cmcflow::scalar::c64;
use cmcflow::spectral::potential_from_divisor;
use cmcflow::zeroflow::*;
use cmcflow::Error;
use num_complex::Complex64;

fn genus_one() -> CmcPotential<f64> {
    potential_from_divisor(1.0, c64(0.5, 0.0), &[c64(-0.4, 0.0)], &[c64(0.0, 0.2)]).unwrap()
}

fn circle(n: usize, r: f64) -> Vec<Complex64> {
    (0..n).map(|k| Complex64::from_polar(r, 2.0 * std::f64::consts::PI * k as f64 / n as f64)).collect()
}

fn exp_loop(l: &MatLaurent<f64>, z: Complex64, r: f64, n: usize) -> CircleLoop<f64> {
    CircleLoop::from_fn(r, n, |lam| expm_sl2(&l.eval(lam).unwrap().scale(z))).unwrap()
}

fn fine() -> FlowOptions<f64> {
    FlowOptions { substeps: 8, ..FlowOptions::default() }
}

fn max_frame_gap(a: &FrameGrid<f64>, b: &FrameGrid<f64>) -> f64 {
    let mut gap: f64 = 0.0;
    for (fa, fb) in a.frames.iter().zip(&b.frames) {
        for (x, y) in fa.iter().zip(fb) {
            gap = gap.max((*x - *y).max_abs());
        }
    }
    gap
}

#[test]
fn accepted_factorizations_reconstruct_and_are_unitary() {
    let cmc = genus_one().laurent();
    let kdv = KdvPotential::helicoid(0.3, -0.25).laurent();
    for z in [c64(0.3, 0.1), c64(-0.2, 0.45)] {
        let phi = exp_loop(&cmc, z, 1.0, 256);
        let p = r_iwasawa(&phi).unwrap();
        assert!(p.residual < 1e-8, "{}", p.residual);
        for f in p.f.samples() {
            assert!((f.adjoint() * *f - Mat2::identity()).max_abs() <= 1e-8);
        }
        let b0 = p.distinguished;
        assert!(b0.c.norm() < 1e-12 && b0.a.im.abs() < 1e-12 && b0.a.re > 0.0 && b0.d.re > 0.0);

        let phi = exp_loop(&kdv, z, 1.0, 256);
        let p = modified_birkhoff(&phi).unwrap();
        assert!(p.residual < 1e-8, "{}", p.residual);
        let f0 = p.frame_inside(c64(0.0, 0.0), &Mat2::identity()).unwrap();
        assert!((f0.adjoint() * f0 - Mat2::identity()).max_abs() <= 1e-8);
        let binf = p.distinguished;
        assert!(binf.c.norm() < 1e-12 && binf.a.re > 0.0 && binf.d.re > 0.0);
    }
}

#[test]
fn factorizations_are_idempotent() {
    let phi = exp_loop(&genus_one().laurent(), c64(0.35, -0.2), 1.0, 256);
    let p = r_iwasawa(&phi).unwrap();
    let again = r_iwasawa(&p.f).unwrap();
    assert!(again.f.max_distance(&p.f) <= 1e-9);
    assert!(again.b.samples().iter().all(|b| (*b - Mat2::identity()).max_abs() <= 1e-9));

    let phi = exp_loop(&KdvPotential::helicoid(-0.4, -0.25).laurent(), c64(0.2, 0.3), 1.0, 256);
    let p = modified_birkhoff(&phi).unwrap();
    let again = modified_birkhoff(&p.f).unwrap();
    assert!(again.f.max_distance(&p.f) <= 1e-9);
    assert!(again.b.samples().iter().all(|b| (*b - Mat2::identity()).max_abs() <= 1e-9));
}

#[test]
fn iwasawa_respects_the_radius() {
    let phi = exp_loop(&genus_one().laurent(), c64(0.25, 0.25), 0.6, 256);
    let p = r_iwasawa(&phi).unwrap();
    assert!(p.residual < 1e-8);
    assert!(p.b_inside(c64(0.3, 0.3)).is_ok());
    assert!(p.b_inside(c64(0.7, 0.0)).is_err());
}

#[test]
fn cmc_symes_frames_match_the_ode_frames() {
    let lambdas = circle(16, 1.0);
    let grid = ZGrid::centered(c64(0.0, 0.0), 9, 9, 0.08, 0.08).unwrap();
    for z0 in [CmcPotential::vacuum(1.0, 0.5), genus_one()] {
        let field = integrate_pkf(&z0, &grid, fine()).unwrap();
        let ode = integrate_frame(&field, &lambdas).unwrap();
        let symes = symes_cmc(&z0, &grid, 1.0, &lambdas, SymesOptions::default()).unwrap();
        assert!(symes.residual < 1e-8);
        let gap = max_frame_gap(&ode, &symes.frames);
        assert!(gap <= 1e-6, "frame gap {gap}");
        let omega = symes.conformal_factor(z0.conformal_factor());
        for (w, xi) in omega.iter().zip(&field.values) {
            assert!((w - xi.conformal_factor()).abs() <= 1e-6);
        }
    }
}

#[test]
fn cmc_symes_on_a_smaller_circle_matches_the_rescaled_frame() {
    let z0 = genus_one();
    let r: f64 = 0.8;
    let scaled = CmcPotential::from_laurent(1, z0.mean_curvature(), &z0.laurent().map(|k, c| c.scale_re(r.powi(-k))));
    let grid = ZGrid::centered(c64(0.0, 0.0), 5, 5, 0.1, 0.1).unwrap();
    let ode = integrate_frame(&integrate_pkf(&z0, &grid, fine()).unwrap(), &circle(8, 0.5)).unwrap();
    let symes = symes_cmc(&scaled, &grid, r, &circle(8, 0.5 * r), SymesOptions::default()).unwrap();
    let gap = max_frame_gap(&ode, &symes.frames);
    assert!(gap <= 1e-6, "frame gap {gap}");
}

#[test]
fn kdv_symes_frames_match_the_ode_frames() {
    let z0 = KdvPotential::helicoid(0.0, -0.25);
    let mut lambdas = circle(16, 1.0);
    lambdas.push(c64(0.0, 0.0));
    let grid = ZGrid::centered(c64(0.0, 0.0), 9, 9, 0.08, 0.08).unwrap();
    let field = integrate_pkf(&z0, &grid, fine()).unwrap();
    let ode = integrate_frame(&field, &lambdas).unwrap();
    let symes = symes_kdv(&z0, &grid, &lambdas, SymesOptions::default()).unwrap();
    let gap = max_frame_gap(&ode, &symes.frames);
    assert!(gap <= 1e-6, "frame gap {gap}");
    let omega = symes.conformal_factor(z0.conformal_factor());
    for (w, xi) in omega.iter().zip(&field.values) {
        assert!((w - xi.conformal_factor()).abs() <= 1e-6);
    }
}

#[test]
fn birkhoff_at_a_single_point_matches_transport() {
    let z0 = KdvPotential::helicoid(0.0, -0.25);
    let lambdas = [c64(0.0, 0.0), c64(0.6, -0.8), c64(0.0, 0.5)];
    let t = c64(0.3, 0.0);
    let (_, ode) = transport(&z0, t, &lambdas, 400).unwrap();
    let p = modified_birkhoff(&exp_loop(&z0.laurent(), t, 1.0, 256)).unwrap();
    for (l, f) in lambdas.iter().zip(&ode) {
        assert!((p.frame_inside(*l, &Mat2::identity()).unwrap() - *f).max_abs() <= 1e-6);
    }
}

#[test]
fn leaving_the_big_cell_is_reported() {
    let nil_lo = Mat2::new(c64(0.0, 0.0), c64(1.0, 0.0), c64(0.0, 0.0), c64(0.0, 0.0));
    let nil_hi = Mat2::new(c64(0.0, 0.0), c64(0.0, 0.0), c64(-1.0, 0.0), c64(0.0, 0.0));
    let l = MatLaurent::new(-1, vec![nil_lo, Mat2::zero(), nil_hi]);
    // exp(sζ) = cos s + sin s·ζ reaches the Weyl element [[0, λ⁻¹],[−λ, 0]] at s = π/2.
    let quarter = std::f64::consts::FRAC_PI_4;
    for s in [0.0, 0.5, 1.0, 1.3] {
        let p = modified_birkhoff(&exp_loop(&l, c64(s, 0.0), 1.0, 64)).unwrap();
        assert!(p.residual < 1e-10);
    }
    assert!(matches!(modified_birkhoff(&exp_loop(&l, c64(2.0 * quarter, 0.0), 1.0, 64)), Err(Error::BigCell { .. })));
    let zeta = KdvPotential::from_laurent(1, &l);
    let grid = ZGrid::new(c64(0.0, 0.0), 3, 2, quarter, 0.01).unwrap();
    match symes_kdv(&zeta, &grid, &[c64(0.0, 0.0)], SymesOptions::default()) {
        Err(Error::BigCell { msg, .. }) => assert!(msg.contains("node 2"), "{msg}"),
        other => panic!("expected a big-cell failure, got {other:?}"),
    }
}

#[test]
fn symes_identity_at_the_base_point() {
    let grid = ZGrid::centered(c64(0.0, 0.0), 3, 3, 0.1, 0.1).unwrap();
    let lambdas = circle(4, 1.0);
    let s = symes_cmc(&genus_one(), &grid, 1.0, &lambdas, SymesOptions::default()).unwrap();
    let k = grid.base_index();
    assert!(s.frames.frames[k].iter().all(|f| (*f - Mat2::identity()).max_abs() < 1e-12));
    let s = symes_kdv(&KdvPotential::helicoid(0.2, -0.25), &grid, &lambdas, SymesOptions::default()).unwrap();
    assert!(s.frames.frames[k].iter().all(|f| (*f - Mat2::identity()).max_abs() < 1e-12));
}
