use cmcflow::loopalg::{expm_sl2, Mat2, MatLaurent};
use cmcflow::potential::{CmcPotential, KdvPotential};
use cmcflow::scalar::c64;
use cmcflow::spectral::potential_from_divisor;
use cmcflow::zeroflow::*;
use num_complex::Complex64;

fn genus_one() -> CmcPotential<f64> {
    potential_from_divisor(1.0, c64(0.5, 0.0), &[c64(-0.4, 0.0)], &[c64(0.0, 0.2)]).unwrap()
}

fn genus_two() -> CmcPotential<f64> {
    let (b1, b2) = (c64(0.3, 0.2), c64(1.5, -1.0));
    potential_from_divisor(1.2, b1 * b2 * 0.4, &[b1, b2], &[c64(0.1, 0.3), c64(-0.1, 0.3)]).unwrap()
}

fn circle(n: usize) -> Vec<Complex64> {
    (0..n).map(|k| Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * k as f64 / n as f64)).collect()
}

#[test]
fn vacuum_field_is_constant() {
    let z0 = CmcPotential::vacuum(1.0, 0.5);
    let grid = ZGrid::centered(c64(0.0, 0.0), 9, 7, 0.1, 0.1).unwrap();
    let f = integrate_pkf_cmc(&z0, &grid).unwrap();
    assert!(f.values.iter().all(|v| v.distance(&z0) < 1e-14));
}

#[test]
fn field_is_isospectral_and_real_on_the_grid() {
    for z0 in [genus_one(), genus_two()] {
        let a0 = z0.spectral_poly().unwrap();
        let grid = ZGrid::centered(c64(0.0, 0.0), 11, 11, 0.02, 0.02).unwrap();
        let f = integrate_pkf_cmc(&z0, &grid).unwrap();
        assert_eq!(f.base_value(), &z0);
        for v in &f.values {
            assert!(v.spectral_poly().unwrap().distance(&a0) < 1e-8);
            assert!(v.validate(1e-9).all_pass());
        }
    }
}

#[test]
fn rk4_converges_with_order_four() {
    let z0 = genus_two();
    let t = c64(0.4, 0.3);
    let l = [c64(0.6, 0.8)];
    let run = |n| transport(&z0, t, &l, n).unwrap();
    let (x1, f1) = run(10);
    let (x2, f2) = run(20);
    let (x3, f3) = run(40);
    let ex = x1.distance(&x2) / x2.distance(&x3);
    let ef = (f1[0] - f2[0]).max_abs() / (f2[0] - f3[0]).max_abs();
    for r in [ex, ef] {
        let order = r.log2();
        assert!((order - 4.0).abs() < 0.3, "order {order}");
    }
}

#[test]
fn frame_invariants_hold() {
    let z0 = genus_one();
    let grid = ZGrid::centered(c64(0.1, -0.2), 21, 21, 1e-2, 1e-2).unwrap();
    let mut lambdas = circle(4);
    lambdas.extend([c64(0.5, 0.2), c64(0.5, 0.2).conj().inv()]);
    let field = integrate_pkf_cmc(&z0, &grid).unwrap();
    let fr = integrate_frame(&field, &lambdas).unwrap();
    let (bi, bj) = grid.base;
    for k in 0..lambdas.len() {
        assert_eq!(fr.at(bi, bj, k), Mat2::identity());
    }
    for node in &fr.frames {
        for f in node {
            assert!((f.det() - c64(1.0, 0.0)).norm() < 1e-9);
        }
        let (f, g) = (node[4], node[5]);
        assert!((g - f.adjoint().inverse().unwrap()).max_abs() < 1e-8);
    }
    let opts = FlowOptions { order: PathOrder::XThenY, ..FlowOptions::default() };
    let other = integrate_frame(&integrate_pkf(&z0, &grid, opts).unwrap(), &lambdas).unwrap();
    for k in 0..lambdas.len() {
        assert!((fr.at(20, 20, k) - other.at(20, 20, k)).max_abs() < 1e-8);
        assert!((fr.at(0, 0, k) - other.at(0, 0, k)).max_abs() < 1e-8);
    }
    assert!(fr.det_drift < 1e-9);
}

#[test]
fn frame_parallelism_is_deterministic() {
    let z0 = genus_two();
    let grid = ZGrid::centered(c64(0.0, 0.0), 7, 7, 0.05, 0.05).unwrap();
    let field = integrate_pkf_cmc(&z0, &grid).unwrap();
    let lambdas = circle(8);
    let a = integrate_frame(&field, &lambdas).unwrap();
    let b = integrate_frame(&field, &lambdas).unwrap();
    let single = integrate_frame(&field, &lambdas[3..4]).unwrap();
    assert_eq!(a.frames, b.frames);
    for (n, node) in a.frames.iter().enumerate() {
        assert_eq!(node[3], single.frames[n][0]);
    }
}

#[test]
fn vacuum_frame_is_an_exponential() {
    let z0 = CmcPotential::vacuum(1.0, 0.5);
    let grid = ZGrid::new(c64(0.0, 0.0), 11, 11, 0.05, 0.05).unwrap();
    let opts = FlowOptions { substeps: 8, ..FlowOptions::default() };
    let field = integrate_pkf(&z0, &grid, opts).unwrap();
    let fr = integrate_frame(&field, &[c64(1.0, 0.0)]).unwrap();
    let a = z0.alpha();
    let (ux, uy) = (a.dx().eval(c64(1.0, 0.0)).unwrap(), a.dy().eval(c64(1.0, 0.0)).unwrap());
    assert!(ux.bracket(&uy).max_abs() < 1e-15);
    for j in 0..11 {
        for i in 0..11 {
            let p = grid.point(i, j);
            let e = expm_sl2(&(ux.scale_re(p.re) + uy.scale_re(p.im)));
            assert!((fr.at(i, j, 0) - e).max_abs() < 1e-10);
        }
    }
}

#[test]
fn companion_matches_lambda_derivative_of_frame() {
    let z0 = genus_one();
    let grid = ZGrid::centered(c64(0.0, 0.0), 9, 9, 0.05, 0.05).unwrap();
    let field = integrate_pkf_cmc(&z0, &grid).unwrap();
    let ls = c64(0.6, 0.8);
    let d = 1e-4;
    let fr = integrate_frame(&field, &[ls, ls + d, ls - d]).unwrap();
    let g = integrate_companion_cmc(&field, &fr, ls).unwrap();
    assert_eq!(g.values[grid.base_index()], Mat2::zero());
    for (n, node) in fr.frames.iter().enumerate() {
        let fd = (node[1] - node[2]).scale_re(1.0 / (2.0 * d));
        assert!((g.values[n] - fd).max_abs() < 1e-6);
        assert_eq!(g.frames[n], node[0]);
    }
    assert!(matches!(integrate_companion_cmc(&field, &fr, c64(1.1, 0.0)), Err(cmcflow::Error::NonUnitSymPoint { .. })));
}

fn invariant_direction(z: &CmcPotential<f64>) -> Complex64 {
    let l = z.laurent();
    let a = z.alpha();
    let dx = a.dx().bracket(&l);
    let dy = a.dy().bracket(&l);
    let flat = |m: &MatLaurent<f64>| -> Vec<f64> {
        (-1..=z.genus() as i32).flat_map(|k| m.coeff(k).entries()).flat_map(|c| [c.re, c.im]).collect()
    };
    let (x, y) = (flat(&dx), flat(&dy));
    let dot = |p: &[f64], q: &[f64]| p.iter().zip(q).map(|(a, b)| a * b).sum::<f64>();
    let (a11, a12, a22) = (dot(&x, &x), dot(&x, &y), dot(&y, &y));
    let theta = 0.5 * (2.0 * a12).atan2(a11 - a22) + std::f64::consts::FRAC_PI_2;
    Complex64::from_polar(1.0, theta)
}

#[test]
fn monodromy_identities() {
    let z0 = genus_one();
    let l = c64(0.5, 0.3);
    assert!((monodromy(&z0, c64(0.0, 0.0), l).unwrap() - Mat2::identity()).max_abs() < 1e-15);
    let t = c64(0.7, 0.4);
    let m = monodromy(&z0, t, l).unwrap();
    let mr = monodromy(&z0, t, l.conj().inv()).unwrap();
    assert!((mr - m.adjoint().inverse().unwrap()).max_abs() < 1e-8);

    let dir = invariant_direction(&z0);
    let (after, _) = transport(&z0, dir, &[], 400).unwrap();
    assert!(after.distance(&z0) < 1e-10, "direction does not leave the field invariant");
    let period = dir * 0.8;
    let z1 = c64(0.15, 0.25);
    let (xi1, f1) = transport(&z0, z1, &[l], 400).unwrap();
    let m0 = monodromy(&z0, period, l).unwrap();
    let m1 = monodromy(&xi1, period, l).unwrap();
    let f1 = f1[0];
    assert!((m1 - f1.inverse().unwrap() * m0 * f1).max_abs() < 1e-8);
}

#[test]
fn helicoid_field_matches_closed_form() {
    let x0 = -0.5;
    let grid = ZGrid::new(c64(x0, 0.0), 51, 5, 0.02, 0.05).unwrap();
    let field = integrate_pkf_kdv(&KdvPotential::helicoid(x0, -0.25), &grid).unwrap();
    let det0 = field.base_value().laurent().det();
    for j in 0..5 {
        for i in 0..51 {
            let z = field.at(i, j);
            let x = grid.point(i, j).re;
            assert!((z.conformal_factor() - 2.0 * x.cosh().ln()).abs() < 1e-6);
            assert!(z.distance(&KdvPotential::helicoid(x, -0.25)) < 1e-6);
            assert!(z.laurent().det().distance(&det0) < 1e-8);
        }
    }
}

#[test]
fn kdv_frame_is_unitary_at_zero() {
    let grid = ZGrid::centered(c64(0.0, 0.0), 9, 9, 0.05, 0.05).unwrap();
    let field = integrate_pkf_kdv(&KdvPotential::helicoid(0.0, -0.25), &grid).unwrap();
    let fr = integrate_frame(&field, &[c64(0.0, 0.0)]).unwrap();
    for node in &fr.frames {
        assert!((node[0] * node[0].adjoint() - Mat2::identity()).max_abs() < 1e-8);
    }
    let g = integrate_companion_kdv(&field, &fr, -std::f64::consts::FRAC_PI_2).unwrap();
    for (gv, f) in g.values.iter().zip(&fr.frames) {
        let sym = *gv * f[0].inverse().unwrap();
        assert!((sym + sym.adjoint()).max_abs() < 1e-8);
        assert!(sym.trace().norm() < 1e-8);
    }
}

#[test]
fn cmc_frame_rejects_zero_lambda() {
    let field = integrate_pkf_cmc(&genus_one(), &ZGrid::new(c64(0.0, 0.0), 3, 3, 0.1, 0.1).unwrap()).unwrap();
    assert!(integrate_frame(&field, &[c64(0.0, 0.0)]).is_err());
}

#[test]
fn ps_residuals_vanish_on_vacuum_and_converge_on_flows() {
    let grid = ZGrid::centered(c64(0.0, 0.0), 7, 7, 0.1, 0.1).unwrap();
    let vac = integrate_pkf_cmc(&CmcPotential::vacuum(1.0, 0.5), &grid).unwrap();
    assert!(ps_residuals_cmc(&vac, 1.0, c64(0.5, 0.0)).max() < 1e-10);

    let z0 = genus_one();
    let coarse = integrate_pkf_cmc(&z0, &ZGrid::centered(c64(0.0, 0.0), 21, 21, 1e-2, 1e-2).unwrap()).unwrap();
    let fine = integrate_pkf_cmc(&z0, &ZGrid::centered(c64(0.0, 0.0), 41, 41, 5e-3, 5e-3).unwrap()).unwrap();
    let q = z0.hopf();
    let rc = ps_residuals_cmc(&coarse, 1.0, q);
    let rf = ps_residuals_cmc(&fine, 1.0, q);
    assert!(rc.max() <= 5e-3, "{rc:?}");
    let ratio = rc.max() / rf.max();
    assert!((3.5..4.5).contains(&ratio), "ratio {ratio}");

    let hel = integrate_pkf_kdv(&KdvPotential::helicoid(0.3, -0.25), &ZGrid::centered(c64(0.3, 0.0), 21, 21, 1e-2, 1e-2).unwrap()).unwrap();
    let r = ps_residuals_kdv(&hel, hel.base_value().hopf());
    assert!(r.get("u_zbar").unwrap() <= 5e-3);
    assert!(r.max() <= 5e-3, "{r:?}");
}

#[test]
fn minimal_degree_witness_recovers_the_lower_field() {
    let vac = CmcPotential::vacuum(1.3, 0.7);
    let times = |p: [f64; 3]| {
        let l = vac.laurent() * MatLaurent::constant(Mat2::identity()).map(|_, m| m);
        let poly = cmcflow::ScalarLaurent::new(0, p.iter().map(|c| c64(*c, 0.0)).collect());
        let prod = MatLaurent::new(l.lo(), l.coeffs().to_vec()).map(|_, m| m);
        let mut acc = MatLaurent::zero();
        for k in 0..3 {
            acc = acc + prod.shift(k).scale(poly.coeff(k));
        }
        CmcPotential::from_laurent(2, 1.3, &acc)
    };
    let z1 = times([1.0, 0.3, 1.0]);
    let z2 = times([1.0, 0.9, 1.0]);
    assert!(z1.validate(1e-12).all_pass() && z2.validate(1e-12).all_pass());
    assert_eq!(minimal_degree_witness(&z1, &z1, 1e-12).unwrap(), DegreeVerdict::Identical);
    match minimal_degree_witness(&z1, &z2, 1e-12).unwrap() {
        DegreeVerdict::LowerDegree { level, u_level, sigma_level, witness, degree } => {
            assert_eq!(level, 0);
            assert!(degree < 2);
            assert!(u_level.norm() < 1e-14 && sigma_level.norm() < 1e-14);
            assert!(witness.distance(&vac.laurent()) < 1e-12);
            let top = witness.coeff(-1).b;
            assert!((top - c64(0.5 * 1.3 * (vac.conformal_factor() / 2.0).exp(), 0.0)).norm() < 1e-12);
        }
        v => panic!("unexpected {v:?}"),
    }
}
