//! End-to-end acceptance run. Prints one `PASS`/`FAIL` line per criterion with its measured
//! quantities and wall time, then a summary. Set `ACCEPTANCE_STRICT=1` to turn any failing
//! criterion into a non-zero exit status.

use cmcflow::blowup::{check_hypotheses, genus_one_sequence, helicoid_scenario, match_helicoid, run_blowup, BlowupOptions, HypothesisThresholds};
use cmcflow::factorize::{symes_cmc, SymesOptions};
use cmcflow::invariants::run_invariants;
use cmcflow::potential::{CmcPotential, KdvPotential};
use cmcflow::sample::random_potential;
use cmcflow::scalar::c64;
use cmcflow::spectral::{isospectral_step, isospectral_step_with, magic_bounds_check, potential_from_divisor, reconstruct_potential, spectral_data, SpectralData};
use cmcflow::surface::{cmc_surface, helicoid_patch, helicoid_reference, minimal_surface, minimal_surface_symes, rigid_align, rigid_align_points, ImmersionPatch};
use cmcflow::zeroflow::{integrate_frame, integrate_pkf, transport, FlowOptions, ZGrid};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::{FRAC_PI_2, PI};
use std::time::Instant;

type Outcome = Result<(bool, String), cmcflow::Error>;

fn circle(n: usize) -> Vec<Complex64> {
    (0..n).map(|k| Complex64::from_polar(1.0, 2.0 * PI * k as f64 / n as f64)).collect()
}

fn genus_one() -> CmcPotential<f64> {
    potential_from_divisor(1.0, c64(0.5, 0.0), &[c64(-0.4, 0.0)], &[c64(0.0, 0.2)]).unwrap()
}

fn substeps(n: usize) -> FlowOptions<f64> {
    FlowOptions { substeps: n, ..FlowOptions::default() }
}

fn helicoid_golden() -> Outcome {
    let grid = ZGrid::centered(c64(0.0, 0.0), 101, 101, 0.02, 2.0 * PI / 100.0)?;
    let zeta = KdvPotential::helicoid(0.0, -0.25);
    let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().expect("single-thread pool");
    let t = Instant::now();
    let (ode, symes) = pool.install(|| -> Result<_, cmcflow::Error> {
        Ok((minimal_surface(&zeta, &grid, -FRAC_PI_2, substeps(4))?, minimal_surface_symes(&zeta, &grid, -FRAC_PI_2, SymesOptions::default())?))
    })?;
    let secs = t.elapsed().as_secs_f64();
    let reference = helicoid_patch(&grid)?;
    let (a, b) = (rigid_align(&ode, &reference)?, rigid_align(&symes, &reference)?);
    let ok = a.rms <= 1e-5 && b.rms <= 1e-5 && !a.reflected && !b.reflected && secs <= 30.0;
    Ok((ok, format!("101x101 on [-1,1]x[-pi,pi]: rms flow {:.2e}, rms Symes {:.2e}, single-thread {secs:.1} s", a.rms, b.rms)))
}

fn helicoid_metric_and_hopf() -> Outcome {
    let zeta = KdvPotential::helicoid(0.3, -0.25);
    let err = |n: usize| -> Result<(f64, f64), cmcflow::Error> {
        let h = 0.4 / (n - 1) as f64;
        let grid = ZGrid::centered(c64(0.0, 0.0), n, n, h, h)?;
        let p = minimal_surface(&zeta, &grid, -FRAC_PI_2, substeps(4))?;
        let (mut eo, mut eq) = (0.0f64, 0.0f64);
        for (k, d) in p.diagnostics.iter().enumerate() {
            let x = 0.3 + grid.point(k % n, k / n).re;
            eo = eo.max((d.omega - 2.0 * x.cosh().ln()).abs());
            eq = eq.max((d.q - c64(0.0, 0.5)).norm());
        }
        Ok((eo, eq))
    };
    let (a, b, c) = (err(21)?, err(41)?, err(81)?);
    let order = |x: f64, y: f64| (x / y).log2();
    let orders = [order(a.0, b.0), order(b.0, c.0), order(a.1, b.1), order(b.1, c.1)];
    let ok = orders.iter().all(|o| (o - 2.0).abs() <= 0.3) && b.0 < 1e-3 && b.1 < 1e-3;
    Ok((ok, format!("omega err {:.2e} -> {:.2e} -> {:.2e}, Hopf err {:.2e} -> {:.2e} -> {:.2e}, orders {:.2?}", a.0, b.0, c.0, a.1, b.1, c.1, orders)))
}

fn isospectrality() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let (mut zdrift, mut tdrift) = (0.0f64, 0.0f64);
    for g in 1..=3 {
        let z0 = random_potential(&mut rng, g)?;
        let a0 = z0.spectral_poly()?;
        let dir = Complex64::from_polar(1.0, rng.gen_range(0.0..2.0 * PI));
        let (moved, _) = transport(&z0, dir * 10.0, &[], 10_000)?;
        zdrift = zdrift.max(moved.spectral_poly()?.distance(&a0));
        for power in [0, 1 - g as i32] {
            let mut z = z0.clone();
            for _ in 0..10_000 {
                z = isospectral_step_with(&z, power, c64(0.6, 0.8), 1e-3);
            }
            tdrift = tdrift.max(z.spectral_poly()?.distance(&a0));
        }
        let mut z = z0.clone();
        for _ in 0..10_000 {
            z = isospectral_step(&z, -1, 1e-3);
        }
        tdrift = tdrift.max(z.spectral_poly()?.distance(&a0));
    }
    Ok((zdrift <= 1e-8 && tdrift <= 1e-8, format!("genus 1..3, 1e4 RK4 steps of 1e-3: max coefficient drift z-flow {zdrift:.2e}, isospectral flow {tdrift:.2e}")))
}

fn symes_equivalence() -> Outcome {
    let lambdas = circle(16);
    let grid = ZGrid::centered(c64(0.0, 0.0), 11, 11, 0.07, 0.07)?;
    let reach = grid.point(0, 0).norm();
    let mut gaps = Vec::new();
    for z0 in [CmcPotential::vacuum(1.0, 0.5), genus_one()] {
        let ode = integrate_frame(&integrate_pkf(&z0, &grid, substeps(8))?, &lambdas)?;
        let sf = symes_cmc(&z0, &grid, 1.0, &lambdas, SymesOptions::default())?;
        let gap = sf.frames.frames.iter().zip(&ode.frames).flat_map(|(p, q)| p.iter().zip(q).map(|(f, g)| (*f - *g).max_abs())).fold(0.0, f64::max);
        gaps.push(gap);
    }
    Ok((gaps.iter().all(|g| *g <= 1e-6) && reach <= 0.5, format!("16 circle samples, |z - z0| <= {reach:.3}: max frame gap vacuum {:.2e}, genus 1 {:.2e}", gaps[0], gaps[1])))
}

fn spectral_gap(a: &SpectralData<f64>, b: &SpectralData<f64>) -> f64 {
    let rel = |x: Complex64, y: Complex64| (x - y).norm() / y.norm().max(1.0);
    let br = a.branch.iter().zip(&b.branch).map(|(x, y)| rel(*x, *y));
    let dv = a.divisor.iter().zip(&b.divisor).map(|(p, q)| rel(p.lambda, q.lambda).max(rel(p.nu, q.nu)));
    br.chain(dv).fold(0.0, f64::max)
}

fn trace_round_trip() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let (mut worst, mut worst_omega, mut count) = (0.0f64, 0.0f64, 0);
    for g in [1, 2] {
        let mut done = 0;
        while done < 50 {
            let z = random_potential(&mut rng, g)?;
            let sd = spectral_data(&z)?;
            let b = sd.betas();
            if b.iter().enumerate().any(|(i, x)| b[..i].iter().any(|y| (x - y).norm() < 1e-2)) {
                continue;
            }
            let back = reconstruct_potential(&sd)?;
            let again = spectral_data(&back)?;
            worst = worst.max(spectral_gap(&again, &sd));
            worst_omega = worst_omega.max((back.conformal_factor() - z.conformal_factor()).abs());
            done += 1;
            count += 1;
        }
    }
    Ok((worst <= 1e-9 && worst_omega <= 1e-9, format!("{count} instances (50 each at genus 1, 2): branch/divisor error {worst:.2e}, omega error {worst_omega:.2e}")))
}

fn magic_estimates() -> Outcome {
    let mut viol = [[0usize; 2]; 3];
    let mut samples = [0usize; 3];
    for seed in 0..10u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for g in 1..=2usize {
            let mut z = random_potential(&mut rng, g)?;
            for _ in 0..100 {
                for _ in 0..20 {
                    let power = -(rng.gen_range(0..g) as i32);
                    let phase = if rng.gen_bool(0.5) { c64(1.0, 0.0) } else { c64(0.0, 1.0) };
                    z = isospectral_step_with(&z, power, phase, 1e-2);
                }
                let rep = magic_bounds_check(&z)?;
                samples[g] += 1;
                let bad = |&(lo, mid, hi): &(f64, f64, f64)| mid < lo * (1.0 - 1e-9) || mid > hi * (1.0 + 1e-9);
                viol[g][0] += rep.chain1.iter().any(bad) as usize;
                viol[g][1] += bad(&rep.chain2) as usize;
            }
        }
    }
    let mut attain = 0.0f64;
    for inverted in [false, true] {
        let ls = [0.3, 0.6];
        let betas: Vec<Complex64> = ls.iter().map(|&l: &f64| c64(if inverted { 1.0 / l } else { l }, 0.0)).collect();
        let rep = magic_bounds_check(&potential_from_divisor(1.0, c64(0.5, 0.0), &betas, &[c64(0.0, 0.0); 2])?)?;
        for &(lo, mid, hi) in rep.chain1.iter().chain(std::iter::once(&rep.chain2)) {
            attain = attain.max(if inverted { (mid - hi).abs() } else { (mid - lo).abs() });
        }
    }
    let ok = viol.iter().all(|v| v[0] == 0 && v[1] == 0) && attain <= 1e-10;
    Ok((
        ok,
        format!(
            "10 seeds x 100 flow samples: chain 1 violated in {}/{} (g=1), {}/{} (g=2); chain 2 violated in {}/{}, {}/{}; attainment error {attain:.1e}",
            viol[1][0], samples[1], viol[2][0], samples[2], viol[1][1], samples[1], viol[2][1], samples[2]
        ),
    ))
}

fn cmc_sym_bobenko() -> Outcome {
    let mut notes = Vec::new();
    let mut ok = true;
    for (name, z0) in [("vacuum", CmcPotential::vacuum(1.0, 0.5)), ("genus 1", genus_one())] {
        for ls in [c64(1.0, 0.0), c64(0.0, -1.0)] {
            let err = |n: usize| -> Result<(f64, f64), cmcflow::Error> {
                let h = 0.3 / (n - 1) as f64;
                let p: ImmersionPatch<f64> = cmc_surface(&z0, &ZGrid::centered(c64(0.0, 0.0), n, n, h, h)?, ls, FlowOptions::default())?;
                Ok((p.max_over(|d| (d.h - z0.mean_curvature()).abs()), p.max_over(|d| (d.q - z0.hopf() / ls).norm())))
            };
            let (a, b) = (err(21)?, err(41)?);
            let (oh, oq) = ((a.0 / b.0).log2(), (a.1 / b.1).log2());
            let fine = |e: f64, o: f64| e < 1e-10 || (e < 1e-2 && (o - 2.0).abs() <= 0.3);
            ok &= fine(b.0, oh) && fine(b.1, oq);
            notes.push(format!("{name} ls={ls}: H err {:.1e} (order {oh:.2}), Q err {:.1e} (order {oq:.2})", b.0, b.1));
        }
    }
    Ok((ok, notes.join("; ")))
}

fn genus_one_blowup() -> Outcome {
    let t = Instant::now();
    let rep = run_blowup(&genus_one_sequence(8), 8, &BlowupOptions::default())?;
    let secs = t.elapsed().as_secs_f64();
    let errs: Vec<f64> = rep.records.iter().map(|r| r.zeta_error).collect();
    let monotone = errs.windows(2).all(|w| w[1] < w[0]);
    let uv = rep.records.windows(2).all(|w| w[1].u_error <= w[0].u_error && w[1].v_error < w[0].v_error);
    let last = rep.records.last().expect("eight members");
    let ok = monotone && *errs.last().unwrap() <= 1e-3 && uv && rep.limit_h_measured <= 1e-4 && secs <= 120.0;
    Ok((
        ok,
        format!(
            "sequence beta = lambda = -4^-n (beta = -lambda admits no real genus-1 potential), n <= 8: final zeta err {:.2e}, U err {:.2e}, V err {:.2e}, limit |H| {:.2e}, {secs:.1} s",
            errs.last().unwrap(),
            last.u_error,
            last.v_error,
            rep.limit_h_measured
        ),
    ))
}

fn helicoid_endgame() -> Outcome {
    let x0 = 0.5;
    let spec = helicoid_scenario(x0, 10);
    let hyp = check_hypotheses(&spec, 10, HypothesisThresholds::default())?;
    let rep = run_blowup(&spec, 10, &BlowupOptions::default())?;
    let m = match_helicoid(&rep.limit)?;
    let g = rep.limit_surface.grid;
    let reference: Vec<[f64; 3]> = (0..g.len())
        .map(|k| {
            let z = g.point(k % g.nx, k / g.nx);
            helicoid_reference(x0 + z.re, z.im)
        })
        .collect();
    let al = rigid_align_points(&rep.limit_surface.points, &reference, false)?;
    let ok = hyp.all_pass() && rep.d_tilde == 1 && rep.g_tilde == 0 && m.coefficient_error <= 1e-3 && al.rms <= 1e-3;
    Ok((
        ok,
        format!(
            "d~ = {}, g~ = {}, helicoid match error {:.2e} (x = {:.6}, C0 = {:.6}), surface rms {:.2e}",
            rep.d_tilde, rep.g_tilde, m.coefficient_error, m.x, m.c0, al.rms
        ),
    ))
}

fn structural_invariants() -> Outcome {
    let t = Instant::now();
    let checks = run_invariants(1)?;
    let secs = t.elapsed().as_secs_f64();
    let failed: Vec<&str> = checks.iter().filter(|c| !c.pass()).map(|c| c.name.as_str()).collect();
    Ok((failed.is_empty() && secs <= 300.0, format!("{} checks, failing {failed:?}, {secs:.1} s", checks.len())))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("helicoid golden surface", helicoid_golden),
        ("helicoid metric and Hopf differential", helicoid_metric_and_hopf),
        ("isospectrality", isospectrality),
        ("Symes equivalence", symes_equivalence),
        ("trace-formula round trip", trace_round_trip),
        ("magic estimates", magic_estimates),
        ("CMC Sym-Bobenko contract", cmc_sym_bobenko),
        ("genus-1 blowup convergence", genus_one_blowup),
        ("helicoid blowup endgame", helicoid_endgame),
        ("structural invariants", structural_invariants),
    ];
    let mut failing = Vec::new();
    for (i, (name, run)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let (ok, detail) = match std::panic::catch_unwind(run) {
            Ok(Ok(r)) => r,
            Ok(Err(e)) => (false, format!("error: {e}")),
            Err(_) => (false, "panicked".to_string()),
        };
        if !ok {
            failing.push(i + 1);
        }
        println!("criterion {:>2} {} {name} [{:.1} s]: {detail}", i + 1, if ok { "PASS" } else { "FAIL" }, t.elapsed().as_secs_f64());
    }
    println!("acceptance: {}/10 pass, failing {failing:?}", 10 - failing.len());
    if !failing.is_empty() && std::env::var("ACCEPTANCE_STRICT").is_ok_and(|v| v == "1") {
        std::process::exit(1);
    }
}
