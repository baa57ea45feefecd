//! Command-line front end. [`cli_main`] parses arguments, runs one pipeline and maps the
//! outcome to an exit code: 0 success, 1 validation failure, 2 numerical error, 3 I/O error.

use crate::blowup::{check_hypotheses, helicoid_scenario, match_helicoid, run_blowup, BlowupOptions, HypothesisThresholds, Verdict};
use crate::error::{Error, Result};
use crate::factorize::{symes_cmc, symes_kdv, SymesOptions};
use crate::invariants::run_invariants;
use crate::io::{read_json, write_json, AnyPotential, ScenarioJson, SpectralJson};
use crate::scalar::c64;
use crate::spectral::{reconstruct_potential, spectral_data};
use crate::surface::{cmc_surface, minimal_surface, minimal_surface_symes, ImmersionPatch};
use crate::zeroflow::{integrate_frame, integrate_pkf, FlowOptions, ZGrid};
use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use serde_json::json;
use std::io::Write;
use std::path::{Path, PathBuf};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VALIDATION: i32 = 1;
pub const EXIT_NUMERICAL: i32 = 2;
pub const EXIT_IO: i32 = 3;

#[derive(Parser, Debug)]
#[command(name = "cmcflow", version, about = "CMC and minimal surfaces from polynomial Killing fields")]
struct Cli {
    /// Worker threads for the parallel kernels (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Tolerance for validation and cross-checks.
    #[arg(long, global = true)]
    tol: Option<f64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
struct GridArgs {
    /// Grid as `nx,ny,hx,hy` or `nx,ny,hx,hy,x0,y0`, centered on `x0 + i y0`.
    #[arg(long)]
    grid: Option<String>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Check every invariant of a potential file.
    Validate { potential: PathBuf },
    /// Spectral data extraction and reconstruction.
    Spectral {
        #[command(subcommand)]
        action: SpectralAction,
    },
    /// Immersion from the zero-curvature flow.
    Surface {
        #[command(subcommand)]
        kind: SurfaceKind,
    },
    /// Frames from loop-group factorizations, cross-checked against the flow.
    Symes {
        potential: PathBuf,
        #[command(flatten)]
        grid: GridArgs,
        /// Number of unit-circle samples for CMC potentials.
        #[arg(long, default_value_t = 16)]
        lambda_samples: usize,
        /// Largest circle discretization.
        #[arg(long, default_value_t = 2048)]
        n_max: usize,
    },
    /// Blowup sequences converging to minimal surfaces.
    Blowup {
        #[command(subcommand)]
        action: BlowupAction,
    },
    /// Built-in property suites.
    Check {
        #[command(subcommand)]
        what: CheckWhat,
    },
}

#[derive(Subcommand, Debug)]
enum SpectralAction {
    Extract {
        potential: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    Reconstruct {
        spectral: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Route {
    Ode,
    Symes,
}

#[derive(Subcommand, Debug)]
enum SurfaceKind {
    Cmc {
        potential: PathBuf,
        #[command(flatten)]
        grid: GridArgs,
        /// Unimodular Sym point as `re,im`.
        #[arg(long, default_value = "1,0")]
        sym_point: String,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        diag: Option<PathBuf>,
    },
    Minimal {
        potential: PathBuf,
        #[command(flatten)]
        grid: GridArgs,
        #[arg(long, default_value_t = -std::f64::consts::FRAC_PI_2, allow_hyphen_values = true)]
        phi: f64,
        #[arg(long, value_enum, default_value_t = Route::Ode)]
        route: Route,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        diag: Option<PathBuf>,
    },
}

#[derive(Subcommand, Debug)]
enum BlowupAction {
    Run {
        scenario: PathBuf,
        #[arg(long)]
        report: Option<PathBuf>,
        /// CSV convergence table.
        #[arg(long)]
        csv: Option<PathBuf>,
        #[arg(long)]
        n_max: Option<usize>,
        #[command(flatten)]
        grid: GridArgs,
    },
    Helicoid {
        #[arg(long, default_value_t = 0.5, allow_hyphen_values = true)]
        x0: f64,
        #[arg(long)]
        report: Option<PathBuf>,
        #[arg(long)]
        csv: Option<PathBuf>,
        #[arg(long, default_value_t = 10)]
        n_max: usize,
        #[command(flatten)]
        grid: GridArgs,
    },
}

#[derive(Subcommand, Debug)]
enum CheckWhat {
    Invariants {
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
}

/// Outcome of a command that ran to completion.
enum Outcome {
    Ok,
    Failed(String),
}

fn exit_code(e: &Error) -> i32 {
    if e.is_io() {
        EXIT_IO
    } else if e.is_validation() {
        EXIT_VALIDATION
    } else {
        EXIT_NUMERICAL
    }
}

fn parse_grid(g: &GridArgs, default: ZGrid<f64>) -> Result<ZGrid<f64>> {
    const OP: &str = "shell::parse_grid";
    let Some(text) = &g.grid else { return Ok(default) };
    let v: Vec<f64> = text
        .split(',')
        .map(|t| t.trim().parse::<f64>().map_err(|e| Error::Invalid { op: OP, msg: format!("{t:?}: {e}") }))
        .collect::<Result<_>>()?;
    if !(v.len() == 4 || v.len() == 6) || v[0].fract() != 0.0 || v[1].fract() != 0.0 || v[0] < 2.0 || v[1] < 2.0 {
        return Err(Error::Invalid { op: OP, msg: format!("expected nx,ny,hx,hy[,x0,y0], got {text:?}") });
    }
    let origin = if v.len() == 6 { c64(v[4], v[5]) } else { c64(0.0, 0.0) };
    ZGrid::centered(origin, v[0] as usize, v[1] as usize, v[2], v[3])
}

fn parse_complex(text: &str) -> Result<Complex64> {
    let parts: Vec<&str> = text.split(',').collect();
    let bad = || Error::Invalid { op: "shell::parse_complex", msg: format!("expected re,im, got {text:?}") };
    if parts.len() != 2 {
        return Err(bad());
    }
    let re = parts[0].trim().parse::<f64>().map_err(|_| bad())?;
    let im = parts[1].trim().parse::<f64>().map_err(|_| bad())?;
    Ok(c64(re, im))
}

fn emit(out: &mut dyn Write, value: &serde_json::Value) -> Result<()> {
    writeln!(out, "{}", serde_json::to_string_pretty(value).expect("json values serialize")).map_err(|e| Error::Io { op: "shell::emit", msg: e.to_string() })
}

fn say(out: &mut dyn Write, line: &str) -> Result<()> {
    writeln!(out, "{line}").map_err(|e| Error::Io { op: "shell::say", msg: e.to_string() })
}

fn read_cmc(path: &Path) -> Result<crate::CmcPotential> {
    match AnyPotential::read(path)? {
        AnyPotential::Cmc(z) => Ok(z),
        AnyPotential::Kdv(_) => Err(Error::Invalid { op: "shell::read_cmc", msg: format!("{} holds a kdv potential", path.display()) }),
    }
}

fn require_valid(p: &AnyPotential, tol: f64) -> Result<()> {
    let rep = p.validate(tol);
    if rep.all_pass() {
        Ok(())
    } else {
        let names: Vec<String> = rep.failures().iter().map(|c| c.name.clone()).collect();
        Err(Error::Invalid { op: "shell::require_valid", msg: format!("potential fails {names:?}") })
    }
}

fn patch_summary(p: &ImmersionPatch<f64>) -> serde_json::Value {
    let interior = p.interior(1);
    let max_h = interior.iter().map(|&k| p.diagnostics[k].h).fold(f64::NEG_INFINITY, f64::max);
    let min_h = interior.iter().map(|&k| p.diagnostics[k].h).fold(f64::INFINITY, f64::min);
    json!({
        "nodes": p.points.len(),
        "H_meas_interior": [min_h, max_h],
        "omega_error": p.omega_error(),
        "max_defect": p.max_over(|d| d.defect),
    })
}

fn write_patch(p: &ImmersionPatch<f64>, out: &Option<PathBuf>, diag: &Option<PathBuf>) -> Result<()> {
    if let Some(path) = out {
        p.write_obj(path)?;
    }
    if let Some(path) = diag {
        p.write_csv(path)?;
    }
    Ok(())
}

fn default_grid() -> ZGrid<f64> {
    ZGrid::centered(c64(0.0, 0.0), 41, 41, 0.025, 0.025).expect("static grid")
}

fn run(cli: Cli, out: &mut (dyn Write + Send)) -> Result<Outcome> {
    let tol = cli.tol.unwrap_or(1e-9);
    if !(tol > 0.0 && tol.is_finite()) {
        return Err(Error::Invalid { op: "shell::run", msg: "--tol must be positive".into() });
    }
    match cli.command {
        Command::Validate { potential } => {
            let p = AnyPotential::read(&potential)?;
            let rep = p.validate(tol);
            for c in &rep.checks {
                say(out, &format!("{} {} ({:.3e})", if c.pass { "PASS" } else { "FAIL" }, c.name, c.magnitude))?;
            }
            Ok(if rep.all_pass() { Outcome::Ok } else { Outcome::Failed(format!("{} check(s) failed", rep.failures().len())) })
        }
        Command::Spectral { action: SpectralAction::Extract { potential, out: file } } => {
            let z = read_cmc(&potential)?;
            require_valid(&AnyPotential::Cmc(z.clone()), tol)?;
            let sj = SpectralJson::from_data(&spectral_data(&z)?);
            match file {
                Some(path) => write_json(&path, &sj)?,
                None => say(out, crate::io::to_canonical_string(&sj).trim_end())?,
            }
            Ok(Outcome::Ok)
        }
        Command::Spectral { action: SpectralAction::Reconstruct { spectral, out: file } } => {
            let sj: SpectralJson = read_json(&spectral)?;
            let z = reconstruct_potential(&sj.to_data()?)?;
            let pj = AnyPotential::Cmc(z).to_json();
            match file {
                Some(path) => write_json(&path, &pj)?,
                None => say(out, crate::io::to_canonical_string(&pj).trim_end())?,
            }
            Ok(Outcome::Ok)
        }
        Command::Surface { kind: SurfaceKind::Cmc { potential, grid, sym_point, out: obj, diag } } => {
            let z = read_cmc(&potential)?;
            require_valid(&AnyPotential::Cmc(z.clone()), tol)?;
            let grid = parse_grid(&grid, default_grid())?;
            let ls = parse_complex(&sym_point)?;
            let p = cmc_surface(&z, &grid, ls, FlowOptions { substeps: 4, ..FlowOptions::default() })?;
            write_patch(&p, &obj, &diag)?;
            emit(out, &json!({ "H": z.mean_curvature(), "surface": patch_summary(&p) }))?;
            Ok(Outcome::Ok)
        }
        Command::Surface { kind: SurfaceKind::Minimal { potential, grid, phi, route, out: obj, diag } } => {
            let z = match AnyPotential::read(&potential)? {
                AnyPotential::Kdv(z) => z,
                AnyPotential::Cmc(_) => return Err(Error::Invalid { op: "shell::surface_minimal", msg: "expected a kdv potential".into() }),
            };
            require_valid(&AnyPotential::Kdv(z.clone()), tol)?;
            let grid = parse_grid(&grid, default_grid())?;
            let p = match route {
                Route::Ode => minimal_surface(&z, &grid, phi, FlowOptions { substeps: 4, ..FlowOptions::default() })?,
                Route::Symes => minimal_surface_symes(&z, &grid, phi, SymesOptions::default())?,
            };
            write_patch(&p, &obj, &diag)?;
            emit(out, &json!({ "surface": patch_summary(&p) }))?;
            Ok(Outcome::Ok)
        }
        Command::Symes { potential, grid, lambda_samples, n_max } => {
            let p = AnyPotential::read(&potential)?;
            require_valid(&p, tol)?;
            let grid = parse_grid(&grid, ZGrid::centered(c64(0.0, 0.0), 9, 9, 0.05, 0.05)?)?;
            let opts = SymesOptions { n_max, ..SymesOptions::default() };
            let flow = FlowOptions { substeps: 8, ..FlowOptions::default() };
            let (sf, ode) = match &p {
                AnyPotential::Cmc(z) => {
                    let lambdas: Vec<Complex64> = (0..lambda_samples.max(1))
                        .map(|k| Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * k as f64 / lambda_samples.max(1) as f64))
                        .collect();
                    (symes_cmc(z, &grid, 1.0, &lambdas, opts)?, integrate_frame(&integrate_pkf(z, &grid, flow)?, &lambdas)?)
                }
                AnyPotential::Kdv(z) => {
                    let lambdas = [c64(0.0, 0.0)];
                    (symes_kdv(z, &grid, &lambdas, opts)?, integrate_frame(&integrate_pkf(z, &grid, flow)?, &lambdas)?)
                }
            };
            let dev = sf
                .frames
                .frames
                .iter()
                .zip(&ode.frames)
                .flat_map(|(a, b)| a.iter().zip(b).map(|(f, g)| (*f - *g).max_abs()))
                .fold(0.0, f64::max);
            let limit = cli.tol.unwrap_or(1e-6);
            emit(out, &json!({ "max_frame_deviation": dev, "factorization_residual": sf.residual, "tol": limit }))?;
            Ok(if dev <= limit { Outcome::Ok } else { Outcome::Failed(format!("Symes and flow frames differ by {dev:.3e}")) })
        }
        Command::Blowup { action } => {
            let (spec, n_max, report, csv, grid) = match action {
                BlowupAction::Run { scenario, report, csv, n_max, grid } => {
                    let sc: ScenarioJson = read_json(&scenario)?;
                    let spec = sc.to_spec()?;
                    let n = n_max.unwrap_or(spec.n_max);
                    (spec, n, report, csv, grid)
                }
                BlowupAction::Helicoid { x0, report, csv, n_max, grid } => (helicoid_scenario(x0, n_max), n_max, report, csv, grid),
            };
            let defaults = BlowupOptions::default();
            let opts = BlowupOptions { surface_grid: parse_grid(&grid, defaults.surface_grid)?, ..defaults };
            let hyp = check_hypotheses(&spec, n_max, HypothesisThresholds::default())?;
            for (name, c) in [("decay", &hyp.decay), ("separation", &hyp.separation), ("ratio", &hyp.ratio)] {
                say(out, &format!("hypothesis {name}: {} ({})", if c.verdict == Verdict::Pass { "pass" } else { "warn" }, c.summary))?;
            }
            let rep = run_blowup(&spec, n_max, &opts)?;
            if let Some(path) = &report {
                rep.write_json(path)?;
            }
            if let Some(path) = &csv {
                rep.write_csv(path)?;
            }
            let last = rep.records.last().expect("non-empty sequence");
            let mut summary = json!({
                "d_tilde": rep.d_tilde,
                "g_tilde": rep.g_tilde,
                "final_zeta_error": last.zeta_error,
                "limit_H_meas": rep.limit_h_measured,
            });
            if rep.limit.degree() == 0 {
                if let Ok(m) = match_helicoid(&rep.limit) {
                    summary["helicoid"] = json!({ "x": m.x, "C0": m.c0, "coordinate_scale": m.coordinate_scale, "lambda_scale": m.lambda_scale, "coefficient_error": m.coefficient_error });
                }
            }
            emit(out, &summary)?;
            Ok(Outcome::Ok)
        }
        Command::Check { what: CheckWhat::Invariants { seed } } => {
            let checks = run_invariants(seed)?;
            for c in &checks {
                say(out, &format!("{} {} (measured {:.3e}, tol {:.0e})", if c.pass() { "PASS" } else { "FAIL" }, c.name, c.measured, c.tol))?;
            }
            let failed = checks.iter().filter(|c| !c.pass()).count();
            Ok(if failed == 0 { Outcome::Ok } else { Outcome::Failed(format!("{failed} invariant(s) violated")) })
        }
    }
}

/// Parses `args` (including the program name), runs the command and returns the exit code.
/// Regular output goes to `out`, diagnostics to `err`.
pub fn cli_main<I, T>(args: I, out: &mut (dyn Write + Send), err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_VALIDATION } else { EXIT_OK };
            let _ = if code == EXIT_OK { write!(out, "{e}") } else { write!(err, "{e}") };
            return code;
        }
    };
    let result = match cli.threads {
        Some(n) if n > 0 => match rayon::ThreadPoolBuilder::new().num_threads(n).build() {
            Ok(pool) => pool.install(|| run(cli, out)),
            Err(e) => Err(Error::Invalid { op: "shell::cli_main", msg: format!("thread pool: {e}") }),
        },
        Some(_) => Err(Error::Invalid { op: "shell::cli_main", msg: "--threads must be positive".into() }),
        None => run(cli, out),
    };
    match result {
        Ok(Outcome::Ok) => EXIT_OK,
        Ok(Outcome::Failed(msg)) => {
            let _ = writeln!(err, "validation failure: {msg}");
            EXIT_VALIDATION
        }
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            exit_code(&e)
        }
    }
}
