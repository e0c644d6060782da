//! Command-line front end and the pipeline it drives:
//! potential → CR data → conformal factor → lift → curvature checks.
//!
//! Exit codes: 0 success, 1 check or solver failure, 2 bad configuration or usage.

use std::ffi::OsString;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Parser, Subcommand};
use serde::Serialize;

use crate::config::{Mode, RunConfig};
use crate::cr::{check_sasakian, verify_structure_equation, CrPoint};
use crate::curvature::{contract2, quasi_einstein_check, shearfree_check, Verdict};
use crate::error::{Error, Result};
use crate::lift::{ConformalFactor, LiftProfile};
use crate::potential::{catalog, Potential, PotentialKind};
use crate::report::{write_atomic, CheckLine, RunReport, SolverSummary, SpecialitySummary, StructureSummary};
use crate::sampling::{plane_points, spacetime_points};
use crate::solver::{
    constant_solution, einstein_constant, pde_residual, richardson_combine, solve_logistic, solve_tubular, Boundary,
    GridConfig, GridInterpolant, GridSolution, InitialGuess, OdeSolution, TubularProblem,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;

/// Pattern and lift-equation tolerance floor for grid-based `q`.
pub const GRID_PATTERN_TOL: f64 = 1e-3;

#[derive(Debug, Parser)]
#[command(name = "shearlift", version, about = "Shearfree Lorentzian lifts of Sasakian CR manifolds")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, clap::Args)]
pub struct RunArgs {
    /// TOML run configuration.
    #[arg(long)]
    pub config: PathBuf,
    /// Print the report as JSON.
    #[arg(long)]
    pub json: bool,
    /// Directory for artifacts; overrides `output.dir`.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Sample seed; overrides `samples.seed`.
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Structure-equation and Sasakian checks of the potential.
    Check(RunArgs),
    /// Solve for the conformal factor and write the profile.
    Lift(RunArgs),
    /// Build the lift and verify its curvature.
    Verify(RunArgs),
    /// List the built-in potentials.
    Catalog {
        #[arg(long)]
        json: bool,
    },
}

/// Parses arguments, runs the command and returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
        }
    };
    match cli.command {
        Command::Catalog { json } => cmd_catalog(json),
        Command::Check(a) => with_config(&a, cmd_check),
        Command::Lift(a) => with_config(&a, cmd_lift),
        Command::Verify(a) => with_config(&a, cmd_verify),
    }
}

fn with_config(args: &RunArgs, f: fn(&RunConfig, &RunArgs) -> Result<i32>) -> i32 {
    let mut cfg = match RunConfig::load(&args.config).and_then(|c| c.potential().map(|_| c)) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {}: {e}", args.config.display());
            return EXIT_CONFIG;
        }
    };
    if let Some(seed) = args.seed {
        cfg.samples.seed = seed;
    }
    if let Some(out) = &args.out {
        cfg.output.dir = Some(out.clone());
    }
    match f(&cfg, args) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            if let Error::Solver { history, .. } = &e {
                if !history.is_empty() {
                    eprintln!("residual history: {history:?}");
                }
            }
            match e {
                Error::Config(_) | Error::Syntax { .. } | Error::UnknownIdentifier { .. } => EXIT_CONFIG,
                _ => EXIT_FAIL,
            }
        }
    }
}

fn out_dir(cfg: &RunConfig) -> Option<&Path> {
    cfg.output.dir.as_deref()
}

fn print_json<T: Serialize>(v: &T) {
    println!("{}", serde_json::to_string_pretty(v).expect("report serializes"));
}

#[derive(Serialize)]
struct CatalogRow {
    name: &'static str,
    formula: &'static str,
    domain: String,
    einstein_constant: Option<f64>,
    default_lambda: f64,
    exercises: &'static str,
}

fn catalog_rows() -> Vec<CatalogRow> {
    catalog()
        .into_iter()
        .map(|e| {
            let [x, y] = e.sample_region;
            let pts = plane_points(16, 0, x, y);
            CatalogRow {
                name: e.name,
                formula: e.formula,
                domain: e.potential.domain().to_string(),
                einstein_constant: einstein_constant(&e.potential, &pts).ok().flatten().map(|v| (v * 1e9).round() / 1e9 + 0.0),
                default_lambda: e.default_lambda,
                exercises: e.exercises,
            }
        })
        .collect()
}

pub fn cmd_catalog(json: bool) -> i32 {
    let rows = catalog_rows();
    if json {
        print_json(&rows);
        return EXIT_OK;
    }
    println!("{:<13} {:<44} {:<12} {:>6} {:>7}  exercises", "name", "formula", "domain", "Λ₀", "Λ");
    for r in rows {
        let l0 = r.einstein_constant.map_or("-".to_string(), |v| format!("{v}"));
        println!(
            "{:<13} {:<44} {:<12} {:>6} {:>7}  {}",
            r.name, r.formula, r.domain, l0, r.default_lambda, r.exercises
        );
    }
    EXIT_OK
}

/// Structure-equation, frame-duality and Sasakian checks over the configured samples.
pub fn structure_summary(cfg: &RunConfig, p: &Potential) -> Result<StructureSummary> {
    let [x, y] = cfg.sample_region();
    let pts = plane_points(cfg.samples.structure_count.max(1), cfg.samples.seed, x, y);
    let (mut se, mut du) = (0.0f64, 0.0f64);
    for &[px, py] in &pts {
        se = se.max(verify_structure_equation(p, px, py)?);
        du = du.max(CrPoint::new(p, px, py)?.frame_duality_residual());
    }
    let tol = cfg.tolerances.structure;
    let sas = check_sasakian(p, &pts, tol)?;
    Ok(StructureSummary {
        points: pts.len(),
        max_structure_residual: se,
        max_duality_residual: du,
        max_sasakian_residual: sas.max_residual,
        einstein_constant: einstein_constant(p, &pts)?,
        passed: se <= tol && du <= tol && sas.is_sasakian,
    })
}

pub fn cmd_check(cfg: &RunConfig, args: &RunArgs) -> Result<i32> {
    let p = cfg.potential()?;
    let s = structure_summary(cfg, &p)?;
    if args.json {
        print_json(&s);
    } else {
        let tol = cfg.tolerances.structure;
        println!("potential        {}", p.kind().name());
        println!("sample points    {}", s.points);
        println!("structure eq.    {:.3e}  (tol {tol:e})", s.max_structure_residual);
        println!("frame duality    {:.3e}", s.max_duality_residual);
        println!("sasakian         {:.3e}", s.max_sasakian_residual);
        match s.einstein_constant {
            Some(l0) => println!("Λ₀ = R/F_zzbar   {l0}"),
            None => println!("Λ₀ = R/F_zzbar   not constant"),
        }
        println!("result           {}", if s.passed { "pass" } else { "fail" });
    }
    if let Some(dir) = out_dir(cfg) {
        write_atomic(&dir.join("check.json"), serde_json::to_string_pretty(&s).unwrap_or_default().as_bytes())?;
    }
    Ok(if s.passed { EXIT_OK } else { EXIT_FAIL })
}

/// A resolved conformal factor with the artifacts it came from.
pub struct ResolvedLift {
    pub profile: LiftProfile,
    pub summary: SolverSummary,
    pub grid: Option<GridSolution>,
    pub ode: Option<Arc<OdeSolution>>,
    /// Plane region that every sample and stencil stays inside.
    pub region: [[f64; 2]; 2],
}

fn inset(r: [f64; 2], frac: f64) -> [f64; 2] {
    let w = r[1] - r[0];
    [r[0] + frac * w, r[1] - frac * w]
}

fn no_constant(p: &Potential, lambda: f64, pts: &[[f64; 2]]) -> Result<Error> {
    Ok(Error::Profile(match einstein_constant(p, pts)? {
        Some(l0) if l0.abs() <= 1e-12 => "no constant solution: Λ₀ = 0".to_string(),
        Some(l0) => format!("no constant solution: Λ₀ = {l0} and Λ = {lambda} do not share a sign"),
        None => "no constant solution: R/F_zzbar is not constant".to_string(),
    }))
}

/// Chooses and computes the conformal factor per the configured mode.
pub fn resolve_lift(cfg: &RunConfig) -> Result<ResolvedLift> {
    let p = cfg.potential()?;
    let lam = cfg.lambda;
    let region = cfg.sample_region();
    let pts = plane_points(cfg.samples.structure_count.max(1), cfg.samples.seed, region[0], region[1]);
    let natural = match (p.kind(), p.expr_text()) {
        (PotentialKind::Harmonic, _) if lam == 0.0 => Some((ConformalFactor::PowerOfFzzbar(1.0), "p = F_zzbar")),
        (PotentialKind::Frt, _) if lam == 0.0 => Some((ConformalFactor::PowerOfFzzbar(2.0 / 3.0), "p = F_zzbar^(2/3)")),
        _ => None,
    };
    let mode = match &cfg.mode {
        Mode::Auto => {
            if !p.is_tubular() && constant_solution(&p, lam, &pts)?.is_some() {
                Mode::Constant
            } else if let Some((f, what)) = natural {
                return finish(cfg, p, f, "power", what.into(), region, None, None);
            } else if p.is_tubular() {
                Mode::Ode
            } else if p.kind() == PotentialKind::Flat && lam == 0.0 {
                return finish(cfg, p, ConformalFactor::Constant(1.0), "constant", "q = 1".into(), region, None, None);
            } else {
                Mode::Pde
            }
        }
        m => m.clone(),
    };
    match mode {
        Mode::Auto => unreachable!("resolved above"),
        Mode::Constant => {
            let q = constant_solution(&p, lam, &pts)?.ok_or_else(|| no_constant(&p, lam, &pts).unwrap_or_else(|e| e))?;
            let mut r = finish(cfg, p, ConformalFactor::Constant(q), "constant", format!("q = {q}"), region, None, None)?;
            r.summary.q_constant = Some(q);
            Ok(r)
        }
        Mode::ExplicitP(text) => {
            let f = ConformalFactor::explicit(&text)?;
            finish(cfg, p, f, "explicit", format!("p = {text}"), region, None, None)
        }
        Mode::Ode => {
            if !p.is_tubular() {
                return Err(Error::Config("mode `ode` needs a tubular potential".into()));
            }
            let sample_y = region[1];
            let w = sample_y[1] - sample_y[0];
            let y = cfg.ode.y.unwrap_or([sample_y[0] - 0.05 * w, sample_y[1] + 0.05 * w]);
            let problem = TubularProblem::new(p.clone(), lam)?;
            let sol = Arc::new(solve_tubular(problem, cfg.ode.q0, cfg.ode.qp0, y, cfg.ode.h)?);
            // keep samples and their stencils inside the integration range
            let wy = y[1] - y[0];
            let ry = [sample_y[0].max(y[0] + 0.02 * wy), sample_y[1].min(y[1] - 0.02 * wy)];
            let desc = format!("RK4 on y in [{}, {}], q0 = {}, q0' = {}", y[0], y[1], cfg.ode.q0, cfg.ode.qp0);
            finish(cfg, p, ConformalFactor::Tubular(sol.clone()), "ode", desc, [region[0], ry], None, Some(sol))
        }
        Mode::Pde => {
            let gx = cfg.grid.x.unwrap_or(region[0]);
            let gy = cfg.grid.y.unwrap_or(region[1]);
            let mut gc = GridConfig::new(gx, gy, cfg.grid.n, cfg.grid.n);
            gc.tol = cfg.grid.tol;
            gc.max_iters = cfg.grid.max_iters;
            gc.eps = cfg.grid.eps;
            gc.boundary = Boundary::Asymptotic;
            if let Some(c) = cfg.grid.initial {
                gc.initial = InitialGuess::Constant(c);
            }
            let mut sol = solve_logistic(&p, lam, &gc)?;
            let mut desc = format!("Newton on a {}x{} grid over [{}, {}] x [{}, {}]", gc.nx, gc.ny, gx[0], gx[1], gy[0], gy[1]);
            if cfg.grid.extrapolate {
                let mut fc = gc.clone();
                fc.nx = 2 * gc.nx - 1;
                fc.ny = 2 * gc.ny - 1;
                let fine = solve_logistic(&p, lam, &fc)?;
                sol = richardson_combine(&sol, &fine)?;
                desc.push_str(&format!(", extrapolated with {}x{}", fc.nx, fc.ny));
            }
            let interp = Arc::new(GridInterpolant::smooth(&sol, GridInterpolant::default_degree(gc.nx.min(gc.ny)))?);
            let sub = [inset(gx, 0.05), inset(gy, 0.05)];
            let mut r = finish(cfg, p, ConformalFactor::Grid(interp), "pde", desc, sub, Some(sol.clone()), None)?;
            r.summary.newton_iters = Some(sol.newton_iters);
            r.summary.residual_norm = Some(sol.residual_norm);
            r.summary.history = sol.history.clone();
            r.summary.warnings = sol.warnings.clone();
            Ok(r)
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn finish(
    cfg: &RunConfig,
    p: Potential,
    factor: ConformalFactor,
    branch: &str,
    description: String,
    region: [[f64; 2]; 2],
    grid: Option<GridSolution>,
    ode: Option<Arc<OdeSolution>>,
) -> Result<ResolvedLift> {
    let profile = LiftProfile::new(p, cfg.lambda, factor)?.with_convention(cfg.convention);
    let pts = plane_points(cfg.samples.count, cfg.samples.seed, region[0], region[1]);
    let summary = SolverSummary {
        branch: branch.into(),
        description,
        lift_equation_residual: pde_residual(&profile, &pts)?,
        ..SolverSummary::default()
    };
    Ok(ResolvedLift { profile, summary, grid, ode, region })
}

#[derive(Serialize)]
struct SpotCheck {
    x: f64,
    y: f64,
    r: f64,
    p: f64,
    h: f64,
    w: [f64; 2],
    psi2_formula: [f64; 2],
    gram_error: f64,
}

#[derive(Serialize)]
struct LiftSummary<'a> {
    potential: &'static str,
    lambda: f64,
    solver: &'a SolverSummary,
    spot_checks: Vec<SpotCheck>,
}

fn spot_checks(cfg: &RunConfig, lift: &ResolvedLift) -> Result<Vec<SpotCheck>> {
    let [x, y] = lift.region;
    let pts = spacetime_points(5, cfg.samples.seed, [x, y, cfg.samples.u, cfg.samples.r]);
    let gram = [[0.0, 1.0, 0.0, 0.0], [1.0, 0.0, 0.0, 0.0], [0.0, 0.0, 0.0, 1.0], [0.0, 0.0, 1.0, 0.0]];
    pts.iter()
        .map(|&[x, y, _, r]| {
            let pt = lift.profile.point(x, y)?;
            let fd = pt.frame_data(r, cfg.convention)?;
            let mut err: f64 = 0.0;
            for a in 0..4 {
                for b in 0..4 {
                    err = err.max((contract2(&fd.g, &fd.frame[a], &fd.frame[b]) - gram[a][b]).norm());
                }
            }
            let w = pt.w(r, cfg.convention);
            let psi = pt.psi2_formula(r);
            Ok(SpotCheck {
                x,
                y,
                r,
                p: pt.p_value(),
                h: pt.h(r, cfg.convention).0,
                w: [w.re, w.im],
                psi2_formula: [psi.re, psi.im],
                gram_error: err,
            })
        })
        .collect()
}

fn ode_csv(sol: &OdeSolution) -> String {
    let mut s = String::from("y,q,dq\n");
    for (k, [q, qp]) in sol.nodes.iter().enumerate() {
        s.push_str(&format!("{},{q:e},{qp:e}\n", sol.y0 + k as f64 * sol.h));
    }
    s
}

pub fn cmd_lift(cfg: &RunConfig, args: &RunArgs) -> Result<i32> {
    let lift = resolve_lift(cfg)?;
    let summary = LiftSummary {
        potential: lift.profile.potential().kind().name(),
        lambda: cfg.lambda,
        solver: &lift.summary,
        spot_checks: spot_checks(cfg, &lift)?,
    };
    if let Some(dir) = out_dir(cfg) {
        if let Some(g) = &lift.grid {
            write_atomic(&dir.join("q.csv"), g.to_csv().as_bytes())?;
        }
        if let Some(o) = &lift.ode {
            write_atomic(&dir.join("ode.csv"), ode_csv(o).as_bytes())?;
        }
        let json = serde_json::to_string_pretty(&summary).unwrap_or_default() + "\n";
        write_atomic(&dir.join("profile.json"), json.as_bytes())?;
    }
    if args.json {
        print_json(&summary);
    } else {
        println!("potential        {}", summary.potential);
        println!("lambda           {}", cfg.lambda);
        println!("branch           {} ({})", lift.summary.branch, lift.summary.description);
        if let Some(q) = lift.summary.q_constant {
            println!("q                {q}");
        }
        if let Some(n) = lift.summary.newton_iters {
            println!("newton steps     {n}, residual {:.3e}", lift.summary.residual_norm.unwrap_or(f64::NAN));
        }
        for w in &lift.summary.warnings {
            println!("warning          {w}");
        }
        println!("lift equation    {:.3e}", lift.summary.lift_equation_residual);
        for s in &summary.spot_checks {
            println!(
                "  ({:+.3}, {:+.3}, r = {:+.3})  p = {:.6}  H = {:.6}  gram err {:.1e}",
                s.x, s.y, s.r, s.p, s.h, s.gram_error
            );
        }
    }
    Ok(EXIT_OK)
}

/// Runs the full pipeline and assembles the report.
pub fn verify_report(cfg: &RunConfig) -> Result<RunReport> {
    let p = cfg.potential()?;
    let structure = structure_summary(cfg, &p)?;
    let lift = resolve_lift(cfg)?;
    let [x, y] = lift.region;
    let pts = spacetime_points(cfg.samples.count, cfg.samples.seed, [x, y, cfg.samples.u, cfg.samples.r]);
    let field = lift.profile.clone().metric_field();
    let mut check = cfg.check_config();
    let mut t = cfg.tolerances.clone();
    if lift.summary.branch == "pde" {
        // an interpolated grid solution cannot meet the analytic pattern tolerance
        t.pattern = t.pattern.max(GRID_PATTERN_TOL);
        check.pattern_tol = t.pattern;
    }
    let curvature = quasi_einstein_check(&field, cfg.lambda, &pts, &check)?;
    let shearfree = shearfree_check(&field, &pts, &check.stencil)?;
    let speciality = SpecialitySummary {
        max_d0: curvature.max_d0,
        max_d1: curvature.max_d1,
        min_psi2: curvature.min_psi2,
        type_ii_or_d: curvature.max_d0 <= t.speciality
            && curvature.max_d1 <= t.speciality
            && curvature.min_psi2 > t.speciality,
    };
    // P = p / cos(r/2) is even in r, so rho = tan(r/2) in every convention
    let rho_err = shearfree.samples.iter().map(|s| (s.rho - (0.5 * s.r).tan()).abs()).fold(0.0, f64::max);
    let checks = vec![
        CheckLine::at_most("structure_equation", structure.max_structure_residual, t.structure),
        CheckLine::at_most("sasakian", structure.max_sasakian_residual, t.structure),
        CheckLine::at_most("lift_equation", lift.summary.lift_equation_residual, t.pattern),
        CheckLine::at_most("quasi_einstein_pattern", curvature.pattern_residual, t.pattern),
        CheckLine::at_most("phi", curvature.max_phi, t.phi),
        CheckLine::at_most("shearfree", shearfree.max_residual, t.shearfree),
        CheckLine::at_most("shearfree_rho", rho_err, 1e-6),
        CheckLine::at_most("speciality_d0_d1", curvature.max_d0.max(curvature.max_d1), t.speciality),
        CheckLine::above("speciality_psi2", curvature.min_psi2, t.speciality),
    ];
    let mut verdict = curvature.verdict;
    if !(structure.passed && checks[5].passed && checks[6].passed) {
        verdict = Verdict::Fail;
    }
    Ok(RunReport {
        config: cfg.clone(),
        structure,
        solver: lift.summary,
        curvature,
        shearfree,
        speciality,
        checks,
        verdict,
    })
}

pub fn cmd_verify(cfg: &RunConfig, args: &RunArgs) -> Result<i32> {
    let report = verify_report(cfg)?;
    let json = report.to_json()?;
    if let Some(dir) = out_dir(cfg) {
        write_atomic(&dir.join("report.json"), json.as_bytes())?;
        write_atomic(&dir.join("residuals.csv"), report.residual_csv().as_bytes())?;
    }
    if args.json {
        print!("{json}");
    } else {
        println!("potential        {}", cfg.potential.kind.name());
        println!("lambda           {} (fit {:.9})", cfg.lambda, report.curvature.lambda_fit);
        println!("branch           {} ({})", report.solver.branch, report.solver.description);
        for c in &report.checks {
            let rel = if c.tag == "speciality_psi2" { ">" } else { "<=" };
            println!(
                "{:<24} {:>11.3e} {rel} {:<9.1e} {}",
                c.tag,
                c.value,
                c.tol,
                if c.passed { "pass" } else { "fail" }
            );
        }
        println!("verdict          {}", report.verdict);
    }
    Ok(if report.verdict == Verdict::Fail { EXIT_FAIL } else { EXIT_OK })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn auto_mode_branches() {
        let fs = resolve_lift(&RunConfig::for_catalog("fubini_study").unwrap()).unwrap();
        assert_eq!(fs.summary.branch, "constant");
        assert!((fs.summary.q_constant.unwrap() - 1.0).abs() < 1e-12);
        assert_eq!(resolve_lift(&RunConfig::for_catalog("harmonic").unwrap()).unwrap().summary.branch, "power");
        assert_eq!(resolve_lift(&RunConfig::for_catalog("tubular").unwrap()).unwrap().summary.branch, "ode");
        assert_eq!(resolve_lift(&RunConfig::for_catalog("flat").unwrap()).unwrap().summary.branch, "constant");
    }

    #[test]
    fn flat_has_no_constant_solution() {
        let mut cfg = RunConfig::for_catalog("flat").unwrap();
        cfg.mode = Mode::Constant;
        cfg.lambda = 1.0;
        let err = resolve_lift(&cfg).err().unwrap().to_string();
        assert!(err.contains("no constant solution: Λ₀ = 0"), "{err}");
    }

    #[test]
    fn catalog_rows_report_einstein_constants() {
        let rows = catalog_rows();
        assert_eq!(rows.len(), 6);
        let fs = rows.iter().find(|r| r.name == "fubini_study").unwrap();
        assert_eq!(fs.einstein_constant, Some(2.0));
        let pc = rows.iter().find(|r| r.name == "poincare").unwrap();
        assert_eq!(pc.einstein_constant, Some(-2.0));
        assert_eq!(rows.iter().find(|r| r.name == "harmonic").unwrap().einstein_constant, None);
    }
}
