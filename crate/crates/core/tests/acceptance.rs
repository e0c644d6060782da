//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

use std::time::Instant;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use shearlift::cli::{resolve_lift, ResolvedLift};
use shearlift::config::RunConfig;
use shearlift::cr::{check_sasakian, gauge_transform, transformed_coframe, verify_structure_equation, CrPoint, GaugePair};
use shearlift::curvature::{
    frame_curvature, gauge_reflection_check, quasi_einstein_check, shearfree_check, CheckConfig, FrameCurvature,
    StencilConfig, Verdict,
};
use shearlift::lift::{ConformalFactor, LiftProfile, MetricField, RConvention};
use shearlift::potential::{catalog, Potential};
use shearlift::sampling::{plane_points, spacetime_points};
use shearlift::solver::logistic::self_convergence_order as grid_order;
use shearlift::solver::tubular::self_convergence_order as ode_order;
use shearlift::solver::{einstein_constant, solve_logistic, Boundary, GridConfig, InitialGuess, TubularProblem};

const SEED: u64 = 7;
const R_RANGE: [f64; 2] = [-2.5, 2.5];
const U_RANGE: [f64; 2] = [-1.0, 1.0];

type Criterion = (&'static str, fn() -> Outcome);

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: String) -> Outcome {
    Outcome { passed, detail }
}

/// A lift from the CLI resolution path plus its curvature sample points.
struct Case {
    name: &'static str,
    lambda: f64,
    lift: ResolvedLift,
    pts: Vec<[f64; 4]>,
}

impl Case {
    fn new(name: &'static str, catalog_name: &str, lambda: f64, x: Option<[f64; 2]>, n: usize) -> Case {
        let mut cfg = RunConfig::for_catalog(catalog_name).unwrap();
        cfg.lambda = lambda;
        cfg.samples.x = x;
        cfg.samples.seed = SEED;
        let lift = resolve_lift(&cfg).unwrap();
        let [xr, yr] = lift.region;
        let pts = spacetime_points(n, SEED, [xr, yr, U_RANGE, R_RANGE]);
        Case { name, lambda, lift, pts }
    }

    fn field(&self) -> MetricField {
        self.lift.profile.clone().metric_field()
    }
}

fn frame_curvatures(field: &MetricField, pts: &[[f64; 4]]) -> Vec<FrameCurvature> {
    let cfg = StencilConfig::default();
    pts.iter().map(|&x| frame_curvature(field, x, &cfg).unwrap()).collect()
}

/// Largest `|Ric(e_a, e_b) - lambda g(e_a, e_b)|` over all frame pairs.
fn ricci_gram_error(fcs: &[FrameCurvature], lambda: f64) -> f64 {
    let mut worst: f64 = 0.0;
    for fc in fcs {
        for a in 0..4 {
            for b in 0..4 {
                worst = worst.max((fc.ric[a][b] - lambda * fc.gram[a][b]).norm());
            }
        }
    }
    worst
}

fn single_threaded<T: Send>(f: impl FnOnce() -> T + Send) -> T {
    rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap().install(f)
}

fn criterion_1() -> Outcome {
    let t0 = Instant::now();
    let (l0, err, phi, q) = single_threaded(|| {
        let p = Potential::fubini_study();
        let l0 = einstein_constant(&p, &plane_points(50, SEED, [-2.0, 2.0], [-2.0, 2.0])).unwrap().unwrap();
        let case = Case::new("fubini_study", "fubini_study", 1.5, None, 20);
        let q = case.lift.summary.q_constant;
        let fcs = frame_curvatures(&case.field(), &case.pts);
        let phi = fcs.iter().map(|f| f.phi.abs()).fold(0.0, f64::max);
        (l0, ricci_gram_error(&fcs, 1.5), phi, q)
    });
    let secs = t0.elapsed().as_secs_f64();
    let q_ok = q.is_some_and(|q| (q - 1.0).abs() < 1e-12);
    outcome(
        (l0 - 2.0).abs() < 1e-10 && q_ok && err < 1e-5 && phi < 1e-5 && secs < 30.0,
        format!("Λ₀ = {l0:.12}, q = {q:?}, max|Ric - Λ·Gram| = {err:.2e}, max Φ = {phi:.2e}, {secs:.2}s on one thread"),
    )
}

fn criterion_2() -> Outcome {
    let t0 = Instant::now();
    let case = Case::new("harmonic", "harmonic", 0.0, Some([0.5, 2.0]), 20);
    let fcs = frame_curvatures(&case.field(), &case.pts);
    let secs = t0.elapsed().as_secs_f64();
    let ric = ricci_gram_error(&fcs, 0.0);
    let d = fcs.iter().map(|f| f.d0.norm().max(f.d1.norm())).fold(0.0, f64::max);
    let (psi_min, at) = fcs
        .iter()
        .map(|f| (f.psi2.norm(), f.x))
        .fold((f64::INFINITY, [0.0; 4]), |a, b| if b.0 < a.0 { b } else { a });
    // closed form of |Psi2| for this profile
    let closed = (0.5 * at[3]).cos().abs().powi(3) / (2.0 * at[0].powi(3));
    outcome(
        ric < 1e-5 && d < 1e-5 && psi_min > 0.1 && secs < 30.0,
        format!(
            "max|Ric| = {ric:.2e}, max(|D0|,|D1|) = {d:.2e}, min|Ψ₂| = {psi_min:.4} at x = {:.3}, r = {:.3} \
             (closed form cos³(r/2)/(2x³) = {closed:.4}), {secs:.2}s",
            at[0], at[3]
        ),
    )
}

fn criterion_3() -> Outcome {
    let case = Case::new("frt", "frt", 0.0, None, 20);
    let rep = quasi_einstein_check(&case.field(), 0.0, &case.pts, &CheckConfig::default()).unwrap();
    outcome(
        rep.pattern_residual < 1e-4,
        format!(
            "pattern residual = {:.3e}, lift equation residual = {:.3e}, max Φ = {:.3e}, verdict {}",
            rep.pattern_residual, case.lift.summary.lift_equation_residual, rep.max_phi, rep.verdict
        ),
    )
}

fn criterion_4() -> Outcome {
    let mut ok = true;
    let mut parts = Vec::new();
    for lam in [1.0, -1.0] {
        let case = Case::new("tubular", "tubular", lam, None, 20);
        let rep = quasi_einstein_check(&case.field(), lam, &case.pts, &CheckConfig::default()).unwrap();
        let pr = TubularProblem::new(Potential::tubular_default(), lam).unwrap();
        let order = ode_order(&pr, 0.5, 0.0, [0.0, 1.0], 0.05).unwrap();
        let sol = case.lift.ode.as_ref().expect("ode branch");
        // oracle derivatives against differences of the dense output
        let d = 1e-4;
        let y = 0.5 * (sol.y0 + sol.y1);
        let o = sol.oracle(y).unwrap();
        let fd = (sol.q(y + d).unwrap() - sol.q(y - d).unwrap()) / (2.0 * d);
        let oracle_err = (o[1] - fd).abs();
        let pass = rep.pattern_residual < 1e-4 && order >= 3.8 && oracle_err < 1e-6 && rep.verdict == Verdict::QuasiEinstein;
        ok &= pass;
        parts.push(format!(
            "Λ = {lam}: pattern {:.2e}, max Φ = {:.3}, verdict {}, RK order {order:.3}, oracle q' error {oracle_err:.1e}",
            rep.pattern_residual, rep.max_phi, rep.verdict
        ));
    }
    outcome(ok, parts.join("; "))
}

fn criterion_5() -> Outcome {
    let p = Potential::fubini_study();
    let (x, y) = ([-1.0, 1.0], [-1.0, 1.0]);
    let n = 129;
    let mut cfg = GridConfig::new(x, y, n, n);
    cfg.tol = 1e-10;
    let mut q0 = Vec::with_capacity(n * n);
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    for j in 0..n {
        for i in 0..n {
            let (xi, yj) = (x[0] + 2.0 * i as f64 / (n - 1) as f64, y[0] + 2.0 * j as f64 / (n - 1) as f64);
            let bump = (std::f64::consts::PI * 0.5 * (xi + 1.0)).sin() * (std::f64::consts::PI * 0.5 * (yj + 1.0)).sin();
            q0.push(1.0 + 0.3 * bump + 0.02 * (rng.gen::<f64>() - 0.5));
        }
    }
    cfg.initial = InitialGuess::Values(q0);
    let sol = solve_logistic(&p, 1.5, &cfg).unwrap();
    let dev = sol.q.iter().map(|v| (v - 1.0).abs()).fold(0.0, f64::max);

    let solve = |n: usize| {
        let mut c = GridConfig::new(x, y, n, n);
        c.tol = 1e-10;
        c.boundary = Boundary::expression("1 + 0.2*x*y + 0.1*x^2").unwrap();
        c.initial = InitialGuess::Constant(1.0);
        solve_logistic(&p, 1.5, &c).unwrap()
    };
    let order = grid_order(&solve(65), &solve(129), &solve(257)).unwrap();
    outcome(
        sol.residual_norm < 1e-10 && sol.newton_iters <= 10 && dev < 1e-8 && (order - 2.0).abs() <= 0.2,
        format!(
            "129²: residual {:.2e} after {} Newton steps, max|q - 1| = {dev:.1e}; grid order 65/129/257 = {order:.3}",
            sol.residual_norm, sol.newton_iters
        ),
    )
}

fn random_gauge(rng: &mut ChaCha8Rng) -> String {
    let mut c = || format!("{:.6}", rng.gen_range(-0.5..0.5));
    format!(
        "3 + {}*x + {}*y + {}*x*y + {}*x^2 + i*({} + {}*x + {}*y^2) + {}*exp({}*x)",
        c(),
        c(),
        c(),
        c(),
        c(),
        c(),
        c(),
        c(),
        c()
    )
}

fn criterion_6() -> Outcome {
    let mut structure: f64 = 0.0;
    let mut sasakian: f64 = 0.0;
    for e in catalog() {
        let pts = plane_points(50, SEED, e.sample_region[0], e.sample_region[1]);
        for &[x, y] in &pts {
            structure = structure.max(verify_structure_equation(&e.potential, x, y).unwrap());
        }
        sasakian = sasakian.max(check_sasakian(&e.potential, &pts, 1e-9).unwrap().max_residual);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut gauge: f64 = 0.0;
    for (p, region) in [
        (Potential::fubini_study(), [[-1.0, 1.0], [-1.0, 1.0]]),
        (Potential::harmonic_default(), [[0.5, 2.0], [-1.0, 1.0]]),
    ] {
        for _ in 0..10 {
            let g = GaugePair::new(&random_gauge(&mut rng)).unwrap();
            let x = rng.gen_range(region[0][0]..region[0][1]);
            let y = rng.gen_range(region[1][0]..region[1][1]);
            let pt = CrPoint::new(&p, x, y).unwrap();
            let law = gauge_transform(&pt, &g).unwrap();
            let (dl, _, [m, mb, l]) = transformed_coframe(&pt, &g).unwrap();
            let [k12, k13, k23] = dl.decompose(&m, &mb, &l).unwrap();
            gauge = gauge
                .max((k12 - Complex64::i()).norm())
                .max((k13 - law.c).norm())
                .max((k23 - law.c.conj()).norm());
        }
    }
    outcome(
        structure < 1e-9 && sasakian < 1e-9 && gauge < 1e-10,
        format!("structure {structure:.2e}, Sasakian {sasakian:.2e} (6 × 50 points); gauge law for c {gauge:.2e} (2 × 10 gauges)"),
    )
}

fn criterion_7() -> Outcome {
    let profiles = [
        LiftProfile::new(Potential::fubini_study(), 1.5, ConformalFactor::Constant(1.0)).unwrap(),
        LiftProfile::new(Potential::harmonic_default(), 0.0, ConformalFactor::PowerOfFzzbar(1.0)).unwrap(),
    ];
    let regions = [[[-2.0, 2.0], [-2.0, 2.0]], [[0.5, 2.0], [-1.0, 1.0]]];
    let mut b: f64 = 0.0;
    let mut parts = Vec::new();
    let mut spread_ok = true;
    for (prof, reg) in profiles.iter().zip(regions) {
        for [x, y] in plane_points(50, SEED, reg[0], reg[1]) {
            b = b.max(prof.point(x, y).unwrap().b().unwrap().b.norm());
        }
        // keep r away from pi where Psi2 vanishes
        let pts = spacetime_points(10, SEED, [reg[0], reg[1], U_RANGE, [-2.0, 2.0]]);
        let field = prof.clone().metric_field();
        let ratios: Vec<Complex64> = pts
            .iter()
            .map(|&x| {
                let fd = frame_curvature(&field, x, &StencilConfig::default()).unwrap().psi2;
                fd / prof.point(x[0], x[1]).unwrap().psi2_formula(x[3])
            })
            .collect();
        let mean = ratios.iter().sum::<Complex64>() / ratios.len() as f64;
        let spread = ratios.iter().map(|r| (r - mean).norm()).fold(0.0, f64::max) / mean.norm();
        spread_ok &= spread < 1e-3;
        parts.push(format!("{} Ψ₂ ratio {:.6}{:+.1e}i (spread {spread:.1e})", prof.potential().kind().name(), mean.re, mean.im));
    }
    let mut m_res: f64 = 0.0;
    for e in catalog() {
        let prof = LiftProfile::new(e.potential.clone(), e.default_lambda, ConformalFactor::Constant(1.0)).unwrap();
        for [x, y] in plane_points(50, SEED, e.sample_region[0], e.sample_region[1]) {
            m_res = m_res.max(prof.point(x, y).unwrap().m_equation_residual().unwrap());
        }
    }
    outcome(
        b < 1e-10 && m_res < 1e-10 && spread_ok,
        format!("max|B| = {b:.2e}, max|∂m + 3cm| = {m_res:.2e}; {}", parts.join(", ")),
    )
}

fn lifts_1_to_4() -> Vec<Case> {
    vec![
        Case::new("fubini_study", "fubini_study", 1.5, None, 20),
        Case::new("harmonic", "harmonic", 0.0, Some([0.5, 2.0]), 20),
        Case::new("frt", "frt", 0.0, None, 20),
        Case::new("tubular Λ=1", "tubular", 1.0, None, 20),
        Case::new("tubular Λ=-1", "tubular", -1.0, None, 20),
    ]
}

fn criterion_8() -> Outcome {
    let (mut rho, mut res) = (0.0f64, 0.0f64);
    for case in lifts_1_to_4() {
        let rep = shearfree_check(&case.field(), &case.pts, &StencilConfig::default()).unwrap();
        res = res.max(rep.max_residual);
        for s in &rep.samples {
            rho = rho.max((s.rho - (0.5 * s.r).tan()).abs());
        }
    }
    outcome(rho < 1e-6 && res < 1e-8, format!("max|ρ - tan(r/2)| = {rho:.2e}, max restricted residual = {res:.2e} over 5 lifts"))
}

fn criterion_9() -> Outcome {
    let cfg = CheckConfig::default();
    let mut ok = true;
    let mut parts = Vec::new();
    for case in lifts_1_to_4() {
        let field = case.field();
        let reflected = field.with_convention(RConvention::Reflected);
        let rep = gauge_reflection_check(&field, &reflected, case.lambda, &case.pts, &cfg).unwrap();
        ok &= rep.verdict == rep.verdict_reflected;
        parts.push(format!("{}: {} / {}", case.name, rep.verdict, rep.verdict_reflected));
    }
    outcome(ok, parts.join(", "))
}

fn main() {
    let criteria: [Criterion; 9] = [
        ("Kähler–Einstein lift is Einstein", criterion_1),
        ("Ricci-flat harmonic lift, type II/D", criterion_2),
        ("FRT lift is quasi-Einstein", criterion_3),
        ("tubular ODE lift is quasi-Einstein", criterion_4),
        ("logistic grid solver", criterion_5),
        ("structure equation, Sasakian and gauge law", criterion_6),
        ("formula layer: B, m equation, Ψ₂ ratio", criterion_7),
        ("shearfree congruence", criterion_8),
        ("r -> -r reflection keeps verdicts", criterion_9),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let o = f();
        if !o.passed {
            failed += 1;
        }
        println!("criterion {} [{}] {name}: {}", i + 1, if o.passed { "PASS" } else { "FAIL" }, o.detail);
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
