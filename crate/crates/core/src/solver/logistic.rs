//! Damped Newton solver for `q_zzbar + a q = b q^3` on a rectangle,
//! with `a = R/4` and `b = (Lambda/3) F_zzbar`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cr::CrPoint;
use crate::error::{Error, Result};
use crate::expr::{parse_expression, Expr, Var};
use crate::potential::Potential;

use super::interp::GridInterpolant;
use super::linalg::{bicgstab, cg, LinearOperator};

/// Dirichlet data on the rectangle boundary.
#[derive(Clone, Debug, Default)]
pub enum Boundary {
    /// `sqrt(a/b)` where `a/b > 0`, otherwise `eps`.
    #[default]
    Asymptotic,
    Constant(f64),
    /// An expression in `x` and `y`.
    Expression(Expr),
}

impl Boundary {
    pub fn expression(text: &str) -> Result<Self> {
        Ok(Self::Expression(parse_expression(text)?))
    }
}

/// Starting iterate for the interior nodes.
#[derive(Clone, Debug, Default)]
pub enum InitialGuess {
    /// `sqrt(a/b)` pointwise, with `a` floored at `eps` when `b > 0`.
    #[default]
    Asymptotic,
    Constant(f64),
    /// Full nodal values in row-major order (`x` fastest).
    Values(Vec<f64>),
}

#[derive(Clone, Debug)]
pub struct GridConfig {
    pub x: [f64; 2],
    pub y: [f64; 2],
    pub nx: usize,
    pub ny: usize,
    pub tol: f64,
    pub max_iters: usize,
    pub eps: f64,
    pub boundary: Boundary,
    pub initial: InitialGuess,
}

impl GridConfig {
    pub fn new(x: [f64; 2], y: [f64; 2], nx: usize, ny: usize) -> Self {
        Self {
            x,
            y,
            nx,
            ny,
            tol: 1e-9,
            max_iters: 50,
            eps: 1e-6,
            boundary: Boundary::Asymptotic,
            initial: InitialGuess::Asymptotic,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LinearSolver {
    Cg,
    Bicgstab,
}

/// Nodal solution on a uniform grid; `q[j * nx + i]` sits at `node(i, j)`.
#[derive(Clone, Debug)]
pub struct GridSolution {
    pub x: [f64; 2],
    pub y: [f64; 2],
    pub nx: usize,
    pub ny: usize,
    pub q: Vec<f64>,
    pub residual_norm: f64,
    pub newton_iters: usize,
    pub history: Vec<f64>,
    pub warnings: Vec<String>,
    pub linear_solvers: Vec<LinearSolver>,
}

impl GridSolution {
    /// Wraps nodal values without solving anything.
    pub fn from_values(x: [f64; 2], y: [f64; 2], nx: usize, ny: usize, q: Vec<f64>) -> Self {
        assert_eq!(q.len(), nx * ny);
        Self {
            x,
            y,
            nx,
            ny,
            q,
            residual_norm: f64::NAN,
            newton_iters: 0,
            history: Vec::new(),
            warnings: Vec::new(),
            linear_solvers: Vec::new(),
        }
    }

    pub fn node(&self, i: usize, j: usize) -> (f64, f64) {
        node(self.x, self.y, self.nx, self.ny, i, j)
    }

    pub fn value(&self, i: usize, j: usize) -> f64 {
        self.q[j * self.nx + i]
    }

    pub fn interpolant(&self) -> Result<GridInterpolant> {
        GridInterpolant::new(self)
    }

    /// `x,y,q` lines with a header, one node per line.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("x,y,q\n");
        for j in 0..self.ny {
            for i in 0..self.nx {
                let (x, y) = self.node(i, j);
                s.push_str(&format!("{x:e},{y:e},{:e}\n", self.value(i, j)));
            }
        }
        s
    }

    /// Reads the output of [`GridSolution::to_csv`].
    pub fn from_csv(text: &str) -> Result<Self> {
        let mut lines = text.lines();
        if lines.next().map(str::trim) != Some("x,y,q") {
            return Err(Error::Config("grid CSV must start with the header `x,y,q`".into()));
        }
        let mut pts = Vec::new();
        for (n, line) in lines.enumerate().filter(|(_, l)| !l.trim().is_empty()) {
            let v: Vec<f64> = line
                .split(',')
                .map(|t| t.trim().parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| Error::Config(format!("grid CSV line {}: {e}", n + 2)))?;
            if v.len() != 3 {
                return Err(Error::Config(format!("grid CSV line {}: expected 3 fields", n + 2)));
            }
            pts.push([v[0], v[1], v[2]]);
        }
        let y0 = pts.first().ok_or_else(|| Error::Config("grid CSV has no rows".into()))?[1];
        let nx = pts.iter().take_while(|p| p[1] == y0).count();
        if nx < 2 || pts.len() % nx != 0 {
            return Err(Error::Config("grid CSV is not a full rectangular grid".into()));
        }
        let ny = pts.len() / nx;
        let last = pts[pts.len() - 1];
        let sol = Self::from_values([pts[0][0], last[0]], [y0, last[1]], nx, ny, pts.iter().map(|p| p[2]).collect());
        for (k, p) in pts.iter().enumerate() {
            let (x, y) = sol.node(k % nx, k / nx);
            let scale = 1e-9 * (1.0 + x.abs().max(y.abs()));
            if (x - p[0]).abs() > scale || (y - p[1]).abs() > scale {
                return Err(Error::Config(format!("grid CSV row {} is off the uniform grid", k + 2)));
            }
        }
        Ok(sol)
    }
}

fn node(x: [f64; 2], y: [f64; 2], nx: usize, ny: usize, i: usize, j: usize) -> (f64, f64) {
    (x[0] + (x[1] - x[0]) * i as f64 / (nx - 1) as f64, y[0] + (y[1] - y[0]) * j as f64 / (ny - 1) as f64)
}

/// `a = R/4` and `b = (Lambda/3) F_zzbar` at every node.
pub fn logistic_coefficients(p: &Potential, lambda: f64, cfg: &GridConfig) -> Result<(Vec<f64>, Vec<f64>)> {
    let pairs: Vec<(f64, f64)> = (0..cfg.nx * cfg.ny)
        .into_par_iter()
        .map(|k| {
            let (x, y) = node(cfg.x, cfg.y, cfg.nx, cfg.ny, k % cfg.nx, k / cfg.nx);
            let pt = CrPoint::new(p, x, y)?;
            Ok((0.25 * pt.ricci, lambda / 3.0 * pt.fzzbar()))
        })
        .collect::<Result<_>>()?;
    Ok(pairs.into_iter().unzip())
}

/// Discrete problem with fixed boundary values.
struct Discrete<'a> {
    nx: usize,
    ny: usize,
    cx: f64,
    cy: f64,
    a: &'a [f64],
    b: &'a [f64],
}

impl Discrete<'_> {
    fn interior(&self, i: usize, j: usize) -> bool {
        i > 0 && j > 0 && i + 1 < self.nx && j + 1 < self.ny
    }

    /// Residual `(1/4) Lap_h q + a q - b q^3` at interior nodes, zero on the boundary.
    fn residual(&self, q: &[f64]) -> Vec<f64> {
        let nx = self.nx;
        (0..q.len())
            .into_par_iter()
            .map(|k| {
                let (i, j) = (k % nx, k / nx);
                if !self.interior(i, j) {
                    return 0.0;
                }
                let lap = self.cx * (q[k - 1] - 2.0 * q[k] + q[k + 1]) + self.cy * (q[k - nx] - 2.0 * q[k] + q[k + nx]);
                0.25 * lap + self.a[k] * q[k] - self.b[k] * q[k].powi(3)
            })
            .collect()
    }
}

/// `-J` restricted to interior unknowns.
struct NegJacobian {
    mx: usize,
    my: usize,
    cx: f64,
    cy: f64,
    /// `-(a - 3 b q^2)` at interior nodes.
    shift: Vec<f64>,
}

impl LinearOperator for NegJacobian {
    fn dim(&self) -> usize {
        self.mx * self.my
    }

    fn apply(&self, x: &[f64], out: &mut [f64]) {
        let (mx, my) = (self.mx, self.my);
        out.par_iter_mut().enumerate().for_each(|(k, o)| {
            let (i, j) = (k % mx, k / mx);
            let l = if i > 0 { x[k - 1] } else { 0.0 };
            let r = if i + 1 < mx { x[k + 1] } else { 0.0 };
            let d = if j > 0 { x[k - mx] } else { 0.0 };
            let u = if j + 1 < my { x[k + mx] } else { 0.0 };
            let lap = self.cx * (l - 2.0 * x[k] + r) + self.cy * (d - 2.0 * x[k] + u);
            *o = -0.25 * lap + self.shift[k] * x[k];
        });
    }

    fn diagonal(&self) -> Vec<f64> {
        self.shift.iter().map(|s| 0.5 * (self.cx + self.cy) + s).collect()
    }
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// Solves the logistic equation with damped Newton.
pub fn solve_logistic(p: &Potential, lambda: f64, cfg: &GridConfig) -> Result<GridSolution> {
    let (nx, ny) = (cfg.nx, cfg.ny);
    if nx < 3 || ny < 3 {
        return Err(Error::Config("grid needs at least 3 nodes per side".into()));
    }
    if !(cfg.tol > 0.0 && cfg.eps > 0.0) {
        return Err(Error::Config("solver tolerances must be positive".into()));
    }
    let (a, b) = logistic_coefficients(p, lambda, cfg)?;
    let hx = (cfg.x[1] - cfg.x[0]) / (nx - 1) as f64;
    let hy = (cfg.y[1] - cfg.y[0]) / (ny - 1) as f64;
    let disc = Discrete { nx, ny, cx: 1.0 / (hx * hx), cy: 1.0 / (hy * hy), a: &a, b: &b };

    // sqrt(a/b) where a and b share a sign; with b > 0 the initial guess floors a at eps
    let asymptotic = |k: usize, floor_a: bool| {
        let num = if floor_a && b[k] > 0.0 { a[k].max(cfg.eps) } else { a[k] };
        let ratio = num / b[k];
        if ratio > 0.0 && ratio.is_finite() {
            ratio.sqrt().max(cfg.eps)
        } else {
            cfg.eps
        }
    };

    let mut warnings = Vec::new();
    let boundary: Vec<usize> = (0..nx * ny).filter(|&k| !disc.interior(k % nx, k / nx)).collect();
    let bad_a = boundary.iter().filter(|&&k| !(a[k] > 0.0)).count();
    let bad_b = boundary.iter().filter(|&&k| !(b[k] > 0.0)).count();
    if bad_a > 0 || bad_b > 0 {
        warnings.push(format!(
            "a > 0, b > 0 fails on the boundary (a <= 0 at {bad_a}, b <= 0 at {bad_b} of {} nodes); \
             asymptotic boundary data falls back to eps there, so q need not be smooth",
            boundary.len()
        ));
    }

    let mut q: Vec<f64> = match &cfg.initial {
        InitialGuess::Asymptotic => (0..nx * ny).map(|k| asymptotic(k, true)).collect(),
        InitialGuess::Constant(c) => vec![*c; nx * ny],
        InitialGuess::Values(v) => {
            if v.len() != nx * ny {
                return Err(Error::Config("initial guess has the wrong number of values".into()));
            }
            v.clone()
        }
    };
    for &k in &boundary {
        let (x, y) = node(cfg.x, cfg.y, nx, ny, k % nx, k / nx);
        q[k] = match &cfg.boundary {
            Boundary::Asymptotic => asymptotic(k, false),
            Boundary::Constant(c) => *c,
            Boundary::Expression(e) => eval_real(e, x, y)?,
        };
    }
    if let Some(k) = q.iter().position(|v| !(*v > 0.0)) {
        return Err(Error::Solver { msg: format!("initial iterate is not positive at node {k}"), history: Vec::new() });
    }

    let (mx, my) = (nx - 2, ny - 2);
    let to_grid = |k: usize| (k / mx + 1) * nx + k % mx + 1;
    let mut res = disc.residual(&q);
    let mut norm = max_abs(&res);
    let mut history = vec![norm];
    let mut solvers = Vec::new();
    let mut iters = 0;
    while norm > cfg.tol {
        if iters >= cfg.max_iters {
            return Err(Error::Solver { msg: format!("Newton did not converge in {} iterations", cfg.max_iters), history });
        }
        iters += 1;
        let shift: Vec<f64> = (0..mx * my)
            .map(|k| {
                let g = to_grid(k);
                -(a[g] - 3.0 * b[g] * q[g] * q[g])
            })
            .collect();
        let spd = shift.iter().all(|s| *s >= 0.0);
        let op = NegJacobian { mx, my, cx: disc.cx, cy: disc.cy, shift };
        // -J delta = F
        let rhs: Vec<f64> = (0..mx * my).map(|k| res[to_grid(k)]).collect();
        let mut delta = vec![0.0; mx * my];
        let max_lin = 20 * (mx * my).max(100);
        let solved = if spd {
            solvers.push(LinearSolver::Cg);
            cg(&op, &rhs, &mut delta, 1e-12, max_lin)
        } else {
            solvers.push(LinearSolver::Bicgstab);
            bicgstab(&op, &rhs, &mut delta, 1e-12, max_lin)
        };
        solved.map_err(|e| Error::Solver { msg: format!("linear solve failed: {e}"), history: history.clone() })?;

        let mut t = 1.0;
        loop {
            let mut trial = q.clone();
            for (k, d) in delta.iter().enumerate() {
                trial[to_grid(k)] += t * d;
            }
            if trial.iter().all(|v| *v > 0.0) {
                let r = disc.residual(&trial);
                let n = max_abs(&r);
                if n < norm || t < 1.0 / 1024.0 && n.is_finite() && n < 10.0 * norm {
                    q = trial;
                    res = r;
                    norm = n;
                    break;
                }
            }
            t *= 0.5;
            if t < 1e-9 {
                return Err(Error::Solver { msg: "line search failed to keep q positive and reduce the residual".into(), history });
            }
        }
        history.push(norm);
        // three steps without halving the residual: stuck at the rounding floor
        let k = history.len();
        if k >= 4 && history[k - 4..].windows(2).all(|w| w[1] > 0.5 * w[0]) && norm < 1e-6 {
            return Err(Error::Solver {
                msg: format!("Newton stagnated at residual {norm:.3e}, above tol {:e}; the tolerance is below the rounding floor of this grid", cfg.tol),
                history,
            });
        }
    }
    Ok(GridSolution {
        x: cfg.x,
        y: cfg.y,
        nx,
        ny,
        q,
        residual_norm: norm,
        newton_iters: iters,
        history,
        warnings,
        linear_solvers: solvers,
    })
}

fn eval_real(e: &Expr, x: f64, y: f64) -> Result<f64> {
    use crate::jet::{Analytic, Jet2};
    let b = [x, y];
    let v = e.eval(
        &|v| {
            Ok(match v {
                Var::X => Jet2::var_x(b, 0),
                Var::Y => Jet2::var_y(b, 0),
                Var::Z => Jet2::var_z(b, 0),
            })
        },
        &Jet2::constant(1.0, b, 0),
    )?;
    Ok(v.value().re)
}

/// Richardson extrapolation `(4 q_fine - q_coarse) / 3` at the coarse nodes,
/// removing the `h^2` term of the five-point discretization error.
pub fn richardson_combine(coarse: &GridSolution, fine: &GridSolution) -> Result<GridSolution> {
    if fine.nx != 2 * coarse.nx - 1 || fine.ny != 2 * coarse.ny - 1 || fine.x != coarse.x || fine.y != coarse.y {
        return Err(Error::Config("extrapolation needs the fine grid to halve the coarse one".into()));
    }
    let mut q = coarse.q.clone();
    for j in 0..coarse.ny {
        for i in 0..coarse.nx {
            q[j * coarse.nx + i] = (4.0 * fine.value(2 * i, 2 * j) - coarse.value(i, j)) / 3.0;
        }
    }
    let mut out = GridSolution::from_values(coarse.x, coarse.y, coarse.nx, coarse.ny, q);
    out.residual_norm = coarse.residual_norm.max(fine.residual_norm);
    out.newton_iters = coarse.newton_iters + fine.newton_iters;
    out.history = fine.history.clone();
    out.warnings = coarse.warnings.clone();
    out.linear_solvers = [coarse.linear_solvers.clone(), fine.linear_solvers.clone()].concat();
    Ok(out)
}

/// Observed convergence order from solutions on grids with `n`, `2n-1`, `4n-3`
/// nodes per side, compared at the coarse nodes.
pub fn self_convergence_order(coarse: &GridSolution, mid: &GridSolution, fine: &GridSolution) -> Result<f64> {
    if mid.nx != 2 * coarse.nx - 1 || fine.nx != 2 * mid.nx - 1 || mid.ny != 2 * coarse.ny - 1 || fine.ny != 2 * mid.ny - 1 {
        return Err(Error::Config("grids must be nested by halving".into()));
    }
    let (mut e1, mut e2) = (0.0f64, 0.0f64);
    for j in 0..coarse.ny {
        for i in 0..coarse.nx {
            let c = coarse.value(i, j);
            let m = mid.value(2 * i, 2 * j);
            let f = fine.value(4 * i, 4 * j);
            e1 = e1.max((c - m).abs());
            e2 = e2.max((m - f).abs());
        }
    }
    Ok((e1 / e2).log2())
}
