//! The tubular reduction `q'' + R q = K Lambda F_yy q^3`, `R = -(1/4) (log F_yy)''`,
//! integrated with classical RK4.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::jet::{Analytic, Jet1};
use crate::lift::LiftProfile;
use crate::potential::Potential;

/// Cubic coefficient `K` that makes `p = sqrt(F_yy) q` a solution of the
/// reduced lift equation.
pub const CUBIC_COEFFICIENT: f64 = 4.0 / 3.0;

#[derive(Clone, Debug)]
pub struct TubularProblem {
    pub potential: Potential,
    pub lambda: f64,
    pub cubic: f64,
}

impl TubularProblem {
    pub fn new(potential: Potential, lambda: f64) -> Result<Self> {
        if !potential.is_tubular() {
            return Err(Error::Config("tubular ODE needs a tubular potential".into()));
        }
        Ok(Self { potential, lambda, cubic: CUBIC_COEFFICIENT })
    }

    pub fn with_cubic(mut self, k: f64) -> Self {
        self.cubic = k;
        self
    }

    /// Jets of `R` and `F_yy` at `y`, both of the given order.
    fn coefficient_jets(&self, y: f64, order: usize) -> Result<(Jet1, Jet1)> {
        let f = self.potential.jet_y(y, order + 2)?;
        let fyy = f.d()?.d()?;
        if !(fyy.value().re > 0.0) {
            return Err(Error::NotPseudoconvex { x: 0.0, y, value: fyy.value().re / 4.0 });
        }
        // R needs two more derivatives than F_yy
        let g = self.potential.jet_y(y, order + 4)?.d()?.d()?;
        let r = g.ln()?.d()?.d()?.scale(Complex64::new(-0.25, 0.0));
        Ok((r, fyy))
    }

    fn rhs(&self, y: f64, q: f64) -> Result<f64> {
        let (r, fyy) = self.coefficient_jets(y, 0)?;
        Ok(-r.value().re * q + self.cubic * self.lambda * fyy.value().re * q.powi(3))
    }

    fn rk4_step(&self, y: f64, s: [f64; 2], h: f64) -> Result<[f64; 2]> {
        let f = |y: f64, s: [f64; 2]| -> Result<[f64; 2]> { Ok([s[1], self.rhs(y, s[0])?]) };
        let k1 = f(y, s)?;
        let k2 = f(y + 0.5 * h, [s[0] + 0.5 * h * k1[0], s[1] + 0.5 * h * k1[1]])?;
        let k3 = f(y + 0.5 * h, [s[0] + 0.5 * h * k2[0], s[1] + 0.5 * h * k2[1]])?;
        let k4 = f(y + h, [s[0] + h * k3[0], s[1] + h * k3[1]])?;
        Ok([
            s[0] + h / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]),
            s[1] + h / 6.0 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]),
        ])
    }

    /// Taylor jet of the solution through `(y, q, q')`, from the ODE itself.
    pub fn taylor(&self, y: f64, q: f64, qp: f64, order: usize) -> Result<Jet1> {
        let mut coeffs = vec![Complex64::default(); order + 1];
        coeffs[0] = Complex64::new(q, 0.0);
        if order >= 1 {
            coeffs[1] = Complex64::new(qp, 0.0);
        }
        if order < 2 {
            return Ok(Jet1::from_coeffs(y, coeffs));
        }
        let (r, fyy) = self.coefficient_jets(y, order - 2)?;
        let kl = Complex64::new(self.cubic * self.lambda, 0.0);
        for k in 0..=order - 2 {
            let qj = Jet1::from_coeffs(y, coeffs.clone());
            let rhs = -(&r * &qj) + (&fyy * &(&(&qj * &qj) * &qj)).scale(kl);
            coeffs[k + 2] = rhs.coeff(k) / ((k + 1) * (k + 2)) as f64;
        }
        Ok(Jet1::from_coeffs(y, coeffs))
    }
}

/// RK4 solution on `[y0, y1]` with nodes every `h`.
#[derive(Clone, Debug)]
pub struct OdeSolution {
    pub problem: TubularProblem,
    pub y0: f64,
    pub y1: f64,
    pub h: f64,
    /// `(q, q')` at `y0 + k h`.
    pub nodes: Vec<[f64; 2]>,
}

/// Integrates from `(y0, q0, qp0)` to `y1` with a step close to `h`.
pub fn solve_tubular(problem: TubularProblem, q0: f64, qp0: f64, range: [f64; 2], h: f64) -> Result<OdeSolution> {
    let [y0, y1] = range;
    if !(q0 > 0.0) {
        return Err(Error::Config(format!("initial q0 = {q0} must be positive")));
    }
    if !(h > 0.0) || !(y1 > y0) {
        return Err(Error::Config("ODE needs h > 0 and y1 > y0".into()));
    }
    let n = ((y1 - y0) / h).round().max(1.0) as usize;
    let h = (y1 - y0) / n as f64;
    let mut nodes = Vec::with_capacity(n + 1);
    let mut s = [q0, qp0];
    nodes.push(s);
    for k in 0..n {
        let y = y0 + k as f64 * h;
        let next = problem.rk4_step(y, s, h)?;
        if !(next[0] > 0.0) || !next[1].is_finite() {
            let at = if next[0].is_finite() && s[0] != next[0] { y + h * s[0] / (s[0] - next[0]) } else { y + h };
            return Err(Error::Solver {
                msg: format!("q reaches zero or blows up near y = {at:.6}"),
                history: nodes.iter().map(|v| v[0]).collect(),
            });
        }
        s = next;
        nodes.push(s);
    }
    Ok(OdeSolution { problem, y0, y1, h, nodes })
}

impl OdeSolution {
    /// `(q, q')` at any `y` in range: one RK4 step from the node below.
    pub fn state(&self, y: f64) -> Result<[f64; 2]> {
        let span = self.y1 - self.y0;
        if !(y >= self.y0 - 1e-12 * span && y <= self.y1 + 1e-12 * span) {
            return Err(Error::OutsideDomain { x: f64::NAN, y, domain: format!("ODE range [{}, {}]", self.y0, self.y1) });
        }
        let n = self.nodes.len() - 1;
        let k = (((y - self.y0) / self.h).floor().max(0.0) as usize).min(n);
        let yk = self.y0 + k as f64 * self.h;
        let d = y - yk;
        if d.abs() < 1e-15 * span {
            return Ok(self.nodes[k]);
        }
        self.problem.rk4_step(yk, self.nodes[k], d)
    }

    pub fn q(&self, y: f64) -> Result<f64> {
        Ok(self.state(y)?[0])
    }

    /// Jet of `q` at `y` built from the ODE.
    pub fn jet(&self, y: f64, order: usize) -> Result<Jet1> {
        let [q, qp] = self.state(y)?;
        self.problem.taylor(y, q, qp, order)
    }

    /// `q, q', q'', q''', q''''` at `y`.
    pub fn oracle(&self, y: f64) -> Result<[f64; 5]> {
        let j = self.jet(y, 4)?;
        Ok([0, 1, 2, 3, 4].map(|k| j.derivative(k).re))
    }
}

/// Order estimate `log2(|q_h - q_{h/2}| / |q_{h/2} - q_{h/4}|)` at the end of the range.
pub fn self_convergence_order(problem: &TubularProblem, q0: f64, qp0: f64, range: [f64; 2], h: f64) -> Result<f64> {
    let end = |h: f64| -> Result<f64> { Ok(solve_tubular(problem.clone(), q0, qp0, range, h)?.nodes.last().unwrap()[0]) };
    let (a, b, c) = (end(h)?, end(h / 2.0)?, end(h / 4.0)?);
    Ok(((a - b).abs() / (b - c).abs()).log2())
}

/// Residual of `p'' - i cbar p' + i c p' + (|c|^2 - (3/2) i cbar') p = K Lambda p^3`
/// at the given points, with `p` taken from the profile.
pub fn tubular_pde_residual(profile: &LiftProfile, points: &[[f64; 2]], k: f64) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for &[x, y] in points {
        let pt = profile.point(x, y)?;
        let c = pt.cr.c;
        let p = &pt.p;
        let py = p.dy()?.value();
        let pyy = p.dy()?.dy()?.value();
        let cb_y = pt.cr.c_jet.conj().dy()?.value();
        let i = Complex64::new(0.0, 1.0);
        let pv = pt.p_value();
        let res = pyy - i * c.conj() * py + i * c * py + (c.norm_sqr() - 1.5 * i * cb_y) * pv
            - k * profile.lambda() * pv.powi(3);
        worst = worst.max(res.norm());
    }
    Ok(worst)
}
