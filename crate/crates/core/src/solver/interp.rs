//! Jets of grid solutions: piecewise bicubic Hermite interpolation, or a
//! global tensor Chebyshev least-squares fit when several smooth derivatives
//! are needed (the bicubic patches are only C^1 across cells).

use crate::error::{Error, Result};
use crate::jet::{Analytic, Jet2};

use super::logistic::GridSolution;

const M: [[f64; 4]; 4] = [[1.0, 0.0, 0.0, 0.0], [0.0, 0.0, 1.0, 0.0], [-3.0, 3.0, -2.0, -1.0], [2.0, -2.0, 1.0, 1.0]];

/// Piecewise bicubic interpolant (nodal derivatives from finite differences)
/// or a smooth Chebyshev fit.
#[derive(Clone, Debug)]
pub struct GridInterpolant {
    x: [f64; 2],
    y: [f64; 2],
    nx: usize,
    ny: usize,
    hx: f64,
    hy: f64,
    f: Vec<f64>,
    fx: Vec<f64>,
    fy: Vec<f64>,
    fxy: Vec<f64>,
    fit: Option<ChebyshevFit>,
}

/// `q(x, y) = sum c[a][b] T_a(s) T_b(t)` with `s`, `t` the coordinates mapped to `[-1, 1]`.
#[derive(Clone, Debug)]
struct ChebyshevFit {
    degree: usize,
    /// Row-major, `x` degree first.
    c: Vec<f64>,
}

fn chebyshev_row(s: f64, degree: usize) -> Vec<f64> {
    let mut t = vec![1.0; degree + 1];
    if degree >= 1 {
        t[1] = s;
    }
    for k in 2..=degree {
        t[k] = 2.0 * s * t[k - 1] - t[k - 2];
    }
    t
}

/// Least-squares projector `(T^T T)^{-1} T^T` for Chebyshev polynomials up to
/// `degree` sampled at `n` uniform points; `(degree + 1) x n`, row-major.
fn projector(n: usize, degree: usize) -> Result<Vec<f64>> {
    let m = degree + 1;
    let rows: Vec<Vec<f64>> = (0..n).map(|i| chebyshev_row(-1.0 + 2.0 * i as f64 / (n - 1) as f64, degree)).collect();
    // normal matrix, then Cholesky
    let mut a = vec![0.0; m * m];
    for r in &rows {
        for p in 0..m {
            for q in 0..m {
                a[p * m + q] += r[p] * r[q];
            }
        }
    }
    for j in 0..m {
        let d = a[j * m + j] - (0..j).map(|k| a[j * m + k] * a[j * m + k]).sum::<f64>();
        if !(d > 0.0) {
            return Err(Error::Singular("Chebyshev normal matrix is not positive definite".into()));
        }
        let d = d.sqrt();
        a[j * m + j] = d;
        for i in j + 1..m {
            let v = a[i * m + j] - (0..j).map(|k| a[i * m + k] * a[j * m + k]).sum::<f64>();
            a[i * m + j] = v / d;
        }
    }
    let mut out = vec![0.0; m * n];
    for (col, r) in rows.iter().enumerate() {
        // solve L L^T z = r
        let mut z = r.clone();
        for i in 0..m {
            z[i] = (z[i] - (0..i).map(|k| a[i * m + k] * z[k]).sum::<f64>()) / a[i * m + i];
        }
        for i in (0..m).rev() {
            z[i] = (z[i] - (i + 1..m).map(|k| a[k * m + i] * z[k]).sum::<f64>()) / a[i * m + i];
        }
        for p in 0..m {
            out[p * n + col] = z[p];
        }
    }
    Ok(out)
}

/// Jets of `T_0 .. T_degree` composed with the affine map `v -> (v - mid) / half`.
fn chebyshev_jets(v: Jet2, mid: f64, half: f64, degree: usize) -> Vec<Jet2> {
    let base = v.base();
    let order = v.order();
    let s = (v - Jet2::constant(mid, base, order)) * (1.0 / half);
    let mut t = vec![Jet2::constant(1.0, base, order), s.clone()];
    for k in 2..=degree {
        let next = (&s * &t[k - 1]) * 2.0 - t[k - 2].clone();
        t.push(next);
    }
    t.truncate(degree + 1);
    t
}

/// Second-order derivative along a line of samples, in grid units.
fn line_derivative(v: &[f64], k: usize) -> f64 {
    let n = v.len();
    if k == 0 {
        (-3.0 * v[0] + 4.0 * v[1] - v[2]) / 2.0
    } else if k == n - 1 {
        (3.0 * v[n - 1] - 4.0 * v[n - 2] + v[n - 3]) / 2.0
    } else {
        (v[k + 1] - v[k - 1]) / 2.0
    }
}

impl GridInterpolant {
    pub fn new(sol: &GridSolution) -> Result<Self> {
        let (nx, ny) = (sol.nx, sol.ny);
        if nx < 3 || ny < 3 {
            return Err(Error::Config("interpolation needs at least 3x3 nodes".into()));
        }
        let f = sol.q.clone();
        let idx = |i: usize, j: usize| j * nx + i;
        let mut fx = vec![0.0; nx * ny];
        let mut fy = vec![0.0; nx * ny];
        for j in 0..ny {
            let row: Vec<f64> = (0..nx).map(|i| f[idx(i, j)]).collect();
            for i in 0..nx {
                fx[idx(i, j)] = line_derivative(&row, i);
            }
        }
        for i in 0..nx {
            let col: Vec<f64> = (0..ny).map(|j| f[idx(i, j)]).collect();
            for j in 0..ny {
                fy[idx(i, j)] = line_derivative(&col, j);
            }
        }
        let mut fxy = vec![0.0; nx * ny];
        for i in 0..nx {
            let col: Vec<f64> = (0..ny).map(|j| fx[idx(i, j)]).collect();
            for j in 0..ny {
                fxy[idx(i, j)] = line_derivative(&col, j);
            }
        }
        Ok(Self {
            x: sol.x,
            y: sol.y,
            nx,
            ny,
            hx: (sol.x[1] - sol.x[0]) / (nx - 1) as f64,
            hy: (sol.y[1] - sol.y[0]) / (ny - 1) as f64,
            f,
            fx,
            fy,
            fxy,
            fit: None,
        })
    }

    /// Smooth global fit of the nodal values by a tensor Chebyshev series of
    /// the given degree in each variable (at most `min(nx, ny) - 1`).
    pub fn smooth(sol: &GridSolution, degree: usize) -> Result<Self> {
        let mut it = Self::new(sol)?;
        if degree + 1 > sol.nx.min(sol.ny) {
            return Err(Error::Config(format!("fit degree {degree} needs more than {} nodes per side", sol.nx.min(sol.ny))));
        }
        let m = degree + 1;
        let (nx, ny) = (sol.nx, sol.ny);
        let px = projector(nx, degree)?;
        let py = projector(ny, degree)?;
        // c = Px Q Py^T with Q[i][j] = q[j * nx + i]
        let mut tmp = vec![0.0; m * ny];
        for a in 0..m {
            for j in 0..ny {
                tmp[a * ny + j] = (0..nx).map(|i| px[a * nx + i] * sol.q[j * nx + i]).sum();
            }
        }
        let mut c = vec![0.0; m * m];
        for a in 0..m {
            for b in 0..m {
                c[a * m + b] = (0..ny).map(|j| tmp[a * ny + j] * py[b * ny + j]).sum();
            }
        }
        it.fit = Some(ChebyshevFit { degree, c });
        Ok(it)
    }

    /// Degree used by [`GridInterpolant::smooth`] for an `n`-node grid side.
    pub fn default_degree(n: usize) -> usize {
        ((n - 1) * 3 / 8).clamp(2, 40)
    }

    fn cell(&self, x: f64, y: f64) -> Result<(usize, usize)> {
        let tol = 1e-12;
        let inside = |v: f64, r: [f64; 2]| v >= r[0] - tol * (r[1] - r[0]) && v <= r[1] + tol * (r[1] - r[0]);
        if !(inside(x, self.x) && inside(y, self.y)) {
            return Err(Error::OutsideDomain {
                x,
                y,
                domain: format!("grid [{}, {}] x [{}, {}]", self.x[0], self.x[1], self.y[0], self.y[1]),
            });
        }
        let i = (((x - self.x[0]) / self.hx).floor().max(0.0) as usize).min(self.nx - 2);
        let j = (((y - self.y[0]) / self.hy).floor().max(0.0) as usize).min(self.ny - 2);
        Ok((i, j))
    }

    fn coefficients(&self, i: usize, j: usize) -> [[f64; 4]; 4] {
        let k = |di: usize, dj: usize| (j + dj) * self.nx + i + di;
        let g = |v: &[f64], di, dj| v[k(di, dj)];
        let fm = [
            [g(&self.f, 0, 0), g(&self.f, 0, 1), g(&self.fy, 0, 0), g(&self.fy, 0, 1)],
            [g(&self.f, 1, 0), g(&self.f, 1, 1), g(&self.fy, 1, 0), g(&self.fy, 1, 1)],
            [g(&self.fx, 0, 0), g(&self.fx, 0, 1), g(&self.fxy, 0, 0), g(&self.fxy, 0, 1)],
            [g(&self.fx, 1, 0), g(&self.fx, 1, 1), g(&self.fxy, 1, 0), g(&self.fxy, 1, 1)],
        ];
        let mut tmp = [[0.0; 4]; 4];
        for a in 0..4 {
            for b in 0..4 {
                tmp[a][b] = (0..4).map(|c| M[a][c] * fm[c][b]).sum();
            }
        }
        let mut out = [[0.0; 4]; 4];
        for a in 0..4 {
            for b in 0..4 {
                out[a][b] = (0..4).map(|c| tmp[a][c] * M[b][c]).sum();
            }
        }
        out
    }

    pub fn value(&self, x: f64, y: f64) -> Result<f64> {
        Ok(self.jet(x, y, 0)?.value().re)
    }

    /// Jet of the interpolant at `(x, y)`.
    pub fn jet(&self, x: f64, y: f64, order: usize) -> Result<Jet2> {
        let (i, j) = self.cell(x, y)?;
        if let Some(fit) = &self.fit {
            return Ok(self.fit_jet(fit, [x, y], order));
        }
        let a = self.coefficients(i, j);
        let base = [x, y];
        let x0 = self.x[0] + i as f64 * self.hx;
        let y0 = self.y[0] + j as f64 * self.hy;
        let s = (Jet2::var_x(base, order) - Jet2::constant(x0, base, order)) * (1.0 / self.hx);
        let t = (Jet2::var_y(base, order) - Jet2::constant(y0, base, order)) * (1.0 / self.hy);
        let mut acc = Jet2::zero(base, order);
        for ai in a.iter().rev() {
            let mut row = Jet2::zero(base, order);
            for &c in ai.iter().rev() {
                row = &row * &t + Jet2::constant(c, base, order);
            }
            acc = &acc * &s + row;
        }
        Ok(acc)
    }

    fn fit_jet(&self, fit: &ChebyshevFit, base: [f64; 2], order: usize) -> Jet2 {
        let m = fit.degree + 1;
        let mid = |r: [f64; 2]| (0.5 * (r[0] + r[1]), 0.5 * (r[1] - r[0]));
        let (mx, hx) = mid(self.x);
        let (my, hy) = mid(self.y);
        let tx = chebyshev_jets(Jet2::var_x(base, order), mx, hx, fit.degree);
        let ty = chebyshev_jets(Jet2::var_y(base, order), my, hy, fit.degree);
        let mut acc = Jet2::zero(base, order);
        for (a, txa) in tx.iter().enumerate() {
            let mut row = Jet2::zero(base, order);
            for (b, tyb) in ty.iter().enumerate() {
                row = row + tyb.clone() * fit.c[a * m + b];
            }
            acc = acc + txa * &row;
        }
        acc
    }
}
