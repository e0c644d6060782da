//! Finite-difference curvature of an arbitrary metric field.
//!
//! Only metric evaluations are used, so the engine is independent of every
//! closed-form expression in [`crate::lift`]. First and second derivatives of
//! `g` use central differences with step `h max(1, |x_i|)`, optionally improved
//! by one Richardson extrapolation against step `2h`.
//!
//! Conventions: `R_abcd` is the covariant Riemann tensor with
//! `Ric_bd = g^ac R_abcd`, positive on spheres.

use std::collections::BTreeMap;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Mat4 = [[f64; 4]; 4];
pub type Tensor3 = [[[f64; 4]; 4]; 4];
pub type Tensor4 = [[[[f64; 4]; 4]; 4]; 4];
pub type Vec4c = [Complex64; 4];

/// A null tetrad `e_1 .. e_4` with `g(e1, e2) = g(e3, e4) = 1`, and the
/// conformal scale `P` used to turn `Ric_33` into `Phi`.
#[derive(Clone, Debug)]
pub struct NullFrame {
    pub e: [Vec4c; 4],
    pub big_p: f64,
}

/// A metric on a four-dimensional coordinate patch.
pub trait Spacetime: Sync {
    fn metric(&self, x: [f64; 4]) -> Result<Mat4>;

    fn null_frame(&self, _x: [f64; 4]) -> Result<Option<NullFrame>> {
        Ok(None)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StencilConfig {
    pub h: f64,
    pub richardson: bool,
}

impl Default for StencilConfig {
    fn default() -> Self {
        Self { h: 1e-3, richardson: true }
    }
}

/// Metric, its derivatives and all curvature derived from them at one point.
#[derive(Clone, Debug)]
pub struct Geometry {
    pub g: Mat4,
    pub ginv: Mat4,
    /// `dg[c][a][b] = d_c g_ab`
    pub dg: [Mat4; 4],
    /// `ddg[c][d][a][b] = d_c d_d g_ab`
    pub ddg: [[Mat4; 4]; 4],
    /// `christoffel[a][b][c] = Gamma^a_bc`
    pub christoffel: Tensor3,
    pub riemann: Tensor4,
    pub ricci: Mat4,
    pub scalar: f64,
    pub weyl: Tensor4,
}

fn axpy(a: &mut Mat4, s: f64, b: &Mat4) {
    for i in 0..4 {
        for j in 0..4 {
            a[i][j] += s * b[i][j];
        }
    }
}

fn shifted(x: [f64; 4], steps: &[(usize, f64)]) -> [f64; 4] {
    let mut y = x;
    for &(k, d) in steps {
        y[k] += d;
    }
    y
}

type Derivs = ([Mat4; 4], [[Mat4; 4]; 4]);

fn central(src: &dyn Spacetime, x: [f64; 4], g0: &Mat4, h: [f64; 4]) -> Result<Derivs> {
    let mut dg = [[[0.0; 4]; 4]; 4];
    let mut ddg = [[[[0.0; 4]; 4]; 4]; 4];
    for a in 0..4 {
        let gp = src.metric(shifted(x, &[(a, h[a])]))?;
        let gm = src.metric(shifted(x, &[(a, -h[a])]))?;
        let mut d = [[0.0; 4]; 4];
        axpy(&mut d, 0.5 / h[a], &gp);
        axpy(&mut d, -0.5 / h[a], &gm);
        dg[a] = d;
        let mut dd = [[0.0; 4]; 4];
        let h2 = h[a] * h[a];
        axpy(&mut dd, 1.0 / h2, &gp);
        axpy(&mut dd, -2.0 / h2, g0);
        axpy(&mut dd, 1.0 / h2, &gm);
        ddg[a][a] = dd;
    }
    for a in 0..4 {
        for b in a + 1..4 {
            let s = 0.25 / (h[a] * h[b]);
            let mut dd = [[0.0; 4]; 4];
            for (sa, sb, w) in [(1.0, 1.0, s), (1.0, -1.0, -s), (-1.0, 1.0, -s), (-1.0, -1.0, s)] {
                let g = src.metric(shifted(x, &[(a, sa * h[a]), (b, sb * h[b])]))?;
                axpy(&mut dd, w, &g);
            }
            ddg[a][b] = dd;
            ddg[b][a] = dd;
        }
    }
    Ok((dg, ddg))
}

pub fn invert(g: &Mat4) -> Result<(Mat4, f64)> {
    let mut a = [[0.0; 8]; 4];
    for i in 0..4 {
        a[i][..4].copy_from_slice(&g[i]);
        a[i][4 + i] = 1.0;
    }
    let mut det = 1.0;
    for c in 0..4 {
        let p = (c..4).max_by(|&i, &j| a[i][c].abs().total_cmp(&a[j][c].abs())).unwrap();
        if a[p][c].abs() < 1e-300 {
            return Err(Error::DegenerateMetric(0.0));
        }
        if p != c {
            a.swap(p, c);
            det = -det;
        }
        det *= a[c][c];
        let piv = a[c][c];
        for k in 0..8 {
            a[c][k] /= piv;
        }
        for r in 0..4 {
            if r != c {
                let f = a[r][c];
                for k in 0..8 {
                    a[r][k] -= f * a[c][k];
                }
            }
        }
    }
    let mut inv = [[0.0; 4]; 4];
    for i in 0..4 {
        inv[i].copy_from_slice(&a[i][4..]);
    }
    Ok((inv, det))
}

/// Computes all curvature at `x` from metric evaluations.
pub fn geometry(src: &dyn Spacetime, x: [f64; 4], cfg: &StencilConfig) -> Result<Geometry> {
    let g = src.metric(x)?;
    let (ginv, det) = invert(&g)?;
    if det.abs() < 1e-8 {
        return Err(Error::DegenerateMetric(det));
    }
    let h = x.map(|v| cfg.h * v.abs().max(1.0));
    let (mut dg, mut ddg) = central(src, x, &g, h)?;
    if cfg.richardson {
        // extrapolate from h and 2h: roundoff, not truncation, limits h
        let (dg2, ddg2) = central(src, x, &g, h.map(|v| 2.0 * v))?;
        for c in 0..4 {
            for a in 0..4 {
                for b in 0..4 {
                    dg[c][a][b] = (4.0 * dg[c][a][b] - dg2[c][a][b]) / 3.0;
                    for d in 0..4 {
                        ddg[c][d][a][b] = (4.0 * ddg[c][d][a][b] - ddg2[c][d][a][b]) / 3.0;
                    }
                }
            }
        }
    }
    Ok(from_derivatives(g, ginv, dg, ddg))
}

/// Curvature from a metric and its first two derivatives.
pub fn from_derivatives(g: Mat4, ginv: Mat4, dg: [Mat4; 4], ddg: [[Mat4; 4]; 4]) -> Geometry {
    // Gamma_{a,bc} = (d_b g_ac + d_c g_ab - d_a g_bc) / 2
    let mut low = [[[0.0; 4]; 4]; 4];
    for a in 0..4 {
        for b in 0..4 {
            for c in 0..4 {
                low[a][b][c] = 0.5 * (dg[b][a][c] + dg[c][a][b] - dg[a][b][c]);
            }
        }
    }
    let mut gam = [[[0.0; 4]; 4]; 4];
    for a in 0..4 {
        for b in 0..4 {
            for c in 0..4 {
                gam[a][b][c] = (0..4).map(|d| ginv[a][d] * low[d][b][c]).sum();
            }
        }
    }
    let mut riem = [[[[0.0; 4]; 4]; 4]; 4];
    for a in 0..4 {
        for b in 0..4 {
            for c in 0..4 {
                for d in 0..4 {
                    let second = 0.5 * (ddg[b][c][a][d] + ddg[a][d][b][c] - ddg[b][d][a][c] - ddg[a][c][b][d]);
                    let mut quad = 0.0;
                    for e in 0..4 {
                        quad += low[e][b][c] * gam[e][a][d] - low[e][b][d] * gam[e][a][c];
                    }
                    riem[a][b][c][d] = second + quad;
                }
            }
        }
    }
    let mut ric = [[0.0; 4]; 4];
    for b in 0..4 {
        for d in 0..4 {
            let mut s = 0.0;
            for a in 0..4 {
                for c in 0..4 {
                    s += ginv[a][c] * riem[a][b][c][d];
                }
            }
            ric[b][d] = s;
        }
    }
    let scalar: f64 = (0..4).flat_map(|a| (0..4).map(move |b| (a, b))).map(|(a, b)| ginv[a][b] * ric[a][b]).sum();
    let mut weyl = [[[[0.0; 4]; 4]; 4]; 4];
    for a in 0..4 {
        for b in 0..4 {
            for c in 0..4 {
                for d in 0..4 {
                    weyl[a][b][c][d] = riem[a][b][c][d]
                        - 0.5 * (g[a][c] * ric[b][d] - g[a][d] * ric[b][c] - g[b][c] * ric[a][d] + g[b][d] * ric[a][c])
                        + scalar / 6.0 * (g[a][c] * g[b][d] - g[a][d] * g[b][c]);
                }
            }
        }
    }
    Geometry { g, ginv, dg, ddg, christoffel: gam, riemann: riem, ricci: ric, scalar, weyl }
}

impl Geometry {
    /// `max |nabla_a g_bc|` computed from the stored Christoffel symbols.
    pub fn compatibility_residual(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for a in 0..4 {
            for b in 0..4 {
                for c in 0..4 {
                    let mut v = self.dg[a][b][c];
                    for d in 0..4 {
                        v -= self.christoffel[d][a][b] * self.g[d][c] + self.christoffel[d][a][c] * self.g[b][d];
                    }
                    worst = worst.max(v.abs());
                }
            }
        }
        worst
    }

    /// `max |g^ac C_abcd|`
    pub fn weyl_trace_residual(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for b in 0..4 {
            for d in 0..4 {
                let mut s = 0.0;
                for a in 0..4 {
                    for c in 0..4 {
                        s += self.ginv[a][c] * self.weyl[a][b][c][d];
                    }
                }
                worst = worst.max(s.abs());
            }
        }
        worst
    }

    /// `C_abcd C^abcd`
    pub fn weyl_square(&self) -> f64 {
        let raise = |t: &Tensor4| {
            let mut out = *t;
            for _ in 0..4 {
                // rotate indices while raising the first, four times
                let mut next = [[[[0.0; 4]; 4]; 4]; 4];
                for a in 0..4 {
                    for b in 0..4 {
                        for c in 0..4 {
                            for d in 0..4 {
                                next[b][c][d][a] = (0..4).map(|e| self.ginv[a][e] * out[e][b][c][d]).sum();
                            }
                        }
                    }
                }
                out = next;
            }
            out
        };
        let up = raise(&self.weyl);
        let mut s = 0.0;
        for a in 0..4 {
            for b in 0..4 {
                for c in 0..4 {
                    for d in 0..4 {
                        s += self.weyl[a][b][c][d] * up[a][b][c][d];
                    }
                }
            }
        }
        s
    }
}

pub fn contract2(t: &Mat4, u: &Vec4c, v: &Vec4c) -> Complex64 {
    let mut s = Complex64::default();
    for i in 0..4 {
        for j in 0..4 {
            s += t[i][j] * u[i] * v[j];
        }
    }
    s
}

pub fn contract4(t: &Tensor4, a: &Vec4c, b: &Vec4c, c: &Vec4c, d: &Vec4c) -> Complex64 {
    let mut s = Complex64::default();
    for i in 0..4 {
        for j in 0..4 {
            let ab = a[i] * b[j];
            for k in 0..4 {
                let abc = ab * c[k];
                for l in 0..4 {
                    s += t[i][j][k][l] * abc * d[l];
                }
            }
        }
    }
    s
}

/// Frame components of curvature at one point.
#[derive(Clone, Debug)]
pub struct FrameCurvature {
    pub x: [f64; 4],
    /// `ric[a][b] = Ric(e_{a+1}, e_{b+1})`
    pub ric: [[Complex64; 4]; 4],
    pub gram: [[Complex64; 4]; 4],
    pub phi: f64,
    pub d0: Complex64,
    pub d1: Complex64,
    pub psi2: Complex64,
    pub scalar: f64,
}

pub fn frame_curvature(src: &dyn Spacetime, x: [f64; 4], cfg: &StencilConfig) -> Result<FrameCurvature> {
    let frame = src
        .null_frame(x)?
        .ok_or_else(|| Error::Config("metric field has no null frame".into()))?;
    let geo = geometry(src, x, cfg)?;
    let e = &frame.e;
    let mut ric = [[Complex64::default(); 4]; 4];
    let mut gram = [[Complex64::default(); 4]; 4];
    for a in 0..4 {
        for b in 0..4 {
            ric[a][b] = contract2(&geo.ricci, &e[a], &e[b]);
            gram[a][b] = contract2(&geo.g, &e[a], &e[b]);
        }
    }
    let (e1, e2, e3, e4) = (&e[0], &e[1], &e[2], &e[3]);
    Ok(FrameCurvature {
        x,
        phi: frame.big_p * frame.big_p * ric[2][2].re,
        d0: contract4(&geo.weyl, e4, e1, e4, e1),
        d1: contract4(&geo.weyl, e4, e3, e4, e1),
        psi2: contract4(&geo.weyl, e4, e1, e3, e2),
        scalar: geo.scalar,
        ric,
        gram,
    })
}

/// Components that vanish in the quasi-Einstein pattern.
pub const ZERO_COMPONENTS: [(usize, usize); 7] = [(1, 1), (2, 2), (1, 3), (1, 4), (2, 3), (2, 4), (4, 4)];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Einstein,
    QuasiEinstein,
    Fail,
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Verdict::Einstein => "einstein",
            Verdict::QuasiEinstein => "quasi_einstein",
            Verdict::Fail => "fail",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckConfig {
    pub stencil: StencilConfig,
    /// Bound on the quasi-Einstein pattern residual.
    pub pattern_tol: f64,
    /// Bound on `|Phi|` for an Einstein verdict.
    pub phi_tol: f64,
}

impl Default for CheckConfig {
    fn default() -> Self {
        Self { stencil: StencilConfig::default(), pattern_tol: 1e-4, phi_tol: 1e-5 }
    }
}

/// One sample as written to the JSON report.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampleRecord {
    pub x: f64,
    pub y: f64,
    pub u: f64,
    pub r: f64,
    /// Upper-triangle frame Ricci components as `[re, im]`, keyed `"11"` .. `"44"`.
    pub ric: BTreeMap<String, [f64; 2]>,
    pub phi: f64,
    pub d0: f64,
    pub d1: f64,
    pub psi2: [f64; 2],
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurvatureReport {
    pub samples: Vec<SampleRecord>,
    pub lambda_fit: f64,
    pub lambda_target: f64,
    pub max_residuals: BTreeMap<String, f64>,
    pub pattern_residual: f64,
    pub max_phi: f64,
    pub max_d0: f64,
    pub max_d1: f64,
    pub min_psi2: f64,
    pub verdict: Verdict,
}

fn key(a: usize, b: usize) -> String {
    format!("{a}{b}")
}

impl SampleRecord {
    fn new(fc: &FrameCurvature) -> Self {
        let mut ric = BTreeMap::new();
        for a in 1..=4 {
            for b in a..=4 {
                let v = fc.ric[a - 1][b - 1];
                ric.insert(key(a, b), [v.re, v.im]);
            }
        }
        let [x, y, u, r] = fc.x;
        Self { x, y, u, r, ric, phi: fc.phi, d0: fc.d0.norm(), d1: fc.d1.norm(), psi2: [fc.psi2.re, fc.psi2.im] }
    }
}

/// Classifies the Ricci tensor against `Ric = Lambda g + Phi lambda^2` over the samples.
pub fn quasi_einstein_check(src: &dyn Spacetime, lambda: f64, samples: &[[f64; 4]], cfg: &CheckConfig) -> Result<CurvatureReport> {
    let fcs: Vec<FrameCurvature> = samples
        .par_iter()
        .map(|&x| frame_curvature(src, x, &cfg.stencil))
        .collect::<Result<_>>()?;
    Ok(summarize(&fcs, lambda, cfg))
}

pub fn summarize(fcs: &[FrameCurvature], lambda: f64, cfg: &CheckConfig) -> CurvatureReport {
    let mut res: BTreeMap<String, f64> = BTreeMap::new();
    let mut bump = |k: String, v: f64| {
        let e = res.entry(k).or_insert(0.0);
        *e = e.max(v);
    };
    let (mut fit, mut max_phi, mut max_d0, mut max_d1, mut min_psi2) = (0.0, 0.0f64, 0.0f64, 0.0f64, f64::INFINITY);
    for fc in fcs {
        for (a, b) in ZERO_COMPONENTS {
            bump(key(a, b), fc.ric[a - 1][b - 1].norm());
        }
        bump(key(1, 2), (fc.ric[0][1] - lambda).norm());
        bump(key(3, 4), (fc.ric[2][3] - lambda).norm());
        fit += 0.5 * (fc.ric[0][1].re + fc.ric[2][3].re);
        max_phi = max_phi.max(fc.phi.abs());
        max_d0 = max_d0.max(fc.d0.norm());
        max_d1 = max_d1.max(fc.d1.norm());
        min_psi2 = min_psi2.min(fc.psi2.norm());
    }
    let pattern = res.values().fold(0.0f64, |m, v| m.max(*v));
    let verdict = if !(pattern <= cfg.pattern_tol) {
        Verdict::Fail
    } else if max_phi <= cfg.phi_tol {
        Verdict::Einstein
    } else {
        Verdict::QuasiEinstein
    };
    CurvatureReport {
        samples: fcs.iter().map(SampleRecord::new).collect(),
        lambda_fit: if fcs.is_empty() { f64::NAN } else { fit / fcs.len() as f64 },
        lambda_target: lambda,
        max_residuals: res,
        pattern_residual: pattern,
        max_phi,
        max_d0,
        max_d1,
        min_psi2: if fcs.is_empty() { f64::NAN } else { min_psi2 },
        verdict,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ShearfreeSample {
    pub r: f64,
    pub rho: f64,
    pub residual: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ShearfreeReport {
    pub samples: Vec<ShearfreeSample>,
    pub max_residual: f64,
    /// `max |g(k, k)|` for `k = d_r`.
    pub max_null: f64,
}

/// Checks `L_k g = rho g` on `k^perp` for `k = d_r`.
pub fn shearfree_check(src: &dyn Spacetime, samples: &[[f64; 4]], cfg: &StencilConfig) -> Result<ShearfreeReport> {
    let out: Vec<(ShearfreeSample, f64)> = samples
        .par_iter()
        .map(|&x| {
            let frame = src
                .null_frame(x)?
                .ok_or_else(|| Error::Config("metric field has no null frame".into()))?;
            let g = src.metric(x)?;
            let h = cfg.h * x[3].abs().max(1.0);
            let d = |h: f64| -> Result<Mat4> {
                let gp = src.metric(shifted(x, &[(3, h)]))?;
                let gm = src.metric(shifted(x, &[(3, -h)]))?;
                let mut m = [[0.0; 4]; 4];
                axpy(&mut m, 0.5 / h, &gp);
                axpy(&mut m, -0.5 / h, &gm);
                Ok(m)
            };
            let mut lg = d(h)?;
            if cfg.richardson {
                let coarse = d(2.0 * h)?;
                for i in 0..4 {
                    for j in 0..4 {
                        lg[i][j] = (4.0 * lg[i][j] - coarse[i][j]) / 3.0;
                    }
                }
            }
            let e = &frame.e;
            let perp = [0usize, 1, 3];
            let rho = contract2(&lg, &e[0], &e[1]).re / contract2(&g, &e[0], &e[1]).re;
            let mut residual: f64 = 0.0;
            for &a in &perp {
                for &b in &perp {
                    let v = contract2(&lg, &e[a], &e[b]) - rho * contract2(&g, &e[a], &e[b]);
                    residual = residual.max(v.norm());
                }
            }
            Ok((ShearfreeSample { r: x[3], rho, residual }, g[3][3].abs()))
        })
        .collect::<Result<_>>()?;
    Ok(ShearfreeReport {
        max_residual: out.iter().fold(0.0, |m, s| m.max(s.0.residual)),
        max_null: out.iter().fold(0.0, |m, s| m.max(s.1)),
        samples: out.into_iter().map(|s| s.0).collect(),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReflectionReport {
    /// Largest difference of frame Ricci components at mirrored points.
    pub max_ricci_diff: f64,
    pub max_psi2_diff: f64,
    pub verdict: Verdict,
    pub verdict_reflected: Verdict,
}

/// Compares `g` at `(x, y, u, r)` with `g_reflected` at `(x, y, u, -r)`.
pub fn gauge_reflection_check(
    g: &dyn Spacetime,
    g_reflected: &dyn Spacetime,
    lambda: f64,
    samples: &[[f64; 4]],
    cfg: &CheckConfig,
) -> Result<ReflectionReport> {
    let mirrored: Vec<[f64; 4]> = samples.iter().map(|&[x, y, u, r]| [x, y, u, -r]).collect();
    let a: Vec<FrameCurvature> = samples.par_iter().map(|&x| frame_curvature(g, x, &cfg.stencil)).collect::<Result<_>>()?;
    let b: Vec<FrameCurvature> =
        mirrored.par_iter().map(|&x| frame_curvature(g_reflected, x, &cfg.stencil)).collect::<Result<_>>()?;
    let (mut dr, mut dp) = (0.0f64, 0.0f64);
    for (p, q) in a.iter().zip(&b) {
        for i in 0..4 {
            for j in 0..4 {
                dr = dr.max((p.ric[i][j] - q.ric[i][j]).norm());
            }
        }
        dp = dp.max((p.psi2 - q.psi2).norm());
    }
    Ok(ReflectionReport {
        max_ricci_diff: dr,
        max_psi2_diff: dp,
        verdict: summarize(&a, lambda, cfg).verdict,
        verdict_reflected: summarize(&b, lambda, cfg).verdict,
    })
}

/// Reference metrics with known curvature.
pub mod reference {
    use super::*;

    /// `dx^2 + dy^2 + du^2 - dt^2` in coordinates `(x, y, u, t)`.
    pub struct Minkowski;

    impl Spacetime for Minkowski {
        fn metric(&self, _x: [f64; 4]) -> Result<Mat4> {
            Ok([[1.0, 0.0, 0.0, 0.0], [0.0, 1.0, 0.0, 0.0], [0.0, 0.0, 1.0, 0.0], [0.0, 0.0, 0.0, -1.0]])
        }
    }

    /// Unit 2-sphere times flat 2-dimensional Minkowski space, `(theta, phi, u, t)`.
    pub struct SphereProduct;

    impl Spacetime for SphereProduct {
        fn metric(&self, x: [f64; 4]) -> Result<Mat4> {
            let s = x[0].sin();
            Ok([[1.0, 0.0, 0.0, 0.0], [0.0, s * s, 0.0, 0.0], [0.0, 0.0, 1.0, 0.0], [0.0, 0.0, 0.0, -1.0]])
        }
    }

    /// Schwarzschild exterior in `(t, r, theta, phi)`.
    pub struct Schwarzschild {
        pub mass: f64,
    }

    impl Spacetime for Schwarzschild {
        fn metric(&self, x: [f64; 4]) -> Result<Mat4> {
            let f = 1.0 - 2.0 * self.mass / x[1];
            let r2 = x[1] * x[1];
            let s = x[2].sin();
            Ok([[-f, 0.0, 0.0, 0.0], [0.0, 1.0 / f, 0.0, 0.0], [0.0, 0.0, r2, 0.0], [0.0, 0.0, 0.0, r2 * s * s]])
        }
    }
}
