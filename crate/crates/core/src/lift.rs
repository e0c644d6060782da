//! The shearfree Lorentzian lift
//!
//! ```text
//! g = 2 P^2 ( mu mubar + lambda (dr + W mu + Wbar mubar + H lambda) ),   P = p / cos(r/2)
//! ```
//!
//! on coordinates `(x, y, u, r)`, together with the closed-form expressions
//! (`B`, `I`, the `Ric_33` right side, `Psi_2`) that the curvature engine is
//! checked against.
//!
//! With `s = t = 0`, `X = c + 2 d_z log p`, `Y = i X`, `m = i (2 F_zzbar)^3` and
//!
//! ```text
//! W = i X (e^{-ir} + 1)
//! H = (m/p^4) e^{2ir} + Q e^{ir} + c.c. + T
//! Q = (3m + mbar)/p^4 + (2/3) Lambda p^2 - (p_z/p)_zbar - c_zbar
//! T = (3m + 3mbar)/p^4 + 2 Lambda p^2 - 2 (p_z/p)_zbar - 2 c_zbar
//! ```
//!
//! See [`RConvention`] for the sign of the phase in `W`.

use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::cr::CrPoint;
use crate::curvature::{Mat4, NullFrame, Spacetime};
use crate::error::{Error, Result};
use crate::expr::{parse_expression, Expr, Var};
use crate::jet::{Analytic, Jet2, ORDER};
use crate::potential::Potential;
use crate::solver::{GridInterpolant, OdeSolution};

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Points with `|cos(r/2)|` below this are refused.
pub const GUARD_COS: f64 = 1e-3;
/// Sampling never goes beyond this `|r|`.
pub const MAX_SAMPLE_R: f64 = 2.8;

fn re(v: f64) -> Complex64 {
    Complex64::new(v, 0.0)
}

/// Phase convention for the `r`-dependence of `W`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RConvention {
    /// `W = i X (e^{-ir} + 1)` with `H` carrying `e^{+ir}`, `e^{2ir}`.
    #[default]
    Standard,
    /// Pullback of [`RConvention::Standard`] by `r -> -r`: the phases flip and
    /// `dr -> -dr`. Isometric to the standard lift.
    Reflected,
    /// `W = i X (e^{ir} + 1)` with the standard `H` and `+dr`. Not a pullback of
    /// the standard lift; kept for comparison only.
    PositivePhase,
}

/// How the conformal factor `p` is obtained.
#[derive(Clone, Debug)]
pub enum ConformalFactor {
    /// `p = sqrt(F_zzbar) * q` with constant `q`.
    Constant(f64),
    /// `p = F_zzbar^alpha`.
    PowerOfFzzbar(f64),
    /// `p` given directly as an expression in `x`, `y` (or `z`).
    Explicit(Expr),
    /// `p = sqrt(F_yy) q(y)` with `q` from the tubular ODE.
    Tubular(Arc<OdeSolution>),
    /// `p = sqrt(F_zzbar) q` with `q` interpolated from a grid solution.
    Grid(Arc<GridInterpolant>),
}

impl ConformalFactor {
    pub fn explicit(text: &str) -> Result<Self> {
        Ok(Self::Explicit(parse_expression(text)?))
    }

    fn p_jet(&self, cr: &CrPoint) -> Result<Jet2> {
        let base = [cr.x, cr.y];
        let order = cr.fzzb.order();
        let p = match self {
            ConformalFactor::Constant(q) => cr.fzzb.sqrt()?.scale(re(*q)),
            ConformalFactor::PowerOfFzzbar(a) => cr.fzzb.powf(*a)?,
            ConformalFactor::Explicit(e) => {
                let proto = Jet2::constant(1.0, base, order);
                let p = e.eval(
                    &|v| {
                        Ok(match v {
                            Var::X => Jet2::var_x(base, order),
                            Var::Y => Jet2::var_y(base, order),
                            Var::Z => Jet2::var_z(base, order),
                        })
                    },
                    &proto,
                )?;
                if p.max_imag() > 1e-12 {
                    return Err(Error::Profile(format!("p is not real at ({}, {})", cr.x, cr.y)));
                }
                p.re()
            }
            ConformalFactor::Tubular(ode) => {
                if !cr.tubular {
                    return Err(Error::Profile("ODE conformal factor needs a tubular potential".into()));
                }
                let q = ode.jet(cr.y, order)?.to_jet2(cr.x);
                &cr.fzzb.scale(re(4.0)).sqrt()? * &q
            }
            ConformalFactor::Grid(grid) => &cr.fzzb.sqrt()? * &grid.jet(cr.x, cr.y, order)?,
        };
        let v = p.value().re;
        if !(v > 0.0) {
            return Err(Error::Profile(format!("p = {v} is not positive at ({}, {})", cr.x, cr.y)));
        }
        Ok(p)
    }
}

/// Everything the metric needs at one `(x, y)`; all of it is `r`-independent.
#[derive(Clone, Debug)]
pub struct LiftPoint {
    pub cr: CrPoint,
    pub lambda: f64,
    /// `p` (order two below the potential jet).
    pub p: Jet2,
    pub m: Complex64,
    pub x_fn: Complex64,
    pub q_fn: Complex64,
    pub t_fn: f64,
    /// Imaginary part discarded from `T`.
    pub t_imag: f64,
}

impl LiftPoint {
    pub fn p_value(&self) -> f64 {
        self.p.value().re
    }

    pub fn y_fn(&self) -> Complex64 {
        I * self.x_fn
    }

    pub fn w(&self, r: f64, conv: RConvention) -> Complex64 {
        let phase = match conv {
            RConvention::Standard => -r,
            RConvention::Reflected | RConvention::PositivePhase => r,
        };
        I * self.x_fn * Complex64::from_polar(1.0, phase) + self.y_fn()
    }

    /// `H(r)` and the size of its imaginary part before it is dropped.
    pub fn h(&self, r: f64, conv: RConvention) -> (f64, f64) {
        let r = if conv == RConvention::Reflected { -r } else { r };
        let p4 = self.p_value().powi(4);
        let a = self.m / p4 * Complex64::from_polar(1.0, 2.0 * r);
        let b = self.q_fn * Complex64::from_polar(1.0, r);
        let h = a + a.conj() + b + b.conj() + Complex64::new(self.t_fn, self.t_imag);
        (h.re, h.im.abs())
    }

    /// `P = p / cos(r/2)`.
    pub fn big_p(&self, r: f64) -> Result<f64> {
        let c = (0.5 * r).cos();
        if c.abs() < GUARD_COS {
            return Err(Error::GuardBand { r, cos: c });
        }
        Ok(self.p_value() / c)
    }

    /// `B` together with its reduced form.
    pub fn b(&self) -> Result<BEvaluation> {
        let p = self.p_value();
        let c = self.cr.c;
        let pz = self.p.d_z()?;
        let p_z = pz.value();
        let p_zb = self.p.d_zbar()?.value();
        let p_zzb = pz.d_zbar()?.value();
        let c_zb = self.cr.c_jet.d_zbar()?.value();
        let cb_z = self.cr.c_jet.conj().d_z()?.value();
        let lam = self.lambda;
        let mass = (self.m + self.m.conj()) / p.powi(3);
        let b = 2.0 * p_zzb + c.conj() * p_z + c * p_zb + (0.5 * c.norm_sqr() + 1.5 * c_zb) * p
            - mass
            - re(2.0 / 3.0 * lam * p.powi(3));
        let reduced = p_zzb + 0.5 * c.conj() * p_z + 0.5 * c * p_zb + (0.25 * c.norm_sqr() + 0.75 * cb_z) * p
            - re(lam / 3.0 * p.powi(3));
        Ok(BEvaluation { b, reduced, mass_term: mass })
    }

    /// `d_z m + 3 c m`, which vanishes because `t = 0`.
    pub fn m_equation_residual(&self) -> Result<f64> {
        let m = self.cr.m_jet();
        Ok((m.d_z()?.value() + 3.0 * self.cr.c * self.m).norm())
    }

    /// `Psi_2 = (1 + e^{ir})^3 m / (2 p^6)`.
    pub fn psi2_formula(&self, r: f64) -> Complex64 {
        let a = re(1.0) + Complex64::from_polar(1.0, r);
        a * a * a * self.m / (2.0 * self.p_value().powi(6))
    }

    /// Metric, frame and coframe at `r`.
    pub fn frame_data(&self, r: f64, conv: RConvention) -> Result<FrameData> {
        match conv {
            RConvention::Reflected => Ok(self.frame_data(-r, RConvention::Standard)?.reflect()),
            _ => self.raw_frame(r, self.w(r, conv), self.h(r, conv).0),
        }
    }

    fn raw_frame(&self, r: f64, w: Complex64, h: f64) -> Result<FrameData> {
        let big_p = self.big_p(r)?;
        let ldz = self.cr.lambda_dz.value();
        let ldu = self.cr.lambda_du.value().re;
        let lam = [2.0 * ldz.re, -2.0 * ldz.im, ldu, 0.0];
        let sigma = [2.0 * w.re + h * lam[0], -2.0 * w.im + h * lam[1], h * lam[2], 1.0];
        let mu = [re(1.0), I, re(0.0), re(0.0)];
        let th1 = mu.map(|v| v * big_p);
        let th2 = th1.map(|v| v.conj());
        let th3 = lam.map(|v| re(v * big_p));
        let th4 = sigma.map(|v| re(v * big_p));
        let a = self.cr.frame_du_coeff();
        let inv = 1.0 / big_p;
        let e1 = [re(0.5 * inv), -I * (0.5 * inv), a * inv, -w * inv];
        let e2 = e1.map(|v| v.conj());
        let e3 = [re(0.0), re(0.0), re(inv / ldu), re(-h * inv)];
        let e4 = [re(0.0), re(0.0), re(0.0), re(inv)];
        let mut g = [[0.0; 4]; 4];
        for i in 0..4 {
            for j in 0..4 {
                g[i][j] = 2.0 * (th1[i] * th2[j]).re + th3[i].re * th4[j].re + th4[i].re * th3[j].re;
            }
        }
        Ok(FrameData { g, frame: [e1, e2, e3, e4], coframe: [th1, th2, th3, th4], big_p })
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BEvaluation {
    pub b: Complex64,
    /// `p_zzbar + cbar p_z / 2 + c p_zbar / 2 + (|c|^2/4 + 3 (cbar)_z / 4) p - Lambda p^3 / 3`
    pub reduced: Complex64,
    /// `(m + mbar) / p^3`, zero since `m` is imaginary.
    pub mass_term: Complex64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct R33Evaluation {
    pub i_fn: Complex64,
    /// `d_z conj(I)`
    pub dz_i_bar: Complex64,
    pub rhs: Complex64,
    /// `(16 i / p^3) d_o (m / p^4)`; `d_o` is `2 F_zzbar d_u` and nothing depends on `u`.
    pub d0_term: Complex64,
}

/// Metric, frame and coframe at a point of `(x, y, u, r)` space.
#[derive(Clone, Debug)]
pub struct FrameData {
    pub g: Mat4,
    /// `e_1 .. e_4` in the coordinate basis.
    pub frame: [[Complex64; 4]; 4],
    /// `theta^1 .. theta^4` in the coordinate basis.
    pub coframe: [[Complex64; 4]; 4],
    pub big_p: f64,
}

/// A potential, a cosmological constant and a conformal factor.
#[derive(Clone, Debug)]
pub struct LiftProfile {
    potential: Potential,
    lambda: f64,
    factor: ConformalFactor,
    convention: RConvention,
}

impl LiftProfile {
    pub fn new(potential: Potential, lambda: f64, factor: ConformalFactor) -> Result<Self> {
        if let ConformalFactor::Constant(q) = factor {
            if !(q > 0.0) {
                return Err(Error::Profile(format!("constant q = {q} must be positive")));
            }
        }
        if matches!(factor, ConformalFactor::Tubular(_)) && !potential.is_tubular() {
            return Err(Error::Profile("ODE conformal factor needs a tubular potential".into()));
        }
        Ok(Self { potential, lambda, factor, convention: RConvention::Standard })
    }

    pub fn with_convention(mut self, convention: RConvention) -> Self {
        self.convention = convention;
        self
    }

    pub fn potential(&self) -> &Potential {
        &self.potential
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn factor(&self) -> &ConformalFactor {
        &self.factor
    }

    pub fn convention(&self) -> RConvention {
        self.convention
    }

    pub fn point(&self, x: f64, y: f64) -> Result<LiftPoint> {
        self.point_with_order(x, y, ORDER)
    }

    pub fn point_with_order(&self, x: f64, y: f64, order: usize) -> Result<LiftPoint> {
        let cr = CrPoint::with_order(&self.potential, x, y, order)?;
        let p = self.factor.p_jet(&cr)?;
        let pv = p.value().re;
        let m = cr.m();
        let log_dz = p.d_z()?.try_div(&p)?;
        let x_fn = cr.c + 2.0 * log_dz.value();
        let lz_zb = log_dz.d_zbar()?.value();
        let c_zb = cr.c_jet.d_zbar()?.value();
        let p4 = pv.powi(4);
        let lam = self.lambda;
        let q_fn = (3.0 * m + m.conj()) / p4 + re(2.0 / 3.0 * lam * pv * pv) - lz_zb - c_zb;
        let t = (3.0 * m + 3.0 * m.conj()) / p4 + re(2.0 * lam * pv * pv) - 2.0 * lz_zb - 2.0 * c_zb;
        Ok(LiftPoint { cr, lambda: lam, p, m, x_fn, q_fn, t_fn: t.re, t_imag: t.im })
    }

    /// `I` and the right side of the `Ric_33` formula at `(x, y, r)`.
    pub fn ricci33_rhs(&self, x: f64, y: f64, r: f64) -> Result<R33Evaluation> {
        let pt = self.point_with_order(x, y, ORDER + 2)?;
        let p = &pt.p;
        let pv = pt.p_value();
        let lam = self.lambda;
        let kappa = &p.d_z()?.try_div(p)? + &pt.cr.c_jet;
        let i_jet = &kappa.d_z()? + &(&kappa * &kappa);
        let dz_ibar = i_jet.conj().d_z()?;
        let ell = &p.d_zbar()?.try_div(p)?.scale(re(2.0)) + &pt.cr.c_jet.conj();
        let p2 = p * p;
        let inner = &p2 * &(&dz_ibar - &(&ell * &p2).scale(re(2.0 * lam)));
        let d_inner = inner.d_z()?.value() + 2.0 * pt.cr.c * inner.value();
        let b = pt.b()?.b;
        let d0_term = Complex64::default();
        let cos4 = (0.5 * r).cos().powi(4);
        let rhs = (8.0 / pv.powi(4) * d_inner + 16.0 * lam / pv * b + d0_term) * cos4;
        Ok(R33Evaluation { i_fn: i_jet.value(), dz_i_bar: dz_ibar.value(), rhs, d0_term })
    }

    pub fn metric_field(self) -> MetricField {
        MetricField { profile: Arc::new(self) }
    }
}

/// The lift as a field on `(x, y, u, r)`; nothing depends on `u`.
#[derive(Clone, Debug)]
pub struct MetricField {
    profile: Arc<LiftProfile>,
}

impl MetricField {
    pub fn profile(&self) -> &LiftProfile {
        &self.profile
    }

    /// The same lift under another phase convention.
    pub fn with_convention(&self, conv: RConvention) -> MetricField {
        MetricField { profile: Arc::new((*self.profile).clone().with_convention(conv)) }
    }

    pub fn frame_data(&self, c: [f64; 4]) -> Result<FrameData> {
        let pt = self.profile.point(c[0], c[1])?;
        pt.frame_data(c[3], self.profile.convention)
    }

    /// Like [`MetricField::frame_data`] but reusing a precomputed point.
    pub fn frame_data_at(&self, pt: &LiftPoint, r: f64) -> Result<FrameData> {
        pt.frame_data(r, self.profile.convention)
    }
}

impl FrameData {
    /// Pushforward by `r -> -r`.
    fn reflect(mut self) -> Self {
        for i in 0..4 {
            self.g[i][3] = -self.g[i][3];
            self.g[3][i] = -self.g[3][i];
            self.frame[i][3] = -self.frame[i][3];
            self.coframe[i][3] = -self.coframe[i][3];
        }
        self
    }
}

impl Spacetime for MetricField {
    fn metric(&self, c: [f64; 4]) -> Result<Mat4> {
        Ok(self.frame_data(c)?.g)
    }

    fn null_frame(&self, c: [f64; 4]) -> Result<Option<NullFrame>> {
        let fd = self.frame_data(c)?;
        Ok(Some(NullFrame { e: fd.frame, big_p: fd.big_p }))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curvature::contract2;
    use crate::potential::catalog;
    use crate::solver::{solve_tubular, TubularProblem};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn fs(q: f64) -> LiftProfile {
        LiftProfile::new(Potential::fubini_study(), 1.5, ConformalFactor::Constant(q)).unwrap()
    }

    fn harmonic() -> LiftProfile {
        LiftProfile::new(Potential::harmonic_default(), 0.0, ConformalFactor::PowerOfFzzbar(1.0)).unwrap()
    }

    fn frt() -> LiftProfile {
        LiftProfile::new(Potential::frt(), 0.0, ConformalFactor::PowerOfFzzbar(2.0 / 3.0)).unwrap()
    }

    fn tubular() -> LiftProfile {
        let pr = TubularProblem::new(Potential::tubular_default(), 1.0).unwrap();
        let sol = solve_tubular(pr, 0.5, 0.0, [0.0, 1.0], 1e-2).unwrap();
        LiftProfile::new(Potential::tubular_default(), 1.0, ConformalFactor::Tubular(Arc::new(sol))).unwrap()
    }

    /// Profiles with a rectangle to sample from.
    fn profiles() -> Vec<(LiftProfile, [[f64; 2]; 2])> {
        vec![
            (fs(1.0), [[-2.0, 2.0], [-2.0, 2.0]]),
            (harmonic(), [[0.5, 2.0], [-1.0, 1.0]]),
            (frt(), [[0.5, 2.0], [-1.0, 1.0]]),
            (tubular(), [[-1.0, 1.0], [0.0, 1.0]]),
        ]
    }

    fn close(a: Complex64, b: Complex64, tol: f64) -> bool {
        (a - b).norm() < tol
    }

    #[test]
    fn fubini_study_origin() {
        let pt = fs(1.0).point(0.0, 0.0).unwrap();
        assert!((pt.p_value() - 1.0).abs() < 1e-14);
        assert!(close(pt.m, Complex64::new(0.0, 8.0), 1e-12));
        assert!(pt.x_fn.norm() < 1e-14 && pt.y_fn().norm() < 1e-14);
        assert!(close(pt.q_fn, Complex64::new(0.0, 16.0), 1e-12));
        assert!((pt.t_fn - 1.0).abs() < 1e-12);
        assert!((pt.h(0.0, RConvention::Standard).0 - 1.0).abs() < 1e-12);
        assert!((pt.h(PI / 2.0, RConvention::Standard).0 + 31.0).abs() < 1e-12);
        assert!(close(pt.psi2_formula(0.0), Complex64::new(0.0, 32.0), 1e-12));
        assert!(pt.psi2_formula(PI).norm() < 1e-12);
        for r in [0.0, 1.0, -2.5] {
            assert!(pt.w(r, RConvention::Standard).norm() < 1e-14);
        }
    }

    #[test]
    fn w_for_harmonic_and_frt() {
        for (x, y) in [(0.7, 0.3), (1.5, -0.8)] {
            for r in [0.0, 0.9, -2.0] {
                let pt = harmonic().point(x, y).unwrap();
                let c = pt.cr.c;
                let e = Complex64::from_polar(1.0, -r);
                assert!(close(pt.w(r, RConvention::Standard), -I * c * (1.0 + e), 1e-12));
                let pt = frt().point(x, y).unwrap();
                let c = pt.cr.c;
                assert!(close(pt.w(r, RConvention::Standard), -I / 3.0 * c * (1.0 + e), 1e-12));
                assert!(pt.w(PI, RConvention::PositivePhase).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn b_examples() {
        for (x, y) in [(0.0, 0.0), (0.4, -1.2), (1.7, 0.3)] {
            let b = fs(1.0).point(x, y).unwrap().b().unwrap();
            assert!(b.b.norm() < 1e-10);
            assert!(b.mass_term.norm() < 1e-14);
        }
        for (x, y) in [(0.6, 0.1), (1.9, -0.7)] {
            assert!(harmonic().point(x, y).unwrap().b().unwrap().b.norm() < 1e-10);
        }
        let flat = LiftProfile::new(Potential::flat(), 1.0, ConformalFactor::explicit("1").unwrap()).unwrap();
        let b = flat.point(0.3, 0.2).unwrap().b().unwrap();
        assert!(close(b.b, re(-2.0 / 3.0), 1e-14));
        for (x, y) in [(0.7, 0.1), (1.2, -0.4)] {
            let b = frt().point(x, y).unwrap().b().unwrap();
            assert!(close(b.b, 2.0 * b.reduced, 1e-10));
        }
    }

    #[test]
    fn gram_duality_and_signature() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let gram = [[0.0, 1.0, 0.0, 0.0], [1.0, 0.0, 0.0, 0.0], [0.0, 0.0, 0.0, 1.0], [0.0, 0.0, 1.0, 0.0]];
        let convs = [RConvention::Standard, RConvention::Reflected, RConvention::PositivePhase];
        for (prof, [xr, yr]) in profiles() {
            for k in 0..25 {
                let (x, y) = (rng.gen_range(xr[0]..xr[1]), rng.gen_range(yr[0]..yr[1]));
                let r = rng.gen_range(-MAX_SAMPLE_R..MAX_SAMPLE_R);
                let pt = prof.point(x, y).unwrap();
                let fd = pt.frame_data(r, convs[k % 3]).unwrap();
                assert_eq!(fd.g[3][3], 0.0);
                let (_, det) = crate::curvature::invert(&fd.g).unwrap();
                assert!(det < 0.0);
                let scale = fd.g.iter().flatten().fold(1.0f64, |m, v| m.max(v.abs()));
                for a in 0..4 {
                    for b in 0..4 {
                        let gab = contract2(&fd.g, &fd.frame[a], &fd.frame[b]);
                        assert!(close(gab, re(gram[a][b]), 1e-10 * scale), "{a}{b}: {gab}");
                        let dual: Complex64 = (0..4).map(|i| fd.coframe[a][i] * fd.frame[b][i]).sum();
                        assert!(close(dual, re(if a == b { 1.0 } else { 0.0 }), 1e-12));
                    }
                }
            }
        }
    }

    #[test]
    fn h_is_real_and_periodic() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for (prof, [xr, yr]) in profiles() {
            for _ in 0..5 {
                let pt = prof.point(rng.gen_range(xr[0]..xr[1]), rng.gen_range(yr[0]..yr[1])).unwrap();
                for k in 0..64 {
                    let r = 2.0 * PI * k as f64 / 64.0;
                    let (h, im) = pt.h(r, RConvention::Standard);
                    assert!(im < 1e-12, "{im}");
                    assert!((h - pt.h(r + 2.0 * PI, RConvention::Standard).0).abs() < 1e-9 * h.abs().max(1.0));
                }
            }
        }
    }

    #[test]
    fn m_equation_holds_on_the_catalog() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for entry in catalog() {
            let prof = LiftProfile::new(entry.potential.clone(), 0.0, ConformalFactor::Constant(1.0)).unwrap();
            let [xr, yr] = entry.sample_region;
            for _ in 0..100 {
                let pt = prof.point(rng.gen_range(xr[0]..xr[1]), rng.gen_range(yr[0]..yr[1])).unwrap();
                assert!(pt.m_equation_residual().unwrap() < 1e-10 * pt.m.norm().max(1.0), "{}", entry.name);
                assert!(pt.m.re.abs() < 1e-12 * pt.m.norm());
            }
        }
    }

    #[test]
    fn ricci33_right_side() {
        let prof = fs(1.0);
        for (x, y) in [(0.0, 0.0), (0.5, -0.3), (1.1, 0.9)] {
            let e = prof.ricci33_rhs(x, y, 0.7).unwrap();
            let cr = CrPoint::new(prof.potential(), x, y).unwrap();
            let expect = 0.5 * cr.c_jet.d_z().unwrap().value() + 0.25 * cr.c * cr.c;
            assert!(close(e.i_fn, expect, 1e-10));
            assert!(e.rhs.norm() < 1e-9);
            assert_eq!(e.d0_term, Complex64::default());
        }
        assert!(prof.ricci33_rhs(0.0, 0.0, 0.0).unwrap().dz_i_bar.norm() < 1e-10);
        let flat = LiftProfile::new(Potential::flat(), 0.0, ConformalFactor::Constant(1.0)).unwrap();
        let e = flat.ricci33_rhs(0.2, 0.4, 1.0).unwrap();
        assert!(e.i_fn.norm() < 1e-14 && e.rhs.norm() < 1e-14);
    }

    #[test]
    fn psi2_scales_with_p() {
        let (a, b) = (fs(1.0).point(0.3, 0.2).unwrap(), fs(2.0).point(0.3, 0.2).unwrap());
        let ratio = a.psi2_formula(0.4).norm() / b.psi2_formula(0.4).norm();
        assert!((ratio - 64.0).abs() < 1e-10);
    }

    #[test]
    fn guard_band_and_profile_errors() {
        let pt = fs(1.0).point(0.1, 0.1).unwrap();
        assert!(matches!(pt.big_p(PI), Err(Error::GuardBand { .. })));
        assert!(matches!(pt.frame_data(-PI, RConvention::Reflected), Err(Error::GuardBand { .. })));
        assert!(pt.big_p(MAX_SAMPLE_R).is_ok());
        assert!(matches!(
            LiftProfile::new(Potential::fubini_study(), 1.0, ConformalFactor::Constant(-1.0)),
            Err(Error::Profile(_))
        ));
        let tub = tubular();
        assert!(LiftProfile::new(Potential::fubini_study(), 1.0, tub.factor().clone()).is_err());
        let neg = LiftProfile::new(Potential::flat(), 0.0, ConformalFactor::explicit("x").unwrap()).unwrap();
        assert!(matches!(neg.point(-1.0, 0.0), Err(Error::Profile(_))));
    }
}
