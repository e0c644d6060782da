//! CR and Sasakian data of an embedded hypersurface `v = F(z, zbar)`.
//!
//! With `eta = u + i F` the contact form is `lambda = phi (du - i F_z dz + i F_zbar dzbar)`,
//! `phi = 1 / (2 F_zzbar)`, and the coframe `(mu = dz, mubar, lambda)` satisfies
//!
//! ```text
//! d lambda = i dz ^ dzbar + c dz ^ lambda + cbar dzbar ^ lambda,   c = -d_z log F_zzbar.
//! ```
//!
//! The dual frame is `d = d_z + i F_z d_u`, `d_o = 2 F_zzbar d_u`.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::expr::{parse_expression, Expr, Var};
use crate::forms::{OneForm, OneFormJet, TwoForm};
use crate::jet::{Analytic, Jet1, Jet2, ORDER};
use crate::potential::Potential;

const I: Complex64 = Complex64::new(0.0, 1.0);

fn re(v: f64) -> Complex64 {
    Complex64::new(v, 0.0)
}

/// CR data at one point, with jets of everything that gets differentiated later.
#[derive(Clone, Debug)]
pub struct CrPoint {
    pub x: f64,
    pub y: f64,
    /// Jet order the potential was expanded to.
    pub order: usize,
    pub tubular: bool,
    /// `F` (order `order`).
    pub f: Jet2,
    /// `F_zzbar` (order `order - 2`).
    pub fzzb: Jet2,
    /// `c` (order `order - 3`).
    pub c_jet: Jet2,
    /// `du` coefficient of `lambda` (order `order - 2`).
    pub lambda_du: Jet2,
    /// `dz` coefficient of `lambda` (order `order - 2`).
    pub lambda_dz: Jet2,
    pub phi: f64,
    pub c: Complex64,
    /// Ricci scalar `R = -d_z d_zbar log F_zzbar` of the Kähler quotient.
    pub ricci: f64,
    /// `d_o eta = 2 F_zzbar`.
    pub eta_o: f64,
}

impl CrPoint {
    pub fn new(p: &Potential, x: f64, y: f64) -> Result<Self> {
        Self::with_order(p, x, y, ORDER)
    }

    pub fn with_order(p: &Potential, x: f64, y: f64, order: usize) -> Result<Self> {
        if order < 4 {
            return Err(Error::Config("CR data needs jets of order at least 4".into()));
        }
        if p.is_tubular() {
            p.check_domain(x, y)?;
            Self::tubular(p.jet_y(y, order)?, x, y, order)
        } else {
            Self::planar(p.jet(x, y, order)?, x, y, order)
        }
    }

    fn planar(f: Jet2, x: f64, y: f64, order: usize) -> Result<Self> {
        let fzzb = f.d_z()?.d_zbar()?.re();
        let g = fzzb.value().re;
        if !(g > 0.0) {
            return Err(Error::NotPseudoconvex { x, y, value: g });
        }
        let log_g = fzzb.ln()?;
        let c_jet = -log_g.d_z()?;
        let ricci = -log_g.d_z()?.d_zbar()?.value().re;
        let lambda_du = fzzb.scale(re(2.0)).recip()?;
        let lambda_dz = (&lambda_du * &f.d_z()?).scale(-I);
        Ok(Self {
            x,
            y,
            order,
            tubular: false,
            c: c_jet.value(),
            phi: 1.0 / (2.0 * g),
            eta_o: 2.0 * g,
            f,
            fzzb,
            c_jet,
            lambda_du,
            lambda_dz,
            ricci,
        })
    }

    fn tubular(f: Jet1, x: f64, y: f64, order: usize) -> Result<Self> {
        let fy = f.d()?;
        let fyy = fy.d()?;
        let v = fyy.value().re;
        if !(v > 0.0) {
            return Err(Error::NotPseudoconvex { x, y, value: v / 4.0 });
        }
        let inv = fyy.recip()?;
        let c = (&fyy.d()? * &inv).scale(I * 0.5);
        let ricci = -0.25 * fyy.ln()?.d()?.d()?.value().re;
        let lambda_du = inv.scale(re(2.0));
        let lambda_dz = -(&fy * &inv);
        Ok(Self {
            x,
            y,
            order,
            tubular: true,
            c: c.value(),
            phi: 2.0 / v,
            eta_o: v / 2.0,
            f: f.to_jet2(x),
            fzzb: fyy.scale(re(0.25)).to_jet2(x),
            c_jet: c.to_jet2(x),
            lambda_du: lambda_du.to_jet2(x),
            lambda_dz: lambda_dz.to_jet2(x),
            ricci,
        })
    }

    pub fn fzzbar(&self) -> f64 {
        self.fzzb.value().re
    }

    /// `m = i (d_o etabar)^3`.
    pub fn m(&self) -> Complex64 {
        I * self.eta_o.powi(3)
    }

    pub fn m_jet(&self) -> Jet2 {
        let e = self.fzzb.scale(re(2.0));
        (&(&e * &e) * &e).scale(I)
    }

    /// `lambda` as a one-form jet.
    pub fn lambda_form(&self) -> OneFormJet {
        OneFormJet { dz: self.lambda_dz.clone(), dzb: self.lambda_dz.conj(), du: self.lambda_du.clone() }
    }

    /// `d_u` coefficient of the frame vector `d` (equals `i F_z`).
    pub fn frame_du_coeff(&self) -> Complex64 {
        -self.lambda_dz.value() / self.lambda_du.value()
    }

    /// Max deviation of `lambda(d_o) = 1`, `lambda(d) = 0`, `mu(d) = 1`.
    pub fn frame_duality_residual(&self) -> f64 {
        let l = self.lambda_form().value();
        let d = [re(1.0), Complex64::default(), self.frame_du_coeff()];
        let d0 = [Complex64::default(), Complex64::default(), re(self.eta_o)];
        let pair = |w: &OneForm, v: &[Complex64; 3]| w.dz * v[0] + w.dzb * v[1] + w.du * v[2];
        let r1 = (pair(&l, &d0) - 1.0).norm();
        let r2 = pair(&l, &d).norm();
        let r3 = (pair(&OneForm::dz(), &d) - 1.0).norm();
        r1.max(r2).max(r3)
    }
}

/// Max-norm deviation of `d lambda` from the structure equation at `(x, y)`.
pub fn verify_structure_equation(p: &Potential, x: f64, y: f64) -> Result<f64> {
    let pt = CrPoint::new(p, x, y)?;
    let lam = pt.lambda_form();
    let lhs = lam.exterior()?;
    let l = lam.value();
    let rhs = I * OneForm::dz().wedge(&OneForm::dzb())
        + pt.c * OneForm::dz().wedge(&l)
        + pt.c.conj() * OneForm::dzb().wedge(&l);
    Ok((lhs - rhs).max_abs())
}

#[derive(Clone, Debug, PartialEq)]
pub struct SasakianCheck {
    pub is_sasakian: bool,
    /// `d_u c`; zero by construction since nothing depends on `u`.
    pub du_c: f64,
    /// Largest `|b_x + a_y|` for `c = a + i b`.
    pub max_residual: f64,
}

/// Checks that the Reeb field is a CR automorphism over the given samples.
pub fn check_sasakian(p: &Potential, samples: &[[f64; 2]], tol: f64) -> Result<SasakianCheck> {
    let mut max_residual: f64 = 0.0;
    for &[x, y] in samples {
        let pt = CrPoint::new(p, x, y)?;
        let a_y = pt.c_jet.dy()?.value().re;
        let b_x = pt.c_jet.dx()?.value().im;
        max_residual = max_residual.max((b_x + a_y).abs());
    }
    Ok(SasakianCheck { is_sasakian: max_residual <= tol, du_c: 0.0, max_residual })
}

/// Scale `A = exp(phi)` relative to the start of a polyline, where
/// `d phi = 2a dx - 2b dy`; `A * d_o` is then the Reeb field.
pub fn reeb_scale(p: &Potential, path: &[[f64; 2]]) -> Result<f64> {
    const N: usize = 256;
    if path.len() < 2 {
        return Err(Error::Config("path needs at least two points".into()));
    }
    let integrand = |x: f64, y: f64, dx: f64, dy: f64| -> Result<f64> {
        let c = CrPoint::new(p, x, y)?.c;
        Ok(2.0 * c.re * dx - 2.0 * c.im * dy)
    };
    let mut phi = 0.0;
    for seg in path.windows(2) {
        let ([x0, y0], [x1, y1]) = (seg[0], seg[1]);
        let (dx, dy) = (x1 - x0, y1 - y0);
        let mut s = 0.0;
        for k in 0..=N {
            let t = k as f64 / N as f64;
            let w = if k == 0 || k == N { 1.0 } else if k % 2 == 1 { 4.0 } else { 2.0 };
            s += w * integrand(x0 + t * dx, y0 + t * dy, dx, dy)?;
        }
        phi += s / (3.0 * N as f64);
    }
    Ok(phi.exp())
}

/// A change of adapted coframe `mu' = f (mu + h lambda)`, `lambda' = |f|^2 lambda`
/// with `f = f(x, y)`.
#[derive(Clone, Debug)]
pub struct GaugePair {
    f: Expr,
    h: Option<Expr>,
}

/// Transformed structure functions.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GaugeResult {
    pub c: Complex64,
    pub alpha: Complex64,
    pub beta: Complex64,
    pub h: Complex64,
}

impl GaugePair {
    /// `h` is derived as `-i dbar log f`.
    pub fn new(f: &str) -> Result<Self> {
        Ok(Self { f: parse_expression(f)?, h: None })
    }

    /// Explicit `h`, checked against `f` at every use.
    pub fn with_h(f: &str, h: &str) -> Result<Self> {
        Ok(Self { f: parse_expression(f)?, h: Some(parse_expression(h)?) })
    }

    pub fn identity() -> Self {
        Self { f: Expr::Const(re(1.0)), h: None }
    }

    fn eval(e: &Expr, base: [f64; 2], order: usize) -> Result<Jet2> {
        let proto = Jet2::constant(1.0, base, order);
        e.eval(
            &|v| {
                Ok(match v {
                    Var::X => Jet2::var_x(base, order),
                    Var::Y => Jet2::var_y(base, order),
                    Var::Z => Jet2::var_z(base, order),
                })
            },
            &proto,
        )
    }

    /// Jets of `f` (order `order`) and `h` (order `order - 1`).
    pub fn jets(&self, base: [f64; 2], order: usize) -> Result<(Jet2, Jet2)> {
        let f = Self::eval(&self.f, base, order)?;
        if f.value().norm() < 1e-14 {
            return Err(Error::Gauge(format!("f vanishes at ({}, {})", base[0], base[1])));
        }
        let h = f.ln_any()?.d_zbar()?.scale(-I);
        if let Some(e) = &self.h {
            let given = Self::eval(e, base, order - 1)?;
            let dev = (given.value() - h.value()).norm();
            if dev > 1e-9 {
                return Err(Error::Gauge(format!("h differs from -i dbar log f by {dev:.3e}")));
            }
            return Ok((f, given));
        }
        Ok((f, h))
    }
}

trait LogAny {
    fn ln_any(&self) -> Result<Jet2>;
}

impl LogAny for Jet2 {
    /// Logarithm of a non-vanishing jet on the principal branch at its value;
    /// only derivatives are used, so the branch is irrelevant.
    fn ln_any(&self) -> Result<Jet2> {
        let v = self.value();
        let w = self.scale(v.inv());
        Ok(w.ln()?.with_value(v.ln()))
    }
}

/// Applies the gauge law to the coordinate coframe, for which `alpha = beta = 0`.
pub fn gauge_transform(pt: &CrPoint, g: &GaugePair) -> Result<GaugeResult> {
    let (f, h) = g.jets([pt.x, pt.y], pt.order.min(4))?;
    let log_f = f.ln_any()?;
    let dlogf = log_f.d_z()?.value();
    let fv = f.value();
    let hv = h.value();
    let c = pt.c;
    // u-independent f: d_o log f = 0.
    let alpha = (hv * dlogf + h.d_z()?.value() + hv * c) / fv.norm_sqr();
    let c_new = (c - 2.0 * I * hv.conj() + dlogf) / fv;
    let beta = (I * hv * hv + h.d_zbar()?.value() + c.conj() * hv) / (fv.conj() * fv.conj());
    Ok(GaugeResult { c: c_new, alpha, beta, h: hv })
}

/// Exterior derivatives of the transformed coframe, for checking the gauge law
/// independently: returns `(d lambda', d mu', [mu', mubar', lambda'])`.
pub fn transformed_coframe(pt: &CrPoint, g: &GaugePair) -> Result<(TwoForm, TwoForm, [OneForm; 3])> {
    let order = pt.order.min(4) - 1;
    let base = [pt.x, pt.y];
    let (f, h) = g.jets(base, order + 1)?;
    let lam = pt.lambda_form();
    let zero = Jet2::zero(base, order);
    let one = Jet2::constant(1.0, base, order);
    let mu = OneFormJet { dz: one, dzb: zero.clone(), du: zero };
    let mod_f = (&f * &f.conj()).re();
    let lam2 = lam.scale(&mod_f);
    let mu2 = mu.add(&lam.scale(&h)).scale(&f);
    let mu2v = mu2.value();
    Ok((lam2.exterior()?, mu2.exterior()?, [mu2v, mu2v.conj(), lam2.value()]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potential::{catalog, Domain};

    fn close(a: Complex64, b: Complex64, tol: f64) -> bool {
        (a - b).norm() <= tol
    }

    #[test]
    fn flat_data() {
        let p = Potential::flat();
        for (x, y) in [(0.0, 0.0), (1.3, -0.2)] {
            let pt = CrPoint::new(&p, x, y).unwrap();
            assert!(pt.c.norm() < 1e-15);
            assert!(pt.ricci.abs() < 1e-15);
            assert!((pt.phi - 0.5).abs() < 1e-15);
            assert!((pt.eta_o - 2.0).abs() < 1e-15);
        }
    }

    #[test]
    fn fubini_study_at_one() {
        let pt = CrPoint::new(&Potential::fubini_study(), 1.0, 0.0).unwrap();
        assert!((pt.fzzbar() - 0.25).abs() < 1e-14);
        assert!(close(pt.c, re(1.0), 1e-14));
        assert!((pt.ricci - 0.5).abs() < 1e-14);
    }

    #[test]
    fn tubular_exp() {
        for y in [-0.5, 0.0, 0.7] {
            let pt = CrPoint::new(&Potential::tubular_default(), 0.3, y).unwrap();
            assert!(close(pt.c, I * 0.5, 1e-14));
            assert!(pt.ricci.abs() < 1e-14);
            assert!((pt.phi - 2.0 / y.exp()).abs() < 1e-14);
        }
    }

    #[test]
    fn tubular_branch_matches_planar_formulas() {
        let tub = Potential::tubular("log(1 + y^2) + 2*y^2", Domain::Plane).unwrap();
        let planar = Potential::custom("log(1 + y^2) + 2*y^2", Domain::Plane).unwrap();
        let a = CrPoint::new(&tub, 0.2, 0.4).unwrap();
        let b = CrPoint::new(&planar, 0.2, 0.4).unwrap();
        assert!(close(a.c, b.c, 1e-13));
        assert!((a.ricci - b.ricci).abs() < 1e-13);
        assert!((a.phi - b.phi).abs() < 1e-13);
        assert!((a.eta_o - b.eta_o).abs() < 1e-13);
        assert!(close(a.lambda_dz.value(), b.lambda_dz.value(), 1e-13));
    }

    #[test]
    fn c_against_central_differences() {
        let p = Potential::poincare();
        let (x, y) = (0.3, -0.2);
        let g = |x: f64, y: f64| CrPoint::new(&p, x, y).unwrap().fzzbar().ln();
        let h = 1e-5;
        let lx = (g(x + h, y) - g(x - h, y)) / (2.0 * h);
        let ly = (g(x, y + h) - g(x, y - h)) / (2.0 * h);
        let expected = Complex64::new(-0.5 * lx, 0.5 * ly);
        assert!(close(CrPoint::new(&p, x, y).unwrap().c, expected, 1e-8));
    }

    #[test]
    fn not_pseudoconvex() {
        let p = Potential::custom("-(x^2 + y^2)", Domain::Plane).unwrap();
        assert!(matches!(CrPoint::new(&p, 0.1, 0.1), Err(Error::NotPseudoconvex { .. })));
        let t = Potential::tubular("-exp(y)", Domain::Plane).unwrap();
        assert!(matches!(CrPoint::new(&t, 0.1, 0.1), Err(Error::NotPseudoconvex { .. })));
    }

    #[test]
    fn structure_equation_and_duality_on_catalog() {
        for e in catalog() {
            let [xr, yr] = e.sample_region;
            for k in 0..5 {
                let t = (k as f64 + 0.5) / 5.0;
                let (x, y) = (xr[0] + t * (xr[1] - xr[0]), yr[0] + (1.0 - t) * (yr[1] - yr[0]));
                let r = verify_structure_equation(&e.potential, x, y).unwrap();
                assert!(r < 1e-9, "{}: {r}", e.name);
                let pt = CrPoint::new(&e.potential, x, y).unwrap();
                assert!(pt.frame_duality_residual() < 1e-12);
            }
        }
        assert!(verify_structure_equation(&Potential::flat(), 0.7, 0.1).unwrap() < 1e-12);
    }

    #[test]
    fn c_is_minus_twice_dz_log_sqrt_fzzbar() {
        let pt = CrPoint::new(&Potential::fubini_study(), 0.4, 0.9).unwrap();
        let alt = pt.fzzb.sqrt().unwrap().ln().unwrap().d_z().unwrap().scale(re(-2.0));
        for (a, b) in alt.coeffs().iter().zip(pt.c_jet.coeffs()) {
            assert!(close(*a, *b, 1e-14));
        }
    }

    #[test]
    fn dz_cbar_equals_dzbar_c_and_quarter_r() {
        for e in catalog() {
            let [xr, yr] = e.sample_region;
            let (x, y) = (0.5 * (xr[0] + xr[1]) + 0.1, 0.5 * (yr[0] + yr[1]) - 0.05);
            let pt = CrPoint::new(&e.potential, x, y).unwrap();
            let a = pt.c_jet.conj().d_z().unwrap().value();
            let b = pt.c_jet.d_zbar().unwrap().value();
            assert!(close(a, b, 1e-10), "{}", e.name);
            // d_zbar c = R
            assert!((b.re - pt.ricci).abs() < 1e-12, "{}", e.name);
        }
    }

    #[test]
    fn sasakian_on_catalog() {
        for e in catalog() {
            let [xr, yr] = e.sample_region;
            let samples: Vec<_> = (0..6)
                .map(|k| {
                    let t = (k as f64 + 0.3) / 6.0;
                    [xr[0] + t * (xr[1] - xr[0]), yr[1] - t * (yr[1] - yr[0])]
                })
                .collect();
            let s = check_sasakian(&e.potential, &samples, 1e-9).unwrap();
            assert!(s.is_sasakian, "{}: {}", e.name, s.max_residual);
            assert_eq!(s.du_c, 0.0);
        }
    }

    #[test]
    fn reeb_scale_oracles() {
        let flat = reeb_scale(&Potential::flat(), &[[0.0, 0.0], [1.0, 2.0], [-1.0, 0.5]]).unwrap();
        assert!((flat - 1.0).abs() < 1e-15);

        let fs = Potential::fubini_study();
        let a1 = reeb_scale(&fs, &[[0.0, 0.0], [1.0, 0.0]]).unwrap();
        let a2 = reeb_scale(&fs, &[[0.0, 0.0], [0.0, 1.0], [1.0, 1.0], [1.0, 0.0]]).unwrap();
        assert!((a1 - a2).abs() / a1 < 1e-6);
        // A is proportional to 1 / F_zzbar
        let g0 = CrPoint::new(&fs, 0.0, 0.0).unwrap().fzzbar();
        let g1 = CrPoint::new(&fs, 1.0, 0.0).unwrap().fzzbar();
        assert!((a1 - g0 / g1).abs() < 1e-9);

        let t = reeb_scale(&Potential::tubular_default(), &[[0.0, 0.0], [0.3, 1.0]]).unwrap();
        assert!((t - (-1.0f64).exp()).abs() < 1e-10);

        assert!(matches!(
            reeb_scale(&Potential::poincare(), &[[0.0, 0.0], [2.0, 0.0]]),
            Err(Error::OutsideDomain { .. })
        ));
    }

    #[test]
    fn identity_gauge() {
        let pt = CrPoint::new(&Potential::fubini_study(), 0.3, 0.2).unwrap();
        let r = gauge_transform(&pt, &GaugePair::identity()).unwrap();
        assert!(close(r.c, pt.c, 1e-15));
        assert!(r.alpha.norm() < 1e-15 && r.beta.norm() < 1e-15);
    }

    #[test]
    fn holomorphic_gauge_on_flat() {
        let g = GaugePair::with_h("exp(z)", "0").unwrap();
        for (x, y) in [(0.0, 0.0), (0.5, -1.0)] {
            let pt = CrPoint::new(&Potential::flat(), x, y).unwrap();
            let r = gauge_transform(&pt, &g).unwrap();
            let z = Complex64::new(x, y);
            assert!(close(r.c, (-z).exp(), 1e-13));
        }
    }

    #[test]
    fn gauge_rejects_zero_and_inconsistent_h() {
        let pt = CrPoint::new(&Potential::flat(), 0.0, 0.0).unwrap();
        assert!(matches!(gauge_transform(&pt, &GaugePair::new("z").unwrap()), Err(Error::Gauge(_))));
        let pt = CrPoint::new(&Potential::flat(), 1.0, 0.0).unwrap();
        let bad = GaugePair::with_h("1 + x^2", "0").unwrap();
        assert!(matches!(gauge_transform(&pt, &bad), Err(Error::Gauge(_))));
    }

    #[test]
    fn harmonic_c_has_derivative_denominator() {
        // c = -phi'' / (conj(phi') + phi') for F = z conj(phi) + zbar phi
        for (phi, d1, d2) in [
            ("z^2", (|z: Complex64| 2.0 * z) as fn(Complex64) -> Complex64, (|_| re(2.0)) as fn(Complex64) -> Complex64),
            ("z^3", |z| 3.0 * z * z, |z| 6.0 * z),
        ] {
            let p = Potential::harmonic(phi, Domain::HalfPlane { min: 0.0 }).unwrap();
            for (x, y) in [(0.7, 0.1), (1.4, -0.6)] {
                let z = Complex64::new(x, y);
                let pt = CrPoint::new(&p, x, y).unwrap();
                let want = -d2(z) / (d1(z).conj() + d1(z));
                assert!(close(pt.c, want, 1e-12), "{phi}: {} vs {want}", pt.c);
            }
        }
    }

    #[test]
    fn gauge_law_matches_exterior_derivatives() {
        let gauges = ["1 + x^2 + i*y", "exp(x*y) * (2 + z)", "3 + x - 2*i*y^2 + x*y"];
        for p in [Potential::flat(), Potential::fubini_study(), Potential::harmonic_default()] {
            for g in gauges {
                let g = GaugePair::new(g).unwrap();
                let pt = CrPoint::new(&p, 0.8, 0.3).unwrap();
                let law = gauge_transform(&pt, &g).unwrap();
                let (dl, dm, [m, mb, l]) = transformed_coframe(&pt, &g).unwrap();
                let [k12, k13, k23] = dl.decompose(&m, &mb, &l).unwrap();
                assert!(close(k12, I, 1e-12));
                assert!(close(k13, law.c, 1e-12), "{k13} vs {}", law.c);
                assert!(close(k23, law.c.conj(), 1e-12));
                let [n12, n13, n23] = dm.decompose(&m, &mb, &l).unwrap();
                assert!(n12.norm() < 1e-12);
                assert!(close(n13, law.alpha, 1e-12), "{n13} vs {}", law.alpha);
                assert!(close(n23, law.beta, 1e-12), "{n23} vs {}", law.beta);
            }
        }
    }
}
