//! Potentials `F` of embedded Sasakian CR manifolds `v = F(z, zbar)`.

use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::expr::{parse_expression, Expr, Var};
use crate::jet::{Analytic, Jet1, Jet2};

/// Imaginary parts of `F` above this are treated as a non-real potential.
const REALITY_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PotentialKind {
    Flat,
    FubiniStudy,
    Poincare,
    Harmonic,
    Tubular,
    Frt,
    Custom,
}

impl PotentialKind {
    pub fn name(self) -> &'static str {
        match self {
            PotentialKind::Flat => "flat",
            PotentialKind::FubiniStudy => "fubini_study",
            PotentialKind::Poincare => "poincare",
            PotentialKind::Harmonic => "harmonic",
            PotentialKind::Tubular => "tubular",
            PotentialKind::Frt => "frt",
            PotentialKind::Custom => "custom",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Some(match name {
            "flat" => PotentialKind::Flat,
            "fubini_study" => PotentialKind::FubiniStudy,
            "poincare" => PotentialKind::Poincare,
            "harmonic" => PotentialKind::Harmonic,
            "tubular" => PotentialKind::Tubular,
            "frt" => PotentialKind::Frt,
            "custom" => PotentialKind::Custom,
            _ => return None,
        })
    }
}

/// Region of the `z`-plane on which a potential may be evaluated.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Domain {
    Plane,
    /// `|z| < radius`
    Disk { radius: f64 },
    /// `x > min`
    HalfPlane { min: f64 },
    Rect { x: [f64; 2], y: [f64; 2] },
}

impl Domain {
    pub fn contains(&self, x: f64, y: f64) -> bool {
        if !(x.is_finite() && y.is_finite()) {
            return false;
        }
        match *self {
            Domain::Plane => true,
            Domain::Disk { radius } => x * x + y * y < radius * radius,
            Domain::HalfPlane { min } => x > min,
            Domain::Rect { x: xr, y: yr } => xr[0] <= x && x <= xr[1] && yr[0] <= y && y <= yr[1],
        }
    }
}

impl fmt::Display for Domain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Domain::Plane => write!(f, "C"),
            Domain::Disk { radius } => write!(f, "|z| < {radius}"),
            Domain::HalfPlane { min } => write!(f, "x > {min}"),
            Domain::Rect { x, y } => write!(f, "[{}, {}] x [{}, {}]", x[0], x[1], y[0], y[1]),
        }
    }
}

#[derive(Clone, Debug)]
enum Source {
    Flat,
    FubiniStudy,
    Poincare,
    Frt,
    /// `F = z conj(phi(z)) + zbar phi(z)`
    Harmonic(Expr),
    /// `F = F(y)`
    Tubular(Expr),
    Custom(Expr),
}

/// A real potential together with its admissible domain.
#[derive(Clone, Debug)]
pub struct Potential {
    kind: PotentialKind,
    source: Source,
    domain: Domain,
    expr_text: Option<String>,
}

impl Potential {
    /// `F = |z|^2`: the Heisenberg structure.
    pub fn flat() -> Self {
        Self { kind: PotentialKind::Flat, source: Source::Flat, domain: Domain::Plane, expr_text: None }
    }

    /// `F = log(1 + |z|^2)`, Kähler–Einstein with constant 2.
    pub fn fubini_study() -> Self {
        Self { kind: PotentialKind::FubiniStudy, source: Source::FubiniStudy, domain: Domain::Plane, expr_text: None }
    }

    /// `F = -log(1 - |z|^2)` on the unit disk, Kähler–Einstein with constant -2.
    pub fn poincare() -> Self {
        Self {
            kind: PotentialKind::Poincare,
            source: Source::Poincare,
            domain: Domain::Disk { radius: 1.0 },
            expr_text: None,
        }
    }

    /// `F = (16/35) x^(7/2)` on `x > 0`; `F_zzbar = x^(3/2)`.
    pub fn frt() -> Self {
        Self { kind: PotentialKind::Frt, source: Source::Frt, domain: Domain::HalfPlane { min: 0.0 }, expr_text: None }
    }

    /// The catalog harmonic example `phi(z) = z^2` on `x > 0`.
    pub fn harmonic_default() -> Self {
        Self::harmonic("z^2", Domain::HalfPlane { min: 0.0 }).expect("builtin expression parses")
    }

    /// `F = z conj(phi) + zbar phi` for a holomorphic `phi` written in `z`.
    pub fn harmonic(phi: &str, domain: Domain) -> Result<Self> {
        let e = parse_expression(phi)?;
        if e.uses(Var::X) || e.uses(Var::Y) {
            return Err(Error::Config("harmonic phi must be an expression in z only".into()));
        }
        Ok(Self { kind: PotentialKind::Harmonic, source: Source::Harmonic(e), domain, expr_text: Some(phi.into()) })
    }

    /// The catalog tubular example `F = exp(y)`.
    pub fn tubular_default() -> Self {
        Self::tubular("exp(y)", Domain::Plane).expect("builtin expression parses")
    }

    /// Tubular potential `F = F(y)`.
    pub fn tubular(f_of_y: &str, domain: Domain) -> Result<Self> {
        let e = parse_expression(f_of_y)?;
        if e.uses(Var::X) || e.uses(Var::Z) {
            return Err(Error::Config("tubular potential must depend on y only".into()));
        }
        Ok(Self { kind: PotentialKind::Tubular, source: Source::Tubular(e), domain, expr_text: Some(f_of_y.into()) })
    }

    /// Arbitrary real potential `F(x, y)`.
    pub fn custom(text: &str, domain: Domain) -> Result<Self> {
        let e = parse_expression(text)?;
        Ok(Self { kind: PotentialKind::Custom, source: Source::Custom(e), domain, expr_text: Some(text.into()) })
    }

    /// Builds a potential from its configuration name and optional expression.
    pub fn from_kind(kind: PotentialKind, expr: Option<&str>, domain: Option<Domain>) -> Result<Self> {
        let need = |what: &str| Error::Config(format!("potential kind `{}` requires `{what}`", kind.name()));
        let mut p = match kind {
            PotentialKind::Flat => Self::flat(),
            PotentialKind::FubiniStudy => Self::fubini_study(),
            PotentialKind::Poincare => Self::poincare(),
            PotentialKind::Frt => Self::frt(),
            PotentialKind::Harmonic => match expr {
                Some(e) => Self::harmonic(e, Domain::HalfPlane { min: 0.0 })?,
                None => Self::harmonic_default(),
            },
            PotentialKind::Tubular => match expr {
                Some(e) => Self::tubular(e, Domain::Plane)?,
                None => Self::tubular_default(),
            },
            PotentialKind::Custom => Self::custom(expr.ok_or_else(|| need("expr"))?, Domain::Plane)?,
        };
        if let Some(d) = domain {
            p.domain = d;
        }
        Ok(p)
    }

    pub fn kind(&self) -> PotentialKind {
        self.kind
    }

    pub fn domain(&self) -> Domain {
        self.domain
    }

    pub fn expr_text(&self) -> Option<&str> {
        self.expr_text.as_deref()
    }

    pub fn is_tubular(&self) -> bool {
        matches!(self.source, Source::Tubular(_))
    }

    pub fn check_domain(&self, x: f64, y: f64) -> Result<()> {
        if self.domain.contains(x, y) {
            Ok(())
        } else {
            Err(Error::OutsideDomain { x, y, domain: self.domain.to_string() })
        }
    }

    /// Jet of `F` at `(x, y)`.
    pub fn jet(&self, x: f64, y: f64, order: usize) -> Result<Jet2> {
        self.check_domain(x, y)?;
        let base = [x, y];
        let one = Jet2::constant(1.0, base, order);
        let jx = Jet2::var_x(base, order);
        let jy = Jet2::var_y(base, order);
        let modulus = &jx * &jx + &jy * &jy;
        let f = match &self.source {
            Source::Flat => modulus,
            Source::FubiniStudy => (one + modulus).ln()?,
            Source::Poincare => -(one - modulus).ln()?,
            Source::Frt => jx.powf(3.5)?.scale(Complex64::new(16.0 / 35.0, 0.0)),
            Source::Harmonic(phi) => {
                let z = Jet2::var_z(base, order);
                let ph = phi.eval(&|_| Ok(z.clone()), &z)?;
                &z * &ph.conj() + &z.conj() * &ph
            }
            Source::Tubular(_) => return Ok(self.jet_y(y, order)?.to_jet2(x)),
            Source::Custom(e) => e.eval(
                &|v| {
                    Ok(match v {
                        Var::X => jx.clone(),
                        Var::Y => jy.clone(),
                        Var::Z => Jet2::var_z(base, order),
                    })
                },
                &one,
            )?,
        };
        check_real(f.value(), x, y)?;
        Ok(f.re())
    }

    /// Jet of a tubular potential `F(y)` in `y`.
    pub fn jet_y(&self, y: f64, order: usize) -> Result<Jet1> {
        let Source::Tubular(e) = &self.source else {
            return Err(Error::Config(format!("potential `{}` is not tubular", self.kind.name())));
        };
        if !y.is_finite() {
            return Err(Error::OutsideDomain { x: 0.0, y, domain: self.domain.to_string() });
        }
        let jy = Jet1::var(y, order);
        let f = e.eval(&|_| Ok(jy.clone()), &jy)?;
        check_real(f.value(), 0.0, y)?;
        Ok(Jet1::from_coeffs(y, f.coeffs().iter().map(|c| Complex64::new(c.re, 0.0)).collect()))
    }
}

fn check_real(v: Complex64, x: f64, y: f64) -> Result<()> {
    if v.im.abs() > REALITY_TOL * v.re.abs().max(1.0) {
        return Err(Error::Config(format!("potential is not real at ({x}, {y}): F = {v}")));
    }
    Ok(())
}

/// One row of the built-in catalog.
#[derive(Clone, Debug)]
pub struct CatalogEntry {
    pub name: &'static str,
    pub formula: &'static str,
    pub potential: Potential,
    /// Rectangle inside the domain used for random sampling.
    pub sample_region: [[f64; 2]; 2],
    pub exercises: &'static str,
    /// Cosmological constant the entry is usually lifted with.
    pub default_lambda: f64,
}

pub fn catalog() -> Vec<CatalogEntry> {
    vec![
        CatalogEntry {
            name: "flat",
            formula: "F = x^2 + y^2",
            potential: Potential::flat(),
            sample_region: [[-2.0, 2.0], [-2.0, 2.0]],
            exercises: "structure equations with c = 0 (Heisenberg)",
            default_lambda: 0.0,
        },
        CatalogEntry {
            name: "fubini_study",
            formula: "F = log(1 + x^2 + y^2)",
            potential: Potential::fubini_study(),
            sample_region: [[-2.0, 2.0], [-2.0, 2.0]],
            exercises: "Kähler–Einstein quotient, constant q gives an Einstein lift",
            default_lambda: 1.5,
        },
        CatalogEntry {
            name: "poincare",
            formula: "F = -log(1 - x^2 - y^2), |z| < 1",
            potential: Potential::poincare(),
            sample_region: [[-0.55, 0.55], [-0.55, 0.55]],
            exercises: "Kähler–Einstein quotient with negative Einstein constant",
            default_lambda: -1.5,
        },
        CatalogEntry {
            name: "harmonic",
            formula: "F = z conj(phi) + zbar phi, phi = z^2, x > 0",
            potential: Potential::harmonic_default(),
            sample_region: [[0.5, 2.0], [-1.0, 1.0]],
            exercises: "Ricci-flat lift with Lambda = 0 and p = F_zzbar",
            default_lambda: 0.0,
        },
        CatalogEntry {
            name: "tubular",
            formula: "F = exp(y)",
            potential: Potential::tubular_default(),
            sample_region: [[-1.0, 1.0], [0.0, 1.0]],
            exercises: "tubular quasi-Einstein lift via the ODE",
            default_lambda: 1.0,
        },
        CatalogEntry {
            name: "frt",
            formula: "F = (16/35) x^(7/2), x > 0",
            potential: Potential::frt(),
            sample_region: [[0.5, 2.0], [-1.0, 1.0]],
            exercises: "Lambda = 0 with p = F_zzbar^(2/3)",
            default_lambda: 0.0,
        },
    ]
}

pub fn catalog_entry(name: &str) -> Option<CatalogEntry> {
    catalog().into_iter().find(|e| e.name == name)
}
