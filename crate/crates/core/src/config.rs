//! Run configuration read from TOML.
//!
//! ```toml
//! lambda = 1.5
//! mode = "auto"                 # constant | pde | ode | { explicit_p = "..." }
//!
//! [potential]
//! kind = "fubini_study"         # or harmonic / tubular / custom with `expr`
//!
//! [samples]
//! count = 20
//! seed = 1
//! r = [-2.5, 2.5]
//! ```

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::curvature::{CheckConfig, StencilConfig};
use crate::error::{Error, Result};
use crate::lift::{RConvention, MAX_SAMPLE_R};
use crate::potential::{catalog_entry, Domain, Potential, PotentialKind};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PotentialConfig {
    pub kind: PotentialKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expr: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub domain: Option<Domain>,
}

/// How the conformal factor is chosen.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    /// Constant solution when the quotient is Kähler–Einstein, otherwise a
    /// natural profile for the potential, otherwise the ODE or grid solver.
    #[default]
    Auto,
    Constant,
    Pde,
    Ode,
    /// `p` given as an expression in `x`, `y`.
    ExplicitP(String),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridParams {
    /// Defaults to the catalog sampling rectangle, or `[-1, 1]^2`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub x: Option<[f64; 2]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub y: Option<[f64; 2]>,
    pub n: usize,
    pub tol: f64,
    pub max_iters: usize,
    pub eps: f64,
    /// Constant initial guess; the asymptotic profile when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub initial: Option<f64>,
    /// Also solve on the halved grid and extrapolate away the `h^2` error.
    pub extrapolate: bool,
}

impl Default for GridParams {
    fn default() -> Self {
        Self { x: None, y: None, n: 65, tol: 1e-9, max_iters: 50, eps: 1e-6, initial: None, extrapolate: true }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OdeParams {
    pub q0: f64,
    pub qp0: f64,
    /// Defaults to the `y` sampling range.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub y: Option<[f64; 2]>,
    pub h: f64,
}

impl Default for OdeParams {
    fn default() -> Self {
        Self { q0: 0.5, qp0: 0.0, y: None, h: 1e-3 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SampleParams {
    pub count: usize,
    pub seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub x: Option<[f64; 2]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub y: Option<[f64; 2]>,
    pub u: [f64; 2],
    pub r: [f64; 2],
    /// Points used by the structure-equation check.
    pub structure_count: usize,
}

impl Default for SampleParams {
    fn default() -> Self {
        Self { count: 20, seed: 0, x: None, y: None, u: [-1.0, 1.0], r: [-2.5, 2.5], structure_count: 50 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    pub structure: f64,
    pub pattern: f64,
    pub phi: f64,
    pub speciality: f64,
    pub shearfree: f64,
    pub step: f64,
    pub richardson: bool,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self { structure: 1e-9, pattern: 1e-4, phi: 1e-5, speciality: 1e-5, shearfree: 1e-8, step: 1e-3, richardson: true }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputParams {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dir: Option<PathBuf>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub lambda: f64,
    #[serde(default)]
    pub mode: Mode,
    #[serde(default)]
    pub convention: RConvention,
    pub potential: PotentialConfig,
    #[serde(default)]
    pub grid: GridParams,
    #[serde(default)]
    pub ode: OdeParams,
    #[serde(default)]
    pub samples: SampleParams,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub output: OutputParams,
}

impl RunConfig {
    /// A default configuration for a catalog entry.
    pub fn for_catalog(name: &str) -> Result<Self> {
        let entry = catalog_entry(name).ok_or_else(|| Error::Config(format!("unknown catalog entry `{name}`")))?;
        Ok(Self {
            lambda: entry.default_lambda,
            mode: Mode::Auto,
            convention: RConvention::Standard,
            potential: PotentialConfig { kind: entry.potential.kind(), expr: None, domain: None },
            grid: GridParams::default(),
            ode: OdeParams::default(),
            samples: SampleParams::default(),
            tolerances: Tolerances::default(),
            output: OutputParams::default(),
        })
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn validate(&self) -> Result<()> {
        let t = &self.tolerances;
        for (name, v) in [
            ("structure", t.structure),
            ("pattern", t.pattern),
            ("phi", t.phi),
            ("speciality", t.speciality),
            ("shearfree", t.shearfree),
            ("step", t.step),
            ("grid.tol", self.grid.tol),
            ("grid.eps", self.grid.eps),
            ("ode.h", self.ode.h),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Config(format!("tolerance `{name}` must be positive, got {v}")));
            }
        }
        if !self.lambda.is_finite() {
            return Err(Error::Config("lambda must be finite".into()));
        }
        let r = self.samples.r;
        if !(r[0] <= r[1] && r[0] >= -MAX_SAMPLE_R && r[1] <= MAX_SAMPLE_R) {
            return Err(Error::Config(format!(
                "sample r-range [{}, {}] must lie within [-{MAX_SAMPLE_R}, {MAX_SAMPLE_R}]",
                r[0], r[1]
            )));
        }
        let ranges = [Some(self.samples.u), self.samples.x, self.samples.y, self.grid.x, self.grid.y, self.ode.y];
        if ranges.iter().flatten().any(|v| !(v[0] <= v[1])) {
            return Err(Error::Config("ranges must be ordered [lo, hi]".into()));
        }
        if self.samples.count == 0 {
            return Err(Error::Config("samples.count must be positive".into()));
        }
        if self.grid.n < 3 {
            return Err(Error::Config("grid.n must be at least 3".into()));
        }
        if !(self.ode.q0 > 0.0) {
            return Err(Error::Config("ode.q0 must be positive".into()));
        }
        Ok(())
    }

    pub fn potential(&self) -> Result<Potential> {
        let pc = &self.potential;
        Potential::from_kind(pc.kind, pc.expr.as_deref(), pc.domain)
    }

    /// Sampling rectangle in the `z`-plane.
    pub fn sample_region(&self) -> [[f64; 2]; 2] {
        let base = catalog_entry(self.potential.kind.name())
            .filter(|_| self.potential.expr.is_none() && self.potential.domain.is_none())
            .map(|e| e.sample_region)
            .unwrap_or(match self.potential.domain {
                Some(Domain::Rect { x, y }) => [x, y],
                _ => [[-1.0, 1.0], [-1.0, 1.0]],
            });
        [self.samples.x.unwrap_or(base[0]), self.samples.y.unwrap_or(base[1])]
    }

    pub fn check_config(&self) -> CheckConfig {
        let t = &self.tolerances;
        CheckConfig {
            stencil: StencilConfig { h: t.step, richardson: t.richardson },
            pattern_tol: t.pattern,
            phi_tol: t.phi,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_file() {
        let cfg = RunConfig::from_toml("lambda = 1.5\n[potential]\nkind = \"fubini_study\"\n").unwrap();
        assert_eq!(cfg.mode, Mode::Auto);
        assert_eq!(cfg.samples.count, 20);
        assert_eq!(cfg.sample_region(), [[-2.0, 2.0], [-2.0, 2.0]]);
    }

    #[test]
    fn round_trip() {
        let mut cfg = RunConfig::for_catalog("harmonic").unwrap();
        cfg.mode = Mode::ExplicitP("x^2 + 1".into());
        cfg.potential.expr = Some("z^3".into());
        cfg.potential.domain = Some(Domain::Rect { x: [0.5, 1.0], y: [-1.0, 1.0] });
        cfg.grid.x = Some([0.0, 1.0]);
        cfg.samples.seed = 99;
        cfg.convention = RConvention::Reflected;
        let text = cfg.to_toml().unwrap();
        assert_eq!(RunConfig::from_toml(&text).unwrap(), cfg);
        for name in ["flat", "fubini_study", "poincare", "harmonic", "tubular", "frt"] {
            let cfg = RunConfig::for_catalog(name).unwrap();
            assert_eq!(RunConfig::from_toml(&cfg.to_toml().unwrap()).unwrap(), cfg);
        }
    }

    #[test]
    fn modes_parse() {
        let base = "lambda = 0\n[potential]\nkind = \"flat\"\n";
        for (m, want) in [("\"pde\"", Mode::Pde), ("\"ode\"", Mode::Ode), ("{ explicit_p = \"1\" }", Mode::ExplicitP("1".into()))] {
            let cfg = RunConfig::from_toml(&format!("mode = {m}\n{base}")).unwrap();
            assert_eq!(cfg.mode, want);
        }
    }

    #[test]
    fn rejects_bad_values() {
        let base = "lambda = 1\n[potential]\nkind = \"flat\"\n";
        for extra in [
            "[tolerances]\npattern = 0.0\n",
            "[tolerances]\nphi = -1e-3\n",
            "[samples]\nr = [-3.0, 1.0]\n",
            "[samples]\nu = [1.0, -1.0]\n",
            "[grid]\nn = 2\n",
            "[samples]\nbogus = 1\n",
        ] {
            let err = RunConfig::from_toml(&format!("{base}{extra}")).unwrap_err();
            assert!(matches!(err, Error::Config(_)), "{extra}");
        }
        assert!(RunConfig::from_toml("lambda = [").is_err());
        assert!(RunConfig::from_toml("lambda = 1\n[potential]\nkind = \"nope\"\n").is_err());
    }
}
