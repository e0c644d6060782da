//! Run reports and their file formats.

use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::config::RunConfig;
use crate::curvature::{CurvatureReport, ShearfreeReport, Verdict, ZERO_COMPONENTS};
use crate::error::Result;

/// One named pass/fail line.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckLine {
    pub tag: String,
    pub value: f64,
    pub tol: f64,
    pub passed: bool,
}

impl CheckLine {
    /// Passes when `value <= tol`.
    pub fn at_most(tag: &str, value: f64, tol: f64) -> Self {
        Self { tag: tag.into(), value, tol, passed: value <= tol }
    }

    /// Passes when `value > tol`.
    pub fn above(tag: &str, value: f64, tol: f64) -> Self {
        Self { tag: tag.into(), value, tol, passed: value > tol }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StructureSummary {
    pub points: usize,
    pub max_structure_residual: f64,
    pub max_duality_residual: f64,
    pub max_sasakian_residual: f64,
    /// `R / F_zzbar` when it is constant over the samples.
    pub einstein_constant: Option<f64>,
    pub passed: bool,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SolverSummary {
    /// `constant`, `power`, `explicit`, `ode` or `pde`.
    pub branch: String,
    pub description: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub q_constant: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub newton_iters: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub residual_norm: Option<f64>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub history: Vec<f64>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
    /// Max of the reduced lift equation at the plane samples.
    pub lift_equation_residual: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpecialitySummary {
    pub max_d0: f64,
    pub max_d1: f64,
    pub min_psi2: f64,
    /// `D0 = D1 = 0` and `Psi2 != 0` at every sample.
    pub type_ii_or_d: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub config: RunConfig,
    pub structure: StructureSummary,
    pub solver: SolverSummary,
    pub curvature: CurvatureReport,
    pub shearfree: ShearfreeReport,
    pub speciality: SpecialitySummary,
    pub checks: Vec<CheckLine>,
    pub verdict: Verdict,
}

impl RunReport {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self).map_err(|e| crate::Error::Config(e.to_string()))? + "\n")
    }

    /// Rows `x,y,u,r,component,value` for plotting; Ricci rows are deviations
    /// from the quasi-Einstein pattern.
    pub fn residual_csv(&self) -> String {
        let mut out = String::from("x,y,u,r,component,value\n");
        let lam = self.curvature.lambda_target;
        for s in &self.curvature.samples {
            let mut row = |name: &str, v: f64| {
                out.push_str(&format!("{},{},{},{},{name},{v:e}\n", s.x, s.y, s.u, s.r));
            };
            for (a, b) in ZERO_COMPONENTS {
                let [re, im] = s.ric[&format!("{a}{b}")];
                row(&format!("ric{a}{b}"), re.hypot(im));
            }
            for k in ["12", "34"] {
                let [re, im] = s.ric[k];
                row(&format!("ric{k}"), (re - lam).hypot(im));
            }
            row("phi", s.phi);
            row("d0", s.d0);
            row("d1", s.d1);
            row("psi2", s.psi2[0].hypot(s.psi2[1]));
        }
        out
    }
}

/// Writes through a temporary file in the same directory, then renames.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<()> {
    let dir = path.parent().filter(|d| !d.as_os_str().is_empty()).unwrap_or(Path::new("."));
    std::fs::create_dir_all(dir)?;
    let name = path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
    let tmp = dir.join(format!(".{name}.{}.tmp", std::process::id()));
    {
        let mut f = std::fs::File::create(&tmp)?;
        f.write_all(contents)?;
        f.sync_all()?;
    }
    std::fs::rename(&tmp, path)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn atomic_write_replaces() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("sub").join("a.txt");
        write_atomic(&p, b"one").unwrap();
        write_atomic(&p, b"two").unwrap();
        assert_eq!(std::fs::read_to_string(&p).unwrap(), "two");
        assert_eq!(std::fs::read_dir(p.parent().unwrap()).unwrap().count(), 1);
    }

    #[test]
    fn check_lines() {
        assert!(CheckLine::at_most("a", 1e-6, 1e-5).passed);
        assert!(!CheckLine::at_most("a", f64::NAN, 1e-5).passed);
        assert!(CheckLine::above("b", 0.2, 0.1).passed);
    }
}
