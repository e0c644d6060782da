//! Solvers for the conformal factor `q` (`p = sqrt(F_zzbar) q`).

pub mod interp;
pub mod linalg;
pub mod logistic;
pub mod tubular;

pub use interp::GridInterpolant;
pub use logistic::{richardson_combine, solve_logistic, Boundary, GridConfig, GridSolution, InitialGuess, LinearSolver};
pub use tubular::{solve_tubular, OdeSolution, TubularProblem, CUBIC_COEFFICIENT};

use crate::cr::CrPoint;
use crate::error::Result;
use crate::lift::LiftProfile;
use crate::potential::Potential;

/// `R / F_zzbar` if it is constant over the samples (relative spread below 1e-8).
pub fn einstein_constant(p: &Potential, samples: &[[f64; 2]]) -> Result<Option<f64>> {
    let ratios: Vec<f64> = samples
        .iter()
        .map(|&[x, y]| {
            let pt = CrPoint::new(p, x, y)?;
            Ok(pt.ricci / pt.fzzbar())
        })
        .collect::<Result<_>>()?;
    if ratios.is_empty() {
        return Ok(None);
    }
    let mean = ratios.iter().sum::<f64>() / ratios.len() as f64;
    let spread = ratios.iter().fold(0.0f64, |m, r| m.max((r - mean).abs()));
    Ok((spread <= 1e-8 * mean.abs().max(1.0)).then_some(mean))
}

/// The constant solution `q = sqrt(3 Lambda_0 / (4 Lambda))` when the quotient
/// is Kähler–Einstein with `Lambda_0 Lambda > 0`.
pub fn constant_solution(p: &Potential, lambda: f64, samples: &[[f64; 2]]) -> Result<Option<f64>> {
    Ok(einstein_constant(p, samples)?
        .filter(|l0| l0 * lambda > 0.0 && l0.abs() > 1e-12)
        .map(|l0| (3.0 * l0 / (4.0 * lambda)).sqrt()))
}

/// Max-norm of the reduced lift equation
/// `p_zzbar + cbar p_z/2 + c p_zbar/2 + (|c|^2/4 + 3 (cbar)_z/4) p - Lambda p^3/3`.
pub fn pde_residual(profile: &LiftProfile, samples: &[[f64; 2]]) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for &[x, y] in samples {
        worst = worst.max(profile.point(x, y)?.b()?.reduced.norm());
    }
    Ok(worst)
}
