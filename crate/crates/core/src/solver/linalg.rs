//! Matrix-free Krylov solvers for the Newton systems.

use crate::error::{Error, Result};

/// A square linear operator acting on flat vectors.
pub trait LinearOperator {
    fn dim(&self) -> usize;
    fn apply(&self, x: &[f64], out: &mut [f64]);
    /// Diagonal, used as a Jacobi preconditioner.
    fn diagonal(&self) -> Vec<f64>;
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KrylovStats {
    pub iterations: usize,
    pub residual: f64,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

fn inverse_diagonal(op: &dyn LinearOperator) -> Result<Vec<f64>> {
    op.diagonal()
        .into_iter()
        .map(|d| if d != 0.0 && d.is_finite() { Ok(1.0 / d) } else { Err(Error::Singular("zero diagonal".into())) })
        .collect()
}

/// Preconditioned conjugate gradients; `op` must be symmetric positive definite.
pub fn cg(op: &dyn LinearOperator, b: &[f64], x: &mut [f64], rtol: f64, max_iter: usize) -> Result<KrylovStats> {
    let n = op.dim();
    let minv = inverse_diagonal(op)?;
    let mut r = vec![0.0; n];
    op.apply(x, &mut r);
    for i in 0..n {
        r[i] = b[i] - r[i];
    }
    let target = rtol * norm(b).max(f64::MIN_POSITIVE);
    let mut z: Vec<f64> = r.iter().zip(&minv).map(|(a, m)| a * m).collect();
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    let mut ap = vec![0.0; n];
    for it in 0..max_iter {
        let rn = norm(&r);
        if rn <= target {
            return Ok(KrylovStats { iterations: it, residual: rn });
        }
        op.apply(&p, &mut ap);
        let pap = dot(&p, &ap);
        if !(pap > 0.0) {
            return Err(Error::Singular("operator is not positive definite".into()));
        }
        let alpha = rz / pap;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        for i in 0..n {
            z[i] = r[i] * minv[i];
        }
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    let rn = norm(&r);
    if rn <= target {
        Ok(KrylovStats { iterations: max_iter, residual: rn })
    } else {
        Err(Error::Singular(format!("CG did not converge: residual {rn:.3e}")))
    }
}

/// Right-preconditioned BiCGSTAB for general nonsingular operators.
pub fn bicgstab(op: &dyn LinearOperator, b: &[f64], x: &mut [f64], rtol: f64, max_iter: usize) -> Result<KrylovStats> {
    let n = op.dim();
    let minv = inverse_diagonal(op)?;
    let mut r = vec![0.0; n];
    op.apply(x, &mut r);
    for i in 0..n {
        r[i] = b[i] - r[i];
    }
    let target = rtol * norm(b).max(f64::MIN_POSITIVE);
    let r0 = r.clone();
    let (mut rho, mut alpha, mut omega) = (1.0, 1.0, 1.0);
    let mut v = vec![0.0; n];
    let mut p = vec![0.0; n];
    let mut y = vec![0.0; n];
    let mut s = vec![0.0; n];
    let mut zs = vec![0.0; n];
    let mut t = vec![0.0; n];
    for it in 0..max_iter {
        let rn = norm(&r);
        if rn <= target {
            return Ok(KrylovStats { iterations: it, residual: rn });
        }
        let rho_new = dot(&r0, &r);
        if rho_new.abs() < 1e-300 {
            return Err(Error::Singular("BiCGSTAB breakdown".into()));
        }
        let beta = (rho_new / rho) * (alpha / omega);
        rho = rho_new;
        for i in 0..n {
            p[i] = r[i] + beta * (p[i] - omega * v[i]);
            y[i] = p[i] * minv[i];
        }
        op.apply(&y, &mut v);
        alpha = rho / dot(&r0, &v);
        for i in 0..n {
            s[i] = r[i] - alpha * v[i];
        }
        if norm(&s) <= target {
            for i in 0..n {
                x[i] += alpha * y[i];
            }
            return Ok(KrylovStats { iterations: it + 1, residual: norm(&s) });
        }
        for i in 0..n {
            zs[i] = s[i] * minv[i];
        }
        op.apply(&zs, &mut t);
        omega = dot(&t, &s) / dot(&t, &t);
        for i in 0..n {
            x[i] += alpha * y[i] + omega * zs[i];
            r[i] = s[i] - omega * t[i];
        }
    }
    let rn = norm(&r);
    if rn <= target {
        Ok(KrylovStats { iterations: max_iter, residual: rn })
    } else {
        Err(Error::Singular(format!("BiCGSTAB did not converge: residual {rn:.3e}")))
    }
}
