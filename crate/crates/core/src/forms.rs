//! Exterior calculus for `u`-independent forms on `(z, zbar, u)` space.
//!
//! One-forms are written in the basis `(dz, dzbar, du)`, two-forms in the basis
//! `(dz^dzbar, dz^du, dzbar^du)`.

use std::ops::{Add, Mul, Sub};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::jet::{Analytic, Jet2};

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct OneForm {
    pub dz: Complex64,
    pub dzb: Complex64,
    pub du: Complex64,
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct TwoForm {
    pub dz_dzb: Complex64,
    pub dz_du: Complex64,
    pub dzb_du: Complex64,
}

impl OneForm {
    pub fn new(dz: Complex64, dzb: Complex64, du: Complex64) -> Self {
        Self { dz, dzb, du }
    }

    pub fn dz() -> Self {
        Self::new(Complex64::new(1.0, 0.0), Complex64::default(), Complex64::default())
    }

    pub fn dzb() -> Self {
        Self::new(Complex64::default(), Complex64::new(1.0, 0.0), Complex64::default())
    }

    pub fn conj(&self) -> Self {
        Self::new(self.dzb.conj(), self.dz.conj(), self.du.conj())
    }

    pub fn wedge(&self, o: &OneForm) -> TwoForm {
        TwoForm {
            dz_dzb: self.dz * o.dzb - self.dzb * o.dz,
            dz_du: self.dz * o.du - self.du * o.dz,
            dzb_du: self.dzb * o.du - self.du * o.dzb,
        }
    }
}

impl TwoForm {
    pub fn max_abs(&self) -> f64 {
        self.dz_dzb.norm().max(self.dz_du.norm()).max(self.dzb_du.norm())
    }

    fn as_array(&self) -> [Complex64; 3] {
        [self.dz_dzb, self.dz_du, self.dzb_du]
    }

    /// Coefficients `(k12, k13, k23)` with
    /// `self = k12 t1^t2 + k13 t1^t3 + k23 t2^t3` for a coframe `(t1, t2, t3)`.
    pub fn decompose(&self, t1: &OneForm, t2: &OneForm, t3: &OneForm) -> Result<[Complex64; 3]> {
        let cols = [t1.wedge(t2).as_array(), t1.wedge(t3).as_array(), t2.wedge(t3).as_array()];
        let mut a = [[Complex64::default(); 4]; 3];
        let rhs = self.as_array();
        for r in 0..3 {
            for c in 0..3 {
                a[r][c] = cols[c][r];
            }
            a[r][3] = rhs[r];
        }
        solve3(a)
    }
}

impl Add for TwoForm {
    type Output = TwoForm;
    fn add(self, o: TwoForm) -> TwoForm {
        TwoForm { dz_dzb: self.dz_dzb + o.dz_dzb, dz_du: self.dz_du + o.dz_du, dzb_du: self.dzb_du + o.dzb_du }
    }
}

impl Sub for TwoForm {
    type Output = TwoForm;
    fn sub(self, o: TwoForm) -> TwoForm {
        TwoForm { dz_dzb: self.dz_dzb - o.dz_dzb, dz_du: self.dz_du - o.dz_du, dzb_du: self.dzb_du - o.dzb_du }
    }
}

impl Mul<TwoForm> for Complex64 {
    type Output = TwoForm;
    fn mul(self, o: TwoForm) -> TwoForm {
        TwoForm { dz_dzb: self * o.dz_dzb, dz_du: self * o.dz_du, dzb_du: self * o.dzb_du }
    }
}

/// Gaussian elimination with partial pivoting on an augmented 3x4 system.
fn solve3(mut a: [[Complex64; 4]; 3]) -> Result<[Complex64; 3]> {
    for col in 0..3 {
        let piv = (col..3).max_by(|&i, &j| a[i][col].norm().total_cmp(&a[j][col].norm())).unwrap();
        if a[piv][col].norm() < 1e-300 {
            return Err(Error::Singular("coframe wedges are linearly dependent".into()));
        }
        a.swap(col, piv);
        for r in 0..3 {
            if r != col {
                let k = a[r][col] / a[col][col];
                for c in col..4 {
                    let v = a[col][c];
                    a[r][c] -= k * v;
                }
            }
        }
    }
    Ok([a[0][3] / a[0][0], a[1][3] / a[1][1], a[2][3] / a[2][2]])
}

/// A one-form whose coefficients are jets in `(x, y)`.
#[derive(Clone, Debug)]
pub struct OneFormJet {
    pub dz: Jet2,
    pub dzb: Jet2,
    pub du: Jet2,
}

impl OneFormJet {
    pub fn value(&self) -> OneForm {
        OneForm::new(self.dz.value(), self.dzb.value(), self.du.value())
    }

    /// Exterior derivative at the base point.
    pub fn exterior(&self) -> Result<TwoForm> {
        Ok(TwoForm {
            dz_dzb: self.dzb.d_z()?.value() - self.dz.d_zbar()?.value(),
            dz_du: self.du.d_z()?.value(),
            dzb_du: self.du.d_zbar()?.value(),
        })
    }

    pub fn scale(&self, s: &Jet2) -> Self {
        Self { dz: &self.dz * s, dzb: &self.dzb * s, du: &self.du * s }
    }

    pub fn add(&self, o: &OneFormJet) -> Self {
        Self { dz: &self.dz + &o.dz, dzb: &self.dzb + &o.dzb, du: &self.du + &o.du }
    }
}
