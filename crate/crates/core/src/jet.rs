//! Truncated Taylor arithmetic in one and two real variables.
//!
//! A [`Jet2`] stores the Taylor coefficients `a_ij = f^(i,j)(x0, y0) / (i! j!)`
//! of a complex-valued function of `(x, y)` for all `i + j <= order`. Products,
//! quotients and analytic compositions are exact up to the truncation order,
//! so every derivative the geometry needs falls out of plain arithmetic.
//!
//! Coefficients are laid out by total degree (`1, x, y, x^2, xy, y^2, ...`),
//! which makes truncation to a lower order a prefix slice.

use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Default truncation order used by the metric evaluators.
pub const ORDER: usize = 4;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

#[inline]
fn idx2(i: usize, j: usize) -> usize {
    let t = i + j;
    t * (t + 1) / 2 + j
}

/// Number of coefficients of a two-variable jet of the given order.
pub fn len2(order: usize) -> usize {
    (order + 1) * (order + 2) / 2
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

/// Operations shared by [`Jet1`] and [`Jet2`]; enough to evaluate expression
/// trees generically.
pub trait Analytic: Clone + Sized {
    fn order(&self) -> usize;
    fn value(&self) -> Complex64;
    fn constant_like(&self, c: Complex64) -> Self;
    fn add_jet(&self, other: &Self) -> Self;
    fn sub_jet(&self, other: &Self) -> Self;
    fn mul_jet(&self, other: &Self) -> Self;
    fn scale(&self, c: Complex64) -> Self;
    /// Same jet with the constant term replaced.
    fn with_value(&self, c: Complex64) -> Self;

    fn neg_jet(&self) -> Self {
        self.scale(-ONE)
    }

    /// `sum_k f^(k)(a0)/k! (a - a0)^k` given `derivs[k] = f^(k)(a0)`.
    fn compose(&self, derivs: &[Complex64]) -> Self {
        let n = self.order();
        let h = self.with_value(ZERO);
        let mut out = self.constant_like(derivs[0]);
        let mut power = self.constant_like(ONE);
        for (k, d) in derivs.iter().enumerate().take(n + 1).skip(1) {
            power = power.mul_jet(&h);
            out = out.add_jet(&power.scale(d / factorial(k)));
        }
        out
    }

    fn recip(&self) -> Result<Self> {
        let a0 = self.value();
        if a0.norm() < 1e-300 {
            return Err(Error::Singular("reciprocal of a jet with zero constant term".into()));
        }
        let derivs: Vec<Complex64> = (0..=self.order())
            .map(|k| {
                let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
                sign * factorial(k) / a0.powi(k as i32 + 1)
            })
            .collect();
        Ok(self.compose(&derivs))
    }

    fn try_div(&self, other: &Self) -> Result<Self> {
        Ok(self.mul_jet(&other.recip()?))
    }

    fn exp(&self) -> Self {
        let e = self.value().exp();
        self.compose(&vec![e; self.order() + 1])
    }

    fn ln(&self) -> Result<Self> {
        let a0 = self.value();
        check_branch(a0, "log")?;
        let mut derivs = vec![a0.ln()];
        for k in 1..=self.order() {
            let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
            derivs.push(sign * factorial(k - 1) / a0.powi(k as i32));
        }
        Ok(self.compose(&derivs))
    }

    fn powf(&self, alpha: f64) -> Result<Self> {
        let a0 = self.value();
        check_branch(a0, "pow")?;
        let mut derivs = Vec::with_capacity(self.order() + 1);
        let mut falling = 1.0;
        for k in 0..=self.order() {
            derivs.push(falling * a0.powf(alpha - k as f64));
            falling *= alpha - k as f64;
        }
        Ok(self.compose(&derivs))
    }

    fn sqrt(&self) -> Result<Self> {
        self.powf(0.5)
    }

    fn powi(&self, n: i32) -> Result<Self> {
        if n < 0 {
            return self.recip()?.powi(-n);
        }
        let mut out = self.constant_like(ONE);
        let mut base = self.clone();
        let mut e = n as u32;
        while e > 0 {
            if e & 1 == 1 {
                out = out.mul_jet(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul_jet(&base);
            }
        }
        Ok(out)
    }

    fn sin(&self) -> Self {
        let (s, c) = (self.value().sin(), self.value().cos());
        let cycle = [s, c, -s, -c];
        let derivs: Vec<_> = (0..=self.order()).map(|k| cycle[k % 4]).collect();
        self.compose(&derivs)
    }

    fn cos(&self) -> Self {
        let (s, c) = (self.value().sin(), self.value().cos());
        let cycle = [c, -s, -c, s];
        let derivs: Vec<_> = (0..=self.order()).map(|k| cycle[k % 4]).collect();
        self.compose(&derivs)
    }
}

// log / sqrt / fractional powers use the principal branch; the cut is the
// closed negative real axis.
fn check_branch(a0: Complex64, what: &str) -> Result<()> {
    if a0.re <= 0.0 && a0.im.abs() <= 1e-14 * a0.re.abs().max(1e-300) {
        return Err(Error::Singular(format!("{what} of a jet with constant term {a0}")));
    }
    Ok(())
}

/// Truncated Taylor expansion of a complex function of `(x, y)`.
#[derive(Clone, Debug, PartialEq)]
pub struct Jet2 {
    order: usize,
    base: [f64; 2],
    coeffs: Vec<Complex64>,
}

impl Jet2 {
    pub fn constant(c: impl Into<Complex64>, base: [f64; 2], order: usize) -> Self {
        let mut coeffs = vec![ZERO; len2(order)];
        coeffs[0] = c.into();
        Self { order, base, coeffs }
    }

    pub fn zero(base: [f64; 2], order: usize) -> Self {
        Self::constant(ZERO, base, order)
    }

    /// The coordinate function `x` expanded at `base`.
    pub fn var_x(base: [f64; 2], order: usize) -> Self {
        let mut j = Self::constant(base[0], base, order);
        if order >= 1 {
            j.coeffs[idx2(1, 0)] = ONE;
        }
        j
    }

    pub fn var_y(base: [f64; 2], order: usize) -> Self {
        let mut j = Self::constant(base[1], base, order);
        if order >= 1 {
            j.coeffs[idx2(0, 1)] = ONE;
        }
        j
    }

    /// `z = x + i y`.
    pub fn var_z(base: [f64; 2], order: usize) -> Self {
        Self::var_x(base, order).add_jet(&Self::var_y(base, order).scale(I))
    }

    /// Builds a jet from Taylor coefficients `f(i, j) = a_ij`.
    pub fn from_fn(base: [f64; 2], order: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut coeffs = vec![ZERO; len2(order)];
        for t in 0..=order {
            for j in 0..=t {
                coeffs[idx2(t - j, j)] = f(t - j, j);
            }
        }
        Self { order, base, coeffs }
    }

    pub fn base(&self) -> [f64; 2] {
        self.base
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    /// Taylor coefficient `a_ij`; zero beyond the truncation order.
    pub fn coeff(&self, i: usize, j: usize) -> Complex64 {
        if i + j > self.order {
            ZERO
        } else {
            self.coeffs[idx2(i, j)]
        }
    }

    /// Partial derivative `d^(i+j) f / dx^i dy^j` at the base point.
    pub fn partial(&self, i: usize, j: usize) -> Complex64 {
        self.coeff(i, j) * factorial(i) * factorial(j)
    }

    pub fn truncate(&self, order: usize) -> Self {
        let order = order.min(self.order);
        Self { order, base: self.base, coeffs: self.coeffs[..len2(order)].to_vec() }
    }

    pub fn conj(&self) -> Self {
        Self { order: self.order, base: self.base, coeffs: self.coeffs.iter().map(|c| c.conj()).collect() }
    }

    /// Jet of the real part (the variables are real, so this is coefficientwise).
    pub fn re(&self) -> Self {
        Self {
            order: self.order,
            base: self.base,
            coeffs: self.coeffs.iter().map(|c| Complex64::new(c.re, 0.0)).collect(),
        }
    }

    /// Largest imaginary part among the coefficients.
    pub fn max_imag(&self) -> f64 {
        self.coeffs.iter().map(|c| c.im.abs()).fold(0.0, f64::max)
    }

    fn lowered(&self) -> Result<usize> {
        self.order
            .checked_sub(1)
            .ok_or_else(|| Error::Singular("jet order exhausted by differentiation".into()))
    }

    pub fn dx(&self) -> Result<Self> {
        let order = self.lowered()?;
        Ok(Self::from_fn(self.base, order, |i, j| self.coeff(i + 1, j) * (i + 1) as f64))
    }

    pub fn dy(&self) -> Result<Self> {
        let order = self.lowered()?;
        Ok(Self::from_fn(self.base, order, |i, j| self.coeff(i, j + 1) * (j + 1) as f64))
    }

    /// Wirtinger derivative `d/dz = (d/dx - i d/dy) / 2`.
    pub fn d_z(&self) -> Result<Self> {
        let (dx, dy) = (self.dx()?, self.dy()?);
        Ok(dx.sub_jet(&dy.scale(I)).scale(Complex64::new(0.5, 0.0)))
    }

    /// Wirtinger derivative `d/dzbar = (d/dx + i d/dy) / 2`.
    pub fn d_zbar(&self) -> Result<Self> {
        let (dx, dy) = (self.dx()?, self.dy()?);
        Ok(dx.add_jet(&dy.scale(I)).scale(Complex64::new(0.5, 0.0)))
    }

    /// Evaluates the truncated polynomial at `base + (dx, dy)`.
    pub fn eval_offset(&self, dx: f64, dy: f64) -> Complex64 {
        let mut acc = ZERO;
        for t in 0..=self.order {
            for j in 0..=t {
                let i = t - j;
                acc += self.coeffs[idx2(i, j)] * dx.powi(i as i32) * dy.powi(j as i32);
            }
        }
        acc
    }

    fn zip(&self, other: &Self, f: impl Fn(Complex64, Complex64) -> Complex64) -> Self {
        assert_eq!(self.base, other.base, "jets expanded at different points");
        let order = self.order.min(other.order);
        let coeffs = (0..len2(order)).map(|k| f(self.coeffs[k], other.coeffs[k])).collect();
        Self { order, base: self.base, coeffs }
    }
}

impl Analytic for Jet2 {
    fn order(&self) -> usize {
        self.order
    }

    fn value(&self) -> Complex64 {
        self.coeffs[0]
    }

    fn constant_like(&self, c: Complex64) -> Self {
        Self::constant(c, self.base, self.order)
    }

    fn add_jet(&self, other: &Self) -> Self {
        self.zip(other, |a, b| a + b)
    }

    fn sub_jet(&self, other: &Self) -> Self {
        self.zip(other, |a, b| a - b)
    }

    fn mul_jet(&self, other: &Self) -> Self {
        assert_eq!(self.base, other.base, "jets expanded at different points");
        let order = self.order.min(other.order);
        let mut coeffs = vec![ZERO; len2(order)];
        for t1 in 0..=order {
            for j1 in 0..=t1 {
                let a = self.coeffs[idx2(t1 - j1, j1)];
                if a == ZERO {
                    continue;
                }
                for t2 in 0..=(order - t1) {
                    for j2 in 0..=t2 {
                        let i = t1 - j1 + t2 - j2;
                        coeffs[idx2(i, j1 + j2)] += a * other.coeffs[idx2(t2 - j2, j2)];
                    }
                }
            }
        }
        Self { order, base: self.base, coeffs }
    }

    fn scale(&self, c: Complex64) -> Self {
        Self { order: self.order, base: self.base, coeffs: self.coeffs.iter().map(|a| a * c).collect() }
    }

    fn with_value(&self, c: Complex64) -> Self {
        let mut out = self.clone();
        out.coeffs[0] = c;
        out
    }
}

/// Truncated Taylor expansion of a complex function of one real variable.
#[derive(Clone, Debug, PartialEq)]
pub struct Jet1 {
    base: f64,
    coeffs: Vec<Complex64>,
}

impl Jet1 {
    pub fn constant(c: impl Into<Complex64>, base: f64, order: usize) -> Self {
        let mut coeffs = vec![ZERO; order + 1];
        coeffs[0] = c.into();
        Self { base, coeffs }
    }

    pub fn var(base: f64, order: usize) -> Self {
        let mut j = Self::constant(base, base, order);
        if order >= 1 {
            j.coeffs[1] = ONE;
        }
        j
    }

    pub fn from_coeffs(base: f64, coeffs: Vec<Complex64>) -> Self {
        assert!(!coeffs.is_empty());
        Self { base, coeffs }
    }

    /// Builds a jet from derivative values `f, f', f'', ...`.
    pub fn from_derivatives(base: f64, derivs: &[f64]) -> Self {
        let coeffs = derivs.iter().enumerate().map(|(k, d)| Complex64::new(d / factorial(k), 0.0)).collect();
        Self { base, coeffs }
    }

    pub fn base(&self) -> f64 {
        self.base
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn coeff(&self, k: usize) -> Complex64 {
        self.coeffs.get(k).copied().unwrap_or(ZERO)
    }

    /// `k`-th derivative at the base point.
    pub fn derivative(&self, k: usize) -> Complex64 {
        self.coeff(k) * factorial(k)
    }

    pub fn set_coeff(&mut self, k: usize, c: Complex64) {
        self.coeffs[k] = c;
    }

    pub fn d(&self) -> Result<Self> {
        if self.coeffs.len() < 2 {
            return Err(Error::Singular("jet order exhausted by differentiation".into()));
        }
        let coeffs = (1..self.coeffs.len()).map(|k| self.coeffs[k] * k as f64).collect();
        Ok(Self { base: self.base, coeffs })
    }

    pub fn conj(&self) -> Self {
        Self { base: self.base, coeffs: self.coeffs.iter().map(|c| c.conj()).collect() }
    }

    /// Lifts `f(y)` to a two-variable jet at `(x, base)` that is constant in `x`.
    pub fn to_jet2(&self, x: f64) -> Jet2 {
        Jet2::from_fn([x, self.base], self.order(), |i, j| if i == 0 { self.coeff(j) } else { ZERO })
    }

    fn zip(&self, other: &Self, f: impl Fn(Complex64, Complex64) -> Complex64) -> Self {
        assert_eq!(self.base, other.base, "jets expanded at different points");
        let n = self.coeffs.len().min(other.coeffs.len());
        Self { base: self.base, coeffs: (0..n).map(|k| f(self.coeffs[k], other.coeffs[k])).collect() }
    }
}

impl Analytic for Jet1 {
    fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    fn value(&self) -> Complex64 {
        self.coeffs[0]
    }

    fn constant_like(&self, c: Complex64) -> Self {
        Self::constant(c, self.base, self.order())
    }

    fn add_jet(&self, other: &Self) -> Self {
        self.zip(other, |a, b| a + b)
    }

    fn sub_jet(&self, other: &Self) -> Self {
        self.zip(other, |a, b| a - b)
    }

    fn mul_jet(&self, other: &Self) -> Self {
        assert_eq!(self.base, other.base, "jets expanded at different points");
        let n = self.coeffs.len().min(other.coeffs.len());
        let mut coeffs = vec![ZERO; n];
        for (i, a) in self.coeffs.iter().take(n).enumerate() {
            for (j, b) in other.coeffs.iter().take(n - i).enumerate() {
                coeffs[i + j] += a * b;
            }
        }
        Self { base: self.base, coeffs }
    }

    fn scale(&self, c: Complex64) -> Self {
        Self { base: self.base, coeffs: self.coeffs.iter().map(|a| a * c).collect() }
    }

    fn with_value(&self, c: Complex64) -> Self {
        let mut out = self.clone();
        out.coeffs[0] = c;
        out
    }
}

macro_rules! impl_ops {
    ($t:ty) => {
        impl Add for $t {
            type Output = $t;
            fn add(self, rhs: $t) -> $t {
                self.add_jet(&rhs)
            }
        }
        impl<'a> Add<&'a $t> for &'a $t {
            type Output = $t;
            fn add(self, rhs: &$t) -> $t {
                self.add_jet(rhs)
            }
        }
        impl Sub for $t {
            type Output = $t;
            fn sub(self, rhs: $t) -> $t {
                self.sub_jet(&rhs)
            }
        }
        impl<'a> Sub<&'a $t> for &'a $t {
            type Output = $t;
            fn sub(self, rhs: &$t) -> $t {
                self.sub_jet(rhs)
            }
        }
        impl Mul for $t {
            type Output = $t;
            fn mul(self, rhs: $t) -> $t {
                self.mul_jet(&rhs)
            }
        }
        impl<'a> Mul<&'a $t> for &'a $t {
            type Output = $t;
            fn mul(self, rhs: &$t) -> $t {
                self.mul_jet(rhs)
            }
        }
        impl Mul<Complex64> for $t {
            type Output = $t;
            fn mul(self, rhs: Complex64) -> $t {
                self.scale(rhs)
            }
        }
        impl Mul<f64> for $t {
            type Output = $t;
            fn mul(self, rhs: f64) -> $t {
                self.scale(Complex64::new(rhs, 0.0))
            }
        }
        impl Neg for $t {
            type Output = $t;
            fn neg(self) -> $t {
                self.neg_jet()
            }
        }
    };
}

impl_ops!(Jet2);
impl_ops!(Jet1);
