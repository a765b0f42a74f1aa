//! Degree-2 forward-mode jets.
//!
//! A [`Jet2`] carries the value, gradient and Hessian of a scalar quantity
//! with respect to `arity` active variables (2 for the orbit chart, 4 for the
//! full adapted chart). Arithmetic propagates the exact product and chain
//! rules, so curvature built from jets of closed-form metric components is
//! accurate to rounding.

use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use thiserror::Error;

/// Largest supported number of active variables.
pub const MAX_ARITY: usize = 4;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum JetError {
    #[error("arity mismatch: {left} vs {right}")]
    ArityMismatch { left: usize, right: usize },
    #[error("domain error in {op}: argument {value}")]
    Domain { op: &'static str, value: f64 },
    #[error("unsupported arity {0} (expected 1..={MAX_ARITY})")]
    BadArity(usize),
}

/// Value, gradient and symmetric Hessian of a scalar at a point.
#[derive(Clone, Copy, PartialEq)]
pub struct Jet2 {
    arity: usize,
    value: f64,
    grad: [f64; MAX_ARITY],
    hess: [[f64; MAX_ARITY]; MAX_ARITY],
}

impl fmt::Debug for Jet2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let n = self.arity;
        let hess: Vec<&[f64]> = self.hess[..n].iter().map(|r| &r[..n]).collect();
        f.debug_struct("Jet2").field("value", &self.value).field("grad", &&self.grad[..n]).field("hess", &hess).finish()
    }
}

impl Jet2 {
    pub fn constant(arity: usize, value: f64) -> Self {
        debug_assert!((1..=MAX_ARITY).contains(&arity));
        Self { arity, value, grad: [0.0; MAX_ARITY], hess: [[0.0; MAX_ARITY]; MAX_ARITY] }
    }

    /// The coordinate function `x_index`, evaluated at `value`.
    pub fn variable(arity: usize, index: usize, value: f64) -> Self {
        assert!(index < arity, "variable index {index} out of range for arity {arity}");
        let mut j = Self::constant(arity, value);
        j.grad[index] = 1.0;
        j
    }

    /// Builds a jet from raw parts. The Hessian is symmetrised.
    pub fn from_parts(arity: usize, value: f64, grad: &[f64], hess: &[&[f64]]) -> Result<Self, JetError> {
        if !(1..=MAX_ARITY).contains(&arity) || grad.len() != arity || hess.len() != arity {
            return Err(JetError::BadArity(arity));
        }
        let mut j = Self::constant(arity, value);
        for i in 0..arity {
            j.grad[i] = grad[i];
            if hess[i].len() != arity {
                return Err(JetError::BadArity(arity));
            }
        }
        for i in 0..arity {
            for k in 0..arity {
                j.hess[i][k] = 0.5 * (hess[i][k] + hess[k][i]);
            }
        }
        Ok(j)
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn value(&self) -> f64 {
        self.value
    }

    pub fn grad(&self) -> &[f64] {
        &self.grad[..self.arity]
    }

    pub fn d(&self, i: usize) -> f64 {
        self.grad[i]
    }

    pub fn dd(&self, i: usize, k: usize) -> f64 {
        self.hess[i][k]
    }

    pub fn hessian(&self) -> Vec<Vec<f64>> {
        (0..self.arity).map(|i| self.hess[i][..self.arity].to_vec()).collect()
    }

    pub fn is_finite(&self) -> bool {
        let n = self.arity;
        self.value.is_finite()
            && self.grad[..n].iter().all(|v| v.is_finite())
            && self.hess[..n].iter().all(|r| r[..n].iter().all(|v| v.is_finite()))
    }

    /// Re-embeds this jet into `arity` variables; variable `i` of `self`
    /// becomes variable `slots[i]` of the result.
    pub fn embed(&self, arity: usize, slots: &[usize]) -> Result<Self, JetError> {
        if slots.len() != self.arity || !(1..=MAX_ARITY).contains(&arity) || slots.iter().any(|&s| s >= arity) {
            return Err(JetError::BadArity(arity));
        }
        let mut out = Self::constant(arity, self.value);
        for (i, &si) in slots.iter().enumerate() {
            out.grad[si] = self.grad[i];
            for (k, &sk) in slots.iter().enumerate() {
                out.hess[si][sk] = self.hess[i][k];
            }
        }
        Ok(out)
    }

    /// Jet of `outer(inner_0, .., inner_{m-1})` where `self` is the jet of
    /// `outer` with respect to its `m` arguments and `inner` holds the jets of
    /// the arguments.
    pub fn compose(&self, inner: &[Jet2]) -> Result<Self, JetError> {
        if inner.len() != self.arity {
            return Err(JetError::ArityMismatch { left: self.arity, right: inner.len() });
        }
        let n = inner[0].arity;
        for j in inner {
            check_arity(n, j.arity)?;
        }
        let mut out = Self::constant(n, self.value);
        for a in 0..n {
            out.grad[a] = (0..self.arity).map(|i| self.grad[i] * inner[i].grad[a]).sum();
        }
        for a in 0..n {
            for b in 0..n {
                let mut s = 0.0;
                for i in 0..self.arity {
                    s += self.grad[i] * inner[i].hess[a][b];
                    for k in 0..self.arity {
                        s += self.hess[i][k] * inner[i].grad[a] * inner[k].grad[b];
                    }
                }
                out.hess[a][b] = s;
            }
        }
        out.symmetrize();
        Ok(out)
    }

    fn symmetrize(&mut self) {
        for i in 0..self.arity {
            for k in (i + 1)..self.arity {
                let m = 0.5 * (self.hess[i][k] + self.hess[k][i]);
                self.hess[i][k] = m;
                self.hess[k][i] = m;
            }
        }
    }

    /// Applies a scalar function given its value and first two derivatives at
    /// `self.value`.
    fn chain(&self, f0: f64, f1: f64, f2: f64) -> Self {
        let n = self.arity;
        let mut out = Self::constant(n, f0);
        for i in 0..n {
            out.grad[i] = f1 * self.grad[i];
            for k in 0..n {
                out.hess[i][k] = f1 * self.hess[i][k] + f2 * self.grad[i] * self.grad[k];
            }
        }
        out
    }

    pub fn checked_add(&self, rhs: &Self) -> Result<Self, JetError> {
        check_arity(self.arity, rhs.arity)?;
        Ok(self.zip(rhs, |a, b| a + b))
    }

    pub fn checked_sub(&self, rhs: &Self) -> Result<Self, JetError> {
        check_arity(self.arity, rhs.arity)?;
        Ok(self.zip(rhs, |a, b| a - b))
    }

    pub fn checked_mul(&self, rhs: &Self) -> Result<Self, JetError> {
        check_arity(self.arity, rhs.arity)?;
        let n = self.arity;
        let (a, b) = (self, rhs);
        let mut out = Self::constant(n, a.value * b.value);
        for i in 0..n {
            out.grad[i] = a.value * b.grad[i] + b.value * a.grad[i];
            for k in 0..n {
                out.hess[i][k] =
                    a.value * b.hess[i][k] + b.value * a.hess[i][k] + a.grad[i] * b.grad[k] + b.grad[i] * a.grad[k];
            }
        }
        Ok(out)
    }

    pub fn checked_div(&self, rhs: &Self) -> Result<Self, JetError> {
        check_arity(self.arity, rhs.arity)?;
        self.checked_mul(&rhs.recip()?)
    }

    pub fn recip(&self) -> Result<Self, JetError> {
        let x = self.value;
        if x == 0.0 || !x.is_finite() {
            return Err(JetError::Domain { op: "recip", value: x });
        }
        let r = 1.0 / x;
        Ok(self.chain(r, -r * r, 2.0 * r * r * r))
    }

    pub fn exp(&self) -> Self {
        let e = self.value.exp();
        self.chain(e, e, e)
    }

    pub fn ln(&self) -> Result<Self, JetError> {
        let x = self.value;
        if x <= 0.0 {
            return Err(JetError::Domain { op: "ln", value: x });
        }
        Ok(self.chain(x.ln(), 1.0 / x, -1.0 / (x * x)))
    }

    pub fn sqrt(&self) -> Result<Self, JetError> {
        let x = self.value;
        if x <= 0.0 {
            return Err(JetError::Domain { op: "sqrt", value: x });
        }
        let s = x.sqrt();
        Ok(self.chain(s, 0.5 / s, -0.25 / (x * s)))
    }

    /// Real power. Non-integer exponents need a positive base.
    pub fn powf(&self, r: f64) -> Result<Self, JetError> {
        if r.fract() == 0.0 && r.abs() < i32::MAX as f64 {
            return self.powi(r as i32);
        }
        let x = self.value;
        if x <= 0.0 {
            return Err(JetError::Domain { op: "powf", value: x });
        }
        let p = x.powf(r);
        Ok(self.chain(p, r * p / x, r * (r - 1.0) * p / (x * x)))
    }

    pub fn powi(&self, n: i32) -> Result<Self, JetError> {
        let x = self.value;
        if n < 0 && x == 0.0 {
            return Err(JetError::Domain { op: "powi", value: x });
        }
        let nf = n as f64;
        let f0 = x.powi(n);
        let f1 = if n == 0 { 0.0 } else { nf * x.powi(n - 1) };
        let f2 = if n == 0 || n == 1 { 0.0 } else { nf * (nf - 1.0) * x.powi(n - 2) };
        Ok(self.chain(f0, f1, f2))
    }

    pub fn scale(&self, s: f64) -> Self {
        self.map(|v| v * s)
    }

    fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        let mut out = *self;
        out.value = f(self.value);
        for i in 0..self.arity {
            out.grad[i] = f(self.grad[i]);
            for k in 0..self.arity {
                out.hess[i][k] = f(self.hess[i][k]);
            }
        }
        out
    }

    fn zip(&self, rhs: &Self, f: impl Fn(f64, f64) -> f64) -> Self {
        let mut out = *self;
        out.value = f(self.value, rhs.value);
        for i in 0..self.arity {
            out.grad[i] = f(self.grad[i], rhs.grad[i]);
            for k in 0..self.arity {
                out.hess[i][k] = f(self.hess[i][k], rhs.hess[i][k]);
            }
        }
        out
    }
}

fn check_arity(left: usize, right: usize) -> Result<(), JetError> {
    if left == right {
        Ok(())
    } else {
        Err(JetError::ArityMismatch { left, right })
    }
}

// Operator sugar for code paths whose arities are fixed by construction.
// These panic on arity mismatch; use the `checked_*` methods otherwise.

impl Add for Jet2 {
    type Output = Jet2;
    fn add(self, rhs: Jet2) -> Jet2 {
        self.checked_add(&rhs).expect("jet arity mismatch")
    }
}

impl Sub for Jet2 {
    type Output = Jet2;
    fn sub(self, rhs: Jet2) -> Jet2 {
        self.checked_sub(&rhs).expect("jet arity mismatch")
    }
}

impl Mul for Jet2 {
    type Output = Jet2;
    fn mul(self, rhs: Jet2) -> Jet2 {
        self.checked_mul(&rhs).expect("jet arity mismatch")
    }
}

impl Div for Jet2 {
    type Output = Jet2;
    fn div(self, rhs: Jet2) -> Jet2 {
        self.checked_div(&rhs).expect("jet division failed")
    }
}

impl Neg for Jet2 {
    type Output = Jet2;
    fn neg(self) -> Jet2 {
        self.scale(-1.0)
    }
}

impl Mul<f64> for Jet2 {
    type Output = Jet2;
    fn mul(self, rhs: f64) -> Jet2 {
        self.scale(rhs)
    }
}

impl Add<f64> for Jet2 {
    type Output = Jet2;
    fn add(mut self, rhs: f64) -> Jet2 {
        self.value += rhs;
        self
    }
}
