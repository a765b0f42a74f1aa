//! Scalar fields on adapted charts.
//!
//! A [`ScalarField`] is an immutable expression tree over jet primitives.
//! Leaves are constants, coordinate functions, grid samples
//! ([`GridField`]) or opaque [`Primitive`]s such as quadrature-backed
//! antiderivatives and ODE solutions. Evaluation returns a [`Jet2`] whose
//! arity equals the field's arity.

mod grid;
mod quadrature;
mod transform;

pub use grid::{Grid2, GridField, GRID_HEADER};
pub use quadrature::AntiderivativeT2;
pub use transform::{pullback_metric, AdaptedTransform};

use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::sync::Arc;

use thiserror::Error;

use crate::jets::{Jet2, JetError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FieldError {
    #[error(transparent)]
    Jet(#[from] JetError),
    #[error("point has {got} coordinates, field arity is {expected}")]
    PointArity { expected: usize, got: usize },
    #[error("point ({t1}, {t2}) outside the grid stencil interior")]
    OutOfDomain { t1: f64, t2: f64 },
    #[error("point ({t1}, {t2}) lies in a masked cell")]
    Masked { t1: f64, t2: f64 },
    #[error("point ({t1}, {t2}) is not a grid node")]
    OffNode { t1: f64, t2: f64 },
    #[error("field contains a {0} leaf and cannot be differentiated symbolically")]
    NotSymbolic(&'static str),
    #[error("non-invertible transform at ({t1}, {t2}): jacobian {det}")]
    NonInvertible { t1: f64, t2: f64, det: f64 },
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("grid file: {0}")]
    Io(String),
    #[error("{0}")]
    Other(String),
}

impl FieldError {
    /// Errors that mean "this point is not part of the working domain".
    pub fn is_domain_exclusion(&self) -> bool {
        matches!(self, FieldError::OutOfDomain { .. } | FieldError::Masked { .. })
    }
}

/// Opaque leaf evaluated directly to a jet.
pub trait Primitive: fmt::Debug + Send + Sync {
    fn arity(&self) -> usize;
    fn eval(&self, p: &[f64]) -> Result<Jet2, FieldError>;
    fn name(&self) -> &'static str {
        "primitive"
    }
}

#[derive(Debug)]
enum Node {
    Const(f64),
    Var(usize),
    Add(ScalarField, ScalarField),
    Sub(ScalarField, ScalarField),
    Mul(ScalarField, ScalarField),
    Div(ScalarField, ScalarField),
    Neg(ScalarField),
    Exp(ScalarField),
    Ln(ScalarField),
    Sqrt(ScalarField),
    Powf(ScalarField, f64),
    Powi(ScalarField, i32),
    Compose { outer: ScalarField, inner: Vec<ScalarField> },
    Grid(Arc<GridField>),
    Primitive(Arc<dyn Primitive>),
}

#[derive(Clone)]
pub struct ScalarField {
    arity: usize,
    node: Arc<Node>,
}

impl fmt::Debug for ScalarField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ScalarField<{}>({:?})", self.arity, self.node)
    }
}

impl ScalarField {
    fn new(arity: usize, node: Node) -> Self {
        Self { arity, node: Arc::new(node) }
    }

    pub fn constant(arity: usize, value: f64) -> Self {
        Self::new(arity, Node::Const(value))
    }

    pub fn zero(arity: usize) -> Self {
        Self::constant(arity, 0.0)
    }

    /// The coordinate function of variable `index`.
    pub fn var(arity: usize, index: usize) -> Self {
        assert!(index < arity);
        Self::new(arity, Node::Var(index))
    }

    /// `(t1, t2)` coordinate functions of the 2D orbit chart.
    pub fn t1() -> Self {
        Self::var(2, 0)
    }

    pub fn t2() -> Self {
        Self::var(2, 1)
    }

    pub fn from_grid(field: GridField) -> Self {
        Self::new(2, Node::Grid(Arc::new(field)))
    }

    pub fn from_primitive(p: Arc<dyn Primitive>) -> Self {
        Self::new(p.arity(), Node::Primitive(p))
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    /// Constant value if the field is a literal constant.
    pub fn as_constant(&self) -> Option<f64> {
        match *self.node {
            Node::Const(v) => Some(v),
            _ => None,
        }
    }

    /// The grid field if this is a bare grid leaf.
    pub fn as_grid(&self) -> Option<&GridField> {
        match &*self.node {
            Node::Grid(g) => Some(g),
            _ => None,
        }
    }

    /// True when no grid or primitive leaf occurs in the tree.
    pub fn is_symbolic(&self) -> bool {
        match &*self.node {
            Node::Const(_) | Node::Var(_) => true,
            Node::Add(a, b) | Node::Sub(a, b) | Node::Mul(a, b) | Node::Div(a, b) => a.is_symbolic() && b.is_symbolic(),
            Node::Neg(a) | Node::Exp(a) | Node::Ln(a) | Node::Sqrt(a) | Node::Powf(a, _) | Node::Powi(a, _) => {
                a.is_symbolic()
            }
            Node::Compose { outer, inner } => outer.is_symbolic() && inner.iter().all(|f| f.is_symbolic()),
            Node::Grid(_) | Node::Primitive(_) => false,
        }
    }

    pub fn exp(&self) -> Self {
        match *self.node {
            Node::Const(v) => Self::constant(self.arity, v.exp()),
            _ => Self::new(self.arity, Node::Exp(self.clone())),
        }
    }

    pub fn ln(&self) -> Self {
        Self::new(self.arity, Node::Ln(self.clone()))
    }

    pub fn sqrt(&self) -> Self {
        Self::new(self.arity, Node::Sqrt(self.clone()))
    }

    pub fn powf(&self, r: f64) -> Self {
        if r == 1.0 {
            return self.clone();
        }
        if r == 0.0 {
            return Self::constant(self.arity, 1.0);
        }
        if r.fract() == 0.0 && r.abs() < 64.0 {
            return self.powi(r as i32);
        }
        Self::new(self.arity, Node::Powf(self.clone(), r))
    }

    pub fn powi(&self, n: i32) -> Self {
        match n {
            0 => Self::constant(self.arity, 1.0),
            1 => self.clone(),
            _ => Self::new(self.arity, Node::Powi(self.clone(), n)),
        }
    }

    pub fn recip(&self) -> Self {
        Self::constant(self.arity, 1.0) / self
    }

    /// `self(inner_0, .., inner_{m-1})`; `inner.len()` must equal `self.arity()`.
    pub fn compose(&self, inner: &[ScalarField]) -> Self {
        assert_eq!(inner.len(), self.arity, "compose: wrong number of inner fields");
        let arity = inner[0].arity;
        assert!(inner.iter().all(|f| f.arity == arity), "compose: inner arity mismatch");
        match *self.node {
            Node::Const(v) => Self::constant(arity, v),
            Node::Var(i) => inner[i].clone(),
            _ => Self::new(arity, Node::Compose { outer: self.clone(), inner: inner.to_vec() }),
        }
    }

    pub fn eval_jet(&self, p: &[f64]) -> Result<Jet2, FieldError> {
        if p.len() != self.arity {
            return Err(FieldError::PointArity { expected: self.arity, got: p.len() });
        }
        self.eval_inner(p)
    }

    pub fn eval(&self, p: &[f64]) -> Result<f64, FieldError> {
        self.eval_jet(p).map(|j| j.value())
    }

    fn eval_inner(&self, p: &[f64]) -> Result<Jet2, FieldError> {
        let n = self.arity;
        Ok(match &*self.node {
            Node::Const(v) => Jet2::constant(n, *v),
            Node::Var(i) => Jet2::variable(n, *i, p[*i]),
            Node::Add(a, b) => a.eval_inner(p)?.checked_add(&b.eval_inner(p)?)?,
            Node::Sub(a, b) => a.eval_inner(p)?.checked_sub(&b.eval_inner(p)?)?,
            Node::Mul(a, b) => a.eval_inner(p)?.checked_mul(&b.eval_inner(p)?)?,
            Node::Div(a, b) => a.eval_inner(p)?.checked_div(&b.eval_inner(p)?)?,
            Node::Neg(a) => -a.eval_inner(p)?,
            Node::Exp(a) => a.eval_inner(p)?.exp(),
            Node::Ln(a) => a.eval_inner(p)?.ln()?,
            Node::Sqrt(a) => a.eval_inner(p)?.sqrt()?,
            Node::Powf(a, r) => a.eval_inner(p)?.powf(*r)?,
            Node::Powi(a, k) => a.eval_inner(p)?.powi(*k)?,
            Node::Compose { outer, inner } => {
                let jets = inner.iter().map(|f| f.eval_inner(p)).collect::<Result<Vec<_>, _>>()?;
                let at: Vec<f64> = jets.iter().map(|j| j.value()).collect();
                outer.eval_jet(&at)?.compose(&jets)?
            }
            Node::Grid(g) => g.eval_jet(p)?,
            Node::Primitive(prim) => prim.eval(p)?,
        })
    }

    /// Symbolic partial derivative with respect to variable `index`.
    pub fn derivative(&self, index: usize) -> Result<ScalarField, FieldError> {
        let n = self.arity;
        let zero = || ScalarField::zero(n);
        Ok(match &*self.node {
            Node::Const(_) => zero(),
            Node::Var(i) => ScalarField::constant(n, if *i == index { 1.0 } else { 0.0 }),
            Node::Add(a, b) => &a.derivative(index)? + &b.derivative(index)?,
            Node::Sub(a, b) => &a.derivative(index)? - &b.derivative(index)?,
            Node::Mul(a, b) => &(&a.derivative(index)? * b) + &(a * &b.derivative(index)?),
            Node::Div(a, b) => {
                let num = &(&a.derivative(index)? * b) - &(a * &b.derivative(index)?);
                &num / &b.powi(2)
            }
            Node::Neg(a) => -&a.derivative(index)?,
            Node::Exp(a) => &a.derivative(index)? * self,
            Node::Ln(a) => &a.derivative(index)? / a,
            Node::Sqrt(a) => &(&a.derivative(index)? * 0.5) / self,
            Node::Powf(a, r) => &(&a.derivative(index)? * *r) * &a.powf(r - 1.0),
            Node::Powi(a, k) => &(&a.derivative(index)? * (*k as f64)) * &a.powi(k - 1),
            Node::Compose { outer, inner } => {
                let mut acc = zero();
                for (i, g) in inner.iter().enumerate() {
                    let dg = g.derivative(index)?;
                    if dg.as_constant() == Some(0.0) {
                        continue;
                    }
                    let douter = outer.derivative(i)?.compose(inner);
                    acc = &acc + &(&douter * &dg);
                }
                acc
            }
            Node::Grid(_) => return Err(FieldError::NotSymbolic("grid")),
            Node::Primitive(p) => return Err(FieldError::NotSymbolic(p.name())),
        })
    }
}

fn binary(a: &ScalarField, b: &ScalarField, make: fn(ScalarField, ScalarField) -> Node) -> ScalarField {
    assert_eq!(a.arity, b.arity, "field arity mismatch");
    ScalarField::new(a.arity, make(a.clone(), b.clone()))
}

impl Add for &ScalarField {
    type Output = ScalarField;
    fn add(self, rhs: &ScalarField) -> ScalarField {
        match (self.as_constant(), rhs.as_constant()) {
            (Some(a), Some(b)) => ScalarField::constant(self.arity, a + b),
            (Some(a), None) if a == 0.0 => rhs.clone(),
            (None, Some(b)) if b == 0.0 => self.clone(),
            _ => binary(self, rhs, Node::Add),
        }
    }
}

impl Sub for &ScalarField {
    type Output = ScalarField;
    fn sub(self, rhs: &ScalarField) -> ScalarField {
        match (self.as_constant(), rhs.as_constant()) {
            (Some(a), Some(b)) => ScalarField::constant(self.arity, a - b),
            (Some(a), None) if a == 0.0 => -rhs,
            (None, Some(b)) if b == 0.0 => self.clone(),
            _ => binary(self, rhs, Node::Sub),
        }
    }
}

impl Mul for &ScalarField {
    type Output = ScalarField;
    fn mul(self, rhs: &ScalarField) -> ScalarField {
        match (self.as_constant(), rhs.as_constant()) {
            (Some(a), Some(b)) => ScalarField::constant(self.arity, a * b),
            (Some(a), _) | (_, Some(a)) if a == 0.0 => ScalarField::zero(self.arity),
            (Some(a), None) if a == 1.0 => rhs.clone(),
            (None, Some(b)) if b == 1.0 => self.clone(),
            _ => binary(self, rhs, Node::Mul),
        }
    }
}

impl Div for &ScalarField {
    type Output = ScalarField;
    fn div(self, rhs: &ScalarField) -> ScalarField {
        match (self.as_constant(), rhs.as_constant()) {
            (Some(a), Some(b)) if b != 0.0 => ScalarField::constant(self.arity, a / b),
            (Some(a), _) if a == 0.0 => ScalarField::zero(self.arity),
            (None, Some(b)) if b == 1.0 => self.clone(),
            _ => binary(self, rhs, Node::Div),
        }
    }
}

impl Neg for &ScalarField {
    type Output = ScalarField;
    fn neg(self) -> ScalarField {
        match self.as_constant() {
            Some(v) => ScalarField::constant(self.arity, -v),
            None => ScalarField::new(self.arity, Node::Neg(self.clone())),
        }
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl $tr for ScalarField {
            type Output = ScalarField;
            fn $m(self, rhs: ScalarField) -> ScalarField {
                (&self).$m(&rhs)
            }
        }
        impl $tr<&ScalarField> for ScalarField {
            type Output = ScalarField;
            fn $m(self, rhs: &ScalarField) -> ScalarField {
                (&self).$m(rhs)
            }
        }
        impl $tr<ScalarField> for &ScalarField {
            type Output = ScalarField;
            fn $m(self, rhs: ScalarField) -> ScalarField {
                self.$m(&rhs)
            }
        }
        impl $tr<f64> for &ScalarField {
            type Output = ScalarField;
            fn $m(self, rhs: f64) -> ScalarField {
                self.$m(&ScalarField::constant(self.arity, rhs))
            }
        }
        impl $tr<f64> for ScalarField {
            type Output = ScalarField;
            fn $m(self, rhs: f64) -> ScalarField {
                (&self).$m(&ScalarField::constant(self.arity, rhs))
            }
        }
        impl $tr<&ScalarField> for f64 {
            type Output = ScalarField;
            fn $m(self, rhs: &ScalarField) -> ScalarField {
                ScalarField::constant(rhs.arity, self).$m(rhs)
            }
        }
        impl $tr<ScalarField> for f64 {
            type Output = ScalarField;
            fn $m(self, rhs: ScalarField) -> ScalarField {
                ScalarField::constant(rhs.arity, self).$m(&rhs)
            }
        }
    };
}

forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);
forward_owned!(Div, div);

impl Neg for ScalarField {
    type Output = ScalarField;
    fn neg(self) -> ScalarField {
        -&self
    }
}
