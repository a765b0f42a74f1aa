//! Curvature and soliton machinery on adapted charts.

mod assumptions;
pub mod curvature;
mod metric;
mod soliton;
mod submersion;

pub use assumptions::{validate_assumptions, AssumptionReport, AssumptionTolerances};
pub use curvature::{christoffel, ricci, scalar_curvature, Connection};
pub use metric::{AdaptedMetric, MetricJets, SymBlock};
pub use soliton::{
    for_each_node, lie_derivative_metric, residual_scan, soliton_residual, Exclusion, ResidualReport, SolitonInstance,
    SolitonVectorField,
};
pub use submersion::{c_norm_squared, curvature_vector, gauss_curvature_2d, geroch_decompose, GerochData};

use serde::Serialize;
use thiserror::Error;

use crate::fields::FieldError;
use crate::jets::JetError;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    Jet(#[from] JetError),
    #[error("degenerate metric: det {det:e} at component scale {scale:e}")]
    Degenerate { det: f64, scale: f64 },
    #[error("jet arity {got}, expected {expected}")]
    Arity { expected: usize, got: usize },
    #[error("singular Killing block: det(h) vanishes identically")]
    SingularKillingBlock,
    #[error("no unmasked points to evaluate")]
    EmptyScan,
}

impl GeometryError {
    /// Point-level failures that mark the point as excluded rather than
    /// aborting a scan.
    pub fn is_exclusion(&self) -> bool {
        match self {
            GeometryError::Field(FieldError::Jet(JetError::Domain { .. })) => true,
            GeometryError::Field(FieldError::NonInvertible { .. }) => true,
            GeometryError::Field(e) => e.is_domain_exclusion(),
            GeometryError::Jet(JetError::Domain { .. }) => true,
            GeometryError::Degenerate { .. } => true,
            _ => false,
        }
    }
}

/// A named check with its measured value and the threshold it was held to.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClaimResult {
    pub name: String,
    pub measured: f64,
    pub expected: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl ClaimResult {
    /// Passes when `|measured - expected| <= tolerance`.
    pub fn within(name: impl Into<String>, measured: f64, expected: f64, tolerance: f64) -> Self {
        let pass = (measured - expected).abs() <= tolerance;
        Self { name: name.into(), measured, expected, tolerance, pass }
    }

    /// Passes when `measured > threshold`.
    pub fn above(name: impl Into<String>, measured: f64, threshold: f64) -> Self {
        Self { name: name.into(), measured, expected: threshold, tolerance: 0.0, pass: measured > threshold }
    }
}
