//! Grid solvers for the constraint equations that parametrize each family.
//!
//! Linear problems `a11 u_11 + a22 u_22 + b1 u_1 + c0 u = f` use the
//! standard second-order five-point discretisation. Elliptic problems are
//! relaxed with SOR against Dirichlet data; hyperbolic ones are marched in
//! `t2` with an explicit leapfrog scheme from Cauchy data on the first row.

mod liouville;
mod ode;

pub use liouville::solve_liouville;
pub use ode::{solve_r_ode, RSolution};

use std::fmt;
use std::path::Path;
use std::sync::Arc;

use serde::Serialize;
use thiserror::Error;

use crate::fields::{FieldError, Grid2, GridField, ScalarField};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PdeError {
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error("no convergence after {iterations} iterations (residual {residual:e})")]
    NonConvergence { iterations: usize, residual: f64 },
    #[error("instability at t2 step {step}: solution norm {norm:e}")]
    Instability { step: usize, norm: f64 },
    #[error("operator changes type on the grid (a11*a22 takes both signs or vanishes)")]
    MixedClassification,
    #[error("step ratio violates the stability bound: max |a11/a22| (h2/h1)^2 = {ratio}")]
    Cfl { ratio: f64 },
    #[error("ODE integration stopped at t1 = {t}: {reason}")]
    OdeBreakdown { t: f64, reason: &'static str },
    #[error("{0}")]
    InvalidProblem(String),
}

pub type DataFn = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;

/// Boundary or initial data. Hyperbolic problems take the value on the first
/// `t2` row and on the two `t1` sides, and the `t2`-derivative on the first
/// row.
#[derive(Clone)]
pub enum BoundaryData {
    Dirichlet(DataFn),
    Cauchy { value: DataFn, t2_derivative: DataFn },
}

impl fmt::Debug for BoundaryData {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BoundaryData::Dirichlet(_) => f.write_str("Dirichlet"),
            BoundaryData::Cauchy { .. } => f.write_str("Cauchy"),
        }
    }
}

impl BoundaryData {
    pub fn dirichlet(f: impl Fn(f64, f64) -> f64 + Send + Sync + 'static) -> Self {
        BoundaryData::Dirichlet(Arc::new(f))
    }

    /// Cauchy data read off a field: its value and its `t2`-derivative.
    pub fn cauchy_from(field: ScalarField) -> Self {
        let v = field.clone();
        BoundaryData::Cauchy {
            value: Arc::new(move |a, b| v.eval(&[a, b]).unwrap_or(f64::NAN)),
            t2_derivative: Arc::new(move |a, b| field.eval_jet(&[a, b]).map(|j| j.d(1)).unwrap_or(f64::NAN)),
        }
    }

    /// Dirichlet data read off a field.
    pub fn dirichlet_from(field: ScalarField) -> Self {
        BoundaryData::Dirichlet(Arc::new(move |a, b| field.eval(&[a, b]).unwrap_or(f64::NAN)))
    }
}

/// `L[u] = a11 u_11 + a22 u_22 + b1 u_1 + c0 u`, coefficients of arity 2.
#[derive(Debug, Clone)]
pub struct LinearOperator {
    pub a11: ScalarField,
    pub a22: ScalarField,
    pub b1: ScalarField,
    pub c0: ScalarField,
}

impl LinearOperator {
    pub fn new(a11: ScalarField, a22: ScalarField, b1: ScalarField, c0: ScalarField) -> Self {
        Self { a11, a22, b1, c0 }
    }

    /// `L[u]` at `p` from the jet of `u`.
    pub fn apply(&self, u: &ScalarField, p: [f64; 2]) -> Result<f64, FieldError> {
        let j = u.eval_jet(&p)?;
        Ok(self.a11.eval(&p)? * j.dd(0, 0)
            + self.a22.eval(&p)? * j.dd(1, 1)
            + self.b1.eval(&p)? * j.d(0)
            + self.c0.eval(&p)? * j.value())
    }

    /// `L[u]` as a closed-form field, for manufactured sources.
    pub fn apply_field(&self, u: &ScalarField) -> Result<ScalarField, FieldError> {
        let (u1, u2) = (u.derivative(0)?, u.derivative(1)?);
        Ok(&(&(&self.a11 * &u1.derivative(0)?) + &(&self.a22 * &u2.derivative(1)?))
            + &(&(&self.b1 * &u1) + &(&self.c0 * u)))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SolverOptions {
    pub tol: f64,
    pub max_iter: usize,
    /// SOR relaxation; `None` picks the Laplacian optimum for the grid.
    pub omega: Option<f64>,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self { tol: 1e-10, max_iter: 200_000, omega: None }
    }
}

#[derive(Debug, Clone)]
pub struct LinearPDEProblem {
    pub op: LinearOperator,
    pub source: ScalarField,
    pub grid: Grid2,
    pub data: BoundaryData,
    pub options: SolverOptions,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum SolveKind {
    Elliptic,
    Hyperbolic,
}

#[derive(Debug, Clone)]
pub struct GridSolution {
    pub grid: Grid2,
    pub values: Vec<f64>,
    /// Discrete L∞ residual, recomputed from stencil jets of the returned
    /// values at nodes at least two cells from the boundary.
    pub residual: f64,
    pub iterations: usize,
    pub kind: SolveKind,
}

impl GridSolution {
    pub fn grid_field(&self) -> GridField {
        GridField::new(self.grid.clone(), self.values.clone()).expect("solution matches its grid")
    }

    pub fn field(&self) -> ScalarField {
        ScalarField::from_grid(self.grid_field())
    }

    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.values[self.grid.index(i, j)]
    }

    /// Max |u − exact| over unmasked nodes.
    pub fn max_error(&self, exact: impl Fn(f64, f64) -> f64) -> f64 {
        self.grid
            .nodes()
            .filter(|&(i, j)| !self.grid.is_masked(i, j))
            .map(|(i, j)| {
                let [a, b] = self.grid.node(i, j);
                (self.at(i, j) - exact(a, b)).abs()
            })
            .fold(0.0, f64::max)
    }

    /// Writes the solution in the grid text layout.
    pub fn write(&self, path: &Path) -> Result<(), FieldError> {
        self.grid_field().write(path)
    }
}

pub(crate) struct Coeffs {
    pub a11: Vec<f64>,
    pub a22: Vec<f64>,
    pub b1: Vec<f64>,
    pub c0: Vec<f64>,
}

impl Coeffs {
    pub fn sample(op: &LinearOperator, grid: &Grid2) -> Result<Self, PdeError> {
        Ok(Self {
            a11: sample_field(&op.a11, grid)?,
            a22: sample_field(&op.a22, grid)?,
            b1: sample_field(&op.b1, grid)?,
            c0: sample_field(&op.c0, grid)?,
        })
    }
}

pub(crate) fn sample_field(f: &ScalarField, grid: &Grid2) -> Result<Vec<f64>, PdeError> {
    let mut v = vec![0.0; grid.len()];
    for (i, j) in grid.nodes() {
        v[grid.index(i, j)] = f.eval(&grid.node(i, j))?;
    }
    Ok(v)
}

fn classify(c: &Coeffs, grid: &Grid2) -> Result<SolveKind, PdeError> {
    let (mut pos, mut neg) = (false, false);
    for (i, j) in grid.interior(1) {
        if grid.is_masked(i, j) {
            continue;
        }
        let k = grid.index(i, j);
        let s = c.a11[k] * c.a22[k];
        if s > 0.0 {
            pos = true;
        } else if s < 0.0 {
            neg = true;
        } else {
            return Err(PdeError::MixedClassification);
        }
    }
    match (pos, neg) {
        (true, false) => Ok(SolveKind::Elliptic),
        (false, true) => Ok(SolveKind::Hyperbolic),
        _ => Err(PdeError::MixedClassification),
    }
}

/// Discrete residual `L_h[u] − f` at node `k`.
pub(crate) fn node_residual(grid: &Grid2, c: &Coeffs, u: &[f64], f: f64, i: usize, j: usize) -> f64 {
    let k = grid.index(i, j);
    let (h1, h2) = (grid.h1, grid.h2);
    let (e, w, n, s) =
        (u[grid.index(i + 1, j)], u[grid.index(i - 1, j)], u[grid.index(i, j + 1)], u[grid.index(i, j - 1)]);
    c.a11[k] * (e - 2.0 * u[k] + w) / (h1 * h1)
        + c.a22[k] * (n - 2.0 * u[k] + s) / (h2 * h2)
        + c.b1[k] * (e - w) / (2.0 * h1)
        + c.c0[k] * u[k]
        - f
}

pub(crate) fn default_omega(grid: &Grid2) -> f64 {
    let n = grid.n1.max(grid.n2) as f64;
    2.0 / (1.0 + (std::f64::consts::PI / (n - 1.0)).sin())
}

/// SOR sweeps on the unfixed nodes until the discrete residual is below
/// `tol`. Returns the number of sweeps.
pub(crate) fn sor(
    grid: &Grid2,
    c: &Coeffs,
    f: &[f64],
    u: &mut [f64],
    fixed: &[bool],
    tol: f64,
    max_iter: usize,
    omega: f64,
) -> Result<usize, PdeError> {
    let (h1, h2) = (grid.h1, grid.h2);
    let max_res = |u: &[f64]| {
        grid.interior(1)
            .filter(|&(i, j)| !fixed[grid.index(i, j)])
            .map(|(i, j)| node_residual(grid, c, u, f[grid.index(i, j)], i, j).abs())
            .fold(0.0, f64::max)
    };
    let mut res = max_res(u);
    let mut it = 0;
    while res > tol {
        if it >= max_iter || !res.is_finite() {
            return Err(PdeError::NonConvergence { iterations: it, residual: res });
        }
        for j in 1..grid.n2 - 1 {
            for i in 1..grid.n1 - 1 {
                let k = grid.index(i, j);
                if fixed[k] {
                    continue;
                }
                let diag = -2.0 * c.a11[k] / (h1 * h1) - 2.0 * c.a22[k] / (h2 * h2) + c.c0[k];
                let r = node_residual(grid, c, u, f[k], i, j);
                u[k] -= omega * r / diag;
            }
        }
        it += 1;
        if it % 8 == 0 || it >= max_iter {
            res = max_res(u);
        }
    }
    Ok(it)
}

/// Leapfrog march in `t2`: `a22 δ²_2 u = g(u) − a11 δ²_1 u − b1 δ_1 u`, where
/// `g(i, j, u)` supplies the source (and any zeroth-order term).
pub(crate) fn march(
    grid: &Grid2,
    a11: &[f64],
    a22: &[f64],
    b1: &[f64],
    g: &dyn Fn(usize, f64) -> f64,
    value: &DataFn,
    t2_derivative: &DataFn,
) -> Result<Vec<f64>, PdeError> {
    let (h1, h2) = (grid.h1, grid.h2);
    let mut ratio = 0.0f64;
    for (i, j) in grid.nodes() {
        let k = grid.index(i, j);
        ratio = ratio.max((a11[k] / a22[k]).abs() * (h2 / h1).powi(2));
    }
    if !(ratio <= 1.0) {
        return Err(PdeError::Cfl { ratio });
    }
    let mut u = vec![0.0; grid.len()];
    let accel = |u: &[f64], i: usize, j: usize| {
        let k = grid.index(i, j);
        let (e, w) = (u[grid.index(i + 1, j)], u[grid.index(i - 1, j)]);
        let spatial = a11[k] * (e - 2.0 * u[k] + w) / (h1 * h1) + b1[k] * (e - w) / (2.0 * h1);
        (g(k, u[k]) - spatial) / a22[k]
    };
    for i in 0..grid.n1 {
        let [a, b] = grid.node(i, 0);
        u[grid.index(i, 0)] = value(a, b);
    }
    let scale = u.iter().fold(1.0f64, |m, v| m.max(v.abs()));
    for j in 0..grid.n2 - 1 {
        for side in [0, grid.n1 - 1] {
            let [a, b] = grid.node(side, j + 1);
            u[grid.index(side, j + 1)] = value(a, b);
        }
        for i in 1..grid.n1 - 1 {
            let k = grid.index(i, j);
            let next = if j == 0 {
                let [a, b] = grid.node(i, 0);
                u[k] + h2 * t2_derivative(a, b) + 0.5 * h2 * h2 * accel(&u, i, 0)
            } else {
                2.0 * u[k] - u[grid.index(i, j - 1)] + h2 * h2 * accel(&u, i, j)
            };
            u[grid.index(i, j + 1)] = next;
        }
        let norm = (0..grid.n1).map(|i| u[grid.index(i, j + 1)].abs()).fold(0.0, f64::max);
        if !(norm <= 1e6 * scale) {
            return Err(PdeError::Instability { step: j + 1, norm });
        }
    }
    Ok(u)
}

/// L∞ of `L[u] − f` from stencil jets of the grid solution, over nodes at
/// least two cells inside and away from the mask.
pub(crate) fn independent_residual(
    grid: &Grid2,
    values: &[f64],
    residual_at: impl Fn(&crate::jets::Jet2, [f64; 2]) -> Result<f64, PdeError>,
) -> Result<f64, PdeError> {
    let field = GridField::new(grid.clone(), values.to_vec())?;
    let mut worst = 0.0f64;
    for (i, j) in grid.interior(2) {
        let p = grid.node(i, j);
        match field.eval_jet(&p) {
            Ok(jet) => worst = worst.max(residual_at(&jet, p)?.abs()),
            Err(e) if e.is_domain_exclusion() => continue,
            Err(e) => return Err(e.into()),
        }
    }
    Ok(worst)
}

pub fn solve_linear2(prob: &LinearPDEProblem) -> Result<GridSolution, PdeError> {
    let grid = &prob.grid;
    let coeffs = Coeffs::sample(&prob.op, grid)?;
    let f = sample_field(&prob.source, grid)?;
    let kind = classify(&coeffs, grid)?;
    let (values, iterations) = match (kind, &prob.data) {
        (SolveKind::Elliptic, BoundaryData::Dirichlet(data)) => {
            let mut u = vec![0.0; grid.len()];
            let mut fixed = vec![false; grid.len()];
            for (i, j) in grid.nodes() {
                let k = grid.index(i, j);
                if i == 0 || j == 0 || i == grid.n1 - 1 || j == grid.n2 - 1 || grid.is_masked(i, j) {
                    let [a, b] = grid.node(i, j);
                    u[k] = data(a, b);
                    fixed[k] = true;
                }
            }
            let omega = prob.options.omega.unwrap_or_else(|| default_omega(grid));
            let it = sor(grid, &coeffs, &f, &mut u, &fixed, prob.options.tol, prob.options.max_iter, omega)?;
            (u, it)
        }
        (SolveKind::Hyperbolic, BoundaryData::Cauchy { value, t2_derivative }) => {
            let g = |k: usize, u: f64| f[k] - coeffs.c0[k] * u;
            let u = march(grid, &coeffs.a11, &coeffs.a22, &coeffs.b1, &g, value, t2_derivative)?;
            (u, grid.n2 - 1)
        }
        (SolveKind::Elliptic, _) => {
            return Err(PdeError::InvalidProblem("elliptic problem needs Dirichlet data".into()));
        }
        (SolveKind::Hyperbolic, _) => {
            return Err(PdeError::InvalidProblem("hyperbolic problem needs Cauchy data".into()));
        }
    };
    let residual = independent_residual(grid, &values, |jet, p| {
        Ok(prob.op.a11.eval(&p)? * jet.dd(0, 0)
            + prob.op.a22.eval(&p)? * jet.dd(1, 1)
            + prob.op.b1.eval(&p)? * jet.d(0)
            + prob.op.c0.eval(&p)? * jet.value()
            - prob.source.eval(&p)?)
    })?;
    Ok(GridSolution { grid: grid.clone(), values, residual, iterations, kind })
}

/// Observed order `log2(e_h / e_{h/2})`.
pub fn observed_order(coarse: f64, fine: f64) -> f64 {
    (coarse / fine).log2()
}
