use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use super::curvature::{christoffel, ricci_from_connection};
use super::{AdaptedMetric, ClaimResult, GeometryError};
use crate::fields::{Grid2, ScalarField};
use crate::jets::Jet2;

/// Vector field tangent to the Killing leaves with components affine in
/// `(z1, z2)`: `X^{z_k} = linear[k][0] z1 + linear[k][1] z2 + offset[k]`, plus
/// an optional profile `A(z1)` added to `X^{z2}`.
#[derive(Debug, Clone)]
pub struct SolitonVectorField {
    pub linear: [[f64; 2]; 2],
    pub offset: [f64; 2],
    /// Arity-1 field in `z1`.
    pub z1_profile: Option<ScalarField>,
    /// Constant `(X^{t1}, X^{t2})`. Zero for every classified family; kept so
    /// that the tangency check has something to measure.
    pub normal: [f64; 2],
}

impl SolitonVectorField {
    pub fn affine(linear: [[f64; 2]; 2], offset: [f64; 2]) -> Self {
        Self { linear, offset, z1_profile: None, normal: [0.0; 2] }
    }

    pub fn zero() -> Self {
        Self::affine([[0.0; 2]; 2], [0.0; 2])
    }

    /// The Killing field `∂_{z_k}`.
    pub fn killing(k: usize) -> Self {
        let mut offset = [0.0; 2];
        offset[k] = 1.0;
        Self::affine([[0.0; 2]; 2], offset)
    }

    pub fn with_profile(mut self, profile: ScalarField) -> Self {
        assert_eq!(profile.arity(), 1, "z1 profile must have arity 1");
        self.z1_profile = Some(profile);
        self
    }

    /// Jets (arity 4) of `(X^{t1}, X^{t2}, X^{z1}, X^{z2})` at `p`.
    pub fn jets(&self, p: &[f64; 4]) -> Result<[Jet2; 4], GeometryError> {
        let (z1, z2) = (p[2], p[3]);
        let zj1 = Jet2::variable(4, 2, z1);
        let zj2 = Jet2::variable(4, 3, z2);
        let comp = |k: usize| zj1 * self.linear[k][0] + zj2 * self.linear[k][1] + self.offset[k];
        let mut x2 = comp(1);
        if let Some(a) = &self.z1_profile {
            x2 = x2 + a.eval_jet(&[z1])?.embed(4, &[2])?;
        }
        Ok([Jet2::constant(4, self.normal[0]), Jet2::constant(4, self.normal[1]), comp(0), x2])
    }

    /// `∂_{z_l} X^{z_k}` at `p`.
    pub fn z_jacobian(&self, p: &[f64; 4]) -> Result<[[f64; 2]; 2], GeometryError> {
        let x = self.jets(p)?;
        Ok([[x[2].d(2), x[2].d(3)], [x[3].d(2), x[3].d(3)]])
    }
}

/// Singular locus of a family, masked with a margin in grid cells.
#[derive(Clone)]
pub struct Exclusion {
    pub name: String,
    pub locus: Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>,
    pub margin: usize,
}

impl fmt::Debug for Exclusion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Exclusion").field("name", &self.name).field("margin", &self.margin).finish()
    }
}

impl Exclusion {
    pub fn new(
        name: impl Into<String>,
        margin: usize,
        locus: impl Fn(f64, f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Self { name: name.into(), locus: Arc::new(locus), margin }
    }
}

/// Metric, soliton field and constant ready for evaluation of
/// `Ric + ½ L_X g − Λ g`.
#[derive(Debug, Clone)]
pub struct SolitonInstance {
    pub metric: AdaptedMetric,
    pub field: SolitonVectorField,
    pub lambda: f64,
    pub eps0: f64,
    pub exclusions: Vec<Exclusion>,
}

pub fn lie_derivative_metric(
    g: &AdaptedMetric,
    x: &SolitonVectorField,
    p: &[f64; 4],
) -> Result<[[f64; 4]; 4], GeometryError> {
    let gj = g.jets(p)?;
    let xj = x.jets(p)?;
    let mut out = [[0.0; 4]; 4];
    for a in 0..4 {
        for b in 0..4 {
            let mut s = 0.0;
            for c in 0..4 {
                s += xj[c].value() * gj[a][b].d(c) + gj[c][b].value() * xj[c].d(a) + gj[a][c].value() * xj[c].d(b);
            }
            out[a][b] = s;
        }
    }
    Ok(out)
}

pub fn soliton_residual(inst: &SolitonInstance, p: &[f64; 4]) -> Result<[[f64; 4]; 4], GeometryError> {
    let gj = inst.metric.jets(p)?;
    let ric = ricci_from_connection(&christoffel(&gj)?);
    let lie = lie_derivative_metric(&inst.metric, &inst.field, p)?;
    Ok(std::array::from_fn(|a| std::array::from_fn(|b| ric[a][b] + 0.5 * lie[a][b] - inst.lambda * gj[a][b].value())))
}

/// Aggregated residual of a scan over a grid of orbit points at a fixed
/// `(z1, z2)` slice.
#[derive(Debug, Clone, Serialize)]
pub struct ResidualReport {
    pub window: [f64; 4],
    pub n1: usize,
    pub n2: usize,
    pub z: [f64; 2],
    pub sup_norm: f64,
    pub rms: f64,
    pub per_component: [[f64; 4]; 4],
    pub points_evaluated: usize,
    pub points_masked: usize,
    pub claims: Vec<ClaimResult>,
}

/// Applies the instance exclusions to `grid` and calls `visit` on every
/// remaining node. Point failures that mean "outside the working domain" are
/// counted as masked. Returns `(evaluated, masked)`.
pub fn for_each_node(
    grid: &Grid2,
    exclusions: &[Exclusion],
    mut visit: impl FnMut(usize, usize, [f64; 2]) -> Result<(), GeometryError>,
) -> Result<(usize, usize), GeometryError> {
    let mut g = grid.clone();
    for ex in exclusions {
        let locus = ex.locus.clone();
        g.exclude_near(move |a, b| locus(a, b), ex.margin);
    }
    let (mut evaluated, mut masked) = (0, 0);
    for (i, j) in g.nodes() {
        if g.is_masked(i, j) {
            masked += 1;
            continue;
        }
        match visit(i, j, g.node(i, j)) {
            Ok(()) => evaluated += 1,
            Err(e) if e.is_exclusion() => masked += 1,
            Err(e) => return Err(e),
        }
    }
    if evaluated == 0 {
        return Err(GeometryError::EmptyScan);
    }
    Ok((evaluated, masked))
}

pub fn residual_scan(inst: &SolitonInstance, grid: &Grid2, z: [f64; 2]) -> Result<ResidualReport, GeometryError> {
    let mut per_component = [[0.0f64; 4]; 4];
    let mut sumsq = 0.0;
    let (evaluated, masked) = for_each_node(grid, &inst.exclusions, |_, _, t| {
        let e = soliton_residual(inst, &[t[0], t[1], z[0], z[1]])?;
        for a in 0..4 {
            for b in 0..4 {
                per_component[a][b] = per_component[a][b].max(e[a][b].abs());
                sumsq += e[a][b] * e[a][b];
            }
        }
        Ok(())
    })?;
    let sup_norm = per_component.iter().flatten().fold(0.0f64, |m, &v| m.max(v));
    Ok(ResidualReport {
        window: grid.window(),
        n1: grid.n1,
        n2: grid.n2,
        z,
        sup_norm,
        rms: (sumsq / (16 * evaluated) as f64).sqrt(),
        per_component,
        points_evaluated: evaluated,
        points_masked: masked,
        claims: Vec::new(),
    })
}
