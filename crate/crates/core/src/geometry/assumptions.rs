//! Checks of the standing hypotheses on an instance: Killing symmetry,
//! non-null leaves, a null Killing direction, the curvature-vector
//! conditions and tangency/symmetry of the soliton field.

use serde::{Deserialize, Serialize};

use super::soliton::for_each_node;
use super::submersion::h_values;
use super::{
    c_norm_squared, curvature_vector, geroch_decompose, lie_derivative_metric, ClaimResult, GeometryError,
    SolitonInstance, SolitonVectorField,
};
use crate::fields::Grid2;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AssumptionTolerances {
    /// sup |L_{∂z_k} g|
    pub killing: f64,
    /// lower bound on min |det h|
    pub det_h_floor: f64,
    /// sup |h(v, v)| for the null candidate
    pub null: f64,
    /// sup |g(C, C)|
    pub c_null: f64,
    /// lower bound on min |C|
    pub c_floor: f64,
    /// sup |g([X, e_j], ξ_i)|
    pub symmetry: f64,
}

impl Default for AssumptionTolerances {
    fn default() -> Self {
        Self { killing: 1e-12, det_h_floor: 1e-10, null: 1e-12, c_null: 1e-10, c_floor: 1e-12, symmetry: 1e-9 }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct AssumptionReport {
    pub checks: Vec<ClaimResult>,
    pub points_evaluated: usize,
    pub points_masked: usize,
}

impl AssumptionReport {
    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn get(&self, name: &str) -> Option<&ClaimResult> {
        self.checks.iter().find(|c| c.name == name)
    }
}

/// Real unit null directions of a symmetric 2x2 form, empty if definite.
fn null_directions(h: [[f64; 2]; 2]) -> Vec<[f64; 2]> {
    let (a, b, c) = (h[0][0], h[0][1], h[1][1]);
    let disc = b * b - a * c;
    if disc < 0.0 {
        return Vec::new();
    }
    let root = disc.sqrt();
    let raw = if c != 0.0 {
        // c s^2 + 2 b s + a = 0 with v = (1, s)
        vec![[c, -b + root], [c, -b - root]]
    } else if a != 0.0 {
        // v = (s, 1): a s^2 + 2 b s = 0
        vec![[0.0, 1.0], [-2.0 * b, a]]
    } else {
        vec![[1.0, 0.0], [0.0, 1.0]]
    };
    raw.into_iter()
        .filter_map(|v| {
            let n = (v[0] * v[0] + v[1] * v[1]).sqrt();
            (n > 0.0).then(|| [v[0] / n, v[1] / n])
        })
        .collect()
}

fn quad(h: &[[f64; 2]; 2], v: [f64; 2]) -> f64 {
    h[0][0] * v[0] * v[0] + 2.0 * h[0][1] * v[0] * v[1] + h[1][1] * v[1] * v[1]
}

/// Evaluates every hypothesis at the unmasked nodes of `grid`, on the slice
/// `z`. Failures are reported as failing checks rather than errors; an error
/// is returned only when no node can be evaluated at all.
pub fn validate_assumptions(
    inst: &SolitonInstance,
    grid: &Grid2,
    z: [f64; 2],
    tol: &AssumptionTolerances,
) -> Result<AssumptionReport, GeometryError> {
    let gd = geroch_decompose(&inst.metric)?;
    let killing = [SolitonVectorField::killing(0), SolitonVectorField::killing(1)];

    let mut killing_sup = 0.0f64;
    let mut det_h_min = f64::INFINITY;
    let mut null_candidates: Option<Vec<[f64; 2]>> = None;
    let mut null_sups: Vec<f64> = Vec::new();
    let mut definite_gap = 0.0f64;
    let mut c_null_sup = 0.0f64;
    let mut c_min = f64::INFINITY;
    let mut normal_sup = 0.0f64;
    let mut symmetry_sup = 0.0f64;

    let (evaluated, masked) = for_each_node(grid, &inst.exclusions, |_, _, t| {
        let p = [t[0], t[1], z[0], z[1]];
        let c = curvature_vector(&gd, t)?;
        let cc = c_norm_squared(&gd, t)?;
        let (h, _) = h_values(&inst.metric.h, t)?;

        for k in &killing {
            let l = lie_derivative_metric(&inst.metric, k, &p)?;
            killing_sup = l.iter().flatten().fold(killing_sup, |m, v| m.max(v.abs()));
        }
        det_h_min = det_h_min.min((h[0][0] * h[1][1] - h[0][1] * h[1][0]).abs());

        let candidates = null_candidates.get_or_insert_with(|| {
            let dirs = null_directions(h);
            if dirs.is_empty() {
                // definite form: the smallest |eigenvalue| measures how far it is from null
                let tr = 0.5 * (h[0][0] + h[1][1]);
                let d = ((0.5 * (h[0][0] - h[1][1])).powi(2) + h[0][1] * h[0][1]).sqrt();
                definite_gap = (tr.abs() - d).abs();
            }
            null_sups = vec![0.0; dirs.len()];
            dirs
        });
        for (s, v) in null_sups.iter_mut().zip(candidates.iter()) {
            *s = s.max(quad(&h, *v).abs());
        }

        c_null_sup = c_null_sup.max(cc.abs());
        c_min = c_min.min((c[0] * c[0] + c[1] * c[1]).sqrt());

        let xj = inst.field.jets(&p)?;
        normal_sup = normal_sup.max(xj[0].value().abs()).max(xj[1].value().abs());

        // [X, e_j]^{z_k} = −X^{t_i} ∂_{t_i} f_j^k + f_j^l ∂_{z_l} X^k, paired with ξ_i through h
        let dx = inst.field.z_jacobian(&p)?;
        for j in 0..2 {
            let fj = [gd.fup[j][0].eval_jet(&t)?, gd.fup[j][1].eval_jet(&t)?];
            let mut v = [0.0; 2];
            for (k, vk) in v.iter_mut().enumerate() {
                *vk = -(xj[0].value() * fj[k].d(0) + xj[1].value() * fj[k].d(1))
                    + fj[0].value() * dx[k][0]
                    + fj[1].value() * dx[k][1];
            }
            for i in 0..2 {
                let g_v_xi = h[0][i] * v[0] + h[1][i] * v[1];
                symmetry_sup = symmetry_sup.max(g_v_xi.abs());
            }
        }
        Ok(())
    })?;

    let null_measured =
        if null_sups.is_empty() { definite_gap } else { null_sups.iter().cloned().fold(f64::INFINITY, f64::min) };
    let checks = vec![
        ClaimResult::within("killing", killing_sup, 0.0, tol.killing),
        ClaimResult::above("non_null_leaves", det_h_min, tol.det_h_floor),
        ClaimResult::within("null_killing_vector", null_measured, 0.0, tol.null),
        ClaimResult::within("c_null", c_null_sup, 0.0, tol.c_null),
        ClaimResult::above("c_nonzero", c_min, tol.c_floor),
        ClaimResult::within("x_tangent", normal_sup, 0.0, 0.0),
        ClaimResult::within("x_symmetry", symmetry_sup, 0.0, tol.symmetry),
    ];
    Ok(AssumptionReport { checks, points_evaluated: evaluated, points_masked: masked })
}
