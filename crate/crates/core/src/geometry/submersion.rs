//! Geroch-type decomposition of an adapted metric and the curvature vector
//! of the submersion onto the orbit space.

use super::curvature::{invert, scalar_curvature, DET_GUARD};
use super::{AdaptedMetric, GeometryError, MetricJets, SymBlock};
use crate::fields::ScalarField;

/// `g = g̃_ij dt_i dt_j + h_kl (dz_k + f_i^k dt_i)(dz_l + f_j^l dt_j)`.
#[derive(Debug, Clone)]
pub struct GerochData {
    pub orbit: SymBlock,
    /// `fup[j][k] = f_j^k`.
    pub fup: [[ScalarField; 2]; 2],
    pub h: SymBlock,
}

pub fn geroch_decompose(g: &AdaptedMetric) -> Result<GerochData, GeometryError> {
    if g.h.det().as_constant() == Some(0.0) {
        return Err(GeometryError::SingularKillingBlock);
    }
    let hinv = g.h.inverse();
    let fup: [[ScalarField; 2]; 2] = std::array::from_fn(|j| {
        std::array::from_fn(|k| &(&g.f[j][0] * hinv.get(0, k)) + &(&g.f[j][1] * hinv.get(1, k)))
    });
    // g̃_ij = b_ij − f_ik f_j^k
    let orbit_entry = |i: usize, j: usize| g.b.get(i, j) - &(&(&g.f[i][0] * &fup[j][0]) + &(&g.f[i][1] * &fup[j][1]));
    Ok(GerochData {
        orbit: SymBlock::new(orbit_entry(0, 0), orbit_entry(0, 1), orbit_entry(1, 1)),
        fup,
        h: g.h.clone(),
    })
}

impl GerochData {
    /// Reassembles the block form: `b_ij = g̃_ij + h_kl f_i^k f_j^l`,
    /// `f_ik = f_i^s h_sk`.
    pub fn reassemble(&self) -> AdaptedMetric {
        let h = &self.h;
        let hf = |i: usize, j: usize| {
            let mut acc = ScalarField::zero(2);
            for k in 0..2 {
                for l in 0..2 {
                    acc = &acc + &(&(h.get(k, l) * &self.fup[i][k]) * &self.fup[j][l]);
                }
            }
            acc
        };
        let b = SymBlock::new(
            self.orbit.get(0, 0) + &hf(0, 0),
            self.orbit.get(0, 1) + &hf(0, 1),
            self.orbit.get(1, 1) + &hf(1, 1),
        );
        let f = std::array::from_fn(|i| {
            std::array::from_fn(|k| &(&self.fup[i][0] * h.get(0, k)) + &(&self.fup[i][1] * h.get(1, k)))
        });
        AdaptedMetric::new(b, f, h.clone())
    }
}

/// `(C^{z1}, C^{z2})` with `C^k = (∂_{t2} f_1^k − ∂_{t1} f_2^k) / √|det g̃|`.
pub fn curvature_vector(gd: &GerochData, t: [f64; 2]) -> Result<[f64; 2], GeometryError> {
    let o = [[gd.orbit.a11.eval(&t)?, gd.orbit.a12.eval(&t)?], [gd.orbit.a12.eval(&t)?, gd.orbit.a22.eval(&t)?]];
    let det = o[0][0] * o[1][1] - o[0][1] * o[1][0];
    let scale = o.iter().flatten().fold(0.0f64, |m, v| m.max(v.abs()));
    if !det.is_finite() || det.abs() < DET_GUARD * scale * scale || scale == 0.0 {
        return Err(GeometryError::Degenerate { det, scale });
    }
    let root = det.abs().sqrt();
    let mut c = [0.0; 2];
    for (k, ck) in c.iter_mut().enumerate() {
        let f1 = gd.fup[0][k].eval_jet(&t)?;
        let f2 = gd.fup[1][k].eval_jet(&t)?;
        *ck = (f1.d(1) - f2.d(0)) / root;
    }
    Ok(c)
}

/// `g(C, C) = h_kl C^k C^l`.
pub fn c_norm_squared(gd: &GerochData, t: [f64; 2]) -> Result<f64, GeometryError> {
    let c = curvature_vector(gd, t)?;
    let h = [[gd.h.a11.eval(&t)?, gd.h.a12.eval(&t)?], [gd.h.a12.eval(&t)?, gd.h.a22.eval(&t)?]];
    Ok((0..2).flat_map(|k| (0..2).map(move |l| (k, l))).map(|(k, l)| h[k][l] * c[k] * c[l]).sum())
}

/// Gauss curvature of a 2D metric: half its scalar curvature.
pub fn gauss_curvature_2d(metric: &SymBlock, t: [f64; 2]) -> Result<f64, GeometryError> {
    let jets: MetricJets<2> = metric.jets(t)?;
    Ok(0.5 * scalar_curvature(&jets)?)
}

/// Pointwise inverse of the Killing block.
pub(crate) fn h_values(h: &SymBlock, t: [f64; 2]) -> Result<([[f64; 2]; 2], [[f64; 2]; 2]), GeometryError> {
    let v = [[h.a11.eval(&t)?, h.a12.eval(&t)?], [h.a12.eval(&t)?, h.a22.eval(&t)?]];
    Ok((v, invert(&v)?))
}
