use crate::fields::ScalarField;
use crate::jets::Jet2;

use super::GeometryError;

/// Symmetric 2x2 block of arity-2 fields.
#[derive(Debug, Clone)]
pub struct SymBlock {
    pub a11: ScalarField,
    pub a12: ScalarField,
    pub a22: ScalarField,
}

impl SymBlock {
    pub fn new(a11: ScalarField, a12: ScalarField, a22: ScalarField) -> Self {
        Self { a11, a12, a22 }
    }

    pub fn diag(a11: ScalarField, a22: ScalarField) -> Self {
        Self { a11, a12: ScalarField::zero(2), a22 }
    }

    pub fn get(&self, i: usize, k: usize) -> &ScalarField {
        match (i, k) {
            (0, 0) => &self.a11,
            (1, 1) => &self.a22,
            _ => &self.a12,
        }
    }

    pub fn det(&self) -> ScalarField {
        &self.a11 * &self.a22 - &self.a12 * &self.a12
    }

    /// Inverse block as fields (adjugate over determinant).
    pub fn inverse(&self) -> SymBlock {
        let det = self.det();
        SymBlock { a11: &self.a22 / &det, a12: -(&self.a12 / &det), a22: &self.a11 / &det }
    }

    pub fn jets(&self, t: [f64; 2]) -> Result<[[Jet2; 2]; 2], GeometryError> {
        let a = self.a11.eval_jet(&t)?;
        let b = self.a12.eval_jet(&t)?;
        let c = self.a22.eval_jet(&t)?;
        Ok([[a, b], [b, c]])
    }
}

/// Metric in adapted coordinates `(t1, t2, z1, z2)`:
/// `b_ij dt_i dt_j + 2 f_ik dt_i dz_k + h_kl dz_k dz_l`, every block a
/// function of `(t1, t2)` only.
#[derive(Debug, Clone)]
pub struct AdaptedMetric {
    pub b: SymBlock,
    /// `f[i][k]`: row is the base index, column the Killing index.
    pub f: [[ScalarField; 2]; 2],
    pub h: SymBlock,
}

pub type MetricJets<const N: usize> = [[Jet2; N]; N];

impl AdaptedMetric {
    pub fn new(b: SymBlock, f: [[ScalarField; 2]; 2], h: SymBlock) -> Self {
        Self { b, f, h }
    }

    /// The 4x4 component field at `(row, col)`.
    pub fn component(&self, a: usize, c: usize) -> &ScalarField {
        match (a < 2, c < 2) {
            (true, true) => self.b.get(a, c),
            (true, false) => &self.f[a][c - 2],
            (false, true) => &self.f[c][a - 2],
            (false, false) => self.h.get(a - 2, c - 2),
        }
    }

    /// Jets of the 4x4 components at `p = (t1, t2, z1, z2)`, arity 4. The
    /// `z` derivatives are identically zero.
    pub fn jets(&self, p: &[f64; 4]) -> Result<MetricJets<4>, GeometryError> {
        let t = [p[0], p[1]];
        let lift = |f: &ScalarField| -> Result<Jet2, GeometryError> { Ok(f.eval_jet(&t)?.embed(4, &[0, 1])?) };
        let b = [lift(&self.b.a11)?, lift(&self.b.a12)?, lift(&self.b.a22)?];
        let h = [lift(&self.h.a11)?, lift(&self.h.a12)?, lift(&self.h.a22)?];
        let f = [[lift(&self.f[0][0])?, lift(&self.f[0][1])?], [lift(&self.f[1][0])?, lift(&self.f[1][1])?]];
        let sym = |blk: &[Jet2; 3], i: usize, k: usize| match (i, k) {
            (0, 0) => blk[0],
            (1, 1) => blk[2],
            _ => blk[1],
        };
        Ok(std::array::from_fn(|a| {
            std::array::from_fn(|c| match (a < 2, c < 2) {
                (true, true) => sym(&b, a, c),
                (true, false) => f[a][c - 2],
                (false, true) => f[c][a - 2],
                (false, false) => sym(&h, a - 2, c - 2),
            })
        }))
    }

    pub fn values(&self, p: &[f64; 4]) -> Result<[[f64; 4]; 4], GeometryError> {
        let t = [p[0], p[1]];
        let mut out = [[0.0; 4]; 4];
        for (a, row) in out.iter_mut().enumerate() {
            for (c, v) in row.iter_mut().enumerate() {
                *v = self.component(a, c).eval(&t)?;
            }
        }
        Ok(out)
    }

    /// Replaces one component block entry; used to build perturbed or
    /// deliberately broken variants in tests and controls.
    pub fn with_h(mut self, h: SymBlock) -> Self {
        self.h = h;
        self
    }
}
