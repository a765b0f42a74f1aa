//! Adapted coordinate changes `t = φ(t̄)`, `z = α z̄ + ψ(t̄)`, written from
//! the new chart to the old one so that a metric can be pulled back by
//! composition.

use std::sync::Arc;

use super::{FieldError, Primitive, ScalarField};
use crate::geometry::{AdaptedMetric, SymBlock};
use crate::jets::Jet2;

const JACOBIAN_FLOOR: f64 = 1e-12;

/// Old coordinates as functions of new ones: `t_i = φ_i(t̄)`,
/// `z_k = α_kl z̄_l + ψ_k(t̄)`. `φ` and `ψ` must be closed-form fields so
/// that their Jacobians exist symbolically.
#[derive(Debug, Clone)]
pub struct AdaptedTransform {
    pub phi: [ScalarField; 2],
    pub alpha: [[f64; 2]; 2],
    pub psi: [ScalarField; 2],
}

/// Constant-one jet that fails where `J_φ` vanishes.
#[derive(Debug)]
struct JacobianGuard {
    det: ScalarField,
}

impl Primitive for JacobianGuard {
    fn arity(&self) -> usize {
        2
    }

    fn name(&self) -> &'static str {
        "jacobian-guard"
    }

    fn eval(&self, p: &[f64]) -> Result<Jet2, FieldError> {
        let det = self.det.eval(p)?;
        if !det.is_finite() || det.abs() < JACOBIAN_FLOOR {
            return Err(FieldError::NonInvertible { t1: p[0], t2: p[1], det });
        }
        Ok(Jet2::constant(2, 1.0))
    }
}

impl AdaptedTransform {
    pub fn new(phi: [ScalarField; 2], alpha: [[f64; 2]; 2], psi: [ScalarField; 2]) -> Result<Self, FieldError> {
        let det = alpha[0][0] * alpha[1][1] - alpha[0][1] * alpha[1][0];
        if det == 0.0 || !det.is_finite() {
            return Err(FieldError::Other(format!("Killing-block matrix is singular (det {det})")));
        }
        for f in phi.iter().chain(psi.iter()) {
            if f.arity() != 2 {
                return Err(FieldError::PointArity { expected: 2, got: f.arity() });
            }
            if !f.is_symbolic() {
                return Err(FieldError::NotSymbolic("non-closed-form"));
            }
        }
        Ok(Self { phi, alpha, psi })
    }

    pub fn identity() -> Self {
        Self {
            phi: [ScalarField::t1(), ScalarField::t2()],
            alpha: [[1.0, 0.0], [0.0, 1.0]],
            psi: [ScalarField::zero(2), ScalarField::zero(2)],
        }
    }

    /// `J_φ` as a field.
    pub fn jacobian_det(&self) -> Result<ScalarField, FieldError> {
        let d = self.phi_derivatives()?;
        Ok(&d[0][0] * &d[1][1] - &d[0][1] * &d[1][0])
    }

    /// `d[i][a] = ∂φ_i / ∂t̄_a`.
    fn phi_derivatives(&self) -> Result<[[ScalarField; 2]; 2], FieldError> {
        Ok([
            [self.phi[0].derivative(0)?, self.phi[0].derivative(1)?],
            [self.phi[1].derivative(0)?, self.phi[1].derivative(1)?],
        ])
    }

    /// Maps a point of the new chart to the old one.
    pub fn apply(&self, p: &[f64; 4]) -> Result<[f64; 4], FieldError> {
        let t = [p[0], p[1]];
        let (z1, z2) = (p[2], p[3]);
        Ok([
            self.phi[0].eval(&t)?,
            self.phi[1].eval(&t)?,
            self.alpha[0][0] * z1 + self.alpha[0][1] * z2 + self.psi[0].eval(&t)?,
            self.alpha[1][0] * z1 + self.alpha[1][1] * z2 + self.psi[1].eval(&t)?,
        ])
    }
}

/// Components of `g` in the new chart:
///
/// `b̄_ab = ∂_aφ_i ∂_bφ_j b_ij + (∂_aφ_i ∂_bψ_k + ∂_bφ_i ∂_aψ_k) f_ik + ∂_aψ_k ∂_bψ_l h_kl`,
/// `f̄_al = (∂_aφ_i f_ik + ∂_aψ_m h_mk) α_kl`, `h̄ = αᵀ h α`,
/// with every old component composed with `φ`.
pub fn pullback_metric(g: &AdaptedMetric, tr: &AdaptedTransform) -> Result<AdaptedMetric, FieldError> {
    let dphi = tr.phi_derivatives()?;
    let dpsi =
        [[tr.psi[0].derivative(0)?, tr.psi[0].derivative(1)?], [tr.psi[1].derivative(0)?, tr.psi[1].derivative(1)?]];
    let guard = ScalarField::from_primitive(Arc::new(JacobianGuard { det: tr.jacobian_det()? }));
    let inner = [tr.phi[0].clone(), tr.phi[1].clone()];
    let at = |f: &ScalarField| f.compose(&inner);
    let b: [[ScalarField; 2]; 2] = std::array::from_fn(|i| std::array::from_fn(|j| at(g.b.get(i, j))));
    let f: [[ScalarField; 2]; 2] = std::array::from_fn(|i| std::array::from_fn(|k| at(&g.f[i][k])));
    let h: [[ScalarField; 2]; 2] = std::array::from_fn(|k| std::array::from_fn(|l| at(g.h.get(k, l))));

    let bbar = |a: usize, c: usize| {
        let mut acc = ScalarField::zero(2);
        for i in 0..2 {
            for j in 0..2 {
                acc = &acc + &(&(&dphi[i][a] * &dphi[j][c]) * &b[i][j]);
            }
            for k in 0..2 {
                let cross = &(&dphi[i][a] * &dpsi[k][c]) + &(&dphi[i][c] * &dpsi[k][a]);
                acc = &acc + &(&cross * &f[i][k]);
            }
        }
        for k in 0..2 {
            for l in 0..2 {
                acc = &acc + &(&(&dpsi[k][a] * &dpsi[l][c]) * &h[k][l]);
            }
        }
        &acc * &guard
    };
    let fbar = |a: usize, l: usize| {
        let mut acc = ScalarField::zero(2);
        for k in 0..2 {
            let mut coeff = ScalarField::zero(2);
            for i in 0..2 {
                coeff = &coeff + &(&dphi[i][a] * &f[i][k]);
            }
            for m in 0..2 {
                coeff = &coeff + &(&dpsi[m][a] * &h[m][k]);
            }
            acc = &acc + &(&coeff * tr.alpha[k][l]);
        }
        &acc * &guard
    };
    let hbar = |a: usize, c: usize| {
        let mut acc = ScalarField::zero(2);
        for k in 0..2 {
            for l in 0..2 {
                acc = &acc + &(&h[k][l] * (tr.alpha[k][a] * tr.alpha[l][c]));
            }
        }
        &acc * &guard
    };
    Ok(AdaptedMetric::new(
        SymBlock::new(bbar(0, 0), bbar(0, 1), bbar(1, 1)),
        [[fbar(0, 0), fbar(0, 1)], [fbar(1, 0), fbar(1, 1)]],
        SymBlock::new(hbar(0, 0), hbar(0, 1), hbar(1, 1)),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample_metric() -> AdaptedMetric {
        let (t1, t2) = (ScalarField::t1(), ScalarField::t2());
        AdaptedMetric::new(
            SymBlock::new((&t1 * 0.3).exp(), &t2 * 0.1, &t1 * &t1 + 1.0),
            [[&t2 * 2.0, &t1 * &t2], [ScalarField::zero(2), &t1 * 0.5]],
            SymBlock::new(&t1 + &t2, &t1 * &t1, ScalarField::zero(2)),
        )
    }

    fn assert_same(a: &AdaptedMetric, b: &AdaptedMetric, p: [f64; 4], rel: f64) {
        let (va, vb) = (a.values(&p).unwrap(), b.values(&p).unwrap());
        for r in 0..4 {
            for c in 0..4 {
                let scale = va[r][c].abs().max(1.0);
                assert!((va[r][c] - vb[r][c]).abs() <= rel * scale, "({r},{c}): {} vs {}", va[r][c], vb[r][c]);
            }
        }
    }

    #[test]
    fn identity_pullback() {
        let g = sample_metric();
        let back = pullback_metric(&g, &AdaptedTransform::identity()).unwrap();
        assert_same(&g, &back, [1.2, 0.7, 0.0, 0.0], 1e-15);
    }

    #[test]
    fn z_shear_is_a_congruence_of_h() {
        let g = sample_metric();
        let alpha = [[1.0, 1.0], [0.0, 1.0]];
        let tr = AdaptedTransform::new(
            [ScalarField::t1(), ScalarField::t2()],
            alpha,
            [ScalarField::zero(2), ScalarField::zero(2)],
        )
        .unwrap();
        let back = pullback_metric(&g, &tr).unwrap();
        let t = [1.1, 0.4];
        let h = [[g.h.a11.eval(&t).unwrap(), g.h.a12.eval(&t).unwrap()], [g.h.a12.eval(&t).unwrap(), 0.0]];
        for a in 0..2 {
            for c in 0..2 {
                let mut expect = 0.0;
                for k in 0..2 {
                    for l in 0..2 {
                        expect += alpha[k][a] * h[k][l] * alpha[l][c];
                    }
                }
                assert!((back.h.get(a, c).eval(&t).unwrap() - expect).abs() < 1e-14);
            }
            for c in 0..2 {
                assert_eq!(back.b.get(a, c).eval(&t).unwrap(), g.b.get(a, c).eval(&t).unwrap());
            }
        }
    }

    #[test]
    fn singular_jacobian_is_reported() {
        let t1 = ScalarField::t1();
        let tr = AdaptedTransform::new(
            [&t1 * &t1, ScalarField::t2()],
            [[1.0, 0.0], [0.0, 1.0]],
            [ScalarField::zero(2), ScalarField::zero(2)],
        )
        .unwrap();
        let back = pullback_metric(&sample_metric(), &tr).unwrap();
        let err = back.b.a11.eval(&[0.0, 0.5]).unwrap_err();
        assert!(matches!(err, FieldError::NonInvertible { .. }));
        assert!(back.b.a11.eval(&[1.0, 0.5]).is_ok());
    }

    #[test]
    fn singular_alpha_is_rejected() {
        let r = AdaptedTransform::new(
            [ScalarField::t1(), ScalarField::t2()],
            [[1.0, 2.0], [2.0, 4.0]],
            [ScalarField::zero(2), ScalarField::zero(2)],
        );
        assert!(r.is_err());
    }
}
