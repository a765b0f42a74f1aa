use super::{FieldError, Primitive, ScalarField};
use crate::jets::Jet2;

// 8-point Gauss-Legendre rule on [-1, 1].
const GL_NODES: [f64; 4] =
    [0.183_434_642_495_649_8, 0.525_532_409_916_329, 0.796_666_477_413_626_7, 0.960_289_856_497_536_3];
const GL_WEIGHTS: [f64; 4] =
    [0.362_683_783_378_362, 0.313_706_645_877_887_3, 0.222_381_034_453_374_5, 0.101_228_536_290_376_3];

/// Maximum panel width for the composite rule, in chart units.
const PANEL: f64 = 0.0625;

/// `F(t1, t2) = ∫_{base}^{t2} f(t1, s) ds` for an arity-2 integrand `f`.
///
/// The `t2`-derivatives of `F` come straight from the integrand's jet; value,
/// `∂_{t1} F` and `∂_{t1 t1} F` use composite Gauss-Legendre quadrature of the
/// integrand jets. Changing `base` adds a function of `t1` only, which is an
/// adapted-coordinate shift of `z`.
#[derive(Debug)]
pub struct AntiderivativeT2 {
    integrand: ScalarField,
    base: f64,
}

impl AntiderivativeT2 {
    pub fn new(integrand: ScalarField, base: f64) -> Self {
        assert_eq!(integrand.arity(), 2, "antiderivative needs an arity-2 integrand");
        Self { integrand, base }
    }

    pub fn field(integrand: ScalarField, base: f64) -> ScalarField {
        ScalarField::from_primitive(std::sync::Arc::new(Self::new(integrand, base)))
    }
}

impl Primitive for AntiderivativeT2 {
    fn arity(&self) -> usize {
        2
    }

    fn name(&self) -> &'static str {
        "t2-antiderivative"
    }

    fn eval(&self, p: &[f64]) -> Result<Jet2, FieldError> {
        let (t1, t2) = (p[0], p[1]);
        let span = t2 - self.base;
        let panels = ((span.abs() / PANEL).ceil() as usize).max(1);
        let width = span / panels as f64;
        let (mut v, mut d1, mut d11) = (0.0, 0.0, 0.0);
        for k in 0..panels {
            let mid = self.base + (k as f64 + 0.5) * width;
            let half = 0.5 * width;
            for (x, w) in GL_NODES.iter().zip(GL_WEIGHTS.iter()) {
                for s in [mid - half * x, mid + half * x] {
                    let j = self.integrand.eval_jet(&[t1, s])?;
                    v += w * half * j.value();
                    d1 += w * half * j.d(0);
                    d11 += w * half * j.dd(0, 0);
                }
            }
        }
        let top = self.integrand.eval_jet(&[t1, t2])?;
        Ok(Jet2::from_parts(2, v, &[d1, top.value()], &[&[d11, top.d(0)], &[top.d(0), top.d(1)]])?)
    }
}
