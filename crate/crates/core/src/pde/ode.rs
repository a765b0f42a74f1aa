use std::sync::Arc;

use super::PdeError;
use crate::fields::{FieldError, Primitive, ScalarField};
use crate::jets::{Jet2, JetError};

/// Numerical solution of `R' = R^{3/2} + c` on a uniform mesh.
///
/// Values between mesh nodes come from cubic Hermite interpolation using the
/// right-hand side as nodal slope. The first and second derivatives of the
/// returned jet are taken from the equation itself (`R' = f(R)`,
/// `R'' = f'(R) f(R)`), so any field built from `R` satisfies the ODE exactly
/// at the interpolated value.
#[derive(Debug, Clone)]
pub struct RSolution {
    pub c: f64,
    pub t0: f64,
    pub step: f64,
    pub values: Vec<f64>,
}

fn rhs(r: f64, c: f64) -> f64 {
    r.powf(1.5) + c
}

/// Classical RK4 from `(t_start, r0)` to `t_end`, with the step adjusted to
/// divide the range evenly. With `require_q` the Type A′ inequality
/// `R^{3/2} + c > 0` is enforced along the way.
pub fn solve_r_ode(
    c: f64,
    r0: f64,
    t_start: f64,
    t_end: f64,
    step: f64,
    require_q: bool,
) -> Result<RSolution, PdeError> {
    if r0 <= 0.0 || step <= 0.0 || t_end == t_start {
        return Err(PdeError::InvalidProblem(format!(
            "need r0 > 0, step > 0 and a non-empty range (r0 = {r0}, step = {step})"
        )));
    }
    let span = t_end - t_start;
    let n = (span.abs() / step).ceil().max(1.0) as usize;
    let h = span / n as f64;
    let mut values = Vec::with_capacity(n + 1);
    let mut r = r0;
    values.push(r);
    let check = |r: f64, t: f64| -> Result<(), PdeError> {
        if !(r > 0.0) || !r.is_finite() {
            return Err(PdeError::OdeBreakdown { t, reason: "R left the positive range" });
        }
        if require_q && !(rhs(r, c) > 0.0) {
            return Err(PdeError::OdeBreakdown { t, reason: "R^{3/2} + c is no longer positive" });
        }
        Ok(())
    };
    check(r, t_start)?;
    for k in 0..n {
        let t = t_start + k as f64 * h;
        let k1 = rhs(r, c);
        let k2 = rhs(r + 0.5 * h * k1, c);
        let k3 = rhs(r + 0.5 * h * k2, c);
        let k4 = rhs(r + h * k3, c);
        for stage in [r + 0.5 * h * k1, r + 0.5 * h * k2, r + h * k3] {
            if !(stage > 0.0) {
                return Err(PdeError::OdeBreakdown { t, reason: "R left the positive range" });
            }
        }
        r += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        check(r, t + h)?;
        values.push(r);
    }
    Ok(RSolution { c, t0: t_start, step: h, values })
}

impl RSolution {
    pub fn t_end(&self) -> f64 {
        self.t0 + self.step * (self.values.len() - 1) as f64
    }

    fn interval(&self, t: f64) -> Option<(usize, f64)> {
        let s = (t - self.t0) / self.step;
        let last = (self.values.len() - 1) as f64;
        if !(-1e-12..=last + 1e-12).contains(&s) {
            return None;
        }
        let k = (s.floor().max(0.0) as usize).min(self.values.len() - 2);
        Some((k, (s - k as f64).clamp(0.0, 1.0)))
    }

    fn hermite(&self, k: usize, u: f64) -> (f64, f64) {
        let (r0, r1) = (self.values[k], self.values[k + 1]);
        let (m0, m1) = (rhs(r0, self.c) * self.step, rhs(r1, self.c) * self.step);
        let (u2, u3) = (u * u, u * u * u);
        let v =
            (2.0 * u3 - 3.0 * u2 + 1.0) * r0 + (u3 - 2.0 * u2 + u) * m0 + (-2.0 * u3 + 3.0 * u2) * r1 + (u3 - u2) * m1;
        let dv = (6.0 * u2 - 6.0 * u) * r0
            + (3.0 * u2 - 4.0 * u + 1.0) * m0
            + (-6.0 * u2 + 6.0 * u) * r1
            + (3.0 * u2 - 2.0 * u) * m1;
        (v, dv / self.step)
    }

    /// Interpolated value at `t`.
    pub fn value(&self, t: f64) -> Option<f64> {
        self.interval(t).map(|(k, u)| self.hermite(k, u).0)
    }

    /// `max |H'(t) − H(t)^{3/2} − c|` over interval midpoints, where `H` is
    /// the Hermite interpolant: an independent check of the integration.
    pub fn interpolant_residual(&self) -> f64 {
        (0..self.values.len() - 1)
            .map(|k| {
                let (v, dv) = self.hermite(k, 0.5);
                (dv - rhs(v, self.c)).abs()
            })
            .fold(0.0, f64::max)
    }

    /// Arity-1 field `R(t1)`.
    pub fn field(self) -> ScalarField {
        ScalarField::from_primitive(Arc::new(self))
    }

    /// Arity-2 field `(t1, t2) ↦ R(t1)`.
    pub fn t1_field(self) -> ScalarField {
        self.field().compose(&[ScalarField::t1()])
    }
}

impl Primitive for RSolution {
    fn arity(&self) -> usize {
        1
    }

    fn name(&self) -> &'static str {
        "r-ode"
    }

    fn eval(&self, p: &[f64]) -> Result<Jet2, FieldError> {
        let t = p[0];
        let r = self.value(t).ok_or(FieldError::OutOfDomain { t1: t, t2: f64::NAN })?;
        if r <= 0.0 {
            return Err(JetError::Domain { op: "R", value: r }.into());
        }
        let f = rhs(r, self.c);
        Ok(Jet2::from_parts(1, r, &[f], &[&[1.5 * r.sqrt() * f]])?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn equilibrium_is_preserved() {
        let sol = solve_r_ode(-1.0, 1.0, 0.0, 1.0, 0.01, false).unwrap();
        assert!(sol.values.iter().all(|&r| r == 1.0));
        let j = sol.field().eval_jet(&[0.37]).unwrap();
        assert_eq!(j.d(0), 0.0);
    }

    #[test]
    fn blowup_solution() {
        // R = 4/(2 - t)^2 with R(0) = 1
        let sol = solve_r_ode(0.0, 1.0, 0.0, 1.0, 1e-3, false).unwrap();
        for (k, r) in sol.values.iter().enumerate() {
            let t = k as f64 * sol.step;
            assert!((r - 4.0 / (2.0 - t).powi(2)).abs() < 1e-11);
        }
        let t = 0.7431;
        assert!((sol.value(t).unwrap() - 4.0 / (2.0 - t).powi(2)).abs() < 1e-11);
        assert!(sol.interpolant_residual() < 1e-8);
    }

    #[test]
    fn breakdown_is_reported() {
        // finite-time blow-up at t = 2
        assert!(matches!(solve_r_ode(0.0, 1.0, 0.0, 2.5, 0.01, false), Err(PdeError::OdeBreakdown { .. })));
        // R decreases to the equilibrium of c = -1 from below, so Q < 0 immediately
        assert!(matches!(solve_r_ode(-1.0, 0.5, 0.0, 1.0, 0.01, true), Err(PdeError::OdeBreakdown { .. })));
    }

    #[test]
    fn out_of_range_evaluation() {
        let f = solve_r_ode(0.0, 1.0, 0.0, 1.0, 0.01, false).unwrap().t1_field();
        assert!(f.eval(&[0.5, 10.0]).is_ok());
        assert!(matches!(f.eval(&[1.5, 0.0]), Err(FieldError::OutOfDomain { .. })));
    }
}
