use super::{CatalogError, FamilySpec, FamilyTag, Slot, TypeBEquation};
use crate::fields::ScalarField;
use crate::pde::LinearOperator;

/// The linear equation `L[u] = source` satisfied by the ψ or S slot.
#[derive(Debug, Clone)]
pub struct SlotEquation {
    pub slot: Slot,
    pub name: &'static str,
    pub op: LinearOperator,
    pub source: ScalarField,
}

fn c(v: f64) -> ScalarField {
    ScalarField::constant(2, v)
}

/// Linear equation of the family's ψ or S slot; `None` for Case I, whose
/// only constraint is the Liouville equation.
pub fn slot_equation(spec: &FamilySpec) -> Result<Option<SlotEquation>, CatalogError> {
    let p = spec.params;
    let t1 = ScalarField::t1();
    let lam = p.lambda;
    let eq = |slot, name, a22: ScalarField, b1: ScalarField, c0: ScalarField, source: ScalarField| {
        Some(SlotEquation { slot, name, op: LinearOperator::new(c(1.0), a22, b1, c0), source })
    };
    Ok(match spec.tag {
        FamilyTag::CaseI => None,
        FamilyTag::TypeAprime => {
            let r = spec.slot(Slot::R)?;
            let q = &r.powf(1.5) + p.c;
            let source = &(&q / &r.sqrt()) * (-3.0 * p.a2 / (2.0 * lam));
            eq(Slot::S, "s_equation", c(p.eps0), &q / r, c(0.0), source)
        }
        FamilyTag::TypeBprime => {
            let r = spec.slot(Slot::R)?;
            let source = &(&(r * p.a2) + &(&r.powi(2).recip() * (2.0 * p.eps0))) * (-3.0 / (2.0 * lam));
            eq(Slot::S, "s_equation", c(p.eps0), r.sqrt(), c(0.0), source)
        }
        FamilyTag::TypeA | FamilyTag::EinsteinKundu1 => {
            let ce = spec.type_a_equation_constant();
            let d = &(&t1.powi(3) * p.eps) + ce;
            let a22 = &(&t1.powi(2) * (-3.0 * p.eps0 * p.eps * ce / lam)) / &d.powi(2);
            let b1 = &(&(&t1.powi(3) * (4.0 * p.eps)) + ce) / &(&t1 * &d);
            let a2 = if spec.tag == FamilyTag::TypeA { p.a2 } else { 0.0 };
            let source = &(&t1 * (6.0 * a2 / lam)) / &d;
            eq(Slot::Psi, "psi_equation", a22, b1, c(0.0), source)
        }
        FamilyTag::TypeB => {
            let source = match spec.variants.type_b_equation {
                TypeBEquation::Printed => {
                    &(&t1.powi(5) * (-p.eps0 * 4.0 / 3.0 * lam)) - &(&t1.recip() * (12.0 * p.a2 / lam))
                }
                TypeBEquation::Transformed => {
                    &(&t1.powi(4) * (-p.eps0 * 4.0 / 3.0 * lam)) - &(&t1.powi(2).recip() * (12.0 * p.a2 / lam))
                }
            };
            eq(Slot::Psi, "psi_equation", c(p.eps0), &t1.recip() * -2.0, c(0.0), source)
        }
        FamilyTag::CaseII2 => {
            eq(Slot::Psi, "psi_equation", c(p.eps0), t1.recip(), c(0.0), &t1.powf(-0.5) * (2.0 * p.a2))
        }
        FamilyTag::CaseII3 => {
            let e = (spec.slot(Slot::P)? * -2.0).exp();
            let source = &e * (p.eps0 * (p.c * p.c + 2.0 * p.eps0 * p.a_slope));
            eq(Slot::Psi, "psi_equation", c(p.eps0), c(0.0), &e * (-2.0 * lam), source)
        }
        FamilyTag::EinsteinKundu2 => {
            eq(Slot::Psi, "psi_equation", c(-3.0 * p.eps0 / lam), &t1.recip() * -2.0, c(0.0), c(0.0))
        }
    })
}

/// Left side minus right side of every constraint equation at `p`,
/// evaluated with jets.
pub fn constraint_residual(spec: &FamilySpec, p: [f64; 2]) -> Result<Vec<(&'static str, f64)>, CatalogError> {
    let prm = spec.params;
    let mut out = Vec::new();
    match spec.tag {
        FamilyTag::CaseI | FamilyTag::CaseII3 => {
            let j = spec.slot(Slot::P)?.eval_jet(&p)?;
            let r = j.dd(0, 0) + prm.eps0 * j.dd(1, 1) - prm.lambda * (-2.0 * j.value()).exp();
            out.push(("liouville", r));
        }
        FamilyTag::TypeAprime | FamilyTag::TypeBprime => {
            let c = if spec.tag == FamilyTag::TypeAprime { prm.c } else { 0.0 };
            let j = spec.slot(Slot::R)?.eval_jet(&p)?;
            out.push(("r_ode", j.d(0) - j.value().powf(1.5) - c));
        }
        _ => {}
    }
    if let Some(eq) = slot_equation(spec)? {
        let u = spec.slot(eq.slot)?;
        out.push((eq.name, eq.op.apply(u, p)? - eq.source.eval(&p)?));
    }
    Ok(out)
}

/// The printed Gauss curvature of the orbit metric.
pub fn orbit_curvature(spec: &FamilySpec) -> Result<ScalarField, CatalogError> {
    let p = spec.params;
    let lam = p.lambda;
    let t1 = ScalarField::t1();
    Ok(match spec.tag {
        FamilyTag::CaseI | FamilyTag::CaseII3 => c(lam),
        FamilyTag::TypeBprime | FamilyTag::TypeB | FamilyTag::EinsteinKundu2 => c(lam / 3.0),
        FamilyTag::TypeAprime => {
            let r = spec.slot(Slot::R)?;
            let num = &(&(&r.powi(5) + &(&r.sqrt() * p.c.powi(3))) + &(&r.powi(2) * (3.0 * p.c * p.c)))
                + &(&r.powf(3.5) * (3.0 * p.c));
            let den = &(&r.powf(2.5) + &(r * p.c)).powi(2) * 3.0;
            &(&num * lam) / &den
        }
        FamilyTag::TypeA | FamilyTag::EinsteinKundu1 => {
            let ce = spec.type_a_equation_constant();
            &(&(&t1.powi(3) * p.eps) + ce) * (p.eps * lam / 3.0) / t1.powi(3)
        }
        FamilyTag::CaseII2 => &t1.powf(-1.5) * -0.25,
    })
}
