use super::{
    default_window, CatalogError, FamilySpec, FamilyTag, Params, Slot, TypeAReading, TypeBCross, TypeBEquation,
    Variants,
};
use crate::fields::ScalarField;
use crate::pde::solve_r_ode;

pub const AUXILIARY_NAMES: [&str; 13] = [
    "liouville_flat",
    "liouville_disc",
    "liouville_sphere",
    "r_blowup",
    "s_bprime",
    "s_aprime_linear",
    "psi_typeb_printed",
    "psi_typeb_transformed",
    "psi_typea",
    "psi_ii2",
    "psi_ii3",
    "psi_kundu2",
    "psi_constant",
];

fn wrong(name: &str, message: &str) -> CatalogError {
    CatalogError::Constraint { family: "auxiliary", message: format!("{name}: {message}") }
}

/// Closed-form particular solutions of the constraint equations, as arity-2
/// fields of `(t1, t2)`.
///
/// | name | field | solves |
/// |---|---|---|
/// | `liouville_flat` | `P = 0` | Liouville, `Λ = 0` |
/// | `liouville_disc` | `e^{−2P} = 4/(−Λ(1−t1²−t2²)²)` | Liouville, `Λ < 0`, `ε0 = 1` |
/// | `liouville_sphere` | `e^{−2P} = 4/(Λ(1+t1²+t2²)²)` | Liouville, `Λ > 0`, `ε0 = 1` |
/// | `r_blowup` | `R = 4/(k−t1)²` | `R′ = R^{3/2}` |
/// | `s_bprime` | `−ε0(k−t1)⁶/(96Λ) + (2a2/Λ) ln(k−t1)` | B′ S equation |
/// | `s_aprime_linear` | `0.3 + 0.2 t2` | A′ S equation with `a2 = 0` |
/// | `psi_typeb_printed` | `−ε0Λt1⁷/21 + 6a2t1/Λ` | printed Type B ψ equation |
/// | `psi_typeb_transformed` | `−2ε0Λt1⁶/27 + (4a2/Λ) ln t1` | transformed Type B ψ equation |
/// | `psi_typea` | `(2a2/(3εΛ)) ln(ε(εt1³ + c))` | Type A ψ equation |
/// | `psi_ii2` | `(8a2/9) t1^{3/2}` | Case II-2 ψ equation |
/// | `psi_ii3` | `(ε0c² + 2a_slope) t1²/2` | Case II-3 with `Λ = 0`, `P = 0` |
/// | `psi_kundu2` | `t1³ + t2` | homogeneous Type B Einstein equation |
/// | `psi_constant` | `1` | any homogeneous ψ equation |
///
/// The Type A `c` is the equation constant of the selected reading.
pub fn closed_form_auxiliaries(name: &str, p: &Params, variants: &Variants) -> Result<ScalarField, CatalogError> {
    let (t1, t2) = (ScalarField::t1(), ScalarField::t2());
    let lam = p.lambda;
    let r2 = &t1.powi(2) + &t2.powi(2);
    let u = &(-&t1) + p.k;
    Ok(match name {
        "liouville_flat" => {
            if lam != 0.0 {
                return Err(wrong(name, "requires Λ = 0"));
            }
            ScalarField::zero(2)
        }
        "liouville_disc" => {
            if !(lam < 0.0 && p.eps0 == 1.0) {
                return Err(wrong(name, "requires Λ < 0 and ε0 = 1"));
            }
            &(&(-&r2) + 1.0).ln() + 0.5 * (-lam / 4.0).ln()
        }
        "liouville_sphere" => {
            if !(lam > 0.0 && p.eps0 == 1.0) {
                return Err(wrong(name, "requires Λ > 0 and ε0 = 1"));
            }
            &(&r2 + 1.0).ln() + 0.5 * (lam / 4.0).ln()
        }
        "r_blowup" => &u.powi(2).recip() * 4.0,
        "s_bprime" => {
            if lam == 0.0 {
                return Err(wrong(name, "requires Λ ≠ 0"));
            }
            &(&u.powi(6) * (-p.eps0 / (96.0 * lam))) + &(&u.ln() * (2.0 * p.a2 / lam))
        }
        "s_aprime_linear" => &(&t2 * 0.2) + 0.3,
        "psi_typeb_printed" => &(&t1.powi(7) * (-p.eps0 * lam / 21.0)) + &(&t1 * (6.0 * p.a2 / lam)),
        "psi_typeb_transformed" => &(&t1.powi(6) * (-2.0 * p.eps0 * lam / 27.0)) + &(&t1.ln() * (4.0 * p.a2 / lam)),
        "psi_typea" => {
            let spec = FamilySpec::new(FamilyTag::TypeA, *p).with_variants(*variants);
            let ce = spec.type_a_equation_constant();
            let arg = &(&(&t1.powi(3) * p.eps) + ce) * p.eps;
            &arg.ln() * (2.0 * p.a2 / (3.0 * p.eps * lam))
        }
        "psi_ii2" => &t1.powf(1.5) * (8.0 * p.a2 / 9.0),
        "psi_ii3" => &t1.powi(2) * ((p.eps0 * p.c * p.c + 2.0 * p.a_slope) / 2.0),
        "psi_kundu2" => &t1.powi(3) + &t2,
        "psi_constant" => ScalarField::constant(2, 1.0),
        _ => return Err(CatalogError::UnknownAuxiliary(name.to_string())),
    })
}

/// A closed-form instance of a family together with its verification
/// window.
#[derive(Debug, Clone)]
pub struct Fixture {
    pub spec: FamilySpec,
    pub window: [f64; 4],
}

/// Smooth bump centred in `window`, used for negative controls.
pub fn bump(window: [f64; 4]) -> ScalarField {
    let (t1, t2) = (ScalarField::t1(), ScalarField::t2());
    let (m1, m2) = (0.5 * (window[0] + window[1]), 0.5 * (window[2] + window[3]));
    let (w1, w2) = (0.25 * (window[1] - window[0]), 0.25 * (window[3] - window[2]));
    let q = &(&(&t1 - m1) / w1).powi(2) + &(&(&t2 - m2) / w2).powi(2);
    (-&q).exp()
}

/// The standard closed-form fixture of each family.
pub fn standard_fixture(tag: FamilyTag) -> Fixture {
    let base = Params { a1: 0.3, a3: -0.2, ..Params::default() };
    let aux = |name: &str, p: &Params, v: &Variants| closed_form_auxiliaries(name, p, v).expect("fixture auxiliary");
    let v = Variants::default();
    let spec = match tag {
        FamilyTag::CaseI => {
            let p = Params { lambda: 0.0, c: 1.0, a2: 0.4, ..base };
            FamilySpec::new(tag, p).with_slot(Slot::P, aux("liouville_flat", &p, &v))
        }
        FamilyTag::TypeAprime => {
            let p = Params { lambda: -2.0, c: -0.5, ..base };
            let r = solve_r_ode(p.c, 1.0, 0.0, 1.0, 1e-4, true).expect("A' fixture ODE").t1_field();
            FamilySpec::new(tag, p).with_slot(Slot::R, r).with_slot(Slot::S, aux("s_aprime_linear", &p, &v))
        }
        FamilyTag::TypeBprime => {
            let p = Params { lambda: -2.0, k: 3.0, ..base };
            FamilySpec::new(tag, p)
                .with_slot(Slot::R, aux("r_blowup", &p, &v))
                .with_slot(Slot::S, aux("s_bprime", &p, &v))
        }
        FamilyTag::TypeA => {
            let p = Params { lambda: -2.0, c1: 1.5, a2: 1.0, ..base };
            FamilySpec::new(tag, p).with_slot(Slot::Psi, aux("psi_typea", &p, &v))
        }
        FamilyTag::TypeB => {
            let p = Params { lambda: -3.0, ..base };
            let v = Variants { type_b_cross: TypeBCross::T1, type_b_equation: TypeBEquation::Transformed, ..v };
            FamilySpec::new(tag, p).with_variants(v).with_slot(Slot::Psi, aux("psi_typeb_transformed", &p, &v))
        }
        FamilyTag::CaseII2 => {
            let p = Params { lambda: 0.0, a2: 1.0, ..base };
            FamilySpec::new(tag, p).with_slot(Slot::Psi, aux("psi_ii2", &p, &v))
        }
        FamilyTag::CaseII3 => {
            let p = Params { lambda: 0.0, c: 1.5, a: 0.3, a_slope: 0.5, a_offset: -0.2, ..base };
            FamilySpec::new(tag, p)
                .with_slot(Slot::P, aux("liouville_flat", &p, &v))
                .with_slot(Slot::Psi, aux("psi_ii3", &p, &v))
        }
        FamilyTag::EinsteinKundu1 => {
            let p = Params { lambda: -2.0, c1: 1.5, ..base };
            let v = Variants { type_a_reading: TypeAReading::EquationCoefficient, ..v };
            FamilySpec::new(tag, p).with_variants(v).with_slot(Slot::Psi, aux("psi_constant", &p, &v))
        }
        FamilyTag::EinsteinKundu2 => {
            let p = Params { lambda: -3.0, ..base };
            FamilySpec::new(tag, p).with_slot(Slot::Psi, aux("psi_kundu2", &p, &v))
        }
    };
    let window = default_window(tag, &spec.params);
    Fixture { spec, window }
}
