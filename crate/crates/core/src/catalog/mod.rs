//! Constructors for the classified soliton families.
//!
//! Every metric is written once in adapted block form
//! `g = b dt dt + 2 f_ik dt_i dz_k + h dz dz`, so a printed cross term
//! `2 u dt1 dz1` becomes `f11 = u` and `v dz1 dz2` becomes `h12 = v / 2`.

mod equations;
mod fixtures;

pub use equations::{constraint_residual, orbit_curvature, slot_equation, SlotEquation};
pub use fixtures::{bump, closed_form_auxiliaries, standard_fixture, Fixture, AUXILIARY_NAMES};

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::fields::{AntiderivativeT2, FieldError, GridField, ScalarField};
use crate::geometry::{AdaptedMetric, Exclusion, SolitonInstance, SolitonVectorField, SymBlock};
use crate::pde::PdeError;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CatalogError {
    #[error("{family}: {message}")]
    Constraint { family: &'static str, message: String },
    #[error("{family}: slot {slot} is required")]
    MissingSlot { family: &'static str, slot: Slot },
    #[error("slot {slot} must have arity 2, got {arity}")]
    SlotArity { slot: Slot, arity: usize },
    #[error("unknown closed-form auxiliary '{0}'")]
    UnknownAuxiliary(String),
    #[error("{family}: unknown variant '{name}' (available: {available})")]
    UnknownVariant { family: &'static str, name: String, available: String },
    #[error("unknown family '{0}'")]
    UnknownFamily(String),
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    Pde(#[from] PdeError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum FamilyTag {
    CaseI,
    TypeAprime,
    TypeBprime,
    TypeA,
    TypeB,
    CaseII2,
    CaseII3,
    EinsteinKundu1,
    EinsteinKundu2,
}

impl FamilyTag {
    pub const ALL: [FamilyTag; 9] = [
        FamilyTag::CaseI,
        FamilyTag::TypeAprime,
        FamilyTag::TypeBprime,
        FamilyTag::TypeA,
        FamilyTag::TypeB,
        FamilyTag::CaseII2,
        FamilyTag::CaseII3,
        FamilyTag::EinsteinKundu1,
        FamilyTag::EinsteinKundu2,
    ];

    pub fn name(self) -> &'static str {
        match self {
            FamilyTag::CaseI => "CaseI",
            FamilyTag::TypeAprime => "TypeAprime",
            FamilyTag::TypeBprime => "TypeBprime",
            FamilyTag::TypeA => "TypeA",
            FamilyTag::TypeB => "TypeB",
            FamilyTag::CaseII2 => "CaseII2",
            FamilyTag::CaseII3 => "CaseII3",
            FamilyTag::EinsteinKundu1 => "EinsteinKundu1",
            FamilyTag::EinsteinKundu2 => "EinsteinKundu2",
        }
    }

    pub fn required_slots(self) -> &'static [Slot] {
        match self {
            FamilyTag::CaseI => &[Slot::P],
            FamilyTag::TypeAprime | FamilyTag::TypeBprime => &[Slot::R, Slot::S],
            FamilyTag::CaseII3 => &[Slot::P, Slot::Psi],
            _ => &[Slot::Psi],
        }
    }

    /// Parameter invariants, as checked by [`build_family`].
    pub fn invariants(self) -> &'static str {
        match self {
            FamilyTag::CaseI => "eps0 = ±1",
            FamilyTag::TypeAprime => "Λ<0, c≠0, R>0, R^{3/2}+c>0",
            FamilyTag::TypeBprime => "Λ<0, R>0",
            FamilyTag::TypeA => "Λ<0, c1≠0, eps = ±1",
            FamilyTag::TypeB => "Λ<0",
            FamilyTag::CaseII2 => "Λ=0",
            FamilyTag::CaseII3 => "c≠0",
            FamilyTag::EinsteinKundu1 => "Λ<0, c1≠0, a2=0",
            FamilyTag::EinsteinKundu2 => "Λ<0, a2=0",
        }
    }

    pub fn constraint_names(self) -> &'static [&'static str] {
        match self {
            FamilyTag::CaseI => &["liouville"],
            FamilyTag::TypeAprime | FamilyTag::TypeBprime => &["r_ode", "s_equation"],
            FamilyTag::CaseII3 => &["liouville", "psi_equation"],
            _ => &["psi_equation"],
        }
    }

    pub fn claims(self) -> &'static [&'static str] {
        match self {
            FamilyTag::CaseI | FamilyTag::CaseII3 => &["soliton_residual", "orbit_gauss_curvature = Λ", "intransitive"],
            FamilyTag::TypeAprime => &["soliton_residual", "orbit_gauss_curvature = K(R)", "expanding", "intransitive"],
            FamilyTag::TypeBprime | FamilyTag::TypeB => {
                &["soliton_residual", "orbit_gauss_curvature = Λ/3", "expanding", "intransitive"]
            }
            FamilyTag::TypeA => &["soliton_residual", "orbit_gauss_curvature = K(t1)", "expanding", "intransitive"],
            FamilyTag::CaseII2 => &["soliton_residual", "orbit_gauss_curvature = -t1^{-3/2}/4", "intransitive"],
            FamilyTag::EinsteinKundu1 => &["einstein", "orbit_gauss_curvature = K(t1)", "intransitive"],
            FamilyTag::EinsteinKundu2 => &["einstein", "orbit_gauss_curvature = Λ/3", "intransitive"],
        }
    }

    /// Names accepted by [`Variants::select`].
    pub fn variant_names(self) -> &'static [&'static str] {
        match self {
            FamilyTag::TypeB => &["t1", "t2"],
            FamilyTag::TypeA | FamilyTag::EinsteinKundu1 => &["verbatim", "metric_coefficient", "equation_coefficient"],
            _ => &[],
        }
    }
}

impl fmt::Display for FamilyTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for FamilyTag {
    type Err = CatalogError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        FamilyTag::ALL
            .into_iter()
            .find(|t| t.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| CatalogError::UnknownFamily(s.to_string()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Slot {
    P,
    #[serde(rename = "psi")]
    Psi,
    S,
    R,
}

impl fmt::Display for Slot {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Slot::P => "P",
            Slot::Psi => "psi",
            Slot::S => "S",
            Slot::R => "R",
        })
    }
}

impl FromStr for Slot {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "P" => Ok(Slot::P),
            "psi" => Ok(Slot::Psi),
            "S" => Ok(Slot::S),
            "R" => Ok(Slot::R),
            _ => Err(format!("unknown slot '{s}' (expected P, psi, S or R)")),
        }
    }
}

/// Family constants. `a_slope` and `a_offset` describe the affine profile
/// `A(z1) = a_slope z1 + a_offset` of Case II-3.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Params {
    pub lambda: f64,
    pub eps0: f64,
    pub eps: f64,
    pub c: f64,
    pub c1: f64,
    pub k: f64,
    pub a: f64,
    pub a1: f64,
    pub a2: f64,
    pub a3: f64,
    pub a_slope: f64,
    pub a_offset: f64,
}

impl Default for Params {
    fn default() -> Self {
        Self {
            lambda: 0.0,
            eps0: 1.0,
            eps: 1.0,
            c: 0.0,
            c1: 1.0,
            k: 0.0,
            a: 0.0,
            a1: 0.0,
            a2: 0.0,
            a3: 0.0,
            a_slope: 0.0,
            a_offset: 0.0,
        }
    }
}

/// The `dz1 dz2` coefficient of Type B: `1/t1²` or `1/t2²`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TypeBCross {
    #[default]
    T1,
    T2,
}

/// Source term of the Type B ψ equation: as printed (`t1⁵`, `1/t1`) or as
/// obtained by pushing the Type B′ equation through the coordinate map
/// (`t1⁴`, `1/t1²`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TypeBEquation {
    Printed,
    #[default]
    Transformed,
}

/// How the Type A constant enters.
///
/// `Verbatim`: metric with `c1²t1³ + 1`, equation and curvature with
/// `εt1³ + c1`. `EquationCoefficient`: metric as printed, equation and
/// curvature with `c1` replaced by `ε/c1²`. `MetricCoefficient`: equation as
/// printed, metric with `c1²` replaced by `ε/c1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TypeAReading {
    Verbatim,
    MetricCoefficient,
    #[default]
    EquationCoefficient,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Variants {
    pub type_b_cross: TypeBCross,
    pub type_b_equation: TypeBEquation,
    pub type_a_reading: TypeAReading,
}

impl Variants {
    /// Sets the switch named `name` for `tag`. Families without printed
    /// alternatives accept no name.
    pub fn select(mut self, tag: FamilyTag, name: &str) -> Result<Self, CatalogError> {
        let unknown = || CatalogError::UnknownVariant {
            family: tag.name(),
            name: name.to_string(),
            available: if tag.variant_names().is_empty() { "none".into() } else { tag.variant_names().join(", ") },
        };
        match (tag, name) {
            (FamilyTag::TypeB, "t1") => self.type_b_cross = TypeBCross::T1,
            (FamilyTag::TypeB, "t2") => self.type_b_cross = TypeBCross::T2,
            (FamilyTag::TypeA | FamilyTag::EinsteinKundu1, _) => {
                self.type_a_reading = match name {
                    "verbatim" => TypeAReading::Verbatim,
                    "metric_coefficient" => TypeAReading::MetricCoefficient,
                    "equation_coefficient" => TypeAReading::EquationCoefficient,
                    _ => return Err(unknown()),
                }
            }
            _ => return Err(unknown()),
        }
        Ok(self)
    }

    /// Label of the switch that `tag` actually reads.
    pub fn label(&self, tag: FamilyTag) -> Option<&'static str> {
        match tag {
            FamilyTag::TypeB => Some(match self.type_b_cross {
                TypeBCross::T1 => "t1",
                TypeBCross::T2 => "t2",
            }),
            FamilyTag::TypeA | FamilyTag::EinsteinKundu1 => Some(match self.type_a_reading {
                TypeAReading::Verbatim => "verbatim",
                TypeAReading::MetricCoefficient => "metric_coefficient",
                TypeAReading::EquationCoefficient => "equation_coefficient",
            }),
            _ => None,
        }
    }
}

/// A family with its constants and function slots.
#[derive(Debug, Clone)]
pub struct FamilySpec {
    pub tag: FamilyTag,
    pub params: Params,
    pub variants: Variants,
    pub slots: BTreeMap<Slot, ScalarField>,
    /// Lower limit of `∫ e^{−2P} dt2` for closed-form `P`. Grid-backed `P`
    /// is integrated from the first grid row.
    pub t2_base: f64,
    /// Exclusion margin in grid cells around singular loci.
    pub margin: usize,
}

impl FamilySpec {
    pub fn new(tag: FamilyTag, params: Params) -> Self {
        Self { tag, params, variants: Variants::default(), slots: BTreeMap::new(), t2_base: 0.0, margin: 3 }
    }

    pub fn with_slot(mut self, slot: Slot, field: ScalarField) -> Self {
        self.slots.insert(slot, field);
        self
    }

    pub fn with_variants(mut self, variants: Variants) -> Self {
        self.variants = variants;
        self
    }

    pub fn slot(&self, slot: Slot) -> Result<&ScalarField, CatalogError> {
        let f = self.slots.get(&slot).ok_or(CatalogError::MissingSlot { family: self.tag.name(), slot })?;
        if f.arity() != 2 {
            return Err(CatalogError::SlotArity { slot, arity: f.arity() });
        }
        Ok(f)
    }

    /// Adds `delta * shape` to a slot.
    pub fn perturbed(&self, slot: Slot, delta: f64, shape: &ScalarField) -> Result<Self, CatalogError> {
        let base = self.slot(slot)?.clone();
        let mut out = self.clone();
        out.slots.insert(slot, &base + &(shape * delta));
        Ok(out)
    }

    /// The constant of the Type A ψ equation and curvature formula.
    pub(crate) fn type_a_equation_constant(&self) -> f64 {
        let p = &self.params;
        match self.variants.type_a_reading {
            TypeAReading::EquationCoefficient => p.eps / (p.c1 * p.c1),
            TypeAReading::Verbatim | TypeAReading::MetricCoefficient => p.c1,
        }
    }
}

fn require(family: FamilyTag, ok: bool, message: &str) -> Result<(), CatalogError> {
    if ok {
        Ok(())
    } else {
        Err(CatalogError::Constraint { family: family.name(), message: message.to_string() })
    }
}

pub fn check_params(tag: FamilyTag, p: &Params) -> Result<(), CatalogError> {
    let unit = |v: f64| v == 1.0 || v == -1.0;
    require(tag, unit(p.eps0), "ε0 = ±1 required")?;
    require(tag, unit(p.eps), "ε = ±1 required")?;
    let all_finite =
        [p.lambda, p.c, p.c1, p.k, p.a, p.a1, p.a2, p.a3, p.a_slope, p.a_offset].iter().all(|v| v.is_finite());
    require(tag, all_finite, "parameters must be finite")?;
    match tag {
        FamilyTag::CaseI => Ok(()),
        FamilyTag::TypeAprime => {
            require(tag, p.lambda < 0.0, "Λ<0 required")?;
            require(tag, p.c != 0.0, "c≠0 required")
        }
        FamilyTag::TypeBprime | FamilyTag::TypeB => require(tag, p.lambda < 0.0, "Λ<0 required"),
        FamilyTag::TypeA => {
            require(tag, p.lambda < 0.0, "Λ<0 required")?;
            require(tag, p.c1 != 0.0, "c1≠0 required")
        }
        FamilyTag::CaseII2 => require(tag, p.lambda == 0.0, "Λ=0 required"),
        FamilyTag::CaseII3 => require(tag, p.c != 0.0, "c≠0 required"),
        FamilyTag::EinsteinKundu1 => {
            require(tag, p.lambda < 0.0, "Λ<0 required")?;
            require(tag, p.c1 != 0.0, "c1≠0 required")?;
            require(tag, p.a2 == 0.0, "a2=0 required")
        }
        FamilyTag::EinsteinKundu2 => {
            require(tag, p.lambda < 0.0, "Λ<0 required")?;
            require(tag, p.a2 == 0.0, "a2=0 required")
        }
    }
}

/// `∫ e^{−2P} dt2` from `base`: exact for constant `P`, by Gauss–Legendre
/// quadrature for closed-form `P`, and by the cumulative trapezoid rule
/// along grid columns for a grid-backed `P`.
pub fn t2_integral(p: &ScalarField, base: f64) -> Result<ScalarField, CatalogError> {
    let e = (p * -2.0).exp();
    if let Some(v) = p.as_constant() {
        return Ok(&(ScalarField::t2() - base) * (-2.0 * v).exp());
    }
    if p.is_symbolic() {
        return Ok(AntiderivativeT2::field(e, base));
    }
    let Some(g) = p.as_grid() else {
        return Err(CatalogError::Field(FieldError::Other(
            "P must be closed-form or a bare grid field to integrate e^{-2P} in t2".into(),
        )));
    };
    let grid = g.grid().clone();
    let mut values = vec![0.0; grid.len()];
    for i in 0..grid.n1 {
        for j in 1..grid.n2 {
            let (lo, hi) = (g.at(i, j - 1), g.at(i, j));
            values[grid.index(i, j)] =
                values[grid.index(i, j - 1)] + 0.5 * grid.h2 * ((-2.0 * lo).exp() + (-2.0 * hi).exp());
        }
    }
    Ok(ScalarField::from_grid(GridField::new(grid, values)?))
}

/// `(M, prefactor)` of the Type A orbit metric
/// `b11 = −prefactor/(Λ M)`, `b22 = ε0 M / t1`.
fn type_a_metric_factors(spec: &FamilySpec) -> (ScalarField, ScalarField) {
    let p = &spec.params;
    let t1 = ScalarField::t1();
    let t1_3 = t1.powi(3);
    match spec.variants.type_a_reading {
        TypeAReading::Verbatim | TypeAReading::EquationCoefficient => {
            let c1s = p.c1 * p.c1;
            (&(&t1_3 * c1s) + 1.0, &t1 * (3.0 * c1s))
        }
        TypeAReading::MetricCoefficient => (&(&(&t1_3 * p.eps) + p.c1) / p.c1, &t1 * (3.0 * p.eps / p.c1)),
    }
}

fn type_a_orbit(spec: &FamilySpec) -> SymBlock {
    let p = &spec.params;
    let t1 = ScalarField::t1();
    let (m, pref) = type_a_metric_factors(spec);
    SymBlock::diag(-&(&pref / &(&m * p.lambda)), &(&m * p.eps0) / &t1)
}

fn zero() -> ScalarField {
    ScalarField::zero(2)
}

fn shear_field(p: &Params, slope: f64) -> SolitonVectorField {
    SolitonVectorField::affine([[0.0, 0.0], [slope, 0.0]], [p.a1, p.a3])
}

/// Builds the metric and soliton field of `spec`.
pub fn build_family(spec: &FamilySpec) -> Result<SolitonInstance, CatalogError> {
    let tag = spec.tag;
    let p = spec.params;
    check_params(tag, &p)?;
    for &s in tag.required_slots() {
        spec.slot(s)?;
    }
    let (t1, t2) = (ScalarField::t1(), ScalarField::t2());
    let lam = p.lambda;
    let (metric, field) = match tag {
        FamilyTag::CaseI => {
            let pf = spec.slot(Slot::P)?;
            let e = (pf * -2.0).exp();
            let i = t2_integral(pf, spec.t2_base)?;
            let metric = AdaptedMetric::new(
                SymBlock::diag(e.clone(), &e * p.eps0),
                [[&i * -p.c, i.clone()], [zero(), zero()]],
                SymBlock::new(ScalarField::constant(2, -2.0 * p.c), ScalarField::constant(2, 1.0), zero()),
            );
            let (e0, c) = (p.eps0, p.c);
            let field = SolitonVectorField::affine(
                [[e0 * c / 2.0, -e0 / 2.0], [e0 * c * c / 2.0 - 2.0 * lam * c, 2.0 * lam - e0 * c / 2.0]],
                [p.a1, p.a2],
            );
            (metric, field)
        }
        FamilyTag::TypeAprime => {
            let (r, s) = (spec.slot(Slot::R)?, spec.slot(Slot::S)?);
            let r32 = r.powf(1.5);
            let q = &r32 + p.c;
            let sr = r.sqrt();
            let b11 = &q * &sr.recip() * (-3.0 / (4.0 * lam));
            let f11 = &(&t2 * (-3.0 / (2.0 * lam))) * &(&(p.c / &r32) + 1.0);
            let h11 = &(&(&(&r.powi(2) * s) - &(&sr * p.eps0)) / r) * (4.0 / (3.0 * p.c * lam));
            let metric = AdaptedMetric::new(
                SymBlock::diag(b11.clone(), &b11 * p.eps0),
                [[f11, zero()], [zero(), zero()]],
                SymBlock::new(h11, r.clone(), zero()),
            );
            (metric, shear_field(&p, 4.0 * p.a2 / (3.0 * p.c * lam)))
        }
        FamilyTag::TypeBprime => {
            let (r, s) = (spec.slot(Slot::R)?, spec.slot(Slot::S)?);
            let b11 = r * (-3.0 / (4.0 * lam));
            let metric = AdaptedMetric::new(
                SymBlock::diag(b11.clone(), &b11 * p.eps0),
                [[&t2 * (-3.0 / (2.0 * lam)), zero()], [zero(), zero()]],
                SymBlock::new(s * r, r.clone(), zero()),
            );
            (metric, shear_field(&p, p.a2))
        }
        FamilyTag::TypeA => {
            let psi = spec.slot(Slot::Psi)?;
            let h11 = &(&(&(psi * &t1.powi(3)) * p.eps) + p.eps0) / &t1;
            let metric = AdaptedMetric::new(
                type_a_orbit(spec),
                [[&(&t2 * (-3.0 * p.eps)) / &t1.powi(2), zero()], [zero(), zero()]],
                SymBlock::new(h11, -&t1.powi(2), zero()),
            );
            (metric, shear_field(&p, p.a2))
        }
        FamilyTag::TypeB => {
            let psi = spec.slot(Slot::Psi)?;
            let b11 = &t1.powi(2).recip() * (-3.0 / lam);
            let cross = match spec.variants.type_b_cross {
                TypeBCross::T1 => &t1,
                TypeBCross::T2 => &t2,
            };
            let metric = AdaptedMetric::new(
                SymBlock::diag(b11.clone(), &b11 * p.eps0),
                [[t2.clone(), zero()], [zero(), zero()]],
                SymBlock::new(psi / &(&t1.powi(2) * 4.0), (&cross.powi(2) * 2.0).recip(), zero()),
            );
            (metric, shear_field(&p, p.a2))
        }
        FamilyTag::CaseII2 => {
            let psi = spec.slot(Slot::Psi)?;
            let b11 = t1.powf(-0.5);
            let metric = AdaptedMetric::new(
                SymBlock::diag(b11.clone(), &b11 * p.eps0),
                [[&t2 * &t1.powf(-1.5), zero()], [zero(), zero()]],
                SymBlock::new(&(psi * &t1) + &(&b11 * (4.0 * p.eps0 / 9.0)), t1.clone(), zero()),
            );
            (metric, shear_field(&p, p.a2))
        }
        FamilyTag::CaseII3 => {
            let (pf, psi) = (spec.slot(Slot::P)?, spec.slot(Slot::Psi)?);
            let e = (pf * -2.0).exp();
            let i = t2_integral(pf, spec.t2_base)?;
            let metric = AdaptedMetric::new(
                SymBlock::diag(e.clone(), &e * p.eps0),
                [[&i * p.c, zero()], [zero(), zero()]],
                SymBlock::new(psi.clone(), ScalarField::constant(2, 1.0), zero()),
            );
            let field = SolitonVectorField::affine([[2.0 * lam, 0.0], [p.a_slope, 0.0]], [p.a, p.a_offset]);
            (metric, field)
        }
        FamilyTag::EinsteinKundu1 => {
            let psi = spec.slot(Slot::Psi)?;
            let h11 = &(&(&(psi * &t1.powi(3)) * p.eps) + p.eps0) / &t1;
            let metric = AdaptedMetric::new(
                type_a_orbit(spec),
                [[zero(), zero()], [&t1.recip() * p.eps, zero()]],
                SymBlock::new(h11, t1.powi(2), zero()),
            );
            (metric, SolitonVectorField::zero())
        }
        FamilyTag::EinsteinKundu2 => {
            let psi = spec.slot(Slot::Psi)?;
            let inv2 = t1.powi(2).recip();
            let metric = AdaptedMetric::new(
                SymBlock::diag(&inv2 * (-3.0 / lam), &inv2 * p.eps0),
                [[zero(), zero()], [t1.clone(), zero()]],
                SymBlock::new(&(&t1.powi(6) + psi) * &(&inv2 * 0.5), inv2.clone(), zero()),
            );
            (metric, SolitonVectorField::zero())
        }
    };
    Ok(SolitonInstance { metric, field, lambda: lam, eps0: p.eps0, exclusions: exclusions(spec) })
}

/// Singular loci kept away from verification grids.
pub fn exclusions(spec: &FamilySpec) -> Vec<Exclusion> {
    let p = spec.params;
    let m = spec.margin;
    let mut out = Vec::new();
    match spec.tag {
        FamilyTag::TypeA | FamilyTag::EinsteinKundu1 => {
            out.push(Exclusion::new("t1 = 0", m, |a, _| a));
            let c_eq = spec.type_a_equation_constant();
            out.push(Exclusion::new("eps t1^3 + c1 = 0", m, move |a, _| p.eps * a.powi(3) + c_eq));
            let (m_fac, _) = type_a_metric_factors(spec);
            out.push(Exclusion::new("orbit factor = 0", m, move |a, b| m_fac.eval(&[a, b]).unwrap_or(f64::NAN)));
        }
        FamilyTag::TypeB => {
            out.push(Exclusion::new("t1 = 0", m, |a, _| a));
            if spec.variants.type_b_cross == TypeBCross::T2 {
                out.push(Exclusion::new("t2 = 0", m, |_, b| b));
            }
        }
        FamilyTag::CaseII2 | FamilyTag::EinsteinKundu2 => out.push(Exclusion::new("t1 = 0", m, |a, _| a)),
        _ => {}
    }
    out
}

/// Verification window `[t1_min, t1_max, t2_min, t2_max]` clear of the
/// singular loci of the standard fixtures.
pub fn default_window(tag: FamilyTag, params: &Params) -> [f64; 4] {
    match tag {
        FamilyTag::CaseI | FamilyTag::CaseII3 if params.lambda < 0.0 => [-0.35, 0.35, -0.35, 0.35],
        FamilyTag::TypeAprime => [0.0, 1.0, 0.0, 1.0],
        FamilyTag::TypeBprime => {
            let k = if params.k > 2.0 { params.k } else { 3.0 };
            [k - 2.0, k - 1.0, 0.0, 1.0]
        }
        _ => [1.0, 2.0, 1.0, 2.0],
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::Grid2;
    use crate::geometry::residual_scan;

    #[test]
    fn type_b_metric_entry() {
        let fx = standard_fixture(FamilyTag::TypeB);
        let mut spec = fx.spec;
        spec.params.lambda = -3.0;
        let inst = build_family(&spec).unwrap();
        let g = inst.metric.values(&[1.0, 1.0, 0.0, 0.0]).unwrap();
        assert!((g[0][0] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn case_i_killing_block() {
        let fx = standard_fixture(FamilyTag::CaseI);
        let inst = build_family(&fx.spec).unwrap();
        for t in [[1.0, 1.0], [1.7, 0.2]] {
            let g = inst.metric.values(&[t[0], t[1], 0.3, 0.1]).unwrap();
            assert_eq!([g[2][2], g[2][3], g[3][3]], [-2.0, 1.0, 0.0]);
        }
    }

    #[test]
    fn parameter_errors_name_the_invariant() {
        let mut spec = standard_fixture(FamilyTag::TypeB).spec;
        spec.params.lambda = 1.0;
        let err = build_family(&spec).unwrap_err();
        assert!(err.to_string().contains("Λ<0 required"), "{err}");
        let mut spec = standard_fixture(FamilyTag::CaseII2).spec;
        spec.params.lambda = -1.0;
        assert!(build_family(&spec).unwrap_err().to_string().contains("Λ=0 required"));
        let mut spec = standard_fixture(FamilyTag::CaseII3).spec;
        spec.params.c = 0.0;
        assert!(build_family(&spec).unwrap_err().to_string().contains("c≠0 required"));
    }

    #[test]
    fn missing_slot_is_reported() {
        let spec = FamilySpec::new(FamilyTag::TypeB, Params { lambda: -3.0, ..Params::default() });
        assert!(matches!(build_family(&spec), Err(CatalogError::MissingSlot { slot: Slot::Psi, .. })));
    }

    #[test]
    fn variant_selection() {
        let v = Variants::default();
        assert_eq!(v.select(FamilyTag::TypeB, "t2").unwrap().type_b_cross, TypeBCross::T2);
        assert!(v.select(FamilyTag::CaseI, "t1").is_err());
        assert!(v.select(FamilyTag::TypeA, "t1").is_err());
        assert_eq!(v.select(FamilyTag::TypeA, "verbatim").unwrap().label(FamilyTag::TypeA), Some("verbatim"));
    }

    #[test]
    fn tags_round_trip() {
        for t in FamilyTag::ALL {
            assert_eq!(t.name().parse::<FamilyTag>().unwrap(), t);
        }
        assert!("TypeC".parse::<FamilyTag>().is_err());
    }

    #[test]
    fn grid_integral_matches_closed_form() {
        // P = t1 t2 / 4: ∫_0^{t2} e^{-t1 s/2} ds = 2(1 - e^{-t1 t2/2})/t1
        let grid = Grid2::from_window([1.0, 2.0, 0.0, 1.0], 81, 81).unwrap();
        let pg = GridField::sample(&grid, |a, b| a * b / 4.0);
        let i = t2_integral(&ScalarField::from_grid(pg), 0.0).unwrap();
        let exact = |a: f64, b: f64| 2.0 * (1.0 - (-a * b / 2.0).exp()) / a;
        let [a, b] = grid.node(40, 60);
        assert!((i.eval(&[a, b]).unwrap() - exact(a, b)).abs() < 1e-5);
    }

    #[test]
    fn type_b_cross_term_residuals_differ() {
        let fx = standard_fixture(FamilyTag::TypeB);
        let grid = Grid2::from_window(fx.window, 9, 9).unwrap();
        let t1 = residual_scan(&build_family(&fx.spec).unwrap(), &grid, [0.0, 0.0]).unwrap();
        let spec2 = fx.spec.clone().with_variants(fx.spec.variants.select(FamilyTag::TypeB, "t2").unwrap());
        let t2 = residual_scan(&build_family(&spec2).unwrap(), &grid, [0.0, 0.0]).unwrap();
        assert!(t1.sup_norm < 1e-9, "{}", t1.sup_norm);
        assert!(t2.sup_norm > 1e-3, "{}", t2.sup_norm);
    }
}

#[cfg(test)]
mod theorem_tests {
    use super::*;
    use crate::fields::Grid2;
    use crate::geometry::{
        gauss_curvature_2d, geroch_decompose, residual_scan, validate_assumptions, AssumptionTolerances,
    };

    #[test]
    fn every_fixture_is_a_soliton_with_the_printed_orbit_curvature() {
        for tag in FamilyTag::ALL {
            let fx = standard_fixture(tag);
            let inst = build_family(&fx.spec).unwrap();
            let grid = Grid2::from_window(fx.window, 13, 13).unwrap();
            let rep = residual_scan(&inst, &grid, [0.4, -0.7]).unwrap();
            let k_expected = orbit_curvature(&fx.spec).unwrap();
            let gd = geroch_decompose(&inst.metric).unwrap();
            let mut k_err = 0.0f64;
            for (i, j) in grid.nodes() {
                let t = grid.node(i, j);
                k_err = k_err.max((gauss_curvature_2d(&gd.orbit, t).unwrap() - k_expected.eval(&t).unwrap()).abs());
            }
            let checks = validate_assumptions(&inst, &grid, [0.4, -0.7], &AssumptionTolerances::default()).unwrap();
            println!("{tag}: residual {:.3e} K {:.3e} assumptions {}", rep.sup_norm, k_err, checks.all_pass());
            assert!(rep.sup_norm <= 1e-9, "{tag}: residual {:e}", rep.sup_norm);
            assert!(k_err <= 1e-8, "{tag}: K {k_err:e}");
            assert!(checks.all_pass(), "{tag}: {:?}", checks.checks);
        }
    }
}
