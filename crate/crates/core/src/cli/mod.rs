//! Batch driver: configuration, verification runs, variant adjudication and
//! constraint solves.

mod report;

pub use report::{
    params_map, AdjudicationReport, AdjudicationRow, ClaimSection, GridSection, Num, Report, ResidualSection, Status,
    REPORT_VERSION,
};

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use log::info;
use serde::Deserialize;
use thiserror::Error;

use crate::catalog::{
    build_family, bump, closed_form_auxiliaries, constraint_residual, default_window, orbit_curvature, slot_equation,
    CatalogError, FamilySpec, FamilyTag, Params, Slot, Variants,
};
use crate::fields::{FieldError, Grid2, GridField, ScalarField};
use crate::geometry::{
    for_each_node, gauss_curvature_2d, geroch_decompose, residual_scan, validate_assumptions, AssumptionTolerances,
    ClaimResult, GeometryError, SolitonInstance,
};
use crate::pde::{
    solve_linear2, solve_liouville, solve_r_ode, BoundaryData, GridSolution, LinearPDEProblem, PdeError, SolverOptions,
};

#[derive(Debug, Error)]
pub enum RunError {
    #[error("config: {0}")]
    Config(String),
    #[error("usage: {0}")]
    Usage(String),
    #[error(transparent)]
    Catalog(#[from] CatalogError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Pde(#[from] PdeError),
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error("{path}: {message}")]
    Io { path: PathBuf, message: String },
}

impl RunError {
    /// Every run error is a configuration or usage problem from the point
    /// of view of the exit status.
    pub fn exit_code(&self) -> i32 {
        2
    }
}

/// Where a slot comes from. Exactly one field must be set.
#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SlotSource {
    pub closed_form: Option<String>,
    pub grid_file: Option<PathBuf>,
    pub solve: Option<SolveRequest>,
}

/// Solver request. `P`, `psi` and `S` slots take boundary (or Cauchy) data
/// from the closed form named by `boundary`; `R` integrates the ODE from
/// `r0` at `t_start`.
#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolveRequest {
    pub boundary: Option<String>,
    pub tol: Option<f64>,
    pub r0: Option<f64>,
    pub t_start: Option<f64>,
    pub step: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridConfig {
    pub window: Option<[f64; 4]>,
    pub n1: usize,
    pub n2: usize,
    /// Killing-orbit coordinates at which the scan is taken.
    pub z: [f64; 2],
    pub margin: Option<usize>,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self { window: None, n1: 41, n2: 41, z: [0.3, -0.2], margin: None }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    pub residual: Option<f64>,
    pub curvature: Option<f64>,
    pub constraint: Option<f64>,
    pub assumptions: AssumptionTolerances,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PerturbShape {
    Bump,
    T2Squared,
}

/// Adds `delta * shape` to one slot after it has been resolved.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Perturbation {
    pub slot: String,
    pub delta: f64,
    #[serde(default = "default_shape")]
    pub shape: PerturbShape,
}

fn default_shape() -> PerturbShape {
    PerturbShape::Bump
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub family: FamilyTag,
    #[serde(default)]
    pub params: Params,
    #[serde(default)]
    pub variants: Variants,
    /// A variant name of the family, or `all` for adjudication.
    pub variant: Option<String>,
    #[serde(default)]
    pub slots: BTreeMap<String, SlotSource>,
    #[serde(default)]
    pub grid: GridConfig,
    #[serde(default)]
    pub tolerances: Tolerances,
    pub output: Option<PathBuf>,
    pub perturb: Option<Perturbation>,
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self, RunError> {
        toml::from_str(text).map_err(|e| RunError::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, RunError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| RunError::Io { path: path.to_path_buf(), message: e.to_string() })?;
        Self::from_toml(&text)
    }

    pub fn window(&self) -> [f64; 4] {
        self.grid.window.unwrap_or_else(|| default_window(self.family, &self.params))
    }

    pub fn grid(&self) -> Result<Grid2, RunError> {
        if self.grid.n1 < 5 || self.grid.n2 < 5 {
            return Err(RunError::Config(format!("grid needs n1, n2 >= 5 (got {}x{})", self.grid.n1, self.grid.n2)));
        }
        Ok(Grid2::from_window(self.window(), self.grid.n1, self.grid.n2)?)
    }

    fn slot_sources(&self) -> Result<Vec<(Slot, SlotSource)>, RunError> {
        let mut out = Vec::new();
        for (name, src) in &self.slots {
            let slot: Slot = name.parse().map_err(RunError::Config)?;
            let set = [src.closed_form.is_some(), src.grid_file.is_some(), src.solve.is_some()];
            if set.iter().filter(|&&b| b).count() != 1 {
                return Err(RunError::Config(format!("slot {name}: set exactly one of closed_form, grid_file, solve")));
            }
            out.push((slot, src.clone()));
        }
        // R and P feed the ψ/S equations, so they are resolved first
        out.sort_by_key(|(s, _)| match s {
            Slot::R | Slot::P => 0,
            _ => 1,
        });
        Ok(out)
    }

    /// Family variants after applying the `variant` name, if any.
    pub fn selected_variants(&self) -> Result<Variants, RunError> {
        match self.variant.as_deref() {
            None => Ok(self.variants),
            Some("all") => Err(RunError::Usage("variant 'all' is only meaningful for adjudicate".into())),
            Some(name) => self.variants.select(self.family, name).map_err(|e| RunError::Usage(e.to_string())),
        }
    }
}

/// Resolves every slot source into a field, solving constraint problems on
/// `grid` where requested.
pub fn build_spec(cfg: &RunConfig, variants: Variants, grid: &Grid2) -> Result<FamilySpec, RunError> {
    let mut spec = FamilySpec::new(cfg.family, cfg.params).with_variants(variants);
    if let Some(m) = cfg.grid.margin {
        spec.margin = m;
    }
    spec.t2_base = grid.window()[2];
    for (slot, src) in cfg.slot_sources()? {
        let field = if let Some(name) = &src.closed_form {
            closed_form_auxiliaries(name, &cfg.params, &variants)?
        } else if let Some(path) = &src.grid_file {
            ScalarField::from_grid(GridField::read(path)?)
        } else {
            let req = src.solve.as_ref().expect("checked above");
            solve_slot(&spec, slot, req, grid)?.field()
        };
        spec.slots.insert(slot, field);
    }
    if let Some(p) = &cfg.perturb {
        let slot: Slot = p.slot.parse().map_err(RunError::Config)?;
        let shape = match p.shape {
            PerturbShape::Bump => bump(grid.window()),
            PerturbShape::T2Squared => ScalarField::t2().powi(2),
        };
        spec = spec.perturbed(slot, p.delta, &shape)?;
    }
    Ok(spec)
}

/// A solved slot: either a grid solution or an ODE solution field.
pub enum SolvedSlot {
    Grid(GridSolution),
    Ode(ScalarField),
}

impl SolvedSlot {
    pub fn field(&self) -> ScalarField {
        match self {
            SolvedSlot::Grid(s) => s.field(),
            SolvedSlot::Ode(f) => f.clone(),
        }
    }
}

fn boundary_data(spec: &FamilySpec, req: &SolveRequest, hyperbolic: bool) -> Result<BoundaryData, RunError> {
    let name = req.boundary.as_deref().ok_or_else(|| RunError::Config("solve request needs 'boundary'".into()))?;
    let f = closed_form_auxiliaries(name, &spec.params, &spec.variants)?;
    Ok(if hyperbolic { BoundaryData::cauchy_from(f) } else { BoundaryData::dirichlet_from(f) })
}

/// Solves the constraint equation that determines `slot`, with the slots
/// already present in `spec` as coefficients.
pub fn solve_slot(spec: &FamilySpec, slot: Slot, req: &SolveRequest, grid: &Grid2) -> Result<SolvedSlot, RunError> {
    let mut options = SolverOptions::default();
    if let Some(t) = req.tol {
        options.tol = t;
    }
    let p = spec.params;
    match slot {
        Slot::R => {
            let c = match spec.tag {
                FamilyTag::TypeAprime => p.c,
                FamilyTag::TypeBprime => 0.0,
                t => return Err(RunError::Usage(format!("{t} has no R slot"))),
            };
            let w = grid.window();
            let t_start = req.t_start.unwrap_or(w[0]);
            if t_start > w[0] {
                return Err(RunError::Config("R solve: t_start must not exceed the window's t1 minimum".into()));
            }
            let r0 = req.r0.ok_or_else(|| RunError::Config("R solve needs 'r0'".into()))?;
            let step = req.step.unwrap_or(1e-3);
            let sol = solve_r_ode(c, r0, t_start, w[1], step, spec.tag == FamilyTag::TypeAprime)?;
            info!("R ODE: {} steps, interpolant residual {:e}", sol.values.len() - 1, sol.interpolant_residual());
            Ok(SolvedSlot::Ode(sol.t1_field()))
        }
        Slot::P => {
            if !matches!(spec.tag, FamilyTag::CaseI | FamilyTag::CaseII3) {
                return Err(RunError::Usage(format!("{} has no P slot", spec.tag)));
            }
            let data = boundary_data(spec, req, p.eps0 < 0.0)?;
            let sol = solve_liouville(p.lambda, p.eps0, grid, &data, &options)?;
            info!("Liouville: {} iterations, residual {:e}", sol.iterations, sol.residual);
            Ok(SolvedSlot::Grid(sol))
        }
        Slot::Psi | Slot::S => {
            let eq = slot_equation(spec)?
                .filter(|e| e.slot == slot)
                .ok_or_else(|| RunError::Usage(format!("{} has no {slot} equation", spec.tag)))?;
            let mid = [0.5 * (grid.window()[0] + grid.window()[1]), 0.5 * (grid.window()[2] + grid.window()[3])];
            let hyperbolic = eq.op.a11.eval(&mid)? * eq.op.a22.eval(&mid)? < 0.0;
            let prob = LinearPDEProblem {
                op: eq.op,
                source: eq.source,
                grid: grid.clone(),
                data: boundary_data(spec, req, hyperbolic)?,
                options,
            };
            let sol = solve_linear2(&prob)?;
            info!("{slot} equation: {} iterations, residual {:e}", sol.iterations, sol.residual);
            Ok(SolvedSlot::Grid(sol))
        }
    }
}

/// Claim tolerances of a family, with the config overrides applied.
fn tolerances(cfg: &RunConfig) -> (f64, f64, f64) {
    let curvature_default = match cfg.family {
        FamilyTag::TypeA | FamilyTag::TypeAprime | FamilyTag::EinsteinKundu1 => 1e-7,
        _ => 1e-8,
    };
    (
        cfg.tolerances.residual.unwrap_or(1e-8),
        cfg.tolerances.curvature.unwrap_or(curvature_default),
        cfg.tolerances.constraint.unwrap_or(1e-10),
    )
}

/// Outcome of a verification run.
#[derive(Debug, Clone)]
pub struct Verification {
    pub report: Report,
    pub claims: Vec<ClaimResult>,
}

impl Verification {
    pub fn passed(&self) -> bool {
        self.report.status == Status::Pass
    }

    pub fn exit_code(&self) -> i32 {
        if self.passed() {
            0
        } else {
            1
        }
    }
}

/// Supremum of the orbit Gauss-curvature error and of every constraint
/// residual over the unmasked grid.
pub fn pointwise_claims(
    spec: &FamilySpec,
    inst: &SolitonInstance,
    grid: &Grid2,
    curvature_tol: f64,
    constraint_tol: f64,
) -> Result<Vec<ClaimResult>, RunError> {
    let expected_k = orbit_curvature(spec)?;
    let gd = geroch_decompose(&inst.metric)?;
    let mut k_err = 0.0f64;
    let mut constraints: BTreeMap<&'static str, f64> = BTreeMap::new();
    for_each_node(grid, &inst.exclusions, |_, _, t| {
        let k = gauss_curvature_2d(&gd.orbit, t)?;
        let e = expected_k.eval(&t).map_err(GeometryError::from)?;
        k_err = k_err.max((k - e).abs());
        let res = constraint_residual(spec, t).map_err(|e| match e {
            CatalogError::Field(f) => GeometryError::Field(f),
            other => GeometryError::Field(FieldError::Other(other.to_string())),
        })?;
        for (name, r) in res {
            let entry = constraints.entry(name).or_insert(0.0);
            *entry = entry.max(r.abs());
        }
        Ok(())
    })?;
    let mut out = vec![ClaimResult::within("orbit_gauss_curvature", k_err, 0.0, curvature_tol)];
    for (name, r) in constraints {
        out.push(ClaimResult::within(format!("constraint:{name}"), r, 0.0, constraint_tol));
    }
    Ok(out)
}

fn verify_with(cfg: &RunConfig, variants: Variants) -> Result<Verification, RunError> {
    let grid = cfg.grid()?;
    let spec = build_spec(cfg, variants, &grid)?;
    let inst = build_family(&spec)?;
    let (res_tol, k_tol, c_tol) = tolerances(cfg);
    let scan = residual_scan(&inst, &grid, cfg.grid.z)?;
    let mut claims = vec![ClaimResult::within("soliton_residual", scan.sup_norm, 0.0, res_tol)];
    claims.extend(pointwise_claims(&spec, &inst, &grid, k_tol, c_tol)?);
    let assumptions = validate_assumptions(&inst, &grid, cfg.grid.z, &cfg.tolerances.assumptions)?;
    claims.extend(assumptions.checks.into_iter().map(|mut c| {
        c.name = format!("assumption:{}", c.name);
        c
    }));
    let report = Report::new(
        cfg.family.to_string(),
        &cfg.params,
        variants.label(cfg.family).map(str::to_string),
        &scan,
        &claims,
    );
    Ok(Verification { report, claims })
}

/// Builds the instance, scans the soliton residual, checks the orbit
/// curvature, constraint and assumption claims, and writes the report to
/// `cfg.output` when set.
pub fn run_verify(cfg: &RunConfig) -> Result<Verification, RunError> {
    let v = verify_with(cfg, cfg.selected_variants()?)?;
    if let Some(path) = &cfg.output {
        write_text(path, &v.report.to_json())?;
    }
    Ok(v)
}

/// Runs the verification once per printed variant of the family with the
/// same slot sources and grid, and records which variants pass the residual
/// tolerance.
pub fn run_adjudicate(cfg: &RunConfig) -> Result<AdjudicationReport, RunError> {
    if !matches!(cfg.variant.as_deref(), None | Some("all")) {
        return Err(RunError::Usage("adjudicate runs every variant; use --variant all or omit it".into()));
    }
    let names = cfg.family.variant_names();
    if names.is_empty() {
        return Err(RunError::Usage(format!("{} has no variants to adjudicate", cfg.family)));
    }
    let (res_tol, _, _) = tolerances(cfg);
    let mut rows = Vec::new();
    for name in names {
        let variants = cfg.variants.select(cfg.family, name)?;
        let v = verify_with(cfg, variants)?;
        let sup = v.report.residual.sup.0;
        info!("{} {name}: residual {sup:e}", cfg.family);
        rows.push(AdjudicationRow {
            variant: name.to_string(),
            sup: Num(sup),
            rms: v.report.residual.rms,
            tolerance: Num(res_tol),
            pass: sup <= res_tol,
        });
    }
    let passing: Vec<String> = rows.iter().filter(|r| r.pass).map(|r| r.variant.clone()).collect();
    let report = AdjudicationReport {
        version: REPORT_VERSION,
        family: cfg.family.to_string(),
        params: params_map(&cfg.params),
        status: if passing.is_empty() { Status::Fail } else { Status::Pass },
        rows,
        passing,
    };
    if let Some(path) = &cfg.output {
        write_text(path, &report.to_json())?;
    }
    Ok(report)
}

/// Solves every slot that has a `solve` source and writes grid solutions to
/// `out` (suffixed with the slot name when more than one is solved).
pub fn run_solve(cfg: &RunConfig, out: Option<&Path>) -> Result<Vec<(Slot, f64)>, RunError> {
    let grid = cfg.grid()?;
    let variants = cfg.selected_variants()?;
    let mut spec = FamilySpec::new(cfg.family, cfg.params).with_variants(variants);
    spec.t2_base = grid.window()[2];
    let sources = cfg.slot_sources()?;
    let solved_count = sources.iter().filter(|(_, s)| s.solve.is_some()).count();
    if solved_count == 0 {
        return Err(RunError::Usage("no slot has a solve request".into()));
    }
    let mut results = Vec::new();
    for (slot, src) in sources {
        let field = match (&src.closed_form, &src.grid_file, &src.solve) {
            (Some(name), _, _) => closed_form_auxiliaries(name, &cfg.params, &variants)?,
            (_, Some(path), _) => ScalarField::from_grid(GridField::read(path)?),
            (_, _, Some(req)) => {
                let solved = solve_slot(&spec, slot, req, &grid)?;
                if let SolvedSlot::Grid(sol) = &solved {
                    results.push((slot, sol.residual));
                    if let Some(base) = out {
                        let path = if solved_count == 1 { base.to_path_buf() } else { suffixed(base, slot) };
                        sol.write(&path)?;
                    }
                }
                solved.field()
            }
            _ => unreachable!("slot sources are validated"),
        };
        spec.slots.insert(slot, field);
    }
    Ok(results)
}

fn suffixed(base: &Path, slot: Slot) -> PathBuf {
    let mut name = base.as_os_str().to_owned();
    name.push(format!(".{slot}"));
    PathBuf::from(name)
}

fn write_text(path: &Path, text: &str) -> Result<(), RunError> {
    std::fs::write(path, text).map_err(|e| RunError::Io { path: path.to_path_buf(), message: e.to_string() })
}

/// Human-readable catalog listing.
pub fn list_families() -> String {
    let mut s = String::new();
    for tag in FamilyTag::ALL {
        let slots: Vec<String> = tag.required_slots().iter().map(|x| x.to_string()).collect();
        s.push_str(&format!("{tag}\n"));
        s.push_str(&format!("  slots:       {}\n", slots.join(", ")));
        s.push_str(&format!("  invariants:  {}\n", tag.invariants()));
        s.push_str(&format!("  constraints: {}\n", tag.constraint_names().join(", ")));
        s.push_str(&format!("  claims:      {}\n", tag.claims().join(", ")));
        if !tag.variant_names().is_empty() {
            s.push_str(&format!("  variants:    {}\n", tag.variant_names().join(", ")));
        }
    }
    s
}
