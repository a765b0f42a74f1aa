//! Acceptance suite. Prints one line per criterion and exits non-zero when a
//! criterion fails for any reason other than the known-unattainable rows
//! listed in `KNOWN_RED`.

use std::process::ExitCode;
use std::time::Instant;

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use riccisol::catalog::{
    build_family, bump, closed_form_auxiliaries, constraint_residual, slot_equation, standard_fixture, FamilySpec,
    FamilyTag, Params, Slot, TypeBEquation, Variants,
};
use riccisol::cli::{pointwise_claims, run_adjudicate, RunConfig};
use riccisol::fields::{Grid2, ScalarField};
use riccisol::geometry::{residual_scan, ricci, validate_assumptions, AssumptionTolerances};
use riccisol::oracle::fd_ricci;
use riccisol::pde::{
    observed_order, solve_linear2, solve_liouville, solve_r_ode, BoundaryData, LinearPDEProblem, SolverOptions,
};

/// Rows that cannot pass: the literal Type B ψ fixture solves its printed
/// equation but not the soliton equation for either cross-term reading.
const KNOWN_RED: &[&str] = &["TypeB literal a2=0", "TypeB literal a2=1"];

const Z: [f64; 2] = [0.3, -0.2];

struct Outcome {
    id: &'static str,
    title: &'static str,
    failures: Vec<String>,
    detail: Vec<String>,
    seconds: f64,
}

impl Outcome {
    fn unexpected(&self) -> Vec<&String> {
        self.failures.iter().filter(|f| !KNOWN_RED.iter().any(|k| f.starts_with(k))).collect()
    }
}

fn criterion(id: &'static str, title: &'static str, body: impl FnOnce(&mut Vec<String>, &mut Vec<String>)) -> Outcome {
    let start = Instant::now();
    let (mut failures, mut detail) = (Vec::new(), Vec::new());
    body(&mut failures, &mut detail);
    Outcome { id, title, failures, detail, seconds: start.elapsed().as_secs_f64() }
}

fn check(failures: &mut Vec<String>, detail: &mut Vec<String>, label: String, ok: bool) {
    if !ok {
        failures.push(label.clone());
    }
    detail.push(format!("{} {label}", if ok { "ok  " } else { "FAIL" }));
}

fn sup_constraint(spec: &FamilySpec, grid: &Grid2) -> f64 {
    let mut worst = 0.0f64;
    for (i, j) in grid.nodes() {
        if let Ok(r) = constraint_residual(spec, grid.node(i, j)) {
            for (_, v) in r {
                worst = worst.max(v.abs());
            }
        }
    }
    worst
}

fn with_psi(spec: &FamilySpec, name: &str) -> FamilySpec {
    let psi = closed_form_auxiliaries(name, &spec.params, &spec.variants).unwrap();
    spec.clone().with_slot(Slot::Psi, psi)
}

fn a1_rows() -> Vec<(String, Vec<FamilySpec>, [f64; 4])> {
    let mut rows = Vec::new();
    let ci = standard_fixture(FamilyTag::CaseI);
    rows.push(("CaseI P=0 Λ=0 c=1".to_string(), vec![ci.spec], ci.window));
    let tb = standard_fixture(FamilyTag::TypeB);
    for a2 in [0.0, 1.0] {
        let mut printed = tb.spec.clone();
        printed.params.a2 = a2;
        printed.variants.type_b_equation = TypeBEquation::Printed;
        let printed = with_psi(&printed, "psi_typeb_printed");
        // either cross-term reading may rescue the fixture
        let both: Vec<FamilySpec> = ["t1", "t2"]
            .iter()
            .map(|v| printed.clone().with_variants(printed.variants.select(FamilyTag::TypeB, v).unwrap()))
            .collect();
        rows.push((format!("TypeB literal a2={a2}"), both, tb.window));
        let mut transformed = tb.spec.clone();
        transformed.params.a2 = a2;
        rows.push((
            format!("TypeB transformed a2={a2}"),
            vec![with_psi(&transformed, "psi_typeb_transformed")],
            tb.window,
        ));
    }
    let ii2 = standard_fixture(FamilyTag::CaseII2);
    for a2 in [0.0, 1.0] {
        let mut s = ii2.spec.clone();
        s.params.a2 = a2;
        rows.push((format!("CaseII2 a2={a2}"), vec![with_psi(&s, "psi_ii2")], ii2.window));
    }
    let ii3 = standard_fixture(FamilyTag::CaseII3);
    rows.push(("CaseII3 Λ=0 P=0 A=A1 z1".into(), vec![ii3.spec], ii3.window));
    let bp = standard_fixture(FamilyTag::TypeBprime);
    rows.push(("TypeBprime a2=0".into(), vec![bp.spec], bp.window));
    rows
}

fn a1() -> Outcome {
    criterion("A1", "soliton equation on closed-form fixtures (41x41, 1e-8)", |fail, detail| {
        for (label, specs, window) in a1_rows() {
            let grid = Grid2::from_window(window, 41, 41).unwrap();
            let constraint = specs.iter().map(|s| sup_constraint(s, &grid)).fold(0.0, f64::max);
            let residual = specs
                .iter()
                .map(|s| residual_scan(&build_family(s).unwrap(), &grid, Z).unwrap().sup_norm)
                .fold(f64::INFINITY, f64::min);
            check(
                fail,
                detail,
                format!("{label}: constraint {constraint:.2e} residual {residual:.2e}"),
                constraint <= 1e-10 && residual <= 1e-8,
            );
        }
    })
}

fn orbit_error(spec: &FamilySpec, window: [f64; 4]) -> f64 {
    let grid = Grid2::from_window(window, 21, 21).unwrap();
    let inst = build_family(spec).unwrap();
    let claims = pointwise_claims(spec, &inst, &grid, 1.0, 1.0).unwrap();
    claims.iter().find(|c| c.name == "orbit_gauss_curvature").unwrap().measured
}

fn a2() -> Outcome {
    criterion("A2", "orbit Gauss curvature claims", |fail, detail| {
        let v = Variants::default();
        for (name, lambda, window) in [
            ("liouville_flat", 0.0, [1.0, 2.0, 1.0, 2.0]),
            ("liouville_disc", -1.0, [-0.35, 0.35, -0.35, 0.35]),
            ("liouville_sphere", 1.0, [-0.5, 0.5, -0.5, 0.5]),
        ] {
            let p = Params { lambda, c: 1.0, ..Params::default() };
            let spec =
                FamilySpec::new(FamilyTag::CaseI, p).with_slot(Slot::P, closed_form_auxiliaries(name, &p, &v).unwrap());
            let e = orbit_error(&spec, window);
            check(fail, detail, format!("CaseI {name}: |K-Λ| {e:.2e}"), e <= 1e-8);
        }
        for (tag, tol) in [
            (FamilyTag::TypeB, 1e-8),
            (FamilyTag::TypeBprime, 1e-8),
            (FamilyTag::CaseII2, 1e-8),
            (FamilyTag::CaseII3, 1e-8),
            (FamilyTag::TypeA, 1e-7),
            (FamilyTag::TypeAprime, 1e-7),
        ] {
            let fx = standard_fixture(tag);
            let e = orbit_error(&fx.spec, fx.window);
            check(fail, detail, format!("{tag}: max |K - printed K| {e:.2e}"), e <= tol);
        }
    })
}

fn a3() -> Outcome {
    criterion("A3", "standing assumptions on every fixture", |fail, detail| {
        for tag in FamilyTag::ALL {
            let fx = standard_fixture(tag);
            let grid = Grid2::from_window(fx.window, 21, 21).unwrap();
            let inst = build_family(&fx.spec).unwrap();
            let rep = validate_assumptions(&inst, &grid, Z, &AssumptionTolerances::default()).unwrap();
            let get = |n: &str| rep.get(n).map(|c| c.measured).unwrap_or(f64::NAN);
            let failing: Vec<&str> = rep.checks.iter().filter(|c| !c.pass).map(|c| c.name.as_str()).collect();
            check(
                fail,
                detail,
                format!(
                    "{tag}: g(C,C) {:.1e}, min|C| {:.2e}, h22 {:.1e}, symmetry {:.1e}{}",
                    get("c_null"),
                    get("c_nonzero"),
                    get("null_killing_vector"),
                    get("x_symmetry"),
                    if failing.is_empty() { String::new() } else { format!(" failing {failing:?}") }
                ),
                rep.all_pass(),
            );
        }
    })
}

fn a4() -> Outcome {
    // both errors below this are treated as exact agreement up to roundoff
    const FLOOR: f64 = 1e-9;
    criterion("A4", "jet Ricci vs finite-difference oracle, 20 random points", |fail, detail| {
        let mut rng = StdRng::seed_from_u64(20);
        for tag in FamilyTag::ALL {
            let fx = standard_fixture(tag);
            let inst = build_family(&fx.spec).unwrap();
            let w = fx.window;
            let (d1, d2) = (0.1 * (w[1] - w[0]), 0.1 * (w[3] - w[2]));
            let mut errs = [0.0f64; 2];
            for _ in 0..20 {
                let p = [
                    rng.gen_range(w[0] + d1..w[1] - d1),
                    rng.gen_range(w[2] + d2..w[3] - d2),
                    rng.gen_range(-1.0..1.0),
                    rng.gen_range(-1.0..1.0),
                ];
                let jet = ricci(&inst.metric.jets(&p).unwrap()).unwrap();
                for (k, h) in [1e-2, 5e-3].into_iter().enumerate() {
                    let fd = fd_ricci(|q: &[f64; 4]| inst.metric.values(q), &p, h).unwrap();
                    for a in 0..4 {
                        for b in 0..4 {
                            errs[k] = errs[k].max((jet[a][b] - fd[a][b]).abs());
                        }
                    }
                }
            }
            let order = observed_order(errs[0], errs[1]);
            let exact = errs[0] <= FLOOR && errs[1] <= FLOOR;
            check(
                fail,
                detail,
                format!(
                    "{tag}: err(1e-2) {:.2e} err(5e-3) {:.2e} order {order:.3}{}",
                    errs[0],
                    errs[1],
                    if exact { " (roundoff-exact)" } else { "" }
                ),
                exact || order >= 1.9,
            );
        }
    })
}

/// Smooth, non-polynomial manufactured solution on the orbit chart.
fn manufactured() -> ScalarField {
    let (t1, t2) = (ScalarField::t1(), ScalarField::t2());
    let wave = (&(&t1 * 0.6) - &(&t2 * 0.3)).exp();
    &wave + &(&(&t1 * 0.5) / &(&t2.powi(2) + 1.0))
}

fn mms_order(label: String, spec: &FamilySpec, window: [f64; 4], fail: &mut Vec<String>, detail: &mut Vec<String>) {
    let eq = slot_equation(spec).unwrap().expect("slot equation");
    let u = manufactured();
    let source = eq.op.apply_field(&u).unwrap();
    let mid = [0.5 * (window[0] + window[1]), 0.5 * (window[2] + window[3])];
    let hyperbolic = eq.op.a11.eval(&mid).unwrap() * eq.op.a22.eval(&mid).unwrap() < 0.0;
    let mut errs = Vec::new();
    for n in [33, 65] {
        let grid = Grid2::from_window(window, n, n).unwrap();
        let data =
            if hyperbolic { BoundaryData::cauchy_from(u.clone()) } else { BoundaryData::dirichlet_from(u.clone()) };
        let options = SolverOptions::default();
        let prob = LinearPDEProblem { op: eq.op.clone(), source: source.clone(), grid, data, options };
        let sol = solve_linear2(&prob).unwrap();
        errs.push(sol.max_error(|a, b| u.eval(&[a, b]).unwrap()));
    }
    let order = observed_order(errs[0], errs[1]);
    check(fail, detail, format!("{label}: err33 {:.2e} err65 {:.2e} order {order:.3}", errs[0], errs[1]), order >= 1.9);
}

fn a5() -> Outcome {
    criterion("A5", "solver convergence orders", |fail, detail| {
        for tag in FamilyTag::ALL {
            if tag == FamilyTag::CaseI {
                continue;
            }
            let fx = standard_fixture(tag);
            mms_order(
                format!("{tag} {} operator", slot_equation(&fx.spec).unwrap().unwrap().slot),
                &fx.spec,
                fx.window,
                fail,
                detail,
            );
        }
        // hyperbolic reading of the Type B operator
        let mut tb = standard_fixture(FamilyTag::TypeB);
        tb.spec.params.eps0 = -1.0;
        mms_order("TypeB psi operator, eps0=-1".into(), &tb.spec, tb.window, fail, detail);

        // Liouville: disc model (elliptic) and a boosted exact solution (hyperbolic)
        let disc = |a: f64, b: f64| -0.5 * (4.0 / (1.0 - a * a - b * b).powi(2)).ln(); // Λ = −1
        let (th, lam) = (0.3f64, -1.0f64);
        let boosted = move |a: f64, b: f64| ((-lam).sqrt() * (th.cosh() * a + th.sinh() * b)).ln();
        let t = ScalarField::t1();
        let s = ScalarField::t2();
        let boosted_field = (&(&(&t * th.cosh()) + &(&s * th.sinh())) * (-lam).sqrt()).ln();
        for (label, eps0, window) in
            [("Liouville eps0=+1", 1.0, [-0.35, 0.35, -0.35, 0.35]), ("Liouville eps0=-1", -1.0, [1.0, 2.0, 0.0, 1.0])]
        {
            let mut errs = Vec::new();
            for n in [33, 65] {
                let grid = Grid2::from_window(window, n, n).unwrap();
                let options = SolverOptions::default();
                let (sol, err) = if eps0 > 0.0 {
                    let sol = solve_liouville(lam, eps0, &grid, &BoundaryData::dirichlet(disc), &options).unwrap();
                    let e = sol.max_error(disc);
                    (sol, e)
                } else {
                    let sol =
                        solve_liouville(lam, eps0, &grid, &BoundaryData::cauchy_from(boosted_field.clone()), &options)
                            .unwrap();
                    let e = sol.max_error(boosted);
                    (sol, e)
                };
                let _ = sol;
                errs.push(err);
            }
            let order = observed_order(errs[0], errs[1]);
            check(
                fail,
                detail,
                format!("{label}: err33 {:.2e} err65 {:.2e} order {order:.3}", errs[0], errs[1]),
                order >= 1.9,
            );
        }

        // R' = R^{3/2} against R = 4/(k - t1)^2, k = 3
        let exact = |t: f64| 4.0 / (3.0 - t).powi(2);
        let errs: Vec<f64> = [0.1, 0.05, 0.025]
            .iter()
            .map(|&h| {
                let sol = solve_r_ode(0.0, exact(0.0), 0.0, 1.0, h, false).unwrap();
                sol.values.iter().enumerate().map(|(k, r)| (r - exact(k as f64 * sol.step)).abs()).fold(0.0, f64::max)
            })
            .collect();
        let orders = [observed_order(errs[0], errs[1]), observed_order(errs[1], errs[2])];
        check(
            fail,
            detail,
            format!(
                "R ODE (RK4): errors {:.2e} {:.2e} {:.2e} orders {:.3} {:.3}",
                errs[0], errs[1], errs[2], orders[0], orders[1]
            ),
            orders.iter().all(|&o| o >= 3.9),
        );
    })
}

fn a6() -> Outcome {
    criterion("A6", "adjudication of printed variants", |fail, detail| {
        let type_b = r#"
family = "TypeB"
[params]
lambda = -3.0
a1 = 0.3
a2 = 1.0
a3 = -0.2
[slots.psi]
closed_form = "psi_typeb_transformed"
"#;
        let rep = run_adjudicate(&RunConfig::from_toml(type_b).unwrap()).unwrap();
        let rows: Vec<String> = rep.rows.iter().map(|r| format!("{}={:.2e}", r.variant, r.sup.0)).collect();
        let low = rep.rows.iter().filter(|r| r.sup.0 <= 1e-8).count();
        let high = rep.rows.iter().filter(|r| r.sup.0 > 1e-3).count();
        check(
            fail,
            detail,
            format!("TypeB cross term: {} -> passing {:?}", rows.join(" "), rep.passing),
            low == 1 && high == rep.rows.len() - 1,
        );
        let type_a = r#"
family = "TypeA"
[params]
lambda = -2.0
c1 = 1.5
a1 = 0.3
a2 = 1.0
a3 = -0.2
[slots.psi]
closed_form = "psi_typea"
"#;
        let rep = run_adjudicate(&RunConfig::from_toml(type_a).unwrap()).unwrap();
        let rows: Vec<String> = rep
            .rows
            .iter()
            .map(|r| format!("{}={:.2e}:{}", r.variant, r.sup.0, if r.pass { "pass" } else { "fail" }))
            .collect();
        check(
            fail,
            detail,
            format!("TypeA readings: {} -> passing {:?}", rows.join(" "), rep.passing),
            !rep.passing.is_empty(),
        );
    })
}

fn a7() -> Outcome {
    const DELTA: f64 = 1e-2;
    criterion("A7", "negative controls: 1e-2 bump in every slot", |fail, detail| {
        for tag in FamilyTag::ALL {
            let fx = standard_fixture(tag);
            let grid = Grid2::from_window(fx.window, 21, 21).unwrap();
            let shape = bump(fx.window);
            for &slot in tag.required_slots() {
                let spec = fx.spec.perturbed(slot, DELTA, &shape).unwrap();
                let sup = residual_scan(&build_family(&spec).unwrap(), &grid, Z).unwrap().sup_norm;
                check(fail, detail, format!("{tag} {slot}: residual {sup:.2e} (κ = {:.2e})", sup / DELTA), sup > 1e-4);
            }
        }
    })
}

fn case_i_pipeline(n: usize) -> (f64, f64) {
    let window = [-0.35, 0.35, -0.35, 0.35];
    let grid = Grid2::from_window(window, n, n).unwrap();
    let lam = -1.0;
    let disc = move |a: f64, b: f64| -0.5 * (4.0 / (-lam * (1.0 - a * a - b * b).powi(2))).ln();
    let sol = solve_liouville(lam, 1.0, &grid, &BoundaryData::dirichlet(disc), &SolverOptions::default()).unwrap();
    let p = Params { lambda: lam, c: 1.0, a1: 0.3, a2: 0.4, ..Params::default() };
    let spec = FamilySpec::new(FamilyTag::CaseI, p).with_slot(Slot::P, sol.field());
    let rep = residual_scan(&build_family(&spec).unwrap(), &grid, Z).unwrap();
    (rep.sup_norm, grid.h1)
}

fn a8() -> Outcome {
    criterion("A8", "Liouville solve -> Case I -> soliton residual (129x129)", |fail, detail| {
        let (r65, h65) = case_i_pipeline(65);
        let c = r65 / (h65 * h65);
        let (r129, h129) = case_i_pipeline(129);
        let bound = 5.0 * c * h129 * h129;
        check(
            fail,
            detail,
            format!(
                "C = {c:.3e} (from 65x65), residual129 {r129:.3e} <= 5 C h^2 = {bound:.3e}, observed order {:.3}",
                observed_order(r65, r129)
            ),
            r129 <= bound,
        );
    })
}

fn main() -> ExitCode {
    let outcomes = [a1(), a2(), a3(), a4(), a5(), a6(), a7(), a8()];
    let mut unexpected = 0;
    println!();
    for o in &outcomes {
        let status = if o.failures.is_empty() { "PASS" } else { "FAIL" };
        let note = if !o.failures.is_empty() && o.unexpected().is_empty() {
            " [known unattainable rows, see decisions ledger]"
        } else {
            ""
        };
        println!("{} {status} {} ({:.1}s){note}", o.id, o.title, o.seconds);
        for d in &o.detail {
            println!("     {d}");
        }
        unexpected += o.unexpected().len();
    }
    if unexpected > 0 {
        println!("\n{unexpected} unexpected failure(s)");
        ExitCode::FAILURE
    } else {
        ExitCode::SUCCESS
    }
}
