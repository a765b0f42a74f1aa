use super::{
    default_omega, independent_residual, march, node_residual, sor, BoundaryData, Coeffs, GridSolution, PdeError,
    SolveKind, SolverOptions,
};
use crate::fields::Grid2;

const MAX_NEWTON: usize = 50;
const BACKTRACK: f64 = 0.5;
const MIN_STEP: f64 = 1.0 / 1024.0;

/// `P_11 + ε0 P_22 = Λ e^{−2P}`.
///
/// For `ε0 = +1` this is a Dirichlet problem solved by Newton's method with
/// backtracking (step halved until the residual decreases, at most 50
/// outer iterations); each linearised step is relaxed with SOR. For
/// `ε0 = −1` the equation is marched in `t2` from Cauchy data.
pub fn solve_liouville(
    lambda: f64,
    eps0: f64,
    grid: &Grid2,
    data: &BoundaryData,
    options: &SolverOptions,
) -> Result<GridSolution, PdeError> {
    let n = grid.len();
    let ones = vec![1.0; n];
    let (values, iterations, kind) = match data {
        BoundaryData::Dirichlet(bc) if eps0 > 0.0 => {
            let mut u = vec![0.0; n];
            let mut fixed = vec![false; n];
            for (i, j) in grid.nodes() {
                let k = grid.index(i, j);
                if i == 0 || j == 0 || i == grid.n1 - 1 || j == grid.n2 - 1 || grid.is_masked(i, j) {
                    let [a, b] = grid.node(i, j);
                    u[k] = bc(a, b);
                    fixed[k] = true;
                }
            }
            let omega = options.omega.unwrap_or_else(|| default_omega(grid));
            let laplace = Coeffs { a11: ones.clone(), a22: ones.clone(), b1: vec![0.0; n], c0: vec![0.0; n] };
            let nonlinear_residual = |u: &[f64]| -> (Vec<f64>, f64) {
                let mut r = vec![0.0; n];
                let mut worst = 0.0f64;
                for (i, j) in grid.interior(1) {
                    let k = grid.index(i, j);
                    if fixed[k] {
                        continue;
                    }
                    r[k] = node_residual(grid, &laplace, u, lambda * (-2.0 * u[k]).exp(), i, j);
                    worst = worst.max(r[k].abs());
                }
                (r, worst)
            };
            let (mut r, mut norm) = nonlinear_residual(&u);
            let mut it = 0;
            while norm > options.tol {
                if it >= MAX_NEWTON || !norm.is_finite() {
                    return Err(PdeError::NonConvergence { iterations: it, residual: norm });
                }
                // J δ = −r with J = Δ_h + 2Λ e^{−2P}
                let jac = Coeffs {
                    a11: ones.clone(),
                    a22: ones.clone(),
                    b1: vec![0.0; n],
                    c0: u.iter().map(|p| 2.0 * lambda * (-2.0 * p).exp()).collect(),
                };
                let rhs: Vec<f64> = r.iter().map(|v| -v).collect();
                let mut delta = vec![0.0; n];
                let inner_tol = (1e-3 * norm).max(0.1 * options.tol);
                sor(grid, &jac, &rhs, &mut delta, &fixed, inner_tol, options.max_iter, omega)?;
                let mut theta = 1.0;
                loop {
                    let trial: Vec<f64> = u.iter().zip(&delta).map(|(a, d)| a + theta * d).collect();
                    let (rt, nt) = nonlinear_residual(&trial);
                    if nt < norm || theta <= MIN_STEP {
                        u = trial;
                        r = rt;
                        norm = nt;
                        break;
                    }
                    theta *= BACKTRACK;
                }
                it += 1;
            }
            (u, it, SolveKind::Elliptic)
        }
        BoundaryData::Cauchy { value, t2_derivative } if eps0 < 0.0 => {
            // P_11 − P_22 = Λ e^{−2P}, i.e. a11 = 1, a22 = −1
            let g = |_: usize, p: f64| lambda * (-2.0 * p).exp();
            let u = march(grid, &ones, &vec![-1.0; n], &vec![0.0; n], &g, value, t2_derivative)?;
            (u, grid.n2 - 1, SolveKind::Hyperbolic)
        }
        _ => {
            return Err(PdeError::InvalidProblem(
                "Liouville: eps0 = +1 needs Dirichlet data, eps0 = -1 needs Cauchy data".into(),
            ))
        }
    };
    let residual = independent_residual(grid, &values, |jet, _| {
        Ok(jet.dd(0, 0) + eps0 * jet.dd(1, 1) - lambda * (-2.0 * jet.value()).exp())
    })?;
    Ok(GridSolution { grid: grid.clone(), values, residual, iterations, kind })
}
