//! Value-only finite-difference curvature, independent of the jet pipeline.
//!
//! Metric derivatives come from nested central differences of metric values
//! (`±h` for mixed second derivatives, `±2h` on the diagonal so that both are
//! the square of the first-derivative stencil). The inverse metric uses its
//! own Gauss–Jordan elimination.

use std::fmt::Display;

use thiserror::Error;

use crate::geometry::SolitonInstance;

pub type Matrix4 = [[f64; 4]; 4];

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OracleError {
    #[error("metric evaluation failed at {point:?}: {message}")]
    Evaluation { point: [f64; 4], message: String },
    #[error("metric is singular at {0:?}")]
    Singular([f64; 4]),
}

/// `1e-4` times the local coordinate scale.
pub fn default_step(p: &[f64; 4]) -> f64 {
    1e-4 * p.iter().fold(1.0f64, |m, v| m.max(v.abs()))
}

fn shifted(p: &[f64; 4], moves: &[(usize, f64)]) -> [f64; 4] {
    let mut q = *p;
    for &(k, d) in moves {
        q[k] += d;
    }
    q
}

fn eval<E: Display>(g: &impl Fn(&[f64; 4]) -> Result<Matrix4, E>, q: [f64; 4]) -> Result<Matrix4, OracleError> {
    g(&q).map_err(|e| OracleError::Evaluation { point: q, message: e.to_string() })
}

fn combine(terms: &[(f64, &Matrix4)]) -> Matrix4 {
    let mut out = [[0.0; 4]; 4];
    for (w, m) in terms {
        for a in 0..4 {
            for b in 0..4 {
                out[a][b] += w * m[a][b];
            }
        }
    }
    out
}

pub fn invert(m: &Matrix4) -> Option<Matrix4> {
    let mut a = *m;
    let mut inv = [[0.0; 4]; 4];
    for (i, row) in inv.iter_mut().enumerate() {
        row[i] = 1.0;
    }
    let scale = m.iter().flatten().fold(0.0f64, |s, v| s.max(v.abs()));
    for col in 0..4 {
        let pivot = (col..4).max_by(|&x, &y| a[x][col].abs().total_cmp(&a[y][col].abs()))?;
        if a[pivot][col].abs() <= 1e-14 * scale {
            return None;
        }
        a.swap(col, pivot);
        inv.swap(col, pivot);
        let d = a[col][col];
        for k in 0..4 {
            a[col][k] /= d;
            inv[col][k] /= d;
        }
        for r in 0..4 {
            if r != col {
                let f = a[r][col];
                for k in 0..4 {
                    a[r][k] -= f * a[col][k];
                    inv[r][k] -= f * inv[col][k];
                }
            }
        }
    }
    Some(inv)
}

/// Metric value, first and second derivatives at `p` by central differences.
fn derivatives<E: Display>(
    g: &impl Fn(&[f64; 4]) -> Result<Matrix4, E>,
    p: &[f64; 4],
    h: f64,
) -> Result<(Matrix4, [Matrix4; 4], [[Matrix4; 4]; 4]), OracleError> {
    let g0 = eval(g, *p)?;
    let mut d1 = [[[0.0; 4]; 4]; 4];
    let mut d2 = [[[[0.0; 4]; 4]; 4]; 4];
    for c in 0..4 {
        let gp = eval(g, shifted(p, &[(c, h)]))?;
        let gm = eval(g, shifted(p, &[(c, -h)]))?;
        d1[c] = combine(&[(0.5 / h, &gp), (-0.5 / h, &gm)]);
        let gpp = eval(g, shifted(p, &[(c, 2.0 * h)]))?;
        let gmm = eval(g, shifted(p, &[(c, -2.0 * h)]))?;
        let w = 0.25 / (h * h);
        d2[c][c] = combine(&[(w, &gpp), (-2.0 * w, &g0), (w, &gmm)]);
        for d in 0..c {
            let pp = eval(g, shifted(p, &[(c, h), (d, h)]))?;
            let pm = eval(g, shifted(p, &[(c, h), (d, -h)]))?;
            let mp = eval(g, shifted(p, &[(c, -h), (d, h)]))?;
            let mm = eval(g, shifted(p, &[(c, -h), (d, -h)]))?;
            d2[c][d] = combine(&[(w, &pp), (-w, &pm), (-w, &mp), (w, &mm)]);
            d2[d][c] = d2[c][d];
        }
    }
    Ok((g0, d1, d2))
}

/// Ricci tensor `R_bc = ∂_a Γ^a_bc − ∂_c Γ^a_ab + Γ^a_ae Γ^e_bc − Γ^a_ce Γ^e_ab`
/// from metric values only.
pub fn fd_ricci<E: Display>(
    g: impl Fn(&[f64; 4]) -> Result<Matrix4, E>,
    p: &[f64; 4],
    h: f64,
) -> Result<Matrix4, OracleError> {
    let (g0, d1, d2) = derivatives(&g, p, h)?;
    let gi = invert(&g0).ok_or(OracleError::Singular(*p))?;
    // ∂_e g^{ad} = −g^{am} ∂_e g_mn g^{nd}
    let mut dgi = [[[0.0; 4]; 4]; 4];
    for e in 0..4 {
        for a in 0..4 {
            for d in 0..4 {
                let mut s = 0.0;
                for m in 0..4 {
                    for n in 0..4 {
                        s -= gi[a][m] * d1[e][m][n] * gi[n][d];
                    }
                }
                dgi[e][a][d] = s;
            }
        }
    }
    // first-kind symbols and their derivatives
    let gamma1 = |d: usize, b: usize, c: usize| 0.5 * (d1[b][d][c] + d1[c][d][b] - d1[d][b][c]);
    let dgamma1 = |e: usize, d: usize, b: usize, c: usize| 0.5 * (d2[e][b][d][c] + d2[e][c][d][b] - d2[e][d][b][c]);
    let mut gam = [[[0.0; 4]; 4]; 4];
    let mut dgam = [[[[0.0; 4]; 4]; 4]; 4];
    for a in 0..4 {
        for b in 0..4 {
            for c in 0..4 {
                let mut s = 0.0;
                for d in 0..4 {
                    s += gi[a][d] * gamma1(d, b, c);
                }
                gam[a][b][c] = s;
                for e in 0..4 {
                    let mut t = 0.0;
                    for d in 0..4 {
                        t += dgi[e][a][d] * gamma1(d, b, c) + gi[a][d] * dgamma1(e, d, b, c);
                    }
                    dgam[e][a][b][c] = t;
                }
            }
        }
    }
    let mut ric = [[0.0; 4]; 4];
    for b in 0..4 {
        for c in 0..4 {
            let mut s = 0.0;
            for a in 0..4 {
                s += dgam[a][a][b][c] - dgam[c][a][a][b];
                for e in 0..4 {
                    s += gam[a][a][e] * gam[e][b][c] - gam[a][c][e] * gam[e][a][b];
                }
            }
            ric[b][c] = s;
        }
    }
    Ok(ric)
}

/// `(L_X g)_ab = X^c ∂_c g_ab + g_cb ∂_a X^c + g_ac ∂_b X^c` with central
/// differences of both `g` and `X`.
pub fn fd_lie<E: Display>(
    g: impl Fn(&[f64; 4]) -> Result<Matrix4, E>,
    x: impl Fn(&[f64; 4]) -> Result<[f64; 4], E>,
    p: &[f64; 4],
    h: f64,
) -> Result<Matrix4, OracleError> {
    let vec_at = |q: [f64; 4]| x(&q).map_err(|e| OracleError::Evaluation { point: q, message: e.to_string() });
    let g0 = eval(&g, *p)?;
    let x0 = vec_at(*p)?;
    let mut dg = [[[0.0; 4]; 4]; 4];
    let mut dx = [[0.0; 4]; 4];
    for c in 0..4 {
        let (qp, qm) = (shifted(p, &[(c, h)]), shifted(p, &[(c, -h)]));
        dg[c] = combine(&[(0.5 / h, &eval(&g, qp)?), (-0.5 / h, &eval(&g, qm)?)]);
        let (xp, xm) = (vec_at(qp)?, vec_at(qm)?);
        for k in 0..4 {
            dx[c][k] = (xp[k] - xm[k]) * 0.5 / h;
        }
    }
    let mut out = [[0.0; 4]; 4];
    for a in 0..4 {
        for b in 0..4 {
            let mut s = 0.0;
            for c in 0..4 {
                s += x0[c] * dg[c][a][b] + g0[c][b] * dx[a][c] + g0[a][c] * dx[b][c];
            }
            out[a][b] = s;
        }
    }
    Ok(out)
}

/// Ricci tensor of a catalog instance through the oracle path.
pub fn instance_ricci(inst: &SolitonInstance, p: &[f64; 4], h: f64) -> Result<Matrix4, OracleError> {
    fd_ricci(|q: &[f64; 4]| inst.metric.values(q), p, h)
}

/// `Ric + ½ L_X g − Λ g` of a catalog instance through the oracle path.
pub fn instance_soliton_residual(inst: &SolitonInstance, p: &[f64; 4], h: f64) -> Result<Matrix4, OracleError> {
    let metric = |q: &[f64; 4]| inst.metric.values(q);
    let ric = fd_ricci(metric, p, h)?;
    let field = |q: &[f64; 4]| inst.field.jets(q).map(|j| j.map(|c| c.value()));
    let lie = fd_lie(metric, field, p, h)?;
    let g = eval(&metric, *p)?;
    Ok(combine(&[(1.0, &ric), (0.5, &lie), (-inst.lambda, &g)]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::convert::Infallible;

    fn sphere_times_plane(p: &[f64; 4]) -> Result<Matrix4, Infallible> {
        // round S² in (θ, φ) = (t1, t2) plus flat (z1, z2)
        let mut g = [[0.0; 4]; 4];
        g[0][0] = 1.0;
        g[1][1] = p[0].sin().powi(2);
        g[2][2] = 1.0;
        g[3][3] = 1.0;
        Ok(g)
    }

    #[test]
    fn flat_metric_has_zero_ricci() {
        let flat = |_: &[f64; 4]| -> Result<Matrix4, Infallible> {
            Ok([[1.0, 0.0, 0.0, 0.0], [0.0, -1.0, 0.0, 0.0], [0.0, 0.0, 1.0, 0.0], [0.0, 0.0, 0.0, 1.0]])
        };
        let r = fd_ricci(flat, &[0.3, 0.2, 0.1, 0.0], 1e-3).unwrap();
        assert!(r.iter().flatten().all(|v| v.abs() < 1e-9));
    }

    #[test]
    fn round_sphere_factor() {
        let p = [1.1, 0.4, 0.0, 0.0];
        let r = fd_ricci(sphere_times_plane, &p, 1e-3).unwrap();
        let g = sphere_times_plane(&p).unwrap();
        for a in 0..4 {
            for b in 0..4 {
                let expect = if a < 2 { g[a][b] } else { 0.0 };
                assert!((r[a][b] - expect).abs() < 1e-5, "({a},{b}) {}", r[a][b]);
            }
        }
    }

    #[test]
    fn lie_derivative_of_rotation_on_plane() {
        // X = −t2 ∂_t1 + t1 ∂_t2 is Killing for the Euclidean metric
        let flat = |_: &[f64; 4]| -> Result<Matrix4, Infallible> {
            let mut g = [[0.0; 4]; 4];
            for (i, row) in g.iter_mut().enumerate() {
                row[i] = 1.0;
            }
            Ok(g)
        };
        let rot = |q: &[f64; 4]| -> Result<[f64; 4], Infallible> { Ok([-q[1], q[0], 0.0, 0.0]) };
        let l = fd_lie(flat, rot, &[0.5, 0.2, 0.0, 0.0], 1e-3).unwrap();
        assert!(l.iter().flatten().all(|v| v.abs() < 1e-12));
    }

    #[test]
    fn inverse_round_trip() {
        let m = [[2.0, 1.0, 0.0, 0.3], [1.0, -1.0, 0.2, 0.0], [0.0, 0.2, 0.0, 1.0], [0.3, 0.0, 1.0, 0.5]];
        let inv = invert(&m).unwrap();
        for i in 0..4 {
            for j in 0..4 {
                let s: f64 = (0..4).map(|k| m[i][k] * inv[k][j]).sum();
                assert!((s - if i == j { 1.0 } else { 0.0 }).abs() < 1e-14);
            }
        }
        assert!(invert(&[[1.0, 2.0, 0.0, 0.0], [2.0, 4.0, 0.0, 0.0], [0.0; 4], [0.0; 4]]).is_none());
    }

    #[test]
    fn evaluation_failures_are_reported() {
        let g = |q: &[f64; 4]| if q[0] > 0.0 { Err("outside") } else { Ok([[1.0; 4]; 4]) };
        assert!(matches!(fd_ricci(g, &[0.0; 4], 1e-3), Err(OracleError::Evaluation { .. })));
    }
}
