//! Levi-Civita connection and Ricci tensor from metric jets.
//!
//! Conventions: `Γ^a_{bc} = ½ g^{ad}(∂_b g_{dc} + ∂_c g_{bd} − ∂_d g_{bc})` and
//! `R_{bd} = ∂_a Γ^a_{bd} − ∂_b Γ^a_{ad} + Γ^a_{ac} Γ^c_{bd} − Γ^a_{dc} Γ^c_{ba}`,
//! so the unit round sphere has `Ric = +g` and Gauss curvature `+1`.

use super::metric::MetricJets;
use super::GeometryError;

/// Conditioning guard for metric inversion: `|det| ≥ DET_GUARD · scale^N`.
pub const DET_GUARD: f64 = 1e-12;

/// Connection coefficients and their first derivatives at a point.
#[derive(Debug, Clone)]
pub struct Connection<const N: usize> {
    /// `gamma[a][b][c] = Γ^a_{bc}`
    pub gamma: [[[f64; N]; N]; N],
    /// `dgamma[e][a][b][c] = ∂_e Γ^a_{bc}`
    pub dgamma: [[[[f64; N]; N]; N]; N],
    pub inverse: [[f64; N]; N],
}

fn minor(m: &[Vec<f64>], row: usize, col: usize) -> Vec<Vec<f64>> {
    m.iter()
        .enumerate()
        .filter(|&(r, _)| r != row)
        .map(|(_, line)| line.iter().enumerate().filter(|&(c, _)| c != col).map(|(_, &v)| v).collect())
        .collect()
}

fn det_laplace(m: &[Vec<f64>]) -> f64 {
    match m.len() {
        0 => 1.0,
        1 => m[0][0],
        2 => m[0][0] * m[1][1] - m[0][1] * m[1][0],
        n => (0..n)
            .map(|c| {
                let s = if c % 2 == 0 { 1.0 } else { -1.0 };
                s * m[0][c] * det_laplace(&minor(m, 0, c))
            })
            .sum(),
    }
}

pub fn determinant<const N: usize>(g: &[[f64; N]; N]) -> f64 {
    let rows: Vec<Vec<f64>> = g.iter().map(|r| r.to_vec()).collect();
    det_laplace(&rows)
}

/// Cofactor inverse with a conditioning guard.
pub fn invert<const N: usize>(g: &[[f64; N]; N]) -> Result<[[f64; N]; N], GeometryError> {
    let rows: Vec<Vec<f64>> = g.iter().map(|r| r.to_vec()).collect();
    let det = det_laplace(&rows);
    let scale = g.iter().flatten().fold(0.0f64, |m, v| m.max(v.abs()));
    if !det.is_finite() || scale == 0.0 || det.abs() < DET_GUARD * scale.powi(N as i32) {
        return Err(GeometryError::Degenerate { det, scale });
    }
    let mut inv = [[0.0; N]; N];
    for (r, row) in inv.iter_mut().enumerate() {
        for (c, v) in row.iter_mut().enumerate() {
            let s = if (r + c) % 2 == 0 { 1.0 } else { -1.0 };
            // adjugate is the transposed cofactor matrix
            *v = s * det_laplace(&minor(&rows, c, r)) / det;
        }
    }
    Ok(inv)
}

pub fn metric_values<const N: usize>(g: &MetricJets<N>) -> [[f64; N]; N] {
    std::array::from_fn(|a| std::array::from_fn(|b| g[a][b].value()))
}

pub fn christoffel<const N: usize>(g: &MetricJets<N>) -> Result<Connection<N>, GeometryError> {
    for row in g {
        for j in row {
            if j.arity() != N {
                return Err(GeometryError::Arity { expected: N, got: j.arity() });
            }
        }
    }
    let ginv = invert(&metric_values(g))?;
    // first-kind symbols Γ_{d,bc} and their derivatives
    let mut first = [[[0.0; N]; N]; N];
    let mut dfirst = [[[[0.0; N]; N]; N]; N];
    for d in 0..N {
        for b in 0..N {
            for c in 0..N {
                first[d][b][c] = 0.5 * (g[d][c].d(b) + g[b][d].d(c) - g[b][c].d(d));
                for e in 0..N {
                    dfirst[e][d][b][c] = 0.5 * (g[d][c].dd(e, b) + g[b][d].dd(e, c) - g[b][c].dd(e, d));
                }
            }
        }
    }
    // ∂_e g^{ad} = −g^{ap} ∂_e g_{pq} g^{qd}
    let mut dinv = [[[0.0; N]; N]; N];
    for (e, de) in dinv.iter_mut().enumerate() {
        for a in 0..N {
            for d in 0..N {
                let mut s = 0.0;
                for p in 0..N {
                    for q in 0..N {
                        s += ginv[a][p] * g[p][q].d(e) * ginv[q][d];
                    }
                }
                de[a][d] = -s;
            }
        }
    }
    let mut gamma = [[[0.0; N]; N]; N];
    let mut dgamma = [[[[0.0; N]; N]; N]; N];
    for a in 0..N {
        for b in 0..N {
            for c in b..N {
                let v: f64 = (0..N).map(|d| ginv[a][d] * first[d][b][c]).sum();
                gamma[a][b][c] = v;
                gamma[a][c][b] = v;
                for e in 0..N {
                    let dv: f64 =
                        (0..N).map(|d| dinv[e][a][d] * first[d][b][c] + ginv[a][d] * dfirst[e][d][b][c]).sum();
                    dgamma[e][a][b][c] = dv;
                    dgamma[e][a][c][b] = dv;
                }
            }
        }
    }
    Ok(Connection { gamma, dgamma, inverse: ginv })
}

pub fn ricci_from_connection<const N: usize>(conn: &Connection<N>) -> [[f64; N]; N] {
    let (gm, dg) = (&conn.gamma, &conn.dgamma);
    let mut ric = [[0.0; N]; N];
    for b in 0..N {
        for d in 0..N {
            let mut s = 0.0;
            for a in 0..N {
                s += dg[a][a][b][d] - dg[b][a][a][d];
                for c in 0..N {
                    s += gm[a][a][c] * gm[c][b][d] - gm[a][d][c] * gm[c][b][a];
                }
            }
            ric[b][d] = s;
        }
    }
    ric
}

pub fn ricci<const N: usize>(g: &MetricJets<N>) -> Result<[[f64; N]; N], GeometryError> {
    Ok(ricci_from_connection(&christoffel(g)?))
}

pub fn scalar_curvature<const N: usize>(g: &MetricJets<N>) -> Result<f64, GeometryError> {
    let conn = christoffel(g)?;
    let ric = ricci_from_connection(&conn);
    let mut s = 0.0;
    for a in 0..N {
        for b in 0..N {
            s += conn.inverse[a][b] * ric[a][b];
        }
    }
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::ScalarField;
    use crate::jets::Jet2;

    fn jets2(fields: [[&ScalarField; 2]; 2], p: [f64; 2]) -> MetricJets<2> {
        std::array::from_fn(|a| std::array::from_fn(|b| fields[a][b].eval_jet(&p).unwrap()))
    }

    #[test]
    fn flat_metric_has_zero_connection() {
        let g: MetricJets<4> = std::array::from_fn(|a| {
            std::array::from_fn(|b| Jet2::constant(4, if a == b { [1.0, -1.0, 1.0, 1.0][a] } else { 0.0 }))
        });
        let conn = christoffel(&g).unwrap();
        assert!(conn.gamma.iter().flatten().flatten().all(|&v| v == 0.0));
        assert!(ricci(&g).unwrap().iter().flatten().all(|&v| v == 0.0));
    }

    #[test]
    fn polar_block() {
        let (t1, zero, one) = (ScalarField::t1(), ScalarField::zero(2), ScalarField::constant(2, 1.0));
        let r2 = &t1 * &t1;
        let g = jets2([[&one, &zero], [&zero, &r2]], [1.7, 0.3]);
        let conn = christoffel(&g).unwrap();
        assert!((conn.gamma[0][1][1] + 1.7).abs() < 1e-15);
        assert!((conn.gamma[1][0][1] - 1.0 / 1.7).abs() < 1e-15);
        assert!((conn.gamma[1][1][0] - 1.0 / 1.7).abs() < 1e-15);
        assert_eq!(conn.gamma[0][0][0], 0.0);
        assert_eq!(conn.gamma[1][1][1], 0.0);
        assert!(ricci(&g).unwrap().iter().flatten().all(|v| v.abs() < 1e-14));
    }

    #[test]
    fn round_sphere_has_positive_ricci() {
        // dt1^2 + sin^2(t1) dt2^2; sin has no field primitive, so its jet is built by hand
        let (zero, one) = (ScalarField::zero(2), ScalarField::constant(2, 1.0));
        let p = [0.9f64, 0.2];
        let s = p[0].sin();
        let c = p[0].cos();
        let g22 =
            Jet2::from_parts(2, s * s, &[2.0 * s * c, 0.0], &[&[2.0 * (c * c - s * s), 0.0], &[0.0, 0.0]]).unwrap();
        let g: MetricJets<2> =
            [[one.eval_jet(&p).unwrap(), zero.eval_jet(&p).unwrap()], [zero.eval_jet(&p).unwrap(), g22]];
        let ric = ricci(&g).unwrap();
        assert!((ric[0][0] - 1.0).abs() < 1e-14);
        assert!((ric[1][1] - s * s).abs() < 1e-14);
        assert!(ric[0][1].abs() < 1e-14);
        assert!((scalar_curvature(&g).unwrap() - 2.0).abs() < 1e-13);
    }

    #[test]
    fn degenerate_metric_is_rejected() {
        let g = [[1.0, 1.0], [1.0, 1.0]];
        assert!(matches!(invert(&g), Err(GeometryError::Degenerate { .. })));
        let inv =
            invert(&[[2.0, 1.0, 0.0, 0.0], [1.0, 3.0, 0.0, 1.0], [0.0, 0.0, -1.0, 0.5], [0.0, 1.0, 0.5, 0.0]]).unwrap();
        let g4 = [[2.0, 1.0, 0.0, 0.0], [1.0, 3.0, 0.0, 1.0], [0.0, 0.0, -1.0, 0.5], [0.0, 1.0, 0.5, 0.0]];
        for i in 0..4 {
            for k in 0..4 {
                let s: f64 = (0..4).map(|m| g4[i][m] * inv[m][k]).sum();
                assert!((s - if i == k { 1.0 } else { 0.0 }).abs() < 1e-14);
            }
        }
    }
}
