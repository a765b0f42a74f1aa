use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::FieldError;
use crate::jets::Jet2;

/// First line of the plain-text grid layout.
pub const GRID_HEADER: &str = "# riccisol-grid v1";

/// Nodes must sit at least this many cells inside the grid for stencil use.
const STENCIL_MARGIN: usize = 2;

/// Relative distance (in cells) within which a point is snapped to a node.
const NODE_SNAP: f64 = 1e-7;

/// Uniform tensor grid on the orbit chart, node `(i, j)` at
/// `(origin[0] + i*h1, origin[1] + j*h2)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Grid2 {
    pub n1: usize,
    pub n2: usize,
    pub h1: f64,
    pub h2: f64,
    pub origin: [f64; 2],
    #[serde(skip)]
    mask: Option<Vec<bool>>,
}

impl Grid2 {
    pub fn new(n1: usize, n2: usize, h1: f64, h2: f64, origin: [f64; 2]) -> Result<Self, FieldError> {
        if n1 < 5 || n2 < 5 {
            return Err(FieldError::InvalidGrid(format!("need at least 5x5 nodes, got {n1}x{n2}")));
        }
        if !(h1 > 0.0 && h2 > 0.0) || !h1.is_finite() || !h2.is_finite() {
            return Err(FieldError::InvalidGrid(format!("spacings must be positive, got ({h1}, {h2})")));
        }
        Ok(Self { n1, n2, h1, h2, origin, mask: None })
    }

    /// Grid spanning `[a, b] x [c, d]` with `n1 x n2` nodes (edges included).
    pub fn from_window(window: [f64; 4], n1: usize, n2: usize) -> Result<Self, FieldError> {
        let [a, b, c, d] = window;
        if !(b > a && d > c) {
            return Err(FieldError::InvalidGrid(format!("empty window {window:?}")));
        }
        if n1 < 2 || n2 < 2 {
            return Err(FieldError::InvalidGrid(format!("need at least 5x5 nodes, got {n1}x{n2}")));
        }
        Self::new(n1, n2, (b - a) / (n1 - 1) as f64, (d - c) / (n2 - 1) as f64, [a, c])
    }

    pub fn window(&self) -> [f64; 4] {
        [
            self.origin[0],
            self.origin[0] + self.h1 * (self.n1 - 1) as f64,
            self.origin[1],
            self.origin[1] + self.h2 * (self.n2 - 1) as f64,
        ]
    }

    pub fn len(&self) -> usize {
        self.n1 * self.n2
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn index(&self, i: usize, j: usize) -> usize {
        j * self.n1 + i
    }

    pub fn node(&self, i: usize, j: usize) -> [f64; 2] {
        [self.origin[0] + i as f64 * self.h1, self.origin[1] + j as f64 * self.h2]
    }

    pub fn is_masked(&self, i: usize, j: usize) -> bool {
        self.mask.as_ref().is_some_and(|m| m[self.index(i, j)])
    }

    pub fn masked_count(&self) -> usize {
        self.mask.as_ref().map_or(0, |m| m.iter().filter(|&&b| b).count())
    }

    pub fn mask(&self) -> Option<&[bool]> {
        self.mask.as_deref()
    }

    pub fn set_mask(&mut self, mask: Vec<bool>) -> Result<(), FieldError> {
        if mask.len() != self.len() {
            return Err(FieldError::InvalidGrid(format!("mask has {} entries, grid has {}", mask.len(), self.len())));
        }
        self.mask = Some(mask);
        Ok(())
    }

    /// Masks every node within `margin` cells (Chebyshev distance) of a
    /// zero of `locus`: an exact zero at a node or a sign change between
    /// neighbouring nodes.
    pub fn exclude_near(&mut self, locus: impl Fn(f64, f64) -> f64, margin: usize) {
        let (n1, n2) = (self.n1, self.n2);
        let vals: Vec<f64> = (0..n2)
            .flat_map(|j| (0..n1).map(move |i| (i, j)))
            .map(|(i, j)| {
                let [a, b] = self.node(i, j);
                locus(a, b)
            })
            .collect();
        let mut hit = vec![false; n1 * n2];
        for j in 0..n2 {
            for i in 0..n1 {
                let v = vals[j * n1 + i];
                if v == 0.0 || !v.is_finite() {
                    hit[j * n1 + i] = true;
                }
                if i + 1 < n1 && v * vals[j * n1 + i + 1] < 0.0 {
                    hit[j * n1 + i] = true;
                    hit[j * n1 + i + 1] = true;
                }
                if j + 1 < n2 && v * vals[(j + 1) * n1 + i] < 0.0 {
                    hit[j * n1 + i] = true;
                    hit[(j + 1) * n1 + i] = true;
                }
            }
        }
        let mut mask = self.mask.take().unwrap_or_else(|| vec![false; n1 * n2]);
        let m = margin as isize;
        for j in 0..n2 as isize {
            for i in 0..n1 as isize {
                if !hit[(j as usize) * n1 + i as usize] {
                    continue;
                }
                for dj in -m..=m {
                    for di in -m..=m {
                        let (ii, jj) = (i + di, j + dj);
                        if ii >= 0 && jj >= 0 && (ii as usize) < n1 && (jj as usize) < n2 {
                            mask[jj as usize * n1 + ii as usize] = true;
                        }
                    }
                }
            }
        }
        self.mask = Some(mask);
    }

    /// Node indices of `p`, if `p` coincides with a node.
    pub fn locate(&self, p: &[f64]) -> Option<(usize, usize)> {
        let fi = (p[0] - self.origin[0]) / self.h1;
        let fj = (p[1] - self.origin[1]) / self.h2;
        let (ri, rj) = (fi.round(), fj.round());
        if (fi - ri).abs() > NODE_SNAP || (fj - rj).abs() > NODE_SNAP || ri < 0.0 || rj < 0.0 {
            return None;
        }
        let (i, j) = (ri as usize, rj as usize);
        (i < self.n1 && j < self.n2).then_some((i, j))
    }

    /// All nodes, `t1` index fastest.
    pub fn nodes(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.n2).flat_map(move |j| (0..self.n1).map(move |i| (i, j)))
    }

    /// Nodes at least `margin` cells from every edge.
    pub fn interior(&self, margin: usize) -> impl Iterator<Item = (usize, usize)> + '_ {
        let (n1, n2) = (self.n1, self.n2);
        self.nodes().filter(move |&(i, j)| i >= margin && j >= margin && i + margin < n1 && j + margin < n2)
    }

    /// Same node layout with the spacing halved (`2n - 1` nodes per axis).
    pub fn refined(&self) -> Self {
        Self {
            n1: 2 * self.n1 - 1,
            n2: 2 * self.n2 - 1,
            h1: self.h1 / 2.0,
            h2: self.h2 / 2.0,
            origin: self.origin,
            mask: None,
        }
    }
}

/// Samples of a scalar on a [`Grid2`], differentiated with second-order
/// central stencils.
#[derive(Debug, Clone, PartialEq)]
pub struct GridField {
    grid: Grid2,
    values: Vec<f64>,
}

impl GridField {
    pub fn new(grid: Grid2, values: Vec<f64>) -> Result<Self, FieldError> {
        if values.len() != grid.len() {
            return Err(FieldError::InvalidGrid(format!("{} values for a {}x{} grid", values.len(), grid.n1, grid.n2)));
        }
        Ok(Self { grid, values })
    }

    pub fn sample(grid: &Grid2, f: impl Fn(f64, f64) -> f64) -> Self {
        let values = grid
            .nodes()
            .map(|(i, j)| {
                let [a, b] = grid.node(i, j);
                f(a, b)
            })
            .collect();
        Self { grid: grid.clone(), values }
    }

    pub fn grid(&self) -> &Grid2 {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.values[self.grid.index(i, j)]
    }

    pub fn eval_jet(&self, p: &[f64]) -> Result<Jet2, FieldError> {
        let g = &self.grid;
        let (t1, t2) = (p[0], p[1]);
        let (i, j) = g.locate(p).ok_or(FieldError::OffNode { t1, t2 })?;
        let m = STENCIL_MARGIN;
        if i < m || j < m || i + m >= g.n1 || j + m >= g.n2 {
            return Err(FieldError::OutOfDomain { t1, t2 });
        }
        for dj in 0..3 {
            for di in 0..3 {
                if g.is_masked(i + di - 1, j + dj - 1) {
                    return Err(FieldError::Masked { t1, t2 });
                }
            }
        }
        let u = |di: isize, dj: isize| self.at((i as isize + di) as usize, (j as isize + dj) as usize);
        let (h1, h2) = (g.h1, g.h2);
        let u0 = u(0, 0);
        let d1 = (u(1, 0) - u(-1, 0)) / (2.0 * h1);
        let d2 = (u(0, 1) - u(0, -1)) / (2.0 * h2);
        let d11 = (u(1, 0) - 2.0 * u0 + u(-1, 0)) / (h1 * h1);
        let d22 = (u(0, 1) - 2.0 * u0 + u(0, -1)) / (h2 * h2);
        let d12 = (u(1, 1) - u(1, -1) - u(-1, 1) + u(-1, -1)) / (4.0 * h1 * h2);
        Ok(Jet2::from_parts(2, u0, &[d1, d2], &[&[d11, d12], &[d12, d22]])?)
    }

    /// Plain-text layout: header line, a line `n1 n2 h1 h2 t1_0 t2_0`, then
    /// one line per `t2` row holding `n1` values. Masked nodes are `nan`.
    pub fn to_text(&self) -> String {
        let g = &self.grid;
        let mut s = String::new();
        let _ = writeln!(s, "{GRID_HEADER}");
        let _ = writeln!(s, "{} {} {:.17e} {:.17e} {:.17e} {:.17e}", g.n1, g.n2, g.h1, g.h2, g.origin[0], g.origin[1]);
        for j in 0..g.n2 {
            let row: Vec<String> = (0..g.n1)
                .map(|i| if g.is_masked(i, j) { "nan".to_string() } else { format!("{:.17e}", self.at(i, j)) })
                .collect();
            let _ = writeln!(s, "{}", row.join(" "));
        }
        s
    }

    pub fn from_text(text: &str) -> Result<Self, FieldError> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        match lines.next() {
            Some(h) if h.trim() == GRID_HEADER => {}
            other => return Err(FieldError::Io(format!("bad header {other:?}"))),
        }
        let dims: Vec<&str> =
            lines.next().ok_or_else(|| FieldError::Io("missing dimension line".into()))?.split_whitespace().collect();
        if dims.len() != 6 {
            return Err(FieldError::Io("dimension line needs 6 entries".into()));
        }
        let parse_u = |s: &str| s.parse::<usize>().map_err(|e| FieldError::Io(format!("{s}: {e}")));
        let parse_f = |s: &str| s.parse::<f64>().map_err(|e| FieldError::Io(format!("{s}: {e}")));
        let mut grid = Grid2::new(
            parse_u(dims[0])?,
            parse_u(dims[1])?,
            parse_f(dims[2])?,
            parse_f(dims[3])?,
            [parse_f(dims[4])?, parse_f(dims[5])?],
        )?;
        let mut values = Vec::with_capacity(grid.len());
        for line in lines {
            for tok in line.split_whitespace() {
                values.push(parse_f(tok)?);
            }
        }
        if values.len() != grid.len() {
            return Err(FieldError::Io(format!("expected {} values, found {}", grid.len(), values.len())));
        }
        if values.iter().any(|v| v.is_nan()) {
            grid.set_mask(values.iter().map(|v| v.is_nan()).collect())?;
        }
        Ok(Self { grid, values })
    }

    pub fn write(&self, path: &Path) -> Result<(), FieldError> {
        std::fs::write(path, self.to_text()).map_err(|e| FieldError::Io(format!("{}: {e}", path.display())))
    }

    pub fn read(path: &Path) -> Result<Self, FieldError> {
        let text = std::fs::read_to_string(path).map_err(|e| FieldError::Io(format!("{}: {e}", path.display())))?;
        Self::from_text(&text)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cube_grid(h: f64) -> GridField {
        let n = (1.0 / h).round() as usize + 1;
        let grid = Grid2::new(n, 9, h, h, [0.5, 0.0]).unwrap();
        GridField::sample(&grid, |t1, _| t1.powi(3))
    }

    #[test]
    fn stencil_second_derivative_of_cube() {
        let f = cube_grid(0.01);
        let j = f.eval_jet(&[1.0, 0.04]).unwrap();
        assert!((j.dd(0, 0) - 6.0).abs() <= 1e-3);
        assert!((j.d(0) - 3.0).abs() <= 1e-3);
        assert_eq!(j.dd(1, 1), 0.0);
    }

    #[test]
    fn boundary_node_is_out_of_domain() {
        let f = cube_grid(0.01);
        assert!(matches!(f.eval_jet(&[0.5, 0.04]), Err(FieldError::OutOfDomain { .. })));
        assert!(matches!(f.eval_jet(&[0.51, 0.04]), Err(FieldError::OutOfDomain { .. })));
        assert!(matches!(f.eval_jet(&[0.523, 0.04]), Err(FieldError::OffNode { .. })));
    }

    #[test]
    fn masked_cells_are_rejected() {
        let mut grid = Grid2::from_window([-1.0, 1.0, -1.0, 1.0], 21, 21).unwrap();
        grid.exclude_near(|t1, _| t1, 1);
        let f = GridField::sample(&grid, |a, b| a + b);
        assert!(matches!(f.eval_jet(&[0.0, 0.0]), Err(FieldError::Masked { .. })));
        assert!(matches!(f.eval_jet(&[0.2, 0.0]), Err(FieldError::Masked { .. })));
        assert!(f.eval_jet(&[0.4, 0.0]).is_ok());
        assert!(grid.masked_count() >= 3 * 21 && grid.masked_count() <= 4 * 21);
    }

    #[test]
    fn mixed_derivative_and_text_layout() {
        let grid = Grid2::from_window([0.0, 1.0, 0.0, 2.0], 41, 81).unwrap();
        let f = GridField::sample(&grid, |a, b| (a * b).sin());
        let j = f.eval_jet(&grid.node(20, 40)).unwrap();
        let (a, b) = (0.5f64, 1.0f64);
        let exact = (a * b).cos() - a * b * (a * b).sin();
        assert!((j.dd(0, 1) - exact).abs() < 2e-3);
        let back = GridField::from_text(&f.to_text()).unwrap();
        assert_eq!(back, f);
    }
}
