use serde::{Deserialize, Serialize};

use crate::sym::MAX_DIM;
use crate::{Error, Result};

/// Axis-aligned box `[lo, hi]` split into `n[k]` equal cells per axis.
///
/// Nodes and cells are numbered with axis 0 varying fastest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "GridRepr", into = "GridRepr")]
pub struct Grid {
    lo: Vec<f64>,
    hi: Vec<f64>,
    n: Vec<usize>,
}

#[derive(Serialize, Deserialize)]
struct GridRepr {
    lo: Vec<f64>,
    hi: Vec<f64>,
    n: Vec<usize>,
}

impl TryFrom<GridRepr> for Grid {
    type Error = Error;

    fn try_from(r: GridRepr) -> Result<Self> {
        Grid::new(r.lo, r.hi, r.n)
    }
}

impl From<Grid> for GridRepr {
    fn from(g: Grid) -> Self {
        GridRepr {
            lo: g.lo,
            hi: g.hi,
            n: g.n,
        }
    }
}

impl Grid {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>, n: Vec<usize>) -> Result<Self> {
        let d = n.len();
        if d == 0 || d > MAX_DIM {
            return Err(Error::InvalidGrid(format!("dimension {d} not in 1..=3")));
        }
        if lo.len() != d || hi.len() != d {
            return Err(Error::InvalidGrid("lo, hi and n must have equal length".into()));
        }
        for k in 0..d {
            if n[k] < 2 {
                return Err(Error::InvalidGrid(format!("axis {k} needs at least 2 cells")));
            }
            if !(lo[k].is_finite() && hi[k].is_finite() && hi[k] > lo[k]) {
                return Err(Error::InvalidGrid(format!("axis {k} needs lo < hi")));
            }
        }
        Ok(Grid { lo, hi, n })
    }

    /// The same extent and cell count on every axis.
    pub fn cube(d: usize, lo: f64, hi: f64, n: usize) -> Result<Self> {
        Grid::new(vec![lo; d], vec![hi; d], vec![n; d])
    }

    pub fn dim(&self) -> usize {
        self.n.len()
    }

    pub fn lo(&self) -> &[f64] {
        &self.lo
    }

    pub fn hi(&self) -> &[f64] {
        &self.hi
    }

    pub fn cells_per_axis(&self) -> &[usize] {
        &self.n
    }

    pub fn spacing(&self, axis: usize) -> f64 {
        (self.hi[axis] - self.lo[axis]) / self.n[axis] as f64
    }

    pub fn n_cells(&self) -> usize {
        self.n.iter().product()
    }

    pub fn n_nodes(&self) -> usize {
        self.n.iter().map(|k| k + 1).product()
    }

    pub fn cell_volume(&self) -> f64 {
        (0..self.dim()).map(|k| self.spacing(k)).product()
    }

    pub fn node_index(&self, multi: &[usize]) -> usize {
        let mut idx = 0;
        let mut stride = 1;
        for (k, &i) in multi.iter().enumerate() {
            idx += i * stride;
            stride *= self.n[k] + 1;
        }
        idx
    }

    pub fn node_multi(&self, mut idx: usize) -> Vec<usize> {
        self.n
            .iter()
            .map(|&nk| {
                let i = idx % (nk + 1);
                idx /= nk + 1;
                i
            })
            .collect()
    }

    pub fn cell_index(&self, multi: &[usize]) -> usize {
        let mut idx = 0;
        let mut stride = 1;
        for (k, &i) in multi.iter().enumerate() {
            idx += i * stride;
            stride *= self.n[k];
        }
        idx
    }

    pub fn cell_multi(&self, mut idx: usize) -> Vec<usize> {
        self.n
            .iter()
            .map(|&nk| {
                let i = idx % nk;
                idx /= nk;
                i
            })
            .collect()
    }

    pub fn node_position(&self, idx: usize) -> Vec<f64> {
        self.node_multi(idx)
            .iter()
            .enumerate()
            .map(|(k, &i)| self.lo[k] + i as f64 * self.spacing(k))
            .collect()
    }

    pub fn node_positions(&self) -> Vec<Vec<f64>> {
        (0..self.n_nodes()).map(|i| self.node_position(i)).collect()
    }

    pub fn cell_center(&self, idx: usize) -> Vec<f64> {
        self.cell_multi(idx)
            .iter()
            .enumerate()
            .map(|(k, &i)| self.lo[k] + (i as f64 + 0.5) * self.spacing(k))
            .collect()
    }

    /// The `2^d` corner nodes of a cell; bit `b` of the position in the
    /// returned list is the offset along axis `b`.
    pub fn cell_corners(&self, cell: usize) -> Vec<usize> {
        let base = self.cell_multi(cell);
        let d = self.dim();
        (0..1usize << d)
            .map(|corner| {
                let multi: Vec<usize> = (0..d).map(|b| base[b] + ((corner >> b) & 1)).collect();
                self.node_index(&multi)
            })
            .collect()
    }

    pub fn is_boundary_node(&self, idx: usize) -> bool {
        self.node_multi(idx)
            .iter()
            .zip(&self.n)
            .any(|(&i, &nk)| i == 0 || i == nk)
    }

    pub fn interior_nodes(&self) -> Vec<usize> {
        (0..self.n_nodes())
            .filter(|&i| !self.is_boundary_node(i))
            .collect()
    }

    /// True if the cell touches the boundary of the box.
    pub fn is_boundary_cell(&self, idx: usize) -> bool {
        self.cell_multi(idx)
            .iter()
            .zip(&self.n)
            .any(|(&i, &nk)| i == 0 || i + 1 == nk)
    }

    /// Multilinear interpolation weights of the corner nodes of the cell
    /// containing `point`, or `None` outside the box.
    pub fn stencil(&self, point: &[f64]) -> Option<Vec<(usize, f64)>> {
        let d = self.dim();
        if point.len() != d {
            return None;
        }
        let mut base = vec![0usize; d];
        let mut theta = vec![0.0; d];
        for k in 0..d {
            let h = self.spacing(k);
            let s = (point[k] - self.lo[k]) / h;
            let slack = 1e-12 * self.n[k] as f64;
            if !s.is_finite() || s < -slack || s > self.n[k] as f64 + slack {
                return None;
            }
            let s = s.clamp(0.0, self.n[k] as f64);
            let i = (s.floor() as usize).min(self.n[k] - 1);
            base[k] = i;
            theta[k] = s - i as f64;
        }
        let out = (0..1usize << d)
            .map(|corner| {
                let mut w = 1.0;
                let multi: Vec<usize> = (0..d)
                    .map(|b| {
                        let bit = (corner >> b) & 1;
                        w *= if bit == 1 { theta[b] } else { 1.0 - theta[b] };
                        base[b] + bit
                    })
                    .collect();
                (self.node_index(&multi), w)
            })
            .collect();
        Some(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validation() {
        assert!(Grid::new(vec![0.0], vec![1.0], vec![1]).is_err());
        assert!(Grid::new(vec![1.0], vec![0.0], vec![4]).is_err());
        assert!(Grid::new(vec![0.0; 4], vec![1.0; 4], vec![2; 4]).is_err());
        assert!(Grid::cube(2, 0.0, 1.0, 4).is_ok());
    }

    #[test]
    fn numbering_roundtrip() {
        let g = Grid::new(vec![0.0, -1.0], vec![2.0, 1.0], vec![4, 3]).unwrap();
        assert_eq!(g.n_nodes(), 20);
        assert_eq!(g.n_cells(), 12);
        for i in 0..g.n_nodes() {
            assert_eq!(g.node_index(&g.node_multi(i)), i);
        }
        assert_eq!(g.node_position(g.node_index(&[4, 3])), vec![2.0, 1.0]);
        assert_eq!(g.cell_center(0), vec![0.25, -1.0 + 1.0 / 3.0]);
        assert_eq!(g.interior_nodes().len(), 3 * 2);
        assert_eq!(g.cell_corners(0), vec![0, 1, 5, 6]);
    }

    #[test]
    fn stencil_weights() {
        let g = Grid::cube(2, 0.0, 1.0, 2).unwrap();
        let s = g.stencil(&[0.25, 0.75]).unwrap();
        let total: f64 = s.iter().map(|p| p.1).sum();
        assert!((total - 1.0).abs() < 1e-15);
        // reproduces linear functions
        let x: f64 = s.iter().map(|&(n, w)| w * g.node_position(n)[0]).sum();
        assert!((x - 0.25).abs() < 1e-15);
        assert!(g.stencil(&[1.0, 1.0]).is_some());
        assert!(g.stencil(&[1.1, 0.5]).is_none());
    }
}
