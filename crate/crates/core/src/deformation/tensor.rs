use super::fields::SymmetricField;
use super::grid::Grid;
use crate::sym;
use crate::{Error, Result};

/// Per-cell symmetric gradient `e(u) = (Du + Du^T)/2` of nodal values `u`.
///
/// `u` holds `d` components per node, nodes in grid order. In each cell,
/// `∂u_a/∂x_b` is the average of the forward differences along axis `b` over
/// the cell's edges parallel to `b`, which is the gradient of the multilinear
/// interpolant at the cell center.
pub fn deformation_tensor(u: &[f64], grid: &Grid) -> Result<SymmetricField> {
    let d = grid.dim();
    if u.len() != grid.n_nodes() * d {
        return Err(Error::GridMismatch(format!(
            "expected {} nodal values, got {}",
            grid.n_nodes() * d,
            u.len()
        )));
    }
    let corners_per_cell = 1usize << d;
    let edge_avg = 1.0 / (corners_per_cell / 2) as f64;
    let h: Vec<f64> = (0..d).map(|k| grid.spacing(k)).collect();
    let mut out = SymmetricField::zeros(d, grid.n_cells());
    let mut du = vec![0.0; d * d];
    for c in 0..grid.n_cells() {
        du.iter_mut().for_each(|x| *x = 0.0);
        let corners = grid.cell_corners(c);
        for (corner, &lo) in corners.iter().enumerate() {
            for b in (0..d).filter(|b| (corner >> b) & 1 == 0) {
                let hi = corners[corner | (1 << b)];
                for a in 0..d {
                    du[a * d + b] += u[hi * d + a] - u[lo * d + a];
                }
            }
        }
        for a in 0..d {
            for b in 0..d {
                du[a * d + b] *= edge_avg / h[b];
            }
        }
        out.cell_mut(c).copy_from_slice(&sym::sym_part(d, &du));
    }
    Ok(out)
}

/// A discrete deformation `u: nodes -> R^d` with its symmetric gradient.
#[derive(Debug, Clone, PartialEq)]
pub struct TestDeformation {
    u: Vec<f64>,
    e: SymmetricField,
}

impl TestDeformation {
    pub fn from_nodes(grid: &Grid, u: Vec<f64>) -> Result<Self> {
        let e = deformation_tensor(&u, grid)?;
        Ok(TestDeformation { u, e })
    }

    /// Samples `f` at the grid nodes.
    pub fn from_fn(grid: &Grid, f: impl Fn(&[f64]) -> Vec<f64>) -> Result<Self> {
        let d = grid.dim();
        let mut u = Vec::with_capacity(grid.n_nodes() * d);
        for n in 0..grid.n_nodes() {
            let v = f(&grid.node_position(n));
            if v.len() != d {
                return Err(Error::LengthMismatch {
                    expected: d,
                    got: v.len(),
                });
            }
            u.extend(v);
        }
        Self::from_nodes(grid, u)
    }

    /// `u(x) = x`; its deformation tensor is the identity in every cell.
    pub fn identity(grid: &Grid) -> Self {
        let u: Vec<f64> = (0..grid.n_nodes()).flat_map(|n| grid.node_position(n)).collect();
        let e = SymmetricField::constant(grid.dim(), grid.n_cells(), &sym::identity(grid.dim()));
        TestDeformation { u, e }
    }

    /// `u(x) = A (x - center)` for a row-major `d x d` matrix `A`.
    pub fn linear(grid: &Grid, a: &[f64], center: &[f64]) -> Result<Self> {
        let d = grid.dim();
        if a.len() != d * d || center.len() != d {
            return Err(Error::LengthMismatch {
                expected: d * d,
                got: a.len(),
            });
        }
        Self::from_fn(grid, |x| {
            (0..d)
                .map(|i| (0..d).map(|j| a[i * d + j] * (x[j] - center[j])).sum())
                .collect()
        })
    }

    /// Hat function: component `comp` equal to 1 at `node`, zero at every
    /// other node.
    pub fn hat(grid: &Grid, node: usize, comp: usize) -> Self {
        let d = grid.dim();
        let mut u = vec![0.0; grid.n_nodes() * d];
        u[node * d + comp] = 1.0;
        let e = deformation_tensor(&u, grid).expect("sizes match the grid");
        TestDeformation { u, e }
    }

    pub fn u(&self) -> &[f64] {
        &self.u
    }

    pub fn e(&self) -> &SymmetricField {
        &self.e
    }

    pub fn dim(&self) -> usize {
        self.e.dim()
    }

    pub fn node_value(&self, node: usize) -> &[f64] {
        let d = self.dim();
        &self.u[node * d..(node + 1) * d]
    }

    /// Multilinear interpolation of `u` at `point`.
    pub fn value_at(&self, grid: &Grid, point: &[f64]) -> Option<Vec<f64>> {
        let d = self.dim();
        let stencil = grid.stencil(point)?;
        let mut out = vec![0.0; d];
        for (node, w) in stencil {
            for a in 0..d {
                out[a] += w * self.u[node * d + a];
            }
        }
        Some(out)
    }

    pub fn vanishes_on_boundary(&self, grid: &Grid) -> bool {
        (0..grid.n_nodes())
            .filter(|&n| grid.is_boundary_node(n))
            .all(|n| self.node_value(n).iter().all(|&x| x == 0.0))
    }

    /// Nodal values as points of `R^d`, for pairwise monotonicity tests.
    pub fn node_values(&self) -> Vec<&[f64]> {
        self.u.chunks_exact(self.dim()).collect()
    }

    /// `alpha * self + beta * other`.
    pub fn combine(&self, alpha: f64, beta: f64, other: &TestDeformation) -> TestDeformation {
        let lin = |a: &[f64], b: &[f64]| -> Vec<f64> {
            a.iter().zip(b).map(|(x, y)| alpha * x + beta * y).collect()
        };
        TestDeformation {
            u: lin(&self.u, &other.u),
            e: SymmetricField::from_packed(self.dim(), lin(self.e.data(), other.e.data()))
                .expect("same shape"),
        }
    }
}
