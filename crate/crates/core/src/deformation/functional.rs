use serde::{Deserialize, Serialize};

use super::fields::{SymmetricField, VectorMeasure};
use super::grid::Grid;
use super::tensor::TestDeformation;
use crate::{Error, Result};

/// Relative tolerance of the positivity check, `tol = 1e-9 (1 + |G(id)|)`.
pub const TOL_G_REL: f64 = 1e-9;

/// Interpolation stencils of the atoms of `F`.
pub(crate) fn atom_stencils(f: &VectorMeasure, grid: &Grid) -> Result<Vec<Vec<(usize, f64)>>> {
    f.check_dim(grid.dim())?;
    f.atoms()
        .iter()
        .enumerate()
        .map(|(i, x)| {
            grid.stencil(x).ok_or_else(|| Error::SupportExceedsGrid {
                index: i,
                point: x.clone(),
            })
        })
        .collect()
}

/// `-sum_i u(x_i)·f_i` with precomputed stencils.
pub(crate) fn load_term(f: &VectorMeasure, stencils: &[Vec<(usize, f64)>], u: &[f64], d: usize) -> f64 {
    let mut acc = 0.0;
    for (fi, st) in f.vectors().iter().zip(stencils) {
        for &(node, w) in st {
            for a in 0..d {
                acc += w * u[node * d + a] * fi[a];
            }
        }
    }
    -acc
}

/// `G(u) = -sum_i u(x_i)·f_i - sum_cells <e(u), H>`, with `u` interpolated
/// multilinearly at the atoms.
pub fn evaluate_g(
    f: &VectorMeasure,
    h: &SymmetricField,
    u: &TestDeformation,
    grid: &Grid,
) -> Result<f64> {
    h.check_grid(grid)?;
    u.e().check_grid(grid)?;
    let stencils = atom_stencils(f, grid)?;
    Ok(load_term(f, &stencils, u.u(), grid.dim()) - u.e().pairing(h))
}

/// Outcome of evaluating `G` on a sampled monotone family.
///
/// Passing is necessary for the positivity hypothesis on all monotone maps,
/// not sufficient.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InequalityReport {
    pub min_g: f64,
    pub values: Vec<f64>,
    pub violating_members: Vec<usize>,
    pub g_identity: f64,
    pub tol: f64,
}

impl InequalityReport {
    pub fn passed(&self) -> bool {
        self.violating_members.is_empty()
    }
}

/// Evaluates `G` on every member; members with `G < -tol` are violations.
pub fn check_inequality(
    f: &VectorMeasure,
    h: &SymmetricField,
    family: &[TestDeformation],
    grid: &Grid,
) -> Result<InequalityReport> {
    if family.is_empty() {
        return Err(Error::InvalidArgument("empty test family".into()));
    }
    h.check_grid(grid)?;
    let stencils = atom_stencils(f, grid)?;
    let d = grid.dim();
    let g = |u: &TestDeformation| -> Result<f64> {
        u.e().check_grid(grid)?;
        Ok(load_term(f, &stencils, u.u(), d) - u.e().pairing(h))
    };
    let g_identity = g(&TestDeformation::identity(grid))?;
    let tol = TOL_G_REL * (1.0 + g_identity.abs());
    let values = family.iter().map(g).collect::<Result<Vec<_>>>()?;
    let violating_members = values
        .iter()
        .enumerate()
        .filter(|(_, &v)| v < -tol)
        .map(|(i, _)| i)
        .collect();
    Ok(InequalityReport {
        min_g: values.iter().copied().fold(f64::INFINITY, f64::min),
        values,
        violating_members,
        g_identity,
        tol,
    })
}
