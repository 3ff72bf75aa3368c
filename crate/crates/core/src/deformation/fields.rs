use serde::{Deserialize, Serialize};

use super::grid::Grid;
use crate::sym;
use crate::{Error, Result};

/// One packed symmetric `d x d` matrix per grid cell.
///
/// Used both for deformation tensors (pointwise values) and for
/// matrix-valued measures, where each entry is the mass of the cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "FieldRepr", into = "FieldRepr")]
pub struct SymmetricField {
    dim: usize,
    data: Vec<f64>,
}

/// A matrix-valued measure stored as per-cell masses.
pub type MatrixMeasureField = SymmetricField;

#[derive(Serialize, Deserialize)]
struct FieldRepr {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    dim: Option<usize>,
    cells: Vec<Vec<f64>>,
}

impl TryFrom<FieldRepr> for SymmetricField {
    type Error = Error;

    fn try_from(r: FieldRepr) -> Result<Self> {
        let dim = match (r.dim, r.cells.first()) {
            (Some(d), _) => d,
            (None, Some(c)) => sym::dim_from_packed_len(c.len()).ok_or_else(|| {
                Error::InvalidArgument(format!("cell with {} entries is not a packed matrix", c.len()))
            })?,
            (None, None) => {
                return Err(Error::InvalidArgument("empty field needs an explicit dim".into()))
            }
        };
        SymmetricField::from_cells(dim, &r.cells)
    }
}

impl From<SymmetricField> for FieldRepr {
    fn from(f: SymmetricField) -> Self {
        FieldRepr {
            dim: f.data.is_empty().then_some(f.dim),
            cells: f.cells().map(<[f64]>::to_vec).collect(),
        }
    }
}

impl SymmetricField {
    pub fn zeros(dim: usize, n_cells: usize) -> Self {
        SymmetricField {
            dim,
            data: vec![0.0; n_cells * sym::packed_len(dim)],
        }
    }

    pub fn from_packed(dim: usize, data: Vec<f64>) -> Result<Self> {
        if !(1..=sym::MAX_DIM).contains(&dim) {
            return Err(Error::InvalidArgument(format!("unsupported dimension {dim}")));
        }
        if data.len() % sym::packed_len(dim) != 0 {
            return Err(Error::LengthMismatch {
                expected: sym::packed_len(dim),
                got: data.len() % sym::packed_len(dim),
            });
        }
        if data.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidArgument("non-finite matrix entry".into()));
        }
        Ok(SymmetricField { dim, data })
    }

    pub fn from_cells(dim: usize, cells: &[Vec<f64>]) -> Result<Self> {
        let s = sym::packed_len(dim);
        if let Some(c) = cells.iter().find(|c| c.len() != s) {
            return Err(Error::LengthMismatch {
                expected: s,
                got: c.len(),
            });
        }
        Self::from_packed(dim, cells.concat())
    }

    /// The same matrix in every cell.
    pub fn constant(dim: usize, n_cells: usize, packed: &[f64]) -> Self {
        SymmetricField {
            dim,
            data: packed.repeat(n_cells),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn packed_len(&self) -> usize {
        sym::packed_len(self.dim)
    }

    pub fn n_cells(&self) -> usize {
        self.data.len() / self.packed_len()
    }

    pub fn cell(&self, c: usize) -> &[f64] {
        let s = self.packed_len();
        &self.data[c * s..(c + 1) * s]
    }

    pub fn cell_mut(&mut self, c: usize) -> &mut [f64] {
        let s = self.packed_len();
        &mut self.data[c * s..(c + 1) * s]
    }

    pub fn cells(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks_exact(self.packed_len())
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    /// `sum_cells <A_c, B_c>`.
    pub fn pairing(&self, other: &SymmetricField) -> f64 {
        debug_assert_eq!(self.dim, other.dim);
        debug_assert_eq!(self.data.len(), other.data.len());
        self.cells()
            .zip(other.cells())
            .map(|(a, b)| sym::pairing(self.dim, a, b))
            .sum()
    }

    pub fn total_trace(&self) -> f64 {
        self.cells().map(|c| sym::trace(self.dim, c)).sum()
    }

    /// Smallest eigenvalue over all cells (`+inf` for an empty field).
    pub fn min_eigenvalue(&self) -> f64 {
        self.cells()
            .map(|c| sym::min_eigenvalue(self.dim, c))
            .fold(f64::INFINITY, f64::min)
    }

    /// Largest cellwise Frobenius norm.
    pub fn max_norm(&self) -> f64 {
        self.cells()
            .map(|c| sym::frobenius_norm(self.dim, c))
            .fold(0.0, f64::max)
    }

    pub fn sup_entry(&self) -> f64 {
        self.data.iter().fold(0.0_f64, |a, x| a.max(x.abs()))
    }

    /// Min eigenvalue `>= -tol_rel * max_norm`.
    pub fn is_psd(&self, tol_rel: f64) -> bool {
        self.min_eigenvalue() >= -tol_rel * self.max_norm()
    }

    pub fn scaled(&self, factor: f64) -> SymmetricField {
        SymmetricField {
            dim: self.dim,
            data: self.data.iter().map(|x| factor * x).collect(),
        }
    }

    /// `self + factor * other`.
    pub fn add_scaled(&self, factor: f64, other: &SymmetricField) -> SymmetricField {
        SymmetricField {
            dim: self.dim,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a + factor * b)
                .collect(),
        }
    }

    pub fn check_grid(&self, grid: &Grid) -> Result<()> {
        if self.dim != grid.dim() || self.n_cells() != grid.n_cells() {
            return Err(Error::GridMismatch(format!(
                "field has {} cells of dimension {}, grid has {} cells of dimension {}",
                self.n_cells(),
                self.dim,
                grid.n_cells(),
                grid.dim()
            )));
        }
        Ok(())
    }
}

/// Atoms in `R^d` carrying vectors (the measure `F`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "VectorRepr", into = "VectorRepr")]
pub struct VectorMeasure {
    dim: usize,
    atoms: Vec<Vec<f64>>,
    vectors: Vec<Vec<f64>>,
    first_moment: f64,
}

#[derive(Serialize, Deserialize)]
struct VectorRepr {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    dim: Option<usize>,
    atoms: Vec<Vec<f64>>,
    vectors: Vec<Vec<f64>>,
}

impl TryFrom<VectorRepr> for VectorMeasure {
    type Error = Error;

    fn try_from(r: VectorRepr) -> Result<Self> {
        let dim = r.dim.or_else(|| r.atoms.first().map(Vec::len)).unwrap_or(0);
        VectorMeasure::new(dim, r.atoms, r.vectors)
    }
}

impl From<VectorMeasure> for VectorRepr {
    fn from(m: VectorMeasure) -> Self {
        VectorRepr {
            dim: m.atoms.is_empty().then_some(m.dim),
            atoms: m.atoms,
            vectors: m.vectors,
        }
    }
}

impl VectorMeasure {
    pub fn new(dim: usize, atoms: Vec<Vec<f64>>, vectors: Vec<Vec<f64>>) -> Result<Self> {
        if atoms.len() != vectors.len() {
            return Err(Error::LengthMismatch {
                expected: atoms.len(),
                got: vectors.len(),
            });
        }
        for v in atoms.iter().chain(&vectors) {
            if v.len() != dim {
                return Err(Error::LengthMismatch {
                    expected: dim,
                    got: v.len(),
                });
            }
            if v.iter().any(|x| !x.is_finite()) {
                return Err(Error::InvalidMeasure("non-finite entry".into()));
            }
        }
        let norm = |v: &[f64]| v.iter().map(|x| x * x).sum::<f64>().sqrt();
        let first_moment = atoms
            .iter()
            .zip(&vectors)
            .map(|(x, f)| norm(x) * f.iter().map(|c| c.abs()).sum::<f64>())
            .sum();
        Ok(VectorMeasure {
            dim,
            atoms,
            vectors,
            first_moment,
        })
    }

    pub fn zero(dim: usize) -> Self {
        VectorMeasure {
            dim,
            atoms: Vec::new(),
            vectors: Vec::new(),
            first_moment: 0.0,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn atoms(&self) -> &[Vec<f64>] {
        &self.atoms
    }

    pub fn vectors(&self) -> &[Vec<f64>] {
        &self.vectors
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    /// `sum_i |x_i| sum_k |f_ik|`.
    pub fn first_moment(&self) -> f64 {
        self.first_moment
    }

    /// `sum_i x_i · f_i`.
    pub fn moment(&self) -> f64 {
        self.atoms
            .iter()
            .zip(&self.vectors)
            .map(|(x, f)| x.iter().zip(f).map(|(a, b)| a * b).sum::<f64>())
            .sum()
    }

    pub fn scaled(&self, factor: f64) -> VectorMeasure {
        VectorMeasure {
            dim: self.dim,
            atoms: self.atoms.clone(),
            vectors: self
                .vectors
                .iter()
                .map(|v| v.iter().map(|x| factor * x).collect())
                .collect(),
            first_moment: factor.abs() * self.first_moment,
        }
    }

    pub(crate) fn check_dim(&self, d: usize) -> Result<()> {
        if !self.is_empty() && self.dim != d {
            return Err(Error::GridMismatch(format!(
                "measure has dimension {}, grid has {d}",
                self.dim
            )));
        }
        Ok(())
    }
}

/// Weighted atoms in `R^d` (a density such as `ϱ`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "PointRepr", into = "PointRepr")]
pub struct PointMeasure {
    atoms: Vec<Vec<f64>>,
    weights: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct PointRepr {
    atoms: Vec<Vec<f64>>,
    weights: Vec<f64>,
}

impl TryFrom<PointRepr> for PointMeasure {
    type Error = Error;

    fn try_from(r: PointRepr) -> Result<Self> {
        PointMeasure::new(r.atoms, r.weights)
    }
}

impl From<PointMeasure> for PointRepr {
    fn from(m: PointMeasure) -> Self {
        PointRepr {
            atoms: m.atoms,
            weights: m.weights,
        }
    }
}

impl PointMeasure {
    pub fn new(atoms: Vec<Vec<f64>>, weights: Vec<f64>) -> Result<Self> {
        crate::cone_core::check_weights(&weights)?;
        if atoms.len() != weights.len() {
            return Err(Error::LengthMismatch {
                expected: weights.len(),
                got: atoms.len(),
            });
        }
        let d = atoms[0].len();
        if atoms.iter().any(|a| a.len() != d || a.iter().any(|x| !x.is_finite())) {
            return Err(Error::InvalidMeasure("atoms must be finite points of equal dimension".into()));
        }
        Ok(PointMeasure { atoms, weights })
    }

    pub fn atoms(&self) -> &[Vec<f64>] {
        &self.atoms
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn dim(&self) -> usize {
        self.atoms[0].len()
    }
}
