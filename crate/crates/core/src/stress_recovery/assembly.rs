use nalgebra::DMatrix;

use crate::deformation::{
    atom_stencils, load_term, Grid, SymmetricField, TestDeformation, VectorMeasure,
};
use crate::sym;
use crate::{Error, Result};

/// Data of the representation problem `G(u) = sum_cells <e(u), M>`.
#[derive(Debug, Clone, PartialEq)]
pub struct RepresentationProblem {
    f: VectorMeasure,
    h: SymmetricField,
    grid: Grid,
    basis: Vec<TestDeformation>,
    include_identity_row: bool,
}

impl RepresentationProblem {
    /// Problem over the hat basis, with the identity row enabled.
    pub fn new(f: VectorMeasure, h: SymmetricField, grid: Grid) -> Result<Self> {
        let basis = hat_basis(&grid);
        Self::with_basis(f, h, grid, basis)
    }

    /// Problem over a caller-supplied basis. Every member must vanish on the
    /// grid boundary.
    pub fn with_basis(
        f: VectorMeasure,
        h: SymmetricField,
        grid: Grid,
        basis: Vec<TestDeformation>,
    ) -> Result<Self> {
        h.check_grid(&grid)?;
        atom_stencils(&f, &grid)?;
        for (k, u) in basis.iter().enumerate() {
            u.e().check_grid(&grid)?;
            if !u.vanishes_on_boundary(&grid) {
                return Err(Error::InvalidArgument(format!(
                    "basis member {k} does not vanish on the grid boundary"
                )));
            }
        }
        Ok(RepresentationProblem {
            f,
            h,
            grid,
            basis,
            include_identity_row: true,
        })
    }

    pub fn with_identity_row(mut self, include: bool) -> Self {
        self.include_identity_row = include;
        self
    }

    pub fn f(&self) -> &VectorMeasure {
        &self.f
    }

    pub fn h(&self) -> &SymmetricField {
        &self.h
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn basis(&self) -> &[TestDeformation] {
        &self.basis
    }

    pub fn include_identity_row(&self) -> bool {
        self.include_identity_row
    }

    pub fn dim(&self) -> usize {
        self.grid.dim()
    }

    /// `G(u)` for a deformation on this grid.
    pub fn g(&self, u: &TestDeformation) -> Result<f64> {
        crate::deformation::evaluate_g(&self.f, &self.h, u, &self.grid)
    }

    /// `G(id) = -sum x_i·f_i - sum tr H`, the bound on the total trace of `M`.
    pub fn trace_budget(&self) -> f64 {
        -self.f.moment() - self.h.total_trace()
    }

    /// The same problem with `F` replaced by `-F`.
    pub fn with_flipped_load(&self) -> Self {
        RepresentationProblem {
            f: self.f.scaled(-1.0),
            ..self.clone()
        }
    }
}

/// One hat function per interior node and component, node-major.
pub fn hat_basis(grid: &Grid) -> Vec<TestDeformation> {
    let d = grid.dim();
    grid.interior_nodes()
        .into_iter()
        .flat_map(|n| (0..d).map(move |a| (n, a)))
        .map(|(n, a)| TestDeformation::hat(grid, n, a))
        .collect()
}

/// Compressed sparse rows.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseMatrix {
    n_cols: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<f64>,
}

impl SparseMatrix {
    fn new(n_cols: usize) -> Self {
        SparseMatrix {
            n_cols,
            row_ptr: vec![0],
            cols: Vec::new(),
            vals: Vec::new(),
        }
    }

    pub(crate) fn from_rows(n_cols: usize, rows: &[Vec<(usize, f64)>]) -> Self {
        let mut a = SparseMatrix::new(n_cols);
        for r in rows {
            a.push_row(r.iter().copied());
        }
        a
    }

    fn push_row(&mut self, entries: impl IntoIterator<Item = (usize, f64)>) {
        for (c, v) in entries {
            self.cols.push(c);
            self.vals.push(v);
        }
        self.row_ptr.push(self.cols.len());
    }

    pub fn n_rows(&self) -> usize {
        self.row_ptr.len() - 1
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    pub fn row(&self, i: usize) -> (&[usize], &[f64]) {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        (&self.cols[r.clone()], &self.vals[r])
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        (0..self.n_rows())
            .map(|i| {
                let (c, v) = self.row(i);
                c.iter().zip(v).map(|(&j, a)| a * x[j]).sum()
            })
            .collect()
    }

    pub fn mul_t_vec(&self, y: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.n_cols];
        for (i, yi) in y.iter().enumerate() {
            let (c, v) = self.row(i);
            for (&j, a) in c.iter().zip(v) {
                out[j] += a * yi;
            }
        }
        out
    }

    /// Dense `A Aᵀ`.
    pub fn gram(&self) -> DMatrix<f64> {
        let m = self.n_rows();
        let mut by_col: Vec<Vec<(usize, f64)>> = vec![Vec::new(); self.n_cols];
        for i in 0..m {
            let (c, v) = self.row(i);
            for (&j, &a) in c.iter().zip(v) {
                by_col[j].push((i, a));
            }
        }
        let mut g = DMatrix::zeros(m, m);
        for col in &by_col {
            for &(r1, a1) in col {
                for &(r2, a2) in col {
                    g[(r1, r2)] += a1 * a2;
                }
            }
        }
        g
    }

    /// Multiplies column `j` by `factor[j]`.
    pub(crate) fn scale_columns(&self, factor: &[f64]) -> SparseMatrix {
        SparseMatrix {
            vals: self
                .cols
                .iter()
                .zip(&self.vals)
                .map(|(&j, v)| v * factor[j])
                .collect(),
            ..self.clone()
        }
    }
}

/// Linear constraints `A vec(M) = b` on the packed cell entries of `M`.
///
/// Off-diagonal unknowns carry twice the tensor entry so that `A vec(M)` is
/// the Frobenius pairing.
#[derive(Debug, Clone, PartialEq)]
pub struct Constraints {
    pub a: SparseMatrix,
    pub b: Vec<f64>,
    /// Index of the trace row, when present; always the last row.
    pub identity_row: Option<usize>,
    pub dim: usize,
}

impl Constraints {
    pub fn n_unknowns(&self) -> usize {
        self.a.n_cols()
    }

    /// `A vec(M) - b`.
    pub fn residual(&self, m: &SymmetricField) -> Vec<f64> {
        self.a
            .mul_vec(m.data())
            .into_iter()
            .zip(&self.b)
            .map(|(x, b)| x - b)
            .collect()
    }

    /// Largest residual over the basis rows, excluding the trace row.
    pub fn basis_residual_inf(&self, m: &SymmetricField) -> f64 {
        let r = self.residual(m);
        let k = self.identity_row.unwrap_or(r.len());
        r[..k].iter().fold(0.0, |a, x| a.max(x.abs()))
    }

    pub fn b_sup(&self) -> f64 {
        self.b.iter().fold(0.0, |a, x| a.max(x.abs()))
    }

    /// Per-unknown factor turning packed entries into coordinates where the
    /// Euclidean product is the Frobenius product (off-diagonals times sqrt 2).
    pub(crate) fn svec_factors(&self) -> Vec<f64> {
        let p = sym::packed_len(self.dim);
        (0..self.n_unknowns())
            .map(|k| {
                if sym::is_diagonal_slot(self.dim, k % p) {
                    1.0
                } else {
                    std::f64::consts::SQRT_2
                }
            })
            .collect()
    }
}

/// Pairing row of a symmetric field: `sum_cells <e, M>` as coefficients on
/// the packed unknowns.
pub(crate) fn pairing_row(e: &SymmetricField) -> Vec<(usize, f64)> {
    let d = e.dim();
    let p = sym::packed_len(d);
    e.data()
        .iter()
        .enumerate()
        .filter(|(_, &v)| v != 0.0)
        .map(|(k, &v)| {
            let w = if sym::is_diagonal_slot(d, k % p) { 1.0 } else { 2.0 };
            (k, w * v)
        })
        .collect()
}

/// Row `k` is `sum_cells <e(u_k), M> = G(u_k)`; the optional last row is
/// `sum_cells tr M = G(id)`.
pub fn assemble_constraints(problem: &RepresentationProblem) -> Result<Constraints> {
    if problem.basis.is_empty() {
        return Err(Error::EmptyBasis);
    }
    let grid = &problem.grid;
    let d = grid.dim();
    let stencils = atom_stencils(&problem.f, grid)?;
    let n_unknowns = grid.n_cells() * sym::packed_len(d);
    let mut a = SparseMatrix::new(n_unknowns);
    let mut b = Vec::with_capacity(problem.basis.len() + 1);
    for u in &problem.basis {
        a.push_row(pairing_row(u.e()));
        b.push(load_term(&problem.f, &stencils, u.u(), d) - u.e().pairing(&problem.h));
    }
    let identity_row = if problem.include_identity_row {
        let p = sym::packed_len(d);
        a.push_row(
            (0..n_unknowns)
                .filter(|k| sym::is_diagonal_slot(d, k % p))
                .map(|k| (k, 1.0)),
        );
        b.push(problem.trace_budget());
        Some(b.len() - 1)
    } else {
        None
    };
    Ok(Constraints {
        a,
        b,
        identity_row,
        dim: d,
    })
}
