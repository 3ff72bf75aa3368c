use serde::{Deserialize, Serialize};

use super::assembly::{pairing_row, RepresentationProblem, SparseMatrix};
use super::splitting::{sup, RowSpace, Splitting};
use crate::deformation::{SymmetricField, TestDeformation};
use crate::sym;
use crate::{Error, Result};

const CHECK_EVERY: usize = 10;

/// Settings of [`riedl_gauge`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GaugeOptions {
    /// Restrict `y` to multiples of the identity field.
    pub fast: bool,
    /// Relative stopping tolerance of the conic solve.
    pub tol: f64,
    pub max_iter: usize,
    pub relax: f64,
    pub step_scale: f64,
    /// Anderson acceleration depth. Off by default: where `w` vanishes the
    /// objective is flat and extrapolated steps can run off along it.
    pub memory: usize,
}

impl Default for GaugeOptions {
    fn default() -> Self {
        GaugeOptions {
            fast: false,
            tol: 1e-11,
            max_iter: 200_000,
            relax: 1.8,
            step_scale: 0.1,
            memory: 0,
        }
    }
}

/// `p(v) = inf { F₀(y) : y in L, y - v PSD in every cell }`.
///
/// `L` is the span of the deformation tensors of `l_basis` and
/// `F₀(e(u)) = G(u)`. `L` must contain the identity field. The full solve
/// represents `F₀` by the least-norm `w` in `L` and minimizes `<w, y>` over
/// `y = v + S`, `S` PSD, by the same splitting as the stress recovery; `v`
/// is normalized first so `p(λv) = λ p(v)` holds exactly.
///
/// With `opts.fast`, `y` is restricted to `λ·id`, which gives the upper
/// bound `G(id) · max_cells λ_max(v)` in closed form.
///
/// Returns [`Error::Inconsistent`] when `F₀` is not well defined on `L`,
/// when `F₀(id) < 0` (then `p` is unbounded below) or when the solve does
/// not converge.
pub fn riedl_gauge(
    problem: &RepresentationProblem,
    v: &SymmetricField,
    l_basis: &[TestDeformation],
    opts: &GaugeOptions,
) -> Result<f64> {
    let grid = problem.grid();
    v.check_grid(grid)?;
    let d = grid.dim();
    let lam_max = v
        .cells()
        .map(|c| sym::max_eigenvalue(d, c))
        .fold(f64::NEG_INFINITY, f64::max);

    if opts.fast {
        let f0_id = problem.trace_budget();
        if f0_id < 0.0 {
            return Err(Error::Inconsistent(format!("F0(id) = {f0_id:.3e} is negative")));
        }
        return Ok(f0_id * lam_max);
    }

    if l_basis.is_empty() {
        return Err(Error::EmptyBasis);
    }
    let p = sym::packed_len(d);
    let n = grid.n_cells() * p;
    let factors: Vec<f64> = (0..n)
        .map(|k| if sym::is_diagonal_slot(d, k % p) { 1.0 } else { std::f64::consts::SQRT_2 })
        .collect();
    let inv: Vec<f64> = factors.iter().map(|f| 1.0 / f).collect();

    let mut rows_raw = Vec::with_capacity(l_basis.len());
    let mut b = Vec::with_capacity(l_basis.len());
    for u in l_basis {
        u.e().check_grid(grid)?;
        rows_raw.push(pairing_row(u.e()));
        b.push(problem.g(u)?);
    }
    let rows = RowSpace::new(SparseMatrix::from_rows(n, &rows_raw).scale_columns(&inv));

    let w = rows.least_norm(&b);
    let fit = rows.matrix().mul_vec(&w);
    let b_scale = 1.0 + sup(&b);
    let misfit = fit.iter().zip(&b).fold(0.0_f64, |a, (x, y)| a.max((x - y).abs()));
    if misfit > 1e-9 * b_scale {
        return Err(Error::Inconsistent(format!(
            "G is not a function of e(u) on the span (misfit {misfit:.3e})"
        )));
    }

    let id: Vec<f64> = (0..n).map(|k| if sym::is_diagonal_slot(d, k % p) { 1.0 } else { 0.0 }).collect();
    let id_proj = rows.project(&id);
    if id.iter().zip(&id_proj).any(|(a, b)| (a - b).abs() > 1e-9) {
        return Err(Error::InvalidArgument("span of the basis must contain the identity field".into()));
    }
    let f0_id: f64 = w.iter().zip(&id).map(|(a, b)| a * b).sum();
    if f0_id < -1e-12 * b_scale {
        return Err(Error::Inconsistent(format!("F0(id) = {f0_id:.3e} is negative")));
    }

    let v_sup = v.sup_entry();
    if v_sup == 0.0 {
        return Ok(0.0);
    }
    let w_sup = sup(&w);
    if w_sup == 0.0 {
        return Ok(0.0);
    }
    let vs: Vec<f64> = v.data().iter().zip(&factors).map(|(x, f)| x * f / v_sup).collect();
    let project = |z: &[f64]| -> Vec<f64> {
        let shifted: Vec<f64> = z.iter().zip(&vs).map(|(a, b)| a + b).collect();
        let pz = rows.project(&shifted);
        pz.iter().zip(&vs).map(|(a, b)| a - b).collect()
    };
    // start from S = λ id - v, which is PSD and feasible
    let lam = lam_max / v_sup;
    let z0: Vec<f64> = id.iter().zip(&vs).map(|(i, x)| lam * i - x).collect();
    let tau = opts.step_scale / w_sup;
    let mut dr = Splitting::new(d, project, &w, tau, opts.relax, opts.memory, z0);

    let base: f64 = w.iter().zip(&vs).map(|(a, b)| a * b).sum();
    let objective = |x: &[f64]| base + w.iter().zip(x).map(|(a, b)| a * b).sum::<f64>();
    let mut last = f64::INFINITY;
    for it in 1..=opts.max_iter {
        dr.iterate();
        if it % CHECK_EVERY != 0 {
            continue;
        }
        let obj = objective(&dr.x);
        let scale = 1.0 + sup(&dr.x);
        let obj_scale = w_sup * scale * grid.n_cells() as f64;
        if dr.gap() <= opts.tol * scale && (obj - last).abs() <= opts.tol * obj_scale {
            return Ok(obj * v_sup);
        }
        last = obj;
    }
    Err(Error::Inconsistent(format!(
        "gauge solve did not converge in {} iterations",
        opts.max_iter
    )))
}

/// `L` basis used by default: the problem's basis plus the identity.
pub fn gauge_basis(problem: &RepresentationProblem) -> Vec<TestDeformation> {
    let mut basis = problem.basis().to_vec();
    basis.push(TestDeformation::identity(problem.grid()));
    basis
}
