use serde::{Deserialize, Serialize};

use super::assembly::{assemble_constraints, Constraints, RepresentationProblem};
use super::splitting::{sup, RowSpace, Splitting};
use crate::deformation::SymmetricField;
use crate::sym;
use crate::{Error, Result};

const CHECK_EVERY: usize = 10;
const STALL_WINDOW: usize = 500;
const STALL_MIN_ITER: usize = 2000;
const STALL_PROGRESS: f64 = 0.99;
const STALL_FACTOR: f64 = 1e3;
/// Relative slack on `sum tr M <= G(id)` without the trace row.
const BUDGET_SLACK: f64 = 1e-6;
/// The trace row is held to a tenth of the representation tolerance.
const IDENTITY_ROW_WEIGHT: f64 = 10.0;

/// Settings of [`recover_stress`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverOptions {
    /// Relative tolerance; the absolute one is `tol (1 + |b|_∞)`.
    pub tol: f64,
    pub max_iter: usize,
    /// Over-relaxation factor in `(0, 2)`.
    pub relax: f64,
    /// Trace weight relative to the size of the least-norm solution.
    pub step_scale: f64,
    /// Anderson acceleration depth; 0 gives the plain iteration.
    pub memory: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            tol: 1e-8,
            max_iter: 50_000,
            relax: 1.8,
            step_scale: 0.1,
            memory: 10,
        }
    }
}

impl SolverOptions {
    pub fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0 && self.tol.is_finite()) {
            return Err(Error::InvalidArgument("tol must be positive".into()));
        }
        if !(self.relax > 0.0 && self.relax < 2.0) {
            return Err(Error::InvalidArgument("relax must lie in (0, 2)".into()));
        }
        if self.max_iter == 0 {
            return Err(Error::InvalidArgument("max_iter must be at least 1".into()));
        }
        if !(self.step_scale > 0.0 && self.step_scale.is_finite()) {
            return Err(Error::InvalidArgument("step_scale must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecoveryResult {
    #[serde(rename = "M")]
    pub m: SymmetricField,
    /// Largest `|G(u_k) - sum <e(u_k), M>|` over the basis.
    pub residual_inf: f64,
    /// `|sum tr M - G(id)|` when the trace row is enforced.
    pub identity_residual: Option<f64>,
    pub min_eigenvalue: f64,
    pub total_trace: f64,
    pub trace_budget: f64,
    pub iterations: usize,
    pub converged: bool,
    pub tol_rep: f64,
}

/// Minimum-trace PSD field `M` with `sum_cells <e(u_k), M> = G(u_k)` on the
/// basis (and `sum tr M = G(id)` with the trace row).
///
/// Returns [`Error::Infeasible`] when the trace row asks for a negative trace,
/// when the constraint residual stalls above `1e3 · tol_rep`, or, without
/// the trace row, when the minimum trace exceeds `G(id)` by more than
/// `1e-6 (1 + |b|_∞)`. Hitting
/// `max_iter` is not an error: the best iterate comes back with
/// `converged = false`.
pub fn recover_stress(problem: &RepresentationProblem, opts: &SolverOptions) -> Result<RecoveryResult> {
    opts.validate()?;
    let cons = assemble_constraints(problem)?;
    let d = cons.dim;
    let tol_rep = opts.tol * (1.0 + cons.b_sup());
    let budget = problem.trace_budget();
    let n = cons.n_unknowns();

    if cons.identity_row.is_some() && budget < -tol_rep {
        return Err(Error::Infeasible {
            residual: -budget,
            iterations: 0,
        });
    }
    if cons.b.iter().all(|&b| b == 0.0) {
        return Ok(finish(&cons, SymmetricField::zeros(d, n / sym::packed_len(d)), budget, 0, true, tol_rep));
    }

    let factors = cons.svec_factors();
    let inv: Vec<f64> = factors.iter().map(|f| 1.0 / f).collect();
    let rows = RowSpace::new(cons.a.scale_columns(&inv));
    let m0 = rows.least_norm(&cons.b);
    let ls_residual = residual_parts(&rows, &cons, &m0);
    if ls_residual.0.max(ls_residual.1) > tol_rep {
        return Err(Error::Inconsistent(format!(
            "least-squares residual {:.3e} exceeds {:.3e}",
            ls_residual.0.max(ls_residual.1),
            tol_rep
        )));
    }

    let cost: Vec<f64> = (0..n)
        .map(|k| if sym::is_diagonal_slot(d, k % sym::packed_len(d)) { 1.0 } else { 0.0 })
        .collect();
    let tau = opts.step_scale * sup(&m0);
    let project = |z: &[f64]| -> Vec<f64> {
        let pz = rows.project(z);
        z.iter().zip(&pz).zip(&m0).map(|((z, p), m)| z - p + m).collect()
    };
    let mut dr = Splitting::new(d, project, &cost, tau, opts.relax, opts.memory, m0.clone());

    let mut best = (f64::INFINITY, vec![0.0; n]);
    let mut window_best = f64::INFINITY;
    let mut iterations = 0;
    let mut converged = false;
    while iterations < opts.max_iter {
        dr.iterate();
        iterations += 1;
        if iterations % CHECK_EVERY != 0 && iterations != opts.max_iter {
            continue;
        }
        let (basis_res, id_res) = residual_parts(&rows, &cons, &dr.y);
        let weighted = basis_res.max(IDENTITY_ROW_WEIGHT * id_res);
        if weighted < best.0 {
            best = (weighted, dr.y.clone());
        }
        if weighted <= tol_rep && dr.gap() <= tol_rep {
            converged = true;
            best.1.clone_from(&dr.y);
            break;
        }
        if iterations % STALL_WINDOW == 0 {
            if iterations >= STALL_MIN_ITER
                && best.0 > STALL_FACTOR * tol_rep
                && best.0 > STALL_PROGRESS * window_best
            {
                return Err(Error::Infeasible {
                    residual: best.0,
                    iterations,
                });
            }
            window_best = best.0;
        }
    }

    let mut m = best.1;
    for (x, f) in m.iter_mut().zip(&inv) {
        *x *= f;
    }
    let m = SymmetricField::from_packed(d, m)?;
    let result = finish(&cons, m, budget, iterations, converged, tol_rep);
    // the minimum trace itself overshoots the control bound
    let excess = result.total_trace - budget;
    if converged && cons.identity_row.is_none() && excess > BUDGET_SLACK * (1.0 + cons.b_sup()) {
        return Err(Error::Infeasible {
            residual: excess,
            iterations,
        });
    }
    Ok(result)
}

/// Largest basis-row and trace-row residuals of a scaled iterate.
fn residual_parts(rows: &RowSpace, cons: &Constraints, m: &[f64]) -> (f64, f64) {
    let r = rows.matrix().mul_vec(m);
    let mut basis = 0.0_f64;
    let mut id = 0.0_f64;
    for (k, (x, b)) in r.iter().zip(&cons.b).enumerate() {
        if Some(k) == cons.identity_row {
            id = (x - b).abs();
        } else {
            basis = basis.max((x - b).abs());
        }
    }
    (basis, id)
}

fn finish(
    cons: &Constraints,
    m: SymmetricField,
    budget: f64,
    iterations: usize,
    converged: bool,
    tol_rep: f64,
) -> RecoveryResult {
    let total_trace = m.total_trace();
    RecoveryResult {
        residual_inf: cons.basis_residual_inf(&m),
        identity_residual: cons.identity_row.map(|_| (total_trace - budget).abs()),
        min_eigenvalue: m.min_eigenvalue(),
        total_trace,
        trace_budget: budget,
        iterations,
        converged,
        tol_rep,
        m,
    }
}
