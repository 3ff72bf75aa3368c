use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::assembly::{assemble_constraints, RepresentationProblem};
use crate::deformation::{atom_stencils, load_term, SymmetricField, TestDeformation};
use crate::{Error, Result};

/// Settings of [`verify_representation_with`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VerifyOptions {
    pub seed: u64,
    /// Number of held-out test deformations.
    pub n_fields: usize,
    /// Relative representation tolerance, as in the solver.
    pub tol: f64,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions {
            seed: 0,
            n_fields: 32,
            tol: 1e-8,
        }
    }
}

/// Independent checks of a candidate field `M`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    /// Largest residual over the held-out family.
    pub residual_inf: f64,
    /// Largest residual over the assembly basis.
    pub assembly_residual: f64,
    pub residual_tol: f64,
    pub residual_ok: bool,
    pub min_eigenvalue: f64,
    pub psd_tol: f64,
    pub psd_ok: bool,
    pub total_trace: f64,
    pub trace_budget: f64,
    pub trace_tol: f64,
    pub trace_ok: bool,
    /// `|sum tr M - G(id)|`, checked only when the trace row is enforced.
    pub identity_gap: Option<f64>,
    pub identity_tol: f64,
    pub identity_ok: Option<bool>,
}

impl VerificationReport {
    pub fn passed(&self) -> bool {
        self.residual_ok && self.psd_ok && self.trace_ok && self.identity_ok.unwrap_or(true)
    }
}

pub fn verify_representation(m: &SymmetricField, problem: &RepresentationProblem) -> Result<VerificationReport> {
    verify_representation_with(m, problem, &VerifyOptions::default())
}

/// Residual on fresh random compactly supported deformations, PSD check and
/// trace budget.
///
/// Each fresh deformation has Gaussian values on interior nodes, zero on the
/// boundary, scaled to unit `l1` norm, so its residual is at most the
/// assembly residual whenever the basis is the hat basis. The residual
/// tolerance is ten times the solver's.
pub fn verify_representation_with(
    m: &SymmetricField,
    problem: &RepresentationProblem,
    opts: &VerifyOptions,
) -> Result<VerificationReport> {
    let grid = problem.grid();
    m.check_grid(grid)?;
    if opts.n_fields == 0 {
        return Err(Error::InvalidArgument("n_fields must be at least 1".into()));
    }
    let cons = assemble_constraints(problem)?;
    let scale = 1.0 + cons.b_sup();
    let tol_rep = opts.tol * scale;

    let d = grid.dim();
    let stencils = atom_stencils(problem.f(), grid)?;
    let interior = grid.interior_nodes();
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut residual_inf = 0.0_f64;
    for _ in 0..opts.n_fields {
        let mut u = vec![0.0; grid.n_nodes() * d];
        for &node in &interior {
            for a in 0..d {
                u[node * d + a] = StandardNormal.sample(&mut rng);
            }
        }
        let l1: f64 = u.iter().map(|x: &f64| x.abs()).sum();
        if l1 > 0.0 {
            u.iter_mut().for_each(|x| *x /= l1);
        }
        let u = TestDeformation::from_nodes(grid, u)?;
        let g = load_term(problem.f(), &stencils, u.u(), d) - u.e().pairing(problem.h());
        residual_inf = residual_inf.max((g - u.e().pairing(m)).abs());
    }

    let min_eigenvalue = m.min_eigenvalue();
    let psd_tol = 1e-9 * m.max_norm();
    let total_trace = m.total_trace();
    let trace_budget = problem.trace_budget();
    let trace_tol = 1e-6 * scale;
    let identity_tol = 1e-9 * scale;
    let identity_gap = cons.identity_row.map(|_| (total_trace - trace_budget).abs());
    Ok(VerificationReport {
        residual_inf,
        assembly_residual: cons.basis_residual_inf(m),
        residual_tol: 10.0 * tol_rep,
        residual_ok: residual_inf <= 10.0 * tol_rep,
        min_eigenvalue,
        psd_tol,
        psd_ok: min_eigenvalue >= -psd_tol,
        total_trace,
        trace_budget,
        trace_tol,
        trace_ok: total_trace <= trace_budget + trace_tol,
        identity_gap,
        identity_tol,
        identity_ok: identity_gap.map(|g| g <= identity_tol),
    })
}
