//! Membership certificates for the polar cone of monotone maps.

use serde::{Deserialize, Serialize};

use super::measure::{DiscreteMeasure, MonotoneMap1D};
use crate::{Error, Result};

/// Relative tolerance for `∫YX = 0` and for the final partial sum.
pub const TOL_EQ_REL: f64 = 1e-9;
/// Relative tolerance for nonnegativity of the partial sums.
pub const TOL_POS_REL: f64 = 1e-12;
/// Relative tolerance of the pairwise monotonicity test.
pub const TOL_MONO_REL: f64 = 1e-12;

/// Certificate that `Y` lies in the polar cone at `X`.
///
/// By summation by parts, `sum Y_i X'_i m_i = P_N X'_N - sum_j P_j (X'_{j+1} - X'_j)`,
/// so nonnegative partial sums `P_j` with `P_N = 0` give `∫ Y X' <= 0` for
/// every nondecreasing `X'`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolarCertificate1D {
    pub inner_product: f64,
    pub primitive: Vec<f64>,
    pub feasible: bool,
    pub scale: f64,
    pub tol_eq: f64,
    pub tol_pos: f64,
}

/// Checks `∫YX = 0` and `∫YX' <= 0` for all monotone `X'`.
pub fn polar_membership_1d(
    y: &[f64],
    x: &MonotoneMap1D,
    m: &DiscreteMeasure,
) -> Result<PolarCertificate1D> {
    check_len(m.len(), x.len())?;
    let primitive = nonneg_primitive(y, m)?;
    let inner_product: f64 = y
        .iter()
        .zip(x.values())
        .zip(m.weights())
        .map(|((yi, xi), mi)| yi * xi * mi)
        .sum();

    let sup = |v: &[f64]| v.iter().fold(0.0_f64, |a, b| a.max(b.abs()));
    let scale = (sup(y) * sup(x.values())).max(1.0);
    let tol_eq = TOL_EQ_REL * scale;
    let tol_pos = TOL_POS_REL * scale;
    let last = *primitive.last().expect("nonempty");
    let feasible = inner_product.abs() <= tol_eq
        && primitive.iter().all(|&p| p >= -tol_pos)
        && last.abs() <= tol_eq;

    Ok(PolarCertificate1D {
        inner_product,
        primitive,
        feasible,
        scale,
        tol_eq,
        tol_pos,
    })
}

/// Partial sums `P_j = sum_{i<=j} Y_i m_i`.
///
/// `Y m` is the forward difference of `(0, P_1, ..., P_N)`; for `Y` in the
/// polar cone the `P_j` are nonnegative and `P_N` vanishes.
pub fn nonneg_primitive(y: &[f64], m: &DiscreteMeasure) -> Result<Vec<f64>> {
    check_len(m.len(), y.len())?;
    Ok(y
        .iter()
        .zip(m.weights())
        .scan(0.0, |acc, (yi, mi)| {
            *acc += yi * mi;
            Some(*acc)
        })
        .collect())
}

/// Pairwise test `(v_i - v_j)·(p_i - p_j) >= -tol` over all pairs.
///
/// `tol = 1e-12 · d · max(1, |p|_∞ |v|_∞)`. Quadratic in the number of
/// points.
pub fn is_monotone_map<P, V>(points: &[P], values: &[V]) -> Result<bool>
where
    P: AsRef<[f64]>,
    V: AsRef<[f64]>,
{
    check_len(points.len(), values.len())?;
    let Some(first) = points.first() else {
        return Ok(true);
    };
    let d = first.as_ref().len();
    if d == 0 {
        return Err(Error::InvalidArgument("points must have dimension >= 1".into()));
    }
    for (p, v) in points.iter().zip(values) {
        check_len(d, p.as_ref().len())?;
        check_len(d, v.as_ref().len())?;
    }
    let sup = |s: &[f64]| s.iter().fold(0.0_f64, |a, b| a.max(b.abs()));
    let pmax = points.iter().fold(0.0_f64, |a, p| a.max(sup(p.as_ref())));
    let vmax = values.iter().fold(0.0_f64, |a, v| a.max(sup(v.as_ref())));
    let tol = TOL_MONO_REL * d as f64 * (pmax * vmax).max(1.0);

    for i in 0..points.len() {
        let (pi, vi) = (points[i].as_ref(), values[i].as_ref());
        for j in (i + 1)..points.len() {
            let (pj, vj) = (points[j].as_ref(), values[j].as_ref());
            let dot: f64 = (0..d).map(|k| (vi[k] - vj[k]) * (pi[k] - pj[k])).sum();
            if dot < -tol {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

fn check_len(expected: usize, got: usize) -> Result<()> {
    if expected != got {
        return Err(Error::LengthMismatch { expected, got });
    }
    Ok(())
}
