use serde::{Deserialize, Serialize};

use crate::cone_core::{is_monotone_map, polar_residual, StickyState};
use crate::deformation::{
    Grid, PointMeasure, SymmetricField, TestDeformation, VectorMeasure,
};
use crate::sym;
use crate::{Error, Result};

/// Cells with `det(Df^sym) <= DET_FLOOR` are rejected.
pub const DET_FLOOR: f64 = 1e-10;

/// Load and stress data of one instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlowInstance {
    #[serde(rename = "F")]
    pub f: VectorMeasure,
    #[serde(rename = "H")]
    pub h: SymmetricField,
}

/// `F = g ρ` with `g = h - f` at the atoms of `ρ`, and per cell
/// `H = (γ-1) e det(S)^{-γ} cof(S) |cell|` with `S = Df^sym`.
///
/// `f_nodes` and `h_nodes` hold `d` values per node in grid order. `f` must
/// be monotone on the nodes and `S` positive definite with
/// `det S > DET_FLOOR` in every cell.
pub fn instance_from_flow(
    f_nodes: &[f64],
    h_nodes: &[f64],
    e_weights: &[f64],
    gamma: f64,
    rho: &PointMeasure,
    grid: &Grid,
) -> Result<FlowInstance> {
    let d = grid.dim();
    if !(gamma > 1.0 && gamma.is_finite()) {
        return Err(Error::InvalidArgument(format!("gamma must exceed 1, got {gamma}")));
    }
    if e_weights.len() != grid.n_cells() {
        return Err(Error::LengthMismatch {
            expected: grid.n_cells(),
            got: e_weights.len(),
        });
    }
    if let Some(i) = e_weights.iter().position(|&e| !(e >= 0.0 && e.is_finite())) {
        return Err(Error::InvalidArgument(format!("e weight {i} is not a nonnegative number")));
    }
    if rho.dim() != d && !rho.atoms().is_empty() {
        return Err(Error::GridMismatch(format!("rho has dimension {}, grid {d}", rho.dim())));
    }
    let f = TestDeformation::from_nodes(grid, f_nodes.to_vec())?;
    let h = TestDeformation::from_nodes(grid, h_nodes.to_vec())?;
    if !is_monotone_map(&grid.node_positions(), &f.node_values())? {
        return Err(Error::InvalidArgument("f is not monotone on the grid nodes".into()));
    }

    let mut atoms = Vec::with_capacity(rho.atoms().len());
    let mut vectors = Vec::with_capacity(rho.atoms().len());
    for (i, (x, w)) in rho.atoms().iter().zip(rho.weights()).enumerate() {
        let out = || Error::SupportExceedsGrid {
            index: i,
            point: x.clone(),
        };
        let fx = f.value_at(grid, x).ok_or_else(out)?;
        let hx = h.value_at(grid, x).ok_or_else(out)?;
        atoms.push(x.clone());
        vectors.push(hx.iter().zip(&fx).map(|(a, b)| (a - b) * w).collect());
    }
    let load = VectorMeasure::new(d, atoms, vectors)?;

    let vol = grid.cell_volume();
    let mut stress = SymmetricField::zeros(d, grid.n_cells());
    for (c, s) in f.e().cells().enumerate() {
        let det = sym::determinant(d, s);
        let lam_min = sym::min_eigenvalue(d, s);
        if !(lam_min > 0.0) || !(det > DET_FLOOR) {
            return Err(Error::DegenerateDeformation {
                cell: c,
                reason: format!("det {det:.3e}, smallest eigenvalue {lam_min:.3e}"),
            });
        }
        let factor = (gamma - 1.0) * e_weights[c] * det.powf(-gamma) * vol;
        for (out, cof) in stress.cell_mut(c).iter_mut().zip(sym::cofactor(d, s)) {
            *out = factor * cof;
        }
    }
    Ok(FlowInstance { f: load, h: stress })
}

/// One-dimensional load from the sticky flow: vectors `Y_i m_i` with `Y` the
/// polar residual at `t`, placed at the labels of `m`.
///
/// The load lives on the reference line where `Y m` is the derivative of a
/// nonnegative primitive. At the Eulerian positions `X_i(t)` every cluster
/// sits at one point and its net load is zero, so nothing would be left.
pub fn load_from_sticky(state: &StickyState, t: f64) -> Result<VectorMeasure> {
    let y = polar_residual(state, t)?;
    let atoms = state.measure().atoms().iter().map(|&a| vec![a]).collect();
    let vectors = y
        .iter()
        .zip(state.measure().weights())
        .map(|(yi, mi)| vec![yi * mi])
        .collect();
    VectorMeasure::new(1, atoms, vectors)
}

/// Nodal load whose representing field is `m_star`: one atom per node
/// carrying `-(sum_cells <e(hat), m_star>)` per component, so that
/// `G(u) = <e(u), m_star>` for every nodal `u`, the identity included.
pub fn divergence_load(grid: &Grid, m_star: &SymmetricField) -> Result<VectorMeasure> {
    m_star.check_grid(grid)?;
    let d = grid.dim();
    let mut atoms = Vec::new();
    let mut vectors = Vec::new();
    for node in 0..grid.n_nodes() {
        let v: Vec<f64> = (0..d)
            .map(|a| -TestDeformation::hat(grid, node, a).e().pairing(m_star))
            .collect();
        atoms.push(grid.node_position(node));
        vectors.push(v);
    }
    VectorMeasure::new(d, atoms, vectors)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn nodes(grid: &Grid, f: impl Fn(&[f64]) -> Vec<f64>) -> Vec<f64> {
        (0..grid.n_nodes()).flat_map(|n| f(&grid.node_position(n))).collect()
    }

    #[test]
    fn identity_flow_gives_scaled_identity() {
        let g = Grid::cube(2, 0.0, 1.0, 4).unwrap();
        let id = nodes(&g, |x| x.to_vec());
        let rho = PointMeasure::new(vec![vec![0.3, 0.6]], vec![2.0]).unwrap();
        let e = vec![0.7; g.n_cells()];
        let inst = instance_from_flow(&id, &id, &e, 3.0, &rho, &g).unwrap();
        let want = 2.0 * 0.7 * g.cell_volume();
        for c in inst.h.cells() {
            assert_eq!(c, &[want, 0.0, want]);
        }
        assert!(inst.f.vectors().iter().flatten().all(|&x| x == 0.0));
    }

    #[test]
    fn one_dimensional_stress() {
        let g = Grid::cube(1, 0.0, 1.0, 4).unwrap();
        let f = nodes(&g, |x| vec![2.0 * x[0]]);
        let h = nodes(&g, |x| vec![x[0] * x[0]]);
        let rho = PointMeasure::new(vec![vec![0.5]], vec![1.0]).unwrap();
        let inst = instance_from_flow(&f, &h, &[1.0; 4], 2.0, &rho, &g).unwrap();
        // (γ-1) e f'^{-γ} h = 1 * 1 * 1/4 * 1/4
        for c in inst.h.cells() {
            assert!((c[0] - 1.0 / 16.0).abs() < 1e-15);
        }
        // g(0.5) = 0.25 - 1 by interpolation of the nodal values
        assert!((inst.f.vectors()[0][0] + 0.75).abs() < 1e-15);
    }

    #[test]
    fn rejects_degenerate_and_bad_gamma() {
        let g = Grid::cube(2, 0.0, 1.0, 2).unwrap();
        let flat = nodes(&g, |x| vec![x[0], 0.0]);
        let rho = PointMeasure::new(vec![vec![0.5, 0.5]], vec![1.0]).unwrap();
        let e = vec![1.0; 4];
        assert!(matches!(
            instance_from_flow(&flat, &flat, &e, 2.0, &rho, &g),
            Err(Error::DegenerateDeformation { cell: 0, .. })
        ));
        let id = nodes(&g, |x| x.to_vec());
        assert!(instance_from_flow(&id, &id, &e, 1.0, &rho, &g).is_err());
        let swap = nodes(&g, |x| vec![-x[0], x[1]]);
        assert!(instance_from_flow(&swap, &id, &e, 2.0, &rho, &g).is_err());
    }

    #[test]
    fn sticky_load_sits_on_the_labels() {
        let m = crate::cone_core::DiscreteMeasure::new(vec![0.25, 0.75], vec![0.5, 0.5]).unwrap();
        let s = StickyState::new(m, vec![0.0, 1.0], vec![1.0, -1.0]).unwrap();
        let f = load_from_sticky(&s, 1.0).unwrap();
        assert_eq!(f.atoms(), &[vec![0.25], vec![0.75]]);
        // Y = (1, 0) - (0.5, 0.5)
        assert_eq!(f.vectors(), &[vec![0.25], vec![-0.25]]);
        assert!(-f.moment() > 0.0);
    }

    #[test]
    fn divergence_load_reproduces_pairings() {
        let g = Grid::cube(2, 0.0, 1.0, 4).unwrap();
        let mut m = SymmetricField::zeros(2, g.n_cells());
        m.cell_mut(5).copy_from_slice(&[1.0, 0.2, 0.5]);
        let f = divergence_load(&g, &m).unwrap();
        let h = SymmetricField::zeros(2, g.n_cells());
        for node in g.interior_nodes() {
            for a in 0..2 {
                let u = TestDeformation::hat(&g, node, a);
                let gu = crate::deformation::evaluate_g(&f, &h, &u, &g).unwrap();
                assert!((gu - u.e().pairing(&m)).abs() < 1e-12);
            }
        }
        assert!((-f.moment() - m.total_trace()).abs() < 1e-12);
        // boundary cells as well
        let mut m = SymmetricField::zeros(2, g.n_cells());
        m.cell_mut(0).copy_from_slice(&[0.3, -0.1, 0.8]);
        let f = divergence_load(&g, &m).unwrap();
        assert!((-f.moment() - m.total_trace()).abs() < 1e-12);
    }
}
