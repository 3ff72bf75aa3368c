//! Independent oracles and instance generators shared by the integration
//! tests and the acceptance run.
#![allow(dead_code)]

use polarcone::stress_recovery::divergence_load;
use polarcone::{
    nonneg_primitive, DiscreteMeasure, Grid, RepresentationProblem, StickyState, SymmetricField,
    VectorMeasure,
};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

/// Weighted isotonic regression by enumerating every split of `0..n` into
/// consecutive blocks; the answer is the block-mean vector of least
/// weighted squared error among the splits with nondecreasing means.
pub fn isotonic_brute_force(y: &[f64], w: &[f64]) -> Vec<f64> {
    let n = y.len();
    let mut best: Option<(f64, Vec<f64>)> = None;
    for cuts in 0u32..(1 << (n - 1)) {
        let mut x = vec![0.0; n];
        let mut start = 0;
        let mut prev = f64::NEG_INFINITY;
        let mut ok = true;
        for i in 0..n {
            let end_here = i == n - 1 || (cuts >> i) & 1 == 1;
            if !end_here {
                continue;
            }
            let mass: f64 = w[start..=i].iter().sum();
            let mean = (start..=i).map(|k| w[k] * y[k]).sum::<f64>() / mass;
            if mean < prev {
                ok = false;
                break;
            }
            prev = mean;
            x[start..=i].iter_mut().for_each(|v| *v = mean);
            start = i + 1;
        }
        if !ok {
            continue;
        }
        let cost: f64 = (0..n).map(|k| w[k] * (x[k] - y[k]).powi(2)).sum();
        if best.as_ref().is_none_or(|(c, _)| cost < *c) {
            best = Some((cost, x));
        }
    }
    best.expect("the single-block split is always feasible").1
}

/// Cell integrals of the primitive `P(x) = sum_{x_i <= x} f_i` of a 1D load.
///
/// `P` is the step function with values `nonneg_primitive` between sorted
/// atoms; in one dimension `∫ u F = -∫ u' P`, so these integrals are the
/// representing field on any grid.
pub fn primitive_cell_integrals(atoms: &[f64], f: &[f64], grid: &Grid) -> Vec<f64> {
    let mut order: Vec<usize> = (0..atoms.len()).collect();
    order.sort_by(|&a, &b| atoms[a].total_cmp(&atoms[b]));
    let xs: Vec<f64> = order.iter().map(|&i| atoms[i]).collect();
    let fs: Vec<f64> = order.iter().map(|&i| f[i]).collect();
    let unit = DiscreteMeasure::new(xs.clone(), vec![1.0; xs.len()]).unwrap();
    let p = nonneg_primitive(&fs, &unit).unwrap();
    let h = grid.spacing(0);
    (0..grid.n_cells())
        .map(|c| {
            let a = grid.lo()[0] + c as f64 * h;
            let b = a + h;
            (0..xs.len())
                .map(|j| {
                    let seg_end = if j + 1 < xs.len() { xs[j + 1] } else { f64::INFINITY };
                    let lo = xs[j].max(a);
                    let hi = seg_end.min(b);
                    if hi > lo {
                        p[j] * (hi - lo)
                    } else {
                        0.0
                    }
                })
                .sum()
        })
        .collect()
}

pub fn random_sticky(rng: &mut ChaCha8Rng, n: usize) -> StickyState {
    let weights: Vec<f64> = (0..n).map(|_| rng.random_range(0.1..1.0)).collect();
    let total: f64 = weights.iter().sum();
    let weights: Vec<f64> = weights.iter().map(|w| w / total).collect();
    let atoms: Vec<f64> = (0..n).map(|i| (i as f64 + 0.5) / n as f64).collect();
    let mut x0: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
    x0.sort_by(f64::total_cmp);
    let v0: Vec<f64> = (0..n).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
    let m = DiscreteMeasure::new(atoms, weights).unwrap();
    StickyState::new(m, x0, v0).unwrap()
}

/// Packed random PSD matrix `R Rᵀ / d`.
pub fn random_psd(rng: &mut ChaCha8Rng, d: usize) -> Vec<f64> {
    let r: Vec<f64> = (0..d * d).map(|_| rng.sample(StandardNormal)).collect();
    let mut out = Vec::new();
    for i in 0..d {
        for j in i..d {
            out.push((0..d).map(|k| r[i * d + k] * r[j * d + k]).sum::<f64>() / d as f64);
        }
    }
    out
}

/// Random PSD field, each cell nonzero with probability `density`.
pub fn random_field_psd(rng: &mut ChaCha8Rng, grid: &Grid, density: f64) -> SymmetricField {
    let d = grid.dim();
    let mut m = SymmetricField::zeros(d, grid.n_cells());
    for c in 0..grid.n_cells() {
        if rng.random::<f64>() < density {
            m.cell_mut(c).copy_from_slice(&random_psd(rng, d));
        }
    }
    m
}

/// Instance with `G(u) = <e(u), m_star>` for every nodal `u`, so also
/// `G(id) = tr m_star`. With `with_h`, part of the stress is moved into `H`.
pub fn manufactured(
    rng: &mut ChaCha8Rng,
    grid: &Grid,
    with_h: bool,
) -> (RepresentationProblem, SymmetricField) {
    let m_star = random_field_psd(rng, grid, 1.0);
    let h = if with_h {
        random_field_psd(rng, grid, 0.3)
    } else {
        SymmetricField::zeros(grid.dim(), grid.n_cells())
    };
    let f = divergence_load(grid, &m_star.add_scaled(1.0, &h)).unwrap();
    let p = RepresentationProblem::new(f, h, grid.clone()).unwrap();
    (p, m_star)
}

/// 1D problem from the polar residual of a sticky flow, on a grid that
/// leaves at least one empty cell on each side of the atoms.
pub fn sticky_problem(state: &StickyState, t: f64, cells: usize) -> (RepresentationProblem, Vec<f64>) {
    let f = polarcone::stress_recovery::load_from_sticky(state, t).unwrap();
    let xs: Vec<f64> = f.atoms().iter().map(|a| a[0]).collect();
    let lo = xs.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let pad = 0.25 * (hi - lo).max(0.5);
    let grid = Grid::new(vec![lo - pad], vec![hi + pad], vec![cells]).unwrap();
    let fs: Vec<f64> = f.vectors().iter().map(|v| v[0]).collect();
    let oracle = primitive_cell_integrals(&xs, &fs, &grid);
    let h = SymmetricField::zeros(1, cells);
    (RepresentationProblem::new(f, h, grid).unwrap(), oracle)
}

pub fn sup(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |a, x| a.max(x.abs()))
}

pub fn flipped(f: &VectorMeasure) -> VectorMeasure {
    f.scaled(-1.0)
}
