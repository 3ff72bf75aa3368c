use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::grid::Grid;
use super::tensor::TestDeformation;
use crate::cone_core::is_monotone_map;
use crate::sym;
use crate::{Error, Result};

const MAX_REDRAWS: usize = 64;
const PSD_TOL_REL: f64 = 1e-12;

/// Seeded sample of monotone maps on the grid nodes.
///
/// Order: the identity, the canonical rank-one maps `x -> (e_k·x) e_k`, then
/// cycling through random rank-one maps, random linear maps `S + B` (`S` PSD,
/// `B` antisymmetric) and gradients of convex radial bumps
/// `ε s² softplus(|x-c|²/(2s²) - κ)`, whose gradient grows linearly.
/// Each random member is checked pairwise on the nodes and redrawn on failure.
pub fn monotone_test_family(grid: &Grid, count: usize, seed: u64) -> Result<Vec<TestDeformation>> {
    let d = grid.dim();
    let need = sym::packed_len(d) + 1;
    if count < need {
        return Err(Error::CountTooSmall { need, got: count });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let center: Vec<f64> = (0..d).map(|k| 0.5 * (grid.lo()[k] + grid.hi()[k])).collect();
    let nodes = grid.node_positions();

    let mut family = Vec::with_capacity(count);
    family.push(TestDeformation::identity(grid));
    for k in 0..d.min(count - 1) {
        let mut v = vec![0.0; d];
        v[k] = 1.0;
        family.push(rank_one(grid, &v, &center)?);
    }
    let mut kind = 0;
    while family.len() < count {
        let mut accepted = None;
        for _ in 0..MAX_REDRAWS {
            let u = match kind % 3 {
                0 => rank_one(grid, &unit_vector(&mut rng, d), &center)?,
                1 => TestDeformation::linear(grid, &psd_plus_antisymmetric(&mut rng, d), &center)?,
                _ => convex_bump(grid, &mut rng)?,
            };
            if u.e().is_psd(PSD_TOL_REL) && is_monotone_map(&nodes, &u.node_values())? {
                accepted = Some(u);
                break;
            }
        }
        // rank-one maps are exactly monotone, so this fallback never fails
        let u = match accepted {
            Some(u) => u,
            None => rank_one(grid, &unit_vector(&mut rng, d), &center)?,
        };
        family.push(u);
        kind += 1;
    }
    Ok(family)
}

fn rank_one(grid: &Grid, v: &[f64], center: &[f64]) -> Result<TestDeformation> {
    let d = v.len();
    let a: Vec<f64> = (0..d * d).map(|k| v[k / d] * v[k % d]).collect();
    TestDeformation::linear(grid, &a, center)
}

fn unit_vector(rng: &mut ChaCha8Rng, d: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..d).map(|_| rng.sample(StandardNormal)).collect();
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-3 {
            return v.into_iter().map(|x| x / norm).collect();
        }
    }
}

/// Row-major `R Rᵀ / d + B`.
fn psd_plus_antisymmetric(rng: &mut ChaCha8Rng, d: usize) -> Vec<f64> {
    let r: Vec<f64> = (0..d * d).map(|_| rng.sample(StandardNormal)).collect();
    let b: Vec<f64> = (0..d * d).map(|_| rng.sample(StandardNormal)).collect();
    let mut a = vec![0.0; d * d];
    for i in 0..d {
        for j in 0..d {
            let s: f64 = (0..d).map(|k| r[i * d + k] * r[j * d + k]).sum::<f64>() / d as f64;
            a[i * d + j] = s + 0.5 * (b[i * d + j] - b[j * d + i]);
        }
    }
    a
}

fn convex_bump(grid: &Grid, rng: &mut ChaCha8Rng) -> Result<TestDeformation> {
    let d = grid.dim();
    let h_max = (0..d).map(|k| grid.spacing(k)).fold(0.0, f64::max);
    let extent = (0..d)
        .map(|k| grid.hi()[k] - grid.lo()[k])
        .fold(f64::INFINITY, f64::min);
    let c: Vec<f64> = (0..d)
        .map(|k| rng.random_range(grid.lo()[k]..grid.hi()[k]))
        .collect();
    let s = 2.0 * h_max + rng.random::<f64>() * (0.25 * extent).max(h_max);
    let kappa = rng.random_range(0.0..2.0);
    let eps = rng.random_range(0.5..2.0);
    TestDeformation::from_fn(grid, |x| {
        let r2: f64 = x.iter().zip(&c).map(|(a, b)| (a - b) * (a - b)).sum();
        let q = r2 / (2.0 * s * s) - kappa;
        let sigma = 1.0 / (1.0 + (-q).exp());
        x.iter().zip(&c).map(|(a, b)| eps * sigma * (a - b)).collect()
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_first_and_count_checked() {
        let g = Grid::cube(2, 0.0, 1.0, 4).unwrap();
        assert!(matches!(
            monotone_test_family(&g, 3, 0),
            Err(Error::CountTooSmall { need: 4, got: 3 })
        ));
        let fam = monotone_test_family(&g, 10, 7).unwrap();
        assert_eq!(fam.len(), 10);
        assert_eq!(fam[0], TestDeformation::identity(&g));
    }

    #[test]
    fn members_are_monotone_with_psd_tensors() {
        for d in 1..=3 {
            let g = Grid::cube(d, -1.0, 1.0, 4).unwrap();
            let nodes = g.node_positions();
            for u in monotone_test_family(&g, 12, 3).unwrap() {
                assert!(is_monotone_map(&nodes, &u.node_values()).unwrap());
                assert!(u.e().min_eigenvalue() >= -1e-12 * u.e().max_norm());
            }
        }
    }

    #[test]
    fn deterministic_in_seed() {
        let g = Grid::cube(2, 0.0, 1.0, 5).unwrap();
        let a = monotone_test_family(&g, 9, 11).unwrap();
        let b = monotone_test_family(&g, 9, 11).unwrap();
        let c = monotone_test_family(&g, 9, 12).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }
}
