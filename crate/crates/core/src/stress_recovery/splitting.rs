//! Douglas–Rachford splitting between an affine set and the per-cell PSD
//! cone, in coordinates where the Euclidean product is the Frobenius one.

use std::collections::VecDeque;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use super::assembly::SparseMatrix;
use crate::sym;

/// Cells per iteration above which the PSD projection runs on the rayon pool.
const PARALLEL_CELLS: usize = 2048;
const PINV_CUTOFF: f64 = 1e-12;

enum GramFactor {
    Cholesky(nalgebra::Cholesky<f64, nalgebra::Dyn>),
    Pinv(DMatrix<f64>),
}

/// Orthogonal projection onto the row space of `A` and least-norm solves.
pub(crate) struct RowSpace {
    a: SparseMatrix,
    factor: GramFactor,
}

impl RowSpace {
    pub fn new(a: SparseMatrix) -> Self {
        let g = a.gram();
        let max_diag = g.diagonal().iter().fold(0.0_f64, |m, x| m.max(*x));
        let factor = match g.clone().cholesky() {
            Some(ch) if well_conditioned(&ch, max_diag) => GramFactor::Cholesky(ch),
            _ => GramFactor::Pinv(pseudo_inverse(g)),
        };
        RowSpace { a, factor }
    }

    pub fn matrix(&self) -> &SparseMatrix {
        &self.a
    }

    /// `(A Aᵀ)⁺ r`.
    fn solve(&self, r: Vec<f64>) -> Vec<f64> {
        let r = DVector::from_vec(r);
        match &self.factor {
            GramFactor::Cholesky(ch) => ch.solve(&r).data.into(),
            GramFactor::Pinv(p) => (p * r).data.into(),
        }
    }

    /// Least-norm solution `Aᵀ (A Aᵀ)⁺ b`.
    pub fn least_norm(&self, b: &[f64]) -> Vec<f64> {
        self.a.mul_t_vec(&self.solve(b.to_vec()))
    }

    /// `Aᵀ (A Aᵀ)⁺ A z`.
    pub fn project(&self, z: &[f64]) -> Vec<f64> {
        self.least_norm(&self.a.mul_vec(z))
    }
}

fn well_conditioned(ch: &nalgebra::Cholesky<f64, nalgebra::Dyn>, max_diag: f64) -> bool {
    let l = ch.l_dirty();
    let min_pivot = l.diagonal().iter().fold(f64::INFINITY, |m, x| m.min(x * x));
    min_pivot > 1e-10 * max_diag
}

fn pseudo_inverse(g: DMatrix<f64>) -> DMatrix<f64> {
    let n = g.nrows();
    let eig = g.symmetric_eigen();
    let top = eig.eigenvalues.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
    let inv = DVector::from_iterator(
        n,
        eig.eigenvalues
            .iter()
            .map(|&l| if l > PINV_CUTOFF * top { 1.0 / l } else { 0.0 }),
    );
    let q = &eig.eigenvectors;
    q * DMatrix::from_diagonal(&inv) * q.transpose()
}

/// Projects every cell of a scaled packed vector onto the PSD cone.
pub(crate) fn project_psd_cells(d: usize, v: &mut [f64]) {
    let p = sym::packed_len(d);
    let one = |c: &mut [f64]| {
        sym::unscale_offdiag(d, c);
        sym::project_psd(d, c);
        sym::scale_offdiag(d, c);
    };
    if v.len() / p > PARALLEL_CELLS {
        v.par_chunks_mut(p).for_each(one);
    } else {
        v.chunks_mut(p).for_each(one);
    }
}

/// `min <c, m>` over `m` in an affine set and in the PSD cone.
///
/// Douglas–Rachford map `T(z) = z + α(y - x)` with `x = Π_aff(z - τc)` and
/// `y = Π_psd(2x - z)`; `x` is exactly affine-feasible, `y` exactly PSD.
/// With `memory > 0` the fixed-point iteration is Anderson-accelerated; an
/// accelerated point is kept only if its fixed-point residual does not
/// exceed the current one, otherwise the plain step is taken and the history
/// cleared.
pub(crate) struct Splitting<P> {
    d: usize,
    project_affine: P,
    step: Vec<f64>,
    relax: f64,
    anderson: Anderson,
    pub z: Vec<f64>,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    g: Vec<f64>,
    g_norm: f64,
}

impl<P: Fn(&[f64]) -> Vec<f64>> Splitting<P> {
    pub fn new(
        d: usize,
        project_affine: P,
        cost: &[f64],
        tau: f64,
        relax: f64,
        memory: usize,
        z0: Vec<f64>,
    ) -> Self {
        let mut s = Splitting {
            d,
            project_affine,
            step: cost.iter().map(|c| tau * c).collect(),
            relax,
            anderson: Anderson::new(memory),
            z: Vec::new(),
            x: Vec::new(),
            y: Vec::new(),
            g: Vec::new(),
            g_norm: 0.0,
        };
        s.set(z0);
        s
    }

    fn evaluate(&self, z: &[f64]) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
        let shifted: Vec<f64> = z.iter().zip(&self.step).map(|(z, s)| z - s).collect();
        let x = (self.project_affine)(&shifted);
        let mut y: Vec<f64> = x.iter().zip(z).map(|(x, z)| 2.0 * x - z).collect();
        project_psd_cells(self.d, &mut y);
        let g = y.iter().zip(&x).map(|(y, x)| self.relax * (y - x)).collect();
        (x, y, g)
    }

    fn set(&mut self, z: Vec<f64>) {
        let (x, y, g) = self.evaluate(&z);
        self.g_norm = norm2(&g);
        self.z = z;
        self.x = x;
        self.y = y;
        self.g = g;
    }

    pub fn iterate(&mut self) {
        let plain: Vec<f64> = self.z.iter().zip(&self.g).map(|(z, g)| z + g).collect();
        let Some(candidate) = self.anderson.extrapolate(&self.z, &self.g) else {
            self.set(plain);
            return;
        };
        let (x, y, g) = self.evaluate(&candidate);
        let g_norm = norm2(&g);
        if g_norm <= self.g_norm {
            self.z = candidate;
            self.x = x;
            self.y = y;
            self.g = g;
            self.g_norm = g_norm;
        } else {
            self.anderson.reset();
            self.set(plain);
        }
    }

    /// `|y - x|_∞`, the fixed-point residual up to the factor `α`.
    pub fn gap(&self) -> f64 {
        self.x
            .iter()
            .zip(&self.y)
            .fold(0.0, |a, (x, y)| a.max((x - y).abs()))
    }
}

/// Type-II Anderson extrapolation for `z -> z + g(z)`.
struct Anderson {
    memory: usize,
    dz: VecDeque<Vec<f64>>,
    dg: VecDeque<Vec<f64>>,
    prev: Option<(Vec<f64>, Vec<f64>)>,
}

impl Anderson {
    fn new(memory: usize) -> Self {
        Anderson {
            memory,
            dz: VecDeque::new(),
            dg: VecDeque::new(),
            prev: None,
        }
    }

    fn reset(&mut self) {
        self.dz.clear();
        self.dg.clear();
        self.prev = None;
    }

    /// `z + g - sum γ_j (Δz_j + Δg_j)` with `γ` minimizing `|g - ΔG γ|`.
    fn extrapolate(&mut self, z: &[f64], g: &[f64]) -> Option<Vec<f64>> {
        if self.memory == 0 {
            return None;
        }
        if let Some((zp, gp)) = self.prev.take() {
            self.dz.push_back(z.iter().zip(&zp).map(|(a, b)| a - b).collect());
            self.dg.push_back(g.iter().zip(&gp).map(|(a, b)| a - b).collect());
            if self.dz.len() > self.memory {
                self.dz.pop_front();
                self.dg.pop_front();
            }
        }
        self.prev = Some((z.to_vec(), g.to_vec()));
        let k = self.dg.len();
        if k == 0 {
            return None;
        }
        let mut gram = DMatrix::zeros(k, k);
        let mut rhs = DVector::zeros(k);
        for i in 0..k {
            rhs[i] = dot(&self.dg[i], g);
            for j in 0..=i {
                let v = dot(&self.dg[i], &self.dg[j]);
                gram[(i, j)] = v;
                gram[(j, i)] = v;
            }
        }
        let reg = 1e-10 * gram.diagonal().iter().fold(0.0_f64, |a, x| a.max(*x)).max(f64::MIN_POSITIVE);
        for i in 0..k {
            gram[(i, i)] += reg;
        }
        let gamma = gram.cholesky()?.solve(&rhs);
        let mut out: Vec<f64> = z.iter().zip(g).map(|(a, b)| a + b).collect();
        for i in 0..k {
            for ((o, a), b) in out.iter_mut().zip(&self.dz[i]).zip(&self.dg[i]) {
                *o -= gamma[i] * (a + b);
            }
        }
        out.iter().all(|v| v.is_finite()).then_some(out)
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub(crate) fn sup(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |a, x| a.max(x.abs()))
}
