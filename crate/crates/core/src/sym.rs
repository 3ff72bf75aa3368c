//! Small symmetric matrices stored as packed upper triangles.
//!
//! A `d x d` symmetric matrix is stored row-major over its upper triangle:
//! `[a11]` for `d = 1`, `[a11, a12, a22]` for `d = 2` and
//! `[a11, a12, a13, a22, a23, a33]` for `d = 3`. This is also the column
//! order used by every file format in the crate.
//!
//! The conic solvers work in the *scaled* packing, where off-diagonal entries
//! are multiplied by `sqrt(2)` so that the Euclidean inner product of two
//! packed vectors equals the Frobenius pairing `<A, B> = tr(A B^T)`.

use nalgebra::{Matrix3, SymmetricEigen};

pub const MAX_DIM: usize = 3;

pub fn packed_len(d: usize) -> usize {
    d * (d + 1) / 2
}

/// Inverse of [`packed_len`] for the supported dimensions.
pub fn dim_from_packed_len(len: usize) -> Option<usize> {
    match len {
        1 => Some(1),
        3 => Some(2),
        6 => Some(3),
        _ => None,
    }
}

/// Position of entry `(i, j)` in the packed layout.
pub fn index(d: usize, i: usize, j: usize) -> usize {
    let (i, j) = if i <= j { (i, j) } else { (j, i) };
    // rows above i contribute d + (d-1) + ... + (d-i+1) entries
    i * d - i * (i.saturating_sub(1)) / 2 + (j - i)
}

pub fn is_diagonal_slot(d: usize, k: usize) -> bool {
    (0..d).any(|i| index(d, i, i) == k)
}

pub fn get(d: usize, a: &[f64], i: usize, j: usize) -> f64 {
    a[index(d, i, j)]
}

/// Symmetric part of a row-major `d x d` matrix, packed.
pub fn sym_part(d: usize, full: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; packed_len(d)];
    for i in 0..d {
        for j in i..d {
            out[index(d, i, j)] = 0.5 * (full[i * d + j] + full[j * d + i]);
        }
    }
    out
}

pub fn identity(d: usize) -> Vec<f64> {
    let mut out = vec![0.0; packed_len(d)];
    for i in 0..d {
        out[index(d, i, i)] = 1.0;
    }
    out
}

/// Frobenius pairing `sum_ij a_ij b_ij`; off-diagonal entries count twice.
pub fn pairing(d: usize, a: &[f64], b: &[f64]) -> f64 {
    let mut acc = 0.0;
    for i in 0..d {
        for j in i..d {
            let k = index(d, i, j);
            let w = if i == j { 1.0 } else { 2.0 };
            acc += w * a[k] * b[k];
        }
    }
    acc
}

pub fn trace(d: usize, a: &[f64]) -> f64 {
    (0..d).map(|i| a[index(d, i, i)]).sum()
}

pub fn frobenius_norm(d: usize, a: &[f64]) -> f64 {
    pairing(d, a, a).sqrt()
}

/// Eigenvalues in ascending order.
pub fn eigenvalues(d: usize, a: &[f64]) -> Vec<f64> {
    match d {
        1 => vec![a[0]],
        2 => {
            let (lo, hi) = eig2(a[0], a[1], a[2]);
            vec![lo, hi]
        }
        3 => {
            let eig = SymmetricEigen::new(full3(a));
            let mut v: Vec<f64> = eig.eigenvalues.iter().copied().collect();
            v.sort_by(f64::total_cmp);
            v
        }
        _ => panic!("unsupported dimension {d}"),
    }
}

pub fn min_eigenvalue(d: usize, a: &[f64]) -> f64 {
    eigenvalues(d, a)[0]
}

pub fn max_eigenvalue(d: usize, a: &[f64]) -> f64 {
    eigenvalues(d, a)[d - 1]
}

pub fn determinant(d: usize, a: &[f64]) -> f64 {
    match d {
        1 => a[0],
        2 => a[0] * a[2] - a[1] * a[1],
        3 => full3(a).determinant(),
        _ => panic!("unsupported dimension {d}"),
    }
}

/// Cofactor matrix, packed. The cofactor of a symmetric matrix is symmetric
/// and equals `det(A) A^{-1}` when `A` is invertible.
pub fn cofactor(d: usize, a: &[f64]) -> Vec<f64> {
    match d {
        1 => vec![1.0],
        2 => vec![a[2], -a[1], a[0]],
        3 => {
            let m = full3(a);
            let c = |r: [usize; 2], s: [usize; 2]| {
                m[(r[0], s[0])] * m[(r[1], s[1])] - m[(r[0], s[1])] * m[(r[1], s[0])]
            };
            // C_ij = (-1)^{i+j} minor_ij
            vec![
                c([1, 2], [1, 2]),
                -c([1, 2], [0, 2]),
                c([1, 2], [0, 1]),
                c([0, 2], [0, 2]),
                -c([0, 2], [0, 1]),
                c([0, 1], [0, 1]),
            ]
        }
        _ => panic!("unsupported dimension {d}"),
    }
}

/// Nearest positive semidefinite matrix in the Frobenius norm, in place.
pub fn project_psd(d: usize, a: &mut [f64]) {
    match d {
        1 => a[0] = a[0].max(0.0),
        2 => {
            let (lo, hi) = eig2(a[0], a[1], a[2]);
            if lo >= 0.0 {
                return;
            }
            if hi <= 0.0 {
                a.iter_mut().for_each(|x| *x = 0.0);
                return;
            }
            // hi * v v^T with (hi - lo) v v^T = A - lo I
            let s = hi / (hi - lo);
            a[0] = s * (a[0] - lo);
            a[1] *= s;
            a[2] = s * (a[2] - lo);
        }
        3 => {
            let eig = SymmetricEigen::new(full3(a));
            if eig.eigenvalues.iter().all(|&l| l >= 0.0) {
                return;
            }
            let clipped = eig.eigenvalues.map(|l| l.max(0.0));
            let r = eig.eigenvectors * Matrix3::from_diagonal(&clipped) * eig.eigenvectors.transpose();
            for i in 0..3 {
                for j in i..3 {
                    a[index(3, i, j)] = 0.5 * (r[(i, j)] + r[(j, i)]);
                }
            }
        }
        _ => panic!("unsupported dimension {d}"),
    }
}

/// Converts packed entries to the scaled packing (off-diagonals times sqrt 2).
pub fn scale_offdiag(d: usize, a: &mut [f64]) {
    for_offdiag(d, a, std::f64::consts::SQRT_2);
}

/// Inverse of [`scale_offdiag`].
pub fn unscale_offdiag(d: usize, a: &mut [f64]) {
    for_offdiag(d, a, std::f64::consts::FRAC_1_SQRT_2);
}

fn for_offdiag(d: usize, a: &mut [f64], factor: f64) {
    for i in 0..d {
        for j in (i + 1)..d {
            a[index(d, i, j)] *= factor;
        }
    }
}

fn eig2(a: f64, b: f64, c: f64) -> (f64, f64) {
    let mean = 0.5 * (a + c);
    let rad = (0.5 * (a - c)).hypot(b);
    (mean - rad, mean + rad)
}

fn full3(a: &[f64]) -> Matrix3<f64> {
    Matrix3::new(a[0], a[1], a[2], a[1], a[3], a[4], a[2], a[4], a[5])
}
