//! Weighted metric projection onto nondecreasing vectors.

use std::ops::Range;

use super::measure::{check_weights, MonotoneMap1D};
use crate::{Error, Result};

/// Result of a projection together with its pooled blocks.
#[derive(Debug, Clone, PartialEq)]
pub struct Projection {
    pub map: MonotoneMap1D,
    /// Maximal pooled blocks, in order; they partition `0..n`.
    pub blocks: Vec<Range<usize>>,
}

impl Projection {
    /// Block index of every entry.
    pub fn block_ids(&self) -> Vec<usize> {
        let mut ids = vec![0; self.map.len()];
        for (b, r) in self.blocks.iter().enumerate() {
            ids[r.clone()].iter_mut().for_each(|x| *x = b);
        }
        ids
    }
}

struct Block {
    start: usize,
    end: usize,
    weight: f64,
    weighted_sum: f64,
    mean: f64,
}

/// Projection of `y` onto `{x : x_1 <= ... <= x_n}` in the norm `sum w_i x_i^2`.
pub fn project_monotone_1d(y: &[f64], w: &[f64]) -> Result<MonotoneMap1D> {
    project_monotone_blocks(y, w).map(|p| p.map)
}

/// Pool-adjacent-violators with block bookkeeping.
///
/// Adjacent blocks are pooled only while their means are strictly out of
/// order, so blocks are the ones forced by the optimality conditions and two
/// neighbouring blocks may end up with equal values. A block of one entry
/// keeps the input value bit-for-bit, which makes the projection of a
/// monotone vector exactly the identity.
pub fn project_monotone_blocks(y: &[f64], w: &[f64]) -> Result<Projection> {
    if y.is_empty() {
        return Err(Error::EmptyMap);
    }
    if y.len() != w.len() {
        return Err(Error::LengthMismatch {
            expected: y.len(),
            got: w.len(),
        });
    }
    check_weights(w)?;
    if y.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidArgument("non-finite input".into()));
    }

    let mut stack: Vec<Block> = Vec::with_capacity(y.len());
    for (i, (&yi, &wi)) in y.iter().zip(w).enumerate() {
        let mut cur = Block {
            start: i,
            end: i + 1,
            weight: wi,
            weighted_sum: wi * yi,
            mean: yi,
        };
        while let Some(prev) = stack.last() {
            if prev.mean <= cur.mean {
                break;
            }
            let prev = stack.pop().expect("nonempty");
            let weight = prev.weight + cur.weight;
            let weighted_sum = prev.weighted_sum + cur.weighted_sum;
            cur = Block {
                start: prev.start,
                end: cur.end,
                weight,
                weighted_sum,
                mean: weighted_sum / weight,
            };
        }
        stack.push(cur);
    }

    let mut values = Vec::with_capacity(y.len());
    let mut blocks = Vec::with_capacity(stack.len());
    for b in &stack {
        values.extend(std::iter::repeat_n(b.mean, b.end - b.start));
        blocks.push(b.start..b.end);
    }
    Ok(Projection {
        map: MonotoneMap1D::from_sorted(values),
        blocks,
    })
}
