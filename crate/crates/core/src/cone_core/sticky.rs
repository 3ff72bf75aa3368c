//! Sticky-particle dynamics through the explicit projection formula
//! `X(t) = P(X0 + t V0)`.

use std::ops::Range;

use serde::{Deserialize, Serialize};

use super::measure::{DiscreteMeasure, MonotoneMap1D};
use super::projection::{project_monotone_blocks, Projection};
use crate::{Error, Result};

/// Values closer than this (absolute) are merged into one Eulerian atom.
pub const MERGE_QUANTUM: f64 = 1e-12;

/// Relative tolerance deciding whether two particles touch, and whether a
/// contact force (partial sum of the residual) is active.
const CONTACT_TOL: f64 = 1e-12;

/// Initial data of the particle system: reference measure, monotone initial
/// positions and initial Lagrangian velocity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "StickyRepr", into = "StickyRepr")]
pub struct StickyState {
    measure: DiscreteMeasure,
    x0: MonotoneMap1D,
    v0: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct StickyRepr {
    atoms: Vec<f64>,
    weights: Vec<f64>,
    #[serde(rename = "X0")]
    x0: Vec<f64>,
    #[serde(rename = "V0")]
    v0: Vec<f64>,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    normalized: bool,
}

impl TryFrom<StickyRepr> for StickyState {
    type Error = Error;

    fn try_from(r: StickyRepr) -> Result<Self> {
        let measure = if r.normalized {
            DiscreteMeasure::probability(r.atoms, r.weights)?
        } else {
            DiscreteMeasure::new(r.atoms, r.weights)?
        };
        StickyState::new(measure, r.x0, r.v0)
    }
}

impl From<StickyState> for StickyRepr {
    fn from(s: StickyState) -> Self {
        let normalized = s.measure.is_normalized();
        StickyRepr {
            atoms: s.measure.atoms().to_vec(),
            weights: s.measure.weights().to_vec(),
            x0: s.x0.into_vec(),
            v0: s.v0,
            normalized,
        }
    }
}

impl StickyState {
    pub fn new(measure: DiscreteMeasure, x0: Vec<f64>, v0: Vec<f64>) -> Result<Self> {
        let x0 = MonotoneMap1D::new(x0)?;
        for len in [x0.len(), v0.len()] {
            if len != measure.len() {
                return Err(Error::LengthMismatch {
                    expected: measure.len(),
                    got: len,
                });
            }
        }
        if v0.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("non-finite velocity".into()));
        }
        Ok(StickyState { measure, x0, v0 })
    }

    pub fn measure(&self) -> &DiscreteMeasure {
        &self.measure
    }

    pub fn x0(&self) -> &MonotoneMap1D {
        &self.x0
    }

    pub fn v0(&self) -> &[f64] {
        &self.v0
    }

    pub fn len(&self) -> usize {
        self.v0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.v0.is_empty()
    }

    /// Free-flight positions `X0 + t V0`.
    pub fn free_flight(&self, t: f64) -> Vec<f64> {
        self.x0
            .values()
            .iter()
            .zip(&self.v0)
            .map(|(x, v)| x + t * v)
            .collect()
    }

    /// True when some initial atoms coincide while carrying different
    /// velocities; the velocity at `t = 0` is then only defined as a right
    /// limit.
    pub fn initial_velocity_ambiguous(&self) -> bool {
        let x = self.x0.values();
        let scale = x.iter().fold(1.0_f64, |a, v| a.max(v.abs()));
        (0..x.len().saturating_sub(1))
            .any(|j| x[j + 1] - x[j] <= CONTACT_TOL * scale && self.v0[j] != self.v0[j + 1])
    }
}

/// Positions at time `t`.
pub fn sticky_evolve(state: &StickyState, t: f64) -> Result<MonotoneMap1D> {
    sticky_evolve_blocks(state, t).map(|p| p.map)
}

/// Positions at time `t` with the pooled blocks of the projection.
pub fn sticky_evolve_blocks(state: &StickyState, t: f64) -> Result<Projection> {
    check_time(t)?;
    project_monotone_blocks(&state.free_flight(t), state.measure.weights())
}

/// Velocity field right after time `t` and the particle clusters moving
/// together.
#[derive(Debug, Clone, PartialEq)]
pub struct Velocity {
    pub values: Vec<f64>,
    pub clusters: Vec<Range<usize>>,
}

impl Velocity {
    pub fn cluster_ids(&self) -> Vec<usize> {
        let mut ids = vec![0; self.values.len()];
        for (c, r) in self.clusters.iter().enumerate() {
            ids[r.clone()].iter_mut().for_each(|x| *x = c);
        }
        ids
    }
}

/// Right derivative of `s -> X(s)` at `s = t >= 0`.
///
/// The derivative of the projection in direction `V0` is the projection of
/// `V0` onto the critical cone at `X(t)`: particles joined by an active
/// contact force move as one cluster, touching particles without contact
/// force may not cross, and separated particles move freely. Away from
/// collision instants this is the blockwise mean of `V0`; at a collision
/// instant it is the post-collision velocity.
pub fn right_velocity(state: &StickyState, t: f64) -> Result<Velocity> {
    let proj = sticky_evolve_blocks(state, t)?;
    let y = state.free_flight(t);
    let x = proj.map.values();
    let w = state.measure.weights();
    let v = &state.v0;
    let n = x.len();

    let scale = y.iter().fold(1.0_f64, |a, v| a.max(v.abs()));
    let tol_x = CONTACT_TOL * scale;
    let tol_force = CONTACT_TOL * scale * state.measure.total_mass();
    let block_of = proj.block_ids();

    // groups glued by active contact forces
    struct Group {
        start: usize,
        end: usize,
        weight: f64,
        momentum: f64,
    }
    let mut groups: Vec<Group> = Vec::new();
    // soft[k]: group k and k+1 touch without contact force
    let mut soft: Vec<bool> = Vec::new();
    let mut force = 0.0;
    for i in 0..n {
        let glued = i > 0 && {
            let j = i - 1;
            block_of[j] == block_of[i] && force > tol_force
        };
        if glued {
            let g = groups.last_mut().expect("group exists");
            g.end = i + 1;
            g.weight += w[i];
            g.momentum += w[i] * v[i];
        } else {
            if i > 0 {
                soft.push(x[i] - x[i - 1] <= tol_x);
            }
            groups.push(Group {
                start: i,
                end: i + 1,
                weight: w[i],
                momentum: w[i] * v[i],
            });
        }
        force += w[i] * (y[i] - x[i]);
    }

    let mut values = vec![0.0; n];
    let mut clusters = Vec::with_capacity(groups.len());
    let mut k = 0;
    while k < groups.len() {
        let mut end = k + 1;
        while end < groups.len() && soft[end - 1] {
            end += 1;
        }
        let chain = &groups[k..end];
        let means: Vec<f64> = chain
            .iter()
            .map(|g| {
                if g.end - g.start == 1 {
                    v[g.start]
                } else {
                    g.momentum / g.weight
                }
            })
            .collect();
        let weights: Vec<f64> = chain.iter().map(|g| g.weight).collect();
        let pooled = project_monotone_blocks(&means, &weights)?;
        for r in &pooled.blocks {
            let start = chain[r.start].start;
            let end = chain[r.end - 1].end;
            let speed = pooled.map.values()[r.start];
            if end - start == 1 {
                values[start] = v[start];
            } else {
                values[start..end].iter_mut().for_each(|s| *s = speed);
            }
            clusters.push(start..end);
        }
        k = end;
    }
    Ok(Velocity { values, clusters })
}

/// Lagrangian velocity `V(t) = dX/dt` for `t > 0`, as a right derivative.
pub fn lagrangian_velocity(state: &StickyState, t: f64) -> Result<Vec<f64>> {
    if t.is_nan() || t <= 0.0 {
        return Err(Error::NonPositiveTime(t));
    }
    right_velocity(state, t).map(|v| v.values)
}

/// `(X0 + t V0) - X(t)`, an element of the polar cone at `X(t)`.
pub fn polar_residual(state: &StickyState, t: f64) -> Result<Vec<f64>> {
    let x = sticky_evolve(state, t)?;
    Ok(state
        .free_flight(t)
        .iter()
        .zip(x.values())
        .map(|(a, b)| a - b)
        .collect())
}

/// Image measure of `m` under `X`: atoms are the distinct values of `X`
/// (after rounding to [`MERGE_QUANTUM`]), each carrying the mass mapped to it.
pub fn push_forward(x: &MonotoneMap1D, m: &DiscreteMeasure) -> Result<DiscreteMeasure> {
    if x.len() != m.len() {
        return Err(Error::LengthMismatch {
            expected: m.len(),
            got: x.len(),
        });
    }
    let key = |v: f64| (v / MERGE_QUANTUM).round();
    let mut atoms: Vec<f64> = Vec::new();
    let mut weights: Vec<f64> = Vec::new();
    let mut last_key = f64::NAN;
    for (&xi, &wi) in x.values().iter().zip(m.weights()) {
        let k = key(xi);
        if k == last_key {
            *weights.last_mut().expect("atom exists") += wi;
        } else {
            atoms.push(xi);
            weights.push(wi);
            last_key = k;
        }
    }
    // normalization is not re-asserted: regrouped sums may differ from 1 by rounding
    DiscreteMeasure::new(atoms, weights)
}

fn check_time(t: f64) -> Result<()> {
    if t.is_nan() || t < 0.0 {
        return Err(Error::NegativeTime(t));
    }
    Ok(())
}
