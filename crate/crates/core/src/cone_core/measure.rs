use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Tolerance on the total mass of a measure flagged as normalized.
pub const NORMALIZATION_TOL: f64 = 1e-12;

/// Weighted atoms on the real line.
///
/// Plays the role of the reference measure on `Ω` (atoms are reference
/// positions) and of the Eulerian density after a push-forward.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "MeasureRepr", into = "MeasureRepr")]
pub struct DiscreteMeasure {
    atoms: Vec<f64>,
    weights: Vec<f64>,
    normalized: bool,
}

#[derive(Serialize, Deserialize)]
struct MeasureRepr {
    atoms: Vec<f64>,
    weights: Vec<f64>,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    normalized: bool,
}

impl TryFrom<MeasureRepr> for DiscreteMeasure {
    type Error = Error;

    fn try_from(r: MeasureRepr) -> Result<Self> {
        DiscreteMeasure::with_flag(r.atoms, r.weights, r.normalized)
    }
}

impl From<DiscreteMeasure> for MeasureRepr {
    fn from(m: DiscreteMeasure) -> Self {
        MeasureRepr {
            atoms: m.atoms,
            weights: m.weights,
            normalized: m.normalized,
        }
    }
}

impl DiscreteMeasure {
    pub fn new(atoms: Vec<f64>, weights: Vec<f64>) -> Result<Self> {
        Self::with_flag(atoms, weights, false)
    }

    /// A probability measure; the total weight must be 1.
    pub fn probability(atoms: Vec<f64>, weights: Vec<f64>) -> Result<Self> {
        Self::with_flag(atoms, weights, true)
    }

    fn with_flag(atoms: Vec<f64>, weights: Vec<f64>, normalized: bool) -> Result<Self> {
        check_weights(&weights)?;
        if atoms.len() != weights.len() {
            return Err(Error::LengthMismatch {
                expected: weights.len(),
                got: atoms.len(),
            });
        }
        if atoms.iter().any(|a| !a.is_finite()) {
            return Err(Error::InvalidMeasure("non-finite atom".into()));
        }
        let m = DiscreteMeasure {
            atoms,
            weights,
            normalized,
        };
        if normalized && (m.total_mass() - 1.0).abs() > NORMALIZATION_TOL {
            return Err(Error::InvalidMeasure(format!(
                "total mass {} of a normalized measure differs from 1",
                m.total_mass()
            )));
        }
        Ok(m)
    }

    /// Midpoints of `n` equal cells of `[0, 1]`, each with weight `1/n`.
    pub fn uniform_midpoints(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::EmptyMap);
        }
        let w = 1.0 / n as f64;
        let atoms = (0..n).map(|i| (i as f64 + 0.5) * w).collect();
        Self::with_flag(atoms, vec![w; n], false)
    }

    pub fn atoms(&self) -> &[f64] {
        &self.atoms
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    pub fn total_mass(&self) -> f64 {
        self.weights.iter().sum()
    }
}

/// Weights must be nonempty, finite and strictly positive.
pub(crate) fn check_weights(w: &[f64]) -> Result<()> {
    if w.is_empty() {
        return Err(Error::EmptyMap);
    }
    if let Some(i) = w.iter().position(|&x| !(x > 0.0 && x.is_finite())) {
        return Err(Error::InvalidMeasure(format!(
            "weight {i} is not strictly positive: {}",
            w[i]
        )));
    }
    Ok(())
}

/// A nondecreasing vector of positions, indexed against a reference measure.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct MonotoneMap1D {
    values: Vec<f64>,
}

impl MonotoneMap1D {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::EmptyMap);
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("non-finite map value".into()));
        }
        if let Some(i) = values.windows(2).position(|p| p[0] > p[1]) {
            return Err(Error::NotMonotone(i));
        }
        Ok(MonotoneMap1D { values })
    }

    /// Skips validation; callers guarantee monotonicity.
    pub(crate) fn from_sorted(values: Vec<f64>) -> Self {
        debug_assert!(values.windows(2).all(|p| p[0] <= p[1]));
        MonotoneMap1D { values }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.values
    }
}

impl TryFrom<Vec<f64>> for MonotoneMap1D {
    type Error = Error;

    fn try_from(v: Vec<f64>) -> Result<Self> {
        MonotoneMap1D::new(v)
    }
}

impl From<MonotoneMap1D> for Vec<f64> {
    fn from(m: MonotoneMap1D) -> Self {
        m.values
    }
}
