//! JSON and CSV formats read and written by the command-line tool.
//!
//! JSON floats are written in shortest round-trip form, so reading a file
//! back reproduces every value bit for bit and equal inputs give
//! byte-identical files.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cone_core::{right_velocity, sticky_evolve, DiscreteMeasure, MonotoneMap1D, StickyState};
use crate::deformation::{Grid, PointMeasure, SymmetricField, VectorMeasure};
use crate::stress_recovery::{instance_from_flow, RepresentationProblem};
use crate::sym;

/// Bumped whenever a file layout changes incompatibly.
pub const FORMAT_REVISION: u32 = 1;

#[derive(Debug, Error)]
pub enum FileError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Json {
        path: PathBuf,
        source: serde_json::Error,
    },
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Invalid(#[from] crate::Error),
}

pub type FileResult<T> = std::result::Result<T, FileError>;

pub fn read_json<T: DeserializeOwned>(path: &Path) -> FileResult<T> {
    let text = fs::read_to_string(path).map_err(|source| FileError::Io {
        path: path.to_owned(),
        source,
    })?;
    serde_json::from_str(&text).map_err(|source| FileError::Json {
        path: path.to_owned(),
        source,
    })
}

/// Pretty-printed JSON with a trailing newline.
pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("plain data serializes");
    s.push('\n');
    s
}

pub fn write_file(path: &Path, contents: &[u8]) -> FileResult<()> {
    fs::write(path, contents).map_err(|source| FileError::Io {
        path: path.to_owned(),
        source,
    })
}

/// `{"grid", "F", "H", "gamma"}`; a missing `H` means zero.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemFile {
    pub grid: Grid,
    #[serde(rename = "F")]
    pub f: VectorMeasure,
    #[serde(rename = "H", default, skip_serializing_if = "Option::is_none")]
    pub h: Option<SymmetricField>,
    /// Carried along from `gen-instance`; not used by the solver.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
}

impl ProblemFile {
    pub fn to_problem(&self, identity_row: bool) -> crate::Result<RepresentationProblem> {
        let h = match &self.h {
            Some(h) => h.clone(),
            None => SymmetricField::zeros(self.grid.dim(), self.grid.n_cells()),
        };
        Ok(RepresentationProblem::new(self.f.clone(), h, self.grid.clone())?.with_identity_row(identity_row))
    }
}

/// Input of `gen-instance`: nodal values of `f` and `h` (one `d`-vector per
/// node, axis 0 fastest), the energy weight per cell, `γ` and `ϱ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FlowFile {
    pub grid: Grid,
    pub f: Vec<Vec<f64>>,
    pub h: Vec<Vec<f64>>,
    pub e: Vec<f64>,
    pub gamma: f64,
    pub rho: PointMeasure,
}

impl FlowFile {
    pub fn instance(&self) -> crate::Result<ProblemFile> {
        let flat = |v: &[Vec<f64>]| -> crate::Result<Vec<f64>> {
            let d = self.grid.dim();
            if let Some(bad) = v.iter().find(|x| x.len() != d) {
                return Err(crate::Error::LengthMismatch {
                    expected: d,
                    got: bad.len(),
                });
            }
            Ok(v.concat())
        };
        let inst = instance_from_flow(
            &flat(&self.f)?,
            &flat(&self.h)?,
            &self.e,
            self.gamma,
            &self.rho,
            &self.grid,
        )?;
        Ok(ProblemFile {
            grid: self.grid.clone(),
            f: inst.f,
            h: Some(inst.h),
            gamma: Some(self.gamma),
        })
    }
}

/// Input of `certify` when the residual is given directly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ResidualFile {
    #[serde(rename = "Y")]
    pub y: Vec<f64>,
    #[serde(rename = "X")]
    pub x: MonotoneMap1D,
    pub atoms: Vec<f64>,
    pub weights: Vec<f64>,
}

impl ResidualFile {
    pub fn measure(&self) -> crate::Result<DiscreteMeasure> {
        DiscreteMeasure::new(self.atoms.clone(), self.weights.clone())
    }
}

/// Input of `project`: values and weights of the weighted projection.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProjectionFile {
    pub y: Vec<f64>,
    pub weights: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrajectoryRow {
    pub t: f64,
    pub index: usize,
    #[serde(rename = "X")]
    pub x: f64,
    #[serde(rename = "V")]
    pub v: f64,
    pub block_id: usize,
}

/// Positions and right velocities at each time; `block_id` numbers the
/// clusters moving together, left to right.
pub fn trajectory(state: &StickyState, times: &[f64]) -> crate::Result<Vec<TrajectoryRow>> {
    let mut rows = Vec::with_capacity(times.len() * state.len());
    for &t in times {
        let x = sticky_evolve(state, t)?;
        let v = right_velocity(state, t)?;
        let ids = v.cluster_ids();
        for i in 0..state.len() {
            rows.push(TrajectoryRow {
                t,
                index: i,
                x: x.values()[i],
                v: v.values[i],
                block_id: ids[i],
            });
        }
    }
    Ok(rows)
}

/// CSV with header `t,index,X,V,block_id`.
pub fn write_trajectory<W: Write>(out: W, rows: &[TrajectoryRow]) -> FileResult<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

/// Per-cell dump of a field: cell multi-index then the packed entries,
/// `cell,m` in one dimension and `cell_i,cell_j,m11,m12,m22` in two.
pub fn write_field_csv<W: Write>(out: W, field: &SymmetricField, grid: &Grid) -> FileResult<()> {
    field.check_grid(grid)?;
    let d = grid.dim();
    let mut header: Vec<String> = if d == 1 {
        vec!["cell".into()]
    } else {
        ["cell_i", "cell_j", "cell_k"][..d].iter().map(|s| s.to_string()).collect()
    };
    if d == 1 {
        header.push("m".into());
    } else {
        for i in 0..d {
            for j in i..d {
                debug_assert_eq!(sym::index(d, i, j), header.len() - d);
                header.push(format!("m{}{}", i + 1, j + 1));
            }
        }
    }
    let mut w = csv::Writer::from_writer(out);
    w.write_record(&header)?;
    for (c, vals) in field.cells().enumerate() {
        let mut rec: Vec<String> = grid.cell_multi(c).iter().map(usize::to_string).collect();
        rec.extend(vals.iter().map(|v| format_f64(*v)));
        w.write_record(&rec)?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

/// Shortest string that parses back to the same `f64`.
pub fn format_f64(v: f64) -> String {
    // Debug output of f64 round-trips exactly and keeps the decimal point
    format!("{v:?}")
}
