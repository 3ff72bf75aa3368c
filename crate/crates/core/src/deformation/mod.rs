//! Box grids, discrete test deformations and the functional `G`.

mod family;
mod fields;
mod functional;
mod grid;
mod tensor;

pub use family::monotone_test_family;
pub use fields::{MatrixMeasureField, PointMeasure, SymmetricField, VectorMeasure};
pub(crate) use functional::{atom_stencils, load_term};
pub use functional::{check_inequality, evaluate_g, InequalityReport, TOL_G_REL};
pub use grid::Grid;
pub use tensor::{deformation_tensor, TestDeformation};
