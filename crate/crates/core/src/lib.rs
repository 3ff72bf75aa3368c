//! Numerical toolkit for the cone of monotone transport maps.
//!
//! The crate is organised in three layers:
//!
//! * [`cone_core`]: one-dimensional machinery. Weighted projection onto
//!   nondecreasing maps (pool-adjacent-violators), the explicit sticky-particle
//!   flow `X(t) = P(X0 + t V0)`, push-forward of the reference measure and
//!   polar-cone certificates.
//! * [`deformation`]: box grids, discrete test deformations and their
//!   symmetric gradients, monotone test families and the functional
//!   `G(u) = -∫u·F - ∫<e(u), H>`.
//! * [`stress_recovery`]: constructive recovery of a positive semidefinite
//!   matrix measure `M` with `G(u) = ∫<e(u), M>` by conic splitting, the
//!   sublinear gauge used to bound every positive extension, and generators
//!   for test instances.
//!
//! [`io`] holds the JSON and CSV file formats shared with the CLI.

pub mod cone_core;
pub mod deformation;
mod error;
pub mod io;
pub mod stress_recovery;
pub mod sym;

pub use error::{Error, Result};

pub use cone_core::{
    is_monotone_map, lagrangian_velocity, nonneg_primitive, polar_membership_1d, polar_residual,
    project_monotone_1d, push_forward, right_velocity, sticky_evolve, DiscreteMeasure,
    MonotoneMap1D, PolarCertificate1D, StickyState,
};
pub use deformation::{
    check_inequality, deformation_tensor, evaluate_g, monotone_test_family, Grid,
    InequalityReport, MatrixMeasureField, PointMeasure, SymmetricField, TestDeformation,
    VectorMeasure,
};
pub use stress_recovery::{
    assemble_constraints, instance_from_flow, recover_stress, riedl_gauge, verify_representation,
    Constraints, GaugeOptions, RecoveryResult, RepresentationProblem, SolverOptions,
    VerificationReport,
};
