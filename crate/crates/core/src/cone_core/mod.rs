//! One-dimensional cone machinery: projection onto monotone maps, the
//! sticky-particle flow and polar-cone certificates.

mod measure;
mod polar;
mod projection;
mod sticky;

pub(crate) use measure::check_weights;
pub use measure::{DiscreteMeasure, MonotoneMap1D, NORMALIZATION_TOL};
pub use polar::{
    is_monotone_map, nonneg_primitive, polar_membership_1d, PolarCertificate1D, TOL_EQ_REL,
    TOL_MONO_REL, TOL_POS_REL,
};
pub use projection::{project_monotone_1d, project_monotone_blocks, Projection};
pub use sticky::{
    lagrangian_velocity, polar_residual, push_forward, right_velocity, sticky_evolve,
    sticky_evolve_blocks, StickyState, Velocity, MERGE_QUANTUM,
};
