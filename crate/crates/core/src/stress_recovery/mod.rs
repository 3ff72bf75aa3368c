//! Recovery of a PSD stress field `M` representing `G`, the Riedl gauge and
//! instance generators.

mod assembly;
mod flow;
mod gauge;
mod recover;
mod splitting;
mod verify;

pub use assembly::{assemble_constraints, hat_basis, Constraints, RepresentationProblem, SparseMatrix};
pub use flow::{divergence_load, instance_from_flow, load_from_sticky, FlowInstance, DET_FLOOR};
pub use gauge::{gauge_basis, riedl_gauge, GaugeOptions};
pub use recover::{recover_stress, RecoveryResult, SolverOptions};
pub use verify::{verify_representation, verify_representation_with, VerificationReport, VerifyOptions};
