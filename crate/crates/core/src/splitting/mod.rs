//! Extended-phase-space operators, the leapfrog catalog and drivers.

mod driver;
mod ops;
mod scheme;

pub use driver::{integrate, DriverMode, ExtendedMethod, ExtendedStepper, DIVERGENCE_THRESHOLD};
pub use ops::{apply_operator, op_drift_q, op_drift_qt, op_kick_p, op_kick_pt, OperatorTag};
pub use scheme::{leapfrog_step, mixed_step, stormer_verlet_step, Scheme, SchemeSpec};


