//! Explicit symmetric leapfrogs on a doubled phase space for inseparable
//! Hamiltonians and general first-order ODEs, with reference integrators
//! and an experiment harness.

pub mod composition;
pub mod error;
pub mod harness;
pub mod maps;
pub mod nonham;
pub mod par;
pub mod problems;
pub mod reference;
pub mod splitting;
pub mod state;
pub mod system;
pub mod trajectory;

pub use composition::CompositionScheme;
pub use error::{Error, Result};
pub use maps::{apply_mixing, apply_projection, LinearPhaseMap, MapKind};
pub use state::{clone_up, EvalCounter, ExtendedState, PhaseState};
pub use system::{check_gradients, Block, FirstOrderSystem, HamiltonianField, HamiltonianSystem, SeparableSystem};
pub use trajectory::{Sample, Trajectory};
