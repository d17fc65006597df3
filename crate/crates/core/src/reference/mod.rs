//! Baseline and truth integrators.

mod implicit_midpoint;
mod oracle;
mod prk;

pub use implicit_midpoint::{
    implicit_midpoint_step, integrate_implicit_midpoint, ImplicitMidpointConfig,
};
pub use oracle::{oracle_solve, OracleConfig};
pub use prk::{prk_step, PrkTableau};
