//! Experiment harness: configuration, runners, artifacts and analysis.

pub mod analysis;
pub mod config;
pub mod experiments;
pub mod io;
pub mod studies;
pub mod sweep;

pub use analysis::{
    convergence_study, drift_study, fd_jacobian, fit_line, precession_from_series,
    precession_study, running_max, symplectic_defect, ConvergencePoint, ConvergenceReport,
    DriftReport, LineFit, PrecessionReport, ROUND_OFF_FLOOR,
};
pub use config::{ConfigOverrides, Duration, ExperimentConfig, MethodId, NumOrText, ProblemId, StepSize};
pub use experiments::{
    endpoint_error, run, run_geodesic, run_harmonic, run_vdp, Column, Comparison, RunOutput, Summary,
};
pub use io::{summary_path, to_csv, write_outputs};
pub use studies::{
    convergence_for_config, extended_symplectic_defect, map_study, midpoint_symplectic_defect,
    MapChoice,
};
pub use sweep::{run_sweep, SweepResult, SweepRun, SweepSpec};
