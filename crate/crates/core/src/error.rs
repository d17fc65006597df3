use thiserror::Error;

/// Errors raised by the integrators, problem constructors and harness.
#[derive(Debug, Error)]
pub enum Error {
    #[error("non-finite value encountered in {0}")]
    NonFinite(&'static str),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("state diverged at step {step} (tau = {tau}): |component| exceeded {threshold:e}; last valid step {last_valid_step}")]
    Divergence {
        step: u64,
        tau: f64,
        threshold: f64,
        last_valid_step: u64,
    },

    #[error("expected a {expected} map, got a {got} map")]
    MapKind {
        expected: &'static str,
        got: &'static str,
    },

    #[error("unknown {kind} `{name}`")]
    Unknown { kind: &'static str, name: String },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("singular metric: r = {r} is not outside the horizon 2M = {horizon}")]
    SingularMetric { r: f64, horizon: f64 },

    #[error("no real root for p_t: {0}")]
    NoRealRoot(String),

    #[error("fixed-point iteration did not converge after {iterations} iterations (last relative update {update:e}); step size too large?")]
    NoConvergence { iterations: usize, update: f64 },

    #[error("oracle exceeded the step budget of {0} steps")]
    MaxSteps(u64),

    #[error("oracle step size underflow at t = {0}")]
    StepUnderflow(f64),

    #[error("tableau stage equations are not explicitly solvable")]
    ImplicitTableau,

    #[error("system does not declare a partition point")]
    MissingPartition,

    #[error("analysis failed: {0}")]
    Analysis(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// True for configuration-style errors that the CLI maps to exit code 3.
    pub fn is_config(&self) -> bool {
        matches!(
            self,
            Error::Unknown { .. }
                | Error::InvalidParameter(_)
                | Error::MapKind { .. }
                | Error::MissingPartition
                | Error::Json(_)
                | Error::NoRealRoot(_)
                | Error::SingularMetric { .. }
        )
    }

    pub fn is_divergence(&self) -> bool {
        matches!(self, Error::Divergence { .. } | Error::NonFinite(_))
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
