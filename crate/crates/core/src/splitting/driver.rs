//! Full integrations on the extended phase space.

use super::scheme::{mixed_step, Scheme, SchemeSpec};
use crate::composition::CompositionScheme;
use crate::error::{Error, Result};
use crate::maps::{project_unchecked, LinearPhaseMap, MapKind};
use crate::state::{clone_up, EvalCounter, ExtendedState, PhaseState};
use crate::system::HamiltonianSystem;
use crate::trajectory::{Sample, Trajectory};
use serde::{Deserialize, Serialize};
use std::str::FromStr;

/// Components larger than this in magnitude abort the run.
pub const DIVERGENCE_THRESHOLD: f64 = 1e12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DriverMode {
    /// Evolve the extended state throughout; project only for output.
    ExtendedPersistent,
    /// Project and re-clone after every (composited) step.
    ProjectEachStep,
}

impl FromStr for DriverMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "extended" | "extended-persistent" => Ok(Self::ExtendedPersistent),
            "project-each-step" | "project" => Ok(Self::ProjectEachStep),
            other => Err(Error::Unknown {
                kind: "driver mode",
                name: other.to_string(),
            }),
        }
    }
}

/// Everything that defines an extended-phase-space integrator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExtendedMethod {
    pub scheme: Scheme,
    pub mix1: LinearPhaseMap,
    pub mix2: LinearPhaseMap,
    pub projection: LinearPhaseMap,
    pub mode: DriverMode,
    pub composition: CompositionScheme,
}

impl ExtendedMethod {
    /// Identity mixing, primary-q/auxiliary-p projection, persistent mode.
    pub fn new(scheme: Scheme) -> Self {
        Self {
            scheme,
            mix1: LinearPhaseMap::identity(),
            mix2: LinearPhaseMap::identity(),
            projection: LinearPhaseMap::preset("proj_primary_q_aux_p").expect("preset exists"),
            mode: DriverMode::ExtendedPersistent,
            composition: CompositionScheme::single(),
        }
    }

    pub fn with_mixing(mut self, mix1: LinearPhaseMap, mix2: LinearPhaseMap) -> Self {
        self.mix1 = mix1;
        self.mix2 = mix2;
        self
    }

    pub fn with_projection(mut self, projection: LinearPhaseMap) -> Self {
        self.projection = projection;
        self
    }

    pub fn with_mode(mut self, mode: DriverMode) -> Self {
        self.mode = mode;
        self
    }

    pub fn with_composition(mut self, composition: CompositionScheme) -> Self {
        self.composition = composition;
        self
    }

    pub fn validate(&self) -> Result<()> {
        for m in [&self.mix1, &self.mix2] {
            if m.kind() != MapKind::Mixing {
                return Err(Error::MapKind {
                    expected: "mixing",
                    got: "projection",
                });
            }
        }
        if self.projection.kind() != MapKind::Projection {
            return Err(Error::MapKind {
                expected: "projection",
                got: "mixing",
            });
        }
        Ok(())
    }

    /// Gradient evaluations per composited step.
    pub fn evaluations_per_step(&self) -> u64 {
        self.scheme.spec().evaluations_per_step() * self.composition.len() as u64
    }
}

/// Steps an extended state forward and keeps the bookkeeping.
pub struct ExtendedStepper<'a, S: HamiltonianSystem + ?Sized> {
    sys: &'a S,
    method: ExtendedMethod,
    spec: SchemeSpec,
    state: ExtendedState,
    tau0: f64,
    h: f64,
    step: u64,
    counter: EvalCounter,
}

impl<'a, S: HamiltonianSystem + ?Sized> ExtendedStepper<'a, S> {
    pub fn new(sys: &'a S, method: ExtendedMethod, init: &PhaseState, h: f64) -> Result<Self> {
        method.validate()?;
        if !h.is_finite() {
            return Err(Error::InvalidParameter(format!("step size must be finite, got {h}")));
        }
        if init.dim() != sys.dim() {
            return Err(Error::Dimension {
                expected: sys.dim(),
                got: init.dim(),
            });
        }
        Ok(Self {
            sys,
            spec: method.scheme.spec(),
            method,
            state: clone_up(init)?,
            tau0: init.tau,
            h,
            step: 0,
            counter: EvalCounter::new(),
        })
    }

    pub fn step(&mut self) -> Result<()> {
        let next = self.step + 1;
        let Self {
            sys,
            method,
            spec,
            state,
            counter,
            ..
        } = self;
        let result = method.composition.apply(self.h, |dt| {
            mixed_step(*sys, spec, &method.mix1, &method.mix2, state, dt, counter)
        });
        let tau = self.tau0 + next as f64 * self.h;
        let diverged = || Error::Divergence {
            step: next,
            tau,
            threshold: DIVERGENCE_THRESHOLD,
            last_valid_step: next - 1,
        };
        match result {
            Err(e) if e.is_divergence() => return Err(diverged()),
            Err(e) => return Err(e),
            Ok(()) => {}
        }
        if !self.state.is_finite() || self.state.max_abs() > DIVERGENCE_THRESHOLD {
            return Err(diverged());
        }
        self.state.tau = tau;
        self.state.t = tau;
        self.state.tt = tau;
        if self.method.mode == DriverMode::ProjectEachStep {
            let projected = project_unchecked(&self.method.projection, &self.state);
            self.state = clone_up(&projected)?;
        }
        self.step = next;
        Ok(())
    }

    pub fn state(&self) -> &ExtendedState {
        &self.state
    }

    pub fn projected(&self) -> PhaseState {
        project_unchecked(&self.method.projection, &self.state)
    }

    pub fn step_index(&self) -> u64 {
        self.step
    }

    pub fn evaluations(&self) -> u64 {
        self.counter.get()
    }

    pub fn sample(&self) -> Sample {
        let ps = self.projected();
        Sample {
            step: self.step,
            tau: self.state.tau,
            t: self.state.t,
            invariant: Some(self.sys.value(&ps.q, &ps.p)),
            q: ps.q,
            p: ps.p,
            evaluations: self.counter.get(),
        }
    }
}

/// Integrates `n_steps` steps of size `h` from `init`, sampling every
/// `sample_every` steps plus the initial and final states.
pub fn integrate<S: HamiltonianSystem + ?Sized>(
    sys: &S,
    method: &ExtendedMethod,
    init: &PhaseState,
    h: f64,
    n_steps: u64,
    sample_every: u64,
) -> Result<Trajectory> {
    if sample_every == 0 {
        return Err(Error::InvalidParameter("sample_every must be at least 1".into()));
    }
    let mut stepper = ExtendedStepper::new(sys, method.clone(), init, h)?;
    let mut tr = Trajectory::new();
    tr.push(stepper.sample());
    for k in 1..=n_steps {
        stepper.step()?;
        if k % sample_every == 0 || k == n_steps {
            tr.push(stepper.sample());
        }
    }
    Ok(tr)
}
