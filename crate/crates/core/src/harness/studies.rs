//! Multi-run studies: convergence order, leading-order energy error of
//! map choices, and finite-difference symplecticity checks.

use super::analysis::{convergence_study, fd_jacobian, symplectic_defect, ConvergenceReport};
use super::config::ExperimentConfig;
use super::experiments::endpoint_error;
use crate::error::Result;
use crate::maps::LinearPhaseMap;
use crate::reference::{implicit_midpoint_step, ImplicitMidpointConfig};
use crate::splitting::{leapfrog_step, ExtendedMethod, ExtendedStepper, Scheme};
use crate::state::{clone_up, EvalCounter, ExtendedState, PhaseState};
use crate::system::{HamiltonianField, HamiltonianSystem};

/// Endpoint-error order of a configured experiment over the step sizes `hs`.
///
/// Each step size is an independent run; they execute in parallel.
pub fn convergence_for_config(cfg: &ExperimentConfig, hs: &[f64], floor: f64) -> Result<ConvergenceReport> {
    cfg.validate()?;
    convergence_study(hs, floor, |h| {
        let mut c = cfg.clone();
        let end = cfg.end_time();
        c.h = super::config::StepSize::Absolute(h);
        c.duration = super::config::Duration::Time(end);
        endpoint_error(&c)
    })
}

/// The maps of one map-study case.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MapChoice {
    pub mix1: LinearPhaseMap,
    pub mix2: LinearPhaseMap,
    pub projection: LinearPhaseMap,
}

/// `|ΔH(h)|` after `steps` steps from a cloned state, fitted in log-log.
///
/// Values at or below `64ε·max(1, |H₀|)` count as round-off.
pub fn map_study<S: HamiltonianSystem>(
    sys: &S,
    init: &PhaseState,
    scheme: Scheme,
    maps: MapChoice,
    hs: &[f64],
    steps: u64,
) -> Result<ConvergenceReport> {
    let h0 = sys.value(&init.q, &init.p);
    let method = ExtendedMethod::new(scheme)
        .with_mixing(maps.mix1, maps.mix2)
        .with_projection(maps.projection);
    let floor = 64.0 * f64::EPSILON * h0.abs().max(1.0);
    convergence_study(hs, floor, |h| {
        let mut st = ExtendedStepper::new(sys, method.clone(), init, h)?;
        for _ in 0..steps {
            st.step()?;
        }
        let p = st.projected();
        Ok((sys.value(&p.q, &p.p) - h0).abs())
    })
}

/// `‖DᵀJD − J‖_max` of one unmixed catalog step on the extended space.
pub fn extended_symplectic_defect<S: HamiltonianSystem>(
    sys: &S,
    init: &PhaseState,
    scheme: Scheme,
    h: f64,
    rel_step: f64,
) -> Result<f64> {
    let x = clone_up(init)?.to_flat();
    let step = |z: &[f64]| -> Result<Vec<f64>> {
        let s = ExtendedState::from_flat(z, init.tau);
        let mut c = EvalCounter::new();
        Ok(leapfrog_step(sys, scheme, &s, h, &mut c)?.to_flat())
    };
    symplectic_defect(&fd_jacobian(step, &x, rel_step)?)
}

/// `‖DᵀJD − J‖_max` of one implicit midpoint step on the original space.
pub fn midpoint_symplectic_defect<S: HamiltonianSystem>(
    sys: &S,
    init: &PhaseState,
    h: f64,
    rel_step: f64,
    cfg: &ImplicitMidpointConfig,
) -> Result<f64> {
    let field = HamiltonianField::new(sys);
    let x: Vec<f64> = init.q.iter().chain(&init.p).copied().collect();
    let step = |z: &[f64]| -> Result<Vec<f64>> {
        let mut c = EvalCounter::new();
        implicit_midpoint_step(&field, z, init.tau, h, cfg, &mut c)
    };
    symplectic_defect(&fd_jacobian(step, &x, rel_step)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::{HarmonicOscillator, Schwarzschild};

    #[test]
    fn harmonic_map_study_is_round_off_limited() {
        // The extended leapfrog conserves the quadratic energy of a cloned
        // oscillator to second order, so large steps are needed to see it.
        let sys = HarmonicOscillator::new(1.0);
        let init = PhaseState::new(vec![1.0], vec![0.0], 0.0).unwrap();
        let id = LinearPhaseMap::identity();
        let maps = MapChoice {
            mix1: id,
            mix2: id,
            projection: LinearPhaseMap::preset("proj_primary_q_aux_p").unwrap(),
        };
        let r = map_study(&sys, &init, Scheme::QPtQtP, maps, &[0.4, 0.2, 0.1, 0.05], 2).unwrap();
        assert!(r.slope > 1.7, "{}", r.slope);
    }

    #[test]
    fn symplectic_defects_are_small() {
        let sys = Schwarzschild::new(Default::default()).unwrap();
        let init = sys.initial_conditions().unwrap();
        let h = 0.02 * sys.period();
        let d = extended_symplectic_defect(&sys, &init, Scheme::QtPQPt, h, 1e-6).unwrap();
        assert!(d <= 1e-6, "{d}");
        let d = midpoint_symplectic_defect(&sys, &init, h, 1e-6, &Default::default()).unwrap();
        assert!(d <= 1e-6, "{d}");
    }
}
