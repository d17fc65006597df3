use super::analysis::{precession_study, running_max};
use super::config::{ExperimentConfig, MethodId, ProblemId};
use crate::error::{Error, Result};
use crate::nonham::integrate_ode;
use crate::problems::{pericenter_precession_estimate, HarmonicOscillator, Schwarzschild, VanDerPol};
use crate::reference::{integrate_implicit_midpoint, oracle_solve};
use crate::splitting::integrate;
use crate::state::PhaseState;
use crate::system::{FirstOrderSystem, HamiltonianField, HamiltonianSystem};
use crate::trajectory::{Sample, Trajectory};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// An extra named output column, one value per sample.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Column {
    pub name: String,
    pub values: Vec<f64>,
}

/// Errors of a run against a reference solution at the sample times.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub reference: String,
    pub components: Vec<String>,
    pub max_abs_error: Vec<f64>,
    pub final_abs_error: Vec<f64>,
    pub reference_evaluations: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub config: ExperimentConfig,
    pub h: f64,
    pub n_steps: u64,
    pub end_time: f64,
    pub samples: usize,
    pub evaluations: u64,
    pub final_q: Vec<f64>,
    pub final_p: Vec<f64>,
    /// Value the invariant should keep, when the problem has one.
    pub invariant_reference: Option<f64>,
    pub max_invariant_error: Option<f64>,
    pub comparison: Option<Comparison>,
    pub precession_estimate: Option<f64>,
    pub precession_measured: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunOutput {
    pub trajectory: Trajectory,
    pub columns: Vec<Column>,
    pub summary: Summary,
}

/// Names of the `q` and `p` components of a problem.
pub fn component_names(problem: ProblemId) -> (Vec<&'static str>, Vec<&'static str>) {
    match problem {
        ProblemId::Schwarzschild => (vec!["t_coord", "r", "phi"], vec!["p_t", "p_r", "p_phi"]),
        ProblemId::Vdp => (vec!["x"], vec!["y"]),
        ProblemId::Harmonic => (vec!["q"], vec!["p"]),
    }
}

/// Runs whichever experiment the configuration describes.
pub fn run(cfg: &ExperimentConfig) -> Result<RunOutput> {
    cfg.validate()?;
    match cfg.problem {
        ProblemId::Schwarzschild => run_geodesic(cfg),
        ProblemId::Vdp => run_vdp(cfg),
        ProblemId::Harmonic => run_harmonic(cfg),
    }
}

fn expect_problem(cfg: &ExperimentConfig, want: ProblemId) -> Result<()> {
    if cfg.problem == want {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "expected a {want} configuration, got {}",
            cfg.problem
        )))
    }
}

/// Step indices at which samples are taken.
fn sample_steps(n: u64, every: u64) -> Vec<u64> {
    let mut v: Vec<u64> = (0..=n).step_by(every as usize).collect();
    if v.last() != Some(&n) {
        v.push(n);
    }
    v
}

/// Oracle solve on the fixed-step sampling grid.
fn oracle_on_grid<F: FirstOrderSystem + ?Sized>(
    field: &F,
    x0: &[f64],
    t0: f64,
    cfg: &ExperimentConfig,
) -> Result<Trajectory> {
    let h = cfg.step_size();
    let steps = sample_steps(cfg.n_steps(), cfg.sample_every);
    let times: Vec<f64> = steps.iter().map(|&k| t0 + k as f64 * h).collect();
    let t1 = *times.last().expect("grid includes step 0");
    let raw = oracle_solve(field, x0, t0, t1, &times, &cfg.oracle)?;
    let mut out = Trajectory::new();
    for (s, &k) in raw.iter().zip(&steps) {
        out.push(Sample { step: k, ..s.clone() });
    }
    Ok(out)
}

/// Integrates any first-order system with the configured method.
fn integrate_first_order<F: FirstOrderSystem + ?Sized>(
    field: &F,
    x0: &[f64],
    t0: f64,
    cfg: &ExperimentConfig,
) -> Result<Trajectory> {
    let (h, n, every) = (cfg.step_size(), cfg.n_steps(), cfg.sample_every);
    match cfg.method {
        MethodId::Method1 | MethodId::Method2 => {
            integrate_ode(field, &cfg.ode_method()?, x0, t0, h, n, every)
        }
        MethodId::ImplicitMidpoint => {
            integrate_implicit_midpoint(field, x0, t0, h, n, every, &cfg.implicit)
        }
        MethodId::Oracle => oracle_on_grid(field, x0, t0, cfg),
        MethodId::Extended => Err(Error::InvalidParameter(
            "extended leapfrogs need a Hamiltonian problem".into(),
        )),
    }
}

fn integrate_hamiltonian<S: HamiltonianSystem>(
    sys: &S,
    init: &PhaseState,
    cfg: &ExperimentConfig,
) -> Result<Trajectory> {
    if cfg.method == MethodId::Extended {
        let m = cfg.extended_method();
        return integrate(sys, &m, init, cfg.step_size(), cfg.n_steps(), cfg.sample_every);
    }
    let x0: Vec<f64> = init.q.iter().chain(&init.p).copied().collect();
    integrate_first_order(&HamiltonianField::new(sys), &x0, init.tau, cfg)
}

/// Per-component errors against a reference and their running maxima.
fn compare(
    tr: &Trajectory,
    reference: &Trajectory,
    label: &str,
    names: &[&str],
) -> Result<(Comparison, Vec<Column>)> {
    if tr.len() != reference.len() {
        return Err(Error::Analysis(format!(
            "reference has {} samples, run has {}",
            reference.len(),
            tr.len()
        )));
    }
    let mut columns: Vec<Column> = names
        .iter()
        .map(|n| Column {
            name: format!("max_err_{n}"),
            values: Vec::with_capacity(tr.len()),
        })
        .collect();
    let mut final_abs_error = vec![0.0; names.len()];
    for (a, b) in tr.iter().zip(reference) {
        for (i, (u, v)) in a.flat().iter().zip(b.flat()).enumerate() {
            final_abs_error[i] = (u - v).abs();
        }
        for (c, e) in columns.iter_mut().zip(&final_abs_error) {
            c.values.push(*e);
        }
    }
    for c in &mut columns {
        c.values = running_max(&c.values);
    }
    let cmp = Comparison {
        reference: label.to_string(),
        components: names.iter().map(|s| s.to_string()).collect(),
        max_abs_error: columns.iter().map(|c| *c.values.last().unwrap_or(&0.0)).collect(),
        final_abs_error,
        reference_evaluations: reference.evaluations(),
    };
    Ok((cmp, columns))
}

fn summarize(cfg: &ExperimentConfig, tr: &Trajectory) -> Summary {
    let last = tr.last().expect("trajectories include the initial sample");
    Summary {
        config: cfg.clone(),
        h: cfg.step_size(),
        n_steps: cfg.n_steps(),
        end_time: cfg.end_time(),
        samples: tr.len(),
        evaluations: tr.evaluations(),
        final_q: last.q.clone(),
        final_p: last.p.clone(),
        invariant_reference: None,
        max_invariant_error: None,
        comparison: None,
        precession_estimate: None,
        precession_measured: None,
    }
}

/// Appends `ΔH` and its running maximum, returning the maximum.
fn invariant_columns(tr: &Trajectory, reference: f64, columns: &mut Vec<Column>) -> f64 {
    let dh: Vec<f64> = tr
        .iter()
        .map(|s| s.invariant.unwrap_or(f64::NAN) - reference)
        .collect();
    let env = running_max(&dh);
    let max = *env.last().unwrap_or(&0.0);
    columns.push(Column {
        name: "delta_h".into(),
        values: dh,
    });
    columns.push(Column {
        name: "max_abs_delta_h".into(),
        values: env,
    });
    max
}

/// Schwarzschild geodesic from the apocenter initial state.
pub fn run_geodesic(cfg: &ExperimentConfig) -> Result<RunOutput> {
    expect_problem(cfg, ProblemId::Schwarzschild)?;
    cfg.validate()?;
    let sys = Schwarzschild::new(cfg.schwarzschild)?;
    let init = sys.initial_conditions()?;
    let mut tr = integrate_hamiltonian(&sys, &init, cfg)?;
    tr.fill_invariant(|s| sys.value(&s.q, &s.p));

    let period = sys.period();
    let rmax = sys.params().apocenter();
    let mut columns = vec![
        Column {
            name: "x".into(),
            values: tr.iter().map(|s| s.q[1] * s.q[2].cos()).collect(),
        },
        Column {
            name: "y".into(),
            values: tr.iter().map(|s| s.q[1] * s.q[2].sin()).collect(),
        },
        Column {
            name: "t_over_period".into(),
            values: tr.iter().map(|s| s.q[0] / period).collect(),
        },
        Column {
            name: "r_over_apocenter".into(),
            values: tr.iter().map(|s| s.q[1] / rmax).collect(),
        },
        Column {
            name: "phi_over_2pi".into(),
            values: tr.iter().map(|s| s.q[2] / (2.0 * PI)).collect(),
        },
    ];
    let reference = sys.reference_energy();
    let max_dh = invariant_columns(&tr, reference, &mut columns);
    let mut summary = summarize(cfg, &tr);
    summary.invariant_reference = Some(reference);
    summary.max_invariant_error = Some(max_dh);
    summary.precession_estimate = Some(pericenter_precession_estimate(sys.params()));
    summary.precession_measured = precession_study(&tr).ok().map(|r| r.mean);
    if cfg.compare_oracle && cfg.method != MethodId::Oracle {
        let x0: Vec<f64> = init.q.iter().chain(&init.p).copied().collect();
        let truth = oracle_on_grid(&HamiltonianField::new(&sys), &x0, init.tau, cfg)?;
        let (q, p) = component_names(cfg.problem);
        let names: Vec<&str> = q.into_iter().chain(p).collect();
        let (cmp, cols) = compare(&tr, &truth, "oracle", &names)?;
        summary.comparison = Some(cmp);
        columns.extend(cols);
    }
    Ok(RunOutput {
        trajectory: tr,
        columns,
        summary,
    })
}

/// Forced van der Pol oscillator.
pub fn run_vdp(cfg: &ExperimentConfig) -> Result<RunOutput> {
    expect_problem(cfg, ProblemId::Vdp)?;
    cfg.validate()?;
    let sys = VanDerPol::new(cfg.vdp)?;
    let tr = integrate_first_order(&sys, &cfg.initial, 0.0, cfg)?;
    let mut summary = summarize(cfg, &tr);
    let mut columns = vec![];
    if cfg.compare_oracle && cfg.method != MethodId::Oracle {
        let truth = oracle_on_grid(&sys, &cfg.initial, 0.0, cfg)?;
        let (cmp, cols) = compare(&tr, &truth, "oracle", &["x", "y"])?;
        summary.comparison = Some(cmp);
        columns = cols;
    }
    Ok(RunOutput {
        trajectory: tr,
        columns,
        summary,
    })
}

/// One-dimensional harmonic oscillator, compared against the exact rotation.
pub fn run_harmonic(cfg: &ExperimentConfig) -> Result<RunOutput> {
    expect_problem(cfg, ProblemId::Harmonic)?;
    cfg.validate()?;
    let sys = HarmonicOscillator::try_new(cfg.omega, 1)?;
    let init = PhaseState::new(vec![cfg.initial[0]], vec![cfg.initial[1]], 0.0)?;
    let mut tr = integrate_hamiltonian(&sys, &init, cfg)?;
    tr.fill_invariant(|s| sys.value(&s.q, &s.p));
    let reference = sys.value(&init.q, &init.p);
    let mut columns = vec![];
    let max_dh = invariant_columns(&tr, reference, &mut columns);
    let mut summary = summarize(cfg, &tr);
    summary.invariant_reference = Some(reference);
    summary.max_invariant_error = Some(max_dh);
    if cfg.compare_oracle {
        let mut exact = Trajectory::new();
        for s in &tr {
            let e = sys.exact(&init, s.tau);
            exact.push(Sample {
                q: e.q,
                p: e.p,
                invariant: None,
                evaluations: 0,
                ..s.clone()
            });
        }
        let (cmp, cols) = compare(&tr, &exact, "exact", &["q", "p"])?;
        summary.comparison = Some(cmp);
        columns.extend(cols);
    }
    Ok(RunOutput {
        trajectory: tr,
        columns,
        summary,
    })
}

/// Relative endpoint error `‖x − x_ref‖∞ / max(1, ‖x_ref‖∞)` of a run.
pub fn endpoint_error(cfg: &ExperimentConfig) -> Result<f64> {
    let mut c = cfg.clone();
    c.compare_oracle = true;
    c.sample_every = c.n_steps().max(1);
    let out = run(&c)?;
    let cmp = out
        .summary
        .comparison
        .ok_or_else(|| Error::Analysis("oracle runs have no reference error".into()))?;
    let last = out.trajectory.last().expect("non-empty");
    let scale = last.flat().iter().fold(1.0_f64, |m, v| m.max(v.abs()));
    Ok(cmp.final_abs_error.iter().fold(0.0_f64, |m, v| m.max(*v)) / scale)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::config::{ConfigOverrides, Duration};

    fn cfg(json: &str) -> ExperimentConfig {
        ExperimentConfig::from_layers(&[ConfigOverrides::from_json_str(json).unwrap()]).unwrap()
    }

    #[test]
    fn sampling_grid_always_ends_at_final_step() {
        assert_eq!(sample_steps(10, 4), vec![0, 4, 8, 10]);
        assert_eq!(sample_steps(0, 3), vec![0]);
        assert_eq!(sample_steps(6, 3), vec![0, 3, 6]);
    }

    #[test]
    fn zero_duration_gives_initial_row_only() {
        for json in [r#"{"orbits": 0}"#, r#"{"problem": "vdp", "t-end": 0}"#] {
            let out = run(&cfg(json)).unwrap();
            assert_eq!(out.trajectory.len(), 1);
            assert_eq!(out.summary.evaluations, 0);
        }
    }

    #[test]
    fn geodesic_summary_is_consistent() {
        let out = run(&cfg(r#"{"orbits": 1}"#)).unwrap();
        assert_eq!(out.summary.n_steps, 50);
        assert_eq!(out.summary.evaluations, 400);
        assert_eq!(out.summary.evaluations, out.trajectory.evaluations());
        assert!(out.summary.max_invariant_error.unwrap() < 1e-2);
        let cmp = out.summary.comparison.unwrap();
        assert_eq!(cmp.components.len(), 6);
        for c in &out.columns {
            assert_eq!(c.values.len(), out.trajectory.len(), "{}", c.name);
        }
        let x = &out.columns[0].values;
        assert!((x[0] - 42.0).abs() < 1e-12);
    }

    #[test]
    fn harmonic_error_is_second_order() {
        let mut c = cfg(r#"{"problem": "harmonic", "t-end": 2}"#);
        c.h = "0.02".parse().unwrap();
        let e1 = endpoint_error(&c).unwrap();
        c.h = "0.01".parse().unwrap();
        let e2 = endpoint_error(&c).unwrap();
        assert!((e1 / e2 - 4.0).abs() < 0.2, "{e1} {e2}");
        c.duration = Duration::Time(2.0);
        c.method = MethodId::Oracle;
        assert!(endpoint_error(&c).unwrap() < 1e-11);
    }

    #[test]
    fn oracle_method_reports_no_comparison() {
        let out = run(&cfg(r#"{"problem": "vdp", "method": "oracle", "t-end": 1}"#)).unwrap();
        assert!(out.summary.comparison.is_none());
        assert_eq!(out.trajectory.len(), 51);
        assert_eq!(out.trajectory.last().unwrap().step, 50);
    }
}
