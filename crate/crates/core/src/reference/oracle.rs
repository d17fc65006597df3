//! Adaptive Runge–Kutta–Fehlberg 7(8) truth solver.
//!
//! The eighth-order solution is propagated; the embedded seventh-order one
//! only drives a PI step-size controller. Output at requested times is
//! produced by one extra eighth-order substep from the start of the
//! enclosing accepted step, so sampled values carry the full order.

use crate::error::{Error, Result};
use crate::state::EvalCounter;
use crate::system::FirstOrderSystem;
use crate::trajectory::{Sample, Trajectory};
use serde::{Deserialize, Serialize};

const STAGES: usize = 13;

const C: [f64; STAGES] = [
    0.0,
    2.0 / 27.0,
    1.0 / 9.0,
    1.0 / 6.0,
    5.0 / 12.0,
    0.5,
    5.0 / 6.0,
    1.0 / 6.0,
    2.0 / 3.0,
    1.0 / 3.0,
    1.0,
    0.0,
    1.0,
];

const A: [[f64; 12]; STAGES] = [
    [0.0; 12],
    [2.0 / 27.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [1.0 / 36.0, 1.0 / 12.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [1.0 / 24.0, 0.0, 1.0 / 8.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [5.0 / 12.0, 0.0, -25.0 / 16.0, 25.0 / 16.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [1.0 / 20.0, 0.0, 0.0, 1.0 / 4.0, 1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [
        -25.0 / 108.0, 0.0, 0.0, 125.0 / 108.0, -65.0 / 27.0, 125.0 / 54.0, 0.0, 0.0, 0.0, 0.0,
        0.0, 0.0,
    ],
    [
        31.0 / 300.0, 0.0, 0.0, 0.0, 61.0 / 225.0, -2.0 / 9.0, 13.0 / 900.0, 0.0, 0.0, 0.0, 0.0,
        0.0,
    ],
    [
        2.0, 0.0, 0.0, -53.0 / 6.0, 704.0 / 45.0, -107.0 / 9.0, 67.0 / 90.0, 3.0, 0.0, 0.0, 0.0,
        0.0,
    ],
    [
        -91.0 / 108.0, 0.0, 0.0, 23.0 / 108.0, -976.0 / 135.0, 311.0 / 54.0, -19.0 / 60.0,
        17.0 / 6.0, -1.0 / 12.0, 0.0, 0.0, 0.0,
    ],
    [
        2383.0 / 4100.0, 0.0, 0.0, -341.0 / 164.0, 4496.0 / 1025.0, -301.0 / 82.0,
        2133.0 / 4100.0, 45.0 / 82.0, 45.0 / 164.0, 18.0 / 41.0, 0.0, 0.0,
    ],
    [
        3.0 / 205.0, 0.0, 0.0, 0.0, 0.0, -6.0 / 41.0, -3.0 / 205.0, -3.0 / 41.0, 3.0 / 41.0,
        6.0 / 41.0, 0.0, 0.0,
    ],
    [
        -1777.0 / 4100.0, 0.0, 0.0, -341.0 / 164.0, 4496.0 / 1025.0, -289.0 / 82.0,
        2193.0 / 4100.0, 51.0 / 82.0, 33.0 / 164.0, 12.0 / 41.0, 0.0, 1.0,
    ],
];

const B: [f64; 11] = [
    41.0 / 840.0,
    0.0,
    0.0,
    0.0,
    0.0,
    34.0 / 105.0,
    9.0 / 35.0,
    9.0 / 35.0,
    9.0 / 280.0,
    9.0 / 280.0,
    41.0 / 840.0,
];

const ERR: f64 = 41.0 / 840.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OracleConfig {
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// First trial step; a non-positive value selects it automatically.
    pub initial_step: f64,
    pub max_steps: u64,
}

impl Default for OracleConfig {
    fn default() -> Self {
        Self {
            rel_tol: 1e-13,
            abs_tol: 1e-15,
            initial_step: 0.0,
            max_steps: 50_000_000,
        }
    }
}

impl OracleConfig {
    pub fn with_tolerances(rel_tol: f64, abs_tol: f64) -> Self {
        Self {
            rel_tol,
            abs_tol,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.rel_tol >= 10.0 * f64::EPSILON) || !self.rel_tol.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "oracle rel_tol must be at least 10·ε, got {}",
                self.rel_tol
            )));
        }
        if !(self.abs_tol > 0.0) || !self.abs_tol.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "oracle abs_tol must be positive, got {}",
                self.abs_tol
            )));
        }
        if self.max_steps == 0 {
            return Err(Error::InvalidParameter("oracle max_steps must be positive".into()));
        }
        Ok(())
    }
}

struct Rkf78<'a, F: ?Sized> {
    sys: &'a F,
    k: Vec<Vec<f64>>,
    work: Vec<f64>,
}

impl<'a, F: FirstOrderSystem + ?Sized> Rkf78<'a, F> {
    fn new(sys: &'a F) -> Self {
        let n = sys.dim();
        Self {
            sys,
            k: vec![vec![0.0; n]; STAGES],
            work: vec![0.0; n],
        }
    }

    fn eval(&self, x: &[f64], t: f64, counter: &mut EvalCounter) -> Result<Vec<f64>> {
        let f = self.sys.field(x, t);
        counter.add(self.sys.evals_per_field());
        if f.iter().all(|v| v.is_finite()) {
            Ok(f)
        } else {
            Err(Error::NonFinite("oracle vector field"))
        }
    }

    /// Fills stages `1..last` given `k[0] = f(y, t)`.
    fn stages(
        &mut self,
        y: &[f64],
        t: f64,
        h: f64,
        last: usize,
        counter: &mut EvalCounter,
    ) -> Result<()> {
        for i in 1..last {
            for (j, w) in self.work.iter_mut().enumerate() {
                let mut acc = 0.0;
                for (l, a) in A[i][..i].iter().enumerate() {
                    if *a != 0.0 {
                        acc += a * self.k[l][j];
                    }
                }
                *w = y[j] + h * acc;
            }
            self.k[i] = self.eval(&self.work, t + C[i] * h, counter)?;
        }
        Ok(())
    }

    fn high_order(&self, y: &[f64], h: f64) -> Vec<f64> {
        (0..y.len())
            .map(|j| {
                let acc: f64 = B
                    .iter()
                    .enumerate()
                    .filter(|(_, b)| **b != 0.0)
                    .map(|(i, b)| b * self.k[i][j])
                    .sum();
                y[j] + h * acc
            })
            .collect()
    }
}

fn scaled_error(err: &[f64], y: &[f64], y_new: &[f64], cfg: &OracleConfig) -> f64 {
    let n = err.len() as f64;
    let s: f64 = err
        .iter()
        .zip(y)
        .zip(y_new)
        .map(|((e, a), b)| {
            let sc = cfg.abs_tol + cfg.rel_tol * a.abs().max(b.abs());
            (e / sc).powi(2)
        })
        .sum();
    (s / n).sqrt()
}

fn initial_step<F: FirstOrderSystem + ?Sized>(
    rk: &Rkf78<'_, F>,
    y: &[f64],
    t: f64,
    f0: &[f64],
    span: f64,
    cfg: &OracleConfig,
    counter: &mut EvalCounter,
) -> Result<f64> {
    let norm = |v: &[f64]| {
        let n = v.len() as f64;
        (v.iter()
            .zip(y)
            .map(|(a, b)| (a / (cfg.abs_tol + cfg.rel_tol * b.abs())).powi(2))
            .sum::<f64>()
            / n)
            .sqrt()
    };
    let d0 = norm(y);
    let d1 = norm(f0);
    let h0 = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
    let h0 = h0.min(span);
    let y1: Vec<f64> = y.iter().zip(f0).map(|(a, b)| a + h0 * b).collect();
    let f1 = rk.eval(&y1, t + h0, counter)?;
    let diff: Vec<f64> = f1.iter().zip(f0).map(|(a, b)| a - b).collect();
    let d2 = norm(&diff) / h0;
    let h1 = if d1.max(d2) <= 1e-15 {
        (h0 * 1e-3).max(1e-6)
    } else {
        (0.01 / d1.max(d2)).powf(1.0 / 8.0)
    };
    Ok((100.0 * h0).min(h1).min(span))
}

/// Integrates from `t0` to `t1` and returns the solution at each time in
/// `sample_times` (which must be sorted and lie in `[t0, t1]`).
///
/// Sample `q` holds the components below the system's partition point and
/// `p` the rest.
pub fn oracle_solve<F: FirstOrderSystem + ?Sized>(
    sys: &F,
    x0: &[f64],
    t0: f64,
    t1: f64,
    sample_times: &[f64],
    cfg: &OracleConfig,
) -> Result<Trajectory> {
    cfg.validate()?;
    if x0.len() != sys.dim() {
        return Err(Error::Dimension {
            expected: sys.dim(),
            got: x0.len(),
        });
    }
    if !(t1 >= t0) {
        return Err(Error::InvalidParameter(format!(
            "oracle needs t1 ≥ t0, got t0 = {t0}, t1 = {t1}"
        )));
    }
    if sample_times.windows(2).any(|w| !(w[1] >= w[0]))
        || sample_times.iter().any(|&s| s < t0 || s > t1)
    {
        return Err(Error::InvalidParameter(
            "oracle sample times must be sorted and within [t0, t1]".into(),
        ));
    }
    let split = sys.partition().unwrap_or(sys.dim()).min(sys.dim());
    let row = |step: u64, t: f64, x: &[f64], evaluations: u64| Sample {
        step,
        tau: t,
        t,
        q: x[..split].to_vec(),
        p: x[split..].to_vec(),
        invariant: None,
        evaluations,
    };

    let mut counter = EvalCounter::new();
    let mut dense = EvalCounter::new();
    let mut rk = Rkf78::new(sys);
    let mut tr = Trajectory::new();
    let mut next_sample = 0usize;
    let mut y = x0.to_vec();
    let mut t = t0;

    while next_sample < sample_times.len() && sample_times[next_sample] <= t0 {
        tr.push(row(next_sample as u64, t0, &y, 0));
        next_sample += 1;
    }
    if t1 == t0 {
        return Ok(tr);
    }

    let mut f0 = rk.eval(&y, t, &mut counter)?;
    let mut h = if cfg.initial_step > 0.0 {
        cfg.initial_step.min(t1 - t0)
    } else {
        initial_step(&rk, &y, t, &f0, t1 - t0, cfg, &mut counter)?
    };
    let beta = 0.04;
    let alpha = 1.0 / 8.0 - 0.75 * beta;
    let mut err_prev: f64 = 1e-4;
    let mut rejected = false;
    let mut accepted: u64 = 0;

    while t < t1 {
        if accepted + 1 > cfg.max_steps {
            return Err(Error::MaxSteps(cfg.max_steps));
        }
        let last = t + h >= t1;
        if last {
            h = t1 - t;
        }
        if h <= 16.0 * f64::EPSILON * t.abs().max(1.0) {
            return Err(Error::StepUnderflow(t));
        }
        rk.k[0].clone_from(&f0);
        rk.stages(&y, t, h, STAGES, &mut counter)?;
        let y_new = rk.high_order(&y, h);
        let err: Vec<f64> = (0..y.len())
            .map(|j| h * ERR * (rk.k[0][j] + rk.k[10][j] - rk.k[11][j] - rk.k[12][j]))
            .collect();
        let e = scaled_error(&err, &y, &y_new, cfg);
        if !e.is_finite() {
            h *= 0.2;
            rejected = true;
            continue;
        }
        if e <= 1.0 {
            let t_new = if last { t1 } else { t + h };
            // Samples strictly inside the step are re-stepped from its start.
            while next_sample < sample_times.len() && sample_times[next_sample] <= t_new {
                let ts = sample_times[next_sample];
                let value = if ts == t_new {
                    y_new.clone()
                } else {
                    let hs = ts - t;
                    let mut sub = Rkf78::new(sys);
                    sub.k[0].clone_from(&f0);
                    sub.stages(&y, t, hs, 11, &mut dense)?;
                    sub.high_order(&y, hs)
                };
                tr.push(row(
                    next_sample as u64,
                    ts,
                    &value,
                    counter.get() + dense.get(),
                ));
                next_sample += 1;
            }
            y = y_new;
            t = t_new;
            accepted += 1;
            if t < t1 {
                f0 = rk.eval(&y, t, &mut counter)?;
            }
            let e = e.max(1e-10);
            let mut fac = 0.9 * e.powf(-alpha) * err_prev.powf(beta);
            fac = fac.clamp(0.2, 5.0);
            if rejected {
                fac = fac.min(1.0);
            }
            err_prev = e;
            rejected = false;
            h *= fac;
        } else {
            let fac = (0.9 * e.powf(-alpha)).clamp(0.2, 1.0);
            h *= fac;
            rejected = true;
        }
    }
    Ok(tr)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::HarmonicOscillator;
    use crate::state::PhaseState;
    use crate::system::{HamiltonianField, HamiltonianSystem};

    #[test]
    fn tableau_consistency() {
        for i in 0..STAGES {
            let s: f64 = A[i].iter().sum();
            assert!((s - C[i]).abs() < 1e-14, "row {i}");
        }
        assert!((B.iter().sum::<f64>() - 1.0).abs() < 1e-15);
    }

    struct Constant;

    impl FirstOrderSystem for Constant {
        fn dim(&self) -> usize {
            2
        }
        fn field(&self, _x: &[f64], _t: f64) -> Vec<f64> {
            vec![2.0, -0.5]
        }
    }

    #[test]
    fn constant_field_is_exact() {
        for rtol in [1e-6, 1e-12] {
            let tr = oracle_solve(
                &Constant,
                &[1.0, 1.0],
                0.0,
                10.0,
                &[0.0, 3.3, 10.0],
                &OracleConfig::with_tolerances(rtol, 1e-15),
            )
            .unwrap();
            assert_eq!(tr.len(), 3);
            let mid = &tr.samples()[1];
            assert!((mid.q[0] - (1.0 + 6.6)).abs() < 1e-13);
            let end = tr.last().unwrap();
            assert!((end.q[0] - 21.0).abs() < 1e-13);
            assert!((end.q[1] + 4.0).abs() < 1e-13);
        }
    }

    #[test]
    fn oscillator_against_exact_solution() {
        let osc = HarmonicOscillator::new(1.0);
        let field = HamiltonianField::new(&osc);
        let s0 = PhaseState::new(vec![1.0], vec![0.0], 0.0).unwrap();
        let tr = oracle_solve(&field, &[1.0, 0.0], 0.0, 10.0, &[10.0], &OracleConfig::default())
            .unwrap();
        let exact = osc.exact(&s0, 10.0);
        let end = tr.last().unwrap();
        assert!((end.q[0] - exact.q[0]).abs() <= 1e-10);
        assert!((end.p[0] - exact.p[0]).abs() <= 1e-10);
    }

    #[test]
    fn long_run_energy_drift() {
        let osc = HarmonicOscillator::new(1.0);
        let field = HamiltonianField::new(&osc);
        let t1 = 200.0 * std::f64::consts::PI;
        let tr = oracle_solve(&field, &[1.0, 0.0], 0.0, t1, &[t1], &OracleConfig::default())
            .unwrap();
        let end = tr.last().unwrap();
        assert!((osc.value(&end.q, &end.p) - 0.5).abs() / 0.5 <= 1e-9);
    }

    #[test]
    fn tighter_tolerance_reduces_error() {
        let osc = HarmonicOscillator::new(1.0);
        let field = HamiltonianField::new(&osc);
        let s0 = PhaseState::new(vec![1.0], vec![0.0], 0.0).unwrap();
        let exact = osc.exact(&s0, 20.0);
        let err = |rtol: f64| {
            let tr = oracle_solve(
                &field,
                &[1.0, 0.0],
                0.0,
                20.0,
                &[20.0],
                &OracleConfig::with_tolerances(rtol, 1e-15),
            )
            .unwrap();
            (tr.last().unwrap().q[0] - exact.q[0]).abs()
        };
        let errs: Vec<f64> = [1e-6, 1e-8, 1e-10].iter().map(|&r| err(r)).collect();
        assert!(errs[0] > errs[1] && errs[1] > errs[2], "{errs:?}");
    }

    #[test]
    fn rejects_bad_input() {
        assert!(oracle_solve(&Constant, &[0.0, 0.0], 1.0, 0.0, &[], &OracleConfig::default()).is_err());
        assert!(oracle_solve(&Constant, &[0.0, 0.0], 0.0, 1.0, &[2.0], &OracleConfig::default()).is_err());
        let bad = OracleConfig::with_tolerances(1e-17, 1e-15);
        assert!(oracle_solve(&Constant, &[0.0, 0.0], 0.0, 1.0, &[], &bad).is_err());
        let tiny = OracleConfig {
            max_steps: 1,
            initial_step: 1e-3,
            ..Default::default()
        };
        assert!(matches!(
            oracle_solve(&Constant, &[0.0, 0.0], 0.0, 1.0, &[], &tiny),
            Err(Error::MaxSteps(1))
        ));
    }
}
