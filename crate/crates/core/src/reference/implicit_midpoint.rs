//! Implicit midpoint rule solved by fixed-point iteration.

use crate::error::{Error, Result};
use crate::state::EvalCounter;
use crate::system::FirstOrderSystem;
use crate::trajectory::{Sample, Trajectory};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ImplicitMidpointConfig {
    /// Stop when the relative update falls below this.
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for ImplicitMidpointConfig {
    fn default() -> Self {
        Self {
            tol: 1e-15,
            max_iter: 100,
        }
    }
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn eval<F: FirstOrderSystem + ?Sized>(
    sys: &F,
    x: &[f64],
    t: f64,
    counter: &mut EvalCounter,
) -> Result<Vec<f64>> {
    let f = sys.field(x, t);
    counter.add(sys.evals_per_field());
    if f.iter().all(|v| v.is_finite()) {
        Ok(f)
    } else {
        Err(Error::NonFinite("vector field"))
    }
}

/// Solves `x' = x + h·f((x + x')/2, t + h/2)`.
///
/// The first guess is `x + h·f(x, t + h/2)`. Iteration stops once the
/// relative update drops below `cfg.tol`, or when it stops decreasing at
/// the round-off floor.
pub fn implicit_midpoint_step<F: FirstOrderSystem + ?Sized>(
    sys: &F,
    x: &[f64],
    t: f64,
    h: f64,
    cfg: &ImplicitMidpointConfig,
    counter: &mut EvalCounter,
) -> Result<Vec<f64>> {
    let tm = t + 0.5 * h;
    let f0 = eval(sys, x, tm, counter)?;
    let mut next: Vec<f64> = x.iter().zip(&f0).map(|(a, b)| a + h * b).collect();
    let mut mid = vec![0.0; x.len()];
    let mut prev_update = f64::INFINITY;
    let mut update = f64::INFINITY;
    for _ in 0..cfg.max_iter {
        for ((m, a), b) in mid.iter_mut().zip(x).zip(&next) {
            *m = 0.5 * (a + b);
        }
        let f = eval(sys, &mid, tm, counter)?;
        let mut diff = 0.0;
        for ((n, a), b) in next.iter_mut().zip(x).zip(&f) {
            let v = a + h * b;
            diff += (v - *n) * (v - *n);
            *n = v;
        }
        let scale = norm(&next);
        update = if scale > 0.0 { diff.sqrt() / scale } else { diff.sqrt() };
        if update < cfg.tol || update == 0.0 {
            return Ok(next);
        }
        if update >= prev_update && update < 64.0 * f64::EPSILON {
            return Ok(next);
        }
        prev_update = update;
    }
    Err(Error::NoConvergence {
        iterations: cfg.max_iter,
        update,
    })
}

/// Fixed-step implicit midpoint integration; samples split `x` at the
/// system's partition point into `q` and `p`.
pub fn integrate_implicit_midpoint<F: FirstOrderSystem + ?Sized>(
    sys: &F,
    x0: &[f64],
    t0: f64,
    h: f64,
    n_steps: u64,
    sample_every: u64,
    cfg: &ImplicitMidpointConfig,
) -> Result<Trajectory> {
    if sample_every == 0 {
        return Err(Error::InvalidParameter("sample_every must be at least 1".into()));
    }
    if x0.len() != sys.dim() {
        return Err(Error::Dimension {
            expected: sys.dim(),
            got: x0.len(),
        });
    }
    let k = sys.partition().unwrap_or(sys.dim()).min(sys.dim());
    let mut counter = EvalCounter::new();
    let mut x = x0.to_vec();
    let row = |step: u64, t: f64, x: &[f64], evaluations: u64| Sample {
        step,
        tau: t,
        t,
        q: x[..k].to_vec(),
        p: x[k..].to_vec(),
        invariant: None,
        evaluations,
    };
    let mut tr = Trajectory::new();
    tr.push(row(0, t0, &x, 0));
    for n in 1..=n_steps {
        let t = t0 + (n - 1) as f64 * h;
        x = implicit_midpoint_step(sys, &x, t, h, cfg, &mut counter).map_err(|e| {
            if e.is_divergence() {
                Error::Divergence {
                    step: n,
                    tau: t + h,
                    threshold: crate::splitting::DIVERGENCE_THRESHOLD,
                    last_valid_step: n - 1,
                }
            } else {
                e
            }
        })?;
        if x.iter().any(|v| v.abs() > crate::splitting::DIVERGENCE_THRESHOLD) {
            return Err(Error::Divergence {
                step: n,
                tau: t + h,
                threshold: crate::splitting::DIVERGENCE_THRESHOLD,
                last_valid_step: n - 1,
            });
        }
        if n % sample_every == 0 || n == n_steps {
            tr.push(row(n, t0 + n as f64 * h, &x, counter.get()));
        }
    }
    Ok(tr)
}

#[cfg(test)]
mod tests {
    use super::*;

    struct Linear(f64);

    impl FirstOrderSystem for Linear {
        fn dim(&self) -> usize {
            1
        }
        fn field(&self, x: &[f64], _t: f64) -> Vec<f64> {
            vec![self.0 * x[0]]
        }
    }

    #[test]
    fn null_field_converges_immediately() {
        let sys = Linear(0.0);
        let mut c = EvalCounter::new();
        let x = implicit_midpoint_step(&sys, &[3.0], 0.0, 0.1, &Default::default(), &mut c).unwrap();
        assert_eq!(x, vec![3.0]);
        assert_eq!(c.get(), 2);
    }

    #[test]
    fn linear_fixed_point() {
        let (lam, h) = (-0.7, 0.1);
        let sys = Linear(lam);
        let mut c = EvalCounter::new();
        let x = implicit_midpoint_step(&sys, &[1.0], 0.0, h, &Default::default(), &mut c).unwrap();
        let exact = (1.0 + h * lam / 2.0) / (1.0 - h * lam / 2.0);
        assert!((x[0] - exact).abs() <= 4e-16);
    }

    #[test]
    fn too_large_step_fails() {
        let sys = Linear(-100.0);
        let mut c = EvalCounter::new();
        let err = implicit_midpoint_step(&sys, &[1.0], 0.0, 1.0, &Default::default(), &mut c)
            .unwrap_err();
        assert!(matches!(err, Error::NoConvergence { .. } | Error::NonFinite(_)));
    }

    #[test]
    fn trajectory_bookkeeping() {
        let sys = Linear(-1.0);
        let tr = integrate_implicit_midpoint(&sys, &[1.0], 0.0, 0.1, 10, 5, &Default::default())
            .unwrap();
        assert_eq!(tr.len(), 3);
        assert_eq!(tr.last().unwrap().step, 10);
        let exact = ((1.0 - 0.05) / (1.0 + 0.05_f64)).powi(10);
        assert!((tr.last().unwrap().q[0] - exact).abs() < 1e-14);
    }
}
