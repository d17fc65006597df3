//! Post-processing of integration output: fitted convergence slopes,
//! error envelopes, pericenter precession and Jacobian checks.

use crate::error::{Error, Result};
use crate::par::par_map;
use crate::trajectory::Trajectory;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Errors at or below this value are treated as round-off and not fitted.
pub const ROUND_OFF_FLOOR: f64 = 1e-13;

/// Least-squares line `y = slope·x + intercept` with the slope's standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    pub slope_stderr: f64,
}

pub fn fit_line(x: &[f64], y: &[f64]) -> Result<LineFit> {
    if x.len() != y.len() || x.len() < 2 {
        return Err(Error::Analysis(format!(
            "line fit needs at least two paired points, got {} and {}",
            x.len(),
            y.len()
        )));
    }
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|v| (v - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::Analysis("line fit needs distinct abscissae".into()));
    }
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let slope_stderr = if x.len() > 2 {
        let rss: f64 = x
            .iter()
            .zip(y)
            .map(|(a, b)| (b - intercept - slope * a).powi(2))
            .sum();
        (rss / (n - 2.0) / sxx).sqrt()
    } else {
        0.0
    };
    Ok(LineFit {
        slope,
        intercept,
        slope_stderr,
    })
}

/// Slope of `log err` against `log h`.
pub fn loglog_slope(hs: &[f64], errs: &[f64]) -> Result<f64> {
    let lx: Vec<f64> = hs.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = errs.iter().map(|v| v.ln()).collect();
    Ok(fit_line(&lx, &ly)?.slope)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergencePoint {
    pub h: f64,
    pub error: f64,
    /// At or below the round-off floor and excluded from the fit.
    pub at_floor: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub points: Vec<ConvergencePoint>,
    pub slope: f64,
}

/// Fits the order of a method from `error_at(h)` over the step sizes `hs`.
///
/// The step sizes are evaluated independently via [`par_map`]. At least
/// three errors above `floor` are required.
pub fn convergence_study<F>(hs: &[f64], floor: f64, error_at: F) -> Result<ConvergenceReport>
where
    F: Fn(f64) -> Result<f64> + Sync + Send,
{
    if hs.len() < 3 {
        return Err(Error::Analysis(format!(
            "convergence study needs at least 3 step sizes, got {}",
            hs.len()
        )));
    }
    if let Some(h) = hs.iter().find(|h| !(h.is_finite() && **h > 0.0)) {
        return Err(Error::InvalidParameter(format!("step sizes must be positive, got {h}")));
    }
    let errors = par_map(hs, |&h| error_at(h));
    let mut points = Vec::with_capacity(hs.len());
    for (&h, e) in hs.iter().zip(errors) {
        let error = e?;
        points.push(ConvergencePoint {
            h,
            error,
            at_floor: !(error > floor),
        });
    }
    let fitted: Vec<&ConvergencePoint> = points.iter().filter(|p| !p.at_floor).collect();
    if fitted.len() < 3 {
        return Err(Error::Analysis(format!(
            "only {} of {} errors lie above the round-off floor {floor:e}",
            fitted.len(),
            points.len()
        )));
    }
    let hs: Vec<f64> = fitted.iter().map(|p| p.h).collect();
    let es: Vec<f64> = fitted.iter().map(|p| p.error).collect();
    let slope = loglog_slope(&hs, &es)?;
    Ok(ConvergenceReport { points, slope })
}

/// Running maximum of `|v|`.
pub fn running_max(values: &[f64]) -> Vec<f64> {
    let mut m = 0.0_f64;
    values
        .iter()
        .map(|v| {
            m = m.max(v.abs());
            m
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DriftReport {
    pub samples: usize,
    /// Linear slope of the running-max envelope over the second half, per unit of `x`.
    pub slope: f64,
    pub slope_stderr: f64,
    /// Exponent of a power-law fit `envelope ∝ x^k` over all points with
    /// positive `x` and envelope; `None` when fewer than two exist.
    pub power_law_exponent: Option<f64>,
    pub final_envelope: f64,
}

/// Secular growth of the running maximum of `|values|` sampled at `x`.
pub fn drift_study(x: &[f64], values: &[f64]) -> Result<DriftReport> {
    if x.len() != values.len() {
        return Err(Error::Analysis("drift study needs paired samples".into()));
    }
    if x.len() < 100 {
        return Err(Error::Analysis(format!(
            "drift study needs at least 100 samples, got {}",
            x.len()
        )));
    }
    let env = running_max(values);
    let half = x.len() / 2;
    let fit = fit_line(&x[half..], &env[half..])?;
    let (lx, ly): (Vec<f64>, Vec<f64>) = x
        .iter()
        .zip(&env)
        .filter(|(a, b)| **a > 0.0 && **b > 0.0)
        .map(|(a, b)| (a.ln(), b.ln()))
        .unzip();
    let power_law_exponent = fit_line(&lx, &ly).ok().map(|f| f.slope);
    Ok(DriftReport {
        samples: x.len(),
        slope: fit.slope,
        slope_stderr: fit.slope_stderr,
        power_law_exponent,
        final_envelope: *env.last().expect("non-empty"),
    })
}

/// Vertex of the parabola through three points, as `(x, y)`.
fn parabola_vertex(x: [f64; 3], y: [f64; 3]) -> (f64, f64) {
    let d1 = (y[1] - y[0]) / (x[1] - x[0]);
    let d2 = (y[2] - y[1]) / (x[2] - x[1]);
    let a = (d2 - d1) / (x[2] - x[0]);
    if a <= 0.0 {
        return (x[1], y[1]);
    }
    let b = d1 - a * (x[0] + x[1]);
    let xv = (-b / (2.0 * a)).clamp(x[0], x[2]);
    (xv, lagrange3(x, y, xv))
}

fn lagrange3(x: [f64; 3], y: [f64; 3], t: f64) -> f64 {
    (0..3)
        .map(|i| {
            let (j, k) = ((i + 1) % 3, (i + 2) % 3);
            y[i] * (t - x[j]) * (t - x[k]) / ((x[i] - x[j]) * (x[i] - x[k]))
        })
        .sum()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Pericenter {
    pub tau: f64,
    pub r: f64,
    pub phi: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrecessionReport {
    pub passages: Vec<Pericenter>,
    /// Mean advance of the pericenter angle per orbit.
    pub mean: f64,
    pub std_dev: f64,
}

/// Pericenter precession from sampled `(τ, r, φ)`.
///
/// Pericenters are strict local minima of `r`, refined by a parabola
/// through the bracketing samples; `φ` is interpolated at the refined time.
pub fn precession_from_series(tau: &[f64], r: &[f64], phi: &[f64]) -> Result<PrecessionReport> {
    if tau.len() != r.len() || tau.len() != phi.len() {
        return Err(Error::Analysis("precession study needs paired samples".into()));
    }
    let (lo, hi) = r
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(*v), b.max(*v)));
    let mut passages = Vec::new();
    // Round-off ripples on a circular orbit are not pericenters.
    let eccentric = hi - lo > 1e-8 * hi.abs();
    for i in (1..r.len().saturating_sub(1)).filter(|_| eccentric) {
        if r[i] < r[i - 1] && r[i] <= r[i + 1] {
            let xs = [tau[i - 1], tau[i], tau[i + 1]];
            let (tv, rv) = parabola_vertex(xs, [r[i - 1], r[i], r[i + 1]]);
            let pv = lagrange3(xs, [phi[i - 1], phi[i], phi[i + 1]], tv);
            passages.push(Pericenter { tau: tv, r: rv, phi: pv });
        }
    }
    if passages.len() < 3 {
        return Err(Error::Analysis(format!(
            "precession study needs at least 3 pericenter passages, found {}",
            passages.len()
        )));
    }
    let adv: Vec<f64> = passages
        .windows(2)
        .map(|w| (w[1].phi - w[0].phi).abs() - 2.0 * PI)
        .collect();
    let n = adv.len() as f64;
    let mean = adv.iter().sum::<f64>() / n;
    let var = adv.iter().map(|a| (a - mean).powi(2)).sum::<f64>() / (n - 1.0).max(1.0);
    Ok(PrecessionReport {
        passages,
        mean,
        std_dev: var.sqrt(),
    })
}

/// Precession of a Schwarzschild trajectory with `q = (t, r, φ)`.
pub fn precession_study(tr: &Trajectory) -> Result<PrecessionReport> {
    if tr.iter().any(|s| s.q.len() < 3) {
        return Err(Error::Analysis("precession study needs q = (t, r, φ)".into()));
    }
    let tau: Vec<f64> = tr.iter().map(|s| s.tau).collect();
    let r: Vec<f64> = tr.iter().map(|s| s.q[1]).collect();
    let phi: Vec<f64> = tr.iter().map(|s| s.q[2]).collect();
    precession_from_series(&tau, &r, &phi)
}

/// Central-difference Jacobian of `f` at `x`, row-major `[out][in]`.
///
/// The step for component `j` is `rel_step · max(1, |x_j|)`.
pub fn fd_jacobian<F>(f: F, x: &[f64], rel_step: f64) -> Result<Vec<Vec<f64>>>
where
    F: Fn(&[f64]) -> Result<Vec<f64>>,
{
    let m = f(x)?.len();
    let mut jac = vec![vec![0.0; x.len()]; m];
    let mut xp = x.to_vec();
    for j in 0..x.len() {
        let d = rel_step * x[j].abs().max(1.0);
        xp[j] = x[j] + d;
        let fp = f(&xp)?;
        xp[j] = x[j] - d;
        let fm = f(&xp)?;
        xp[j] = x[j];
        for (row, (a, b)) in jac.iter_mut().zip(fp.iter().zip(&fm)) {
            row[j] = (a - b) / (2.0 * d);
        }
    }
    Ok(jac)
}

/// `‖DᵀJD − J‖_max` with `J = [[0, I], [−I, 0]]` for coordinates
/// listed before momenta.
pub fn symplectic_defect(d: &[Vec<f64>]) -> Result<f64> {
    let n2 = d.len();
    if !n2.is_multiple_of(2) || d.iter().any(|row| row.len() != n2) {
        return Err(Error::Analysis("symplectic check needs a square even-sized Jacobian".into()));
    }
    let n = n2 / 2;
    let j = |a: usize, b: usize| -> f64 {
        if b == a + n {
            1.0
        } else if a == b + n {
            -1.0
        } else {
            0.0
        }
    };
    let mut worst = 0.0_f64;
    for a in 0..n2 {
        for b in 0..n2 {
            // (DᵀJD)_ab = Σ_k D_ka (JD)_kb, with (JD)_kb = ±D_{k±n, b}.
            let mut v = 0.0;
            for k in 0..n {
                v += d[k][a] * d[k + n][b] - d[k + n][a] * d[k][b];
            }
            worst = worst.max((v - j(a, b)).abs());
        }
    }
    Ok(worst)
}
