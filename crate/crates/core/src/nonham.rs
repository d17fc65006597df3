//! Extended-phase-space leapfrogs for `ẋ = f(x, t)`.
//!
//! The state is doubled to `(x, x̃, t, t̃)`. Method 1 drives `x` with
//! `f(x̃, t̃)` and `x̃` with `f(x, t)`. Method 2 uses a partition
//! `x = (x_lo, x_hi)` and crosses the blocks: `(x_lo, x̃_hi, t)` is driven
//! from `(x̃_lo, x_hi, t̃)` and vice versa. Mixing maps act with `alpha_q`
//! on the lower block and `alpha_p` on the upper block; times are never
//! mixed.

use crate::composition::CompositionScheme;
use crate::error::{Error, Result};
use crate::maps::{interpolate, mix_blocks, LinearPhaseMap, MapKind};
use crate::splitting::{DriverMode, DIVERGENCE_THRESHOLD};
use crate::state::EvalCounter;
use crate::system::{Block, FirstOrderSystem};
use crate::trajectory::{Sample, Trajectory};
use serde::{Deserialize, Serialize};
use std::str::FromStr;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExtendedOdeState {
    pub x: Vec<f64>,
    pub xt: Vec<f64>,
    pub t: f64,
    pub tt: f64,
}

impl ExtendedOdeState {
    /// The cloned state `(x, x, t, t)`.
    pub fn cloned(x: &[f64], t: f64) -> Result<Self> {
        if x.iter().any(|v| !v.is_finite()) || !t.is_finite() {
            return Err(Error::NonFinite("initial ODE state"));
        }
        Ok(Self {
            x: x.to_vec(),
            xt: x.to_vec(),
            t,
            tt: t,
        })
    }

    pub fn dim(&self) -> usize {
        self.x.len()
    }

    pub fn is_finite(&self) -> bool {
        self.t.is_finite()
            && self.tt.is_finite()
            && self.x.iter().chain(&self.xt).all(|v| v.is_finite())
    }

    pub fn max_abs(&self) -> f64 {
        self.x
            .iter()
            .chain(&self.xt)
            .fold(0.0_f64, |m, v| m.max(v.abs()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OdeScheme {
    Method1,
    Method2,
}

impl FromStr for OdeScheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "method1" | "1" => Ok(Self::Method1),
            "method2" | "2" => Ok(Self::Method2),
            other => Err(Error::Unknown {
                kind: "ODE method",
                name: other.to_string(),
            }),
        }
    }
}

fn split_point<F: FirstOrderSystem + ?Sized>(sys: &F) -> usize {
    sys.partition().unwrap_or(sys.dim()).min(sys.dim())
}

fn mix_ode(m: &LinearPhaseMap, s: &mut ExtendedOdeState, k: usize) {
    let (lo, hi) = s.x.split_at_mut(k);
    let (tlo, thi) = s.xt.split_at_mut(k);
    mix_blocks(lo, tlo, m.alpha_q());
    mix_blocks(hi, thi, m.alpha_p());
}

/// Projects onto the original variables block by block.
pub fn project_ode(m: &LinearPhaseMap, s: &ExtendedOdeState, k: usize) -> Vec<f64> {
    s.x.iter()
        .zip(&s.xt)
        .enumerate()
        .map(|(i, (&a, &b))| {
            let alpha = if i < k { m.alpha_q() } else { m.alpha_p() };
            interpolate(a, b, alpha)
        })
        .collect()
}

fn checked_field<F: FirstOrderSystem + ?Sized>(
    sys: &F,
    x: &[f64],
    t: f64,
    counter: &mut EvalCounter,
) -> Result<Vec<f64>> {
    let f = sys.field(x, t);
    counter.add(sys.evals_per_field());
    if f.len() != x.len() {
        return Err(Error::Dimension {
            expected: x.len(),
            got: f.len(),
        });
    }
    if f.iter().all(|v| v.is_finite()) {
        Ok(f)
    } else {
        Err(Error::NonFinite("vector field"))
    }
}

fn checked_block<F: FirstOrderSystem + ?Sized>(
    sys: &F,
    x: &[f64],
    t: f64,
    block: Block,
    counter: &mut EvalCounter,
) -> Result<Vec<f64>> {
    let f = sys.field_block(x, t, block);
    counter.bump();
    if f.iter().all(|v| v.is_finite()) {
        Ok(f)
    } else {
        Err(Error::NonFinite("vector field block"))
    }
}

fn add_scaled(y: &mut [f64], a: f64, x: &[f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += a * xi;
    }
}

/// Method 1 base step with mid-step mixing `m1`.
///
/// Three field calls per step when `m1` is the identity, four otherwise.
pub fn method1_mixed<F: FirstOrderSystem + ?Sized>(
    sys: &F,
    s: &mut ExtendedOdeState,
    h: f64,
    m1: &LinearPhaseMap,
    counter: &mut EvalCounter,
) -> Result<()> {
    let k = split_point(sys);
    let half = 0.5 * h;

    let fa = checked_field(sys, &s.xt, s.tt, counter)?;
    add_scaled(&mut s.x, half, &fa);
    s.t += half;

    if m1.is_identity() {
        let fb = checked_field(sys, &s.x, s.t, counter)?;
        add_scaled(&mut s.xt, h, &fb);
        s.tt += h;
    } else {
        let fb = checked_field(sys, &s.x, s.t, counter)?;
        add_scaled(&mut s.xt, half, &fb);
        s.tt += half;
        mix_ode(m1, s, k);
        let fb = checked_field(sys, &s.x, s.t, counter)?;
        add_scaled(&mut s.xt, half, &fb);
        s.tt += half;
    }

    let fc = checked_field(sys, &s.xt, s.tt, counter)?;
    add_scaled(&mut s.x, half, &fc);
    s.t += half;
    Ok(())
}

/// One unmixed Method 1 step.
pub fn method1_step<F: FirstOrderSystem + ?Sized>(
    sys: &F,
    s: &ExtendedOdeState,
    h: f64,
    counter: &mut EvalCounter,
) -> Result<ExtendedOdeState> {
    let mut out = s.clone();
    method1_mixed(sys, &mut out, h, &LinearPhaseMap::identity(), counter)?;
    Ok(out)
}

/// Advances `(x_lo, x̃_hi, t)` by `dt` using the field at `(x̃_lo, x_hi, t̃)`.
fn group_a<F: FirstOrderSystem + ?Sized>(
    sys: &F,
    s: &mut ExtendedOdeState,
    k: usize,
    dt: f64,
    counter: &mut EvalCounter,
) -> Result<()> {
    let n = s.dim();
    let mut z = s.xt[..k].to_vec();
    z.extend_from_slice(&s.x[k..]);
    let lo = (k > 0)
        .then(|| checked_block(sys, &z, s.tt, Block::Lower, counter))
        .transpose()?;
    let hi = (k < n)
        .then(|| checked_block(sys, &z, s.tt, Block::Upper, counter))
        .transpose()?;
    if let Some(f) = lo {
        add_scaled(&mut s.x[..k], dt, &f);
    }
    if let Some(g) = hi {
        add_scaled(&mut s.xt[k..], dt, &g);
    }
    s.t += dt;
    Ok(())
}

/// Advances `(x̃_lo, x_hi, t̃)` by `dt` using the field at `(x_lo, x̃_hi, t)`.
fn group_b<F: FirstOrderSystem + ?Sized>(
    sys: &F,
    s: &mut ExtendedOdeState,
    k: usize,
    dt: f64,
    counter: &mut EvalCounter,
) -> Result<()> {
    let n = s.dim();
    let mut z = s.x[..k].to_vec();
    z.extend_from_slice(&s.xt[k..]);
    let lo = (k > 0)
        .then(|| checked_block(sys, &z, s.t, Block::Lower, counter))
        .transpose()?;
    let hi = (k < n)
        .then(|| checked_block(sys, &z, s.t, Block::Upper, counter))
        .transpose()?;
    if let Some(f) = lo {
        add_scaled(&mut s.xt[..k], dt, &f);
    }
    if let Some(g) = hi {
        add_scaled(&mut s.x[k..], dt, &g);
    }
    s.tt += dt;
    Ok(())
}

/// Method 2 base step with mid-step mixing `m1`.
///
/// Each block of the right-hand side is evaluated separately and counted
/// once, so a step costs six block evaluations (eight with mixing).
pub fn method2_mixed<F: FirstOrderSystem + ?Sized>(
    sys: &F,
    s: &mut ExtendedOdeState,
    h: f64,
    m1: &LinearPhaseMap,
    counter: &mut EvalCounter,
) -> Result<()> {
    let k = sys.partition().ok_or(Error::MissingPartition)?;
    if k > sys.dim() {
        return Err(Error::InvalidParameter(format!(
            "partition point {k} exceeds dimension {}",
            sys.dim()
        )));
    }
    let half = 0.5 * h;
    group_a(sys, s, k, half, counter)?;
    if m1.is_identity() {
        group_b(sys, s, k, h, counter)?;
    } else {
        group_b(sys, s, k, half, counter)?;
        mix_ode(m1, s, k);
        group_b(sys, s, k, half, counter)?;
    }
    group_a(sys, s, k, half, counter)
}

/// One unmixed Method 2 step.
pub fn method2_step<F: FirstOrderSystem + ?Sized>(
    sys: &F,
    s: &ExtendedOdeState,
    h: f64,
    counter: &mut EvalCounter,
) -> Result<ExtendedOdeState> {
    let mut out = s.clone();
    method2_mixed(sys, &mut out, h, &LinearPhaseMap::identity(), counter)?;
    Ok(out)
}

/// Everything that defines an extended ODE integrator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OdeMethod {
    pub scheme: OdeScheme,
    pub mix1: LinearPhaseMap,
    pub mix2: LinearPhaseMap,
    pub projection: LinearPhaseMap,
    pub mode: DriverMode,
    pub composition: CompositionScheme,
}

impl OdeMethod {
    /// Identity mixing, primary-copy projection, persistent mode.
    pub fn new(scheme: OdeScheme) -> Self {
        Self {
            scheme,
            mix1: LinearPhaseMap::identity(),
            mix2: LinearPhaseMap::identity(),
            projection: LinearPhaseMap::preset("proj_primary").expect("preset exists"),
            mode: DriverMode::ExtendedPersistent,
            composition: CompositionScheme::single(),
        }
    }

    /// Sixth-order composition, identity/swap mixing, averaged and
    /// re-cloned after every composited step.
    pub fn vdp_default(scheme: OdeScheme) -> Self {
        Self {
            scheme,
            mix1: LinearPhaseMap::identity(),
            mix2: LinearPhaseMap::preset("swap_both").expect("preset exists"),
            projection: LinearPhaseMap::preset("proj_average").expect("preset exists"),
            mode: DriverMode::ProjectEachStep,
            composition: CompositionScheme::kahan6(),
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
        if self.mix1.kind() != MapKind::Mixing || self.mix2.kind() != MapKind::Mixing {
            return Err(Error::MapKind {
                expected: "mixing",
                got: "projection",
            });
        }
        if self.projection.kind() != MapKind::Projection {
            return Err(Error::MapKind {
                expected: "projection",
                got: "mixing",
            });
        }
        Ok(())
    }
}

/// Steps an extended ODE state and keeps the bookkeeping.
pub struct OdeStepper<'a, F: FirstOrderSystem + ?Sized> {
    sys: &'a F,
    method: OdeMethod,
    state: ExtendedOdeState,
    split: usize,
    t0: f64,
    h: f64,
    step: u64,
    counter: EvalCounter,
}

impl<'a, F: FirstOrderSystem + ?Sized> OdeStepper<'a, F> {
    pub fn new(sys: &'a F, method: OdeMethod, x0: &[f64], t0: f64, h: f64) -> Result<Self> {
        method.validate()?;
        if method.scheme == OdeScheme::Method2 && sys.partition().is_none() {
            return Err(Error::MissingPartition);
        }
        if !h.is_finite() {
            return Err(Error::InvalidParameter(format!("step size must be finite, got {h}")));
        }
        if x0.len() != sys.dim() {
            return Err(Error::Dimension {
                expected: sys.dim(),
                got: x0.len(),
            });
        }
        Ok(Self {
            sys,
            split: split_point(sys),
            method,
            state: ExtendedOdeState::cloned(x0, t0)?,
            t0,
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
            state,
            counter,
            split,
            ..
        } = self;
        let result = method.composition.apply(self.h, |dt| {
            match method.scheme {
                OdeScheme::Method1 => method1_mixed(*sys, state, dt, &method.mix1, counter)?,
                OdeScheme::Method2 => method2_mixed(*sys, state, dt, &method.mix1, counter)?,
            }
            mix_ode(&method.mix2, state, *split);
            Ok(())
        });
        let t = self.t0 + next as f64 * self.h;
        let diverged = || Error::Divergence {
            step: next,
            tau: t,
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
        self.state.t = t;
        self.state.tt = t;
        if self.method.mode == DriverMode::ProjectEachStep {
            let x = project_ode(&self.method.projection, &self.state, self.split);
            self.state = ExtendedOdeState::cloned(&x, t)?;
        }
        self.step = next;
        Ok(())
    }

    pub fn state(&self) -> &ExtendedOdeState {
        &self.state
    }

    pub fn projected(&self) -> Vec<f64> {
        project_ode(&self.method.projection, &self.state, self.split)
    }

    pub fn step_index(&self) -> u64 {
        self.step
    }

    pub fn evaluations(&self) -> u64 {
        self.counter.get()
    }

    /// Output row; `q` holds the lower block and `p` the upper block.
    pub fn sample(&self) -> Sample {
        let x = self.projected();
        let (lo, hi) = x.split_at(self.split);
        Sample {
            step: self.step,
            tau: self.state.t,
            t: self.state.t,
            q: lo.to_vec(),
            p: hi.to_vec(),
            invariant: None,
            evaluations: self.counter.get(),
        }
    }
}

/// Integrates `n_steps` steps from `x0` at time `t0`.
pub fn integrate_ode<F: FirstOrderSystem + ?Sized>(
    sys: &F,
    method: &OdeMethod,
    x0: &[f64],
    t0: f64,
    h: f64,
    n_steps: u64,
    sample_every: u64,
) -> Result<Trajectory> {
    if sample_every == 0 {
        return Err(Error::InvalidParameter("sample_every must be at least 1".into()));
    }
    let mut stepper = OdeStepper::new(sys, method.clone(), x0, t0, h)?;
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
