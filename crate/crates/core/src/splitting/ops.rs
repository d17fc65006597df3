//! Exact flows of the four component vector fields of the split extended
//! Hamiltonian `H(q, p̃) + H(q̃, p)`.
//!
//! Each flow freezes the pair it reads and translates the block it writes,
//! so every operator is one gradient evaluation and is exactly solvable.

use crate::error::{Error, Result};
use crate::state::{EvalCounter, ExtendedState};
use crate::system::HamiltonianSystem;
use serde::{Deserialize, Serialize};

/// Component flows of the extended system.
///
/// `H1` is the commuting pair `Q̃P` (both read `(q, p̃)`), `H2` the pair `QP̃`
/// (both read `(q̃, p)`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum OperatorTag {
    Q,
    Qt,
    P,
    Pt,
    H1,
    H2,
}

impl OperatorTag {
    /// Which of `[q, q̃, p, p̃]` the operator advances.
    pub fn advances(self) -> [bool; 4] {
        match self {
            OperatorTag::Q => [true, false, false, false],
            OperatorTag::Qt => [false, true, false, false],
            OperatorTag::P => [false, false, true, false],
            OperatorTag::Pt => [false, false, false, true],
            OperatorTag::H1 => [false, true, true, false],
            OperatorTag::H2 => [true, false, false, true],
        }
    }

    /// Gradient evaluations charged per application.
    pub fn evaluations(self) -> u64 {
        match self {
            OperatorTag::H1 | OperatorTag::H2 => 2,
            _ => 1,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            OperatorTag::Q => "Q",
            OperatorTag::Qt => "Qt",
            OperatorTag::P => "P",
            OperatorTag::Pt => "Pt",
            OperatorTag::H1 => "H1",
            OperatorTag::H2 => "H2",
        }
    }
}

fn checked(block: &[f64], what: &'static str) -> Result<()> {
    if block.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite(what))
    }
}

/// `q ← q + dt·∇_p H(q̃, p)`
pub fn op_drift_q<S: HamiltonianSystem + ?Sized>(
    sys: &S,
    s: &mut ExtendedState,
    dt: f64,
    counter: &mut EvalCounter,
) -> Result<()> {
    let g = sys.grad_p(&s.qt, &s.p);
    counter.bump();
    axpy(&mut s.q, dt, &g);
    checked(&s.q, "drift of q")
}

/// `q̃ ← q̃ + dt·∇_p H(q, p̃)`
pub fn op_drift_qt<S: HamiltonianSystem + ?Sized>(
    sys: &S,
    s: &mut ExtendedState,
    dt: f64,
    counter: &mut EvalCounter,
) -> Result<()> {
    let g = sys.grad_p(&s.q, &s.pt);
    counter.bump();
    axpy(&mut s.qt, dt, &g);
    checked(&s.qt, "drift of q̃")
}

/// `p ← p − dt·∇_q H(q, p̃)`
pub fn op_kick_p<S: HamiltonianSystem + ?Sized>(
    sys: &S,
    s: &mut ExtendedState,
    dt: f64,
    counter: &mut EvalCounter,
) -> Result<()> {
    let g = sys.grad_q(&s.q, &s.pt);
    counter.bump();
    axpy(&mut s.p, -dt, &g);
    checked(&s.p, "kick of p")
}

/// `p̃ ← p̃ − dt·∇_q H(q̃, p)`
pub fn op_kick_pt<S: HamiltonianSystem + ?Sized>(
    sys: &S,
    s: &mut ExtendedState,
    dt: f64,
    counter: &mut EvalCounter,
) -> Result<()> {
    let g = sys.grad_q(&s.qt, &s.p);
    counter.bump();
    axpy(&mut s.pt, -dt, &g);
    checked(&s.pt, "kick of p̃")
}

/// Applies one component flow for time `dt`.
pub fn apply_operator<S: HamiltonianSystem + ?Sized>(
    sys: &S,
    tag: OperatorTag,
    s: &mut ExtendedState,
    dt: f64,
    counter: &mut EvalCounter,
) -> Result<()> {
    match tag {
        OperatorTag::Q => op_drift_q(sys, s, dt, counter),
        OperatorTag::Qt => op_drift_qt(sys, s, dt, counter),
        OperatorTag::P => op_kick_p(sys, s, dt, counter),
        OperatorTag::Pt => op_kick_pt(sys, s, dt, counter),
        OperatorTag::H1 => {
            let gp = sys.grad_p(&s.q, &s.pt);
            let gq = sys.grad_q(&s.q, &s.pt);
            counter.add(2);
            axpy(&mut s.qt, dt, &gp);
            axpy(&mut s.p, -dt, &gq);
            checked(&s.qt, "flow of H1")?;
            checked(&s.p, "flow of H1")
        }
        OperatorTag::H2 => {
            let gp = sys.grad_p(&s.qt, &s.p);
            let gq = sys.grad_q(&s.qt, &s.p);
            counter.add(2);
            axpy(&mut s.q, dt, &gp);
            axpy(&mut s.pt, -dt, &gq);
            checked(&s.q, "flow of H2")?;
            checked(&s.pt, "flow of H2")
        }
    }
}

#[inline]
pub(crate) fn axpy(y: &mut [f64], a: f64, x: &[f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += a * xi;
    }
}
