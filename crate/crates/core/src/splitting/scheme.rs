//! The catalog of symmetric second-order leapfrogs on the extended phase
//! space, and the classical Störmer–Verlet step for separable problems.

use super::ops::{apply_operator, axpy, OperatorTag};
use crate::error::{Error, Result};
use crate::maps::LinearPhaseMap;
use crate::state::{EvalCounter, ExtendedState, PhaseState};
use crate::system::{HamiltonianSystem, SeparableSystem};
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

use OperatorTag::*;

/// Named entries of the leapfrog catalog.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Scheme {
    /// `Q̃PQP̃ = H1(h/2) H2(h) H1(h/2)`, symplectic on the extended space.
    QtPQPt,
    /// The conjugate `H2(h/2) H1(h) H2(h/2)`, built from the paired flows.
    H2H1H2,
    QQtPPt,
    QQtPtP,
    PPtQQt,
    PPtQtQ,
    /// `QP̃Q̃P`, the operator-by-operator form of `H2 H1 H2`.
    QPtQtP,
}

impl Scheme {
    pub const ALL: [Scheme; 7] = [
        Scheme::QtPQPt,
        Scheme::H2H1H2,
        Scheme::QQtPPt,
        Scheme::QQtPtP,
        Scheme::PPtQQt,
        Scheme::PPtQtQ,
        Scheme::QPtQtP,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Scheme::QtPQPt => "QtPQPt",
            Scheme::H2H1H2 => "H2H1H2",
            Scheme::QQtPPt => "QQtPPt",
            Scheme::QQtPtP => "QQtPtP",
            Scheme::PPtQQt => "PPtQQt",
            Scheme::PPtQtQ => "PPtQtQ",
            Scheme::QPtQtP => "QPtQtP",
        }
    }

    /// The first half of the palindrome; the second half mirrors it.
    fn half(self) -> Vec<OperatorTag> {
        match self {
            Scheme::QtPQPt => vec![Qt, P, Q, Pt],
            Scheme::H2H1H2 => vec![H2, H1],
            Scheme::QQtPPt => vec![Q, Qt, P, Pt],
            Scheme::QQtPtP => vec![Q, Qt, Pt, P],
            Scheme::PPtQQt => vec![P, Pt, Q, Qt],
            Scheme::PPtQtQ => vec![P, Pt, Qt, Q],
            Scheme::QPtQtP => vec![Q, Pt, Qt, P],
        }
    }

    pub fn spec(self) -> SchemeSpec {
        let half: Vec<(OperatorTag, f64)> = self.half().into_iter().map(|t| (t, 0.5)).collect();
        let mut sequence = half.clone();
        sequence.extend(half.into_iter().rev());
        SchemeSpec {
            name: self.name().to_string(),
            sequence,
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Scheme::ALL
            .into_iter()
            .find(|c| c.name().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| Error::Unknown {
                kind: "scheme",
                name: s.to_string(),
            })
    }
}

/// One symmetric base step as a list of `(operator, fraction of h)`.
///
/// The mid-step mixing map sits between the two halves of the sequence.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SchemeSpec {
    pub name: String,
    pub sequence: Vec<(OperatorTag, f64)>,
}

impl SchemeSpec {
    pub fn is_palindromic(&self) -> bool {
        let n = self.sequence.len();
        (0..n / 2).all(|i| self.sequence[i] == self.sequence[n - 1 - i])
    }

    /// Total fraction of `h` applied to each of `[q, q̃, p, p̃]`.
    pub fn advance_totals(&self) -> [f64; 4] {
        let mut totals = [0.0; 4];
        for (tag, frac) in &self.sequence {
            for (tot, adv) in totals.iter_mut().zip(tag.advances()) {
                if adv {
                    *tot += frac;
                }
            }
        }
        totals
    }

    pub fn evaluations_per_step(&self) -> u64 {
        self.sequence.iter().map(|(t, _)| t.evaluations()).sum()
    }
}

/// One base step with mid-step mixing `m1` and end-of-step mixing `m2`.
///
/// The extended state is advanced in place; times are left to the caller.
pub fn mixed_step<S: HamiltonianSystem + ?Sized>(
    sys: &S,
    spec: &SchemeSpec,
    m1: &LinearPhaseMap,
    m2: &LinearPhaseMap,
    s: &mut ExtendedState,
    h: f64,
    counter: &mut EvalCounter,
) -> Result<()> {
    let mid = spec.sequence.len() / 2;
    for (i, &(tag, frac)) in spec.sequence.iter().enumerate() {
        if i == mid {
            m1.mix_in_place(s);
        }
        apply_operator(sys, tag, s, frac * h, counter)?;
    }
    m2.mix_in_place(s);
    Ok(())
}

/// One symmetric second-order step of a catalog scheme, without mixing.
pub fn leapfrog_step<S: HamiltonianSystem + ?Sized>(
    sys: &S,
    scheme: Scheme,
    s: &ExtendedState,
    h: f64,
    counter: &mut EvalCounter,
) -> Result<ExtendedState> {
    if s.dim() != sys.dim() {
        return Err(Error::Dimension {
            expected: sys.dim(),
            got: s.dim(),
        });
    }
    let id = LinearPhaseMap::identity();
    let mut out = s.clone();
    mixed_step(sys, &scheme.spec(), &id, &id, &mut out, h, counter)?;
    out.tau += h;
    out.t += h;
    out.tt += h;
    Ok(out)
}

/// Kick–drift–kick Störmer–Verlet step for `H = T(p) + V(q)`.
pub fn stormer_verlet_step<S: SeparableSystem + ?Sized>(
    sys: &S,
    s: &PhaseState,
    h: f64,
) -> PhaseState {
    let mut p = s.p.clone();
    axpy(&mut p, -0.5 * h, &sys.potential_grad(&s.q));
    let mut q = s.q.clone();
    axpy(&mut q, h, &sys.kinetic_grad(&p));
    axpy(&mut p, -0.5 * h, &sys.potential_grad(&q));
    PhaseState {
        q,
        p,
        tau: s.tau + h,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::{HarmonicOscillator, Schwarzschild};
    use crate::state::clone_up;

    fn rel_diff(a: &ExtendedState, b: &ExtendedState) -> f64 {
        let (x, y) = (a.to_flat(), b.to_flat());
        let scale = y.iter().fold(1e-300_f64, |m, v| m.max(v.abs()));
        x.iter()
            .zip(&y)
            .fold(0.0_f64, |m, (u, v)| m.max((u - v).abs()))
            / scale
    }

    #[test]
    fn catalog_invariants() {
        for scheme in Scheme::ALL {
            let spec = scheme.spec();
            assert!(spec.is_palindromic(), "{scheme}");
            assert_eq!(spec.advance_totals(), [1.0; 4], "{scheme}");
            assert_eq!(spec.evaluations_per_step(), 8, "{scheme}");
            assert_eq!(scheme.name().parse::<Scheme>().unwrap(), scheme);
        }
        assert!(matches!("XYZ".parse::<Scheme>(), Err(Error::Unknown { .. })));
    }

    #[test]
    fn h1h2h1_tracks_exact_rotation() {
        let sys = HarmonicOscillator::new(1.0);
        let s = clone_up(&PhaseState::new(vec![1.0], vec![0.0], 0.0).unwrap()).unwrap();
        let mut c = EvalCounter::new();
        let out = leapfrog_step(&sys, Scheme::QtPQPt, &s, 0.1, &mut c).unwrap();
        assert!((out.q[0] - 0.1_f64.cos()).abs() <= 1e-4);
        assert_eq!(c.get(), 8);
    }

    #[test]
    fn zero_step_and_time_symmetry() {
        let sys = Schwarzschild::new(Default::default()).unwrap();
        let s = clone_up(&sys.initial_conditions().unwrap()).unwrap();
        let mut c = EvalCounter::new();
        for scheme in Scheme::ALL {
            let same = leapfrog_step(&sys, scheme, &s, 0.0, &mut c).unwrap();
            assert_eq!(same, s, "{scheme}");
            let fwd = leapfrog_step(&sys, scheme, &s, 18.0, &mut c).unwrap();
            let back = leapfrog_step(&sys, scheme, &fwd, -18.0, &mut c).unwrap();
            assert!(rel_diff(&back, &s) <= 1e-12, "{scheme}: {}", rel_diff(&back, &s));
        }
    }

    #[test]
    fn paired_and_single_operator_forms_agree() {
        let sys = Schwarzschild::new(Default::default()).unwrap();
        let mut s = clone_up(&sys.initial_conditions().unwrap()).unwrap();
        s.qt[1] += 0.5;
        let mut c = EvalCounter::new();
        let a = leapfrog_step(&sys, Scheme::H2H1H2, &s, 12.0, &mut c).unwrap();
        let b = leapfrog_step(&sys, Scheme::QPtQtP, &s, 12.0, &mut c).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn clones_evolve_identically_for_exact_component_flows() {
        // For separable H the pair (q, p) only talks to itself, as does
        // (q̃, p̃). Schemes that give both pairs the same sub-sequence keep
        // a cloned state cloned.
        let sys = HarmonicOscillator::new(1.0);
        let s = clone_up(&PhaseState::new(vec![0.8], vec![-0.3], 0.0).unwrap()).unwrap();
        let mut c = EvalCounter::new();
        for scheme in [Scheme::QQtPPt, Scheme::QQtPtP, Scheme::PPtQQt, Scheme::PPtQtQ] {
            let out = leapfrog_step(&sys, scheme, &s, 1e-3, &mut c).unwrap();
            assert!((out.q[0] - out.qt[0]).abs() <= 1e-12, "{scheme}");
            assert!((out.p[0] - out.pt[0]).abs() <= 1e-12, "{scheme}");
        }
    }

    #[test]
    fn stormer_verlet_hand_values() {
        // p½ = −0.05, q₁ = 1 − 0.005, p₁ = p½ − 0.05·q₁
        let sys = HarmonicOscillator::new(1.0);
        let s = PhaseState::new(vec![1.0], vec![0.0], 0.0).unwrap();
        let out = stormer_verlet_step(&sys, &s, 0.1);
        assert!((out.q[0] - 0.995).abs() < 1e-15);
        assert!((out.p[0] + 0.09975).abs() < 1e-15);
        let h0 = 0.5;
        let h1 = 0.5 * (out.p[0].powi(2) + out.q[0].powi(2));
        assert!((h1 - h0).abs() < 0.1_f64.powi(2));
    }

    #[test]
    fn stormer_verlet_identity_and_reversibility() {
        let sys = HarmonicOscillator::new(2.0);
        let s = PhaseState::new(vec![0.4], vec![-1.2], 0.0).unwrap();
        assert_eq!(stormer_verlet_step(&sys, &s, 0.0), s);
        let back = stormer_verlet_step(&sys, &stormer_verlet_step(&sys, &s, 0.07), -0.07);
        assert!((back.q[0] - s.q[0]).abs() < 1e-15);
        assert!((back.p[0] - s.p[0]).abs() < 1e-15);
    }
}
