//! State containers for the original and the doubled phase space, plus
//! vector-field evaluation accounting.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// A point `(q, p)` of the original phase space together with the value of
/// the independent variable.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseState {
    pub q: Vec<f64>,
    pub p: Vec<f64>,
    pub tau: f64,
}

impl PhaseState {
    /// Builds a state, rejecting mismatched lengths, empty vectors and
    /// non-finite components.
    pub fn new(q: Vec<f64>, p: Vec<f64>, tau: f64) -> Result<Self> {
        if q.is_empty() {
            return Err(Error::InvalidParameter(
                "phase state needs at least one degree of freedom".into(),
            ));
        }
        if q.len() != p.len() {
            return Err(Error::Dimension {
                expected: q.len(),
                got: p.len(),
            });
        }
        let s = Self { q, p, tau };
        if !s.is_finite() {
            return Err(Error::NonFinite("phase state"));
        }
        Ok(s)
    }

    pub fn dim(&self) -> usize {
        self.q.len()
    }

    pub fn is_finite(&self) -> bool {
        self.tau.is_finite() && self.q.iter().chain(&self.p).all(|v| v.is_finite())
    }
}

/// A point `(q, q̃, p, p̃)` of the extended phase space.
///
/// `t` and `tt` carry the original and auxiliary time for non-autonomous
/// problems; autonomous Hamiltonian runs keep them equal to `tau`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExtendedState {
    pub q: Vec<f64>,
    pub qt: Vec<f64>,
    pub p: Vec<f64>,
    pub pt: Vec<f64>,
    pub tau: f64,
    pub t: f64,
    pub tt: f64,
}

impl ExtendedState {
    pub fn dim(&self) -> usize {
        self.q.len()
    }

    pub fn is_finite(&self) -> bool {
        [self.tau, self.t, self.tt].iter().all(|v| v.is_finite())
            && self
                .q
                .iter()
                .chain(&self.qt)
                .chain(&self.p)
                .chain(&self.pt)
                .all(|v| v.is_finite())
    }

    /// Largest absolute value over the four phase-space blocks.
    pub fn max_abs(&self) -> f64 {
        self.q
            .iter()
            .chain(&self.qt)
            .chain(&self.p)
            .chain(&self.pt)
            .fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    /// Flattens to `(q, q̃, p, p̃)`, the coordinate order of the extended
    /// symplectic form.
    pub fn to_flat(&self) -> Vec<f64> {
        let mut v = Vec::with_capacity(4 * self.dim());
        v.extend_from_slice(&self.q);
        v.extend_from_slice(&self.qt);
        v.extend_from_slice(&self.p);
        v.extend_from_slice(&self.pt);
        v
    }

    pub fn from_flat(flat: &[f64], tau: f64) -> Self {
        let n = flat.len() / 4;
        Self {
            q: flat[..n].to_vec(),
            qt: flat[n..2 * n].to_vec(),
            p: flat[2 * n..3 * n].to_vec(),
            pt: flat[3 * n..].to_vec(),
            tau,
            t: tau,
            tt: tau,
        }
    }
}

/// The cloning map `(q, p) ↦ (q, q, p, p)`.
pub fn clone_up(s: &PhaseState) -> Result<ExtendedState> {
    if !s.is_finite() {
        return Err(Error::NonFinite("clone_up input"));
    }
    Ok(ExtendedState {
        q: s.q.clone(),
        qt: s.q.clone(),
        p: s.p.clone(),
        pt: s.p.clone(),
        tau: s.tau,
        t: s.tau,
        tt: s.tau,
    })
}

/// Counts vector-field evaluations: one per call to a gradient or to a
/// first-order right-hand side.
#[derive(Debug, Default, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct EvalCounter {
    count: u64,
}

impl EvalCounter {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get(&self) -> u64 {
        self.count
    }

    #[inline]
    pub fn bump(&mut self) {
        self.count += 1;
    }

    #[inline]
    pub fn add(&mut self, n: u64) {
        self.count += n;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn clone_copies_both_blocks() {
        let s = PhaseState::new(vec![1.0, 2.0], vec![3.0, 4.0], 0.5).unwrap();
        let e = clone_up(&s).unwrap();
        assert_eq!(e.q, vec![1.0, 2.0]);
        assert_eq!(e.qt, vec![1.0, 2.0]);
        assert_eq!(e.p, vec![3.0, 4.0]);
        assert_eq!(e.pt, vec![3.0, 4.0]);
        assert_eq!((e.tau, e.t, e.tt), (0.5, 0.5, 0.5));
    }

    #[test]
    fn clone_of_zero_state_is_zero() {
        let s = PhaseState::new(vec![0.0], vec![0.0], 0.0).unwrap();
        let e = clone_up(&s).unwrap();
        assert_eq!(e.to_flat(), vec![0.0; 4]);
    }

    #[test]
    fn rejects_bad_states() {
        assert!(matches!(
            PhaseState::new(vec![1.0], vec![1.0, 2.0], 0.0),
            Err(Error::Dimension { .. })
        ));
        assert!(PhaseState::new(vec![], vec![], 0.0).is_err());
        assert!(matches!(
            PhaseState::new(vec![f64::NAN], vec![1.0], 0.0),
            Err(Error::NonFinite(_))
        ));
        let bad = PhaseState {
            q: vec![f64::INFINITY],
            p: vec![0.0],
            tau: 0.0,
        };
        assert!(clone_up(&bad).is_err());
    }

    #[test]
    fn flat_layout_round_trips() {
        let e = ExtendedState {
            q: vec![1.0],
            qt: vec![2.0],
            p: vec![3.0],
            pt: vec![4.0],
            tau: 0.0,
            t: 0.0,
            tt: 0.0,
        };
        assert_eq!(e.to_flat(), vec![1.0, 2.0, 3.0, 4.0]);
        assert_eq!(ExtendedState::from_flat(&e.to_flat(), 0.0), e);
    }

    #[test]
    fn counter_accumulates() {
        let mut c = EvalCounter::new();
        c.bump();
        c.add(7);
        assert_eq!(c.get(), 8);
    }
}
