use crate::error::{Error, Result};
use crate::state::PhaseState;
use crate::system::{HamiltonianSystem, SeparableSystem};

/// `H = ½|p|² + ½ω²|q|²` in `n` uncoupled degrees of freedom.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HarmonicOscillator {
    omega: f64,
    dim: usize,
}

impl HarmonicOscillator {
    /// One degree of freedom. Panics unless `omega` is positive and finite.
    pub fn new(omega: f64) -> Self {
        Self::try_new(omega, 1).expect("omega must be positive and finite")
    }

    pub fn try_new(omega: f64, dim: usize) -> Result<Self> {
        if !(omega.is_finite() && omega > 0.0) || dim == 0 {
            return Err(Error::InvalidParameter(format!(
                "oscillator needs omega > 0 and dim ≥ 1, got omega = {omega}, dim = {dim}"
            )));
        }
        Ok(Self { omega, dim })
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }

    /// Exact solution after time `t` from `s0`.
    pub fn exact(&self, s0: &PhaseState, t: f64) -> PhaseState {
        let w = self.omega;
        let (c, s) = ((w * t).cos(), (w * t).sin());
        let q = s0
            .q
            .iter()
            .zip(&s0.p)
            .map(|(&q, &p)| q * c + p * s / w)
            .collect();
        let p = s0
            .q
            .iter()
            .zip(&s0.p)
            .map(|(&q, &p)| -q * w * s + p * c)
            .collect();
        PhaseState {
            q,
            p,
            tau: s0.tau + t,
        }
    }
}

impl HamiltonianSystem for HarmonicOscillator {
    fn dim(&self) -> usize {
        self.dim
    }

    fn value(&self, q: &[f64], p: &[f64]) -> f64 {
        let w2 = self.omega * self.omega;
        0.5 * p.iter().map(|v| v * v).sum::<f64>() + 0.5 * w2 * q.iter().map(|v| v * v).sum::<f64>()
    }

    fn grad_q(&self, q: &[f64], _p: &[f64]) -> Vec<f64> {
        self.potential_grad(q)
    }

    fn grad_p(&self, _q: &[f64], p: &[f64]) -> Vec<f64> {
        self.kinetic_grad(p)
    }
}

impl SeparableSystem for HarmonicOscillator {
    fn dim(&self) -> usize {
        self.dim
    }

    fn kinetic_grad(&self, p: &[f64]) -> Vec<f64> {
        p.to_vec()
    }

    fn potential_grad(&self, q: &[f64]) -> Vec<f64> {
        let w2 = self.omega * self.omega;
        q.iter().map(|v| w2 * v).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_2;

    #[test]
    fn quarter_rotation() {
        let sys = HarmonicOscillator::new(1.0);
        let s0 = PhaseState::new(vec![1.0], vec![0.0], 0.0).unwrap();
        let s = sys.exact(&s0, FRAC_PI_2);
        assert!(s.q[0].abs() < 1e-15);
        assert!((s.p[0] + 1.0).abs() < 1e-15);
    }

    #[test]
    fn exact_energy_is_constant() {
        let sys = HarmonicOscillator::new(2.5);
        let s0 = PhaseState::new(vec![0.3], vec![-0.7], 0.0).unwrap();
        let e0 = sys.value(&s0.q, &s0.p);
        for k in 0..50 {
            let s = sys.exact(&s0, 0.37 * k as f64);
            assert!((sys.value(&s.q, &s.p) - e0).abs() < 1e-14);
        }
    }

    #[test]
    fn rejects_bad_frequency() {
        assert!(HarmonicOscillator::try_new(0.0, 1).is_err());
        assert!(HarmonicOscillator::try_new(f64::NAN, 1).is_err());
        assert!(HarmonicOscillator::try_new(1.0, 0).is_err());
    }
}
