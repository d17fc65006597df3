use crate::error::{Error, Result};
use crate::system::{Block, FirstOrderSystem};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Parameters of `ẍ − μ(1 − x²)ẋ + x = A cos(2πt/P)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VdpParams {
    pub mu: f64,
    pub amplitude: f64,
    pub period: f64,
}

impl Default for VdpParams {
    fn default() -> Self {
        Self {
            mu: 5.0,
            amplitude: 5.0,
            period: 2.0 * PI / 2.463,
        }
    }
}

/// Forced van der Pol oscillator on `(x, y = ẋ)`, partitioned after `x`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VanDerPol {
    params: VdpParams,
}

impl VanDerPol {
    pub fn new(params: VdpParams) -> Result<Self> {
        let ok = params.mu.is_finite()
            && params.amplitude.is_finite()
            && params.period.is_finite()
            && params.period > 0.0;
        if !ok {
            return Err(Error::InvalidParameter(format!(
                "van der Pol needs finite parameters and a positive forcing period, got {params:?}"
            )));
        }
        Ok(Self { params })
    }

    pub fn params(&self) -> &VdpParams {
        &self.params
    }

    fn accel(&self, x: f64, y: f64, t: f64) -> f64 {
        let VdpParams {
            mu,
            amplitude,
            period,
        } = self.params;
        mu * (1.0 - x * x) * y - x + amplitude * (2.0 * PI * t / period).cos()
    }
}

impl FirstOrderSystem for VanDerPol {
    fn dim(&self) -> usize {
        2
    }

    fn field(&self, x: &[f64], t: f64) -> Vec<f64> {
        vec![x[1], self.accel(x[0], x[1], t)]
    }

    fn partition(&self) -> Option<usize> {
        Some(1)
    }

    fn field_block(&self, x: &[f64], t: f64, block: Block) -> Vec<f64> {
        match block {
            Block::Lower => vec![x[1]],
            Block::Upper => vec![self.accel(x[0], x[1], t)],
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hand_evaluated_field() {
        let sys = VanDerPol::new(Default::default()).unwrap();
        assert_eq!(sys.field(&[2.0, 2.0], 0.0), vec![2.0, -27.0]);
    }

    #[test]
    fn nonlinear_term_vanishes_at_unit_amplitude() {
        let sys = VanDerPol::new(VdpParams {
            amplitude: 0.0,
            ..Default::default()
        })
        .unwrap();
        for y in [-3.0, 0.0, 0.4, 10.0] {
            assert_eq!(sys.field(&[1.0, y], 1.3)[1], -1.0);
        }
    }

    #[test]
    fn reduces_to_oscillator() {
        let sys = VanDerPol::new(VdpParams {
            mu: 0.0,
            amplitude: 0.0,
            period: 1.0,
        })
        .unwrap();
        assert_eq!(sys.field(&[0.3, -0.8], 4.0), vec![-0.8, -0.3]);
    }

    #[test]
    fn blocks_agree_with_full_field() {
        let sys = VanDerPol::new(Default::default()).unwrap();
        let x = [0.7, -1.9];
        let full = sys.field(&x, 2.2);
        assert_eq!(sys.field_block(&x, 2.2, Block::Lower), full[..1]);
        assert_eq!(sys.field_block(&x, 2.2, Block::Upper), full[1..]);
    }

    #[test]
    fn rejects_nonpositive_period() {
        assert!(VanDerPol::new(VdpParams {
            period: 0.0,
            ..Default::default()
        })
        .is_err());
    }
}
