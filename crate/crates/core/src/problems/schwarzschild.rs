//! Equatorial geodesics of the Schwarzschild metric in geometric units.
//!
//! Coordinates are `q = (t, r, φ)` and momenta `p = (p_t, p_r, p_φ)`, with
//! `H = ½[p_t²/f − f·p_r² − p_φ²/r²]` and `f = 1 − 2M/r`.
//! Evaluations at or inside the horizon return NaN.

use crate::error::{Error, Result};
use crate::state::PhaseState;
use crate::system::HamiltonianSystem;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SchwarzschildParams {
    /// Central mass `M`.
    pub mass: f64,
    /// Test-particle mass `m`.
    pub particle_mass: f64,
    /// Semi-major axis of the classical orbit.
    pub a: f64,
    /// Eccentricity.
    pub e: f64,
}

impl Default for SchwarzschildParams {
    fn default() -> Self {
        Self {
            mass: 1.0,
            particle_mass: 1.0,
            a: 28.0,
            e: 0.5,
        }
    }
}

impl SchwarzschildParams {
    pub fn validate(&self) -> Result<()> {
        let finite = [self.mass, self.particle_mass, self.a, self.e]
            .iter()
            .all(|v| v.is_finite());
        if !finite || self.mass <= 0.0 || self.particle_mass <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "need finite M > 0 and m > 0, got M = {}, m = {}",
                self.mass, self.particle_mass
            )));
        }
        if !(0.0..1.0).contains(&self.e) {
            return Err(Error::InvalidParameter(format!(
                "eccentricity must lie in [0, 1), got {}",
                self.e
            )));
        }
        let peri = self.a * (1.0 - self.e);
        if peri <= 2.0 * self.mass {
            return Err(Error::SingularMetric {
                r: peri,
                horizon: 2.0 * self.mass,
            });
        }
        Ok(())
    }

    /// Classical orbital period `2π√(a³/M)`, used as the time unit.
    pub fn period(&self) -> f64 {
        2.0 * PI * (self.a.powi(3) / self.mass).sqrt()
    }

    pub fn apocenter(&self) -> f64 {
        self.a * (1.0 + self.e)
    }
}

/// First-order pericenter advance per orbit, `6πM/[(1−e²)a]`.
pub fn pericenter_precession_estimate(params: &SchwarzschildParams) -> f64 {
    6.0 * PI * params.mass / ((1.0 - params.e * params.e) * params.a)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Schwarzschild {
    params: SchwarzschildParams,
}

impl Schwarzschild {
    pub fn new(params: SchwarzschildParams) -> Result<Self> {
        params.validate()?;
        Ok(Self { params })
    }

    pub fn params(&self) -> &SchwarzschildParams {
        &self.params
    }

    pub fn period(&self) -> f64 {
        self.params.period()
    }

    /// The rest-mass value `m²/2` taken by `H` on physical geodesics.
    pub fn reference_energy(&self) -> f64 {
        0.5 * self.params.particle_mass.powi(2)
    }

    /// Like [`HamiltonianSystem::value`] but rejects points inside the horizon.
    pub fn checked_value(&self, q: &[f64], p: &[f64]) -> Result<f64> {
        let r = q[1];
        let horizon = 2.0 * self.params.mass;
        if !(r > horizon) {
            return Err(Error::SingularMetric { r, horizon });
        }
        Ok(self.value(q, p))
    }

    /// Start at apocenter with the Newtonian apocentric speed and `p_t`
    /// solved from `H = m²/2`.
    pub fn initial_conditions(&self) -> Result<PhaseState> {
        let SchwarzschildParams {
            particle_mass: m,
            e,
            ..
        } = self.params;
        let r0 = self.params.apocenter();
        let v0 = ((1.0 - e) / r0).sqrt();
        let phi_dot = v0 / r0;
        let p_phi = -r0 * r0 * phi_dot;
        let p_t = self.solve_p_t(r0, 0.0, p_phi, m)?;
        PhaseState::new(vec![0.0, r0, 0.0], vec![p_t, 0.0, p_phi], 0.0)
    }

    /// Exactly circular orbit of radius `r > 3M`, for which `∂H/∂r = 0`.
    pub fn circular_orbit_initial_conditions(&self, r: f64) -> Result<PhaseState> {
        let mm = self.params.mass;
        let m = self.params.particle_mass;
        if !(r > 3.0 * mm) {
            return Err(Error::InvalidParameter(format!(
                "circular orbits need r > 3M = {}, got {r}",
                3.0 * mm
            )));
        }
        let l = m * (mm * r * r / (r - 3.0 * mm)).sqrt();
        let en = m * (r - 2.0 * mm) / (r * (r - 3.0 * mm)).sqrt();
        PhaseState::new(vec![0.0, r, 0.0], vec![en, 0.0, -l], 0.0)
    }

    fn solve_p_t(&self, r: f64, p_r: f64, p_phi: f64, m: f64) -> Result<f64> {
        let f = 1.0 - 2.0 * self.params.mass / r;
        let sq = f * (m * m + f * p_r * p_r + p_phi * p_phi / (r * r));
        if !(sq > 0.0) || !sq.is_finite() {
            return Err(Error::NoRealRoot(format!(
                "p_t² = {sq} at r = {r}, p_r = {p_r}, p_φ = {p_phi}"
            )));
        }
        Ok(sq.sqrt())
    }
}

impl HamiltonianSystem for Schwarzschild {
    fn dim(&self) -> usize {
        3
    }

    fn value(&self, q: &[f64], p: &[f64]) -> f64 {
        let r = q[1];
        if !(r > 2.0 * self.params.mass) {
            return f64::NAN;
        }
        let f = 1.0 - 2.0 * self.params.mass / r;
        0.5 * (p[0] * p[0] / f - f * p[1] * p[1] - p[2] * p[2] / (r * r))
    }

    fn grad_q(&self, q: &[f64], p: &[f64]) -> Vec<f64> {
        let r = q[1];
        let mm = self.params.mass;
        if !(r > 2.0 * mm) {
            return vec![0.0, f64::NAN, 0.0];
        }
        let f = 1.0 - 2.0 * mm / r;
        let df = 2.0 * mm / (r * r);
        let dr = 0.5
            * (-p[0] * p[0] * df / (f * f) - df * p[1] * p[1]
                + 2.0 * p[2] * p[2] / (r * r * r));
        vec![0.0, dr, 0.0]
    }

    fn grad_p(&self, q: &[f64], p: &[f64]) -> Vec<f64> {
        let r = q[1];
        let f = 1.0 - 2.0 * self.params.mass / r;
        if !(r > 2.0 * self.params.mass) {
            return vec![f64::NAN; 3];
        }
        vec![p[0] / f, -f * p[1], -p[2] / (r * r)]
    }
}
