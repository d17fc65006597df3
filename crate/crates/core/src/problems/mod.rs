//! Concrete test systems.

mod harmonic;
mod schwarzschild;
mod vdp;

pub use harmonic::HarmonicOscillator;
pub use schwarzschild::{pericenter_precession_estimate, Schwarzschild, SchwarzschildParams};
pub use vdp::{VanDerPol, VdpParams};
