//! Incident plane wave E₀(x) = 𝓔 exp(ik α·x).

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::vector::{CVec3, Vec3, C64, I};

/// Speed of light in cm/s.
pub const SPEED_OF_LIGHT: f64 = 3.0e10;
/// Reference frequency in Hz.
pub const REFERENCE_OMEGA: f64 = 5.0e14;
/// Reference wavelength in cm.
pub const REFERENCE_WAVELENGTH: f64 = 6.0e-5;

/// Plane electromagnetic wave illuminating the scatterers.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IncidentWave {
    amplitude: Vec3,
    direction: Vec3,
    k: f64,
    omega: f64,
    mu: f64,
    epsilon: f64,
}

impl IncidentWave {
    /// Builds a wave, checking |α| = 1, 𝓔·α = 0 and k > 0.
    pub fn new(amplitude: Vec3, direction: Vec3, k: f64, omega: f64, mu: f64, epsilon: f64) -> Result<Self> {
        let alpha_norm = direction.norm();
        if (alpha_norm - 1.0).abs() > 1e-12 {
            return Err(invalid(format!("direction must be a unit vector, |alpha| = {alpha_norm}")));
        }
        if !(k > 0.0 && k.is_finite()) {
            return Err(invalid(format!("wavenumber must be positive, got {k}")));
        }
        let transverse = amplitude.dot(direction).abs();
        if transverse > 1e-12 * amplitude.norm().max(f64::MIN_POSITIVE) {
            return Err(invalid(format!(
                "amplitude must be transverse to the direction, E.alpha = {transverse:e}"
            )));
        }
        if !(omega > 0.0 && mu > 0.0 && epsilon > 0.0) {
            return Err(invalid("omega, mu and epsilon must be positive"));
        }
        Ok(Self { amplitude, direction, k, omega, mu, epsilon })
    }

    /// The reference configuration: 𝓔 = (1,0,0), α = (0,1,0), k = 2π/λ with
    /// λ = 6e-5 cm, ω = 5e14 Hz, μ = ε = 1.
    pub fn reference() -> Self {
        Self::new(
            Vec3::new(1.0, 0.0, 0.0),
            Vec3::new(0.0, 1.0, 0.0),
            2.0 * std::f64::consts::PI / REFERENCE_WAVELENGTH,
            REFERENCE_OMEGA,
            1.0,
            1.0,
        )
        .expect("reference wave is valid")
    }

    pub fn with_amplitude(&self, amplitude: Vec3) -> Result<Self> {
        Self::new(amplitude, self.direction, self.k, self.omega, self.mu, self.epsilon)
    }

    pub fn with_wavenumber(&self, k: f64) -> Result<Self> {
        Self::new(self.amplitude, self.direction, k, self.omega, self.mu, self.epsilon)
    }

    pub fn amplitude(&self) -> Vec3 {
        self.amplitude
    }

    pub fn direction(&self) -> Vec3 {
        self.direction
    }

    pub fn wavenumber(&self) -> f64 {
        self.k
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    fn phase(&self, x: Vec3) -> C64 {
        (I * (self.k * self.direction.dot(x))).exp()
    }

    /// E₀(x) = 𝓔 exp(ik α·x).
    pub fn e0(&self, x: Vec3) -> CVec3 {
        self.amplitude.to_complex() * self.phase(x)
    }

    /// ∇×E₀(x) = ik (α×𝓔) exp(ik α·x).
    pub fn curl_e0(&self, x: Vec3) -> CVec3 {
        self.direction.cross(self.amplitude).to_complex() * (I * self.k * self.phase(x))
    }

    /// Incident magnetic field ∇×E₀/(iωμ).
    pub fn h0(&self, x: Vec3) -> CVec3 {
        self.curl_e0(x) * (C64::new(1.0, 0.0) / (I * self.omega * self.mu))
    }
}
