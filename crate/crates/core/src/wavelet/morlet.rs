use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Morlet mother wavelet parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MorletSpec {
    pub omega0: f64,
    /// Use the unit-energy amplitude `pi^(-1/4)`; otherwise the amplitude is 1.
    pub energy_normalization: bool,
}

impl Default for MorletSpec {
    fn default() -> Self {
        Self {
            omega0: 6.0,
            energy_normalization: true,
        }
    }
}

impl MorletSpec {
    pub fn new(omega0: f64) -> Result<Self> {
        let spec = Self {
            omega0,
            ..Self::default()
        };
        spec.validate()?;
        Ok(spec)
    }

    /// The zero-mean approximation of the Morlet only holds for `omega0 >= 5`.
    pub fn validate(&self) -> Result<()> {
        if !(self.omega0 >= 5.0) || !self.omega0.is_finite() {
            return Err(Error::Domain(format!("omega0 {} must be >= 5", self.omega0)));
        }
        Ok(())
    }

    pub fn amplitude(&self) -> f64 {
        if self.energy_normalization {
            PI.powf(-0.25)
        } else {
            1.0
        }
    }

    /// Ratio of equivalent Fourier period to wavelet scale, `4 pi / (w0 + sqrt(2 + w0^2))`.
    pub fn fourier_factor(&self) -> f64 {
        4.0 * PI / (self.omega0 + (2.0 + self.omega0 * self.omega0).sqrt())
    }
}

/// `psi(t) = A exp(i w0 t) exp(-t^2 / 2)`.
pub fn morlet_mother(t: f64, spec: &MorletSpec) -> Complex64 {
    let envelope = spec.amplitude() * (-0.5 * t * t).exp();
    Complex64::from_polar(envelope, spec.omega0 * t)
}
