use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Physical constants entering the dynamics. Natural units (both 1) by
/// default; every formula carries them symbolically.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhysicalConstants {
    pub hbar: f64,
    pub mass: f64,
}

impl Default for PhysicalConstants {
    fn default() -> Self {
        Self {
            hbar: 1.0,
            mass: 1.0,
        }
    }
}

impl PhysicalConstants {
    pub fn new(hbar: f64, mass: f64) -> Result<Self> {
        if !(hbar > 0.0) || !hbar.is_finite() {
            return Err(Error::invalid(format!("hbar must be positive, got {hbar}")));
        }
        if !(mass > 0.0) || !mass.is_finite() {
            return Err(Error::invalid(format!("mass must be positive, got {mass}")));
        }
        Ok(Self { hbar, mass })
    }

    /// Nelson diffusion coefficient hbar / 2m.
    pub fn nelson_diffusion(&self) -> f64 {
        self.hbar / (2.0 * self.mass)
    }
}
