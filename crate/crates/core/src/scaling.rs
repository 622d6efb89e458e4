//! Conversion between physical units and the scaled variables used internally.
//!
//! Horizontal lengths (and elevations) scale with `L`, flow thickness with
//! `H`, time with `sqrt(L/g)` and velocity with `sqrt(g L)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const STANDARD_GRAVITY: f64 = 9.80665;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScalingConfig {
    /// Horizontal length scale [m].
    pub length: f64,
    /// Thickness scale [m].
    pub thickness: f64,
    /// Gravitational acceleration [m/s²].
    pub gravity: f64,
}

impl Default for ScalingConfig {
    fn default() -> Self {
        Self {
            length: 1.0,
            thickness: 1.0,
            gravity: STANDARD_GRAVITY,
        }
    }
}

impl ScalingConfig {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("L", self.length),
            ("H", self.thickness),
            ("g", self.gravity),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::Config(format!("{name} must be > 0, got {v}")));
            }
        }
        Ok(())
    }

    /// Aspect ratio `H / L`.
    pub fn epsilon(&self) -> f64 {
        self.thickness / self.length
    }

    pub fn time_unit(&self) -> f64 {
        (self.length / self.gravity).sqrt()
    }

    pub fn velocity_unit(&self) -> f64 {
        (self.gravity * self.length).sqrt()
    }

    pub fn length_to_scaled(&self, meters: f64) -> f64 {
        meters / self.length
    }

    pub fn thickness_to_scaled(&self, meters: f64) -> f64 {
        meters / self.thickness
    }

    pub fn thickness_to_physical(&self, scaled: f64) -> f64 {
        scaled * self.thickness
    }

    pub fn time_to_scaled(&self, seconds: f64) -> f64 {
        seconds / self.time_unit()
    }

    pub fn time_to_physical(&self, scaled: f64) -> f64 {
        scaled * self.time_unit()
    }

    pub fn velocity_to_scaled(&self, m_per_s: f64) -> f64 {
        m_per_s / self.velocity_unit()
    }

    pub fn velocity_to_physical(&self, scaled: f64) -> f64 {
        scaled * self.velocity_unit()
    }

    /// Physical volume [m³] of a scaled `J h ΔξΔη` mass.
    pub fn volume_to_physical(&self, scaled: f64) -> f64 {
        scaled * self.thickness * self.length * self.length
    }
}
