// SPDX-License-Identifier: Apache-2.0

//! Conversion between device parameters and the dimensionless simulation units.
//!
//! Time is measured in `1/ω` with `ω = 2πf`, temperature as `k_B T / ħω`.
//! The device frequency is an ordinary frequency in hertz, so `ħω = h f`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Boltzmann constant, J/K (exact SI value).
pub const BOLTZMANN: f64 = 1.380649e-23;
/// Planck constant, J·s (exact SI value).
pub const PLANCK: f64 = 6.62607015e-34;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhysicalParams {
    /// Fundamental frequency `f` in Hz.
    pub frequency_hz: f64,
    pub temperature_k: f64,
    pub q_factor: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Dimensionless {
    /// `k_B T / ħω`.
    pub temperature: f64,
    /// Energy damping rate per unit dimensionless time, `1/Q`.
    pub damping_rate: f64,
    /// Seconds per unit of dimensionless time, `1/(2πf)`.
    pub time_unit_seconds: f64,
}

impl PhysicalParams {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("physical.frequency_hz", self.frequency_hz),
            ("physical.temperature_k", self.temperature_k),
            ("physical.q_factor", self.q_factor),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::param(name, format!("must be finite and > 0, got {v}")));
            }
        }
        Ok(())
    }
}

pub fn to_dimensionless(p: &PhysicalParams) -> Result<Dimensionless> {
    p.validate()?;
    Ok(Dimensionless {
        temperature: BOLTZMANN * p.temperature_k / (PLANCK * p.frequency_hz),
        damping_rate: 1.0 / p.q_factor,
        time_unit_seconds: 1.0 / (2.0 * PI * p.frequency_hz),
    })
}

pub fn from_dimensionless(d: &Dimensionless) -> Result<PhysicalParams> {
    for (name, v) in
        [("temperature", d.temperature), ("damping_rate", d.damping_rate), ("time_unit_seconds", d.time_unit_seconds)]
    {
        if !(v > 0.0 && v.is_finite()) {
            return Err(Error::param(name, format!("must be finite and > 0, got {v}")));
        }
    }
    let frequency_hz = 1.0 / (2.0 * PI * d.time_unit_seconds);
    Ok(PhysicalParams {
        frequency_hz,
        temperature_k: d.temperature * PLANCK * frequency_hz / BOLTZMANN,
        q_factor: 1.0 / d.damping_rate,
    })
}
