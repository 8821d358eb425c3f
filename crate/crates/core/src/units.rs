//! Physical scales and energy-unit conversion.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Result, SusyError};

/// Hartree to wavenumber conversion factor (CODATA 2018).
pub const HARTREE_TO_CM1: f64 = 219_474.631_363_2;

/// Proton mass in electron masses, used for the hydrogen-transfer double well.
pub const PROTON_MASS_AU: f64 = 1_837.152_646;

/// The pair (ħ, m) and the composite charge scale λ = ħ/√(2m).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelUnits {
    hbar: f64,
    mass: f64,
}

impl ModelUnits {
    pub fn new(hbar: f64, mass: f64) -> Result<Self> {
        if !(hbar.is_finite() && hbar > 0.0) {
            return Err(SusyError::InvalidUnits(format!("hbar must be positive, got {hbar}")));
        }
        if !(mass.is_finite() && mass > 0.0) {
            return Err(SusyError::InvalidUnits(format!("mass must be positive, got {mass}")));
        }
        Ok(Self { hbar, mass })
    }

    /// ħ = 1 and m = 1/2, so that λ = 1 and ħ²/2m = 1.
    pub fn scaled() -> Self {
        Self { hbar: 1.0, mass: 0.5 }
    }

    /// Atomic units (ħ = 1) for a particle of the given mass in electron masses.
    pub fn atomic(mass: f64) -> Result<Self> {
        Self::new(1.0, mass)
    }

    pub fn hbar(&self) -> f64 {
        self.hbar
    }

    pub fn mass(&self) -> f64 {
        self.mass
    }

    /// λ = ħ/√(2m).
    pub fn lambda(&self) -> f64 {
        self.hbar / (2.0 * self.mass).sqrt()
    }

    /// λ² = ħ²/2m, the prefactor of the kinetic operator.
    pub fn kinetic_scale(&self) -> f64 {
        self.hbar * self.hbar / (2.0 * self.mass)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum EnergyUnit {
    #[serde(rename = "hartree")]
    Hartree,
    #[serde(rename = "cm-1")]
    Wavenumber,
}

impl FromStr for EnergyUnit {
    type Err = SusyError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "hartree" | "eh" | "au" => Ok(EnergyUnit::Hartree),
            "cm-1" | "cm^-1" | "wavenumber" => Ok(EnergyUnit::Wavenumber),
            other => Err(SusyError::UnsupportedUnit(other.to_string())),
        }
    }
}

impl fmt::Display for EnergyUnit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EnergyUnit::Hartree => f.write_str("hartree"),
            EnergyUnit::Wavenumber => f.write_str("cm-1"),
        }
    }
}

pub fn unit_convert(value: f64, from: EnergyUnit, to: EnergyUnit) -> f64 {
    match (from, to) {
        (EnergyUnit::Hartree, EnergyUnit::Wavenumber) => value * HARTREE_TO_CM1,
        (EnergyUnit::Wavenumber, EnergyUnit::Hartree) => value / HARTREE_TO_CM1,
        _ => value,
    }
}

/// String-keyed variant of [`unit_convert`] for configuration front ends.
pub fn unit_convert_named(value: f64, from: &str, to: &str) -> Result<f64> {
    Ok(unit_convert(value, from.parse()?, to.parse()?))
}
