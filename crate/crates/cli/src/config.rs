//! Experiment configuration files (JSON, schema version 1; see CONFIG.md).

use std::fmt;
use std::path::PathBuf;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use susyqm_core::gmm::OptimizerConfig;
use susyqm_core::grid::Grid1D;
use susyqm_core::potential::{AnalyticSuperpotential, Polynomial, PolynomialW, Potential, TanhW};
use susyqm_core::{unit_convert, EnergyUnit, ModelUnits};

use crate::failure::Failure;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    Convergence,
    DoubleWell,
    Scatter,
    Tensor2d,
    Propagate,
    Hierarchy,
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            Experiment::Convergence => "convergence",
            Experiment::DoubleWell => "double-well",
            Experiment::Scatter => "scatter",
            Experiment::Tensor2d => "tensor2d",
            Experiment::Propagate => "propagate",
            Experiment::Hierarchy => "hierarchy",
        };
        f.write_str(name)
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub schema_version: u32,
    pub experiment: Experiment,
    pub potential: PotentialSpec,
    #[serde(default)]
    pub units: UnitsSpec,
    pub grid: GridSpec,
    #[serde(default)]
    pub optimizer: OptimizerSpec,
    /// Experiment-specific settings, checked by the experiment itself.
    #[serde(default)]
    pub parameters: serde_json::Map<String, serde_json::Value>,
    #[serde(default)]
    pub outputs: OutputSpec,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PotentialName {
    /// V = Σ c_k x^k.
    Polynomial,
    /// V = a x⁴ − b x² + e0 from `[a, b, e0]`.
    QuarticDoubleWell,
    /// W = Σ c_k x^k; V₁ = W² − λW′.
    PolynomialSuperpotential,
    /// W = offset + amplitude·tanh(scale·x) from `[offset, amplitude, scale]`.
    TanhSuperpotential,
    /// V = cx x² + cy y² + cxy x²y² from `[cx, cy, cxy]`.
    #[serde(rename = "anharmonic-2d")]
    Anharmonic2d,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PotentialSpec {
    pub name: PotentialName,
    pub coefficients: Vec<f64>,
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct UnitsSpec {
    pub hbar: f64,
    /// Mass in electron masses.
    pub mass: f64,
    /// Potential coefficients are given in cm⁻¹; reported energies are cm⁻¹ too.
    pub wavenumber_inputs: bool,
}

impl Default for UnitsSpec {
    fn default() -> Self {
        Self { hbar: 1.0, mass: 0.5, wavenumber_inputs: false }
    }
}

impl UnitsSpec {
    pub fn model_units(&self) -> Result<ModelUnits, Failure> {
        Ok(ModelUnits::new(self.hbar, self.mass)?)
    }

    pub fn energy_unit(&self) -> EnergyUnit {
        if self.wavenumber_inputs {
            EnergyUnit::Wavenumber
        } else {
            EnergyUnit::Hartree
        }
    }

    /// Convert an internal (hartree) energy to the reporting unit.
    pub fn report(&self, e: f64) -> f64 {
        unit_convert(e, EnergyUnit::Hartree, self.energy_unit())
    }
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub x_min: f64,
    pub x_max: f64,
    pub points: usize,
}

impl GridSpec {
    pub fn grid(&self) -> Result<Grid1D, Failure> {
        Ok(Grid1D::new(self.x_min, self.x_max, self.points)?)
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.x_min, self.x_max)
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OptimizerPreset {
    Default,
    #[default]
    HighPrecision,
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OptimizerSpec {
    pub preset: OptimizerPreset,
    /// Field-by-field overrides of the preset.
    pub overrides: serde_json::Map<String, serde_json::Value>,
}

impl OptimizerSpec {
    pub fn config(&self, seed: Option<u64>) -> Result<OptimizerConfig, Failure> {
        let base = match self.preset {
            OptimizerPreset::Default => OptimizerConfig::default(),
            OptimizerPreset::HighPrecision => OptimizerConfig::high_precision(),
        };
        let mut value = serde_json::to_value(base).map_err(|e| Failure::config(e.to_string()))?;
        if let serde_json::Value::Object(map) = &mut value {
            for (k, v) in &self.overrides {
                map.insert(k.clone(), v.clone());
            }
        }
        let mut cfg: OptimizerConfig = serde_json::from_value(value).map_err(|e| Failure::config(format!("optimizer: {e}")))?;
        if let Some(s) = seed {
            cfg.seed = s;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputSpec {
    pub directory: PathBuf,
}

impl Default for OutputSpec {
    fn default() -> Self {
        Self { directory: PathBuf::from("out") }
    }
}

pub type Sampler = Box<dyn Fn(f64) -> f64 + Send + Sync>;

/// A one-dimensional potential resolved from its spec, in hartree.
pub enum Resolved1D {
    Potential(Polynomial),
    Superpotential(Box<dyn AnalyticSuperpotential>),
}

fn expect_len(spec: &PotentialSpec, n: usize) -> Result<(), Failure> {
    if spec.coefficients.len() != n {
        return Err(Failure::config(format!("potential {:?} takes {n} coefficients, got {}", spec.name, spec.coefficients.len())));
    }
    Ok(())
}

impl PotentialSpec {
    fn check_finite(&self) -> Result<(), Failure> {
        if self.coefficients.is_empty() || self.coefficients.iter().any(|c| !c.is_finite()) {
            return Err(Failure::config("potential coefficients must be finite and non-empty"));
        }
        Ok(())
    }

    pub fn resolve_1d(&self, units: &UnitsSpec) -> Result<Resolved1D, Failure> {
        self.check_finite()?;
        let scale = |c: f64| if units.wavenumber_inputs { unit_convert(c, EnergyUnit::Wavenumber, EnergyUnit::Hartree) } else { c };
        let superpotential = |r: Resolved1D| {
            if units.wavenumber_inputs {
                Err(Failure::config("wavenumber_inputs applies to potentials, not superpotentials"))
            } else {
                Ok(r)
            }
        };
        match self.name {
            PotentialName::Polynomial => Ok(Resolved1D::Potential(Polynomial::new(self.coefficients.iter().map(|&c| scale(c)).collect()))),
            PotentialName::QuarticDoubleWell => {
                expect_len(self, 3)?;
                let c = &self.coefficients;
                if !(c[0] > 0.0 && c[1] > 0.0) {
                    return Err(Failure::config("quartic double well needs a > 0 and b > 0"));
                }
                Ok(Resolved1D::Potential(Polynomial::quartic_double_well(scale(c[0]), scale(c[1]), scale(c[2]))))
            }
            PotentialName::PolynomialSuperpotential => {
                superpotential(Resolved1D::Superpotential(Box::new(PolynomialW(Polynomial::new(self.coefficients.clone())))))
            }
            PotentialName::TanhSuperpotential => {
                expect_len(self, 3)?;
                let c = &self.coefficients;
                superpotential(Resolved1D::Superpotential(Box::new(TanhW { offset: c[0], amplitude: c[1], scale: c[2] })))
            }
            PotentialName::Anharmonic2d => Err(Failure::config("anharmonic-2d is a two-dimensional potential")),
        }
    }

    /// Sampler of the sector-1 potential: V itself, or W² − λW′ for a superpotential.
    pub fn sampler_1d(&self, units: &UnitsSpec, model: &ModelUnits) -> Result<Sampler, Failure> {
        let lam = model.lambda();
        Ok(match self.resolve_1d(units)? {
            Resolved1D::Potential(p) => Box::new(move |x| p.value(x)),
            Resolved1D::Superpotential(w) => Box::new(move |x| w.w(x).powi(2) - lam * w.dw(x)),
        })
    }

    pub fn polynomial_1d(&self, units: &UnitsSpec) -> Result<Polynomial, Failure> {
        match self.resolve_1d(units)? {
            Resolved1D::Potential(p) => Ok(p),
            Resolved1D::Superpotential(_) => {
                Err(Failure::config(format!("this experiment needs a potential, got {:?}", self.name)))
            }
        }
    }

    pub fn superpotential_1d(&self, units: &UnitsSpec) -> Result<Box<dyn AnalyticSuperpotential>, Failure> {
        match self.resolve_1d(units)? {
            Resolved1D::Superpotential(w) => Ok(w),
            Resolved1D::Potential(_) => {
                Err(Failure::config(format!("this experiment needs a superpotential, got {:?}", self.name)))
            }
        }
    }

    /// `[cx, cy, cxy]` of an anharmonic-2d potential, in hartree.
    pub fn anharmonic_2d(&self, units: &UnitsSpec) -> Result<[f64; 3], Failure> {
        self.check_finite()?;
        if self.name != PotentialName::Anharmonic2d {
            return Err(Failure::config(format!("this experiment needs anharmonic-2d, got {:?}", self.name)));
        }
        expect_len(self, 3)?;
        let c = &self.coefficients;
        if !(c[0] > 0.0 && c[1] > 0.0 && c[2] >= 0.0) {
            return Err(Failure::config("anharmonic-2d needs cx > 0, cy > 0 and cxy >= 0"));
        }
        let s = |v: f64| if units.wavenumber_inputs { unit_convert(v, EnergyUnit::Wavenumber, EnergyUnit::Hartree) } else { v };
        Ok([s(c[0]), s(c[1]), s(c[2])])
    }
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self, Failure> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| Failure::config(e.to_string()))?;
        if cfg.schema_version != SCHEMA_VERSION {
            return Err(Failure::config(format!(
                "unsupported schema_version {} (this build reads {SCHEMA_VERSION})",
                cfg.schema_version
            )));
        }
        Ok(cfg)
    }

    /// Experiment parameters with defaults for missing fields.
    pub fn parameters<T: DeserializeOwned>(&self) -> Result<T, Failure> {
        serde_json::from_value(serde_json::Value::Object(self.parameters.clone()))
            .map_err(|e| Failure::config(format!("parameters: {e}")))
    }
}
