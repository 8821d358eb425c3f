//! Closed-form double-well models and the semiclassical splitting estimate.

use crate::grid::{Grid1D, RealField};
use crate::potential::{AnalyticSuperpotential, Polynomial};
use crate::units::{unit_convert, EnergyUnit, ModelUnits};

use super::superpotential::SuperPotential;

/// Quartic double well `a x⁴ − b x² + e0` with coefficients given in cm⁻¹
/// (a per bohr⁴, b per bohr²).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuarticDoubleWell {
    pub a_cm1: f64,
    pub b_cm1: f64,
    pub e0_cm1: f64,
}

impl QuarticDoubleWell {
    /// The hydrogen-transfer model: minima at ±1 bohr, barrier 438.9 cm⁻¹.
    pub fn reference() -> Self {
        Self { a_cm1: 438.9, b_cm1: 877.8, e0_cm1: -181.1 }
    }

    /// The potential in hartree.
    pub fn potential(&self) -> Polynomial {
        let c = |v| unit_convert(v, EnergyUnit::Wavenumber, EnergyUnit::Hartree);
        Polynomial::quartic_double_well(c(self.a_cm1), c(self.b_cm1), c(self.e0_cm1))
    }

    /// Barrier top V(0) in hartree.
    pub fn barrier_top(&self) -> f64 {
        unit_convert(self.e0_cm1, EnergyUnit::Wavenumber, EnergyUnit::Hartree)
    }

    pub fn minima(&self) -> f64 {
        (self.b_cm1 / (2.0 * self.a_cm1)).sqrt()
    }
}

/// Superpotential of the two-Gaussian ansatz ψ ∝ e^{−β(x−x₀)²} + e^{−β(x+x₀)²}:
/// `W = 2λβ (x − x₀ tanh(2βx₀x))`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GaussianPairW {
    pub beta: f64,
    pub x0: f64,
    pub lambda: f64,
}

impl AnalyticSuperpotential for GaussianPairW {
    fn w(&self, x: f64) -> f64 {
        2.0 * self.lambda * self.beta * (x - self.x0 * (2.0 * self.beta * self.x0 * x).tanh())
    }

    fn dw(&self, x: f64) -> f64 {
        let s = 1.0 / (2.0 * self.beta * self.x0 * x).cosh();
        2.0 * self.lambda * self.beta * (1.0 - 2.0 * self.beta * self.x0 * self.x0 * s * s)
    }
}

/// W, V₁ = W² − λW′ and V₂ = W² + λW′ of the two-Gaussian model, evaluated
/// analytically on `grid`.
pub fn gaussian_doublewell_model(
    beta: f64,
    x0: f64,
    units: ModelUnits,
    grid: &Grid1D,
) -> (SuperPotential, RealField, RealField) {
    assert!(beta > 0.0, "beta must be positive");
    let lam = units.lambda();
    let model = GaussianPairW { beta, x0, lambda: lam };
    let w = SuperPotential::from_analytic(grid, &model, units);
    let v1 = grid.sample(|x| model.w(x).powi(2) - lam * model.dw(x));
    let v2 = grid.sample(|x| model.w(x).powi(2) + lam * model.dw(x));
    (w, v1, v2)
}

/// Normalized Gaussian (2β/π)^{1/4} e^{−β(x−x₀)²} localized in the right well.
pub fn localized_gaussian(beta: f64, x0: f64) -> impl Fn(f64) -> f64 {
    let norm = (2.0 * beta / std::f64::consts::PI).powf(0.25);
    move |x| norm * (-beta * (x - x0).powi(2)).exp()
}

/// δ = 4(ħ²/m) φ₀(0) φ₀′(0), with φ₀′ from a centered difference of step 1e−5.
pub fn semiclassical_splitting<F: Fn(f64) -> f64 + ?Sized>(phi0: &F, units: &ModelUnits) -> f64 {
    const STEP: f64 = 1e-5;
    let slope = (phi0(STEP) - phi0(-STEP)) / (2.0 * STEP);
    4.0 * units.hbar().powi(2) / units.mass() * phi0(0.0) * slope
}

/// Closed form of [`semiclassical_splitting`] for [`localized_gaussian`].
pub fn gaussian_splitting_closed_form(beta: f64, x0: f64, units: &ModelUnits) -> f64 {
    4.0 * units.hbar().powi(2) / units.mass()
        * (2.0 * beta / std::f64::consts::PI).sqrt()
        * 2.0
        * beta
        * x0
        * (-2.0 * beta * x0 * x0).exp()
}
