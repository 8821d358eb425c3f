//! Analytic potentials evaluated pointwise, with first and second derivatives.

use std::fmt;
use std::sync::Arc;

use crate::grid::{Grid1D, RealField};

/// A smooth 1D potential known in closed form.
pub trait Potential: Send + Sync {
    fn value(&self, x: f64) -> f64;
    fn derivative(&self, x: f64) -> f64;
    fn second_derivative(&self, x: f64) -> f64;

    fn sample(&self, grid: &Grid1D) -> RealField {
        grid.sample(|x| self.value(x))
    }
}

impl<P: Potential + ?Sized> Potential for Arc<P> {
    fn value(&self, x: f64) -> f64 {
        (**self).value(x)
    }
    fn derivative(&self, x: f64) -> f64 {
        (**self).derivative(x)
    }
    fn second_derivative(&self, x: f64) -> f64 {
        (**self).second_derivative(x)
    }
}

impl<P: Potential + ?Sized> Potential for &P {
    fn value(&self, x: f64) -> f64 {
        (**self).value(x)
    }
    fn derivative(&self, x: f64) -> f64 {
        (**self).derivative(x)
    }
    fn second_derivative(&self, x: f64) -> f64 {
        (**self).second_derivative(x)
    }
}

/// `Σ coeffs[k] x^k`.
#[derive(Clone, Debug, PartialEq)]
pub struct Polynomial {
    coeffs: Vec<f64>,
}

impl Polynomial {
    pub fn new(coeffs: Vec<f64>) -> Self {
        Self { coeffs }
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    /// The coefficients of the derivative polynomial.
    pub fn derivative_poly(&self) -> Polynomial {
        let c = self.coeffs.iter().enumerate().skip(1).map(|(k, &c)| k as f64 * c).collect();
        Polynomial::new(c)
    }

    fn eval(coeffs: &[f64], x: f64) -> f64 {
        coeffs.iter().rev().fold(0.0, |acc, &c| acc * x + c)
    }

    /// V = x² with λ = 1 units in mind; the harmonic reference problem.
    pub fn harmonic() -> Self {
        Self::new(vec![0.0, 0.0, 1.0])
    }

    /// V₁ = x⁶ + 4x⁴ + x² − 2, whose ground energy is exactly 0 for λ = 1.
    pub fn sextic() -> Self {
        Self::new(vec![-2.0, 0.0, 1.0, 0.0, 4.0, 0.0, 1.0])
    }

    /// Symmetric quartic double well a x⁴ − b x² + e0.
    pub fn quartic_double_well(a: f64, b: f64, e0: f64) -> Self {
        Self::new(vec![e0, 0.0, -b, 0.0, a])
    }
}

impl Potential for Polynomial {
    fn value(&self, x: f64) -> f64 {
        Self::eval(&self.coeffs, x)
    }

    fn derivative(&self, x: f64) -> f64 {
        let mut acc = 0.0;
        for (k, &c) in self.coeffs.iter().enumerate().skip(1).rev() {
            acc = acc * x + k as f64 * c;
        }
        acc
    }

    fn second_derivative(&self, x: f64) -> f64 {
        let mut acc = 0.0;
        for (k, &c) in self.coeffs.iter().enumerate().skip(2).rev() {
            acc = acc * x + (k * (k - 1)) as f64 * c;
        }
        acc
    }
}

/// A potential given by closures for the value and its two derivatives.
#[derive(Clone)]
pub struct FnPotential {
    v: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    dv: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    d2v: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
}

impl FnPotential {
    pub fn new(
        v: impl Fn(f64) -> f64 + Send + Sync + 'static,
        dv: impl Fn(f64) -> f64 + Send + Sync + 'static,
        d2v: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Self { v: Arc::new(v), dv: Arc::new(dv), d2v: Arc::new(d2v) }
    }
}

impl fmt::Debug for FnPotential {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("FnPotential")
    }
}

impl Potential for FnPotential {
    fn value(&self, x: f64) -> f64 {
        (self.v)(x)
    }
    fn derivative(&self, x: f64) -> f64 {
        (self.dv)(x)
    }
    fn second_derivative(&self, x: f64) -> f64 {
        (self.d2v)(x)
    }
}

/// A superpotential known in closed form together with its derivative.
pub trait AnalyticSuperpotential: Send + Sync {
    fn w(&self, x: f64) -> f64;
    fn dw(&self, x: f64) -> f64;
}

/// Polynomial superpotential, e.g. `W = x` or `W = x³ + 2x`.
#[derive(Clone, Debug, PartialEq)]
pub struct PolynomialW(pub Polynomial);

impl AnalyticSuperpotential for PolynomialW {
    fn w(&self, x: f64) -> f64 {
        self.0.value(x)
    }
    fn dw(&self, x: f64) -> f64 {
        self.0.derivative(x)
    }
}

/// `W = offset + amplitude · tanh(scale · x)`; bounded, with levels offset ∓ amplitude.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TanhW {
    pub offset: f64,
    pub amplitude: f64,
    pub scale: f64,
}

impl AnalyticSuperpotential for TanhW {
    fn w(&self, x: f64) -> f64 {
        self.offset + self.amplitude * (self.scale * x).tanh()
    }
    fn dw(&self, x: f64) -> f64 {
        let s = 1.0 / (self.scale * x).cosh();
        self.amplitude * self.scale * s * s
    }
}
