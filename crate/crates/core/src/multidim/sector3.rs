use crate::error::{Result, SusyError};
use crate::units::ModelUnits;

use super::grid2d::{Axis, Field2D, VectorField2};
use super::scalar::ScalarHamiltonian2D;
use super::vector::differentiate_along;

/// Smallest allowed |component|, relative to that component's maximum.
pub const COMPONENT_FLOOR: f64 = 1e-10;

/// Sector-2 vector superpotential W_{2μ} = −λ∂_μ ln ψ_{0μ}, one component per
/// axis, chosen so that A⃗₂·ψ⃗₀ = 0.
fn sector2_superpotential(v0: &VectorField2, units: &ModelUnits) -> Result<[Vec<f64>; 2]> {
    let lam = units.lambda();
    let g = v0.grid();
    let mut out = [Vec::new(), Vec::new()];
    for (slot, axis) in out.iter_mut().zip(Axis::BOTH) {
        let c = v0.component(axis);
        let max = c.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        let sign = c.iter().find(|v| v.abs() == max).map_or(1.0, |v| v.signum());
        let component = match axis {
            Axis::X => "x",
            Axis::Y => "y",
        };
        if max == 0.0 || c.iter().any(|&v| sign * v <= COMPONENT_FLOOR * max) {
            return Err(SusyError::VanishingComponent { component });
        }
        let l: Vec<f64> = c.iter().map(|v| v.abs().ln()).collect();
        *slot = differentiate_along(g, &l, axis).into_iter().map(|d| -lam * d).collect();
    }
    Ok(out)
}

/// H₃ = A⃗₂·A⃗₂⁺ + E₀⁽²⁾ = −λ²∇² + Σ_μ (W_{2μ}² + λ∂_μW_{2μ}) + E₀⁽²⁾, built from
/// a sector-2 vector state whose components are both nodeless.
pub fn sector3_hamiltonian(v0: &VectorField2, e02: f64, units: &ModelUnits) -> Result<ScalarHamiltonian2D> {
    let g = v0.grid();
    let lam = units.lambda();
    let w2 = sector2_superpotential(v0, units)?;
    let mut u = vec![e02; g.len()];
    for (w, axis) in w2.iter().zip(Axis::BOTH) {
        let dw = differentiate_along(g, w, axis);
        u.iter_mut().zip(w.iter().zip(&dw)).for_each(|(u, (w, d))| *u += w * w + lam * d);
    }
    Ok(ScalarHamiltonian2D::new(&Field2D::new(g, u)?, units))
}

/// ‖A⃗₂·ψ⃗₀‖ / ‖ψ⃗₀‖ with A_{2μ} = λD_μ + W_{2μ}.
/// Derivatives are boundary-closed, matching the construction of W₂.
pub fn sector2_annihilation(v0: &VectorField2, units: &ModelUnits) -> Result<f64> {
    let g = v0.grid();
    let lam = units.lambda();
    let w2 = sector2_superpotential(v0, units)?;
    let mut total = vec![0.0; g.len()];
    for (w, axis) in w2.iter().zip(Axis::BOTH) {
        let c = v0.component(axis);
        let d = differentiate_along(g, c, axis);
        total.iter_mut().zip(d.iter().zip(w.iter().zip(c))).for_each(|(t, (d, (w, c)))| *t += lam * d + w * c);
    }
    Ok(Field2D::new(g, total)?.norm() / v0.norm())
}
