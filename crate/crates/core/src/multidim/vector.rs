use crate::error::{Result, SusyError};
use crate::operators::{central_coefficients, differentiate_values, STENCIL_HALF_WIDTH};
use crate::susy::continue_outside;
use crate::units::ModelUnits;

use super::grid2d::{Axis, Field2D, Grid2D, VectorField2};

/// Density floor below which ln ρ is continued instead of sampled, relative to
/// the density maximum.
pub const VECTOR_DENSITY_FLOOR: f64 = 1e-16;
/// Density level, relative to the maximum, that delimits the support region.
pub const SUPPORT_FLOOR: f64 = 1e-10;

/// Banded antisymmetric derivative along `axis`, the 2D counterpart of
/// [`crate::operators::derivative_matrix`].
pub(crate) fn apply_derivative(grid: &Grid2D, values: &[f64], axis: Axis) -> Vec<f64> {
    let coeffs = central_coefficients(STENCIL_HALF_WIDTH);
    grid.map_lines(values, axis, |g, line| {
        let n = line.len();
        let h = g.spacing();
        (0..n)
            .map(|i| {
                let mut acc = 0.0;
                for (k, &c) in coeffs.iter().enumerate() {
                    let right = if i + k + 1 < n { line[i + k + 1] } else { 0.0 };
                    let left = if i > k { line[i - k - 1] } else { 0.0 };
                    acc += c * (right - left);
                }
                acc / h
            })
            .collect()
    })
}

/// Boundary-closed derivative along `axis`.
pub(crate) fn differentiate_along(grid: &Grid2D, values: &[f64], axis: Axis) -> Vec<f64> {
    grid.map_lines(values, axis, differentiate_values)
}

/// Share of samples in the central box (middle half of each axis) whose density
/// falls below `floor`.
fn central_deficit(g: &Grid2D, rho: &[f64], floor: f64) -> f64 {
    let (nx, ny) = (g.nx(), g.ny());
    let (mut low, mut total) = (0usize, 0usize);
    for i in nx / 4..(3 * nx).div_ceil(4) {
        for j in ny / 4..(3 * ny).div_ceil(4) {
            total += 1;
            if rho[g.index(i, j)] <= floor {
                low += 1;
            }
        }
    }
    low as f64 / total as f64
}

/// Fewest above-floor samples a line needs before it is continued.
const MIN_LINE_SUPPORT: usize = 3;

/// Points whose derivative stencils along both axes touch only sampled values.
fn stencil_sampled(g: &Grid2D, above: &[bool]) -> Vec<bool> {
    let flags: Vec<f64> = above.iter().map(|&a| if a { 1.0 } else { 0.0 }).collect();
    let clean_along = |axis| {
        g.map_lines(&flags, axis, |_, line| {
            let n = line.len();
            (0..n)
                .map(|i| {
                    let lo = i.saturating_sub(STENCIL_HALF_WIDTH);
                    let hi = (i + STENCIL_HALF_WIDTH).min(n - 1);
                    if line[lo..=hi].iter().all(|&f| f == 1.0) { 1.0 } else { 0.0 }
                })
                .collect()
        })
    };
    let cx = clean_along(Axis::X);
    let cy = clean_along(Axis::Y);
    cx.iter().zip(&cy).map(|(a, b)| *a == 1.0 && *b == 1.0).collect()
}

/// Vector superpotential W⃗ = −λ∇ ln ψ₀ with charges A_μ = λ∂_μ + W_μ.
#[derive(Clone, Debug)]
pub struct VectorSuperpotential {
    w: VectorField2,
    /// Points where the generating density exceeds [`SUPPORT_FLOOR`] and every
    /// derivative stencil touches only sampled (not continued) values.
    support: Vec<bool>,
    units: ModelUnits,
}

impl VectorSuperpotential {
    /// Wrap given samples; every point counts as support.
    pub fn new(w: VectorField2, units: ModelUnits) -> Self {
        let support = vec![true; w.grid().len()];
        Self { w, support, units }
    }

    pub fn from_fn<F: Fn(f64, f64) -> (f64, f64)>(grid: &Grid2D, f: F, units: ModelUnits) -> Result<Self> {
        let (x, y): (Vec<f64>, Vec<f64>) = (0..grid.len()).map(|p| {
            let (a, b) = grid.point(p);
            f(a, b)
        }).unzip();
        Ok(Self::new(VectorField2::new(grid, x, y)?, units))
    }

    /// Restrict the support region used by [`scalar_sector1_check`].
    pub fn with_support(mut self, support: Vec<bool>) -> Result<Self> {
        if support.len() != self.grid().len() {
            return Err(SusyError::GridMismatch);
        }
        self.support = support;
        Ok(self)
    }

    pub fn grid(&self) -> &Grid2D {
        self.w.grid()
    }

    pub fn field(&self) -> &VectorField2 {
        &self.w
    }

    pub fn support(&self) -> &[bool] {
        &self.support
    }

    pub fn units(&self) -> &ModelUnits {
        &self.units
    }

    pub fn lambda(&self) -> f64 {
        self.units.lambda()
    }

    /// A_μ ψ.
    pub fn charge(&self, psi: &[f64], axis: Axis) -> Vec<f64> {
        let lam = self.lambda();
        let d = apply_derivative(self.grid(), psi, axis);
        d.iter().zip(psi).zip(self.w.component(axis)).map(|((d, p), w)| lam * d + w * p).collect()
    }

    /// A_μ⁺ ψ = (−λ∂_μ + W_μ) ψ; exact transpose of [`VectorSuperpotential::charge`].
    pub fn adjoint_charge(&self, psi: &[f64], axis: Axis) -> Vec<f64> {
        let lam = self.lambda();
        let d = apply_derivative(self.grid(), psi, axis);
        d.iter().zip(psi).zip(self.w.component(axis)).map(|((d, p), w)| -lam * d + w * p).collect()
    }

    /// A⃗ψ as a vector field.
    pub fn gradient_charge(&self, psi: &Field2D) -> Result<VectorField2> {
        if psi.grid() != self.grid() {
            return Err(SusyError::GridMismatch);
        }
        VectorField2::new(self.grid(), self.charge(psi.values(), Axis::X), self.charge(psi.values(), Axis::Y))
    }

    /// A⃗⁺·v = A_x⁺v_x + A_y⁺v_y.
    pub fn divergence_charge(&self, v: &VectorField2) -> Result<Field2D> {
        if v.grid() != self.grid() {
            return Err(SusyError::GridMismatch);
        }
        let a = self.adjoint_charge(v.x(), Axis::X);
        let b = self.adjoint_charge(v.y(), Axis::Y);
        Field2D::new(self.grid(), a.iter().zip(&b).map(|(a, b)| a + b).collect())
    }

    /// (H₁ − E₀)ψ = A⃗⁺·A⃗ψ.
    pub fn sector1_apply(&self, psi: &[f64]) -> Vec<f64> {
        let a = self.adjoint_charge(&self.charge(psi, Axis::X), Axis::X);
        let b = self.adjoint_charge(&self.charge(psi, Axis::Y), Axis::Y);
        a.iter().zip(&b).map(|(a, b)| a + b).collect()
    }

    /// W·W and ∇·W, the latter with boundary-closed stencils.
    fn square_and_divergence(&self) -> (Vec<f64>, Vec<f64>) {
        let g = self.grid();
        let dx = differentiate_along(g, self.w.x(), Axis::X);
        let dy = differentiate_along(g, self.w.y(), Axis::Y);
        let sq = self.w.x().iter().zip(self.w.y()).map(|(a, b)| a * a + b * b).collect();
        let div = dx.iter().zip(&dy).map(|(a, b)| a + b).collect();
        (sq, div)
    }
}

/// W⃗ = −λ∇ ln ψ₀ of a positive state.
///
/// ln ρ is sampled where ρ exceeds [`VECTOR_DENSITY_FLOOR`] and continued by a
/// concave quadratic outside, first along x-lines and then along y-lines, so W
/// keeps growing into regions the state never reaches.
pub fn vector_superpotential(psi0: &Field2D, units: &ModelUnits) -> Result<VectorSuperpotential> {
    let g = psi0.grid();
    let psi = psi0.values();
    let max = psi0.max_abs();
    if max == 0.0 {
        return Err(SusyError::DegenerateDensity { fraction: 100.0 });
    }
    let rho_max = max * max;
    let floor = VECTOR_DENSITY_FLOOR * rho_max;
    if psi.iter().any(|&p| p < 0.0 && p * p > floor) {
        return Err(SusyError::InvalidArgument("state changes sign; a nodeless state is required".into()));
    }
    let rho: Vec<f64> = psi.iter().map(|p| p * p).collect();
    let deficit = central_deficit(g, &rho, SUPPORT_FLOOR * rho_max);
    if deficit > 0.2 {
        return Err(SusyError::DegenerateDensity { fraction: 100.0 * deficit });
    }

    let mut l: Vec<f64> = rho.iter().map(|&r| r.max(floor).ln()).collect();
    let above: Vec<bool> = rho.iter().map(|&r| r > floor).collect();
    let mut row_support = vec![false; g.ny()];
    for (j, has) in row_support.iter_mut().enumerate() {
        let idx = g.line(Axis::X, j);
        let first = idx.iter().position(|&p| above[p]);
        let last = idx.iter().rposition(|&p| above[p]);
        if let (Some(a), Some(b)) = (first, last) {
            if b - a + 1 < MIN_LINE_SUPPORT {
                continue;
            }
            let mut line: Vec<f64> = idx.iter().map(|&p| l[p]).collect();
            continue_outside(g.gx().points(), &mut line, a, b);
            idx.iter().zip(line).for_each(|(&p, v)| l[p] = v);
            *has = true;
        }
    }
    let first = row_support.iter().position(|&s| s);
    let last = row_support.iter().rposition(|&s| s);
    match (first, last) {
        (Some(a), Some(b)) if b - a + 1 >= MIN_LINE_SUPPORT => {
            for i in 0..g.nx() {
                let idx = g.line(Axis::Y, i);
                let mut line: Vec<f64> = idx.iter().map(|&p| l[p]).collect();
                continue_outside(g.gy().points(), &mut line, a, b);
                idx.iter().zip(line).for_each(|(&p, v)| l[p] = v);
            }
        }
        _ => return Err(SusyError::DegenerateDensity { fraction: 100.0 }),
    }

    let scale = -0.5 * units.lambda();
    let wx = differentiate_along(g, &l, Axis::X).into_iter().map(|d| scale * d).collect();
    let wy = differentiate_along(g, &l, Axis::Y).into_iter().map(|d| scale * d).collect();
    let sampled = stencil_sampled(g, &above);
    let support = rho.iter().zip(sampled).map(|(&r, ok)| ok && r > SUPPORT_FLOOR * rho_max).collect();
    VectorSuperpotential::new(VectorField2::new(g, wx, wy)?, *units).with_support(support)
}

/// max over the support of |W·W − λ∇·W − (V₀ − E₀)|.
pub fn scalar_sector1_check(w: &VectorSuperpotential, v0: &Field2D, e0: f64) -> Result<f64> {
    if v0.grid() != w.grid() {
        return Err(SusyError::GridMismatch);
    }
    let lam = w.lambda();
    let (sq, div) = w.square_and_divergence();
    Ok((0..sq.len())
        .filter(|&p| w.support[p])
        .map(|p| (sq[p] - lam * div[p] - (v0.values()[p] - e0)).abs())
        .fold(0.0, f64::max))
}

/// U₂ = W·W + λ∇·W, the partner of the inner-product factorization A⃗·A⃗⁺.
pub fn naive_scalar_partner(w: &VectorSuperpotential) -> Field2D {
    let lam = w.lambda();
    let (sq, div) = w.square_and_divergence();
    Field2D::new(w.grid(), sq.iter().zip(&div).map(|(s, d)| s + lam * d).collect()).expect("finite by construction")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operators::derivative_matrix;

    #[test]
    fn axis_derivative_matches_the_1d_matrix() {
        let g = Grid2D::new(crate::grid::Grid1D::new(-2.0, 2.0, 23).unwrap(), crate::grid::Grid1D::new(-1.0, 1.0, 19).unwrap());
        let f = g.sample(|x, y| (x * 1.3).sin() * (y + 0.2).exp());
        let dx = apply_derivative(&g, f.values(), Axis::X);
        let m = derivative_matrix(g.gx());
        for j in [0, 7, 18] {
            let idx = g.line(Axis::X, j);
            let line = nalgebra::DVector::from_iterator(idx.len(), idx.iter().map(|&p| f.values()[p]));
            let want = &m * line;
            for (k, &p) in idx.iter().enumerate() {
                assert!((dx[p] - want[k]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn charge_and_adjoint_are_transposes() {
        let g = Grid2D::square(-2.0, 2.0, 13).unwrap();
        let w = VectorSuperpotential::from_fn(&g, |x, y| (x + 0.3 * y, y - 0.1 * x * x), ModelUnits::scaled()).unwrap();
        let a: Vec<f64> = (0..g.len()).map(|p| (p as f64 * 0.71).cos()).collect();
        let b: Vec<f64> = (0..g.len()).map(|p| (p as f64 * 0.29).sin()).collect();
        for axis in Axis::BOTH {
            let lhs = crate::krylov::dot(&w.charge(&a, axis), &b);
            let rhs = crate::krylov::dot(&a, &w.adjoint_charge(&b, axis));
            assert!((lhs - rhs).abs() < 1e-10 * lhs.abs().max(1.0));
        }
    }
}
