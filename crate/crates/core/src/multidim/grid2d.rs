use serde::{Deserialize, Serialize};

use crate::error::{Result, SusyError};
use crate::grid::Grid1D;
use crate::krylov::dot;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    X,
    Y,
}

impl Axis {
    pub const BOTH: [Axis; 2] = [Axis::X, Axis::Y];
}

/// Tensor-product grid. Point `(i, j)` sits at `(gx[i], gy[j])` and is stored
/// at index `i * ny + j`.
#[derive(Clone, Debug, PartialEq)]
pub struct Grid2D {
    gx: Grid1D,
    gy: Grid1D,
}

impl Grid2D {
    pub fn new(gx: Grid1D, gy: Grid1D) -> Self {
        Self { gx, gy }
    }

    /// The same axis grid in both directions.
    pub fn square(min: f64, max: f64, n: usize) -> Result<Self> {
        let g = Grid1D::new(min, max, n)?;
        Ok(Self::new(g.clone(), g))
    }

    pub fn gx(&self) -> &Grid1D {
        &self.gx
    }

    pub fn gy(&self) -> &Grid1D {
        &self.gy
    }

    pub fn axis(&self, axis: Axis) -> &Grid1D {
        match axis {
            Axis::X => &self.gx,
            Axis::Y => &self.gy,
        }
    }

    pub fn nx(&self) -> usize {
        self.gx.len()
    }

    pub fn ny(&self) -> usize {
        self.gy.len()
    }

    pub fn len(&self) -> usize {
        self.nx() * self.ny()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn index(&self, i: usize, j: usize) -> usize {
        i * self.ny() + j
    }

    /// Inverse of [`Grid2D::index`].
    pub fn coords(&self, p: usize) -> (usize, usize) {
        (p / self.ny(), p % self.ny())
    }

    pub fn point(&self, p: usize) -> (f64, f64) {
        let (i, j) = self.coords(p);
        (self.gx.points()[i], self.gy.points()[j])
    }

    pub fn cell_area(&self) -> f64 {
        self.gx.spacing() * self.gy.spacing()
    }

    pub fn sample<F: Fn(f64, f64) -> f64>(&self, f: F) -> Field2D {
        let values = (0..self.len()).map(|p| {
            let (x, y) = self.point(p);
            f(x, y)
        });
        Field2D { grid: self.clone(), values: values.collect() }
    }

    /// Flat indices of the line through `fixed` running along `axis`.
    pub(crate) fn line(&self, axis: Axis, fixed: usize) -> Vec<usize> {
        match axis {
            Axis::X => (0..self.nx()).map(|i| self.index(i, fixed)).collect(),
            Axis::Y => (0..self.ny()).map(|j| self.index(fixed, j)).collect(),
        }
    }

    /// Number of lines running along `axis`.
    pub(crate) fn line_count(&self, axis: Axis) -> usize {
        match axis {
            Axis::X => self.ny(),
            Axis::Y => self.nx(),
        }
    }

    /// Apply a 1D transform to every line along `axis`.
    pub(crate) fn map_lines<F>(&self, values: &[f64], axis: Axis, f: F) -> Vec<f64>
    where
        F: Fn(&Grid1D, &[f64]) -> Vec<f64>,
    {
        let mut out = vec![0.0; values.len()];
        let g = self.axis(axis);
        for fixed in 0..self.line_count(axis) {
            let idx = self.line(axis, fixed);
            let line: Vec<f64> = idx.iter().map(|&p| values[p]).collect();
            for (&p, v) in idx.iter().zip(f(g, &line)) {
                out[p] = v;
            }
        }
        out
    }
}

fn check_values(grid: &Grid2D, values: &[f64]) -> Result<()> {
    if values.len() != grid.len() {
        return Err(SusyError::GridMismatch);
    }
    if let Some(i) = values.iter().position(|v| !v.is_finite()) {
        return Err(SusyError::InvalidArgument(format!("non-finite value at index {i}")));
    }
    Ok(())
}

/// Real scalar field on a [`Grid2D`] with inner product `Σ f g hx hy`.
#[derive(Clone, Debug, PartialEq)]
pub struct Field2D {
    grid: Grid2D,
    values: Vec<f64>,
}

impl Field2D {
    pub fn new(grid: &Grid2D, values: Vec<f64>) -> Result<Self> {
        check_values(grid, &values)?;
        Ok(Self { grid: grid.clone(), values })
    }

    pub fn zeros(grid: &Grid2D) -> Self {
        Self { grid: grid.clone(), values: vec![0.0; grid.len()] }
    }

    pub fn grid(&self) -> &Grid2D {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn dot(&self, other: &Field2D) -> f64 {
        dot(&self.values, &other.values) * self.grid.cell_area()
    }

    pub fn norm(&self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn normalized(&self) -> Field2D {
        let n = self.norm();
        Field2D { grid: self.grid.clone(), values: self.values.iter().map(|v| v / n).collect() }
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |a, v| a.max(v.abs()))
    }
}

/// Two-component field `(ψx, ψy)` on a [`Grid2D`].
#[derive(Clone, Debug, PartialEq)]
pub struct VectorField2 {
    grid: Grid2D,
    x: Vec<f64>,
    y: Vec<f64>,
}

impl VectorField2 {
    pub fn new(grid: &Grid2D, x: Vec<f64>, y: Vec<f64>) -> Result<Self> {
        check_values(grid, &x)?;
        check_values(grid, &y)?;
        Ok(Self { grid: grid.clone(), x, y })
    }

    /// Split a stacked `[x; y]` vector of length `2N`.
    pub fn from_stacked(grid: &Grid2D, stacked: &[f64]) -> Result<Self> {
        if stacked.len() != 2 * grid.len() {
            return Err(SusyError::GridMismatch);
        }
        let (x, y) = stacked.split_at(grid.len());
        Self::new(grid, x.to_vec(), y.to_vec())
    }

    pub fn stacked(&self) -> Vec<f64> {
        self.x.iter().chain(&self.y).copied().collect()
    }

    pub fn grid(&self) -> &Grid2D {
        &self.grid
    }

    pub fn x(&self) -> &[f64] {
        &self.x
    }

    pub fn y(&self) -> &[f64] {
        &self.y
    }

    pub fn component(&self, axis: Axis) -> &[f64] {
        match axis {
            Axis::X => &self.x,
            Axis::Y => &self.y,
        }
    }

    /// Pointwise √(ψx² + ψy²).
    pub fn magnitude(&self) -> Vec<f64> {
        self.x.iter().zip(&self.y).map(|(a, b)| a.hypot(*b)).collect()
    }

    pub fn dot(&self, other: &VectorField2) -> f64 {
        (dot(&self.x, &other.x) + dot(&self.y, &other.y)) * self.grid.cell_area()
    }

    pub fn norm(&self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn scaled(&self, c: f64) -> VectorField2 {
        VectorField2 {
            grid: self.grid.clone(),
            x: self.x.iter().map(|v| v * c).collect(),
            y: self.y.iter().map(|v| v * c).collect(),
        }
    }

    pub fn normalized(&self) -> VectorField2 {
        self.scaled(1.0 / self.norm())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn index_map_is_a_bijection() {
        let g = Grid2D::new(Grid1D::new(-1.0, 1.0, 5).unwrap(), Grid1D::new(0.0, 2.0, 3).unwrap());
        let mut seen = vec![false; g.len()];
        for i in 0..g.nx() {
            for j in 0..g.ny() {
                let p = g.index(i, j);
                assert!(!seen[p]);
                seen[p] = true;
                assert_eq!(g.coords(p), (i, j));
            }
        }
        assert_eq!(g.point(g.index(4, 1)), (1.0, 1.0));
    }

    #[test]
    fn lines_cover_the_grid() {
        let g = Grid2D::new(Grid1D::new(-1.0, 1.0, 4).unwrap(), Grid1D::new(0.0, 1.0, 3).unwrap());
        let f = g.sample(|x, y| 10.0 * x + y);
        let shifted = g.map_lines(f.values(), Axis::Y, |_, line| line.iter().map(|v| v + 1.0).collect());
        assert!(shifted.iter().zip(f.values()).all(|(a, b)| (a - b - 1.0).abs() < 1e-15));
        assert_eq!(g.line(Axis::X, 2), vec![2, 5, 8, 11]);
    }
}
