//! Uniform 1D collocation grids and the fields sampled on them.

use num_complex::Complex64;

use crate::error::{Result, SusyError};

/// A uniform grid of `n` points spanning `[x_min, x_max]`, endpoints included.
#[derive(Clone, Debug, PartialEq)]
pub struct Grid1D {
    x_min: f64,
    x_max: f64,
    h: f64,
    points: Vec<f64>,
}

impl Grid1D {
    pub fn new(x_min: f64, x_max: f64, n: usize) -> Result<Self> {
        if !(x_min.is_finite() && x_max.is_finite()) || x_min >= x_max {
            return Err(SusyError::Domain(format!("need x_min < x_max, got [{x_min}, {x_max}]")));
        }
        if n < 3 {
            return Err(SusyError::Domain(format!("need at least 3 points, got {n}")));
        }
        let h = (x_max - x_min) / (n - 1) as f64;
        // Offsets from the midpoint are half-integers times h, so grids that are
        // symmetric about the origin are mirror-exact.
        let mid = 0.5 * (x_min + x_max);
        let centre = 0.5 * (n - 1) as f64;
        let mut points: Vec<f64> = (0..n).map(|i| mid + (i as f64 - centre) * h).collect();
        points[0] = x_min;
        points[n - 1] = x_max;
        Ok(Self { x_min, x_max, h, points })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn x_min(&self) -> f64 {
        self.x_min
    }

    pub fn x_max(&self) -> f64 {
        self.x_max
    }

    pub fn spacing(&self) -> f64 {
        self.h
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn sample<F: Fn(f64) -> f64>(&self, f: F) -> RealField {
        RealField { grid: self.clone(), values: self.points.iter().map(|&x| f(x)).collect() }
    }

    /// Index of the grid point closest to `x` (clamped to the grid).
    pub fn nearest_index(&self, x: f64) -> usize {
        let t = ((x - self.x_min) / self.h).round();
        t.clamp(0.0, (self.len() - 1) as f64) as usize
    }
}

pub fn make_grid(x_min: f64, x_max: f64, n: usize) -> Result<Grid1D> {
    Grid1D::new(x_min, x_max, n)
}

/// Real samples on a grid: potentials, densities, stationary states.
#[derive(Clone, Debug, PartialEq)]
pub struct RealField {
    grid: Grid1D,
    values: Vec<f64>,
}

impl RealField {
    pub fn new(grid: &Grid1D, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(SusyError::GridMismatch);
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(SusyError::InvalidArgument(format!("non-finite field value at index {i}")));
        }
        Ok(Self { grid: grid.clone(), values })
    }

    pub fn zeros(grid: &Grid1D) -> Self {
        Self { grid: grid.clone(), values: vec![0.0; grid.len()] }
    }

    pub fn grid(&self) -> &Grid1D {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn map<F: Fn(f64, f64) -> f64>(&self, f: F) -> RealField {
        let values = self.grid.points().iter().zip(&self.values).map(|(&x, &v)| f(x, v)).collect();
        RealField { grid: self.grid.clone(), values }
    }

    /// ⟨self|other⟩ = Σ aᵢbᵢ h.
    pub fn dot(&self, other: &RealField) -> f64 {
        self.values.iter().zip(&other.values).map(|(a, b)| a * b).sum::<f64>() * self.grid.spacing()
    }

    pub fn norm(&self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn integral(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.grid.spacing()
    }

    pub fn normalized(&self) -> RealField {
        let n = self.norm();
        let values = self.values.iter().map(|v| v / n).collect();
        RealField { grid: self.grid.clone(), values }
    }

    /// Sign changes along the grid, ignoring exact zeros.
    pub fn sign_changes(&self) -> usize {
        let mut last = 0.0f64;
        let mut count = 0;
        for &v in &self.values {
            if v == 0.0 {
                continue;
            }
            if last != 0.0 && v.signum() != last.signum() {
                count += 1;
            }
            last = v;
        }
        count
    }

    pub(crate) fn check_grid(&self, grid: &Grid1D) -> Result<()> {
        if &self.grid == grid {
            Ok(())
        } else {
            Err(SusyError::GridMismatch)
        }
    }
}

/// Complex samples on a grid, for non-stationary states.
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexField {
    grid: Grid1D,
    values: Vec<Complex64>,
}

impl ComplexField {
    pub fn new(grid: &Grid1D, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(SusyError::GridMismatch);
        }
        if values.iter().any(|v| !(v.re.is_finite() && v.im.is_finite())) {
            return Err(SusyError::InvalidArgument("non-finite complex field value".into()));
        }
        Ok(Self { grid: grid.clone(), values })
    }

    pub fn from_real(field: &RealField) -> Self {
        Self {
            grid: field.grid.clone(),
            values: field.values.iter().map(|&v| Complex64::new(v, 0.0)).collect(),
        }
    }

    pub fn grid(&self) -> &Grid1D {
        &self.grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }

    /// ⟨self|other⟩ with the conjugate on the left.
    pub fn dot(&self, other: &ComplexField) -> Complex64 {
        self.values.iter().zip(&other.values).map(|(a, b)| a.conj() * b).sum::<Complex64>()
            * self.grid.spacing()
    }

    pub fn norm(&self) -> f64 {
        (self.values.iter().map(|v| v.norm_sqr()).sum::<f64>() * self.grid.spacing()).sqrt()
    }

    pub fn normalized(&self) -> ComplexField {
        let n = self.norm();
        Self { grid: self.grid.clone(), values: self.values.iter().map(|v| v / n).collect() }
    }
}
