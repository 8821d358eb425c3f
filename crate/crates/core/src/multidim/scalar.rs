use nalgebra::DMatrix;

use crate::eigen::fix_sign;
use crate::error::{Result, SusyError};
use crate::krylov::{lowest_eigenpairs, KrylovOptions};
use crate::operators::kinetic_matrix;
use crate::units::ModelUnits;

use super::grid2d::{Field2D, Grid2D};

/// Krylov settings shared by the 2D eigensolves.
pub(crate) fn krylov_options(k: usize) -> KrylovOptions {
    KrylovOptions { block_size: k.max(4), blocks_per_cycle: 40, max_cycles: 200, tol: 1e-9, ..KrylovOptions::default() }
}

/// `Kx ⊗ I + I ⊗ Ky + diag(U)` with sinc-DVR kinetic blocks, applied
/// matrix-free.
#[derive(Clone, Debug)]
pub struct ScalarHamiltonian2D {
    grid: Grid2D,
    kx: DMatrix<f64>,
    ky: DMatrix<f64>,
    potential: Vec<f64>,
}

#[derive(Clone, Debug)]
pub struct Spectrum2D {
    pub energies: Vec<f64>,
    /// Unit-norm states, positive at their largest-magnitude sample.
    pub states: Vec<Field2D>,
}

impl ScalarHamiltonian2D {
    pub fn new(v: &Field2D, units: &ModelUnits) -> Self {
        let grid = v.grid().clone();
        let kx = kinetic_matrix(grid.gx(), units);
        let ky = kinetic_matrix(grid.gy(), units);
        Self { grid, kx, ky, potential: v.values().to_vec() }
    }

    pub fn grid(&self) -> &Grid2D {
        &self.grid
    }

    pub fn potential(&self) -> Field2D {
        Field2D::new(&self.grid, self.potential.clone()).expect("finite by construction")
    }

    pub fn apply(&self, psi: &[f64]) -> Vec<f64> {
        let (nx, ny) = (self.grid.nx(), self.grid.ny());
        // Column i of `m` is the y-line at x index i.
        let m = DMatrix::from_column_slice(ny, nx, psi);
        let out = &self.ky * &m + &m * &self.kx;
        out.as_slice().iter().zip(psi).zip(&self.potential).map(|((h, p), v)| h + v * p).collect()
    }

    /// Dense `N×N` matrix; only sensible on small grids.
    pub fn to_dense(&self) -> DMatrix<f64> {
        let n = self.grid.len();
        let mut h = DMatrix::zeros(n, n);
        for p in 0..n {
            let (i, j) = self.grid.coords(p);
            for i2 in 0..self.grid.nx() {
                h[(p, self.grid.index(i2, j))] += self.kx[(i, i2)];
            }
            for j2 in 0..self.grid.ny() {
                h[(p, self.grid.index(i, j2))] += self.ky[(j, j2)];
            }
            h[(p, p)] += self.potential[p];
        }
        h
    }

    /// The `k` lowest eigenpairs.
    pub fn lowest(&self, k: usize) -> Result<Spectrum2D> {
        let n = self.grid.len();
        let res = lowest_eigenpairs(n, k, |x| self.apply(x), Vec::new(), &krylov_options(k))?;
        let scale = 1.0 / self.grid.cell_area().sqrt();
        let states = res
            .vectors
            .into_iter()
            .map(|mut v| {
                fix_sign(&mut v);
                v.iter_mut().for_each(|x| *x *= scale);
                Field2D::new(&self.grid, v)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Spectrum2D { energies: res.values, states })
    }
}

/// Lowest `k` eigenpairs of `−(ħ²/2m)∇² + V` on the grid of `v`.
pub fn solve_potential_2d(v: &Field2D, units: &ModelUnits, k: usize) -> Result<Spectrum2D> {
    if k == 0 {
        return Err(SusyError::InvalidArgument("requested zero eigenpairs".into()));
    }
    ScalarHamiltonian2D::new(v, units).lowest(k)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eigen::eigenvalues;

    #[test]
    fn matrix_free_and_dense_agree() {
        let g = Grid2D::new(crate::grid::Grid1D::new(-3.0, 3.0, 7).unwrap(), crate::grid::Grid1D::new(-2.0, 2.0, 5).unwrap());
        let v = g.sample(|x, y| x * x + 0.5 * y * y + 0.1 * x * y);
        let h = ScalarHamiltonian2D::new(&v, &ModelUnits::scaled());
        let dense = h.to_dense();
        let psi: Vec<f64> = (0..g.len()).map(|p| (p as f64 * 0.37).sin()).collect();
        let a = h.apply(&psi);
        let b = &dense * nalgebra::DVector::from_column_slice(&psi);
        assert!(a.iter().zip(b.iter()).all(|(x, y)| (x - y).abs() < 1e-12));
        let ev = eigenvalues(&dense);
        let s = h.lowest(3).unwrap();
        for (e, x) in s.energies.iter().zip(&ev) {
            assert!((e - x).abs() < 1e-9);
        }
    }
}
