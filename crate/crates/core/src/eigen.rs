//! Dense symmetric eigensolves with a deterministic state convention.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{Result, SusyError};
use crate::grid::{Grid1D, RealField};
use crate::units::ModelUnits;

/// The `k` lowest eigenpairs of a grid Hamiltonian.
///
/// States are normalized with `Σ ψ² h = 1` and made positive at their
/// largest-magnitude entry.
#[derive(Clone, Debug)]
pub struct SpectrumResult {
    pub energies: Vec<f64>,
    pub states: Vec<RealField>,
    pub n_converged: usize,
}

/// Flip `v` so that its largest-magnitude entry is positive.
pub fn fix_sign(v: &mut [f64]) {
    let mut best = 0usize;
    for (i, x) in v.iter().enumerate() {
        if x.abs() > v[best].abs() {
            best = i;
        }
    }
    if v[best] < 0.0 {
        v.iter_mut().for_each(|x| *x = -*x);
    }
}

/// Eigenvalues and unit-Euclidean-norm eigenvectors, ascending.
pub fn sorted_eigen(h: &DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    let eig = SymmetricEigen::new(h.clone());
    let mut order: Vec<usize> = (0..h.nrows()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = DMatrix::from_fn(h.nrows(), h.nrows(), |r, c| eig.eigenvectors[(r, order[c])]);
    (values, vectors)
}

/// Sorted eigenvalues only.
pub fn eigenvalues(h: &DMatrix<f64>) -> Vec<f64> {
    let mut e: Vec<f64> = h.clone().symmetric_eigenvalues().iter().copied().collect();
    e.sort_by(f64::total_cmp);
    e
}

pub fn eigensolve(h: &DMatrix<f64>, k: usize, grid: &Grid1D) -> Result<SpectrumResult> {
    let n = h.nrows();
    if h.ncols() != n || n != grid.len() {
        return Err(SusyError::GridMismatch);
    }
    if k == 0 || k > n {
        return Err(SusyError::InvalidArgument(format!("requested {k} eigenpairs of a {n}x{n} matrix")));
    }
    let (values, vectors) = sorted_eigen(h);
    let scale = h.abs().max().max(1.0);
    let tol = 1e-8 * (scale / 1e6).max(1.0);
    let inv_sqrt_h = 1.0 / grid.spacing().sqrt();

    let mut states = Vec::with_capacity(k);
    for (i, &e) in values.iter().enumerate().take(k) {
        let mut v: Vec<f64> = vectors.column(i).iter().copied().collect();
        fix_sign(&mut v);
        let dv = DVector::from_column_slice(&v);
        let residual = (h * &dv - &dv * e).norm();
        if !(residual <= tol) {
            return Err(SusyError::Convergence(format!(
                "eigenpair {i} residual {residual:e} exceeds {tol:e}"
            )));
        }
        v.iter_mut().for_each(|x| *x *= inv_sqrt_h);
        states.push(RealField::new(grid, v)?);
    }
    Ok(SpectrumResult { energies: values[..k].to_vec(), states, n_converged: k })
}

/// Diagonalize `K + diag(V)` and return the lowest `k` pairs.
pub fn solve_potential(v: &RealField, units: &ModelUnits, k: usize) -> Result<SpectrumResult> {
    let h = crate::operators::hamiltonian_matrix(v.grid(), v, units)?;
    eigensolve(&h, k, v.grid())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::make_grid;

    #[test]
    fn diagonal_matrix() {
        let g = make_grid(0.0, 1.0, 3).unwrap();
        let h = DMatrix::from_diagonal(&DVector::from_vec(vec![2.0, 1.0, 3.0]));
        let s = eigensolve(&h, 2, &g).unwrap();
        assert_eq!(s.energies, vec![1.0, 2.0]);
        assert!(s.states[0].values()[1] > 0.0);
    }

    #[test]
    fn harmonic_oscillator_ladder() {
        let g = make_grid(-8.0, 8.0, 101).unwrap();
        let s = solve_potential(&g.sample(|x| x * x), &ModelUnits::scaled(), 6).unwrap();
        for (n, e) in s.energies.iter().enumerate() {
            assert!((e - (2 * n + 1) as f64).abs() < 1e-7, "E_{n} = {e}");
        }
        for i in 0..6 {
            for j in 0..6 {
                let overlap = s.states[i].dot(&s.states[j]);
                let expect = if i == j { 1.0 } else { 0.0 };
                assert!((overlap - expect).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn shifted_oscillator_and_sextic_ground() {
        let u = ModelUnits::scaled();
        let g = make_grid(-8.0, 8.0, 101).unwrap();
        let s = solve_potential(&g.sample(|x| x * x - 1.0), &u, 1).unwrap();
        assert!(s.energies[0].abs() < 1e-8);
        let g = make_grid(-6.0, 6.0, 100).unwrap();
        let v = g.sample(|x| x.powi(6) + 4.0 * x.powi(4) + x * x - 2.0);
        let s = solve_potential(&v, &u, 1).unwrap();
        assert!(s.energies[0].abs() < 1e-7, "E0 = {}", s.energies[0]);
    }

    #[test]
    fn sign_convention() {
        let mut v = vec![0.1, -0.9, 0.3];
        fix_sign(&mut v);
        assert_eq!(v, vec![-0.1, 0.9, -0.3]);
    }
}
