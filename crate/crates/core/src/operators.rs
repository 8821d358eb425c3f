//! Discrete derivative, kinetic and Hamiltonian operators on uniform grids.
//!
//! Two first-derivative realizations live here:
//!
//! * [`derivative_matrix`] is a banded central stencil of order `2 * STENCIL_HALF_WIDTH`
//!   (a truncated sinc kernel). Rows near the edges are simply cut off, which keeps
//!   the matrix exactly antisymmetric. Charge operators are built from it, so
//!   `A⁺ = Aᵀ` holds to the last bit.
//! * [`differentiate`] uses the same central stencil away from the edges and
//!   switches to one-sided stencils of the same width near them. It is the one to
//!   use when a derivative *field* is wanted everywhere on the grid.

use nalgebra::DMatrix;

use crate::error::Result;
use crate::grid::{Grid1D, RealField};
use crate::units::ModelUnits;

/// Half-width `p` of the central difference stencil (order `2p`).
pub const STENCIL_HALF_WIDTH: usize = 8;

/// Central first-derivative weights `c_1..c_p` for unit spacing.
///
/// `f'(x) ≈ Σ_k c_k (f(x + k) − f(x − k))`.
pub fn central_coefficients(p: usize) -> Vec<f64> {
    // c_k = (−1)^{k+1} (p!)² / (k (p−k)! (p+k)!), evaluated as a running product
    // to stay clear of factorial overflow.
    (1..=p)
        .map(|k| {
            let mut ratio = 1.0;
            for j in 1..=k {
                ratio *= (p + 1 - j) as f64 / (p + j) as f64;
            }
            let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
            sign * ratio / k as f64
        })
        .collect()
}

/// Finite-difference weights for the `order`-th derivative at `z` from `nodes`
/// (Fornberg's recursion).
pub fn fornberg_weights(z: f64, nodes: &[f64], order: usize) -> Vec<f64> {
    let n = nodes.len();
    let mut c = vec![vec![0.0; order + 1]; n];
    let mut c1 = 1.0;
    let mut c4 = nodes[0] - z;
    c[0][0] = 1.0;
    for i in 1..n {
        let mn = i.min(order);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = nodes[i] - z;
        for j in 0..i {
            let c3 = nodes[i] - nodes[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    c[i][k] = c1 * (k as f64 * c[i - 1][k - 1] - c5 * c[i - 1][k]) / c2;
                }
                c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
            }
            for k in (1..=mn).rev() {
                c[j][k] = (c4 * c[j][k] - k as f64 * c[j][k - 1]) / c3;
            }
            c[j][0] *= c4 / c3;
        }
        c1 = c2;
    }
    c.into_iter().map(|row| row[order]).collect()
}

/// Banded, exactly antisymmetric first-derivative matrix.
pub fn derivative_matrix(grid: &Grid1D) -> DMatrix<f64> {
    let n = grid.len();
    let h = grid.spacing();
    let coeffs = central_coefficients(STENCIL_HALF_WIDTH);
    let mut d = DMatrix::zeros(n, n);
    for i in 0..n {
        for (k, &c) in coeffs.iter().enumerate() {
            let j = i + k + 1;
            if j >= n {
                break;
            }
            d[(i, j)] = c / h;
            d[(j, i)] = -c / h;
        }
    }
    d
}

/// Whether grid index `i` sees the full central stencil of [`derivative_matrix`].
pub fn is_interior(grid: &Grid1D, i: usize) -> bool {
    i >= STENCIL_HALF_WIDTH && i + STENCIL_HALF_WIDTH < grid.len()
}

/// First derivative of sampled values using the central stencil in the interior
/// and one-sided stencils of the same width near the edges.
pub fn differentiate_values(grid: &Grid1D, values: &[f64]) -> Vec<f64> {
    let n = grid.len();
    let h = grid.spacing();
    let p = STENCIL_HALF_WIDTH;
    let width = (2 * p + 1).min(n);
    let coeffs = central_coefficients(p);
    let mut out = vec![0.0; n];
    let offsets: Vec<f64> = (0..width).map(|j| j as f64).collect();
    for i in 0..n {
        if is_interior(grid, i) {
            let mut acc = 0.0;
            for (k, &c) in coeffs.iter().enumerate() {
                acc += c * (values[i + k + 1] - values[i - k - 1]);
            }
            out[i] = acc / h;
        } else {
            let lo = i.saturating_sub(p).min(n - width);
            let w = fornberg_weights((i - lo) as f64, &offsets, 1);
            out[i] = w.iter().zip(&values[lo..lo + width]).map(|(a, b)| a * b).sum::<f64>() / h;
        }
    }
    out
}

pub fn differentiate(field: &RealField) -> RealField {
    let values = differentiate_values(field.grid(), field.values());
    RealField::new(field.grid(), values).expect("derivative of a finite field is finite")
}

/// Sinc-DVR representation of −(ħ²/2m)∂² on a uniform grid.
pub fn kinetic_matrix(grid: &Grid1D, units: &ModelUnits) -> DMatrix<f64> {
    let n = grid.len();
    let h = grid.spacing();
    let scale = units.kinetic_scale() / (h * h);
    let diag = scale * std::f64::consts::PI.powi(2) / 3.0;
    DMatrix::from_fn(n, n, |i, j| {
        if i == j {
            diag
        } else {
            let d = i.abs_diff(j) as f64;
            let sign = if i.abs_diff(j) % 2 == 0 { 1.0 } else { -1.0 };
            scale * sign * 2.0 / (d * d)
        }
    })
}

/// `K + diag(V)`.
pub fn hamiltonian_matrix(grid: &Grid1D, v: &RealField, units: &ModelUnits) -> Result<DMatrix<f64>> {
    v.check_grid(grid)?;
    let mut h = kinetic_matrix(grid, units);
    for (i, &vi) in v.values().iter().enumerate() {
        h[(i, i)] += vi;
    }
    Ok(h)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::make_grid;

    #[test]
    fn low_order_coefficients() {
        let c = central_coefficients(1);
        assert!((c[0] - 0.5).abs() < 1e-15);
        let c = central_coefficients(2);
        assert!((c[0] - 2.0 / 3.0).abs() < 1e-15);
        assert!((c[1] + 1.0 / 12.0).abs() < 1e-15);
    }

    #[test]
    fn fornberg_matches_central() {
        let nodes: Vec<f64> = (-2..=2).map(|k| k as f64).collect();
        let w = fornberg_weights(0.0, &nodes, 1);
        let c = central_coefficients(2);
        assert!((w[3] - c[0]).abs() < 1e-14 && (w[4] - c[1]).abs() < 1e-14);
        let w2 = fornberg_weights(0.0, &nodes[1..4], 2);
        assert!((w2[0] - 1.0).abs() < 1e-14 && (w2[1] + 2.0).abs() < 1e-14);
    }

    #[test]
    fn derivative_is_exactly_antisymmetric() {
        let g = make_grid(-4.0, 7.0, 53).unwrap();
        let d = derivative_matrix(&g);
        assert_eq!((&d + d.transpose()).abs().max(), 0.0);
    }

    #[test]
    fn derivative_of_constant_and_linear() {
        let g = make_grid(-10.0, 10.0, 201).unwrap();
        let d = derivative_matrix(&g);
        let one = nalgebra::DVector::from_element(g.len(), 1.0);
        let x = nalgebra::DVector::from_column_slice(g.points());
        let d1 = &d * one;
        let dx = &d * x;
        for i in (0..g.len()).filter(|&i| is_interior(&g, i)) {
            assert!(d1[i].abs() <= 1e-10);
            assert!((dx[i] - 1.0).abs() <= 1e-6);
        }
    }

    #[test]
    fn sine_derivative_is_accurate_in_interior() {
        let g = make_grid(-20.0, 20.0, 401).unwrap();
        let d = derivative_matrix(&g);
        let s = nalgebra::DVector::from_iterator(g.len(), g.points().iter().map(|x| x.sin()));
        let ds = &d * s;
        for i in (0..g.len()).filter(|&i| is_interior(&g, i)) {
            assert!((ds[i] - g.points()[i].cos()).abs() < 1e-9);
        }
    }

    #[test]
    fn closed_differentiation_is_exact_on_polynomials() {
        let g = make_grid(-2.0, 3.0, 41).unwrap();
        let f = g.sample(|x| x.powi(3) + 2.0 * x);
        let df = differentiate(&f);
        for (&x, &v) in g.points().iter().zip(df.values()) {
            assert!((v - (3.0 * x * x + 2.0)).abs() < 1e-8, "x={x} v={v}");
        }
    }

    #[test]
    fn kinetic_is_symmetric_and_ho_is_exact() {
        let g = make_grid(-8.0, 8.0, 101).unwrap();
        let u = ModelUnits::scaled();
        let k = kinetic_matrix(&g, &u);
        assert_eq!((&k - k.transpose()).abs().max(), 0.0);
        let h = hamiltonian_matrix(&g, &g.sample(|x| x * x), &u).unwrap();
        let mut e: Vec<f64> = h.symmetric_eigenvalues().iter().copied().collect();
        e.sort_by(f64::total_cmp);
        assert!((e[0] - 1.0).abs() < 1e-8);
        assert!((e[2] - 5.0).abs() < 1e-8);
    }

    #[test]
    fn zero_potential_gives_kinetic() {
        let g = make_grid(-1.0, 1.0, 9).unwrap();
        let u = ModelUnits::scaled();
        let h = hamiltonian_matrix(&g, &RealField::zeros(&g), &u).unwrap();
        assert_eq!(h, kinetic_matrix(&g, &u));
        let other = make_grid(-1.0, 1.0, 11).unwrap();
        assert!(hamiltonian_matrix(&g, &RealField::zeros(&other), &u).is_err());
    }
}
