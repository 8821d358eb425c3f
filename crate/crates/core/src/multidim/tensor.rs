use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::eigen::fix_sign;
use crate::error::{Result, SusyError};
use crate::krylov::{lowest_eigenpairs, random_block};
use crate::operators::{central_coefficients, derivative_matrix, STENCIL_HALF_WIDTH};

use super::grid2d::{Axis, Field2D, VectorField2};
use super::scalar::krylov_options;
use super::vector::VectorSuperpotential;

/// Ritz values below this fraction of the spectral bound count as zero modes.
pub const ZERO_MODE_FRACTION: f64 = 1e-6;
/// Krylov residual tolerance of [`tensor_ground_state`], relative to max(1, |E|).
/// The 2N-dimensional operator has a wide spectrum and restarts stall near 1e-9;
/// eigenvalue errors scale with the residual squared.
pub const TENSOR_RESIDUAL_TOLERANCE: f64 = 1e-8;
/// Relative eigenvalue gap below which states are reported as degenerate.
pub const DEGENERACY_TOLERANCE: f64 = 1e-8;

/// The sector-2 tensor Hamiltonian H_{μν} = A_μ A_ν⁺ acting on vector fields.
///
/// With B = [A_x; A_y] the operator is BBᵀ while the shifted sector-1 operator
/// is BᵀB, so their nonzero spectra coincide exactly.
#[derive(Clone, Debug)]
pub struct TensorSectorOperator {
    w: VectorSuperpotential,
}

pub fn tensor_sector_hamiltonian(w: &VectorSuperpotential) -> TensorSectorOperator {
    TensorSectorOperator { w: w.clone() }
}

impl TensorSectorOperator {
    pub fn superpotential(&self) -> &VectorSuperpotential {
        &self.w
    }

    /// Dimension of the stacked vector space, 2N.
    pub fn dim(&self) -> usize {
        2 * self.w.grid().len()
    }

    /// H₂ applied to a stacked `[v_x; v_y]` vector.
    pub fn apply(&self, v: &[f64]) -> Vec<f64> {
        let n = self.w.grid().len();
        let s: Vec<f64> = self
            .w
            .adjoint_charge(&v[..n], Axis::X)
            .iter()
            .zip(self.w.adjoint_charge(&v[n..], Axis::Y))
            .map(|(a, b)| a + b)
            .collect();
        let mut out = self.w.charge(&s, Axis::X);
        out.extend(self.w.charge(&s, Axis::Y));
        out
    }

    pub fn apply_field(&self, v: &VectorField2) -> Result<VectorField2> {
        if v.grid() != self.w.grid() {
            return Err(SusyError::GridMismatch);
        }
        VectorField2::from_stacked(v.grid(), &self.apply(&v.stacked()))
    }

    /// Dense A_μ, `N×N`.
    pub fn charge_matrix(&self, axis: Axis) -> DMatrix<f64> {
        let g = self.w.grid();
        let lam = self.w.lambda();
        let d = match axis {
            Axis::X => derivative_matrix(g.gx()).kronecker(&DMatrix::identity(g.ny(), g.ny())),
            Axis::Y => DMatrix::identity(g.nx(), g.nx()).kronecker(&derivative_matrix(g.gy())),
        };
        let mut a = d * lam;
        for (p, w) in self.w.field().component(axis).iter().enumerate() {
            a[(p, p)] += w;
        }
        a
    }

    /// Dense block H_{μν} = A_μ A_νᵀ.
    pub fn block(&self, mu: Axis, nu: Axis) -> DMatrix<f64> {
        self.charge_matrix(mu) * self.charge_matrix(nu).transpose()
    }

    /// Dense `2N×2N` matrix; only sensible on small grids.
    pub fn assemble(&self) -> DMatrix<f64> {
        let n = self.w.grid().len();
        let pairs = [(Axis::X, Axis::X), (Axis::X, Axis::Y), (Axis::Y, Axis::X), (Axis::Y, Axis::Y)];
        let blocks: Vec<DMatrix<f64>> = pairs.par_iter().map(|&(a, b)| self.block(a, b)).collect();
        let mut m = DMatrix::zeros(2 * n, 2 * n);
        for ((mu, nu), b) in pairs.iter().zip(blocks) {
            let r = if *mu == Axis::X { 0 } else { n };
            let c = if *nu == Axis::X { 0 } else { n };
            m.view_mut((r, c), (n, n)).copy_from(&b);
        }
        m
    }

    /// Stacked `[A_x; A_y]`, `2N×N`.
    pub fn stacked_charges(&self) -> DMatrix<f64> {
        let n = self.w.grid().len();
        let mut b = DMatrix::zeros(2 * n, n);
        b.view_mut((0, 0), (n, n)).copy_from(&self.charge_matrix(Axis::X));
        b.view_mut((n, 0), (n, n)).copy_from(&self.charge_matrix(Axis::Y));
        b
    }

    /// Upper bound on the largest eigenvalue: Σ_μ (λ‖D_μ‖∞ + max|W_μ|)².
    pub fn spectral_bound(&self) -> f64 {
        let g = self.w.grid();
        let stencil: f64 = 2.0 * central_coefficients(STENCIL_HALF_WIDTH).iter().map(|c| c.abs()).sum::<f64>();
        Axis::BOTH
            .iter()
            .map(|&a| {
                let wmax = self.w.field().component(a).iter().fold(0.0f64, |m, w| m.max(w.abs()));
                (self.w.lambda() * stencil / g.axis(a).spacing() + wmax).powi(2)
            })
            .sum()
    }
}

#[derive(Clone, Debug)]
pub struct TensorSpectrum {
    pub energies: Vec<f64>,
    /// Unit-norm vector states.
    pub states: Vec<VectorField2>,
    /// Smallest pointwise magnitude of each state over the whole grid.
    pub min_magnitude: Vec<f64>,
}

impl TensorSpectrum {
    /// States degenerate with the lowest one within [`DEGENERACY_TOLERANCE`].
    pub fn lowest_subspace(&self) -> &[VectorField2] {
        let e0 = self.energies[0];
        let tol = DEGENERACY_TOLERANCE * e0.abs().max(1.0);
        let count = self.energies.iter().take_while(|&&e| e - e0 <= tol).count();
        &self.states[..count]
    }
}

/// The `k` lowest nonzero eigenpairs of H₂.
///
/// H₂ has a null space of dimension at least N. The Krylov start block is drawn
/// from the range of B so the iteration stays away from it, and Ritz values
/// below [`ZERO_MODE_FRACTION`] of the spectral bound are discarded; the
/// sector-1 ground state, annihilated by A⃗, falls there too.
pub fn tensor_ground_state(op: &TensorSectorOperator, k: usize) -> Result<TensorSpectrum> {
    let g = op.superpotential().grid().clone();
    let n = g.len();
    let opts = krylov_options(k);
    let start: Vec<Vec<f64>> = random_block(n, opts.block_size, opts.seed)
        .into_iter()
        .map(|r| {
            let mut v = op.superpotential().charge(&r, Axis::X);
            v.extend(op.superpotential().charge(&r, Axis::Y));
            v
        })
        .collect();
    let opts = crate::krylov::KrylovOptions {
        lower_cutoff: Some(ZERO_MODE_FRACTION * op.spectral_bound()),
        tol: TENSOR_RESIDUAL_TOLERANCE,
        ..opts
    };
    let res = lowest_eigenpairs(op.dim(), k, |x| op.apply(x), start, &opts)?;
    let scale = 1.0 / g.cell_area().sqrt();
    let mut states = Vec::with_capacity(k);
    let mut min_magnitude = Vec::with_capacity(k);
    for mut v in res.vectors {
        fix_sign(&mut v);
        v.iter_mut().for_each(|x| *x *= scale);
        let field = VectorField2::from_stacked(&g, &v)?;
        min_magnitude.push(field.magnitude().into_iter().fold(f64::INFINITY, f64::min));
        states.push(field);
    }
    Ok(TensorSpectrum { energies: res.values, states, min_magnitude })
}

/// Angles scanned per pair of basis states in [`nodeless_combination`].
const ANGLE_STEPS: usize = 180;

/// The combination of `subspace` states whose smallest pointwise magnitude over
/// `region`, relative to its largest, is greatest. Returns it with that ratio.
///
/// Single states and rotations within each pair of states are scanned.
pub fn nodeless_combination(subspace: &[VectorField2], region: Option<&[bool]>) -> Option<(VectorField2, f64)> {
    let ratio = |v: &VectorField2| {
        let mag = v.magnitude();
        let max = mag.iter().fold(0.0f64, |a, &m| a.max(m));
        let min = mag
            .iter()
            .enumerate()
            .filter(|(p, _)| region.is_none_or(|r| r[*p]))
            .fold(f64::INFINITY, |a, (_, &m)| a.min(m));
        if max > 0.0 { min / max } else { 0.0 }
    };
    let mut best: Option<(VectorField2, f64)> = None;
    let mut consider = |v: VectorField2| {
        let r = ratio(&v);
        if best.as_ref().is_none_or(|(_, b)| r > *b) {
            best = Some((v, r));
        }
    };
    for (i, a) in subspace.iter().enumerate() {
        consider(a.clone());
        for b in &subspace[i + 1..] {
            for s in 1..ANGLE_STEPS {
                let t = std::f64::consts::PI * s as f64 / ANGLE_STEPS as f64;
                let (c, sn) = (t.cos(), t.sin());
                let x = a.x().iter().zip(b.x()).map(|(p, q)| c * p + sn * q).collect();
                let y = a.y().iter().zip(b.y()).map(|(p, q)| c * p + sn * q).collect();
                consider(VectorField2::new(a.grid(), x, y).expect("finite combination"));
            }
        }
    }
    best.map(|(v, r)| (v.normalized(), r))
}

/// ψ₁ = A⃗⁺·v / √E, normalized.
pub fn descend_state(v: &VectorField2, energy: f64, w: &VectorSuperpotential) -> Result<Field2D> {
    if !(energy > 0.0) {
        return Err(SusyError::ZeroEnergy(energy));
    }
    let psi = w.divergence_charge(v)?;
    if psi.norm() == 0.0 {
        return Err(SusyError::ZeroTrial);
    }
    Ok(psi.normalized())
}

/// ⟨v, H₂ v⟩ / ⟨v, v⟩.
pub fn vector_rayleigh_quotient(op: &TensorSectorOperator, trial: &VectorField2) -> Result<f64> {
    let norm2 = trial.dot(trial);
    if norm2 == 0.0 {
        return Err(SusyError::ZeroTrial);
    }
    // ⟨v, BBᵀv⟩ = |Bᵀv|².
    let s = op.superpotential().divergence_charge(trial)?;
    Ok(s.dot(&s) / norm2)
}
