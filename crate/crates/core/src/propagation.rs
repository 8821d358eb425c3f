//! Time evolution on a grid and the intertwining of partner dynamics.
//!
//! Two schemes are available. Implicit midpoint (Crank–Nicolson) applies the
//! Cayley transform of the DVR Hamiltonian and is exactly unitary. The split
//! operator alternates half potential steps with FFT kinetic steps on the grid
//! treated as periodic.
//!
//! For the partner pair H₁ = AᵀA, H₂ = AAᵀ the midpoint scheme intertwines
//! exactly, since A·r(AᵀA) = r(AAᵀ)·A for any rational r. The split scheme
//! separates T = λ²DᵀD from the rest and intertwines only up to O(dt²).

use std::sync::Arc;

use nalgebra::{DMatrix, DVector, LU};
use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::eigen::sorted_eigen;
use crate::error::{Result, SusyError};
use crate::grid::{ComplexField, Grid1D, RealField};
use crate::operators::{derivative_matrix, hamiltonian_matrix};
use crate::susy::{charge_matrices, SuperPotential};
use crate::units::ModelUnits;

/// Largest tolerated per-step energy drift (relative to max(1, |⟨H⟩|)).
pub const MAX_STEP_DRIFT: f64 = 1e-6;

/// ‖Aψ‖/‖ψ‖ below this marks a state annihilated by A.
const ANNIHILATED: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scheme {
    SplitOperator,
    ImplicitMidpoint,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PropagationConfig {
    pub dt: f64,
    pub n_steps: usize,
    pub scheme: Scheme,
}

impl PropagationConfig {
    pub fn new(dt: f64, n_steps: usize, scheme: Scheme) -> Result<Self> {
        let cfg = Self { dt, n_steps, scheme };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(SusyError::InvalidArgument(format!("time step must be positive, got {}", self.dt)));
        }
        if self.n_steps == 0 {
            return Err(SusyError::InvalidArgument("need at least one time step".into()));
        }
        Ok(())
    }
}

type CMatrix = DMatrix<Complex64>;
type CVector = DVector<Complex64>;

enum Stepper {
    Midpoint { lu: LU<Complex64, nalgebra::Dyn, nalgebra::Dyn>, rhs: CMatrix },
    Split { half_potential: Vec<Complex64>, kinetic: Vec<Complex64>, forward: Arc<dyn Fft<f64>>, inverse: Arc<dyn Fft<f64>> },
}

/// A fixed-step propagator for one time-independent potential.
pub struct Propagator {
    grid: Grid1D,
    potential: Vec<f64>,
    units: ModelUnits,
    dt: f64,
    scheme: Scheme,
    stepper: Stepper,
}

fn cayley(h: &DMatrix<f64>, dt: f64, hbar: f64) -> (LU<Complex64, nalgebra::Dyn, nalgebra::Dyn>, CMatrix) {
    let n = h.nrows();
    let half = Complex64::new(0.0, 0.5 * dt / hbar);
    let hc = h.map(|v| Complex64::new(v, 0.0));
    let id = CMatrix::identity(n, n);
    let lhs = &id + &hc * half;
    let rhs = &id - &hc * half;
    (lhs.lu(), rhs)
}

/// Angular wavenumbers of an n-point periodic grid in FFT order.
fn fft_wavenumbers(n: usize, h: f64) -> Vec<f64> {
    let dk = std::f64::consts::TAU / (n as f64 * h);
    (0..n).map(|j| if j <= n / 2 { j as f64 } else { j as f64 - n as f64 } * dk).collect()
}

impl Propagator {
    /// `dt` may be negative to run time backwards.
    pub fn new(v: &RealField, units: &ModelUnits, scheme: Scheme, dt: f64) -> Result<Self> {
        if !(dt != 0.0 && dt.is_finite()) {
            return Err(SusyError::InvalidArgument(format!("time step must be nonzero, got {dt}")));
        }
        let grid = v.grid().clone();
        let hbar = units.hbar();
        let stepper = match scheme {
            Scheme::ImplicitMidpoint => {
                let h = hamiltonian_matrix(&grid, v, units)?;
                let (lu, rhs) = cayley(&h, dt, hbar);
                Stepper::Midpoint { lu, rhs }
            }
            Scheme::SplitOperator => {
                let n = grid.len();
                let lam2 = units.kinetic_scale();
                let half_potential = v.values().iter().map(|&x| Complex64::from_polar(1.0, -0.5 * x * dt / hbar)).collect();
                let kinetic = fft_wavenumbers(n, grid.spacing())
                    .into_iter()
                    .map(|k| Complex64::from_polar(1.0, -lam2 * k * k * dt / hbar))
                    .collect();
                let mut planner = FftPlanner::new();
                Stepper::Split { half_potential, kinetic, forward: planner.plan_fft_forward(n), inverse: planner.plan_fft_inverse(n) }
            }
        };
        Ok(Self { grid, potential: v.values().to_vec(), units: *units, dt, scheme, stepper })
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn scheme(&self) -> Scheme {
        self.scheme
    }

    /// The same propagator with time running the other way.
    pub fn reversed(&self) -> Result<Self> {
        let v = RealField::new(&self.grid, self.potential.clone())?;
        Self::new(&v, &self.units, self.scheme, -self.dt)
    }

    fn step_in_place(&self, psi: &mut [Complex64]) {
        match &self.stepper {
            Stepper::Midpoint { lu, rhs } => {
                let b = rhs * CVector::from_column_slice(psi);
                let x = lu.solve(&b).expect("Cayley factor is invertible for Hermitian H");
                psi.copy_from_slice(x.as_slice());
            }
            Stepper::Split { half_potential, kinetic, forward, inverse } => {
                let n = psi.len() as f64;
                psi.iter_mut().zip(half_potential).for_each(|(p, f)| *p *= f);
                forward.process(psi);
                psi.iter_mut().zip(kinetic).for_each(|(p, f)| *p *= f / n);
                inverse.process(psi);
                psi.iter_mut().zip(half_potential).for_each(|(p, f)| *p *= f);
            }
        }
    }

    pub fn step(&self, psi: &ComplexField) -> Result<ComplexField> {
        self.evolve(psi, 1)
    }

    pub fn evolve(&self, psi: &ComplexField, n_steps: usize) -> Result<ComplexField> {
        if psi.grid() != &self.grid {
            return Err(SusyError::GridMismatch);
        }
        let mut v = psi.values().to_vec();
        for _ in 0..n_steps {
            self.step_in_place(&mut v);
        }
        ComplexField::new(&self.grid, v)
    }

    /// ⟨ψ|H|ψ⟩/⟨ψ|ψ⟩ with the kinetic term matching the scheme.
    pub fn energy(&self, psi: &ComplexField) -> f64 {
        let vals = psi.values();
        let norm2: f64 = vals.iter().map(|c| c.norm_sqr()).sum();
        let pot: f64 = vals.iter().zip(&self.potential).map(|(c, v)| c.norm_sqr() * v).sum();
        let kin = match &self.stepper {
            Stepper::Midpoint { .. } => {
                let k = crate::operators::kinetic_matrix(&self.grid, &self.units);
                let re = DVector::from_iterator(vals.len(), vals.iter().map(|c| c.re));
                let im = DVector::from_iterator(vals.len(), vals.iter().map(|c| c.im));
                re.dot(&(&k * &re)) + im.dot(&(&k * &im))
            }
            Stepper::Split { forward, .. } => {
                let mut spec = vals.to_vec();
                forward.process(&mut spec);
                let lam2 = self.units.kinetic_scale();
                let n = vals.len() as f64;
                fft_wavenumbers(vals.len(), self.grid.spacing())
                    .iter()
                    .zip(&spec)
                    .map(|(k, c)| lam2 * k * k * c.norm_sqr())
                    .sum::<f64>()
                    / n
            }
        };
        (pot + kin) / norm2
    }

    /// Relative energy drift over one step, used to reject oversized steps.
    pub fn step_drift(&self, psi: &ComplexField) -> Result<f64> {
        let e0 = self.energy(psi);
        let drift = match self.scheme {
            // Exactly energy-conserving; the phase error per step on an
            // eigenstate of energy E is (E dt/ħ)³/12.
            Scheme::ImplicitMidpoint => (e0 * self.dt / self.units.hbar()).abs().powi(3) / 12.0,
            Scheme::SplitOperator => (self.energy(&self.step(psi)?) - e0).abs(),
        };
        Ok(drift / e0.abs().max(1.0))
    }
}

/// Evolve `psi0` in potential `v` for `cfg.n_steps` steps of `cfg.dt`.
pub fn propagate(psi0: &ComplexField, v: &RealField, units: &ModelUnits, cfg: &PropagationConfig) -> Result<ComplexField> {
    cfg.validate()?;
    if psi0.grid() != v.grid() {
        return Err(SusyError::GridMismatch);
    }
    let prop = Propagator::new(v, units, cfg.scheme, cfg.dt)?;
    let drift = prop.step_drift(psi0)?;
    if drift > MAX_STEP_DRIFT {
        return Err(SusyError::StepTooLarge { drift });
    }
    prop.evolve(psi0, cfg.n_steps)
}

fn to_complex(m: &DMatrix<f64>) -> CMatrix {
    m.map(|v| Complex64::new(v, 0.0))
}

/// exp(−i H t/ħ) for real symmetric H, via its eigendecomposition.
pub fn unitary_exponential(h: &DMatrix<f64>, t: f64, hbar: f64) -> CMatrix {
    let (vals, vecs) = sorted_eigen(h);
    let v = to_complex(&vecs);
    let phases = CMatrix::from_diagonal(&CVector::from_iterator(
        vals.len(),
        vals.iter().map(|&e| Complex64::from_polar(1.0, -e * t / hbar)),
    ));
    &v * phases * v.transpose()
}

fn norm(v: &CVector, h: f64) -> f64 {
    (v.iter().map(|c| c.norm_sqr()).sum::<f64>() * h).sqrt()
}

fn partner_start(psi0: &ComplexField, w: &SuperPotential) -> Result<(DMatrix<f64>, CVector, CVector)> {
    if psi0.grid() != w.grid() {
        return Err(SusyError::GridMismatch);
    }
    let (a, _) = charge_matrices(w);
    let psi = CVector::from_column_slice(psi0.values());
    let a_psi = to_complex(&a) * &psi;
    let h = w.grid().spacing();
    let ratio = norm(&a_psi, h) / norm(&psi, h);
    let scale = w.values().iter().fold(1.0f64, |m, x| m.max(x.abs()));
    if ratio < ANNIHILATED * scale {
        return Err(SusyError::ZeroPartnerState(ratio));
    }
    Ok((a, psi, a_psi))
}

/// ‖A e^{−iH₁t}ψ₀ − e^{−iH₂t}Aψ₀‖/‖Aψ₀‖ with dense matrix exponentials; zero up
/// to rounding because H₂A = AH₁ holds exactly for the matrices.
pub fn exact_intertwining_residual(psi0: &ComplexField, w: &SuperPotential, t: f64) -> Result<f64> {
    let (a, psi, a_psi) = partner_start(psi0, w)?;
    let hbar = w.units().hbar();
    let h1 = a.transpose() * &a;
    let h2 = &a * a.transpose();
    let lhs = to_complex(&a) * (unitary_exponential(&h1, t, hbar) * &psi);
    let rhs = unitary_exponential(&h2, t, hbar) * &a_psi;
    let h = w.grid().spacing();
    Ok(norm(&(lhs - rhs), h) / norm(&a_psi, h))
}

/// One-step map of a partner Hamiltonian under the chosen scheme.
fn partner_step(hmat: &DMatrix<f64>, kinetic: &DMatrix<f64>, dt: f64, hbar: f64, scheme: Scheme) -> CMatrix {
    match scheme {
        Scheme::ImplicitMidpoint => {
            let (lu, rhs) = cayley(hmat, dt, hbar);
            lu.solve(&rhs).expect("Cayley factor is invertible for Hermitian H")
        }
        Scheme::SplitOperator => {
            let rest = hmat - kinetic;
            let half = unitary_exponential(&rest, 0.5 * dt, hbar);
            &half * unitary_exponential(kinetic, dt, hbar) * &half
        }
    }
}

/// ‖A ψ⁽¹⁾(t) − ψ⁽²⁾(t)‖/‖Aψ₀‖ where ψ⁽¹⁾ evolves under H₁ = AᵀA from ψ₀ and
/// ψ⁽²⁾ under H₂ = AAᵀ from Aψ₀, both time-stepped with `cfg.scheme`. The step
/// count is ⌈t/dt⌉ with dt shrunk to land on `t_final`.
pub fn intertwining_residual(psi0: &ComplexField, w: &SuperPotential, t_final: f64, cfg: &PropagationConfig) -> Result<f64> {
    cfg.validate()?;
    if !(t_final >= 0.0) {
        return Err(SusyError::InvalidArgument(format!("final time must be non-negative, got {t_final}")));
    }
    let (a, psi, a_psi) = partner_start(psi0, w)?;
    if t_final == 0.0 {
        return Ok(0.0);
    }
    let steps = (t_final / cfg.dt).ceil().max(1.0) as usize;
    let dt = t_final / steps as f64;
    let hbar = w.units().hbar();
    let d = derivative_matrix(w.grid());
    let kinetic = (d.transpose() * &d) * w.units().kinetic_scale();
    let u1 = partner_step(&(a.transpose() * &a), &kinetic, dt, hbar, cfg.scheme);
    let u2 = partner_step(&(&a * a.transpose()), &kinetic, dt, hbar, cfg.scheme);
    let mut p1 = psi;
    let mut p2 = a_psi.clone();
    for _ in 0..steps {
        p1 = &u1 * p1;
        p2 = &u2 * p2;
    }
    let h = w.grid().spacing();
    Ok(norm(&(to_complex(&a) * p1 - p2), h) / norm(&a_psi, h))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::make_grid;

    #[test]
    fn config_validation() {
        assert!(PropagationConfig::new(0.0, 10, Scheme::ImplicitMidpoint).is_err());
        assert!(PropagationConfig::new(1e-3, 0, Scheme::SplitOperator).is_err());
        assert!(PropagationConfig::new(1e-3, 1, Scheme::SplitOperator).is_ok());
    }

    #[test]
    fn fft_wavenumber_layout() {
        let k = fft_wavenumbers(8, 0.5);
        let dk = std::f64::consts::TAU / 4.0;
        assert_eq!(k[1], dk);
        assert_eq!(k[4], 4.0 * dk);
        assert_eq!(k[7], -dk);
    }

    #[test]
    fn split_energy_of_plane_wave() {
        let u = ModelUnits::scaled();
        let g = make_grid(0.0, 2.0 * std::f64::consts::PI * (1.0 - 1.0 / 64.0), 64).unwrap();
        let v = RealField::zeros(&g);
        let prop = Propagator::new(&v, &u, Scheme::SplitOperator, 1e-3).unwrap();
        let psi = ComplexField::new(&g, g.points().iter().map(|&x| Complex64::from_polar(1.0, 3.0 * x)).collect()).unwrap();
        assert!((prop.energy(&psi) - 9.0).abs() < 1e-10);
    }
}
