//! One-dimensional scattering: a transfer-matrix solver for reflection and
//! transmission amplitudes, and the map between the amplitudes of partner
//! potentials.
//!
//! Waves come in from the left: ψ = e^{ikx} + R e^{−ikx} for x → −∞ and
//! ψ = T e^{ik′x} for x → +∞, with λk = √(E − V(−∞)) and λk′ = √(E − V(+∞)).

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Result, SusyError};
use crate::grid::RealField;
use crate::susy::{outer_count, riccati_potential, Sector, SuperPotential};
use crate::units::ModelUnits;

/// Fraction of the grid at each end over which V must be flat.
pub const ASYMPTOTIC_FRACTION: f64 = 0.10;
/// Allowed spread of V over each asymptotic region, relative to max(1, max|V|).
pub const FLATNESS_TOLERANCE: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScatteringAmplitudes {
    pub energy: f64,
    /// Wavenumber on the incident (left) side.
    pub k: f64,
    /// Wavenumber on the transmitted (right) side.
    pub k_prime: f64,
    pub r: Complex64,
    pub t: Complex64,
}

impl ScatteringAmplitudes {
    /// Reflection probability |R|².
    pub fn reflectance(&self) -> f64 {
        self.r.norm_sqr()
    }

    /// Transmitted flux fraction (k′/k)|T|².
    pub fn transmittance(&self) -> f64 {
        self.k_prime / self.k * self.t.norm_sqr()
    }

    /// |R|² + (k′/k)|T|² − 1.
    pub fn flux_defect(&self) -> f64 {
        self.reflectance() + self.transmittance() - 1.0
    }
}

/// The asymptotic levels W(−∞), W(+∞) of a superpotential.
pub fn asymptotic_levels(w: &SuperPotential) -> Result<(f64, f64)> {
    w.asymptotic_levels()
}

fn wavenumber(energy: f64, level: f64, lambda: f64) -> Result<f64> {
    if energy <= level {
        return Err(SusyError::ClosedChannel { energy, asymptote: level });
    }
    Ok((energy - level).sqrt() / lambda)
}

fn check_flat(v: &[f64]) -> Result<()> {
    let m = outer_count(v.len(), ASYMPTOTIC_FRACTION);
    let scale = v.iter().fold(1.0f64, |a, x| a.max(x.abs()));
    let spread = |s: &[f64]| {
        let (lo, hi) = s.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| (lo.min(x), hi.max(x)));
        hi - lo
    };
    let worst = spread(&v[..m]).max(spread(&v[v.len() - m..]));
    if worst > FLATNESS_TOLERANCE * scale {
        return Err(SusyError::NonAsymptoticPotential { spread: worst });
    }
    Ok(())
}

/// Reflection and transmission amplitudes of `v` at energy `energy`.
///
/// V is taken constant on each grid cell; the exact cell propagators are
/// chained from the right edge to the left and matched to plane waves.
pub fn solve_scattering(v: &RealField, energy: f64, units: &ModelUnits) -> Result<ScatteringAmplitudes> {
    let vals = v.values();
    let n = vals.len();
    if n < 3 {
        return Err(SusyError::Domain("scattering needs at least 3 grid points".into()));
    }
    check_flat(vals)?;
    let lam = units.lambda();
    let k = wavenumber(energy, vals[0], lam)?;
    let kp = wavenumber(energy, vals[n - 1], lam)?;
    let grid = v.grid();
    let h = grid.spacing();
    let x_left = grid.points()[0] + 0.5 * h;
    let x_right = grid.points()[n - 1] - 0.5 * h;

    let i = Complex64::i();
    let mut psi = Complex64::new(1.0, 0.0);
    let mut dpsi = i * kp;
    for &vi in vals[1..n - 1].iter().rev() {
        let q = (Complex64::new(energy - vi, 0.0)).sqrt() / lam;
        let (c, s_over_q) = if q.norm() * h > 1e-8 {
            ((q * h).cos(), (q * h).sin() / q)
        } else {
            (Complex64::new(1.0, 0.0), Complex64::new(h, 0.0))
        };
        let next_psi = c * psi - s_over_q * dpsi;
        let next_dpsi = q * q * s_over_q * psi + c * dpsi;
        psi = next_psi;
        dpsi = next_dpsi;
    }
    let ik = i * k;
    let incoming = 0.5 * (psi + dpsi / ik);
    let outgoing = 0.5 * (psi - dpsi / ik);
    let r = outgoing / incoming * (2.0 * ik * x_left).exp();
    let t = (-i * kp * x_right).exp() / (incoming * (-ik * x_left).exp());
    Ok(ScatteringAmplitudes { energy, k, k_prime: kp, r, t })
}

/// Open-channel wavenumbers λk = √(E − W₋²), λk′ = √(E − W₊²).
fn partner_wavenumbers(energy: f64, w: &SuperPotential) -> Result<(f64, f64, f64, f64)> {
    let (wm, wp) = w.asymptotic_levels()?;
    let lam = w.lambda();
    let k = wavenumber(energy, wm * wm, lam)?;
    let kp = wavenumber(energy, wp * wp, lam)?;
    Ok((wm, wp, k, kp))
}

/// Sector-1 amplitudes from sector-2 amplitudes at the same energy:
/// R⁽¹⁾ = (W₋ + iλk)/(W₋ − iλk)·R⁽²⁾ and T⁽¹⁾ = (W₊ − iλk′)/(W₋ − iλk)·T⁽²⁾.
pub fn partner_amplitudes(s2: &ScatteringAmplitudes, w: &SuperPotential) -> Result<ScatteringAmplitudes> {
    let (wm, wp, k, kp) = partner_wavenumbers(s2.energy, w)?;
    let lam = w.lambda();
    let left_in = Complex64::new(wm, -lam * k);
    let r = Complex64::new(wm, lam * k) / left_in * s2.r;
    let t = Complex64::new(wp, -lam * kp) / left_in * s2.t;
    Ok(ScatteringAmplitudes { energy: s2.energy, k, k_prime: kp, r, t })
}

/// Inverse of [`partner_amplitudes`]: sector-2 amplitudes from sector 1.
pub fn inverse_partner_amplitudes(s1: &ScatteringAmplitudes, w: &SuperPotential) -> Result<ScatteringAmplitudes> {
    let (wm, wp, k, kp) = partner_wavenumbers(s1.energy, w)?;
    let lam = w.lambda();
    let left_in = Complex64::new(wm, -lam * k);
    let r = left_in / Complex64::new(wm, lam * k) * s1.r;
    let t = left_in / Complex64::new(wp, -lam * kp) * s1.t;
    Ok(ScatteringAmplitudes { energy: s1.energy, k, k_prime: kp, r, t })
}

/// Solve both partner potentials W² ∓ λW′ of `w` at one energy.
pub fn partner_scattering(w: &SuperPotential, energy: f64) -> Result<(ScatteringAmplitudes, ScatteringAmplitudes)> {
    let units = *w.units();
    let v1 = riccati_potential(w, Sector::Minus);
    let v2 = riccati_potential(w, Sector::Plus);
    Ok((solve_scattering(&v1, energy, &units)?, solve_scattering(&v2, energy, &units)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::make_grid;

    #[test]
    fn free_particle_transmits() {
        let g = make_grid(-5.0, 5.0, 201).unwrap();
        let s = solve_scattering(&RealField::zeros(&g), 1.3, &ModelUnits::scaled()).unwrap();
        assert!(s.r.norm() < 1e-14);
        assert!((s.t.norm() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn closed_channel_and_sloped_edges_are_rejected() {
        let u = ModelUnits::scaled();
        let g = make_grid(-5.0, 5.0, 201).unwrap();
        let step = g.sample(|x| if x > 0.0 { 2.0 } else { 0.0 });
        assert!(matches!(solve_scattering(&step, 1.0, &u), Err(SusyError::ClosedChannel { .. })));
        let ramp = g.sample(|x| 0.1 * x);
        assert!(matches!(solve_scattering(&ramp, 3.0, &u), Err(SusyError::NonAsymptoticPotential { .. })));
    }
}
