use crate::error::{Result, SusyError};
use crate::potential::Potential;
use crate::units::ModelUnits;

use super::mixture::{Component, GaussianMixture};

/// Bohm quantum potential Q = −λ² (√ρ)″/√ρ = −λ² (L″/2 + L′²/4), with L = ln ρ.
pub fn quantum_potential(m: &GaussianMixture, x: f64, units: &ModelUnits) -> Result<f64> {
    let d = m.log_derivatives(x);
    if !(d.l0 > f64::MIN_POSITIVE.ln()) {
        return Err(SusyError::DegenerateDensity { fraction: 100.0 });
    }
    Ok(quantum_potential_from(d.l1, d.l2, units.kinetic_scale()))
}

pub(crate) fn quantum_potential_from(l1: f64, l2: f64, lam2: f64) -> f64 {
    -lam2 * (0.5 * l2 + 0.25 * l1 * l1)
}

/// E(x) = V(x) + Q(x).
pub fn local_energy<P: Potential + ?Sized>(v: &P, m: &GaussianMixture, x: f64, units: &ModelUnits) -> Result<f64> {
    Ok(v.value(x) + quantum_potential(m, x, units)?)
}

/// E(x) and dE/dx, without the underflow check (log-space is always finite).
pub(crate) fn local_energy_and_slope<P: Potential + ?Sized>(v: &P, m: &GaussianMixture, x: f64, lam2: f64) -> (f64, f64) {
    let d = m.log_derivatives(x);
    let e = v.value(x) + quantum_potential_from(d.l1, d.l2, lam2);
    let de = v.derivative(x) - lam2 * (0.5 * d.l3 + 0.5 * d.l1 * d.l2);
    (e, de)
}

/// Points at which the density is sampled, with their weights.
#[derive(Clone, Debug, PartialEq)]
pub struct SampleEnsemble {
    points: Vec<f64>,
    weights: Vec<f64>,
}

impl SampleEnsemble {
    pub fn new(points: Vec<f64>, weights: Vec<f64>) -> Result<Self> {
        if points.is_empty() {
            return Err(SusyError::EmptyEnsemble);
        }
        if weights.len() != points.len() {
            return Err(SusyError::InvalidArgument("one weight per point required".into()));
        }
        if points.iter().chain(&weights).any(|v| !v.is_finite()) || weights.iter().any(|&w| w < 0.0) {
            return Err(SusyError::InvalidArgument("ensemble needs finite points and non-negative weights".into()));
        }
        Ok(Self { points, weights })
    }

    pub fn uniform(points: Vec<f64>) -> Result<Self> {
        let n = points.len();
        Self::new(points, vec![1.0; n])
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Sum in a fixed pairwise order, so results do not depend on scheduling.
pub(crate) fn pairwise_sum(xs: &[f64]) -> f64 {
    if xs.len() <= 8 {
        return xs.iter().sum();
    }
    let (a, b) = xs.split_at(xs.len() / 2);
    pairwise_sum(a) + pairwise_sum(b)
}

/// Weighted mean of the local energy over the ensemble.
pub fn energy_functional<P: Potential + ?Sized>(
    v: &P,
    m: &GaussianMixture,
    ensemble: &SampleEnsemble,
    units: &ModelUnits,
) -> Result<f64> {
    let lam2 = units.kinetic_scale();
    let terms: Vec<f64> = ensemble
        .points
        .iter()
        .zip(&ensemble.weights)
        .map(|(&x, &w)| w * local_energy_and_slope(v, m, x, lam2).0)
        .collect();
    let wsum = pairwise_sum(&ensemble.weights);
    if wsum <= 0.0 {
        return Err(SusyError::EmptyEnsemble);
    }
    Ok(pairwise_sum(&terms) / wsum)
}

/// Mixture parameters as an unconstrained vector (ln c0, ln c2, c3) per component.
pub fn to_params(m: &GaussianMixture) -> Vec<f64> {
    m.components().iter().flat_map(|c| [c.c0.ln(), c.c2.ln(), c.c3]).collect()
}

pub fn from_params(theta: &[f64]) -> Option<GaussianMixture> {
    let comps = theta
        .chunks_exact(3)
        .map(|p| Component { c0: p[0].exp(), c2: p[1].exp(), c3: p[2] })
        .collect();
    GaussianMixture::new(comps).ok()
}

/// Deterministic quadrature of E[ρ] = ∫ρ (V + λ²L′²/4) / ∫ρ on a uniform grid.
///
/// Mixtures with a component narrower than the grid can resolve
/// (c2 above [`EnergyQuadrature::c2_limit`]) evaluate to +∞.
#[derive(Clone, Debug)]
pub struct EnergyQuadrature {
    points: Vec<f64>,
    potential: Vec<f64>,
    lam2: f64,
    c2_limit: f64,
}

impl EnergyQuadrature {
    pub fn new<P: Potential + ?Sized>(v: &P, domain: (f64, f64), n: usize, units: &ModelUnits) -> Result<Self> {
        let grid = crate::grid::Grid1D::new(domain.0, domain.1, n)?;
        let h = grid.spacing();
        let points = grid.points().to_vec();
        let potential = points.iter().map(|&x| v.value(x)).collect();
        Ok(Self { points, potential, lam2: units.kinetic_scale(), c2_limit: 1.0 / (32.0 * h * h) })
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn c2_limit(&self) -> f64 {
        self.c2_limit
    }

    fn resolvable(&self, m: &GaussianMixture) -> bool {
        m.components().iter().all(|c| c.c2 <= self.c2_limit)
    }

    pub fn energy(&self, m: &GaussianMixture) -> f64 {
        if !self.resolvable(m) {
            return f64::INFINITY;
        }
        let mut logs = Vec::with_capacity(self.points.len());
        let mut e = Vec::with_capacity(self.points.len());
        for (&x, &v) in self.points.iter().zip(&self.potential) {
            let d = m.log_derivatives(x);
            logs.push(d.l0);
            e.push(v + 0.25 * self.lam2 * d.l1 * d.l1);
        }
        let lmax = logs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let w: Vec<f64> = logs.iter().map(|l| (l - lmax).exp()).collect();
        let num: Vec<f64> = w.iter().zip(&e).map(|(a, b)| a * b).collect();
        pairwise_sum(&num) / pairwise_sum(&w)
    }

    /// Energy and its gradient with respect to [`to_params`].
    pub fn energy_and_gradient(&self, m: &GaussianMixture) -> (f64, Vec<f64>) {
        let comps = m.components();
        let k = comps.len();
        if !self.resolvable(m) {
            return (f64::INFINITY, vec![0.0; 3 * k]);
        }
        let np = self.points.len();
        let mut resp = Vec::with_capacity(k);
        let mut logs = Vec::with_capacity(np);
        let mut l1s = Vec::with_capacity(np);
        let mut all_r = Vec::with_capacity(np * k);
        for &x in &self.points {
            let l0 = m.responsibilities(x, &mut resp);
            let l1: f64 = comps.iter().zip(&resp).map(|(c, r)| r * (-2.0 * c.c2 * (x - c.c3))).sum();
            logs.push(l0);
            l1s.push(l1);
            all_r.extend_from_slice(&resp);
        }
        let lmax = logs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let w: Vec<f64> = logs.iter().map(|l| (l - lmax).exp()).collect();
        let e: Vec<f64> = self.potential.iter().zip(&l1s).map(|(v, l1)| v + 0.25 * self.lam2 * l1 * l1).collect();
        let z = pairwise_sum(&w);
        let energy = pairwise_sum(&w.iter().zip(&e).map(|(a, b)| a * b).collect::<Vec<_>>()) / z;

        let mut grad = vec![0.0; 3 * k];
        for i in 0..np {
            let x = self.points[i];
            let l1 = l1s[i];
            let de = e[i] - energy;
            let kin = 0.5 * self.lam2 * l1;
            for (j, c) in comps.iter().enumerate() {
                let r = all_r[i * k + j];
                if r == 0.0 {
                    continue;
                }
                let d = x - c.c3;
                let a = c.c2;
                let u = -2.0 * a * d;
                let (qa, pa) = (r, r * (u - l1));
                let (qs, ps) = (-r * a * d * d, r * (2.0 * a * a * d.powi(3) - 2.0 * a * d) + l1 * r * a * d * d);
                let (qc, pc) = (r * 2.0 * a * d, r * (2.0 * a - 4.0 * a * a * d * d) - l1 * r * 2.0 * a * d);
                grad[3 * j] += w[i] * (qa * de + kin * pa);
                grad[3 * j + 1] += w[i] * (qs * de + kin * ps);
                grad[3 * j + 2] += w[i] * (qc * de + kin * pc);
            }
        }
        grad.iter_mut().for_each(|g| *g /= z);
        (energy, grad)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potential::Polynomial;

    #[test]
    fn harmonic_ground_has_flat_local_energy() {
        let u = ModelUnits::scaled();
        let m = GaussianMixture::single(1.0, 1.0, 0.0).unwrap();
        let v = Polynomial::harmonic();
        for &x in &[-2.0, -0.5, 0.0, 1.3, 3.0] {
            let q = quantum_potential(&m, x, &u).unwrap();
            assert!((q - (1.0 - x * x)).abs() < 1e-12);
            assert!((local_energy(&v, &m, x, &u).unwrap() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn doubling_mass_halves_q() {
        let m = GaussianMixture::new(vec![
            Component { c0: 1.0, c2: 2.0, c3: -0.4 },
            Component { c0: 0.5, c2: 1.0, c3: 0.9 },
        ])
        .unwrap();
        let u1 = ModelUnits::new(1.0, 3.0).unwrap();
        let u2 = ModelUnits::new(1.0, 6.0).unwrap();
        for &x in &[-1.0, 0.2, 1.4] {
            let q1 = quantum_potential(&m, x, &u1).unwrap();
            let q2 = quantum_potential(&m, x, &u2).unwrap();
            assert!((q2 - 0.5 * q1).abs() < 1e-14 * q1.abs().max(1.0));
        }
    }

    #[test]
    fn offset_center_is_not_an_eigenstate() {
        let u = ModelUnits::scaled();
        let m = GaussianMixture::single(1.0, 1.0, 0.5).unwrap();
        let v = Polynomial::harmonic();
        let es: Vec<f64> = (-10..=10).map(|i| local_energy(&v, &m, i as f64 * 0.2, &u).unwrap()).collect();
        let spread = es.iter().cloned().fold(f64::NEG_INFINITY, f64::max) - es.iter().cloned().fold(f64::INFINITY, f64::min);
        assert!(spread > 0.0);
    }

    #[test]
    fn single_point_ensemble() {
        let u = ModelUnits::scaled();
        let m = GaussianMixture::single(1.0, 0.7, 0.2).unwrap();
        let v = Polynomial::sextic();
        let ens = SampleEnsemble::uniform(vec![0.37]).unwrap();
        let e = energy_functional(&v, &m, &ens, &u).unwrap();
        assert!((e - local_energy(&v, &m, 0.37, &u).unwrap()).abs() < 1e-15);
        assert!(matches!(SampleEnsemble::uniform(vec![]), Err(SusyError::EmptyEnsemble)));
    }

    #[test]
    fn quadrature_gradient_matches_finite_differences() {
        let u = ModelUnits::scaled();
        let v = Polynomial::quartic_double_well(1.0, 2.0, 0.0);
        let q = EnergyQuadrature::new(&v, (-4.0, 4.0), 801, &u).unwrap();
        let m = GaussianMixture::new(vec![
            Component { c0: 0.8, c2: 2.0, c3: -0.9 },
            Component { c0: 1.0, c2: 1.5, c3: 1.1 },
            Component { c0: 0.3, c2: 0.8, c3: 0.1 },
        ])
        .unwrap();
        let theta = to_params(&m);
        let (e, g) = q.energy_and_gradient(&m);
        assert!((e - q.energy(&m)).abs() < 1e-13);
        for i in 0..theta.len() {
            let step = 1e-6;
            let mut tp = theta.clone();
            tp[i] += step;
            let mut tm = theta.clone();
            tm[i] -= step;
            let fd = (q.energy(&from_params(&tp).unwrap()) - q.energy(&from_params(&tm).unwrap())) / (2.0 * step);
            assert!((fd - g[i]).abs() < 1e-6 * fd.abs().max(1.0), "param {i}: fd {fd} vs {}", g[i]);
        }
    }
}
