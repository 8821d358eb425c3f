//! Conjugate-gradient moves of the sample points along −∇E(x).

use crate::error::{Result, SusyError};
use crate::potential::Potential;
use crate::units::ModelUnits;

use super::energy::{local_energy_and_slope, pairwise_sum, SampleEnsemble};
use super::mixture::GaussianMixture;

pub(crate) const MAX_BACKTRACKS: usize = 40;
pub(crate) const ARMIJO: f64 = 1e-4;

#[derive(Clone, Debug)]
pub struct StepConfig {
    /// Largest displacement of any point on the first trial step.
    pub step_size: f64,
    /// Points are kept inside this interval.
    pub domain: (f64, f64),
    /// Polak–Ribière restart period.
    pub restart_every: usize,
}

impl StepConfig {
    pub fn new(step_size: f64, domain: (f64, f64)) -> Self {
        Self { step_size, domain, restart_every: 20 }
    }
}

/// Memory carried between CG steps.
#[derive(Clone, Debug, Default)]
pub struct PointCg {
    prev_grad: Option<Vec<f64>>,
    prev_dir: Vec<f64>,
    iterations: usize,
}

impl PointCg {
    pub fn reset(&mut self) {
        *self = Self::default();
    }
}

fn weighted_energy<P: Potential + ?Sized>(v: &P, m: &GaussianMixture, pts: &[f64], w: &[f64], lam2: f64) -> f64 {
    let terms: Vec<f64> = pts.iter().zip(w).map(|(&x, &wi)| wi * local_energy_and_slope(v, m, x, lam2).0).collect();
    pairwise_sum(&terms)
}

/// One Polak–Ribière CG move of all points with a backtracking line search on
/// the ensemble-averaged local energy. The density is held fixed.
pub fn cg_step<P: Potential + ?Sized>(
    ensemble: &SampleEnsemble,
    m: &GaussianMixture,
    v: &P,
    units: &ModelUnits,
    state: &mut PointCg,
    cfg: &StepConfig,
) -> Result<SampleEnsemble> {
    let lam2 = units.kinetic_scale();
    let wsum = pairwise_sum(ensemble.weights());
    if wsum <= 0.0 {
        return Err(SusyError::EmptyEnsemble);
    }
    let w: Vec<f64> = ensemble.weights().iter().map(|wi| wi / wsum).collect();
    let pts = ensemble.points();
    let mut f0_terms = Vec::with_capacity(pts.len());
    let mut grad = Vec::with_capacity(pts.len());
    for (&x, &wi) in pts.iter().zip(&w) {
        let (e, de) = local_energy_and_slope(v, m, x, lam2);
        f0_terms.push(wi * e);
        grad.push(wi * de);
    }
    let f0 = pairwise_sum(&f0_terms);
    let gmax = grad.iter().zip(&w).map(|(g, wi)| if *wi > 0.0 { (g / wi).abs() } else { 0.0 }).fold(0.0, f64::max);
    if gmax <= 1e-12 * f0.abs().max(1.0) {
        state.reset();
        return Ok(ensemble.clone());
    }

    let mut dir: Vec<f64> = grad.iter().map(|g| -g).collect();
    if let Some(prev) = &state.prev_grad {
        if !state.iterations.is_multiple_of(cfg.restart_every) {
            let num: f64 = grad.iter().zip(prev).map(|(g, p)| g * (g - p)).sum();
            let den: f64 = prev.iter().map(|p| p * p).sum();
            let beta = if den > 0.0 { (num / den).max(0.0) } else { 0.0 };
            dir.iter_mut().zip(&state.prev_dir).for_each(|(d, p)| *d += beta * p);
        }
    }
    let mut slope: f64 = grad.iter().zip(&dir).map(|(g, d)| g * d).sum();
    if slope >= 0.0 {
        dir = grad.iter().map(|g| -g).collect();
        slope = -grad.iter().map(|g| g * g).sum::<f64>();
    }

    let dmax = dir.iter().fold(0.0f64, |a, d| a.max(d.abs()));
    let mut alpha = cfg.step_size / dmax;
    let (lo, hi) = cfg.domain;
    for _ in 0..MAX_BACKTRACKS {
        let trial: Vec<f64> = pts.iter().zip(&dir).map(|(x, d)| (x + alpha * d).clamp(lo, hi)).collect();
        let f = weighted_energy(v, m, &trial, &w, lam2);
        if f <= f0 + ARMIJO * alpha * slope {
            state.prev_grad = Some(grad);
            state.prev_dir = dir;
            state.iterations += 1;
            return SampleEnsemble::new(trial, ensemble.weights().to_vec());
        }
        alpha *= 0.5;
    }
    state.reset();
    Err(SusyError::LineSearchFailure(MAX_BACKTRACKS))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potential::Polynomial;

    #[test]
    fn stationary_points_do_not_move() {
        let u = ModelUnits::scaled();
        let m = GaussianMixture::single(1.0, 1.0, 0.0).unwrap();
        let ens = SampleEnsemble::uniform(vec![-1.0, -0.2, 0.4, 1.5]).unwrap();
        let mut st = PointCg::default();
        let out = cg_step(&ens, &m, &Polynomial::harmonic(), &u, &mut st, &StepConfig::new(0.1, (-5.0, 5.0))).unwrap();
        for (a, b) in out.points().iter().zip(ens.points()) {
            assert!((a - b).abs() < 1e-10);
        }
    }

    #[test]
    fn points_right_of_minimum_move_left() {
        // Narrow trial for the oscillator: E(x) = 1/2 + 3x²/4, minimum at 0.
        let u = ModelUnits::scaled();
        let m = GaussianMixture::single(1.0, 0.5, 0.0).unwrap();
        let ens = SampleEnsemble::uniform(vec![0.3, 0.8, 1.2, 2.0]).unwrap();
        let mut st = PointCg::default();
        let out = cg_step(&ens, &m, &Polynomial::harmonic(), &u, &mut st, &StepConfig::new(0.1, (-5.0, 5.0))).unwrap();
        for (a, b) in out.points().iter().zip(ens.points()) {
            assert!(a < b);
        }
    }
}
