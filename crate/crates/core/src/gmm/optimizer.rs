//! Ground-state optimization of a Gaussian-mixture trial density.
//!
//! The run has two phases. In the particle phase the sample points move along
//! conjugate-gradient directions of the local energy and the mixture is refit to
//! them by EM; a refit is kept only if it lowers the quadrature energy. Once
//! refits stop paying off, the parameter phase takes damped Newton steps directly
//! on the mixture parameters, re-seating the points at the mixture quantiles after
//! every step so the trace keeps reporting ensemble energies.

use nalgebra::{DMatrix, DVector, Dyn, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rayon::prelude::*;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Result, SusyError};
use crate::potential::Potential;
use crate::units::ModelUnits;

use super::cg::{cg_step, PointCg, StepConfig, ARMIJO, MAX_BACKTRACKS};
use super::em::em_refit;
use super::energy::{energy_functional, from_params, to_params, EnergyQuadrature, SampleEnsemble};
use super::mixture::{Component, GaussianMixture};

/// Consecutive sub-tolerance steps required to declare convergence.
pub const CONVERGENCE_WINDOW: usize = 10;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OptimizerConfig {
    pub n_gaussians: usize,
    pub n_points: usize,
    pub max_cg_steps: usize,
    pub energy_tolerance: f64,
    /// Largest point displacement on a trial CG move (length units).
    pub cg_step_size: f64,
    pub em_iterations: usize,
    pub seed: u64,
    /// Budget of particle-phase steps before switching to the parameter phase.
    pub particle_steps: usize,
    /// Consecutive rejected refits that end the particle phase.
    pub particle_patience: usize,
    /// Points of the deterministic energy quadrature.
    pub quadrature_points: usize,
    /// Point jitter as a fraction of the local quantile spacing.
    pub jitter: f64,
    /// Polak–Ribière restart period of the point moves.
    pub restart_every: usize,
    /// Parameter-phase steps between Hessian evaluations.
    pub hessian_refresh: usize,
    /// Smallest Hessian eigenvalue magnitude used, relative to the largest.
    pub hessian_floor: f64,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            n_gaussians: 15,
            n_points: 1000,
            max_cg_steps: 1000,
            energy_tolerance: 1e-10,
            cg_step_size: 0.01,
            em_iterations: 5,
            seed: 0,
            particle_steps: 100,
            particle_patience: 5,
            quadrature_points: 2001,
            jitter: 0.5,
            restart_every: 20,
            hessian_refresh: 4,
            hessian_floor: 1e-6,
        }
    }
}

impl OptimizerConfig {
    /// Settings for runs that must resolve fine structure of the optimum, such
    /// as the excited-state node: a tight tolerance and a fresh Hessian on
    /// every parameter step.
    pub fn high_precision() -> Self {
        Self { energy_tolerance: 1e-14, hessian_refresh: 1, ..Self::default() }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(SusyError::InvalidArgument(format!("optimizer: {m}")));
        if self.n_gaussians == 0 || self.n_points == 0 || self.max_cg_steps == 0 {
            return bad("counts must be positive");
        }
        if self.n_points < self.n_gaussians {
            return bad("need at least as many points as Gaussians");
        }
        if !(self.energy_tolerance > 0.0) || !(self.cg_step_size > 0.0) {
            return bad("tolerance and step size must be positive");
        }
        if self.hessian_refresh == 0 || !(self.hessian_floor > 0.0 && self.hessian_floor < 1.0) {
            return bad("hessian refresh must be positive and the floor lie in (0, 1)");
        }
        if self.quadrature_points < 3 || self.restart_every == 0 {
            return bad("quadrature needs at least 3 points and restarts a positive period");
        }
        if !(0.0..1.0).contains(&self.jitter) {
            return bad("jitter must lie in [0, 1)");
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Phase {
    Particle,
    Parameter,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub step: usize,
    pub phase: Phase,
    /// Deterministic quadrature energy of the current mixture.
    pub energy: f64,
    /// Mean local energy over the sample points.
    pub ensemble_energy: f64,
    pub mixture_hash: u64,
    pub node: Option<f64>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct OptimizerTrace {
    pub records: Vec<TraceRecord>,
}

#[derive(Clone, Debug)]
pub struct GroundState {
    pub mixture: GaussianMixture,
    pub energy: f64,
    pub ensemble: SampleEnsemble,
    pub trace: OptimizerTrace,
    pub converged: bool,
}

/// Recover the best-so-far result from a step-budget error.
pub fn best_effort(result: Result<GroundState>) -> Result<GroundState> {
    match result {
        Err(SusyError::MaxStepsExceeded(best)) => Ok(*best),
        other => other,
    }
}

/// Interval where V ≤ V_min + 2ε, with ε = λ√(V″(x_min)/2) the harmonic
/// zero-point energy at the minimum.
pub fn classically_allowed_region<P: Potential + ?Sized>(v: &P, domain: (f64, f64), units: &ModelUnits) -> (f64, f64) {
    const SCAN: usize = 4001;
    let h = (domain.1 - domain.0) / (SCAN - 1) as f64;
    let xs: Vec<f64> = (0..SCAN).map(|i| domain.0 + i as f64 * h).collect();
    let vs: Vec<f64> = xs.iter().map(|&x| v.value(x)).collect();
    let imin = (0..SCAN).min_by(|&a, &b| vs[a].total_cmp(&vs[b])).unwrap();
    let curvature = v.second_derivative(xs[imin]);
    if !(curvature > 0.0) {
        let quarter = 0.125 * (domain.1 - domain.0);
        return ((xs[imin] - quarter).max(domain.0), (xs[imin] + quarter).min(domain.1));
    }
    let threshold = vs[imin] + 2.0 * units.lambda() * (0.5 * curvature).sqrt();
    let first = vs.iter().position(|&x| x <= threshold).unwrap();
    let last = vs.iter().rposition(|&x| x <= threshold).unwrap();
    (xs[first], xs[last])
}

/// Equal-amplitude components spread uniformly over `region`.
pub fn initial_mixture(region: (f64, f64), n: usize) -> GaussianMixture {
    let span = region.1 - region.0;
    let sigma = span / (n.max(4) as f64);
    let c2 = 0.5 / (sigma * sigma);
    let comps = (0..n)
        .map(|k| {
            let c3 = if n == 1 { 0.5 * (region.0 + region.1) } else { region.0 + span * k as f64 / (n - 1) as f64 };
            Component { c0: 1.0, c2, c3 }
        })
        .collect();
    GaussianMixture::new(comps).expect("positive widths").normalized()
}

/// Signature of the per-step node probe used by the sector-2 run.
pub type NodeProbe<'a> = &'a dyn Fn(&GaussianMixture) -> Option<f64>;

pub struct Optimizer<'a, P: Potential + ?Sized> {
    v: &'a P,
    domain: (f64, f64),
    config: OptimizerConfig,
    units: ModelUnits,
    quadrature: EnergyQuadrature,
    jitter: Vec<f64>,
    node_probe: Option<NodeProbe<'a>>,
}

impl<'a, P: Potential + ?Sized> Optimizer<'a, P> {
    pub fn new(v: &'a P, domain: (f64, f64), config: OptimizerConfig, units: ModelUnits) -> Result<Self> {
        config.validate()?;
        if !(domain.0 < domain.1) {
            return Err(SusyError::Domain(format!("optimizer domain [{}, {}] is empty", domain.0, domain.1)));
        }
        let quadrature = EnergyQuadrature::new(v, domain, config.quadrature_points, &units)?;
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        let jitter = (0..config.n_points).map(|_| rng.random_range(-0.5..0.5)).collect();
        Ok(Self { v, domain, config, units, quadrature, jitter, node_probe: None })
    }

    pub fn with_node_probe(mut self, probe: NodeProbe<'a>) -> Self {
        self.node_probe = Some(probe);
        self
    }

    pub fn quadrature(&self) -> &EnergyQuadrature {
        &self.quadrature
    }

    /// Points at the mixture quantiles, perturbed by the seeded jitter pattern.
    pub fn seat_points(&self, m: &GaussianMixture) -> SampleEnsemble {
        let n = self.config.n_points;
        let probs: Vec<f64> = (0..n).map(|i| (i as f64 + 0.5) / n as f64).collect();
        let q = m.quantiles(&probs, self.domain.0, self.domain.1);
        let pts = (0..n)
            .map(|i| {
                let left = if i > 0 { q[i - 1] } else { q[i] };
                let right = if i + 1 < n { q[i + 1] } else { q[i] };
                let local = 0.5 * (right - left);
                (q[i] + self.config.jitter * self.jitter[i] * local).clamp(self.domain.0, self.domain.1)
            })
            .collect();
        SampleEnsemble::uniform(pts).expect("non-empty ensemble")
    }

    pub fn run(&self) -> Result<GroundState> {
        let region = classically_allowed_region(self.v, self.domain, &self.units);
        self.run_from(initial_mixture(region, self.config.n_gaussians))
    }

    pub fn run_from(&self, start: GaussianMixture) -> Result<GroundState> {
        let cfg = &self.config;
        if start.len() != cfg.n_gaussians {
            return Err(SusyError::InvalidArgument("starting mixture has the wrong component count".into()));
        }
        let mut mixture = start.normalized();
        let mut energy = self.quadrature.energy(&mixture);
        if !energy.is_finite() {
            return Err(SusyError::InvalidArgument("starting mixture is narrower than the quadrature grid".into()));
        }
        let mut ensemble = self.seat_points(&mixture);
        let mut trace = OptimizerTrace::default();
        let step_cfg = StepConfig { step_size: cfg.cg_step_size, domain: self.domain, restart_every: cfg.restart_every };
        let mut point_cg = PointCg::default();
        let mut param_search = ParamSearch::default();
        let mut phase = Phase::Particle;
        let mut particle_used = 0usize;
        let mut rejections = 0usize;
        let mut streak = 0usize;
        let mut converged = false;

        for step in 0..cfg.max_cg_steps {
            let previous = energy;
            match phase {
                Phase::Particle => {
                    particle_used += 1;
                    let accepted = match cg_step(&ensemble, &mixture, self.v, &self.units, &mut point_cg, &step_cfg) {
                        Ok(moved) => {
                            let fit = em_refit(&moved, cfg.n_gaussians, &mixture, cfg.em_iterations);
                            match fit {
                                Ok(fit) => {
                                    let e = self.quadrature.energy(&fit.mixture);
                                    if e < energy {
                                        mixture = fit.mixture;
                                        energy = e;
                                        ensemble = moved;
                                        true
                                    } else {
                                        false
                                    }
                                }
                                Err(SusyError::CollapsedComponent { .. }) => false,
                                Err(e) => return Err(e),
                            }
                        }
                        Err(SusyError::LineSearchFailure(_)) => false,
                        Err(e) => return Err(e),
                    };
                    if accepted {
                        rejections = 0;
                    } else {
                        rejections += 1;
                        point_cg.reset();
                        ensemble = self.seat_points(&mixture);
                    }
                }
                Phase::Parameter => match param_search.step(&self.quadrature, &mixture, energy, cfg) {
                    Some((m, e)) => {
                        mixture = m;
                        energy = e;
                        ensemble = self.seat_points(&mixture);
                    }
                    None => {
                        // Line search stagnation: nothing left to gain at this precision.
                        streak = CONVERGENCE_WINDOW - 1;
                    }
                },
            }

            let ensemble_energy = energy_functional(self.v, &mixture, &ensemble, &self.units)?;
            trace.records.push(TraceRecord {
                step,
                phase,
                energy,
                ensemble_energy,
                mixture_hash: mixture.snapshot_hash(),
                node: self.node_probe.and_then(|probe| probe(&mixture)),
            });

            if phase == Phase::Particle && (rejections >= cfg.particle_patience || particle_used >= cfg.particle_steps) {
                phase = Phase::Parameter;
                streak = 0;
                continue;
            }
            if (previous - energy).abs() < cfg.energy_tolerance {
                streak += 1;
            } else {
                streak = 0;
            }
            if phase == Phase::Parameter && streak >= CONVERGENCE_WINDOW {
                converged = true;
                break;
            }
        }

        let result = GroundState { mixture: mixture.normalized(), energy, ensemble, trace, converged };
        if converged {
            Ok(result)
        } else {
            Err(SusyError::MaxStepsExceeded(Box::new(result)))
        }
    }
}

/// Convenience wrapper: build an [`Optimizer`] and run it from the default start.
pub fn optimize_ground_state<P: Potential + ?Sized>(
    v: &P,
    domain: (f64, f64),
    config: &OptimizerConfig,
    units: &ModelUnits,
) -> Result<GroundState> {
    Optimizer::new(v, domain, config.clone(), *units)?.run()
}

/// Damped Newton steps on the mixture parameters. The Hessian comes from central
/// differences of the analytic gradient and is reused for a few steps; its
/// eigenvalues enter by magnitude, floored at a fraction of the largest, so
/// negative-curvature directions are descended rather than climbed.
#[derive(Default)]
struct ParamSearch {
    hessian: Option<SymmetricEigen<f64, Dyn>>,
    age: usize,
}

/// Parameter offset of the finite-difference Hessian.
const HESSIAN_STEP: f64 = 1e-6;

impl ParamSearch {
    fn refresh(&mut self, q: &EnergyQuadrature, theta: &[f64]) {
        let n = theta.len();
        let grad_at = |t: &[f64]| from_params(t).map(|m| q.energy_and_gradient(&m).1);
        let columns: Option<Vec<Vec<f64>>> = (0..n)
            .into_par_iter()
            .map(|j| {
                let mut tp = theta.to_vec();
                tp[j] += HESSIAN_STEP;
                let mut tm = theta.to_vec();
                tm[j] -= HESSIAN_STEP;
                let (gp, gm) = (grad_at(&tp)?, grad_at(&tm)?);
                Some(gp.iter().zip(&gm).map(|(a, b)| (a - b) / (2.0 * HESSIAN_STEP)).collect())
            })
            .collect();
        self.age = 0;
        self.hessian = columns.and_then(|c| {
            let eig = DMatrix::from_fn(n, n, |i, j| 0.5 * (c[j][i] + c[i][j])).symmetric_eigen();
            eig.eigenvalues.iter().all(|l| l.is_finite()).then_some(eig)
        });
    }

    fn direction(&self, grad: &[f64], floor: f64) -> Vec<f64> {
        let Some(eig) = &self.hessian else {
            return grad.iter().map(|g| -g).collect();
        };
        let scale = eig.eigenvalues.iter().fold(0.0f64, |a, l| a.max(l.abs()));
        let g = DVector::from_column_slice(grad);
        let mut d = DVector::zeros(grad.len());
        for (k, &l) in eig.eigenvalues.iter().enumerate() {
            let v = eig.eigenvectors.column(k);
            d -= v * (v.dot(&g) / l.abs().max(floor * scale));
        }
        d.iter().copied().collect()
    }

    fn step(
        &mut self,
        q: &EnergyQuadrature,
        m: &GaussianMixture,
        f0: f64,
        cfg: &OptimizerConfig,
    ) -> Option<(GaussianMixture, f64)> {
        let theta = to_params(m);
        let (_, grad) = q.energy_and_gradient(m);
        let fresh = self.hessian.is_none() || self.age >= cfg.hessian_refresh;
        if fresh {
            self.refresh(q, &theta);
        }
        self.age += 1;
        let found = search(q, &theta, &grad, &self.direction(&grad, cfg.hessian_floor), f0);
        if found.is_some() || fresh {
            return found;
        }
        // A stale Hessian can stall the search; retry with a new one.
        self.refresh(q, &theta);
        self.age = 1;
        search(q, &theta, &grad, &self.direction(&grad, cfg.hessian_floor), f0)
    }
}

/// Armijo backtracking along `dir`, falling back to −∇E if `dir` is not a
/// descent direction.
fn search(q: &EnergyQuadrature, theta: &[f64], grad: &[f64], dir: &[f64], f0: f64) -> Option<(GaussianMixture, f64)> {
    let mut dir = dir.to_vec();
    let mut slope: f64 = grad.iter().zip(&dir).map(|(g, d)| g * d).sum();
    if !(slope < 0.0) {
        dir = grad.iter().map(|g| -g).collect();
        slope = -grad.iter().map(|g| g * g).sum::<f64>();
        if !(slope < 0.0) {
            return None;
        }
    }
    let dnorm = dir.iter().fold(0.0f64, |a, d| a.max(d.abs()));
    let at = |alpha: f64| -> (Option<GaussianMixture>, f64) {
        let t: Vec<f64> = theta.iter().zip(&dir).map(|(t, d)| t + alpha * d).collect();
        match from_params(&t) {
            Some(mm) => {
                let e = q.energy(&mm);
                (Some(mm), e)
            }
            None => (None, f64::INFINITY),
        }
    };

    // Full steps, except that no parameter moves by more than 0.5.
    let mut alpha = (0.5 / dnorm).min(1.0);
    for _ in 0..MAX_BACKTRACKS {
        let (mm, f) = at(alpha);
        if f.is_finite() && f <= f0 + ARMIJO * alpha * slope {
            return Some((mm.unwrap(), f));
        }
        let curv = f - f0 - slope * alpha;
        alpha = if f.is_finite() && curv > 0.0 {
            (-slope * alpha * alpha / (2.0 * curv)).clamp(0.1 * alpha, 0.5 * alpha)
        } else {
            0.5 * alpha
        };
    }
    None
}
