//! Excited states from two ground-state optimizations: the sector-1 mixture
//! defines the partner potential, whose ground energy is the first excitation.

use std::sync::Arc;

use crate::error::Result;
use crate::grid::Grid1D;
use crate::potential::Potential;
use crate::units::ModelUnits;

use super::mixture::GaussianMixture;
use super::node::{excited_state_from_mixtures, locate_node, node_envelope};
use super::optimizer::{best_effort, GroundState, Optimizer, OptimizerConfig};

/// V₂(x) = V₁(x) − E₀ − λ² ∂² ln ρ(x) for a mixture density ρ; the derivatives
/// use the analytic third and fourth log-derivatives of the mixture.
#[derive(Clone)]
pub struct MixturePartnerPotential {
    base: Arc<dyn Potential>,
    mixture: GaussianMixture,
    shift: f64,
    lam2: f64,
}

impl MixturePartnerPotential {
    pub fn new(base: Arc<dyn Potential>, mixture: GaussianMixture, shift: f64, units: &ModelUnits) -> Self {
        Self { base, mixture, shift, lam2: units.kinetic_scale() }
    }

    pub fn mixture(&self) -> &GaussianMixture {
        &self.mixture
    }
}

impl std::fmt::Debug for MixturePartnerPotential {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("MixturePartnerPotential").field("shift", &self.shift).finish_non_exhaustive()
    }
}

impl Potential for MixturePartnerPotential {
    fn value(&self, x: f64) -> f64 {
        self.base.value(x) - self.shift - self.lam2 * self.mixture.log_derivatives(x).l2
    }
    fn derivative(&self, x: f64) -> f64 {
        self.base.derivative(x) - self.lam2 * self.mixture.log_derivatives(x).l3
    }
    fn second_derivative(&self, x: f64) -> f64 {
        self.base.second_derivative(x) - self.lam2 * self.mixture.log_derivatives(x).l4
    }
}

#[derive(Clone, Debug)]
pub struct PipelineResult {
    pub sector1: GroundState,
    pub sector2: GroundState,
    /// Node of the reconstructed first excited state at the end of the run.
    pub node: Option<f64>,
}

impl PipelineResult {
    /// Excitation energy E₁ − E₀ predicted by the sector-2 ground state.
    pub fn excitation(&self) -> f64 {
        self.sector2.energy
    }

    /// (step, node) pairs recorded during the sector-2 run.
    pub fn node_trace(&self) -> Vec<(usize, f64)> {
        self.sector2.trace.records.iter().filter_map(|r| r.node.map(|n| (r.step, n))).collect()
    }

    /// Block maxima of |node| over the final `fraction` of the sector-2 run.
    pub fn node_envelope(&self, fraction: f64, blocks: usize) -> Vec<f64> {
        let nodes: Vec<Option<f64>> = self.sector2.trace.records.iter().map(|r| r.node).collect();
        node_envelope(&nodes, fraction, blocks)
    }
}

/// Points of the grid used to locate the excited-state node.
const NODE_GRID_POINTS: usize = 4001;

/// Optimize the sector-1 ground state, build V₂ from its mixture and optimize
/// the sector-2 ground state, tracking the excited-state node along the way.
/// Runs that exhaust their step budget contribute their best-so-far result.
pub fn run_partner_pipeline(
    v1: Arc<dyn Potential>,
    domain: (f64, f64),
    sector1: &OptimizerConfig,
    sector2: &OptimizerConfig,
    units: &ModelUnits,
) -> Result<PipelineResult> {
    let s1 = best_effort(Optimizer::new(v1.as_ref(), domain, sector1.clone(), *units)?.run())?;
    let v2 = MixturePartnerPotential::new(v1.clone(), s1.mixture.clone(), s1.energy, units);
    let node_grid = Grid1D::new(domain.0, domain.1, NODE_GRID_POINTS)?;
    let m1 = s1.mixture.clone();
    let probe = move |m2: &GaussianMixture| {
        locate_node(&excited_state_from_mixtures(&m1, m2, units, &node_grid)).ok()
    };
    let s2 = best_effort(
        Optimizer::new(&v2, domain, sector2.clone(), *units)?
            .with_node_probe(&probe)
            .run(),
    )?;
    let node = s2.trace.records.last().and_then(|r| r.node);
    Ok(PipelineResult { sector1: s1, sector2: s2, node })
}
