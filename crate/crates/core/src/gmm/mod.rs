//! Adaptive Gaussian-mixture ground states.
//!
//! The trial density is a sum of Gaussians; its energy is the average of the
//! local energy V + Q[ρ] with Q the Bohm quantum potential. Sample points are
//! moved by conjugate gradients and the mixture is refit to them by EM.

mod cg;
mod em;
mod energy;
mod mixture;
mod node;
mod optimizer;
mod pipeline;

pub use cg::{cg_step, PointCg, StepConfig};
pub use em::{em_refit, EmFit};
pub use energy::{
    energy_functional, from_params, local_energy, quantum_potential, to_params, EnergyQuadrature, SampleEnsemble,
};
pub use mixture::{Component, GaussianMixture, LogDerivatives};
pub use node::{excited_state_from_mixtures, is_non_increasing, locate_node, node_envelope};
pub use optimizer::{
    best_effort, classically_allowed_region, initial_mixture, optimize_ground_state, GroundState, NodeProbe,
    OptimizerConfig, OptimizerTrace, Optimizer, Phase, TraceRecord, CONVERGENCE_WINDOW,
};
pub use pipeline::{run_partner_pipeline, MixturePartnerPotential, PipelineResult};
