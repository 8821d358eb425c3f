use thiserror::Error;

use crate::gmm::GroundState;

/// Every failure the numerical core can report.
///
/// Each variant maps to a stable, module-qualified code (see [`SusyError::code`])
/// so that front ends can report errors without matching on message text.
#[derive(Debug, Error)]
pub enum SusyError {
    #[error("invalid domain: {0}")]
    Domain(String),
    #[error("field lives on a different grid than the operator")]
    GridMismatch,
    #[error("invalid units: {0}")]
    InvalidUnits(String),
    #[error("unsupported energy unit `{0}` (expected `hartree` or `cm-1`)")]
    UnsupportedUnit(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("eigensolver did not converge: {0}")]
    Convergence(String),

    #[error("density is degenerate: {fraction:.1}% of central samples fall below the floor")]
    DegenerateDensity { fraction: f64 },
    #[error("potential supports {found} bound states, {requested} requested")]
    InsufficientBoundStates { requested: usize, found: usize },
    #[error("local energy {0:e} is too close to zero to map a state")]
    ZeroEnergy(f64),

    #[error("scattering channel closed: E = {energy} is below asymptote {asymptote}")]
    ClosedChannel { energy: f64, asymptote: f64 },
    #[error("potential is not flat over the outer tenth of the grid (spread {spread:e})")]
    NonAsymptoticPotential { spread: f64 },
    #[error("superpotential is not flat at the grid ends (spread {spread:e}, allowed {allowed:e})")]
    NonAsymptoticSuperpotential { spread: f64, allowed: f64 },

    #[error("time step too large: per-step energy error {drift:e} exceeds 1e-6")]
    StepTooLarge { drift: f64 },
    #[error("partner state A psi vanishes (relative norm {0:e})")]
    ZeroPartnerState(f64),

    #[error("sample ensemble is empty")]
    EmptyEnsemble,
    #[error("line search failed after {0} backtracks")]
    LineSearchFailure(usize),
    #[error("mixture component {index} collapsed (c2 = {c2:e})")]
    CollapsedComponent { index: usize, c2: f64 },
    #[error("optimizer hit the step budget of {} without meeting the tolerance", .0.trace.records.len())]
    MaxStepsExceeded(Box<GroundState>),
    #[error("expected exactly one sign change, found {0}")]
    NodeCount(usize),

    #[error("vector component {component} vanishes somewhere on the grid")]
    VanishingComponent { component: &'static str },
    #[error("trial vector is zero")]
    ZeroTrial,
}

impl SusyError {
    /// Stable machine-readable code, prefixed with the owning module.
    pub fn code(&self) -> &'static str {
        use SusyError::*;
        match self {
            Domain(_) => "grid.domain",
            GridMismatch => "grid.mismatch",
            InvalidUnits(_) => "grid.units",
            UnsupportedUnit(_) => "cli.unsupported_unit",
            InvalidArgument(_) => "grid.argument",
            Convergence(_) => "grid.convergence",
            DegenerateDensity { .. } => "susy.degenerate_density",
            InsufficientBoundStates { .. } => "susy.insufficient_bound_states",
            ZeroEnergy(_) => "susy.zero_energy",
            ClosedChannel { .. } => "scattering.closed_channel",
            NonAsymptoticPotential { .. } => "scattering.non_asymptotic_potential",
            NonAsymptoticSuperpotential { .. } => "scattering.non_asymptotic_superpotential",
            StepTooLarge { .. } => "propagation.step_too_large",
            ZeroPartnerState(_) => "propagation.zero_partner_state",
            EmptyEnsemble => "gmm.empty_ensemble",
            LineSearchFailure(_) => "gmm.line_search_failure",
            CollapsedComponent { .. } => "gmm.collapsed_component",
            MaxStepsExceeded(_) => "gmm.max_steps_exceeded",
            NodeCount(_) => "gmm.node_count",
            VanishingComponent { .. } => "multidim.vanishing_component",
            ZeroTrial => "multidim.zero_trial",
        }
    }

    /// True for failures caused by bad inputs rather than by the numerics.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            SusyError::Domain(_)
                | SusyError::GridMismatch
                | SusyError::InvalidUnits(_)
                | SusyError::UnsupportedUnit(_)
                | SusyError::InvalidArgument(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, SusyError>;
