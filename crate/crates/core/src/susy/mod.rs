//! Factorized partner Hamiltonians: superpotentials, charges, hierarchies and
//! the Witten super-matrices, plus the analytic double-well models.

mod hierarchy;
mod models;
mod superpotential;
mod supermatrix;

pub use hierarchy::{build_hierarchy, count_bound_states, Hierarchy, SectorRecord};
pub use models::{
    gaussian_doublewell_model, gaussian_splitting_closed_form, localized_gaussian, semiclassical_splitting,
    GaussianPairW, QuarticDoubleWell,
};
pub(crate) use superpotential::{continue_outside, outer_count};
pub use superpotential::{
    charge_matrices, partner_potential, partner_state_map, riccati_potential, superpotential_from_density,
    MapDirection, Sector, SuperPotential, DEFAULT_DENSITY_FLOOR,
};
pub use supermatrix::{super_matrices, SuperMatrices};
