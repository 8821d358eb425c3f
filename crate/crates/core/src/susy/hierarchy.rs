use crate::eigen::solve_potential;
use crate::error::{Result, SusyError};
use crate::grid::RealField;
use crate::units::ModelUnits;

use super::superpotential::{
    partner_potential, partner_state_map, superpotential_from_density, MapDirection, SuperPotential,
    DEFAULT_DENSITY_FLOOR,
};

/// One member of the partner chain.
#[derive(Clone, Debug)]
pub struct SectorRecord {
    /// 1-based sector index.
    pub index: usize,
    /// The sector potential as constructed (sector 1: the input potential).
    pub potential: RealField,
    /// Lowest eigenvalue of `K + diag(potential)`.
    pub ground_energy_local: f64,
    pub ground_density: RealField,
    /// Superpotential of the ground state, used to build the next sector.
    pub superpotential: SuperPotential,
}

#[derive(Clone, Debug)]
pub struct Hierarchy {
    pub sectors: Vec<SectorRecord>,
    /// Ground energy of each sector on the sector-1 energy scale.
    pub cumulative_offsets: Vec<f64>,
}

/// Number of eigenvalues lying below both grid-edge values of `v`.
pub fn count_bound_states(v: &RealField, units: &ModelUnits, max: usize) -> Result<usize> {
    let vals = v.values();
    let edge = vals[0].min(vals[vals.len() - 1]);
    let k = max.min(vals.len());
    let spec = solve_potential(v, units, k)?;
    Ok(spec.energies.iter().filter(|&&e| e < edge).count())
}

pub fn build_hierarchy(v1: &RealField, units: ModelUnits, n_sectors: usize) -> Result<Hierarchy> {
    if n_sectors == 0 {
        return Err(SusyError::InvalidArgument("a hierarchy needs at least one sector".into()));
    }
    let found = count_bound_states(v1, &units, n_sectors)?;
    if found < n_sectors {
        return Err(SusyError::InsufficientBoundStates { requested: n_sectors, found });
    }

    let mut sectors: Vec<SectorRecord> = Vec::with_capacity(n_sectors);
    let mut offsets = Vec::with_capacity(n_sectors);
    let mut potential = v1.clone();
    for index in 1..=n_sectors {
        let spec = solve_potential(&potential, &units, 1)?;
        let e = spec.energies[0];
        let psi = &spec.states[0];
        let rho = psi.map(|_, p| p * p);
        let w = superpotential_from_density(&rho, units, DEFAULT_DENSITY_FLOOR)?;
        offsets.push(match offsets.last() {
            None => e,
            Some(prev) => prev + e,
        });
        let next = if index < n_sectors {
            let shifted = potential.map(|_, v| v - e);
            Some(partner_potential(&rho, &shifted, units, DEFAULT_DENSITY_FLOOR)?)
        } else {
            None
        };
        sectors.push(SectorRecord {
            index,
            potential: potential.clone(),
            ground_energy_local: e,
            ground_density: rho,
            superpotential: w,
        });
        if let Some(next) = next {
            potential = next;
        }
    }
    Ok(Hierarchy { sectors, cumulative_offsets: offsets })
}

impl Hierarchy {
    /// The `n`-th excited sector-1 state, obtained by lifting the ground state of
    /// sector `n + 1` through the up-maps of sectors `n, …, 1`.
    pub fn lifted_state(&self, n: usize) -> Result<RealField> {
        if n >= self.sectors.len() {
            return Err(SusyError::InvalidArgument(format!(
                "state {n} needs {} sectors, hierarchy has {}",
                n + 1,
                self.sectors.len()
            )));
        }
        let mut psi = self.sectors[n].ground_density.map(|_, r| r.sqrt());
        for m in (0..n).rev() {
            // Energy of the current state measured from the ground of sector m.
            let e_local = self.cumulative_offsets[n] - self.cumulative_offsets[m];
            psi = partner_state_map(&psi, e_local, &self.sectors[m].superpotential, MapDirection::Up)?;
        }
        Ok(psi.normalized())
    }
}
