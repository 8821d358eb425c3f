//! Basis-size convergence of the first excitation energy, computed directly in
//! sector 1 and as the ground state of the partner sector.

use rayon::prelude::*;

use crate::eigen::solve_potential;
use crate::error::{Result, SusyError};
use crate::grid::Grid1D;
use crate::potential::AnalyticSuperpotential;
use crate::units::ModelUnits;

/// Lower bound on reported log10 errors.
pub const LOG_ERROR_FLOOR: f64 = -16.0;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ConvergenceRow {
    pub n: usize,
    /// log10 |E₁⁽¹⁾(n) − E₁⁽¹⁾(ref)|.
    pub eps11: f64,
    /// log10 |E₀⁽²⁾(n) − E₁⁽¹⁾(ref)|.
    pub eps02: f64,
    pub err11: f64,
    pub err02: f64,
}

pub fn log_error(err: f64) -> f64 {
    if err > 0.0 {
        err.log10().max(LOG_ERROR_FLOOR)
    } else {
        LOG_ERROR_FLOOR
    }
}

fn partner_levels<W: AnalyticSuperpotential + ?Sized>(
    w: &W,
    domain: (f64, f64),
    n: usize,
    units: &ModelUnits,
) -> Result<(f64, f64)> {
    let grid = Grid1D::new(domain.0, domain.1, n)?;
    let lam = units.lambda();
    let v1 = grid.sample(|x| w.w(x).powi(2) - lam * w.dw(x));
    let v2 = grid.sample(|x| w.w(x).powi(2) + lam * w.dw(x));
    let e1 = solve_potential(&v1, units, 2)?.energies[1];
    let e2 = solve_potential(&v2, units, 1)?.energies[0];
    Ok((e1, e2))
}

/// For each basis size `n`, the errors of E₁⁽¹⁾(n) and of its partner estimate
/// E₀⁽²⁾(n) against E₁⁽¹⁾ on the `n_reference` grid.
pub fn convergence_study<W: AnalyticSuperpotential + ?Sized>(
    w: &W,
    domain: (f64, f64),
    n_values: &[usize],
    n_reference: usize,
    units: &ModelUnits,
) -> Result<Vec<ConvergenceRow>> {
    if let Some(&max) = n_values.iter().max() {
        if n_reference < max {
            return Err(SusyError::InvalidArgument(format!(
                "reference grid ({n_reference}) must be at least as large as every study grid ({max})"
            )));
        }
    }
    let reference = partner_levels(w, domain, n_reference, units)?.0;
    n_values
        .par_iter()
        .map(|&n| {
            let (e1, e2) = partner_levels(w, domain, n, units)?;
            let err11 = (e1 - reference).abs();
            let err02 = (e2 - reference).abs();
            Ok(ConvergenceRow { n, eps11: log_error(err11), eps02: log_error(err02), err11, err02 })
        })
        .collect()
}

/// Median of `err11 / err02` over the rows.
pub fn median_error_ratio(rows: &[ConvergenceRow]) -> f64 {
    let mut ratios: Vec<f64> = rows.iter().map(|r| r.err11 / r.err02.max(f64::MIN_POSITIVE)).collect();
    ratios.sort_by(f64::total_cmp);
    let m = ratios.len();
    if m == 0 {
        return f64::NAN;
    }
    if m % 2 == 1 {
        ratios[m / 2]
    } else {
        0.5 * (ratios[m / 2 - 1] + ratios[m / 2])
    }
}
