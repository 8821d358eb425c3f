use crate::error::{Result, SusyError};
use crate::grid::{Grid1D, RealField};
use crate::units::ModelUnits;

use super::mixture::GaussianMixture;

/// Linear-interpolation root of a field with exactly one sign change.
pub fn locate_node(psi1: &RealField) -> Result<f64> {
    let count = psi1.sign_changes();
    if count != 1 {
        return Err(SusyError::NodeCount(count));
    }
    let xs = psi1.grid().points();
    let vs = psi1.values();
    let mut last: Option<usize> = None;
    for (i, &v) in vs.iter().enumerate() {
        if v == 0.0 {
            continue;
        }
        if let Some(j) = last {
            if vs[j].signum() != v.signum() {
                let t = vs[j] / (vs[j] - v);
                return Ok(xs[j] + t * (xs[i] - xs[j]));
            }
        }
        last = Some(i);
    }
    unreachable!("sign change counted but not found")
}

/// First excited sector-1 state A⁺ψ₀⁽²⁾ built from the two ground mixtures:
/// ψ₁ ∝ −(λ/2) √ρ₂ (∂ ln ρ₁ + ∂ ln ρ₂), scaled to a unit maximum of √ρ₂.
pub fn excited_state_from_mixtures(
    sector1: &GaussianMixture,
    sector2: &GaussianMixture,
    units: &ModelUnits,
    grid: &Grid1D,
) -> RealField {
    let lam = units.lambda();
    let logs: Vec<(f64, f64)> = grid
        .points()
        .iter()
        .map(|&x| {
            let d2 = sector2.log_derivatives(x);
            let d1 = sector1.log_derivatives(x);
            (0.5 * d2.l0, d1.l1 + d2.l1)
        })
        .collect();
    let shift = logs.iter().map(|p| p.0).fold(f64::NEG_INFINITY, f64::max);
    let values = logs.iter().map(|&(half_log, slope)| -0.5 * lam * (half_log - shift).exp() * slope).collect();
    RealField::new(grid, values).expect("finite by construction")
}

/// Maxima of |node| over `blocks` consecutive, equal-length stretches of the
/// final `fraction` of a trace. Records without a node are skipped.
pub fn node_envelope(nodes: &[Option<f64>], fraction: f64, blocks: usize) -> Vec<f64> {
    let start = nodes.len() - ((nodes.len() as f64 * fraction).round() as usize).min(nodes.len());
    let tail: Vec<f64> = nodes[start..].iter().flatten().map(|x| x.abs()).collect();
    if blocks == 0 || tail.len() < blocks {
        return Vec::new();
    }
    let len = tail.len() / blocks;
    (0..blocks)
        .map(|b| {
            let end = if b + 1 == blocks { tail.len() } else { (b + 1) * len };
            tail[b * len..end].iter().fold(0.0, |a: f64, &x| a.max(x))
        })
        .collect()
}

/// True when no envelope entry exceeds its predecessor by more than `slack`.
pub fn is_non_increasing(envelope: &[f64], slack: f64) -> bool {
    envelope.windows(2).all(|w| w[1] <= w[0] + slack)
}
