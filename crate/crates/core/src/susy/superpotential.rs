use nalgebra::{DMatrix, DVector};

use crate::error::{Result, SusyError};
use crate::grid::{Grid1D, RealField};
use crate::operators::{derivative_matrix, differentiate_values};
use crate::potential::AnalyticSuperpotential;
use crate::units::ModelUnits;

/// Default density floor, relative to the density maximum.
pub const DEFAULT_DENSITY_FLOOR: f64 = 1e-14;

/// Fraction of the grid at each end used to estimate the asymptotic levels.
const ASYMPTOTE_FRACTION: f64 = 0.05;

/// Samples of W on a grid with the charge scale λ and the asymptotic levels W±.
#[derive(Clone, Debug, PartialEq)]
pub struct SuperPotential {
    grid: Grid1D,
    w: Vec<f64>,
    units: ModelUnits,
    w_minus: f64,
    w_plus: f64,
    asymptote_tolerance: f64,
}

fn mean_and_std(xs: &[f64]) -> (f64, f64) {
    let m = xs.iter().sum::<f64>() / xs.len() as f64;
    let var = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / xs.len() as f64;
    (m, var.sqrt())
}

pub(crate) fn outer_count(n: usize, fraction: f64) -> usize {
    ((n as f64 * fraction).ceil() as usize).clamp(1, n)
}

impl SuperPotential {
    pub fn new(grid: &Grid1D, w: Vec<f64>, units: ModelUnits) -> Result<Self> {
        let field = RealField::new(grid, w)?;
        let w = field.into_values();
        let m = outer_count(w.len(), ASYMPTOTE_FRACTION);
        let (w_minus, s_minus) = mean_and_std(&w[..m]);
        let (w_plus, s_plus) = mean_and_std(&w[w.len() - m..]);
        Ok(Self { grid: grid.clone(), w, units, w_minus, w_plus, asymptote_tolerance: s_minus.max(s_plus) })
    }

    pub fn from_analytic<W: AnalyticSuperpotential + ?Sized>(grid: &Grid1D, w: &W, units: ModelUnits) -> Self {
        let values = grid.points().iter().map(|&x| w.w(x)).collect();
        Self::new(grid, values, units).expect("analytic superpotential must be finite on the grid")
    }

    pub fn grid(&self) -> &Grid1D {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.w
    }

    pub fn units(&self) -> &ModelUnits {
        &self.units
    }

    pub fn lambda(&self) -> f64 {
        self.units.lambda()
    }

    pub fn w_minus(&self) -> f64 {
        self.w_minus
    }

    pub fn w_plus(&self) -> f64 {
        self.w_plus
    }

    /// Standard deviation of the outer samples used for `w_minus`/`w_plus`.
    pub fn asymptote_tolerance(&self) -> f64 {
        self.asymptote_tolerance
    }

    pub fn as_field(&self) -> RealField {
        RealField::new(&self.grid, self.w.clone()).expect("finite by construction")
    }

    /// W′ with boundary-closed stencils.
    pub fn derivative(&self) -> Vec<f64> {
        differentiate_values(&self.grid, &self.w)
    }

    /// Asymptotic levels, checked for flatness of the outer samples.
    pub fn asymptotic_levels(&self) -> Result<(f64, f64)> {
        let n = self.w.len();
        let m = outer_count(n, ASYMPTOTE_FRACTION);
        let spread = |xs: &[f64]| {
            let (lo, hi) = xs.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &x| (a.min(x), b.max(x)));
            hi - lo
        };
        let range = spread(&self.w);
        let worst = spread(&self.w[..m]).max(spread(&self.w[n - m..]));
        let allowed = 1e-4 * range;
        if worst > allowed {
            return Err(SusyError::NonAsymptoticSuperpotential { spread: worst, allowed });
        }
        Ok((self.w_minus, self.w_plus))
    }
}

/// Least-squares quadratic through `(xs, ys)`, returned as (c0, c1, c2) about `x_ref`.
fn quadratic_fit(xs: &[f64], ys: &[f64], x_ref: f64) -> (f64, f64, f64) {
    let a = DMatrix::from_fn(xs.len(), 3, |i, j| (xs[i] - x_ref).powi(j as i32));
    let b = DVector::from_column_slice(ys);
    let sol = a.svd(true, true).solve(&b, 1e-14).expect("SVD solve");
    (sol[0], sol[1], sol[2])
}

/// ln(max(ρ, floor)) inside the support and a quadratic continuation outside it.
///
/// The support is the index range between the first and last samples above the
/// floor. Outside it ln ρ is replaced by a least-squares quadratic fitted to the
/// closest support samples, so the log-derivative continues linearly.
pub(crate) fn continued_log_density(points: &[f64], rho: &[f64], floor: f64) -> Vec<f64> {
    let n = rho.len();
    let first = rho.iter().position(|&r| r > floor);
    let last = rho.iter().rposition(|&r| r > floor);
    let (Some(a), Some(b)) = (first, last) else {
        return vec![floor.ln(); n];
    };
    let mut l: Vec<f64> = rho.iter().map(|&r| r.max(floor).ln()).collect();
    continue_outside(points, &mut l, a, b);
    l
}

/// Overwrite `l` outside `a..=b` with the concave quadratic continuation of the
/// samples just inside the range.
pub(crate) fn continue_outside(points: &[f64], l: &mut [f64], a: usize, b: usize) {
    const FIT_POINTS: usize = 8;
    let n = l.len();
    let support = b - a + 1;
    if support < 3 {
        return;
    }
    let m = FIT_POINTS.min(support);
    if a > 0 {
        let (c0, c1, c2) = quadratic_fit(&points[a..a + m], &l[a..a + m], points[a]);
        for i in 0..a {
            let d = points[i] - points[a];
            // Keep the continuation concave so the density keeps decaying.
            l[i] = c0 + c1 * d + c2.min(0.0) * d * d;
        }
    }
    if b + 1 < n {
        let (c0, c1, c2) = quadratic_fit(&points[b + 1 - m..=b], &l[b + 1 - m..=b], points[b]);
        for i in b + 1..n {
            let d = points[i] - points[b];
            l[i] = c0 + c1 * d + c2.min(0.0) * d * d;
        }
    }
}

/// Share of central-half samples whose density falls below `floor`.
pub(crate) fn central_deficit(rho: &[f64], floor: f64) -> f64 {
    let n = rho.len();
    let central = &rho[n / 4..(3 * n).div_ceil(4)];
    central.iter().filter(|&&r| r <= floor).count() as f64 / central.len() as f64
}

pub(crate) fn log_density(rho: &RealField, rel_floor: f64) -> Result<Vec<f64>> {
    if !(rel_floor > 0.0) {
        return Err(SusyError::InvalidArgument(format!("density floor must be positive, got {rel_floor}")));
    }
    if rho.values().iter().any(|&r| r < 0.0) {
        return Err(SusyError::InvalidArgument("density has negative samples".into()));
    }
    let max = rho.values().iter().cloned().fold(0.0, f64::max);
    if max <= 0.0 {
        return Err(SusyError::DegenerateDensity { fraction: 100.0 });
    }
    let floor = rel_floor * max;
    let deficit = central_deficit(rho.values(), floor);
    if deficit > 0.2 {
        return Err(SusyError::DegenerateDensity { fraction: 100.0 * deficit });
    }
    Ok(continued_log_density(rho.grid().points(), rho.values(), floor))
}

/// Riccati transform W = −(λ/2) ∂ ln ρ.
///
/// `rel_floor` is relative to the density maximum ([`DEFAULT_DENSITY_FLOOR`]).
pub fn superpotential_from_density(rho: &RealField, units: ModelUnits, rel_floor: f64) -> Result<SuperPotential> {
    let l = log_density(rho, rel_floor)?;
    let dl = differentiate_values(rho.grid(), &l);
    let lam = units.lambda();
    SuperPotential::new(rho.grid(), dl.iter().map(|d| -0.5 * lam * d).collect(), units)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sector {
    /// V₁ = W² − λW′.
    Minus,
    /// V₂ = W² + λW′.
    Plus,
}

pub fn riccati_potential(w: &SuperPotential, sign: Sector) -> RealField {
    let lam = w.lambda();
    let s = match sign {
        Sector::Minus => -1.0,
        Sector::Plus => 1.0,
    };
    let dw = w.derivative();
    let values = w.values().iter().zip(&dw).map(|(wi, dwi)| wi * wi + s * lam * dwi).collect();
    RealField::new(w.grid(), values).expect("finite W gives finite V")
}

/// V₂ = V₁ − λ² ∂² ln ρ, from a ground density of V₁.
pub fn partner_potential(rho: &RealField, v1: &RealField, units: ModelUnits, rel_floor: f64) -> Result<RealField> {
    v1.check_grid(rho.grid())?;
    let w = superpotential_from_density(rho, units, rel_floor)?;
    let dw = w.derivative();
    let two_lam = 2.0 * units.lambda();
    let values = v1.values().iter().zip(&dw).map(|(v, d)| v + two_lam * d).collect();
    RealField::new(v1.grid(), values)
}

/// A = λD + diag(W) and A⁺ = −λD + diag(W) = Aᵀ.
pub fn charge_matrices(w: &SuperPotential) -> (DMatrix<f64>, DMatrix<f64>) {
    let lam = w.lambda();
    let mut a = derivative_matrix(w.grid()) * lam;
    for (i, &wi) in w.values().iter().enumerate() {
        a[(i, i)] += wi;
    }
    let a_dag = a.transpose();
    (a, a_dag)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MapDirection {
    /// Sector 1 → sector 2 through A.
    Down,
    /// Sector 2 → sector 1 through A⁺.
    Up,
}

/// Apply A or A⁺ and divide by √E_local.
pub fn partner_state_map(psi: &RealField, e_local: f64, w: &SuperPotential, direction: MapDirection) -> Result<RealField> {
    psi.check_grid(w.grid())?;
    if !(e_local > 1e-10) {
        return Err(SusyError::ZeroEnergy(e_local));
    }
    let (a, a_dag) = charge_matrices(w);
    let v = DVector::from_column_slice(psi.values());
    let out = match direction {
        MapDirection::Down => a * v,
        MapDirection::Up => a_dag * v,
    } / e_local.sqrt();
    RealField::new(w.grid(), out.iter().copied().collect())
}
