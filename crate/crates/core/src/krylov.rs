//! Matrix-free block Krylov eigensolver for the lowest eigenpairs of a symmetric
//! operator, used where dense diagonalization is too large (2D grids).
//!
//! Each cycle builds a block Krylov basis from the current block, performs a
//! Rayleigh–Ritz projection and restarts from the lowest Ritz vectors.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::eigen::sorted_eigen;
use crate::error::{Result, SusyError};

#[derive(Clone, Debug)]
pub struct KrylovOptions {
    /// Vectors per block; raised to `k` when smaller.
    pub block_size: usize,
    /// Krylov blocks per restart cycle.
    pub blocks_per_cycle: usize,
    pub max_cycles: usize,
    /// Residual tolerance relative to `max(1, |θ|)`.
    pub tol: f64,
    /// Ritz values below this are treated as spurious and skipped.
    pub lower_cutoff: Option<f64>,
    pub seed: u64,
}

impl Default for KrylovOptions {
    fn default() -> Self {
        Self {
            block_size: 4,
            blocks_per_cycle: 40,
            max_cycles: 60,
            tol: 1e-9,
            lower_cutoff: None,
            seed: 0x5eed,
        }
    }
}

#[derive(Clone, Debug)]
pub struct KrylovResult {
    pub values: Vec<f64>,
    pub vectors: Vec<Vec<f64>>,
    pub residuals: Vec<f64>,
    pub cycles: usize,
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    y.iter_mut().zip(x).for_each(|(yi, xi)| *yi += alpha * xi);
}

/// Random vectors from a seeded stream, for starting blocks.
pub fn random_block(n: usize, count: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count).map(|_| (0..n).map(|_| rng.random_range(-1.0..1.0)).collect()).collect()
}

struct Basis {
    v: Vec<Vec<f64>>,
    hv: Vec<Vec<f64>>,
}

impl Basis {
    /// Orthogonalize `x` against the basis (two Gram–Schmidt passes) and append
    /// it unless it is numerically dependent. Returns whether it was kept.
    fn push<F: Fn(&[f64]) -> Vec<f64>>(&mut self, mut x: Vec<f64>, op: &F) -> bool {
        let original = dot(&x, &x).sqrt();
        if original == 0.0 {
            return false;
        }
        for _ in 0..2 {
            for q in &self.v {
                let c = dot(q, &x);
                axpy(-c, q, &mut x);
            }
        }
        let norm = dot(&x, &x).sqrt();
        if norm < 1e-8 * original {
            return false;
        }
        x.iter_mut().for_each(|xi| *xi /= norm);
        let y = op(&x);
        self.v.push(x);
        self.hv.push(y);
        true
    }
}

/// Lowest `k` eigenpairs of the symmetric operator `op` acting on length-`n`
/// vectors. `start` seeds the first block; it is padded with random vectors.
pub fn lowest_eigenpairs<F>(
    n: usize,
    k: usize,
    op: F,
    start: Vec<Vec<f64>>,
    opts: &KrylovOptions,
) -> Result<KrylovResult>
where
    F: Fn(&[f64]) -> Vec<f64>,
{
    if k == 0 || k > n {
        return Err(SusyError::InvalidArgument(format!("cannot extract {k} eigenpairs in dimension {n}")));
    }
    let b = opts.block_size.max(k).min(n);
    let mut block = start;
    block.truncate(b);
    if block.len() < b {
        block.extend(random_block(n, b - block.len(), opts.seed));
    }

    let mut last_residuals = Vec::new();
    for cycle in 0..opts.max_cycles {
        let mut basis = Basis { v: Vec::new(), hv: Vec::new() };
        let mut fresh: Vec<usize> = Vec::new();
        for x in block.drain(..) {
            if basis.push(x, &op) {
                fresh.push(basis.v.len() - 1);
            }
        }
        for _ in 1..opts.blocks_per_cycle {
            if basis.v.len() >= n {
                break;
            }
            let next: Vec<Vec<f64>> = fresh.iter().map(|&i| basis.hv[i].clone()).collect();
            fresh.clear();
            for x in next {
                if basis.v.len() >= n {
                    break;
                }
                if basis.push(x, &op) {
                    fresh.push(basis.v.len() - 1);
                }
            }
            if fresh.is_empty() {
                break;
            }
        }

        let m = basis.v.len();
        let mut t = DMatrix::zeros(m, m);
        for i in 0..m {
            for j in i..m {
                let a = 0.5 * (dot(&basis.v[i], &basis.hv[j]) + dot(&basis.v[j], &basis.hv[i]));
                t[(i, j)] = a;
                t[(j, i)] = a;
            }
        }
        let (theta, s) = sorted_eigen(&t);
        let admissible: Vec<usize> = (0..m)
            .filter(|&i| opts.lower_cutoff.is_none_or(|c| theta[i] >= c))
            .collect();
        if admissible.len() < k {
            return Err(SusyError::Convergence("Krylov space too small for the requested pairs".into()));
        }

        let ritz = |col: usize| -> (Vec<f64>, Vec<f64>) {
            let mut y = vec![0.0; n];
            let mut hy = vec![0.0; n];
            for j in 0..m {
                let c = s[(j, col)];
                axpy(c, &basis.v[j], &mut y);
                axpy(c, &basis.hv[j], &mut hy);
            }
            (y, hy)
        };

        let mut values = Vec::with_capacity(k);
        let mut vectors = Vec::with_capacity(k);
        let mut residuals = Vec::with_capacity(k);
        let mut converged = true;
        for &col in admissible.iter().take(b) {
            let (y, hy) = ritz(col);
            if values.len() < k {
                let mut r = hy.clone();
                axpy(-theta[col], &y, &mut r);
                let res = dot(&r, &r).sqrt();
                if res > opts.tol * theta[col].abs().max(1.0) {
                    converged = false;
                }
                values.push(theta[col]);
                vectors.push(y.clone());
                residuals.push(res);
            }
            block.push(y);
        }
        if converged {
            return Ok(KrylovResult { values, vectors, residuals, cycles: cycle + 1 });
        }
        last_residuals = residuals;
    }
    Err(SusyError::Convergence(format!(
        "block Krylov did not converge in {} cycles (residuals {:?})",
        opts.max_cycles, last_residuals
    )))
}
