use nalgebra::DMatrix;

use super::superpotential::{charge_matrices, SuperPotential};

/// Block super-operators on the doubled space (sector 1 ⊕ sector 2).
///
/// `H = diag(AᵀA, AAᵀ)`, `Q` carries A in its lower-left block and `Q⁺ = Qᵀ`.
#[derive(Clone, Debug)]
pub struct SuperMatrices {
    pub h_block: DMatrix<f64>,
    pub q_block: DMatrix<f64>,
    pub q_dag_block: DMatrix<f64>,
}

pub fn super_matrices(w: &SuperPotential) -> SuperMatrices {
    let (a, a_dag) = charge_matrices(w);
    let n = a.nrows();
    let mut h = DMatrix::zeros(2 * n, 2 * n);
    h.view_mut((0, 0), (n, n)).copy_from(&(&a_dag * &a));
    h.view_mut((n, n), (n, n)).copy_from(&(&a * &a_dag));
    let mut q = DMatrix::zeros(2 * n, 2 * n);
    q.view_mut((n, 0), (n, n)).copy_from(&a);
    let q_dag = q.transpose();
    SuperMatrices { h_block: h, q_block: q, q_dag_block: q_dag }
}

impl SuperMatrices {
    /// max |{Q, Q⁺} − H|.
    pub fn anticommutator_defect(&self) -> f64 {
        let ac = &self.q_block * &self.q_dag_block + &self.q_dag_block * &self.q_block;
        (ac - &self.h_block).abs().max()
    }

    /// max |HQ − QH|.
    pub fn commutator_defect(&self) -> f64 {
        (&self.h_block * &self.q_block - &self.q_block * &self.h_block).abs().max()
    }

    /// max |Q²|.
    pub fn nilpotency_defect(&self) -> f64 {
        (&self.q_block * &self.q_block).abs().max()
    }
}
