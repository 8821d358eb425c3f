//! Two-dimensional SUSY: vector superpotentials W⃗ = −λ∇ ln ψ₀, the scalar
//! sector-1 factorization H₁ − E₀ = A⃗⁺·A⃗, the tensor sector-2 operator
//! H_{μν} = A_μ A_ν⁺ whose ground energy is the first excitation of H₁, and the
//! scalar sector-3 operator built from a nodeless vector state.

mod grid2d;
mod scalar;
mod sector3;
mod tensor;
mod vector;

pub use grid2d::{Axis, Field2D, Grid2D, VectorField2};
pub use scalar::{solve_potential_2d, ScalarHamiltonian2D, Spectrum2D};
pub use sector3::{sector2_annihilation, sector3_hamiltonian, COMPONENT_FLOOR};
pub use tensor::{
    descend_state, nodeless_combination, tensor_ground_state, tensor_sector_hamiltonian, vector_rayleigh_quotient,
    TensorSectorOperator, TensorSpectrum, DEGENERACY_TOLERANCE, TENSOR_RESIDUAL_TOLERANCE, ZERO_MODE_FRACTION,
};
pub use vector::{
    naive_scalar_partner, scalar_sector1_check, vector_superpotential, VectorSuperpotential, SUPPORT_FLOOR,
    VECTOR_DENSITY_FLOOR,
};
