//! Numerical supersymmetric quantum mechanics in one and two dimensions.
//!
//! The crate is organized by task:
//!
//! * [`grid`], [`operators`], [`eigen`], [`krylov`]: uniform grids, sinc-DVR
//!   kinetic operators, banded derivative stencils and eigensolvers.
//! * [`susy`]: superpotentials, charge operators, partner potentials,
//!   hierarchies and the super-matrix algebra.
//! * [`gmm`]: the Gaussian-mixture ground-state optimizer.
//! * [`scattering`], [`propagation`]: partner scattering amplitudes and
//!   time-dependent intertwining.
//! * [`multidim`]: vector superpotentials and the tensor sector in 2D.

// `!(a > b)` is used on purpose so that NaN inputs fail the check.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod convergence;
pub mod eigen;
pub mod error;
pub mod gmm;
pub mod grid;
pub mod krylov;
pub mod multidim;
pub mod operators;
pub mod potential;
pub mod propagation;
pub mod scattering;
pub mod susy;
pub mod units;

pub use error::{Result, SusyError};
pub use grid::{make_grid, ComplexField, Grid1D, RealField};
pub use units::{unit_convert, EnergyUnit, ModelUnits, HARTREE_TO_CM1, PROTON_MASS_AU};
