//! Energy forms, generalized eigenproblems and spectral asymptotics on V_m.
//!
//! The Laplacian is Delta = -M^{-1} E, so eigenpairs satisfy Delta phi = -lambda phi
//! with lambda >= 0.

mod asymptotics;
mod basis;
mod energy;

pub use asymptotics::{
    counting_function, eigen_growth_constants, supnorm_ratio, weyl_exponent, GrowthConstants,
    SpectralWindow, SupnormRatio, WeylFit, MIN_WINDOW_POINTS,
};
pub(crate) use asymptotics::least_squares;
pub use basis::{eigensystem, export_spectrum_csv, BoundaryCondition, EigenBasis, CLUSTER_GAP, RESIDUAL_TOL};
pub use energy::{energy_matrix, EnergyForm};
