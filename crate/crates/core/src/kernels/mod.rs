//! Heat and Poisson kernels as eigen-series, the subordination integral that
//! links them, Poisson integrals and the kernel diagnostics.

mod diagnostics;
mod evaluator;
mod functions;
pub mod quadrature;

pub use diagnostics::{
    approx_identity_error, bound_constant, kernel_mass, semigroup_defect, ApproxError,
    BoundConstants, BOUNDARY_ZERO_TOL,
};
pub use evaluator::{
    BoundaryData, KernelEvaluator, KernelKind, TailModel, Truncation, DEFAULT_TAU, NEGATIVITY_FLOOR,
};
pub use functions::{boundary_damping, cell_indicator, preset_functions, random_nonnegative, TestFunction};
