//! Maximal functions, approach cones and nontangential limits, and the
//! lower bounds and barriers available on affine nested fractals.

mod cone;
mod maximal;
mod nested;

pub use cone::{
    classical_cone_check, cone_sup, export_cone_csv, nontangential_error, nontangential_error_field,
    shifted_kernel_constant, ClassicalCone, Cone, ConeSup, NontangentialProfile, ShiftedKernel,
};
pub use maximal::{
    export_maximal_csv, maximal_function, maximal_l2_ratio, maximal_measure, weak11_check,
    MaximalOperator, Weak11,
};
pub use nested::{
    cone_cover_check, BarrierComparison, Barrier, BoundarySet, CAlphaFit, CoverHeight, CoverReport,
    NestedSetting, SHELL_WIDTH,
};

#[cfg(test)]
mod tests;
