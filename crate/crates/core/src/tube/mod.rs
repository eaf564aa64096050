//! Harmonic functions on the tube R_+ x K sampled on a time ladder.

mod diagnostics;
mod field;

pub use diagnostics::{
    fatou_consistency, harmonic_residual, lp_profile, max_principle_check, positivity_violations,
    FatouDefect, HarmonicResidual, LpExponent, LpProfile, MaxPrinciple, TubeDiagnostics, TubePoint,
    MAX_PRINCIPLE_SLACK,
};
pub use field::{geometric_ladder, tube_sample, Provenance, TubeField};
