//! Harmonic analysis on post-critically finite self-similar sets.
//!
//! Level-m graph approximations carry a renormalised energy form and a lumped
//! self-similar measure. From their Dirichlet and Neumann eigenbases the crate
//! evaluates heat and Poisson kernels, Poisson integrals of functions and atomic
//! measures, resistance-metric maximal functions and cone-restricted limits.
//!
//! ```no_run
//! use pcf_harmonic::prelude::*;
//!
//! let s = SelfSimilarStructure::sierpinski()?;
//! let g = build_level(&s, 5)?;
//! let e = energy_matrix(&g, s.harmonic());
//! let basis = eigensystem(&e, &g, s.dimension(), BoundaryCondition::Dirichlet)?;
//! let ev = KernelEvaluator::new(&basis, Truncation::Full);
//! let p = ev.poisson_kernel(0.3, 10, 20)?;
//! # let _ = p;
//! # Ok::<(), pcf_harmonic::Error>(())
//! ```

pub mod boundary;
mod error;
pub mod harness;
pub mod kernels;
pub mod linalg;
pub mod pcf;
pub mod spectral;
pub mod tube;

pub use error::{Error, Result};

pub mod prelude {
    pub use crate::boundary::*;
    pub use crate::kernels::*;
    pub use crate::pcf::*;
    pub use crate::spectral::*;
    pub use crate::tube::*;
    pub use crate::{Error, Result};
}
