//! Numerical laboratory for many-body quantum dynamics at desk scale.
//!
//! Exact small-system propagation sits next to the effective one-particle
//! equations (Hartree, Gross-Pitaevskii, Hartree-Fock), Bogoliubov fluctuation
//! dynamics and the BBGKY hierarchy, so that convergence rates and structural
//! identities can be measured directly.

// `!(x > 0.0)` rejects NaN along with nonpositive values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bbgky;
pub mod effective;
pub mod error;
pub mod fluctuations;
pub mod fock;
pub mod harness;
pub mod manybody;
pub mod numerics;
pub mod scattering;
pub mod semiclassics;

pub use error::{Error, Result};
pub use num_complex::Complex64 as C64;
pub use numerics::{FitResult, Grid, ModeModel, PotentialSpec};
