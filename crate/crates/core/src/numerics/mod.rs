//! Periodic grids, potentials, spectral operators, dense and sparse linear algebra,
//! Krylov propagation and log-space fits shared by every other module.

pub mod fit;
pub mod grid;
pub mod krylov;
pub mod linalg;
pub mod modes;
pub mod potential;
pub mod sparse;

pub use fit::{exponential_envelope, fit_exponential, fit_power_law, Envelope, FitResult};
pub use grid::{convolve, from_modes, inner, l2_norm, laplacian_apply, to_modes, Fourier, Grid};
pub use krylov::{expm_krylov, KrylovOptions, KrylovStats};
pub use linalg::{hs_norm, trace_norm, CMat, CVec};
pub use modes::{derivative_matrix, kinetic_matrix, ModeModel};
pub use potential::{PotentialSpec, Shape};
pub use sparse::SparseMatrix;
