//! Truncated bosonic and fermionic Fock spaces over a finite mode set.
//!
//! Operators are assembled as sparse matrices from ladder monomials. Bosonic spaces are
//! truncated by a single total-particle cap; creation past the cap is dropped and the
//! mass left on the top shell is reported as leakage.

pub mod basis;
pub mod operators;
pub mod unitaries;

pub use basis::{FockBasis, Statistics};
pub use operators::{
    annihilate, annihilation_operator, car_residual, ccr_defect_full, ccr_residual, create, creation_operator,
    monomial_operator, number_operator, pair_creation_operator, pairing_density, reduced_density_1,
    second_quantize, FockVector, LadderKernel,
};
pub use unitaries::{
    bogoliubov_apply, bogoliubov_apply_with, bogoliubov_generator, coherent_state, cosh_sinh,
    exp_anti_hermitian, particle_hole_apply, particle_hole_operator, weyl_apply, weyl_apply_with,
    weyl_generator, LEAKAGE_TOL,
};
