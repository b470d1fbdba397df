//! Fermionic semiclassics: the Thomas-Fermi minimizer, the discrete Weyl/Wigner pair on
//! a 1D phase-space lattice, commutator diagnostics and their Hartree-Fock propagation,
//! exchange-term smallness and the Lieb-Thirring ratio.

pub mod diagnostics;
pub mod tf;
pub mod weyl;

pub use diagnostics::{
    commutator_diagnostics, commutator_norms, commutator_propagation_experiment, exchange_operator, exchange_smallness,
    gradient_commutator, lieb_thirring_ratio, lieb_thirring_ratio_state, position_commutator, position_density,
    CommutatorNorms, CommutatorReport, ExchangeReport, PropagationReport, SPECTRUM_TOL,
};
pub use tf::{tf_minimize, TfOptions, TfState, ThomasFermi};
pub use weyl::{weyl_quantize, wigner_transform, PhaseSpaceDensity, ALIAS_TOL};
