//! Coherent-state fluctuation analysis: the quadratic limit generator and its Bogoliubov
//! flow Θ, CLT variances, the shifted many-body generator, Fock-space experiments on
//! few-mode models, the excitation map and the dressed Gross-Pitaevskii energy.

pub mod bogoliubov;
pub mod dressed;
pub mod excitation;
pub mod experiments;
pub mod generator;

pub use bogoliubov::{clt_variance, fermionic_residual, particle_hole_blocks, squeezing, theta_propagate, BogoliubovMap, ConstraintResiduals, QuadraticGenerator, ThetaTrajectory, CONSTRAINT_TOL};
pub use experiments::{
    default_cap, dimer_model, fluctuation_growth_experiment, norm_approximation_experiment, phase_optimal_distance,
    ExperimentOptions, GrowthReport, NormReport, EXPERIMENT_LEAKAGE,
};
pub use generator::{generator_ln, FluctuationGenerator, LinearReport, NormalPolynomial};
pub use dressed::{
    fock_quasi_free_energy, gp_dressed_energy, quasi_free_energy, squeezed_moments, CorrelationKernel, DressedEnergyReport,
    EnergyParts, TrapHamiltonian,
};
pub use excitation::{ExcitationMap, EXCITATION_GUARD};
