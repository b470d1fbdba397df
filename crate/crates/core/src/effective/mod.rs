//! Effective one-particle dynamics: Hartree, Gross-Pitaevskii and its modified form on
//! periodic grids, the discrete Hartree flow on a mode model, and time-dependent
//! Hartree-Fock for density matrices.

pub mod hf;
pub mod modes;
pub mod wave;

pub use hf::{free_fermi_ground_state, free_fermi_momenta, lowest_orbitals, plane_wave_orbitals, FreeFermiState, HartreeFock, HfReport};
pub use modes::{ModeHartree, ModeTrajectory};
pub use wave::{gaussian_packet, kernel_mass, modified_kernel, Nonlinearity, Scheme, Trajectory, WaveSolver};

use crate::error::Result;
use crate::numerics::{Grid, PotentialSpec};
use crate::scattering::ScatteringSolution;
use crate::C64;

pub fn hartree_solve(
    grid: &Grid,
    v_ext: &PotentialSpec,
    v: &PotentialSpec,
    phi0: &[C64],
    t: f64,
    dt: f64,
    samples: usize,
) -> Result<Trajectory> {
    WaveSolver::hartree(grid, v_ext, v)?.solve(phi0, t, dt, samples)
}

pub fn gp_solve(
    grid: &Grid,
    v_ext: &PotentialSpec,
    a0: f64,
    phi0: &[C64],
    t: f64,
    dt: f64,
    samples: usize,
) -> Result<Trajectory> {
    WaveSolver::gross_pitaevskii(grid, v_ext, a0)?.solve(phi0, t, dt, samples)
}

#[allow(clippy::too_many_arguments)]
pub fn gp_modified_solve(
    grid: &Grid,
    v_ext: &PotentialSpec,
    sol: &ScatteringSolution,
    n: usize,
    phi0: &[C64],
    t: f64,
    dt: f64,
    samples: usize,
) -> Result<Trajectory> {
    WaveSolver::gp_modified(grid, v_ext, sol, n)?.solve(phi0, t, dt, samples)
}
