use std::sync::Arc;

use nalgebra::DMatrix;
use serde::Serialize;

use super::bogoliubov::theta_propagate;
use crate::effective::ModeHartree;
use crate::error::{Error, Result};
use crate::fock::{bogoliubov_apply_with, weyl_apply_with, FockBasis, FockVector, Statistics};
use crate::manybody::fock_hamiltonian;
use crate::numerics::linalg::CMat;
use crate::numerics::{exponential_envelope, expm_krylov, Envelope, KrylovOptions, KrylovStats, ModeModel, SparseMatrix};
use crate::C64;

/// Truncation mass above which Fock experiments abort.
pub const EXPERIMENT_LEAKAGE: f64 = 1e-4;

/// Largest mode count for Fock-space experiments.
pub const MAX_EXPERIMENT_MODES: usize = 4;

/// Two-site model: hopping -J between the sites, pair matrix [[U, U'], [U', U]].
pub fn dimer_model(hopping: f64, onsite: f64, cross: f64) -> Result<ModeModel> {
    let h = CMat::from_row_slice(2, 2, &[C64::new(0.0, 0.0), C64::new(-hopping, 0.0), C64::new(-hopping, 0.0), C64::new(0.0, 0.0)]);
    ModeModel::new(h, DMatrix::from_row_slice(2, 2, &[onsite, cross, cross, onsite]))
}

/// Particle cap with headroom for a coherent state of mean N: N + 8√N + 10.
pub fn default_cap(n: usize) -> usize {
    n + (8.0 * (n as f64).sqrt()).ceil() as usize + 10
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct ExperimentOptions {
    pub dt: f64,
    pub samples: usize,
    pub leakage: f64,
}

impl Default for ExperimentOptions {
    fn default() -> Self {
        ExperimentOptions { dt: 1e-3, samples: 10, leakage: EXPERIMENT_LEAKAGE }
    }
}

struct ExactFlow {
    h: SparseMatrix,
    tau: f64,
    steps_per_sample: usize,
}

impl ExactFlow {
    fn new(model: &ModeModel, n: usize, basis: &FockBasis, t: f64, opts: &ExperimentOptions) -> Result<Self> {
        let h = fock_hamiltonian(&model.with_pair_scale(1.0 / n as f64), basis)?;
        let samples = opts.samples.max(1);
        let steps_per_sample = ((t.abs() / opts.dt / samples as f64).ceil() as usize).max(1);
        Ok(ExactFlow { h, tau: t / (samples * steps_per_sample) as f64, steps_per_sample })
    }

    fn advance(&self, v: &[C64], stats: &mut KrylovStats) -> Result<Vec<C64>> {
        let apply = |x: &[C64], out: &mut [C64]| self.h.apply_into(x, out);
        let mut x = v.to_vec();
        for _ in 0..self.steps_per_sample {
            x = expm_krylov(&apply, &x, self.tau, KrylovOptions::default(), stats)?;
        }
        Ok(x)
    }
}

fn check_setup(model: &ModeModel, c0: &[C64], basis: &FockBasis) -> Result<()> {
    let m = model.modes();
    if m > MAX_EXPERIMENT_MODES {
        return Err(Error::CostGuard(format!("{m} modes exceed the Fock-experiment limit {MAX_EXPERIMENT_MODES}")));
    }
    if basis.statistics() != Statistics::Boson || basis.sector().is_some() || basis.modes() != m {
        return Err(Error::Contract("experiments need a capped bosonic basis over the model's modes".into()));
    }
    if c0.len() != m {
        return Err(Error::Shape(format!("{} condensate coefficients for {m} modes", c0.len())));
    }
    Ok(())
}

fn scaled(c: &[C64], n: usize) -> Vec<C64> {
    let s = (n as f64).sqrt();
    c.iter().map(|z| z * s).collect()
}

#[derive(Clone, Debug, Serialize)]
pub struct GrowthReport {
    pub times: Vec<f64>,
    /// ⟨ξ_t, N ξ_t⟩.
    pub number: Vec<f64>,
    /// D e^{Kt} above every sample; absent when ⟨N⟩ stays at zero.
    pub envelope: Option<Envelope>,
    pub max_leakage: f64,
}

/// ξ_t = W(√N c_t)* e^{-iH_N t} W(√N c₀) ξ with H_N = dΓ(h) + (1/2N) Σ V a*a*aa.
pub fn fluctuation_growth_experiment(
    model: &ModeModel,
    c0: &[C64],
    xi: &FockVector,
    n: usize,
    t: f64,
    opts: &ExperimentOptions,
) -> Result<GrowthReport> {
    check_setup(model, c0, &xi.basis)?;
    let flow = ExactFlow::new(model, n, &xi.basis, t, opts)?;
    let hartree = ModeHartree::new(model.clone()).solve(c0, t, opts.dt, opts.samples)?;
    let mut psi = weyl_apply_with(&scaled(c0, n), xi, opts.leakage)?;
    let mut stats = KrylovStats::default();
    let mut rep = GrowthReport { times: Vec::new(), number: Vec::new(), envelope: None, max_leakage: 0.0 };
    for (i, (&time, c)) in hartree.times.iter().zip(&hartree.states).enumerate() {
        if i > 0 {
            psi = FockVector::new(psi.basis.clone(), flow.advance(&psi.amp, &mut stats)?)?;
        }
        let back: Vec<C64> = scaled(c, n).iter().map(|z| -z).collect();
        let xi_t = weyl_apply_with(&back, &psi, opts.leakage)?;
        rep.max_leakage = rep.max_leakage.max(psi.boundary_mass()).max(xi_t.boundary_mass());
        rep.times.push(time);
        rep.number.push(xi_t.number_moments().0);
    }
    if rep.number.iter().any(|&x| x > 1e-12) {
        let ys: Vec<f64> = rep.number.iter().map(|&x| x.max(1e-12)).collect();
        rep.envelope = Some(exponential_envelope(&rep.times, &ys)?);
    }
    Ok(rep)
}

#[derive(Clone, Debug, Serialize)]
pub struct NormReport {
    pub particles: usize,
    pub cap: usize,
    pub times: Vec<f64>,
    /// min over phases of ‖e^{-iH_N t}W(√N c)Ω - e^{iθ} W(√N c_t) U_∞(t;0) Ω‖.
    pub residual: Vec<f64>,
    pub max_leakage: f64,
    pub max_constraint_residual: f64,
}

/// min over θ of ‖a - e^{iθ} b‖, evaluated by direct subtraction at the optimal phase.
pub fn phase_optimal_distance(a: &FockVector, b: &FockVector) -> f64 {
    let overlap = a.inner(b);
    let phase = if overlap.norm() > 0.0 { overlap.conj() / overlap.norm() } else { C64::new(1.0, 0.0) };
    a.amp.iter().zip(&b.amp).map(|(x, y)| (x - phase * y).norm_sqr()).sum::<f64>().sqrt()
}

pub fn norm_approximation_experiment(
    model: &ModeModel,
    c0: &[C64],
    n: usize,
    cap: usize,
    t: f64,
    opts: &ExperimentOptions,
) -> Result<NormReport> {
    let basis = Arc::new(FockBasis::bosons(model.modes(), cap)?);
    check_setup(model, c0, &basis)?;
    let flow = ExactFlow::new(model, n, &basis, t, opts)?;
    let thetas = theta_propagate(model, c0, t, opts.dt, opts.samples)?;
    let vacuum = FockVector::vacuum(&basis)?;
    let mut psi = weyl_apply_with(&scaled(c0, n), &vacuum, opts.leakage)?;
    let mut stats = KrylovStats::default();
    let mut rep = NormReport {
        particles: n,
        cap,
        times: Vec::new(),
        residual: Vec::new(),
        max_leakage: psi.boundary_mass(),
        max_constraint_residual: thetas.max_residual,
    };
    for (i, &time) in thetas.times.iter().enumerate() {
        if i > 0 {
            psi = FockVector::new(basis.clone(), flow.advance(&psi.amp, &mut stats)?)?;
        }
        let k = thetas.maps[i].vacuum_kernel()?;
        let squeezed = bogoliubov_apply_with(&k, &vacuum, opts.leakage)?;
        let approx = weyl_apply_with(&scaled(&thetas.condensate[i], n), &squeezed, opts.leakage)?;
        rep.max_leakage = rep.max_leakage.max(approx.boundary_mass()).max(psi.boundary_mass());
        rep.times.push(time);
        rep.residual.push(phase_optimal_distance(&psi, &approx));
    }
    Ok(rep)
}
