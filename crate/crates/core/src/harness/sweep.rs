use rayon::prelude::*;
use serde::Serialize;

use super::config::{ConvergeHartreeParams, ConvergeHfParams, FermiInitial, Packet};
use super::output::{RunOutput, Table};
use crate::effective::{free_fermi_momenta, gaussian_packet, lowest_orbitals, plane_wave_orbitals, HartreeFock, ModeHartree};
use crate::error::{Error, Result};
use crate::manybody::{propagate, reduced_density_k, Coupling, HamiltonianSpec, ManyBodyState, PropagationOptions};
use crate::numerics::linalg::{hs_norm, trace_norm, CMat};
use crate::numerics::{fit_power_law, to_modes, FitResult, Grid, ModeModel, PotentialSpec};
use crate::C64;

/// Distances at or below this are indistinguishable from propagation error.
pub const DISTANCE_FLOOR: f64 = 1e-9;

/// Largest Fock basis an exact sweep point may use.
pub const SWEEP_BASIS_LIMIT: usize = 50_000;

/// Per-N distances and the log-log fit over the feasible points.
#[derive(Clone, Debug, Serialize)]
pub struct ConvergenceReport {
    pub particles: Vec<usize>,
    pub distances: Vec<f64>,
    /// ε per point (1 for the bosonic sweep).
    pub eps: Vec<f64>,
    pub fit: Option<FitResult>,
    /// Why the fit was refused, if it was.
    pub refusal: Option<String>,
    /// Skipped N with the reason.
    pub skipped: Vec<(usize, String)>,
}

impl ConvergenceReport {
    fn assemble(points: Vec<(usize, f64, Result<f64>)>) -> Self {
        let mut rep = ConvergenceReport { particles: vec![], distances: vec![], eps: vec![], fit: None, refusal: None, skipped: vec![] };
        for (n, eps, d) in points {
            match d {
                Ok(d) => {
                    rep.particles.push(n);
                    rep.eps.push(eps);
                    rep.distances.push(d);
                }
                Err(e) => rep.skipped.push((n, e.to_string())),
            }
        }
        if rep.distances.iter().any(|&d| d <= DISTANCE_FLOOR) {
            rep.refusal = Some(format!("degenerate data: distances at numerical floor {DISTANCE_FLOOR:e}"));
            return rep;
        }
        let xs: Vec<f64> = rep.particles.iter().map(|&n| n as f64).collect();
        match fit_power_law(&xs, &rep.distances) {
            Ok(f) => rep.fit = Some(f),
            Err(e) => rep.refusal = Some(e.to_string()),
        }
        rep
    }

    /// Distances strictly decreasing along the sweep.
    pub fn monotone_decreasing(&self) -> bool {
        self.distances.windows(2).all(|w| w[1] < w[0])
    }

    pub fn into_output(self, table_name: &str, distance_unit: &str) -> RunOutput {
        let mut t = Table::new(table_name, &[("N", "particles"), ("eps", "1"), ("distance", distance_unit)]).loglog();
        for i in 0..self.particles.len() {
            t.push(vec![self.particles[i] as f64, self.eps[i], self.distances[i]]);
        }
        let mut out = RunOutput { tables: vec![t], ..Default::default() };
        out.warnings = self.skipped.iter().map(|(n, e)| format!("N = {n} skipped: {e}")).collect();
        out.note("monotone_decreasing", self.monotone_decreasing());
        if let Some(f) = &self.fit {
            out.fits.insert("distance_vs_n".into(), f.clone());
        }
        out.refusal = self.refusal.clone();
        out.note("skipped", &self.skipped);
        out
    }
}

fn check_basis(size: usize) -> Result<()> {
    if size > SWEEP_BASIS_LIMIT {
        return Err(Error::CostGuard(format!("{size} basis states exceed the sweep limit {SWEEP_BASIS_LIMIT}")));
    }
    Ok(())
}

fn binomial(n: usize, k: usize) -> usize {
    (0..k).fold(1u128, |acc, i| acc.saturating_mul((n - i) as u128) / (i + 1) as u128).min(usize::MAX as u128) as usize
}

fn check_sweep(particles: &[usize]) -> Result<()> {
    if particles.is_empty() || particles.contains(&0) {
        return Err(Error::Config("particle sweep must be a nonempty list of positive N".into()));
    }
    Ok(())
}

pub fn packet_modes(grid: &Grid, p: &Packet) -> Vec<C64> {
    let c = to_modes(grid, &gaussian_packet(grid, p.center, p.width, p.momentum));
    let n = c.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    c.iter().map(|z| z / n).collect()
}

/// (1/N) Tr|γ^(1)_{N,t} - N|φ_t⟩⟨φ_t|| from φ^{⊗N} under the mean-field Hamiltonian with
/// ε = 1, for each N of the sweep.
pub fn converge_hartree(p: &ConvergeHartreeParams) -> Result<ConvergenceReport> {
    check_sweep(&p.particles)?;
    p.grid.validate()?;
    let c0 = packet_modes(&p.grid, &p.packet);
    let model = ModeModel::from_grid(&p.grid, 1.0, &p.v_ext, &p.interaction)?;
    let tr = ModeHartree::new(model).solve(&c0, p.t, p.hartree_dt, 1)?;
    let ct = tr.states.last().expect("trajectory holds the final state");
    let proj = CMat::from_fn(ct.len(), ct.len(), |i, j| ct[i] * ct[j].conj());
    let spec = HamiltonianSpec { eps: 1.0, v_ext: p.v_ext.clone(), interaction: p.interaction.clone(), coupling: Coupling::MeanField };
    let points = p
        .particles
        .par_iter()
        .map(|&n| {
            let d = (|| {
                check_basis(binomial(n + p.grid.len() - 1, n))?;
                let psi = ManyBodyState::product(&p.grid, &c0, n)?;
                let h = spec.assemble(&p.grid, &psi.fock.basis)?;
                let opts = PropagationOptions { dt: p.exact_dt, ..Default::default() };
                let (out, _) = propagate(&psi, &h, p.t, 1.0, opts)?;
                let gamma = reduced_density_k(&out, 1)?;
                Ok(trace_norm(&(gamma - &proj * C64::new(n as f64, 0.0)))? / n as f64)
            })();
            (n, 1.0, d)
        })
        .collect();
    Ok(ConvergenceReport::assemble(points))
}

/// Orthonormal initial orbitals for N fermions at scale ε.
pub fn fermi_orbitals(grid: &Grid, n: usize, eps: f64, initial: &FermiInitial) -> Result<CMat> {
    match *initial {
        FermiInitial::FreeFermi => plane_wave_orbitals(grid, &free_fermi_momenta(grid.dim, grid.length, n, eps)?.momenta),
        FermiInitial::Trap { amplitude, center } => {
            let mut h = ModeModel::from_grid(grid, eps, &PotentialSpec::zero(), &PotentialSpec::zero())?.one_body;
            for i in 0..grid.len() {
                let x = grid.position(i);
                let r2: f64 = (0..grid.dim).map(|a| (x[a] - if a == 0 { center } else { 0.0 }).powi(2)).sum();
                h[(i, i)] += C64::new(amplitude * r2, 0.0);
            }
            lowest_orbitals(&h, n)
        }
    }
}

/// ‖γ^(1)_{N,t} - ω_t‖_HS / ‖ω_t‖_HS at ε = N^{-1/3} for Slater initial data.
pub fn converge_hf(p: &ConvergeHfParams) -> Result<ConvergenceReport> {
    check_sweep(&p.particles)?;
    p.grid.validate()?;
    if p.grid.dim != 1 {
        return Err(Error::Contract("the fermionic convergence sweep runs on 1D grids".into()));
    }
    let points = p
        .particles
        .par_iter()
        .map(|&n| {
            let eps = (n as f64).powf(-1.0 / 3.0);
            let d = (|| {
                check_basis(binomial(p.grid.len(), n.min(p.grid.len())))?;
                let orb = fermi_orbitals(&p.grid, n, eps, &p.initial)?;
                let psi = ManyBodyState::slater(&p.grid, &orb)?;
                let spec = HamiltonianSpec { eps, v_ext: p.v_ext.clone(), interaction: p.interaction.clone(), coupling: Coupling::MeanField };
                let h = spec.assemble(&p.grid, &psi.fock.basis)?;
                let opts = PropagationOptions { dt: p.dt, ..Default::default() };
                let (out, _) = propagate(&psi, &h, p.t, eps, opts)?;
                let gamma = reduced_density_k(&out, 1)?;
                let model = ModeModel::from_grid(&p.grid, eps, &p.v_ext, &p.interaction)?;
                let (omega, _) = HartreeFock::new(&model, n, eps)?.solve(&(&orb * orb.adjoint()), p.t, p.dt, 1)?;
                Ok(hs_norm(&(gamma - &omega)) / hs_norm(&omega))
            })();
            (n, eps, d)
        })
        .collect();
    Ok(ConvergenceReport::assemble(points))
}
