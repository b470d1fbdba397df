//! Exact N-particle dynamics in the occupation basis over grid points, reduced
//! densities, and the correlation-weighted energy estimate on small 3D product grids.

mod estimate;

use std::sync::Arc;

use schemars::JsonSchema;
use serde::{Deserialize, Serialize};

pub use estimate::{gp_energy_estimate_check, EnergyEstimateReport, ProductGrid};

use crate::error::{Error, Result};
use crate::fock::{second_quantize, FockBasis, FockVector, LadderKernel, Statistics};
use crate::numerics::krylov::{expm_krylov, KrylovOptions, KrylovStats};
use crate::numerics::linalg::{hermitian_function, kron, trace_norm, CMat};
use crate::numerics::{kinetic_matrix, Grid, ModeModel, PotentialSpec, SparseMatrix};
use crate::C64;

/// Largest M^k for which γ^(k) is assembled.
pub const DENSITY_GUARD: usize = 4096;

/// Grid potentials need `N h <= RESOLUTION_FACTOR * range`.
pub const RESOLUTION_FACTOR: f64 = 1.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, JsonSchema)]
#[serde(rename_all = "kebab-case")]
pub enum Coupling {
    /// Σ_{i<j} V(x_i - x_j).
    Bare,
    /// (1/N) Σ_{i<j} V(x_i - x_j).
    MeanField,
    /// Σ_{i<j} N² V(N(x_i - x_j)).
    GrossPitaevskii,
}

#[derive(Clone, Debug, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct HamiltonianSpec {
    /// Kinetic scale: H = Σ -ε²Δ_j + ... and the flow is iε∂_t.
    #[serde(default = "unit")]
    pub eps: f64,
    #[serde(default = "PotentialSpec::zero")]
    pub v_ext: PotentialSpec,
    pub interaction: PotentialSpec,
    pub coupling: Coupling,
}

fn unit() -> f64 {
    1.0
}

impl HamiltonianSpec {
    pub fn mean_field(v: PotentialSpec) -> Self {
        HamiltonianSpec { eps: 1.0, v_ext: PotentialSpec::zero(), interaction: v, coupling: Coupling::MeanField }
    }

    /// The interaction actually placed between grid points, with λ already applied.
    pub fn effective_interaction(&self, grid: &Grid, n: usize) -> Result<PotentialSpec> {
        match self.coupling {
            Coupling::Bare => Ok(self.interaction.clone()),
            Coupling::MeanField => Ok(self.interaction.scaled(1.0 / n as f64)),
            Coupling::GrossPitaevskii => {
                check_resolution(grid, &self.interaction, n)?;
                Ok(self.interaction.gp_rescaled(n as f64))
            }
        }
    }

    /// One-particle model with the scaled pair interaction.
    pub fn mode_model(&self, grid: &Grid, n: usize) -> Result<ModeModel> {
        if !(self.eps > 0.0) {
            return Err(Error::Contract("eps must be positive".into()));
        }
        ModeModel::from_grid(grid, self.eps, &self.v_ext, &self.effective_interaction(grid, n)?)
    }

    /// Sparse many-body Hamiltonian on `basis` (modes = grid points).
    pub fn assemble(&self, grid: &Grid, basis: &FockBasis) -> Result<SparseMatrix> {
        let n = basis
            .sector()
            .ok_or_else(|| Error::Contract("many-body Hamiltonians need a fixed particle sector".into()))?;
        if basis.modes() != grid.len() {
            return Err(Error::Shape("basis modes differ from grid points".into()));
        }
        let model = self.mode_model(grid, n)?;
        fock_hamiltonian(&model, basis)
    }
}

/// dΓ(h) + ½ Σ V_xy a*_x a*_y a_y a_x for any Fock basis.
pub fn fock_hamiltonian(model: &ModeModel, basis: &FockBasis) -> Result<SparseMatrix> {
    let kin = second_quantize(basis, &LadderKernel::OneBody(model.one_body.clone()))?;
    let pair = second_quantize(basis, &LadderKernel::PairPotential(model.pair.clone()))?;
    let h = SparseMatrix::combine(&[(&kin, C64::new(1.0, 0.0)), (&pair, C64::new(1.0, 0.0))]);
    let scale = h.triplets().fold(1.0f64, |m, (_, _, z)| m.max(z.norm()));
    if h.hermitian_defect() > 1e-12 * scale {
        return Err(Error::Numerical("assembled Hamiltonian is not Hermitian".into()));
    }
    Ok(h)
}

/// Refuses GP-scaled potentials whose length scale range/N falls below the grid spacing.
pub fn check_resolution(grid: &Grid, v: &PotentialSpec, n: usize) -> Result<()> {
    if v.is_zero() {
        return Ok(());
    }
    let range = v.range / v.length_factor;
    let bound = RESOLUTION_FACTOR * range / grid.spacing();
    if (n as f64) > bound {
        return Err(Error::Resolution(format!(
            "N = {n} exceeds the resolvable bound {bound:.2} (range {range}, h = {})",
            grid.spacing()
        )));
    }
    Ok(())
}

/// N particles on a grid, stored in the fixed-N occupation basis over grid points.
#[derive(Clone, Debug)]
pub struct ManyBodyState {
    pub grid: Grid,
    pub fock: FockVector,
}

impl ManyBodyState {
    pub fn particles(&self) -> usize {
        self.fock.basis.sector().expect("many-body states live in a fixed sector")
    }

    pub fn statistics(&self) -> Statistics {
        self.fock.basis.statistics()
    }

    /// φ^{⊗N} from orthonormal-basis coefficients c (Σ|c|² = 1).
    pub fn product(grid: &Grid, c: &[C64], n: usize) -> Result<Self> {
        grid.check_len(c.len(), "orbital")?;
        let basis = Arc::new(FockBasis::bosons_sector(grid.len(), n)?);
        // (a*(c))^N Ω / √N!: amplitude √(N!/Π n_j!) Π c_j^{n_j}
        let log_nfact: f64 = (1..=n).map(|k| (k as f64).ln()).sum();
        let amp = basis
            .states()
            .iter()
            .map(|occ| {
                let mut z = C64::new(1.0, 0.0);
                let mut log_w = log_nfact;
                for (j, &k) in occ.iter().enumerate() {
                    if k > 0 {
                        z *= c[j].powu(k as u32);
                        log_w -= (1..=k as usize).map(|q| (q as f64).ln()).sum::<f64>();
                    }
                }
                z * (0.5 * log_w).exp()
            })
            .collect();
        Ok(ManyBodyState { grid: grid.clone(), fock: FockVector::new(basis, amp)? })
    }

    /// Slater determinant a*(f₁)…a*(f_N)Ω of orthonormal orbitals (columns).
    pub fn slater(grid: &Grid, orbitals: &CMat) -> Result<Self> {
        grid.check_len(orbitals.nrows(), "orbital")?;
        let n = orbitals.ncols();
        let gram = orbitals.adjoint() * orbitals;
        if (gram - CMat::identity(n, n)).norm() > 1e-10 {
            return Err(Error::Contract("Slater orbitals must be orthonormal".into()));
        }
        let basis = Arc::new(FockBasis::fermions_sector(grid.len(), n)?);
        let amp = basis
            .states()
            .iter()
            .map(|occ| {
                let rows: Vec<usize> = (0..occ.len()).filter(|&i| occ[i] == 1).collect();
                CMat::from_fn(n, n, |k, j| orbitals[(rows[k], j)]).determinant()
            })
            .collect();
        Ok(ManyBodyState { grid: grid.clone(), fock: FockVector::new(basis, amp)? })
    }

    pub fn norm(&self) -> f64 {
        self.fock.norm()
    }

    pub fn energy(&self, h: &SparseMatrix) -> f64 {
        self.fock.expectation(h).re
    }
}

#[derive(Clone, Copy, Debug)]
pub struct PropagationOptions {
    pub dt: f64,
    pub krylov: KrylovOptions,
}

impl Default for PropagationOptions {
    fn default() -> Self {
        PropagationOptions { dt: 1e-3, krylov: KrylovOptions::default() }
    }
}

#[derive(Clone, Copy, Debug, Default, Serialize)]
pub struct PropagationReport {
    pub steps: usize,
    /// Krylov steps that had to be split to meet the tolerance.
    pub refinements: usize,
    pub norm_drift: f64,
    pub energy_drift: f64,
}

/// Ψ_t = exp(-i H t/ε) Ψ in steps of `opts.dt`; `eps` = 1 for the plain Schrödinger flow.
pub fn propagate(
    state: &ManyBodyState,
    h: &SparseMatrix,
    t: f64,
    eps: f64,
    opts: PropagationOptions,
) -> Result<(ManyBodyState, PropagationReport)> {
    if !(opts.dt > 0.0) || !(eps > 0.0) {
        return Err(Error::Contract("dt and eps must be positive".into()));
    }
    if h.rows() != state.fock.amp.len() {
        return Err(Error::Shape("Hamiltonian does not match the state basis".into()));
    }
    let apply = |x: &[C64], out: &mut [C64]| h.apply_into(x, out);
    let e0 = state.energy(h);
    let n0 = state.norm();
    let steps = ((t.abs() / opts.dt).round() as usize).max(if t == 0.0 { 0 } else { 1 });
    let tau = if steps == 0 { 0.0 } else { t / steps as f64 / eps };
    let mut stats = KrylovStats::default();
    let mut amp = state.fock.amp.clone();
    for _ in 0..steps {
        amp = expm_krylov(&apply, &amp, tau, opts.krylov, &mut stats)?;
    }
    let out = ManyBodyState { grid: state.grid.clone(), fock: FockVector::new(state.fock.basis.clone(), amp)? };
    let report = PropagationReport {
        steps,
        refinements: stats.refinements,
        norm_drift: (out.norm() - n0).abs(),
        energy_drift: (out.energy(h) - e0).abs() / e0.abs().max(1.0),
    };
    Ok((out, report))
}

/// γ^(k) with Tr γ^(k) = C(N,k), indexed by (x₁..x_k) with x₁ slowest.
///
/// γ^(k)(x;y) = (1/k!) ⟨a_{y_k}…a_{y_1}Ψ, a_{x_k}…a_{x_1}Ψ⟩.
pub fn reduced_density_k(state: &ManyBodyState, k: usize) -> Result<CMat> {
    let n = state.particles();
    let basis = &state.fock.basis;
    let m = basis.modes();
    if k == 0 || k > n {
        return Err(Error::Contract(format!("k = {k} outside 1..={n}")));
    }
    let dim = m.checked_pow(k as u32).filter(|&d| d <= DENSITY_GUARD).ok_or_else(|| {
        Error::CostGuard(format!("γ^({k}) on {m} modes exceeds {DENSITY_GUARD} rows"))
    })?;
    let target = match basis.statistics() {
        Statistics::Boson => FockBasis::bosons_sector(m, n - k)?,
        Statistics::Fermion => FockBasis::fermions_sector(m, n - k)?,
    };
    let mut a = CMat::zeros(target.len(), dim);
    let mut occ = vec![0u8; m];
    let mut idx = vec![0usize; k];
    for (col, c) in state.fock.amp.iter().enumerate() {
        if c.norm_sqr() == 0.0 {
            continue;
        }
        for flat in 0..dim {
            let mut r = flat;
            for slot in (0..k).rev() {
                idx[slot] = r % m;
                r /= m;
            }
            occ.copy_from_slice(basis.state(col));
            let mut coef = 1.0;
            let mut alive = true;
            for &x in &idx {
                match basis.ladder(&mut occ, x, false) {
                    Some(s) => coef *= s,
                    None => {
                        alive = false;
                        break;
                    }
                }
            }
            if alive {
                let row = target.find(&occ).expect("annihilated state lies in the smaller sector");
                a[(row, flat)] += c * coef;
            }
        }
    }
    let kfact: f64 = (1..=k).map(|q| q as f64).product();
    Ok((a.adjoint() * &a).transpose() * C64::new(1.0 / kfact, 0.0))
}

/// Tr_{k} over the last slot of a (k)-particle kernel on m modes.
pub fn partial_trace_last(gamma: &CMat, m: usize) -> CMat {
    let d = gamma.nrows() / m;
    CMat::from_fn(d, d, |i, j| (0..m).map(|z| gamma[(i * m + z, j * m + z)]).sum())
}

/// Tr|S₁…S_k γ S_k…S₁| with S = (1 - Δ)^{1/2} on the grid.
pub fn sobolev_norm(grid: &Grid, gamma: &CMat, k: usize) -> Result<f64> {
    let m = grid.len();
    if gamma.nrows() != m.pow(k as u32) {
        return Err(Error::Shape(format!("γ has {} rows, expected {}^{k}", gamma.nrows(), m)));
    }
    let kin = kinetic_matrix(grid, 1.0);
    let s1 = hermitian_function(&kin, |l| C64::new((1.0 + l.max(0.0)).sqrt(), 0.0));
    let mut s = s1.clone();
    for _ in 1..k {
        s = kron(&s, &s1);
    }
    let w = &s * gamma * &s;
    trace_norm(&crate::numerics::linalg::symmetrize(&w))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn product_state_is_normalized() {
        let g = Grid::new(1, 4.0, 6).unwrap();
        let c: Vec<C64> = (0..6).map(|i| C64::new((i as f64).cos(), 0.3 * i as f64)).collect();
        let n = c.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        let c: Vec<C64> = c.iter().map(|z| z / n).collect();
        let s = ManyBodyState::product(&g, &c, 3).unwrap();
        assert!((s.norm() - 1.0).abs() < 1e-13);
    }

    #[test]
    fn resolution_guard_refuses_large_n() {
        let g = Grid::new(1, 8.0, 16).unwrap();
        let v = PotentialSpec::gaussian(1.0, 1.0);
        assert!(check_resolution(&g, &v, 2).is_ok());
        assert!(matches!(check_resolution(&g, &v, 3), Err(Error::Resolution(_))));
    }
}
