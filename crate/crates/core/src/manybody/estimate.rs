use serde::Serialize;

use super::{check_resolution, ManyBodyState};
use crate::error::{Error, Result};
use crate::fock::Statistics;
use crate::numerics::{Fourier, Grid, PotentialSpec};
use crate::scattering::{smallness_parameter, ScatteringSolution};
use crate::C64;

/// Largest first-quantized amplitude array handled.
pub const PRODUCT_GUARD: usize = 1 << 21;

/// N copies of a grid; amplitudes indexed with particle 0 slowest, in the orthonormal point basis.
pub struct ProductGrid {
    pub grid: Grid,
    pub particles: usize,
    fourier: Fourier,
}

impl ProductGrid {
    pub fn new(grid: &Grid, particles: usize) -> Result<Self> {
        let total = (grid.len() as f64).powi(particles as i32);
        if total > PRODUCT_GUARD as f64 {
            return Err(Error::CostGuard(format!("{total:.0} product amplitudes exceed {PRODUCT_GUARD}")));
        }
        Ok(ProductGrid { grid: grid.clone(), particles, fourier: Fourier::new(grid) })
    }

    pub fn len(&self) -> usize {
        self.grid.len().pow(self.particles as u32)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Grid index of particle `j` in product index `flat`.
    pub fn slot(&self, flat: usize, j: usize) -> usize {
        let g = self.grid.len();
        (flat / g.pow((self.particles - 1 - j) as u32)) % g
    }

    /// Applies a one-particle map to slot `j`.
    pub fn map_particle<F: Fn(&[C64]) -> Vec<C64>>(&self, psi: &[C64], j: usize, op: F) -> Vec<C64> {
        let g = self.grid.len();
        let stride = g.pow((self.particles - 1 - j) as u32);
        let block = stride * g;
        let mut out = vec![C64::new(0.0, 0.0); psi.len()];
        let mut line = vec![C64::new(0.0, 0.0); g];
        for base in (0..psi.len()).step_by(block) {
            for off in 0..stride {
                for k in 0..g {
                    line[k] = psi[base + off + k * stride];
                }
                let r = op(&line);
                for k in 0..g {
                    out[base + off + k * stride] = r[k];
                }
            }
        }
        out
    }

    pub fn derivative(&self, psi: &[C64], j: usize, axis: usize) -> Vec<C64> {
        self.map_particle(psi, j, |l| self.fourier.derivative(l, axis))
    }

    /// Σ_j -Δ_j ψ.
    pub fn kinetic(&self, psi: &[C64]) -> Vec<C64> {
        let mut out = vec![C64::new(0.0, 0.0); psi.len()];
        for j in 0..self.particles {
            let t = self.map_particle(psi, j, |l| self.fourier.laplacian(l, 1.0));
            out.iter_mut().zip(t).for_each(|(o, x)| *o += x);
        }
        out
    }

    /// Minimum-image distance between particles `i` and `j` in configuration `flat`.
    pub fn distance(&self, flat: usize, i: usize, j: usize) -> f64 {
        let d = self.grid.difference_index(self.slot(flat, i), self.slot(flat, j));
        self.grid.displacement_radius(d)
    }

    /// Symmetrized first-quantized amplitudes of a bosonic occupation-basis state.
    pub fn from_state(&self, state: &ManyBodyState) -> Result<Vec<C64>> {
        if state.statistics() != Statistics::Boson || state.particles() != self.particles {
            return Err(Error::Contract("expected a bosonic state with matching N".into()));
        }
        if state.grid != self.grid {
            return Err(Error::Shape("state lives on a different grid".into()));
        }
        let n = self.particles;
        let nfact: f64 = (1..=n).map(|k| k as f64).product();
        let mut out = vec![C64::new(0.0, 0.0); self.len()];
        let mut occ = vec![0u8; self.grid.len()];
        for flat in 0..self.len() {
            occ.iter_mut().for_each(|o| *o = 0);
            for j in 0..n {
                occ[self.slot(flat, j)] += 1;
            }
            let i = state.fock.basis.find(&occ).expect("occupation lies in the sector");
            let mult: f64 = occ.iter().map(|&k| (1..=k as usize).map(|q| q as f64).product::<f64>()).product();
            out[flat] = state.fock.amp[i] * (mult / nfact).sqrt();
        }
        Ok(out)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct EnergyEstimateReport {
    /// ⟨ψ, H² ψ⟩.
    pub lhs: f64,
    /// (N²/2) ∫ |∇₁∇₂ (ψ / f(N(x₁ - x₂)))|².
    pub rhs: f64,
    pub ratio: f64,
    /// ∫ |∇₁∇₂ ψ|² without the correlation division.
    pub uncorrelated: f64,
    pub rho: f64,
}

/// Compares ⟨ψ,H²ψ⟩ for H = Σ -Δ_j + Σ_{i<j} N²V(N(x_i - x_j)) with the
/// correlation-divided mixed-derivative norm on a coarse 3D product grid.
pub fn gp_energy_estimate_check(
    pg: &ProductGrid,
    v: &PotentialSpec,
    sol: &ScatteringSolution,
    psi: &[C64],
) -> Result<EnergyEstimateReport> {
    let n = pg.particles;
    if pg.grid.dim != 3 {
        return Err(Error::Contract("the correlation division is defined in three dimensions only".into()));
    }
    if !(2..=3).contains(&n) || pg.grid.points > 8 {
        return Err(Error::CostGuard(format!("N = {n} on {} points per axis is outside N ∈ {{2,3}}, M ≤ 8", pg.grid.points)));
    }
    if psi.len() != pg.len() {
        return Err(Error::Shape("amplitude array does not match the product grid".into()));
    }
    if &sol.potential != v {
        return Err(Error::Contract("scattering solution belongs to a different potential".into()));
    }
    let rho = smallness_parameter(v)?;
    if rho >= 1.0 {
        return Err(Error::Contract(format!("smallness parameter {rho:.3} is not small")));
    }
    check_resolution(&pg.grid, v, n)?;
    let nf = n as f64;
    let scaled = v.gp_rescaled(nf);

    let mut hpsi = pg.kinetic(psi);
    for (flat, out) in hpsi.iter_mut().enumerate() {
        let mut w = 0.0;
        for i in 0..n {
            for j in i + 1..n {
                w += scaled.eval(pg.distance(flat, i, j));
            }
        }
        *out += psi[flat] * w;
    }
    let lhs: f64 = hpsi.iter().map(|z| z.norm_sqr()).sum();

    let divided: Vec<C64> = psi
        .iter()
        .enumerate()
        .map(|(flat, z)| z / sol.f_at(nf * pg.distance(flat, 0, 1)))
        .collect();
    let mixed = |phi: &[C64]| -> f64 {
        let mut s = 0.0;
        for a in 0..3 {
            let d1 = pg.derivative(phi, 0, a);
            for b in 0..3 {
                s += pg.derivative(&d1, 1, b).iter().map(|z| z.norm_sqr()).sum::<f64>();
            }
        }
        s
    };
    let rhs = 0.5 * nf * nf * mixed(&divided);
    let uncorrelated = mixed(psi);
    Ok(EnergyEstimateReport { lhs, rhs, ratio: if rhs > 0.0 { lhs / rhs } else { f64::INFINITY }, uncorrelated, rho })
}
