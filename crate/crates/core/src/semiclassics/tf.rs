use schemars::JsonSchema;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{Fourier, Grid, PotentialSpec};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields, default)]
pub struct TfOptions {
    pub c_tf: f64,
    /// Weight of the new iterate in the damped fixed-point update.
    pub damping: f64,
    /// Sup-norm Euler-Lagrange residual at which the iteration stops.
    pub tol: f64,
    /// Mass accuracy of the chemical-potential bisection.
    pub mass_tol: f64,
    pub max_iter: usize,
}

impl Default for TfOptions {
    fn default() -> Self {
        TfOptions { c_tf: 1.0, damping: 0.5, tol: 1e-10, mass_tol: 1e-12, max_iter: 20_000 }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct TfState {
    pub grid: Grid,
    pub density: Vec<f64>,
    /// φ = v_ext + V * ρ.
    pub potential: Vec<f64>,
    pub mu: f64,
    pub c_tf: f64,
    pub energy: f64,
    pub residual: f64,
    pub iterations: usize,
    pub energy_history: Vec<f64>,
    pub residual_history: Vec<f64>,
}

/// Thomas-Fermi functional with the kinetic term d/(d+2) c ∫ρ^{1+2/d}; Euler-Lagrange
/// equation c ρ^{2/d} = (μ - φ)_+.
pub struct ThomasFermi {
    pub grid: Grid,
    pub v_ext: Vec<f64>,
    v_disp: Vec<f64>,
    fourier: Fourier,
    pub c_tf: f64,
}

impl ThomasFermi {
    pub fn new(grid: &Grid, v_ext: &[f64], v: &PotentialSpec, c_tf: f64) -> Result<Self> {
        grid.check_len(v_ext.len(), "external potential")?;
        if v_ext.iter().any(|x| !x.is_finite()) {
            return Err(Error::Contract("external potential must be finite".into()));
        }
        if !(c_tf > 0.0) {
            return Err(Error::Contract(format!("c_TF must be positive, got {c_tf}")));
        }
        let v_disp = v.sample_displacements(grid)?;
        if v_disp.iter().any(|&x| x < 0.0) {
            return Err(Error::Contract("Thomas-Fermi interaction must be nonnegative".into()));
        }
        Ok(ThomasFermi { grid: grid.clone(), v_ext: v_ext.to_vec(), v_disp, fourier: Fourier::new(grid), c_tf })
    }

    fn kinetic_power(&self) -> f64 {
        1.0 + 2.0 / self.grid.dim as f64
    }

    pub fn potential(&self, rho: &[f64]) -> Vec<f64> {
        let conv = self.fourier.convolve(&self.v_disp, rho);
        self.v_ext.iter().zip(conv).map(|(v, w)| v + w).collect()
    }

    pub fn energy(&self, rho: &[f64]) -> Result<f64> {
        self.grid.check_len(rho.len(), "density")?;
        let h = self.grid.cell_volume();
        let d = self.grid.dim as f64;
        let p = self.kinetic_power();
        let conv = self.fourier.convolve(&self.v_disp, rho);
        Ok(rho
            .iter()
            .zip(&self.v_ext)
            .zip(&conv)
            .map(|((&r, &v), &w)| h * (d / (d + 2.0) * self.c_tf * r.max(0.0).powf(p) + v * r + 0.5 * w * r))
            .sum())
    }

    /// ((μ - φ)_+ / c)^{d/2}.
    fn filled(&self, phi: &[f64], mu: f64) -> Vec<f64> {
        let e = self.grid.dim as f64 / 2.0;
        phi.iter().map(|&p| ((mu - p).max(0.0) / self.c_tf).powf(e)).collect()
    }

    fn mass(&self, rho: &[f64]) -> f64 {
        rho.iter().sum::<f64>() * self.grid.cell_volume()
    }

    /// Chemical potential giving unit mass in the potential φ, by bisection.
    pub fn chemical_potential(&self, phi: &[f64], mass_tol: f64) -> Result<f64> {
        let lo0 = phi.iter().cloned().fold(f64::INFINITY, f64::min);
        let mut lo = lo0;
        let mut step = 1.0;
        let mut hi = lo0 + step;
        while self.mass(&self.filled(phi, hi)) < 1.0 {
            step *= 2.0;
            hi = lo0 + step;
            if !hi.is_finite() || step > 1e12 {
                return Err(Error::Numerical("chemical potential bracket diverged".into()));
            }
        }
        for _ in 0..400 {
            let mid = 0.5 * (lo + hi);
            let m = self.mass(&self.filled(phi, mid));
            if (m - 1.0).abs() < mass_tol {
                return Ok(mid);
            }
            if m < 1.0 {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo <= f64::EPSILON * hi.abs().max(1.0) {
                break;
            }
        }
        let mid = 0.5 * (lo + hi);
        let m = self.mass(&self.filled(phi, mid));
        if (m - 1.0).abs() < mass_tol {
            Ok(mid)
        } else {
            Err(Error::Numerical(format!("mass bisection stalled at |m - 1| = {:.3e}", (m - 1.0).abs())))
        }
    }

    /// sup |c ρ^{2/d} - (μ - φ)_+| with μ re-fitted to φ(ρ); returns (μ, φ, residual).
    pub fn euler_lagrange(&self, rho: &[f64], mass_tol: f64) -> Result<(f64, Vec<f64>, f64)> {
        let phi = self.potential(rho);
        let mu = self.chemical_potential(&phi, mass_tol)?;
        let q = 2.0 / self.grid.dim as f64;
        let res = rho
            .iter()
            .zip(&phi)
            .map(|(&r, &p)| (self.c_tf * r.max(0.0).powf(q) - (mu - p).max(0.0)).abs())
            .fold(0.0, f64::max);
        Ok((mu, phi, res))
    }

    pub fn minimize(&self, opts: &TfOptions) -> Result<TfState> {
        if !(opts.damping > 0.0 && opts.damping <= 1.0) {
            return Err(Error::Contract(format!("damping {} outside (0, 1]", opts.damping)));
        }
        let n = self.grid.len();
        let mut rho = vec![1.0 / (n as f64 * self.grid.cell_volume()); n];
        let mut energy = self.energy(&rho)?;
        let mut energy_history = vec![energy];
        let mut residual_history = Vec::new();
        let mut theta = opts.damping;
        for it in 0..opts.max_iter {
            let (mu, phi, res) = self.euler_lagrange(&rho, opts.mass_tol)?;
            residual_history.push(res);
            if res < opts.tol {
                return Ok(TfState {
                    grid: self.grid.clone(),
                    density: rho,
                    potential: phi,
                    mu,
                    c_tf: self.c_tf,
                    energy,
                    residual: res,
                    iterations: it,
                    energy_history,
                    residual_history,
                });
            }
            let target = self.filled(&phi, mu);
            // backtrack until the energy does not increase
            loop {
                let cand: Vec<f64> = rho.iter().zip(&target).map(|(r, t)| (1.0 - theta) * r + theta * t).collect();
                let e = self.energy(&cand)?;
                if e <= energy + 1e-15 * energy.abs().max(1.0) {
                    rho = cand;
                    energy = e;
                    energy_history.push(e);
                    break;
                }
                theta *= 0.5;
                if theta < 1e-8 {
                    return Err(Error::NonConvergence { iterations: it, residual: res, history: residual_history });
                }
            }
            theta = (2.0 * theta).min(opts.damping);
        }
        let res = residual_history.last().copied().unwrap_or(f64::INFINITY);
        Err(Error::NonConvergence { iterations: opts.max_iter, residual: res, history: residual_history })
    }
}

pub fn tf_minimize(grid: &Grid, v_ext: &PotentialSpec, v: &PotentialSpec, opts: &TfOptions) -> Result<TfState> {
    let ext = v_ext.sample_positions(grid)?;
    ThomasFermi::new(grid, &ext, v, opts.c_tf)?.minimize(opts)
}
