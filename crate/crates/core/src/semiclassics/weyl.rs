use std::f64::consts::PI;

use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::numerics::linalg::{check_hermitian, CMat};
use crate::numerics::Grid;
use crate::C64;

/// Relative size of M on the outermost velocity columns above which quantization is refused.
pub const ALIAS_TOL: f64 = 1e-8;

/// Samples M(X_c, v_k) on the phase-space lattice dual to a 1D position grid.
///
/// Centers X_c = -L/2 + c h/2 (c < 2M) are the midpoints of grid-point pairs; velocities
/// v_k = (k - M/4) Δv (k < M/2) with Δv = 2πε/L. Each center carries the M/2 differences
/// of matching parity, so the lattice has M² samples; the Weyl map is a bijection up to the
/// separation-L/2 entries, whose two antipodal midpoints are averaged.
#[derive(Clone, Debug, Serialize)]
pub struct PhaseSpaceDensity {
    pub grid: Grid,
    pub eps: f64,
    /// Rows are centers, columns velocities.
    #[serde(skip)]
    pub samples: DMatrix<f64>,
}

fn check_lattice(grid: &Grid, eps: f64) -> Result<()> {
    if grid.dim != 1 {
        return Err(Error::Contract("phase-space densities are implemented on 1D grids".into()));
    }
    if !grid.points.is_multiple_of(4) {
        return Err(Error::Contract(format!("{} grid points are not a multiple of 4", grid.points)));
    }
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(Error::Contract(format!("eps must be positive, got {eps}")));
    }
    Ok(())
}

/// Periodic linear interpolation of grid samples at half-grid center c.
fn at_center(values: &[f64], c: usize) -> f64 {
    let m = values.len();
    if c.is_multiple_of(2) {
        values[(c / 2) % m]
    } else {
        0.5 * (values[(c / 2) % m] + values[(c / 2 + 1) % m])
    }
}

/// Largest c with f(c) <= target for a nondecreasing f, found by bisection on [0, ∞).
fn solve_increasing<F: Fn(f64) -> f64>(f: F, target: f64, what: &str) -> Result<f64> {
    if f(0.0) > target {
        return Err(Error::Contract(format!("{what}: target {target} below the value at c = 0")));
    }
    let mut hi = 1.0;
    while f(hi) < target {
        hi *= 2.0;
        if hi > 1e12 {
            return Err(Error::Resolution(format!("{what}: target {target} not reachable on this velocity window")));
        }
    }
    let mut lo = 0.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

impl PhaseSpaceDensity {
    pub fn from_fn<F: Fn(f64, f64) -> f64>(grid: &Grid, eps: f64, f: F) -> Result<Self> {
        check_lattice(grid, eps)?;
        let m = grid.points;
        let dummy = PhaseSpaceDensity { grid: grid.clone(), eps, samples: DMatrix::zeros(0, 0) };
        let (xs, vs) = (dummy.centers(), dummy.velocities());
        let samples = DMatrix::from_fn(2 * m, m / 2, |c, k| f(xs[c], vs[k]));
        Ok(PhaseSpaceDensity { samples, ..dummy })
    }

    pub fn centers(&self) -> Vec<f64> {
        let h = self.grid.spacing();
        (0..2 * self.grid.points).map(|c| -0.5 * self.grid.length + 0.5 * c as f64 * h).collect()
    }

    pub fn velocity_spacing(&self) -> f64 {
        2.0 * PI * self.eps / self.grid.length
    }

    pub fn velocities(&self) -> Vec<f64> {
        let m = self.grid.points;
        let dv = self.velocity_spacing();
        (0..m / 2).map(|k| (k as f64 - (m / 4) as f64) * dv).collect()
    }

    /// Largest resolvable speed πε/(2h).
    pub fn velocity_cutoff(&self) -> f64 {
        0.25 * self.grid.points as f64 * self.velocity_spacing()
    }

    /// ∫M dx dv over the full lattice.
    pub fn integral(&self) -> f64 {
        self.samples.sum() * 0.5 * self.grid.spacing() * self.velocity_spacing()
    }

    /// Tr of the Weyl quantization: (2πε)⁻¹ times the quadrature of M over grid-point centers.
    pub fn trace(&self) -> f64 {
        let dv = self.velocity_spacing();
        let h = self.grid.spacing();
        let s: f64 = (0..self.grid.points).map(|i| self.samples.row(2 * i).sum()).sum();
        s * h * dv / (2.0 * PI * self.eps)
    }

    /// χ(|v| ≤ c ρ(x)^{1/d}) with the edge ramped linearly over one velocity cell and c
    /// fixed so the quantized trace equals `n`. Returns the density and c.
    pub fn local_fermi_ball(grid: &Grid, eps: f64, density: &[f64], n: f64) -> Result<(Self, f64)> {
        grid.check_len(density.len(), "density")?;
        let base = PhaseSpaceDensity::from_fn(grid, eps, |_, _| 0.0)?;
        let dv = base.velocity_spacing();
        let vs = base.velocities();
        let rho_c: Vec<f64> = (0..2 * grid.points).map(|c| at_center(density, c).max(0.0)).collect();
        let build = |c: f64| {
            DMatrix::from_fn(2 * grid.points, grid.points / 2, |ci, k| {
                let vf = c * rho_c[ci].powf(1.0 / grid.dim as f64);
                ((vf - vs[k].abs()) / dv + 0.5).clamp(0.0, 1.0)
            })
        };
        let trace_at = |c: f64| PhaseSpaceDensity { samples: build(c), ..base.clone() }.trace();
        let c = solve_increasing(trace_at, n, "local Fermi ball")?;
        Ok((PhaseSpaceDensity { samples: build(c), ..base }, c))
    }

    /// g_{T,μ}(v² - c ρ(x)^{2/d}) with g the Fermi-Dirac function and c fixed so the
    /// quantized trace equals `n`. Returns the density and c.
    pub fn fermi_dirac(grid: &Grid, eps: f64, density: &[f64], temperature: f64, mu: f64, n: f64) -> Result<(Self, f64)> {
        grid.check_len(density.len(), "density")?;
        if !(temperature > 0.0) || mu < 0.0 {
            return Err(Error::Contract("Fermi-Dirac state needs T > 0 and μ ≥ 0".into()));
        }
        let base = PhaseSpaceDensity::from_fn(grid, eps, |_, _| 0.0)?;
        let vs = base.velocities();
        let rho_c: Vec<f64> = (0..2 * grid.points).map(|c| at_center(density, c).max(0.0)).collect();
        let build = |c: f64| {
            DMatrix::from_fn(2 * grid.points, grid.points / 2, |ci, k| {
                let e = vs[k] * vs[k] - c * rho_c[ci].powf(2.0 / grid.dim as f64);
                1.0 / (1.0 + ((e - mu) / temperature).exp())
            })
        };
        let trace_at = |c: f64| PhaseSpaceDensity { samples: build(c), ..base.clone() }.trace();
        let c = solve_increasing(trace_at, n, "Fermi-Dirac state")?;
        Ok((PhaseSpaceDensity { samples: build(c), ..base }, c))
    }

    fn check_aliasing(&self) -> Result<()> {
        let peak = self.samples.iter().fold(0.0f64, |a, x| a.max(x.abs()));
        let last = self.samples.ncols() - 1;
        let edge = self.samples.column(0).iter().chain(self.samples.column(last).iter()).fold(0.0f64, |a, x| a.max(x.abs()));
        if edge > ALIAS_TOL * peak {
            return Err(Error::Resolution(format!(
                "M reaches {:.3e} of its peak at the velocity cutoff {:.4}; refine the grid below h = πε/(2 v_max)",
                edge / peak,
                self.velocity_cutoff()
            )));
        }
        Ok(())
    }
}

/// Center and difference indices of the pair (i, j): d is the minimum image of i - j.
fn pair_lattice(m: usize, i: usize, j: usize) -> (usize, isize) {
    let mi = m as isize;
    let mut d = (i as isize - j as isize).rem_euclid(mi);
    if d >= mi / 2 {
        d -= mi;
    }
    let c = (2 * j as isize + d).rem_euclid(2 * mi) as usize;
    (c, d)
}

/// e^{2πi (k - M/4) d / M} for d in [-M/2, M/2), indexed [d + M/2][k].
fn phase_table(m: usize) -> Vec<Vec<C64>> {
    (0..m)
        .map(|dd| {
            let d = dd as f64 - (m / 2) as f64;
            (0..m / 2)
                .map(|k| C64::from_polar(1.0, 2.0 * PI * (k as f64 - (m / 4) as f64) * d / m as f64))
                .collect()
        })
        .collect()
}

/// Discrete Weyl quantization, returned as an operator matrix in the orthonormal point
/// basis: ω_ij = h ω(x_i; x_j) with ω(x;y) = (2πε)⁻¹ Σ_k Δv M((x+y)/2, v_k) e^{i v_k (x-y)/ε}.
pub fn weyl_quantize(m: &PhaseSpaceDensity) -> Result<CMat> {
    check_lattice(&m.grid, m.eps)?;
    let n = m.grid.points;
    if m.samples.nrows() != 2 * n || m.samples.ncols() != n / 2 {
        return Err(Error::Shape(format!("phase-space samples must be {}x{}", 2 * n, n / 2)));
    }
    m.check_aliasing()?;
    let phases = phase_table(n);
    let scale = 1.0 / n as f64;
    Ok(CMat::from_fn(n, n, |i, j| {
        let (c, d) = pair_lattice(n, i, j);
        let row = &phases[(d + (n / 2) as isize) as usize];
        let f = |c: usize| -> C64 { row.iter().enumerate().map(|(k, p)| p * m.samples[(c, k)]).sum() };
        if d == -((n / 2) as isize) {
            // separation L/2 has two antipodal midpoints; averaging keeps ω Hermitian
            (f(c) + f((c + n) % (2 * n))) * (0.5 * scale)
        } else {
            f(c) * scale
        }
    }))
}

/// Inverse of [`weyl_quantize`] on Hermitian matrices. Exact except for the separation-L/2
/// entries, where both antipodal centers receive the averaged kernel value.
pub fn wigner_transform(omega: &CMat, grid: &Grid, eps: f64) -> Result<PhaseSpaceDensity> {
    check_lattice(grid, eps)?;
    let n = grid.points;
    if omega.nrows() != n || omega.ncols() != n {
        return Err(Error::Shape(format!("density matrix must be {n}x{n}")));
    }
    check_hermitian(omega, 1e-10)?;
    let phases = phase_table(n);
    let mut samples = DMatrix::zeros(2 * n, n / 2);
    for i in 0..n {
        for j in 0..n {
            let (c, d) = pair_lattice(n, i, j);
            let row = &phases[(d + (n / 2) as isize) as usize];
            let w = omega[(i, j)];
            for (k, p) in row.iter().enumerate() {
                samples[(c, k)] += 2.0 * (w * p.conj()).re;
            }
        }
    }
    Ok(PhaseSpaceDensity { grid: grid.clone(), eps, samples })
}
