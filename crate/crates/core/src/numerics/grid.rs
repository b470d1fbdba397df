use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64 as C64;
use rustfft::{Fft, FftPlanner};
use schemars::JsonSchema;
use serde::{Deserialize, Serialize};

use crate::error::{shape, Error, Result};

/// Periodic uniform grid on `[-L/2, L/2)^d`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct Grid {
    pub dim: usize,
    pub length: f64,
    pub points: usize,
}

impl Grid {
    pub fn new(dim: usize, length: f64, points: usize) -> Result<Self> {
        let g = Grid { dim, length, points };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        if self.dim != 1 && self.dim != 3 {
            return Err(Error::Contract(format!("grid dimension {} not in {{1,3}}", self.dim)));
        }
        if self.points < 4 || !self.points.is_multiple_of(2) {
            return Err(Error::Contract(format!(
                "points per axis must be even and >= 4, got {}",
                self.points
            )));
        }
        if !(self.length > 0.0 && self.length.is_finite()) {
            return Err(Error::Contract(format!("box length {} must be positive", self.length)));
        }
        Ok(())
    }

    pub fn spacing(&self) -> f64 {
        self.length / self.points as f64
    }

    /// Quadrature weight h^d.
    pub fn cell_volume(&self) -> f64 {
        self.spacing().powi(self.dim as i32)
    }

    /// Total number of grid points M^d.
    pub fn len(&self) -> usize {
        self.points.pow(self.dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Axis indices of a flat index (last axis fastest). Unused axes are zero.
    pub fn unflatten(&self, flat: usize) -> [usize; 3] {
        let m = self.points;
        match self.dim {
            1 => [flat, 0, 0],
            _ => [flat / (m * m), (flat / m) % m, flat % m],
        }
    }

    pub fn flatten(&self, idx: [usize; 3]) -> usize {
        let m = self.points;
        match self.dim {
            1 => idx[0] % m,
            _ => ((idx[0] % m) * m + idx[1] % m) * m + idx[2] % m,
        }
    }

    /// Coordinate of axis index `i`: -L/2 + i h.
    pub fn coordinate(&self, i: usize) -> f64 {
        -0.5 * self.length + i as f64 * self.spacing()
    }

    pub fn position(&self, flat: usize) -> [f64; 3] {
        let idx = self.unflatten(flat);
        let mut x = [0.0; 3];
        for a in 0..self.dim {
            x[a] = self.coordinate(idx[a]);
        }
        x
    }

    /// Minimum-image displacement represented by axis index `i` (i h wrapped into [-L/2, L/2)).
    pub fn displacement(&self, i: usize) -> f64 {
        let m = self.points as isize;
        let i = i as isize % m;
        let w = if i < m / 2 { i } else { i - m };
        w as f64 * self.spacing()
    }

    /// Euclidean length of the minimum-image displacement with flat index `flat`.
    pub fn displacement_radius(&self, flat: usize) -> f64 {
        let idx = self.unflatten(flat);
        (0..self.dim)
            .map(|a| self.displacement(idx[a]).powi(2))
            .sum::<f64>()
            .sqrt()
    }

    /// Flat index of the displacement x_i - x_j.
    pub fn difference_index(&self, i: usize, j: usize) -> usize {
        let (a, b) = (self.unflatten(i), self.unflatten(j));
        let m = self.points;
        let mut d = [0usize; 3];
        for ax in 0..self.dim {
            d[ax] = (a[ax] + m - b[ax]) % m;
        }
        self.flatten(d)
    }

    /// Angular wavenumber of axis index `i` in FFT ordering.
    pub fn wavenumber(&self, i: usize) -> f64 {
        let m = self.points as isize;
        let i = i as isize;
        let n = if i < m / 2 { i } else { i - m };
        2.0 * PI * n as f64 / self.length
    }

    pub fn k_squared(&self, flat: usize) -> f64 {
        let idx = self.unflatten(flat);
        (0..self.dim).map(|a| self.wavenumber(idx[a]).powi(2)).sum()
    }

    /// Wavenumber used for first derivatives: the Nyquist mode is dropped so the
    /// derivative stays exactly anti-Hermitian.
    pub fn derivative_wavenumber(&self, i: usize) -> f64 {
        if i == self.points / 2 {
            0.0
        } else {
            self.wavenumber(i)
        }
    }

    pub fn check_len(&self, n: usize, what: &str) -> Result<()> {
        shape(n == self.len(), || {
            format!("{what} has {n} samples, grid has {}", self.len())
        })
    }
}

/// Cached FFT plans for a grid. Transforms act in place on flat fields.
#[derive(Clone)]
pub struct Fourier {
    grid: Grid,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
}

impl Fourier {
    pub fn new(grid: &Grid) -> Self {
        let mut planner = FftPlanner::new();
        Fourier {
            grid: grid.clone(),
            fwd: planner.plan_fft_forward(grid.points),
            inv: planner.plan_fft_inverse(grid.points),
        }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    fn pass(&self, data: &mut [C64], fft: &Arc<dyn Fft<f64>>) {
        let m = self.grid.points;
        if self.grid.dim == 1 {
            fft.process(data);
            return;
        }
        // last axis is contiguous
        fft.process(data);
        let mut line = vec![C64::new(0.0, 0.0); m];
        for stride in [m, m * m] {
            let block = stride * m;
            for base in (0..data.len()).step_by(block) {
                for off in 0..stride {
                    for k in 0..m {
                        line[k] = data[base + off + k * stride];
                    }
                    fft.process(&mut line);
                    for k in 0..m {
                        data[base + off + k * stride] = line[k];
                    }
                }
            }
        }
    }

    /// Unnormalized forward transform.
    pub fn forward(&self, data: &mut [C64]) {
        self.pass(data, &self.fwd);
    }

    /// Inverse transform including the 1/M^d normalization.
    pub fn inverse(&self, data: &mut [C64]) {
        self.pass(data, &self.inv);
        let s = 1.0 / self.grid.len() as f64;
        data.iter_mut().for_each(|z| *z *= s);
    }

    /// Applies a real Fourier multiplier `sym(flat)` to the field.
    pub fn multiply<F: Fn(usize) -> f64>(&self, psi: &[C64], sym: F) -> Vec<C64> {
        let mut buf = psi.to_vec();
        self.forward(&mut buf);
        for (i, z) in buf.iter_mut().enumerate() {
            *z *= sym(i);
        }
        self.inverse(&mut buf);
        buf
    }

    /// -eps^2 Laplacian.
    pub fn laplacian(&self, psi: &[C64], eps: f64) -> Vec<C64> {
        let e2 = eps * eps;
        self.multiply(psi, |i| e2 * self.grid.k_squared(i))
    }

    /// Spectral partial derivative along `axis`.
    pub fn derivative(&self, psi: &[C64], axis: usize) -> Vec<C64> {
        let mut buf = psi.to_vec();
        self.forward(&mut buf);
        for (i, z) in buf.iter_mut().enumerate() {
            let k = self.grid.derivative_wavenumber(self.grid.unflatten(i)[axis]);
            *z *= C64::new(0.0, k);
        }
        self.inverse(&mut buf);
        buf
    }

    /// Periodic convolution h^d sum_j V(x_i - x_j) rho(x_j), V sampled on displacements.
    pub fn convolve(&self, v_disp: &[f64], rho: &[f64]) -> Vec<f64> {
        let mut a: Vec<C64> = v_disp.iter().map(|&x| C64::new(x, 0.0)).collect();
        let mut b: Vec<C64> = rho.iter().map(|&x| C64::new(x, 0.0)).collect();
        self.forward(&mut a);
        self.forward(&mut b);
        let w = self.grid.cell_volume();
        for (x, y) in a.iter_mut().zip(&b) {
            *x *= y * w;
        }
        self.inverse(&mut a);
        a.iter().map(|z| z.re).collect()
    }
}

/// Returns -eps^2 Δψ computed spectrally.
pub fn laplacian_apply(grid: &Grid, psi: &[C64], eps: f64) -> Result<Vec<C64>> {
    grid.check_len(psi.len(), "field")?;
    if !(eps > 0.0) {
        return Err(Error::Contract(format!("eps must be positive, got {eps}")));
    }
    Ok(Fourier::new(grid).laplacian(psi, eps))
}

/// Periodic convolution of a displacement-sampled potential with a real density.
pub fn convolve(grid: &Grid, v_disp: &[f64], rho: &[f64]) -> Result<Vec<f64>> {
    grid.check_len(v_disp.len(), "potential")?;
    grid.check_len(rho.len(), "density")?;
    Ok(Fourier::new(grid).convolve(v_disp, rho))
}

/// L² norm with quadrature weight h^d.
pub fn l2_norm(grid: &Grid, psi: &[C64]) -> f64 {
    (psi.iter().map(|z| z.norm_sqr()).sum::<f64>() * grid.cell_volume()).sqrt()
}

/// ⟨a, b⟩ with quadrature weight, antilinear in `a`.
pub fn inner(grid: &Grid, a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum::<C64>() * grid.cell_volume()
}

/// Mode coefficients c = h^{d/2} ψ of a grid field (orthonormal point basis).
pub fn to_modes(grid: &Grid, psi: &[C64]) -> Vec<C64> {
    let s = grid.cell_volume().sqrt();
    psi.iter().map(|z| z * s).collect()
}

pub fn from_modes(grid: &Grid, c: &[C64]) -> Vec<C64> {
    let s = 1.0 / grid.cell_volume().sqrt();
    c.iter().map(|z| z * s).collect()
}
