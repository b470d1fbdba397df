use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

use super::grid::{Fourier, Grid};
use super::linalg::{check_hermitian, CMat};
use super::potential::PotentialSpec;
use crate::error::{Error, Result};

/// Finite one-particle model: H = Σ h_xy a*_x a_y + ½ Σ V_xy a*_x a*_y a_y a_x.
///
/// Grid models use the point basis δ_x / h^{d/2}, so h is the spectral kinetic
/// matrix plus the diagonal external potential and V_xy = V(x - y).
#[derive(Clone, Debug)]
pub struct ModeModel {
    pub one_body: CMat,
    pub pair: DMatrix<f64>,
}

impl ModeModel {
    pub fn new(one_body: CMat, pair: DMatrix<f64>) -> Result<Self> {
        let m = one_body.nrows();
        if pair.nrows() != m || pair.ncols() != m {
            return Err(Error::Shape(format!(
                "pair matrix {}x{} does not match {m} modes",
                pair.nrows(),
                pair.ncols()
            )));
        }
        check_hermitian(&one_body, 1e-12)?;
        if (0..m).any(|i| (0..m).any(|j| (pair[(i, j)] - pair[(j, i)]).abs() > 1e-12)) {
            return Err(Error::Contract("pair interaction must be symmetric".into()));
        }
        Ok(ModeModel { one_body, pair })
    }

    pub fn modes(&self) -> usize {
        self.one_body.nrows()
    }

    /// Grid model with kinetic scale `eps`, external potential and pair potential.
    pub fn from_grid(grid: &Grid, eps: f64, v_ext: &PotentialSpec, v: &PotentialSpec) -> Result<Self> {
        let n = grid.len();
        if n > 4096 {
            return Err(Error::CostGuard(format!("{n} grid points exceed the dense mode-model limit 4096")));
        }
        let mut h = kinetic_matrix(grid, eps);
        let ext = v_ext.sample_positions(grid)?;
        for i in 0..n {
            h[(i, i)] += C64::new(ext[i], 0.0);
        }
        let disp = v.sample_displacements(grid)?;
        let pair = DMatrix::from_fn(n, n, |i, j| disp[grid.difference_index(i, j)]);
        Self::new(h, pair)
    }

    /// Same model with the pair interaction multiplied by `lambda`.
    pub fn with_pair_scale(&self, lambda: f64) -> Self {
        ModeModel { one_body: self.one_body.clone(), pair: &self.pair * lambda }
    }

    /// Hartree mean-field operator h + diag(V |c|²).
    pub fn hartree_operator(&self, c: &[C64]) -> CMat {
        let mut h = self.one_body.clone();
        let pot = self.direct_potential(c);
        for i in 0..self.modes() {
            h[(i, i)] += C64::new(pot[i], 0.0);
        }
        h
    }

    /// (V * |c|²)_x = Σ_y V_xy |c_y|².
    pub fn direct_potential(&self, c: &[C64]) -> Vec<f64> {
        let m = self.modes();
        (0..m)
            .map(|x| (0..m).map(|y| self.pair[(x, y)] * c[y].norm_sqr()).sum())
            .collect()
    }

    /// Hartree vector field (h + V*|c|²) c.
    pub fn hartree_rhs(&self, c: &[C64]) -> Vec<C64> {
        let pot = self.direct_potential(c);
        let m = self.modes();
        (0..m)
            .map(|x| (0..m).map(|y| self.one_body[(x, y)] * c[y]).sum::<C64>() + c[x] * pot[x])
            .collect()
    }

    /// Hartree energy ⟨c, h c⟩ + ½ Σ V_xy |c_x|²|c_y|².
    pub fn hartree_energy(&self, c: &[C64]) -> f64 {
        let m = self.modes();
        let mut e = C64::new(0.0, 0.0);
        for x in 0..m {
            for y in 0..m {
                e += c[x].conj() * self.one_body[(x, y)] * c[y];
            }
        }
        let pot = self.direct_potential(c);
        e.re + 0.5 * (0..m).map(|x| pot[x] * c[x].norm_sqr()).sum::<f64>()
    }
}

/// Dense matrix of -eps² Δ in the point basis.
pub fn kinetic_matrix(grid: &Grid, eps: f64) -> CMat {
    let n = grid.len();
    let f = Fourier::new(grid);
    let mut t = CMat::zeros(n, n);
    let mut e = vec![C64::new(0.0, 0.0); n];
    for j in 0..n {
        e[j] = C64::new(1.0, 0.0);
        let col = f.laplacian(&e, eps);
        e[j] = C64::new(0.0, 0.0);
        for i in 0..n {
            t[(i, j)] = col[i];
        }
    }
    super::linalg::symmetrize(&t)
}

/// Dense matrix of the spectral derivative along `axis` (anti-Hermitian).
pub fn derivative_matrix(grid: &Grid, axis: usize) -> CMat {
    let n = grid.len();
    let f = Fourier::new(grid);
    let mut d = CMat::zeros(n, n);
    let mut e = vec![C64::new(0.0, 0.0); n];
    for j in 0..n {
        e[j] = C64::new(1.0, 0.0);
        let col = f.derivative(&e, axis);
        e[j] = C64::new(0.0, 0.0);
        for i in 0..n {
            d[(i, j)] = col[i];
        }
    }
    (&d - d.adjoint()) * C64::new(0.5, 0.0)
}
