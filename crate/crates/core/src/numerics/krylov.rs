use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64 as C64;

use super::linalg::{dot, norm};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug)]
pub struct KrylovOptions {
    /// Maximal Krylov subspace dimension.
    pub dim: usize,
    /// Accepted a-posteriori error estimate per step, relative to the vector norm.
    pub tol: f64,
}

impl Default for KrylovOptions {
    fn default() -> Self {
        KrylovOptions { dim: 20, tol: 1e-12 }
    }
}

/// Step bookkeeping; `refinements` counts steps that had to be split.
#[derive(Clone, Copy, Debug, Default)]
pub struct KrylovStats {
    pub steps: usize,
    pub refinements: usize,
    pub matvecs: usize,
}

/// exp(-i H tau) v for a Hermitian operator given by `apply(x, out)`.
///
/// Lanczos with full reorthogonalization; the step is halved recursively while the
/// residual estimate exceeds `opts.tol`.
pub fn expm_krylov<F>(apply: &F, v: &[C64], tau: f64, opts: KrylovOptions, stats: &mut KrylovStats) -> Result<Vec<C64>>
where
    F: Fn(&[C64], &mut [C64]),
{
    let beta0 = norm(v);
    if beta0 == 0.0 || tau == 0.0 {
        return Ok(v.to_vec());
    }
    let n = v.len();
    let m_max = opts.dim.max(2).min(n);
    let mut basis: Vec<Vec<C64>> = vec![v.iter().map(|z| z / beta0).collect()];
    let mut alpha = Vec::with_capacity(m_max);
    let mut beta: Vec<f64> = Vec::with_capacity(m_max);
    let mut w = vec![C64::new(0.0, 0.0); n];
    let mut breakdown = false;
    for j in 0..m_max {
        apply(&basis[j], &mut w);
        stats.matvecs += 1;
        let a = dot(&basis[j], &w).re;
        alpha.push(a);
        for q in basis.iter() {
            let p = dot(q, &w);
            w.iter_mut().zip(q).for_each(|(x, y)| *x -= p * y);
        }
        // second pass keeps the basis orthonormal to rounding
        for q in basis.iter() {
            let p = dot(q, &w);
            w.iter_mut().zip(q).for_each(|(x, y)| *x -= p * y);
        }
        let b = norm(&w);
        beta.push(b);
        if b < 1e-13 * (1.0 + a.abs()) {
            breakdown = true;
            break;
        }
        if j + 1 < m_max {
            basis.push(w.iter().map(|z| z / b).collect());
        }
    }
    let m = alpha.len();
    let t = DMatrix::<f64>::from_fn(m, m, |i, j| {
        if i == j {
            alpha[i]
        } else if i + 1 == j {
            beta[i]
        } else if j + 1 == i {
            beta[j]
        } else {
            0.0
        }
    });
    let se = SymmetricEigen::new(t);
    // y = exp(-i T tau) e_1
    let y: Vec<C64> = (0..m)
        .map(|i| {
            (0..m)
                .map(|k| {
                    se.eigenvectors[(i, k)]
                        * se.eigenvectors[(0, k)]
                        * C64::from_polar(1.0, -se.eigenvalues[k] * tau)
                })
                .sum()
        })
        .collect();
    let err = if breakdown { 0.0 } else { beta[m - 1] * y[m - 1].norm() };
    if err > opts.tol {
        if tau.abs() < 1e-14 {
            return Err(Error::Numerical("Krylov step underflow".into()));
        }
        stats.refinements += 1;
        let half = expm_krylov(apply, v, 0.5 * tau, opts, stats)?;
        return expm_krylov(apply, &half, 0.5 * tau, opts, stats);
    }
    stats.steps += 1;
    let mut out = vec![C64::new(0.0, 0.0); n];
    for (q, yk) in basis.iter().zip(&y) {
        out.iter_mut().zip(q).for_each(|(o, x)| *o += x * yk * beta0);
    }
    Ok(out)
}
