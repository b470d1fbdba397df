use std::collections::HashMap;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::fock::{FockBasis, FockVector, Statistics};
use crate::manybody::ManyBodyState;
use crate::numerics::linalg::{dot, norm, CMat};
use crate::numerics::Grid;
use crate::C64;

/// Largest N-particle sector the dense second-quantized basis change may touch.
pub const EXCITATION_GUARD: usize = 2000;

/// U_φ: ψ_N = Σ_n ψ^(n) ⊗_s φ^{⊗(N-n)} ↦ (ψ^(0), …, ψ^(N)) with ψ^(n) ⊥ φ.
///
/// Built from an orthonormal completion B of φ (first column c) and the matrix of
/// Γ(B) on the N-particle sector. The image lives on the capped Fock space over the
/// M-1 modes B e₁, …, B e_{M-1}.
#[derive(Clone, Debug)]
pub struct ExcitationMap {
    pub grid: Grid,
    pub particles: usize,
    /// Orthonormal modes; column 0 is the condensate.
    pub modes: CMat,
    sector: Arc<FockBasis>,
    image: Arc<FockBasis>,
    /// Columns Γ(B)|m⟩ for every sector state m, in the grid occupation basis.
    transform: CMat,
    /// Sector index of each image basis state.
    slot: Vec<usize>,
}

/// Completes a unit vector to a unitary by Gram-Schmidt against the unit vectors.
fn complete_basis(c: &[C64]) -> CMat {
    let m = c.len();
    let mut cols: Vec<Vec<C64>> = vec![c.to_vec()];
    for e in 0..m {
        if cols.len() == m {
            break;
        }
        let mut v = vec![C64::new(0.0, 0.0); m];
        v[e] = C64::new(1.0, 0.0);
        // two passes keep the completion orthonormal to rounding
        for _ in 0..2 {
            for q in &cols {
                let p = dot(q, &v);
                for (vi, qi) in v.iter_mut().zip(q) {
                    *vi -= p * qi;
                }
            }
        }
        let n = norm(&v);
        if n > 1e-6 {
            cols.push(v.iter().map(|z| z / n).collect());
        }
    }
    CMat::from_fn(m, m, |i, j| cols[j][i])
}

/// Γ(B)|m⟩ = Π_j (a*(B e_j))^{m_j} / √m_j! Ω, expanded into grid occupations.
fn second_quantized_column(b: &CMat, occ: &[u8]) -> HashMap<Vec<u8>, C64> {
    let m = b.nrows();
    // monomials Π a*_x^{k_x} with unnormalized coefficients
    let mut poly: HashMap<Vec<u8>, C64> = HashMap::from([(vec![0u8; m], C64::new(1.0, 0.0))]);
    let mut norm_factor = 1.0;
    for (j, &k) in occ.iter().enumerate() {
        for q in 1..=k {
            norm_factor /= (q as f64).sqrt();
            let mut next: HashMap<Vec<u8>, C64> = HashMap::with_capacity(poly.len() * m);
            for (mono, coef) in &poly {
                for x in 0..m {
                    let bx = b[(x, j)];
                    if bx == C64::new(0.0, 0.0) {
                        continue;
                    }
                    let mut key = mono.clone();
                    key[x] += 1;
                    *next.entry(key).or_insert(C64::new(0.0, 0.0)) += coef * bx;
                }
            }
            poly = next;
        }
    }
    poly.into_iter()
        .map(|(mono, coef)| {
            let fact: f64 = mono.iter().map(|&k| (1..=k as usize).map(|q| q as f64).product::<f64>()).product();
            (mono, coef * fact.sqrt() * norm_factor)
        })
        .collect()
}

impl ExcitationMap {
    /// `c` holds orthonormal-basis coefficients of φ on the grid points.
    pub fn new(grid: &Grid, c: &[C64], n: usize) -> Result<Self> {
        grid.check_len(c.len(), "condensate")?;
        let nc = norm(c);
        if (nc - 1.0).abs() > 1e-10 {
            return Err(Error::Contract(format!("condensate norm {nc} is not 1")));
        }
        let m = grid.len();
        let sector = Arc::new(FockBasis::bosons_sector(m, n)?);
        if sector.len() > EXCITATION_GUARD {
            return Err(Error::CostGuard(format!(
                "{}-dimensional sector exceeds the excitation-map limit {EXCITATION_GUARD}",
                sector.len()
            )));
        }
        let image = Arc::new(FockBasis::bosons(m - 1, n)?);
        let b = complete_basis(c);
        let mut transform = CMat::zeros(sector.len(), sector.len());
        for (col, occ) in sector.states().iter().enumerate() {
            for (mono, z) in second_quantized_column(&b, occ) {
                let row = sector.find(&mono).expect("monomial of degree N lies in the sector");
                transform[(row, col)] += z;
            }
        }
        let slot = image
            .states()
            .iter()
            .map(|rest| {
                let mut occ = Vec::with_capacity(m);
                occ.push((n - rest.iter().map(|&k| k as usize).sum::<usize>()) as u8);
                occ.extend_from_slice(rest);
                sector.find(&occ).expect("excitation occupation completes to the sector")
            })
            .collect();
        Ok(ExcitationMap { grid: grid.clone(), particles: n, modes: b, sector, image, transform, slot })
    }

    pub fn image_basis(&self) -> &Arc<FockBasis> {
        &self.image
    }

    pub fn apply(&self, state: &ManyBodyState) -> Result<FockVector> {
        if state.statistics() != Statistics::Boson {
            return Err(Error::Contract("the excitation map acts on bosonic states".into()));
        }
        if state.fock.basis.states() != self.sector.states() || state.grid != self.grid {
            return Err(Error::Shape("state does not live on this map's grid and particle number".into()));
        }
        let v = nalgebra::DVector::from_column_slice(&state.fock.amp);
        let w = self.transform.ad_mul(&v);
        FockVector::new(self.image.clone(), self.slot.iter().map(|&s| w[s]).collect())
    }

    pub fn inverse(&self, xi: &FockVector) -> Result<ManyBodyState> {
        if xi.basis.states() != self.image.states() {
            return Err(Error::Shape("vector does not live on the excitation space".into()));
        }
        let mut w = nalgebra::DVector::from_element(self.sector.len(), C64::new(0.0, 0.0));
        for (&s, &z) in self.slot.iter().zip(&xi.amp) {
            w[s] = z;
        }
        let v = &self.transform * w;
        Ok(ManyBodyState { grid: self.grid.clone(), fock: FockVector::new(self.sector.clone(), v.as_slice().to_vec())? })
    }

    /// ‖ψ^(n)‖² for n = 0..=N.
    pub fn sector_weights(&self, xi: &FockVector) -> Vec<f64> {
        let mut w = vec![0.0; self.particles + 1];
        for (i, z) in xi.amp.iter().enumerate() {
            w[xi.basis.total(i)] += z.norm_sqr();
        }
        w
    }
}
