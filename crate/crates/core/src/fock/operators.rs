use std::io::Write;
use std::sync::Arc;

use nalgebra::DMatrix;

use super::basis::{FockBasis, Statistics};
use crate::error::{shape, Error, Result};
use crate::numerics::linalg::{op_norm, CMat};
use crate::numerics::SparseMatrix;
use crate::C64;

/// Mass on the truncation shell above which a vector is flagged as touching the boundary.
pub const BOUNDARY_FLAG: f64 = 1e-8;

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };

/// Amplitudes over a shared [`FockBasis`].
#[derive(Clone, Debug)]
pub struct FockVector {
    pub basis: Arc<FockBasis>,
    pub amp: Vec<C64>,
}

impl FockVector {
    pub fn new(basis: Arc<FockBasis>, amp: Vec<C64>) -> Result<Self> {
        shape(amp.len() == basis.len(), || "amplitude count differs from basis size".into())?;
        Ok(FockVector { basis, amp })
    }

    pub fn vacuum(basis: &Arc<FockBasis>) -> Result<Self> {
        let zero = vec![0u8; basis.modes()];
        let i = basis
            .find(&zero)
            .ok_or_else(|| Error::Contract("basis does not contain the vacuum".into()))?;
        Ok(Self::basis_state_index(basis, i))
    }

    pub fn basis_state(basis: &Arc<FockBasis>, occ: &[u8]) -> Result<Self> {
        let i = basis
            .find(occ)
            .ok_or_else(|| Error::Contract(format!("occupation {occ:?} not in basis")))?;
        Ok(Self::basis_state_index(basis, i))
    }

    fn basis_state_index(basis: &Arc<FockBasis>, i: usize) -> Self {
        let mut amp = vec![ZERO; basis.len()];
        amp[i] = C64::new(1.0, 0.0);
        FockVector { basis: basis.clone(), amp }
    }

    pub fn norm(&self) -> f64 {
        self.amp.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn inner(&self, other: &FockVector) -> C64 {
        self.amp.iter().zip(&other.amp).map(|(a, b)| a.conj() * b).sum()
    }

    pub fn apply(&self, op: &SparseMatrix) -> FockVector {
        FockVector { basis: self.basis.clone(), amp: op.apply(&self.amp) }
    }

    pub fn expectation(&self, op: &SparseMatrix) -> C64 {
        let v = op.apply(&self.amp);
        self.amp.iter().zip(&v).map(|(a, b)| a.conj() * b).sum()
    }

    /// ⟨N⟩ and ⟨N²⟩.
    pub fn number_moments(&self) -> (f64, f64) {
        let mut m1 = 0.0;
        let mut m2 = 0.0;
        for (i, a) in self.amp.iter().enumerate() {
            let n = self.basis.total(i) as f64;
            m1 += n * a.norm_sqr();
            m2 += n * n * a.norm_sqr();
        }
        (m1, m2)
    }

    /// Probability of finding n particles, n = 0..=N_max.
    pub fn number_distribution(&self) -> Vec<f64> {
        let mut p = vec![0.0; self.basis.max_particles() + 1];
        for (i, a) in self.amp.iter().enumerate() {
            p[self.basis.total(i)] += a.norm_sqr();
        }
        p
    }

    /// Squared amplitude on the truncation shell of a capped bosonic basis.
    pub fn boundary_mass(&self) -> f64 {
        (0..self.amp.len())
            .filter(|&i| self.basis.is_boundary(i))
            .map(|i| self.amp[i].norm_sqr())
            .sum()
    }

    /// True when the truncation shell carries more than [`BOUNDARY_FLAG`]; ladder
    /// relations are then no longer trustworthy for this vector.
    pub fn near_boundary(&self) -> bool {
        self.boundary_mass() > BOUNDARY_FLAG
    }

    /// CSV rows `index,occupation,re,im`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "index,occupation,re,im")?;
        for (i, a) in self.amp.iter().enumerate() {
            writeln!(w, "{i},{},{:.17e},{:.17e}", self.basis.label(i), a.re, a.im)?;
        }
        Ok(())
    }
}

/// One factor of a ladder monomial: (mode, is_creation).
pub type Ladder = (usize, bool);

/// Σ coef · (product of ladder operators, rightmost applied first), compressed to the basis.
pub fn monomial_operator(basis: &FockBasis, terms: &[(C64, Vec<Ladder>)]) -> Result<SparseMatrix> {
    for (_, ops) in terms {
        if ops.iter().any(|&(m, _)| m >= basis.modes()) {
            return Err(Error::Shape(format!("ladder mode beyond {} modes", basis.modes())));
        }
    }
    let mut trip = Vec::new();
    let mut occ = vec![0u8; basis.modes()];
    for col in 0..basis.len() {
        for (coef, ops) in terms {
            if *coef == ZERO {
                continue;
            }
            occ.copy_from_slice(basis.state(col));
            let mut amp = 1.0;
            let mut alive = true;
            for &(m, create) in ops.iter().rev() {
                match basis.ladder(&mut occ, m, create) {
                    Some(x) => amp *= x,
                    None => {
                        alive = false;
                        break;
                    }
                }
            }
            if alive {
                if let Some(row) = basis.find(&occ) {
                    trip.push((row, col, coef * amp));
                }
            }
        }
    }
    Ok(SparseMatrix::from_triplets(basis.len(), basis.len(), trip))
}

fn check_modes(basis: &FockBasis, n: usize) -> Result<()> {
    if n != basis.modes() {
        return Err(Error::Shape(format!("kernel has {n} modes, basis has {}", basis.modes())));
    }
    Ok(())
}

/// a(f) = Σ f̄_j a_j.
pub fn annihilation_operator(basis: &FockBasis, f: &[C64]) -> Result<SparseMatrix> {
    check_modes(basis, f.len())?;
    let terms: Vec<_> = f.iter().enumerate().map(|(j, fj)| (fj.conj(), vec![(j, false)])).collect();
    monomial_operator(basis, &terms)
}

/// a*(f) = Σ f_j a*_j, compressed: creation out of the capped space is dropped.
pub fn creation_operator(basis: &FockBasis, f: &[C64]) -> Result<SparseMatrix> {
    check_modes(basis, f.len())?;
    let terms: Vec<_> = f.iter().enumerate().map(|(j, fj)| (*fj, vec![(j, true)])).collect();
    monomial_operator(basis, &terms)
}

pub fn annihilate(f: &[C64], psi: &FockVector) -> Result<FockVector> {
    Ok(psi.apply(&annihilation_operator(&psi.basis, f)?))
}

pub fn create(f: &[C64], psi: &FockVector) -> Result<FockVector> {
    Ok(psi.apply(&creation_operator(&psi.basis, f)?))
}

/// Number operator (diagonal).
pub fn number_operator(basis: &FockBasis) -> SparseMatrix {
    let trip = (0..basis.len())
        .map(|i| (i, i, C64::new(basis.total(i) as f64, 0.0)))
        .collect();
    SparseMatrix::from_triplets(basis.len(), basis.len(), trip)
}

/// Kernels that can be second quantized.
#[derive(Clone, Debug)]
pub enum LadderKernel {
    /// dΓ(J) = Σ J_ij a*_i a_j.
    OneBody(CMat),
    /// ½ Σ V_xy a*_x a*_y a_y a_x for a multiplication-type pair potential.
    PairPotential(DMatrix<f64>),
    /// ½ Σ W[(i,j),(k,l)] a*_i a*_j a_l a_k with W indexed by i·M + j.
    TwoBody(CMat),
}

pub fn second_quantize(basis: &FockBasis, kernel: &LadderKernel) -> Result<SparseMatrix> {
    let m = basis.modes();
    match kernel {
        LadderKernel::OneBody(j) => {
            check_modes(basis, j.nrows())?;
            shape(j.is_square(), || "one-body kernel must be square".into())?;
            let mut terms = Vec::with_capacity(m * m);
            for a in 0..m {
                for b in 0..m {
                    terms.push((j[(a, b)], vec![(a, true), (b, false)]));
                }
            }
            monomial_operator(basis, &terms)
        }
        LadderKernel::PairPotential(v) => {
            check_modes(basis, v.nrows())?;
            shape(v.is_square(), || "pair kernel must be square".into())?;
            // diagonal: ½ Σ V_xy (n_x n_y - δ_xy n_x)
            let trip = (0..basis.len())
                .map(|i| {
                    let s = basis.state(i);
                    let mut e = 0.0;
                    for x in 0..m {
                        if s[x] == 0 {
                            continue;
                        }
                        let nx = s[x] as f64;
                        for y in 0..m {
                            e += v[(x, y)] * nx * s[y] as f64;
                        }
                        e -= v[(x, x)] * nx;
                    }
                    (i, i, C64::new(0.5 * e, 0.0))
                })
                .collect();
            Ok(SparseMatrix::from_triplets(basis.len(), basis.len(), trip))
        }
        LadderKernel::TwoBody(w) => {
            shape(w.nrows() == m * m && w.ncols() == m * m, || "two-body kernel must be M²×M²".into())?;
            let mut terms = Vec::new();
            for i in 0..m {
                for j in 0..m {
                    for k in 0..m {
                        for l in 0..m {
                            let c = w[(i * m + j, k * m + l)];
                            if c != ZERO {
                                terms.push((c * 0.5, vec![(i, true), (j, true), (l, false), (k, false)]));
                            }
                        }
                    }
                }
            }
            monomial_operator(basis, &terms)
        }
    }
}

/// Σ K_ij a*_i a*_j.
pub fn pair_creation_operator(basis: &FockBasis, k: &CMat) -> Result<SparseMatrix> {
    check_modes(basis, k.nrows())?;
    let m = basis.modes();
    let mut terms = Vec::with_capacity(m * m);
    for i in 0..m {
        for j in 0..m {
            terms.push((k[(i, j)], vec![(i, true), (j, true)]));
        }
    }
    monomial_operator(basis, &terms)
}

/// γ(x;y) = ⟨Ψ, a*_y a_x Ψ⟩.
pub fn reduced_density_1(psi: &FockVector) -> CMat {
    let b = &psi.basis;
    let m = b.modes();
    let mut g = CMat::zeros(m, m);
    let mut occ = vec![0u8; m];
    for (col, c) in psi.amp.iter().enumerate() {
        if *c == ZERO {
            continue;
        }
        for x in 0..m {
            for y in 0..m {
                occ.copy_from_slice(b.state(col));
                let Some(s1) = b.ladder(&mut occ, x, false) else { continue };
                let Some(s2) = b.ladder(&mut occ, y, true) else { continue };
                if let Some(row) = b.find(&occ) {
                    g[(x, y)] += psi.amp[row].conj() * c * (s1 * s2);
                }
            }
        }
    }
    g
}

/// α(x;y) = ⟨Ψ, a_y a_x Ψ⟩.
pub fn pairing_density(psi: &FockVector) -> CMat {
    let b = &psi.basis;
    let m = b.modes();
    let mut a = CMat::zeros(m, m);
    let mut occ = vec![0u8; m];
    for (col, c) in psi.amp.iter().enumerate() {
        if *c == ZERO {
            continue;
        }
        for x in 0..m {
            for y in 0..m {
                occ.copy_from_slice(b.state(col));
                let Some(s1) = b.ladder(&mut occ, x, false) else { continue };
                let Some(s2) = b.ladder(&mut occ, y, false) else { continue };
                if let Some(row) = b.find(&occ) {
                    a[(x, y)] += psi.amp[row].conj() * c * (s1 * s2);
                }
            }
        }
    }
    a
}

fn sub_block(a: &CMat, keep: &[usize]) -> CMat {
    CMat::from_fn(keep.len(), keep.len(), |i, j| a[(keep[i], keep[j])])
}

fn inner_vec(f: &[C64], g: &[C64]) -> C64 {
    f.iter().zip(g).map(|(a, b)| a.conj() * b).sum()
}

/// Operator norm of [a(f), a*(g)] - ⟨f,g⟩ on the states with at most N_max - 2 particles.
pub fn ccr_residual(f: &[C64], g: &[C64], basis: &FockBasis) -> Result<f64> {
    if basis.statistics() != Statistics::Boson || basis.sector().is_some() {
        return Err(Error::Contract("CCR check needs a capped bosonic basis".into()));
    }
    let keep: Vec<usize> = (0..basis.len())
        .filter(|&i| basis.total(i) + 2 <= basis.max_particles())
        .collect();
    let r = commutator_defect(f, g, basis, false)?;
    Ok(op_norm(&sub_block(&r, &keep)))
}

/// [a(f), a*(g)] - ⟨f,g⟩ on the whole truncated space (dense).
pub fn ccr_defect_full(f: &[C64], g: &[C64], basis: &FockBasis) -> Result<CMat> {
    commutator_defect(f, g, basis, false)
}

/// Operator norm of {a(f), a*(g)} - ⟨f,g⟩ on the full fermionic space.
pub fn car_residual(f: &[C64], g: &[C64], basis: &FockBasis) -> Result<f64> {
    if basis.statistics() != Statistics::Fermion || basis.sector().is_some() {
        return Err(Error::Contract("CAR check needs the full fermionic basis".into()));
    }
    Ok(op_norm(&commutator_defect(f, g, basis, true)?))
}

fn commutator_defect(f: &[C64], g: &[C64], basis: &FockBasis, anti: bool) -> Result<CMat> {
    let a = annihilation_operator(basis, f)?.to_dense();
    let ad = creation_operator(basis, g)?.to_dense();
    let sign = if anti { C64::new(1.0, 0.0) } else { C64::new(-1.0, 0.0) };
    let mut r = &a * &ad + &ad * &a * sign;
    let s = inner_vec(f, g);
    for i in 0..r.nrows() {
        r[(i, i)] -= s;
    }
    Ok(r)
}
