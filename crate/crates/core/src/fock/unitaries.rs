use std::sync::Arc;

use super::basis::{FockBasis, Statistics};
use super::operators::{annihilation_operator, creation_operator, pair_creation_operator, FockVector};
use crate::error::{Error, Result};
use crate::numerics::linalg::CMat;
use crate::numerics::SparseMatrix;
use crate::C64;

/// Default bound on the truncation-shell mass after a displacement or squeeze.
pub const LEAKAGE_TOL: f64 = 1e-8;

/// Upper bound on ‖G‖ per Taylor step.
const STEP_NORM: f64 = 0.5;

fn row_sum_norm(g: &SparseMatrix) -> f64 {
    let mut rows = vec![0.0; g.rows()];
    for (i, _, z) in g.triplets() {
        rows[i] += z.norm();
    }
    rows.into_iter().fold(0.0, f64::max)
}

/// exp(t G) v for anti-Hermitian G by Taylor steps with ‖tG‖/steps ≤ 0.5; the norm is
/// restored after every step.
pub fn exp_anti_hermitian(g: &SparseMatrix, v: &[C64], t: f64) -> Vec<C64> {
    let norm0 = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let scale = row_sum_norm(g) * t.abs();
    if scale == 0.0 || norm0 == 0.0 {
        return v.to_vec();
    }
    let steps = (scale / STEP_NORM).ceil().max(1.0) as usize;
    let tau = C64::new(t / steps as f64, 0.0);
    let mut x = v.to_vec();
    let mut term = vec![C64::new(0.0, 0.0); v.len()];
    for _ in 0..steps {
        let mut sum = x.clone();
        term.copy_from_slice(&x);
        for k in 1..60 {
            let mut next = g.apply(&term);
            let f = tau / k as f64;
            next.iter_mut().for_each(|z| *z *= f);
            term = next;
            let tn = term.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            sum.iter_mut().zip(&term).for_each(|(s, t)| *s += t);
            if tn < 1e-17 * norm0 {
                break;
            }
        }
        let n = sum.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        sum.iter_mut().for_each(|z| *z *= norm0 / n);
        x = sum;
    }
    x
}

fn require_capped_bosons(basis: &FockBasis) -> Result<()> {
    if basis.statistics() != Statistics::Boson || basis.sector().is_some() {
        return Err(Error::Contract(
            "number-changing unitaries need a capped bosonic basis".into(),
        ));
    }
    Ok(())
}

fn check_leakage(v: FockVector, threshold: f64) -> Result<FockVector> {
    let leakage = v.boundary_mass();
    if leakage > threshold {
        return Err(Error::Truncation { leakage, threshold });
    }
    Ok(v)
}

/// Anti-Hermitian generator a*(f) - a(f) of the Weyl operator.
pub fn weyl_generator(basis: &FockBasis, f: &[C64]) -> Result<SparseMatrix> {
    let ad = creation_operator(basis, f)?;
    let a = annihilation_operator(basis, f)?;
    Ok(SparseMatrix::combine(&[(&ad, C64::new(1.0, 0.0)), (&a, C64::new(-1.0, 0.0))]))
}

/// W(f)Ψ = exp(a*(f) - a(f))Ψ, refused when the truncation shell carries more than `threshold`.
pub fn weyl_apply_with(f: &[C64], psi: &FockVector, threshold: f64) -> Result<FockVector> {
    require_capped_bosons(&psi.basis)?;
    let g = weyl_generator(&psi.basis, f)?;
    let amp = exp_anti_hermitian(&g, &psi.amp, 1.0);
    check_leakage(FockVector { basis: psi.basis.clone(), amp }, threshold)
}

pub fn weyl_apply(f: &[C64], psi: &FockVector) -> Result<FockVector> {
    weyl_apply_with(f, psi, LEAKAGE_TOL)
}

/// W(f)Ω.
pub fn coherent_state(basis: &Arc<FockBasis>, f: &[C64]) -> Result<FockVector> {
    weyl_apply(f, &FockVector::vacuum(basis)?)
}

fn check_symmetric(k: &CMat) -> Result<()> {
    let scale = k.iter().map(|z| z.norm()).fold(1.0, f64::max);
    if !k.is_square() || (k - k.transpose()).norm() > 1e-12 * scale {
        return Err(Error::Contract("pair kernel must be square and symmetric".into()));
    }
    Ok(())
}

/// ½ Σ (k_ij a*_i a*_j - k̄_ij a_i a_j).
pub fn bogoliubov_generator(basis: &FockBasis, k: &CMat) -> Result<SparseMatrix> {
    check_symmetric(k)?;
    let create = pair_creation_operator(basis, k)?;
    let annihilate = create.adjoint();
    Ok(SparseMatrix::combine(&[(&create, C64::new(0.5, 0.0)), (&annihilate, C64::new(-0.5, 0.0))]))
}

/// T Ψ with T = exp(½ Σ (k a*a* - k̄ aa)).
pub fn bogoliubov_apply_with(k: &CMat, psi: &FockVector, threshold: f64) -> Result<FockVector> {
    require_capped_bosons(&psi.basis)?;
    let g = bogoliubov_generator(&psi.basis, k)?;
    let amp = exp_anti_hermitian(&g, &psi.amp, 1.0);
    check_leakage(FockVector { basis: psi.basis.clone(), amp }, threshold)
}

pub fn bogoliubov_apply(k: &CMat, psi: &FockVector) -> Result<FockVector> {
    bogoliubov_apply_with(k, psi, LEAKAGE_TOL)
}

/// (cosh_k, sinh_k) from k = U Σ V*: cosh_k = U cosh Σ U*, sinh_k = U sinh Σ V*.
///
/// With these, T* a(f) T = a(cosh_k f) + a*(sinh_k f̄).
pub fn cosh_sinh(k: &CMat) -> (CMat, CMat) {
    let svd = k.clone().svd(true, true);
    let u = svd.u.expect("U requested");
    let vt = svd.v_t.expect("V* requested");
    let n = svd.singular_values.len();
    let ch = CMat::from_diagonal(&nalgebra::DVector::from_fn(n, |i, _| C64::new(svd.singular_values[i].cosh(), 0.0)));
    let sh = CMat::from_diagonal(&nalgebra::DVector::from_fn(n, |i, _| C64::new(svd.singular_values[i].sinh(), 0.0)));
    (&u * ch * u.adjoint(), &u * sh * vt)
}

fn check_orthonormal(orbitals: &CMat) -> Result<()> {
    let gram = orbitals.adjoint() * orbitals;
    let defect = (gram - CMat::identity(orbitals.ncols(), orbitals.ncols())).norm();
    if defect > 1e-10 {
        return Err(Error::Contract(format!("orbitals are not orthonormal (defect {defect:.2e})")));
    }
    Ok(())
}

/// Dense matrix of the particle-hole transformation for orbitals f₁..f_N (columns).
///
/// R Ω = a*(f₁)…a*(f_N) Ω and R a*(g) R* = a*((1-ω)g) + Σ_{i≤N} ⟨f_i,g⟩ a(f_i) with ω
/// the projection onto the orbitals; basis states map as R|n⟩ = R a*_{i1}…a*_{ik}R* RΩ.
pub fn particle_hole_operator(basis: &FockBasis, orbitals: &CMat) -> Result<SparseMatrix> {
    if basis.statistics() != Statistics::Fermion || basis.sector().is_some() {
        return Err(Error::Contract("particle-hole map needs the full fermionic basis".into()));
    }
    let m = basis.modes();
    if orbitals.nrows() != m {
        return Err(Error::Shape(format!("orbitals have {} rows for {m} modes", orbitals.nrows())));
    }
    check_orthonormal(orbitals)?;
    let nf = orbitals.ncols();
    let omega = orbitals * orbitals.adjoint();

    // dressed creators B*(e_j)
    let mut dressed = Vec::with_capacity(m);
    for j in 0..m {
        let hole: Vec<C64> = (0..m)
            .map(|x| if x == j { C64::new(1.0, 0.0) } else { C64::new(0.0, 0.0) } - omega[(x, j)])
            .collect();
        // a(h) with h = Σ_i ⟨e_j, f_i⟩ f_i
        let h: Vec<C64> = (0..m)
            .map(|x| (0..nf).map(|i| orbitals[(j, i)] * orbitals[(x, i)]).sum())
            .collect();
        let c = creation_operator(basis, &hole)?;
        let a = annihilation_operator(basis, &h)?;
        dressed.push(SparseMatrix::combine(&[(&c, C64::new(1.0, 0.0)), (&a, C64::new(1.0, 0.0))]));
    }

    let mut slater = FockVector::vacuum(&Arc::new(basis.clone()))?.amp;
    for i in (0..nf).rev() {
        let f: Vec<C64> = orbitals.column(i).iter().copied().collect();
        slater = creation_operator(basis, &f)?.apply(&slater);
    }

    let mut trip = Vec::new();
    for col in 0..basis.len() {
        let occupied: Vec<usize> = (0..m).filter(|&j| basis.state(col)[j] == 1).collect();
        let mut v = slater.clone();
        for &j in occupied.iter().rev() {
            v = dressed[j].apply(&v);
        }
        for (row, z) in v.into_iter().enumerate() {
            if z.norm() > 1e-15 {
                trip.push((row, col, z));
            }
        }
    }
    Ok(SparseMatrix::from_triplets(basis.len(), basis.len(), trip))
}

pub fn particle_hole_apply(orbitals: &CMat, psi: &FockVector) -> Result<FockVector> {
    Ok(psi.apply(&particle_hole_operator(&psi.basis, orbitals)?))
}
