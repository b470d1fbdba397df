use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

pub type CMat = DMatrix<C64>;
pub type CVec = DVector<C64>;

pub const I: C64 = C64 { re: 0.0, im: 1.0 };

pub fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

/// Largest entry of |A - A*|.
pub fn hermitian_defect(a: &CMat) -> f64 {
    let n = a.nrows();
    let mut d: f64 = 0.0;
    for i in 0..n {
        for j in i..n {
            d = d.max((a[(i, j)] - a[(j, i)].conj()).norm());
        }
    }
    d
}

/// Errors unless A is square and Hermitian within `tol` (relative to max(1, max |A_ij|)).
pub fn check_hermitian(a: &CMat, tol: f64) -> Result<()> {
    if a.nrows() != a.ncols() {
        return Err(Error::Shape(format!("{}x{} matrix is not square", a.nrows(), a.ncols())));
    }
    let scale = a.iter().fold(1.0f64, |m, z| m.max(z.norm()));
    let d = hermitian_defect(a);
    if d > tol * scale {
        return Err(Error::Contract(format!("matrix not Hermitian: defect {d:.3e}")));
    }
    Ok(())
}

pub fn symmetrize(a: &CMat) -> CMat {
    (a + a.adjoint()) * c(0.5)
}

/// Eigen-decomposition of the Hermitian part of `a`; eigenvalues ascending.
pub fn eigh(a: &CMat) -> (Vec<f64>, CMat) {
    let se = SymmetricEigen::new(symmetrize(a));
    let n = se.eigenvalues.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| se.eigenvalues[i].total_cmp(&se.eigenvalues[j]));
    let vals = order.iter().map(|&i| se.eigenvalues[i]).collect();
    let mut vecs = CMat::zeros(n, n);
    for (k, &i) in order.iter().enumerate() {
        vecs.set_column(k, &se.eigenvectors.column(i));
    }
    (vals, vecs)
}

pub fn eigvalsh(a: &CMat) -> Vec<f64> {
    let mut v: Vec<f64> = SymmetricEigen::new(symmetrize(a)).eigenvalues.iter().copied().collect();
    v.sort_by(f64::total_cmp);
    v
}

/// Sum of absolute eigenvalues of a Hermitian matrix.
pub fn trace_norm(a: &CMat) -> Result<f64> {
    check_hermitian(a, 1e-10)?;
    Ok(eigvalsh(a).iter().map(|x| x.abs()).sum())
}

/// Frobenius norm.
pub fn hs_norm(a: &CMat) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn singular_values(a: &CMat) -> Vec<f64> {
    a.clone().svd(false, false).singular_values.iter().copied().collect()
}

/// Trace norm of an arbitrary square matrix (sum of singular values).
pub fn trace_norm_any(a: &CMat) -> f64 {
    singular_values(a).iter().sum()
}

/// Largest singular value.
pub fn op_norm(a: &CMat) -> f64 {
    singular_values(a).iter().fold(0.0, |m: f64, &s| m.max(s))
}

/// f(A) for Hermitian A through its eigen-decomposition.
pub fn hermitian_function<F: Fn(f64) -> C64>(a: &CMat, f: F) -> CMat {
    let (vals, vecs) = eigh(a);
    let mut scaled = vecs.clone();
    for (k, &l) in vals.iter().enumerate() {
        let fk = f(l);
        scaled.column_mut(k).iter_mut().for_each(|z| *z *= fk);
    }
    scaled * vecs.adjoint()
}

/// exp(-i H tau) for Hermitian H.
pub fn unitary_step(h: &CMat, tau: f64) -> CMat {
    hermitian_function(h, |l| C64::from_polar(1.0, -l * tau))
}

/// Matrix exponential by scaling and squaring of a Taylor series.
pub fn expm(a: &CMat) -> CMat {
    let n = a.nrows();
    let norm1 = (0..n)
        .map(|j| a.column(j).iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max);
    let s = if norm1 > 0.5 { (norm1 / 0.5).log2().ceil() as i32 } else { 0 };
    let b = a * c(0.5f64.powi(s));
    let mut sum = CMat::identity(n, n);
    let mut term = CMat::identity(n, n);
    for k in 1..60 {
        term = &term * &b * c(1.0 / k as f64);
        sum += &term;
        if hs_norm(&term) < 1e-18 * hs_norm(&sum) {
            break;
        }
    }
    for _ in 0..s {
        sum = &sum * &sum;
    }
    sum
}

pub fn commutator(a: &CMat, b: &CMat) -> CMat {
    a * b - b * a
}

pub fn dot(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

pub fn norm(a: &[C64]) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn trace(a: &CMat) -> C64 {
    (0..a.nrows().min(a.ncols())).map(|i| a[(i, i)]).sum()
}

/// Kronecker product.
pub fn kron(a: &CMat, b: &CMat) -> CMat {
    let (ar, ac, br, bc) = (a.nrows(), a.ncols(), b.nrows(), b.ncols());
    CMat::from_fn(ar * br, ac * bc, |i, j| a[(i / br, j / bc)] * b[(i % br, j % bc)])
}
