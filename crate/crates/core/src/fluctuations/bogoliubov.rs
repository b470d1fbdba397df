use serde::Serialize;

use crate::effective::ModeHartree;
use crate::error::{Error, Result};
use crate::fock::{pair_creation_operator, second_quantize, FockBasis, LadderKernel};
use crate::numerics::linalg::{expm, norm, singular_values, CMat, I};
use crate::numerics::{ModeModel, SparseMatrix};
use crate::C64;

/// Constraint residual beyond which a propagation step is rejected.
pub const CONSTRAINT_TOL: f64 = 1e-8;

/// Quadratic part of the fluctuation generator around a condensate c:
/// dΓ(h) + ½ Σ (A₂ a*a* + Ā₂ aa), h = h₀ + diag(V|c|²) + A₁.
#[derive(Clone, Debug)]
pub struct QuadraticGenerator {
    pub h: CMat,
    /// A₂(x;y) = V(x - y) c_x c_y.
    pub pairing: CMat,
}

impl QuadraticGenerator {
    /// `model.pair` is the unscaled V; the mean-field 1/N is absorbed by the N-fold condensate.
    pub fn new(model: &ModeModel, c: &[C64]) -> Result<Self> {
        let m = model.modes();
        if c.len() != m {
            return Err(Error::Shape(format!("{} coefficients for {m} modes", c.len())));
        }
        let mut h = model.hartree_operator(c);
        let mut pairing = CMat::zeros(m, m);
        for x in 0..m {
            for y in 0..m {
                let v = model.pair[(x, y)];
                h[(x, y)] += c[x] * c[y].conj() * v;
                pairing[(x, y)] = c[x] * c[y] * v;
            }
        }
        Ok(QuadraticGenerator { h, pairing })
    }

    /// D = [[h, A₂], [-Ā₂, -h̄]], the generator of the Heisenberg map on (a, a*).
    pub fn generator(&self) -> CMat {
        let m = self.h.nrows();
        let mut d = CMat::zeros(2 * m, 2 * m);
        d.view_mut((0, 0), (m, m)).copy_from(&self.h);
        d.view_mut((0, m), (m, m)).copy_from(&self.pairing);
        d.view_mut((m, 0), (m, m)).copy_from(&(-self.pairing.conjugate()));
        d.view_mut((m, m), (m, m)).copy_from(&(-self.h.conjugate()));
        d
    }

    /// The operator on a Fock basis (independent oracle for Θ).
    pub fn fock_operator(&self, basis: &FockBasis) -> Result<SparseMatrix> {
        let one = second_quantize(basis, &LadderKernel::OneBody(self.h.clone()))?;
        let pair = pair_creation_operator(basis, &self.pairing)?;
        let half = C64::new(0.5, 0.0);
        Ok(SparseMatrix::combine(&[(&one, C64::new(1.0, 0.0)), (&pair, half), (&pair.adjoint(), half)]))
    }
}

/// Linear map Θ on (a, a*) with U*_∞ a_x U_∞ = Σ_y Θ_xy a_y + Θ_{x,M+y} a*_y.
///
/// Block form [[U, W], [W̄, Ū]]. The map on test functions (f, g) ↦ A(f, g) = a(f) + a*(ḡ)
/// is the adjoint Θ*.
#[derive(Clone, Debug)]
pub struct BogoliubovMap {
    pub theta: CMat,
}

#[derive(Clone, Copy, Debug, Default, Serialize)]
pub struct ConstraintResiduals {
    /// ‖Θ - ΣΘ̄Σ‖ with Σ the block swap.
    pub conjugation: f64,
    /// ‖Θ*SΘ - S‖.
    pub symplectic: f64,
}

impl ConstraintResiduals {
    pub fn max(&self) -> f64 {
        self.conjugation.max(self.symplectic)
    }
}

fn metric(m: usize) -> CMat {
    CMat::from_fn(2 * m, 2 * m, |i, j| if i != j { C64::new(0.0, 0.0) } else if i < m { C64::new(1.0, 0.0) } else { C64::new(-1.0, 0.0) })
}

fn swap_conj(t: &CMat, m: usize) -> CMat {
    CMat::from_fn(2 * m, 2 * m, |i, j| t[((i + m) % (2 * m), (j + m) % (2 * m))].conj())
}

impl BogoliubovMap {
    pub fn identity(m: usize) -> Self {
        BogoliubovMap { theta: CMat::identity(2 * m, 2 * m) }
    }

    pub fn from_blocks(u: &CMat, w: &CMat) -> Result<Self> {
        let m = u.nrows();
        if u.shape() != (m, m) || w.shape() != (m, m) {
            return Err(Error::Shape("Bogoliubov blocks must be square and equal-sized".into()));
        }
        let mut t = CMat::zeros(2 * m, 2 * m);
        t.view_mut((0, 0), (m, m)).copy_from(u);
        t.view_mut((0, m), (m, m)).copy_from(w);
        t.view_mut((m, 0), (m, m)).copy_from(&w.conjugate());
        t.view_mut((m, m), (m, m)).copy_from(&u.conjugate());
        Ok(BogoliubovMap { theta: t })
    }

    pub fn modes(&self) -> usize {
        self.theta.nrows() / 2
    }

    pub fn u(&self) -> CMat {
        let m = self.modes();
        self.theta.view((0, 0), (m, m)).into_owned()
    }

    pub fn w(&self) -> CMat {
        let m = self.modes();
        self.theta.view((0, m), (m, m)).into_owned()
    }

    pub fn residuals(&self) -> ConstraintResiduals {
        let m = self.modes();
        let s = metric(m);
        ConstraintResiduals {
            conjugation: (&self.theta - swap_conj(&self.theta, m)).norm(),
            symplectic: (self.theta.adjoint() * &s * &self.theta - &s).norm(),
        }
    }

    /// Θ⁻¹ = SΘ*S.
    pub fn inverse(&self) -> Self {
        let s = metric(self.modes());
        BogoliubovMap { theta: &s * self.theta.adjoint() * &s }
    }

    /// Θ(t;r) composed with Θ(r;s) gives Θ(t;s).
    pub fn compose(&self, earlier: &BogoliubovMap) -> Self {
        BogoliubovMap { theta: &self.theta * &earlier.theta }
    }

    /// Projects back onto the block form, then removes the first-order symplectic defect.
    fn project(&mut self) {
        let m = self.modes();
        self.theta = (&self.theta + swap_conj(&self.theta, m)) * C64::new(0.5, 0.0);
        let s = metric(m);
        let defect = &s * self.theta.adjoint() * &s * &self.theta - CMat::identity(2 * m, 2 * m);
        self.theta = &self.theta * (CMat::identity(2 * m, 2 * m) - defect * C64::new(0.5, 0.0));
    }

    /// Pair kernel k with T_k Ω equal, up to phase, to the vacuum of the implementing unitary.
    ///
    /// The transformed vacuum is annihilated by U* a - Wᵀ a*; T_k Ω by cosh_k a - sinh_k a*.
    /// Matching gives tanh_k = (U*)⁻¹ Wᵀ.
    pub fn vacuum_kernel(&self) -> Result<CMat> {
        let u = self.u();
        let w = self.w();
        let inv = u
            .adjoint()
            .try_inverse()
            .ok_or_else(|| Error::Numerical("Bogoliubov block U is singular".into()))?;
        let z = inv * w.transpose();
        let z = (&z + z.transpose()) * C64::new(0.5, 0.0);
        let svd = z.svd(true, true);
        let (p, q) = (svd.u.expect("U requested"), svd.v_t.expect("V* requested"));
        if svd.singular_values.iter().any(|&s| s >= 1.0) {
            return Err(Error::Numerical("tanh_k has a singular value ≥ 1".into()));
        }
        let n = svd.singular_values.len();
        let diag = CMat::from_fn(n, n, |i, j| if i == j { C64::new(svd.singular_values[i].atanh(), 0.0) } else { C64::new(0.0, 0.0) });
        let k = &p * diag * q;
        Ok((&k + k.transpose()) * C64::new(0.5, 0.0))
    }
}

/// Θ(t;0) sampled along a discrete Hartree trajectory.
#[derive(Clone, Debug)]
pub struct ThetaTrajectory {
    pub times: Vec<f64>,
    pub maps: Vec<BogoliubovMap>,
    /// Condensate coefficients at the sample times.
    pub condensate: Vec<Vec<C64>>,
    pub max_residual: f64,
}

const GAUSS: f64 = 0.288_675_134_594_812_9; // √3/6

/// i∂_tΘ = D(t)Θ with D built from the discrete Hartree flow c_t of `model`.
///
/// Fourth-order Magnus steps with the two Gauss nodes; the condensate at each node is
/// obtained by a single Hartree step from the left endpoint.
pub fn theta_propagate(model: &ModeModel, c0: &[C64], t: f64, dt: f64, samples: usize) -> Result<ThetaTrajectory> {
    let m = model.modes();
    if c0.len() != m || (norm(c0) - 1.0).abs() > 1e-10 {
        return Err(Error::Contract("condensate must be normalized with one coefficient per mode".into()));
    }
    let flow = ModeHartree::new(model.clone());
    let samples = samples.max(1);
    let steps = ((t.abs() / dt).ceil() as usize).max(1).div_ceil(samples) * samples;
    let tau = t / steps as f64;
    let mut theta = BogoliubovMap::identity(m);
    let mut c = c0.to_vec();
    let mut out = ThetaTrajectory { times: vec![0.0], maps: vec![theta.clone()], condensate: vec![c.clone()], max_residual: 0.0 };
    let node = |c: &[C64], frac: f64| -> Result<CMat> {
        let mut x = c.to_vec();
        flow.step(&mut x, frac * tau)?;
        Ok(QuadraticGenerator::new(model, &x)?.generator())
    };
    for s in 0..steps {
        let d1 = node(&c, 0.5 - GAUSS)?;
        let d2 = node(&c, 0.5 + GAUSS)?;
        let omega = (&d1 + &d2) * (-I * (0.5 * tau)) - (&d2 * &d1 - &d1 * &d2) * C64::new(0.5 * GAUSS * tau * tau, 0.0);
        theta.theta = expm(&omega) * &theta.theta;
        theta.project();
        let r = theta.residuals().max();
        out.max_residual = out.max_residual.max(r);
        if r > CONSTRAINT_TOL {
            return Err(Error::Numerical(format!("Bogoliubov constraint residual {r:.2e} at step {s}; reduce dt")));
        }
        flow.step(&mut c, tau)?;
        if (s + 1) % (steps / samples) == 0 {
            out.times.push((s + 1) as f64 * tau);
            out.maps.push(theta.clone());
            out.condensate.push(c.clone());
        }
    }
    Ok(out)
}

/// Limiting CLT variance of N^{-1/2} Σ (J_i - ⟨φ_t, Jφ_t⟩) for product initial data φ₀^{⊗N}.
///
/// With g = Q_t J φ_t, Q_t = 1 - |φ_t⟩⟨φ_t| and w = Θ*(g, ḡ) (the test-function map),
/// σ² = ½[‖w‖² - ½|⟨w, (φ₀, φ̄₀)⟩|²].
pub fn clt_variance(theta: &BogoliubovMap, phi0: &[C64], phit: &[C64], j: &CMat) -> Result<f64> {
    let m = theta.modes();
    if phi0.len() != m || phit.len() != m || j.shape() != (m, m) {
        return Err(Error::Shape("CLT inputs do not match the mode count".into()));
    }
    if (norm(phit) - 1.0).abs() > 1e-10 || (norm(phi0) - 1.0).abs() > 1e-10 {
        return Err(Error::Contract("condensates must be normalized".into()));
    }
    let jphi: Vec<C64> = (0..m).map(|x| (0..m).map(|y| j[(x, y)] * phit[y]).sum()).collect();
    let overlap: C64 = phit.iter().zip(&jphi).map(|(a, b)| a.conj() * b).sum();
    let g: Vec<C64> = jphi.iter().zip(phit).map(|(a, p)| a - overlap * p).collect();
    let mut pair = nalgebra::DVector::<C64>::zeros(2 * m);
    for x in 0..m {
        pair[x] = g[x];
        pair[m + x] = g[x].conj();
    }
    let w = theta.theta.adjoint() * pair;
    let total = w.norm_squared();
    let cond: C64 = (0..m).map(|x| w[x].conj() * phi0[x] + w[m + x].conj() * phi0[x].conj()).sum();
    let sigma2 = 0.5 * (total - 0.5 * cond.norm_sqr());
    if sigma2 < -1e-10 {
        return Err(Error::Contract(format!("negative variance {sigma2:.3e}")));
    }
    Ok(sigma2.max(0.0))
}

/// Largest singular value of the pairing block, a cheap size indicator for truncation.
pub fn squeezing(theta: &BogoliubovMap) -> f64 {
    singular_values(&theta.w()).into_iter().fold(0.0, f64::max)
}

/// max(‖u*u + v*v - 1‖, ‖u*v̄ + v*ū‖) for a fermionic map [[u, v̄], [v, ū]].
pub fn fermionic_residual(u: &CMat, v: &CMat) -> f64 {
    let m = u.nrows();
    let unit = (u.adjoint() * u + v.adjoint() * v - CMat::identity(m, m)).norm();
    let cross = (u.adjoint() * v.conjugate() + v.adjoint() * u.conjugate()).norm();
    unit.max(cross)
}

/// Blocks of the particle-hole map for orthonormal orbitals f_j (columns):
/// u = 1 - ω, v = Σ |f̄_j⟩⟨f_j|.
pub fn particle_hole_blocks(orbitals: &CMat) -> (CMat, CMat) {
    let m = orbitals.nrows();
    let omega = orbitals * orbitals.adjoint();
    (CMat::identity(m, m) - omega, orbitals.conjugate() * orbitals.adjoint())
}
