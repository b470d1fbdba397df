use std::sync::Arc;

use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fock::{FockBasis, FockVector};
use crate::fock::{bogoliubov_apply_with, weyl_apply_with};
use crate::manybody::{check_resolution, fock_hamiltonian};
use crate::numerics::linalg::{eigh, hs_norm, CMat};
use crate::numerics::{kinetic_matrix, Grid, ModeModel, PotentialSpec};
use crate::scattering::{potential_integral, ScatteringSolution};
use crate::C64;

/// k₀(x;y) = -N ω(N|x - y|) φ(x) φ(y) as a pair kernel on grid-point modes.
#[derive(Clone, Debug)]
pub struct CorrelationKernel {
    pub k: CMat,
    pub particles: usize,
    /// Grid spacing at most the 1/N support of N²V(N·).
    pub resolved: bool,
    pub hs_norm: f64,
}

impl CorrelationKernel {
    /// `c` are orthonormal-basis coefficients (h^{3/2} φ) on a 3D grid.
    pub fn new(grid: &Grid, sol: &ScatteringSolution, c: &[C64], n: usize) -> Result<Self> {
        if grid.dim != 3 {
            return Err(Error::Contract("the correlation kernel is three-dimensional".into()));
        }
        grid.check_len(c.len(), "condensate")?;
        let nf = n as f64;
        let m = grid.len();
        let k = CMat::from_fn(m, m, |x, y| {
            let r = grid.displacement_radius(grid.difference_index(x, y));
            -c[x] * c[y] * (nf * sol.omega_at(nf * r))
        });
        let resolved = grid.spacing() * nf <= sol.support;
        Ok(CorrelationKernel { hs_norm: hs_norm(&k), k, particles: n, resolved })
    }
}

/// Σ (T + V_ext) a*a + ½ Σ W_xy a*_x a*_y a_y a_x on grid-point modes.
#[derive(Clone, Debug)]
pub struct TrapHamiltonian {
    pub kinetic: CMat,
    pub external: Vec<f64>,
    pub pair: DMatrix<f64>,
}

impl TrapHamiltonian {
    /// Kinetic -Δ, external V_ext, pair N²V(N·); the pair must be resolved by the grid.
    pub fn gross_pitaevskii(grid: &Grid, v_ext: &PotentialSpec, v: &PotentialSpec, n: usize) -> Result<Self> {
        check_resolution(grid, v, n)?;
        let model = ModeModel::from_grid(grid, 1.0, &PotentialSpec::zero(), &v.gp_rescaled(n as f64))?;
        Ok(TrapHamiltonian { kinetic: kinetic_matrix(grid, 1.0), external: v_ext.sample_positions(grid)?, pair: model.pair })
    }

    pub fn modes(&self) -> usize {
        self.external.len()
    }

    pub fn model(&self) -> Result<ModeModel> {
        let mut h = self.kinetic.clone();
        for (i, &v) in self.external.iter().enumerate() {
            h[(i, i)] += C64::new(v, 0.0);
        }
        ModeModel::new(h, self.pair.clone())
    }
}

#[derive(Clone, Copy, Debug, Default, Serialize)]
pub struct EnergyParts {
    pub kinetic: f64,
    pub external: f64,
    pub interaction: f64,
    pub total: f64,
}

impl EnergyParts {
    fn new(kinetic: f64, external: f64, interaction: f64) -> Self {
        EnergyParts { kinetic, external, interaction, total: kinetic + external + interaction }
    }
}

fn quadratic_form(a: &CMat, x: &[C64]) -> f64 {
    let m = x.len();
    let mut s = C64::new(0.0, 0.0);
    for i in 0..m {
        for j in 0..m {
            s += x[i].conj() * a[(i, j)] * x[j];
        }
    }
    s.re
}

fn check_pair_kernel(h: &TrapHamiltonian, mean: &[C64], k: &CMat) -> Result<()> {
    let m = h.modes();
    if mean.len() != m || k.nrows() != m || k.ncols() != m {
        return Err(Error::Shape(format!("mean and kernel must match {m} modes")));
    }
    Ok(())
}

/// Fluctuation moments of T Ω: G_xy = ⟨b*_y b_x⟩ = (sh sh*)_xy and P_xy = ⟨b_x b_y⟩ = (ch shᵀ)_xy.
///
/// Uses kk* = U s² U*: ch = U cosh(s) U*, sh = U (sinh(s)/s) U* k.
pub fn squeezed_moments(k: &CMat) -> (CMat, CMat) {
    let m = k.nrows();
    if k.iter().all(|z| *z == C64::new(0.0, 0.0)) {
        return (CMat::zeros(m, m), CMat::zeros(m, m));
    }
    let (s2, u) = eigh(&(k * k.adjoint()));
    let diag = |f: &dyn Fn(f64) -> f64| {
        let d = CMat::from_diagonal(&nalgebra::DVector::from_fn(m, |i, _| C64::new(f(s2[i].max(0.0).sqrt()), 0.0)));
        &u * d * u.adjoint()
    };
    let ch = diag(&|s: f64| s.cosh());
    let sh = diag(&|s: f64| if s < 1e-8 { 1.0 + s * s / 6.0 } else { s.sinh() / s }) * k;
    (&sh * sh.adjoint(), ch * sh.transpose())
}

/// Energy of a centred quasi-free state (G, P) displaced by `mean`, by Wick's rule.
fn wick_energy(h: &TrapHamiltonian, mean: &[C64], g: &CMat, p: &CMat) -> EnergyParts {
    let m = h.modes();
    let kinetic = quadratic_form(&h.kinetic, mean) + (&h.kinetic * g).trace().re;
    let external = (0..m).map(|x| h.external[x] * (mean[x].norm_sqr() + g[(x, x)].re)).sum();
    let mut inter = 0.0;
    for x in 0..m {
        let ax = mean[x];
        for y in 0..m {
            let w = h.pair[(x, y)];
            if w == 0.0 {
                continue;
            }
            let ay = mean[y];
            let s = ax.norm_sqr() * ay.norm_sqr()
                + 2.0 * (ax.conj() * ay.conj() * p[(x, y)]).re
                + 2.0 * (ax.conj() * ay * g[(x, y)]).re
                + ax.norm_sqr() * g[(y, y)].re
                + ay.norm_sqr() * g[(x, x)].re
                + g[(x, x)].re * g[(y, y)].re
                + g[(x, y)].norm_sqr()
                + p[(x, y)].norm_sqr();
            inter += 0.5 * w * s;
        }
    }
    EnergyParts::new(kinetic, external, inter)
}

/// ⟨W(α) T Ω, H W(α) T Ω⟩ with T = exp(½Σ(k a*a* - k̄ aa)), exact in the full Fock space.
pub fn quasi_free_energy(h: &TrapHamiltonian, mean: &[C64], k: &CMat) -> Result<EnergyParts> {
    check_pair_kernel(h, mean, k)?;
    let (g, p) = squeezed_moments(k);
    Ok(wick_energy(h, mean, &g, &p))
}

/// The same expectation computed on a truncated bosonic Fock space (few-mode oracle).
/// Returns the energy parts and the largest boundary mass met.
pub fn fock_quasi_free_energy(
    h: &TrapHamiltonian,
    mean: &[C64],
    k: &CMat,
    basis: &Arc<FockBasis>,
    threshold: f64,
) -> Result<(EnergyParts, f64)> {
    check_pair_kernel(h, mean, k)?;
    let m = h.modes();
    let squeezed = bogoliubov_apply_with(k, &FockVector::vacuum(basis)?, threshold)?;
    let psi = weyl_apply_with(mean, &squeezed, threshold)?;
    let zero = DMatrix::zeros(m, m);
    let part = |one: CMat, pair: DMatrix<f64>| -> Result<f64> {
        Ok(psi.expectation(&fock_hamiltonian(&ModeModel::new(one, pair)?, basis)?).re)
    };
    let ext = CMat::from_diagonal(&nalgebra::DVector::from_fn(m, |i, _| C64::new(h.external[i], 0.0)));
    let parts = EnergyParts::new(
        part(h.kinetic.clone(), zero.clone())?,
        part(ext, zero)?,
        part(CMat::zeros(m, m), h.pair.clone())?,
    );
    Ok((parts, squeezed.boundary_mass().max(psi.boundary_mass())))
}

/// Kernel-formula evaluation with sh ≈ k, ch ≈ 1, keeping the terms that survive at
/// leading order: the mean-field part, Tr((T + V_ext) k k*), ½ΣW|k|², ΣW Re(ᾱᾱk).
/// The second value bounds |exact - formula| term by term.
fn kernel_formula_energy(h: &TrapHamiltonian, mean: &[C64], k: &CMat, g: &CMat, p: &CMat) -> (EnergyParts, f64) {
    let m = h.modes();
    let kk = k * k.adjoint();
    let dg = g - &kk;
    let kinetic = quadratic_form(&h.kinetic, mean) + (&h.kinetic * &kk).trace().re;
    let external = (0..m).map(|x| h.external[x] * (mean[x].norm_sqr() + kk[(x, x)].re)).sum();
    let mut err = (&h.kinetic * &dg).trace().re.abs() + (0..m).map(|x| h.external[x] * dg[(x, x)].re).sum::<f64>().abs();
    let mut inter = 0.0;
    for x in 0..m {
        let ax = mean[x];
        for y in 0..m {
            let w = h.pair[(x, y)];
            if w == 0.0 {
                continue;
            }
            let ay = mean[y];
            let amp = ax.norm() * ay.norm();
            inter += 0.5 * w * (ax.norm_sqr() * ay.norm_sqr() + 2.0 * (ax.conj() * ay.conj() * k[(x, y)]).re + k[(x, y)].norm_sqr());
            let dropped = 2.0 * amp * g[(x, y)].norm()
                + ax.norm_sqr() * g[(y, y)].re
                + ay.norm_sqr() * g[(x, x)].re
                + g[(x, x)].re * g[(y, y)].re
                + g[(x, y)].norm_sqr()
                + (p[(x, y)].norm_sqr() - k[(x, y)].norm_sqr()).abs()
                + 2.0 * amp * (p[(x, y)] - k[(x, y)]).norm();
            err += 0.5 * w.abs() * dropped;
        }
    }
    (EnergyParts::new(kinetic, external, inter), err)
}

#[derive(Clone, Debug, Serialize)]
pub struct DressedEnergyReport {
    pub particles: usize,
    pub with_t0: bool,
    /// Exact quasi-free (Wick) expectation of H in W(√Nφ)T₀Ω (T₀ = 1 without dressing).
    pub direct: EnergyParts,
    /// Kernel-formula evaluation with sh ≈ k₀, ch ≈ 1.
    pub formula: EnergyParts,
    /// Term-wise bound on |direct - formula| from the neglected contributions.
    pub approximation_error: f64,
    /// Undressed coherent-state energy E[W(√Nφ)Ω].
    pub undressed: EnergyParts,
    /// Tr(-Δ k₀k₀*) on the grid.
    pub kinetic_correction: f64,
    /// ½ Σ N⁴V(N·)ω(N·)(1 - ω(N·))|φ|²|φ|² on the grid.
    pub kinetic_scattering_form: f64,
    /// N E_GP(φ) with coupling 4πa₀ (grid quadrature).
    pub gp_functional: f64,
    /// The same functional with 4πa₀ replaced by b₀/2 = ½∫V.
    pub bare_functional: f64,
    pub kernel_hs_norm: f64,
    pub resolved: bool,
}

/// Energies of W(√Nφ)T₀Ω and W(√Nφ)Ω for H = Σ(-Δ + V_ext) + Σ_{i<j} N²V(N(x_i - x_j)).
pub fn gp_dressed_energy(
    grid: &Grid,
    c: &[C64],
    v_ext: &PotentialSpec,
    sol: &ScatteringSolution,
    n: usize,
    with_t0: bool,
) -> Result<DressedEnergyReport> {
    let v = &sol.potential;
    let h = TrapHamiltonian::gross_pitaevskii(grid, v_ext, v, n)?;
    let kernel = CorrelationKernel::new(grid, sol, c, n)?;
    let m = grid.len();
    let nf = n as f64;
    let mean: Vec<C64> = c.iter().map(|z| z * nf.sqrt()).collect();
    let zero = CMat::zeros(m, m);
    let undressed = quasi_free_energy(&h, &mean, &zero)?;
    let k = if with_t0 { &kernel.k } else { &zero };
    let (g, p) = squeezed_moments(k);
    let direct = wick_energy(&h, &mean, &g, &p);
    let (formula, approximation_error) = kernel_formula_energy(&h, &mean, k, &g, &p);

    let kk = &kernel.k * kernel.k.adjoint();
    let kinetic_correction = (&h.kinetic * &kk).trace().re;
    let mut scattering_form = 0.0;
    for x in 0..m {
        for y in 0..m {
            let r = nf * grid.displacement_radius(grid.difference_index(x, y));
            let w = sol.omega_at(r);
            scattering_form += 0.5 * nf.powi(4) * v.eval(r) * w * (1.0 - w) * c[x].norm_sqr() * c[y].norm_sqr();
        }
    }
    let quartic: f64 = c.iter().map(|z| z.norm_sqr().powi(2)).sum::<f64>() / grid.cell_volume();
    let one_body = quadratic_form(&h.kinetic, c) + (0..m).map(|x| h.external[x] * c[x].norm_sqr()).sum::<f64>();
    let gp_functional = nf * (one_body + 4.0 * std::f64::consts::PI * sol.a0 * quartic);
    let bare_functional = nf * (one_body + 0.5 * potential_integral(v)? * quartic);
    Ok(DressedEnergyReport {
        particles: n,
        with_t0,
        direct,
        formula,
        approximation_error,
        undressed,
        kinetic_correction,
        kinetic_scattering_form: scattering_form,
        gp_functional,
        bare_functional,
        kernel_hs_norm: kernel.hs_norm,
        resolved: kernel.resolved,
    })
}
