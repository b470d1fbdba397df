use serde::Serialize;

use crate::effective::HartreeFock;
use crate::error::{Error, Result};
use crate::numerics::linalg::{c, eigvalsh, hermitian_function, hs_norm, trace, trace_norm_any, CMat};
use crate::numerics::{derivative_matrix, exponential_envelope, kinetic_matrix, Envelope, Fourier, Grid, PotentialSpec};
use crate::C64;

/// Spectral slack allowed above 1 and below 0 before a density matrix is refused.
pub const SPECTRUM_TOL: f64 = 1e-10;

const ROOT_SNAP: f64 = 1e-13;

/// [x_a, A] with x_a acting by the minimum-image coordinate difference.
pub fn position_commutator(grid: &Grid, a: &CMat, axis: usize) -> CMat {
    let n = grid.len();
    CMat::from_fn(n, n, |i, j| {
        let di = grid.unflatten(grid.difference_index(i, j))[axis];
        a[(i, j)] * grid.displacement(di)
    })
}

/// [ε∂_a, A].
pub fn gradient_commutator(grid: &Grid, a: &CMat, eps: f64, axis: usize) -> CMat {
    let d = derivative_matrix(grid, axis);
    (&d * a - a * &d) * c(eps)
}

/// Per-axis trace and Hilbert-Schmidt norms of [x, A] and [ε∇, A].
#[derive(Clone, Debug, Default, Serialize)]
pub struct CommutatorNorms {
    pub x_trace: Vec<f64>,
    pub x_hs: Vec<f64>,
    pub grad_trace: Vec<f64>,
    pub grad_hs: Vec<f64>,
}

impl CommutatorNorms {
    pub fn max_x_trace(&self) -> f64 {
        self.x_trace.iter().cloned().fold(0.0, f64::max)
    }
    pub fn max_grad_trace(&self) -> f64 {
        self.grad_trace.iter().cloned().fold(0.0, f64::max)
    }
}

pub fn commutator_norms(grid: &Grid, a: &CMat, eps: f64) -> Result<CommutatorNorms> {
    let n = grid.len();
    if a.nrows() != n || a.ncols() != n {
        return Err(Error::Shape(format!("operator must be {n}x{n}")));
    }
    let mut out = CommutatorNorms::default();
    for axis in 0..grid.dim {
        let x = position_commutator(grid, a, axis);
        out.x_trace.push(trace_norm_any(&x));
        out.x_hs.push(hs_norm(&x));
        let g = gradient_commutator(grid, a, eps, axis);
        out.grad_trace.push(trace_norm_any(&g));
        out.grad_hs.push(hs_norm(&g));
    }
    Ok(out)
}

#[derive(Clone, Debug, Serialize)]
pub struct CommutatorReport {
    pub omega: CommutatorNorms,
    pub sqrt_omega: CommutatorNorms,
    pub sqrt_complement: CommutatorNorms,
}

fn check_density(omega: &CMat) -> Result<Vec<f64>> {
    crate::numerics::linalg::check_hermitian(omega, 1e-10)?;
    let spec = eigvalsh(omega);
    if spec.iter().any(|&l| !(-SPECTRUM_TOL..=1.0 + SPECTRUM_TOL).contains(&l)) {
        return Err(Error::Contract(format!(
            "density matrix spectrum [{:.3e}, {:.3e}] leaves [0, 1]",
            spec[0],
            spec[spec.len() - 1]
        )));
    }
    Ok(spec)
}

/// Norms for ω, √ω and √(1 - ω).
pub fn commutator_diagnostics(grid: &Grid, omega: &CMat, eps: f64) -> Result<CommutatorReport> {
    check_density(omega)?;
    // eigenvalues within rounding of 0 are snapped so √ does not amplify them
    let root = |l: f64| c(if l < ROOT_SNAP { 0.0 } else { l.min(1.0).sqrt() });
    let v = hermitian_function(omega, root);
    let u = hermitian_function(omega, |l| root(1.0 - l));
    Ok(CommutatorReport {
        omega: commutator_norms(grid, omega, eps)?,
        sqrt_omega: commutator_norms(grid, &v, eps)?,
        sqrt_complement: commutator_norms(grid, &u, eps)?,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct PropagationReport {
    pub times: Vec<f64>,
    /// Largest per-axis Tr|[x, ω_t]|.
    pub x_trace: Vec<f64>,
    pub grad_trace: Vec<f64>,
    /// Tr|[x, ω_t]| / (Nε).
    pub normalized: Vec<f64>,
    /// None when the series sits at the fit floor (commutator identically zero).
    pub x_envelope: Option<Envelope>,
    pub grad_envelope: Option<Envelope>,
    /// No fitted envelope flags super-exponential growth.
    pub accepted: bool,
    #[serde(skip)]
    pub states: Vec<CMat>,
}

/// Runs the Hartree-Fock flow from ω₀ and tracks the commutator trace norms at
/// `samples + 1` equally spaced times.
pub fn commutator_propagation_experiment(
    grid: &Grid,
    hf: &HartreeFock,
    omega0: &CMat,
    t: f64,
    dt: f64,
    samples: usize,
) -> Result<PropagationReport> {
    check_density(omega0)?;
    let samples = samples.max(1);
    let steps = ((t.abs() / dt).ceil() as usize).max(1).div_ceil(samples) * samples;
    let tau = t / steps as f64;
    let per = steps / samples;
    let ne = hf.particles as f64 * hf.eps;
    let mut rep = PropagationReport {
        times: Vec::new(),
        x_trace: Vec::new(),
        grad_trace: Vec::new(),
        normalized: Vec::new(),
        x_envelope: None,
        grad_envelope: None,
        accepted: true,
        states: Vec::new(),
    };
    let mut omega = omega0.clone();
    let mut iters = 0;
    for s in 0..=samples {
        if s > 0 {
            for _ in 0..per {
                omega = hf.step(&omega, tau, &mut iters)?;
            }
        }
        let norms = commutator_norms(grid, &omega, hf.eps)?;
        rep.times.push(s as f64 * per as f64 * tau);
        rep.x_trace.push(norms.max_x_trace());
        rep.grad_trace.push(norms.max_grad_trace());
        rep.normalized.push(norms.max_x_trace() / ne);
        rep.states.push(omega.clone());
    }
    rep.x_envelope = exponential_envelope(&rep.times, &rep.x_trace).ok();
    rep.grad_envelope = exponential_envelope(&rep.times, &rep.grad_trace).ok();
    rep.accepted = [&rep.x_envelope, &rep.grad_envelope].iter().all(|e| e.as_ref().is_none_or(|e| !e.super_exponential));
    Ok(rep)
}

/// X(x;y) = N⁻¹ V(x - y) ω(x;y) assembled as N⁻¹ Σ_p V̂(p) e^{ipx} ω e^{-ipx} over the
/// torus momenta.
pub fn exchange_operator(grid: &Grid, omega: &CMat, v: &PotentialSpec, particles: usize) -> Result<CMat> {
    let n = grid.len();
    if omega.nrows() != n || omega.ncols() != n {
        return Err(Error::Shape(format!("density matrix must be {n}x{n}")));
    }
    let v_disp = v.sample_displacements(grid)?;
    // V(x_i - x_j) = Σ_p V̂_p e^{ip(x_i - x_j)} with V̂_p = M⁻ᵈ Σ_r V(r) e^{-ipr}
    let mut vhat: Vec<C64> = v_disp.iter().map(|&x| c(x)).collect();
    Fourier::new(grid).forward(&mut vhat);
    let inv = 1.0 / (n as f64 * particles as f64);
    let mut x = CMat::zeros(n, n);
    for (p, vp) in vhat.iter().enumerate() {
        if vp.norm() < 1e-300 {
            continue;
        }
        let idx = grid.unflatten(p);
        let k: Vec<f64> = (0..grid.dim).map(|a| grid.wavenumber(idx[a])).collect();
        let phase: Vec<C64> = (0..n)
            .map(|i| {
                let pos = grid.position(i);
                C64::from_polar(1.0, (0..grid.dim).map(|a| k[a] * pos[a]).sum())
            })
            .collect();
        let w = vp * inv;
        for i in 0..n {
            for j in 0..n {
                x[(i, j)] += w * phase[i] * omega[(i, j)] * phase[j].conj();
            }
        }
    }
    Ok(x)
}

#[derive(Clone, Debug, Serialize)]
pub struct ExchangeReport {
    pub eps: f64,
    /// Tr|[X_t, ω_t]| per state.
    pub trace_norms: Vec<f64>,
    pub ratios: Vec<f64>,
}

pub fn exchange_smallness(grid: &Grid, states: &[CMat], v: &PotentialSpec, particles: usize, eps: f64) -> Result<ExchangeReport> {
    let mut trace_norms = Vec::with_capacity(states.len());
    for w in states {
        let x = exchange_operator(grid, w, v, particles)?;
        trace_norms.push(trace_norm_any(&(&x * w - w * &x)));
    }
    let ratios = trace_norms.iter().map(|t| t / eps).collect();
    Ok(ExchangeReport { eps, trace_norms, ratios })
}

/// ρ(x) = ω(x;x) from an operator matrix in the orthonormal point basis.
pub fn position_density(grid: &Grid, omega: &CMat) -> Vec<f64> {
    let h = grid.cell_volume();
    (0..grid.len()).map(|i| omega[(i, i)].re / h).collect()
}

/// Tr(-Δω) / ∫ρ^{1+2/d}.
pub fn lieb_thirring_ratio(grid: &Grid, omega: &CMat) -> Result<f64> {
    check_density(omega)?;
    let kinetic = trace(&(kinetic_matrix(grid, 1.0) * omega)).re;
    let p = 1.0 + 2.0 / grid.dim as f64;
    let h = grid.cell_volume();
    let denom: f64 = position_density(grid, omega).iter().map(|r| h * r.max(0.0).powf(p)).sum();
    if !(denom > 0.0) {
        return Err(Error::Domain("density vanishes identically".into()));
    }
    Ok(kinetic / denom)
}

/// Lieb-Thirring ratio of the one-particle density matrix of a fermionic many-body state.
pub fn lieb_thirring_ratio_state(state: &crate::manybody::ManyBodyState) -> Result<f64> {
    if state.statistics() != crate::fock::Statistics::Fermion {
        return Err(Error::Contract("Lieb-Thirring ratio needs a fermionic state".into()));
    }
    let gamma = crate::manybody::reduced_density_k(state, 1)?;
    lieb_thirring_ratio(&state.grid, &gamma)
}
