use std::f64::consts::PI;

use nalgebra::DMatrix;
use serde::Serialize;

use super::wave::Scheme;
use crate::error::{Error, Result};
use crate::numerics::linalg::{commutator, eigvalsh, hs_norm, trace, unitary_step, CMat};
use crate::numerics::{Grid, ModeModel};
use crate::C64;

const MIDPOINT_TOL: f64 = 1e-14;
const MIDPOINT_FLOOR: f64 = 1e-12;
const MIDPOINT_ITERS: usize = 60;

/// Time-dependent Hartree-Fock iε∂_t ω = [h₀ + N⁻¹(V*ρ) - X_ω, ω] in a point basis,
/// with ρ(x) = ω(x;x) and X_ω(x;y) = V(x - y) ω(x;y).
pub struct HartreeFock {
    pub one_body: CMat,
    pub pair: DMatrix<f64>,
    pub particles: usize,
    pub eps: f64,
    /// Drops X_ω when false (reduced Hartree dynamics).
    pub exchange: bool,
    pub scheme: Scheme,
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct HfReport {
    pub times: Vec<f64>,
    pub energy: Vec<f64>,
    pub trace: Vec<f64>,
    /// ‖ω² - ω‖_HS.
    pub idempotence: Vec<f64>,
    /// Largest change of any eigenvalue relative to t = 0.
    pub spectrum_drift: Vec<f64>,
    pub midpoint_iterations: usize,
}

impl HartreeFock {
    /// `model.pair` is the unscaled V(x - y); the 1/N factor is applied here.
    pub fn new(model: &ModeModel, particles: usize, eps: f64) -> Result<Self> {
        if particles == 0 || particles > model.modes() {
            return Err(Error::Contract(format!("{particles} fermions do not fit in {} modes", model.modes())));
        }
        if !(eps > 0.0) {
            return Err(Error::Contract("eps must be positive".into()));
        }
        Ok(HartreeFock {
            one_body: model.one_body.clone(),
            pair: model.pair.clone(),
            particles,
            eps,
            exchange: true,
            scheme: Scheme::default(),
        })
    }

    fn check(&self, omega: &CMat) -> Result<()> {
        let m = self.one_body.nrows();
        if omega.nrows() != m || omega.ncols() != m {
            return Err(Error::Shape(format!("density matrix must be {m}x{m}")));
        }
        Ok(())
    }

    /// h₀ + N⁻¹ diag(V ω_diag) - N⁻¹ V∘ω.
    pub fn hamiltonian(&self, omega: &CMat) -> CMat {
        let m = omega.nrows();
        let inv = 1.0 / self.particles as f64;
        let mut h = self.one_body.clone();
        for x in 0..m {
            let direct: f64 = (0..m).map(|y| self.pair[(x, y)] * omega[(y, y)].re).sum();
            h[(x, x)] += C64::new(inv * direct, 0.0);
        }
        if self.exchange {
            for x in 0..m {
                for y in 0..m {
                    h[(x, y)] -= omega[(x, y)] * (inv * self.pair[(x, y)]);
                }
            }
        }
        h
    }

    /// Tr(h₀ω) + (2N)⁻¹ Σ V_xy (ω_xx ω_yy - |ω_xy|²).
    pub fn energy(&self, omega: &CMat) -> f64 {
        let m = omega.nrows();
        let kin = trace(&(&self.one_body * omega)).re;
        let mut int = 0.0;
        for x in 0..m {
            for y in 0..m {
                let mut t = omega[(x, x)].re * omega[(y, y)].re;
                if self.exchange {
                    t -= omega[(x, y)].norm_sqr();
                }
                int += self.pair[(x, y)] * t;
            }
        }
        kin + int / (2.0 * self.particles as f64)
    }

    /// ω ↦ U ω U* with U = exp(-iτ h(ω̄)/ε), ω̄ the midpoint of the old and new states,
    /// solved by fixed-point iteration. The map is symmetric, so composing it is
    /// fourth order.
    fn midpoint(&self, omega: &CMat, tau: f64, iters: &mut usize) -> Result<CMat> {
        let h0 = self.hamiltonian(omega);
        let kick = hs_norm(&commutator(&h0, omega)) * tau.abs() / self.eps;
        if kick > 1.0 {
            return Err(Error::Numerical(format!("commutator step {kick:.3} too large; reduce dt")));
        }
        let conj = |h: &CMat| {
            let u = unitary_step(h, tau / self.eps);
            &u * omega * u.adjoint()
        };
        let mut next = conj(&h0);
        let mut residual = f64::INFINITY;
        let mut history = Vec::new();
        for _ in 0..MIDPOINT_ITERS {
            *iters += 1;
            let mid = (omega + &next) * C64::new(0.5, 0.0);
            let cand = conj(&self.hamiltonian(&mid));
            residual = hs_norm(&(&cand - &next));
            history.push(residual);
            next = cand;
            // below MIDPOINT_FLOOR a non-decreasing residual means rounding has taken over
            let stalled = residual < MIDPOINT_FLOOR && history.len() > 1 && residual >= history[history.len() - 2];
            if residual < MIDPOINT_TOL || stalled {
                return Ok(next);
            }
        }
        Err(Error::NonConvergence { iterations: MIDPOINT_ITERS, residual, history })
    }

    pub fn step(&self, omega: &CMat, dt: f64, iters: &mut usize) -> Result<CMat> {
        let mut w = omega.clone();
        for &c in self.scheme.weights() {
            w = self.midpoint(&w, c * dt, iters)?;
        }
        Ok(crate::numerics::linalg::symmetrize(&w))
    }

    /// Evolves ω₀ to time `t`, recording `samples + 1` diagnostics; returns the final state.
    pub fn solve(&self, omega0: &CMat, t: f64, dt: f64, samples: usize) -> Result<(CMat, HfReport)> {
        self.check(omega0)?;
        crate::numerics::linalg::check_hermitian(omega0, 1e-10)?;
        let spec0 = eigvalsh(omega0);
        if spec0.iter().any(|&l| !(-1e-10..=1.0 + 1e-10).contains(&l)) {
            return Err(Error::Contract("initial density matrix must satisfy 0 ≤ ω ≤ 1".into()));
        }
        let samples = samples.max(1);
        let steps = ((t.abs() / dt).ceil() as usize).max(1).div_ceil(samples) * samples;
        let tau = t / steps as f64;
        let mut rep = HfReport::default();
        let mut omega = omega0.clone();
        let record = |rep: &mut HfReport, time: f64, w: &CMat| {
            rep.times.push(time);
            rep.energy.push(self.energy(w));
            rep.trace.push(trace(w).re);
            rep.idempotence.push(hs_norm(&(w * w - w)));
            let spec = eigvalsh(w);
            rep.spectrum_drift.push(spec.iter().zip(&spec0).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max));
        };
        record(&mut rep, 0.0, &omega);
        let mut iters = 0;
        for s in 0..steps {
            omega = self.step(&omega, tau, &mut iters)?;
            if (s + 1) % (steps / samples) == 0 {
                record(&mut rep, (s + 1) as f64 * tau, &omega);
            }
        }
        rep.midpoint_iterations = iters;
        Ok((omega, rep))
    }
}

/// Lowest N plane waves on a torus of side `length`, ordered by |n|² and then
/// lexicographically.
#[derive(Clone, Debug, Serialize)]
pub struct FreeFermiState {
    pub momenta: Vec<[i64; 3]>,
    /// ε² Σ |2πn/L|².
    pub energy: f64,
    /// Whether the N-th and (N+1)-th levels differ, so the ground state is unique.
    pub closed_shell: bool,
}

pub fn free_fermi_momenta(dim: usize, length: f64, n: usize, eps: f64) -> Result<FreeFermiState> {
    if !(dim == 1 || dim == 3) {
        return Err(Error::Contract(format!("dimension {dim} is not 1 or 3")));
    }
    if n == 0 {
        return Err(Error::Contract("need at least one fermion".into()));
    }
    let norm2 = |p: &[i64; 3]| p.iter().map(|x| x * x).sum::<i64>();
    let mut r = 1i64;
    let mut all = loop {
        let span = |d: usize| if d < dim { -r..=r } else { 0..=0 };
        let mut ball = Vec::new();
        for a in span(0) {
            for b in span(1) {
                for c in span(2) {
                    let p = [a, b, c];
                    if norm2(&p) <= r * r {
                        ball.push(p);
                    }
                }
            }
        }
        if ball.len() > n {
            break ball;
        }
        r += 1;
    };
    all.sort_by_key(|p| (norm2(p), *p));
    let closed_shell = norm2(&all[n - 1]) != norm2(&all[n]);
    let momenta: Vec<[i64; 3]> = all.into_iter().take(n).collect();
    let k = 2.0 * PI / length;
    let energy = eps * eps * momenta.iter().map(|p| norm2(p) as f64 * k * k).sum::<f64>();
    Ok(FreeFermiState { momenta, energy, closed_shell })
}

/// Orthonormal plane-wave orbitals (columns) in the point basis.
pub fn plane_wave_orbitals(grid: &Grid, momenta: &[[i64; 3]]) -> Result<CMat> {
    let half = (grid.points / 2) as i64;
    if momenta.iter().any(|p| p.iter().take(grid.dim).any(|&x| x.abs() >= half)) {
        return Err(Error::Resolution(format!("momenta exceed the {} resolvable modes per axis", grid.points)));
    }
    let m = grid.len();
    let k = 2.0 * PI / grid.length;
    let scale = 1.0 / (m as f64).sqrt();
    Ok(CMat::from_fn(m, momenta.len(), |i, j| {
        let x = grid.position(i);
        let phase: f64 = (0..grid.dim).map(|a| k * momenta[j][a] as f64 * x[a]).sum();
        C64::from_polar(scale, phase)
    }))
}

/// Projection onto the N lowest plane waves and the matching free energy.
pub fn free_fermi_ground_state(grid: &Grid, n: usize, eps: f64) -> Result<(CMat, FreeFermiState)> {
    let st = free_fermi_momenta(grid.dim, grid.length, n, eps)?;
    let f = plane_wave_orbitals(grid, &st.momenta)?;
    Ok((&f * f.adjoint(), st))
}

/// The N lowest eigenvectors of a one-body matrix as orthonormal columns.
pub fn lowest_orbitals(one_body: &CMat, n: usize) -> Result<CMat> {
    if n == 0 || n > one_body.nrows() {
        return Err(Error::Contract(format!("cannot take {n} orbitals from {} modes", one_body.nrows())));
    }
    let (_, vecs) = crate::numerics::linalg::eigh(one_body);
    Ok(vecs.columns(0, n).into_owned())
}
