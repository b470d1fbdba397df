//! The BBGKY hierarchy for normalized reduced densities γ̃^(k) = γ^(k)/C(N,k) on a mode
//! model: collision operators, the hierarchy right-hand side, the consistency residual of
//! exact many-body trajectories and the residual of factorized states in the infinite
//! hierarchy.
//!
//! Densities on k particles are M^k × M^k matrices with particle 1 the slowest index, the
//! layout produced by [`crate::manybody::reduced_density_k`].

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::effective::{ModeHartree, ModeTrajectory};
use crate::error::{Error, Result};
use crate::manybody::{reduced_density_k, ManyBodyState};
use crate::numerics::linalg::{hs_norm, trace, trace_norm_any, CMat};
use crate::numerics::{Grid, ModeModel};
use crate::C64;

/// Largest hierarchy level handled.
pub const MAX_LEVEL: usize = 3;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Closure {
    /// γ̃^(k_max+1) = 0.
    Zero,
    /// γ̃^(k_max+1) = (γ̃^(1))^{⊗(k_max+1)}.
    Factorized,
}

#[derive(Clone, Debug)]
pub struct HierarchyState {
    pub modes: usize,
    pub particles: usize,
    /// γ̃^(1), …, γ̃^(k_max).
    pub levels: Vec<CMat>,
    pub closure: Closure,
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).map(|i| (n - i) as f64 / (i + 1) as f64).product()
}

fn check_level(k: usize) -> Result<()> {
    if k == 0 || k > MAX_LEVEL {
        return Err(Error::Contract(format!("hierarchy level {k} outside 1..={MAX_LEVEL}")));
    }
    Ok(())
}

/// Flat index → per-slot mode indices (slot 0 slowest).
fn digits(mut flat: usize, m: usize, k: usize) -> Vec<usize> {
    let mut d = vec![0; k];
    for slot in (0..k).rev() {
        d[slot] = flat % m;
        flat /= m;
    }
    d
}

fn stride(m: usize, k: usize, slot: usize) -> usize {
    m.pow((k - 1 - slot) as u32)
}

impl HierarchyState {
    pub fn from_state(state: &ManyBodyState, k_max: usize, closure: Closure) -> Result<Self> {
        check_level(k_max)?;
        let n = state.particles();
        if k_max > n {
            return Err(Error::Contract(format!("k_max = {k_max} exceeds N = {n}")));
        }
        let levels = (1..=k_max)
            .map(|k| reduced_density_k(state, k).map(|g| g * C64::new(1.0 / binomial(n, k), 0.0)))
            .collect::<Result<Vec<_>>>()?;
        Ok(HierarchyState { modes: state.grid.len(), particles: n, levels, closure })
    }

    /// |φ⟩⟨φ|^{⊗k} for k = 1..=k_max.
    pub fn factorized(phi: &[C64], particles: usize, k_max: usize) -> Result<Self> {
        check_level(k_max)?;
        let p = projector(phi);
        let levels = (1..=k_max).map(|k| tensor_power(&p, k)).collect();
        Ok(HierarchyState { modes: phi.len(), particles, levels, closure: Closure::Factorized })
    }

    pub fn k_max(&self) -> usize {
        self.levels.len()
    }

    /// γ̃^(k+1) as the hierarchy sees it, including the closure above the top level.
    pub fn upper(&self, k: usize) -> Option<CMat> {
        if k < self.levels.len() {
            Some(self.levels[k].clone())
        } else {
            match self.closure {
                Closure::Zero => None,
                Closure::Factorized => Some(tensor_power(&self.levels[0], k + 1)),
            }
        }
    }

    /// Largest deviation from Hermitian, unit trace and exchange symmetry over all levels.
    pub fn consistency_defect(&self) -> f64 {
        let m = self.modes;
        let mut worst = 0.0f64;
        for (i, g) in self.levels.iter().enumerate() {
            let k = i + 1;
            worst = worst.max(hs_norm(&(g - g.adjoint()))).max((trace(g).re - 1.0).abs());
            for a in 0..k {
                for b in a + 1..k {
                    let s = swap_slots(m, k, a, b);
                    worst = worst.max(hs_norm(&(&s * g * &s - g)));
                }
            }
        }
        worst
    }
}

pub fn projector(phi: &[C64]) -> CMat {
    let v = nalgebra::DVector::from_column_slice(phi);
    &v * v.adjoint()
}

pub fn tensor_power(a: &CMat, k: usize) -> CMat {
    let mut out = a.clone();
    for _ in 1..k {
        out = crate::numerics::linalg::kron(&out, a);
    }
    out
}

/// Permutation matrix exchanging slots a and b of a k-particle space.
pub fn swap_slots(m: usize, k: usize, a: usize, b: usize) -> CMat {
    let dim = m.pow(k as u32);
    let mut s = CMat::zeros(dim, dim);
    for flat in 0..dim {
        let mut d = digits(flat, m, k);
        d.swap(a, b);
        let to = d.iter().fold(0, |acc, &x| acc * m + x);
        s[(to, flat)] = C64::new(1.0, 0.0);
    }
    s
}

/// Σ_j h_j γ - γ Σ_j h_j for a one-body h acting on every slot.
fn one_body_commutator(h: &CMat, g: &CMat, m: usize, k: usize) -> CMat {
    let dim = g.nrows();
    let mut out = CMat::zeros(dim, dim);
    for slot in 0..k {
        let st = stride(m, k, slot);
        for row in 0..dim {
            let xr = (row / st) % m;
            let base_r = row - xr * st;
            for col in 0..dim {
                let xc = (col / st) % m;
                let base_c = col - xc * st;
                let mut acc = C64::new(0.0, 0.0);
                for z in 0..m {
                    acc += h[(xr, z)] * g[(base_r + z * st, col)] - g[(row, base_c + z * st)] * h[(z, xc)];
                }
                out[(row, col)] += acc;
            }
        }
    }
    out
}

/// Σ_{i<j} V(x_i, x_j) as a diagonal on k slots.
fn pair_diagonal(v: &DMatrix<f64>, m: usize, k: usize) -> Vec<f64> {
    (0..m.pow(k as u32))
        .map(|flat| {
            let d = digits(flat, m, k);
            let mut s = 0.0;
            for i in 0..k {
                for j in i + 1..k {
                    s += v[(d[i], d[j])];
                }
            }
            s
        })
        .collect()
}

/// B^(k)γ = Σ_{j≤k} Tr_{k+1}[V(x_j - x_{k+1}), γ] for a pair matrix V_xy.
pub fn collision_apply(gamma: &CMat, v: &DMatrix<f64>, k: usize) -> Result<CMat> {
    let m = v.nrows();
    let dim = m.pow(k as u32);
    if gamma.nrows() != dim * m || gamma.ncols() != dim * m {
        return Err(Error::Shape(format!("γ^(k+1) must be {0}x{0}", dim * m)));
    }
    let mut out = CMat::zeros(dim, dim);
    for row in 0..dim {
        let dr = digits(row, m, k);
        for col in 0..dim {
            let dc = digits(col, m, k);
            let mut acc = C64::new(0.0, 0.0);
            for z in 0..m {
                let w: f64 = (0..k).map(|j| v[(dr[j], z)] - v[(dc[j], z)]).sum();
                if w != 0.0 {
                    acc += gamma[(row * m + z, col * m + z)] * w;
                }
            }
            out[(row, col)] = acc;
        }
    }
    Ok(out)
}

/// ‖B^(k)γ‖_tr / (2k ‖V‖_∞ ‖γ‖_tr); zero for V = 0.
pub fn collision_trace_bound_check(gamma: &CMat, v: &DMatrix<f64>, k: usize) -> Result<f64> {
    let b = collision_apply(gamma, v, k)?;
    let vmax = v.iter().fold(0.0f64, |a, x| a.max(x.abs()));
    if vmax == 0.0 {
        return Ok(0.0);
    }
    let g = trace_norm_any(gamma);
    if g == 0.0 {
        return Ok(0.0);
    }
    Ok(trace_norm_any(&b) / (2.0 * k as f64 * vmax * g))
}

/// Finite-N hierarchy for H = Σ_j h_j + Σ_{i<j} W(x_i - x_j), flow iε∂_t. W carries any
/// coupling constant (W = V/N in the mean-field scaling).
pub struct Hierarchy {
    pub model: ModeModel,
    pub particles: usize,
    pub eps: f64,
}

impl Hierarchy {
    pub fn new(model: ModeModel, particles: usize, eps: f64) -> Result<Self> {
        if particles == 0 || !(eps > 0.0) {
            return Err(Error::Contract("hierarchy needs N ≥ 1 and ε > 0".into()));
        }
        Ok(Hierarchy { model, particles, eps })
    }

    /// i∂_t γ̃^(k) = ε⁻¹ (Σ_j [h_j, γ̃^(k)] + Σ_{i<j} [W_ij, γ̃^(k)] + (N - k) B^(k) γ̃^(k+1)).
    pub fn level_rhs(&self, gamma: &CMat, upper: Option<&CMat>, k: usize) -> Result<CMat> {
        check_level(k)?;
        let m = self.model.modes();
        let dim = m.pow(k as u32);
        if gamma.nrows() != dim || gamma.ncols() != dim {
            return Err(Error::Shape(format!("γ^({k}) must be {dim}x{dim}")));
        }
        let mut out = one_body_commutator(&self.model.one_body, gamma, m, k);
        let diag = pair_diagonal(&self.model.pair, m, k);
        for r in 0..dim {
            for c in 0..dim {
                out[(r, c)] += gamma[(r, c)] * (diag[r] - diag[c]);
            }
        }
        if k < self.particles {
            if let Some(up) = upper {
                out += collision_apply(up, &self.model.pair, k)? * C64::new((self.particles - k) as f64, 0.0);
            }
        }
        Ok(out * C64::new(1.0 / self.eps, 0.0))
    }

    pub fn rhs(&self, state: &HierarchyState) -> Result<Vec<CMat>> {
        if state.particles != self.particles || state.modes != self.model.modes() {
            return Err(Error::Shape("hierarchy state does not match the model".into()));
        }
        (1..=state.k_max())
            .map(|k| {
                let up = state.upper(k);
                self.level_rhs(&state.levels[k - 1], up.as_ref(), k)
            })
            .collect()
    }

    /// ‖i (γ̃(t+dt) - γ̃(t-dt))/(2dt) - rhs(γ̃(t))‖_HS at level k from three exact states.
    pub fn consistency_residual(
        &self,
        before: &ManyBodyState,
        at: &ManyBodyState,
        after: &ManyBodyState,
        k: usize,
        dt: f64,
    ) -> Result<f64> {
        check_level(k)?;
        let n = self.particles;
        let norm = |s: &ManyBodyState, q: usize| -> Result<CMat> {
            Ok(reduced_density_k(s, q)? * C64::new(1.0 / binomial(n, q), 0.0))
        };
        let (gm, g0, gp) = (norm(before, k)?, norm(at, k)?, norm(after, k)?);
        let up = if k < n { Some(norm(at, k + 1)?) } else { None };
        let rhs = self.level_rhs(&g0, up.as_ref(), k)?;
        let deriv = (gp - gm) * C64::new(0.0, 1.0 / (2.0 * dt));
        Ok(hs_norm(&(deriv - rhs)))
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ConsistencyReport {
    pub dts: Vec<f64>,
    pub residuals: Vec<f64>,
    /// residual(dt)/residual(dt/2) for consecutive entries.
    pub richardson: Vec<f64>,
}

/// Consistency residual at time `t` for each step size; `propagate(Ψ, τ)` must return the
/// exact state at time τ from Ψ at time 0.
pub fn exact_consistency_check<F>(hier: &Hierarchy, psi0: &ManyBodyState, t: f64, k: usize, dts: &[f64], propagate: F) -> Result<ConsistencyReport>
where
    F: Fn(&ManyBodyState, f64) -> Result<ManyBodyState>,
{
    let at = propagate(psi0, t)?;
    let mut residuals = Vec::with_capacity(dts.len());
    for &dt in dts {
        let before = propagate(&at, -dt)?;
        let after = propagate(&at, dt)?;
        residuals.push(hier.consistency_residual(&before, &at, &after, k, dt)?);
    }
    let richardson = residuals.windows(2).map(|w| w[0] / w[1]).collect();
    Ok(ConsistencyReport { dts: dts.to_vec(), residuals, richardson })
}

/// Infinite-hierarchy right-hand side Σ_j [h_j, γ^(k)] + B^(k)γ^(k+1) with the unscaled V.
pub fn infinite_rhs(model: &ModeModel, gamma: &CMat, upper: &CMat, k: usize) -> Result<CMat> {
    check_level(k)?;
    let m = model.modes();
    let mut out = one_body_commutator(&model.one_body, gamma, m, k);
    out += collision_apply(upper, &model.pair, k)?;
    Ok(out)
}

/// Largest HS residual of |φ_t⟩⟨φ_t|^{⊗k} in the infinite hierarchy over the trajectory,
/// with ∂_t φ taken from the integrator itself (step `delta`).
pub fn infinite_hierarchy_residual(solver: &ModeHartree, traj: &ModeTrajectory, k: usize, delta: f64) -> Result<Vec<f64>> {
    check_level(k)?;
    let mut out = Vec::with_capacity(traj.states.len());
    for phi in &traj.states {
        let dphi = solver.trajectory_derivative(phi, delta)?;
        let p = projector(phi);
        let dp = {
            let a = nalgebra::DVector::from_column_slice(&dphi);
            let b = nalgebra::DVector::from_column_slice(phi);
            &a * b.adjoint() + &b * a.adjoint()
        };
        // d/dt P^{⊗k} = Σ_j P ⊗ … ⊗ Ṗ ⊗ … ⊗ P
        let mut deriv = CMat::zeros(p.nrows().pow(k as u32), p.nrows().pow(k as u32));
        for j in 0..k {
            let mut term = if j == 0 { dp.clone() } else { p.clone() };
            for s in 1..k {
                term = crate::numerics::linalg::kron(&term, if s == j { &dp } else { &p });
            }
            deriv += term;
        }
        let rhs = infinite_rhs(&solver.model, &tensor_power(&p, k), &tensor_power(&p, k + 1), k)?;
        out.push(hs_norm(&(deriv * C64::new(0.0, 1.0) - rhs)));
    }
    Ok(out)
}

/// Pair matrix of the grid delta g δ(x - y): g/h^d on the diagonal.
pub fn delta_pair(grid: &Grid, strength: f64) -> DMatrix<f64> {
    let n = grid.len();
    DMatrix::from_fn(n, n, |i, j| if i == j { strength / grid.cell_volume() } else { 0.0 })
}

/// Truncated hierarchy γ̃^(1..k_max) integrated with classical RK4 under the factorized
/// closure. Returns `samples + 1` states including the initial one.
pub fn propagate_truncated(hier: &Hierarchy, state: &HierarchyState, t: f64, dt: f64, samples: usize) -> Result<Vec<HierarchyState>> {
    if state.closure != Closure::Factorized {
        return Err(Error::Contract("truncated propagation is provided with the factorized closure only".into()));
    }
    if !(dt > 0.0) {
        return Err(Error::Contract("dt must be positive".into()));
    }
    let samples = samples.max(1);
    let steps = ((t.abs() / dt).ceil() as usize).max(1).div_ceil(samples) * samples;
    let tau = t / steps as f64;
    // i∂γ = R(γ)  ⇒  ∂γ = -i R(γ)
    let field = |s: &HierarchyState| -> Result<Vec<CMat>> {
        Ok(hier.rhs(s)?.into_iter().map(|r| r * C64::new(0.0, -1.0)).collect())
    };
    let shifted = |s: &HierarchyState, d: &[CMat], w: f64| -> HierarchyState {
        let mut out = s.clone();
        out.levels.iter_mut().zip(d).for_each(|(g, x)| *g += x * C64::new(w, 0.0));
        out
    };
    let mut cur = state.clone();
    let mut out = vec![cur.clone()];
    for s in 0..steps {
        let k1 = field(&cur)?;
        let k2 = field(&shifted(&cur, &k1, 0.5 * tau))?;
        let k3 = field(&shifted(&cur, &k2, 0.5 * tau))?;
        let k4 = field(&shifted(&cur, &k3, tau))?;
        for (i, g) in cur.levels.iter_mut().enumerate() {
            *g += (&k1[i] + (&k2[i] + &k3[i]) * C64::new(2.0, 0.0) + &k4[i]) * C64::new(tau / 6.0, 0.0);
        }
        if (s + 1) % (steps / samples) == 0 {
            out.push(cur.clone());
        }
    }
    Ok(out)
}
