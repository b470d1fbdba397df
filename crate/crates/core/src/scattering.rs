//! Zero-energy scattering for radial potentials in three dimensions.
//!
//! With u = r f the equation (-Δ + ½V) f = 0 becomes u'' = ½ V u, u(0) = 0.
//! Outside the support u is linear, u ∝ r - a₀, which fixes the scattering length.

use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::numerics::potential::{PotentialSpec, Shape};

pub const DEFAULT_MESH: usize = 10_000;

/// Nodes used for the standalone quadrature in [`smallness_parameter`].
const RHO_MESH: usize = 20_000;

#[derive(Clone, Debug, Serialize)]
pub struct ScatteringSolution {
    /// Radial nodes in (0, R_max]; uniform on (0, R_V] and on (R_V, R_max].
    pub r: Vec<f64>,
    /// u = r f normalized so that u = r - a₀ outside the support.
    pub u: Vec<f64>,
    pub du: Vec<f64>,
    pub f: Vec<f64>,
    pub a0: f64,
    /// Smallness parameter; `None` for the hard sphere.
    pub rho: Option<f64>,
    pub support: f64,
    pub r_max: f64,
    pub hard_core: Option<f64>,
    /// Nodes in the inner segment (0, R_V].
    pub inner_nodes: usize,
    #[serde(skip)]
    pub potential: PotentialSpec,
}

impl ScatteringSolution {
    /// f(r) with cubic Hermite interpolation of u inside the support and the exact
    /// exterior form 1 - a₀/r beyond it.
    pub fn f_at(&self, r: f64) -> f64 {
        let r = r.abs();
        if let Some(rc) = self.hard_core {
            return if r < rc { 0.0 } else { 1.0 - self.a0 / r };
        }
        if r >= self.support {
            return if r == 0.0 { 1.0 } else { 1.0 - self.a0 / r };
        }
        let h = self.support / self.inner_nodes as f64;
        if r < self.r[0] {
            // linear in u below the innermost node
            return self.u[0] / self.r[0];
        }
        let k = ((r / h).floor() as usize).clamp(1, self.inner_nodes - 1) - 1;
        let (r0, r1) = (self.r[k], self.r[k + 1]);
        let s = (r - r0) / (r1 - r0);
        let d = r1 - r0;
        let h00 = 2.0 * s.powi(3) - 3.0 * s * s + 1.0;
        let h10 = s.powi(3) - 2.0 * s * s + s;
        let h01 = -2.0 * s.powi(3) + 3.0 * s * s;
        let h11 = s.powi(3) - s * s;
        let u = h00 * self.u[k] + h10 * d * self.du[k] + h01 * self.u[k + 1] + h11 * d * self.du[k + 1];
        u / r
    }

    /// ω(r) = 1 - f(r).
    pub fn omega_at(&self, r: f64) -> f64 {
        1.0 - self.f_at(r)
    }
}

fn rk4_segment(v: &PotentialSpec, r0: f64, h: f64, steps: usize, u0: f64, du0: f64, out: &mut Vec<(f64, f64, f64)>) {
    let acc = |r: f64, u: f64| 0.5 * v.eval(r) * u;
    let (mut u, mut p) = (u0, du0);
    for i in 0..steps {
        let r = r0 + i as f64 * h;
        let k1u = p;
        let k1p = acc(r, u);
        let k2u = p + 0.5 * h * k1p;
        let k2p = acc(r + 0.5 * h, u + 0.5 * h * k1u);
        let k3u = p + 0.5 * h * k2p;
        let k3p = acc(r + 0.5 * h, u + 0.5 * h * k2u);
        let k4u = p + h * k3p;
        let k4p = acc(r + h, u + h * k3u);
        u += h / 6.0 * (k1u + 2.0 * k2u + 2.0 * k3u + k4u);
        p += h / 6.0 * (k1p + 2.0 * k2p + 2.0 * k3p + k4p);
        out.push((r0 + (i + 1) as f64 * h, u, p));
    }
}

/// Integrates the zero-energy equation on (0, R_max] and extracts a₀.
pub fn solve_zero_energy(v: &PotentialSpec, r_max: f64, mesh: usize) -> Result<ScatteringSolution> {
    v.validate()?;
    if mesh < 16 {
        return Err(Error::Contract(format!("mesh of {mesh} nodes is too small")));
    }
    let support = v.support_radius().ok_or_else(|| {
        Error::Domain(format!("{:?} potential has no compact support", v.shape))
    })?;
    if support >= r_max {
        return Err(Error::Domain(format!(
            "potential support {support} reaches R_max = {r_max}"
        )));
    }
    // even node count on the inner segment keeps Simpson's rule applicable
    let n_in = (mesh / 2 + 1) & !1;
    let n_out = mesh - n_in;
    let mut nodes: Vec<(f64, f64, f64)> = Vec::with_capacity(mesh);
    let (hard_core, inner_support);
    if v.shape == Shape::HardSphere {
        let rc = support;
        hard_core = Some(rc);
        inner_support = rc;
        let h = rc / n_in as f64;
        for i in 1..=n_in {
            nodes.push((i as f64 * h, 0.0, if i == n_in { 1.0 } else { 0.0 }));
        }
    } else if support == 0.0 {
        hard_core = None;
        inner_support = 0.0;
    } else {
        hard_core = None;
        inner_support = support;
        rk4_segment(v, 0.0, support / n_in as f64, n_in, 0.0, 1.0, &mut nodes);
        if let Some(&(r, _, _)) = nodes.iter().find(|&&(_, u, _)| u <= 0.0) {
            return Err(Error::UnsupportedPotential(format!(
                "u changes sign at r = {r:.4}: bound state present"
            )));
        }
    }
    // exterior: V = 0, u is exactly linear
    let (ub, pb) = nodes.last().map(|&(_, u, p)| (u, p)).unwrap_or((0.0, 1.0));
    if pb <= 0.0 {
        return Err(Error::UnsupportedPotential("u decreases outside the support: bound state present".into()));
    }
    let (n_in, n_out) = if inner_support == 0.0 { (0, mesh) } else { (n_in, n_out) };
    let h_out = (r_max - inner_support) / n_out as f64;
    for i in 1..=n_out {
        let s = i as f64 * h_out;
        nodes.push((inner_support + s, ub + pb * s, pb));
    }

    // least-squares u = A r + B over the outer quarter of the mesh
    let tail = &nodes[nodes.len() - mesh / 4..];
    let n = tail.len() as f64;
    let mr = tail.iter().map(|t| t.0).sum::<f64>() / n;
    let mu = tail.iter().map(|t| t.1).sum::<f64>() / n;
    let srr: f64 = tail.iter().map(|t| (t.0 - mr).powi(2)).sum();
    let sru: f64 = tail.iter().map(|t| (t.0 - mr) * (t.1 - mu)).sum();
    let a = sru / srr;
    let b = mu - a * mr;
    let a0 = -b / a;

    let r: Vec<f64> = nodes.iter().map(|t| t.0).collect();
    let u: Vec<f64> = nodes.iter().map(|t| t.1 / a).collect();
    let du: Vec<f64> = nodes.iter().map(|t| t.2 / a).collect();
    let f: Vec<f64> = r.iter().zip(&u).map(|(r, u)| u / r).collect();
    let rho = if hard_core.is_some() { None } else { Some(smallness_parameter(v)?) };
    Ok(ScatteringSolution {
        r,
        u,
        du,
        f,
        a0,
        rho,
        support: inner_support,
        r_max,
        hard_core,
        inner_nodes: n_in,
        potential: v.clone(),
    })
}

fn simpson(h: f64, y: &[f64]) -> f64 {
    let n = y.len() - 1;
    debug_assert!(n.is_multiple_of(2));
    let mut s = y[0] + y[n];
    for (i, v) in y.iter().enumerate().take(n).skip(1) {
        s += if i % 2 == 1 { 4.0 * v } else { 2.0 * v };
    }
    s * h / 3.0
}

fn check_same_potential(sol: &ScatteringSolution, v: &PotentialSpec) -> Result<()> {
    if &sol.potential != v {
        return Err(Error::Contract("solution was computed for a different potential".into()));
    }
    Ok(())
}

/// (1/8π) ∫ V f d³x by Simpson quadrature over the support.
pub fn scattering_length_integral(sol: &ScatteringSolution, v: &PotentialSpec) -> Result<f64> {
    check_same_potential(sol, v)?;
    if sol.hard_core.is_some() {
        return Err(Error::Domain("the integral formula needs a finite potential".into()));
    }
    if sol.inner_nodes == 0 {
        return Ok(0.0);
    }
    // (1/8π) 4π ∫ r² V f dr = ½ ∫ r V u dr; integrand vanishes at r = 0
    let h = sol.support / sol.inner_nodes as f64;
    let mut y = vec![0.0];
    y.extend((0..sol.inner_nodes).map(|i| sol.r[i] * v.eval(sol.r[i]) * sol.u[i]));
    Ok(0.5 * simpson(h, &y))
}

/// ρ = sup r² V(r) + ∫₀^∞ r V(r) dr.
pub fn smallness_parameter(v: &PotentialSpec) -> Result<f64> {
    v.validate()?;
    if v.shape == Shape::HardSphere {
        return Err(Error::Domain("hard sphere has unbounded r² V".into()));
    }
    let support = v.support_radius().ok_or_else(|| {
        Error::Domain(format!("∫ r V dr diverges for the {:?} potential", v.shape))
    })?;
    if support == 0.0 {
        return Ok(0.0);
    }
    let h = support / RHO_MESH as f64;
    let rs: Vec<f64> = (0..=RHO_MESH).map(|i| i as f64 * h).collect();
    let sup = rs.iter().map(|&r| r * r * v.eval(r)).fold(f64::NEG_INFINITY, f64::max);
    let y: Vec<f64> = rs.iter().map(|&r| r * v.eval(r)).collect();
    Ok(sup + simpson(h, &y))
}

/// b₀ = ∫ V d³x, the Born coupling of the bare potential.
pub fn potential_integral(v: &PotentialSpec) -> Result<f64> {
    v.validate()?;
    if v.shape == Shape::HardSphere {
        return Err(Error::Domain("hard sphere has no finite integral".into()));
    }
    let support = v.support_radius().ok_or_else(|| {
        Error::Domain(format!("∫ V diverges for the {:?} potential", v.shape))
    })?;
    if support == 0.0 {
        return Ok(0.0);
    }
    let h = support / RHO_MESH as f64;
    let y: Vec<f64> = (0..=RHO_MESH).map(|i| (i as f64 * h).powi(2) * v.eval(i as f64 * h)).collect();
    Ok(4.0 * PI * simpson(h, &y))
}

/// Tightest constants in 1 - cρ ≤ f ≤ 1 and |∇f| ≤ cρ/r over the mesh.
#[derive(Clone, Debug, Serialize)]
pub struct FpropReport {
    /// max over the mesh of (1 - f)/ρ.
    pub c_value: f64,
    /// max over the mesh of r |f'| / ρ.
    pub c_gradient: f64,
    pub f_max: f64,
    pub monotone: bool,
    pub pass: bool,
}

pub fn verify_fprop_bounds(sol: &ScatteringSolution) -> Result<FpropReport> {
    let rho = sol
        .rho
        .ok_or_else(|| Error::Contract("smallness parameter undefined for this solution".into()))?;
    let ratio = |x: f64| if x == 0.0 { 0.0 } else { x / rho };
    let mut c_value: f64 = 0.0;
    let mut c_gradient: f64 = 0.0;
    let mut f_max = f64::NEG_INFINITY;
    for i in 0..sol.r.len() {
        let f = sol.f[i];
        // r f' = u' - u/r
        let rf = sol.du[i] - f;
        c_value = c_value.max(ratio(1.0 - f));
        c_gradient = c_gradient.max(ratio(rf.abs()));
        f_max = f_max.max(f);
    }
    let monotone = sol.f.windows(2).all(|w| w[1] >= w[0] - 1e-14);
    let pass = c_value.is_finite() && c_gradient.is_finite() && f_max <= 1.0 + 1e-10;
    Ok(FpropReport { c_value, c_gradient, f_max, monotone, pass })
}

/// Both sides of ∫|∇ω|² = ½ ∫ V ω (1 - ω) over ℝ³, which follows from -Δω = ½ V f.
pub fn gradient_energy_identity(sol: &ScatteringSolution) -> Result<(f64, f64)> {
    if sol.hard_core.is_some() {
        return Err(Error::Domain("identity needs a finite potential".into()));
    }
    if sol.inner_nodes == 0 {
        return Ok((0.0, 0.0));
    }
    let v = &sol.potential;
    let h = sol.support / sol.inner_nodes as f64;
    // r² ω'² = (u' - u/r)²; at r = 0 this vanishes
    let mut g = vec![0.0];
    let mut w = vec![0.0];
    for i in 0..sol.inner_nodes {
        let r = sol.r[i];
        let f = sol.f[i];
        g.push((sol.du[i] - f).powi(2));
        w.push(r * r * v.eval(r) * (1.0 - f) * f);
    }
    // exterior ω = a₀/r contributes 4π a₀²/R_V
    let lhs = 4.0 * PI * simpson(h, &g) + 4.0 * PI * sol.a0 * sol.a0 / sol.support;
    let rhs = 2.0 * PI * simpson(h, &w);
    Ok((lhs, rhs))
}
