use std::f64::consts::PI;

use schemars::JsonSchema;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::manybody::check_resolution;
use crate::numerics::{Fourier, Grid, PotentialSpec};
use crate::scattering::ScatteringSolution;
use crate::C64;

/// Largest phase rotation a potential substep may apply.
pub const MAX_PHASE: f64 = PI / 4.0;

/// Fourth-order triple-jump weights.
pub(crate) const YOSHIDA: [f64; 3] = {
    let cbrt2 = 1.259_921_049_894_873_2;
    let w1 = 1.0 / (2.0 - cbrt2);
    [w1, -cbrt2 / (2.0 - cbrt2), w1]
};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, JsonSchema)]
#[serde(rename_all = "kebab-case")]
pub enum Scheme {
    Strang,
    /// Strang steps composed with the triple-jump weights.
    #[default]
    Yoshida4,
}

impl Scheme {
    pub(crate) fn weights(self) -> &'static [f64] {
        match self {
            Scheme::Strang => &[1.0],
            Scheme::Yoshida4 => &YOSHIDA,
        }
    }
}

/// Self-interaction term of a one-particle wave equation.
#[derive(Clone, Debug)]
pub enum Nonlinearity {
    None,
    /// (K * |φ|²) with K sampled on minimum-image displacements.
    Convolution(Vec<f64>),
    /// g |φ|².
    Local(f64),
}

/// i∂_t φ = -Δφ + V_ext φ + N(φ)φ on a periodic grid, split into exact kinetic and
/// potential flows. The potential substep is exact because it leaves |φ| unchanged.
#[derive(Clone)]
pub struct WaveSolver {
    pub grid: Grid,
    fourier: Fourier,
    v_ext: Vec<f64>,
    nonlinearity: Nonlinearity,
    pub scheme: Scheme,
}

#[derive(Clone, Debug, Default)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<Vec<C64>>,
    pub mass: Vec<f64>,
    pub energy: Vec<f64>,
}

impl Trajectory {
    pub fn last(&self) -> &[C64] {
        self.states.last().expect("trajectory holds the initial state")
    }
    pub fn max_mass_drift(&self) -> f64 {
        self.mass.iter().map(|m| (m - self.mass[0]).abs()).fold(0.0, f64::max)
    }
    pub fn max_energy_drift(&self) -> f64 {
        let e0 = self.energy[0];
        self.energy.iter().map(|e| (e - e0).abs() / e0.abs().max(1.0)).fold(0.0, f64::max)
    }
}

impl WaveSolver {
    pub fn new(grid: &Grid, v_ext: &PotentialSpec, nonlinearity: Nonlinearity) -> Result<Self> {
        grid.validate()?;
        if let Nonlinearity::Convolution(k) = &nonlinearity {
            grid.check_len(k.len(), "interaction kernel")?;
        }
        Ok(WaveSolver {
            grid: grid.clone(),
            fourier: Fourier::new(grid),
            v_ext: v_ext.sample_positions(grid)?,
            nonlinearity,
            scheme: Scheme::default(),
        })
    }

    /// Hartree: K = V.
    pub fn hartree(grid: &Grid, v_ext: &PotentialSpec, v: &PotentialSpec) -> Result<Self> {
        Self::new(grid, v_ext, Nonlinearity::Convolution(v.sample_displacements(grid)?))
    }

    /// Gross-Pitaevskii with local coupling 8π a₀.
    pub fn gross_pitaevskii(grid: &Grid, v_ext: &PotentialSpec, a0: f64) -> Result<Self> {
        if !(a0 >= 0.0) {
            return Err(Error::Contract(format!("scattering length must be nonnegative, got {a0}")));
        }
        Self::new(grid, v_ext, Nonlinearity::Local(8.0 * PI * a0))
    }

    /// Modified Gross-Pitaevskii with kernel N^d V(N·) f(N·).
    pub fn gp_modified(grid: &Grid, v_ext: &PotentialSpec, sol: &ScatteringSolution, n: usize) -> Result<Self> {
        let kernel = modified_kernel(grid, sol, n)?;
        Self::new(grid, v_ext, Nonlinearity::Convolution(kernel))
    }

    pub fn nonlinearity(&self) -> &Nonlinearity {
        &self.nonlinearity
    }

    fn density(&self, phi: &[C64]) -> Vec<f64> {
        phi.iter().map(|z| z.norm_sqr()).collect()
    }

    /// V_ext + N(φ) on the grid.
    pub fn potential(&self, phi: &[C64]) -> Vec<f64> {
        let rho = self.density(phi);
        let mut p = self.v_ext.clone();
        match &self.nonlinearity {
            Nonlinearity::None => {}
            Nonlinearity::Convolution(k) => {
                let c = self.fourier.convolve(k, &rho);
                p.iter_mut().zip(c).for_each(|(a, b)| *a += b);
            }
            Nonlinearity::Local(g) => p.iter_mut().zip(&rho).for_each(|(a, r)| *a += g * r),
        }
        p
    }

    fn potential_flow(&self, phi: &mut [C64], tau: f64) -> Result<()> {
        let p = self.potential(phi);
        let worst = p.iter().fold(0.0f64, |m, v| m.max(v.abs())) * tau.abs();
        if worst > MAX_PHASE {
            return Err(Error::Numerical(format!(
                "potential phase {worst:.3} per substep exceeds π/4; reduce dt"
            )));
        }
        phi.iter_mut().zip(p).for_each(|(z, v)| *z *= C64::from_polar(1.0, -v * tau));
        Ok(())
    }

    fn kinetic_flow(&self, phi: &mut [C64], tau: f64) {
        self.fourier.forward(phi);
        for (i, z) in phi.iter_mut().enumerate() {
            *z *= C64::from_polar(1.0, -self.grid.k_squared(i) * tau);
        }
        self.fourier.inverse(phi);
    }

    fn strang(&self, phi: &mut [C64], tau: f64) -> Result<()> {
        self.potential_flow(phi, 0.5 * tau)?;
        self.kinetic_flow(phi, tau);
        self.potential_flow(phi, 0.5 * tau)
    }

    pub fn step(&self, phi: &mut [C64], dt: f64) -> Result<()> {
        for &w in self.scheme.weights() {
            self.strang(phi, w * dt)?;
        }
        Ok(())
    }

    pub fn mass(&self, phi: &[C64]) -> f64 {
        self.grid.cell_volume() * phi.iter().map(|z| z.norm_sqr()).sum::<f64>()
    }

    /// ∫|∇φ|² + ∫V_ext|φ|² + interaction (½∫(K*|φ|²)|φ|² or (g/2)∫|φ|⁴).
    pub fn energy(&self, phi: &[C64]) -> f64 {
        let w = self.grid.cell_volume();
        let lap = self.fourier.laplacian(phi, 1.0);
        let kin: f64 = phi.iter().zip(&lap).map(|(a, b)| (a.conj() * b).re).sum::<f64>() * w;
        let rho = self.density(phi);
        let ext: f64 = rho.iter().zip(&self.v_ext).map(|(r, v)| r * v).sum::<f64>() * w;
        let int = match &self.nonlinearity {
            Nonlinearity::None => 0.0,
            Nonlinearity::Convolution(k) => {
                let c = self.fourier.convolve(k, &rho);
                0.5 * w * rho.iter().zip(c).map(|(r, v)| r * v).sum::<f64>()
            }
            Nonlinearity::Local(g) => 0.5 * g * w * rho.iter().map(|r| r * r).sum::<f64>(),
        };
        kin + ext + int
    }

    /// Evolves to `t` in steps of `dt`, recording `samples + 1` evenly spaced states.
    pub fn solve(&self, phi0: &[C64], t: f64, dt: f64, samples: usize) -> Result<Trajectory> {
        self.grid.check_len(phi0.len(), "initial state")?;
        let m0 = self.mass(phi0);
        if (m0 - 1.0).abs() > 1e-10 {
            return Err(Error::Contract(format!("initial state has mass {m0}, expected 1")));
        }
        if !(dt > 0.0) {
            return Err(Error::Contract("dt must be positive".into()));
        }
        let samples = samples.max(1);
        let steps = ((t.abs() / dt).round() as usize).max(1);
        let steps = steps.div_ceil(samples) * samples;
        let h = t / steps as f64;
        let mut tr = Trajectory::default();
        let mut phi = phi0.to_vec();
        let record = |tr: &mut Trajectory, time: f64, phi: &[C64]| {
            tr.times.push(time);
            tr.mass.push(self.mass(phi));
            tr.energy.push(self.energy(phi));
            tr.states.push(phi.to_vec());
        };
        record(&mut tr, 0.0, &phi);
        for s in 0..steps {
            self.step(&mut phi, h)?;
            if (s + 1) % (steps / samples) == 0 {
                record(&mut tr, (s + 1) as f64 * h, &phi);
            }
        }
        Ok(tr)
    }
}

/// N^d V(N|x|) f(N|x|) on the grid's minimum-image displacements.
pub fn modified_kernel(grid: &Grid, sol: &ScatteringSolution, n: usize) -> Result<Vec<f64>> {
    let v = &sol.potential;
    check_resolution(grid, v, n)?;
    let nf = n as f64;
    let scaled = v.rescaled(nf.powi(grid.dim as i32), nf);
    Ok((0..grid.len())
        .map(|i| {
            let r = grid.displacement_radius(i);
            scaled.eval(r) * sol.f_at(nf * r)
        })
        .collect())
}

/// ∫ V(|x|) f(|x|) dx over ℝ^d; equals 8π a₀ in three dimensions.
pub fn kernel_mass(sol: &ScatteringSolution, dim: usize) -> Result<f64> {
    let v = &sol.potential;
    let r_v = v
        .support_radius()
        .ok_or_else(|| Error::Domain("kernel mass needs a compactly supported potential".into()))?;
    if r_v == 0.0 {
        return Ok(0.0);
    }
    let n = 20_000;
    let h = r_v / n as f64;
    let shell = |r: f64| match dim {
        1 => 2.0,
        3 => 4.0 * PI * r * r,
        _ => unreachable!("grids are 1D or 3D"),
    };
    let y: Vec<f64> = (0..=n)
        .map(|i| {
            let r = i as f64 * h;
            shell(r) * v.eval(r) * sol.f_at(r)
        })
        .collect();
    let mut s = y[0] + y[n];
    for (i, val) in y.iter().enumerate().take(n).skip(1) {
        s += if i % 2 == 1 { 4.0 * val } else { 2.0 * val };
    }
    Ok(s * h / 3.0)
}

/// Normalized Gaussian wave packet e^{-|x-x₀|²/(2w²) + i k·x} on the grid.
pub fn gaussian_packet(grid: &Grid, center: [f64; 3], width: f64, momentum: [f64; 3]) -> Vec<C64> {
    let mut phi: Vec<C64> = (0..grid.len())
        .map(|i| {
            let x = grid.position(i);
            let mut r2 = 0.0;
            let mut phase = 0.0;
            for a in 0..grid.dim {
                let d = x[a] - center[a];
                r2 += d * d;
                phase += momentum[a] * x[a];
            }
            C64::from_polar((-r2 / (2.0 * width * width)).exp(), phase)
        })
        .collect();
    let m = grid.cell_volume() * phi.iter().map(|z| z.norm_sqr()).sum::<f64>();
    phi.iter_mut().for_each(|z| *z /= m.sqrt());
    phi
}
