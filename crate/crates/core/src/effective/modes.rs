use super::wave::{Scheme, MAX_PHASE};
use crate::error::{Error, Result};
use crate::numerics::linalg::{norm, unitary_step, CMat};
use crate::numerics::ModeModel;
use crate::C64;

/// Discrete Hartree flow i ċ = h c + diag(V|c|²) c on a finite mode model.
///
/// Same splitting as the grid solver: the one-body part is a dense matrix exponential,
/// the interaction part a diagonal phase.
pub struct ModeHartree {
    pub model: ModeModel,
    pub scheme: Scheme,
}

#[derive(Clone, Debug, Default)]
pub struct ModeTrajectory {
    pub times: Vec<f64>,
    pub states: Vec<Vec<C64>>,
    pub energy: Vec<f64>,
}

impl ModeHartree {
    pub fn new(model: ModeModel) -> Self {
        ModeHartree { model, scheme: Scheme::default() }
    }

    fn potential_flow(&self, c: &mut [C64], tau: f64) -> Result<()> {
        let pot = self.model.direct_potential(c);
        let worst = pot.iter().fold(0.0f64, |m, v| m.max(v.abs())) * tau.abs();
        if worst > MAX_PHASE {
            return Err(Error::Numerical(format!("interaction phase {worst:.3} per substep exceeds π/4")));
        }
        c.iter_mut().zip(pot).for_each(|(z, v)| *z *= C64::from_polar(1.0, -v * tau));
        Ok(())
    }

    fn kinetic_flow(u: &CMat, c: &mut [C64]) {
        let out: Vec<C64> = (0..c.len()).map(|i| (0..c.len()).map(|j| u[(i, j)] * c[j]).sum()).collect();
        c.copy_from_slice(&out);
    }

    fn propagators(&self, tau: f64) -> Vec<CMat> {
        self.scheme.weights().iter().map(|w| unitary_step(&self.model.one_body, w * tau)).collect()
    }

    fn step_with(&self, c: &mut [C64], tau: f64, props: &[CMat]) -> Result<()> {
        for (w, u) in self.scheme.weights().iter().zip(props) {
            self.potential_flow(c, 0.5 * w * tau)?;
            Self::kinetic_flow(u, c);
            self.potential_flow(c, 0.5 * w * tau)?;
        }
        Ok(())
    }

    /// One step of size `tau` (any sign).
    pub fn step(&self, c: &mut [C64], tau: f64) -> Result<()> {
        let props = self.propagators(tau);
        self.step_with(c, tau, &props)
    }

    /// Evolves to time `t` with steps of at most `dt`, recording `samples + 1` states.
    pub fn solve(&self, c0: &[C64], t: f64, dt: f64, samples: usize) -> Result<ModeTrajectory> {
        if c0.len() != self.model.modes() {
            return Err(Error::Shape(format!("{} coefficients for {} modes", c0.len(), self.model.modes())));
        }
        if (norm(c0) - 1.0).abs() > 1e-10 {
            return Err(Error::Contract("initial coefficients must be normalized".into()));
        }
        let samples = samples.max(1);
        let steps = ((t.abs() / dt).ceil() as usize).max(1).div_ceil(samples) * samples;
        let tau = t / steps as f64;
        let props = self.propagators(tau);
        let mut c = c0.to_vec();
        let mut tr = ModeTrajectory::default();
        tr.times.push(0.0);
        tr.energy.push(self.model.hartree_energy(&c));
        tr.states.push(c.clone());
        for s in 0..steps {
            self.step_with(&mut c, tau, &props)?;
            if (s + 1) % (steps / samples) == 0 {
                tr.times.push((s + 1) as f64 * tau);
                tr.energy.push(self.model.hartree_energy(&c));
                tr.states.push(c.clone());
            }
        }
        Ok(tr)
    }

    /// ∂_t c from single integrator steps of ±δ, ±2δ (fourth-order central stencil).
    ///
    /// The result is independent of the vector field, so comparing it against
    /// (h + V*|c|²)c tests the trajectory rather than restating the equation.
    pub fn trajectory_derivative(&self, c: &[C64], delta: f64) -> Result<Vec<C64>> {
        let shifted = |tau: f64| -> Result<Vec<C64>> {
            let mut x = c.to_vec();
            self.step(&mut x, tau)?;
            Ok(x)
        };
        let (p1, m1, p2, m2) = (shifted(delta)?, shifted(-delta)?, shifted(2.0 * delta)?, shifted(-2.0 * delta)?);
        Ok((0..c.len())
            .map(|i| (8.0 * (p1[i] - m1[i]) - (p2[i] - m2[i])) / (12.0 * delta))
            .collect())
    }
}
