use schemars::JsonSchema;
use serde::{Deserialize, Serialize};

use super::grid::Grid;
use crate::error::{Error, Result};

/// Gaussians are treated as supported in `r <= GAUSSIAN_CUTOFF * range`; the dropped tail is below 1e-15.
pub const GAUSSIAN_CUTOFF: f64 = 6.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, JsonSchema)]
#[serde(rename_all = "kebab-case")]
pub enum Shape {
    Zero,
    /// amplitude * exp(-r²/range²)
    Gaussian,
    /// amplitude for r <= range
    SquareWell,
    /// infinite wall of radius `range`; scattering only
    HardSphere,
    /// amplitude / sqrt(r² + range²)
    SoftCoulomb,
    /// amplitude * r²; external traps
    Harmonic,
    /// linear interpolation of `table`, zero beyond the last node
    Tabulated,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct Table {
    pub r: Vec<f64>,
    pub v: Vec<f64>,
}

/// Radial potential `amplitude_factor * V(length_factor * r)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct PotentialSpec {
    pub shape: Shape,
    #[serde(default)]
    pub amplitude: f64,
    #[serde(default)]
    pub range: f64,
    #[serde(default)]
    pub table: Option<Table>,
    #[serde(default = "one")]
    pub amplitude_factor: f64,
    #[serde(default = "one")]
    pub length_factor: f64,
}

fn one() -> f64 {
    1.0
}

impl PotentialSpec {
    fn base(shape: Shape, amplitude: f64, range: f64) -> Self {
        PotentialSpec {
            shape,
            amplitude,
            range,
            table: None,
            amplitude_factor: 1.0,
            length_factor: 1.0,
        }
    }

    pub fn zero() -> Self {
        Self::base(Shape::Zero, 0.0, 0.0)
    }
    pub fn gaussian(amplitude: f64, range: f64) -> Self {
        Self::base(Shape::Gaussian, amplitude, range)
    }
    pub fn square_well(amplitude: f64, range: f64) -> Self {
        Self::base(Shape::SquareWell, amplitude, range)
    }
    pub fn hard_sphere(radius: f64) -> Self {
        Self::base(Shape::HardSphere, 0.0, radius)
    }
    pub fn soft_coulomb(amplitude: f64, range: f64) -> Self {
        Self::base(Shape::SoftCoulomb, amplitude, range)
    }
    pub fn harmonic(amplitude: f64) -> Self {
        Self::base(Shape::Harmonic, amplitude, 0.0)
    }
    pub fn tabulated(r: Vec<f64>, v: Vec<f64>) -> Self {
        let mut p = Self::base(Shape::Tabulated, 0.0, 0.0);
        p.table = Some(Table { r, v });
        p
    }

    /// N^{3α} V(N^α x).
    pub fn mean_field_rescaled(&self, alpha: f64, n: f64) -> Self {
        self.rescaled(n.powf(3.0 * alpha), n.powf(alpha))
    }

    /// N² V(N x), the Gross-Pitaevskii scaling.
    pub fn gp_rescaled(&self, n: f64) -> Self {
        self.rescaled(n * n, n)
    }

    /// s_a V(s_l x) applied on top of any existing rescaling.
    pub fn rescaled(&self, amp: f64, len: f64) -> Self {
        let mut p = self.clone();
        p.amplitude_factor *= amp;
        p.length_factor *= len;
        p
    }

    /// Multiplies the potential by `lambda`.
    pub fn scaled(&self, lambda: f64) -> Self {
        self.rescaled(lambda, 1.0)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Contract(format!("{:?} potential: {m}", self.shape)));
        if !self.amplitude.is_finite() || !(self.amplitude_factor.is_finite()) {
            return bad("non-finite amplitude");
        }
        if !(self.length_factor > 0.0 && self.length_factor.is_finite()) {
            return bad("length factor must be positive");
        }
        match self.shape {
            Shape::Gaussian | Shape::SquareWell | Shape::HardSphere | Shape::SoftCoulomb
                if !(self.range > 0.0) =>
            {
                bad("range must be positive")
            }
            Shape::Tabulated => match &self.table {
                None => bad("missing table"),
                Some(t) if t.r.len() != t.v.len() || t.r.len() < 2 => {
                    bad("table needs >= 2 nodes of equal length")
                }
                Some(t) if t.r.windows(2).any(|w| w[1] <= w[0]) || t.r[0] < 0.0 => {
                    bad("table radii must be nonnegative and increasing")
                }
                _ => Ok(()),
            },
            _ => Ok(()),
        }
    }

    pub fn is_zero(&self) -> bool {
        match self.shape {
            Shape::Zero => true,
            Shape::Tabulated => self
                .table
                .as_ref()
                .map(|t| t.v.iter().all(|&v| v == 0.0))
                .unwrap_or(true),
            Shape::HardSphere => false,
            _ => self.amplitude == 0.0 || self.amplitude_factor == 0.0,
        }
    }

    fn base_value(&self, r: f64) -> f64 {
        match self.shape {
            Shape::Zero => 0.0,
            Shape::Gaussian => self.amplitude * (-(r / self.range).powi(2)).exp(),
            Shape::SquareWell => {
                if r <= self.range {
                    self.amplitude
                } else {
                    0.0
                }
            }
            Shape::HardSphere => {
                if r < self.range {
                    f64::INFINITY
                } else {
                    0.0
                }
            }
            Shape::SoftCoulomb => self.amplitude / (r * r + self.range * self.range).sqrt(),
            Shape::Harmonic => self.amplitude * r * r,
            Shape::Tabulated => {
                let t = self.table.as_ref().expect("validated table");
                let n = t.r.len();
                if r <= t.r[0] {
                    t.v[0]
                } else if r >= t.r[n - 1] {
                    if r == t.r[n - 1] {
                        t.v[n - 1]
                    } else {
                        0.0
                    }
                } else {
                    let k = t.r.partition_point(|&x| x <= r) - 1;
                    let w = (r - t.r[k]) / (t.r[k + 1] - t.r[k]);
                    t.v[k] * (1.0 - w) + t.v[k + 1] * w
                }
            }
        }
    }

    /// Value at radius `r >= 0`.
    pub fn eval(&self, r: f64) -> f64 {
        if self.amplitude_factor == 0.0 {
            return 0.0;
        }
        self.amplitude_factor * self.base_value(self.length_factor * r)
    }

    /// Radius beyond which the potential vanishes, `None` when it never does.
    pub fn support_radius(&self) -> Option<f64> {
        let base = match self.shape {
            Shape::Zero => Some(0.0),
            Shape::Gaussian => Some(GAUSSIAN_CUTOFF * self.range),
            Shape::SquareWell | Shape::HardSphere => Some(self.range),
            Shape::SoftCoulomb | Shape::Harmonic => None,
            Shape::Tabulated => {
                let t = self.table.as_ref()?;
                let last = t.v.iter().rposition(|&v| v != 0.0);
                Some(last.map(|k| t.r[(k + 1).min(t.r.len() - 1)]).unwrap_or(0.0))
            }
        };
        if self.is_zero() {
            return Some(0.0);
        }
        base.map(|r| r / self.length_factor)
    }

    fn ensure_sampleable(&self) -> Result<()> {
        self.validate()?;
        if self.shape == Shape::HardSphere {
            return Err(Error::Contract(
                "hard-sphere potentials cannot be sampled on a grid".into(),
            ));
        }
        Ok(())
    }

    /// V at every minimum-image displacement of the grid (convolution kernel layout).
    pub fn sample_displacements(&self, grid: &Grid) -> Result<Vec<f64>> {
        self.ensure_sampleable()?;
        Ok((0..grid.len())
            .map(|i| self.eval(grid.displacement_radius(i)))
            .collect())
    }

    /// V(|x|) at every grid position (external-potential layout).
    pub fn sample_positions(&self, grid: &Grid) -> Result<Vec<f64>> {
        self.ensure_sampleable()?;
        Ok((0..grid.len())
            .map(|i| {
                let x = grid.position(i);
                self.eval((x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt())
            })
            .collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rescaling_at_alpha_zero_is_identity() {
        let v = PotentialSpec::gaussian(2.0, 0.7);
        let w = v.mean_field_rescaled(0.0, 17.0);
        for r in [0.0, 0.3, 1.1, 4.0] {
            assert_eq!(v.eval(r), w.eval(r));
        }
    }

    #[test]
    fn gp_rescaling_shrinks_support() {
        let v = PotentialSpec::square_well(1.0, 1.5);
        let w = v.gp_rescaled(4.0);
        assert_eq!(w.support_radius(), Some(1.5 / 4.0));
        assert_eq!(w.eval(0.2), 16.0);
        assert_eq!(w.eval(0.4), 0.0);
    }

    #[test]
    fn tabulated_interpolates_linearly() {
        let v = PotentialSpec::tabulated(vec![0.0, 1.0, 2.0], vec![2.0, 1.0, 0.0]);
        assert!((v.eval(0.5) - 1.5).abs() < 1e-15);
        assert_eq!(v.eval(3.0), 0.0);
        assert_eq!(v.support_radius(), Some(2.0));
    }

    #[test]
    fn hard_sphere_is_refused_on_grids() {
        let g = Grid::new(1, 4.0, 8).unwrap();
        assert!(PotentialSpec::hard_sphere(0.5).sample_displacements(&g).is_err());
    }

    #[test]
    fn config_rejects_unknown_keys() {
        let ok: PotentialSpec =
            serde_json::from_str(r#"{"shape":"gaussian","amplitude":1.0,"range":0.5}"#).unwrap();
        assert_eq!(ok, PotentialSpec::gaussian(1.0, 0.5));
        assert!(serde_json::from_str::<PotentialSpec>(r#"{"shape":"gaussian","amp":1.0}"#).is_err());
    }
}
