use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Values at or below this are treated as numerical zero; fits over them are refused.
pub const FIT_FLOOR: f64 = 1e-12;

/// y ≈ prefactor · g(x)^exponent from ordinary least squares in log space.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub exponent: f64,
    pub prefactor: f64,
    /// Euclidean norm of the log-space residuals.
    pub residual: f64,
    pub points: Vec<[f64; 2]>,
}

fn ols(x: &[f64], y: &[f64]) -> (f64, f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    let icpt = my - slope * mx;
    let res = x
        .iter()
        .zip(y)
        .map(|(a, b)| (b - icpt - slope * a).powi(2))
        .sum::<f64>()
        .sqrt();
    (slope, icpt, res)
}

fn validate(xs: &[f64], ys: &[f64]) -> Result<()> {
    if xs.len() != ys.len() {
        return Err(Error::Shape("fit abscissae and ordinates differ in length".into()));
    }
    if xs.len() < 3 {
        return Err(Error::Fit(format!("need at least 3 points, got {}", xs.len())));
    }
    if ys.iter().any(|&y| !(y > FIT_FLOOR) || !y.is_finite()) {
        return Err(Error::Fit("degenerate data: values at numerical floor".into()));
    }
    Ok(())
}

/// Power law y = C x^p.
pub fn fit_power_law(xs: &[f64], ys: &[f64]) -> Result<FitResult> {
    validate(xs, ys)?;
    if xs.iter().any(|&x| !(x > 0.0)) {
        return Err(Error::Fit("power-law abscissae must be positive".into()));
    }
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let (p, a, r) = ols(&lx, &ly);
    if !p.is_finite() {
        return Err(Error::Fit("degenerate abscissae".into()));
    }
    Ok(FitResult {
        exponent: p,
        prefactor: a.exp(),
        residual: r,
        points: xs.iter().zip(ys).map(|(&x, &y)| [x, y]).collect(),
    })
}

/// Exponential y = C e^{K t}.
pub fn fit_exponential(ts: &[f64], ys: &[f64]) -> Result<FitResult> {
    validate(ts, ys)?;
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let (k, a, r) = ols(ts, &ly);
    if !k.is_finite() {
        return Err(Error::Fit("degenerate abscissae".into()));
    }
    Ok(FitResult {
        exponent: k,
        prefactor: a.exp(),
        residual: r,
        points: ts.iter().zip(ys).map(|(&x, &y)| [x, y]).collect(),
    })
}

/// Exponential envelope D e^{K t} lying above every sample.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Envelope {
    pub rate: f64,
    pub prefactor: f64,
    /// Quadratic coefficient q of the log-space fit a + b t + q t².
    pub curvature: f64,
    /// Set when q T² > ln 2: growth outruns any single exponential by more than a factor two over the window.
    pub super_exponential: bool,
    pub fit: FitResult,
}

pub fn exponential_envelope(ts: &[f64], ys: &[f64]) -> Result<Envelope> {
    let fit = fit_exponential(ts, ys)?;
    let a = fit.prefactor.ln();
    let lift = ts
        .iter()
        .zip(ys)
        .map(|(t, y)| y.ln() - a - fit.exponent * t)
        .fold(f64::NEG_INFINITY, f64::max)
        .max(0.0);
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let q = quadratic_coefficient(ts, &ly);
    let span = ts.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
        - ts.iter().cloned().fold(f64::INFINITY, f64::min);
    Ok(Envelope {
        rate: fit.exponent,
        prefactor: (a + lift).exp(),
        curvature: q,
        super_exponential: q * span * span > std::f64::consts::LN_2,
        fit,
    })
}

/// Leading coefficient of the least-squares parabola through (t, y).
fn quadratic_coefficient(t: &[f64], y: &[f64]) -> f64 {
    let n = t.len() as f64;
    let m = t.iter().sum::<f64>() / n;
    let u: Vec<f64> = t.iter().map(|x| x - m).collect();
    let s = |p: i32| u.iter().map(|x| x.powi(p)).sum::<f64>();
    let sy = |p: i32| u.iter().zip(y).map(|(x, v)| x.powi(p) * v).sum::<f64>();
    let a = nalgebra::Matrix3::new(n, s(1), s(2), s(1), s(2), s(3), s(2), s(3), s(4));
    let b = nalgebra::Vector3::new(sy(0), sy(1), sy(2));
    a.lu().solve(&b).map(|v| v[2]).unwrap_or(0.0)
}
