//! Least-squares decay exponents against `(1+t)^{-n/4-k/2}`.

use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::error::{NskError, Result};

/// Minimum number of samples inside a fit window.
pub const MIN_WINDOW_SAMPLES: usize = 10;

/// Default tolerance on the fitted exponent.
pub const DEFAULT_DECAY_TOL: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecayWindow {
    pub t_a: f64,
    pub t_b: f64,
}

impl DecayWindow {
    /// `1 ≤ t_a < t_b`, and `t_b ≤ 0.1(L/2π)²` when a box length is given.
    pub fn validate(&self, box_length: Option<f64>) -> Result<()> {
        if !(self.t_a >= 1.0 && self.t_b > self.t_a) {
            return Err(NskError::InvalidWindow(format!(
                "need 1 <= t_a < t_b, got [{}, {}]",
                self.t_a, self.t_b
            )));
        }
        if let Some(l) = box_length {
            let limit = 0.1 * (l / (2.0 * std::f64::consts::PI)).powi(2);
            if self.t_b > limit {
                return Err(NskError::InvalidWindow(format!(
                    "t_b = {} exceeds the spectral-gap limit {limit:.4e} for L = {l}",
                    self.t_b
                )));
            }
        }
        Ok(())
    }
}

/// `-n/4 - k/2`.
pub fn target_exponent(dim: usize, k: u32) -> f64 {
    -(dim as f64) / 4.0 - k as f64 / 2.0
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecayFit {
    pub window: DecayWindow,
    pub exponent: f64,
    /// 95% confidence half-width of the slope.
    pub half_width: f64,
    pub target: f64,
    pub tol: f64,
    pub samples: usize,
    pub pass: bool,
}

/// Slope of `log‖·‖` against `log(1+t)` over the samples in `window`.
pub fn decay_fit(times: &[f64], norms: &[f64], k: u32, dim: usize, window: DecayWindow, tol: f64) -> Result<DecayFit> {
    if window.t_b <= window.t_a {
        return Err(NskError::InvalidWindow(format!("empty window [{}, {}]", window.t_a, window.t_b)));
    }
    let pts: Vec<(f64, f64)> = times
        .iter()
        .zip(norms)
        .filter(|(&t, _)| t >= window.t_a && t <= window.t_b)
        .map(|(&t, &v)| ((1.0 + t).ln(), v))
        .collect();
    if pts.len() < MIN_WINDOW_SAMPLES {
        return Err(NskError::InsufficientWindow { got: pts.len(), needed: MIN_WINDOW_SAMPLES });
    }
    if let Some(&(_, v)) = pts.iter().find(|(_, v)| !(*v > 0.0)) {
        return Err(NskError::InvalidWindow(format!("non-positive norm {v} in window")));
    }
    let n = pts.len() as f64;
    let xm = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let ym = pts.iter().map(|p| p.1.ln()).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - xm).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - xm) * (p.1.ln() - ym)).sum();
    let slope = sxy / sxx;
    let intercept = ym - slope * xm;
    let rss: f64 = pts.iter().map(|p| (p.1.ln() - intercept - slope * p.0).powi(2)).sum();
    let se = (rss / (n - 2.0) / sxx).sqrt();
    let quantile = StudentsT::new(0.0, 1.0, n - 2.0).map(|d| d.inverse_cdf(0.975)).unwrap_or(f64::NAN);
    let target = target_exponent(dim, k);
    Ok(DecayFit {
        window,
        exponent: slope,
        half_width: quantile * se,
        target,
        tol,
        samples: pts.len(),
        pass: (slope - target).abs() <= tol,
    })
}

/// Ordinary least-squares slope and intercept of `y` on `x`.
pub fn ols(x: &[f64], y: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let xm = x.iter().sum::<f64>() / n;
    let ym = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|v| (v - xm).powi(2)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - xm) * (b - ym)).sum();
    let slope = sxy / sxx;
    (slope, ym - slope * xm)
}

/// Log-spaced sample times on `[t_a, t_b]`.
pub fn log_times(t_a: f64, t_b: f64, count: usize) -> Vec<f64> {
    let (la, lb) = (t_a.ln(), t_b.ln());
    let mut t: Vec<f64> = (0..count).map(|i| (la + (lb - la) * i as f64 / (count - 1) as f64).exp()).collect();
    t[0] = t_a;
    t[count - 1] = t_b;
    t
}
