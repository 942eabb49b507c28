//! Radial evaluation of the low-frequency kernel norm
//!
//! ```text
//! ‖K₁₂(t)‖² = c_n ∫₀^{2a} |D₁(t; r)|² r⁴ χ̂₀(r)² r^{n-1} dr
//! ```
//!
//! where `χ̂₀ = 1` on `r ≤ a`, vanishes for `r ≥ 2a`, and `a = r_inf`
//! unless scaled.

use crate::analysis::decay::ols;
use crate::error::{NskError, Result};
use crate::params::PhysParams;
use crate::propagator::{divided_difference, eigenvalues};
use crate::quadrature::integrate;
use crate::split::transition;

/// `|S^{n-1}|/(2π)ⁿ`.
pub fn radial_constant(dim: usize) -> f64 {
    let tau = 2.0 * std::f64::consts::PI;
    match dim {
        1 => 2.0 / tau,
        2 => tau / tau.powi(2),
        _ => 2.0 * tau / tau.powi(3),
    }
}

/// `‖K₁₂(t)‖²` for a kernel supported in `r ≤ 2a`.
pub fn k12_norm_sq(t: f64, params: &PhysParams<f64>, dim: usize, a: f64) -> Result<f64> {
    if !(t > 0.0) {
        return Err(NskError::InvalidWindow(format!("t = {t} must be positive")));
    }
    let integrand = |r: f64| {
        let eig = eigenvalues(r * r, params);
        let d1 = divided_difference(eig.lambda_plus, eig.lambda_minus, t).norm_sqr();
        let chi = transition((r - a) / a);
        d1 * r.powi(4) * chi * chi * r.powi(dim as i32 - 1)
    };
    let mut breaks = vec![0.0];
    let scale = 1.0 / t.sqrt();
    let mut j = -4;
    while scale * 2f64.powi(j) < 2.0 * a {
        breaks.push(scale * 2f64.powi(j));
        j += 1;
    }
    breaks.push(a);
    breaks.push(2.0 * a);
    breaks.sort_by(f64::total_cmp);
    breaks.dedup();
    Ok(radial_constant(dim) * integrate(integrand, &breaks, 1e-10, 0.0, 4000)?)
}

#[derive(Debug, Clone, PartialEq)]
pub struct K12Report {
    pub times: Vec<f64>,
    pub norms: Vec<f64>,
    /// Slope of `log‖K₁₂‖` against `log t`.
    pub exponent: f64,
    /// `-n/4`.
    pub target: f64,
    pub slack: f64,
    pub pass: bool,
}

/// Default slack on the fitted exponent.
pub const K12_SLACK: f64 = 0.03;

/// Fits the decay exponent of `‖K₁₂(t)‖` over `times`; passes iff it is at
/// most `-n/4 + slack`.
pub fn k12_bound_check(times: &[f64], params: &PhysParams<f64>, dim: usize, a: f64, slack: f64) -> Result<K12Report> {
    let norms = times.iter().map(|&t| k12_norm_sq(t, params, dim, a).map(f64::sqrt)).collect::<Result<Vec<_>>>()?;
    let x: Vec<f64> = times.iter().map(|t| t.ln()).collect();
    let y: Vec<f64> = norms.iter().map(|v| v.ln()).collect();
    let (exponent, _) = ols(&x, &y);
    let target = -(dim as f64) / 4.0;
    Ok(K12Report { times: times.to_vec(), norms, exponent, target, slack, pass: exponent <= target + slack })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::decay::log_times;
    use crate::pressure::PressureModel;

    #[test]
    fn overdamped_kernel_has_laplace_scaling() {
        // K < 1: the squared norm decays like t^{-n/2} once the slow rate dominates.
        let p = PhysParams::new(1.0, 1.0, 0.25, PressureModel::critical_quadratic(1.0)).unwrap();
        let t = log_times(1e3, 1e5, 12);
        let sq: Vec<f64> = t.iter().map(|&t| k12_norm_sq(t, &p, 3, 2.0).unwrap()).collect();
        let x: Vec<f64> = t.iter().map(|t| t.ln()).collect();
        let y: Vec<f64> = sq.iter().map(|v| v.ln()).collect();
        let (slope, _) = ols(&x, &y);
        assert!((slope + 1.5).abs() < 0.02, "{slope}");
    }

    #[test]
    fn radial_constants() {
        assert!((radial_constant(3) - 4.0 * std::f64::consts::PI / (8.0 * std::f64::consts::PI.powi(3))).abs() < 1e-16);
        assert!(k12_norm_sq(0.0, &PhysParams::unit_critical(), 3, 2.0).is_err());
    }
}
