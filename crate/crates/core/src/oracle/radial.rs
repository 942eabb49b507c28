//! Whole-space linear evolution of radial Gaussian data, reduced to a
//! one-dimensional integral in `r = |ξ|`.
//!
//! Data: `φ̂₀ = α e^{-r²/2}` and `m₀ = ∂₁(β G e₁)` with `Ĝ = e^{-r²/2}`, so
//! that `m̂₀ = iξ₁ β Ĝ e₁` carries both a longitudinal and a transverse
//! part. The angular dependence is polynomial in `c = ξ₁/r` and is averaged
//! exactly with `⟨c²⟩ = 1/n`, `⟨c⁴⟩ = 3/(n(n+2))`.

use crate::error::{NskError, Result};
use crate::params::PhysParams;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadialProfile {
    pub phi_amp: f64,
    pub m_amp: f64,
}

impl Default for RadialProfile {
    fn default() -> Self {
        Self { phi_amp: 1.0, m_amp: 1.0 }
    }
}

/// Area of the unit sphere in `Rⁿ` over `(2π)ⁿ`.
fn sphere_constant(dim: usize) -> f64 {
    let two_pi = 2.0 * std::f64::consts::PI;
    let area = match dim {
        1 => 2.0,
        2 => two_pi,
        3 => 2.0 * two_pi,
        _ => unreachable!("dimension checked by caller"),
    };
    area / two_pi.powi(dim as i32)
}

/// `sinh(s)/s` and `sin(s)/s` near zero.
fn sinhc_series(s2: f64) -> f64 {
    let mut term = 1.0;
    let mut acc = 1.0;
    for k in 1..12 {
        term *= s2 / ((2 * k) as f64 * (2 * k + 1) as f64);
        acc += term;
    }
    acc
}

fn cosh_series(s2: f64) -> f64 {
    let mut term = 1.0;
    let mut acc = 1.0;
    for k in 1..12 {
        term *= s2 / ((2 * k - 1) as f64 * (2 * k) as f64);
        acc += term;
    }
    acc
}

/// `e^{μt}cosh(ωt)` and `e^{μt}sinh(ωt)/ω` for the longitudinal 2×2 block,
/// `μ = -Aq`, `ω² = q²(A² - κ)`.
fn longitudinal_exp(q: f64, t: f64, a: f64, kappa: f64) -> (f64, f64) {
    let mu_t = -a * q * t;
    let disc = a * a - kappa;
    let s2 = q * q * t * t * disc;
    if s2.abs() < 0.25 {
        let e = mu_t.exp();
        return (e * cosh_series(s2), t * e * sinhc_series(s2));
    }
    let s = s2.abs().sqrt();
    if s2 > 0.0 {
        let (up, down) = ((mu_t + s).exp(), (mu_t - s).exp());
        (0.5 * (up + down), 0.5 * t * (up - down) / s)
    } else {
        let e = mu_t.exp();
        (e * s.cos(), t * e * s.sin() / s)
    }
}

fn integrand(r: f64, t: f64, k: u32, dim: usize, prof: &RadialProfile, params: &PhysParams<f64>) -> f64 {
    let q = r * r;
    let nu = params.nu();
    let a_visc = 0.5 * (nu + params.nu_tilde());
    let kappa = params.kappa();
    let (ec, es) = longitudinal_exp(q, t, a_visc, kappa);
    let (alpha, beta) = (prof.phi_amp, prof.m_amp);
    let c2 = 1.0 / dim as f64;
    let c4 = 3.0 / (dim as f64 * (dim as f64 + 2.0));
    let quad = |x: f64, y: f64| x * x + 2.0 * x * y * c2 + y * y * c4;
    let x1 = (ec + es * a_visc * q) * alpha;
    let y1 = es * q * beta;
    let x2 = -kappa * q * es * alpha;
    let y2 = beta * (ec - es * a_visc * q);
    let transverse = (-2.0 * nu * q * t).exp() * q * beta * beta * (c2 - c4);
    let density = quad(x1, y1) + q * quad(x2, y2) + transverse;
    density * (-q).exp() * r.powi(2 * k as i32 + dim as i32 - 1)
}

fn simpson(f: &impl Fn(f64) -> f64, a: f64, fa: f64, b: f64, fb: f64) -> (f64, f64) {
    let m = 0.5 * (a + b);
    let fm = f(m);
    ((b - a) / 6.0 * (fa + 4.0 * fm + fb), fm)
}

#[allow(clippy::too_many_arguments)]
fn adaptive(f: &impl Fn(f64) -> f64, a: f64, fa: f64, b: f64, fb: f64, fm: f64, whole: f64, tol: f64, depth: u32) -> f64 {
    let m = 0.5 * (a + b);
    let (left, flm) = simpson(f, a, fa, m, fm);
    let (right, frm) = simpson(f, m, fm, b, fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        return left + right + delta / 15.0;
    }
    adaptive(f, a, fa, m, fm, flm, left, 0.5 * tol, depth - 1) + adaptive(f, m, fm, b, fb, frm, right, 0.5 * tol, depth - 1)
}

/// `‖∇ᵏu(t)‖_{L²(Rⁿ)}` for the linear evolution of the radial data.
pub fn radial_linear_norm(t: f64, k: u32, profile: &RadialProfile, params: &PhysParams<f64>, dim: usize) -> Result<f64> {
    if !(1..=3).contains(&dim) {
        return Err(NskError::InvalidGrid(format!("radial oracle supports n = 1, 2, 3, got {dim}")));
    }
    let f = |r: f64| integrand(r, t, k, dim, profile, params);
    let scale = 1.0 / (1.0 + t).sqrt();
    let mut edges = vec![0.0];
    let mut r = scale / 64.0;
    while r < 12.0 {
        edges.push(r);
        r *= 2.0;
    }
    edges.push(12.0);
    let crude: f64 = edges.windows(2).map(|w| simpson(&f, w[0], f(w[0]), w[1], f(w[1])).0.abs()).sum();
    let tol = 1e-13 * crude / edges.len() as f64;
    let mut total = 0.0;
    for w in edges.windows(2) {
        let (fa, fb) = (f(w[0]), f(w[1]));
        let (whole, fm) = simpson(&f, w[0], fa, w[1], fb);
        total += adaptive(&f, w[0], fa, w[1], fb, fm, whole, tol, 40);
    }
    if !total.is_finite() {
        return Err(NskError::QuadratureFailure("radial integral not finite".into()));
    }
    Ok((sphere_constant(dim) * total).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn initial_norm_matches_gaussian_moments() {
        // t = 0, β = 0, n = 3: c₃∫e^{-r²}r²dr = (4π/(2π)³)·√π/4
        let p = PhysParams::unit_critical();
        let prof = RadialProfile { phi_amp: 1.0, m_amp: 0.0 };
        let v = radial_linear_norm(0.0, 0, &prof, &p, 3).unwrap();
        let exact = (4.0 * std::f64::consts::PI / (2.0 * std::f64::consts::PI).powi(3) * std::f64::consts::PI.sqrt() / 4.0).sqrt();
        assert!((v - exact).abs() < 1e-12 * exact);
    }

    #[test]
    fn exponential_branches_agree() {
        for (a, kappa) in [(1.0, 1.0), (1.0, 0.5), (1.0, 3.0)] {
            for q in [0.1, 0.49, 0.51, 2.0] {
                let (c, s) = longitudinal_exp(q, 1.0, a, kappa);
                // compare with a fine Taylor sum of exp(tM) on the (φ, p) block
                let m = [[0.0, 1.0], [-kappa * q * q, -2.0 * a * q]];
                let mut term = [[1.0, 0.0], [0.0, 1.0]];
                let mut sum = term;
                for j in 1..80 {
                    let mut next = [[0.0; 2]; 2];
                    for r in 0..2 {
                        for col in 0..2 {
                            next[r][col] = (term[r][0] * m[0][col] + term[r][1] * m[1][col]) / j as f64;
                        }
                    }
                    term = next;
                    for r in 0..2 {
                        for col in 0..2 {
                            sum[r][col] += term[r][col];
                        }
                    }
                }
                assert!((sum[0][1] - s).abs() < 1e-13, "a={a} κ={kappa} q={q}");
                assert!((sum[0][0] - (c + s * a * q)).abs() < 1e-13);
            }
        }
    }
}
