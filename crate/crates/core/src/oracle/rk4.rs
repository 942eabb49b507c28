//! Classical Runge-Kutta integration of the per-mode linear ODE.

use num_complex::Complex;

use crate::error::{NskError, Result};
use crate::params::PhysParams;

type C = Complex<f64>;

/// Stability guard: `dt·(ν + ν̃ + √κ)|ξ|²` must stay below this.
pub const RK4_GUARD: f64 = 0.5;

fn rhs(xi: &[f64], u: &[C; 4], nu: f64, nu_t: f64, kappa: f64) -> [C; 4] {
    let q: f64 = xi.iter().map(|x| x * x).sum();
    let mut xm = C::new(0.0, 0.0);
    for (j, x) in xi.iter().enumerate() {
        xm += u[1 + j] * *x;
    }
    let i = C::new(0.0, 1.0);
    let mut out = [C::new(0.0, 0.0); 4];
    out[0] = -i * xm;
    for (j, x) in xi.iter().enumerate() {
        out[1 + j] = -u[1 + j] * (nu * q) - xm * (nu_t * x) - i * u[0] * (kappa * q * x);
    }
    out
}

fn axpy(a: &[C; 4], s: f64, b: &[C; 4]) -> [C; 4] {
    let mut out = *a;
    for (o, y) in out.iter_mut().zip(b) {
        *o += y * s;
    }
    out
}

/// Integrates `∂ₜφ̂ = -iξ·m̂`, `∂ₜm̂ = -ν|ξ|²m̂ - ν̃ξ(ξ·m̂) - iκ|ξ|²ξφ̂` from 0 to
/// `t` with uniform steps no longer than `dt`.
pub fn rk4_mode(xi: &[f64], u0: &[C], t: f64, dt: f64, params: &PhysParams<f64>) -> Result<Vec<C>> {
    assert!(xi.len() <= 3, "at most three dimensions");
    assert_eq!(u0.len(), xi.len() + 1, "mode vector must hold 1 + n entries");
    let (nu, nu_t, kappa) = (params.nu(), params.nu_tilde(), params.kappa());
    let q: f64 = xi.iter().map(|x| x * x).sum();
    let rate = dt * (nu + nu_t.abs() + kappa.sqrt()) * q;
    if rate >= RK4_GUARD {
        return Err(NskError::StabilityGuard(rate));
    }
    if t <= 0.0 {
        return Ok(u0.to_vec());
    }
    let steps = (t / dt).ceil().max(1.0) as usize;
    let h = t / steps as f64;
    let mut u = [C::new(0.0, 0.0); 4];
    u[..u0.len()].copy_from_slice(u0);
    for _ in 0..steps {
        let k1 = rhs(xi, &u, nu, nu_t, kappa);
        let k2 = rhs(xi, &axpy(&u, h / 2.0, &k1), nu, nu_t, kappa);
        let k3 = rhs(xi, &axpy(&u, h / 2.0, &k2), nu, nu_t, kappa);
        let k4 = rhs(xi, &axpy(&u, h, &k3), nu, nu_t, kappa);
        for c in 0..4 {
            u[c] += (k1[c] + (k2[c] + k3[c]) * 2.0 + k4[c]) * (h / 6.0);
        }
    }
    Ok(u[..u0.len()].to_vec())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_frequency_is_constant() {
        let p = PhysParams::unit_critical();
        let u0 = [C::new(1.0, 2.0), C::new(-0.5, 0.0), C::new(0.0, 3.0)];
        let u = rk4_mode(&[0.0, 0.0], &u0, 5.0, 0.1, &p).unwrap();
        assert_eq!(u, u0.to_vec());
    }

    #[test]
    fn transverse_component_decays_like_heat() {
        let p = PhysParams::unit_critical();
        let u0 = [C::new(0.0, 0.0), C::new(0.0, 0.0), C::new(1.0, -1.0)];
        let t = 0.7;
        let u = rk4_mode(&[1.3, 0.0], &u0, t, 1e-3, &p).unwrap();
        let exact = u0[2] * (-1.69 * t).exp();
        assert!((u[2] - exact).norm() < 1e-10);
        assert!(u[0].norm() < 1e-14 && u[1].norm() < 1e-14);
    }

    #[test]
    fn fourth_order_convergence() {
        let p = PhysParams::new(1.0, 0.5, 2.0, crate::PressureModel::critical_quadratic(1.0)).unwrap();
        let xi = [1.0, 0.6];
        let u0 = [C::new(0.4, 0.1), C::new(1.0, 0.0), C::new(-0.3, 0.2)];
        let reference = rk4_mode(&xi, &u0, 1.0, 1e-4, &p).unwrap();
        let err = |dt: f64| {
            let u = rk4_mode(&xi, &u0, 1.0, dt, &p).unwrap();
            u.iter().zip(&reference).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>().sqrt()
        };
        let (e1, e2) = (err(0.02), err(0.01));
        let order = (e1 / e2).log2();
        assert!((3.7..=4.3).contains(&order), "observed order {order}");
    }

    #[test]
    fn guard_rejects_large_steps() {
        let p = PhysParams::unit_critical();
        let u0 = [C::new(1.0, 0.0), C::new(0.0, 0.0)];
        assert!(matches!(rk4_mode(&[10.0], &u0, 1.0, 0.01, &p), Err(NskError::StabilityGuard(_))));
    }
}
