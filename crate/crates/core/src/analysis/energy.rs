//! High-frequency energy functional `E` and dissipation `D`.
//!
//! Per mode, with `q = |ξ|²` and `w_s(q) = Σ_{j≤s} qʲ`,
//!
//! ```text
//! E = w_s(q)·(κ₁κ q|φ̂|² + κ₁|m̂|² + Re(m̂·conj(iξφ̂)))
//! D = w_s(q)·(q²|φ̂|² + q|m̂|²)
//! ```
//!
//! Multi-index sums over `|α| = j` are replaced by the rotation-invariant
//! weight `qʲ`.

use num_complex::Complex;

use crate::params::PhysParams;
use crate::scalar::{pairwise_sum_by, Scalar};
use crate::spectral::{ModeValues, SpectralState};
use crate::split::Cutoff;

/// Weights of the energy functional and the constants derived from them.
#[derive(Debug, Clone, PartialEq)]
pub struct EnergyWeights {
    pub s: u32,
    pub kappa: f64,
    pub nu: f64,
    pub nu_tilde: f64,
    pub kappa1: f64,
    /// `κ/2`.
    pub c2: f64,
    /// `(ν+ν̃)²/κ + 1`.
    pub c3: f64,
}

impl EnergyWeights {
    /// Weights with the smallest admissible `κ₁`.
    pub fn new<T: Scalar>(s: u32, params: &PhysParams<T>) -> Self {
        let nu = params.nu().to_f64_lossy();
        let nu_tilde = params.nu_tilde().to_f64_lossy();
        let kappa = params.kappa().to_f64_lossy();
        let c2 = kappa / 2.0;
        let c3 = (nu + nu_tilde).powi(2) / kappa + 1.0;
        let mut w = Self { s, kappa, nu, nu_tilde, kappa1: 0.0, c2, c3 };
        w.kappa1 = w.kappa1_min();
        w
    }

    /// Replaces `κ₁`, refusing values below [`Self::kappa1_min`].
    pub fn with_kappa1(mut self, kappa1: f64) -> Option<Self> {
        if !(kappa1 >= self.kappa1_min()) {
            return None;
        }
        self.kappa1 = kappa1;
        Some(self)
    }

    /// Viscosity available for damping the momentum; `ν + ν̃` if `ν̃ < 0`.
    pub fn effective_nu(&self) -> f64 {
        self.nu.min(self.nu + self.nu_tilde)
    }

    /// `max(1, 1/κ, 4c₃/ν, 2c₃/ν̃)`; the last entry is dropped for `ν̃ ≤ 0`.
    pub fn kappa1_min(&self) -> f64 {
        let nu = self.effective_nu();
        let mut k = 1f64.max(1.0 / self.kappa).max(4.0 * self.c3 / nu);
        if self.nu_tilde > 0.0 {
            k = k.max(2.0 * self.c3 / self.nu_tilde);
        }
        k
    }

    /// Dissipation rate `d₁` in `dE/dt + d₁D ≤ 0` for the linear flow.
    pub fn d1(&self) -> f64 {
        self.c2.min(self.kappa1 * self.effective_nu())
    }

    /// Constant `C` in `dE/dt + (d₁/2)D ≤ C‖P∞F‖²` with the forcing norm of
    /// [`forcing_norm_sq`].
    pub fn c_apriori(&self) -> f64 {
        self.kappa1 / self.effective_nu() + 1.0 / self.kappa
    }

    /// `C` with `C⁻¹‖u‖² ≤ E ≤ C‖u‖²` (`H^{s+1}×H^s`) for states supported
    /// in `|ξ| ≥ r1`.
    pub fn equivalence_constant(&self, r1: f64) -> f64 {
        let hi = self.kappa1 * self.kappa.max(1.0);
        let lo = self.kappa1 * self.kappa.min(1.0);
        (1.5 * hi).max(2.0 * (1.0 + 1.0 / (r1 * r1)) / lo)
    }

    /// `Σ_{j≤s} qʲ`.
    pub fn sobolev_weight(&self, q: f64) -> f64 {
        let mut acc = 0.0;
        let mut p = 1.0;
        for _ in 0..=self.s {
            acc += p;
            p *= q;
        }
        acc
    }

    /// `s < ⌊n/2⌋ + 1`: below the regularity the estimates assume.
    pub fn below_regularity(&self, dim: usize) -> bool {
        (self.s as usize) < dim / 2 + 1
    }
}

/// `(E, D)` contributions of one mode, without the Parseval weight.
pub fn mode_energy(xi: &[f64], v: &[Complex<f64>], w: &EnergyWeights) -> (f64, f64) {
    let q: f64 = xi.iter().map(|x| x * x).sum();
    let phi2 = v[0].norm_sqr();
    let m2: f64 = v[1..].iter().map(|c| c.norm_sqr()).sum();
    // Re(m̂·conj(iξφ̂)) = Re(-i (ξ·m̂) conj φ̂)
    let mut p = Complex::new(0.0, 0.0);
    for (x, m) in xi.iter().zip(&v[1..]) {
        p += m * *x;
    }
    let cross = (Complex::new(0.0, -1.0) * p * v[0].conj()).re;
    let ws = w.sobolev_weight(q);
    let e = ws * (w.kappa1 * w.kappa * q * phi2 + w.kappa1 * m2 + cross);
    let d = ws * (q * q * phi2 + q * m2);
    (e, d)
}

fn widen<T: Scalar>(v: &ModeValues<T>, dim: usize) -> [Complex<f64>; 4] {
    let mut out = [Complex::new(0.0, 0.0); 4];
    for c in 0..=dim {
        out[c] = Complex::new(v[c].re.to_f64_lossy(), v[c].im.to_f64_lossy());
    }
    out
}

fn xi_f64<T: Scalar>(u: &SpectralState<T>, i: usize) -> Vec<f64> {
    let dim = u.grid().dim();
    u.grid().wavevector(i)[..dim].iter().map(|x| x.to_f64_lossy()).collect()
}

/// `(E, D)` of a state, Parseval-weighted.
pub fn energy_functional<T: Scalar>(u: &SpectralState<T>, w: &EnergyWeights) -> (f64, f64) {
    let dim = u.grid().dim();
    let weight = u.grid().parseval_weight().to_f64_lossy();
    let e = pairwise_sum_by(u.grid().len(), &|i| {
        let v = widen(&u.mode(i), dim);
        mode_energy(&xi_f64(u, i), &v[..=dim], w).0
    });
    let d = pairwise_sum_by(u.grid().len(), &|i| {
        let v = widen(&u.mode(i), dim);
        mode_energy(&xi_f64(u, i), &v[..=dim], w).1
    });
    (e * weight, d * weight)
}

/// `‖u‖²_{H^{s+1}×H^s}` with `H^k` weight `Σ_{j≤k} qʲ`.
pub fn sobolev_norm_sq<T: Scalar>(u: &SpectralState<T>, s: u32) -> f64 {
    let dim = u.grid().dim();
    let weight = u.grid().parseval_weight().to_f64_lossy();
    let w = EnergyWeights { s, kappa: 1.0, nu: 1.0, nu_tilde: 1.0, kappa1: 1.0, c2: 0.5, c3: 1.0 };
    pairwise_sum_by(u.grid().len(), &|i| {
        let q = u.grid().wavenumber_sq(i).to_f64_lossy();
        let v = u.mode(i);
        let ws = w.sobolev_weight(q);
        let m2: f64 = v[1..=dim].iter().map(|c| c.norm_sqr().to_f64_lossy()).sum();
        (1.0 + q * ws) * v[0].norm_sqr().to_f64_lossy() + ws * m2
    }) * weight
}

/// `‖P∞F‖²` with weight `w_s(q)/q` on the momentum forcing.
pub fn forcing_norm_sq<T: Scalar>(
    forcing: &[Vec<Complex<T>>],
    cutoff: &Cutoff<T>,
    w: &EnergyWeights,
) -> f64 {
    let grid = cutoff.grid();
    let weight = grid.parseval_weight().to_f64_lossy();
    pairwise_sum_by(grid.len(), &|i| {
        let q = grid.wavenumber_sq(i).to_f64_lossy();
        if q == 0.0 {
            return 0.0;
        }
        let chi = cutoff.chi_inf(i).to_f64_lossy();
        let f2: f64 = forcing.iter().map(|c| c[i].norm_sqr().to_f64_lossy()).sum();
        chi * chi * w.sobolev_weight(q) / q * f2
    }) * weight
}

/// One sample for the discrete energy inequality.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergySample {
    pub t: f64,
    pub e: f64,
    pub d: f64,
    /// `‖P∞F‖²` at `t`.
    pub f_sq: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnergyReport {
    pub steps: usize,
    pub violations: usize,
    pub violation_fraction: f64,
    /// Dissipation coefficient used on the left side, `d₁/2`.
    pub d_used: f64,
    pub d1: f64,
    /// Smallest `C` making every step satisfy the inequality.
    pub c_fit: f64,
    pub c_apriori: f64,
    /// `allowed_factor · c_apriori`.
    pub c_allowed: f64,
    /// Largest `d` with `ΔE/Δt + d·D ≤ C_apriori‖F‖²` on every step.
    pub d_empirical: f64,
    pub pass: bool,
}

/// Relative slack absorbing rounding in `ΔE` when the forcing vanishes.
pub const ENERGY_ROUNDING_SLACK: f64 = 1e-12;

/// Checks `(E_{i+1} - E_i)/Δt + (d₁/2)D_i ≤ C‖F_i‖²` with
/// `C = allowed_factor · C_apriori` on consecutive samples.
pub fn energy_inequality_check(samples: &[EnergySample], w: &EnergyWeights, allowed_factor: f64) -> EnergyReport {
    let d1 = w.d1();
    let d_used = d1 / 2.0;
    let c_apriori = w.c_apriori();
    let c_allowed = allowed_factor * c_apriori;
    let mut violations = 0;
    let mut c_fit: f64 = 0.0;
    let mut d_emp = f64::INFINITY;
    for pair in samples.windows(2) {
        let (a, b) = (pair[0], pair[1]);
        let dt = b.t - a.t;
        let rate = (b.e - a.e) / dt;
        let slack = ENERGY_ROUNDING_SLACK * (a.e.abs() + b.e.abs()) / dt;
        let lhs = rate + d_used * a.d;
        if lhs > c_allowed * a.f_sq + slack {
            violations += 1;
        }
        if lhs > slack {
            c_fit = c_fit.max(if a.f_sq > 0.0 { (lhs - slack) / a.f_sq } else { f64::INFINITY });
        }
        if a.d > 0.0 {
            d_emp = d_emp.min((c_apriori * a.f_sq - rate + slack) / a.d);
        }
    }
    let steps = samples.len().saturating_sub(1);
    EnergyReport {
        steps,
        violations,
        violation_fraction: if steps > 0 { violations as f64 / steps as f64 } else { 0.0 },
        d_used,
        d1,
        c_fit,
        c_apriori,
        c_allowed,
        d_empirical: d_emp,
        pass: violations == 0 && c_fit <= c_allowed,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pressure::PressureModel;

    fn unit() -> EnergyWeights {
        EnergyWeights::new(2, &PhysParams::<f64>::unit_critical())
    }

    #[test]
    fn single_mode_example() {
        let w = EnergyWeights { s: 0, kappa: 1.0, nu: 1.0, nu_tilde: 1.0, kappa1: 1.0, c2: 0.5, c3: 5.0 };
        let v = [Complex::new(1.0, 0.0), Complex::new(0.0, 0.0)];
        let (e, d) = mode_energy(&[2.0], &v, &w);
        assert_eq!((e, d), (4.0, 16.0));
    }

    #[test]
    fn derived_constants_for_unit_parameters() {
        let w = unit();
        assert_eq!(w.c2, 0.5);
        assert_eq!(w.c3, 5.0);
        assert_eq!(w.kappa1, 20.0);
        assert_eq!(w.d1(), 0.5);
        assert_eq!(w.c_apriori(), 21.0);
        assert!(w.clone().with_kappa1(19.0).is_none());
        assert_eq!(w.with_kappa1(30.0).unwrap().kappa1, 30.0);
    }

    #[test]
    fn negative_bulk_viscosity_uses_the_reduced_rate() {
        let p = PhysParams::new(1.0, -0.5, 1.0, PressureModel::critical_quadratic(1.0)).unwrap();
        let w = EnergyWeights::new(1, &p);
        assert_eq!(w.effective_nu(), 0.5);
        assert_eq!(w.kappa1, 4.0 * w.c3 / 0.5);
    }

    #[test]
    fn linear_dissipation_rate_holds_per_mode() {
        // dE/dt + d₁D ≤ 0 for the linear flow, checked by central differences.
        use crate::propagator::mode_propagator;
        let params = PhysParams::new(0.7, 1.3, 2.0, PressureModel::critical_quadratic(1.0)).unwrap();
        let w = EnergyWeights::new(1, &params);
        let xi = [0.9, -1.4, 0.3];
        let v0 = [Complex::new(0.3, 0.1), Complex::new(-0.2, 0.5), Complex::new(0.1, 0.0), Complex::new(0.4, -0.3)];
        for &t in &[0.0, 0.05, 0.4, 1.5] {
            let h = 1e-5;
            let at = |s: f64| mode_propagator(xi, 3, s, &params).apply(v0);
            let (ep, _) = mode_energy(&xi, &at(t + h), &w);
            let (em, _) = mode_energy(&xi, &at((t - h).max(0.0)), &w);
            let (_, d) = mode_energy(&xi, &at(t), &w);
            let rate = (ep - em) / (t + h - (t - h).max(0.0));
            assert!(rate + w.d1() * d <= 1e-8 * d, "t={t}: {rate} + {}", w.d1() * d);
        }
    }

    #[test]
    fn inequality_check_detects_growth() {
        let w = unit();
        let decaying: Vec<EnergySample> =
            (0..20).map(|i| EnergySample { t: i as f64 * 0.1, e: (-(i as f64) * 0.1).exp(), d: 0.1, f_sq: 0.0 }).collect();
        let r = energy_inequality_check(&decaying, &w, 10.0);
        assert_eq!(r.violations, 0);
        assert!(r.pass);
        let growing: Vec<EnergySample> =
            (0..20).map(|i| EnergySample { t: i as f64 * 0.1, e: (i as f64 * 0.1).exp(), d: 0.1, f_sq: 0.0 }).collect();
        let r = energy_inequality_check(&growing, &w, 10.0);
        assert_eq!(r.violations, 19);
        assert!(!r.pass);
    }
}
