//! Time-weighted norm of a trajectory split into low and high frequencies:
//!
//! ```text
//! Z = sup Σ_{j=0,1} (1+t)^{n/4+j/2}‖∇ʲu₁‖
//!   + sup (1+t)^{n/4+1/2}‖u∞‖_{H^{s+1}×H^s}
//!   + (∫₀ᵀ ‖∇u∞‖²_{H^{s+1}×H^s} dt)^{1/2}
//!   + sup (1+t)^{n/4+1/2} (∫₀ᵗ e^{-C₂(t-τ)}(1+τ)^{-n/2-1}‖∇u∞‖² dτ)^{1/2}
//! ```
//!
//! Sups are taken over the sample mesh and integrals by the trapezoidal rule.

use num_complex::Complex;

use crate::analysis::energy::{sobolev_norm_sq, EnergyWeights};
use crate::scalar::{pairwise_sum_by, Scalar};
use crate::spectral::{Component, SpectralState};
use crate::split::Cutoff;

/// Norms of one sample entering the Z-norm.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ZSample {
    pub t: f64,
    /// `‖u₁‖`.
    pub low0: f64,
    /// `‖∇u₁‖`.
    pub low1: f64,
    /// `‖u∞‖_{H^{s+1}×H^s}`.
    pub high: f64,
    /// `‖∇u∞‖²_{H^{s+1}×H^s}`.
    pub high_grad_sq: f64,
}

impl ZSample {
    pub fn from_state<T: Scalar>(t: f64, u: &SpectralState<T>, cutoff: &Cutoff<T>, s: u32) -> Self {
        let low = cutoff.project_low(u);
        let high = cutoff.project_high(u);
        Self {
            t,
            low0: low.seminorm(0, Component::Both).to_f64_lossy(),
            low1: low.seminorm(1, Component::Both).to_f64_lossy(),
            high: sobolev_norm_sq(&high, s).sqrt(),
            high_grad_sq: gradient_sobolev_sq(&high, s),
        }
    }
}

/// `‖∇u‖²_{H^{s+1}×H^s}`.
pub fn gradient_sobolev_sq<T: Scalar>(u: &SpectralState<T>, s: u32) -> f64 {
    let g = u.grid();
    let dim = g.dim();
    let w = EnergyWeights { s, kappa: 1.0, nu: 1.0, nu_tilde: 1.0, kappa1: 1.0, c2: 0.5, c3: 1.0 };
    pairwise_sum_by(g.len(), &|i| {
        let q = g.wavenumber_sq(i).to_f64_lossy();
        let v = u.mode(i);
        let ws = w.sobolev_weight(q);
        let m2: f64 = v[1..=dim].iter().map(|c: &Complex<T>| c.norm_sqr().to_f64_lossy()).sum();
        q * ((1.0 + q * ws) * v[0].norm_sqr().to_f64_lossy() + ws * m2)
    }) * g.parseval_weight().to_f64_lossy()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ZNorm {
    pub components: [f64; 4],
    pub total: f64,
}

/// Running evaluation of the Z-norm over a growing sample mesh.
#[derive(Debug, Clone)]
pub struct ZAccumulator {
    dim: usize,
    c2: f64,
    sup_low: f64,
    sup_high: f64,
    dissipation_integral: f64,
    history: f64,
    sup_history: f64,
    last: Option<(f64, f64, f64)>,
}

impl ZAccumulator {
    pub fn new(dim: usize, c2: f64) -> Self {
        Self {
            dim,
            c2,
            sup_low: 0.0,
            sup_high: 0.0,
            dissipation_integral: 0.0,
            history: 0.0,
            sup_history: 0.0,
            last: None,
        }
    }

    pub fn push(&mut self, s: &ZSample) {
        let n4 = self.dim as f64 / 4.0;
        let one_t = 1.0 + s.t;
        self.sup_low = self.sup_low.max(one_t.powf(n4) * s.low0 + one_t.powf(n4 + 0.5) * s.low1);
        self.sup_high = self.sup_high.max(one_t.powf(n4 + 0.5) * s.high);
        let g = one_t.powf(-(self.dim as f64) / 2.0 - 1.0) * s.high_grad_sq;
        if let Some((t0, grad0, g0)) = self.last {
            let dt = s.t - t0;
            self.dissipation_integral += 0.5 * dt * (grad0 + s.high_grad_sq);
            // Trapezoid of e^{-C₂(t-τ)}g(τ) on [t0, t], carried forward exactly.
            let decay = (-self.c2 * dt).exp();
            self.history = decay * self.history + 0.5 * dt * (decay * g0 + g);
        }
        self.sup_history = self.sup_history.max(one_t.powf(n4 + 0.5) * self.history.max(0.0).sqrt());
        self.last = Some((s.t, s.high_grad_sq, g));
    }

    /// Current value of the history integral.
    pub fn history(&self) -> f64 {
        self.history
    }

    pub fn value(&self) -> ZNorm {
        let components = [self.sup_low, self.sup_high, self.dissipation_integral.sqrt(), self.sup_history];
        ZNorm { components, total: components.iter().sum() }
    }
}

/// Z-norm of a sampled trajectory with strictly increasing times.
pub fn z_norm(samples: &[ZSample], dim: usize, c2: f64) -> ZNorm {
    let mut acc = ZAccumulator::new(dim, c2);
    for s in samples {
        acc.push(s);
    }
    acc.value()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample(t: f64) -> ZSample {
        ZSample { t, low0: 0.0, low1: 0.0, high: 0.0, high_grad_sq: 0.0 }
    }

    #[test]
    fn zero_trajectory() {
        let s: Vec<ZSample> = (0..10).map(|i| sample(i as f64)).collect();
        let z = z_norm(&s, 3, 1.0);
        assert_eq!(z.total, 0.0);
    }

    #[test]
    fn weights_cancel_for_exact_low_decay() {
        let s: Vec<ZSample> =
            (0..100).map(|i| ZSample { low0: (1.0 + i as f64).powf(-0.75), ..sample(i as f64) }).collect();
        let z = z_norm(&s, 3, 1.0);
        assert!((z.components[0] - 1.0).abs() < 1e-14);
        assert_eq!(&z.components[1..], &[0.0, 0.0, 0.0]);
    }

    #[test]
    fn history_term_matches_closed_form() {
        // ‖∇u∞‖ = e^{-t}, C₂ = 2: e^{-2t}∫₀ᵗ(1+τ)^{-5/2}dτ = e^{-2t}(1-(1+t)^{-3/2})/(3/2).
        let dt = 1e-3;
        let mut acc = ZAccumulator::new(3, 2.0);
        for i in 0..=5000 {
            let t = i as f64 * dt;
            acc.push(&ZSample { high_grad_sq: (-2.0 * t).exp(), ..sample(t) });
            if i % 500 == 0 {
                let exact = (-2.0 * t).exp() * (1.0 - (1.0 + t).powf(-1.5)) / 1.5;
                assert!((acc.history() - exact).abs() < 1e-6, "t={t}");
            }
        }
    }
}
