//! Smooth low/high frequency multipliers `P₁`, `P∞` with `χ̂₁ + χ̂∞ = 1`.
//!
//! These are multipliers, not projections: `χ̂₁² ≠ χ̂₁` in the transition band.

use crate::error::{NskError, Result};
use crate::scalar::Scalar;
use crate::spectral::{Grid, SpectralState};

/// `g(s)`: 1 for `s ≤ 0`, 0 for `s ≥ 1`, smooth in between with
/// `g(s) + g(1-s) = 1`.
pub fn transition<T: Scalar>(s: T) -> T {
    if s <= T::zero() {
        return T::one();
    }
    if s >= T::one() {
        return T::zero();
    }
    let h = |x: T| (-T::one() / x).exp();
    let a = h(T::one() - s);
    a / (h(s) + a)
}

#[derive(Debug, Clone)]
pub struct Cutoff<T: Scalar> {
    grid: Grid<T>,
    r1: T,
    r_inf: T,
    chi1: Vec<T>,
}

impl<T: Scalar> Cutoff<T> {
    pub fn r1(&self) -> T {
        self.r1
    }

    pub fn r_inf(&self) -> T {
        self.r_inf
    }

    pub fn grid(&self) -> &Grid<T> {
        &self.grid
    }

    /// `χ̂₁` per mode.
    pub fn chi1(&self) -> &[T] {
        &self.chi1
    }

    #[inline]
    pub fn chi_inf(&self, flat: usize) -> T {
        T::one() - self.chi1[flat]
    }

    pub fn project_low(&self, state: &SpectralState<T>) -> SpectralState<T> {
        assert_eq!(state.grid(), &self.grid, "cutoff built on another grid");
        state.apply_multiplier(|i| self.chi1[i])
    }

    pub fn project_high(&self, state: &SpectralState<T>) -> SpectralState<T> {
        assert_eq!(state.grid(), &self.grid, "cutoff built on another grid");
        state.apply_multiplier(|i| self.chi_inf(i))
    }

    /// Checks `‖u‖ ≤ ‖∇u‖/r1` for a state without low modes and returns
    /// the realized ratio `‖u‖/‖∇u‖`.
    pub fn poincare_constant_check(&self, state: &SpectralState<T>) -> Result<PoincareReport> {
        use crate::spectral::Component;
        let g = &self.grid;
        let total = state.weighted_square(Component::Both, |_| T::one());
        let low = state.weighted_square(Component::Both, |i| {
            if g.wavenumber_sq(i).sqrt() < self.r1 {
                T::one()
            } else {
                T::zero()
            }
        });
        if total > T::zero() && low > T::lit(1e-13) * total {
            return Err(NskError::SupportViolation((low / total).to_f64_lossy()));
        }
        let l2 = total.sqrt().to_f64_lossy();
        let h1 = state.seminorm(1, Component::Both).to_f64_lossy();
        let ratio = if h1 > 0.0 { l2 / h1 } else { 0.0 };
        let bound = 1.0 / self.r1.to_f64_lossy();
        Ok(PoincareReport { ratio, bound, holds: ratio <= bound * (1.0 + 1e-12) })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PoincareReport {
    /// `‖u‖/‖∇u‖`.
    pub ratio: f64,
    /// `1/r1`.
    pub bound: f64,
    pub holds: bool,
}

/// Builds `χ̂₁(ξ) = g((|ξ| - r1)/(r_inf - r1))` on every mode.
pub fn make_cutoff<T: Scalar>(grid: &Grid<T>, r1: T, r_inf: T) -> Result<Cutoff<T>> {
    if !(r1 > T::zero() && r1 < r_inf) {
        return Err(NskError::InvalidCutoff(format!("need 0 < r1 < r_inf, got r1={r1}, r_inf={r_inf}")));
    }
    if r_inf > grid.max_radius() {
        return Err(NskError::InvalidCutoff(format!(
            "r_inf={r_inf} exceeds the resolvable radius {}",
            grid.max_radius()
        )));
    }
    let width = r_inf - r1;
    let chi1 = (0..grid.len()).map(|i| transition((grid.wavenumber_sq(i).sqrt() - r1) / width)).collect();
    Ok(Cutoff { grid: grid.clone(), r1, r_inf, chi1 })
}
