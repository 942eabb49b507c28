//! Pressure laws with a critical point at the reference density `ρ = 1`.

use crate::error::{NskError, Result};
use crate::scalar::Scalar;

/// Tolerance on `|P'(1)|` for a model to count as critical.
pub const CRITICAL_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub enum PressureLaw<T> {
    /// `P(ρ) = c (ρ - 1)²`.
    CriticalQuadratic { c: T },
    /// `P(ρ) = θρ/(1 - bρ) - aρ²`.
    VanDerWaals { a: T, b: T, theta: T },
    /// `P(ρ) = Σ_j c_j (ρ - 1)^j`, a user-supplied coefficient table.
    Taylor { coeffs: Vec<T> },
}

/// A pressure law together with the density range on which it is smooth.
#[derive(Debug, Clone, PartialEq)]
pub struct PressureModel<T> {
    law: PressureLaw<T>,
    critical: bool,
}

fn factorial(k: usize) -> f64 {
    (1..=k).map(|v| v as f64).product()
}

impl<T: Scalar> PressureModel<T> {
    pub fn critical_quadratic(c: T) -> Self {
        Self { law: PressureLaw::CriticalQuadratic { c }, critical: true }
    }

    /// Van der Waals law; rejected unless `P'(1) = 0`.
    pub fn van_der_waals(a: T, b: T, theta: T) -> Result<Self> {
        if !(b > T::zero() && b < T::one()) {
            return Err(NskError::InvalidPressure(format!("co-volume b = {b} must lie in (0, 1)")));
        }
        Self { law: PressureLaw::VanDerWaals { a, b, theta }, critical: true }.checked()
    }

    /// Van der Waals law with the temperature fixed so that `P'(1) = 0`.
    pub fn van_der_waals_critical(a: T, b: T) -> Result<Self> {
        let one_minus_b = T::one() - b;
        Self::van_der_waals(a, b, T::lit(2.0) * a * one_minus_b * one_minus_b)
    }

    /// Coefficients of `(ρ - 1)^j`; `coeffs[1]` must vanish.
    pub fn taylor(coeffs: Vec<T>) -> Result<Self> {
        Self { law: PressureLaw::Taylor { coeffs }, critical: true }.checked()
    }

    /// Accepts a law with `P'(1) ≠ 0`. The linear propagator ignores `P'(1)`,
    /// so such runs are outside the critical regime.
    pub fn allow_noncritical(law: PressureLaw<T>) -> Self {
        let mut model = Self { law, critical: true };
        model.critical = model.derivative(1, T::one()).abs() <= T::lit(CRITICAL_TOL);
        model
    }

    fn checked(self) -> Result<Self> {
        let dp = self.derivative(1, T::one());
        if !(dp.abs() <= T::lit(CRITICAL_TOL)) {
            return Err(NskError::InvalidPressure(format!(
                "P'(1) = {:e}; the model must satisfy the critical condition P'(1) = 0",
                dp.to_f64_lossy()
            )));
        }
        Ok(self)
    }

    pub fn law(&self) -> &PressureLaw<T> {
        &self.law
    }

    pub fn is_critical(&self) -> bool {
        self.critical
    }

    /// Upper end of the smooth density range.
    pub fn max_density(&self) -> T {
        match &self.law {
            PressureLaw::VanDerWaals { b, .. } => T::one() / *b,
            _ => T::infinity(),
        }
    }

    pub fn pressure(&self, rho: T) -> T {
        self.derivative(0, rho)
    }

    /// `dᵏP/dρᵏ` at `rho`.
    pub fn derivative(&self, order: usize, rho: T) -> T {
        match &self.law {
            PressureLaw::CriticalQuadratic { c } => {
                let x = rho - T::one();
                match order {
                    0 => *c * x * x,
                    1 => T::lit(2.0) * *c * x,
                    2 => T::lit(2.0) * *c,
                    _ => T::zero(),
                }
            }
            PressureLaw::VanDerWaals { a, b, theta } => {
                let s = T::one() - *b * rho;
                let attractive = match order {
                    0 => *a * rho * rho,
                    1 => T::lit(2.0) * *a * rho,
                    2 => T::lit(2.0) * *a,
                    _ => T::zero(),
                };
                let repulsive = if order == 0 {
                    *theta * rho / s
                } else {
                    *theta * T::lit(factorial(order)) * b.powi(order as i32 - 1) / s.powi(order as i32 + 1)
                };
                repulsive - attractive
            }
            PressureLaw::Taylor { coeffs } => {
                let x = rho - T::one();
                let mut acc = T::zero();
                for j in (order..coeffs.len()).rev() {
                    let falling = T::lit(factorial(j) / factorial(j - order));
                    acc = acc * x + coeffs[j] * falling;
                }
                acc
            }
        }
    }
}
