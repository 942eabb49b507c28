use crate::error::{NskError, Result};
use crate::pressure::PressureModel;
use crate::scalar::Scalar;

/// Default vacuum threshold for `1 + φ`.
pub const DEFAULT_RHO_MIN: f64 = 0.1;

/// Transport coefficients and pressure law.
///
/// `nu = μ`, `nu_tilde = μ + μ'`, `kappa` is the capillarity. The derived
/// `A = (ν+ν̃)/2` and `K = 2√κ/(ν+ν̃)` are computed on demand.
#[derive(Debug, Clone, PartialEq)]
pub struct PhysParams<T: Scalar> {
    nu: T,
    nu_tilde: T,
    kappa: T,
    pressure: PressureModel<T>,
    rho_min: T,
}

impl<T: Scalar> PhysParams<T> {
    pub fn new(nu: T, nu_tilde: T, kappa: T, pressure: PressureModel<T>) -> Result<Self> {
        if !(nu > T::zero()) {
            return Err(NskError::InvalidParams(format!("nu = {nu} must be positive")));
        }
        if !(kappa > T::zero()) {
            return Err(NskError::InvalidParams(format!("kappa = {kappa} must be positive")));
        }
        if !(nu + nu_tilde > T::zero()) {
            return Err(NskError::InvalidParams(format!(
                "nu + nu_tilde = {} must be positive",
                nu + nu_tilde
            )));
        }
        Ok(Self { nu, nu_tilde, kappa, pressure, rho_min: T::lit(DEFAULT_RHO_MIN) })
    }

    /// `ν = ν̃ = κ = 1` with `P = (ρ-1)²`: the double-root case `K = 1`.
    pub fn unit_critical() -> Self {
        Self::new(T::one(), T::one(), T::one(), PressureModel::critical_quadratic(T::one()))
            .expect("unit parameters are valid")
    }

    pub fn with_rho_min(mut self, rho_min: T) -> Result<Self> {
        if !(rho_min > T::zero() && rho_min < T::one()) {
            return Err(NskError::InvalidParams(format!("rho_min = {rho_min} must lie in (0, 1)")));
        }
        self.rho_min = rho_min;
        Ok(self)
    }

    pub fn with_kappa(&self, kappa: T) -> Result<Self> {
        Self::new(self.nu, self.nu_tilde, kappa, self.pressure.clone())?.with_rho_min(self.rho_min)
    }

    /// Checks `2μ/n + μ' ≥ 0`, i.e. `ν̃ ≥ ν(1 - 2/n)`.
    pub fn check_dimension(&self, dim: usize) -> Result<()> {
        let bound = self.nu * (T::one() - T::lit(2.0 / dim as f64));
        if self.nu_tilde < bound {
            return Err(NskError::InvalidParams(format!(
                "nu_tilde = {} violates nu_tilde >= nu (1 - 2/n) = {bound} for n = {dim}",
                self.nu_tilde
            )));
        }
        Ok(())
    }

    pub fn nu(&self) -> T {
        self.nu
    }

    pub fn nu_tilde(&self) -> T {
        self.nu_tilde
    }

    pub fn kappa(&self) -> T {
        self.kappa
    }

    pub fn pressure(&self) -> &PressureModel<T> {
        &self.pressure
    }

    pub fn rho_min(&self) -> T {
        self.rho_min
    }

    /// `A = (ν + ν̃)/2`.
    pub fn a(&self) -> T {
        (self.nu + self.nu_tilde) / T::lit(2.0)
    }

    /// `K = 2√κ/(ν + ν̃)`.
    pub fn k(&self) -> T {
        T::lit(2.0) * self.kappa.sqrt() / (self.nu + self.nu_tilde)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn derived_constants() {
        let p = PhysParams::<f64>::new(1.0, 1.0, 4.0, PressureModel::critical_quadratic(1.0)).unwrap();
        assert_eq!(p.a(), 1.0);
        assert_eq!(p.k(), 2.0);
        let q = p.with_kappa(1.0).unwrap();
        assert_eq!(q.k(), 1.0);
    }

    #[test]
    fn invalid_parameters_rejected() {
        let pm = PressureModel::critical_quadratic(1.0f64);
        assert!(PhysParams::new(0.0, 1.0, 1.0, pm.clone()).is_err());
        assert!(PhysParams::new(1.0, -1.0, 1.0, pm.clone()).is_err());
        assert!(PhysParams::new(1.0, 1.0, 0.0, pm.clone()).is_err());
        let p = PhysParams::new(1.0, 0.0, 1.0, pm).unwrap();
        assert!(p.check_dimension(2).is_ok());
        assert!(p.check_dimension(3).is_err());
    }
}
