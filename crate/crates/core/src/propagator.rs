//! Exact per-mode solution operator of the linearized system
//!
//! ```text
//! ∂ₜφ̂ + iξ·m̂ = 0
//! ∂ₜm̂ + ν|ξ|²m̂ + ν̃ξ(ξ·m̂) + iκ|ξ|²ξφ̂ = 0
//! ```
//!
//! The momentum splits into a transverse part, damped by `e^{-ν|ξ|²t}`, and a
//! longitudinal part `ξ·m̂` coupled to `φ̂` through a 2×2 block with
//! eigenvalues `λ± = -A|ξ|²(1 ± √(1-K²))`. Every block is written in terms of
//! the divided difference `D₁(t) = (e^{λ₊t} - e^{λ₋t})/(λ₊ - λ₋)`, which stays
//! accurate through the double root `K = 1`.

use num_complex::Complex;
use num_traits::{One, Zero};

use crate::params::PhysParams;
use crate::phi::phi1;
use crate::scalar::Scalar;
use crate::spectral::{ModeValues, SpectralState, MAX_DIM};

/// Sign of `1 - K²`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    /// `K < 1`: two distinct real rates.
    Overdamped,
    /// `K = 1`: double root.
    Critical,
    /// `K > 1`: complex-conjugate pair.
    Oscillatory,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EigenPair<T> {
    pub lambda_plus: Complex<T>,
    pub lambda_minus: Complex<T>,
    pub regime: Regime,
}

/// Roots of `λ² + 2A|ξ|²λ + κ|ξ|⁴ = 0`.
pub fn eigenvalues<T: Scalar>(xi_sq: T, params: &PhysParams<T>) -> EigenPair<T> {
    let a = params.a();
    // 1 - K² = (A² - κ)/A², formed without squaring K.
    let disc = (a * a - params.kappa()) / (a * a);
    let (root, regime) = if disc > T::zero() {
        (Complex::new(disc.sqrt(), T::zero()), Regime::Overdamped)
    } else if disc < T::zero() {
        (Complex::new(T::zero(), (-disc).sqrt()), Regime::Oscillatory)
    } else {
        (Complex::zero(), Regime::Critical)
    };
    let base = -a * xi_sq;
    EigenPair {
        lambda_plus: (Complex::<T>::one() + root) * base,
        lambda_minus: (Complex::<T>::one() - root) * base,
        regime,
    }
}

/// `D₁(t) = (e^{λ₊t} - e^{λ₋t})/(λ₊ - λ₋)`, equal to `t·e^{λt}` when the
/// rates coincide. Evaluated as `e^{λ₋t}·t·φ₁((λ₊ - λ₋)t)`.
pub fn divided_difference<T: Scalar>(lp: Complex<T>, lm: Complex<T>, t: T) -> Complex<T> {
    (lm * t).exp() * t * phi1((lp - lm) * t)
}

/// The `(1+n)×(1+n)` propagator of one mode in factored form.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModePropagator<T> {
    pub xi: [T; MAX_DIM],
    pub dim: usize,
    pub s11: Complex<T>,
    /// Row acting on `m̂`: `-i D₁ ξᵀ`.
    pub s12: [Complex<T>; MAX_DIM],
    /// Column acting on `φ̂`: `-i κ|ξ|² D₁ ξ`.
    pub s21: [Complex<T>; MAX_DIM],
    /// Transverse factor `e^{-ν|ξ|²t}`.
    pub s22_transverse: Complex<T>,
    /// Coefficient of `ξξᵀ/|ξ|²` added to the transverse factor.
    pub s22_longitudinal: Complex<T>,
}

impl<T: Scalar> ModePropagator<T> {
    pub fn identity(xi: [T; MAX_DIM], dim: usize) -> Self {
        Self {
            xi,
            dim,
            s11: Complex::one(),
            s12: [Complex::zero(); MAX_DIM],
            s21: [Complex::zero(); MAX_DIM],
            s22_transverse: Complex::one(),
            s22_longitudinal: Complex::zero(),
        }
    }

    fn xi_sq(&self) -> T {
        self.xi.iter().fold(T::zero(), |acc, &v| acc + v * v)
    }

    /// Applies the propagator to `[φ̂, m̂]`.
    #[inline]
    pub fn apply(&self, v: ModeValues<T>) -> ModeValues<T> {
        let q = self.xi_sq();
        if q == T::zero() {
            return v;
        }
        let mut p = Complex::zero();
        let mut s12m = Complex::zero();
        for j in 0..self.dim {
            p = p + v[1 + j] * self.xi[j];
            s12m = s12m + self.s12[j] * v[1 + j];
        }
        let mut out = [Complex::zero(); 1 + MAX_DIM];
        out[0] = self.s11 * v[0] + s12m;
        let longitudinal = self.s22_longitudinal * p / q;
        for j in 0..self.dim {
            out[1 + j] = self.s22_transverse * v[1 + j] + longitudinal * self.xi[j] + self.s21[j] * v[0];
        }
        out
    }

    /// Dense matrix, row-major, for inspection and tests.
    pub fn to_dense(&self) -> Vec<Vec<Complex<T>>> {
        let n = self.dim;
        let q = self.xi_sq();
        let mut m = vec![vec![Complex::zero(); n + 1]; n + 1];
        m[0][0] = self.s11;
        for j in 0..n {
            m[0][1 + j] = self.s12[j];
            m[1 + j][0] = self.s21[j];
            for l in 0..n {
                let mut v = if j == l { self.s22_transverse } else { Complex::zero() };
                if q > T::zero() {
                    v = v + self.s22_longitudinal * (self.xi[j] * self.xi[l] / q);
                }
                m[1 + j][1 + l] = v;
            }
        }
        m
    }
}

/// Propagator `S(t; ξ)`; the identity at `ξ = 0`, where the system reduces to
/// `∂ₜφ̂ = 0, ∂ₜm̂ = 0`.
pub fn mode_propagator<T: Scalar>(
    xi: [T; MAX_DIM],
    dim: usize,
    t: T,
    params: &PhysParams<T>,
) -> ModePropagator<T> {
    let q = xi.iter().take(dim).fold(T::zero(), |acc, &v| acc + v * v);
    if q == T::zero() {
        return ModePropagator::identity(xi, dim);
    }
    let eig = eigenvalues(q, params);
    let (lp, lm) = (eig.lambda_plus, eig.lambda_minus);
    let d1 = divided_difference(lp, lm, t);
    // λ₊ is the faster rate when real; these groupings keep both sums free of
    // cancellation in the overdamped regime.
    let s11 = (lm * t).exp() - lm * d1;
    let longitudinal_total = (lp * t).exp() + lm * d1;
    let transverse = Complex::new((-params.nu() * q * t).exp(), T::zero());
    let minus_i = Complex::new(T::zero(), -T::one());
    let mut s12 = [Complex::zero(); MAX_DIM];
    let mut s21 = [Complex::zero(); MAX_DIM];
    for j in 0..dim {
        s12[j] = minus_i * d1 * xi[j];
        s21[j] = minus_i * d1 * (params.kappa() * q * xi[j]);
    }
    ModePropagator {
        xi,
        dim,
        s11,
        s12,
        s21,
        s22_transverse: transverse,
        s22_longitudinal: longitudinal_total - transverse,
    }
}

/// `S(t)u`, mode by mode.
pub fn apply_semigroup<T: Scalar>(state: &SpectralState<T>, t: T, params: &PhysParams<T>) -> SpectralState<T> {
    let grid = state.grid();
    let dim = grid.dim();
    state.map_modes(|i, v| mode_propagator(grid.wavevector(i), dim, t, params).apply(v))
}
