//! Pseudo-spectral evaluation of the nonlinear momentum forcing
//!
//! ```text
//! F = -{ div(a m⊗m) + ∇(P₂(φ)φ²) - νΔv - ν̃∇div v - div Φ(φ) },
//! a = 1/(1+φ),  v = P₁(φ)φ m,
//! Φ(φ) = κ{(φΔφ + |∇φ|²/2) I - ∇φ⊗∇φ}
//! ```
//!
//! with `P₁(φ) = -1/(1+φ)` and `P₂(φ) = ∫₀¹(1-τ)P''(1+τφ)dτ`. Products and
//! rational factors are formed on the grid, derivatives are multipliers, and
//! the 2/3 rule is applied to every product input and to the result.

use std::sync::OnceLock;

use num_complex::Complex;
use num_traits::Zero;
use rayon::prelude::*;

use crate::error::{NskError, Result};
use crate::params::PhysParams;
use crate::pressure::PressureModel;
use crate::quadrature::gauss_legendre_unit;
use crate::scalar::Scalar;
use crate::spectral::{Grid, SpectralState};

/// Number of Gauss-Legendre nodes used for `P₂`.
pub const P2_NODES: usize = 16;

fn p2_rule() -> &'static (Vec<f64>, Vec<f64>) {
    static RULE: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    RULE.get_or_init(|| gauss_legendre_unit(P2_NODES))
}

/// Rejects fields whose density `1 + φ` leaves `(ρ_min, ρ_max)`.
pub fn check_density<T: Scalar>(phi: &[T], rho_min: T, rho_max: T) -> Result<()> {
    let (lo, hi) = phi
        .par_iter()
        .map(|&p| (p, p))
        .reduce(|| (T::infinity(), T::neg_infinity()), |a, b| (a.0.min(b.0), a.1.max(b.1)));
    if phi.iter().any(|p| !p.is_finite()) {
        return Err(NskError::NonFinite("density field".into()));
    }
    if T::one() + lo <= rho_min {
        return Err(NskError::VacuumApproach {
            min_density: (T::one() + lo).to_f64_lossy(),
            rho_min: rho_min.to_f64_lossy(),
        });
    }
    if T::one() + hi >= rho_max {
        return Err(NskError::DensityOutOfRange {
            density: (T::one() + hi).to_f64_lossy(),
            max: rho_max.to_f64_lossy(),
        });
    }
    Ok(())
}

/// `P₁(φ) = ∫₀¹ f'(1+τφ)dτ` with `f(τ) = 1/τ`, i.e. `-1/(1+φ)`.
pub fn p1_factor<T: Scalar>(phi: &[T], rho_min: T) -> Result<Vec<T>> {
    check_density(phi, rho_min, T::infinity())?;
    Ok(phi.par_iter().map(|&p| -T::one() / (T::one() + p)).collect())
}

/// `P₂(φ) = ∫₀¹(1-τ)P''(1+τφ)dτ`, pointwise by Gauss-Legendre quadrature.
pub fn p2_factor<T: Scalar>(phi: &[T], pressure: &PressureModel<T>, rho_min: T) -> Result<Vec<T>> {
    check_density(phi, rho_min, pressure.max_density())?;
    Ok(p2_unchecked(phi, pressure))
}

fn p2_unchecked<T: Scalar>(phi: &[T], pressure: &PressureModel<T>) -> Vec<T> {
    let (nodes, weights) = p2_rule();
    let nodes: Vec<T> = nodes.iter().map(|&x| T::lit(x)).collect();
    let weights: Vec<T> = weights.iter().map(|&w| T::lit(w)).collect();
    phi.par_iter()
        .map(|&p| {
            let mut acc = T::zero();
            for (&tau, &w) in nodes.iter().zip(&weights) {
                acc = acc + w * (T::one() - tau) * pressure.derivative(2, T::one() + tau * p);
            }
            acc
        })
        .collect()
}

/// `F(u)` in spectral form. The density forcing is identically zero and is
/// not stored.
#[derive(Debug, Clone)]
pub struct ForcingField<T: Scalar> {
    pub momentum: Vec<Vec<Complex<T>>>,
    /// `min(1+φ)` on the grid after truncation.
    pub min_density: T,
    /// `max|φ|` on the grid after truncation.
    pub max_abs_phi: T,
}

impl<T: Scalar> ForcingField<T> {
    /// `(0, F)` as a state on `grid`.
    pub fn to_state(&self, grid: &Grid<T>) -> SpectralState<T> {
        SpectralState::from_coefficients(grid, vec![Complex::zero(); grid.len()], self.momentum.clone())
            .expect("forcing matches its grid")
    }

    pub fn zeros(grid: &Grid<T>) -> Self {
        Self {
            momentum: vec![vec![Complex::zero(); grid.len()]; grid.dim()],
            min_density: T::one(),
            max_abs_phi: T::zero(),
        }
    }
}

fn truncate<T: Scalar>(grid: &Grid<T>, coeffs: &[Complex<T>]) -> Vec<Complex<T>> {
    coeffs
        .par_iter()
        .enumerate()
        .map(|(i, &c)| if grid.dealias_keep(i) { c } else { Complex::zero() })
        .collect()
}

/// Physical samples of `iξ_j f̂` (or `-|ξ|²f̂` when `axis` is `None`).
fn derivative_field<T: Scalar>(grid: &Grid<T>, coeffs: &[Complex<T>], axis: Option<usize>) -> Vec<T> {
    let spec: Vec<Complex<T>> = coeffs
        .par_iter()
        .enumerate()
        .map(|(i, &c)| match axis {
            Some(j) => c * Complex::new(T::zero(), grid.wavevector(i)[j]),
            None => c * (-grid.wavenumber_sq(i)),
        })
        .collect();
    grid.from_spectral(&spec).expect("grid-sized")
}

/// Index of the symmetric pair `(j, l)`, `j ≤ l`, in packed storage.
fn packed(dim: usize, j: usize, l: usize) -> usize {
    let (j, l) = if j <= l { (j, l) } else { (l, j) };
    j * dim - j * (j + 1) / 2 + l
}

/// Physical samples of `Φ_{jl}` in packed symmetric storage.
fn korteweg_stress<T: Scalar>(phi: &[T], grad: &[Vec<T>], lap: &[T], kappa: T) -> Vec<Vec<T>> {
    let dim = grad.len();
    let half = T::lit(0.5);
    let mut out = vec![Vec::new(); dim * (dim + 1) / 2];
    for j in 0..dim {
        for l in j..dim {
            out[packed(dim, j, l)] = (0..phi.len())
                .into_par_iter()
                .map(|x| {
                    let mut v = -grad[j][x] * grad[l][x];
                    if j == l {
                        let g2 = grad.iter().fold(T::zero(), |acc, g| acc + g[x] * g[x]);
                        v = v + phi[x] * lap[x] + half * g2;
                    }
                    kappa * v
                })
                .collect();
        }
    }
    out
}

/// Spectral divergence `iξ_l Ŝ_{jl}` of a packed symmetric tensor, truncated.
fn tensor_divergence<T: Scalar>(grid: &Grid<T>, stress_hat: &[Vec<Complex<T>>]) -> Vec<Vec<Complex<T>>> {
    let dim = grid.dim();
    (0..dim)
        .map(|j| {
            (0..grid.len())
                .into_par_iter()
                .map(|i| {
                    if !grid.dealias_keep(i) {
                        return Complex::zero();
                    }
                    let xi = grid.wavevector(i);
                    let mut acc = Complex::zero();
                    for l in 0..dim {
                        acc = acc + stress_hat[packed(dim, j, l)][i] * Complex::new(T::zero(), xi[l]);
                    }
                    acc
                })
                .collect()
        })
        .collect()
}

/// `div Φ(φ)` for the density coefficients `phi_hat`, truncated.
pub fn korteweg_divergence<T: Scalar>(grid: &Grid<T>, phi_hat: &[Complex<T>], kappa: T) -> Vec<Vec<Complex<T>>> {
    let phi_t = truncate(grid, phi_hat);
    let phi = grid.from_spectral(&phi_t).expect("grid-sized");
    let grad: Vec<Vec<T>> = (0..grid.dim()).map(|j| derivative_field(grid, &phi_t, Some(j))).collect();
    let lap = derivative_field(grid, &phi_t, None);
    let stress = korteweg_stress(&phi, &grad, &lap, kappa);
    let stress_hat: Vec<Vec<Complex<T>>> =
        stress.iter().map(|s| truncate(grid, &grid.to_spectral(s).expect("grid-sized"))).collect();
    tensor_divergence(grid, &stress_hat)
}

/// Full nonlinear forcing `F(u)`.
#[allow(non_snake_case)]
pub fn eval_F<T: Scalar>(state: &SpectralState<T>, params: &PhysParams<T>) -> Result<ForcingField<T>> {
    let grid = state.grid();
    let dim = grid.dim();
    let n = grid.len();
    let phi_t = truncate(grid, state.phi());
    let m_t: Vec<Vec<Complex<T>>> = state.momentum().iter().map(|c| truncate(grid, c)).collect();

    let phi = grid.from_spectral(&phi_t).expect("grid-sized");
    check_density(&phi, params.rho_min(), params.pressure().max_density())?;
    let m: Vec<Vec<T>> = m_t.iter().map(|c| grid.from_spectral(c).expect("grid-sized")).collect();
    let grad: Vec<Vec<T>> = (0..dim).map(|j| derivative_field(grid, &phi_t, Some(j))).collect();
    let lap = derivative_field(grid, &phi_t, None);

    let inv_rho: Vec<T> = phi.par_iter().map(|&p| T::one() / (T::one() + p)).collect();
    let p2 = p2_unchecked(&phi, params.pressure());

    // G = a m⊗m + P₂(φ)φ² I - Φ(φ)
    let mut stress = korteweg_stress(&phi, &grad, &lap, params.kappa());
    for j in 0..dim {
        for l in j..dim {
            let s = &mut stress[packed(dim, j, l)];
            s.par_iter_mut().enumerate().for_each(|(x, v)| {
                let mut g = inv_rho[x] * m[j][x] * m[l][x] - *v;
                if j == l {
                    g = g + p2[x] * phi[x] * phi[x];
                }
                *v = g;
            });
        }
    }
    let stress_hat: Vec<Vec<Complex<T>>> =
        stress.iter().map(|s| truncate(grid, &grid.to_spectral(s).expect("grid-sized"))).collect();
    let v_hat: Vec<Vec<Complex<T>>> = m
        .iter()
        .map(|mj| {
            let v: Vec<T> = mj.par_iter().zip(inv_rho.par_iter()).map(|(&mv, &a)| (a - T::one()) * mv).collect();
            truncate(grid, &grid.to_spectral(&v).expect("grid-sized"))
        })
        .collect();

    let div = tensor_divergence(grid, &stress_hat);
    let (nu, nu_t) = (params.nu(), params.nu_tilde());
    let mut momentum = vec![vec![Complex::zero(); n]; dim];
    for (j, out) in momentum.iter_mut().enumerate() {
        out.par_iter_mut().enumerate().for_each(|(i, f)| {
            if !grid.dealias_keep(i) {
                return;
            }
            let xi = grid.wavevector(i);
            let q = grid.wavenumber_sq(i);
            let mut xv = Complex::zero();
            for l in 0..dim {
                xv = xv + v_hat[l][i] * xi[l];
            }
            *f = -div[j][i] - v_hat[j][i] * (nu * q) - xv * (nu_t * xi[j]);
        });
    }
    if momentum.iter().any(|c| c.iter().any(|z| !(z.re.is_finite() && z.im.is_finite()))) {
        return Err(NskError::NonFinite("nonlinear forcing".into()));
    }
    let (lo, hi) = phi.iter().fold((T::infinity(), T::zero()), |(lo, hi), &p| (lo.min(p), hi.max(p.abs())));
    Ok(ForcingField { momentum, min_density: T::one() + lo, max_abs_phi: hi })
}
