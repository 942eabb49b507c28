//! Initial data: Gaussian bumps, smooth random fields, and size scaling.

use num_complex::Complex;
use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::analysis::energy::sobolev_norm_sq;
use crate::error::{NskError, Result};
use crate::scalar::Scalar;
use crate::spectral::{Grid, SpectralState};

/// Periodic Gaussian `exp(-|x - c|²/2σ²)` centred in the box.
pub fn periodic_gaussian<T: Scalar>(grid: &Grid<T>, width: f64) -> Vec<T> {
    let l = grid.length().to_f64_lossy();
    (0..grid.len())
        .map(|i| {
            let x = grid.coordinates(i);
            let r2: f64 = x
                .iter()
                .take(grid.dim())
                .map(|&v| {
                    let d = v.to_f64_lossy() - 0.5 * l;
                    d * d
                })
                .sum();
            T::lit((-r2 / (2.0 * width * width)).exp())
        })
        .collect()
}

/// `φ₀ = α G` and `m₀ = ∂₁(β G e₁)` with `G` a periodic Gaussian of width `width`.
pub fn gaussian_state<T: Scalar>(grid: &Grid<T>, phi_amp: T, m_amp: T, width: f64) -> Result<SpectralState<T>> {
    if !(width > 0.0) {
        return Err(NskError::InvalidParams(format!("Gaussian width must be positive, got {width}")));
    }
    let g = grid.to_spectral(&periodic_gaussian(grid, width))?;
    let phi: Vec<Complex<T>> = g.iter().map(|&c| c * phi_amp).collect();
    let mut m = vec![vec![Complex::zero(); grid.len()]; grid.dim()];
    for (i, c) in g.iter().enumerate() {
        m[0][i] = *c * Complex::new(T::zero(), grid.wavevector(i)[0] * m_amp);
    }
    SpectralState::from_coefficients(grid, phi, m)
}

/// Smooth random state with independent Fourier coefficients damped by
/// `exp(-|ξ|²/2r²)` for `r = band`, Hermitian, dealiased, zero mean, scaled
/// so that `sup|φ| = phi_amp` and `sup|m| = m_amp`.
pub fn random_state<T: Scalar>(grid: &Grid<T>, seed: u64, band: f64, phi_amp: f64, m_amp: f64) -> SpectralState<T> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = grid.len();
    let draw = |rng: &mut ChaCha8Rng| -> Vec<Complex<T>> {
        let mut c = vec![Complex::zero(); n];
        for i in 0..n {
            let j = grid.conjugate_index(i);
            if j < i || i == 0 || grid.touches_nyquist(i) || !grid.dealias_keep(i) {
                continue;
            }
            let q = grid.wavenumber_sq(i).to_f64_lossy();
            let damp = (-q / (2.0 * band * band)).exp();
            let re = damp * rng.gen_range(-1.0..1.0);
            let im = if i == j { 0.0 } else { damp * rng.gen_range(-1.0..1.0) };
            c[i] = Complex::new(T::lit(re), T::lit(im));
            c[j] = Complex::new(T::lit(re), T::lit(-im));
        }
        c
    };
    let phi = draw(&mut rng);
    let m: Vec<Vec<Complex<T>>> = (0..grid.dim()).map(|_| draw(&mut rng)).collect();
    let state = SpectralState::from_coefficients(grid, phi, m).expect("grid-sized");
    let (p, mm) = state.to_physical();
    let sup_phi = p.iter().fold(0.0f64, |a, v| a.max(v.to_f64_lossy().abs()));
    let sup_m = (0..n).fold(0.0f64, |a, x| {
        a.max(mm.iter().map(|c| c[x].to_f64_lossy().powi(2)).sum::<f64>().sqrt())
    });
    let mut out = state;
    let sp = if sup_phi > 0.0 { phi_amp / sup_phi } else { 0.0 };
    let sm = if sup_m > 0.0 { m_amp / sup_m } else { 0.0 };
    for c in out.phi_mut() {
        *c = *c * T::lit(sp);
    }
    for comp in out.momentum_mut() {
        for c in comp.iter_mut() {
            *c = *c * T::lit(sm);
        }
    }
    out
}

/// `‖u‖_{L¹}` from grid samples, with `|m|` the Euclidean norm.
pub fn l1_norm<T: Scalar>(u: &SpectralState<T>) -> f64 {
    let (phi, m) = u.to_physical();
    let vol = u.grid().cell_volume().to_f64_lossy();
    let total: f64 = (0..phi.len())
        .map(|x| phi[x].to_f64_lossy().abs() + m.iter().map(|c| c[x].to_f64_lossy().powi(2)).sum::<f64>().sqrt())
        .sum();
    total * vol
}

/// `E₀ = ‖u‖_{H^{s+1}×H^s} + ‖u‖_{L¹}`.
pub fn data_size<T: Scalar>(u: &SpectralState<T>, s: u32) -> f64 {
    sobolev_norm_sq(u, s).sqrt() + l1_norm(u)
}

/// Rescales `u` so that `data_size(u, s) = target`.
pub fn scale_to_size<T: Scalar>(u: &SpectralState<T>, s: u32, target: f64) -> Result<SpectralState<T>> {
    let e0 = data_size(u, s);
    if !(e0 > 0.0) {
        return Err(NskError::InvalidParams("cannot rescale a zero state".into()));
    }
    Ok(u.scale(T::lit(target / e0)))
}
