//! The nonlinear forcing by direct circular convolution of Fourier
//! coefficients, with `1/(1+φ)` and `P₂(φ)` expanded as power series in `φ`.

use num_complex::Complex;

use crate::error::{NskError, Result};
use crate::params::PhysParams;
use crate::pressure::PressureModel;
use crate::spectral::SpectralState;

type C = Complex<f64>;

/// Largest grid (per axis) accepted by [`direct_nonlinearity`].
pub const MAX_ORACLE_MODES: usize = 8;

/// Upper bound on `sup|φ|` for the power series.
pub const MAX_ORACLE_AMPLITUDE: f64 = 0.1;

struct Lattice {
    dim: usize,
    n: usize,
    len: usize,
    /// `L⁻ⁿ`
    inv_volume: f64,
    digits: Vec<Vec<usize>>,
    xi: Vec<Vec<f64>>,
    keep: Vec<bool>,
}

impl Lattice {
    fn new(dim: usize, n: usize, length: f64) -> Self {
        let len = n.pow(dim as u32);
        let base = 2.0 * std::f64::consts::PI / length;
        let mut digits = Vec::with_capacity(len);
        let mut xi = Vec::with_capacity(len);
        let mut keep = Vec::with_capacity(len);
        for flat in 0..len {
            let mut d = vec![0; dim];
            let mut rem = flat;
            for axis in (0..dim).rev() {
                d[axis] = rem % n;
                rem /= n;
            }
            let labels: Vec<i64> = d.iter().map(|&v| if 2 * v < n { v as i64 } else { v as i64 - n as i64 }).collect();
            xi.push(labels.iter().map(|&k| if 2 * k == -(n as i64) { 0.0 } else { base * k as f64 }).collect());
            keep.push(labels.iter().all(|&k| 3 * k.abs() < n as i64));
            digits.push(d);
        }
        Self { dim, n, len, inv_volume: length.powi(-(dim as i32)), digits, xi, keep }
    }

    fn index(&self, d: &[usize]) -> usize {
        d.iter().fold(0, |acc, &v| acc * self.n + v)
    }

    /// Coefficients of the pointwise product of the two fields.
    fn product(&self, f: &[C], g: &[C]) -> Vec<C> {
        let mut out = vec![C::new(0.0, 0.0); self.len];
        let mut d = vec![0; self.dim];
        for (a, fa) in f.iter().enumerate() {
            if fa.norm_sqr() == 0.0 {
                continue;
            }
            for (b, gb) in g.iter().enumerate() {
                if gb.norm_sqr() == 0.0 {
                    continue;
                }
                for (axis, v) in d.iter_mut().enumerate().take(self.dim) {
                    *v = (self.digits[a][axis] + self.digits[b][axis]) % self.n;
                }
                out[self.index(&d)] += fa * gb;
            }
        }
        for v in out.iter_mut() {
            *v *= self.inv_volume;
        }
        out
    }

    fn constant(&self, c: f64) -> Vec<C> {
        let mut out = vec![C::new(0.0, 0.0); self.len];
        out[0] = C::new(c / self.inv_volume, 0.0);
        out
    }

    fn truncate(&self, f: &[C]) -> Vec<C> {
        f.iter().zip(&self.keep).map(|(&v, &k)| if k { v } else { C::new(0.0, 0.0) }).collect()
    }

    fn derivative(&self, f: &[C], axis: usize) -> Vec<C> {
        f.iter().zip(&self.xi).map(|(&v, xi)| v * C::new(0.0, xi[axis])).collect()
    }

    fn laplacian(&self, f: &[C]) -> Vec<C> {
        f.iter().zip(&self.xi).map(|(&v, xi)| -v * xi.iter().map(|x| x * x).sum::<f64>()).collect()
    }
}

fn add(a: &[C], b: &[C], s: f64) -> Vec<C> {
    a.iter().zip(b).map(|(x, y)| x + y * s).collect()
}

fn factorial(k: usize) -> f64 {
    (1..=k).map(|v| v as f64).product()
}

/// Power-series coefficients `c_k` of `P₂(φ) = Σ c_k φᵏ`, up to where
/// `|c_k|·bᵏ` drops below round-off relative to the leading term.
fn p2_series(pressure: &PressureModel<f64>, bound: f64) -> Vec<f64> {
    let mut out = Vec::new();
    for k in 0..60 {
        let c = pressure.derivative(k + 2, 1.0) / (factorial(k) * (k as f64 + 1.0) * (k as f64 + 2.0));
        out.push(c);
        let scale = out[0].abs().max(1e-300);
        if k >= 2 && (c.abs() * bound.powi(k as i32)) < 1e-18 * scale {
            break;
        }
    }
    out
}

/// `F(u)` computed from the Fourier coefficients by explicit convolution.
///
/// Uses the same truncation points as the pseudo-spectral evaluator: the
/// inputs, the stress tensor, `v` and the result are cut by the 2/3 mask.
pub fn direct_nonlinearity(state: &SpectralState<f64>, params: &PhysParams<f64>) -> Result<Vec<Vec<C>>> {
    let grid = state.grid();
    let n = grid.modes_per_axis();
    if n > MAX_ORACLE_MODES {
        return Err(NskError::InvalidGrid(format!("oracle convolution limited to {MAX_ORACLE_MODES} modes per axis, got {n}")));
    }
    let lat = Lattice::new(grid.dim(), n, grid.length());
    let dim = lat.dim;
    let phi = lat.truncate(state.phi());
    let m: Vec<Vec<C>> = state.momentum().iter().map(|c| lat.truncate(c)).collect();

    let bound = lat.inv_volume * phi.iter().map(|c| c.norm()).sum::<f64>();
    if bound > MAX_ORACLE_AMPLITUDE {
        return Err(NskError::AmplitudeTooLarge { got: bound, limit: MAX_ORACLE_AMPLITUDE });
    }

    // a = 1/(1+φ) = Σ(-φ)ᵏ
    let neg_phi: Vec<C> = phi.iter().map(|v| -v).collect();
    let mut a = lat.constant(1.0);
    let mut power = lat.constant(1.0);
    let mut k = 0;
    while bound.powi(k) > 1e-18 && k < 60 {
        power = lat.product(&power, &neg_phi);
        a = add(&a, &power, 1.0);
        k += 1;
    }

    let coeffs = p2_series(params.pressure(), bound);
    let mut p2 = lat.constant(0.0);
    let mut power = lat.constant(1.0);
    for (j, c) in coeffs.iter().enumerate() {
        if j > 0 {
            power = lat.product(&power, &phi);
        }
        p2 = add(&p2, &power, *c);
    }
    let phi_sq = lat.product(&phi, &phi);
    let pressure_term = lat.product(&p2, &phi_sq);

    let grad: Vec<Vec<C>> = (0..dim).map(|j| lat.derivative(&phi, j)).collect();
    let lap = lat.laplacian(&phi);
    let mut grad_sq = lat.constant(0.0);
    for g in &grad {
        grad_sq = add(&grad_sq, &lat.product(g, g), 1.0);
    }
    let diag_korteweg = add(&lat.product(&phi, &lap), &grad_sq, 0.5);
    let kappa = params.kappa();

    let am: Vec<Vec<C>> = m.iter().map(|mj| lat.product(&a, mj)).collect();
    let mut div = vec![vec![C::new(0.0, 0.0); lat.len]; dim];
    for j in 0..dim {
        for l in 0..dim {
            let mut g = add(&lat.product(&am[j], &m[l]), &lat.product(&grad[j], &grad[l]), kappa);
            if j == l {
                g = add(&g, &pressure_term, 1.0);
                g = add(&g, &diag_korteweg, -kappa);
            }
            let g = lat.truncate(&g);
            div[j] = add(&div[j], &lat.derivative(&g, l), 1.0);
        }
    }

    let v: Vec<Vec<C>> = (0..dim).map(|j| lat.truncate(&add(&am[j], &m[j], -1.0))).collect();
    let (nu, nu_t) = (params.nu(), params.nu_tilde());
    let mut out = vec![vec![C::new(0.0, 0.0); lat.len]; dim];
    for i in 0..lat.len {
        if !lat.keep[i] {
            continue;
        }
        let xi = &lat.xi[i];
        let q: f64 = xi.iter().map(|x| x * x).sum();
        let xv: C = (0..dim).map(|l| v[l][i] * xi[l]).sum();
        for j in 0..dim {
            out[j][i] = -div[j][i] - v[j][i] * (nu * q) - xv * (nu_t * xi[j]);
        }
    }
    Ok(out)
}
