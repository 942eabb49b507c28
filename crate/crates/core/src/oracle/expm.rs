//! Dense matrix exponential of the per-mode generator.

use num_complex::Complex;

use crate::params::PhysParams;

type C = Complex<f64>;
type Mat = Vec<Vec<C>>;

/// Generator `G` of the per-mode linear system `u' = G u`, `u = (φ̂, m̂)`.
pub fn generator(xi: &[f64], params: &PhysParams<f64>) -> Mat {
    let n = xi.len();
    let q: f64 = xi.iter().map(|x| x * x).sum();
    let i = C::new(0.0, 1.0);
    let mut g = vec![vec![C::new(0.0, 0.0); n + 1]; n + 1];
    for j in 0..n {
        g[0][1 + j] = -i * xi[j];
        g[1 + j][0] = -i * (params.kappa() * q * xi[j]);
        for l in 0..n {
            let mut v = -params.nu_tilde() * xi[j] * xi[l];
            if j == l {
                v -= params.nu() * q;
            }
            g[1 + j][1 + l] = C::new(v, 0.0);
        }
    }
    g
}

fn matmul(a: &Mat, b: &Mat) -> Mat {
    let n = a.len();
    let mut out = vec![vec![C::new(0.0, 0.0); n]; n];
    for i in 0..n {
        for k in 0..n {
            for j in 0..n {
                out[i][j] += a[i][k] * b[k][j];
            }
        }
    }
    out
}

/// `exp(M)` by scaling and squaring with a Taylor kernel.
pub fn expm(m: &Mat) -> Mat {
    let n = m.len();
    let norm = m.iter().map(|row| row.iter().map(|v| v.norm()).sum::<f64>()).fold(0.0, f64::max);
    let mut s = 0;
    while norm / 2f64.powi(s) > 0.25 {
        s += 1;
    }
    let scale = 2f64.powi(-s);
    let a: Mat = m.iter().map(|row| row.iter().map(|v| v * scale).collect()).collect();
    let mut result: Mat = (0..n).map(|i| (0..n).map(|j| C::new(if i == j { 1.0 } else { 0.0 }, 0.0)).collect()).collect();
    let mut term = result.clone();
    for k in 1..40 {
        term = matmul(&term, &a);
        for row in term.iter_mut() {
            for v in row.iter_mut() {
                *v /= k as f64;
            }
        }
        let mut size = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                result[i][j] += term[i][j];
                size = size.max(term[i][j].norm());
            }
        }
        if size < 1e-18 {
            break;
        }
    }
    for _ in 0..s {
        result = matmul(&result, &result);
    }
    result
}

/// `exp(tG)` for the mode `xi`.
pub fn dense_propagator(xi: &[f64], t: f64, params: &PhysParams<f64>) -> Mat {
    let g: Mat = generator(xi, params).into_iter().map(|row| row.into_iter().map(|v| v * t).collect()).collect();
    expm(&g)
}
