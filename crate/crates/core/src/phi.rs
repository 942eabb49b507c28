//! Exponential-type functions: `φ₁(z) = (eᶻ - 1)/z` and divided differences
//! of the exponential on arbitrary (possibly repeated) complex nodes.

use num_complex::Complex;
use num_traits::{One, Zero};

use crate::scalar::Scalar;

/// Below this modulus `φ₁` is summed from its Taylor series.
pub const PHI1_SERIES_RADIUS: f64 = 1e-3;

/// Series terms smaller than this are dropped.
pub const SERIES_TERM_FLOOR: f64 = 1e-17;

/// `eᶻ - 1` without cancellation for small `|z|`.
pub fn expm1<T: Scalar>(z: Complex<T>) -> Complex<T> {
    let (x, y) = (z.re, z.im);
    let half = (y / T::lit(2.0)).sin();
    Complex::new(x.exp_m1() * y.cos() - T::lit(2.0) * half * half, x.exp() * y.sin())
}

/// `φ₁(z) = (eᶻ - 1)/z`, continuous through `z = 0`.
pub fn phi1<T: Scalar>(z: Complex<T>) -> Complex<T> {
    if z.norm() < T::lit(PHI1_SERIES_RADIUS) {
        // Σ zᵏ/(k+1)!
        let floor = T::lit(SERIES_TERM_FLOOR);
        let mut term = Complex::<T>::one();
        let mut sum = term;
        let mut k = 1;
        while term.norm() >= floor && k < 40 {
            term = term * z / T::lit((k + 1) as f64);
            sum = sum + term;
            k += 1;
        }
        sum
    } else {
        expm1(z) / z
    }
}

/// First row of `exp(Z)` where `Z` is upper bidiagonal with diagonal `nodes`
/// and unit superdiagonal: `[e[z₀], e[z₀,z₁], …, e[z₀,…,z_p]]`.
///
/// Evaluated by scaling and squaring with a Taylor kernel. Repeated nodes are
/// handled without special cases, which is what makes this usable across the
/// double root of the longitudinal block.
pub fn exp_divided_differences<T: Scalar>(nodes: &[Complex<T>]) -> Vec<Complex<T>> {
    let p = nodes.len();
    assert!(p > 0 && p <= 6, "divided differences supported for 1..=6 nodes");
    let radius = nodes.iter().fold(T::zero(), |acc, z| acc.max(z.norm()));
    let mut squarings = 0u32;
    let mut scale = T::one();
    while radius * scale > T::lit(0.5) {
        scale = scale / T::lit(2.0);
        squarings += 1;
    }
    // Scaled matrix: diagonal z·scale, superdiagonal scale.
    let idx = |i: usize, j: usize| i * p + j;
    let mut scaled = vec![Complex::<T>::zero(); p * p];
    for i in 0..p {
        scaled[idx(i, i)] = nodes[i] * scale;
        if i + 1 < p {
            scaled[idx(i, i + 1)] = Complex::new(scale, T::zero());
        }
    }
    let mul = |a: &[Complex<T>], b: &[Complex<T>]| {
        let mut out = vec![Complex::<T>::zero(); p * p];
        for i in 0..p {
            for k in i..p {
                let aik = a[idx(i, k)];
                if aik.is_zero() {
                    continue;
                }
                for j in k..p {
                    out[idx(i, j)] = out[idx(i, j)] + aik * b[idx(k, j)];
                }
            }
        }
        out
    };
    let mut result = vec![Complex::<T>::zero(); p * p];
    let mut term = vec![Complex::<T>::zero(); p * p];
    for i in 0..p {
        result[idx(i, i)] = Complex::one();
        term[idx(i, i)] = Complex::one();
    }
    let eps = T::epsilon() / T::lit(16.0);
    for k in 1..60 {
        term = mul(&term, &scaled);
        let inv = T::one() / T::lit(k as f64);
        let mut size = T::zero();
        for v in term.iter_mut() {
            *v = *v * inv;
            size = size.max(v.norm());
        }
        for (r, t) in result.iter_mut().zip(&term) {
            *r = *r + *t;
        }
        if size <= eps {
            break;
        }
    }
    for _ in 0..squarings {
        result = mul(&result, &result);
    }
    result[..p].to_vec()
}

#[cfg(test)]
mod tests {
    use super::*;

    type C = Complex<f64>;

    fn long_series(z: C) -> C {
        let mut term = C::new(1.0, 0.0);
        let mut sum = term;
        for k in 1..30 {
            term = term * z / (k + 1) as f64;
            sum += term;
        }
        sum
    }

    #[test]
    fn phi1_branches_agree_at_the_switch() {
        for &arg in &[0.0, 0.7, 2.0, -2.5] {
            let dir = C::from_polar(1.0, arg);
            for r in [0.999e-3, 1.001e-3] {
                let z = dir * r;
                assert!((phi1(z) - long_series(z)).norm() < 1e-15, "{z}");
            }
        }
        assert_eq!(phi1(C::new(0.0, 0.0)), C::new(1.0, 0.0));
    }

    #[test]
    fn phi1_matches_closed_form_away_from_zero() {
        for z in [C::new(-3.0, 0.0), C::new(-0.5, 4.0), C::new(-200.0, 10.0)] {
            let direct = (z.exp() - 1.0) / z;
            assert!((phi1(z) - direct).norm() < 1e-14 * direct.norm());
        }
    }

    #[test]
    fn divided_differences_of_distinct_nodes() {
        let z = [C::new(0.0, 0.0), C::new(-1.0, 0.0), C::new(-3.0, 0.5)];
        let dd = exp_divided_differences(&z);
        let e01 = (z[1].exp() - z[0].exp()) / (z[1] - z[0]);
        let e12 = (z[2].exp() - z[1].exp()) / (z[2] - z[1]);
        let e012 = (e12 - e01) / (z[2] - z[0]);
        assert!((dd[0] - 1.0).norm() < 1e-15);
        assert!((dd[1] - e01).norm() < 1e-14);
        assert!((dd[2] - e012).norm() < 1e-14);
    }

    #[test]
    fn confluent_nodes_give_phi_functions() {
        // e[0,0,z] = φ₂(z) = (eᶻ - 1 - z)/z²
        for z in [C::new(-0.3, 0.0), C::new(-40.0, 0.0), C::new(-2.0, 7.0), C::new(-1500.0, 0.0)] {
            let dd = exp_divided_differences(&[C::new(0.0, 0.0), C::new(0.0, 0.0), z]);
            let phi2 = (z.exp() - 1.0 - z) / (z * z);
            assert!((dd[2] - phi2).norm() < 1e-13 * phi2.norm(), "{z}: {} vs {phi2}", dd[2]);
        }
        // e[z,z] = eᶻ
        let z = C::new(-2.0, 1.0);
        let dd = exp_divided_differences(&[z, z]);
        assert!((dd[1] - z.exp()).norm() < 1e-14);
    }
}
