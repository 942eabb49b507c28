//! Floating point bound shared by every numeric routine in the crate.

use std::fmt::{Debug, Display};

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};
use rustfft::FftNum;

/// Real scalar the solver is generic over: `f32` or `f64`.
pub trait Scalar:
    Float + FloatConst + FromPrimitive + ToPrimitive + FftNum + Default + Debug + Display + Send + Sync
{
    /// Lossy conversion from `f64` literals and configuration values.
    fn lit(v: f64) -> Self;

    /// Widening conversion used for reductions and reporting.
    fn to_f64_lossy(self) -> f64;
}

macro_rules! impl_scalar {
    ($t:ty) => {
        impl Scalar for $t {
            #[inline]
            fn lit(v: f64) -> Self {
                v as $t
            }

            #[inline]
            fn to_f64_lossy(self) -> f64 {
                self as f64
            }
        }
    };
}

impl_scalar!(f32);
impl_scalar!(f64);

/// Pairwise (cascade) summation. Deterministic for a fixed input order and
/// with O(log n) error growth instead of O(n).
pub fn pairwise_sum<T: Scalar>(values: &[T]) -> T {
    const BLOCK: usize = 32;
    if values.len() <= BLOCK {
        return values.iter().fold(T::zero(), |acc, &v| acc + v);
    }
    let mid = values.len() / 2;
    pairwise_sum(&values[..mid]) + pairwise_sum(&values[mid..])
}

/// Pairwise sum of `f(i)` for `i in 0..len`, without materializing the terms.
pub fn pairwise_sum_by<T: Scalar, F: Fn(usize) -> T + Sync>(len: usize, f: &F) -> T {
    fn rec<T: Scalar, F: Fn(usize) -> T>(lo: usize, hi: usize, f: &F) -> T {
        if hi - lo <= 32 {
            return (lo..hi).fold(T::zero(), |acc, i| acc + f(i));
        }
        let mid = lo + (hi - lo) / 2;
        rec(lo, mid, f) + rec(mid, hi, f)
    }
    rec(0, len, f)
}
