//! Element type abstraction and the dense math kernels the layers build on.
//!
//! Everything is generic over [`Real`] so the same layer code runs in `f32`
//! for training throughput and in `f64` for gradient checking.

use alloc::vec;
use alloc::vec::Vec;

use num_traits::Float;

/// Floating-point element: `f32` or `f64`.
pub trait Real:
    Float + core::fmt::Debug + core::fmt::Display + core::ops::AddAssign + Send + Sync + 'static
{
    fn from_f64(x: f64) -> Self;
    fn into_f64(self) -> f64;
}

impl Real for f32 {
    fn from_f64(x: f64) -> Self {
        x as f32
    }
    fn into_f64(self) -> f64 {
        self as f64
    }
}

impl Real for f64 {
    fn from_f64(x: f64) -> Self {
        x
    }
    fn into_f64(self) -> f64 {
        self
    }
}

/// `c = a · b` with `a: [m, k]`, `b: [k, n]`, `c: [m, n]`, all row-major.
pub fn matmul<T: Real>(a: &[T], b: &[T], c: &mut [T], m: usize, k: usize, n: usize) {
    debug_assert_eq!(a.len(), m * k);
    debug_assert_eq!(b.len(), k * n);
    debug_assert_eq!(c.len(), m * n);
    for v in c.iter_mut() {
        *v = T::zero();
    }
    matmul_acc(a, b, c, m, k, n);
}

/// `c += a · b`; the i-k-j loop keeps the inner updates contiguous so the
/// compiler vectorizes them.
pub fn matmul_acc<T: Real>(a: &[T], b: &[T], c: &mut [T], m: usize, k: usize, n: usize) {
    for i in 0..m {
        let arow = &a[i * k..(i + 1) * k];
        let crow = &mut c[i * n..(i + 1) * n];
        for (kk, &av) in arow.iter().enumerate() {
            if av == T::zero() {
                continue;
            }
            let brow = &b[kk * n..(kk + 1) * n];
            for (cv, &bv) in crow.iter_mut().zip(brow) {
                *cv += av * bv;
            }
        }
    }
}

/// Row-major transpose: `a: [m, n]` to `out: [n, m]`.
pub fn transpose<T: Real>(a: &[T], m: usize, n: usize) -> Vec<T> {
    let mut out = vec![T::zero(); m * n];
    for i in 0..m {
        for j in 0..n {
            out[j * m + i] = a[i * n + j];
        }
    }
    out
}

/// Numerically stable softmax over the last axis of a `[rows, n]` matrix,
/// in place.
pub fn softmax_rows<T: Real>(x: &mut [T], rows: usize, n: usize) {
    for r in 0..rows {
        let row = &mut x[r * n..(r + 1) * n];
        let mut max = row[0];
        for &v in row.iter() {
            if v > max {
                max = v;
            }
        }
        let mut sum = T::zero();
        for v in row.iter_mut() {
            *v = (*v - max).exp();
            sum += *v;
        }
        for v in row.iter_mut() {
            *v = *v / sum;
        }
    }
}
