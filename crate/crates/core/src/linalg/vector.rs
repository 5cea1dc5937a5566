//! Dense vector kernels over `&[f64]`.
//!
//! Every reduction uses a fixed summation order so that results are
//! reproducible bit-for-bit across platforms.

/// Inner product `aᵀb`.
///
/// Accumulates in eight interleaved lanes combined in a fixed pairwise
/// order, then adds the tail left to right. The order never depends on the
/// platform, so results are reproducible while the lanes vectorize.
#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let mut acc = [0.0f64; LANES];
    let ca = a.chunks_exact(LANES);
    let cb = b.chunks_exact(LANES);
    let (ta, tb) = (ca.remainder(), cb.remainder());
    for (xa, xb) in ca.zip(cb) {
        for l in 0..LANES {
            acc[l] += xa[l] * xb[l];
        }
    }
    let mut s = ((acc[0] + acc[4]) + (acc[2] + acc[6])) + ((acc[1] + acc[5]) + (acc[3] + acc[7]));
    for (x, y) in ta.iter().zip(tb) {
        s += x * y;
    }
    s
}

const LANES: usize = 8;

/// `Σ f(k)` over `k in 0..len`, accumulated in the same order as [`dot`].
#[inline]
pub fn ordered_sum(len: usize, f: impl Fn(usize) -> f64) -> f64 {
    let full = len / LANES * LANES;
    let mut acc = [0.0f64; LANES];
    let mut k = 0;
    while k < full {
        for (l, a) in acc.iter_mut().enumerate() {
            *a += f(k + l);
        }
        k += LANES;
    }
    let mut s = ((acc[0] + acc[4]) + (acc[2] + acc[6])) + ((acc[1] + acc[5]) + (acc[3] + acc[7]));
    for j in full..len {
        s += f(j);
    }
    s
}

/// Euclidean norm, scaled so that large entries do not overflow the sum of
/// squares and tiny ones do not underflow it.
pub fn norm2(a: &[f64]) -> f64 {
    let scale = a.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    if scale == 0.0 || !scale.is_finite() {
        // NaN entries are skipped by `max`; surface them explicitly.
        if a.iter().any(|v| v.is_nan()) {
            return f64::NAN;
        }
        return scale;
    }
    let mut s = 0.0;
    for v in a {
        let t = v / scale;
        s += t * t;
    }
    scale * s.sqrt()
}

/// `y ← y + alpha·x`.
#[inline]
pub fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    debug_assert_eq!(x.len(), y.len());
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

/// Returns `alpha·x`.
pub fn scaled(alpha: f64, x: &[f64]) -> Vec<f64> {
    x.iter().map(|v| alpha * v).collect()
}

/// Returns `a − b`.
pub fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

/// Returns `a + b`.
pub fn add(a: &[f64], b: &[f64]) -> Vec<f64> {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

/// Returns `a − alpha·b`.
pub fn sub_scaled(a: &[f64], alpha: f64, b: &[f64]) -> Vec<f64> {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x - alpha * y).collect()
}

/// Returns `alpha·a + beta·b`.
pub fn lincomb(alpha: f64, a: &[f64], beta: f64, b: &[f64]) -> Vec<f64> {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| alpha * x + beta * y).collect()
}

pub fn all_finite(a: &[f64]) -> bool {
    a.iter().all(|v| v.is_finite())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn norm2_matches_naive_in_normal_range() {
        let v = [3.0, 4.0, 12.0];
        assert!((norm2(&v) - 13.0).abs() < 1e-14);
        assert_eq!(norm2(&[0.0, 0.0]), 0.0);
    }

    #[test]
    fn norm2_survives_extreme_scales() {
        let big = [1e200, 1e200];
        assert!((norm2(&big) / (1e200 * 2f64.sqrt()) - 1.0).abs() < 1e-15);
        let tiny = [1e-200, 1e-200];
        assert!((norm2(&tiny) / (1e-200 * 2f64.sqrt()) - 1.0).abs() < 1e-15);
        assert!(norm2(&[1.0, f64::NAN]).is_nan());
        assert_eq!(norm2(&[1.0, f64::INFINITY]), f64::INFINITY);
    }

    #[test]
    fn axpy_and_friends() {
        let mut y = vec![1.0, 1.0];
        axpy(2.0, &[1.0, -1.0], &mut y);
        assert_eq!(y, vec![3.0, -1.0]);
        assert_eq!(sub_scaled(&[1.0, 2.0], 0.5, &[2.0, 2.0]), vec![0.0, 1.0]);
        assert_eq!(lincomb(2.0, &[1.0, 0.0], 3.0, &[0.0, 1.0]), vec![2.0, 3.0]);
    }
}
