use super::{DenseMatrix, LinalgError};

/// Thin Householder QR of an `m×n` matrix with `m ≥ n`.
///
/// Returns `Q` (`m×n`, orthonormal columns) and upper-triangular `R` (`n×n`).
pub fn householder_qr(a: &DenseMatrix) -> Result<(DenseMatrix, DenseMatrix), LinalgError> {
    let (m, n) = (a.rows(), a.cols());
    if m < n {
        return Err(LinalgError::TooFewRows { rows: m, cols: n });
    }

    // Work column-major: each column contiguous.
    let mut cols: Vec<Vec<f64>> = (0..n).map(|j| a.column(j)).collect();
    let mut reflectors: Vec<Vec<f64>> = Vec::with_capacity(n);

    for k in 0..n {
        let x = &cols[k][k..];
        let alpha = super::vector::norm2(x);
        let mut v = x.to_vec();
        if alpha == 0.0 {
            reflectors.push(Vec::new());
            continue;
        }
        // Reflect onto -sign(x0)·‖x‖·e1 to avoid cancellation.
        let beta = if v[0] >= 0.0 { -alpha } else { alpha };
        v[0] -= beta;
        let vnorm = super::vector::norm2(&v);
        for vi in &mut v {
            *vi /= vnorm;
        }
        for col in cols.iter_mut().skip(k) {
            let tail = &mut col[k..];
            let s = 2.0 * super::vector::dot(&v, tail);
            super::vector::axpy(-s, &v, tail);
        }
        // Exact values for the annihilated part.
        cols[k][k] = beta;
        for i in k + 1..m {
            cols[k][i] = 0.0;
        }
        reflectors.push(v);
    }

    let r = DenseMatrix::from_fn(n, n, |i, j| if j >= i { cols[j][i] } else { 0.0 });

    // Accumulate Q = H_0 H_1 ... H_{n-1} applied to the first n unit vectors.
    let mut qcols: Vec<Vec<f64>> = (0..n)
        .map(|j| {
            let mut e = vec![0.0; m];
            e[j] = 1.0;
            e
        })
        .collect();
    for (k, v) in reflectors.iter().enumerate().rev() {
        if v.is_empty() {
            continue;
        }
        for q in qcols.iter_mut() {
            let tail = &mut q[k..];
            let s = 2.0 * super::vector::dot(v, tail);
            super::vector::axpy(-s, v, tail);
        }
    }
    let q = DenseMatrix::from_fn(m, n, |i, j| qcols[j][i]);
    Ok((q, r))
}
