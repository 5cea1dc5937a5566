use super::{DenseMatrix, LinalgError, LinearOperator};

const MAX_SWEEPS: usize = 100;

/// Eigen-decomposition of a symmetric matrix: ascending eigenvalues and the
/// matching orthonormal eigenvectors stored as columns.
#[derive(Debug, Clone)]
pub struct EigDecomp {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: DenseMatrix,
}

/// Cyclic Jacobi eigensolver for symmetric matrices.
///
/// Sweeps rotate every off-diagonal pair until the off-diagonal Frobenius
/// norm falls to `tol·‖A‖_F`. Entries that are negligible next to both
/// diagonal entries they couple are zeroed outright, which keeps small
/// eigenvalues of graded matrices (Hilbert) relatively accurate.
pub fn sym_eig(a: &DenseMatrix, tol: f64) -> Result<EigDecomp, LinalgError> {
    if !a.is_square() {
        return Err(LinalgError::NotSquare {
            rows: a.rows(),
            cols: a.cols(),
        });
    }
    let n = a.rows();
    let fro = a.frobenius_norm();
    let asym = a.asymmetry();
    if asym > 1e-12 * fro {
        return Err(LinalgError::NotSymmetric { asymmetry: asym });
    }

    // Symmetrize exactly so the rotations see one value per pair.
    let mut m = DenseMatrix::from_fn(n, n, |i, j| 0.5 * (a.get(i, j) + a.get(j, i)));
    let mut v = DenseMatrix::identity(n);
    let target = tol * fro;

    let mut converged = n == 1 || fro == 0.0;
    for sweep in 0..MAX_SWEEPS {
        if converged {
            break;
        }
        let off = off_diagonal_norm(&m);
        if off <= target {
            converged = true;
            break;
        }
        let mut rotated = false;
        for p in 0..n - 1 {
            for q in p + 1..n {
                let apq = m.get(p, q);
                if apq == 0.0 {
                    continue;
                }
                let app = m.get(p, p);
                let aqq = m.get(q, q);
                let g = 100.0 * apq.abs();
                if sweep > 3 && app.abs() + g == app.abs() && aqq.abs() + g == aqq.abs() {
                    m.set(p, q, 0.0);
                    m.set(q, p, 0.0);
                    continue;
                }
                rotate(&mut m, &mut v, p, q);
                rotated = true;
            }
        }
        if !rotated {
            converged = true;
        }
    }
    if !converged && off_diagonal_norm(&m) > target {
        return Err(LinalgError::NoConvergence { sweeps: MAX_SWEEPS });
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m.get(i, i).total_cmp(&m.get(j, j)));
    let eigenvalues = order.iter().map(|&i| m.get(i, i)).collect();
    let eigenvectors = DenseMatrix::from_fn(n, n, |i, j| v.get(i, order[j]));
    Ok(EigDecomp {
        eigenvalues,
        eigenvectors,
    })
}

fn off_diagonal_norm(m: &DenseMatrix) -> f64 {
    let n = m.rows();
    let mut scale = 0.0_f64;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                scale = scale.max(m.get(i, j).abs());
            }
        }
    }
    if scale == 0.0 {
        return 0.0;
    }
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                let t = m.get(i, j) / scale;
                s += t * t;
            }
        }
    }
    scale * s.sqrt()
}

fn rotate(m: &mut DenseMatrix, v: &mut DenseMatrix, p: usize, q: usize) {
    let n = m.rows();
    let apq = m.get(p, q);
    let app = m.get(p, p);
    let aqq = m.get(q, q);
    let theta = (aqq - app) / (2.0 * apq);
    let t = if theta.abs() > 1e150 {
        0.5 / theta
    } else {
        theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
    };
    let c = 1.0 / (t * t + 1.0).sqrt();
    let s = t * c;

    for k in 0..n {
        if k == p || k == q {
            continue;
        }
        let akp = m.get(k, p);
        let akq = m.get(k, q);
        let np = c * akp - s * akq;
        let nq = s * akp + c * akq;
        m.set(k, p, np);
        m.set(p, k, np);
        m.set(k, q, nq);
        m.set(q, k, nq);
    }
    m.set(p, p, app - t * apq);
    m.set(q, q, aqq + t * apq);
    m.set(p, q, 0.0);
    m.set(q, p, 0.0);

    for k in 0..n {
        let vkp = v.get(k, p);
        let vkq = v.get(k, q);
        v.set(k, p, c * vkp - s * vkq);
        v.set(k, q, s * vkp + c * vkq);
    }
}

/// 2-norm condition number of a symmetric matrix, `max|λ| / min|λ|`.
///
/// Returns `f64::INFINITY` when the smallest eigenvalue magnitude is zero.
pub fn cond2(a: &DenseMatrix) -> Result<f64, LinalgError> {
    let eig = sym_eig(a, 1e-15)?;
    let (lo, hi) = eig
        .eigenvalues
        .iter()
        .fold((f64::INFINITY, 0.0_f64), |(lo, hi), l| (lo.min(l.abs()), hi.max(l.abs())));
    if lo == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(hi / lo)
}
