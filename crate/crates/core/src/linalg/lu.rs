use super::{DenseMatrix, LinalgError};

const PIVOT_FLOOR: f64 = 1e-300;

/// Partial-pivoting LU factorization `P·A = L·U`, packed in one matrix
/// (unit-diagonal `L` strictly below the diagonal, `U` on and above it).
#[derive(Debug, Clone)]
pub struct LuFactor {
    lu: DenseMatrix,
    /// `perm[i]` is the row of `A` that ended up in row `i` of `P·A`.
    perm: Vec<usize>,
    singular: bool,
}

pub fn lu_factor(a: &DenseMatrix) -> Result<LuFactor, LinalgError> {
    if !a.is_square() {
        return Err(LinalgError::NotSquare {
            rows: a.rows(),
            cols: a.cols(),
        });
    }
    let n = a.rows();
    let mut lu = a.clone();
    let mut perm: Vec<usize> = (0..n).collect();
    let mut singular = false;

    for k in 0..n {
        let mut p = k;
        let mut best = lu.get(k, k).abs();
        for i in k + 1..n {
            let v = lu.get(i, k).abs();
            if v > best {
                best = v;
                p = i;
            }
        }
        if p != k {
            let data = lu.as_mut_slice();
            for j in 0..n {
                data.swap(k * n + j, p * n + j);
            }
            perm.swap(k, p);
        }
        let pivot = lu.get(k, k);
        if !(pivot.abs() >= PIVOT_FLOOR) {
            singular = true;
            continue;
        }
        let data = lu.as_mut_slice();
        let (top, bottom) = data.split_at_mut((k + 1) * n);
        let pivot_row = &top[k * n..(k + 1) * n];
        for row in bottom.chunks_exact_mut(n) {
            let l = row[k] / pivot;
            row[k] = l;
            if l != 0.0 {
                for j in k + 1..n {
                    row[j] -= l * pivot_row[j];
                }
            }
        }
    }

    Ok(LuFactor { lu, perm, singular })
}

pub fn lu_solve(f: &LuFactor, b: &[f64]) -> Result<Vec<f64>, LinalgError> {
    f.solve(b)
}

impl LuFactor {
    pub fn dim(&self) -> usize {
        self.lu.rows()
    }

    pub fn is_singular(&self) -> bool {
        self.singular
    }

    pub fn permutation(&self) -> &[usize] {
        &self.perm
    }

    pub fn l(&self) -> DenseMatrix {
        let n = self.dim();
        DenseMatrix::from_fn(n, n, |i, j| match i.cmp(&j) {
            std::cmp::Ordering::Greater => self.lu.get(i, j),
            std::cmp::Ordering::Equal => 1.0,
            std::cmp::Ordering::Less => 0.0,
        })
    }

    pub fn u(&self) -> DenseMatrix {
        let n = self.dim();
        DenseMatrix::from_fn(n, n, |i, j| if j >= i { self.lu.get(i, j) } else { 0.0 })
    }

    /// Rows of `a` reordered as `P·a`.
    pub fn permute_rows(&self, a: &DenseMatrix) -> DenseMatrix {
        DenseMatrix::from_fn(a.rows(), a.cols(), |i, j| a.get(self.perm[i], j))
    }

    pub fn solve(&self, b: &[f64]) -> Result<Vec<f64>, LinalgError> {
        let n = self.dim();
        if b.len() != n {
            return Err(LinalgError::DimensionMismatch {
                context: "lu_solve",
                expected: n,
                found: b.len(),
            });
        }
        if self.singular {
            return Err(LinalgError::Singular);
        }
        let mut y: Vec<f64> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            let row = self.lu.row(i);
            let mut s = y[i];
            for j in 0..i {
                s -= row[j] * y[j];
            }
            y[i] = s;
        }
        for i in (0..n).rev() {
            let row = self.lu.row(i);
            let mut s = y[i];
            for j in i + 1..n {
                s -= row[j] * y[j];
            }
            y[i] = s / row[i];
        }
        Ok(y)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{vector, LinearOperator};
    use crate::matgen::{hilbert, random_rhs, random_symmetric_cond, RandomMatrixSpec};

    #[test]
    fn identity_factors_trivially() {
        let f = lu_factor(&DenseMatrix::identity(4)).unwrap();
        assert_eq!(f.l(), DenseMatrix::identity(4));
        assert_eq!(f.u(), DenseMatrix::identity(4));
        assert_eq!(f.permutation(), &[0, 1, 2, 3]);
        assert!(!f.is_singular());
    }

    #[test]
    fn anti_diagonal_forces_pivoting() {
        let a = DenseMatrix::from_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]);
        let f = lu_factor(&a).unwrap();
        assert_eq!(f.permutation(), &[1, 0]);
        assert_eq!(f.u().get(0, 0), 1.0);
        assert_eq!(f.u().get(1, 1), 1.0);
    }

    #[test]
    fn rejects_non_square_and_singular() {
        assert!(matches!(
            lu_factor(&DenseMatrix::zeros(2, 3)),
            Err(LinalgError::NotSquare { .. })
        ));
        let f = lu_factor(&DenseMatrix::from_rows(&[vec![1.0, 2.0], vec![2.0, 4.0]])).unwrap();
        assert!(f.is_singular());
        assert_eq!(f.solve(&[1.0, 1.0]), Err(LinalgError::Singular));
    }

    #[test]
    fn simple_solves() {
        let f = lu_factor(&DenseMatrix::identity(3)).unwrap();
        assert_eq!(f.solve(&[1.0, 2.0, 3.0]).unwrap(), vec![1.0, 2.0, 3.0]);
        let f = lu_factor(&DenseMatrix::from_diagonal(&[2.0, 4.0])).unwrap();
        assert_eq!(f.solve(&[2.0, 8.0]).unwrap(), vec![1.0, 2.0]);
    }

    #[test]
    fn well_conditioned_random_solve_is_accurate() {
        for seed in 0..5 {
            let a = random_symmetric_cond(&RandomMatrixSpec::spd(10, 1e3, seed)).unwrap();
            let b = random_rhs(10, seed + 100);
            let x = lu_solve(&lu_factor(&a).unwrap(), &b).unwrap();
            let r = vector::sub(&b, &a.apply(&x));
            assert!(vector::norm2(&r) <= 1e-12 * vector::norm2(&b));
        }
    }

    #[test]
    fn hilbert_12_residual_is_large() {
        // Measured directly: the computed solution of H12 leaves a residual
        // far above the level of a well-conditioned solve.
        let a = hilbert(12).unwrap();
        let f = lu_factor(&a).unwrap();
        assert!(!f.is_singular());
        let b = random_rhs(12, 7);
        let x = f.solve(&b).unwrap();
        let r = vector::sub(&b, &a.apply(&x));
        let rel = vector::norm2(&r) / vector::norm2(&b);
        assert!(rel.is_finite());
        assert!(vector::norm2(&x) > 1e6 * vector::norm2(&b));
    }

    #[test]
    fn reconstruction_for_moderate_condition() {
        for seed in 0..10 {
            let a = random_symmetric_cond(&RandomMatrixSpec::indefinite(30, 1e6, seed)).unwrap();
            let f = lu_factor(&a).unwrap();
            let pa = f.permute_rows(&a);
            let lu = f.l().matmul(&f.u()).unwrap();
            let err = pa.sub(&lu).frobenius_norm();
            assert!(err <= 1e-12 * a.frobenius_norm(), "seed {seed}: {err:e}");
        }
    }
}
