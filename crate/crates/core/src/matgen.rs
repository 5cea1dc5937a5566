//! Test-matrix families: Hilbert matrices, random symmetric matrices with a
//! prescribed condition number, and Gaussian right-hand sides.

use rand::Rng as _;
use rand_distr::{Distribution, StandardNormal};

use crate::linalg::{householder_qr, DenseMatrix, LinalgError};
use crate::rng::rng_from_seed;

/// `n×n` Hilbert matrix, `a_jk = 1/(j + k − 1)` with 1-based indices.
pub fn hilbert(n: usize) -> Result<DenseMatrix, LinalgError> {
    if n == 0 {
        return Err(LinalgError::Empty);
    }
    Ok(DenseMatrix::from_fn(n, n, |i, j| 1.0 / (i + j + 1) as f64))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Definiteness {
    #[default]
    Spd,
    /// A seeded random subset of eigenvalues is negated.
    Indefinite,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Spacing {
    /// `|λ_k| = c^{k/(n−1)}`
    #[default]
    Logarithmic,
    /// `|λ_k| = 1 + (c − 1)·k/(n−1)`
    Linear,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RandomMatrixSpec {
    pub n: usize,
    pub cond_target: f64,
    pub seed: u64,
    pub definiteness: Definiteness,
    pub spacing: Spacing,
}

impl RandomMatrixSpec {
    pub fn spd(n: usize, cond_target: f64, seed: u64) -> Self {
        Self {
            n,
            cond_target,
            seed,
            definiteness: Definiteness::Spd,
            spacing: Spacing::Logarithmic,
        }
    }

    pub fn indefinite(n: usize, cond_target: f64, seed: u64) -> Self {
        Self {
            definiteness: Definiteness::Indefinite,
            ..Self::spd(n, cond_target, seed)
        }
    }

    pub fn validate(&self) -> Result<(), MatgenError> {
        if self.n < 2 {
            return Err(MatgenError::DimensionTooSmall(self.n));
        }
        if !(self.cond_target >= 1.0) || !self.cond_target.is_finite() {
            return Err(MatgenError::InvalidCondition(self.cond_target));
        }
        Ok(())
    }

    /// Eigenvalue magnitudes from 1 to `cond_target`, both endpoints exact.
    pub fn magnitudes(&self) -> Vec<f64> {
        let n = self.n;
        let c = self.cond_target;
        let last = (n - 1) as f64;
        (0..n)
            .map(|k| {
                if k == 0 {
                    1.0
                } else if k == n - 1 {
                    c
                } else {
                    let t = k as f64 / last;
                    match self.spacing {
                        Spacing::Logarithmic => c.powf(t),
                        Spacing::Linear => 1.0 + (c - 1.0) * t,
                    }
                }
            })
            .collect()
    }
}

#[derive(Debug, thiserror::Error, Clone, PartialEq)]
pub enum MatgenError {
    #[error("random test matrices need n >= 2, got {0}")]
    DimensionTooSmall(usize),
    #[error("condition target must be finite and >= 1, got {0}")]
    InvalidCondition(f64),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// `A = Q·Λ·Qᵀ` with `Q` the orthogonal factor of a seeded Gaussian matrix
/// and `|Λ|` spread over `[1, c]`.
///
/// The upper triangle is computed and mirrored, so the result is exactly
/// symmetric.
pub fn random_symmetric_cond(spec: &RandomMatrixSpec) -> Result<DenseMatrix, MatgenError> {
    spec.validate()?;
    let n = spec.n;
    let mut rng = rng_from_seed(spec.seed);
    let g = DenseMatrix::from_fn(n, n, |_, _| StandardNormal.sample(&mut rng));
    let (q, _) = householder_qr(&g)?;

    let mut lambda = spec.magnitudes();
    if spec.definiteness == Definiteness::Indefinite {
        let mut flipped = 0;
        for l in lambda.iter_mut() {
            if rng.random_bool(0.5) {
                *l = -*l;
                flipped += 1;
            }
        }
        if flipped == 0 {
            let k = rng.random_range(0..n);
            lambda[k] = -lambda[k];
        }
    }

    let mut a = DenseMatrix::zeros(n, n);
    let mut scaled_row = vec![0.0; n];
    for i in 0..n {
        let qi = q.row(i);
        for (s, (qik, lk)) in scaled_row.iter_mut().zip(qi.iter().zip(&lambda)) {
            *s = qik * lk;
        }
        for j in i..n {
            let v = crate::linalg::vector::dot(&scaled_row, q.row(j));
            a.set(i, j, v);
            a.set(j, i, v);
        }
    }
    Ok(a)
}

/// Standard normal right-hand side.
pub fn random_rhs(n: usize, seed: u64) -> Vec<f64> {
    let mut rng = rng_from_seed(seed);
    (0..n).map(|_| StandardNormal.sample(&mut rng)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{cond2, sym_eig};

    #[test]
    fn hilbert_entries() {
        assert_eq!(hilbert(1).unwrap().as_slice(), &[1.0]);
        let h2 = hilbert(2).unwrap();
        assert_eq!(h2.as_slice(), &[1.0, 0.5, 0.5, 1.0 / 3.0]);
        assert_eq!(hilbert(3).unwrap().get(2, 2), 1.0 / 5.0);
        assert!(hilbert(0).is_err());
    }

    #[test]
    fn hilbert_is_bitwise_symmetric_and_positive() {
        for n in [1, 7, 64] {
            let h = hilbert(n).unwrap();
            assert_eq!(h.asymmetry(), 0.0);
            assert!(h.as_slice().iter().all(|&v| v > 0.0));
        }
    }

    #[test]
    fn spec_validation() {
        assert!(RandomMatrixSpec::spd(1, 10.0, 0).validate().is_err());
        assert!(RandomMatrixSpec::spd(4, 0.5, 0).validate().is_err());
        assert!(RandomMatrixSpec::spd(4, f64::NAN, 0).validate().is_err());
        assert!(random_symmetric_cond(&RandomMatrixSpec::spd(1, 10.0, 0)).is_err());
    }

    #[test]
    fn magnitude_endpoints_exact() {
        for spacing in [Spacing::Logarithmic, Spacing::Linear] {
            let spec = RandomMatrixSpec {
                spacing,
                ..RandomMatrixSpec::spd(7, 3.7e9, 0)
            };
            let m = spec.magnitudes();
            assert_eq!(m[0], 1.0);
            assert_eq!(m[6], 3.7e9);
            assert!(m.windows(2).all(|w| w[0] < w[1]));
        }
    }

    #[test]
    fn unit_condition_gives_identity() {
        let a = random_symmetric_cond(&RandomMatrixSpec::spd(20, 1.0, 3)).unwrap();
        assert!(a.sub(&DenseMatrix::identity(20)).max_abs() < 1e-14);
        assert!((cond2(&a).unwrap() - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn prescribed_condition_is_met() {
        let a = random_symmetric_cond(&RandomMatrixSpec::spd(50, 1e8, 17)).unwrap();
        let c = cond2(&a).unwrap();
        assert!((c / 1e8 - 1.0).abs() <= 1e-6, "cond {c:e}");
        assert!(a.asymmetry() == 0.0);
    }

    #[test]
    fn condition_matches_across_range() {
        for (k, c) in [1e2, 1e6, 1e10].into_iter().enumerate() {
            for def in [Definiteness::Spd, Definiteness::Indefinite] {
                let spec = RandomMatrixSpec {
                    definiteness: def,
                    ..RandomMatrixSpec::spd(40, c, k as u64)
                };
                let a = random_symmetric_cond(&spec).unwrap();
                let got = cond2(&a).unwrap();
                assert!((got / c - 1.0).abs() <= 1e-5, "{def:?} c={c:e} got={got:e}");
            }
        }
    }

    #[test]
    fn indefinite_has_both_signs_and_spd_is_positive() {
        let a = random_symmetric_cond(&RandomMatrixSpec::indefinite(30, 1e4, 5)).unwrap();
        let e = sym_eig(&a, 1e-14).unwrap();
        assert!(e.eigenvalues[0] < 0.0);
        assert!(e.eigenvalues[29] > 0.0);
        let a = random_symmetric_cond(&RandomMatrixSpec::spd(30, 1e4, 5)).unwrap();
        let e = sym_eig(&a, 1e-14).unwrap();
        assert!(e.eigenvalues[0] > 0.0);
    }

    #[test]
    fn generators_are_deterministic() {
        let spec = RandomMatrixSpec::indefinite(25, 1e5, 99);
        let a = random_symmetric_cond(&spec).unwrap();
        let b = random_symmetric_cond(&spec).unwrap();
        assert!(a.as_slice().iter().zip(b.as_slice()).all(|(x, y)| x.to_bits() == y.to_bits()));
        assert_ne!(a, random_symmetric_cond(&RandomMatrixSpec { seed: 100, ..spec }).unwrap());

        assert_eq!(random_rhs(50, 1), random_rhs(50, 1));
        assert_ne!(random_rhs(50, 1), random_rhs(50, 2));
    }

    #[test]
    fn rhs_moments() {
        for seed in [0u64, 1, 2] {
            let b = random_rhs(10_000, seed);
            let mean = b.iter().sum::<f64>() / b.len() as f64;
            let var = b.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (b.len() - 1) as f64;
            assert!(mean.abs() <= 0.05, "mean {mean}");
            assert!((0.94..=1.06).contains(&var), "var {var}");
        }
    }
}
