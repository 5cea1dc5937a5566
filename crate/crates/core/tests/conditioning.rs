use stable_krylov::linalg::{cond2, sym_eig, DenseMatrix};
use stable_krylov::matgen::hilbert;

/// `cond₂(H_n)` for n = 3..=10 from a 60-digit symmetric eigensolver.
const HILBERT_COND: [(usize, f64); 8] = [
    (3, 524.056_777_586_060_8),
    (4, 15_513.738_738_932_588),
    (5, 476_607.250_242_560_8),
    (6, 14_951_058.640_131_217),
    (7, 475_367_354.988_178_99),
    (8, 15_257_575_741.646_943),
    (9, 493_154_926_971.542_1),
    (10, 16_026_286_870_216.883),
];

fn binom(n: i128, k: i128) -> i128 {
    if k < 0 || k > n {
        return 0;
    }
    let mut acc = 1i128;
    for i in 0..k {
        acc = acc * (n - i) / (i + 1);
    }
    acc
}

/// Exact integer inverse of the Hilbert matrix.
fn hilbert_inverse(n: usize) -> DenseMatrix {
    let nn = n as i128;
    DenseMatrix::from_fn(n, n, |i, j| {
        let (i, j) = (i as i128 + 1, j as i128 + 1);
        let sign = if (i + j) % 2 == 0 { 1 } else { -1 };
        let c = binom(i + j - 2, i - 1);
        let v = sign
            * (i + j - 1)
            * binom(nn + i - 1, nn - j)
            * binom(nn + j - 1, nn - i)
            * c
            * c;
        v as f64
    })
}

/// Dominant eigenvalue of a symmetric positive definite matrix.
fn power_iteration(a: &DenseMatrix) -> f64 {
    let n = a.rows();
    let mut v = vec![1.0; n];
    let mut lambda = 0.0;
    for _ in 0..10_000 {
        let w: Vec<f64> = (0..n)
            .map(|i| (0..n).map(|j| a.get(i, j) * v[j]).sum())
            .collect();
        let norm = w.iter().map(|x| x * x).sum::<f64>().sqrt();
        let next = v.iter().zip(&w).map(|(x, y)| x * y).sum::<f64>();
        v = w.iter().map(|x| x / norm).collect();
        if (next - lambda).abs() <= 1e-15 * next.abs() {
            return next;
        }
        lambda = next;
    }
    lambda
}

#[test]
fn inverse_oracle_is_exact_for_small_orders() {
    for n in 2..=6 {
        let prod = hilbert(n).unwrap().matmul(&hilbert_inverse(n)).unwrap();
        let err = prod.sub(&DenseMatrix::identity(n)).max_abs();
        assert!(err <= 1e-9, "n={n} err={err:e}");
    }
}

#[test]
fn frozen_values_agree_with_power_iteration_oracle() {
    for &(n, frozen) in HILBERT_COND.iter().take(6) {
        let oracle = power_iteration(&hilbert(n).unwrap()) * power_iteration(&hilbert_inverse(n));
        assert!((oracle / frozen - 1.0).abs() <= 1e-9, "n={n} oracle={oracle:e}");
    }
}

#[test]
fn cond2_matches_reference_values() {
    for &(n, frozen) in &HILBERT_COND {
        let got = cond2(&hilbert(n).unwrap()).unwrap();
        // Resolution of λmin degrades roughly like ε·cond.
        let tol = if n <= 6 { 1e-6 } else { 1e-3 };
        assert!((got / frozen - 1.0).abs() <= tol, "n={n} got={got:e}");
    }
}

#[test]
fn hilbert_growth_ratios() {
    let conds: Vec<f64> = (5..=9).map(|n| cond2(&hilbert(n).unwrap()).unwrap()).collect();
    for (k, w) in conds.windows(2).enumerate() {
        let ratio = w[1] / w[0];
        assert!((10.0..=40.0).contains(&ratio), "n={} ratio={ratio}", k + 5);
    }
}

#[test]
fn eigendecomposition_examples() {
    let e = sym_eig(&DenseMatrix::from_diagonal(&[3.0, 1.0, 2.0]), 1e-15).unwrap();
    assert_eq!(e.eigenvalues, vec![1.0, 2.0, 3.0]);
    let swap = DenseMatrix::from_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]);
    let e = sym_eig(&swap, 1e-15).unwrap();
    assert!((e.eigenvalues[0] + 1.0).abs() < 1e-15 && (e.eigenvalues[1] - 1.0).abs() < 1e-15);
    assert_eq!(cond2(&DenseMatrix::identity(4)).unwrap(), 1.0);
    assert_eq!(cond2(&DenseMatrix::from_diagonal(&[1.0, 10.0])).unwrap(), 10.0);
    assert!(cond2(&DenseMatrix::from_diagonal(&[0.0, 1.0])).unwrap().is_infinite());
}
