/// Relative eigenvalue cutoff for [`solve_ls_2x2`].
pub const DEFAULT_LS_REL_TOL: f64 = 1e-14;

/// Minimum-norm least-squares solution of the symmetric positive
/// semidefinite 2×2 system `g·c = h`.
///
/// `g` is diagonalized in closed form; eigen-directions whose eigenvalue is
/// at most `rel_tol` times the largest one are dropped, so singular and
/// nearly singular Gram matrices yield the pseudo-inverse solution. A zero
/// (or negative semidefinite) `g` returns the zero vector.
pub fn solve_ls_2x2(g: [[f64; 2]; 2], h: [f64; 2], rel_tol: f64) -> [f64; 2] {
    let a = g[0][0];
    let d = g[1][1];
    let b = 0.5 * (g[0][1] + g[1][0]);
    if !(a.is_finite() && b.is_finite() && d.is_finite() && h[0].is_finite() && h[1].is_finite())
    {
        return [0.0; 2];
    }

    let (pairs, lmax) = eig_sym_2x2(a, b, d);
    if !(lmax > 0.0) {
        return [0.0; 2];
    }
    let cutoff = rel_tol * lmax;
    let mut c = [0.0; 2];
    for (lambda, v) in pairs {
        if lambda <= cutoff {
            continue;
        }
        let coef = (v[0] * h[0] + v[1] * h[1]) / lambda;
        c[0] += coef * v[0];
        c[1] += coef * v[1];
    }
    c
}

/// Eigenpairs of `[[a, b], [b, d]]` with unit eigenvectors, plus the largest
/// eigenvalue.
fn eig_sym_2x2(a: f64, b: f64, d: f64) -> ([(f64, [f64; 2]); 2], f64) {
    if b == 0.0 {
        let pairs = [(a, [1.0, 0.0]), (d, [0.0, 1.0])];
        return (pairs, a.max(d));
    }
    let mean = 0.5 * (a + d);
    let half_diff = 0.5 * (a - d);
    let radius = half_diff.hypot(b);
    let l1 = mean + radius;
    // l1·l2 = det; avoids cancellation in mean − radius.
    let det = a * d - b * b;
    let l2 = if l1 != 0.0 { det / l1 } else { mean - radius };

    // Eigenvector of l1: (b, l1 − a) or (l1 − d, b); pick the larger one.
    let v1 = {
        let u = [b, l1 - a];
        let w = [l1 - d, b];
        let (x, y) = if u[0].hypot(u[1]) >= w[0].hypot(w[1]) {
            (u[0], u[1])
        } else {
            (w[0], w[1])
        };
        let nrm = x.hypot(y);
        [x / nrm, y / nrm]
    };
    let v2 = [-v1[1], v1[0]];
    ([(l1, v1), (l2, v2)], l1)
}
