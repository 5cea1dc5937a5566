//! Step policies: how a proposed Krylov update `d` becomes the next iterate.
//!
//! * [`StepPolicy::Classic`] takes the step as proposed, `x + d`.
//! * [`StepPolicy::LineSearch`] scales it by the residual-minimizing
//!   `α = rᵀ(Ad) / ‖Ad‖²`.
//! * [`StepPolicy::TwoDimLs`] minimizes `‖b − A(c₁x + c₂d)‖` over both
//!   coefficients via the (truncated) 2×2 normal equations.
//!
//! The two stabilized policies never let the tracked residual norm grow by
//! more than a factor `1 + 64ε` per step.

use std::fmt;
use std::str::FromStr;

use crate::linalg::vector::{self, all_finite, dot, norm2};
use crate::linalg::{residual, solve_ls_2x2, LinearOperator, DEFAULT_LS_REL_TOL};

/// Default period of the true-residual recomputation.
pub const DEFAULT_RECOMPUTE_PERIOD: usize = 50;

/// Allowed per-step growth of the residual norm under stabilized policies.
pub const MONOTONE_SLACK: f64 = 1.0 + 64.0 * f64::EPSILON;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StepPolicy {
    Classic,
    LineSearch {
        recompute_period: usize,
    },
    TwoDimLs {
        ls_rel_tol: f64,
        recompute_period: usize,
    },
}

impl StepPolicy {
    pub fn line_search() -> Self {
        StepPolicy::LineSearch {
            recompute_period: DEFAULT_RECOMPUTE_PERIOD,
        }
    }

    pub fn two_dim() -> Self {
        StepPolicy::TwoDimLs {
            ls_rel_tol: DEFAULT_LS_REL_TOL,
            recompute_period: DEFAULT_RECOMPUTE_PERIOD,
        }
    }

    pub fn is_stabilized(&self) -> bool {
        !matches!(self, StepPolicy::Classic)
    }

    pub fn name(&self) -> &'static str {
        match self {
            StepPolicy::Classic => "classic",
            StepPolicy::LineSearch { .. } => "linesearch",
            StepPolicy::TwoDimLs { .. } => "twodim",
        }
    }

    pub fn validate(&self) -> Result<(), String> {
        match *self {
            StepPolicy::Classic => Ok(()),
            StepPolicy::LineSearch { recompute_period } => {
                if recompute_period == 0 {
                    return Err("recompute_period must be >= 1".into());
                }
                Ok(())
            }
            StepPolicy::TwoDimLs {
                ls_rel_tol,
                recompute_period,
            } => {
                if recompute_period == 0 {
                    return Err("recompute_period must be >= 1".into());
                }
                if !(ls_rel_tol > 0.0 && ls_rel_tol < 1.0) {
                    return Err(format!("ls_rel_tol must lie in (0, 1), got {ls_rel_tol}"));
                }
                Ok(())
            }
        }
    }
}

impl fmt::Display for StepPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for StepPolicy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "classic" => Ok(StepPolicy::Classic),
            "linesearch" | "line-search" | "ls" => Ok(StepPolicy::line_search()),
            "twodim" | "twodimls" | "2d" => Ok(StepPolicy::two_dim()),
            other => Err(format!(
                "unknown policy `{other}` (expected classic, linesearch, twodim)"
            )),
        }
    }
}

/// Coefficients a policy applied to the proposed step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StepCoefficients {
    /// Classic: `x + d`.
    Unit,
    /// `x + α·d`
    Alpha(f64),
    /// `c₁·x + c₂·d`
    Pair([f64; 2]),
}

#[derive(Debug, Clone)]
pub struct StepOutcome {
    pub x_next: Vec<f64>,
    /// Residual handed back to the Krylov method.
    pub r_next: Vec<f64>,
    /// Norm recorded in the residual history. Equals `‖r_next‖` except for
    /// classic steps on a recomputation iteration, which report the true
    /// residual norm.
    pub residual_norm: f64,
    pub coefficients: StepCoefficients,
    /// A guard rejected or replaced the proposed step.
    pub fallback_taken: bool,
    /// `r_next` was computed from scratch as `b − A·x_next`.
    pub recomputed: bool,
    /// `A·x_next`, maintained by the two-dimensional policy.
    pub ax_next: Option<Vec<f64>>,
    /// Estimated bound on `‖r_next − (b − A·x_next)‖` from rounding in the
    /// update recurrences.
    pub drift_estimate: f64,
}

impl StepOutcome {
    fn unchanged(x: &[f64], r: &[f64], fallback: bool, drift: f64) -> Self {
        Self {
            x_next: x.to_vec(),
            r_next: r.to_vec(),
            residual_norm: norm2(r),
            coefficients: StepCoefficients::Alpha(0.0),
            fallback_taken: fallback,
            recomputed: false,
            ax_next: None,
            drift_estimate: drift,
        }
    }
}

fn recompute_due(iter: usize, period: Option<usize>) -> bool {
    matches!(period, Some(p) if p > 0 && iter % p == 0)
}

/// Recurrence error, relative to `‖b‖`, beyond which a stabilized step is
/// checked against a from-scratch residual before it is accepted.
pub const VERIFY_REL_TOL: f64 = 1e-10;

/// Rounding model for the stabilized recurrences.
///
/// Forming `A·v` carries an error of roughly `ε·√n·‖A‖_F·‖v‖`; once the
/// errors accumulated since the last fresh residual exceed
/// `VERIFY_REL_TOL·‖b‖`, the recurrence residual no longer certifies a
/// decrease and the step is verified explicitly.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DriftModel {
    unit: f64,
    budget: f64,
}

impl DriftModel {
    pub fn new(a: &dyn LinearOperator, b: &[f64]) -> Self {
        let n = a.nrows().max(1) as f64;
        Self {
            unit: f64::EPSILON * n.sqrt() * a.frobenius_norm(),
            budget: VERIFY_REL_TOL * norm2(b),
        }
    }

    /// Error estimate for an image `A·v` with `‖v‖ = v_norm`.
    pub fn image_error(&self, v_norm: f64) -> f64 {
        self.unit * v_norm
    }

    pub fn exceeded(&self, drift: f64) -> bool {
        !(drift <= self.budget)
    }
}

/// `α = rᵀw / ‖w‖²`, or `0` when `‖w‖²` is zero or not finite.
pub fn linesearch_alpha(r: &[f64], w: &[f64]) -> f64 {
    let ww = dot(w, w);
    if !(ww > 0.0) || !ww.is_finite() {
        return 0.0;
    }
    let alpha = dot(r, w) / ww;
    if alpha.is_finite() {
        alpha
    } else {
        0.0
    }
}

/// Classic update `x + d` with the method's own recurrence residual.
///
/// On recomputation iterations the reported norm is the true residual norm;
/// `r_next` itself is left as the recurrence so classical behavior is
/// unchanged.
pub fn apply_classic_step(
    a: &dyn LinearOperator,
    b: &[f64],
    x: &[f64],
    d: &[f64],
    r_classic: &[f64],
    iter: usize,
    period: Option<usize>,
) -> StepOutcome {
    let x_next = vector::add(x, d);
    let (residual_norm, recomputed) = if recompute_due(iter, period) {
        (norm2(&residual(a, b, &x_next)), true)
    } else {
        (norm2(r_classic), false)
    };
    StepOutcome {
        x_next,
        r_next: r_classic.to_vec(),
        residual_norm,
        coefficients: StepCoefficients::Unit,
        fallback_taken: false,
        recomputed,
        ax_next: None,
        drift_estimate: 0.0,
    }
}

/// Line-search update along `d`.
///
/// The residual is recomputed from scratch every `period`-th iteration,
/// whenever `α` is zero, and whenever the estimated rounding drift of the
/// recurrence exceeds [`VERIFY_REL_TOL`]`·‖b‖`. A step whose fresh residual
/// is larger than `‖r‖·(1 + 64ε)` is rejected and the iterate kept.
pub fn apply_linesearch_step(
    a: &dyn LinearOperator,
    b: &[f64],
    x: &[f64],
    r: &[f64],
    d: &[f64],
    iter: usize,
    period: usize,
) -> StepOutcome {
    let model = DriftModel::new(a, b);
    line_search(a, b, x, r, d, iter, period, 0.0, &model)
}

#[allow(clippy::too_many_arguments)]
fn line_search(
    a: &dyn LinearOperator,
    b: &[f64],
    x: &[f64],
    r: &[f64],
    d: &[f64],
    iter: usize,
    period: usize,
    drift: f64,
    model: &DriftModel,
) -> StepOutcome {
    if !all_finite(d) {
        return StepOutcome::unchanged(x, r, true, drift);
    }
    let w = a.apply(d);
    line_search_with_image(a, b, x, r, d, &w, iter, Some(period), None, drift, model)
}

#[allow(clippy::too_many_arguments)]
fn line_search_with_image(
    a: &dyn LinearOperator,
    b: &[f64],
    x: &[f64],
    r: &[f64],
    d: &[f64],
    w: &[f64],
    iter: usize,
    period: Option<usize>,
    ax: Option<&[f64]>,
    drift_in: f64,
    model: &DriftModel,
) -> StepOutcome {
    let r_norm = norm2(r);
    let bound = r_norm * MONOTONE_SLACK;
    let mut alpha = linesearch_alpha(r, w);

    let (mut x_next, mut r_next) = if alpha == 0.0 {
        (x.to_vec(), r.to_vec())
    } else {
        let mut xn = x.to_vec();
        vector::axpy(alpha, d, &mut xn);
        (xn, vector::sub_scaled(r, alpha, w))
    };
    let mut r_next_norm = norm2(&r_next);
    let mut drift = drift_in + model.image_error(alpha.abs() * norm2(d));
    let mut fallback = false;
    if !(r_next_norm <= bound) || !all_finite(&x_next) {
        // Rounding (or overflow in w) defeated the minimizer; stay put.
        alpha = 0.0;
        x_next = x.to_vec();
        r_next = r.to_vec();
        r_next_norm = r_norm;
        drift = drift_in;
        fallback = true;
    }

    let mut recomputed = false;
    let mut fresh_ax = None;
    if alpha == 0.0 || recompute_due(iter, period) || model.exceeded(drift) {
        let ax_true = a.apply(&x_next);
        let r_true = vector::sub(b, &ax_true);
        let true_norm = norm2(&r_true);
        if true_norm <= bound && all_finite(&r_true) {
            r_next = r_true;
            r_next_norm = true_norm;
            recomputed = true;
            drift = 0.0;
            fresh_ax = Some(ax_true);
        } else if alpha != 0.0 {
            // The recurrence promised a decrease the iterate does not have.
            alpha = 0.0;
            x_next = x.to_vec();
            r_next = r.to_vec();
            r_next_norm = r_norm;
            drift = drift_in;
            fallback = true;
        }
    }

    let ax_next = ax.map(|u| {
        fresh_ax.unwrap_or_else(|| {
            let mut un = u.to_vec();
            if alpha != 0.0 {
                vector::axpy(alpha, w, &mut un);
            }
            un
        })
    });

    StepOutcome {
        x_next,
        r_next,
        residual_norm: r_next_norm,
        coefficients: StepCoefficients::Alpha(alpha),
        fallback_taken: fallback,
        recomputed,
        ax_next,
        drift_estimate: drift,
    }
}

/// Coefficients `c` minimizing `‖b − A·(c₁x + c₂d)‖` in the truncated
/// least-squares sense.
pub fn twodim_coeffs(
    a: &dyn LinearOperator,
    x: &[f64],
    d: &[f64],
    b: &[f64],
    ls_rel_tol: f64,
) -> [f64; 2] {
    let u = a.apply(x);
    let w = a.apply(d);
    twodim_coeffs_from_images(&u, &w, b, ls_rel_tol)
}

/// As [`twodim_coeffs`], given the images `u = A·x` and `w = A·d`.
///
/// The Gram matrix is formed from the unit-normalized images so that the
/// eigenvalue truncation measures collinearity of the two directions rather
/// than their relative scale; zero images are treated as absent columns.
pub fn twodim_coeffs_from_images(u: &[f64], w: &[f64], b: &[f64], ls_rel_tol: f64) -> [f64; 2] {
    let su = norm2(u);
    let sw = norm2(w);
    let live_u = su > 0.0 && su.is_finite();
    let live_w = sw > 0.0 && sw.is_finite();

    let uh: Vec<f64> = if live_u {
        vector::scaled(1.0 / su, u)
    } else {
        Vec::new()
    };
    let wh: Vec<f64> = if live_w {
        vector::scaled(1.0 / sw, w)
    } else {
        Vec::new()
    };

    let (g11, h1) = if live_u { (dot(&uh, &uh), dot(&uh, b)) } else { (0.0, 0.0) };
    let (g22, h2) = if live_w { (dot(&wh, &wh), dot(&wh, b)) } else { (0.0, 0.0) };
    let g12 = if live_u && live_w { dot(&uh, &wh) } else { 0.0 };

    let c = solve_ls_2x2([[g11, g12], [g12, g22]], [h1, h2], ls_rel_tol);
    [
        if live_u { c[0] / su } else { 0.0 },
        if live_w { c[1] / sw } else { 0.0 },
    ]
}

/// Two-dimensional update `x_next = c₁·x + c₂·d`.
///
/// `ax` is the running `A·x` image; when absent, on a recomputation
/// iteration, or once its estimated drift is too large, it is recomputed.
/// If the candidate residual exceeds `prev_residual_norm·(1 + 64ε)` the step
/// falls back to the line search along `d` (reusing `A·d`), so the residual
/// never grows.
#[allow(clippy::too_many_arguments)]
pub fn apply_twodim_step(
    a: &dyn LinearOperator,
    b: &[f64],
    x: &[f64],
    r: &[f64],
    d: &[f64],
    ls_rel_tol: f64,
    recompute_period: usize,
    iter: usize,
    ax: Option<&[f64]>,
    prev_residual_norm: f64,
) -> StepOutcome {
    let model = DriftModel::new(a, b);
    let drift = if ax.is_some() { 0.0 } else { f64::INFINITY };
    two_dim(a, b, x, r, d, ls_rel_tol, recompute_period, iter, ax, drift, prev_residual_norm, &model)
}

#[allow(clippy::too_many_arguments)]
fn two_dim(
    a: &dyn LinearOperator,
    b: &[f64],
    x: &[f64],
    r: &[f64],
    d: &[f64],
    ls_rel_tol: f64,
    recompute_period: usize,
    iter: usize,
    ax: Option<&[f64]>,
    drift_in: f64,
    prev_residual_norm: f64,
    model: &DriftModel,
) -> StepOutcome {
    if !all_finite(d) {
        let mut out = StepOutcome::unchanged(x, r, true, drift_in);
        out.ax_next = ax.map(<[f64]>::to_vec);
        return out;
    }
    let mut drift = drift_in;
    let fresh;
    let u: &[f64] = match ax {
        Some(u) if !recompute_due(iter, Some(recompute_period)) && !model.exceeded(drift) => u,
        _ => {
            fresh = a.apply(x);
            drift = 0.0;
            &fresh
        }
    };
    let w = a.apply(d);
    let c = twodim_coeffs_from_images(u, &w, b, ls_rel_tol);

    let x_c = vector::lincomb(c[0], x, c[1], d);
    let mut drift_c = c[0].abs() * drift + model.image_error(c[1].abs() * norm2(d));
    let mut recomputed = false;
    let u_c = if model.exceeded(drift_c) {
        drift_c = 0.0;
        recomputed = true;
        a.apply(&x_c)
    } else {
        vector::lincomb(c[0], u, c[1], &w)
    };
    let r_c = vector::sub(b, &u_c);
    let r_c_norm = norm2(&r_c);

    if r_c_norm <= prev_residual_norm * MONOTONE_SLACK && all_finite(&x_c) && all_finite(&r_c) {
        return StepOutcome {
            x_next: x_c,
            r_next: r_c,
            residual_norm: r_c_norm,
            coefficients: StepCoefficients::Pair(c),
            fallback_taken: false,
            recomputed,
            ax_next: Some(u_c),
            drift_estimate: drift_c,
        };
    }

    let mut out = line_search_with_image(a, b, x, r, d, &w, iter, None, Some(u), drift, model);
    out.fallback_taken = true;
    out
}

/// Applies a [`StepPolicy`] across iterations, carrying the state the
/// stabilized policies need between steps.
#[derive(Debug, Clone)]
pub struct Stepper {
    policy: StepPolicy,
    classic_period: Option<usize>,
    ax: Option<Vec<f64>>,
    drift: f64,
    model: Option<DriftModel>,
    fallbacks: usize,
}

impl Stepper {
    /// `classic_period` is the reporting recomputation period used by the
    /// classic policy (`None` disables it).
    pub fn new(policy: StepPolicy, classic_period: Option<usize>) -> Self {
        Self {
            policy,
            classic_period,
            ax: None,
            drift: 0.0,
            model: None,
            fallbacks: 0,
        }
    }

    pub fn policy(&self) -> StepPolicy {
        self.policy
    }

    pub fn fallback_count(&self) -> usize {
        self.fallbacks
    }

    #[allow(clippy::too_many_arguments)]
    pub fn step(
        &mut self,
        a: &dyn LinearOperator,
        b: &[f64],
        x: &[f64],
        r: &[f64],
        d: &[f64],
        r_classic: &[f64],
        iter: usize,
    ) -> StepOutcome {
        if self.policy.is_stabilized() && self.model.is_none() {
            self.model = Some(DriftModel::new(a, b));
        }
        let out = match (self.policy, self.model.as_ref()) {
            (StepPolicy::LineSearch { recompute_period }, Some(model)) => {
                line_search(a, b, x, r, d, iter, recompute_period, self.drift, model)
            }
            (
                StepPolicy::TwoDimLs {
                    ls_rel_tol,
                    recompute_period,
                },
                Some(model),
            ) => {
                let out = two_dim(
                    a,
                    b,
                    x,
                    r,
                    d,
                    ls_rel_tol,
                    recompute_period,
                    iter,
                    self.ax.as_deref(),
                    self.drift,
                    norm2(r),
                    model,
                );
                self.ax = out.ax_next.clone();
                out
            }
            _ => apply_classic_step(a, b, x, d, r_classic, iter, self.classic_period),
        };
        self.drift = out.drift_estimate;
        if out.fallback_taken {
            self.fallbacks += 1;
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::DenseMatrix;

    #[test]
    fn alpha_examples() {
        assert_eq!(linesearch_alpha(&[1.0, -2.0], &[1.0, -2.0]), 1.0);
        assert_eq!(linesearch_alpha(&[1.0, 0.0], &[0.0, 3.0]), 0.0);
        assert_eq!(linesearch_alpha(&[3.0, 4.0], &[0.0, 5.0]), 0.8);
        assert_eq!(linesearch_alpha(&[1.0, 1.0], &[0.0, 0.0]), 0.0);
        assert_eq!(linesearch_alpha(&[1.0, 1.0], &[f64::INFINITY, 0.0]), 0.0);
        assert_eq!(linesearch_alpha(&[1.0, 1.0], &[1e-170, 0.0]), 0.0);
    }

    #[test]
    fn alpha_projection_by_grid_search() {
        // r = [3,4], w = [0,5]: the minimum of ‖r − t·w‖ over a fine grid sits
        // at t = 0.8 with value 3.
        let r = [3.0, 4.0];
        let w = [0.0, 5.0];
        let (best_t, best) = (0..=20_000)
            .map(|k| -1.0 + 3.0 * k as f64 / 20_000.0)
            .map(|t| (t, norm2(&vector::sub_scaled(&r, t, &w))))
            .fold((0.0, f64::INFINITY), |acc, p| if p.1 < acc.1 { p } else { acc });
        assert!((best_t - 0.8).abs() < 2e-4);
        assert!((best - 3.0).abs() < 1e-6);
        let alpha = linesearch_alpha(&r, &w);
        assert_eq!(norm2(&vector::sub_scaled(&r, alpha, &w)), 3.0);
    }

    #[test]
    fn linesearch_exact_error_direction() {
        let a = DenseMatrix::from_diagonal(&[2.0, 4.0]);
        let b = [2.0, 4.0];
        let x = [0.0, 0.0];
        let r = b;
        let d = [1.0, 1.0];
        let out = apply_linesearch_step(&a, &b, &x, &r, &d, 1, 50);
        assert_eq!(out.coefficients, StepCoefficients::Alpha(1.0));
        assert_eq!(out.x_next, vec![1.0, 1.0]);
        assert_eq!(out.residual_norm, 0.0);
    }

    #[test]
    fn linesearch_zero_direction_keeps_state() {
        let a = DenseMatrix::identity(2);
        let b = [1.0, 2.0];
        let x = [0.5, 0.5];
        let r = [0.5, 1.5];
        let out = apply_linesearch_step(&a, &b, &x, &r, &[0.0, 0.0], 3, 50);
        assert_eq!(out.x_next, x.to_vec());
        assert_eq!(out.r_next, r.to_vec());
        assert!(out.recomputed);
    }

    #[test]
    fn linesearch_non_finite_direction_is_rejected() {
        let a = DenseMatrix::identity(2);
        let out = apply_linesearch_step(&a, &[1.0, 1.0], &[0.0, 0.0], &[1.0, 1.0], &[f64::NAN, 1.0], 1, 50);
        assert!(out.fallback_taken);
        assert_eq!(out.x_next, vec![0.0, 0.0]);
        assert!(all_finite(&out.r_next));
    }

    #[test]
    fn linesearch_overflowing_direction_stays_finite() {
        let a = DenseMatrix::from_diagonal(&[1e300, 1e300]);
        let d = [1e300, -1e300];
        let out = apply_linesearch_step(&a, &[1.0, 1.0], &[0.0, 0.0], &[1.0, 1.0], &d, 1, 50);
        assert!(all_finite(&out.x_next) && all_finite(&out.r_next));
        assert!(out.residual_norm <= 2f64.sqrt() * MONOTONE_SLACK);
    }

    #[test]
    fn twodim_examples() {
        let i2 = DenseMatrix::identity(2);
        let c = twodim_coeffs(&i2, &[1.0, 0.0], &[0.0, 1.0], &[2.0, 3.0], DEFAULT_LS_REL_TOL);
        assert_eq!(c, [2.0, 3.0]);

        // d = 0: only the x column survives.
        let c = twodim_coeffs(&i2, &[1.0, 2.0], &[0.0, 0.0], &[3.0, 1.0], DEFAULT_LS_REL_TOL);
        assert!((c[0] - 1.0).abs() < 1e-15 && c[1] == 0.0, "{c:?}");

        // Parallel columns: D·c is the projection of b on span{[1,1]}.
        let x = [1.0, 1.0];
        let c = twodim_coeffs(&i2, &x, &x, &[4.0, 0.0], DEFAULT_LS_REL_TOL);
        let dc = vector::lincomb(c[0], &x, c[1], &x);
        assert!((dc[0] - 2.0).abs() < 1e-14 && (dc[1] - 2.0).abs() < 1e-14);
        let res = norm2(&vector::sub(&[4.0, 0.0], &dc));
        assert!((res - 8f64.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn twodim_from_zero_iterate() {
        let i3 = DenseMatrix::identity(3);
        let b = [1.0, -2.0, 0.5];
        let x = [0.0; 3];
        let out = apply_twodim_step(&i3, &b, &x, &b, &b, DEFAULT_LS_REL_TOL, 50, 1, None, norm2(&b));
        assert!(!out.fallback_taken);
        assert!(out.residual_norm <= 1e-15);
        match out.coefficients {
            StepCoefficients::Pair(c) => assert!((c[1] - 1.0).abs() <= 1e-15, "{c:?}"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn twodim_keeps_optimal_iterate() {
        // x already solves the system restricted to span{x}: c = [1, 0].
        let a = DenseMatrix::identity(2);
        let b = [1.0, 0.0];
        let x = [1.0, 0.0];
        let r = [0.0, 0.0];
        let out = apply_twodim_step(&a, &b, &x, &r, &[0.0, 1.0], DEFAULT_LS_REL_TOL, 50, 1, None, 0.0);
        assert_eq!(out.x_next, x.to_vec());
        assert_eq!(out.residual_norm, 0.0);
    }

    #[test]
    fn classic_step_examples() {
        let a = DenseMatrix::identity(2);
        let b = [1.0, 2.0];
        let out = apply_classic_step(&a, &b, &[0.0, 0.0], &b, &[0.0, 0.0], 1, None);
        assert_eq!(out.x_next, b.to_vec());
        assert_eq!(out.residual_norm, 0.0);

        let x = [0.3, 0.1];
        let r = [0.7, 1.9];
        let out = apply_classic_step(&a, &b, &x, &[0.0, 0.0], &r, 1, None);
        assert_eq!(out.x_next, x.to_vec());
        assert_eq!(out.r_next, r.to_vec());
    }

    #[test]
    fn classic_recompute_reports_only() {
        let a = DenseMatrix::identity(2);
        let b = [1.0, 0.0];
        // A deliberately wrong recurrence residual.
        let fake = [5.0, 5.0];
        let out = apply_classic_step(&a, &b, &[0.0, 0.0], &[1.0, 0.0], &fake, 50, Some(50));
        assert_eq!(out.r_next, fake.to_vec());
        assert_eq!(out.residual_norm, 0.0);
        assert!(out.recomputed);
    }

    #[test]
    fn policy_parsing() {
        assert_eq!("classic".parse::<StepPolicy>().unwrap(), StepPolicy::Classic);
        assert_eq!("LineSearch".parse::<StepPolicy>().unwrap(), StepPolicy::line_search());
        assert_eq!("twodim".parse::<StepPolicy>().unwrap(), StepPolicy::two_dim());
        assert!("newton".parse::<StepPolicy>().is_err());
        assert!(StepPolicy::LineSearch { recompute_period: 0 }.validate().is_err());
        assert!(StepPolicy::TwoDimLs {
            ls_rel_tol: 1.0,
            recompute_period: 1
        }
        .validate()
        .is_err());
    }
}
