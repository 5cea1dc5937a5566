//! Krylov subspace solvers driven by a pluggable step policy.
//!
//! Every method is written as a direction generator: given the current
//! iterate and residual it proposes the classical update `d` and the residual
//! the unmodified method would carry. [`krylov_solve`] hands that proposal to
//! a [`Stepper`], which decides the step actually taken.

mod gmres;
mod precond;
mod short;

use std::fmt;
use std::str::FromStr;
use std::time::{Duration, Instant};

pub use precond::{jacobi_preconditioner, Preconditioner, PreconditionerKind};

use crate::linalg::vector::{all_finite, norm2, sub};
use crate::linalg::{residual, LinalgError, LinearOperator};
use crate::stabilize::{StepPolicy, Stepper, DEFAULT_RECOMPUTE_PERIOD, MONOTONE_SLACK};

/// Scalars with magnitude below this are treated as a breakdown.
pub const BREAKDOWN_TOL: f64 = 1e-300;
/// Consecutive near-flat iterations before a stabilized run gives up.
pub const STAGNATION_WINDOW: usize = 200;
/// Relative decrease below which an iteration counts as flat.
pub const STAGNATION_REL_TOL: f64 = 1e-15;
/// Allowed recurrence drift, relative to `‖b‖`, when invariant checks run.
pub const DRIFT_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    Cg,
    Bicg,
    Bicgstab,
    Cgs,
    Gmres { restart: usize },
    Lgmres { inner: usize, augment: usize },
    Tfqmr,
}

impl Method {
    pub const ALL: [Method; 7] = [
        Method::Cg,
        Method::Bicg,
        Method::Bicgstab,
        Method::Cgs,
        Method::gmres(),
        Method::lgmres(),
        Method::Tfqmr,
    ];

    pub const fn gmres() -> Self {
        Method::Gmres { restart: 20 }
    }

    pub const fn lgmres() -> Self {
        Method::Lgmres {
            inner: 30,
            augment: 3,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Method::Cg => "cg",
            Method::Bicg => "bicg",
            Method::Bicgstab => "bicgstab",
            Method::Cgs => "cgs",
            Method::Gmres { .. } => "gmres",
            Method::Lgmres { .. } => "lgmres",
            Method::Tfqmr => "tfqmr",
        }
    }

    fn validate(&self) -> Result<(), SolveError> {
        match *self {
            Method::Gmres { restart: 0 } | Method::Lgmres { inner: 0, .. } => Err(
                SolveError::InvalidOptions("inner Krylov dimension must be at least 1".into()),
            ),
            _ => Ok(()),
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = String;

    /// Accepts the bare names, plus `gmres:<restart>` and
    /// `lgmres:<inner>:<augment>`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let lower = s.trim().to_ascii_lowercase();
        let mut parts = lower.split(':');
        let head = parts.next().unwrap_or_default();
        let nums: Vec<usize> = parts
            .map(|p| p.parse::<usize>().map_err(|e| format!("bad parameter in `{s}`: {e}")))
            .collect::<Result<_, _>>()?;
        let method = match (head, nums.as_slice()) {
            ("cg", []) => Method::Cg,
            ("bicg", []) => Method::Bicg,
            ("bicgstab", []) => Method::Bicgstab,
            ("cgs", []) => Method::Cgs,
            ("tfqmr", []) => Method::Tfqmr,
            ("gmres", []) => Method::gmres(),
            ("gmres", [m]) => Method::Gmres { restart: *m },
            ("lgmres", []) => Method::lgmres(),
            ("lgmres", [i, k]) => Method::Lgmres {
                inner: *i,
                augment: *k,
            },
            _ => return Err(format!("unknown method `{s}`")),
        };
        method.validate().map_err(|e| e.to_string())?;
        Ok(method)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Termination {
    Converged,
    MaxIter,
    Breakdown,
    Stagnation,
}

impl Termination {
    pub fn as_str(&self) -> &'static str {
        match self {
            Termination::Converged => "converged",
            Termination::MaxIter => "maxiter",
            Termination::Breakdown => "breakdown",
            Termination::Stagnation => "stagnation",
        }
    }
}

impl fmt::Display for Termination {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A method scalar vanished or stopped being finite.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("breakdown: {quantity} = {value:e}")]
pub struct Breakdown {
    pub quantity: &'static str,
    pub value: f64,
}

pub(crate) fn guard(quantity: &'static str, value: f64) -> Result<f64, Breakdown> {
    if value.is_finite() && value.abs() >= BREAKDOWN_TOL {
        Ok(value)
    } else {
        Err(Breakdown { quantity, value })
    }
}

#[derive(Debug, thiserror::Error)]
pub enum SolveError {
    #[error("operator must be square, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },
    #[error("{what} has length {found}, expected {expected}")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        found: usize,
    },
    #[error("invalid solver options: {0}")]
    InvalidOptions(String),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

#[derive(Debug, Clone)]
pub struct SolveOptions {
    pub rtol: f64,
    pub atol: f64,
    /// Defaults to `10·n`.
    pub maxiter: Option<usize>,
    /// Defaults to the zero vector.
    pub x0: Option<Vec<f64>>,
    pub preconditioner: PreconditionerKind,
    pub policy: StepPolicy,
    /// Period of the from-scratch residual reported by the classic policy and
    /// of the drift check; `None` disables both.
    pub residual_recompute_period: Option<usize>,
    /// Record monotonicity and drift violations in the report.
    pub invariant_checks: bool,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            rtol: 1e-8,
            atol: 0.0,
            maxiter: None,
            x0: None,
            preconditioner: PreconditionerKind::Identity,
            policy: StepPolicy::Classic,
            residual_recompute_period: Some(DEFAULT_RECOMPUTE_PERIOD),
            invariant_checks: false,
        }
    }
}

impl SolveOptions {
    pub fn with_policy(policy: StepPolicy) -> Self {
        Self {
            policy,
            ..Self::default()
        }
    }

    fn validate(&self) -> Result<(), SolveError> {
        if !(self.rtol >= 0.0 && self.rtol.is_finite()) {
            return Err(SolveError::InvalidOptions(format!("rtol = {}", self.rtol)));
        }
        if !(self.atol >= 0.0 && self.atol.is_finite()) {
            return Err(SolveError::InvalidOptions(format!("atol = {}", self.atol)));
        }
        if self.rtol == 0.0 && self.atol == 0.0 {
            return Err(SolveError::InvalidOptions(
                "rtol and atol cannot both be zero".into(),
            ));
        }
        if self.maxiter == Some(0) {
            return Err(SolveError::InvalidOptions("maxiter must be at least 1".into()));
        }
        if self.residual_recompute_period == Some(0) {
            return Err(SolveError::InvalidOptions(
                "residual_recompute_period must be positive".into(),
            ));
        }
        self.policy.validate().map_err(SolveError::InvalidOptions)
    }
}

#[derive(Debug, Clone)]
pub struct SolveReport {
    pub x: Vec<f64>,
    /// Residual norm before the first iteration and after each one.
    pub residual_history: Vec<f64>,
    pub iterations: usize,
    pub termination: Termination,
    pub elapsed: Duration,
    /// `‖b − A·x‖`, computed from scratch.
    pub final_true_residual: f64,
    pub fallback_count: usize,
    pub breakdown: Option<Breakdown>,
    pub invariant_violations: Vec<String>,
}

impl SolveReport {
    pub fn converged(&self) -> bool {
        self.termination == Termination::Converged
    }
}

/// Proposal from one iteration of a Krylov method.
#[derive(Debug, Clone)]
pub struct Direction {
    /// Update the classical method would add to `x`.
    pub d: Vec<f64>,
    /// Residual the classical method would carry after adding `d`.
    pub r_classic: Vec<f64>,
}

pub(crate) struct Ctx<'a> {
    pub a: &'a dyn LinearOperator,
    pub b: &'a [f64],
    pub m: &'a Preconditioner,
    pub threshold: f64,
}

pub(crate) trait DirectionSource {
    fn next(&mut self, ctx: &Ctx<'_>, x: &[f64], r: &[f64]) -> Result<Direction, Breakdown>;
}

/// Step-by-step driver over one Krylov method.
///
/// [`next_direction`](Self::next_direction) proposes an update from the
/// current state; [`accept`](Self::accept) installs whatever iterate and
/// residual the caller settled on. The method's auxiliary recurrences carry
/// on from there.
pub struct KrylovIterator<'a> {
    a: &'a dyn LinearOperator,
    b: &'a [f64],
    m: &'a Preconditioner,
    threshold: f64,
    source: Box<dyn DirectionSource>,
    x: Vec<f64>,
    r: Vec<f64>,
    iteration: usize,
}

impl<'a> KrylovIterator<'a> {
    /// `threshold` is the residual norm at which the solve will stop; only
    /// BiCGSTAB consults it, to end an iteration after its first half-step.
    pub fn new(
        a: &'a dyn LinearOperator,
        b: &'a [f64],
        method: Method,
        m: &'a Preconditioner,
        x0: Option<&[f64]>,
        threshold: f64,
    ) -> Result<Self, SolveError> {
        let n = check_dims(a, b, x0)?;
        method.validate()?;
        let x = x0.map_or_else(|| vec![0.0; n], <[f64]>::to_vec);
        let r = if x0.is_some() {
            residual(a, b, &x)
        } else {
            b.to_vec()
        };
        let ctx = Ctx {
            a,
            b,
            m,
            threshold,
        };
        let source: Box<dyn DirectionSource> = match method {
            Method::Cg => Box::new(short::Cg::default()),
            Method::Bicg => Box::new(short::Bicg::new(&r)),
            Method::Bicgstab => Box::new(short::Bicgstab::new(&r)),
            Method::Cgs => Box::new(short::Cgs::new(&r)),
            Method::Tfqmr => Box::new(short::Tfqmr::new(&ctx, &r)),
            Method::Gmres { restart } => Box::new(gmres::Gmres::new(restart)),
            Method::Lgmres { inner, augment } => Box::new(gmres::Lgmres::new(inner, augment)),
        };
        Ok(Self {
            a,
            b,
            m,
            threshold,
            source,
            x,
            r,
            iteration: 0,
        })
    }

    pub fn x(&self) -> &[f64] {
        &self.x
    }

    pub fn r(&self) -> &[f64] {
        &self.r
    }

    /// Number of accepted steps.
    pub fn iteration(&self) -> usize {
        self.iteration
    }

    pub fn next_direction(&mut self) -> Result<Direction, Breakdown> {
        let ctx = Ctx {
            a: self.a,
            b: self.b,
            m: self.m,
            threshold: self.threshold,
        };
        self.source.next(&ctx, &self.x, &self.r)
    }

    pub fn accept(&mut self, x: Vec<f64>, r: Vec<f64>) {
        debug_assert_eq!(x.len(), self.x.len());
        debug_assert_eq!(r.len(), self.r.len());
        self.x = x;
        self.r = r;
        self.iteration += 1;
    }

    pub fn into_solution(self) -> Vec<f64> {
        self.x
    }
}

fn check_dims(
    a: &dyn LinearOperator,
    b: &[f64],
    x0: Option<&[f64]>,
) -> Result<usize, SolveError> {
    let (rows, cols) = (a.nrows(), a.ncols());
    if rows != cols {
        return Err(SolveError::NotSquare { rows, cols });
    }
    if b.len() != rows {
        return Err(SolveError::DimensionMismatch {
            what: "b",
            expected: rows,
            found: b.len(),
        });
    }
    if let Some(x0) = x0 {
        if x0.len() != rows {
            return Err(SolveError::DimensionMismatch {
                what: "x0",
                expected: rows,
                found: x0.len(),
            });
        }
    }
    Ok(rows)
}

/// Solves `A·x = b` with `method`, applying `opts.policy` at every step.
///
/// Stops when the tracked residual norm reaches `max(rtol·‖b‖, atol)`.
pub fn krylov_solve(
    a: &dyn LinearOperator,
    b: &[f64],
    method: Method,
    opts: &SolveOptions,
) -> Result<SolveReport, SolveError> {
    let start = Instant::now();
    opts.validate()?;
    let n = check_dims(a, b, opts.x0.as_deref())?;
    let m = Preconditioner::build(opts.preconditioner, a)?;
    let maxiter = opts.maxiter.unwrap_or(10 * n);
    let b_norm = norm2(b);
    let threshold = (opts.rtol * b_norm).max(opts.atol);
    let stabilized = opts.policy.is_stabilized();

    let mut it = KrylovIterator::new(a, b, method, &m, opts.x0.as_deref(), threshold)?;
    let mut stepper = Stepper::new(opts.policy, opts.residual_recompute_period);
    let mut history = vec![norm2(it.r())];
    let mut violations = Vec::new();
    let mut breakdown = None;
    let mut flat = 0usize;

    let termination = if !history[0].is_finite() {
        Termination::Breakdown
    } else if history[0] <= threshold {
        Termination::Converged
    } else {
        loop {
            if it.iteration() >= maxiter {
                break Termination::MaxIter;
            }
            let k = it.iteration() + 1;
            let dir = match it.next_direction() {
                Ok(dir) => dir,
                Err(e) => {
                    breakdown = Some(e);
                    break Termination::Breakdown;
                }
            };
            let out = stepper.step(a, b, it.x(), it.r(), &dir.d, &dir.r_classic, k);
            if !all_finite(&out.x_next) || !all_finite(&out.r_next) {
                breakdown = Some(Breakdown {
                    quantity: "iterate",
                    value: f64::NAN,
                });
                break Termination::Breakdown;
            }

            let prev = *history.last().expect("history starts non-empty");
            if opts.invariant_checks && stabilized && !(out.residual_norm <= prev * MONOTONE_SLACK) {
                violations.push(format!(
                    "iteration {k}: residual rose from {prev:e} to {:e}",
                    out.residual_norm
                ));
            }
            it.accept(out.x_next, out.r_next);
            history.push(out.residual_norm);

            if opts.invariant_checks {
                if let Some(p) = opts.residual_recompute_period {
                    if k % p == 0 {
                        let drift = norm2(&sub(&residual(a, b, it.x()), it.r()));
                        if !(drift <= DRIFT_TOL * b_norm) {
                            violations.push(format!(
                                "iteration {k}: recurrence drift {drift:e} exceeds {:e}",
                                DRIFT_TOL * b_norm
                            ));
                        }
                    }
                }
            }

            if norm2(it.r()) <= threshold {
                break Termination::Converged;
            }
            if stabilized {
                let rel = if prev > 0.0 {
                    (prev - out.residual_norm) / prev
                } else {
                    0.0
                };
                if rel < STAGNATION_REL_TOL {
                    flat += 1;
                } else {
                    flat = 0;
                }
                if flat >= STAGNATION_WINDOW {
                    break Termination::Stagnation;
                }
            }
        }
    };

    let iterations = it.iteration();
    let x = it.into_solution();
    let final_true_residual = norm2(&residual(a, b, &x));
    Ok(SolveReport {
        x,
        residual_history: history,
        iterations,
        termination,
        elapsed: start.elapsed(),
        final_true_residual,
        fallback_count: stepper.fallback_count(),
        breakdown,
        invariant_violations: violations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::DenseMatrix;
    use crate::matgen::{random_rhs, random_symmetric_cond, RandomMatrixSpec};

    fn nonsymmetric(n: usize) -> DenseMatrix {
        DenseMatrix::from_fn(n, n, |i, j| {
            if i == j {
                4.0 + (i % 3) as f64
            } else if j == i + 1 {
                1.0
            } else if i == j + 1 {
                -0.5
            } else {
                0.0
            }
        })
    }

    #[test]
    fn method_names_round_trip() {
        for m in Method::ALL {
            assert_eq!(m.name().parse::<Method>().unwrap(), m);
        }
        assert_eq!("gmres:7".parse::<Method>().unwrap(), Method::Gmres { restart: 7 });
        assert_eq!(
            "LGMRES:10:2".parse::<Method>().unwrap(),
            Method::Lgmres { inner: 10, augment: 2 }
        );
        assert!("gmres:0".parse::<Method>().is_err());
        assert!("qmr".parse::<Method>().is_err());
    }

    #[test]
    fn classic_policy_solves_well_conditioned_systems() {
        let a = nonsymmetric(40);
        let b = random_rhs(40, 11);
        let spd = random_symmetric_cond(&RandomMatrixSpec::spd(40, 50.0, 4)).unwrap();
        for method in Method::ALL {
            let op: &dyn LinearOperator = if method == Method::Cg { &spd } else { &a };
            let rep = krylov_solve(op, &b, method, &SolveOptions::default()).unwrap();
            assert!(rep.converged(), "{method}: {:?}", rep.termination);
            assert!(rep.final_true_residual <= 1e-7 * norm2(&b), "{method}");
            assert_eq!(rep.residual_history.len(), rep.iterations + 1);
        }
    }

    #[test]
    fn stabilized_policies_converge_for_residual_minimizing_methods() {
        let a = nonsymmetric(40);
        let b = random_rhs(40, 11);
        let spd = random_symmetric_cond(&RandomMatrixSpec::spd(40, 50.0, 4)).unwrap();
        for policy in [StepPolicy::line_search(), StepPolicy::two_dim()] {
            for method in [Method::Cg, Method::Bicgstab, Method::gmres(), Method::lgmres()] {
                let op: &dyn LinearOperator = if method == Method::Cg { &spd } else { &a };
                let rep = krylov_solve(op, &b, method, &SolveOptions::with_policy(policy)).unwrap();
                assert!(rep.converged(), "{method} {policy}: {:?}", rep.termination);
                assert!(rep.final_true_residual <= 1e-7 * norm2(&b), "{method} {policy}");
            }
        }
    }

    #[test]
    fn stabilized_histories_never_rise() {
        let a = nonsymmetric(40);
        let b = random_rhs(40, 11);
        for policy in [StepPolicy::line_search(), StepPolicy::two_dim()] {
            for method in Method::ALL {
                let rep = krylov_solve(&a, &b, method, &SolveOptions::with_policy(policy)).unwrap();
                for w in rep.residual_history.windows(2) {
                    assert!(w[1] <= w[0] * MONOTONE_SLACK, "{method} {policy}");
                }
                assert!(rep.final_true_residual < norm2(&b), "{method} {policy}");
            }
        }
    }

    #[test]
    fn jacobi_preconditioning_helps_badly_scaled_diagonal() {
        let n = 30;
        let a = DenseMatrix::from_fn(n, n, |i, j| {
            if i == j {
                10f64.powi(i as i32 % 6)
            } else if i.abs_diff(j) == 1 {
                0.1
            } else {
                0.0
            }
        });
        let b = random_rhs(n, 3);
        let plain = krylov_solve(&a, &b, Method::Cg, &SolveOptions::default()).unwrap();
        let opts = SolveOptions {
            preconditioner: PreconditionerKind::Jacobi,
            ..SolveOptions::default()
        };
        let pre = krylov_solve(&a, &b, Method::Cg, &opts).unwrap();
        assert!(pre.converged());
        assert!(pre.iterations < plain.iterations);
        for method in Method::ALL {
            let rep = krylov_solve(&a, &b, method, &opts).unwrap();
            assert!(rep.converged(), "{method}");
            assert!(rep.final_true_residual <= 1e-7 * norm2(&b), "{method}");
        }
    }

    #[test]
    fn zero_rhs_converges_immediately() {
        let a = nonsymmetric(5);
        let rep = krylov_solve(&a, &[0.0; 5], Method::gmres(), &SolveOptions::default()).unwrap();
        assert_eq!(rep.termination, Termination::Converged);
        assert_eq!(rep.iterations, 0);
        assert_eq!(rep.x, vec![0.0; 5]);
        assert_eq!(rep.residual_history, vec![0.0]);
    }

    #[test]
    fn exact_initial_guess_converges_immediately() {
        let a = nonsymmetric(6);
        let x_true: Vec<f64> = (0..6).map(|i| i as f64 - 2.5).collect();
        let b = a.apply(&x_true);
        let opts = SolveOptions {
            x0: Some(x_true.clone()),
            ..SolveOptions::default()
        };
        let rep = krylov_solve(&a, &b, Method::Bicgstab, &opts).unwrap();
        assert_eq!(rep.iterations, 0);
        assert_eq!(rep.x, x_true);
    }

    #[test]
    fn maxiter_is_respected() {
        let a = nonsymmetric(50);
        let b = random_rhs(50, 1);
        let opts = SolveOptions {
            maxiter: Some(3),
            rtol: 1e-15,
            ..SolveOptions::default()
        };
        let rep = krylov_solve(&a, &b, Method::Bicg, &opts).unwrap();
        assert_eq!(rep.termination, Termination::MaxIter);
        assert_eq!(rep.iterations, 3);
        assert_eq!(rep.residual_history.len(), 4);
    }

    #[test]
    fn zero_matrix_reports_breakdown_with_finite_iterate() {
        let a = DenseMatrix::zeros(4, 4);
        for method in [Method::Cg, Method::Bicg, Method::Bicgstab, Method::Cgs, Method::Tfqmr] {
            let rep = krylov_solve(&a, &[1.0, 0.0, 0.0, 0.0], method, &SolveOptions::default())
                .unwrap();
            assert_eq!(rep.termination, Termination::Breakdown, "{method}");
            assert!(rep.breakdown.is_some());
            assert!(all_finite(&rep.x));
        }
    }

    #[test]
    fn bad_inputs_are_rejected() {
        let a = nonsymmetric(3);
        assert!(matches!(
            krylov_solve(&a, &[1.0; 4], Method::Cg, &SolveOptions::default()),
            Err(SolveError::DimensionMismatch { what: "b", .. })
        ));
        assert!(matches!(
            krylov_solve(&DenseMatrix::zeros(2, 3), &[1.0; 2], Method::Cg, &SolveOptions::default()),
            Err(SolveError::NotSquare { .. })
        ));
        let opts = SolveOptions {
            x0: Some(vec![0.0; 2]),
            ..SolveOptions::default()
        };
        assert!(krylov_solve(&a, &[1.0; 3], Method::Cg, &opts).is_err());
        let opts = SolveOptions {
            rtol: -1.0,
            ..SolveOptions::default()
        };
        assert!(krylov_solve(&a, &[1.0; 3], Method::Cg, &opts).is_err());
    }

    #[test]
    fn iterator_exposes_directions() {
        let a = nonsymmetric(8);
        let b = random_rhs(8, 2);
        let m = Preconditioner::identity();
        let mut it = KrylovIterator::new(&a, &b, Method::Cg, &m, None, 0.0).unwrap();
        let dir = it.next_direction().unwrap();
        let x1 = dir.d.clone();
        let expect = sub(&b, &a.apply(&x1));
        let gap = norm2(&sub(&expect, &dir.r_classic));
        assert!(gap <= 1e-13 * norm2(&b));
        it.accept(x1, dir.r_classic);
        assert_eq!(it.iteration(), 1);
    }
}
