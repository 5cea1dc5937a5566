//! Restarted GMRES and LGMRES.
//!
//! Both run flexible Arnoldi (modified Gram–Schmidt, Givens rotations) on the
//! right-preconditioned operator, so `r` stays the unpreconditioned residual.
//! One outer cycle is one iteration; the classical residual after a cycle is
//! recomputed as `b − A·(x + d)`.

use std::collections::VecDeque;

use super::{Breakdown, Ctx, Direction, DirectionSource};
use crate::linalg::vector::{self, axpy, dot, norm2};

struct Cycle {
    dx: Vec<f64>,
    /// `A·dx`, assembled from the Arnoldi relation.
    adx: Vec<f64>,
}

fn givens(a: f64, b: f64) -> (f64, f64) {
    if b == 0.0 {
        (1.0, 0.0)
    } else {
        let h = a.hypot(b);
        (a / h, b / h)
    }
}

/// One flexible Arnoldi cycle started from `r`. The first `inner` basis
/// directions come from `M⁻¹vⱼ`; the remaining ones are the supplied
/// `(z, A·z)` augmentation pairs.
fn flexible_cycle(
    ctx: &Ctx<'_>,
    r: &[f64],
    inner: usize,
    aug: &VecDeque<(Vec<f64>, Vec<f64>)>,
) -> Result<Cycle, Breakdown> {
    let n = r.len();
    let beta = norm2(r);
    if beta == 0.0 {
        return Ok(Cycle {
            dx: vec![0.0; n],
            adx: vec![0.0; n],
        });
    }
    if !beta.is_finite() {
        return Err(Breakdown {
            quantity: "beta",
            value: beta,
        });
    }

    let total = inner + aug.len();
    let mut v = vec![vector::scaled(1.0 / beta, r)];
    let mut z: Vec<Vec<f64>> = Vec::with_capacity(total);
    let mut h: Vec<Vec<f64>> = Vec::with_capacity(total);
    let mut rot: Vec<Vec<f64>> = Vec::with_capacity(total);
    let mut cs: Vec<f64> = Vec::with_capacity(total);
    let mut sn: Vec<f64> = Vec::with_capacity(total);
    let mut g = vec![beta];

    for j in 0..total {
        let (zj, mut w) = if j < inner {
            let zj = ctx.m.apply(&v[j]);
            let w = ctx.a.apply(&zj);
            (zj, w)
        } else {
            aug[j - inner].clone()
        };
        let w_norm = norm2(&w);
        if !w_norm.is_finite() {
            return Err(Breakdown {
                quantity: "arnoldi",
                value: w_norm,
            });
        }
        let mut col = vec![0.0; j + 2];
        for (i, vi) in v.iter().enumerate() {
            let hij = dot(&w, vi);
            col[i] = hij;
            axpy(-hij, vi, &mut w);
        }
        let h_next = norm2(&w);
        col[j + 1] = h_next;
        h.push(col.clone());

        let mut rc = col;
        for i in 0..j {
            let t = cs[i] * rc[i] + sn[i] * rc[i + 1];
            rc[i + 1] = -sn[i] * rc[i] + cs[i] * rc[i + 1];
            rc[i] = t;
        }
        let (c, s) = givens(rc[j], rc[j + 1]);
        rc[j] = c * rc[j] + s * rc[j + 1];
        rc[j + 1] = 0.0;
        cs.push(c);
        sn.push(s);
        let gj = g[j];
        g[j] = c * gj;
        g.push(-s * gj);
        rot.push(rc);
        z.push(zj);

        // Happy breakdown: the new direction is (numerically) in the span.
        if !(h_next > f64::EPSILON * w_norm) {
            break;
        }
        v.push(vector::scaled(1.0 / h_next, &w));
        if g[j + 1].abs() <= ctx.threshold {
            break;
        }
    }

    let mut k = rot.len();
    // A direction mapped to zero by a singular operator contributes nothing.
    if k > 0 && rot[k - 1][k - 1].abs() < 1e-300 {
        k -= 1;
    }
    let mut y = vec![0.0; k];
    for i in (0..k).rev() {
        let mut s = g[i];
        for jj in i + 1..k {
            s -= rot[jj][i] * y[jj];
        }
        let pivot = rot[i][i];
        if !(pivot.abs() >= 1e-300) || !pivot.is_finite() {
            return Err(Breakdown {
                quantity: "hessenberg pivot",
                value: pivot,
            });
        }
        y[i] = s / pivot;
    }

    let mut dx = vec![0.0; n];
    for (zj, yj) in z.iter().zip(&y) {
        axpy(*yj, zj, &mut dx);
    }
    let mut q = vec![0.0; k + 1];
    for (j, yj) in y.iter().enumerate() {
        for (i, hij) in h[j].iter().enumerate() {
            q[i] += hij * yj;
        }
    }
    let mut adx = vec![0.0; n];
    for (vi, qi) in v.iter().zip(&q) {
        axpy(*qi, vi, &mut adx);
    }
    if !vector::all_finite(&dx) {
        return Err(Breakdown {
            quantity: "direction",
            value: f64::NAN,
        });
    }
    Ok(Cycle { dx, adx })
}

fn finish(ctx: &Ctx<'_>, x: &[f64], dx: Vec<f64>) -> Direction {
    let x_new = vector::add(x, &dx);
    Direction {
        r_classic: crate::linalg::residual(ctx.a, ctx.b, &x_new),
        d: dx,
    }
}

#[derive(Debug)]
pub(crate) struct Gmres {
    restart: usize,
}

impl Gmres {
    pub(crate) fn new(restart: usize) -> Self {
        Self { restart }
    }
}

impl DirectionSource for Gmres {
    fn next(&mut self, ctx: &Ctx<'_>, x: &[f64], r: &[f64]) -> Result<Direction, Breakdown> {
        let cycle = flexible_cycle(ctx, r, self.restart, &VecDeque::new())?;
        Ok(finish(ctx, x, cycle.dx))
    }
}

/// GMRES whose cycles are augmented with normalized error approximations
/// from the most recent restarts.
#[derive(Debug)]
pub(crate) struct Lgmres {
    inner: usize,
    augment: usize,
    history: VecDeque<(Vec<f64>, Vec<f64>)>,
}

impl Lgmres {
    pub(crate) fn new(inner: usize, augment: usize) -> Self {
        Self {
            inner,
            augment,
            history: VecDeque::new(),
        }
    }
}

impl DirectionSource for Lgmres {
    fn next(&mut self, ctx: &Ctx<'_>, x: &[f64], r: &[f64]) -> Result<Direction, Breakdown> {
        let cycle = flexible_cycle(ctx, r, self.inner, &self.history)?;
        let nx = norm2(&cycle.dx);
        if self.augment > 0 && nx > 0.0 && nx.is_finite() {
            self.history.push_back((
                vector::scaled(1.0 / nx, &cycle.dx),
                vector::scaled(1.0 / nx, &cycle.adx),
            ));
            while self.history.len() > self.augment {
                self.history.pop_front();
            }
        }
        Ok(finish(ctx, x, cycle.dx))
    }
}
