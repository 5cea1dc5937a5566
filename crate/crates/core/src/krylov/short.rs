//! Short-recurrence methods: CG, BiCG, CGS, BiCGSTAB and TFQMR.
//!
//! Each follows the textbook recurrences with the preconditioner applied so
//! that the tracked residual `r` is always the unpreconditioned `b − Ax`.
//! Every `next` call reads the current `r` (which a step policy may have
//! replaced) and returns the full classical update `d` together with the
//! residual the unmodified method would carry forward.

use super::{guard, Breakdown, Ctx, Direction, DirectionSource};
use crate::linalg::vector::{self, dot, norm2};

#[derive(Debug, Default)]
pub(crate) struct Cg {
    p: Vec<f64>,
    rho_prev: f64,
}

impl DirectionSource for Cg {
    fn next(&mut self, ctx: &Ctx<'_>, _x: &[f64], r: &[f64]) -> Result<Direction, Breakdown> {
        let z = ctx.m.apply(r);
        let rho = guard("rho", dot(r, &z))?;
        if self.p.is_empty() {
            self.p = z;
        } else {
            let beta = rho / self.rho_prev;
            for (pi, zi) in self.p.iter_mut().zip(&z) {
                *pi = zi + beta * *pi;
            }
        }
        let q = ctx.a.apply(&self.p);
        let curvature = guard("pAp", dot(&self.p, &q))?;
        let alpha = rho / curvature;
        self.rho_prev = rho;
        Ok(Direction {
            d: vector::scaled(alpha, &self.p),
            r_classic: vector::sub_scaled(r, alpha, &q),
        })
    }
}

#[derive(Debug)]
pub(crate) struct Bicg {
    r_shadow: Vec<f64>,
    p: Vec<f64>,
    p_shadow: Vec<f64>,
    rho_prev: f64,
}

impl Bicg {
    pub(crate) fn new(r0: &[f64]) -> Self {
        Self {
            r_shadow: r0.to_vec(),
            p: Vec::new(),
            p_shadow: Vec::new(),
            rho_prev: 0.0,
        }
    }
}

impl DirectionSource for Bicg {
    fn next(&mut self, ctx: &Ctx<'_>, _x: &[f64], r: &[f64]) -> Result<Direction, Breakdown> {
        let z = ctx.m.apply(r);
        let z_shadow = ctx.m.apply_transpose(&self.r_shadow);
        let rho = guard("rho", dot(&self.r_shadow, &z))?;
        if self.p.is_empty() {
            self.p = z;
            self.p_shadow = z_shadow;
        } else {
            let beta = rho / self.rho_prev;
            for (pi, zi) in self.p.iter_mut().zip(&z) {
                *pi = zi + beta * *pi;
            }
            for (pi, zi) in self.p_shadow.iter_mut().zip(&z_shadow) {
                *pi = zi + beta * *pi;
            }
        }
        let q = ctx.a.apply(&self.p);
        let q_shadow = ctx.a.apply_transpose(&self.p_shadow);
        let denom = guard("p~Ap", dot(&self.p_shadow, &q))?;
        let alpha = rho / denom;
        vector::axpy(-alpha, &q_shadow, &mut self.r_shadow);
        self.rho_prev = rho;
        Ok(Direction {
            d: vector::scaled(alpha, &self.p),
            r_classic: vector::sub_scaled(r, alpha, &q),
        })
    }
}

#[derive(Debug)]
pub(crate) struct Cgs {
    r_shadow: Vec<f64>,
    p: Vec<f64>,
    q: Vec<f64>,
    rho_prev: f64,
}

impl Cgs {
    pub(crate) fn new(r0: &[f64]) -> Self {
        Self {
            r_shadow: r0.to_vec(),
            p: Vec::new(),
            q: Vec::new(),
            rho_prev: 0.0,
        }
    }
}

impl DirectionSource for Cgs {
    fn next(&mut self, ctx: &Ctx<'_>, _x: &[f64], r: &[f64]) -> Result<Direction, Breakdown> {
        let rho = guard("rho", dot(&self.r_shadow, r))?;
        let u = if self.p.is_empty() {
            self.p = r.to_vec();
            r.to_vec()
        } else {
            let beta = rho / self.rho_prev;
            let u = vector::lincomb(1.0, r, beta, &self.q);
            for ((pi, ui), qi) in self.p.iter_mut().zip(&u).zip(&self.q) {
                *pi = ui + beta * (qi + beta * *pi);
            }
            u
        };
        let p_hat = ctx.m.apply(&self.p);
        let v_hat = ctx.a.apply(&p_hat);
        let sigma = guard("r~v", dot(&self.r_shadow, &v_hat))?;
        let alpha = rho / sigma;
        self.q = vector::sub_scaled(&u, alpha, &v_hat);
        let u_hat = ctx.m.apply(&vector::add(&u, &self.q));
        let au_hat = ctx.a.apply(&u_hat);
        self.rho_prev = rho;
        Ok(Direction {
            d: vector::scaled(alpha, &u_hat),
            r_classic: vector::sub_scaled(r, alpha, &au_hat),
        })
    }
}

#[derive(Debug)]
pub(crate) struct Bicgstab {
    r_shadow: Vec<f64>,
    p: Vec<f64>,
    v: Vec<f64>,
    rho_prev: f64,
    alpha: f64,
    omega: f64,
}

impl Bicgstab {
    pub(crate) fn new(r0: &[f64]) -> Self {
        Self {
            r_shadow: r0.to_vec(),
            p: Vec::new(),
            v: Vec::new(),
            rho_prev: 0.0,
            alpha: 0.0,
            omega: 0.0,
        }
    }
}

impl DirectionSource for Bicgstab {
    fn next(&mut self, ctx: &Ctx<'_>, _x: &[f64], r: &[f64]) -> Result<Direction, Breakdown> {
        let rho = guard("rho", dot(&self.r_shadow, r))?;
        if self.p.is_empty() {
            self.p = r.to_vec();
        } else {
            guard("omega", self.omega)?;
            let beta = (rho / self.rho_prev) * (self.alpha / self.omega);
            for ((pi, ri), vi) in self.p.iter_mut().zip(r).zip(&self.v) {
                *pi = ri + beta * (*pi - self.omega * vi);
            }
        }
        let p_hat = ctx.m.apply(&self.p);
        self.v = ctx.a.apply(&p_hat);
        let sigma = guard("r~v", dot(&self.r_shadow, &self.v))?;
        let alpha = rho / sigma;
        self.alpha = alpha;
        self.rho_prev = rho;
        let s = vector::sub_scaled(r, alpha, &self.v);

        // First half-step already meets the tolerance: stop there.
        if norm2(&s) <= ctx.threshold {
            return Ok(Direction {
                d: vector::scaled(alpha, &p_hat),
                r_classic: s,
            });
        }

        let s_hat = ctx.m.apply(&s);
        let t = ctx.a.apply(&s_hat);
        let tt = guard("t't", dot(&t, &t))?;
        let omega = guard("omega", dot(&t, &s) / tt)?;
        self.omega = omega;
        Ok(Direction {
            d: vector::lincomb(alpha, &p_hat, omega, &s_hat),
            r_classic: vector::sub_scaled(&s, omega, &t),
        })
    }
}

/// Transpose-free QMR on the right-preconditioned operator `A·M⁻¹`.
///
/// One iteration is the pair of half-steps sharing one `α`; the returned
/// update is the sum of both half-step corrections. TFQMR keeps no residual
/// vector of its own, so the classical residual is `r − A·d`.
#[derive(Debug)]
pub(crate) struct Tfqmr {
    r_shadow: Vec<f64>,
    w: Vec<f64>,
    u: Vec<f64>,
    bu: Vec<f64>,
    v: Vec<f64>,
    d: Vec<f64>,
    tau: f64,
    theta: f64,
    eta: f64,
    rho: f64,
    alpha: f64,
    half_step: usize,
}

impl Tfqmr {
    pub(crate) fn new(ctx: &Ctx<'_>, r0: &[f64]) -> Self {
        let bu = ctx.a.apply(&ctx.m.apply(r0));
        Self {
            r_shadow: r0.to_vec(),
            w: r0.to_vec(),
            u: r0.to_vec(),
            v: bu.clone(),
            bu,
            d: vec![0.0; r0.len()],
            tau: norm2(r0),
            theta: 0.0,
            eta: 0.0,
            rho: dot(r0, r0),
            alpha: 0.0,
            half_step: 0,
        }
    }
}

impl DirectionSource for Tfqmr {
    fn next(&mut self, ctx: &Ctx<'_>, _x: &[f64], r: &[f64]) -> Result<Direction, Breakdown> {
        let n = r.len();
        let mut correction = vec![0.0; n];
        for half in 0..2 {
            let even = self.half_step % 2 == 0;
            let mut u_next = None;
            if even {
                guard("rho", self.rho)?;
                let sigma = guard("v'r~", dot(&self.v, &self.r_shadow))?;
                self.alpha = self.rho / sigma;
                u_next = Some(vector::sub_scaled(&self.u, self.alpha, &self.v));
            }
            let alpha = self.alpha;
            vector::axpy(-alpha, &self.bu, &mut self.w);
            let coef = self.theta * self.theta * self.eta / alpha;
            for (di, ui) in self.d.iter_mut().zip(&self.u) {
                *di = ui + coef * *di;
            }
            let theta = norm2(&self.w) / guard("tau", self.tau)?;
            let c = 1.0 / (1.0 + theta * theta).sqrt();
            self.theta = theta;
            self.tau *= theta * c;
            self.eta = c * c * alpha;
            if !(self.eta.is_finite() && self.tau.is_finite()) {
                return Err(Breakdown {
                    quantity: "eta",
                    value: self.eta,
                });
            }
            vector::axpy(self.eta, &self.d, &mut correction);

            if let Some(u1) = u_next {
                self.u = u1;
                self.bu = ctx.a.apply(&ctx.m.apply(&self.u));
            } else {
                let rho_new = guard("rho", dot(&self.w, &self.r_shadow))?;
                let beta = rho_new / self.rho;
                let u_new = vector::lincomb(1.0, &self.w, beta, &self.u);
                let bu_new = ctx.a.apply(&ctx.m.apply(&u_new));
                for ((vi, bn), bo) in self.v.iter_mut().zip(&bu_new).zip(&self.bu) {
                    *vi = bn + beta * (bo + beta * *vi);
                }
                self.u = u_new;
                self.bu = bu_new;
                self.rho = rho_new;
            }
            self.half_step += 1;
            // Quasi-residual vanished after the first half-step.
            if half == 0 && self.tau < 1e-300 {
                break;
            }
        }
        let d = ctx.m.apply(&correction);
        if !vector::all_finite(&d) {
            return Err(Breakdown {
                quantity: "direction",
                value: f64::NAN,
            });
        }
        let ad = ctx.a.apply(&d);
        Ok(Direction {
            r_classic: vector::sub(r, &ad),
            d,
        })
    }
}
