//! Rigorous adaptive Gauss-Legendre quadrature.
//!
//! On each panel the integrand is sampled at verified enclosures of the
//! Legendre nodes, and the truncation error is bounded through analyticity:
//! if `|f| <= M` on the Bernstein ellipse `E_rho` of the panel, the n-point
//! rule satisfies `|I - Q_n| <= (64/15) M / ((rho^2 - 1) rho^{2n-2})`
//! (Trefethen, Approximation Theory and Approximation Practice, Thm 19.3),
//! scaled by the half-length of the panel. `M` is obtained by evaluating the
//! integrand on a box cover of the ellipse boundary; an evaluation failure
//! (pole inside or near the ellipse) retries with a thinner ellipse, and a
//! panel whose certified error stays too large is bisected.

use crate::rigor::{BigFloat, ComplexBox, Interval, RigorCtx, Round};
use crate::{Error, Result};
use alloc::vec;
use alloc::vec::Vec;

/// Verified Gauss-Legendre nodes and weights on [-1, 1].
#[derive(Debug, Clone)]
pub struct GaussRule {
    pub n: usize,
    pub nodes: Vec<Interval>,
    pub weights: Vec<Interval>,
}

/// Legendre P_n and P_n' at an interval point.
fn legendre(n: usize, x: &Interval, prec: u32) -> (Interval, Interval) {
    let mut p0 = Interval::one();
    let mut p1 = x.clone();
    if n == 0 {
        return (p0, Interval::zero());
    }
    for k in 1..n {
        // (k+1) P_{k+1} = (2k+1) x P_k - k P_{k-1}
        let a = x
            .mul(&p1, prec)
            .mul_i64(2 * k as i64 + 1, prec)
            .sub(&p0.mul_i64(k as i64, prec), prec);
        let p2 = a
            .div(&Interval::from_i64(k as i64 + 1), prec)
            .expect("nonzero");
        p0 = p1;
        p1 = p2;
    }
    // P_n' = n (x P_n - P_{n-1}) / (x^2 - 1)
    let num = x.mul(&p1, prec).sub(&p0, prec).mul_i64(n as i64, prec);
    let den = x.sqr(prec).sub(&Interval::one(), prec);
    let d = num.div(&den, prec).unwrap_or_else(|_| Interval::entire());
    (p1, d)
}

impl GaussRule {
    /// Build a verified rule: f64 Newton for initial guesses, then interval
    /// Newton contraction to enclose each root.
    pub fn new(n: usize, rig: &RigorCtx) -> GaussRule {
        let prec = rig.prec;
        let mut nodes = Vec::with_capacity(n);
        let mut weights = Vec::with_capacity(n);
        for k in 0..n {
            // Tricomi-style initial guess.
            let theta = core::f64::consts::PI * (4.0 * k as f64 + 3.0) / (4.0 * n as f64 + 2.0);
            let mut x = libm::cos(theta);
            for _ in 0..60 {
                let (p, d) = legendre_f64(n, x);
                let step = p / d;
                x -= step;
                if step.abs() < 1e-16 {
                    break;
                }
            }
            // High-precision point Newton, then a verified sign-change
            // bracket around the limit (point evaluations keep the Legendre
            // recurrence numerically tame; wide-interval recurrences do not).
            let mut xm = Interval::from_f64(x);
            for _ in 0..(prec as usize / 40 + 8) {
                let (p, d) = legendre(n, &xm, prec);
                let step = match p.div(&d, prec) {
                    Ok(s) => s,
                    Err(_) => break,
                };
                xm = Interval::point(xm.sub(&step, prec).mid(prec));
            }
            let mut delta = crate::rigor::pow2(-(prec as i64) + 12);
            let mut enc = xm.clone();
            for _ in 0..16 {
                let lo = Interval::point(xm.lo.sub(&delta, prec, Round::Floor));
                let hi = Interval::point(xm.hi.add(&delta, prec, Round::Ceil));
                let (plo, _) = legendre(n, &lo, prec);
                let (phi, _) = legendre(n, &hi, prec);
                let opposite = (plo.is_strictly_positive() && phi.is_strictly_negative())
                    || (plo.is_strictly_negative() && phi.is_strictly_positive());
                if opposite {
                    enc = Interval::new(lo.lo, hi.hi);
                    break;
                }
                delta = delta.mul_pow2(4);
            }
            // w = 2 / ((1 - x^2) P_n'(x)^2). Evaluating P' on even a very
            // thin interval inflates ~2^n through the recurrence, so use the
            // midpoint value and widen by a Markov bound: on [-1,1],
            // |P_n''| <= n^2 (n^2 - 1) / 3.
            let (_, d_mid) = legendre(n, &Interval::point(enc.mid(prec)), prec);
            let rad = enc.width(prec).mul_pow2(-1);
            let markov = Interval::from_i64((n * n * (n * n - 1) / 3) as i64)
                .mul(&Interval::point(rad), prec)
                .mag();
            let d = d_mid.widen(&markov, prec);
            let w = Interval::from_i64(2)
                .div(
                    &Interval::one()
                        .sub(&enc.sqr(prec), prec)
                        .mul(&d.sqr(prec), prec),
                    prec,
                )
                .expect("interior node");
            nodes.push(enc);
            weights.push(w);
        }
        GaussRule { n, nodes, weights }
    }
}

fn legendre_f64(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0f64;
    let mut p1 = x;
    for k in 1..n {
        let p2 = ((2 * k + 1) as f64 * x * p1 - k as f64 * p0) / (k + 1) as f64;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// A complex-valued integrand over a real variable, evaluated at complex
/// points for the ellipse bound. Returns Err for poles/domain violations.
pub trait ComplexIntegrand {
    fn eval(&self, t: &ComplexBox) -> Result<ComplexBox>;
}

impl<F: Fn(&ComplexBox) -> Result<ComplexBox>> ComplexIntegrand for F {
    fn eval(&self, t: &ComplexBox) -> Result<ComplexBox> {
        self(t)
    }
}

/// Quadrature context: cached rules and knobs.
pub struct QuadCtx {
    pub rig: RigorCtx,
    pub rule: GaussRule,
    pub ellipse_arcs: usize,
    pub max_depth: usize,
}

impl QuadCtx {
    pub fn new(rig: &RigorCtx, n: usize) -> QuadCtx {
        QuadCtx {
            rig: rig.clone(),
            rule: GaussRule::new(n, rig),
            ellipse_arcs: 12,
            max_depth: 26,
        }
    }

    /// Certified sup bound of |f| over the closed Bernstein ellipse E_rho of
    /// [a, b] (covered by a grid of boxes over its bounding rectangle), or
    /// None when the integrand cannot be evaluated somewhere on the cover.
    /// Successful interval evaluation of the integrand on a box certifies
    /// holomorphy there, so a None also vetoes the analyticity hypothesis of
    /// the error bound.
    fn ellipse_bound(
        &self,
        f: &dyn ComplexIntegrand,
        a: &BigFloat,
        b: &BigFloat,
        rho: f64,
    ) -> Option<BigFloat> {
        let prec = self.rig.prec;
        let mid = Interval::point(Interval::new(a.clone(), b.clone()).mid(prec));
        let half = Interval::new(a.clone(), b.clone()).width(prec).mul_pow2(-1);
        let half = Interval::point(half);
        let ax = Interval::from_f64(0.5 * (rho + 1.0 / rho)).mul(&half, prec);
        let ay = Interval::from_f64(0.5 * (rho - 1.0 / rho)).mul(&half, prec);
        let nx = self.ellipse_arcs;
        let ny = (self.ellipse_arcs / 2).max(2);
        let mut best = BigFloat::Zero;
        for i in 0..nx {
            for j in 0..ny {
                // box [-1,1]^2 cell scaled to the bounding rectangle
                let sx = |k: usize| -> Interval {
                    Interval::from_ratio(2 * k as i64 - nx as i64, nx as i64, prec)
                };
                let sy = |k: usize| -> Interval {
                    Interval::from_ratio(2 * k as i64 - ny as i64, ny as i64, prec)
                };
                let ux = sx(i).hull(&sx(i + 1));
                let uy = sy(j).hull(&sy(j + 1));
                let re = mid.add(&ux.mul(&ax, prec), prec);
                let im = uy.mul(&ay, prec);
                let t = ComplexBox::new(re, im);
                match f.eval(&t) {
                    Ok(v) => {
                        let m = v.abs_mag(prec);
                        if !m.is_finite() {
                            return None;
                        }
                        if m.cmp(&best) == core::cmp::Ordering::Greater {
                            best = m;
                        }
                    }
                    Err(_) => return None,
                }
            }
        }
        Some(best)
    }

    /// One panel: value and certified error bound, trying a ladder of
    /// ellipse parameters.
    fn panel(
        &self,
        f: &dyn ComplexIntegrand,
        a: &BigFloat,
        b: &BigFloat,
    ) -> Result<(ComplexBox, BigFloat)> {
        let prec = self.rig.prec;
        let half = Interval::new(a.clone(), b.clone())
            .width(prec)
            .mul_pow2(-1);
        let mid = Interval::new(a.clone(), b.clone()).mid(prec);
        // Quadrature sum.
        let mut acc = ComplexBox::zero();
        for (x, w) in self.rule.nodes.iter().zip(&self.rule.weights) {
            let t = Interval::point(mid.clone()).add(&x.mul(&Interval::point(half.clone()), prec), prec);
            let v = f.eval(&ComplexBox::real(t))?;
            acc = acc.add(&v.mul_real(w, prec), prec);
        }
        acc = acc.mul_real(&Interval::point(half.clone()), prec);
        // Error bound via the ellipse ladder.
        let mut err: Option<BigFloat> = None;
        for rho in [48.0f64, 24.0, 12.0, 6.0, 3.0, 2.0, 1.5, 1.25, 1.1] {
            if let Some(m) = self.ellipse_bound(f, a, b, rho) {
                // (64/15) M / ((rho^2-1) rho^{2n-2}) * half-length
                let denom = (rho * rho - 1.0) * libm::pow(rho, 2.0 * self.rule.n as f64 - 2.0);
                let factor = Interval::from_f64(64.0 / 15.0 / denom);
                let e = Interval::point(m)
                    .mul(&factor, prec)
                    .mul(&Interval::point(half.clone()), prec)
                    .mag();
                err = Some(match err {
                    None => e,
                    Some(prev) => {
                        if e.cmp(&prev) == core::cmp::Ordering::Less {
                            e
                        } else {
                            prev
                        }
                    }
                });
            }
        }
        match err {
            Some(e) => Ok((acc, e)),
            None => Err(Error::ConvergenceDomain),
        }
    }

    /// Expose one panel for diagnostics.
    pub fn panel_public(
        &self,
        f: &dyn ComplexIntegrand,
        a: &BigFloat,
        b: &BigFloat,
    ) -> Result<(ComplexBox, BigFloat)> {
        self.panel(f, a, b)
    }

    /// Adaptive integration of f over [a, b] with certified absolute error
    /// at most `tol` (added to the result as an outward widening).
    pub fn integrate(
        &self,
        f: &dyn ComplexIntegrand,
        a: &BigFloat,
        b: &BigFloat,
        tol: &BigFloat,
    ) -> Result<ComplexBox> {
        let prec = self.rig.prec;
        struct Item {
            a: BigFloat,
            b: BigFloat,
            depth: usize,
        }
        let mut stack = vec![Item {
            a: a.clone(),
            b: b.clone(),
            depth: 0,
        }];
        let mut total = ComplexBox::zero();
        let mut err_total = BigFloat::Zero;
        let full = Interval::new(a.clone(), b.clone()).width(prec);
        while let Some(it) = stack.pop() {
            let len = Interval::new(it.a.clone(), it.b.clone()).width(prec);
            // proportional error budget (half of tol reserved for slack)
            let budget = tol
                .mul(&len, prec, Round::Floor)
                .div(&full, prec, Round::Floor)
                .mul_pow2(-1);
            // A panel whose ellipse ladder cannot be certified is bisected
            // (evaluation failures shrink away from singularities); only a
            // panel at maximal depth is a hard error.
            let attempt = self.panel(f, &it.a, &it.b);
            let (val, err) = match attempt {
                Ok(v) => v,
                Err(e) => {
                    if it.depth >= self.max_depth {
                        return Err(e);
                    }
                    let mid = Interval::new(it.a.clone(), it.b.clone()).mid(prec);
                    stack.push(Item {
                        a: it.a,
                        b: mid.clone(),
                        depth: it.depth + 1,
                    });
                    stack.push(Item {
                        a: mid,
                        b: it.b,
                        depth: it.depth + 1,
                    });
                    continue;
                }
            };
            if err.cmp(&budget) != core::cmp::Ordering::Greater || it.depth >= self.max_depth {
                if it.depth >= self.max_depth && err.cmp(&budget) == core::cmp::Ordering::Greater {
                    return Err(Error::InsufficientOrder);
                }
                total = total.add(&val, prec);
                err_total = err_total.add(&err, prec, Round::Ceil);
            } else {
                let mid = Interval::new(it.a.clone(), it.b.clone()).mid(prec);
                stack.push(Item {
                    a: it.a,
                    b: mid.clone(),
                    depth: it.depth + 1,
                });
                stack.push(Item {
                    a: mid,
                    b: it.b,
                    depth: it.depth + 1,
                });
            }
        }
        let ball = Interval::ball(&err_total);
        Ok(ComplexBox::new(
            total.re.add(&ball, prec),
            total.im.add(&ball, prec),
        ))
    }
}
