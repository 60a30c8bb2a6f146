//! Elementary functions on intervals: exp, log, sin, cos, and the constants
//! pi and log 2 they depend on.
//!
//! Each point routine returns a rigorous enclosure built from a truncated
//! series plus an explicit remainder ball; interval versions combine endpoint
//! enclosures using monotonicity (with critical-point analysis for sin/cos).

use super::bigfloat::{BigFloat, Round};
use super::interval::Interval;
use crate::{Error, Result};
use alloc::vec::Vec;
use num_bigint::BigUint;

/// Machin's formula: pi = 16 atan(1/5) - 4 atan(1/239).
pub fn pi_enclosure(prec: u32) -> Interval {
    let wp = prec + 16;
    let a = atan_inv_u32(5, wp);
    let b = atan_inv_u32(239, wp);
    a.mul_pow2(4).sub(&b.mul_pow2(2), wp)
}

/// atan(1/q) for integer q >= 2, via the alternating Gregory series.
fn atan_inv_u32(q: u32, prec: u32) -> Interval {
    let q = Interval::from_i64(q as i64);
    let q2 = q.sqr(prec);
    let inv_q = q.recip(prec).unwrap();
    let inv_q2 = q2.recip(prec).unwrap();
    let mut term = inv_q.clone();
    let mut sum = Interval::zero();
    let mut k = 0i64;
    loop {
        let contrib = term
            .div(&Interval::from_i64(2 * k + 1), prec)
            .unwrap();
        sum = if k % 2 == 0 {
            sum.add(&contrib, prec)
        } else {
            sum.sub(&contrib, prec)
        };
        term = term.mul(&inv_q2, prec);
        k += 1;
        // Alternating series: remainder bounded by the next term.
        let bound = term.mag();
        if bound.log2_approx() < -(prec as i64) - 4 {
            let next = term.div(&Interval::from_i64(2 * k + 1), prec).unwrap();
            return sum.widen(&next.mag(), prec);
        }
    }
}

/// log 2 = 2 atanh(1/3) = 2 sum_{j>=0} (1/3)^(2j+1)/(2j+1).
pub fn ln2_enclosure(prec: u32) -> Interval {
    let wp = prec + 16;
    let third = Interval::from_ratio(1, 3, wp);
    let ninth = Interval::from_ratio(1, 9, wp);
    let mut term = third;
    let mut sum = Interval::zero();
    let mut j = 0i64;
    loop {
        sum = sum.add(&term.div(&Interval::from_i64(2 * j + 1), wp).unwrap(), wp);
        term = term.mul(&ninth, wp);
        j += 1;
        if term.mag().log2_approx() < -(wp as i64) - 4 {
            // Positive series; tail <= term/(2j+1) * 1/(1 - 1/9).
            let tail = term
                .div(&Interval::from_i64(2 * j + 1), wp)
                .unwrap()
                .mul(&Interval::from_ratio(9, 8, wp), wp);
            return sum.widen(&tail.mag(), wp).mul_pow2(1);
        }
    }
}

/// Shared constants at a fixed working precision.
#[derive(Debug, Clone)]
pub struct RigorCtx {
    pub prec: u32,
    pub pi: Interval,
    pub ln2: Interval,
}

impl RigorCtx {
    pub fn new(prec: u32) -> RigorCtx {
        RigorCtx {
            prec,
            pi: pi_enclosure(prec),
            ln2: ln2_enclosure(prec),
        }
    }

    pub fn two_pi(&self) -> Interval {
        self.pi.mul_pow2(1)
    }

    /// exp on an interval (monotone).
    pub fn exp(&self, x: &Interval) -> Interval {
        let lo = self.exp_point(&x.lo);
        let hi = self.exp_point(&x.hi);
        Interval::new(lo.lo, hi.hi)
    }

    /// Rigorous enclosure of exp at a point.
    pub fn exp_point(&self, x: &BigFloat) -> Interval {
        let prec = self.prec + 16;
        if x.is_inf() {
            return if x.signum() < 0 {
                Interval::new(BigFloat::Zero, BigFloat::Zero)
            } else {
                Interval::new(BigFloat::inf(false), BigFloat::inf(false))
            };
        }
        // Range reduce: x = n ln2 + r with |r| <= 0.4.
        let n = libm::round(x.to_f64() / core::f64::consts::LN_2) as i64;
        let r = Interval::point(x.clone()).sub(&self.ln2.mul_i64(n, prec), prec);
        exp_series(&r, prec).mul_pow2(n)
    }

    /// log on an interval with lo > 0 (monotone).
    pub fn log(&self, x: &Interval) -> Result<Interval> {
        if x.lo.signum() <= 0 {
            return Err(Error::DomainError);
        }
        let lo = self.log_point(&x.lo)?;
        let hi = self.log_point(&x.hi)?;
        Ok(Interval::new(lo.lo, hi.hi))
    }

    fn log_point(&self, x: &BigFloat) -> Result<Interval> {
        let prec = self.prec + 16;
        if x.signum() <= 0 {
            return Err(Error::DomainError);
        }
        if x.is_inf() {
            return Ok(Interval::new(BigFloat::inf(false), BigFloat::inf(false)));
        }
        // x = m 2^k with m in [0.75, 1.5): log x = k ln2 + 2 atanh((m-1)/(m+1)).
        let mut k = x.log2_approx(); // x < 2^k
        let mut m = Interval::point(x.mul_pow2(-k));
        // m in [0.5, 1); prefer [0.75, 1.5) to keep u small.
        if m.hi.cmp(&BigFloat::from_f64(0.75)) == core::cmp::Ordering::Less {
            m = m.mul_pow2(1);
            k -= 1;
        }
        let num = m.sub(&Interval::one(), prec);
        let den = m.add(&Interval::one(), prec);
        let u = num.div(&den, prec)?;
        Ok(atanh_series(&u, prec)
            .mul_pow2(1)
            .add(&self.ln2.mul_i64(k, prec), prec))
    }

    /// sin on an interval, with critical-point analysis.
    pub fn sin(&self, x: &Interval) -> Interval {
        self.sin_cos(x).0
    }

    pub fn cos(&self, x: &Interval) -> Interval {
        self.sin_cos(x).1
    }

    pub fn sin_cos(&self, x: &Interval) -> (Interval, Interval) {
        let prec = self.prec + 16;
        let unit = Interval::new(BigFloat::from_i64(-1), BigFloat::from_i64(1));
        if !x.lo.is_finite() || !x.hi.is_finite() {
            return (unit.clone(), unit);
        }
        let two_pi = self.two_pi();
        if x.width(64).cmp(&two_pi.hi) != core::cmp::Ordering::Less {
            return (unit.clone(), unit);
        }
        // Reduce the midpoint into [-pi, pi].
        let n = libm::round(x.to_f64_mid() / (2.0 * core::f64::consts::PI)) as i64;
        let r = x.sub(&two_pi.mul_i64(n, prec), prec);
        let s_lo = sin_series(&Interval::point(r.lo.clone()), prec);
        let s_hi = sin_series(&Interval::point(r.hi.clone()), prec);
        let c_lo = cos_series(&Interval::point(r.lo.clone()), prec);
        let c_hi = cos_series(&Interval::point(r.hi.clone()), prec);
        let mut s = s_lo.hull(&s_hi);
        let mut c = c_lo.hull(&c_hi);
        // Extend over interior critical points k*pi/2; r is in ~[-3pi, 3pi].
        let half_pi = self.pi.mul_pow2(-1);
        for k in -8i64..=8 {
            let crit = half_pi.mul_i64(k, prec);
            if crit.overlaps(&r) {
                // sin crit points at odd k, cos at even k.
                if k.rem_euclid(4) == 1 {
                    s.hi = BigFloat::from_i64(1);
                } else if k.rem_euclid(4) == 3 {
                    s.lo = BigFloat::from_i64(-1);
                }
                if k.rem_euclid(4) == 0 {
                    c.hi = BigFloat::from_i64(1);
                } else if k.rem_euclid(4) == 2 {
                    c.lo = BigFloat::from_i64(-1);
                }
            }
        }
        (
            s.intersect(&unit).unwrap_or(unit.clone()),
            c.intersect(&unit).unwrap_or(unit),
        )
    }

    /// sin(pi u / 2)^2 -- the arithmetic factor in all Laplace transforms.
    pub fn sin_sq_half_pi(&self, u: &Interval) -> Interval {
        let prec = self.prec + 16;
        let arg = self.pi.mul(u, prec).mul_pow2(-1);
        let s = self.sin(&arg);
        s.sqr(prec)
    }

    /// Enclosure of sin(pi u / 2) / (u - k) for u near the even integer k
    /// where the numerator vanishes; `u` may contain k. Uses
    /// sin(pi u/2) = +-sin(pi (u-k)/2) and the entire series of sin(x)/x.
    pub fn sin_half_pi_over_shift(&self, u: &Interval, k: i64) -> Interval {
        debug_assert!(k % 2 == 0);
        let prec = self.prec + 16;
        let d = u.sub(&Interval::from_i64(k), prec);
        let x = self.pi.mul(&d, prec).mul_pow2(-1);
        // sin(pi u/2) = sign * sin(x), sign = (-1)^(k/2)
        let ratio = sinc_series(&x, prec); // sin(x)/x
        let val = ratio.mul(&self.pi.mul_pow2(-1), prec);
        if (k / 2).rem_euclid(2) == 0 {
            val
        } else {
            val.neg()
        }
    }
}

/// exp via Taylor series with an explicit remainder; |argument| <= ~0.5.
fn exp_series(r: &Interval, prec: u32) -> Interval {
    let mut term = Interval::one();
    let mut sum = Interval::one();
    let mut k = 1i64;
    loop {
        term = term.mul(r, prec).div(&Interval::from_i64(k), prec).unwrap();
        sum = sum.add(&term, prec);
        k += 1;
        if term.mag().log2_approx() < -(prec as i64) - 4 {
            // |R| <= |term| * |r| / (k) * 1/(1 - |r|/(k+1)) <= 2 |term| for k >= 2|r|.
            let tail = term.mag().mul_pow2(1);
            return sum.widen(&tail, prec);
        }
        if k > 4 * prec as i64 {
            // Defensive cap; widen generously.
            return sum.widen(&term.mag().mul_pow2(8), prec);
        }
    }
}

/// atanh via odd series; |u| < 0.25 after reduction.
fn atanh_series(u: &Interval, prec: u32) -> Interval {
    let u2 = u.sqr(prec);
    let mut term = u.clone();
    let mut sum = Interval::zero();
    let mut j = 0i64;
    loop {
        sum = sum.add(&term.div(&Interval::from_i64(2 * j + 1), prec).unwrap(), prec);
        term = term.mul(&u2, prec);
        j += 1;
        if term.mag().log2_approx() < -(prec as i64) - 4 {
            // Geometric tail: sum_{i>j} |u|^(2i+1) <= |term*u| ... bounded by
            // |term| / (1 - |u|^2); |u| < 1/2 so factor <= 4/3 < 2.
            let tail = term.mag().mul_pow2(1);
            return sum.widen(&tail, prec);
        }
    }
}

fn sin_series(x: &Interval, prec: u32) -> Interval {
    // sum (-1)^k x^(2k+1)/(2k+1)!, remainder bounded once terms decrease.
    let x2 = x.sqr(prec);
    let mut term = x.clone();
    let mut sum = Interval::zero();
    let mut k = 0i64;
    loop {
        sum = if k % 2 == 0 {
            sum.add(&term, prec)
        } else {
            sum.sub(&term, prec)
        };
        let denom = Interval::from_i64((2 * k + 2) * (2 * k + 3));
        term = term.mul(&x2, prec).div(&denom, prec).unwrap();
        k += 1;
        let decreasing = (2 * k) as f64 > x.mag().to_f64().abs() + 2.0;
        if decreasing && term.mag().log2_approx() < -(prec as i64) - 4 {
            return sum.widen(&term.mag().mul_pow2(1), prec);
        }
        if k > 8 * prec as i64 {
            return Interval::new(BigFloat::from_i64(-1), BigFloat::from_i64(1));
        }
    }
}

fn cos_series(x: &Interval, prec: u32) -> Interval {
    let x2 = x.sqr(prec);
    let mut term = Interval::one();
    let mut sum = Interval::zero();
    let mut k = 0i64;
    loop {
        sum = if k % 2 == 0 {
            sum.add(&term, prec)
        } else {
            sum.sub(&term, prec)
        };
        let denom = Interval::from_i64((2 * k + 1) * (2 * k + 2));
        term = term.mul(&x2, prec).div(&denom, prec).unwrap();
        k += 1;
        let decreasing = (2 * k) as f64 > x.mag().to_f64().abs() + 2.0;
        if decreasing && term.mag().log2_approx() < -(prec as i64) - 4 {
            return sum.widen(&term.mag().mul_pow2(1), prec);
        }
        if k > 8 * prec as i64 {
            return Interval::new(BigFloat::from_i64(-1), BigFloat::from_i64(1));
        }
    }
}

/// sin(x)/x as an entire series (valid for x containing 0).
fn sinc_series(x: &Interval, prec: u32) -> Interval {
    let x2 = x.sqr(prec);
    let mut term = Interval::one();
    let mut sum = Interval::zero();
    let mut k = 0i64;
    loop {
        sum = if k % 2 == 0 {
            sum.add(&term, prec)
        } else {
            sum.sub(&term, prec)
        };
        let denom = Interval::from_i64((2 * k + 2) * (2 * k + 3));
        term = term.mul(&x2, prec).div(&denom, prec).unwrap();
        k += 1;
        let decreasing = (2 * k) as f64 > x.mag().to_f64().abs() + 2.0;
        if decreasing && term.mag().log2_approx() < -(prec as i64) - 4 {
            return sum.widen(&term.mag().mul_pow2(1), prec);
        }
        if k > 8 * prec as i64 {
            return sum.widen(&term.mag().mul_pow2(8), prec);
        }
    }
}

/// 2^e as a BigFloat (exact).
pub fn pow2(e: i64) -> BigFloat {
    BigFloat::from_biguint(false, BigUint::from(1u32), e)
}

/// Evaluate a polynomial with interval coefficients by Horner.
pub fn horner(coeffs: &[Interval], x: &Interval, prec: u32) -> Interval {
    let mut acc = Interval::zero();
    for c in coeffs.iter().rev() {
        acc = acc.mul(x, prec).add(c, prec);
    }
    acc
}

/// Geometric tail sum c * q^(n+1) / (1-q) for 0 <= q < 1 (used by series
/// evaluators); returns a magnitude bound.
pub fn geometric_tail(c: &BigFloat, q: &Interval, n_plus_1: i64, prec: u32) -> Result<BigFloat> {
    if q.hi.cmp(&BigFloat::one()) != core::cmp::Ordering::Less || q.lo.signum() < 0 {
        return Err(Error::ConvergenceDomain);
    }
    let qn = q.powi(n_plus_1, prec)?;
    let denom = Interval::one().sub(q, prec);
    let t = Interval::point(c.abs())
        .mul(&qn, prec)
        .div(&denom, prec)?;
    Ok(t.mag())
}

/// Collect interval enclosures of f over a uniform grid covering [a, b].
pub fn cover_uniform(a: &BigFloat, b: &BigFloat, n: usize, prec: u32) -> Vec<Interval> {
    let mut out = Vec::with_capacity(n);
    let span = Interval::new(a.clone(), b.clone());
    let w = span.width(prec);
    for i in 0..n {
        let lo = a.add(
            &w.mul(&BigFloat::from_i64(i as i64), prec, Round::Floor)
                .div(&BigFloat::from_i64(n as i64), prec, Round::Floor),
            prec,
            Round::Floor,
        );
        let hi = a.add(
            &w.mul(&BigFloat::from_i64(i as i64 + 1), prec, Round::Ceil)
                .div(&BigFloat::from_i64(n as i64), prec, Round::Ceil),
            prec,
            Round::Ceil,
        );
        out.push(Interval::new(lo, hi.min_with(b)));
    }
    out
}

impl BigFloat {
    fn min_with(self, other: &BigFloat) -> BigFloat {
        if self.cmp(other) == core::cmp::Ordering::Greater {
            other.clone()
        } else {
            self
        }
    }
}
