//! Axis-aligned complex boxes: rectangles `re x im` of intervals.

use super::bigfloat::BigFloat;
use super::elem::RigorCtx;
use super::interval::Interval;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct ComplexBox {
    pub re: Interval,
    pub im: Interval,
}

impl ComplexBox {
    pub fn new(re: Interval, im: Interval) -> ComplexBox {
        ComplexBox { re, im }
    }

    pub fn zero() -> ComplexBox {
        ComplexBox::new(Interval::zero(), Interval::zero())
    }

    pub fn one() -> ComplexBox {
        ComplexBox::new(Interval::one(), Interval::zero())
    }

    pub fn i() -> ComplexBox {
        ComplexBox::new(Interval::zero(), Interval::one())
    }

    pub fn real(r: Interval) -> ComplexBox {
        ComplexBox::new(r, Interval::zero())
    }

    pub fn imag(i: Interval) -> ComplexBox {
        ComplexBox::new(Interval::zero(), i)
    }

    pub fn from_i64(v: i64) -> ComplexBox {
        ComplexBox::real(Interval::from_i64(v))
    }

    pub fn from_f64s(re: f64, im: f64) -> ComplexBox {
        ComplexBox::new(Interval::from_f64(re), Interval::from_f64(im))
    }

    pub fn contains_zero(&self) -> bool {
        self.re.contains_zero() && self.im.contains_zero()
    }

    pub fn contains_point(&self, re: &BigFloat, im: &BigFloat) -> bool {
        self.re.contains(re) && self.im.contains(im)
    }

    pub fn contains_box(&self, other: &ComplexBox) -> bool {
        self.re.contains_interval(&other.re) && self.im.contains_interval(&other.im)
    }

    pub fn overlaps(&self, other: &ComplexBox) -> bool {
        self.re.overlaps(&other.re) && self.im.overlaps(&other.im)
    }

    pub fn hull(&self, other: &ComplexBox) -> ComplexBox {
        ComplexBox::new(self.re.hull(&other.re), self.im.hull(&other.im))
    }

    pub fn neg(&self) -> ComplexBox {
        ComplexBox::new(self.re.neg(), self.im.neg())
    }

    pub fn conj(&self) -> ComplexBox {
        ComplexBox::new(self.re.clone(), self.im.neg())
    }

    pub fn add(&self, other: &ComplexBox, prec: u32) -> ComplexBox {
        ComplexBox::new(self.re.add(&other.re, prec), self.im.add(&other.im, prec))
    }

    pub fn sub(&self, other: &ComplexBox, prec: u32) -> ComplexBox {
        ComplexBox::new(self.re.sub(&other.re, prec), self.im.sub(&other.im, prec))
    }

    pub fn mul(&self, other: &ComplexBox, prec: u32) -> ComplexBox {
        let ac = self.re.mul(&other.re, prec);
        let bd = self.im.mul(&other.im, prec);
        let ad = self.re.mul(&other.im, prec);
        let bc = self.im.mul(&other.re, prec);
        ComplexBox::new(ac.sub(&bd, prec), ad.add(&bc, prec))
    }

    pub fn mul_i(&self) -> ComplexBox {
        ComplexBox::new(self.im.neg(), self.re.clone())
    }

    pub fn mul_real(&self, r: &Interval, prec: u32) -> ComplexBox {
        ComplexBox::new(self.re.mul(r, prec), self.im.mul(r, prec))
    }

    pub fn mul_i64(&self, k: i64, prec: u32) -> ComplexBox {
        self.mul_real(&Interval::from_i64(k), prec)
    }

    pub fn mul_ratio(&self, p: i64, q: i64, prec: u32) -> ComplexBox {
        self.mul_real(&Interval::from_ratio(p, q, prec), prec)
    }

    pub fn mul_pow2(&self, k: i64) -> ComplexBox {
        ComplexBox::new(self.re.mul_pow2(k), self.im.mul_pow2(k))
    }

    /// |z|^2 enclosure.
    pub fn abs_sq(&self, prec: u32) -> Interval {
        self.re.sqr(prec).add(&self.im.sqr(prec), prec)
    }

    /// Magnitude upper bound sup |z|.
    pub fn abs_mag(&self, prec: u32) -> BigFloat {
        self.abs_sq(prec)
            .sqrt(prec)
            .map(|r| r.hi)
            .unwrap_or(BigFloat::inf(false))
    }

    /// |z| enclosure.
    pub fn abs(&self, prec: u32) -> Interval {
        self.abs_sq(prec)
            .sqrt(prec)
            .unwrap_or_else(|_| Interval::entire())
    }

    pub fn div(&self, other: &ComplexBox, prec: u32) -> Result<ComplexBox> {
        let d = other.abs_sq(prec);
        if d.contains_zero() {
            return Err(Error::DomainError);
        }
        let num = self.mul(&other.conj(), prec);
        Ok(ComplexBox::new(num.re.div(&d, prec)?, num.im.div(&d, prec)?))
    }

    pub fn recip(&self, prec: u32) -> Result<ComplexBox> {
        ComplexBox::one().div(self, prec)
    }

    pub fn sqr(&self, prec: u32) -> ComplexBox {
        // (a+bi)^2 = a^2 - b^2 + 2abi; squares tighten straddles.
        let a2 = self.re.sqr(prec);
        let b2 = self.im.sqr(prec);
        let ab = self.re.mul(&self.im, prec);
        ComplexBox::new(a2.sub(&b2, prec), ab.mul_pow2(1))
    }

    pub fn powi(&self, n: i64, prec: u32) -> Result<ComplexBox> {
        if n == 0 {
            return Ok(ComplexBox::one());
        }
        if n < 0 {
            return self.powi(-n, prec)?.recip(prec);
        }
        let mut result = ComplexBox::one();
        let mut base = self.clone();
        let mut e = n as u64;
        loop {
            if e & 1 == 1 {
                result = result.mul(&base, prec);
            }
            e >>= 1;
            if e == 0 {
                break;
            }
            base = base.sqr(prec);
        }
        Ok(result)
    }

    /// exp(z) = e^re (cos im + i sin im).
    pub fn exp(&self, ctx: &RigorCtx) -> ComplexBox {
        let m = ctx.exp(&self.re);
        let (s, c) = ctx.sin_cos(&self.im);
        ComplexBox::new(m.mul(&c, ctx.prec), m.mul(&s, ctx.prec))
    }

    /// e^{pi i z} = e^{-pi Im z} (cos(pi Re z) + i sin(pi Re z)).
    pub fn exp_pi_i(&self, ctx: &RigorCtx) -> ComplexBox {
        let prec = ctx.prec;
        let m = ctx.exp(&ctx.pi.mul(&self.im, prec).neg());
        let arg = ctx.pi.mul(&self.re, prec);
        let (s, c) = ctx.sin_cos(&arg);
        ComplexBox::new(m.mul(&c, prec), m.mul(&s, prec))
    }

    /// Principal square root, assuming the box avoids the branch cut
    /// (Re > 0 or Im bounded away from 0). Not needed on cuts in this crate.
    pub fn sqrt(&self, ctx: &RigorCtx) -> Result<ComplexBox> {
        let prec = ctx.prec;
        // sqrt(z) = sqrt(|z|) * (cos(t/2) + i sin(t/2)); use half-angle via
        // w = sqrt((|z|+re)/2), im/(2w) for Re z > 0 regions.
        if self.re.lo.signum() > 0 {
            let r = self.abs(prec);
            let w = r.add(&self.re, prec).mul_pow2(-1).sqrt(prec)?;
            let v = self.im.div(&w.mul_pow2(1), prec)?;
            return Ok(ComplexBox::new(w, v));
        }
        if self.im.lo.signum() > 0 {
            // z = i w with w in right half plane: sqrt(z) = sqrt(w) e^{i pi/4}.
            let w = ComplexBox::new(self.im.clone(), self.re.neg());
            let sw = w.sqrt(ctx)?;
            // e^{i pi/4} = (1+i)/sqrt(2)
            let inv_sqrt2 = Interval::from_i64(2).sqrt(prec)?.recip(prec)?;
            let rot = ComplexBox::new(inv_sqrt2.clone(), inv_sqrt2);
            return Ok(sw.mul(&rot, prec));
        }
        Err(Error::DomainError)
    }

    /// log(z) for boxes with Re > 0 or Im > 0 (principal branch, no cut).
    pub fn log(&self, ctx: &RigorCtx) -> Result<ComplexBox> {
        let prec = ctx.prec;
        let r2 = self.abs_sq(prec);
        let lr = ctx.log(&r2)?.mul_pow2(-1);
        let arg = self.arg(ctx)?;
        Ok(ComplexBox::new(lr, arg))
    }

    /// Argument for boxes avoiding the negative real axis; uses atan series
    /// through interval arithmetic on im/re or re/im as appropriate.
    fn arg(&self, ctx: &RigorCtx) -> Result<Interval> {
        let prec = ctx.prec;
        if self.re.lo.signum() > 0 {
            let t = self.im.div(&self.re, prec)?;
            return Ok(atan_interval(&t, ctx));
        }
        if self.im.lo.signum() > 0 {
            // arg = pi/2 - atan(re/im)
            let t = self.re.div(&self.im, prec)?;
            return Ok(ctx.pi.mul_pow2(-1).sub(&atan_interval(&t, ctx), prec));
        }
        if self.im.hi.signum() < 0 {
            let t = self.re.div(&self.im, prec)?;
            return Ok(ctx.pi.mul_pow2(-1).neg().sub(&atan_interval(&t, ctx), prec));
        }
        Err(Error::DomainError)
    }

    /// sin z = (e^{iz} - e^{-iz}) / 2i.
    pub fn sin(&self, ctx: &RigorCtx) -> ComplexBox {
        let prec = ctx.prec;
        let e1 = self.mul_i().exp(ctx);
        let e2 = self.mul_i().neg().exp(ctx);
        e1.sub(&e2, prec).mul_i().neg().mul_pow2(-1)
    }

    /// cos z = (e^{iz} + e^{-iz}) / 2.
    pub fn cos(&self, ctx: &RigorCtx) -> ComplexBox {
        let prec = ctx.prec;
        let e1 = self.mul_i().exp(ctx);
        let e2 = self.mul_i().neg().exp(ctx);
        e1.add(&e2, prec).mul_pow2(-1)
    }

    pub fn to_f64s(&self) -> (f64, f64) {
        (self.re.to_f64_mid(), self.im.to_f64_mid())
    }

    pub fn max_width_log2(&self, prec: u32) -> i64 {
        self.re
            .width(prec)
            .log2_approx()
            .max(self.im.width(prec).log2_approx())
    }
}

/// atan on an interval via argument reduction and the Gregory series.
/// Monotone, so endpoint enclosures suffice.
pub fn atan_interval(x: &Interval, ctx: &RigorCtx) -> Interval {
    let lo = atan_point(&x.lo, ctx);
    let hi = atan_point(&x.hi, ctx);
    Interval::new(lo.lo, hi.hi)
}

fn atan_point(x: &BigFloat, ctx: &RigorCtx) -> Interval {
    let prec = ctx.prec + 16;
    if x.is_inf() {
        let half_pi = ctx.pi.mul_pow2(-1);
        return if x.signum() < 0 { half_pi.neg() } else { half_pi };
    }
    if x.signum() < 0 {
        return atan_point(&x.neg(), ctx).neg();
    }
    // For x > 2 use atan(x) = pi/2 - atan(1/x); for 1/2 < x <= 2 use
    // atan(x) = pi/4 + atan((x-1)/(x+1)). Both reduce to |arg| <= 1/2.
    if x.cmp(&BigFloat::from_f64(2.0)) == core::cmp::Ordering::Greater {
        let inv = Interval::point(x.clone()).recip(prec).unwrap();
        let sub = atan_interval(&inv, ctx);
        return ctx.pi.mul_pow2(-1).sub(&sub, prec);
    }
    if x.cmp(&BigFloat::from_f64(0.5)) == core::cmp::Ordering::Greater {
        let xi = Interval::point(x.clone());
        let t = xi
            .sub(&Interval::one(), prec)
            .div(&xi.add(&Interval::one(), prec), prec)
            .unwrap();
        let sub = atan_interval(&t, ctx);
        return ctx.pi.mul_pow2(-2).add(&sub, prec);
    }
    // Gregory series, alternating: remainder bounded by next term.
    let xi = Interval::point(x.clone());
    let x2 = xi.sqr(prec);
    let mut term = xi;
    let mut sum = Interval::zero();
    let mut k = 0i64;
    loop {
        let contrib = term.div(&Interval::from_i64(2 * k + 1), prec).unwrap();
        sum = if k % 2 == 0 {
            sum.add(&contrib, prec)
        } else {
            sum.sub(&contrib, prec)
        };
        term = term.mul(&x2, prec);
        k += 1;
        if term.mag().log2_approx() < -(prec as i64) - 4 {
            return sum.widen(&term.mag(), prec);
        }
    }
}
