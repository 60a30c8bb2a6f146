//! Truncated formal power series in `q^{1/2} = e^{pi i z}`.
//!
//! Exponents are indexed in half-integer units: the coefficient at index `n`
//! multiplies `q^{n/2}`. Integer-power forms simply have zero coefficients at
//! odd indices, so the level-1 and level-2 objects share one representation.
//!
//! Coefficients live in a pluggable ring: exact rationals for identity
//! checking, real intervals or complex boxes for rigorous evaluation. A
//! series may carry a [`TailBound`] `|a_n| <= c * r^{-n}` (for all `n >= 0`,
//! including retained ones), which turns truncated evaluation into a rigorous
//! enclosure.

use crate::rigor::{BigFloat, ComplexBox, Interval, RigorCtx, Round};
use crate::{Error, Result};
use alloc::vec;
use alloc::vec::Vec;
use num_bigint::{BigInt, Sign};
use num_rational::BigRational;
use num_traits::{One, Zero};

/// Coefficient ring operations needed by the series layer.
pub trait CoeffRing: Clone {
    fn zero() -> Self;
    fn one() -> Self;
    fn from_ratio(p: i64, q: i64, prec: u32) -> Self;
    fn add(&self, other: &Self, prec: u32) -> Self;
    fn sub(&self, other: &Self, prec: u32) -> Self;
    fn mul(&self, other: &Self, prec: u32) -> Self;
    fn neg(&self) -> Self;
    /// Multiply by an exact rational (used by the derivation operator).
    fn mul_ratio(&self, p: i64, q: i64, prec: u32) -> Self;
    fn invert(&self, prec: u32) -> Option<Self>;
    fn is_zero(&self) -> bool;
}

impl CoeffRing for BigRational {
    fn zero() -> Self {
        <BigRational as Zero>::zero()
    }
    fn one() -> Self {
        <BigRational as One>::one()
    }
    fn from_ratio(p: i64, q: i64, _prec: u32) -> Self {
        BigRational::new(BigInt::from(p), BigInt::from(q))
    }
    fn add(&self, other: &Self, _prec: u32) -> Self {
        self + other
    }
    fn sub(&self, other: &Self, _prec: u32) -> Self {
        self - other
    }
    fn mul(&self, other: &Self, _prec: u32) -> Self {
        self * other
    }
    fn neg(&self) -> Self {
        -self
    }
    fn mul_ratio(&self, p: i64, q: i64, _prec: u32) -> Self {
        self * BigRational::new(BigInt::from(p), BigInt::from(q))
    }
    fn invert(&self, _prec: u32) -> Option<Self> {
        if Zero::is_zero(self) {
            None
        } else {
            Some(self.recip())
        }
    }
    fn is_zero(&self) -> bool {
        Zero::is_zero(self)
    }
}

impl CoeffRing for Interval {
    fn zero() -> Self {
        Interval::zero()
    }
    fn one() -> Self {
        Interval::one()
    }
    fn from_ratio(p: i64, q: i64, prec: u32) -> Self {
        Interval::from_ratio(p, q, prec)
    }
    fn add(&self, other: &Self, prec: u32) -> Self {
        Interval::add(self, other, prec)
    }
    fn sub(&self, other: &Self, prec: u32) -> Self {
        Interval::sub(self, other, prec)
    }
    fn mul(&self, other: &Self, prec: u32) -> Self {
        Interval::mul(self, other, prec)
    }
    fn neg(&self) -> Self {
        Interval::neg(self)
    }
    fn mul_ratio(&self, p: i64, q: i64, prec: u32) -> Self {
        self.mul(&Interval::from_ratio(p, q, prec), prec)
    }
    fn invert(&self, prec: u32) -> Option<Self> {
        self.recip(prec).ok()
    }
    fn is_zero(&self) -> bool {
        self.lo.is_zero() && self.hi.is_zero()
    }
}

impl CoeffRing for ComplexBox {
    fn zero() -> Self {
        ComplexBox::zero()
    }
    fn one() -> Self {
        ComplexBox::one()
    }
    fn from_ratio(p: i64, q: i64, prec: u32) -> Self {
        ComplexBox::real(Interval::from_ratio(p, q, prec))
    }
    fn add(&self, other: &Self, prec: u32) -> Self {
        ComplexBox::add(self, other, prec)
    }
    fn sub(&self, other: &Self, prec: u32) -> Self {
        ComplexBox::sub(self, other, prec)
    }
    fn mul(&self, other: &Self, prec: u32) -> Self {
        ComplexBox::mul(self, other, prec)
    }
    fn neg(&self) -> Self {
        ComplexBox::neg(self)
    }
    fn mul_ratio(&self, p: i64, q: i64, prec: u32) -> Self {
        self.mul_real(&Interval::from_ratio(p, q, prec), prec)
    }
    fn invert(&self, prec: u32) -> Option<Self> {
        self.recip(prec).ok()
    }
    fn is_zero(&self) -> bool {
        CoeffRing::is_zero(&self.re) && CoeffRing::is_zero(&self.im)
    }
}

/// Geometric bound on omitted (and retained) coefficients:
/// `|a_n| <= c * r^{-n}` for all `n >= 0`, with `r` in (0, 1).
#[derive(Debug, Clone)]
pub struct TailBound {
    pub c: BigFloat,
    pub r: BigFloat,
}

impl TailBound {
    pub fn new(c: BigFloat, r: BigFloat) -> TailBound {
        debug_assert!(c.signum() >= 0);
        debug_assert!(r.signum() > 0 && r.cmp(&BigFloat::one()) == core::cmp::Ordering::Less);
        TailBound { c, r }
    }

    /// Common radius for combining two bounds: the smaller one dominates
    /// (`r^-n` is larger for smaller `r` when `n >= 0`).
    fn common_r(&self, other: &TailBound) -> BigFloat {
        if self.r.cmp(&other.r) == core::cmp::Ordering::Less {
            self.r.clone()
        } else {
            other.r.clone()
        }
    }
}

/// Truncated series: coefficient `coeffs[k]` multiplies `q^{(start+k)/2}`.
/// All exponents with index `>= start + coeffs.len()` are unknown (subject
/// to the tail bound when present); indices below `start` are exactly zero.
#[derive(Debug, Clone)]
pub struct QSeries<C> {
    pub start: i64,
    pub coeffs: Vec<C>,
    pub tail: Option<TailBound>,
}

impl<C: CoeffRing> QSeries<C> {
    pub fn new(start: i64, coeffs: Vec<C>) -> QSeries<C> {
        QSeries {
            start,
            coeffs,
            tail: None,
        }
    }

    pub fn with_tail(mut self, tail: TailBound) -> QSeries<C> {
        self.tail = Some(tail);
        self
    }

    pub fn zero(order: usize) -> QSeries<C> {
        QSeries::new(0, vec![C::zero(); order])
    }

    pub fn one(order: usize) -> QSeries<C> {
        let mut coeffs = vec![C::zero(); order];
        coeffs[0] = C::one();
        QSeries::new(0, coeffs)
    }

    pub fn constant(c: C, order: usize) -> QSeries<C> {
        let mut coeffs = vec![C::zero(); order];
        coeffs[0] = c;
        QSeries::new(0, coeffs)
    }

    /// Monomial `c * q^{n/2}`.
    pub fn monomial(c: C, n: i64, order: usize) -> QSeries<C> {
        let mut coeffs = vec![C::zero(); order];
        coeffs[0] = c;
        QSeries::new(n, coeffs)
    }

    /// First index (in half-power units) whose coefficient is unknown.
    pub fn end(&self) -> i64 {
        self.start + self.coeffs.len() as i64
    }

    pub fn order(&self) -> usize {
        self.coeffs.len()
    }

    /// Coefficient of `q^{n/2}` (zero below start; None at/after end).
    pub fn coeff(&self, n: i64) -> Option<C> {
        if n < self.start {
            Some(C::zero())
        } else if n < self.end() {
            Some(self.coeffs[(n - self.start) as usize].clone())
        } else {
            None
        }
    }

    /// Drop leading exactly-zero coefficients (keeps `end` fixed).
    pub fn normalized(mut self) -> QSeries<C> {
        while !self.coeffs.is_empty() && self.coeffs[0].is_zero() {
            self.coeffs.remove(0);
            self.start += 1;
        }
        if self.coeffs.is_empty() {
            self.start = 0;
        }
        self
    }

    /// Truncate so that `end() <= new_end`.
    pub fn truncated(mut self, new_end: i64) -> QSeries<C> {
        if self.end() > new_end {
            let keep = (new_end - self.start).max(0) as usize;
            self.coeffs.truncate(keep);
        }
        self
    }

    /// Exact shift by `q^{k/2}`. The tail bound is adjusted conservatively
    /// only for nonnegative `k` (shifting down invalidates it).
    pub fn shifted(mut self, k: i64, prec: u32) -> QSeries<C> {
        self.start += k;
        if let Some(t) = self.tail.take() {
            if k >= 0 {
                // |b_n| = |a_{n-k}| <= c r^{-(n-k)} = (c r^k) r^{-n}.
                let rk = Interval::point(t.r.clone())
                    .powi(k, prec)
                    .expect("positive base");
                let c = t.c.mul(&rk.mag(), prec, Round::Ceil);
                self.tail = Some(TailBound { c, r: t.r });
            }
        }
        self
    }

    pub fn map_coeffs<D: CoeffRing>(&self, f: impl Fn(&C) -> D) -> QSeries<D> {
        QSeries {
            start: self.start,
            coeffs: self.coeffs.iter().map(f).collect(),
            tail: self.tail.clone(),
        }
    }

    pub fn add(&self, other: &QSeries<C>, prec: u32) -> QSeries<C> {
        let start = self.start.min(other.start);
        let end = self.end().min(other.end());
        let len = (end - start).max(0) as usize;
        let mut coeffs = Vec::with_capacity(len);
        for n in start..start + len as i64 {
            let a = self.coeff(n).unwrap_or_else(C::zero);
            let b = other.coeff(n).unwrap_or_else(C::zero);
            coeffs.push(a.add(&b, prec));
        }
        let tail = match (&self.tail, &other.tail) {
            (Some(a), Some(b)) => {
                let r = a.common_r(b);
                Some(TailBound {
                    c: a.c.add(&b.c, prec, Round::Ceil),
                    r,
                })
            }
            _ => None,
        };
        QSeries { start, coeffs, tail }
    }

    pub fn sub(&self, other: &QSeries<C>, prec: u32) -> QSeries<C> {
        self.add(&other.neg(), prec)
    }

    pub fn neg(&self) -> QSeries<C> {
        QSeries {
            start: self.start,
            coeffs: self.coeffs.iter().map(|c| c.neg()).collect(),
            tail: self.tail.clone(),
        }
    }

    /// Scale by a ring element. Tail bounds do not survive scaling by an
    /// element of unknown magnitude; callers re-attach when needed.
    pub fn scale(&self, c: &C, prec: u32) -> QSeries<C> {
        QSeries {
            start: self.start,
            coeffs: self.coeffs.iter().map(|a| a.mul(c, prec)).collect(),
            tail: None,
        }
    }

    pub fn scale_ratio(&self, p: i64, q: i64, prec: u32) -> QSeries<C> {
        let mut out = QSeries {
            start: self.start,
            coeffs: self
                .coeffs
                .iter()
                .map(|a| a.mul_ratio(p, q, prec))
                .collect(),
            tail: None,
        };
        if let Some(t) = &self.tail {
            let f = Interval::from_ratio(p, q, prec).mag();
            out.tail = Some(TailBound {
                c: t.c.mul(&f, prec, Round::Ceil),
                r: t.r.clone(),
            });
        }
        out
    }

    /// Cauchy product truncated to the common effective order.
    pub fn mul(&self, other: &QSeries<C>, prec: u32) -> QSeries<C> {
        let start = self.start + other.start;
        // Product coefficients are fully determined for exponents below
        // min(a.end + b.start, b.end + a.start).
        let end = (self.end() + other.start).min(other.end() + self.start);
        let len = (end - start).max(0) as usize;
        let mut coeffs = vec![C::zero(); len];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate() {
                if i + j >= len {
                    break;
                }
                if b.is_zero() {
                    continue;
                }
                coeffs[i + j] = coeffs[i + j].add(&a.mul(b, prec), prec);
            }
        }
        let tail = match (&self.tail, &other.tail) {
            (Some(a), Some(b)) => Some(mul_tail(a, b, self.start, other.start, prec)),
            _ => None,
        };
        QSeries { start, coeffs, tail }
    }

    /// Multiplicative inverse; requires an invertible leading coefficient.
    /// The result carries no tail bound (attach one via a Cauchy estimate).
    pub fn invert(&self, prec: u32) -> Result<QSeries<C>> {
        let s = self.clone().normalized();
        if s.coeffs.is_empty() {
            return Err(Error::ZeroLeadingCoefficient);
        }
        let lead = s.coeffs[0]
            .invert(prec)
            .ok_or(Error::ZeroLeadingCoefficient)?;
        let n = s.coeffs.len();
        let mut inv = vec![C::zero(); n];
        inv[0] = lead.clone();
        for k in 1..n {
            // sum_{j=0}^{k} a_j b_{k-j} = 0  =>  b_k = -(1/a_0) sum_{j>=1}.
            let mut acc = C::zero();
            for j in 1..=k {
                let a = &s.coeffs[j];
                if a.is_zero() {
                    continue;
                }
                acc = acc.add(&a.mul(&inv[k - j], prec), prec);
            }
            inv[k] = acc.neg().mul(&lead, prec);
        }
        Ok(QSeries {
            start: -s.start,
            coeffs: inv,
            tail: None,
        })
    }

    /// `q d/dq` in half-power units: coefficient of `q^{n/2}` scales by n/2.
    /// The caller multiplies by `2 pi i` to get d/dz.
    pub fn derive_q(&self, prec: u32) -> QSeries<C> {
        let mut coeffs = Vec::with_capacity(self.coeffs.len());
        for (k, a) in self.coeffs.iter().enumerate() {
            let n = self.start + k as i64;
            coeffs.push(a.mul_ratio(n, 2, prec));
        }
        let tail = self.tail.as_ref().map(|t| {
            // |n/2 a_n| <= (n/2) c r^{-n} <= c' r'^{-n} with r' = 8r/9:
            // sup_n (n/2)(8/9)^n <= 4.25 (attained near n = 8).
            let r = t.r.mul(&ratio_bf(8, 9), prec, Round::Floor);
            TailBound {
                c: t.c.mul(&BigFloat::from_f64(4.25), prec, Round::Ceil),
                r,
            }
        });
        QSeries {
            start: self.start,
            coeffs,
            tail,
        }
    }

    /// Substitute `inner` (valuation >= 1 in half-power units) into `self`
    /// viewed as a polynomial in its variable: index `n` of `self` pairs
    /// with `inner^n`. Requires `self.start >= 0`.
    pub fn compose(&self, inner: &QSeries<C>, prec: u32) -> Result<QSeries<C>> {
        let inner_norm = inner.clone().normalized();
        let has_terms = !inner_norm.coeffs.is_empty();
        if has_terms && inner_norm.start < 1 {
            return Err(Error::NonpositiveValuation);
        }
        if self.start < 0 {
            return Err(Error::NonpositiveValuation);
        }
        let end = inner.end();
        let order = end.max(1) as usize;
        let mut acc: QSeries<C> = QSeries::zero(order);
        for k in (0..self.coeffs.len()).rev() {
            acc = acc.mul(inner, prec);
            // Re-extend: mul truncates, but adding a constant restores span.
            let c = QSeries::constant(self.coeffs[k].clone(), order).truncated(end);
            acc = pad_to(acc, end).add(&c, prec);
        }
        for _ in 0..self.start {
            acc = pad_to(acc.mul(inner, prec), end);
        }
        Ok(acc.truncated(end))
    }

    /// Integer power by repeated squaring.
    pub fn pow(&self, n: u32, prec: u32) -> QSeries<C> {
        let order = self.order();
        let mut result = QSeries::one(order);
        let mut base = self.clone();
        let mut e = n;
        if e == 0 {
            return result;
        }
        loop {
            if e & 1 == 1 {
                result = result.mul(&base, prec);
            }
            e >>= 1;
            if e == 0 {
                break;
            }
            base = base.mul(&base, prec);
        }
        result
    }
}

/// Zero-pad a series on the right so its `end()` reaches `end` (used by
/// compose, where multiplying by a high-valuation inner shrinks the window
/// even though the missing coefficients are exactly zero for polynomials).
fn pad_to<C: CoeffRing>(mut s: QSeries<C>, end: i64) -> QSeries<C> {
    while s.end() < end {
        s.coeffs.push(C::zero());
    }
    s
}

/// Tail bound for a product. With `|a_n| <= c_a r^-n` for `n >= s_a` (zero
/// below) and likewise for `b`, the product coefficient at `n` is a sum of at
/// most `(n - s_a - s_b + 1)` terms, each bounded by `c_a c_b r^-n`. The
/// linear factor is absorbed by shrinking the radius to `8r/9`, using
/// `(m+1)(8/9)^m <= 4.5` and folding `(9/8)^{|s_a+s_b|}` into the constant.
fn mul_tail(a: &TailBound, b: &TailBound, sa: i64, sb: i64, prec: u32) -> TailBound {
    mul_tail_pub(a, b, sa, sb, prec)
}

/// Shared product-tail rule (see [`mul_tail`] for the derivation).
pub fn mul_tail_pub(a: &TailBound, b: &TailBound, sa: i64, sb: i64, prec: u32) -> TailBound {
    let r = a.common_r(b);
    let rp = r.mul(&ratio_bf(8, 9), prec, Round::Floor);
    let s = (sa + sb).unsigned_abs().min(512);
    let mut boost = BigFloat::from_f64(4.5);
    let nine_eighth = ratio_bf(9, 8);
    for _ in 0..s {
        boost = boost.mul(&nine_eighth, prec, Round::Ceil);
    }
    TailBound {
        c: a.c.mul(&b.c, prec, Round::Ceil).mul(&boost, prec, Round::Ceil),
        r: rp,
    }
}

fn ratio_bf(p: i64, q: i64) -> BigFloat {
    BigFloat::from_i64(p).div(&BigFloat::from_i64(q), 64, Round::Ceil)
}

/// Convert an exact rational coefficient to an interval at `prec`.
pub fn rational_to_interval(r: &BigRational, prec: u32) -> Interval {
    let n = bigint_to_bigfloat(r.numer());
    let d = bigint_to_bigfloat(r.denom());
    Interval::new(n.div(&d, prec, Round::Floor), n.div(&d, prec, Round::Ceil))
}

pub fn bigint_to_bigfloat(v: &BigInt) -> BigFloat {
    let (sign, mag) = v.clone().into_parts();
    BigFloat::from_biguint(sign == Sign::Minus, mag, 0)
}

pub fn rational_to_complex(r: &BigRational, prec: u32) -> ComplexBox {
    ComplexBox::real(rational_to_interval(r, prec))
}

impl QSeries<BigRational> {
    pub fn to_interval(&self, prec: u32) -> QSeries<Interval> {
        self.map_coeffs(|c| rational_to_interval(c, prec))
    }

    pub fn to_complex(&self, prec: u32) -> QSeries<ComplexBox> {
        self.map_coeffs(|c| rational_to_complex(c, prec))
    }

    /// Attach a tail bound to a series whose coefficients satisfy
    /// `|a_n| <= scale * n^deg` for all `n` beyond the retained range
    /// (divisor-sum growth for Eisenstein series and friends). The returned
    /// bound uses radius `r` and covers retained coefficients too.
    pub fn tail_from_poly_growth(&self, scale: f64, deg: u32, r: f64, prec: u32) -> TailBound {
        let r_bf = BigFloat::from_f64(r);
        let mut c = BigFloat::Zero;
        for (k, a) in self.coeffs.iter().enumerate() {
            let n = self.start + k as i64;
            if n < 0 {
                continue;
            }
            let an = rational_to_interval(a, prec).mag();
            let rn = Interval::point(r_bf.clone()).powi(n, prec).expect("r>0").mag();
            let v = an.mul(&rn, prec, Round::Ceil);
            if v.cmp(&c) == core::cmp::Ordering::Greater {
                c = v;
            }
        }
        // For n >= end: scale n^deg r^n decreases once n > deg/(-ln r); scan
        // up to that point in coarse steps, always rounding up.
        let end = self.end().max(1);
        let flip = libm::ceil(deg as f64 / -libm::log(r)) as i64 + 2;
        let mut n = end;
        while n <= flip {
            let v = Interval::from_i64(n)
                .powi(deg as i64, prec)
                .expect("pos")
                .mul(&Interval::from_f64(scale), prec)
                .mul(&Interval::point(r_bf.clone()).powi(n, prec).expect("pos"), prec)
                .mag();
            if v.cmp(&c) == core::cmp::Ordering::Greater {
                c = v;
            }
            n += 1;
        }
        // Also the first point beyond flip (monotone decreasing after).
        TailBound::new(c, r_bf)
    }
}

impl QSeries<ComplexBox> {
    /// Evaluate at `zeta = q^{1/2}`. With a tail bound present and
    /// |zeta| < r this is a rigorous enclosure: the partial sum is widened by
    /// `c (|zeta|/r)^end / (1 - |zeta|/r)`. Without a tail bound,
    /// `rigorous = true` is an error.
    pub fn eval(&self, zeta: &ComplexBox, ctx: &RigorCtx, rigorous: bool) -> Result<ComplexBox> {
        let prec = ctx.prec;
        let mut acc = ComplexBox::zero();
        for c in self.coeffs.iter().rev() {
            acc = acc.mul(zeta, prec).add(c, prec);
        }
        acc = acc.mul(&zeta.powi(self.start, prec)?, prec);
        if let Some(t) = &self.tail {
            let zmag = zeta.abs(prec).mag();
            if zmag.cmp(&t.r) != core::cmp::Ordering::Less {
                return Err(Error::ConvergenceDomain);
            }
            let ratio = Interval::point(zmag).div(&Interval::point(t.r.clone()), prec)?;
            let tail_mag = crate::rigor::geometric_tail(&t.c, &ratio, self.end(), prec)?;
            let ball = Interval::ball(&tail_mag);
            acc = ComplexBox::new(acc.re.add(&ball, prec), acc.im.add(&ball, prec));
        } else if rigorous {
            return Err(Error::TailUnavailable);
        }
        Ok(acc)
    }
}

impl QSeries<Interval> {
    /// Evaluate at a real `zeta` with |zeta| < r.
    pub fn eval_real(&self, zeta: &Interval, ctx: &RigorCtx, rigorous: bool) -> Result<Interval> {
        let prec = ctx.prec;
        let mut acc = Interval::zero();
        for c in self.coeffs.iter().rev() {
            acc = acc.mul(zeta, prec).add(c, prec);
        }
        acc = acc.mul(&zeta.powi(self.start, prec)?, prec);
        if let Some(t) = &self.tail {
            let zmag = zeta.mag();
            if zmag.cmp(&t.r) != core::cmp::Ordering::Less {
                return Err(Error::ConvergenceDomain);
            }
            let ratio = Interval::point(zmag).div(&Interval::point(t.r.clone()), prec)?;
            let tail_mag = crate::rigor::geometric_tail(&t.c, &ratio, self.end(), prec)?;
            acc = acc.widen(&tail_mag, prec);
        } else if rigorous {
            return Err(Error::TailUnavailable);
        }
        Ok(acc)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rat(p: i64, q: i64) -> BigRational {
        BigRational::new(BigInt::from(p), BigInt::from(q))
    }

    fn geom(order: usize) -> QSeries<BigRational> {
        // 1/(1-q) = 1 + q + q^2 + ... (integer powers = even half-indices)
        let mut coeffs = vec![rat(0, 1); order];
        for k in (0..order).step_by(2) {
            coeffs[k] = rat(1, 1);
        }
        QSeries::new(0, coeffs)
    }

    #[test]
    fn mul_one_minus_q() {
        // (1 + q)(1 - q) = 1 - q^2
        let mut a = QSeries::zero(8);
        a.coeffs[0] = rat(1, 1);
        a.coeffs[2] = rat(1, 1);
        let mut b = QSeries::zero(8);
        b.coeffs[0] = rat(1, 1);
        b.coeffs[2] = -rat(1, 1);
        let p = a.mul(&b, 0);
        assert_eq!(p.coeff(0).unwrap(), rat(1, 1));
        assert_eq!(p.coeff(2).unwrap(), rat(0, 1));
        assert_eq!(p.coeff(4).unwrap(), -rat(1, 1));
    }

    #[test]
    fn invert_geometric() {
        let mut a = QSeries::zero(12);
        a.coeffs[0] = rat(1, 1);
        a.coeffs[2] = -rat(1, 1);
        let inv = a.invert(0).unwrap();
        for k in (0..10).step_by(2) {
            assert_eq!(inv.coeff(k).unwrap(), rat(1, 1), "k={k}");
            assert_eq!(inv.coeff(k + 1).unwrap(), rat(0, 1));
        }
    }

    #[test]
    fn invert_requires_unit() {
        let z: QSeries<BigRational> = QSeries::zero(4);
        assert!(z.invert(0).is_err());
    }

    #[test]
    fn derive_constant_is_zero() {
        let c = QSeries::constant(rat(7, 1), 6);
        let d = c.derive_q(0);
        assert!(d.coeffs.iter().all(|c| CoeffRing::is_zero(c)));
    }

    #[test]
    fn derivation_leibniz() {
        let a = geom(10);
        let mut b = QSeries::zero(10);
        b.coeffs[0] = rat(1, 2);
        b.coeffs[2] = rat(3, 1);
        b.coeffs[4] = rat(-2, 7);
        let lhs = a.mul(&b, 0).derive_q(0);
        let rhs = a.derive_q(0).mul(&b, 0).add(&a.mul(&b.derive_q(0), 0), 0);
        let end = lhs.end().min(rhs.end());
        for n in 0..end {
            assert_eq!(lhs.coeff(n).unwrap(), rhs.coeff(n).unwrap(), "n={n}");
        }
    }

    #[test]
    fn compose_geometric() {
        // outer(x) = 1/(1-x), inner = q (half-index 2): 1 + q + q^2 + ...
        let outer = QSeries::new(0, vec![rat(1, 1); 6]);
        let inner = QSeries::monomial(rat(1, 1), 2, 6);
        let c = outer.compose(&inner, 0).unwrap();
        assert_eq!(c.coeff(0).unwrap(), rat(1, 1));
        assert_eq!(c.coeff(2).unwrap(), rat(1, 1));
        assert_eq!(c.coeff(4).unwrap(), rat(1, 1));
    }

    #[test]
    fn compose_identity() {
        let mut f = QSeries::zero(8);
        f.coeffs[1] = rat(2, 3);
        f.coeffs[3] = rat(-5, 1);
        let ident = QSeries::new(0, vec![rat(0, 1), rat(1, 1)]);
        let c = ident.compose(&f, 0).unwrap();
        for n in 0..c.end().min(f.end()) {
            assert_eq!(c.coeff(n).unwrap(), f.coeff(n).unwrap(), "n={n}");
        }
    }

    #[test]
    fn compose_rejects_constant_inner() {
        let outer = QSeries::new(0, vec![rat(1, 1); 4]);
        let inner = QSeries::constant(rat(1, 1), 4);
        assert!(outer.compose(&inner, 0).is_err());
    }

    #[test]
    fn eval_constant_one() {
        let ctx = RigorCtx::new(96);
        let one: QSeries<BigRational> = QSeries::one(4);
        let s = one
            .to_complex(96)
            .with_tail(TailBound::new(BigFloat::from_f64(1.0), BigFloat::from_f64(0.5)));
        let v = s.eval(&ComplexBox::from_f64s(0.1, 0.05), &ctx, true).unwrap();
        assert!((v.re.to_f64_mid() - 1.0).abs() < 1e-2);
        assert!(v.re.contains(&BigFloat::one()));
    }

    #[test]
    fn rigorous_eval_needs_tail() {
        let ctx = RigorCtx::new(96);
        let one: QSeries<BigRational> = QSeries::one(4);
        let s = one.to_complex(96);
        assert_eq!(
            s.eval(&ComplexBox::from_f64s(0.1, 0.0), &ctx, true),
            Err(Error::TailUnavailable)
        );
    }

    #[test]
    fn eval_outside_radius_rejected() {
        let ctx = RigorCtx::new(96);
        let one: QSeries<BigRational> = QSeries::one(4);
        let s = one
            .to_complex(96)
            .with_tail(TailBound::new(BigFloat::from_f64(1.0), BigFloat::from_f64(0.3)));
        assert_eq!(
            s.eval(&ComplexBox::from_f64s(0.4, 0.0), &ctx, true),
            Err(Error::ConvergenceDomain)
        );
    }

    #[test]
    fn product_tail_contains_product_eval() {
        let ctx = RigorCtx::new(96);
        let t = TailBound::new(BigFloat::from_f64(3.0), BigFloat::from_f64(0.6));
        let a = geom(10).to_complex(96).with_tail(t.clone());
        let b = geom(12).to_complex(96).with_tail(t);
        let prod = a.mul(&b, 96);
        assert!(prod.tail.is_some());
        let z = ComplexBox::from_f64s(0.2, 0.0);
        let va = a.eval(&z, &ctx, true).unwrap();
        let vb = b.eval(&z, &ctx, true).unwrap();
        let vp = prod.eval(&z, &ctx, true).unwrap();
        let direct = va.mul(&vb, 96);
        assert!(vp.overlaps(&direct));
        // true value 1/(1-0.04)^2 (z is q^{1/2}, so q = 0.04)
        let exact = 1.0 / (1.0 - 0.04f64) / (1.0 - 0.04);
        assert!(vp.re.contains(&BigFloat::from_f64(exact)) || (vp.re.to_f64_mid() - exact).abs() < 1e-9);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn arb_series() -> impl Strategy<Value = QSeries<BigRational>> {
            (
                proptest::collection::vec((-20i64..20, 1i64..10), 1..8),
                -3i64..4,
            )
                .prop_map(|(cs, start)| {
                    QSeries::new(start, cs.into_iter().map(|(p, q)| rat(p, q)).collect())
                })
        }

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(48))]

            #[test]
            fn ring_associativity(a in arb_series(), b in arb_series(), c in arb_series()) {
                let lhs = a.mul(&b, 0).mul(&c, 0);
                let rhs = a.mul(&b.mul(&c, 0), 0);
                let end = lhs.end().min(rhs.end());
                let start = lhs.start.min(rhs.start);
                for n in start..end {
                    prop_assert_eq!(lhs.coeff(n).unwrap(), rhs.coeff(n).unwrap());
                }
            }

            #[test]
            fn ring_distributivity(a in arb_series(), b in arb_series(), c in arb_series()) {
                let lhs = a.mul(&b.add(&c, 0), 0);
                let rhs = a.mul(&b, 0).add(&a.mul(&c, 0), 0);
                let end = lhs.end().min(rhs.end());
                let start = lhs.start.min(rhs.start);
                for n in start..end {
                    prop_assert_eq!(lhs.coeff(n).unwrap(), rhs.coeff(n).unwrap());
                }
            }

            #[test]
            fn inverse_pairs(a in arb_series()) {
                let a = a.normalized();
                prop_assume!(!a.coeffs.is_empty() && !CoeffRing::is_zero(&a.coeffs[0]));
                let inv = a.invert(0).unwrap();
                let prod = a.mul(&inv, 0);
                prop_assert_eq!(prod.coeff(0).unwrap(), rat(1, 1));
                for n in 1..prod.end().min(6) {
                    prop_assert_eq!(prod.coeff(n).unwrap(), rat(0, 1));
                }
            }
        }
    }
}
