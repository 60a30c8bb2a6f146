//! Real intervals with outward rounding.
//!
//! Invariant: `lo <= hi` (extended reals allowed at the endpoints). Every
//! operation encloses the exact image of its operands.

use super::bigfloat::{BigFloat, Round};
use crate::{Error, Result};
use core::cmp::Ordering;

#[derive(Debug, Clone, PartialEq)]
pub struct Interval {
    pub lo: BigFloat,
    pub hi: BigFloat,
}

impl Interval {
    pub fn new(lo: BigFloat, hi: BigFloat) -> Interval {
        debug_assert!(lo.cmp(&hi) != Ordering::Greater);
        Interval { lo, hi }
    }

    pub fn point(v: BigFloat) -> Interval {
        Interval {
            lo: v.clone(),
            hi: v,
        }
    }

    pub fn zero() -> Interval {
        Interval::point(BigFloat::Zero)
    }

    pub fn one() -> Interval {
        Interval::point(BigFloat::one())
    }

    pub fn from_i64(v: i64) -> Interval {
        Interval::point(BigFloat::from_i64(v))
    }

    /// Exact rational `p/q` as a directed-rounded enclosure.
    pub fn from_ratio(p: i64, q: i64, prec: u32) -> Interval {
        let a = BigFloat::from_i64(p);
        let b = BigFloat::from_i64(q);
        Interval {
            lo: a.div(&b, prec, Round::Floor),
            hi: a.div(&b, prec, Round::Ceil),
        }
    }

    /// Enclose an `f64` exactly (every f64 is dyadic).
    pub fn from_f64(v: f64) -> Interval {
        Interval::point(BigFloat::from_f64(v))
    }

    pub fn entire() -> Interval {
        Interval {
            lo: BigFloat::inf(true),
            hi: BigFloat::inf(false),
        }
    }

    pub fn hull(&self, other: &Interval) -> Interval {
        Interval {
            lo: if self.lo.cmp(&other.lo) == Ordering::Less {
                self.lo.clone()
            } else {
                other.lo.clone()
            },
            hi: if self.hi.cmp(&other.hi) == Ordering::Greater {
                self.hi.clone()
            } else {
                other.hi.clone()
            },
        }
    }

    pub fn intersect(&self, other: &Interval) -> Option<Interval> {
        let lo = if self.lo.cmp(&other.lo) == Ordering::Greater {
            self.lo.clone()
        } else {
            other.lo.clone()
        };
        let hi = if self.hi.cmp(&other.hi) == Ordering::Less {
            self.hi.clone()
        } else {
            other.hi.clone()
        };
        if lo.cmp(&hi) == Ordering::Greater {
            None
        } else {
            Some(Interval { lo, hi })
        }
    }

    pub fn overlaps(&self, other: &Interval) -> bool {
        self.intersect(other).is_some()
    }

    pub fn contains(&self, v: &BigFloat) -> bool {
        self.lo.cmp(v) != Ordering::Greater && self.hi.cmp(v) != Ordering::Less
    }

    pub fn contains_interval(&self, other: &Interval) -> bool {
        self.lo.cmp(&other.lo) != Ordering::Greater && self.hi.cmp(&other.hi) != Ordering::Less
    }

    pub fn contains_zero(&self) -> bool {
        self.contains(&BigFloat::Zero)
    }

    pub fn is_strictly_positive(&self) -> bool {
        self.lo.signum() > 0
    }

    pub fn is_strictly_negative(&self) -> bool {
        self.hi.signum() < 0
    }

    pub fn width(&self, prec: u32) -> BigFloat {
        self.hi.sub(&self.lo, prec, Round::Ceil)
    }

    pub fn mid(&self, prec: u32) -> BigFloat {
        if self.lo.is_inf() || self.hi.is_inf() {
            return BigFloat::Zero;
        }
        self.lo
            .add(&self.hi, prec, Round::Floor)
            .mul_pow2(-1)
            .round(prec, Round::Floor)
    }

    /// Magnitude bound: sup |x| over the interval.
    pub fn mag(&self) -> BigFloat {
        let a = self.lo.abs();
        let b = self.hi.abs();
        if a.cmp(&b) == Ordering::Greater {
            a
        } else {
            b
        }
    }

    /// Mignitude: inf |x| over the interval (0 if it contains 0).
    pub fn mig(&self) -> BigFloat {
        if self.contains_zero() {
            BigFloat::Zero
        } else if self.lo.signum() > 0 {
            self.lo.clone()
        } else {
            self.hi.abs()
        }
    }

    pub fn neg(&self) -> Interval {
        Interval {
            lo: self.hi.neg(),
            hi: self.lo.neg(),
        }
    }

    pub fn add(&self, other: &Interval, prec: u32) -> Interval {
        Interval {
            lo: self.lo.add(&other.lo, prec, Round::Floor),
            hi: self.hi.add(&other.hi, prec, Round::Ceil),
        }
    }

    pub fn sub(&self, other: &Interval, prec: u32) -> Interval {
        self.add(&other.neg(), prec)
    }

    pub fn mul(&self, other: &Interval, prec: u32) -> Interval {
        // Endpoint products; directed rounding per candidate.
        let cands_lo = [
            self.lo.mul(&other.lo, prec, Round::Floor),
            self.lo.mul(&other.hi, prec, Round::Floor),
            self.hi.mul(&other.lo, prec, Round::Floor),
            self.hi.mul(&other.hi, prec, Round::Floor),
        ];
        let cands_hi = [
            self.lo.mul(&other.lo, prec, Round::Ceil),
            self.lo.mul(&other.hi, prec, Round::Ceil),
            self.hi.mul(&other.lo, prec, Round::Ceil),
            self.hi.mul(&other.hi, prec, Round::Ceil),
        ];
        let mut lo = cands_lo[0].clone();
        for c in &cands_lo[1..] {
            if c.cmp(&lo) == Ordering::Less {
                lo = c.clone();
            }
        }
        let mut hi = cands_hi[0].clone();
        for c in &cands_hi[1..] {
            if c.cmp(&hi) == Ordering::Greater {
                hi = c.clone();
            }
        }
        Interval { lo, hi }
    }

    pub fn div(&self, other: &Interval, prec: u32) -> Result<Interval> {
        if other.contains_zero() {
            return Err(Error::DomainError);
        }
        let cands_lo = [
            self.lo.div(&other.lo, prec, Round::Floor),
            self.lo.div(&other.hi, prec, Round::Floor),
            self.hi.div(&other.lo, prec, Round::Floor),
            self.hi.div(&other.hi, prec, Round::Floor),
        ];
        let cands_hi = [
            self.lo.div(&other.lo, prec, Round::Ceil),
            self.lo.div(&other.hi, prec, Round::Ceil),
            self.hi.div(&other.lo, prec, Round::Ceil),
            self.hi.div(&other.hi, prec, Round::Ceil),
        ];
        let mut lo = cands_lo[0].clone();
        for c in &cands_lo[1..] {
            if c.cmp(&lo) == Ordering::Less {
                lo = c.clone();
            }
        }
        let mut hi = cands_hi[0].clone();
        for c in &cands_hi[1..] {
            if c.cmp(&hi) == Ordering::Greater {
                hi = c.clone();
            }
        }
        Ok(Interval { lo, hi })
    }

    pub fn recip(&self, prec: u32) -> Result<Interval> {
        Interval::one().div(self, prec)
    }

    pub fn mul_pow2(&self, k: i64) -> Interval {
        Interval {
            lo: self.lo.mul_pow2(k),
            hi: self.hi.mul_pow2(k),
        }
    }

    /// Multiply by an exact integer.
    pub fn mul_i64(&self, k: i64, prec: u32) -> Interval {
        self.mul(&Interval::from_i64(k), prec)
    }

    pub fn sqr(&self, prec: u32) -> Interval {
        // Tighter than self*self when the interval straddles 0.
        if self.contains_zero() {
            let m = self.mag();
            Interval {
                lo: BigFloat::Zero,
                hi: m.mul(&m, prec, Round::Ceil),
            }
        } else {
            self.mul(self, prec)
        }
    }

    pub fn sqrt(&self, prec: u32) -> Result<Interval> {
        if self.lo.signum() < 0 {
            return Err(Error::DomainError);
        }
        Ok(Interval {
            lo: self.lo.sqrt(prec, Round::Floor),
            hi: self.hi.sqrt(prec, Round::Ceil),
        })
    }

    /// Integer power with sign analysis.
    pub fn powi(&self, n: i64, prec: u32) -> Result<Interval> {
        if n == 0 {
            return Ok(Interval::one());
        }
        if n < 0 {
            return self.powi(-n, prec)?.recip(prec);
        }
        let mut result = Interval::one();
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
            base = if e & 1 == 1 || e > 1 {
                base.sqr(prec)
            } else {
                base.sqr(prec)
            };
        }
        // Even powers of straddling intervals are nonnegative.
        if n % 2 == 0 && result.lo.signum() < 0 && self.contains_zero() {
            result.lo = BigFloat::Zero;
        }
        Ok(result)
    }

    /// Widen both endpoints outward by `2^-bits` relative to magnitude scale.
    pub fn widen_2exp(&self, e: i64) -> Interval {
        let eps = BigFloat::from_biguint(false, num_bigint::BigUint::from(1u32), e);
        Interval {
            lo: self.lo.sub(&eps, 8192, Round::Floor),
            hi: self.hi.add(&eps, 8192, Round::Ceil),
        }
    }

    /// Widen by an absolute bound `r >= 0` on both sides.
    pub fn widen(&self, r: &BigFloat, prec: u32) -> Interval {
        debug_assert!(r.signum() >= 0);
        Interval {
            lo: self.lo.sub(r, prec, Round::Floor),
            hi: self.hi.add(r, prec, Round::Ceil),
        }
    }

    /// Ball `[-r, r]` from a magnitude bound.
    pub fn ball(r: &BigFloat) -> Interval {
        Interval {
            lo: r.abs().neg(),
            hi: r.abs(),
        }
    }

    pub fn to_f64_mid(&self) -> f64 {
        0.5 * (self.lo.to_f64() + self.hi.to_f64())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn iv(a: f64, b: f64) -> Interval {
        Interval::new(BigFloat::from_f64(a), BigFloat::from_f64(b))
    }

    #[test]
    fn mul_monotone_endpoints() {
        let r = iv(1.0, 2.0).mul(&iv(3.0, 4.0), 64);
        assert_eq!(r.lo.to_f64(), 3.0);
        assert_eq!(r.hi.to_f64(), 8.0);
    }

    #[test]
    fn add_identity() {
        let r = iv(0.0, 0.0).add(&iv(5.0, 5.0), 64);
        assert_eq!(r.lo.to_f64(), 5.0);
        assert_eq!(r.hi.to_f64(), 5.0);
    }

    #[test]
    fn div_by_zero_interval_is_domain_error() {
        assert_eq!(iv(1.0, 2.0).div(&iv(-1.0, 1.0), 64), Err(Error::DomainError));
    }

    #[test]
    fn sqrt_monotone() {
        let r = iv(4.0, 9.0).sqrt(64).unwrap();
        assert_eq!(r.lo.to_f64(), 2.0);
        assert_eq!(r.hi.to_f64(), 3.0);
    }

    #[test]
    fn signed_mul_cases() {
        let r = iv(-2.0, 3.0).mul(&iv(-5.0, 7.0), 64);
        assert_eq!(r.lo.to_f64(), -15.0);
        assert_eq!(r.hi.to_f64(), 21.0);
    }

    #[test]
    fn powi_even_nonnegative() {
        let r = iv(-2.0, 1.0).powi(2, 64).unwrap();
        assert!(r.lo.signum() >= 0);
        assert_eq!(r.hi.to_f64(), 4.0);
    }
}
