//! Dyadic floating-point numbers with directed rounding.
//!
//! A finite value is `(-1)^neg * mant * 2^exp` with an arbitrary-precision
//! mantissa. Every rounding operation states its direction explicitly, so the
//! interval layer can guarantee outward enclosures. Infinities are permitted
//! so that overflow degrades to valid (wide) enclosures instead of panics.

use alloc::string::String;
use core::cmp::Ordering;
use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{One, Zero};

/// Rounding direction for an operation that may discard low-order bits.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Round {
    /// Toward minus infinity.
    Floor,
    /// Toward plus infinity.
    Ceil,
}

impl Round {
    pub fn flip(self) -> Round {
        match self {
            Round::Floor => Round::Ceil,
            Round::Ceil => Round::Floor,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum BigFloat {
    Zero,
    /// `(-1)^neg * mant * 2^exp`, with `mant != 0`.
    Finite { neg: bool, mant: BigUint, exp: i64 },
    Inf { neg: bool },
}

impl BigFloat {
    pub fn zero() -> Self {
        BigFloat::Zero
    }

    pub fn one() -> Self {
        BigFloat::from_i64(1)
    }

    pub fn inf(neg: bool) -> Self {
        BigFloat::Inf { neg }
    }

    pub fn from_u64(v: u64) -> Self {
        if v == 0 {
            BigFloat::Zero
        } else {
            BigFloat::Finite {
                neg: false,
                mant: BigUint::from(v),
                exp: 0,
            }
        }
    }

    pub fn from_i64(v: i64) -> Self {
        if v == 0 {
            BigFloat::Zero
        } else {
            BigFloat::Finite {
                neg: v < 0,
                mant: BigUint::from(v.unsigned_abs()),
                exp: 0,
            }
        }
    }

    pub fn from_biguint(neg: bool, mant: BigUint, exp: i64) -> Self {
        if mant.is_zero() {
            BigFloat::Zero
        } else {
            BigFloat::Finite { neg, mant, exp }
        }
    }

    /// Exact conversion; every `f64` is a dyadic rational. NaN maps to +inf
    /// (callers never feed NaN in rigorous paths).
    pub fn from_f64(v: f64) -> Self {
        if v == 0.0 {
            return BigFloat::Zero;
        }
        if v.is_nan() {
            return BigFloat::Inf { neg: false };
        }
        if v.is_infinite() {
            return BigFloat::Inf { neg: v < 0.0 };
        }
        let bits = v.to_bits();
        let neg = bits >> 63 == 1;
        let biased = ((bits >> 52) & 0x7ff) as i64;
        let frac = bits & ((1u64 << 52) - 1);
        let (mant, exp) = if biased == 0 {
            (frac, -1074)
        } else {
            (frac | (1u64 << 52), biased - 1075)
        };
        BigFloat::from_biguint(neg, BigUint::from(mant), exp)
    }

    /// Nearest `f64` (ties arbitrary); used only for heuristics/diagnostics.
    pub fn to_f64(&self) -> f64 {
        match self {
            BigFloat::Zero => 0.0,
            BigFloat::Inf { neg } => {
                if *neg {
                    f64::NEG_INFINITY
                } else {
                    f64::INFINITY
                }
            }
            BigFloat::Finite { neg, mant, exp } => {
                let bits = mant.bits() as i64;
                // Keep the top 64 bits of the mantissa.
                let (top, e) = if bits > 64 {
                    let shifted: BigUint = mant >> ((bits - 64) as u64);
                    (shifted.to_u64_digits()[0], exp + bits - 64)
                } else {
                    let digits = mant.to_u64_digits();
                    (digits[0], *exp)
                };
                let mut v = top as f64;
                v *= libm::exp2(e as f64);
                if *neg {
                    -v
                } else {
                    v
                }
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, BigFloat::Zero)
    }

    pub fn is_finite(&self) -> bool {
        !matches!(self, BigFloat::Inf { .. })
    }

    pub fn is_inf(&self) -> bool {
        matches!(self, BigFloat::Inf { .. })
    }

    /// Sign as -1, 0, or 1.
    pub fn signum(&self) -> i32 {
        match self {
            BigFloat::Zero => 0,
            BigFloat::Finite { neg, .. } | BigFloat::Inf { neg } => {
                if *neg {
                    -1
                } else {
                    1
                }
            }
        }
    }

    pub fn neg(&self) -> BigFloat {
        match self {
            BigFloat::Zero => BigFloat::Zero,
            BigFloat::Finite { neg, mant, exp } => BigFloat::Finite {
                neg: !neg,
                mant: mant.clone(),
                exp: *exp,
            },
            BigFloat::Inf { neg } => BigFloat::Inf { neg: !neg },
        }
    }

    pub fn abs(&self) -> BigFloat {
        match self {
            BigFloat::Finite { mant, exp, .. } => BigFloat::Finite {
                neg: false,
                mant: mant.clone(),
                exp: *exp,
            },
            BigFloat::Inf { .. } => BigFloat::Inf { neg: false },
            BigFloat::Zero => BigFloat::Zero,
        }
    }

    /// Exact multiplication by `2^k`.
    pub fn mul_pow2(&self, k: i64) -> BigFloat {
        match self {
            BigFloat::Finite { neg, mant, exp } => BigFloat::Finite {
                neg: *neg,
                mant: mant.clone(),
                exp: exp + k,
            },
            other => other.clone(),
        }
    }

    /// Position of the most significant bit: value lies in
    /// `[2^(msb-1), 2^msb)` for positive finite values.
    fn msb(&self) -> Option<i64> {
        match self {
            BigFloat::Finite { mant, exp, .. } => Some(exp + mant.bits() as i64),
            _ => None,
        }
    }

    /// log2 of |value|, rounded to an i64 upper bound (for heuristics);
    /// zero maps to i64::MIN and infinities to i64::MAX.
    pub fn log2_approx(&self) -> i64 {
        match self {
            BigFloat::Zero => i64::MIN,
            BigFloat::Inf { .. } => i64::MAX,
            _ => self.msb().unwrap(),
        }
    }

    /// Round the mantissa to `prec` bits in the given direction.
    pub fn round(&self, prec: u32, rnd: Round) -> BigFloat {
        match self {
            BigFloat::Finite { neg, mant, exp } => {
                let bits = mant.bits();
                if bits <= prec as u64 {
                    return self.clone();
                }
                let shift = bits - prec as u64;
                let q: BigUint = mant >> shift;
                let dropped = {
                    let back: BigUint = &q << shift;
                    back != *mant
                };
                let mut q = q;
                if dropped {
                    // Increase magnitude if rounding away from zero in the
                    // requested direction.
                    let away = match rnd {
                        Round::Floor => *neg,
                        Round::Ceil => !*neg,
                    };
                    if away {
                        q += 1u32;
                    }
                }
                BigFloat::from_biguint(*neg, q, exp + shift as i64)
            }
            other => other.clone(),
        }
    }

    /// Exact comparison.
    pub fn cmp(&self, other: &BigFloat) -> Ordering {
        let sa = self.signum();
        let sb = other.signum();
        if sa != sb {
            return sa.cmp(&sb);
        }
        if sa == 0 {
            return Ordering::Equal;
        }
        let mag = match (self, other) {
            (BigFloat::Inf { .. }, BigFloat::Inf { .. }) => Ordering::Equal,
            (BigFloat::Inf { .. }, _) => Ordering::Greater,
            (_, BigFloat::Inf { .. }) => Ordering::Less,
            (
                BigFloat::Finite {
                    mant: ma, exp: ea, ..
                },
                BigFloat::Finite {
                    mant: mb, exp: eb, ..
                },
            ) => {
                let ta = ea + ma.bits() as i64;
                let tb = eb + mb.bits() as i64;
                if ta != tb {
                    ta.cmp(&tb)
                } else if ea >= eb {
                    let shifted: BigUint = ma << ((ea - eb) as u64);
                    shifted.cmp(mb)
                } else {
                    let shifted: BigUint = mb << ((eb - ea) as u64);
                    ma.cmp(&shifted)
                }
            }
            _ => unreachable!(),
        };
        if sa > 0 {
            mag
        } else {
            mag.reverse()
        }
    }

    /// Directed addition at precision `prec`.
    pub fn add(&self, other: &BigFloat, prec: u32, rnd: Round) -> BigFloat {
        match (self, other) {
            (BigFloat::Zero, b) => b.round(prec, rnd),
            (a, BigFloat::Zero) => a.round(prec, rnd),
            (BigFloat::Inf { neg: na }, BigFloat::Inf { neg: nb }) => {
                if na == nb {
                    self.clone()
                } else {
                    // inf - inf: return an infinity in the rounding direction
                    // (the interval layer never produces this on valid input).
                    BigFloat::Inf {
                        neg: rnd == Round::Floor,
                    }
                }
            }
            (BigFloat::Inf { .. }, _) => self.clone(),
            (_, BigFloat::Inf { .. }) => other.clone(),
            (
                BigFloat::Finite {
                    neg: na,
                    mant: ma,
                    exp: ea,
                },
                BigFloat::Finite {
                    neg: nb,
                    mant: mb,
                    exp: eb,
                },
            ) => {
                // If one operand is negligibly small, replace it by a sticky
                // nudge of magnitude below one ulp, signed toward `rnd`.
                let ta = ea + ma.bits() as i64;
                let tb = eb + mb.bits() as i64;
                let cut = ta.max(tb) - prec as i64 - 8;
                if tb < cut {
                    return sticky_add(*na, ma, *ea, prec, rnd, cut);
                }
                if ta < cut {
                    return sticky_add(*nb, mb, *eb, prec, rnd, cut);
                }
                add_aligned(*na, ma, *ea, *nb, mb, *eb, prec, rnd)
            }
        }
    }

    pub fn sub(&self, other: &BigFloat, prec: u32, rnd: Round) -> BigFloat {
        self.add(&other.neg(), prec, rnd)
    }

    /// Directed multiplication at precision `prec`.
    pub fn mul(&self, other: &BigFloat, prec: u32, rnd: Round) -> BigFloat {
        match (self, other) {
            (BigFloat::Zero, _) | (_, BigFloat::Zero) => BigFloat::Zero,
            (BigFloat::Inf { neg: na }, b) | (b, BigFloat::Inf { neg: na }) => {
                let s = if *na { -1 } else { 1 } * b.signum();
                if s == 0 {
                    BigFloat::Zero
                } else {
                    BigFloat::Inf { neg: s < 0 }
                }
            }
            (
                BigFloat::Finite {
                    neg: na,
                    mant: ma,
                    exp: ea,
                },
                BigFloat::Finite {
                    neg: nb,
                    mant: mb,
                    exp: eb,
                },
            ) => BigFloat::from_biguint(na ^ nb, ma * mb, ea + eb).round(prec, rnd),
        }
    }

    /// Directed division at precision `prec`. Division by zero gives a signed
    /// infinity (the interval layer screens zero divisors beforehand).
    pub fn div(&self, other: &BigFloat, prec: u32, rnd: Round) -> BigFloat {
        match (self, other) {
            (_, BigFloat::Zero) => BigFloat::Inf {
                neg: rnd == Round::Floor,
            },
            (BigFloat::Zero, _) => BigFloat::Zero,
            (BigFloat::Inf { neg: na }, b) => {
                let s = if *na { -1 } else { 1 } * b.signum();
                BigFloat::Inf { neg: s < 0 }
            }
            (_, BigFloat::Inf { .. }) => BigFloat::Zero,
            (
                BigFloat::Finite {
                    neg: na,
                    mant: ma,
                    exp: ea,
                },
                BigFloat::Finite {
                    neg: nb,
                    mant: mb,
                    exp: eb,
                },
            ) => {
                let neg = na ^ nb;
                let ba = ma.bits() as i64;
                let bb = mb.bits() as i64;
                let scale = (prec as i64 + 2 + bb - ba).max(0) as u64;
                let num: BigUint = ma << scale;
                let (q, r) = num.div_rem(mb);
                let mut q = q;
                if !r.is_zero() {
                    let away = match rnd {
                        Round::Floor => neg,
                        Round::Ceil => !neg,
                    };
                    if away {
                        q += 1u32;
                    }
                }
                BigFloat::from_biguint(neg, q, ea - eb - scale as i64).round(prec, rnd)
            }
        }
    }

    /// Directed square root; negative input yields +inf/0 endpoints so that
    /// enclosing callers can reject it (they check domains first).
    pub fn sqrt(&self, prec: u32, rnd: Round) -> BigFloat {
        match self {
            BigFloat::Zero => BigFloat::Zero,
            BigFloat::Inf { neg } => {
                if *neg {
                    BigFloat::Zero
                } else {
                    BigFloat::Inf { neg: false }
                }
            }
            BigFloat::Finite { neg, mant, exp } => {
                if *neg {
                    return BigFloat::Zero;
                }
                // Scale so the shifted mantissa has ~2*(prec+2) bits and the
                // exponent is even.
                let bits = mant.bits() as i64;
                let want = 2 * (prec as i64 + 2);
                let mut shift = (want - bits).max(0);
                if (exp - shift) % 2 != 0 {
                    shift += 1;
                }
                let m: BigUint = mant << (shift as u64);
                let root = num_integer::Roots::sqrt(&m);
                let exact = &root * &root == m;
                let mut root = root;
                if !exact && rnd == Round::Ceil {
                    root += 1u32;
                }
                BigFloat::from_biguint(false, root, (exp - shift) / 2).round(prec, rnd)
            }
        }
    }

    /// Decimal rendering with `digits` significant digits, rounded in the
    /// given direction (used for serialization of interval endpoints).
    pub fn to_decimal(&self, digits: usize, rnd: Round) -> String {
        use alloc::format;
        match self {
            BigFloat::Zero => String::from("0"),
            BigFloat::Inf { neg } => String::from(if *neg { "-inf" } else { "inf" }),
            BigFloat::Finite { neg, .. } => {
                // value = m * 2^e; want d10 ~ digits decimal digits:
                // scale by 10^k so that the integer part has `digits` digits.
                let log10 = self.abs().log2_approx() as f64 * 0.30102999566398114;
                let k = digits as i64 - 1 - libm::floor(log10) as i64;
                let pow10 = pow10_biguint(k.unsigned_abs());
                let scaled = if k >= 0 {
                    let p = BigFloat::from_biguint(false, pow10, 0);
                    self.mul(&p, 4096, dir_for(*neg, rnd))
                } else {
                    let p = BigFloat::from_biguint(false, pow10, 0);
                    self.div(&p, 4096, dir_for(*neg, rnd))
                };
                let int = scaled.to_integer_directed(rnd);
                format!("{}e{}", int, -k)
            }
        }
    }

    /// Round to an integer (as decimal string) in the given direction.
    fn to_integer_directed(&self, rnd: Round) -> String {
        use alloc::format;
        match self {
            BigFloat::Zero => String::from("0"),
            BigFloat::Inf { neg } => String::from(if *neg { "-inf" } else { "inf" }),
            BigFloat::Finite { neg, mant, exp } => {
                let (int, frac_nonzero) = if *exp >= 0 {
                    (mant << (*exp as u64), false)
                } else {
                    let q: BigUint = mant >> ((-exp) as u64);
                    let back: BigUint = &q << ((-exp) as u64);
                    (q.clone(), back != *mant)
                };
                let mut int = int;
                if frac_nonzero {
                    let away = match rnd {
                        Round::Floor => *neg,
                        Round::Ceil => !*neg,
                    };
                    if away {
                        int += 1u32;
                    }
                }
                if *neg && !int.is_zero() {
                    format!("-{}", int)
                } else {
                    format!("{}", int)
                }
            }
        }
    }
}

fn dir_for(neg: bool, rnd: Round) -> Round {
    // When multiplying/dividing a signed value by a positive scale, the
    // direction of the result tracks the requested direction directly.
    let _ = neg;
    rnd
}

fn pow10_biguint(k: u64) -> BigUint {
    let mut p = BigUint::one();
    let ten = BigUint::from(10u32);
    for _ in 0..k {
        p = &p * &ten;
    }
    p
}

#[allow(clippy::too_many_arguments)]
fn add_aligned(
    na: bool,
    ma: &BigUint,
    ea: i64,
    nb: bool,
    mb: &BigUint,
    eb: i64,
    prec: u32,
    rnd: Round,
) -> BigFloat {
    let e = ea.min(eb);
    let ma2: BigUint = ma << ((ea - e) as u64);
    let mb2: BigUint = mb << ((eb - e) as u64);
    let (neg, mant) = match (na, nb) {
        (false, false) => (false, ma2 + mb2),
        (true, true) => (true, ma2 + mb2),
        (false, true) => match ma2.cmp(&mb2) {
            Ordering::Less => (true, mb2 - ma2),
            _ => (false, ma2 - mb2),
        },
        (true, false) => match mb2.cmp(&ma2) {
            Ordering::Less => (true, ma2 - mb2),
            _ => (false, mb2 - ma2),
        },
    };
    BigFloat::from_biguint(neg, mant, e).round(prec, rnd)
}

fn sticky_add(neg: bool, mant: &BigUint, exp: i64, prec: u32, rnd: Round, cut: i64) -> BigFloat {
    // big + tiny: add a directed nudge of magnitude 2^(cut-2) to the large
    // operand so the result brackets the exact sum from the correct side.
    add_aligned(
        neg,
        mant,
        exp,
        rnd == Round::Floor,
        &BigUint::one(),
        cut - 2,
        prec,
        rnd,
    )
}

/// Parse a decimal string ("1.25", "-0.49e-3", "pi" is not handled here) into
/// a directed-rounded BigFloat.
pub fn parse_decimal(s: &str, prec: u32, rnd: Round) -> Option<BigFloat> {
    let s = s.trim();
    let (neg, body) = match s.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, s.strip_prefix('+').unwrap_or(s)),
    };
    let (body, exp10) = match body.split_once(['e', 'E']) {
        Some((m, e)) => (m, e.parse::<i64>().ok()?),
        None => (body, 0),
    };
    let (int_part, frac_part) = match body.split_once('.') {
        Some((i, f)) => (i, f),
        None => (body, ""),
    };
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    let digits: String = [int_part, frac_part].concat();
    if !digits.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    let mant = digits.parse::<BigUint>().ok()?;
    let e10 = exp10 - frac_part.len() as i64;
    let base = BigFloat::from_biguint(neg, mant, 0);
    let p = BigFloat::from_biguint(false, pow10_biguint(e10.unsigned_abs()), 0);
    Some(if e10 >= 0 {
        base.mul(&p, prec, rnd)
    } else {
        base.div(&p, prec, rnd)
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn add_directed_brackets_exact() {
        let a = BigFloat::from_f64(1.0);
        let b = BigFloat::from_f64(3.0);
        let lo = a.div(&b, 64, Round::Floor);
        let hi = a.div(&b, 64, Round::Ceil);
        assert_eq!(lo.cmp(&hi), Ordering::Less);
        // 1/3 lies between.
        let three = BigFloat::from_f64(3.0);
        assert_eq!(lo.mul(&three, 128, Round::Floor).cmp(&a), Ordering::Less);
        assert_eq!(hi.mul(&three, 128, Round::Ceil).cmp(&a), Ordering::Greater);
    }

    #[test]
    fn sqrt_exact_and_directed() {
        let four = BigFloat::from_f64(4.0);
        let r = four.sqrt(64, Round::Floor);
        assert_eq!(r.cmp(&BigFloat::from_f64(2.0)), Ordering::Equal);
        let two = BigFloat::from_f64(2.0);
        let lo = two.sqrt(64, Round::Floor);
        let hi = two.sqrt(64, Round::Ceil);
        assert_eq!(lo.cmp(&hi), Ordering::Less);
        assert!(lo.mul(&lo, 200, Round::Ceil).cmp(&two) == Ordering::Less);
        assert!(hi.mul(&hi, 200, Round::Floor).cmp(&two) == Ordering::Greater);
    }

    #[test]
    fn sticky_gap_addition() {
        let big = BigFloat::from_f64(1.0);
        let tiny = BigFloat::from_biguint(false, BigUint::one(), -100000);
        let lo = big.add(&tiny, 64, Round::Floor);
        let hi = big.add(&tiny, 64, Round::Ceil);
        assert!(lo.cmp(&big) != Ordering::Greater);
        assert!(hi.cmp(&big) == Ordering::Greater);
        // exact sum is in [lo, hi]
        assert!(lo.cmp(&hi) == Ordering::Less);
    }

    #[test]
    fn parse_decimal_roundtrip() {
        let v = parse_decimal("0.5", 64, Round::Floor).unwrap();
        assert_eq!(v.cmp(&BigFloat::from_f64(0.5)), Ordering::Equal);
        let lo = parse_decimal("0.1", 64, Round::Floor).unwrap();
        let hi = parse_decimal("0.1", 64, Round::Ceil).unwrap();
        assert_eq!(lo.cmp(&hi), Ordering::Less);
        assert!((lo.to_f64() - 0.1).abs() < 1e-15);
    }

    #[test]
    fn to_decimal_directed() {
        let third_lo = BigFloat::from_f64(1.0).div(&BigFloat::from_f64(3.0), 128, Round::Floor);
        let s = third_lo.to_decimal(10, Round::Floor);
        assert!(s.starts_with("3333333333"), "{s}");
    }
}
