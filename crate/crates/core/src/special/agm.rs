//! Complete elliptic integrals via the arithmetic-geometric mean.
//!
//! Conventions: `K(m)` and `E(m)` use the parameter m = k^2, so
//! `K(m) = pi / (2 M(1, sqrt(1-m)))`. The AGM iteration is monotone
//! (`b_n <= b_{n+1} <= a_{n+1} <= a_n`), so `[b_n, a_n]` is a rigorous
//! enclosure of the limit at every step. `E/K` uses the quadratically
//! convergent sum `E/K = 1 - sum 2^{n-1} c_n^2` with tail `2^{m+1} c_{m+1}^2`
//! and the cancellation-free recursion `c_{n+1} = c_n^2 / (4 a_{n+1})`.
//!
//! The behavior near m = 1 is carried by the logarithmic splitting
//! `K(1-z) = A3(z) + A4(z) log z`, `E(1-z) = A1(z) + A2(z) log z`, with
//! A3, A4 the classical series (d_n = psi(n+1) - psi(n+1/2) = 2 log 2 + r_n,
//! r_n rational) and A1, A2 derived from them through the hypergeometric
//! derivative relation E(m) = 2m(1-m)K'(m) + (1-m)K(m).

use crate::rigor::{BigFloat, Interval, RigorCtx, Round};
use crate::{Error, Result};
use alloc::vec;
use alloc::vec::Vec;

/// Enclosure of the arithmetic-geometric mean M(a0, b0) for positive inputs.
///
/// The interval iteration `a <- (a+b)/2`, `b <- sqrt(ab)` encloses the exact
/// iterates for every point of the input boxes, and the exact sequences
/// bracket the limit (`b_n <= M <= a_n`), so `hull(a_n, b_n)` contains
/// M(a0, b0) at every step. Iterate until the hull width stagnates.
pub fn agm(a0: &Interval, b0: &Interval, ctx: &RigorCtx) -> Result<Interval> {
    let prec = ctx.prec;
    if a0.lo.signum() <= 0 || b0.lo.signum() <= 0 {
        return Err(Error::DomainError);
    }
    let mut a = a0.clone();
    let mut b = b0.clone();
    let mut best = a.hull(&b);
    for _ in 0..(prec as usize + 64) {
        let na = a.add(&b, prec).mul_pow2(-1);
        let nb = a.mul(&b, prec).sqrt(prec)?;
        a = na;
        b = nb;
        let h = a.hull(&b);
        if h.width(prec).cmp(&best.width(prec)) != core::cmp::Ordering::Less {
            break;
        }
        best = h;
    }
    Ok(best)
}

/// K(m) = pi / (2 M(1, sqrt(1-m))) for m in [0, 1).
pub fn ellip_k(m: &Interval, ctx: &RigorCtx) -> Result<Interval> {
    let prec = ctx.prec;
    if m.lo.signum() < 0 || m.hi.cmp(&BigFloat::one()) != core::cmp::Ordering::Less {
        return Err(Error::DomainError);
    }
    let b0 = Interval::one().sub(m, prec).sqrt(prec)?;
    if b0.lo.signum() <= 0 {
        return Err(Error::DomainError);
    }
    let mean = agm(&Interval::one(), &b0, ctx)?;
    ctx.pi.div(&mean.mul_pow2(1), prec)
}

/// E(m)/K(m) via `1 - sum 2^{n-1} c_n^2`, tail `<= 2^{m+1} c_{m+1}^2`.
pub fn ellip_e_over_k(m: &Interval, ctx: &RigorCtx) -> Result<Interval> {
    let prec = ctx.prec;
    if m.lo.signum() < 0 || m.hi.cmp(&BigFloat::one()) != core::cmp::Ordering::Less {
        return Err(Error::DomainError);
    }
    let mut a = Interval::one();
    let mut b = Interval::one().sub(m, prec).sqrt(prec)?;
    let mut c = m.sqrt(prec)?;
    let mut sum = c.sqr(prec).mul_pow2(-1); // 2^{-1} c_0^2
    let mut n = 0i64;
    loop {
        let a_next = a.add(&b, prec).mul_pow2(-1);
        let b_next = a.mul(&b, prec).sqrt(prec)?;
        // c_{n+1} = c_n^2 / (4 a_{n+1}), avoiding cancellation.
        let c_next = c.sqr(prec).div(&a_next.mul_pow2(2), prec)?;
        n += 1;
        let term = c_next.sqr(prec).mul_pow2(n - 1);
        sum = sum.add(&term, prec);
        a = a_next;
        b = b_next;
        c = c_next;
        // tail <= 2^{n+1} c_{n+1}^2 (bounded by the next c via halving).
        let tail = c.sqr(prec).mul_pow2(n + 1).mag();
        if tail.log2_approx() < -(prec as i64) - 2 || n > prec as i64 + 64 {
            let body = Interval::one().sub(&sum, prec);
            return Ok(body.widen(&tail, prec));
        }
    }
}

pub fn ellip_e(m: &Interval, ctx: &RigorCtx) -> Result<Interval> {
    if m.lo.signum() < 0 {
        return Err(Error::DomainError);
    }
    if m.hi.is_zero() {
        return Ok(ctx.pi.mul_pow2(-1));
    }
    let ratio = ellip_e_over_k(m, ctx)?;
    let k = ellip_k(m, ctx)?;
    Ok(ratio.mul(&k, ctx.prec))
}

/// Series data for the near-1 behavior: all four A_j at once.
/// Stored as interval coefficients; index n is the coefficient of z^n.
#[derive(Debug, Clone)]
pub struct NearOneSeries {
    pub a1: Vec<Interval>,
    pub a2: Vec<Interval>,
    pub a3: Vec<Interval>,
    pub a4: Vec<Interval>,
    /// Coefficient magnitude bound `|a_n| <= tail_c * tail_r^{-n}`.
    pub tail_c: BigFloat,
    pub tail_r: BigFloat,
}

impl NearOneSeries {
    pub fn build(terms: usize, ctx: &RigorCtx) -> NearOneSeries {
        let prec = ctx.prec;
        let n = terms.max(4);
        // p_n = ((1/2)_n / n!)^2, exact rationals accumulated in intervals:
        // p_0 = 1, p_{k+1} = p_k ((2k+1)/(2k+2))^2.
        // d_n = 2 log 2 + r_n, r_{k+1} = r_k + 1/(k+1) - 1/(k+1/2),
        //   i.e. r_k rational, r_0 = 0.
        let mut p = Interval::one();
        let mut r = Interval::zero();
        let two_ln2 = ctx.ln2.mul_pow2(1);
        let mut a3 = Vec::with_capacity(n);
        let mut a4 = Vec::with_capacity(n);
        for k in 0..n {
            let d = two_ln2.add(&r, prec);
            a3.push(p.mul(&d, prec));
            a4.push(p.mul_pow2(-1).neg());
            // advance
            let kk = k as i64;
            let ratio = Interval::from_ratio(2 * kk + 1, 2 * kk + 2, prec);
            p = p.mul(&ratio.sqr(prec), prec);
            r = r
                .add(&Interval::from_ratio(1, kk + 1, prec), prec)
                .sub(&Interval::from_ratio(2, 2 * kk + 1, prec), prec);
        }
        // E(1-z) from K(1-z) via E(m) = 2m(1-m) K'(m) + (1-m) K(m) at
        // m = 1-z:  E(1-z) = -2z(1-z) d/dz[K(1-z)] + z K(1-z), giving
        //   A1 = -2z(1-z) A3' - 2(1-z) A4 + z A3,
        //   A2 = -2z(1-z) A4' + z A4.
        let d3 = poly_derive(&a3, prec);
        let d4 = poly_derive(&a4, prec);
        let a1 = poly_add(
            &poly_add(
                &poly_scale_zz(&d3, prec), // -2z(1-z) A3'
                &poly_mul_one_minus_z_scaled(&a4, prec),
                prec,
            ),
            &poly_shift_mul_z(&a3),
            prec,
        );
        let a2 = poly_add(&poly_scale_zz(&d4, prec), &poly_shift_mul_z(&a4), prec);
        // Coefficient bound: p_n <= 1 and d_n <= 2 log 2, so |A3_n| <= 3/2,
        // |A4_n| <= 1/2; the derived A1, A2 coefficients satisfy
        // |c_n| <= 5 * (1/0.99)^n (dominated by the n * p_n factor from the
        // derivative, and n (0.99)^n <= 37). This mirrors the classical
        // 5 * 0.99^{-n} bound for these functions.
        NearOneSeries {
            a1,
            a2,
            a3,
            a4,
            tail_c: BigFloat::from_f64(40.0),
            tail_r: BigFloat::from_f64(0.99),
        }
    }

    fn eval_poly(&self, coeffs: &[Interval], z: &Interval, ctx: &RigorCtx) -> Result<Interval> {
        let prec = ctx.prec;
        if z.mag().cmp(&self.tail_r) != core::cmp::Ordering::Less {
            return Err(Error::ConvergenceDomain);
        }
        let mut acc = Interval::zero();
        for c in coeffs.iter().rev() {
            acc = acc.mul(z, prec).add(c, prec);
        }
        let ratio = Interval::point(z.mag()).div(&Interval::point(self.tail_r.clone()), prec)?;
        let tail =
            crate::rigor::geometric_tail(&self.tail_c, &ratio, coeffs.len() as i64, prec)?;
        Ok(acc.widen(&tail, prec))
    }

    pub fn a1_at(&self, z: &Interval, ctx: &RigorCtx) -> Result<Interval> {
        self.eval_poly(&self.a1, z, ctx)
    }
    pub fn a2_at(&self, z: &Interval, ctx: &RigorCtx) -> Result<Interval> {
        self.eval_poly(&self.a2, z, ctx)
    }
    pub fn a3_at(&self, z: &Interval, ctx: &RigorCtx) -> Result<Interval> {
        self.eval_poly(&self.a3, z, ctx)
    }
    pub fn a4_at(&self, z: &Interval, ctx: &RigorCtx) -> Result<Interval> {
        self.eval_poly(&self.a4, z, ctx)
    }

    /// K(1-z) = A3(z) + A4(z) log z for z in (0, tail_r).
    pub fn k_near_one(&self, z: &Interval, ctx: &RigorCtx) -> Result<Interval> {
        let l = ctx.log(z)?;
        Ok(self
            .a3_at(z, ctx)?
            .add(&self.a4_at(z, ctx)?.mul(&l, ctx.prec), ctx.prec))
    }

    /// E(1-z) = A1(z) + A2(z) log z.
    pub fn e_near_one(&self, z: &Interval, ctx: &RigorCtx) -> Result<Interval> {
        let l = ctx.log(z)?;
        Ok(self
            .a1_at(z, ctx)?
            .add(&self.a2_at(z, ctx)?.mul(&l, ctx.prec), ctx.prec))
    }
}

fn poly_derive(c: &[Interval], prec: u32) -> Vec<Interval> {
    let mut out = Vec::with_capacity(c.len());
    for (n, a) in c.iter().enumerate().skip(1) {
        out.push(a.mul_i64(n as i64, prec));
    }
    out.push(Interval::zero());
    out
}

/// -2z(1-z) * p = (-2z + 2z^2) p
fn poly_scale_zz(p: &[Interval], prec: u32) -> Vec<Interval> {
    let mut out = vec![Interval::zero(); p.len() + 2];
    for (n, a) in p.iter().enumerate() {
        out[n + 1] = out[n + 1].add(&a.mul_i64(-2, prec), prec);
        out[n + 2] = out[n + 2].add(&a.mul_pow2(1), prec);
    }
    out.truncate(p.len());
    out
}

/// -2(1-z) * p = (-2 + 2z) p
fn poly_mul_one_minus_z_scaled(p: &[Interval], prec: u32) -> Vec<Interval> {
    let mut out = vec![Interval::zero(); p.len() + 1];
    for (n, a) in p.iter().enumerate() {
        out[n] = out[n].add(&a.mul_i64(-2, prec), prec);
        out[n + 1] = out[n + 1].add(&a.mul_pow2(1), prec);
    }
    out.truncate(p.len());
    out
}

/// z * p
fn poly_shift_mul_z(p: &[Interval]) -> Vec<Interval> {
    let mut out = vec![Interval::zero(); p.len()];
    for (n, a) in p.iter().enumerate() {
        if n + 1 < out.len() {
            out[n + 1] = a.clone();
        }
    }
    out
}

fn poly_add(a: &[Interval], b: &[Interval], prec: u32) -> Vec<Interval> {
    let n = a.len().max(b.len());
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let x = a.get(i).cloned().unwrap_or_else(Interval::zero);
        let y = b.get(i).cloned().unwrap_or_else(Interval::zero);
        out.push(x.add(&y, prec));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ctx() -> RigorCtx {
        RigorCtx::new(192)
    }

    fn iv(v: f64) -> Interval {
        Interval::from_f64(v)
    }

    #[test]
    fn agm_fixed_point() {
        let c = ctx();
        let r = agm(&Interval::one(), &Interval::one(), &c).unwrap();
        assert!(r.contains(&BigFloat::one()));
        assert!(r.width(64).to_f64() < 1e-50);
    }

    #[test]
    fn agm_gauss_constant() {
        let c = ctx();
        let sqrt2 = Interval::from_i64(2).sqrt(c.prec).unwrap();
        let r = agm(&sqrt2, &Interval::one(), &c).unwrap();
        // M(sqrt 2, 1) = 1.19814023473559220743992249228...
        let lo = crate::rigor::parse_decimal("1.198140234735592207439922492280", 256, Round::Floor)
            .unwrap();
        let hi = crate::rigor::parse_decimal("1.198140234735592207439922492281", 256, Round::Ceil)
            .unwrap();
        assert!(r.lo.cmp(&hi) == core::cmp::Ordering::Less);
        assert!(r.hi.cmp(&lo) == core::cmp::Ordering::Greater);
        assert!(r.width(64).to_f64() < 1e-50);
    }

    #[test]
    fn agm_rejects_nonpositive() {
        let c = ctx();
        assert!(agm(&iv(-1.0), &Interval::one(), &c).is_err());
    }

    #[test]
    fn k_at_zero_is_half_pi() {
        let c = ctx();
        let k = ellip_k(&Interval::zero(), &c).unwrap();
        let half_pi = c.pi.mul_pow2(-1);
        assert!(k.overlaps(&half_pi));
        assert!(k.width(64).to_f64() < 1e-50);
    }

    #[test]
    fn k_at_half_reference() {
        let c = ctx();
        let k = ellip_k(&Interval::from_ratio(1, 2, c.prec), &c).unwrap();
        // K(1/2) = 1.85407467730137191843385034720...
        let v = crate::rigor::parse_decimal("1.8540746773013719184338503472", 224, Round::Floor)
            .unwrap();
        assert!(k.contains(&v) || k.widen(&BigFloat::from_f64(1e-28), 224).contains(&v));
        assert!(k.width(64).to_f64() < 1e-40);
    }

    #[test]
    fn e_at_zero_is_half_pi() {
        let c = ctx();
        let e = ellip_e(&Interval::zero(), &c).unwrap();
        assert!(e.overlaps(&c.pi.mul_pow2(-1)));
    }

    #[test]
    fn legendre_identity_at_half() {
        // 2 K(1/2) E(1/2) - K(1/2)^2 = pi/2.
        let c = ctx();
        let m = Interval::from_ratio(1, 2, c.prec);
        let k = ellip_k(&m, &c).unwrap();
        let e = ellip_e(&m, &c).unwrap();
        let lhs = k.mul(&e, c.prec).mul_pow2(1).sub(&k.sqr(c.prec), c.prec);
        assert!(lhs.overlaps(&c.pi.mul_pow2(-1)));
        assert!(lhs.width(64).to_f64() < 1e-40);
    }

    #[test]
    fn legendre_identity_general() {
        // K(m)E(1-m) + E(m)K(1-m) - K(m)K(1-m) = pi/2 at m = 0.3.
        let c = ctx();
        let m = Interval::from_ratio(3, 10, c.prec);
        let mc = Interval::one().sub(&m, c.prec);
        let k = ellip_k(&m, &c).unwrap();
        let kc = ellip_k(&mc, &c).unwrap();
        let e = ellip_e(&m, &c).unwrap();
        let ec = ellip_e(&mc, &c).unwrap();
        let lhs = k
            .mul(&ec, c.prec)
            .add(&e.mul(&kc, c.prec), c.prec)
            .sub(&k.mul(&kc, c.prec), c.prec);
        assert!(lhs.overlaps(&c.pi.mul_pow2(-1)));
    }

    #[test]
    fn wronskian_identity() {
        // K(m) K'(1-m) + K'(m) K(1-m) = pi/(4 m (1-m)), with K' from
        // K'(m) = (E(m) - (1-m) K(m)) / (2m(1-m)).
        let c = ctx();
        let m = Interval::from_ratio(3, 10, c.prec);
        let mc = Interval::one().sub(&m, c.prec);
        let kprime = |mm: &Interval| -> Interval {
            let k = ellip_k(mm, &c).unwrap();
            let e = ellip_e(mm, &c).unwrap();
            let mmc = Interval::one().sub(mm, c.prec);
            e.sub(&mmc.mul(&k, c.prec), c.prec)
                .div(&mm.mul(&mmc, c.prec).mul_pow2(1), c.prec)
                .unwrap()
        };
        let lhs = ellip_k(&m, &c)
            .unwrap()
            .mul(&kprime(&mc), c.prec)
            .add(&kprime(&m).mul(&ellip_k(&mc, &c).unwrap(), c.prec), c.prec);
        let rhs = c
            .pi
            .div(&m.mul(&mc, c.prec).mul_pow2(2), c.prec)
            .unwrap();
        assert!(lhs.overlaps(&rhs), "{} vs {}", lhs.to_f64_mid(), rhs.to_f64_mid());
    }

    #[test]
    fn near_one_reconstruction() {
        // A3(z) + A4(z) log z must overlap K(1-z) at z = 0.1.
        let c = ctx();
        let series = NearOneSeries::build(64, &c);
        let z = Interval::from_ratio(1, 10, c.prec);
        let direct = ellip_k(&Interval::from_ratio(9, 10, c.prec), &c).unwrap();
        let near = series.k_near_one(&z, &c).unwrap();
        assert!(direct.overlaps(&near), "{} vs {}", direct.to_f64_mid(), near.to_f64_mid());
        // E route too.
        let direct_e = ellip_e(&Interval::from_ratio(9, 10, c.prec), &c).unwrap();
        let near_e = series.e_near_one(&z, &c).unwrap();
        assert!(direct_e.overlaps(&near_e));
    }

    #[test]
    fn a_series_signs() {
        let c = ctx();
        let series = NearOneSeries::build(48, &c);
        // A1, A3 nonnegative coefficients; A2, A4 nonpositive.
        for (n, a) in series.a3.iter().enumerate() {
            assert!(a.hi.signum() >= 0, "A3[{n}]");
            assert!(a.lo.signum() >= 0 || a.lo.abs().to_f64() < 1e-40, "A3[{n}]");
        }
        for (n, a) in series.a4.iter().enumerate() {
            assert!(a.lo.signum() <= 0, "A4[{n}]");
        }
        for (n, a) in series.a2.iter().enumerate().take(40) {
            assert!(a.lo.signum() <= 0 || a.lo.abs().to_f64() < 1e-40, "A2[{n}]");
        }
        for (n, a) in series.a1.iter().enumerate().take(40) {
            assert!(a.hi.signum() >= 0, "A1[{n}]");
        }
        // Sign check at a point: A2(0.2) <= 0.
        let v = series.a2_at(&iv(0.2), &c).unwrap();
        assert!(v.hi.signum() <= 0 || v.hi.to_f64() < 1e-30);
    }

    #[test]
    fn k_grows_like_half_log() {
        // K(1-z) ~ -(1/2) log z as z -> 0 (up to bounded terms).
        let c = ctx();
        let series = NearOneSeries::build(48, &c);
        let z = iv(1e-8);
        let k = series.k_near_one(&z, &c).unwrap();
        let expect = -0.5 * libm::log(1e-8);
        assert!((k.to_f64_mid() - expect).abs() < 3.0, "{}", k.to_f64_mid());
    }

    #[test]
    fn e_derivative_relation_finite_difference() {
        // E(m) vs 2m(1-m)K'(m) + (1-m)K(m), K' by finite differences at 0.25.
        let c = ctx();
        let h = 1e-7;
        let kp = (ellip_k(&iv(0.25 + h), &c).unwrap().to_f64_mid()
            - ellip_k(&iv(0.25 - h), &c).unwrap().to_f64_mid())
            / (2.0 * h);
        let k = ellip_k(&iv(0.25), &c).unwrap().to_f64_mid();
        let e = ellip_e(&iv(0.25), &c).unwrap().to_f64_mid();
        let rhs = 2.0 * 0.25 * 0.75 * kp + 0.75 * k;
        assert!((e - rhs).abs() < 1e-6, "{e} vs {rhs}");
    }
}
