//! Expansion of the kernels in powers of `e^{pi i z}` at fixed tau.
//!
//! The z-side of every kernel is a series in `zeta = e^{pi i z}` whose
//! coefficients are polynomials in z of degree at most two. The terms with
//! nonpositive zeta-powers form the non-decaying asymptotics `G(tau, z)`
//! (they appear only at even powers, with z-degree at most one), and the
//! remaining terms integrate against `e^{-pi r^2 t}` in closed form, which is
//! how the Laplace-transform tails are evaluated without quadrature.
//!
//! The factor `1/(j(tau) - j(z))` is handled through
//! `Delta(z) (j(tau) - j(z)) = j(tau) Delta(z) - E4(z)^3`, a unit power
//! series in zeta whose inverse carries a Cauchy-estimate tail on a circle
//! chosen inside the zero-free disk (the nearest zero sits at the orbit
//! representative of tau with maximal imaginary part).

use super::point::{tau_side, TauSide};
use super::tables::{kernel_table, KernelTable};
use super::KernelCtx;
use crate::qseries::{mul_tail_pub, QSeries, TailBound};
use crate::rigor::{BigFloat, ComplexBox, Interval, RigorCtx, Round};
use crate::special::{max_abs_on_circle, min_abs_on_circle, StandardForms};
use crate::{Error, Result};
use alloc::vec;
use alloc::vec::Vec;

/// Polynomial in z of degree <= 2 with box coefficients.
#[derive(Debug, Clone)]
pub struct ZPoly(pub [ComplexBox; 3]);

impl ZPoly {
    pub fn zero() -> ZPoly {
        ZPoly([ComplexBox::zero(), ComplexBox::zero(), ComplexBox::zero()])
    }

    pub fn constant(c: ComplexBox) -> ZPoly {
        ZPoly([c, ComplexBox::zero(), ComplexBox::zero()])
    }

    pub fn degree(&self) -> usize {
        if !crate::qseries::CoeffRing::is_zero(&self.0[2]) {
            2
        } else if !crate::qseries::CoeffRing::is_zero(&self.0[1]) {
            1
        } else {
            0
        }
    }

    pub fn add(&self, o: &ZPoly, prec: u32) -> ZPoly {
        ZPoly([
            self.0[0].add(&o.0[0], prec),
            self.0[1].add(&o.0[1], prec),
            self.0[2].add(&o.0[2], prec),
        ])
    }

    pub fn scale(&self, c: &ComplexBox, prec: u32) -> ZPoly {
        ZPoly([
            self.0[0].mul(c, prec),
            self.0[1].mul(c, prec),
            self.0[2].mul(c, prec),
        ])
    }

    pub fn mul(&self, o: &ZPoly, prec: u32) -> ZPoly {
        debug_assert!(self.degree() + o.degree() <= 2, "z-degree overflow");
        let mut out = [
            ComplexBox::zero(),
            ComplexBox::zero(),
            ComplexBox::zero(),
        ];
        for a in 0..3 {
            for b in 0..3 {
                if a + b > 2 {
                    continue;
                }
                out[a + b] =
                    out[a + b].add(&self.0[a].mul(&o.0[b], prec), prec);
            }
        }
        ZPoly(out)
    }

    pub fn eval(&self, z: &ComplexBox, prec: u32) -> ComplexBox {
        self.0[0]
            .add(&self.0[1].mul(z, prec), prec)
            .add(&self.0[2].mul(&z.sqr(prec), prec), prec)
    }

    pub fn mag(&self, prec: u32) -> BigFloat {
        let mut m = BigFloat::Zero;
        for c in &self.0 {
            let v = c.abs_mag(prec);
            if v.cmp(&m) == core::cmp::Ordering::Greater {
                m = v;
            }
        }
        m
    }
}

/// Series `sum_m P_m(z) zeta^{m}` with `zeta = e^{pi i z}`.
#[derive(Debug, Clone)]
pub struct ZSeries {
    pub start: i64,
    pub coeffs: Vec<ZPoly>,
    /// `max_j |(P_m)_j| <= c r^{-m}` for m >= end (and retained m >= 0).
    pub tail: Option<TailBound>,
}

impl ZSeries {
    pub fn zero(order: usize) -> ZSeries {
        ZSeries {
            start: 0,
            coeffs: vec![ZPoly::zero(); order],
            tail: None,
        }
    }

    pub fn end(&self) -> i64 {
        self.start + self.coeffs.len() as i64
    }

    pub fn coeff(&self, m: i64) -> ZPoly {
        if m < self.start || m >= self.end() {
            ZPoly::zero()
        } else {
            self.coeffs[(m - self.start) as usize].clone()
        }
    }

    pub fn from_scalar(s: &QSeries<ComplexBox>) -> ZSeries {
        ZSeries {
            start: s.start,
            coeffs: s.coeffs.iter().map(|c| ZPoly::constant(c.clone())).collect(),
            tail: s.tail.clone(),
        }
    }

    /// A pure polynomial in z (zeta-degree 0) spanning `order` terms.
    pub fn from_poly(p: ZPoly, order: usize) -> ZSeries {
        let mut coeffs = vec![ZPoly::zero(); order];
        coeffs[0] = p;
        ZSeries {
            start: 0,
            coeffs,
            tail: Some(TailBound::new(BigFloat::Zero, BigFloat::from_f64(0.5))),
        }
    }

    pub fn add(&self, o: &ZSeries, prec: u32) -> ZSeries {
        let start = self.start.min(o.start);
        let end = self.end().min(o.end());
        let mut coeffs = Vec::with_capacity((end - start).max(0) as usize);
        for m in start..end {
            coeffs.push(self.coeff(m).add(&o.coeff(m), prec));
        }
        let tail = match (&self.tail, &o.tail) {
            (Some(a), Some(b)) => {
                let r = if a.r.cmp(&b.r) == core::cmp::Ordering::Less {
                    a.r.clone()
                } else {
                    b.r.clone()
                };
                Some(TailBound::new(a.c.add(&b.c, prec, Round::Ceil), r))
            }
            _ => None,
        };
        ZSeries {
            start,
            coeffs,
            tail,
        }
    }

    pub fn scale(&self, c: &ComplexBox, prec: u32) -> ZSeries {
        let mag = c.abs_mag(prec);
        ZSeries {
            start: self.start,
            coeffs: self.coeffs.iter().map(|p| p.scale(c, prec)).collect(),
            tail: self
                .tail
                .as_ref()
                .map(|t| TailBound::new(t.c.mul(&mag, prec, Round::Ceil), t.r.clone())),
        }
    }

    pub fn mul(&self, o: &ZSeries, prec: u32) -> ZSeries {
        let start = self.start + o.start;
        let end = (self.end() + o.start).min(o.end() + self.start);
        let len = (end - start).max(0) as usize;
        let mut coeffs = vec![ZPoly::zero(); len];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in o.coeffs.iter().enumerate() {
                if i + j >= len {
                    break;
                }
                coeffs[i + j] = coeffs[i + j].add(&a.mul(b, prec), prec);
            }
        }
        // Tail: componentwise the same algebra as scalar series; the z-degree
        // cap means each product coefficient is a sum of at most 3x the
        // scalar count, absorbed into the constant.
        let tail = match (&self.tail, &o.tail) {
            (Some(a), Some(b)) => {
                let t = mul_tail_pub(a, b, self.start, o.start, prec);
                Some(TailBound::new(
                    t.c.mul(&BigFloat::from_f64(3.0), prec, Round::Ceil),
                    t.r,
                ))
            }
            _ => None,
        };
        ZSeries {
            start,
            coeffs,
            tail,
        }
    }

    pub fn truncated(mut self, new_end: i64) -> ZSeries {
        if self.end() > new_end {
            let keep = (new_end - self.start).max(0) as usize;
            self.coeffs.truncate(keep);
        }
        self
    }

    /// Evaluate at z = it (zeta = e^{-pi t}); rigorous when a tail exists.
    pub fn eval_axis(&self, t: &Interval, rig: &RigorCtx) -> Result<ComplexBox> {
        let prec = rig.prec;
        let zeta = rig.exp(&rig.pi.mul(t, prec).neg());
        let z = ComplexBox::imag(t.clone());
        let mut acc = ComplexBox::zero();
        for (k, p) in self.coeffs.iter().enumerate().rev() {
            let _ = k;
            acc = acc.mul(&ComplexBox::real(zeta.clone()), prec);
            acc = acc.add(&p.eval(&z, prec), prec);
        }
        let zeta_start = ComplexBox::real(zeta.clone()).powi(self.start, prec)?;
        acc = acc.mul(&zeta_start, prec);
        if let Some(tb) = &self.tail {
            if zeta.mag().cmp(&tb.r) != core::cmp::Ordering::Less {
                return Err(Error::ConvergenceDomain);
            }
            let ratio = Interval::point(zeta.mag()).div(&Interval::point(tb.r.clone()), prec)?;
            let geom = crate::rigor::geometric_tail(&tb.c, &ratio, self.end(), prec)?;
            // |P_m(it)| <= c r^-m (1 + t + t^2)
            let zfac = Interval::one()
                .add(t, prec)
                .add(&t.sqr(prec), prec)
                .mag();
            let ball = Interval::ball(&geom.mul(&zfac, prec, Round::Ceil));
            acc = ComplexBox::new(acc.re.add(&ball, prec), acc.im.add(&ball, prec));
        }
        Ok(acc)
    }
}

/// Coefficient functions of the non-decaying part:
/// `G(tau, z) = sum_{k=-1}^{0} sum_{j=0}^{1} z^j e^{2 pi i k z} G_{k,j}(tau)`.
#[derive(Debug, Clone)]
pub struct GhatData {
    /// Indexed [k + 1][j]: k in {-1, 0}, j in {0, 1}.
    pub g: [[ComplexBox; 2]; 2],
}

impl GhatData {
    pub fn zero() -> GhatData {
        GhatData {
            g: [
                [ComplexBox::zero(), ComplexBox::zero()],
                [ComplexBox::zero(), ComplexBox::zero()],
            ],
        }
    }

    pub fn combine(a: &GhatData, b: &GhatData, minus: bool, prec: u32) -> GhatData {
        let mut out = GhatData::zero();
        for k in 0..2 {
            for j in 0..2 {
                let v = if minus {
                    a.g[k][j].sub(&b.g[k][j], prec)
                } else {
                    a.g[k][j].add(&b.g[k][j], prec)
                };
                out.g[k][j] = v.mul_pow2(-1);
            }
        }
        out
    }

    /// G(tau, it) evaluated on the axis.
    pub fn eval_axis(&self, t: &Interval, rig: &RigorCtx) -> ComplexBox {
        let prec = rig.prec;
        let z = ComplexBox::imag(t.clone());
        let mut acc = ComplexBox::zero();
        for (ki, row) in self.g.iter().enumerate() {
            let k = ki as i64 - 1;
            // e^{2 pi i k z} at z = it is e^{2 pi k t} (real)
            let expfac = rig.exp(&rig.two_pi().mul(t, prec).mul_i64(k, prec));
            let poly = row[0].add(&row[1].mul(&z, prec), prec);
            acc = acc.add(&poly.mul_real(&expfac, prec), prec);
        }
        acc
    }
}

/// The z-expansion of both signed kernels at a fixed tau.
pub struct KernelZExpansion {
    pub tau: ComplexBox,
    pub d: u8,
    /// Validity threshold: evaluations and tail integrals require t >= t_min.
    pub t_min: BigFloat,
    pub plus: ZSeries,
    pub minus: ZSeries,
    pub ghat_plus: GhatData,
    pub ghat_minus: GhatData,
}

/// The literal quasimodular expressions for the truncated d = 24 kernel:
/// `Ehat(tau, z) = e^{-2 pi i z} (z Ehat_1(tau) + Ehat_0(tau)) / (3456 pi)`.
#[derive(Debug, Clone)]
pub struct EHatValues {
    pub e0: ComplexBox,
    pub e1: ComplexBox,
}

impl KernelZExpansion {
    /// Build the expansion with `order` retained half-powers. The expansion
    /// is valid (and rigorous) for `Im z >= t_min`, where `t_min` exceeds the
    /// largest imaginary part in the SL2(Z)-orbit of tau.
    pub fn new(ctx: &KernelCtx, tau: &ComplexBox, order: usize) -> Result<KernelZExpansion> {
        Self::build(ctx, tau, order, false)
    }

    /// Expansion of the z-side S-slash: the stored series are
    /// `z^2 (K_+ |^z S)` and `(K_- |^z S)`. Both decay at the cusp, so the
    /// non-decaying data is empty (a structural test asserts this).
    pub fn new_flipped(ctx: &KernelCtx, tau: &ComplexBox, order: usize) -> Result<KernelZExpansion> {
        Self::build(ctx, tau, order, true)
    }

    fn build(ctx: &KernelCtx, tau: &ComplexBox, order: usize, flip: bool) -> Result<KernelZExpansion> {
        let prec = ctx.prec();
        let rig = &ctx.sp.rig;
        // Orbit height: the imaginary part of the fundamental-domain
        // representative bounds Im over the whole orbit.
        let p = ctx.sp.eval_point(tau)?;
        let t_star = orbit_height(ctx, tau)?;
        let margin = t_star.mul(&BigFloat::from_f64(0.08), prec, Round::Ceil);
        let t_min = t_star.add(&margin.mul_pow2(2), prec, Round::Ceil);
        // Circle radius for the Cauchy tail of 1/D: between the evaluation
        // radius e^{-pi t_min} and the zero radius e^{-pi t_star}.
        let s_circle = {
            let expo = t_star.add(&margin, prec, Round::Floor);
            rig.exp(&rig.pi.mul(&Interval::point(expo), prec).neg())
        };
        let forms = StandardForms::build(order);
        let zs = ZSideSeries::build(&forms, rig, &Interval::point(s_circle.lo.clone()))?;
        let ts_plus = tau_side(&ctx.sp, &p, true)?;
        let ts_minus = tau_side(&ctx.sp, &p, false)?;
        let j_tau = ts_plus.j.v.clone();
        // D(z) = j(tau) Delta(z) - E4(z)^3, and its inverse with Cauchy tail.
        let d_series = zs
            .delta
            .scale(&j_tau, prec)
            .sub_series(&zs.e4.mul3(prec), prec);
        let inv_d = invert_with_cauchy_tail(&d_series, &Interval::point(s_circle.lo.clone()), rig)?;
        // 1/(j_tau - j_z) = Delta(z) * invD.
        let inv_jdiff = zs.delta.mul(&inv_d, prec);
        let mut plus = assemble(
            ctx,
            &kernel_table(ctx.d, true),
            &ts_plus,
            &zs,
            &inv_jdiff,
            true,
            flip,
            order,
        )?;
        let mut minus = assemble(
            ctx,
            &kernel_table(ctx.d, false),
            &ts_minus,
            &zs,
            &inv_jdiff,
            false,
            flip,
            order,
        )?;
        if flip {
            // The S-slashed kernels decay at the cusp: every coefficient at
            // m <= 0 is exactly zero. The assembled enclosures must contain
            // zero (a failed check is a build error), and are then dropped
            // so evaluations do not suffer zeta^{-m} blowup.
            for series in [&mut plus, &mut minus] {
                while series.start <= 0 {
                    let head = series.coeffs.remove(0);
                    let ok = head.0.iter().all(|c| c.contains_zero());
                    if !ok {
                        return Err(Error::ConvergenceDomain);
                    }
                    series.start += 1;
                }
            }
        }
        let ghat_plus = extract_ghat(&plus, prec)?;
        let ghat_minus = extract_ghat(&minus, prec)?;
        Ok(KernelZExpansion {
            tau: tau.clone(),
            d: ctx.d,
            t_min,
            plus,
            minus,
            ghat_plus,
            ghat_minus,
        })
    }

    /// G data for the averaged kernel K (minus = false) or Khat (true).
    pub fn ghat_combined(&self, hat: bool, prec: u32) -> GhatData {
        GhatData::combine(&self.ghat_plus, &self.ghat_minus, hat, prec)
    }

    /// `int_T^inf (K - G)(tau, it) e^{-pi r^2 t} dt` in closed form, for
    /// `T >= t_min` (hat selects Khat instead of K).
    pub fn tail_integral(
        &self,
        hat: bool,
        t_lo: &Interval,
        r_sq: &Interval,
        rig: &RigorCtx,
    ) -> Result<ComplexBox> {
        let prec = rig.prec;
        if t_lo.lo.cmp(&self.t_min) == core::cmp::Ordering::Less {
            return Err(Error::ConvergenceDomain);
        }
        let mut acc = ComplexBox::zero();
        // sum over the decaying coefficients m >= 1 of the combined series
        let combine = |a: &ZPoly, b: &ZPoly| -> ZPoly {
            let v = if hat {
                ZPoly([
                    a.0[0].sub(&b.0[0], prec),
                    a.0[1].sub(&b.0[1], prec),
                    a.0[2].sub(&b.0[2], prec),
                ])
            } else {
                a.add(b, prec)
            };
            ZPoly([
                v.0[0].mul_pow2(-1),
                v.0[1].mul_pow2(-1),
                v.0[2].mul_pow2(-1),
            ])
        };
        let end = self.plus.end().min(self.minus.end());
        for m in 1..end {
            let p = combine(&self.plus.coeff(m), &self.minus.coeff(m));
            // integrand coefficient: (c0 + c1 (it) + c2 (it)^2) e^{-pi m t}
            // against e^{-pi r^2 t}: c = pi (m + r^2).
            let c = rig.pi.mul(&r_sq.add(&Interval::from_i64(m), prec), prec);
            let i0 = exp_moment(&c, t_lo, 0, rig)?;
            let i1 = exp_moment(&c, t_lo, 1, rig)?;
            let i2 = exp_moment(&c, t_lo, 2, rig)?;
            let term = p.0[0]
                .mul_real(&i0, prec)
                .add(&p.0[1].mul_i().mul_real(&i1, prec), prec)
                .sub(&p.0[2].mul_real(&i2, prec), prec);
            acc = acc.add(&term, prec);
        }
        // tail over m >= end: |P_m| <= c_t r_t^{-m} (componentwise), and
        // int_T^inf (1 + t + t^2) e^{-pi(m + r^2) t} dt <= e^{-pi m T} *
        // int_T^inf (1+t+t^2) e^{-pi r^2 t} ... bound crudely with r^2 >= 0:
        // int_T^inf (1+t+t^2) e^{-pi m t} dt and sum the geometric series.
        let (ct, rt) = match (&self.plus.tail, &self.minus.tail) {
            (Some(a), Some(b)) => (
                a.c.add(&b.c, prec, Round::Ceil),
                if a.r.cmp(&b.r) == core::cmp::Ordering::Less {
                    a.r.clone()
                } else {
                    b.r.clone()
                },
            ),
            _ => return Err(Error::TailUnavailable),
        };
        // For m >= end: e^{-pi t} <= x0 := e^{-pi T}; the m-sum is
        // sum_m c_t (x0/r_t)^m * I(m) with I(m) <= (1 + T + T^2 + ...) ... use
        // I(m) <= e^{-pi m T} (T^2 + 2T/pi + 2/pi^2 + T/pi + 1/pi ... ) --
        // bound I(m) <= K0 e^{-pi m T} with K0 = int_T^inf (1+t+t^2)
        // e^{-pi(t-T)} dt = (1+T+T^2)/pi + (1+2T)/pi^2 + 2/pi^3.
        let k0 = {
            let t = Interval::point(t_lo.lo.clone());
            let p1 = Interval::one().add(&t, prec).add(&t.sqr(prec), prec);
            let p2 = Interval::one().add(&t.mul_pow2(1), prec);
            let pi = &rig.pi;
            p1.div(pi, prec)?
                .add(&p2.div(&pi.sqr(prec), prec)?, prec)
                .add(&Interval::from_i64(2).div(&pi.powi(3, prec)?, prec)?, prec)
        };
        let x0 = rig.exp(&rig.pi.mul(&Interval::point(t_lo.lo.clone()), prec).neg());
        let ratio = x0.div(&Interval::point(rt), prec)?;
        if ratio.hi.cmp(&BigFloat::one()) != core::cmp::Ordering::Less {
            return Err(Error::ConvergenceDomain);
        }
        let geom = crate::rigor::geometric_tail(&ct, &ratio, end.max(1), prec)?;
        let ball = Interval::ball(&geom.mul(&k0.mag(), prec, Round::Ceil));
        acc = ComplexBox::new(acc.re.add(&ball, prec), acc.im.add(&ball, prec));
        Ok(acc)
    }

    /// Consistency diagnostics: magnitudes of the coefficients that the
    /// theory says vanish (odd powers at m <= 0; z^2 at m <= 0).
    pub fn vanishing_defect(&self, prec: u32) -> BigFloat {
        let mut worst = BigFloat::Zero;
        for series in [&self.plus, &self.minus] {
            for m in series.start..=0 {
                let p = series.coeff(m);
                let cand = if m % 2 != 0 {
                    p.mag(prec)
                } else {
                    p.0[2].abs_mag(prec)
                };
                if cand.cmp(&worst) == core::cmp::Ordering::Greater {
                    worst = cand;
                }
            }
        }
        worst
    }
}

/// int_T^inf t^j e^{-c t} dt for j in {0, 1, 2}.
fn exp_moment(c: &Interval, t_lo: &Interval, j: u8, rig: &RigorCtx) -> Result<Interval> {
    let prec = rig.prec;
    let t = Interval::point(t_lo.lo.clone());
    let e = rig.exp(&c.mul(&t, prec).neg());
    let inv_c = c.recip(prec)?;
    let val = match j {
        0 => inv_c.clone(),
        1 => t.mul(&inv_c, prec).add(&inv_c.sqr(prec), prec),
        2 => {
            let c2 = inv_c.sqr(prec);
            t.sqr(prec)
                .mul(&inv_c, prec)
                .add(&t.mul(&c2, prec).mul_pow2(1), prec)
                .add(&c2.mul(&inv_c, prec).mul_pow2(1), prec)
        }
        _ => unreachable!(),
    };
    Ok(e.mul(&val, prec))
}

/// Height of the orbit: Im of the fundamental-domain representative.
fn orbit_height(ctx: &KernelCtx, tau: &ComplexBox) -> Result<BigFloat> {
    // Reduce like the evaluator does; the reduced point maximizes Im over
    // the orbit (standard fundamental-domain property).
    let prec = ctx.prec();
    let mut cur = tau.clone();
    for _ in 0..512 {
        let (re, im) = cur.to_f64s();
        if re.abs() > 0.5 + 1e-12 {
            let m = libm::round(re) as i64;
            cur = cur.sub(&ComplexBox::from_i64(m), prec);
            continue;
        }
        if re * re + im * im < 1.0 - 1e-12 {
            cur = cur.recip(prec)?.neg();
            continue;
        }
        break;
    }
    Ok(cur.im.hi)
}

/// The z-side scalar series set at expansion order.
struct ZSideSeries {
    e2: ZSeries,
    e4: ZSeries,
    e6: ZSeries,
    e8: ZSeries,
    e10: ZSeries,
    e14: ZSeries,
    delta: ZSeries,
    u: ZSeries,
    v: ZSeries,
    w: ZSeries,
    inv_delta: ZSeries,
    lcal_ser: ZSeries,
    lcal_s: ZSeries,
    order: usize,
}

impl ZSideSeries {
    fn build(forms: &StandardForms, rig: &RigorCtx, s_circle: &Interval) -> Result<ZSideSeries> {
        let prec = rig.prec;
        // Growth-based tails at a radius adapted to the Cauchy circle: the
        // constants stay O(1) near the actual evaluation radius instead of
        // compounding astronomically through products.
        let r = (4.0 * s_circle.to_f64_mid()).min(0.9);
        let conv = |q: &QSeries<num_rational::BigRational>, scale: f64, deg: u32| -> ZSeries {
            let t = q.tail_from_poly_growth(scale, deg, r, prec);
            ZSeries::from_scalar(&q.to_complex(prec).with_tail(t))
        };
        let e2 = conv(&forms.e2, 24.0, 2);
        let e4 = conv(&forms.e4, 240.0, 4);
        let e6 = conv(&forms.e6, 504.0, 6);
        let e8 = conv(&forms.e8, 1.0, 9);
        let e10 = conv(&forms.e10, 1.0, 11);
        let e14 = conv(&forms.e14, 1.0, 15);
        let delta = conv(&forms.delta, 1.0, 11);
        let u = conv(&forms.u, 8.0, 2);
        let v = conv(&forms.v, 16.0, 2);
        let w = conv(&forms.w, 8.0, 2);
        // 1/Delta = zeta^{-2} * (eta product)^{-24}; the unit part inverts
        // with a Cauchy tail on the circle.
        let delta_unit = {
            let mut d = forms.delta.clone();
            d = d.shifted(-2, 0);
            conv(&d, 1.0, 11)
        };
        let inv_delta_unit = invert_with_cauchy_tail(&delta_unit, s_circle, rig)?;
        let inv_delta = ZSeries {
            start: inv_delta_unit.start - 2,
            coeffs: inv_delta_unit.coeffs.clone(),
            tail: inv_delta_unit.tail.clone(),
        };
        let lcal_ser = conv(&forms.lcal_series, 64.0, 4);
        let lcal_s = conv(&forms.lcal_s, 64.0, 4);
        Ok(ZSideSeries {
            e2,
            e4,
            e6,
            e8,
            e10,
            e14,
            delta,
            u,
            v,
            w,
            inv_delta,
            lcal_ser,
            lcal_s,
            order: forms.order,
        })
    }
}

impl ZSeries {
    fn sub_series(&self, o: &ZSeries, prec: u32) -> ZSeries {
        let negated = ZSeries {
            start: o.start,
            coeffs: o
                .coeffs
                .iter()
                .map(|p| ZPoly([p.0[0].neg(), p.0[1].neg(), p.0[2].neg()]))
                .collect(),
            tail: o.tail.clone(),
        };
        self.add(&negated, prec)
    }

    fn mul3(&self, prec: u32) -> ZSeries {
        self.mul(self, prec).mul(self, prec)
    }
}

/// Invert a scalar-coefficient unit z-series and attach a Cauchy tail from
/// the circle |zeta| = s: |coeff_m(1/f)| <= max|1/f| * s^{-m}.
fn invert_with_cauchy_tail(f: &ZSeries, s: &Interval, rig: &RigorCtx) -> Result<ZSeries> {
    let prec = rig.prec;
    // convert to scalar series (must be z-degree 0)
    let scalar = QSeries::<ComplexBox> {
        start: f.start,
        coeffs: f
            .coeffs
            .iter()
            .map(|p| {
                debug_assert!(p.degree() == 0);
                p.0[0].clone()
            })
            .collect(),
        tail: f.tail.clone(),
    };
    let inv = scalar.invert(prec)?;
    let min_f = min_abs_on_circle(&scalar, s, rig);
    if min_f.signum() <= 0 {
        return Err(Error::ConvergenceDomain);
    }
    let c = BigFloat::one().div(&min_f, prec, Round::Ceil);
    let tail = TailBound::new(c, s.lo.clone());
    Ok(ZSeries::from_scalar(&inv.with_tail(tail)))
}

/// Assemble one signed kernel as a z-series at fixed tau. With `flip` the
/// z-side basis is replaced by its S-slash normalized to polynomial degrees:
/// the result is then `z^2 (K_+ |^z S)` for the plus kernel and `(K_- |^z S)`
/// for the minus kernel.
fn assemble(
    ctx: &KernelCtx,
    table: &KernelTable,
    ts: &TauSide,
    zs: &ZSideSeries,
    inv_jdiff: &ZSeries,
    plus: bool,
    flip: bool,
    order: usize,
) -> Result<ZSeries> {
    let prec = ctx.prec();
    let rig = &ctx.sp.rig;
    let end_cap = order as i64;
    // scale = (num/den) pi^pi_pow i^i_pow, then a 1/Delta(z) series factor.
    let mut scale = ComplexBox::real(Interval::from_ratio(
        table.scale_num,
        table.scale_den,
        prec,
    ));
    if table.pi_pow >= 0 {
        scale = scale.mul_real(&rig.pi.powi(table.pi_pow as i64, prec)?, prec);
    } else {
        scale = scale.mul_real(&rig.pi.powi(-(table.pi_pow as i64), prec)?.recip(prec)?, prec);
    }
    for _ in 0..table.i_pow {
        scale = scale.mul_i();
    }
    // tau-side row factors (numbers).
    let mut rows: Vec<ComplexBox> = Vec::with_capacity(3);
    for a in 0..3 {
        let mut r = ts.basis[a].v.clone();
        if !table.pi_tau_one[a] {
            r = r.mul(
                &match table.pi_tau[a] {
                    crate::special::FormId::E4 => ts.e4.v.clone(),
                    crate::special::FormId::E6 => ts.e6.v.clone(),
                    crate::special::FormId::E8w => ts.e8.v.clone(),
                    crate::special::FormId::E10 => ts.e10.v.clone(),
                    crate::special::FormId::E14 => ts.e14.v.clone(),
                    crate::special::FormId::Delta => ts.delta.v.clone(),
                    _ => unreachable!(),
                },
                prec,
            );
            if table.pi_tau_inv_delta[a] {
                r = r.div(&ts.delta.v, prec)?;
            }
        }
        rows.push(r);
    }
    // z-side column series: Pi_z[b] * basis_tilde[b].
    let z_form = |id: crate::special::FormId| -> &ZSeries {
        match id {
            crate::special::FormId::E4 => &zs.e4,
            crate::special::FormId::E6 => &zs.e6,
            crate::special::FormId::E8w => &zs.e8,
            crate::special::FormId::E10 => &zs.e10,
            crate::special::FormId::E14 => &zs.e14,
            crate::special::FormId::Delta => &zs.delta,
            _ => unreachable!(),
        }
    };
    let basis_tilde: [ZSeries; 3] = if flip && plus {
        // z^2 (phit | S) = (z^2, z^2 E2, z^2 E2^2).
        let z2 = ZPoly([ComplexBox::zero(), ComplexBox::zero(), ComplexBox::one()]);
        let p_m2 = ZSeries::from_poly(z2.clone(), zs.order);
        let p_0 = zs.e2.mul(&ZSeries::from_poly(z2.clone(), zs.order), prec);
        let p_2 = zs
            .e2
            .mul(&zs.e2, prec)
            .mul(&ZSeries::from_poly(z2, zs.order), prec);
        [p_m2, p_0, p_2]
    } else if flip {
        // (psit | S) = (LcalS, -V, U^2 - W^2).
        let p_0 = zs.lcal_s.clone();
        let p_2 = zs.v.scale(&ComplexBox::from_i64(-1), prec);
        let p_4 = zs.u.mul(&zs.u, prec).sub_series(&zs.w.mul(&zs.w, prec), prec);
        [p_0, p_2, p_4]
    } else if plus {
        // phit_{-2} = z^2, phit_0 = z^2 E2 - (6i/pi) z,
        // phit_2 = z^2 E2^2 - (12 i/pi) z E2 - 36/pi^2.
        let six_i_over_pi = ComplexBox::imag(Interval::from_i64(6).div(&rig.pi, prec)?);
        let z2 = ZPoly([
            ComplexBox::zero(),
            ComplexBox::zero(),
            ComplexBox::one(),
        ]);
        let zp = |c: ComplexBox| ZPoly([ComplexBox::zero(), c, ComplexBox::zero()]);
        let cp = |c: ComplexBox| ZPoly::constant(c);
        let p_m2 = ZSeries::from_poly(z2.clone(), zs.order);
        let p_0 = {
            let a = zs.e2.mul(&ZSeries::from_poly(z2.clone(), zs.order), prec);
            a.add(&ZSeries::from_poly(zp(six_i_over_pi.neg()), zs.order), prec)
        };
        let p_2 = {
            let e2sq = zs.e2.mul(&zs.e2, prec);
            let a = e2sq.mul(&ZSeries::from_poly(z2, zs.order), prec);
            let b = zs
                .e2
                .mul(&ZSeries::from_poly(zp(six_i_over_pi.mul_pow2(1).neg()), zs.order), prec);
            let c36 = Interval::from_i64(36).div(&rig.pi.sqr(prec), prec)?;
            let c = ZSeries::from_poly(cp(ComplexBox::real(c36).neg()), zs.order);
            a.add(&b, prec).add(&c, prec)
        };
        [p_m2, p_0, p_2]
    } else {
        // psit_0 = Lcal = pi i z + 4 log 2 + series,
        // psit_2 = W, psit_4 = U^2 - V^2.
        let lin = ZPoly([
            ComplexBox::real(rig.ln2.mul_i64(4, prec)),
            ComplexBox::imag(rig.pi.clone()),
            ComplexBox::zero(),
        ]);
        let p_0 = zs
            .lcal_ser
            .add(&ZSeries::from_poly(lin, zs.order), prec);
        let p_2 = zs.w.clone();
        let p_4 = zs.u.mul(&zs.u, prec).sub_series(&zs.v.mul(&zs.v, prec), prec);
        [p_0, p_2, p_4]
    };
    let mut cols: Vec<ZSeries> = Vec::with_capacity(3);
    for b in 0..3 {
        let mut c = basis_tilde[b].clone();
        if !table.pi_z_one[b] {
            c = c.mul(z_form(table.pi_z[b]), prec);
            if table.pi_z_inv_delta[b] {
                c = c.mul(&zs.inv_delta, prec);
            }
        }
        cols.push(c.truncated(end_cap));
    }
    // Combine: sum_ab rows[a] (REG_ab + SING_ab * inv_jdiff) cols[b],
    // all times scale * inv_delta (the global 1/Delta(z)).
    // Start from a zero series (harmless tail) so additions keep tails.
    let mut acc = ZSeries::zero(order + 8);
    acc.start = -4;
    acc.tail = Some(TailBound::new(BigFloat::Zero, BigFloat::from_f64(0.9)));
    for a in 0..3 {
        for b in 0..3 {
            for (mat, with_inv) in [(&table.reg, false), (&table.sing, true)] {
                let ent = mat[a][b];
                if ent.c == 0 && ent.jt == 0 {
                    continue;
                }
                let mut coeff = ComplexBox::from_i64(ent.c);
                if ent.jt != 0 {
                    coeff = coeff.add(&ts.j.v.mul_i64(ent.jt, prec), prec);
                }
                let mut term = cols[b].scale(&rows[a].mul(&coeff, prec), prec);
                if with_inv {
                    term = term.mul(inv_jdiff, prec);
                }
                acc = acc.add(&term.truncated(end_cap), prec);
            }
        }
    }
    acc = acc.scale(&scale, prec);
    acc = acc.mul(&zs.inv_delta, prec).truncated(end_cap);
    Ok(acc)
}

/// Read the non-decaying coefficients (m <= 0) out of a kernel expansion.
fn extract_ghat(series: &ZSeries, prec: u32) -> Result<GhatData> {
    let mut out = GhatData::zero();
    for m in series.start..=0 {
        let p = series.coeff(m);
        if m == -2 || m == 0 {
            let k = m / 2;
            out.g[(k + 1) as usize][0] = p.0[0].clone();
            out.g[(k + 1) as usize][1] = p.0[1].clone();
        }
        let _ = prec;
    }
    Ok(out)
}

impl KernelCtx {
    /// Literal quasimodular formulas for the truncated kernel data.
    pub fn ehat_values(&self, tau: &ComplexBox) -> Result<EHatValues> {
        let prec = self.prec();
        let rig = &self.sp.rig;
        let p = self.sp.eval_point(tau)?;
        let e2 = &p.e2;
        let e4 = &p.e4;
        let e6 = &p.e6;
        let delta = p.delta(prec);
        let sqrt_delta = p.sqrt_delta(prec);
        let e4cubed = e4.powi(3, prec)?;
        let e6sq = e6.sqr(prec);
        let e2e4e6 = e2.mul(e4, prec).mul(e6, prec);
        // Ehat_{0,0} = -6912 log2 Delta - 36 E2E4E6 + 16 E4^3 + 20 E6^2
        //              + 108 E4 sqrtDelta (V Lcal + W LcalS)
        let e00 = delta
            .mul_real(&rig.ln2, prec)
            .mul_i64(-6912, prec)
            .add(&e2e4e6.mul_i64(-36, prec), prec)
            .add(&e4cubed.mul_i64(16, prec), prec)
            .add(&e6sq.mul_i64(20, prec), prec)
            .add(
                &e4.mul(&sqrt_delta, prec)
                    .mul(
                        &p.v.mul(&p.lcal, prec).add(&p.w.mul(&p.lcal_s, prec), prec),
                        prec,
                    )
                    .mul_i64(108, prec),
                prec,
            );
        // Ehat_{0,1} = -pi i (6 E2^2 E4 E6 - 5 E2 E4^3 - 7 E2 E6^2 + 6 E4^2 E6)
        let e01 = {
            let inner = e2
                .mul(&e2e4e6, prec)
                .mul_i64(6, prec)
                .sub(&e2.mul(&e4cubed, prec).mul_i64(5, prec), prec)
                .sub(&e2.mul(&e6sq, prec).mul_i64(7, prec), prec)
                .add(&e4.sqr(prec).mul(e6, prec).mul_i64(6, prec), prec);
            inner.mul_real(&rig.pi, prec).mul_i().neg()
        };
        // Ehat_{1,0} = 12 pi i (-E2E4E6 + E6^2 + 720 Delta)
        let e10 = e2e4e6
            .neg()
            .add(&e6sq, prec)
            .add(&delta.mul_i64(720, prec), prec)
            .mul_real(&rig.pi, prec)
            .mul_i()
            .mul_i64(12, prec);
        // Ehat_{1,1} = 2 pi^2 (E2^2 E4 E6 - 2 E2 E6^2 - 1728 E2 Delta + E4^2 E6)
        let e11 = {
            let inner = e2
                .mul(&e2e4e6, prec)
                .sub(&e2.mul(&e6sq, prec).mul_pow2(1), prec)
                .sub(&e2.mul(&delta, prec).mul_i64(1728, prec), prec)
                .add(&e4.sqr(prec).mul(e6, prec), prec);
            inner.mul_real(&rig.pi.sqr(prec), prec).mul_pow2(1)
        };
        // Ehat_j = tau Ehat_{j,1} + Ehat_{j,0}
        let e0 = tau.mul(&e01, prec).add(&e00, prec);
        let e1 = tau.mul(&e11, prec).add(&e10, prec);
        Ok(EHatValues { e0, e1 })
    }

    /// `Ehat(tau, z) = e^{-2 pi i z}(z Ehat_1 + Ehat_0)/(3456 pi)` at z = it.
    pub fn ehat_at(&self, tau: &ComplexBox, t: &Interval) -> Result<ComplexBox> {
        let prec = self.prec();
        let rig = &self.sp.rig;
        let vals = self.ehat_values(tau)?;
        let z = ComplexBox::imag(t.clone());
        let expfac = rig.exp(&rig.two_pi().mul(t, prec));
        let poly = z.mul(&vals.e1, prec).add(&vals.e0, prec);
        let denom = Interval::from_i64(3456).mul(&rig.pi, prec);
        Ok(poly
            .mul_real(&expfac, prec)
            .mul_real(&denom.recip(prec)?, prec))
    }

    /// The truncated d = 24 kernel: `Khat` below t = p, `Khat - Ehat` at and
    /// above (p = 1.01).
    pub fn khat_trunc(&self, tau: &ComplexBox, t: &Interval) -> Result<ComplexBox> {
        assert_eq!(self.d, 24);
        let prec = self.prec();
        let p_split = Interval::from_ratio(101, 100, prec);
        let z = ComplexBox::imag(t.clone());
        let khat = self.eval(super::KernelKind::KHat, tau, &z)?;
        if t.hi.cmp(&p_split.lo) == core::cmp::Ordering::Less {
            return Ok(khat);
        }
        if t.lo.cmp(&p_split.lo) != core::cmp::Ordering::Less {
            return Ok(khat.sub(&self.ehat_at(tau, t)?, prec));
        }
        Err(Error::OutsideDomain)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::KernelKind;
    use std::sync::OnceLock;

    fn ctx8() -> &'static KernelCtx {
        static C: OnceLock<KernelCtx> = OnceLock::new();
        C.get_or_init(|| KernelCtx::new(8, 160, 64))
    }

    fn ctx24() -> &'static KernelCtx {
        static C: OnceLock<KernelCtx> = OnceLock::new();
        C.get_or_init(|| KernelCtx::new(24, 160, 64))
    }

    #[test]
    fn expansion_matches_pointwise_eval() {
        // The z-series evaluated at a high axis point must agree with the
        // direct kernel evaluation.
        for cx in [ctx8(), ctx24()] {
            let tau = ComplexBox::from_f64s(0.0, 1.3);
            let exp = KernelZExpansion::new(cx, &tau, 80).unwrap();
            let t = Interval::from_f64(2.4);
            let z = ComplexBox::imag(t.clone());
            let direct_p = cx.eval(KernelKind::KPlus, &tau, &z).unwrap();
            let via_series = exp.plus.eval_axis(&t, &cx.sp.rig).unwrap();
            assert!(
                direct_p.overlaps(&via_series),
                "d={} plus: {:?} vs {:?}",
                cx.d,
                direct_p.to_f64s(),
                via_series.to_f64s()
            );
            let direct_m = cx.eval(KernelKind::KMinus, &tau, &z).unwrap();
            let via_series_m = exp.minus.eval_axis(&t, &cx.sp.rig).unwrap();
            assert!(
                direct_m.overlaps(&via_series_m),
                "d={} minus: {:?} vs {:?}",
                cx.d,
                direct_m.to_f64s(),
                via_series_m.to_f64s()
            );
        }
    }

    #[test]
    fn vanishing_structure() {
        // Odd zeta-powers and z^2 terms must vanish in the non-decaying part.
        for cx in [ctx8(), ctx24()] {
            let tau = ComplexBox::from_f64s(0.0, 1.2);
            let exp = KernelZExpansion::new(cx, &tau, 72).unwrap();
            let defect = exp.vanishing_defect(cx.prec());
            assert!(
                defect.to_f64() < 1e-20,
                "d={} defect {}",
                cx.d,
                defect.to_f64()
            );
        }
    }

    #[test]
    fn ghat8_k_minus_one_vanishes() {
        // G^{(8)}_{-1,j,pm} = 0.
        let cx = ctx8();
        let tau = ComplexBox::from_f64s(0.0, 1.7);
        let exp = KernelZExpansion::new(cx, &tau, 72).unwrap();
        for g in [&exp.ghat_plus, &exp.ghat_minus] {
            for j in 0..2 {
                let v = &g.g[0][j];
                assert!(v.contains_zero());
                assert!(v.abs_mag(cx.prec()).to_f64() < 1e-20);
            }
        }
    }

    #[test]
    fn ghat24_k_minus_one_matches_ehat() {
        // The extracted k = -1 part of Khat^{(24)} must match the literal
        // quasimodular formulas: ghat_hat_{-1,j} = Ehat_j / (3456 pi).
        let cx = ctx24();
        let prec = cx.prec();
        let tau = ComplexBox::from_f64s(0.0, 1.5);
        let exp = KernelZExpansion::new(cx, &tau, 72).unwrap();
        let ghat_hat = exp.ghat_combined(true, prec);
        let vals = cx.ehat_values(&tau).unwrap();
        let denom = Interval::from_i64(3456).mul(&cx.sp.rig.pi, prec);
        let want0 = vals.e0.mul_real(&denom.recip(prec).unwrap(), prec);
        let want1 = vals.e1.mul_real(&denom.recip(prec).unwrap(), prec);
        assert!(
            ghat_hat.g[0][0].overlaps(&want0),
            "{:?} vs {:?}",
            ghat_hat.g[0][0].to_f64s(),
            want0.to_f64s()
        );
        assert!(
            ghat_hat.g[0][1].overlaps(&want1),
            "{:?} vs {:?}",
            ghat_hat.g[0][1].to_f64s(),
            want1.to_f64s()
        );
    }

    #[test]
    fn kernel_decays_to_ghat() {
        // K(tau, it) - G(tau, it) = O(t^2 e^{-pi t}).
        let cx = ctx8();
        let prec = cx.prec();
        let tau = ComplexBox::from_f64s(0.0, 1.3);
        let exp = KernelZExpansion::new(cx, &tau, 72).unwrap();
        let g = exp.ghat_combined(false, prec);
        let mut prev = f64::INFINITY;
        for t in [3.0, 4.0, 5.0] {
            let ti = Interval::from_f64(t);
            let z = ComplexBox::imag(ti.clone());
            let k = cx.eval(KernelKind::K, &tau, &z).unwrap();
            let gv = g.eval_axis(&ti, &cx.sp.rig);
            let diff = k.sub(&gv, prec).abs_mag(prec).to_f64();
            let expect = t * t * libm::exp(-core::f64::consts::PI * t);
            assert!(diff < 50.0 * expect, "t={t}: {diff} vs {expect}");
            assert!(diff < prev);
            prev = diff;
        }
    }

    #[test]
    fn tail_integral_matches_quadrature_proxy() {
        // Compare the closed-form tail integral against a crude Riemann sum
        // of the pointwise integrand (midpoint, fine grid).
        let cx = ctx8();
        let prec = cx.prec();
        let tau = ComplexBox::from_f64s(0.0, 1.25);
        let exp = KernelZExpansion::new(cx, &tau, 80).unwrap();
        let t0 = Interval::from_f64(2.0);
        let r_sq = Interval::from_f64(1.9f64 * 1.9);
        let tail = exp.tail_integral(false, &t0, &r_sq, &cx.sp.rig).unwrap();
        // Riemann proxy on [2, 9] with the decay-subtracted integrand.
        let g = exp.ghat_combined(false, prec);
        let n = 600;
        let mut acc = (0.0f64, 0.0f64);
        for i in 0..n {
            let t = 2.0 + 7.0 * (i as f64 + 0.5) / n as f64;
            let ti = Interval::from_f64(t);
            let z = ComplexBox::imag(ti.clone());
            let k = cx.eval(KernelKind::K, &tau, &z).unwrap();
            let gv = g.eval_axis(&ti, &cx.sp.rig);
            let diff = k.sub(&gv, prec);
            let wgt = libm::exp(-core::f64::consts::PI * 1.9 * 1.9 * t) * 7.0 / n as f64;
            let (re, im) = diff.to_f64s();
            acc.0 += re * wgt;
            acc.1 += im * wgt;
        }
        let (tre, tim) = tail.to_f64s();
        assert!(
            (tre - acc.0).abs() < 1e-8 + 1e-3 * acc.0.abs(),
            "{tre} vs {}",
            acc.0
        );
        assert!((tim - acc.1).abs() < 1e-8);
    }

    #[test]
    fn khat_trunc_branches() {
        let cx = ctx24();
        let tau = ComplexBox::from_f64s(0.0, 2.0);
        // below the split
        let v1 = cx.khat_trunc(&tau, &Interval::from_f64(1.0)).unwrap();
        assert!(v1.abs_mag(cx.prec()).is_finite());
        // above the split: Khat - Ehat, also finite
        let v2 = cx.khat_trunc(&tau, &Interval::from_f64(1.02)).unwrap();
        assert!(v2.abs_mag(cx.prec()).is_finite());
        // trunc at t=3 must equal Khat - Ehat computed independently
        let t = Interval::from_f64(3.0);
        let z = ComplexBox::imag(t.clone());
        let khat = cx.eval(KernelKind::KHat, &tau, &z).unwrap();
        let ehat = cx.ehat_at(&tau, &t).unwrap();
        let expect = khat.sub(&ehat, cx.prec());
        let got = cx.khat_trunc(&tau, &t).unwrap();
        assert!(got.overlaps(&expect));
    }

    #[test]
    fn ehat_imaginary_combination_real_on_axis() {
        // i Ehat_1(it') is real for tau on the axis.
        let cx = ctx24();
        let tau = ComplexBox::from_f64s(0.0, 1.4);
        let vals = cx.ehat_values(&tau).unwrap();
        let i_e1 = vals.e1.mul_i();
        assert!(i_e1.im.contains_zero(), "{:?}", i_e1.to_f64s());
        // Ehat_0 is real on the axis too.
        assert!(vals.e0.im.contains_zero());
    }
}
