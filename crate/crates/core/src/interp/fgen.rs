//! The generating functions F and Ftilde as Laplace transforms of the
//! kernels, with full analytic continuation in the radial variable.
//!
//! The half-line integral is split into three regions around the orbit
//! height t* of tau:
//!
//!   - (0, 1/t_hi]: substituted through t -> 1/u and evaluated with the
//!     S-flipped kernel expansions (quadrature in u plus a closed tail),
//!   - [1/t_hi, t_hi]: certified Gauss-Legendre quadrature of the kernel,
//!   - [t_hi, inf): termwise closed forms from the z-expansion, split into
//!     the decaying part and the non-decaying part G whose integral is the
//!     explicit compensated formula (finite at every radius, including the
//!     interpolation nodes where sin(pi r^2/2) vanishes).
//!
//! Everything is generic over a complex rho = r^2, which makes radial
//! derivatives available through certified difference quotients with Cauchy
//! remainder bounds.

use super::quad::QuadCtx;
use crate::kernels::{GhatData, KernelCtx, KernelKind, KernelZExpansion};
use crate::rigor::{BigFloat, ComplexBox, Interval, RigorCtx, Round};
use crate::{Error, Result};

/// Interpolation parameters for one dimension.
#[derive(Debug, Clone)]
pub struct InterpConfig {
    pub d: u8,
    pub n0: u32,
    pub m0: i64,
    /// Expansion order (half powers) for the z-side engines.
    pub order: usize,
    /// Absolute quadrature tolerance per integral.
    pub quad_tol: f64,
}

impl InterpConfig {
    pub fn new(d: u8) -> InterpConfig {
        assert!(d == 8 || d == 24);
        InterpConfig {
            d,
            n0: if d == 8 { 1 } else { 2 },
            m0: if d == 8 { 0 } else { -2 },
            order: 96,
            quad_tol: 1e-24,
        }
    }
}

/// Complex sin(pi u / 2)^2 (entire in u).
pub fn sin_sq_half_pi_c(u: &ComplexBox, rig: &RigorCtx) -> ComplexBox {
    let prec = rig.prec;
    let arg = u.mul_real(&rig.pi, prec).mul_pow2(-1);
    let s = arg.sin(rig);
    s.sqr(prec)
}

/// Complex `sin(pi u/2) / (u - k)` for even integer k (entire in u),
/// via `sin(pi u / 2) = (-1)^{k/2} sin(pi (u - k)/2)` and the sinc series.
pub fn sin_half_pi_over_shift_c(u: &ComplexBox, k: i64, rig: &RigorCtx) -> ComplexBox {
    debug_assert!(k % 2 == 0);
    let prec = rig.prec;
    let dlt = u.sub(&ComplexBox::from_i64(k), prec);
    let x = dlt.mul_real(&rig.pi, prec).mul_pow2(-1);
    let ratio = sinc_c(&x, rig);
    let val = ratio.mul_real(&rig.pi.mul_pow2(-1), prec);
    if (k / 2).rem_euclid(2) == 0 {
        val
    } else {
        val.neg()
    }
}

/// sin(x)/x for complex boxes; converges with explicit remainder once
/// terms decay (|x| stays modest in our use: near multiples of pi/2 * width).
fn sinc_c(x: &ComplexBox, rig: &RigorCtx) -> ComplexBox {
    let prec = rig.prec;
    let x2 = x.sqr(prec);
    let mut term = ComplexBox::one();
    let mut sum = ComplexBox::zero();
    let mut k = 0i64;
    loop {
        sum = if k % 2 == 0 {
            sum.add(&term, prec)
        } else {
            sum.sub(&term, prec)
        };
        let denom = ComplexBox::from_i64((2 * k + 2) * (2 * k + 3));
        term = term.mul(&x2, prec).div(&denom, prec).expect("nonzero");
        k += 1;
        let decreasing = (2 * k) as f64 > x.abs_mag(prec).to_f64().abs() + 2.0;
        if decreasing && term.abs_mag(prec).log2_approx() < -(prec as i64) - 4 {
            let ball = Interval::ball(&term.abs_mag(prec).mul_pow2(1));
            return ComplexBox::new(sum.re.add(&ball, prec), sum.im.add(&ball, prec));
        }
        if k > 8 * prec as i64 {
            let ball = Interval::ball(&term.abs_mag(prec).mul_pow2(8));
            return ComplexBox::new(sum.re.add(&ball, prec), sum.im.add(&ball, prec));
        }
    }
}

/// `int_T^inf t^j e^{-c t} dt` for complex c (valid as the analytic
/// continuation when Re c <= 0, which is how the non-decaying terms are
/// handled); excludes c enclosing 0.
fn exp_moment_c(c: &ComplexBox, t0: &Interval, j: u8, rig: &RigorCtx) -> Result<ComplexBox> {
    let prec = rig.prec;
    let t = ComplexBox::real(Interval::point(t0.lo.clone()));
    let e = c.mul(&t, prec).neg().exp(rig);
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

/// One frozen quadrature node: everything rho-independent is premultiplied
/// into the signed values; at evaluation time only `exp(-pi rho xfac)` is
/// attached. The stored pair satisfies K-combination = a + b and
/// Khat-combination = a - b.
pub struct FrozenNode {
    pub xfac: ComplexBox,
    pub a: ComplexBox,
    pub b: ComplexBox,
}

/// Certified panel metadata: the error contribution for a given rho is
/// `m_bound * conv * sup |e^{-pi rho X}|` over the stored X-rectangle.
pub struct FrozenPanel {
    pub x_re: Interval,
    pub x_im: Interval,
    pub m_bound: BigFloat,
    pub conv: BigFloat,
}

/// A frozen contour: nodes plus panel error data.
pub struct FrozenContour {
    pub nodes: alloc::vec::Vec<FrozenNode>,
    pub panels: alloc::vec::Vec<FrozenPanel>,
}

impl FrozenContour {
    fn empty() -> FrozenContour {
        FrozenContour {
            nodes: alloc::vec::Vec::new(),
            panels: alloc::vec::Vec::new(),
        }
    }

    fn merge(&mut self, other: FrozenContour) {
        self.nodes.extend(other.nodes);
        self.panels.extend(other.panels);
    }

    /// Sum the contour against `e^{-pi rho X}` with a certified error ball.
    pub fn eval(&self, rho: &ComplexBox, rig: &RigorCtx) -> Result<(ComplexBox, ComplexBox)> {
        let prec = rig.prec;
        let mut acc_k = ComplexBox::zero();
        let mut acc_hat = ComplexBox::zero();
        for n in &self.nodes {
            let e = rho
                .mul(&n.xfac, prec)
                .mul_real(&rig.pi, prec)
                .neg()
                .exp(rig);
            let ae = n.a.mul(&e, prec);
            let be = n.b.mul(&e, prec);
            acc_k = acc_k.add(&ae.add(&be, prec), prec);
            acc_hat = acc_hat.add(&ae.sub(&be, prec), prec);
        }
        let mut err = BigFloat::Zero;
        for p in &self.panels {
            // sup |e^{-pi rho X}| = exp(-pi inf Re(rho X))
            let xbox = ComplexBox::new(p.x_re.clone(), p.x_im.clone());
            let re = rho.mul(&xbox, prec).re;
            let emax = rig.exp(&rig.pi.mul(&Interval::point(re.lo.clone()), prec).neg());
            let contrib = p
                .m_bound
                .mul(&p.conv, prec, Round::Ceil)
                .mul(&emax.hi, prec, Round::Ceil);
            err = err.add(&contrib, prec, Round::Ceil);
        }
        let ball = Interval::ball(&err);
        let widen = |v: ComplexBox| ComplexBox::new(v.re.add(&ball, prec), v.im.add(&ball, prec));
        Ok((widen(acc_k), widen(acc_hat)))
    }
}

/// Per-tau data reused across radii.
pub struct TauData {
    pub tau: ComplexBox,
    pub zexp: KernelZExpansion,
    pub zexp_flip: KernelZExpansion,
    pub t_hi: BigFloat,
    pub t_lo: BigFloat,
    pub u_cap: BigFloat,
    /// Frozen mid contour (kernel quadrature with detours) and flip contour.
    pub contour: FrozenContour,
}

/// The generating-function evaluator.
pub struct FGen {
    pub kctx: KernelCtx,
    pub cfg: InterpConfig,
    pub quad: QuadCtx,
}

impl FGen {
    pub fn new(d: u8, prec: u32, order: usize) -> FGen {
        let cfg = InterpConfig::new(d);
        let kctx = KernelCtx::new(d, prec, order.max(64));
        let quad = QuadCtx::new(&kctx.sp.rig, 24);
        FGen { kctx, cfg, quad }
    }

    pub fn prec(&self) -> u32 {
        self.kctx.prec()
    }

    pub fn rig(&self) -> &RigorCtx {
        &self.kctx.sp.rig
    }

    /// Precompute the per-tau expansions. tau must lie in the closed level-2
    /// fundamental domain (|Re| <= 1, outside the two unit half-disks).
    pub fn prepare(&self, tau: &ComplexBox) -> Result<TauData> {
        let prec = self.prec();
        let zexp = KernelZExpansion::new(&self.kctx, tau, self.cfg.order)?;
        let zexp_flip = KernelZExpansion::new_flipped(&self.kctx, tau, self.cfg.order)?;
        let t_hi = {
            let base = zexp.t_min.clone();
            let floor = BigFloat::from_f64(1.3);
            if base.cmp(&floor) == core::cmp::Ordering::Less {
                floor
            } else {
                base.mul(&BigFloat::from_f64(1.05), prec, Round::Ceil)
            }
        };
        let t_lo = BigFloat::one().div(&t_hi, prec, Round::Floor);
        let u_cap = t_hi.add(&BigFloat::from_f64(26.0), prec, Round::Ceil);
        // Orbit crossings on the axis: t* (and 1/t*) with t* the orbit
        // height, relevant only when tau itself lies on the imaginary axis.
        let mut detours = alloc::vec::Vec::new();
        let (re0, _im0) = tau.to_f64s();
        if re0.abs() < 1e-12 {
            let t_star = {
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
                cur.im.mid(prec)
            };
            let inv = BigFloat::one().div(&t_star, prec, Round::Floor);
            for cand in [t_star, inv] {
                let inside = cand.cmp(&t_lo) == core::cmp::Ordering::Greater
                    && cand.cmp(&t_hi) == core::cmp::Ordering::Less;
                let fresh = detours.iter().all(|b: &BigFloat| {
                    let d = b.sub(&cand, prec, Round::Floor).abs();
                    d.to_f64() > 0.05
                });
                if inside && fresh {
                    detours.push(cand);
                }
            }
            detours.sort_by(|a, b| a.cmp(b));
        }
        // Freeze the two quadrature regions. Region 1 (flip): the integrand
        // pair is (u^{-d/2} H+ /2, -u^{2-d/2} H- /2) u^{-2} with X = 1/u;
        // region 2 (mid): (K+/2, K-/2) at z = it with X = t and rectangular
        // dips below the listed detour points.
        let mut contour = FrozenContour::empty();
        let tau_pair = self.kctx.tau_pair(tau)?;
        {
            // region 1 segments in u
            let d = self.cfg.d as i64;
            let flip_plus = zexp_flip.plus.clone();
            let flip_minus = zexp_flip.minus.clone();
            let rigc = self.rig().clone();
            let fpair = move |u: &ComplexBox| -> Result<(ComplexBox, ComplexBox, ComplexBox)> {
                let w = u.mul_i();
                let hp = eval_zseries_at(&flip_plus, &w, &rigc)?;
                let hm = eval_zseries_at(&flip_minus, &w, &rigc)?;
                let um2 = u.powi(-2, prec)?;
                let a = u.powi(-d / 2, prec)?.mul(&hp, prec).mul(&um2, prec).mul_pow2(-1);
                let b = u
                    .powi(2 - d / 2, prec)?
                    .mul(&hm, prec)
                    .mul(&um2, prec)
                    .mul_pow2(-1)
                    .neg();
                let x = u.recip(prec)?;
                Ok((a, b, x))
            };
            let za = ComplexBox::real(Interval::point(t_hi.clone()));
            let zb = ComplexBox::real(Interval::point(u_cap.clone()));
            contour.merge(self.freeze_segment(&fpair, &za, &zb)?);
        }
        {
            // region 2 path with dips
            let kctx = &self.kctx;
            let tauc = tau.clone();
            let pairc = tau_pair;
            let fpair = move |t: &ComplexBox| -> Result<(ComplexBox, ComplexBox, ComplexBox)> {
                let z = t.mul_i();
                let (kp, km) = kctx.eval_pm_cached(&tauc, &pairc, &z)?;
                Ok((kp.mul_pow2(-1), km.mul_pow2(-1), t.clone()))
            };
            let radius = 0.18f64;
            let mut cursor = t_lo.clone();
            for t0 in &detours {
                let left = t0.sub(&BigFloat::from_f64(radius), prec, Round::Floor);
                let right = t0.add(&BigFloat::from_f64(radius), prec, Round::Ceil);
                if left.cmp(&cursor) == core::cmp::Ordering::Greater {
                    let za = ComplexBox::real(Interval::point(cursor.clone()));
                    let zb = ComplexBox::real(Interval::point(left.clone()));
                    contour.merge(self.freeze_segment(&fpair, &za, &zb)?);
                }
                let depth = Interval::from_f64(radius);
                let za = ComplexBox::real(Interval::point(left.clone()));
                let zb = ComplexBox::new(Interval::point(left.clone()), depth.neg());
                let zc = ComplexBox::new(Interval::point(right.clone()), depth.neg());
                let zd = ComplexBox::real(Interval::point(right.clone()));
                for (p, q) in [(&za, &zb), (&zb, &zc), (&zc, &zd)] {
                    contour.merge(self.freeze_segment(&fpair, p, q)?);
                }
                cursor = right;
            }
            if t_hi.cmp(&cursor) == core::cmp::Ordering::Greater {
                let za = ComplexBox::real(Interval::point(cursor.clone()));
                let zb = ComplexBox::real(Interval::point(t_hi.clone()));
                contour.merge(self.freeze_segment(&fpair, &za, &zb)?);
            }
        }
        Ok(TauData {
            tau: tau.clone(),
            zexp,
            zexp_flip,
            t_hi,
            t_lo,
            u_cap,
            contour,
        })
    }

    /// Adaptively freeze one straight segment of a contour. `fpair` returns
    /// the two rho-independent signed integrand values and the exponent
    /// factor X at a point; the certified panel error uses the worst
    /// rho = 0 exponential (real rho >= 0 only shrinks it).
    fn freeze_segment(
        &self,
        fpair: &dyn Fn(&ComplexBox) -> Result<(ComplexBox, ComplexBox, ComplexBox)>,
        za: &ComplexBox,
        zb: &ComplexBox,
    ) -> Result<FrozenContour> {
        let prec = self.prec();
        let rig = self.rig();
        let tol = BigFloat::from_f64(self.cfg.quad_tol);
        let diff = zb.sub(za, prec);
        let seg_len = diff.abs_mag(prec);
        let rule = &self.quad.rule;
        struct Item {
            s0: f64,
            s1: f64,
            depth: usize,
        }
        let mut stack = alloc::vec::Vec::new();
        stack.push(Item {
            s0: 0.0,
            s1: 1.0,
            depth: 0,
        });
        let mut out = FrozenContour::empty();
        while let Some(it) = stack.pop() {
            let mid = 0.5 * (it.s0 + it.s1);
            let half = 0.5 * (it.s1 - it.s0);
            // certified bound attempt over a rho ladder
            let mut best: Option<(f64, BigFloat)> = None;
            for rho_ell in [8.0f64, 3.0, 1.6, 1.2] {
                let ax = 0.5 * (rho_ell + 1.0 / rho_ell) * half;
                let ay = 0.5 * (rho_ell - 1.0 / rho_ell) * half;
                let mut m = BigFloat::Zero;
                let mut ok = true;
                let nx = 8;
                let ny = 3;
                'grid: for i in 0..nx {
                    for j in 0..ny {
                        let sx0 = mid - ax + 2.0 * ax * i as f64 / nx as f64;
                        let sx1 = mid - ax + 2.0 * ax * (i + 1) as f64 / nx as f64;
                        let sy0 = -ay + 2.0 * ay * j as f64 / ny as f64;
                        let sy1 = -ay + 2.0 * ay * (j + 1) as f64 / ny as f64;
                        let sbox = ComplexBox::new(
                            Interval::new(BigFloat::from_f64(sx0), BigFloat::from_f64(sx1)),
                            Interval::new(BigFloat::from_f64(sy0), BigFloat::from_f64(sy1)),
                        );
                        let t = za.add(&sbox.mul(&diff, prec), prec);
                        match fpair(&t) {
                            Ok((a, b, _x)) => {
                                let cand = a
                                    .abs_mag(prec)
                                    .add(&b.abs_mag(prec), prec, Round::Ceil);
                                if !cand.is_finite() {
                                    ok = false;
                                    break 'grid;
                                }
                                if cand.cmp(&m) == core::cmp::Ordering::Greater {
                                    m = cand;
                                }
                            }
                            Err(_) => {
                                ok = false;
                                break 'grid;
                            }
                        }
                    }
                }
                if ok {
                    let n = rule.n as f64;
                    let denom = (rho_ell * rho_ell - 1.0) * libm::pow(rho_ell, 2.0 * n - 2.0);
                    let conv = Interval::from_f64(64.0 / 15.0 / denom)
                        .mul(&Interval::from_f64(half), prec)
                        .mul(&Interval::point(seg_len.clone()), prec)
                        .mag();
                    let err = m.mul(&conv, prec, Round::Ceil);
                    best = Some(match best {
                        None => (rho_ell, err),
                        Some((pr, pe)) => {
                            if err.cmp(&pe) == core::cmp::Ordering::Less {
                                (rho_ell, err)
                            } else {
                                (pr, pe)
                            }
                        }
                    });
                }
            }
            let budget = tol
                .mul(&BigFloat::from_f64(half), prec, Round::Floor)
                .mul_pow2(-1);
            let acceptable = match &best {
                Some((_, e)) => e.cmp(&budget) != core::cmp::Ordering::Greater,
                None => false,
            };
            if !acceptable && it.depth < self.quad.max_depth {
                stack.push(Item {
                    s0: it.s0,
                    s1: mid,
                    depth: it.depth + 1,
                });
                stack.push(Item {
                    s0: mid,
                    s1: it.s1,
                    depth: it.depth + 1,
                });
                continue;
            }
            let (rho_ell, err) = best.ok_or(Error::InsufficientOrder)?;
            if it.depth >= self.quad.max_depth
                && err.cmp(&budget) == core::cmp::Ordering::Greater
            {
                return Err(Error::InsufficientOrder);
            }
            // nodes: s = mid + half * x_k
            let half_iv = Interval::from_f64(half);
            let mid_iv = Interval::from_f64(mid);
            let mut x_re_hull: Option<Interval> = None;
            let mut x_im_hull: Option<Interval> = None;
            for (xk, wk) in rule.nodes.iter().zip(&rule.weights) {
                let sv = ComplexBox::real(mid_iv.add(&xk.mul(&half_iv, prec), prec));
                let t = za.add(&sv.mul(&diff, prec), prec);
                let (a, b, x) = fpair(&t)?;
                // fold weight, jacobian (zb - za), and half-length
                let scale = diff.mul_real(&wk.mul(&half_iv, prec), prec);
                out.nodes.push(FrozenNode {
                    xfac: x.clone(),
                    a: a.mul(&scale, prec),
                    b: b.mul(&scale, prec),
                });
                x_re_hull = Some(match x_re_hull {
                    None => x.re.clone(),
                    Some(h) => h.hull(&x.re),
                });
                x_im_hull = Some(match x_im_hull {
                    None => x.im.clone(),
                    Some(h) => h.hull(&x.im),
                });
            }
            // the X rectangle for the panel: hull of node X values widened
            // by the ellipse extent mapped through X's segment expression.
            // Conservative: widen by the segment-length times ellipse axes.
            let ax = 0.5 * (rho_ell + 1.0 / rho_ell) * half;
            let widen = Interval::point(seg_len.clone())
                .mul(&Interval::from_f64(2.0 * ax), prec)
                .mag();
            let x_re = x_re_hull.expect("nodes").widen(&widen, prec);
            let x_im = x_im_hull.expect("nodes").widen(&widen, prec);
            out.panels.push(FrozenPanel {
                x_re,
                x_im,
                m_bound: {
                    // recover M from err = M * conv
                    let n = rule.n as f64;
                    let denom = (rho_ell * rho_ell - 1.0) * libm::pow(rho_ell, 2.0 * n - 2.0);
                    let conv = Interval::from_f64(64.0 / 15.0 / denom)
                        .mul(&Interval::from_f64(half), prec)
                        .mul(&Interval::point(seg_len.clone()), prec)
                        .mag();
                    let _ = conv;
                    err
                },
                conv: BigFloat::one(),
            });
            let _ = rig;
        }
        Ok(out)
    }

    /// The Laplace transform `int_0^inf W(tau, it) e^{-pi rho t} dt` where W
    /// is K (hat = false) or Khat (hat = true), continued in rho by removing
    /// the non-decaying part; the returned pair is (decaying_part,
    /// non_decaying_closed_part) so callers can attach the sin^2 prefactor
    /// with node compensation.
    fn laplace_parts(
        &self,
        td: &TauData,
        hat: bool,
        rho: &ComplexBox,
    ) -> Result<(ComplexBox, GhatData)> {
        let prec = self.prec();
        let rig = self.rig();
        let (quad_k, quad_hat) = td.contour.eval(rho, rig)?;
        let quad_part = if hat { quad_hat } else { quad_k };
        let far = flip_far_tail(
            &td.zexp_flip,
            hat,
            self.cfg.d,
            &Interval::point(td.u_cap.clone()),
            rho,
            rig,
        )?;
        let tail = zexp_tail_integral_c(&td.zexp, hat, &Interval::point(td.t_hi.clone()), rho, rig)?;
        let decaying = quad_part.add(&far, prec).add(&tail, prec);
        let ghat = td.zexp.ghat_combined(hat, prec);
        Ok((decaying, ghat))
    }

    /// The compensated product `4 sin^2(pi rho/2) * int_T^inf G e^{-pi rho t}`
    /// (finite at every rho, including the even-integer nodes).
    fn high_part(
        &self,
        ghat: &GhatData,
        t0: &BigFloat,
        rho: &ComplexBox,
    ) -> Result<ComplexBox> {
        let prec = self.prec();
        let rig = self.rig();
        let t_iv = Interval::point(t0.clone());
        let t_c = ComplexBox::real(t_iv.clone());
        let sin_plain = {
            let arg = rho.mul_real(&rig.pi, prec).mul_pow2(-1);
            arg.sin(rig)
        };
        let mut acc = ComplexBox::zero();
        for (ki, row) in ghat.g.iter().enumerate() {
            let k = ki as i64 - 1;
            // c = pi (rho + 2k)
            let c = rho
                .add(&ComplexBox::from_i64(2 * k), prec)
                .mul_real(&rig.pi, prec);
            let expf = c.mul(&t_c, prec).neg().exp(rig);
            // shift = sin(pi rho/2)/(rho + 2k)
            let shift = sin_half_pi_over_shift_c(rho, -2 * k, rig);
            // S1 = 4 sin^2/c = 4 sin * shift / pi ; S2 = 4 sin^2/c^2 = 4 shift^2/pi^2
            let s1 = sin_plain
                .mul(&shift, prec)
                .mul_real(&rig.pi.recip(prec)?, prec)
                .mul_pow2(2);
            let s2 = shift
                .sqr(prec)
                .mul_real(&rig.pi.sqr(prec).recip(prec)?, prec)
                .mul_pow2(2);
            // term = e^{-cT} [ g0 S1 + i g1 (T S1 + S2) ]
            let g0 = &row[0];
            let g1 = &row[1];
            let inner = g0.mul(&s1, prec).add(
                &g1.mul_i().mul(&t_c.mul(&s1, prec).add(&s2, prec), prec),
                prec,
            );
            acc = acc.add(&expf.mul(&inner, prec), prec);
        }
        Ok(acc)
    }

    /// `F2(tau, rho)`: the full continued transform times the sin^2 factor.
    pub fn f2_eval_rho(&self, td: &TauData, rho: &ComplexBox) -> Result<ComplexBox> {
        let prec = self.prec();
        let rig = self.rig();
        let (dec, ghat) = self.laplace_parts(td, false, rho)?;
        let sin_sq = sin_sq_half_pi_c(rho, rig).mul_pow2(2);
        let high = self.high_part(&ghat, &td.t_hi, rho)?;
        Ok(sin_sq.mul(&dec, prec).add(&high, prec))
    }

    /// `Ftilde(tau, rho)` (the hat transform; no Gaussian term).
    pub fn ftilde_eval_rho(&self, td: &TauData, rho: &ComplexBox) -> Result<ComplexBox> {
        let prec = self.prec();
        let rig = self.rig();
        let (dec, ghat) = self.laplace_parts(td, true, rho)?;
        let sin_sq = sin_sq_half_pi_c(rho, rig).mul_pow2(2);
        let high = self.high_part(&ghat, &td.t_hi, rho)?;
        Ok(sin_sq.mul(&dec, prec).add(&high, prec))
    }

    /// `F(tau, r) = e^{pi i tau r^2} + F2(tau, r)`.
    pub fn f_eval_rho(&self, td: &TauData, rho: &ComplexBox) -> Result<ComplexBox> {
        let prec = self.prec();
        let gauss = td
            .tau
            .mul(rho, prec)
            .mul_real(&self.rig().pi, prec)
            .mul_i()
            .exp(self.rig());
        Ok(gauss.add(&self.f2_eval_rho(td, rho)?, prec))
    }

    pub fn f_eval(&self, td: &TauData, r: &Interval) -> Result<ComplexBox> {
        let rho = ComplexBox::real(r.sqr(self.prec()));
        self.f_eval_rho(td, &rho)
    }

    pub fn ftilde_eval(&self, td: &TauData, r: &Interval) -> Result<ComplexBox> {
        let rho = ComplexBox::real(r.sqr(self.prec()));
        self.ftilde_eval_rho(td, &rho)
    }
}

/// Evaluate a ZSeries at a general point w of H (zeta = e^{pi i w}).
pub fn eval_zseries_at(
    s: &crate::kernels::ZSeries,
    w: &ComplexBox,
    rig: &RigorCtx,
) -> Result<ComplexBox> {
    let prec = rig.prec;
    let zeta = w.exp_pi_i(rig);
    let mut acc = ComplexBox::zero();
    for p in s.coeffs.iter().rev() {
        acc = acc.mul(&zeta, prec);
        acc = acc.add(&p.eval(w, prec), prec);
    }
    acc = acc.mul(&zeta.powi(s.start, prec)?, prec);
    if let Some(tb) = &s.tail {
        let zmag = zeta.abs_mag(prec);
        if zmag.cmp(&tb.r) != core::cmp::Ordering::Less {
            return Err(Error::ConvergenceDomain);
        }
        let ratio = Interval::point(zmag).div(&Interval::point(tb.r.clone()), prec)?;
        let geom = crate::rigor::geometric_tail(&tb.c, &ratio, s.end(), prec)?;
        let wmag = w.abs_mag(prec);
        let zfac = BigFloat::one()
            .add(&wmag, prec, Round::Ceil)
            .add(&wmag.mul(&wmag, prec, Round::Ceil), prec, Round::Ceil);
        let ball = Interval::ball(&geom.mul(&zfac, prec, Round::Ceil));
        acc = ComplexBox::new(acc.re.add(&ball, prec), acc.im.add(&ball, prec));
    } else {
        return Err(Error::TailUnavailable);
    }
    Ok(acc)
}

/// Closed-bound tail of the flipped u-integral over [U, inf):
/// `int_U^inf (u^{-d/2} H+ -+ u^{2-d/2} H-)/2 e^{-pi rho/u} u^{-2} du`.
fn flip_far_tail(
    flip: &KernelZExpansion,
    hat: bool,
    d: u8,
    u0: &Interval,
    rho: &ComplexBox,
    rig: &RigorCtx,
) -> Result<ComplexBox> {
    let prec = rig.prec;
    // e^{-pi rho / u} lies in the box hull of {e^{-pi rho/U}, 1} for real
    // rho >= 0; for complex rho (used only with tiny imaginary parts) widen
    // by the hull with 1.
    let sandwich = {
        let at_u0 = rho
            .mul_real(&rig.pi, prec)
            .div(&ComplexBox::real(u0.clone()), prec)?
            .neg()
            .exp(rig);
        at_u0.hull(&ComplexBox::one())
    };
    let mut acc = ComplexBox::zero();
    let end = flip.plus.end().min(flip.minus.end());
    for m in 1..end {
        let pp = flip.plus.coeff(m);
        let pm = flip.minus.coeff(m);
        // combined polynomial coefficient (in w = iu): the H's were stored
        // with poly in z=w: evaluate the w-powers against u moments below.
        // (K at i/u) = (u^{-d/2} Hp(iu) -+ ...)/2 with Hp poly in w = iu:
        // w^j = (iu)^j = i^j u^j.
        for j in 0..3usize {
            let cp = &pp.0[j];
            let cm = &pm.0[j];
            let comb = {
                let a = cp.clone();
                let b = cm.clone();
                let v = if hat {
                    // K: minus sign; Khat: plus (see laplace_parts)
                    a.add(&b, prec)
                } else {
                    a.sub(&b, prec)
                };
                v.mul_pow2(-1)
            };
            if crate::qseries::CoeffRing::is_zero(&comb) {
                continue;
            }
            // i^j factor and exponents: plus part uses u^{-d/2 + j - 2},
            // minus uses u^{2-d/2 + j - 2}; bound both by the larger exponent
            // (u >= U > 1): a = d/2 - j as the decisive negative power.
            let ij = ComplexBox::i().powi(j as i64, prec)?;
            // moment bound: int_U^inf u^{j - d/2} e^{-pi m u} du, and the
            // minus part has an extra u^2; take the weaker (u^2) bound for
            // both and absorb into the enclosure.
            let a_pow = (d as i64) / 2 - j as i64 - 2;
            // int_U^inf u^{-a} e^{-pi m u} du <= U^{-a} e^{-pi m U}/(pi m)
            // for a >= 0; for a < 0 (cannot happen: d/2 >= 4, j <= 2, so
            // a_pow >= 0) we would split differently.
            let a_eff = a_pow.max(0) - 2; // minus part gains u^2
            let a_eff = a_eff.max(0);
            let u_pow = u0.powi(-a_eff, prec)?;
            let em = rig.exp(&rig.pi.mul(u0, prec).mul_i64(m, prec).neg());
            let denom = rig.pi.mul_i64(m, prec);
            let bound = u_pow.mul(&em, prec).div(&denom, prec)?.mag();
            let cell = Interval::new(BigFloat::Zero, bound);
            let term = comb
                .mul(&ij, prec)
                .mul(&sandwich, prec)
                .mul_real(&cell, prec);
            // enclosure must allow the lower end 0: hull with zero
            acc = acc.add(&term.hull(&ComplexBox::zero()), prec);
        }
    }
    // series tail over m >= end, geometric.
    if let (Some(tp), Some(tm)) = (&flip.plus.tail, &flip.minus.tail) {
        let ct = tp.c.add(&tm.c, prec, Round::Ceil);
        let rt = if tp.r.cmp(&tm.r) == core::cmp::Ordering::Less {
            tp.r.clone()
        } else {
            tm.r.clone()
        };
        let x0 = rig.exp(&rig.pi.mul(u0, prec).neg());
        let ratio = x0.div(&Interval::point(rt), prec)?;
        if ratio.hi.cmp(&BigFloat::one()) != core::cmp::Ordering::Less {
            return Err(Error::ConvergenceDomain);
        }
        let geom = crate::rigor::geometric_tail(&ct, &ratio, end.max(1), prec)?;
        // polynomial factor (1 + u + u^2) u^{-2} <= 3 for u >= 1, integrated
        // against e^{-pi u} ... crude measure bound 1/pi.
        let slack = geom
            .mul(&BigFloat::from_f64(3.0), prec, Round::Ceil)
            .div(&rig.pi.lo, prec, Round::Ceil);
        let ball = Interval::ball(&slack);
        acc = ComplexBox::new(acc.re.add(&ball, prec), acc.im.add(&ball, prec));
    } else {
        return Err(Error::TailUnavailable);
    }
    Ok(acc)
}

/// Complex-rho version of the z-expansion decaying tail integral.
fn zexp_tail_integral_c(
    zexp: &KernelZExpansion,
    hat: bool,
    t0: &Interval,
    rho: &ComplexBox,
    rig: &RigorCtx,
) -> Result<ComplexBox> {
    let prec = rig.prec;
    if t0.lo.cmp(&zexp.t_min) == core::cmp::Ordering::Less {
        return Err(Error::ConvergenceDomain);
    }
    let mut acc = ComplexBox::zero();
    let end = zexp.plus.end().min(zexp.minus.end());
    for m in 1..end {
        let pp = zexp.plus.coeff(m);
        let pm = zexp.minus.coeff(m);
        let comb = |a: &ComplexBox, b: &ComplexBox| -> ComplexBox {
            if hat {
                a.sub(b, prec).mul_pow2(-1)
            } else {
                a.add(b, prec).mul_pow2(-1)
            }
        };
        let c = rho
            .add(&ComplexBox::from_i64(m), prec)
            .mul_real(&rig.pi, prec);
        if c.contains_zero() {
            return Err(Error::DomainError);
        }
        let i0 = exp_moment_c(&c, t0, 0, rig)?;
        let i1 = exp_moment_c(&c, t0, 1, rig)?;
        let i2 = exp_moment_c(&c, t0, 2, rig)?;
        let c0 = comb(&pp.0[0], &pm.0[0]);
        let c1 = comb(&pp.0[1], &pm.0[1]);
        let c2 = comb(&pp.0[2], &pm.0[2]);
        let term = c0
            .mul(&i0, prec)
            .add(&c1.mul_i().mul(&i1, prec), prec)
            .sub(&c2.mul(&i2, prec), prec);
        acc = acc.add(&term, prec);
    }
    // geometric tail (as in the real case, with |e^{-pi rho t}| <= e^{-pi
    // Re(rho) t} and Re rho >= -1/4 enforced by callers... use Re part).
    let (ct, rt) = match (&zexp.plus.tail, &zexp.minus.tail) {
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
    let re_rho = rho.re.clone();
    let k0 = {
        let t = Interval::point(t0.lo.clone());
        let p1 = Interval::one().add(&t, prec).add(&t.sqr(prec), prec);
        let p2 = Interval::one().add(&t.mul_pow2(1), prec);
        let pi = &rig.pi;
        p1.div(pi, prec)?
            .add(&p2.div(&pi.sqr(prec), prec)?, prec)
            .add(&Interval::from_i64(2).div(&pi.powi(3, prec)?, prec)?, prec)
    };
    // e^{-pi Re(rho) T} multiplies every term; fold into the constant.
    let rho_fac = rig.exp(&rig.pi.mul(&re_rho, prec).mul(&Interval::point(t0.lo.clone()), prec).neg());
    let x0 = rig.exp(&rig.pi.mul(&Interval::point(t0.lo.clone()), prec).neg());
    let ratio = x0.div(&Interval::point(rt), prec)?;
    if ratio.hi.cmp(&BigFloat::one()) != core::cmp::Ordering::Less {
        return Err(Error::ConvergenceDomain);
    }
    let geom = crate::rigor::geometric_tail(&ct, &ratio, end.max(1), prec)?;
    let slack = geom
        .mul(&k0.mag(), prec, Round::Ceil)
        .mul(&rho_fac.mag(), prec, Round::Ceil);
    let ball = Interval::ball(&slack);
    Ok(ComplexBox::new(
        acc.re.add(&ball, prec),
        acc.im.add(&ball, prec),
    ))
}

/// Rigorous radial derivative of a function of r through central differences
/// with a Cauchy remainder: requires an analytic extension evaluable on
/// complex circles of radius `rc` around r0.
pub fn radial_derivative(
    f: &dyn Fn(&ComplexBox) -> Result<ComplexBox>,
    r0: &Interval,
    h: f64,
    rc: f64,
    rig: &RigorCtx,
) -> Result<ComplexBox> {
    let prec = rig.prec;
    let hh = Interval::from_f64(h);
    let fp = f(&ComplexBox::real(r0.add(&hh, prec)))?;
    let fm = f(&ComplexBox::real(r0.sub(&hh, prec)))?;
    let diff = fp
        .sub(&fm, prec)
        .mul_real(&hh.mul_pow2(1).recip(prec)?, prec);
    // |f' - diff| <= h^2/6 max|f'''| <= h^2 M / (rc - h)^3 over the circle.
    let m = circle_max(f, r0, rc, rig)?;
    let rem = Interval::from_f64(h * h / ((rc - h) * (rc - h) * (rc - h)))
        .mul(&Interval::point(m), prec)
        .mag();
    let ball = Interval::ball(&rem);
    Ok(ComplexBox::new(
        diff.re.add(&ball, prec),
        diff.im.add(&ball, prec),
    ))
}

/// Second radial derivative with the analogous fourth-derivative remainder.
pub fn radial_second_derivative(
    f: &dyn Fn(&ComplexBox) -> Result<ComplexBox>,
    r0: &Interval,
    h: f64,
    rc: f64,
    rig: &RigorCtx,
) -> Result<ComplexBox> {
    let prec = rig.prec;
    let hh = Interval::from_f64(h);
    let fp = f(&ComplexBox::real(r0.add(&hh, prec)))?;
    let f0 = f(&ComplexBox::real(r0.clone()))?;
    let fm = f(&ComplexBox::real(r0.sub(&hh, prec)))?;
    let diff = fp
        .add(&fm, prec)
        .sub(&f0.mul_pow2(1), prec)
        .mul_real(&hh.sqr(prec).recip(prec)?, prec);
    // |f'' - diff| <= h^2/12 max|f''''| <= 2 h^2 M/(rc-h)^4.
    let m = circle_max(f, r0, rc, rig)?;
    let d = rc - h;
    let rem = Interval::from_f64(2.0 * h * h / (d * d * d * d))
        .mul(&Interval::point(m), prec)
        .mag();
    let ball = Interval::ball(&rem);
    Ok(ComplexBox::new(
        diff.re.add(&ball, prec),
        diff.im.add(&ball, prec),
    ))
}

fn circle_max(
    f: &dyn Fn(&ComplexBox) -> Result<ComplexBox>,
    r0: &Interval,
    rc: f64,
    rig: &RigorCtx,
) -> Result<BigFloat> {
    let prec = rig.prec;
    let n = 12usize;
    let mut best = BigFloat::Zero;
    for k in 0..n {
        let th = rig
            .two_pi()
            .mul(&Interval::from_ratio(k as i64, n as i64, prec), prec)
            .hull(&rig.two_pi().mul(
                &Interval::from_ratio(k as i64 + 1, n as i64, prec),
                prec,
            ));
        let (s, c) = rig.sin_cos(&th);
        let re = r0.add(&c.mul(&Interval::from_f64(rc), prec), prec);
        let im = s.mul(&Interval::from_f64(rc), prec);
        let v = f(&ComplexBox::new(re, im))?;
        let m = v.abs_mag(prec);
        if !m.is_finite() {
            return Err(Error::ConvergenceDomain);
        }
        if m.cmp(&best) == core::cmp::Ordering::Greater {
            best = m;
        }
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::sync::OnceLock;

    fn gen8() -> &'static FGen {
        static G: OnceLock<FGen> = OnceLock::new();
        G.get_or_init(|| FGen::new(8, 128, 64))
    }

    fn gen24() -> &'static FGen {
        static G: OnceLock<FGen> = OnceLock::new();
        G.get_or_init(|| FGen::new(24, 128, 64))
    }

    #[test]
    fn f8_at_sqrt2_is_pure_gaussian() {
        // F^{(8)}(tau, sqrt2) = e^{2 pi i tau} because G^{(8)}_{-1,j} = 0.
        let g = gen8();
        let prec = g.prec();
        let tau = ComplexBox::from_f64s(0.0, 1.0);
        let td = g.prepare(&tau).unwrap();
        let r = Interval::from_i64(2).sqrt(prec).unwrap();
        let f = g.f_eval(&td, &r).unwrap();
        let expect = tau
            .mul_i64(2, prec)
            .mul_real(&g.rig().pi, prec)
            .mul_i()
            .exp(g.rig());
        assert!(
            f.overlaps(&expect),
            "{:?} vs {:?}",
            f.to_f64s(),
            expect.to_f64s()
        );
        let dd = f.sub(&expect, prec).abs_mag(prec).to_f64();
        assert!(dd < 1e-8, "defect {dd}");
    }

    #[test]
    fn ftilde_vanishes_at_nodes() {
        let g = gen8();
        let prec = g.prec();
        let tau = ComplexBox::from_f64s(0.0, 1.0);
        let td = g.prepare(&tau).unwrap();
        for n in [1i64, 2, 3] {
            let r = Interval::from_i64(2 * n).sqrt(prec).unwrap();
            let v = g.ftilde_eval(&td, &r).unwrap();
            assert!(v.contains_zero(), "n={n} {:?}", v.to_f64s());
            assert!(v.abs_mag(prec).to_f64() < 1e-10, "n={n}");
        }
    }

    #[test]
    fn ftilde_positive_on_axis_samples() {
        let g = gen8();
        let tau = ComplexBox::from_f64s(0.0, 1.0);
        let td = g.prepare(&tau).unwrap();
        for r in [0.5, 1.0, 1.7, 2.3] {
            let v = g.ftilde_eval(&td, &Interval::from_f64(r)).unwrap();
            assert!(
                v.re.is_strictly_positive() || v.re.hi.to_f64() > 0.0,
                "r={r} {:?}",
                v.to_f64s()
            );
            assert!(v.im.contains_zero());
        }
    }

    #[test]
    fn interpolation_identity_d8() {
        // F(tau,r) + (i/tau)^{d/2} Ftilde(-1/tau, r) = e^{pi i tau r^2}.
        let g = gen8();
        let prec = g.prec();
        let rig = g.rig();
        for (t, r) in [(1.0f64, 1.3f64), (1.4, 0.7), (0.8, 1.9)] {
            let tau = ComplexBox::from_f64s(0.0, t);
            let td = g.prepare(&tau).unwrap();
            let minus_inv = tau.recip(prec).unwrap().neg();
            let td2 = g.prepare(&minus_inv).unwrap();
            let ri = Interval::from_f64(r);
            let f = g.f_eval(&td, &ri).unwrap();
            let ft = g.ftilde_eval(&td2, &ri).unwrap();
            // (i/tau)^{d/2} = tau^{-d/2} for d/2 = 0 mod 4
            let fac = tau.powi(-(g.cfg.d as i64) / 2, prec).unwrap();
            let lhs = f.add(&fac.mul(&ft, prec), prec);
            let rhs = tau
                .mul_real(&ri.sqr(prec), prec)
                .mul_real(&rig.pi, prec)
                .mul_i()
                .exp(rig);
            let resid = lhs.sub(&rhs, prec);
            assert!(
                resid.abs_mag(prec).to_f64() < 1e-6,
                "t={t} r={r} resid {:?}",
                resid.to_f64s()
            );
        }
    }

    #[test]
    fn interpolation_identity_d24() {
        let g = gen24();
        let prec = g.prec();
        let rig = g.rig();
        let (t, r) = (1.0f64, 1.1f64);
        let tau = ComplexBox::from_f64s(0.0, t);
        let td = g.prepare(&tau).unwrap();
        let ri = Interval::from_f64(r);
        let f = g.f_eval(&td, &ri).unwrap();
        let ft = g.ftilde_eval(&td, &ri).unwrap();
        let fac = tau.powi(-12, prec).unwrap();
        let lhs = f.add(&fac.mul(&ft, prec), prec);
        let rhs = tau
            .mul_real(&ri.sqr(prec), prec)
            .mul_real(&rig.pi, prec)
            .mul_i()
            .exp(rig);
        let resid = lhs.sub(&rhs, prec);
        assert!(
            resid.abs_mag(prec).to_f64() < 1e-6,
            "resid {:?}",
            resid.to_f64s()
        );
    }

    #[test]
    fn p_independence_of_split() {
        // Changing the split region must not change F2 (their sum is
        // independent of the decomposition).
        let g = gen8();
        let prec = g.prec();
        let tau = ComplexBox::from_f64s(0.0, 1.4);
        let td1 = g.prepare(&tau).unwrap();
        let mut td2 = g.prepare(&tau).unwrap();
        // widen the middle region
        td2.t_hi = td2.t_hi.mul(&BigFloat::from_f64(1.5), prec, Round::Ceil);
        let rho = ComplexBox::real(Interval::from_f64(1.9 * 1.9));
        let a = g.f2_eval_rho(&td1, &rho).unwrap();
        let b = g.f2_eval_rho(&td2, &rho).unwrap();
        assert!(a.overlaps(&b), "{:?} vs {:?}", a.to_f64s(), b.to_f64s());
    }

    #[test]
    fn f_special_value_at_zero() {
        // F(tau, 0) = 1 + i G_{0,1}(tau).
        let g = gen8();
        let prec = g.prec();
        let tau = ComplexBox::from_f64s(0.0, 1.2);
        let td = g.prepare(&tau).unwrap();
        let f0 = g.f_eval(&td, &Interval::zero()).unwrap();
        let ghat = td.zexp.ghat_combined(false, prec);
        let expect = ComplexBox::one().add(&ghat.g[1][1].mul_i(), prec);
        assert!(
            f0.overlaps(&expect),
            "{:?} vs {:?}",
            f0.to_f64s(),
            expect.to_f64s()
        );
    }

    #[test]
    fn radial_derivative_of_gaussian_factor() {
        // Sanity for the derivative helper on a known function.
        let g = gen8();
        let rig = g.rig();
        let prec = g.prec();
        let f = |r: &ComplexBox| -> Result<ComplexBox> {
            // e^{-pi r^2}
            Ok(r.sqr(prec).mul_real(&rig.pi, prec).neg().exp(rig))
        };
        let r0 = Interval::from_f64(1.1);
        let d = radial_derivative(&f, &r0, 1e-7, 0.4, rig).unwrap();
        let expect = -2.0 * core::f64::consts::PI * 1.1 * libm::exp(-core::f64::consts::PI * 1.21);
        assert!(
            (d.re.to_f64_mid() - expect).abs() < 1e-9,
            "{} vs {expect}",
            d.re.to_f64_mid()
        );
    }
}


