//! The bilinear modular kernels on H x H for dimensions 8 and 24: pointwise
//! evaluation (with diagonal compensation), slash actions, residues, the
//! non-decaying asymptotics, and the truncated d = 24 kernel.

mod asympt;
mod point;
mod tables;

pub use asympt::{EHatValues, GhatData, KernelZExpansion, ZPoly, ZSeries};
pub use point::{tau_side, z_side, Dual, KernelKind, KernelParts, TauSide, ZSide};
pub use tables::{kernel_table, Entry, KernelTable, N_CONST};

use crate::grpalg::{GroupAlgebraElement, Mat2, PslWord};
use crate::qseries::rational_to_complex;
use crate::rigor::{ComplexBox, Interval};
use crate::special::SpecialCtx;
use crate::{Error, Result};
use point::kernel_parts;

/// Evaluation context for one dimension.
pub struct KernelCtx {
    pub sp: SpecialCtx,
    pub d: u8,
}

/// Apply a fractional linear transformation to a box.
pub fn mobius(m: &Mat2, z: &ComplexBox, prec: u32) -> Result<ComplexBox> {
    let a = ComplexBox::from_i64(m[0] as i64);
    let b = ComplexBox::from_i64(m[1] as i64);
    let c = ComplexBox::from_i64(m[2] as i64);
    let d = ComplexBox::from_i64(m[3] as i64);
    let num = a.mul(z, prec).add(&b, prec);
    let den = c.mul(z, prec).add(&d, prec);
    num.div(&den, prec)
}

/// Factor of automorphy `j(gamma, z) = cz + d`.
pub fn automorphy(m: &Mat2, z: &ComplexBox, prec: u32) -> ComplexBox {
    ComplexBox::from_i64(m[2] as i64)
        .mul(z, prec)
        .add(&ComplexBox::from_i64(m[3] as i64), prec)
}

impl KernelCtx {
    pub fn new(d: u8, prec: u32, order: usize) -> KernelCtx {
        assert!(d == 8 || d == 24);
        KernelCtx {
            sp: SpecialCtx::new(prec, order),
            d,
        }
    }

    pub fn from_special(d: u8, sp: SpecialCtx) -> KernelCtx {
        assert!(d == 8 || d == 24);
        KernelCtx { sp, d }
    }

    pub fn prec(&self) -> u32 {
        self.sp.prec()
    }

    fn signed_parts(&self, plus: bool, tau: &ComplexBox, z_pt: &ZSide) -> Result<KernelParts> {
        let p = self.sp.eval_point(tau)?;
        let ts = tau_side(&self.sp, &p, plus)?;
        kernel_parts(&self.sp, &kernel_table(self.d, plus), &ts, z_pt)
    }

    /// Precompute both tau sides for repeated evaluation at a fixed tau.
    pub fn tau_pair(&self, tau: &ComplexBox) -> Result<(TauSide, TauSide)> {
        let p = self.sp.eval_point(tau)?;
        Ok((
            tau_side(&self.sp, &p, true)?,
            tau_side(&self.sp, &p, false)?,
        ))
    }

    /// Both signed kernel values at (tau, z) using cached tau sides.
    /// Falls back to the hull-compensated path across the diagonal (which
    /// must rebuild the tau side on the hull).
    pub fn eval_pm_cached(
        &self,
        tau: &ComplexBox,
        pair: &(TauSide, TauSide),
        z: &ComplexBox,
    ) -> Result<(ComplexBox, ComplexBox)> {
        let prec = self.prec();
        let zp = self.sp.eval_point(z)?;
        let mut out = [ComplexBox::zero(), ComplexBox::zero()];
        for (slot, plus) in [(0usize, true), (1usize, false)] {
            let zs = z_side(&self.sp, &zp, plus)?;
            let ts = if plus { &pair.0 } else { &pair.1 };
            let parts = kernel_parts(&self.sp, &kernel_table(self.d, plus), ts, &zs)?;
            let jd = parts.j_tau.v.sub(&parts.j_z, prec);
            out[slot] = if !jd.contains_zero() {
                parts.eval_plain(prec)?
            } else {
                let hull = tau.hull(z);
                let parts_h = self.signed_parts(plus, &hull, &zs)?;
                parts_h.eval_compensated(prec)?
            };
        }
        Ok((out[0].clone(), out[1].clone()))
    }

    fn signed_value(
        &self,
        plus: bool,
        tau: &ComplexBox,
        z: &ComplexBox,
        z_pt: &ZSide,
    ) -> Result<ComplexBox> {
        let prec = self.prec();
        let parts = self.signed_parts(plus, tau, z_pt)?;
        let jd = parts.j_tau.v.sub(&parts.j_z, prec);
        if !jd.contains_zero() {
            return parts.eval_plain(prec);
        }
        // Near/on the diagonal orbit: rebuild the tau side on the hull of
        // tau and z, then use the mean-value quotient.
        let hull = tau.hull(z);
        let parts_h = self.signed_parts(plus, &hull, z_pt)?;
        parts_h.eval_compensated(prec)
    }

    /// Kernel value at (tau, z); compensates automatically across the
    /// diagonal (where the unslashed kernels are finite).
    pub fn eval(&self, which: KernelKind, tau: &ComplexBox, z: &ComplexBox) -> Result<ComplexBox> {
        let prec = self.prec();
        let zp = self.sp.eval_point(z)?;
        match which {
            KernelKind::KPlus => {
                let zs = z_side(&self.sp, &zp, true)?;
                self.signed_value(true, tau, z, &zs)
            }
            KernelKind::KMinus => {
                let zs = z_side(&self.sp, &zp, false)?;
                self.signed_value(false, tau, z, &zs)
            }
            KernelKind::K | KernelKind::KHat => {
                let zs_p = z_side(&self.sp, &zp, true)?;
                let zs_m = z_side(&self.sp, &zp, false)?;
                let a = self.signed_value(true, tau, z, &zs_p)?;
                let b = self.signed_value(false, tau, z, &zs_m)?;
                Ok(if which == KernelKind::K {
                    a.add(&b, prec).mul_pow2(-1)
                } else {
                    a.sub(&b, prec).mul_pow2(-1)
                })
            }
        }
    }

    /// Slashed evaluation `(K |^tau_{d/2} alpha |^z_{2-d/2} beta)(tau, z)`:
    /// the basis vectors are slashed, the coefficient matrix is not.
    pub fn eval_slashed(
        &self,
        which: KernelKind,
        alpha: &PslWord,
        beta: &PslWord,
        tau: &ComplexBox,
        z: &ComplexBox,
    ) -> Result<ComplexBox> {
        let prec = self.prec();
        match which {
            KernelKind::K => {
                let a = self.eval_slashed(KernelKind::KPlus, alpha, beta, tau, z)?;
                let b = self.eval_slashed(KernelKind::KMinus, alpha, beta, tau, z)?;
                return Ok(a.add(&b, prec).mul_pow2(-1));
            }
            KernelKind::KHat => {
                let a = self.eval_slashed(KernelKind::KPlus, alpha, beta, tau, z)?;
                let b = self.eval_slashed(KernelKind::KMinus, alpha, beta, tau, z)?;
                return Ok(a.sub(&b, prec).mul_pow2(-1));
            }
            _ => {}
        }
        let plus = which == KernelKind::KPlus;
        let parts = self.slashed_parts(plus, alpha, beta, tau, z)?;
        parts.eval_plain(prec)
    }

    fn slashed_parts(
        &self,
        plus: bool,
        alpha: &PslWord,
        beta: &PslWord,
        tau: &ComplexBox,
        z: &ComplexBox,
    ) -> Result<KernelParts> {
        let prec = self.prec();
        let table = kernel_table(self.d, plus);
        let weights: [i64; 3] = if plus { [-2, 0, 2] } else { [0, 2, 4] };
        // tau side: basis at alpha.tau with automorphy weights; Pi(tau) forms
        // stay at tau.
        let p_tau = self.sp.eval_point(tau)?;
        let mut ts = tau_side(&self.sp, &p_tau, plus)?;
        if !alpha.is_empty() {
            let am = alpha.matrix();
            let atau = mobius(&am, tau, prec)?;
            let pa = self.sp.eval_point(&atau)?;
            let ts_a = tau_side(&self.sp, &pa, plus)?;
            let ja = automorphy(&am, tau, prec);
            for (i, w) in weights.iter().enumerate() {
                let f = ja.powi(-w, prec)?;
                ts.basis[i] = ts_a.basis[i].scale(&f, prec);
            }
        }
        // z side: basis at beta.z with weights; Pi(z) forms stay at z.
        let p_z = self.sp.eval_point(z)?;
        let mut zs = z_side(&self.sp, &p_z, plus)?;
        if !beta.is_empty() {
            let bm = beta.matrix();
            let bz = mobius(&bm, z, prec)?;
            let pb = self.sp.eval_point(&bz)?;
            let zs_b = z_side(&self.sp, &pb, plus)?;
            let jb = automorphy(&bm, z, prec);
            for (i, w) in weights.iter().enumerate() {
                let f = jb.powi(-w, prec)?;
                zs.basis[i] = zs_b.basis[i].mul(&f, prec);
            }
        }
        kernel_parts(&self.sp, &table, &ts, &zs)
    }

    /// Slash a group algebra element through the tau variable:
    /// `sum_gamma c_gamma (K |^tau gamma)(tau, z)`.
    pub fn eval_slashed_algebra(
        &self,
        which: KernelKind,
        r: &GroupAlgebraElement,
        tau: &ComplexBox,
        z: &ComplexBox,
    ) -> Result<ComplexBox> {
        let prec = self.prec();
        let mut acc = ComplexBox::zero();
        let ident = PslWord::identity();
        for (w, c) in &r.terms {
            let v = self.eval_slashed(which, w, &ident, tau, z)?;
            acc = acc.add(&v.mul(&rational_to_complex(c, prec), prec), prec);
        }
        Ok(acc)
    }

    /// Slash through the z variable.
    pub fn eval_slashed_algebra_z(
        &self,
        which: KernelKind,
        r: &GroupAlgebraElement,
        tau: &ComplexBox,
        z: &ComplexBox,
    ) -> Result<ComplexBox> {
        let prec = self.prec();
        let mut acc = ComplexBox::zero();
        let ident = PslWord::identity();
        for (w, c) in &r.terms {
            let v = self.eval_slashed(which, &ident, w, tau, z)?;
            acc = acc.add(&v.mul(&rational_to_complex(c, prec), prec), prec);
        }
        Ok(acc)
    }

    /// Residue at `tau = z` of `(K |^tau gamma)`: the singular numerator of
    /// the slashed kernel evaluated on the diagonal, divided by `j'(z)`.
    /// Fails with HigherOrderPole when j'(z) vanishes (orbits of i, rho).
    pub fn residue_at_diagonal(
        &self,
        which: KernelKind,
        gamma: &PslWord,
        z: &ComplexBox,
    ) -> Result<ComplexBox> {
        let prec = self.prec();
        match which {
            KernelKind::K => {
                let a = self.residue_at_diagonal(KernelKind::KPlus, gamma, z)?;
                let b = self.residue_at_diagonal(KernelKind::KMinus, gamma, z)?;
                return Ok(a.add(&b, prec).mul_pow2(-1));
            }
            KernelKind::KHat => {
                let a = self.residue_at_diagonal(KernelKind::KPlus, gamma, z)?;
                let b = self.residue_at_diagonal(KernelKind::KMinus, gamma, z)?;
                return Ok(a.sub(&b, prec).mul_pow2(-1));
            }
            _ => {}
        }
        let plus = which == KernelKind::KPlus;
        let parts = self.slashed_parts(plus, gamma, &PslWord::identity(), z, z)?;
        if parts.j_tau.d.contains_zero() {
            return Err(Error::HigherOrderPole);
        }
        parts.singular.v.div(&parts.j_tau.d, prec)
    }

    /// Residue of a slashed algebra element at tau = z.
    pub fn residue_at_diagonal_algebra(
        &self,
        which: KernelKind,
        r: &GroupAlgebraElement,
        z: &ComplexBox,
    ) -> Result<ComplexBox> {
        let prec = self.prec();
        let mut acc = ComplexBox::zero();
        for (w, c) in &r.terms {
            let v = self.residue_at_diagonal(which, w, z)?;
            acc = acc.add(&v.mul(&rational_to_complex(c, prec), prec), prec);
        }
        Ok(acc)
    }

    /// Residue at `tau = gamma z` of the unslashed kernel in tau.
    pub fn residue_at_orbit(
        &self,
        which: KernelKind,
        gamma: &PslWord,
        z: &ComplexBox,
    ) -> Result<ComplexBox> {
        let prec = self.prec();
        match which {
            KernelKind::K => {
                let a = self.residue_at_orbit(KernelKind::KPlus, gamma, z)?;
                let b = self.residue_at_orbit(KernelKind::KMinus, gamma, z)?;
                return Ok(a.add(&b, prec).mul_pow2(-1));
            }
            KernelKind::KHat => {
                let a = self.residue_at_orbit(KernelKind::KPlus, gamma, z)?;
                let b = self.residue_at_orbit(KernelKind::KMinus, gamma, z)?;
                return Ok(a.sub(&b, prec).mul_pow2(-1));
            }
            _ => {}
        }
        let plus = which == KernelKind::KPlus;
        let gz = mobius(&gamma.matrix(), z, prec)?;
        let zp = self.sp.eval_point(z)?;
        let zs = z_side(&self.sp, &zp, plus)?;
        let parts = self.signed_parts(plus, &gz, &zs)?;
        if parts.j_tau.d.contains_zero() {
            return Err(Error::HigherOrderPole);
        }
        parts.singular.v.div(&parts.j_tau.d, prec)
    }

    /// The plus or minus tau-side basis vector at a point.
    pub fn basis_at(&self, plus: bool, w: &ComplexBox) -> Result<[ComplexBox; 3]> {
        let p = self.sp.eval_point(w)?;
        let ts = tau_side(&self.sp, &p, plus)?;
        Ok([
            ts.basis[0].v.clone(),
            ts.basis[1].v.clone(),
            ts.basis[2].v.clone(),
        ])
    }

    /// z-side basis values.
    pub fn basis_tilde_at(&self, plus: bool, w: &ComplexBox) -> Result<[ComplexBox; 3]> {
        let p = self.sp.eval_point(w)?;
        let zs = z_side(&self.sp, &p, plus)?;
        Ok(zs.basis.clone())
    }
}

/// `(T - I)^2` as an algebra element.
pub fn t_minus_i_squared() -> GroupAlgebraElement {
    let t = PslWord::t();
    let mut r = GroupAlgebraElement::zero();
    r.add_term(t.pow(2), crate::grpalg::rational(1, 1));
    r.add_term(t, crate::grpalg::rational(-2, 1));
    r.add_term(PslWord::identity(), crate::grpalg::rational(1, 1));
    r
}

/// `S (T - I)^2`.
pub fn s_t_minus_i_squared() -> GroupAlgebraElement {
    t_minus_i_squared().mul_word_left(&PslWord::s())
}

/// `S + I` (plus) or `S - I` (minus).
pub fn s_plus_minus_i(plus: bool) -> GroupAlgebraElement {
    let mut r = GroupAlgebraElement::zero();
    r.add_term(PslWord::s(), crate::grpalg::rational(1, 1));
    r.add_term(
        PslWord::identity(),
        crate::grpalg::rational(if plus { 1 } else { -1 }, 1),
    );
    r
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grpalg::parse_word;
    use crate::rigor::BigFloat;
    use std::sync::OnceLock;

    fn ctx8() -> &'static KernelCtx {
        static C: OnceLock<KernelCtx> = OnceLock::new();
        C.get_or_init(|| KernelCtx::new(8, 160, 64))
    }

    fn ctx24() -> &'static KernelCtx {
        static C: OnceLock<KernelCtx> = OnceLock::new();
        C.get_or_init(|| KernelCtx::new(24, 160, 64))
    }

    fn boxed(re: f64, im: f64) -> ComplexBox {
        ComplexBox::from_f64s(re, im)
    }

    #[test]
    fn phi_basis_values() {
        // phi_{-2}(2i) = 2i; phi_0(i) = 0; psi_0 = 1.
        let c = ctx8();
        let b = c.basis_at(true, &boxed(0.0, 2.0)).unwrap();
        assert!(b[0].im.contains(&BigFloat::from_f64(2.0)));
        assert!(b[0].re.contains_zero());
        let b = c.basis_at(true, &boxed(0.0, 1.0)).unwrap();
        assert!(
            b[1].re.contains_zero() && b[1].im.contains_zero(),
            "{:?}",
            b[1].to_f64s()
        );
        let b = c.basis_at(false, &boxed(0.3, 1.4)).unwrap();
        assert!(b[0].re.contains(&BigFloat::one()));
    }

    #[test]
    fn kernel_finite_off_diagonal() {
        let c = ctx8();
        let v = c
            .eval(KernelKind::K, &boxed(0.0, 2.0), &boxed(0.0, 0.8))
            .unwrap();
        assert!(v.abs_mag(c.prec()).is_finite());
    }

    #[test]
    fn khat8_positive_on_axis() {
        let c = ctx8();
        let v = c
            .eval(KernelKind::KHat, &boxed(0.0, 2.0), &boxed(0.0, 0.8))
            .unwrap();
        assert!(v.re.is_strictly_positive(), "{:?}", v.to_f64s());
        assert!(v.im.contains_zero());
    }

    #[test]
    fn kernel_diagonal_compensated() {
        // The compensated path across the diagonal must agree with the plain
        // path evaluated just off it.
        let c = ctx8();
        let tau = boxed(0.0, 1.3);
        let z_near = boxed(0.0, 1.3 + 1e-9);
        let z_on = ComplexBox::new(
            Interval::zero(),
            Interval::new(
                BigFloat::from_f64(1.3 - 1e-30),
                BigFloat::from_f64(1.3 + 1e-30),
            ),
        );
        let plain = c.eval(KernelKind::K, &tau, &z_near).unwrap();
        let comp = c.eval(KernelKind::K, &tau, &z_on).unwrap();
        let d = plain.sub(&comp, c.prec());
        assert!(
            d.abs_mag(c.prec()).to_f64() < 1e-6,
            "plain {:?} comp {:?}",
            plain.to_f64s(),
            comp.to_f64s()
        );
    }

    #[test]
    fn functional_equation_t_minus_i_sq() {
        for cx in [ctx8(), ctx24()] {
            let tau = boxed(0.13, 1.21);
            let z = boxed(-0.2, 0.9);
            let r = t_minus_i_squared();
            let v = cx.eval_slashed_algebra(KernelKind::K, &r, &tau, &z).unwrap();
            assert!(v.contains_zero(), "d={} value {:?}", cx.d, v.to_f64s());
            let w = v.abs_mag(cx.prec()).to_f64();
            assert!(w < 1e-15, "width {w}");
        }
    }

    #[test]
    fn functional_equation_s_t_minus_i_sq() {
        for cx in [ctx8(), ctx24()] {
            let tau = boxed(0.21, 1.45);
            let z = boxed(0.1, 1.8);
            let r = s_t_minus_i_squared();
            let v = cx.eval_slashed_algebra(KernelKind::K, &r, &tau, &z).unwrap();
            assert!(v.contains_zero(), "d={}", cx.d);
            assert!(v.abs_mag(cx.prec()).to_f64() < 1e-12);
        }
    }

    #[test]
    fn eigenfunction_property_of_signed_kernels() {
        // K_pm |^tau (S pm I) = 0.
        for cx in [ctx8(), ctx24()] {
            let tau = boxed(0.05, 1.1);
            let z = boxed(-0.3, 1.33);
            for plus in [true, false] {
                let which = if plus {
                    KernelKind::KPlus
                } else {
                    KernelKind::KMinus
                };
                let r = s_plus_minus_i(plus);
                let v = cx.eval_slashed_algebra(which, &r, &tau, &z).unwrap();
                assert!(v.contains_zero(), "d={} plus={plus} {:?}", cx.d, v.to_f64s());
            }
        }
    }

    #[test]
    fn z_side_annihilation() {
        // K_pm |^z r = 0 for the generators of the dual ideals.
        let cx = ctx8();
        let tau = boxed(0.4, 1.6);
        let z = boxed(0.12, 1.05);
        let prec = cx.prec();
        for plus in [true, false] {
            let which = if plus {
                KernelKind::KPlus
            } else {
                KernelKind::KMinus
            };
            let eps: i64 = if plus { 1 } else { -1 };
            let ident = PslWord::identity();
            let terms: [(PslWord, i64); 4] = [
                (parse_word("T").unwrap(), 1),
                (PslWord::identity(), -2),
                (parse_word("T^-1").unwrap(), 1),
                (PslWord::s(), -2 * eps),
            ];
            let mut acc = ComplexBox::zero();
            for (w, c) in terms {
                let v = cx.eval_slashed(which, &ident, &w, &tau, &z).unwrap();
                acc = acc.add(&v.mul_i64(c, prec), prec);
            }
            assert!(acc.contains_zero(), "r1 plus={plus} {:?}", acc.to_f64s());
            let v_i = cx.eval_slashed(which, &ident, &ident, &tau, &z).unwrap();
            let sts = parse_word("S T S").unwrap();
            let v_sts = cx.eval_slashed(which, &ident, &sts, &tau, &z).unwrap();
            let acc = v_i.sub(&v_sts.mul_i64(eps, prec), prec);
            assert!(acc.contains_zero(), "r2 plus={plus} {:?}", acc.to_f64s());
        }
    }

    #[test]
    fn residue_table_basis_words() {
        // Res_{tau=z}(K | gamma) = -phi(gamma)/(2 pi) on the six basis words.
        let c = ctx8();
        let z = boxed(0.0, 1.37);
        let prec = c.prec();
        let minus_inv_2pi = ComplexBox::real(
            Interval::from_i64(-1).div(&c.sp.rig.two_pi(), prec).unwrap(),
        );
        for (name, expect_t) in [
            ("I", false),
            ("T", true),
            ("T S", false),
            ("S", false),
            ("S T", false),
            ("S T S", false),
        ] {
            let gamma = if name == "I" {
                PslWord::identity()
            } else {
                parse_word(name).unwrap()
            };
            let res = c.residue_at_diagonal(KernelKind::K, &gamma, &z).unwrap();
            if expect_t {
                assert!(res.overlaps(&minus_inv_2pi), "{name}: {:?}", res.to_f64s());
            } else {
                assert!(res.contains_zero(), "{name}: {:?}", res.to_f64s());
                assert!(res.abs_mag(prec).to_f64() < 1e-12, "{name}");
            }
        }
    }

    #[test]
    fn residue_at_orbit_translate() {
        // Res_{tau = z + 1} K(tau, z) = -phi(T)/2pi = -1/(2pi); gamma = T^-1
        // gives +1/(2pi) (phi(T^-1) = -1).
        let c = ctx8();
        let z = boxed(0.0, 1.2);
        let prec = c.prec();
        let res = c.residue_at_orbit(KernelKind::K, &PslWord::t(), &z).unwrap();
        let expect = ComplexBox::real(
            Interval::from_i64(-1).div(&c.sp.rig.two_pi(), prec).unwrap(),
        );
        assert!(res.overlaps(&expect), "{:?}", res.to_f64s());
        let res2 = c
            .residue_at_orbit(KernelKind::K, &PslWord::t_inv(), &z)
            .unwrap();
        assert!(res2.overlaps(&expect.neg()));
    }

    #[test]
    fn residue_of_k24() {
        let c = ctx24();
        let z = boxed(0.0, 1.23);
        let prec = c.prec();
        let res = c
            .residue_at_diagonal(KernelKind::K, &PslWord::t(), &z)
            .unwrap();
        let expect = ComplexBox::real(
            Interval::from_i64(-1).div(&c.sp.rig.two_pi(), prec).unwrap(),
        );
        assert!(res.overlaps(&expect), "{:?}", res.to_f64s());
        let res_i = c
            .residue_at_diagonal(KernelKind::K, &PslWord::identity(), &z)
            .unwrap();
        assert!(res_i.contains_zero());
    }

    #[test]
    fn slash_composition_law() {
        // (K |^tau g1)(g2 tau) j(g2,tau)^{-d/2} = (K |^tau (g1 g2))(tau).
        let c = ctx8();
        let prec = c.prec();
        let tau = boxed(0.17, 1.9);
        let z = boxed(-0.05, 1.12);
        let g1 = parse_word("T S").unwrap();
        let g2 = parse_word("S T^-1").unwrap();
        let g12 = g1.mul(&g2);
        let direct = c
            .eval_slashed(KernelKind::KPlus, &g12, &PslWord::identity(), &tau, &z)
            .unwrap();
        let g2tau = mobius(&g2.matrix(), &tau, prec).unwrap();
        let inner = c
            .eval_slashed(KernelKind::KPlus, &g1, &PslWord::identity(), &g2tau, &z)
            .unwrap();
        let jfac = automorphy(&g2.matrix(), &tau, prec)
            .powi(-(c.d as i64) / 2, prec)
            .unwrap();
        let composed = inner.mul(&jfac, prec);
        assert!(
            direct.overlaps(&composed),
            "{:?} vs {:?}",
            direct.to_f64s(),
            composed.to_f64s()
        );
    }

    #[test]
    fn u_slash_t_is_w() {
        // U|_2 T = W: U(tau+1) = W(tau).
        let c = ctx8();
        let prec = c.prec();
        let tau = boxed(0.0, 1.2);
        let p = c.sp.eval_point(&tau).unwrap();
        let tp1 = tau.add(&ComplexBox::one(), prec);
        let p1 = c.sp.eval_point(&tp1).unwrap();
        assert!(p1.u.overlaps(&p.w));
    }
}

