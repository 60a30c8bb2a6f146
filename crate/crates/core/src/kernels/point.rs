//! Pointwise kernel evaluation on H x H, with slash actions, residues, and
//! compensated evaluation across the diagonal.

use super::tables::{kernel_table, KernelTable};
use crate::special::{FormId, FormPoint, SpecialCtx};
use crate::rigor::{ComplexBox, Interval};
use crate::{Error, Result};
use alloc::vec::Vec;

/// Value-and-derivative pair for first-order compensated evaluation.
#[derive(Debug, Clone)]
pub struct Dual {
    pub v: ComplexBox,
    pub d: ComplexBox,
}

impl Dual {
    pub fn constant(v: ComplexBox) -> Dual {
        Dual {
            v,
            d: ComplexBox::zero(),
        }
    }

    pub fn var(v: ComplexBox) -> Dual {
        Dual {
            v,
            d: ComplexBox::one(),
        }
    }

    pub fn add(&self, o: &Dual, prec: u32) -> Dual {
        Dual {
            v: self.v.add(&o.v, prec),
            d: self.d.add(&o.d, prec),
        }
    }

    pub fn sub(&self, o: &Dual, prec: u32) -> Dual {
        Dual {
            v: self.v.sub(&o.v, prec),
            d: self.d.sub(&o.d, prec),
        }
    }

    pub fn mul(&self, o: &Dual, prec: u32) -> Dual {
        Dual {
            v: self.v.mul(&o.v, prec),
            d: self
                .v
                .mul(&o.d, prec)
                .add(&self.d.mul(&o.v, prec), prec),
        }
    }

    pub fn div(&self, o: &Dual, prec: u32) -> Result<Dual> {
        let v = self.v.div(&o.v, prec)?;
        // (a/b)' = (a' - (a/b) b')/b
        let d = self
            .d
            .sub(&v.mul(&o.d, prec), prec)
            .div(&o.v, prec)?;
        Ok(Dual { v, d })
    }

    pub fn scale(&self, c: &ComplexBox, prec: u32) -> Dual {
        Dual {
            v: self.v.mul(c, prec),
            d: self.d.mul(c, prec),
        }
    }

    pub fn mul_i64(&self, k: i64, prec: u32) -> Dual {
        Dual {
            v: self.v.mul_i64(k, prec),
            d: self.d.mul_i64(k, prec),
        }
    }
}

/// All tau-side quantities (value, d/dtau) needed by the kernel tables.
pub struct TauSide {
    pub z: Dual,
    pub e4: Dual,
    pub e6: Dual,
    pub e8: Dual,
    pub e10: Dual,
    pub e14: Dual,
    pub delta: Dual,
    pub j: Dual,
    /// Basis vector for the requested sign: (phi_-2, phi_0, phi_2) for plus,
    /// (psi_0, psi_2, psi_4) for minus.
    pub basis: [Dual; 3],
}

/// tau-side data from a FormPoint (optionally slashed by an automorphy
/// factor: basis evaluated at gamma.tau with the weight factors attached).
pub fn tau_side(ctx: &SpecialCtx, p: &FormPoint, plus: bool) -> Result<TauSide> {
    let prec = ctx.prec();
    let pi = &ctx.rig.pi;
    let z = Dual::var(p.z.clone());
    let lift = |v: ComplexBox, d: ComplexBox| Dual { v, d };
    let e2 = lift(p.e2.clone(), p.d_e2(pi, prec));
    let e4 = lift(p.e4.clone(), p.d_e4(pi, prec));
    let e6 = lift(p.e6.clone(), p.d_e6(pi, prec));
    let delta = lift(p.delta(prec), p.d_delta(pi, prec));
    let j = lift(p.j(prec)?, p.d_j(pi, prec)?);
    let e8 = e4.mul(&e4, prec);
    let e10 = e4.mul(&e6, prec);
    let e14 = e8.mul(&e6, prec);
    let u = lift(p.u.clone(), p.d_u(pi, prec));
    let v = lift(p.v.clone(), p.d_v(pi, prec));
    let w = lift(p.w.clone(), p.d_w(pi, prec));
    let lcal = lift(p.lcal.clone(), p.d_lcal(pi, prec));
    let lcal_s = lift(p.lcal_s.clone(), p.d_lcal_s(pi, prec));
    let basis = if plus {
        // phi_{-2} = tau, phi_0 = tau E2 - 3i/pi,
        // phi_2 = tau E2^2 - (6i/pi) E2.
        let three_i_over_pi =
            ComplexBox::imag(Interval::from_i64(3).div(pi, prec)?);
        let six_i_over_pi = three_i_over_pi.mul_pow2(1);
        let phi_m2 = z.clone();
        let phi_0 = z.mul(&e2, prec).sub(&Dual::constant(three_i_over_pi), prec);
        let phi_2 = z
            .mul(&e2.mul(&e2, prec), prec)
            .sub(&e2.scale(&six_i_over_pi, prec), prec);
        [phi_m2, phi_0, phi_2]
    } else {
        // psi_0 = 1,
        // psi_2 = (U + W) Lcal - (U + V) LcalS,
        // psi_4 = (U^2 + W^2 - 2V^2) Lcal + (U^2 + V^2 - 2W^2) LcalS.
        let psi_0 = Dual::constant(ComplexBox::one());
        let psi_2 = u
            .add(&w, prec)
            .mul(&lcal, prec)
            .sub(&u.add(&v, prec).mul(&lcal_s, prec), prec);
        let u2 = u.mul(&u, prec);
        let v2 = v.mul(&v, prec);
        let w2 = w.mul(&w, prec);
        let xi4 = u2.add(&w2, prec).sub(&v2.mul_i64(2, prec), prec);
        let xi4_s = u2.add(&v2, prec).sub(&w2.mul_i64(2, prec), prec);
        let psi_4 = xi4.mul(&lcal, prec).add(&xi4_s.mul(&lcal_s, prec), prec);
        [psi_0, psi_2, psi_4]
    };
    Ok(TauSide {
        z,
        e4,
        e6,
        e8,
        e10,
        e14,
        delta,
        j,
        basis,
    })
}

impl TauSide {
    fn form(&self, id: FormId) -> &Dual {
        match id {
            FormId::E4 => &self.e4,
            FormId::E6 => &self.e6,
            FormId::E8w => &self.e8,
            FormId::E10 => &self.e10,
            FormId::E14 => &self.e14,
            FormId::Delta => &self.delta,
            _ => unreachable!("table forms"),
        }
    }
}

/// z-side values (no derivatives needed).
pub struct ZSide {
    pub z: ComplexBox,
    pub e4: ComplexBox,
    pub e6: ComplexBox,
    pub e8: ComplexBox,
    pub e10: ComplexBox,
    pub e14: ComplexBox,
    pub delta: ComplexBox,
    pub j: ComplexBox,
    pub basis: [ComplexBox; 3],
}

pub fn z_side(ctx: &SpecialCtx, p: &FormPoint, plus: bool) -> Result<ZSide> {
    let prec = ctx.prec();
    let pi = &ctx.rig.pi;
    let z = p.z.clone();
    let e4 = p.e4.clone();
    let e6 = p.e6.clone();
    let e8 = p.e8(prec);
    let e10 = p.e10(prec);
    let e14 = p.e14(prec);
    let delta = p.delta(prec);
    let j = p.j(prec)?;
    let basis = if plus {
        // phit_{-2} = z^2, phit_0 = z^2 E2 - 6iz/pi,
        // phit_2 = (z E2 - 6i/pi)^2.
        let six_i_over_pi = ComplexBox::imag(Interval::from_i64(6).div(pi, prec)?);
        let z2 = p.z.sqr(prec);
        let p0 = z2
            .mul(&p.e2, prec)
            .sub(&p.z.mul(&six_i_over_pi, prec), prec);
        let inner = p.z.mul(&p.e2, prec).sub(&six_i_over_pi, prec);
        let p2 = inner.sqr(prec);
        [z2, p0, p2]
    } else {
        // psit_0 = Lcal, psit_2 = W, psit_4 = U^2 - V^2.
        let psit_0 = p.lcal.clone();
        let psit_2 = p.w.clone();
        let psit_4 = p.u.sqr(prec).sub(&p.v.sqr(prec), prec);
        [psit_0, psit_2, psit_4]
    };
    Ok(ZSide {
        z,
        e4,
        e6,
        e8,
        e10,
        e14,
        delta,
        j,
        basis,
    })
}

impl ZSide {
    fn form(&self, id: FormId) -> &ComplexBox {
        match id {
            FormId::E4 => &self.e4,
            FormId::E6 => &self.e6,
            FormId::E8w => &self.e8,
            FormId::E10 => &self.e10,
            FormId::E14 => &self.e14,
            FormId::Delta => &self.delta,
            _ => unreachable!("table forms"),
        }
    }
}

/// The split value of one signed kernel:
/// `K_{+-}(tau, z) = regular + singular / (j(tau) - j(z))`,
/// with d/dtau of both parts for compensated evaluation.
pub struct KernelParts {
    pub regular: Dual,
    pub singular: Dual,
    pub j_tau: Dual,
    pub j_z: ComplexBox,
}

pub fn kernel_parts(
    ctx: &SpecialCtx,
    table: &KernelTable,
    tau: &TauSide,
    z: &ZSide,
) -> Result<KernelParts> {
    let prec = ctx.prec();
    let pi = &ctx.rig.pi;
    // scale = (num/den) pi^pi_pow i^i_pow / Delta(z)
    let mut scale = ComplexBox::real(Interval::from_ratio(
        table.scale_num,
        table.scale_den,
        prec,
    ));
    if table.pi_pow >= 0 {
        scale = scale.mul_real(&pi.powi(table.pi_pow as i64, prec)?, prec);
    } else {
        scale = scale.mul_real(
            &pi.powi(-(table.pi_pow as i64), prec)?.recip(prec)?,
            prec,
        );
    }
    for _ in 0..table.i_pow {
        scale = scale.mul_i();
    }
    scale = scale.div(&z.delta, prec)?;

    // Row factors: basis_a * PiTau_a; column factors: PiZ_b * basis_b.
    let mut rows: Vec<Dual> = Vec::with_capacity(3);
    for a in 0..3 {
        let mut r = tau.basis[a].clone();
        if !table.pi_tau_one[a] {
            r = r.mul(tau.form(table.pi_tau[a]), prec);
            if table.pi_tau_inv_delta[a] {
                r = r.div(&tau.delta, prec)?;
            }
        }
        rows.push(r);
    }
    let mut cols: Vec<ComplexBox> = Vec::with_capacity(3);
    for b in 0..3 {
        let mut c = z.basis[b].clone();
        if !table.pi_z_one[b] {
            c = c.mul(z.form(table.pi_z[b]), prec);
            if table.pi_z_inv_delta[b] {
                c = c.div(&z.delta, prec)?;
            }
        }
        cols.push(c);
    }

    let mut regular = Dual::constant(ComplexBox::zero());
    let mut singular = Dual::constant(ComplexBox::zero());
    for a in 0..3 {
        for b in 0..3 {
            for (mat, acc) in [(&table.reg, &mut regular), (&table.sing, &mut singular)] {
                let ent = mat[a][b];
                if ent.c == 0 && ent.jt == 0 {
                    continue;
                }
                let mut coeff = Dual::constant(ComplexBox::from_i64(ent.c));
                if ent.jt != 0 {
                    coeff = coeff.add(&tau.j.mul_i64(ent.jt, prec), prec);
                }
                let term = rows[a]
                    .mul(&coeff, prec)
                    .scale(&cols[b], prec);
                *acc = acc.add(&term, prec);
            }
        }
    }
    regular = regular.scale(&scale, prec);
    singular = singular.scale(&scale, prec);
    Ok(KernelParts {
        regular,
        singular,
        j_tau: tau.j.clone(),
        j_z: z.j.clone(),
    })
}

impl KernelParts {
    /// Plain evaluation `regular + singular/(j_tau - j_z)`; errors when the
    /// denominator encloses zero.
    pub fn eval_plain(&self, prec: u32) -> Result<ComplexBox> {
        let jd = self.j_tau.v.sub(&self.j_z, prec);
        if jd.contains_zero() {
            return Err(Error::DiagonalSingularity);
        }
        Ok(self
            .regular
            .v
            .add(&self.singular.v.div(&jd, prec)?, prec))
    }

    /// Compensated evaluation for parts whose tau side was built on the hull
    /// of tau and z: since the singular numerator of an unslashed kernel
    /// vanishes identically on the diagonal, the quotient is enclosed by
    /// `d/dtau singular (hull) / j'(hull)` (mean value along the segment).
    pub fn eval_compensated(&self, prec: u32) -> Result<ComplexBox> {
        let quotient = self
            .singular
            .d
            .div(&self.j_tau.d, prec)
            .map_err(|_| Error::HigherOrderPole)?;
        Ok(self.regular.v.add(&quotient, prec))
    }
}

/// Which kernel to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KernelKind {
    KPlus,
    KMinus,
    K,
    KHat,
}

impl KernelKind {
    pub fn parse(s: &str) -> Option<KernelKind> {
        Some(match s {
            "Kplus" | "K+" | "kplus" => KernelKind::KPlus,
            "Kminus" | "K-" | "kminus" => KernelKind::KMinus,
            "K" | "k" => KernelKind::K,
            "Khat" | "khat" => KernelKind::KHat,
            _ => return None,
        })
    }
}
