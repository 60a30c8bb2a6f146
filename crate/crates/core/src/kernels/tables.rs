//! The explicit coefficient matrices of the bilinear kernels.
//!
//! Each kernel is a sandwich `phi(tau)^t . Pi(tau) M Pi(z) . phitilde(z)`
//! divided by a scale times `Delta(z)` and, entry-dependently, by
//! `j(tau) - j(z)`. We store the matrix `M` split as `REG + SING/(j_t - j_z)`
//! with entries affine in `j(tau)`, so that the kernel value is
//! `A(tau,z) + C(tau,z)/(j(tau)-j(z))` with `A`, `C` holomorphic.

use crate::special::FormId;

pub const N_CONST: i64 = 1728;

/// Entry value = `c + jt * j(tau)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Entry {
    pub c: i64,
    pub jt: i64,
}

pub const fn e(c: i64) -> Entry {
    Entry { c, jt: 0 }
}

pub const fn ej(c: i64, jt: i64) -> Entry {
    Entry { c, jt }
}

pub const Z: Entry = e(0);

/// One kernel family: the diagonal form lists, the split matrix, and the
/// overall scalar (a rational multiple of a power of pi, times i or not).
#[derive(Debug, Clone)]
pub struct KernelTable {
    /// Forms on the tau-side diagonal (paired with the basis rows).
    pub pi_tau: [FormId; 3],
    /// Whether the tau-side diagonal entry carries a 1/Delta(tau) factor.
    pub pi_tau_inv_delta: [bool; 3],
    /// Forms on the z-side diagonal (paired with the basis columns).
    pub pi_z: [FormId; 3],
    pub pi_z_inv_delta: [bool; 3],
    /// Identity entries use FormId::J as placeholder with `one = true`.
    pub pi_tau_one: [bool; 3],
    pub pi_z_one: [bool; 3],
    pub reg: [[Entry; 3]; 3],
    pub sing: [[Entry; 3]; 3],
    /// Scale = (num/den) * pi^pi_pow * i^i_pow, all divided by Delta(z).
    pub scale_num: i64,
    pub scale_den: i64,
    pub pi_pow: i32,
    pub i_pow: u8,
}

/// Weight index -> (form, needs 1/Delta, is constant one).
/// f_{-2} = E10/Delta, f_0 = 1, f_2 = E14/Delta, f_4 = E4, f_6 = E6,
/// f_8 = E8, f_10 = E10, f_12 = Delta, f_14 = E14.
fn f_of_weight(wt: i64) -> (FormId, bool, bool) {
    match wt {
        -2 => (FormId::E10, true, false),
        0 => (FormId::J, false, true),
        2 => (FormId::E14, true, false),
        4 => (FormId::E4, false, false),
        6 => (FormId::E6, false, false),
        8 => (FormId::E8w, false, false),
        10 => (FormId::E10, false, false),
        12 => (FormId::Delta, false, false),
        14 => (FormId::E14, false, false),
        _ => unreachable!("weight {wt}"),
    }
}

fn diag(wts: [i64; 3]) -> ([FormId; 3], [bool; 3], [bool; 3]) {
    let a = f_of_weight(wts[0]);
    let b = f_of_weight(wts[1]);
    let c = f_of_weight(wts[2]);
    (
        [a.0, b.0, c.0],
        [a.1, b.1, c.1],
        [a.2, b.2, c.2],
    )
}

/// Table for K_+ or K_- in dimension 8 or 24.
pub fn kernel_table(d: u8, plus: bool) -> KernelTable {
    let n = N_CONST;
    match (d, plus) {
        (8, true) => {
            let (pi_tau, tau_inv, tau_one) = diag([6, 4, 2]);
            let (pi_z, z_inv, z_one) = diag([12, 10, 8]);
            KernelTable {
                pi_tau,
                pi_tau_inv_delta: tau_inv,
                pi_z,
                pi_z_inv_delta: z_inv,
                pi_tau_one: tau_one,
                pi_z_one: z_one,
                reg: [[e(1), Z, Z], [e(-2), Z, Z], [Z, Z, Z]],
                sing: [[Z, Z, e(1)], [Z, e(-2), Z], [e(1), Z, Z]],
                // 1/(36 pi^{-2} i) = -i pi^2/36
                scale_num: -1,
                scale_den: 36,
                pi_pow: 2,
                i_pow: 1,
            }
        }
        (24, true) => {
            let (pi_tau, tau_inv, tau_one) = diag([14, 12, 10]);
            let (pi_z, z_inv, z_one) = diag([4, 2, 0]);
            KernelTable {
                pi_tau,
                pi_tau_inv_delta: tau_inv,
                pi_z,
                pi_z_inv_delta: z_inv,
                pi_tau_one: tau_one,
                pi_z_one: z_one,
                reg: [
                    [e(6), Z, e(-6)],
                    [ej(5 * n, -12), Z, ej(-7 * n, 12)],
                    [e(6), Z, e(-6)],
                ],
                sing: [[Z, Z, e(n)], [Z, e(-2 * n), Z], [e(n), Z, Z]],
                scale_num: -1,
                scale_den: 36 * n,
                pi_pow: 2,
                i_pow: 1,
            }
        }
        (8, false) => {
            let (pi_tau, tau_inv, tau_one) = diag([4, 2, 0]);
            let (pi_z, z_inv, z_one) = diag([10, 8, 6]);
            KernelTable {
                pi_tau,
                pi_tau_inv_delta: tau_inv,
                pi_z,
                pi_z_inv_delta: z_inv,
                pi_tau_one: tau_one,
                pi_z_one: z_one,
                reg: [[Z, Z, Z], [Z, Z, Z], [Z, Z, Z]],
                sing: [
                    [e(-2 * n), Z, Z],
                    [Z, e(1), e(-1)],
                    [Z, ej(n, -1), ej(0, 1)],
                ],
                scale_num: 1,
                scale_den: 2 * n,
                pi_pow: -1,
                i_pow: 0,
            }
        }
        (24, false) => {
            let (pi_tau, tau_inv, tau_one) = diag([12, 10, 8]);
            let (pi_z, z_inv, z_one) = diag([2, 0, -2]);
            KernelTable {
                pi_tau,
                pi_tau_inv_delta: tau_inv,
                pi_z,
                pi_z_inv_delta: z_inv,
                pi_tau_one: tau_one,
                pi_z_one: z_one,
                reg: [[Z, e(-2 * n), Z], [Z, e(2), Z], [Z, e(-2), Z]],
                sing: [
                    [e(-2 * n), Z, Z],
                    [Z, ej(0, 1), e(-1)],
                    [Z, ej(n, -1), e(1)],
                ],
                scale_num: 1,
                scale_den: 2 * n,
                pi_pow: -1,
                i_pow: 0,
            }
        }
        _ => unreachable!("d must be 8 or 24"),
    }
}
