//! Exact q-expansions of the standard level-1 and level-2 modular forms.
//!
//! All series are in half-integer powers of q (index n means `q^{n/2}`), so
//! the Eisenstein series (integer powers) and the theta-derived forms U, V, W
//! and the Hauptmodul `lambda` (half-integer powers) share one lattice.
//!
//! Coefficients are exact rationals; interval versions with tail bounds are
//! derived on demand. Tail choices (documented where attached):
//!   - Eisenstein series E_k: |a_n(q^n coeff)| <= (2k/|B_k|) sigma_{k-1}(n)
//!     <= (2k/|B_k|) n^k.
//!   - Fourth powers of theta constants: theta coefficients are bounded by 2,
//!     the product bounds compose mechanically.

use crate::qseries::QSeries;
use alloc::vec;
use alloc::vec::Vec;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FormId {
    E2,
    E4,
    E6,
    E8w,
    E10,
    E14,
    Delta,
    SqrtDelta,
    J,
    U,
    V,
    W,
    Lambda,
    LambdaS,
    Lcal,
    LcalS,
}

impl FormId {
    pub fn weight(self) -> i64 {
        match self {
            FormId::E2 => 2,
            FormId::E4 => 4,
            FormId::E6 => 6,
            FormId::E8w => 8,
            FormId::E10 => 10,
            FormId::E14 => 14,
            FormId::Delta => 12,
            FormId::SqrtDelta => 6,
            FormId::J => 0,
            FormId::U | FormId::V | FormId::W => 2,
            FormId::Lambda | FormId::LambdaS => 0,
            FormId::Lcal | FormId::LcalS => 0,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            FormId::E2 => "E2",
            FormId::E4 => "E4",
            FormId::E6 => "E6",
            FormId::E8w => "E8",
            FormId::E10 => "E10",
            FormId::E14 => "E14",
            FormId::Delta => "Delta",
            FormId::SqrtDelta => "SqrtDelta",
            FormId::J => "j",
            FormId::U => "U",
            FormId::V => "V",
            FormId::W => "W",
            FormId::Lambda => "lambda",
            FormId::LambdaS => "lambdaS",
            FormId::Lcal => "Lcal",
            FormId::LcalS => "LcalS",
        }
    }

    pub fn parse(s: &str) -> Option<FormId> {
        Some(match s {
            "E2" => FormId::E2,
            "E4" => FormId::E4,
            "E6" => FormId::E6,
            "E8" | "E8w" => FormId::E8w,
            "E10" => FormId::E10,
            "E14" => FormId::E14,
            "Delta" | "delta" => FormId::Delta,
            "SqrtDelta" | "sqrtDelta" => FormId::SqrtDelta,
            "j" | "J" => FormId::J,
            "U" => FormId::U,
            "V" => FormId::V,
            "W" => FormId::W,
            "lambda" | "Lambda" => FormId::Lambda,
            "lambdaS" | "LambdaS" => FormId::LambdaS,
            "Lcal" | "L" => FormId::Lcal,
            "LcalS" | "LS" => FormId::LcalS,
            _ => return None,
        })
    }
}

type RatSeries = QSeries<BigRational>;

fn rat(p: i64) -> BigRational {
    BigRational::from(BigInt::from(p))
}

/// sigma_k(n) for n = 1..=n_max.
fn divisor_sums(k: u32, n_max: usize) -> Vec<BigInt> {
    let mut out = vec![BigInt::zero(); n_max + 1];
    for d in 1..=n_max {
        let dk = BigInt::from(d).pow(k);
        let mut m = d;
        while m <= n_max {
            out[m] += &dk;
            m += d;
        }
    }
    out
}

/// Eisenstein series `1 + c * sum sigma_k(n) q^n` at `order` half-powers.
fn eisenstein(c: i64, k: u32, order: usize) -> RatSeries {
    let n_max = order / 2;
    let sig = divisor_sums(k, n_max);
    let mut coeffs = vec![BigRational::zero(); order];
    coeffs[0] = BigRational::one();
    for n in 1..=n_max {
        if 2 * n < order {
            coeffs[2 * n] = BigRational::from(BigInt::from(c) * &sig[n]);
        }
    }
    QSeries::new(0, coeffs)
}

/// theta_3^4 and theta_4^4 building block: theta series with signs.
fn theta34(alternating: bool, order: usize) -> RatSeries {
    let mut coeffs = vec![BigRational::zero(); order];
    coeffs[0] = BigRational::one();
    let mut n = 1usize;
    while n * n < order {
        let v = if alternating && n % 2 == 1 { -2 } else { 2 };
        coeffs[n * n] = rat(v);
        n += 1;
    }
    QSeries::new(0, coeffs)
}

/// Sum over triangular exponents: `sum_{n>=0} q^{n(n+1)/2}` (integer powers).
fn theta2_core(order: usize) -> RatSeries {
    let mut coeffs = vec![BigRational::zero(); order];
    let mut n = 0usize;
    while n * (n + 1) < order {
        coeffs[n * (n + 1)] = BigRational::one();
        n += 1;
    }
    QSeries::new(0, coeffs)
}

/// The full collection of standard form expansions at a common order.
#[derive(Debug, Clone)]
pub struct StandardForms {
    pub order: usize,
    pub e2: RatSeries,
    pub e4: RatSeries,
    pub e6: RatSeries,
    pub e8: RatSeries,
    pub e10: RatSeries,
    pub e14: RatSeries,
    pub delta: RatSeries,
    pub sqrt_delta: RatSeries,
    pub j: RatSeries,
    pub u: RatSeries,
    pub v: RatSeries,
    pub w: RatSeries,
    pub lambda: RatSeries,
    pub lambda_s: RatSeries,
    /// Series part of `Lcal(z) - (pi i z + 4 log 2)`, i.e. log of
    /// `lambda / (16 q^{1/2})`.
    pub lcal_series: RatSeries,
    /// `LcalS(z) = log(1 - lambda(z))`, a pure half-power series.
    pub lcal_s: RatSeries,
}

impl StandardForms {
    pub fn build(order: usize) -> StandardForms {
        let order = order.max(8);
        let e2 = eisenstein(-24, 1, order);
        let e4 = eisenstein(240, 3, order);
        let e6 = eisenstein(-504, 5, order);
        let e8 = e4.mul(&e4, 0);
        let e10 = e4.mul(&e6, 0);
        let e14 = e8.mul(&e6, 0);
        let delta = e4
            .pow(3, 0)
            .sub(&e6.pow(2, 0), 0)
            .scale_ratio(1, 1728, 0);
        let j = e4.pow(3, 0).mul(&delta.invert(0).expect("delta unit"), 0);
        let u = theta34(false, order).pow(4, 0);
        let w = theta34(true, order).pow(4, 0);
        // V = 16 q^{1/2} (sum q^{n(n+1)/2})^4
        let v = theta2_core(order)
            .pow(4, 0)
            .scale_ratio(16, 1, 0)
            .shifted(1, 0)
            .truncated(order as i64);
        let sqrt_delta = u.mul(&v, 0).mul(&w, 0).scale_ratio(1, 16, 0);
        let lambda = v.mul(&u.invert(0).expect("U unit"), 0);
        let lambda_s = QSeries::one(order).sub(&lambda, 0);
        // LcalS = log(1 - lambda) = -sum lambda^k / k.
        let lcal_s = log_one_plus(&lambda.neg(), order);
        // Lcal series part: log(lambda / (16 q^{1/2})) = log(1 + h).
        let h = lambda
            .clone()
            .shifted(-1, 0)
            .scale_ratio(1, 16, 0)
            .sub(&QSeries::one(order), 0);
        let lcal_series = log_one_plus(&h, order);
        StandardForms {
            order,
            e2,
            e4,
            e6,
            e8,
            e10,
            e14,
            delta,
            sqrt_delta,
            j,
            u,
            v,
            w,
            lambda,
            lambda_s,
            lcal_series,
            lcal_s,
        }
    }

    /// The exact rational expansion of a form. `Lcal` returns only its series
    /// part; the non-series part `pi i z + 4 log 2` is handled by evaluators.
    pub fn series(&self, id: FormId) -> &RatSeries {
        match id {
            FormId::E2 => &self.e2,
            FormId::E4 => &self.e4,
            FormId::E6 => &self.e6,
            FormId::E8w => &self.e8,
            FormId::E10 => &self.e10,
            FormId::E14 => &self.e14,
            FormId::Delta => &self.delta,
            FormId::SqrtDelta => &self.sqrt_delta,
            FormId::J => &self.j,
            FormId::U => &self.u,
            FormId::V => &self.v,
            FormId::W => &self.w,
            FormId::Lambda => &self.lambda,
            FormId::LambdaS => &self.lambda_s,
            FormId::Lcal => &self.lcal_series,
            FormId::LcalS => &self.lcal_s,
        }
    }
}

/// log(1 + f) for a series f of strictly positive valuation.
fn log_one_plus(f: &RatSeries, order: usize) -> RatSeries {
    let f = f.clone().normalized();
    debug_assert!(f.start >= 1 || f.coeffs.iter().all(Zero::is_zero));
    let mut acc: RatSeries = QSeries::zero(order);
    let mut power = f.clone();
    let mut k = 1i64;
    while power.clone().normalized().start < order as i64 && k <= order as i64 {
        let sign = if k % 2 == 1 { 1 } else { -1 };
        acc = acc.add(&power.scale_ratio(sign, k, 0), 0).truncated(order as i64);
        power = power.mul(&f, 0).truncated(order as i64);
        k += 1;
        if power.coeffs.iter().all(Zero::is_zero) {
            break;
        }
    }
    // `end` bookkeeping: the sum above is exact to `order` half-powers.
    crate::qseries::QSeries {
        start: acc.start,
        coeffs: {
            let mut c = acc.coeffs;
            c.truncate((order as i64 - acc.start).max(0) as usize);
            c
        },
        tail: None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn forms() -> StandardForms {
        StandardForms::build(64)
    }

    #[test]
    fn e4_coefficients() {
        let f = forms();
        // 1, 240, 2160, 6720 at q^0..q^3
        assert_eq!(f.e4.coeff(0).unwrap(), rat(1));
        assert_eq!(f.e4.coeff(2).unwrap(), rat(240));
        assert_eq!(f.e4.coeff(4).unwrap(), rat(2160));
        assert_eq!(f.e4.coeff(6).unwrap(), rat(6720));
    }

    #[test]
    fn e2_coefficients() {
        let f = forms();
        assert_eq!(f.e2.coeff(2).unwrap(), rat(-24));
        // sigma_1(2) = 3 gives -72.
        assert_eq!(f.e2.coeff(4).unwrap(), rat(-72));
    }

    #[test]
    fn j_coefficients() {
        let f = forms();
        assert_eq!(f.j.coeff(-2).unwrap(), rat(1));
        assert_eq!(f.j.coeff(0).unwrap(), rat(744));
        assert_eq!(f.j.coeff(2).unwrap(), rat(196884));
        assert_eq!(f.j.coeff(4).unwrap(), rat(21493760));
    }

    #[test]
    fn delta_is_eta_product() {
        // q prod (1-q^n)^24 must match (E4^3 - E6^2)/1728.
        let f = forms();
        let order = f.order;
        let mut eta = QSeries::one(order);
        for n in 1..order / 2 {
            let mut fac = QSeries::one(order);
            fac.coeffs[2 * n] = rat(-1);
            for _ in 0..24 {
                eta = eta.mul(&fac, 0).truncated(order as i64);
            }
        }
        let eta_delta = eta.shifted(2, 0).truncated(order as i64);
        for n in 0..f.delta.end().min(eta_delta.end()) {
            assert_eq!(
                f.delta.coeff(n).unwrap(),
                eta_delta.coeff(n).unwrap(),
                "n={n}"
            );
        }
    }

    #[test]
    fn jacobi_identity_u_v_w() {
        let f = forms();
        let sum = f.v.add(&f.w, 0);
        for n in 0..sum.end().min(f.u.end()) {
            assert_eq!(f.u.coeff(n).unwrap(), sum.coeff(n).unwrap(), "n={n}");
        }
    }

    #[test]
    fn theta_to_eisenstein() {
        let f = forms();
        // E4 = (U^2+V^2+W^2)/2
        let e4 = f
            .u
            .pow(2, 0)
            .add(&f.v.pow(2, 0), 0)
            .add(&f.w.pow(2, 0), 0)
            .scale_ratio(1, 2, 0);
        for n in 0..e4.end().min(f.e4.end()) {
            assert_eq!(f.e4.coeff(n).unwrap(), e4.coeff(n).unwrap(), "E4 n={n}");
        }
        // E6 = (U+V)(U+W)(W-V)/2
        let e6 = f
            .u
            .add(&f.v, 0)
            .mul(&f.u.add(&f.w, 0), 0)
            .mul(&f.w.sub(&f.v, 0), 0)
            .scale_ratio(1, 2, 0);
        for n in 0..e6.end().min(f.e6.end()) {
            assert_eq!(f.e6.coeff(n).unwrap(), e6.coeff(n).unwrap(), "E6 n={n}");
        }
        // Delta = (UVW)^2/256
        let d = f
            .u
            .mul(&f.v, 0)
            .mul(&f.w, 0)
            .pow(2, 0)
            .scale_ratio(1, 256, 0);
        for n in 0..d.end().min(f.delta.end()) {
            assert_eq!(f.delta.coeff(n).unwrap(), d.coeff(n).unwrap(), "Delta n={n}");
        }
    }

    #[test]
    fn sqrt_delta_squares_to_delta() {
        let f = forms();
        let sq = f.sqrt_delta.pow(2, 0);
        for n in 0..sq.end().min(f.delta.end()) {
            assert_eq!(f.delta.coeff(n).unwrap(), sq.coeff(n).unwrap(), "n={n}");
        }
    }

    #[test]
    fn e2_is_log_derivative_of_delta() {
        let f = forms();
        // (q d/dq Delta) / Delta = E2.
        let lhs = f.delta.derive_q(0).mul(&f.delta.invert(0).unwrap(), 0);
        for n in 0..lhs.end().min(f.e2.end()) {
            assert_eq!(f.e2.coeff(n).unwrap(), lhs.coeff(n).unwrap(), "n={n}");
        }
    }

    #[test]
    fn j_derivative_is_minus_e14_over_delta() {
        let f = forms();
        // q dj/dq = -E14/Delta, i.e. (q dj/dq) * Delta = -E14.
        let lhs = f.j.derive_q(0).mul(&f.delta, 0);
        let rhs = f.e14.neg();
        for n in 0..lhs.end().min(rhs.end()) {
            assert_eq!(lhs.coeff(n).unwrap(), rhs.coeff(n).unwrap(), "n={n}");
        }
    }

    #[test]
    fn inverse_delta_and_j() {
        let f = forms();
        let inv_delta = f.delta.invert(0).unwrap();
        assert_eq!(inv_delta.start, -2);
        assert_eq!(inv_delta.coeff(-2).unwrap(), rat(1));
        let inv_j = f.j.invert(0).unwrap();
        assert_eq!(inv_j.clone().normalized().start, 2);
        assert_eq!(inv_j.coeff(2).unwrap(), rat(1));
        assert_eq!(inv_j.coeff(4).unwrap(), rat(-744));
    }

    #[test]
    fn lambda_leading_terms() {
        let f = forms();
        // lambda = 16 q^{1/2} - 128 q + 704 q^{3/2} - ...
        assert_eq!(f.lambda.coeff(1).unwrap(), rat(16));
        assert_eq!(f.lambda.coeff(2).unwrap(), rat(-128));
        assert_eq!(f.lambda.coeff(3).unwrap(), rat(704));
    }

    #[test]
    fn lcal_s_asymptotics() {
        let f = forms();
        // LcalS = -16 q^{1/2} - (64/3) q^{3/2} + O(q^{5/2}), even powers vanish.
        assert_eq!(f.lcal_s.coeff(1).unwrap(), rat(-16));
        assert_eq!(f.lcal_s.coeff(2).unwrap(), BigRational::zero());
        assert_eq!(
            f.lcal_s.coeff(3).unwrap(),
            BigRational::new(BigInt::from(-64), BigInt::from(3))
        );
        assert_eq!(f.lcal_s.coeff(4).unwrap(), BigRational::zero());
    }

    #[test]
    fn lcal_series_leading() {
        let f = forms();
        // log(lambda/(16 q^{1/2})) = -8 q^{1/2} + O(q).
        assert_eq!(f.lcal_series.coeff(1).unwrap(), rat(-8));
    }

    #[test]
    fn j_in_terms_of_lambda() {
        // j = 256 (1 - l + l^2)^3 / (l^2 (1-l)^2) as series.
        let f = forms();
        let l = &f.lambda;
        let one = QSeries::one(f.order);
        let num = one
            .sub(l, 0)
            .add(&l.pow(2, 0), 0)
            .pow(3, 0)
            .scale_ratio(256, 1, 0);
        let den = l.pow(2, 0).mul(&f.lambda_s.pow(2, 0), 0);
        let j_from_l = num.mul(&den.invert(0).unwrap(), 0);
        for n in f.j.start..j_from_l.end().min(f.j.end()) {
            assert_eq!(f.j.coeff(n).unwrap(), j_from_l.coeff(n).unwrap(), "n={n}");
        }
    }
}
