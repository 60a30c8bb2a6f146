//! The six-dimensional representation of `PSL_2(Z)`, reduction modulo the
//! ideal `I = (T-I)^2 R + S(T-I)^2 R` with explicit witness vectors, and the
//! residue functionals `phi`, `phi_+`, `phi_-`.
//!
//! The basis of `R/I` is `M = (I, T, TS, S, ST, STS)`; the first row of
//! `sigma(gamma)` reads off the coordinates of `gamma` in this basis, and the
//! witness vectors `N_1, N_2` satisfy the exact reconstruction
//! `M . r = sigma(r) M + (T-I)^2 N_1(r) + S(T-I)^2 N_2(r)`.

use super::words::{rational, GroupAlgebraElement, Letter, PslWord};
use alloc::vec;
use num_rational::BigRational;
use num_traits::Zero;

/// 6x6 integer matrix, row-major.
pub type Mat6 = [[i128; 6]; 6];

pub const SIGMA_S: Mat6 = [
    [0, 0, 0, 1, 0, 0],
    [0, 0, 1, 0, 0, 0],
    [0, 1, 0, 0, 0, 0],
    [1, 0, 0, 0, 0, 0],
    [0, 0, 0, 0, 0, 1],
    [0, 0, 0, 0, 1, 0],
];

pub const SIGMA_T: Mat6 = [
    [0, 1, 0, 0, 0, 0],
    [-1, 2, 0, 0, 0, 0],
    [2, 0, 0, 0, 0, -1],
    [0, 0, 0, 0, 1, 0],
    [0, 0, 0, -1, 2, 0],
    [0, 0, -1, 2, 0, 0],
];

/// Conjugator between rho and sigma: sigma = g^{-1} rho g.
pub const G_RHO_SIGMA: Mat6 = [
    [1, 0, 1, -1, 0, -1],
    [1, 0, 0, -1, 0, 0],
    [1, -1, 0, -1, 1, 0],
    [3, -1, -1, 3, -1, -1],
    [-2, 0, 2, -2, 0, 2],
    [2, -2, 0, 2, -2, 0],
];

pub fn mat6_mul(a: &Mat6, b: &Mat6) -> Mat6 {
    let mut out = [[0i128; 6]; 6];
    for i in 0..6 {
        for k in 0..6 {
            let aik = a[i][k];
            if aik == 0 {
                continue;
            }
            for j in 0..6 {
                out[i][j] += aik * b[k][j];
            }
        }
    }
    out
}

pub const MAT6_I: Mat6 = {
    let mut m = [[0i128; 6]; 6];
    let mut i = 0;
    while i < 6 {
        m[i][i] = 1;
        i += 1;
    }
    m
};

/// sigma of a reduced word (exact homomorphism).
pub fn sigma_of(w: &PslWord) -> Mat6 {
    let sigma_y = mat6_mul(&SIGMA_S, &SIGMA_T);
    let sigma_y2 = mat6_mul(&sigma_y, &sigma_y);
    let mut m = MAT6_I;
    for &l in w.letters() {
        m = mat6_mul(
            &m,
            match l {
                Letter::X => &SIGMA_S,
                Letter::Y => &sigma_y,
                Letter::Y2 => &sigma_y2,
            },
        );
    }
    m
}

/// rho of a reduced word: block diag(rho_3, [[1, v],[0, rho_2]]) built from
/// the 2x2 matrix entries and the v-cocycle.
pub fn rho_of(w: &PslWord) -> Mat6 {
    // rho_3 from the matrix entries.
    let m = w.matrix();
    let (a, b, c, d) = (m[0], m[1], m[2], m[3]);
    let rho3 = [
        [a * a, 2 * a * b, -b * b],
        [a * c, a * d + b * c, -b * d],
        [-c * c, -2 * c * d, d * d],
    ];
    // rho_2 and v by folding the letters (v(g g') = v(g) rho2(g') + v(g')).
    let rho2_s = [[0i128, -1], [-1, 0]];
    let rho2_t = [[-1i128, 1], [0, 1]];
    let mul2 = |a: &[[i128; 2]; 2], b: &[[i128; 2]; 2]| {
        [
            [
                a[0][0] * b[0][0] + a[0][1] * b[1][0],
                a[0][0] * b[0][1] + a[0][1] * b[1][1],
            ],
            [
                a[1][0] * b[0][0] + a[1][1] * b[1][0],
                a[1][0] * b[0][1] + a[1][1] * b[1][1],
            ],
        ]
    };
    let vapply = |v: &[i128; 2], m: &[[i128; 2]; 2]| {
        [
            v[0] * m[0][0] + v[1] * m[1][0],
            v[0] * m[0][1] + v[1] * m[1][1],
        ]
    };
    let mut rho2 = [[1i128, 0], [0, 1]];
    let mut v = [0i128, 0];
    // letter-level generators: x = S (v=0), y = ST:
    //   v(ST) = v(S) rho2(T) + v(T) = v(T) = (1, -1).
    let rho2_y = mul2(&rho2_s, &rho2_t);
    let v_y = [1i128, -1];
    let rho2_y2 = mul2(&rho2_y, &rho2_y);
    let v_y2 = {
        let t = vapply(&v_y, &rho2_y);
        [t[0] + v_y[0], t[1] + v_y[1]]
    };
    for &l in w.letters() {
        let (g2, gv): (&[[i128; 2]; 2], [i128; 2]) = match l {
            Letter::X => (&rho2_s, [0, 0]),
            Letter::Y => (&rho2_y, v_y),
            Letter::Y2 => (&rho2_y2, v_y2),
        };
        let t = vapply(&v, g2);
        v = [t[0] + gv[0], t[1] + gv[1]];
        rho2 = mul2(&rho2, g2);
    }
    let mut out = [[0i128; 6]; 6];
    for i in 0..3 {
        for j in 0..3 {
            out[i][j] = rho3[i][j];
        }
    }
    out[3][3] = 1;
    out[3][4] = v[0];
    out[3][5] = v[1];
    for i in 0..2 {
        for j in 0..2 {
            out[4 + i][4 + j] = rho2[i][j];
        }
    }
    out
}

/// The basis words M_1..M_6 = (I, T, TS, S, ST, STS).
pub fn basis_words() -> [PslWord; 6] {
    let t = PslWord::t();
    let s = PslWord::s();
    [
        PslWord::identity(),
        t.clone(),
        t.mul(&s),
        s.clone(),
        s.mul(&t),
        s.mul(&t).mul(&s),
    ]
}

/// Vector of six group-algebra elements.
pub type RVec6 = [GroupAlgebraElement; 6];

fn rvec_zero() -> RVec6 {
    core::array::from_fn(|_| GroupAlgebraElement::zero())
}

fn rvec_add(a: &RVec6, b: &RVec6) -> RVec6 {
    core::array::from_fn(|i| a[i].add(&b[i]))
}

fn rvec_mul_word_right(a: &RVec6, w: &PslWord) -> RVec6 {
    core::array::from_fn(|i| a[i].mul_word_right(w))
}

fn rvec_scale(a: &RVec6, c: &BigRational) -> RVec6 {
    core::array::from_fn(|i| a[i].scale(c))
}

/// sigma(gamma) . N (integer matrix times vector of algebra elements).
fn mat6_apply_rvec(m: &Mat6, n: &RVec6) -> RVec6 {
    core::array::from_fn(|i| {
        let mut acc = GroupAlgebraElement::zero();
        for (j, nj) in n.iter().enumerate() {
            if m[i][j] != 0 {
                acc = acc.add(&nj.scale(&rational(m[i][j] as i64, 1)));
            }
        }
        acc
    })
}

/// Witness pair for one group element, built letter-by-letter through the
/// cocycle law `N(r1 r2) = sigma(r1) N(r2) + N(r1) . r2`.
fn witness_of_word(w: &PslWord) -> (RVec6, RVec6) {
    // Base cases: N_i(S) = 0;
    // N_1(T) = (0,1,0,0,0,T^{-1}S), N_2(T) = (0,0,T^{-1}S,0,1,0).
    let t_inv_s = PslWord::t_inv().mul(&PslWord::s());
    let one = GroupAlgebraElement::from_word(PslWord::identity());
    let tis = GroupAlgebraElement::from_word(t_inv_s);
    let mut n1_t = rvec_zero();
    n1_t[1] = one.clone();
    n1_t[5] = tis.clone();
    let mut n2_t = rvec_zero();
    n2_t[2] = tis;
    n2_t[4] = one;
    // Letter-level tables: x = S has zero witnesses; y = ST, y^2 = STST via
    // cocycle from S and T.
    let s = PslWord::s();
    let t = PslWord::t();
    let cocycle = |na: &RVec6, wa: &PslWord, nb: &RVec6, wb: &PslWord| -> RVec6 {
        // N(wa wb) = sigma(wa) N(wb) + N(wa) . wb
        let _ = wb;
        rvec_add(&mat6_apply_rvec(&sigma_of(wa), nb), &rvec_mul_word_right(na, wb))
    };
    let n_s = rvec_zero();
    let (n1_y, n2_y) = (
        cocycle(&n_s, &s, &n1_t, &t),
        cocycle(&n_s, &s, &n2_t, &t),
    );
    let y = PslWord::y();
    let (n1_y2, n2_y2) = (
        cocycle(&n1_y, &y, &n1_y, &y),
        cocycle(&n2_y, &y, &n2_y, &y),
    );
    let mut acc1 = rvec_zero();
    let mut acc2 = rvec_zero();
    let mut prefix = PslWord::identity();
    for &l in w.letters() {
        let (letter_word, ln1, ln2) = match l {
            Letter::X => (PslWord::x(), rvec_zero(), rvec_zero()),
            Letter::Y => (PslWord::y(), n1_y.clone(), n2_y.clone()),
            Letter::Y2 => (
                PslWord::y().mul(&PslWord::y()),
                n1_y2.clone(),
                n2_y2.clone(),
            ),
        };
        // N(prefix . letter) = sigma(prefix) N(letter) + N(prefix) . letter
        acc1 = rvec_add(
            &mat6_apply_rvec(&sigma_of(&prefix), &ln1),
            &rvec_mul_word_right(&acc1, &letter_word),
        );
        acc2 = rvec_add(
            &mat6_apply_rvec(&sigma_of(&prefix), &ln2),
            &rvec_mul_word_right(&acc2, &letter_word),
        );
        prefix = prefix.mul(&letter_word);
    }
    (acc1, acc2)
}

/// Result of reduction modulo I.
#[derive(Debug, Clone)]
pub struct ReductionResult {
    /// Coordinates on (I, T, TS, S, ST, STS).
    pub coords: [BigRational; 6],
    /// Full witness vectors for the vector reconstruction identity.
    pub witness1: RVec6,
    pub witness2: RVec6,
}

impl ReductionResult {
    /// Scalar witness n_1: the first component of the vector witness, which
    /// appears in `r = sum_i c_i M_i + (T-I)^2 n_1 + S(T-I)^2 n_2`.
    pub fn scalar_witness1(&self) -> &GroupAlgebraElement {
        &self.witness1[0]
    }

    pub fn scalar_witness2(&self) -> &GroupAlgebraElement {
        &self.witness2[0]
    }
}

/// Reduce a group-algebra element modulo I, with witnesses. The coordinates
/// are the first row of sigma extended linearly; the witnesses satisfy the
/// reconstruction identity exactly (see [`verify_reduction`]).
pub fn reduce_mod_i(r: &GroupAlgebraElement) -> ReductionResult {
    let mut coords: [BigRational; 6] = core::array::from_fn(|_| BigRational::zero());
    let mut witness1 = rvec_zero();
    let mut witness2 = rvec_zero();
    for (w, c) in &r.terms {
        let sig = sigma_of(w);
        for j in 0..6 {
            if sig[0][j] != 0 {
                coords[j] += c * rational(sig[0][j] as i64, 1);
            }
        }
        let (n1, n2) = witness_of_word(w);
        witness1 = rvec_add(&witness1, &rvec_scale(&n1, c));
        witness2 = rvec_add(&witness2, &rvec_scale(&n2, c));
    }
    ReductionResult {
        coords,
        witness1,
        witness2,
    }
}

/// Check `M . r = sigma(r) M + (T-I)^2 N_1 + S(T-I)^2 N_2` exactly, where
/// sigma(r) M is assembled from the full sigma matrix of r.
pub fn verify_reduction(r: &GroupAlgebraElement, red: &ReductionResult) -> bool {
    let basis = basis_words();
    let t = PslWord::t();
    let s = PslWord::s();
    // (T - I)^2 = T^2 - 2T + I as an algebra element; left factors.
    let mut t_minus_i_sq = GroupAlgebraElement::zero();
    t_minus_i_sq.add_term(t.pow(2), rational(1, 1));
    t_minus_i_sq.add_term(t.clone(), rational(-2, 1));
    t_minus_i_sq.add_term(PslWord::identity(), rational(1, 1));
    let s_t_minus_i_sq = t_minus_i_sq.mul_word_left(&s);

    // sigma(r) extended linearly (rational matrix).
    let mut sigma_lin = vec![vec![BigRational::zero(); 6]; 6];
    for (w, c) in &r.terms {
        let m = sigma_of(w);
        for i in 0..6 {
            for j in 0..6 {
                if m[i][j] != 0 {
                    sigma_lin[i][j] += c * rational(m[i][j] as i64, 1);
                }
            }
        }
    }
    for i in 0..6 {
        // lhs = M_i . r
        let mut lhs = GroupAlgebraElement::zero();
        for (w, c) in &r.terms {
            lhs.add_term(basis[i].mul(w), c.clone());
        }
        // rhs = sum_j sigma_lin[i][j] M_j + (T-I)^2 N1_i + S(T-I)^2 N2_i
        let mut rhs = GroupAlgebraElement::zero();
        for (j, bw) in basis.iter().enumerate() {
            if !sigma_lin[i][j].is_zero() {
                rhs.add_term(bw.clone(), sigma_lin[i][j].clone());
            }
        }
        rhs = rhs
            .add(&t_minus_i_sq.mul(&red.witness1[i]))
            .add(&s_t_minus_i_sq.mul(&red.witness2[i]));
        if lhs != rhs {
            return false;
        }
    }
    true
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PhiVariant {
    Plain,
    Plus,
    Minus,
}

/// The residue functional: phi(T) = 1 and zero on the other basis words;
/// phi_eps reduces further modulo I_eps where S acts on the left by -eps.
pub fn phi(r: &GroupAlgebraElement, variant: PhiVariant) -> BigRational {
    let red = reduce_mod_i(r);
    let c = &red.coords;
    match variant {
        PhiVariant::Plain => c[1].clone(),
        // mod I_+: S == -I, so (I,T,TS,S,ST,STS) -> (I,T,TS,-I,-T,-TS).
        PhiVariant::Plus => &c[1] - &c[4],
        PhiVariant::Minus => &c[1] + &c[4],
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grpalg::words::parse_word;

    fn word(s: &str) -> PslWord {
        parse_word(s).unwrap()
    }

    fn elem(w: PslWord) -> GroupAlgebraElement {
        GroupAlgebraElement::from_word(w)
    }

    #[test]
    fn sigma_relations() {
        let s2 = mat6_mul(&SIGMA_S, &SIGMA_S);
        assert_eq!(s2, MAT6_I);
        let st = mat6_mul(&SIGMA_S, &SIGMA_T);
        let st3 = mat6_mul(&mat6_mul(&st, &st), &st);
        assert_eq!(st3, MAT6_I);
    }

    #[test]
    fn sigma_t_first_row() {
        assert_eq!(SIGMA_T[0], [0, 1, 0, 0, 0, 0]);
    }

    #[test]
    fn sigma_homomorphism_small() {
        let words = [
            word("T"),
            word("S"),
            word("T S T"),
            word("S T^-2 S T"),
            word("T^3 S"),
        ];
        for a in &words {
            for b in &words {
                let lhs = sigma_of(&a.mul(b));
                let rhs = mat6_mul(&sigma_of(a), &sigma_of(b));
                assert_eq!(lhs, rhs);
            }
        }
    }

    #[test]
    fn rho_sigma_conjugate() {
        // sigma(gamma) g^{-1} ... = g^{-1} rho g: check rho g = g sigma.
        let words = [word("T"), word("S"), word("T S T^-1 S"), word("T^2 S T")];
        for w in &words {
            let lhs = mat6_mul(&rho_of(w), &G_RHO_SIGMA);
            let rhs = mat6_mul(&G_RHO_SIGMA, &sigma_of(w));
            assert_eq!(lhs, rhs, "word {}", w.display());
        }
    }

    #[test]
    fn basis_reduction_unit_vectors() {
        for (i, w) in basis_words().iter().enumerate() {
            let red = reduce_mod_i(&elem(w.clone()));
            for j in 0..6 {
                let expect = if i == j { rational(1, 1) } else { rational(0, 1) };
                assert_eq!(red.coords[j], expect, "M_{i} coord {j}");
            }
            assert!(red.scalar_witness1().is_zero());
            assert!(red.scalar_witness2().is_zero());
        }
    }

    #[test]
    fn sigma_first_row_of_basis() {
        for (i, w) in basis_words().iter().enumerate() {
            let m = sigma_of(w);
            for j in 0..6 {
                assert_eq!(m[0][j], i128::from(i == j), "M_{i}");
            }
        }
    }

    #[test]
    fn t_squared_reduction() {
        // T^2 = -I + 2T + (T-I)^2: coords (-1,2,0,0,0,0), nonzero witness.
        let red = reduce_mod_i(&elem(word("T^2")));
        assert_eq!(red.coords[0], rational(-1, 1));
        assert_eq!(red.coords[1], rational(2, 1));
        for j in 2..6 {
            assert_eq!(red.coords[j], rational(0, 1));
        }
        assert!(!red.scalar_witness1().is_zero());
        assert!(verify_reduction(&elem(word("T^2")), &red));
        // Scalar identity: T^2 = -I + 2T + (T-I)^2 * 1.
        assert_eq!(*red.scalar_witness1(), elem(PslWord::identity()));
        assert!(red.scalar_witness2().is_zero());
    }

    #[test]
    fn st_squared_reduction() {
        // ST^2 = 2ST - S + S(T-1)^2: witness lives on the S(T-I)^2 side.
        let r = elem(word("S T^2"));
        let red = reduce_mod_i(&r);
        assert_eq!(red.coords[3], rational(-1, 1));
        assert_eq!(red.coords[4], rational(2, 1));
        assert!(!red.scalar_witness2().is_zero());
        assert!(red.scalar_witness1().is_zero());
        assert_eq!(*red.scalar_witness2(), elem(PslWord::identity()));
        assert!(verify_reduction(&r, &red));
    }

    #[test]
    fn reconstruction_random_words() {
        // Deterministic pseudo-random words; exact identity each time.
        let mut state = 0x9e3779b97f4a7c15u64;
        let mut next = move || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            state
        };
        for _ in 0..60 {
            let mut w = PslWord::identity();
            let len = (next() % 10) as usize + 1;
            for _ in 0..len {
                match next() % 3 {
                    0 => w = w.mul(&PslWord::s()),
                    1 => w = w.mul(&PslWord::t()),
                    _ => w = w.mul(&PslWord::t_inv()),
                }
            }
            let r = elem(w);
            let red = reduce_mod_i(&r);
            assert!(verify_reduction(&r, &red));
        }
    }

    #[test]
    fn cocycle_law_on_pairs() {
        let pairs = [
            (word("T"), word("S T")),
            (word("T^2 S"), word("T^-1")),
            (word("S T S"), word("T S")),
        ];
        for (a, b) in pairs {
            let (n1_ab, n2_ab) = witness_of_word(&a.mul(&b));
            let (n1_a, n2_a) = witness_of_word(&a);
            let (n1_b, n2_b) = witness_of_word(&b);
            let sig_a = sigma_of(&a);
            let exp1 = rvec_add(&mat6_apply_rvec(&sig_a, &n1_b), &rvec_mul_word_right(&n1_a, &b));
            let exp2 = rvec_add(&mat6_apply_rvec(&sig_a, &n2_b), &rvec_mul_word_right(&n2_a, &b));
            for i in 0..6 {
                assert_eq!(n1_ab[i], exp1[i]);
                assert_eq!(n2_ab[i], exp2[i]);
            }
        }
    }

    #[test]
    fn phi_table_values() {
        let check = |s: &str, plus: i64, minus: i64| {
            let r = elem(word(s));
            assert_eq!(phi(&r, PhiVariant::Plus), rational(plus, 1), "{s} plus");
            assert_eq!(phi(&r, PhiVariant::Minus), rational(minus, 1), "{s} minus");
        };
        check("S", 0, 0);
        check("S T", -1, 1);
        check("T^2", 2, 2);
        check("T^-1", -1, -1);
        check("T^-1 S", 0, 0);
        check("T S T", 0, 0);
        check("S T^-1", 1, -1);
        check("T^-1 S T^-1", 0, 0);
        check("T S T^-1", 2, -2);
        check("T^2 S T", 1, -1);
        // plain phi on basis words
        assert_eq!(phi(&elem(word("T")), PhiVariant::Plain), rational(1, 1));
        assert_eq!(phi(&elem(word("S")), PhiVariant::Plain), rational(0, 1));
        assert_eq!(phi(&elem(PslWord::identity()), PhiVariant::Plain), rational(0, 1));
    }

    #[test]
    fn phi_annihilates_ideal_images() {
        // phi_eps(r' iota(g)) = 0 for the generators g of the dual ideals
        // and r' in {I, T, TS}.
        for eps in [1i64, -1] {
            let variant = if eps == 1 { PhiVariant::Plus } else { PhiVariant::Minus };
            // g1 = T - 2 + T^-1 - 2 eps S, g2 = I - eps STS
            let mut g1 = GroupAlgebraElement::zero();
            g1.add_term(word("T"), rational(1, 1));
            g1.add_term(PslWord::identity(), rational(-2, 1));
            g1.add_term(word("T^-1"), rational(1, 1));
            g1.add_term(word("S"), rational(-2 * eps, 1));
            let mut g2 = GroupAlgebraElement::zero();
            g2.add_term(PslWord::identity(), rational(1, 1));
            g2.add_term(word("S T S"), rational(-eps, 1));
            for rp in [PslWord::identity(), word("T"), word("T S")] {
                for g in [&g1, &g2] {
                    let val = phi(&GroupAlgebraElement::from_word(rp.clone()).mul(&g.iota()), variant);
                    assert!(val.is_zero(), "eps={eps} r'={}", rp.display());
                }
            }
        }
    }
}

