//! Outward-rounded interval arithmetic over dyadic bignum floats, and
//! axis-aligned complex boxes. Foundation for every certified claim in the
//! crate: all results of arithmetic here enclose the exact image.

mod bigfloat;
mod complex;
mod elem;
mod interval;

pub use bigfloat::{parse_decimal, BigFloat, Round};
pub use complex::{atan_interval, ComplexBox};
pub use elem::{cover_uniform, geometric_tail, horner, ln2_enclosure, pi_enclosure, pow2, RigorCtx};
pub use interval::Interval;

#[cfg(test)]
mod proptests {
    use super::*;
    use proptest::prelude::*;

    fn small_f64() -> impl Strategy<Value = f64> {
        prop_oneof![
            -100.0..100.0f64,
            -1.0..1.0f64,
            Just(0.0),
            Just(1.0),
            Just(-1.0),
        ]
    }

    fn iv_pair() -> impl Strategy<Value = (Interval, f64)> {
        (small_f64(), 0.0..1.0f64, 0.0..1.0f64).prop_map(|(a, w, t)| {
            let lo = a;
            let hi = a + w;
            let p = lo + t * (hi - lo);
            (
                Interval::new(BigFloat::from_f64(lo), BigFloat::from_f64(hi)),
                p,
            )
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        // Containment: sampled points map into the interval image, checked
        // against the f64 point computation (exact for +,-,* on dyadics).
        #[test]
        fn containment_add((a, pa) in iv_pair(), (b, pb) in iv_pair()) {
            let r = a.add(&b, 96);
            prop_assert!(r.contains(&BigFloat::from_f64(pa).add(&BigFloat::from_f64(pb), 256, Round::Floor)));
        }

        #[test]
        fn containment_mul((a, pa) in iv_pair(), (b, pb) in iv_pair()) {
            let r = a.mul(&b, 96);
            let exact = BigFloat::from_f64(pa).mul(&BigFloat::from_f64(pb), 512, Round::Floor);
            prop_assert!(r.contains(&exact));
        }

        #[test]
        fn monotonicity_of_enclosure((a, _) in iv_pair(), (b, _) in iv_pair()) {
            let wide_a = a.widen(&BigFloat::from_f64(0.25), 96);
            let wide_b = b.widen(&BigFloat::from_f64(0.25), 96);
            let inner = a.mul(&b, 96);
            let outer = wide_a.mul(&wide_b, 96);
            prop_assert!(outer.contains_interval(&inner));
        }

        #[test]
        fn containment_box_mul((a, pa) in iv_pair(), (b, pb) in iv_pair(),
                               (c, pc) in iv_pair(), (d, pd) in iv_pair()) {
            let z = ComplexBox::new(a, b);
            let w = ComplexBox::new(c, d);
            let r = z.mul(&w, 96);
            // (pa + pb i)(pc + pd i)
            let re = pa * pc - pb * pd;
            let im = pa * pd + pb * pc;
            // f64 product of dyadics is not exact; redo in BigFloat.
            let e_re = BigFloat::from_f64(pa).mul(&BigFloat::from_f64(pc), 512, Round::Floor)
                .sub(&BigFloat::from_f64(pb).mul(&BigFloat::from_f64(pd), 512, Round::Floor), 512, Round::Floor);
            let e_im = BigFloat::from_f64(pa).mul(&BigFloat::from_f64(pd), 512, Round::Floor)
                .add(&BigFloat::from_f64(pb).mul(&BigFloat::from_f64(pc), 512, Round::Floor), 512, Round::Floor);
            let _ = (re, im);
            prop_assert!(r.contains_point(&e_re, &e_im));
        }

        // Midpoint consistency: point inputs give near-zero widths.
        #[test]
        fn width_shrinks_on_points(x in -50.0..50.0f64, y in -50.0..50.0f64) {
            let a = Interval::from_f64(x);
            let b = Interval::from_f64(y);
            let w = a.mul(&b, 128).width(64).to_f64();
            prop_assert!(w.abs() <= 1e-30 * (1.0 + x.abs() * y.abs()));
        }

        #[test]
        fn exp_containment(x in -5.0..5.0f64) {
            let ctx = RigorCtx::new(96);
            let e = ctx.exp(&Interval::from_f64(x));
            let approx = libm::exp(x);
            prop_assert!(e.lo.to_f64() <= approx * (1.0 + 1e-12) + 1e-300);
            prop_assert!(e.hi.to_f64() >= approx * (1.0 - 1e-12));
        }

        #[test]
        fn log_inverts_exp(x in 0.02..50.0f64) {
            let ctx = RigorCtx::new(96);
            let l = ctx.log(&Interval::from_f64(x)).unwrap();
            let back = ctx.exp(&l);
            prop_assert!(back.lo.to_f64() <= x && x <= back.hi.to_f64());
        }
    }
}
