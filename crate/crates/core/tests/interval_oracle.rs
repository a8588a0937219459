//! Interval elementary functions and arithmetic against a multiprecision
//! oracle.

use astro_float::{BigFloat, Consts, RoundingMode};
use bridgewave::interval::decimal::{fmt_down, fmt_up, parse_down, parse_up};
use bridgewave::interval::elementary::{cos, exp, sin};
use bridgewave::{Interval, Scalar};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const PREC: usize = 192;
const RM: RoundingMode = RoundingMode::None;

fn big(x: f64) -> BigFloat {
    BigFloat::from_f64(x, PREC)
}

fn encloses<T: Scalar>(iv: Interval<T>, exact: &BigFloat) -> bool {
    big(iv.lo().to_f64_exact()) <= *exact && *exact <= big(iv.hi().to_f64_exact())
}

fn check_points<T: Scalar>(n: usize, seed: u64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut cc = Consts::new().expect("constants cache");
    let mut worst = 0f64;
    for i in 0..n {
        let x: f64 = match i % 4 {
            0 => rng.gen_range(-700.0..700.0),
            1 => rng.gen_range(-1.0..1.0),
            2 => rng.gen_range(-1e-8..1e-8),
            _ => rng.gen_range(-60.0..60.0),
        };
        let xt = T::lit(x);
        let xb = big(xt.to_f64_exact());
        let xi = Interval::point(xt);
        let e = exp(&xi);
        assert!(encloses(e, &xb.exp(PREC, RM, &mut cc)), "exp({x:e}) = {e:?}");
        if x.abs() < 100.0 {
            let s = sin(&xi);
            let c = cos(&xi);
            assert!(encloses(s, &xb.sin(PREC, RM, &mut cc)), "sin({x:e}) = {s:?}");
            assert!(encloses(c, &xb.cos(PREC, RM, &mut cc)), "cos({x:e}) = {c:?}");
            worst = worst.max(s.width().to_f64_exact()).max(c.width().to_f64_exact());
        }
    }
    assert!(worst < 1e3 * T::epsilon().to_f64_exact(), "enclosures too wide: {worst:e}");
}

#[test]
fn exp_sin_cos_contain_exact_values_f64() {
    check_points::<f64>(100_000, 1);
}

#[test]
fn exp_sin_cos_contain_exact_values_f32() {
    check_points::<f32>(20_000, 2);
}

#[test]
fn wide_arguments_contain_interior_values() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut cc = Consts::new().expect("constants cache");
    for _ in 0..2_000 {
        let a: f64 = rng.gen_range(-20.0..20.0);
        let b = a + rng.gen_range(0.0..4.0);
        let iv = Interval::new(a, b).unwrap();
        for t in [0.0, 0.25, 0.5, 0.9, 1.0] {
            let x = big(a + t * (b - a));
            assert!(encloses(exp(&iv), &x.exp(PREC, RM, &mut cc)));
            assert!(encloses(sin(&iv), &x.sin(PREC, RM, &mut cc)));
            assert!(encloses(cos(&iv), &x.cos(PREC, RM, &mut cc)));
        }
    }
}

fn interval() -> impl Strategy<Value = (f64, f64)> {
    (-1e6f64..1e6, 0f64..1e3).prop_map(|(a, w)| (a, a + w))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(2_000))]

    #[test]
    fn arithmetic_contains_exact_results((a, b) in interval(), (c, d) in interval(), s in 0f64..=1.0, t in 0f64..=1.0) {
        let x = Interval::new(a, b).unwrap();
        let y = Interval::new(c, d).unwrap();
        let (xv, yv) = (a + s * (b - a), c + t * (d - c));
        let (xv, yv) = (xv.clamp(a, b), yv.clamp(c, d));
        let (xb, yb) = (big(xv), big(yv));
        prop_assert!(encloses(x + y, &xb.add(&yb, PREC, RM)));
        prop_assert!(encloses(x - y, &xb.sub(&yb, PREC, RM)));
        prop_assert!(encloses(x * y, &xb.mul(&yb, PREC, RM)));
        if !y.contains_zero() {
            prop_assert!(encloses(x.checked_div(&y).unwrap(), &xb.div(&yb, PREC, RM)));
        }
        if a >= 0.0 {
            prop_assert!(encloses(x.sqrt().unwrap(), &xb.sqrt(PREC, RM)));
        }
        prop_assert!(x.sqr().lo() >= 0.0);
    }

    #[test]
    fn decimal_strings_bound_their_value(x in -1e30f64..1e30) {
        let up = parse_up(&fmt_up(x)).unwrap();
        let down = parse_down(&fmt_down(x)).unwrap();
        prop_assert!(down <= x && x <= up, "{down} {x} {up}");
    }
}
