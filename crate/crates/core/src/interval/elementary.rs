//! Enclosures of `exp`, `sin`, `cos` and the constant pi.
//!
//! The platform functions are evaluated at the endpoints and widened by
//! [`Scalar::ELEMENTARY_ULPS`] on each side. Arguments where the result is
//! exactly known (`exp(0)`, `sin(0)`, `cos(0)`) are returned exactly.

use super::rounding::{nudge_down, nudge_up};
use super::Interval;
use crate::scalar::Scalar;

/// Enclosure of pi.
pub fn pi<T: Scalar>() -> Interval<T> {
    // f64: PI < pi < next_up(PI)
    let lo = std::f64::consts::PI;
    let hi = lo.next_up();
    let a = Interval::<T>::from_f64(lo);
    let b = Interval::<T>::from_f64(hi);
    a.hull(&b)
}

/// Enclosure of `2 pi`.
pub fn two_pi<T: Scalar>() -> Interval<T> {
    pi::<T>() * Interval::point(T::lit(2.0))
}

fn exp_down<T: Scalar>(x: T) -> T {
    if x == T::zero() {
        return T::one();
    }
    if x == T::neg_infinity() {
        return T::zero();
    }
    let e = x.exp();
    if !e.is_finite() {
        return T::max_value();
    }
    if e < T::tiny_threshold() {
        return T::zero();
    }
    let d = nudge_down(e, T::ELEMENTARY_ULPS).max(T::zero());
    if x > T::zero() {
        d.max(T::one())
    } else {
        d
    }
}

fn exp_up<T: Scalar>(x: T) -> T {
    if x == T::zero() {
        return T::one();
    }
    if x == T::infinity() {
        return T::infinity();
    }
    let e = x.exp();
    if !e.is_finite() {
        return T::infinity();
    }
    if e < T::tiny_threshold() {
        return T::tiny_threshold();
    }
    let u = nudge_up(e, T::ELEMENTARY_ULPS);
    if x < T::zero() {
        u.min(T::one())
    } else {
        u
    }
}

pub fn exp<T: Scalar>(x: &Interval<T>) -> Interval<T> {
    Interval::from_ordered(exp_down(x.lo()), exp_up(x.hi()))
}

/// Enclosure of `exp(x) - x - 1`, tight near zero.
pub fn expm1mx<T: Scalar>(x: &Interval<T>) -> Interval<T> {
    // monotone decreasing for x<0, increasing for x>0, minimum 0 at x=0
    let f = |v: T| -> Interval<T> {
        let p = Interval::point(v);
        if v.abs() < T::lit(0.5) {
            series_expm1mx(&p)
        } else {
            exp(&p) - p - Interval::one()
        }
    };
    let a = f(x.lo());
    let b = f(x.hi());
    let lo = if x.contains_zero() { T::zero() } else { a.lo().min(b.lo()).max(T::zero()) };
    Interval::from_ordered(lo, a.hi().max(b.hi()))
}

/// Taylor series of `exp(x) - x - 1` with a rigorous remainder, `|x| < 1/2`.
fn series_expm1mx<T: Scalar>(x: &Interval<T>) -> Interval<T> {
    let terms = T::MANTISSA_DIGITS as usize / 2 + 4;
    let mut term = x.sqr() * Interval::from_f64(0.5);
    let mut sum = term;
    let mut k = 2usize;
    for _ in 0..terms {
        k += 1;
        term = (term * *x).checked_div(&Interval::from_usize(k)).expect("nonzero");
        sum += term;
    }
    // remainder <= |next term| / (1 - |x|) <= 2 |next term|
    let next = (term * *x).checked_div(&Interval::from_usize(k + 1)).expect("nonzero");
    sum + Interval::symmetric(next.mag() * T::lit(2.0))
}

fn cos_point<T: Scalar>(x: T) -> (T, T) {
    if x == T::zero() {
        return (T::one(), T::one());
    }
    let c = x.cos();
    (nudge_down(c, T::ELEMENTARY_ULPS).max(-T::one()), nudge_up(c, T::ELEMENTARY_ULPS).min(T::one()))
}

fn sin_point<T: Scalar>(x: T) -> (T, T) {
    if x == T::zero() {
        return (T::zero(), T::zero());
    }
    let s = x.sin();
    // one extra subnormal keeps results near zero crossings enclosed
    let d = nudge_down(s, T::ELEMENTARY_ULPS) - T::min_subnormal();
    let u = nudge_up(s, T::ELEMENTARY_ULPS) + T::min_subnormal();
    (d.max(-T::one()), u.min(T::one()))
}

/// Whether the interval `t` contains an integer `k` with the given parity.
fn contains_int_with_parity<T: Scalar>(t: &Interval<T>, odd: bool) -> bool {
    let mut k = t.lo().ceil();
    while k <= t.hi() {
        let is_odd = (k * T::lit(0.5)).fract() != T::zero();
        if is_odd == odd {
            return true;
        }
        k = k + T::one();
    }
    false
}

fn trig<T: Scalar>(x: &Interval<T>, shift: T, point: fn(T) -> (T, T)) -> Interval<T> {
    let full = Interval::from_ordered(-T::one(), T::one());
    if !x.is_finite() || x.mag() > T::lit(1e9) || x.width() > T::lit(6.2) {
        return full;
    }
    if x.lo() == x.hi() {
        let (d, u) = point(x.lo());
        return Interval::from_ordered(d, u);
    }
    // extrema of cos at t = k, of sin at t = k + 1/2 (t = x/pi)
    let t = x.checked_div(&pi::<T>()).expect("pi is positive") - Interval::point(shift);
    let (a_d, a_u) = point(x.lo());
    let (b_d, b_u) = point(x.hi());
    let mut lo = a_d.min(b_d);
    let mut hi = a_u.max(b_u);
    if contains_int_with_parity(&t, false) {
        hi = T::one();
    }
    if contains_int_with_parity(&t, true) {
        lo = -T::one();
    }
    Interval::from_ordered(lo, hi)
}

pub fn cos<T: Scalar>(x: &Interval<T>) -> Interval<T> {
    trig(x, T::zero(), cos_point)
}

pub fn sin<T: Scalar>(x: &Interval<T>) -> Interval<T> {
    trig(x, T::lit(0.5), sin_point)
}

#[cfg(test)]
mod tests {
    use super::*;

    type I = Interval<f64>;

    #[test]
    fn exact_special_values() {
        assert_eq!(exp(&I::zero()), I::one());
        assert_eq!(cos(&I::zero()), I::one());
        assert_eq!(sin(&I::zero()), I::zero());
        assert_eq!(expm1mx(&I::zero()).upper_bound(), 0.0);
    }

    #[test]
    fn pi_is_enclosed() {
        let p = pi::<f64>();
        assert!(p.lo() <= std::f64::consts::PI && p.hi() > std::f64::consts::PI);
        let p32 = pi::<f32>();
        assert!((p32.lo() as f64) < std::f64::consts::PI && (p32.hi() as f64) > std::f64::consts::PI);
    }

    #[test]
    fn trig_extrema_are_included() {
        let x = I::new(3.0, 3.3).unwrap();
        assert_eq!(cos(&x).lo(), -1.0);
        let y = I::new(1.5, 1.7).unwrap();
        assert_eq!(sin(&y).hi(), 1.0);
        let z = I::new(0.1, 0.2).unwrap();
        let s = sin(&z);
        assert!(s.contains(0.1f64.sin()) && s.contains(0.2f64.sin()));
        assert!(s.hi() < 0.2);
    }

    #[test]
    fn expm1mx_small_and_large() {
        for v in [-3.0, -0.4, -1e-9, 1e-9, 0.3, 2.0] {
            let r = expm1mx(&I::point(v));
            let expect = if v.abs() < 1e-6 { v * v / 2.0 + v * v * v / 6.0 } else { v.exp_m1() - v };
            assert!(r.lo() <= expect * (1.0 + 1e-12) && r.hi() >= expect * (1.0 - 1e-12), "{v} {r:?} {expect}");
        }
    }
}
