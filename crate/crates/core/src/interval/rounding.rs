//! Directed-rounding primitives built on round-to-nearest.
//!
//! Every basic operation is evaluated in the default rounding mode and the
//! exact error term is recovered with an error-free transformation. The
//! result is nudged one ulp only in the direction the error points, so
//! exact results stay exact. Where the error term is not reliable (near
//! underflow or overflow) both directions are nudged unconditionally.

use crate::scalar::{two_prod, two_sum, Scalar};

#[inline]
fn overflow_down<T: Scalar>(s: T) -> T {
    if s > T::zero() {
        T::max_value()
    } else {
        T::neg_infinity()
    }
}

#[inline]
fn overflow_up<T: Scalar>(s: T) -> T {
    if s > T::zero() {
        T::infinity()
    } else {
        -T::max_value()
    }
}

/// `(down, up)` enclosure of `a + b`.
#[inline]
pub fn add_du<T: Scalar>(a: T, b: T) -> (T, T) {
    let (s, e) = two_sum(a, b);
    if !s.is_finite() {
        if a.is_finite() && b.is_finite() {
            return (overflow_down(s), overflow_up(s));
        }
        return (s, s);
    }
    if e > T::zero() {
        (s, s.next_up_())
    } else if e < T::zero() {
        (s.next_down_(), s)
    } else {
        (s, s)
    }
}

#[inline]
pub fn add_down<T: Scalar>(a: T, b: T) -> T {
    add_du(a, b).0
}

#[inline]
pub fn add_up<T: Scalar>(a: T, b: T) -> T {
    add_du(a, b).1
}

#[inline]
pub fn sub_down<T: Scalar>(a: T, b: T) -> T {
    add_du(a, -b).0
}

#[inline]
pub fn sub_up<T: Scalar>(a: T, b: T) -> T {
    add_du(a, -b).1
}

/// `(down, up)` enclosure of `a * b`, with the convention `0 * inf = 0`.
#[inline]
pub fn mul_du<T: Scalar>(a: T, b: T) -> (T, T) {
    if a == T::zero() || b == T::zero() {
        return (T::zero(), T::zero());
    }
    let p = a * b;
    if !p.is_finite() {
        if a.is_finite() && b.is_finite() {
            return (overflow_down(p), overflow_up(p));
        }
        return (p, p);
    }
    let ap = p.abs();
    if ap < T::tiny_threshold()
        || ap > T::huge_threshold()
        || a.abs() > T::huge_threshold()
        || b.abs() > T::huge_threshold()
    {
        return (p.next_down_(), p.next_up_());
    }
    let (_, e) = two_prod(a, b);
    if e > T::zero() {
        (p, p.next_up_())
    } else if e < T::zero() {
        (p.next_down_(), p)
    } else {
        (p, p)
    }
}

#[inline]
pub fn mul_down<T: Scalar>(a: T, b: T) -> T {
    mul_du(a, b).0
}

#[inline]
pub fn mul_up<T: Scalar>(a: T, b: T) -> T {
    mul_du(a, b).1
}

/// `(down, up)` enclosure of `a / b` for `b != 0`.
#[inline]
pub fn div_du<T: Scalar>(a: T, b: T) -> (T, T) {
    debug_assert!(b != T::zero());
    if a == T::zero() {
        return (T::zero(), T::zero());
    }
    let q = a / b;
    if !q.is_finite() {
        if a.is_finite() && b.is_finite() {
            return (overflow_down(q), overflow_up(q));
        }
        return (q, q);
    }
    if b.is_infinite() {
        // finite / inf = 0 exactly in the limit sense; enclose the sign side
        return if (a > T::zero()) == (b > T::zero()) {
            (T::zero(), T::min_subnormal())
        } else {
            (-T::min_subnormal(), T::zero())
        };
    }
    let aq = q.abs();
    if aq < T::tiny_threshold()
        || aq > T::huge_threshold()
        || a.abs() < T::tiny_threshold()
        || a.abs() > T::huge_threshold()
        || b.abs() > T::huge_threshold()
        || b.abs() < T::tiny_threshold()
    {
        return (q.next_down_(), q.next_up_());
    }
    // remainder a - q*b is exactly representable
    let (p, e) = two_prod(q, b);
    let r = (a - p) - e;
    let dir = if b > T::zero() { r } else { -r };
    if dir > T::zero() {
        (q, q.next_up_())
    } else if dir < T::zero() {
        (q.next_down_(), q)
    } else {
        (q, q)
    }
}

#[inline]
pub fn div_down<T: Scalar>(a: T, b: T) -> T {
    div_du(a, b).0
}

#[inline]
pub fn div_up<T: Scalar>(a: T, b: T) -> T {
    div_du(a, b).1
}

/// `(down, up)` enclosure of `sqrt(a)` for `a >= 0`.
#[inline]
pub fn sqrt_du<T: Scalar>(a: T) -> (T, T) {
    debug_assert!(a >= T::zero());
    if a == T::zero() || a.is_infinite() {
        return (a, a);
    }
    let r = a.sqrt();
    if a < T::tiny_threshold() || a > T::huge_threshold() {
        return (r.next_down_().max(T::zero()), r.next_up_());
    }
    let (p, e) = two_prod(r, r);
    let res = (a - p) - e;
    if res > T::zero() {
        (r, r.next_up_())
    } else if res < T::zero() {
        (r.next_down_(), r)
    } else {
        (r, r)
    }
}

/// Widen `x` downward by `n` ulps.
#[inline]
pub fn nudge_down<T: Scalar>(mut x: T, n: u32) -> T {
    for _ in 0..n {
        x = x.next_down_();
    }
    x
}

/// Widen `x` upward by `n` ulps.
#[inline]
pub fn nudge_up<T: Scalar>(mut x: T, n: u32) -> T {
    for _ in 0..n {
        x = x.next_up_();
    }
    x
}

/// Upward-rounded accumulator for sums of floats.
#[derive(Debug, Clone, Copy, Default)]
pub struct SumUp<T: Scalar> {
    acc: T,
}

impl<T: Scalar> SumUp<T> {
    pub fn new() -> Self {
        SumUp { acc: T::zero() }
    }

    #[inline]
    pub fn add(&mut self, x: T) {
        self.acc = add_up(self.acc, x);
    }

    /// Adds an upper bound of `a * b`.
    #[inline]
    pub fn add_prod(&mut self, a: T, b: T) {
        self.acc = add_up(self.acc, mul_up(a, b));
    }

    pub fn value(self) -> T {
        self.acc
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_ops_are_not_widened() {
        assert_eq!(add_du(1.0f64, 2.0), (3.0, 3.0));
        assert_eq!(mul_du(-1.0f64, 3.0), (-3.0, -3.0));
        assert_eq!(div_du(1.0f64, 4.0), (0.25, 0.25));
        assert_eq!(sqrt_du(9.0f64), (3.0, 3.0));
    }

    #[test]
    fn inexact_ops_bracket() {
        let (d, u) = div_du(1.0f64, 3.0);
        assert_eq!(u, d.next_up());
        assert_eq!(d, 1.0 / 3.0);
        let (d, u) = add_du(0.1f64, 0.2);
        assert!(d < u);
        let (d, u) = sqrt_du(2.0f64);
        assert!(d * d <= 2.0 && u * u >= 2.0);
    }

    #[test]
    fn overflow_is_flagged_by_infinity() {
        let (d, u) = mul_du(f64::MAX, 2.0);
        assert_eq!(d, f64::MAX);
        assert!(u.is_infinite());
    }

    #[test]
    fn f32_variant() {
        let (d, u) = div_du(1.0f32, 3.0);
        assert!(d < u);
        assert!((d as f64) < 1.0 / 3.0 && (u as f64) > 1.0 / 3.0);
    }
}
