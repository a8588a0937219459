use std::fmt;
use std::iter::Sum;
use std::ops::{Add, AddAssign, Mul, Neg, Sub};
use std::str::FromStr;

use super::decimal::{fmt_down, fmt_up, parse_down, parse_up};
use super::rounding::*;
use super::IntervalError;
use crate::scalar::Scalar;

/// Closed interval `[lo, hi]` with `lo <= hi`, endpoints possibly infinite.
///
/// Arithmetic is outward rounded: the result always contains every value
/// obtained by applying the operation to points of the operands.
#[derive(Clone, Copy, PartialEq)]
pub struct Interval<T: Scalar = f64> {
    lo: T,
    hi: T,
}

impl<T: Scalar> Interval<T> {
    pub fn new(lo: T, hi: T) -> Result<Self, IntervalError> {
        if lo.is_nan() || hi.is_nan() {
            return Err(IntervalError::NaN);
        }
        if lo > hi {
            return Err(IntervalError::Empty { lo: lo.to_f64_exact(), hi: hi.to_f64_exact() });
        }
        Ok(Interval { lo, hi })
    }

    /// Builds from endpoints already known to be ordered.
    #[inline]
    pub(crate) fn from_ordered(lo: T, hi: T) -> Self {
        debug_assert!(lo <= hi || lo.is_nan() || hi.is_nan(), "unordered {lo:?} > {hi:?}");
        Interval { lo, hi }
    }

    #[inline]
    pub fn point(x: T) -> Self {
        Interval { lo: x, hi: x }
    }

    pub fn zero() -> Self {
        Self::point(T::zero())
    }

    pub fn one() -> Self {
        Self::point(T::one())
    }

    pub fn entire() -> Self {
        Interval { lo: T::neg_infinity(), hi: T::infinity() }
    }

    /// Symmetric interval `[-r, r]`, `r >= 0`.
    pub fn symmetric(r: T) -> Self {
        let r = r.abs();
        Interval { lo: -r, hi: r }
    }

    /// Enclosure of an `f64` constant in this scalar type.
    pub fn from_f64(x: f64) -> Self {
        let y = T::lit(x);
        let back = y.to_f64_exact();
        if back == x {
            Self::point(y)
        } else if back < x {
            Interval { lo: y, hi: y.next_up_() }
        } else {
            Interval { lo: y.next_down_(), hi: y }
        }
    }

    /// Exact for integers up to `2^p`, enclosed otherwise.
    pub fn from_usize(n: usize) -> Self {
        Self::from_f64(n as f64)
    }

    pub fn from_i64(n: i64) -> Self {
        Self::from_f64(n as f64)
    }

    #[inline]
    pub fn lo(&self) -> T {
        self.lo
    }

    #[inline]
    pub fn hi(&self) -> T {
        self.hi
    }

    /// Upper endpoint; the value reported for every final bound.
    #[inline]
    pub fn upper_bound(&self) -> T {
        self.hi
    }

    pub fn is_finite(&self) -> bool {
        self.lo.is_finite() && self.hi.is_finite()
    }

    /// Midpoint rounded to nearest (not rigorous).
    pub fn mid(&self) -> T {
        if self.lo == self.hi {
            return self.lo;
        }
        if self.lo.is_infinite() || self.hi.is_infinite() {
            return if self.lo.is_infinite() && self.hi.is_infinite() {
                T::zero()
            } else if self.lo.is_infinite() {
                -T::max_value()
            } else {
                T::max_value()
            };
        }
        let half = T::lit(0.5);
        let m = self.lo * half + self.hi * half;
        m.max(self.lo).min(self.hi)
    }

    /// Upper bound of the half-width around [`Interval::mid`].
    pub fn rad(&self) -> T {
        let m = self.mid();
        sub_up(m, self.lo).max(sub_up(self.hi, m))
    }

    /// Upper bound of the width.
    pub fn width(&self) -> T {
        sub_up(self.hi, self.lo)
    }

    /// `max |x|` over the interval (exact).
    #[inline]
    pub fn mag(&self) -> T {
        self.lo.abs().max(self.hi.abs())
    }

    /// `min |x|` over the interval (exact).
    pub fn mig(&self) -> T {
        if self.contains_zero() {
            T::zero()
        } else {
            self.lo.abs().min(self.hi.abs())
        }
    }

    pub fn contains(&self, x: T) -> bool {
        self.lo <= x && x <= self.hi
    }

    pub fn contains_zero(&self) -> bool {
        self.contains(T::zero())
    }

    pub fn contains_interval(&self, other: &Self) -> bool {
        self.lo <= other.lo && other.hi <= self.hi
    }

    pub fn hull(&self, other: &Self) -> Self {
        Interval { lo: self.lo.min(other.lo), hi: self.hi.max(other.hi) }
    }

    pub fn intersect(&self, other: &Self) -> Result<Self, IntervalError> {
        Self::new(self.lo.max(other.lo), self.hi.min(other.hi))
    }

    /// Range of `|x|`.
    pub fn abs(&self) -> Self {
        Interval { lo: self.mig(), hi: self.mag() }
    }

    pub fn sqr(&self) -> Self {
        let a = self.abs();
        Interval { lo: mul_down(a.lo, a.lo), hi: mul_up(a.hi, a.hi) }
    }

    /// Non-negative integer power.
    pub fn powi(&self, n: u32) -> Self {
        if n == 0 {
            return Self::one();
        }
        if n % 2 == 0 {
            let mut base = self.abs();
            let mut acc = Self::one();
            let mut e = n;
            while e > 0 {
                if e & 1 == 1 {
                    acc = acc * base;
                }
                base = base * base;
                e >>= 1;
            }
            // intermediate products of non-negative factors stay non-negative
            Interval { lo: acc.lo.max(T::zero()), hi: acc.hi }
        } else {
            let even = self.powi(n - 1);
            even * *self
        }
    }

    pub fn sqrt(&self) -> Result<Self, IntervalError> {
        if self.hi < T::zero() {
            return Err(IntervalError::Domain("sqrt of a negative interval"));
        }
        let lo = if self.lo <= T::zero() { T::zero() } else { sqrt_du(self.lo).0 };
        Ok(Interval { lo, hi: sqrt_du(self.hi).1 })
    }

    /// Division; fails when the divisor contains zero.
    pub fn checked_div(&self, y: &Self) -> Result<Self, IntervalError> {
        if y.contains_zero() {
            return Err(IntervalError::DivisionByZero);
        }
        let (a, b, c, d) = (self.lo, self.hi, y.lo, y.hi);
        let cands = [div_du(a, c), div_du(a, d), div_du(b, c), div_du(b, d)];
        Ok(min_max(&cands))
    }

    pub fn recip(&self) -> Result<Self, IntervalError> {
        Self::one().checked_div(self)
    }

    /// Multiplication by a power of two (exact barring over/underflow).
    pub fn scale_pow2(&self, e: i32) -> Self {
        let f = Self::point(T::lit(2f64.powi(e)));
        *self * f
    }

    pub fn max(&self, other: &Self) -> Self {
        Interval { lo: self.lo.max(other.lo), hi: self.hi.max(other.hi) }
    }

    pub fn min(&self, other: &Self) -> Self {
        Interval { lo: self.lo.min(other.lo), hi: self.hi.min(other.hi) }
    }

    /// Widen to a lossless `f64` interval.
    pub fn to_f64(&self) -> Interval<f64> {
        Interval { lo: self.lo.to_f64_exact(), hi: self.hi.to_f64_exact() }
    }
}

#[inline]
fn min_max<T: Scalar>(c: &[(T, T)]) -> Interval<T> {
    let mut lo = c[0].0;
    let mut hi = c[0].1;
    for &(d, u) in &c[1..] {
        if d < lo {
            lo = d;
        }
        if u > hi {
            hi = u;
        }
    }
    Interval { lo, hi }
}

impl<T: Scalar> Default for Interval<T> {
    fn default() -> Self {
        Self::zero()
    }
}

impl<T: Scalar> Add for Interval<T> {
    type Output = Self;
    #[inline]
    fn add(self, y: Self) -> Self {
        Interval { lo: add_down(self.lo, y.lo), hi: add_up(self.hi, y.hi) }
    }
}

impl<T: Scalar> AddAssign for Interval<T> {
    #[inline]
    fn add_assign(&mut self, y: Self) {
        *self = *self + y;
    }
}

impl<T: Scalar> Sub for Interval<T> {
    type Output = Self;
    #[inline]
    fn sub(self, y: Self) -> Self {
        Interval { lo: sub_down(self.lo, y.hi), hi: sub_up(self.hi, y.lo) }
    }
}

impl<T: Scalar> Neg for Interval<T> {
    type Output = Self;
    #[inline]
    fn neg(self) -> Self {
        Interval { lo: -self.hi, hi: -self.lo }
    }
}

impl<T: Scalar> Mul for Interval<T> {
    type Output = Self;
    #[inline]
    fn mul(self, y: Self) -> Self {
        let (a, b, c, d) = (self.lo, self.hi, y.lo, y.hi);
        let z = T::zero();
        if a >= z && c >= z {
            return Interval { lo: mul_down(a, c), hi: mul_up(b, d) };
        }
        if b <= z && d <= z {
            return Interval { lo: mul_down(b, d), hi: mul_up(a, c) };
        }
        if a >= z && d <= z {
            return Interval { lo: mul_down(b, c), hi: mul_up(a, d) };
        }
        if b <= z && c >= z {
            return Interval { lo: mul_down(a, d), hi: mul_up(b, c) };
        }
        min_max(&[mul_du(a, c), mul_du(a, d), mul_du(b, c), mul_du(b, d)])
    }
}

impl<T: Scalar> Mul<T> for Interval<T> {
    type Output = Self;
    #[inline]
    fn mul(self, y: T) -> Self {
        self * Interval::point(y)
    }
}

impl<T: Scalar> Sum for Interval<T> {
    fn sum<I: Iterator<Item = Self>>(iter: I) -> Self {
        iter.fold(Self::zero(), |acc, x| acc + x)
    }
}

impl<T: Scalar> fmt::Debug for Interval<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{:e}, {:e}]", self.lo, self.hi)
    }
}

/// `[lo,hi]` with `lo` printed rounded down and `hi` rounded up.
impl<T: Scalar> fmt::Display for Interval<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{},{}]", fmt_down(self.lo.to_f64_exact()), fmt_up(self.hi.to_f64_exact()))
    }
}

impl<T: Scalar> FromStr for Interval<T> {
    type Err = IntervalError;

    /// Parses `[lo,hi]` (or a bare number) so the result contains the
    /// decimal values as written.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        let bad = || IntervalError::Parse(s.to_string());
        let (lo_s, hi_s) = match s.strip_prefix('[').and_then(|r| r.strip_suffix(']')) {
            Some(inner) => inner.split_once(',').ok_or_else(bad)?,
            None => (s, s),
        };
        let lo = parse_down(lo_s).ok_or_else(bad)?;
        let hi = parse_up(hi_s).ok_or_else(bad)?;
        let x = Interval::<f64>::new(lo, hi)?;
        Ok(Self::from_f64(x.lo).hull(&Self::from_f64(x.hi)))
    }
}
