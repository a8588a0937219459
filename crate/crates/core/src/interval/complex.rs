use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub};

use num_complex::Complex;

use super::elementary::{cos, exp, sin};
use super::rounding::{add_up, mul_up, sqrt_du};
use super::Interval;
use crate::scalar::Scalar;

/// Rectangular complex interval `re + i im`.
#[derive(Clone, Copy, PartialEq, Default)]
pub struct ComplexInterval<T: Scalar = f64> {
    pub re: Interval<T>,
    pub im: Interval<T>,
}

impl<T: Scalar> ComplexInterval<T> {
    #[inline]
    pub fn new(re: Interval<T>, im: Interval<T>) -> Self {
        ComplexInterval { re, im }
    }

    pub fn zero() -> Self {
        Self::new(Interval::zero(), Interval::zero())
    }

    pub fn from_real(re: Interval<T>) -> Self {
        Self::new(re, Interval::zero())
    }

    pub fn point(z: Complex<T>) -> Self {
        Self::new(Interval::point(z.re), Interval::point(z.im))
    }

    pub fn conj(&self) -> Self {
        Self::new(self.re, -self.im)
    }

    /// Multiplication by `i`.
    pub fn mul_i(&self) -> Self {
        Self::new(-self.im, self.re)
    }

    pub fn scale(&self, s: &Interval<T>) -> Self {
        Self::new(self.re * *s, self.im * *s)
    }

    pub fn mid(&self) -> Complex<T> {
        Complex::new(self.re.mid(), self.im.mid())
    }

    /// Upper bound of `|z|` over the rectangle.
    pub fn abs_upper(&self) -> T {
        if self.im.lo() == T::zero() && self.im.hi() == T::zero() {
            return self.re.mag();
        }
        if self.re.lo() == T::zero() && self.re.hi() == T::zero() {
            return self.im.mag();
        }
        let a = self.re.mag();
        let b = self.im.mag();
        sqrt_du(add_up(mul_up(a, a), mul_up(b, b))).1
    }

    pub fn contains(&self, z: Complex<T>) -> bool {
        self.re.contains(z.re) && self.im.contains(z.im)
    }

    pub fn hull(&self, other: &Self) -> Self {
        Self::new(self.re.hull(&other.re), self.im.hull(&other.im))
    }

    /// `exp(i theta)`.
    pub fn cis(theta: &Interval<T>) -> Self {
        Self::new(cos(theta), sin(theta))
    }

    pub fn exp(&self) -> Self {
        Self::cis(&self.im).scale(&exp(&self.re))
    }
}

impl<T: Scalar> Add for ComplexInterval<T> {
    type Output = Self;
    #[inline]
    fn add(self, y: Self) -> Self {
        Self::new(self.re + y.re, self.im + y.im)
    }
}

impl<T: Scalar> AddAssign for ComplexInterval<T> {
    #[inline]
    fn add_assign(&mut self, y: Self) {
        *self = *self + y;
    }
}

impl<T: Scalar> Sub for ComplexInterval<T> {
    type Output = Self;
    #[inline]
    fn sub(self, y: Self) -> Self {
        Self::new(self.re - y.re, self.im - y.im)
    }
}

impl<T: Scalar> Neg for ComplexInterval<T> {
    type Output = Self;
    #[inline]
    fn neg(self) -> Self {
        Self::new(-self.re, -self.im)
    }
}

impl<T: Scalar> Mul for ComplexInterval<T> {
    type Output = Self;
    #[inline]
    fn mul(self, y: Self) -> Self {
        Self::new(self.re * y.re - self.im * y.im, self.re * y.im + self.im * y.re)
    }
}

impl<T: Scalar> fmt::Debug for ComplexInterval<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?} + i{:?}", self.re, self.im)
    }
}

impl<T: Scalar> fmt::Display for ComplexInterval<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} + i{}", self.re, self.im)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn product_encloses_point_product() {
        let a = Complex::new(0.3f64, -1.7);
        let b = Complex::new(2.1f64, 0.4);
        let z = ComplexInterval::point(a) * ComplexInterval::point(b);
        assert!(z.contains(a * b));
    }

    #[test]
    fn abs_upper_bounds_modulus() {
        let z = ComplexInterval::point(Complex::new(3.0f64, 4.0));
        assert!(z.abs_upper() >= 5.0);
        assert!(z.abs_upper() < 5.0 + 1e-14);
        let r = ComplexInterval::<f64>::from_real(Interval::new(-2.0, 1.0).unwrap());
        assert_eq!(r.abs_upper(), 2.0);
    }

    #[test]
    fn cis_of_zero_is_one() {
        let z = ComplexInterval::<f64>::cis(&Interval::zero());
        assert_eq!(z.re, Interval::one());
        assert_eq!(z.im, Interval::zero());
    }
}
