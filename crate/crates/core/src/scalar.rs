//! Floating-point scalar abstraction shared by every module.
//!
//! All rigorous computations are written against [`Scalar`], which adds the
//! few primitives interval arithmetic needs on top of `num_traits::Float`:
//! neighbouring floats, error-free transformations and a dense GEMM kernel.

use std::fmt::{Debug, Display, LowerExp};
use std::iter::Sum;

use num_traits::{Float, FromPrimitive, ToPrimitive};

use crate::coeff::{AbsEnclose, CoeffValue};

/// Binary floating-point type usable by the engine (implemented for `f32`
/// and `f64`).
pub trait Scalar:
    Float
    + FromPrimitive
    + ToPrimitive
    + Debug
    + Display
    + LowerExp
    + Default
    + Sum
    + Send
    + Sync
    + CoeffValue
    + AbsEnclose<Self>
    + 'static
{
    /// Precision in bits (including the hidden bit).
    const MANTISSA_DIGITS: u32;
    /// Veltkamp splitting constant `2^ceil(p/2) + 1`.
    const SPLITTER: f64;
    /// Documented maximum error of the platform `exp`/`sin`/`cos`, in ulps,
    /// rounded up to an integer. Elementary enclosures are widened by this.
    const ELEMENTARY_ULPS: u32;

    fn next_up_(self) -> Self;
    fn next_down_(self) -> Self;
    /// Smallest positive subnormal.
    fn min_subnormal() -> Self;
    /// Below this magnitude products may lose their exact error term.
    fn tiny_threshold() -> Self;
    /// Above this magnitude Veltkamp splitting may overflow.
    fn huge_threshold() -> Self;

    /// Round-to-nearest conversion from an `f64` literal.
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("finite literal")
    }

    /// Lossless widening to `f64`.
    fn to_f64_exact(self) -> f64 {
        self.to_f64().expect("float to f64")
    }

    fn from_usize_exact(n: usize) -> Self {
        Self::from_usize(n).expect("usize fits")
    }

    /// Row-major `C = A * B` with `A` (m x k), `B` (k x n), `C` (m x n),
    /// overwriting `C`.
    fn gemm(m: usize, k: usize, n: usize, a: &[Self], b: &[Self], c: &mut [Self]);
}

impl Scalar for f64 {
    const MANTISSA_DIGITS: u32 = 53;
    const SPLITTER: f64 = 134_217_729.0;
    const ELEMENTARY_ULPS: u32 = 2;

    #[inline]
    fn next_up_(self) -> Self {
        self.next_up()
    }
    #[inline]
    fn next_down_(self) -> Self {
        self.next_down()
    }
    fn min_subnormal() -> Self {
        f64::from_bits(1)
    }
    fn tiny_threshold() -> Self {
        // 2^(-1022 + 53 + 1)
        2f64.powi(-968)
    }
    fn huge_threshold() -> Self {
        2f64.powi(995)
    }

    fn gemm(m: usize, k: usize, n: usize, a: &[f64], b: &[f64], c: &mut [f64]) {
        assert!(a.len() >= m * k && b.len() >= k * n && c.len() >= m * n);
        if m == 0 || n == 0 {
            return;
        }
        // SAFETY: slices were bounds-checked above; strides describe
        // contiguous row-major storage.
        unsafe {
            matrixmultiply::dgemm(
                m,
                k,
                n,
                1.0,
                a.as_ptr(),
                k as isize,
                1,
                b.as_ptr(),
                n as isize,
                1,
                0.0,
                c.as_mut_ptr(),
                n as isize,
                1,
            );
        }
    }
}

impl Scalar for f32 {
    const MANTISSA_DIGITS: u32 = 24;
    const SPLITTER: f64 = 4097.0;
    const ELEMENTARY_ULPS: u32 = 2;

    #[inline]
    fn next_up_(self) -> Self {
        self.next_up()
    }
    #[inline]
    fn next_down_(self) -> Self {
        self.next_down()
    }
    fn min_subnormal() -> Self {
        f32::from_bits(1)
    }
    fn tiny_threshold() -> Self {
        2f32.powi(-100)
    }
    fn huge_threshold() -> Self {
        2f32.powi(110)
    }

    fn gemm(m: usize, k: usize, n: usize, a: &[f32], b: &[f32], c: &mut [f32]) {
        assert!(a.len() >= m * k && b.len() >= k * n && c.len() >= m * n);
        if m == 0 || n == 0 {
            return;
        }
        // SAFETY: see the f64 implementation.
        unsafe {
            matrixmultiply::sgemm(
                m,
                k,
                n,
                1.0,
                a.as_ptr(),
                k as isize,
                1,
                b.as_ptr(),
                n as isize,
                1,
                0.0,
                c.as_mut_ptr(),
                n as isize,
                1,
            );
        }
    }
}

/// Knuth's TwoSum: `a + b = s + e` exactly (for finite `s`).
#[inline]
pub fn two_sum<T: Scalar>(a: T, b: T) -> (T, T) {
    let s = a + b;
    let bb = s - a;
    let e = (a - (s - bb)) + (b - bb);
    (s, e)
}

#[inline]
fn split<T: Scalar>(a: T) -> (T, T) {
    let c = T::lit(T::SPLITTER) * a;
    let hi = c - (c - a);
    (hi, a - hi)
}

/// Dekker's TwoProduct: `a * b = p + e` exactly, valid when neither
/// overflow nor underflow occurs (callers check the thresholds).
#[inline]
pub fn two_prod<T: Scalar>(a: T, b: T) -> (T, T) {
    let p = a * b;
    let (ah, al) = split(a);
    let (bh, bl) = split(b);
    let e = al * bl - (((p - ah * bh) - al * bh) - ah * bl);
    (p, e)
}

/// Unit roundoff `2^-p`.
pub fn unit_roundoff<T: Scalar>() -> T {
    T::epsilon() / T::lit(2.0)
}
