//! Radix-2 two-dimensional FFT shared by float and interval values.
//!
//! Forward transform: `X_k = Σ_n x_n e^{-2πi n·k/M}`. Inverse transform
//! uses `e^{+2πi n·k/M}` and is not normalized.

use std::ops::{Add, Mul, Sub};

use num_complex::Complex;
use rayon::prelude::*;
use thiserror::Error;

use crate::interval::elementary::pi;
use crate::interval::{ComplexInterval, Interval};
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FftError {
    #[error("transform length {0} is not a power of two")]
    NotPowerOfTwo(usize),
    #[error("buffer holds {got} values, expected {expected}")]
    Length { got: usize, expected: usize },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Direction {
    Forward,
    Inverse,
}

/// Values the FFT kernel can transform.
pub trait FftValue:
    Copy + Send + Sync + Default + Add<Output = Self> + Sub<Output = Self> + Mul<Output = Self>
{
    /// `exp(∓2πi k/m)` for forward (`-`) and inverse (`+`).
    fn twiddle(k: usize, m: usize, dir: Direction) -> Self;
}

impl<T: Scalar> FftValue for Complex<T> {
    fn twiddle(k: usize, m: usize, dir: Direction) -> Self {
        let theta = 2.0 * std::f64::consts::PI * (k as f64) / (m as f64);
        let s = if dir == Direction::Forward { -theta.sin() } else { theta.sin() };
        Complex::new(T::lit(theta.cos()), T::lit(s))
    }
}

impl<T: Scalar> FftValue for ComplexInterval<T> {
    fn twiddle(k: usize, m: usize, dir: Direction) -> Self {
        // θ = π · (2k/m), the factor is an exact dyadic rational
        let frac = Interval::from_f64(2.0 * k as f64 / m as f64);
        let theta = pi::<T>() * frac;
        let z = ComplexInterval::cis(&theta);
        if dir == Direction::Forward {
            z.conj()
        } else {
            z
        }
    }
}

/// Twiddle table for one length and direction.
#[derive(Clone, Debug)]
pub struct Plan<V> {
    m: usize,
    dir: Direction,
    tw: Vec<V>,
}

impl<V: FftValue> Plan<V> {
    pub fn new(m: usize, dir: Direction) -> Result<Self, FftError> {
        if m == 0 || !m.is_power_of_two() {
            return Err(FftError::NotPowerOfTwo(m));
        }
        let tw = (0..m / 2).map(|k| V::twiddle(k, m, dir)).collect();
        Ok(Plan { m, dir, tw })
    }

    pub fn len(&self) -> usize {
        self.m
    }

    pub fn is_empty(&self) -> bool {
        self.m == 0
    }

    pub fn direction(&self) -> Direction {
        self.dir
    }

    /// In-place transform of one contiguous sequence.
    pub fn run(&self, buf: &mut [V]) {
        let m = self.m;
        debug_assert_eq!(buf.len(), m);
        if m == 1 {
            return;
        }
        let bits = m.trailing_zeros();
        for i in 0..m {
            let j = i.reverse_bits() >> (usize::BITS - bits);
            if j > i {
                buf.swap(i, j);
            }
        }
        let mut len = 2;
        while len <= m {
            let half = len / 2;
            let stride = m / len;
            for start in (0..m).step_by(len) {
                for j in 0..half {
                    let w = self.tw[j * stride];
                    let u = buf[start + j];
                    let v = buf[start + j + half] * w;
                    buf[start + j] = u + v;
                    buf[start + j + half] = u - v;
                }
            }
            len *= 2;
        }
    }
}

fn transpose<V: Copy + Send + Sync>(src: &[V], rows: usize, cols: usize) -> Vec<V> {
    let mut out = Vec::with_capacity(src.len());
    for c in 0..cols {
        for r in 0..rows {
            out.push(src[r * cols + c]);
        }
    }
    out
}

/// 2D transform of an `m1 × m2` row-major grid (second index fastest).
pub fn fft_2d<V: FftValue>(data: &mut Vec<V>, m1: usize, m2: usize, dir: Direction) -> Result<(), FftError> {
    if data.len() != m1 * m2 {
        return Err(FftError::Length { got: data.len(), expected: m1 * m2 });
    }
    let p2 = Plan::<V>::new(m2, dir)?;
    let p1 = Plan::<V>::new(m1, dir)?;
    data.par_chunks_mut(m2).for_each(|row| p2.run(row));
    let mut t = transpose(data, m1, m2);
    t.par_chunks_mut(m1).for_each(|col| p1.run(col));
    *data = transpose(&t, m2, m1);
    Ok(())
}

/// Direct `O(M²)` evaluation of the same sums (test oracle).
pub fn naive_dft_2d<V: FftValue>(data: &[V], m1: usize, m2: usize, dir: Direction) -> Vec<V> {
    let w1: Vec<V> = (0..m1).map(|k| V::twiddle(k, m1, dir)).collect();
    let w2: Vec<V> = (0..m2).map(|k| V::twiddle(k, m2, dir)).collect();
    let mut out = vec![V::default(); m1 * m2];
    for k1 in 0..m1 {
        for k2 in 0..m2 {
            let mut acc = V::default();
            for n1 in 0..m1 {
                for n2 in 0..m2 {
                    let w = w1[(n1 * k1) % m1] * w2[(n2 * k2) % m2];
                    acc = acc + data[n1 * m2 + n2] * w;
                }
            }
            out[k1 * m2 + k2] = acc;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    type C = Complex<f64>;
    type CI = ComplexInterval<f64>;

    #[test]
    fn impulse_gives_constant() {
        let mut d = vec![C::default(); 8 * 4];
        d[0] = C::new(1.0, 0.0);
        fft_2d(&mut d, 8, 4, Direction::Forward).unwrap();
        assert!(d.iter().all(|z| (z - C::new(1.0, 0.0)).norm() < 1e-15));
    }

    #[test]
    fn rejects_non_power_of_two() {
        let mut d = vec![C::default(); 6 * 4];
        assert_eq!(fft_2d(&mut d, 6, 4, Direction::Forward), Err(FftError::NotPowerOfTwo(6)));
    }

    #[test]
    fn interval_fft_contains_float_fft() {
        let (m1, m2) = (8, 16);
        let x: Vec<C> = (0..m1 * m2).map(|i| C::new((i as f64 * 0.37).sin(), (i as f64 * 0.11).cos())).collect();
        let mut f = x.clone();
        fft_2d(&mut f, m1, m2, Direction::Forward).unwrap();
        let mut xi: Vec<CI> = x.iter().map(|&z| CI::point(z)).collect();
        fft_2d(&mut xi, m1, m2, Direction::Forward).unwrap();
        for (a, b) in xi.iter().zip(&f) {
            assert!((a.mid() - b).norm() < 1e-12);
        }
    }

    #[test]
    fn inverse_undoes_forward() {
        let (m1, m2) = (4, 8);
        let x: Vec<C> = (0..m1 * m2).map(|i| C::new(i as f64, -(i as f64) * 0.5)).collect();
        let mut y = x.clone();
        fft_2d(&mut y, m1, m2, Direction::Forward).unwrap();
        fft_2d(&mut y, m1, m2, Direction::Inverse).unwrap();
        for (a, b) in y.iter().zip(&x) {
            assert!((a / (m1 * m2) as f64 - b).norm() < 1e-12);
        }
    }
}
