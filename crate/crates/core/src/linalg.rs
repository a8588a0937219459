//! Dense row-major matrices, floating-point LU inversion and a rigorous
//! enclosure of point-matrix times interval-matrix products.

use nalgebra::DMatrix;
use rayon::prelude::*;
use thiserror::Error;

use crate::interval::rounding::{add_up, div_up, mul_up, sub_down, sub_up};
use crate::interval::Interval;
use crate::scalar::{unit_roundoff, Scalar};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LinalgError {
    #[error("matrix is numerically singular")]
    Singular,
    #[error("dimension mismatch: {0}")]
    Shape(String),
}

#[derive(Clone, Debug, PartialEq)]
pub struct Matrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Scalar> Matrix<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix { rows, cols, data: vec![T::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = T::one();
        }
        m
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<T>) -> Self {
        assert_eq!(data.len(), rows * cols, "matrix data length");
        Matrix { rows, cols, data }
    }

    /// Builds the matrix row by row in parallel.
    pub fn from_fn(rows: usize, cols: usize, f: impl Fn(usize, usize) -> T + Sync) -> Self {
        let mut data = vec![T::zero(); rows * cols];
        if cols > 0 {
            data.par_chunks_mut(cols).enumerate().for_each(|(i, row)| {
                for (j, x) in row.iter_mut().enumerate() {
                    *x = f(i, j);
                }
            });
        }
        Matrix { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn data(&self) -> &[T] {
        &self.data
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> T {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: T) {
        self.data[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn abs(&self) -> Self {
        Matrix { rows: self.rows, cols: self.cols, data: self.data.iter().map(|x| x.abs()).collect() }
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|x| x.is_finite())
    }

    /// Floating-point product.
    pub fn matmul(&self, b: &Matrix<T>) -> Result<Matrix<T>, LinalgError> {
        if self.cols != b.rows {
            return Err(LinalgError::Shape(format!("{}x{} times {}x{}", self.rows, self.cols, b.rows, b.cols)));
        }
        let mut c = Matrix::zeros(self.rows, b.cols);
        T::gemm(self.rows, self.cols, b.cols, &self.data, &b.data, &mut c.data);
        Ok(c)
    }

    /// Floating-point matrix-vector product.
    pub fn matvec(&self, v: &[T]) -> Vec<T> {
        (0..self.rows).into_par_iter().map(|i| self.row(i).iter().zip(v).map(|(&a, &x)| a * x).sum()).collect()
    }

    fn to_nalgebra(&self) -> DMatrix<f64> {
        let v: Vec<f64> = self.data.iter().map(|x| x.to_f64_exact()).collect();
        DMatrix::from_row_slice(self.rows, self.cols, &v)
    }

    fn from_nalgebra(m: &DMatrix<f64>) -> Self {
        Matrix::from_fn(m.nrows(), m.ncols(), |i, j| T::lit(m[(i, j)]))
    }

    /// Floating-point inverse via LU with partial pivoting.
    pub fn inverse(&self) -> Result<Matrix<T>, LinalgError> {
        if self.rows != self.cols {
            return Err(LinalgError::Shape(format!("inverse of {}x{}", self.rows, self.cols)));
        }
        let inv = self.to_nalgebra().lu().try_inverse().ok_or(LinalgError::Singular)?;
        let out = Self::from_nalgebra(&inv);
        if !out.is_finite() {
            return Err(LinalgError::Singular);
        }
        Ok(out)
    }

    /// Solves `self · x = rhs` in floating point.
    pub fn solve(&self, rhs: &[T]) -> Result<Vec<T>, LinalgError> {
        if self.rows != self.cols || rhs.len() != self.rows {
            return Err(LinalgError::Shape(format!("solve with {}x{} and {}", self.rows, self.cols, rhs.len())));
        }
        let b = nalgebra::DVector::from_iterator(rhs.len(), rhs.iter().map(|x| x.to_f64_exact()));
        let x = self.to_nalgebra().lu().solve(&b).ok_or(LinalgError::Singular)?;
        let out: Vec<T> = x.iter().map(|&v| T::lit(v)).collect();
        if out.iter().any(|v| !v.is_finite()) {
            return Err(LinalgError::Singular);
        }
        Ok(out)
    }
}

/// Upper bound of `γ_n = n u / (1 − n u)`.
pub fn gamma_n<T: Scalar>(n: usize) -> T {
    let nu = mul_up(T::from_usize_exact(n), unit_roundoff::<T>());
    div_up(nu, sub_down(T::one(), nu))
}

/// Midpoint-radius enclosure `|A·B − mid| ≤ rad` (entrywise).
#[derive(Clone, Debug)]
pub struct MidRad<T> {
    pub mid: Matrix<T>,
    pub rad: Matrix<T>,
}

impl<T: Scalar> MidRad<T> {
    pub fn get(&self, i: usize, j: usize) -> Interval<T> {
        let m = Interval::point(self.mid.get(i, j));
        m + Interval::symmetric(self.rad.get(i, j))
    }
}

/// Encloses `A·B` for every `B` with `|B − bm| ≤ br`. `a_abs` must be `|A|`.
///
/// Two floating-point products are used: `fl(A·bm)` and `fl(|A|·W)` with
/// `W = br + γ_{D+1}|bm|`, followed by an upward correction of the second.
pub fn enclose_product<T: Scalar>(
    a: &Matrix<T>,
    a_abs: &Matrix<T>,
    bm: &Matrix<T>,
    br: &Matrix<T>,
) -> Result<MidRad<T>, LinalgError> {
    if bm.rows != br.rows || bm.cols != br.cols {
        return Err(LinalgError::Shape("midpoint and radius differ in shape".into()));
    }
    let d = a.cols;
    let mid = a.matmul(bm)?;
    let g1 = gamma_n::<T>(d + 1);
    let w = Matrix {
        rows: br.rows,
        cols: br.cols,
        data: br.data.iter().zip(&bm.data).map(|(&r, &m)| add_up(r, mul_up(g1, m.abs()))).collect(),
    };
    let s = a_abs.matmul(&w)?;
    let f = add_up(T::one(), mul_up(T::lit(2.0), gamma_n::<T>(d)));
    let eta = mul_up(T::from_usize_exact(2 * d + 2), T::min_subnormal());
    let rad = Matrix { rows: s.rows, cols: s.cols, data: s.data.iter().map(|&x| add_up(mul_up(x, f), eta)).collect() };
    Ok(MidRad { mid, rad })
}

/// Splits interval entries into midpoint and upward-rounded radius.
pub fn split_intervals<T: Scalar>(rows: usize, cols: usize, f: impl Fn(usize, usize) -> Interval<T> + Sync) -> (Matrix<T>, Matrix<T>) {
    let mut mid = Matrix::zeros(rows, cols);
    let mut rad = Matrix::zeros(rows, cols);
    if cols > 0 {
        mid.data
            .par_chunks_mut(cols)
            .zip(rad.data.par_chunks_mut(cols))
            .enumerate()
            .for_each(|(i, (mrow, rrow))| {
                for j in 0..cols {
                    let x = f(i, j);
                    let m = x.mid();
                    mrow[j] = m;
                    rrow[j] = sub_up(x.hi(), m).max(sub_up(m, x.lo()));
                }
            });
    }
    (mid, rad)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inverse_of_small_matrix() {
        let m = Matrix::from_vec(2, 2, vec![4.0f64, 7.0, 2.0, 6.0]);
        let inv = m.inverse().unwrap();
        let p = m.matmul(&inv).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                let e = if i == j { 1.0 } else { 0.0 };
                assert!((p.get(i, j) - e).abs() < 1e-14);
            }
        }
        let x = m.solve(&[1.0, 2.0]).unwrap();
        assert!((4.0 * x[0] + 7.0 * x[1] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn singular_is_reported() {
        let m = Matrix::from_vec(2, 2, vec![1.0f64, 2.0, 2.0, 4.0]);
        assert_eq!(m.inverse(), Err(LinalgError::Singular));
    }

    #[test]
    fn product_enclosure_contains_samples() {
        let n = 12;
        let a = Matrix::from_fn(n, n, |i, j| ((i * 7 + j * 3) as f64 * 0.37).sin());
        let bm = Matrix::from_fn(n, 3, |i, j| ((i + 5 * j) as f64 * 0.11).cos());
        let br = Matrix::from_fn(n, 3, |i, _| 1e-9 * i as f64);
        let e = enclose_product(&a, &a.abs(), &bm, &br).unwrap();
        for sign in [-1.0, 0.0, 1.0] {
            let b = Matrix::from_fn(n, 3, |i, j| bm.get(i, j) + sign * br.get(i, j));
            for i in 0..n {
                for j in 0..3 {
                    let exact: f64 = (0..n).map(|k| a.get(i, k) * b.get(k, j)).sum();
                    assert!(e.get(i, j).contains(exact), "{i} {j}");
                }
            }
        }
    }
}
