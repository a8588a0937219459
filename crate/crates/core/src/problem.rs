//! The spectral problem `F_n(a) = λ_n a_n + 𝒢(a)_n`, its truncated
//! Jacobian and the approximate inverse `A`.

use log::warn;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::coeff::{distinct_reflections, CoeffGrid, CoeffValue, IndexPair, Weights};
use crate::dft::EnclosedCoeffs;
use crate::interval::decimal::{parse_down, parse_up};
use crate::interval::elementary::pi;
use crate::interval::Interval;
use crate::linalg::{enclose_product, LinalgError, Matrix};
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ProblemError {
    #[error("constraint {constraint} violated: {detail}")]
    Constraint { constraint: &'static str, detail: String },
    #[error("invalid parameter {name}: {detail}")]
    Parameter { name: &'static str, detail: String },
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

fn violated(constraint: &'static str, detail: String) -> ProblemError {
    ProblemError::Constraint { constraint, detail }
}

/// Interval containing the decimal number `x` is printed as.
fn decimal_enclosure<T: Scalar>(x: f64) -> Interval<T> {
    let s = format!("{x}");
    let lo = parse_down(&s).expect("finite decimal");
    let hi = parse_up(&s).expect("finite decimal");
    Interval::<T>::from_f64(lo).hull(&Interval::from_f64(hi))
}

/// Wave speed `c` and frequencies `q = (q₁, q₂)`.
///
/// The enclosures contain the decimal values the parameters are written
/// with, so a certificate holds for the stated numbers.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ProblemParams<T: Scalar = f64> {
    pub c: f64,
    pub q: [f64; 2],
    c_iv: Interval<T>,
    q_iv: [Interval<T>; 2],
    c2: Interval<T>,
    q2: [Interval<T>; 2],
}

impl<T: Scalar> ProblemParams<T> {
    pub fn new(c: f64, q: [f64; 2]) -> Result<Self, ProblemError> {
        if !(c > 0.0 && c.is_finite()) {
            return Err(ProblemError::Parameter { name: "c", detail: format!("must be positive, got {c}") });
        }
        if !(q[0] > 0.0 && q[1] > 0.0 && q[0].is_finite() && q[1].is_finite()) {
            return Err(ProblemError::Parameter { name: "q", detail: format!("must be positive, got {q:?}") });
        }
        if c >= std::f64::consts::SQRT_2 {
            warn!("c = {c} >= sqrt(2): no localized waves are expected");
        }
        let c_iv = decimal_enclosure::<T>(c);
        let q_iv = [decimal_enclosure::<T>(q[0]), decimal_enclosure::<T>(q[1])];
        Ok(ProblemParams { c, q, c_iv, q_iv, c2: c_iv.sqr(), q2: [q_iv[0].sqr(), q_iv[1].sqr()] })
    }

    pub fn c_interval(&self) -> Interval<T> {
        self.c_iv
    }

    pub fn q_interval(&self) -> [Interval<T>; 2] {
        self.q_iv
    }

    /// Half periods `L_j = π/q_j` (floating point).
    pub fn half_periods(&self) -> [f64; 2] {
        [std::f64::consts::PI / self.q[0], std::f64::consts::PI / self.q[1]]
    }

    /// Enclosure of `L_j = π/q_j`.
    pub fn half_period_interval(&self, j: usize) -> Interval<T> {
        pi::<T>().checked_div(&self.q_iv[j]).expect("q is positive")
    }

    /// `λ_n = (n₁²q₁² + n₂²q₂²)² − c²n₁²q₁² + 1`.
    pub fn lambda(&self, n1: usize, n2: usize) -> Interval<T> {
        let s = Interval::from_usize(n1 * n1) * self.q2[0];
        let t = Interval::from_usize(n2 * n2) * self.q2[1];
        (s + t).sqr() - self.c2 * s + Interval::one()
    }

    /// Floating-point `λ_n`.
    pub fn lambda_float(&self, n1: usize, n2: usize) -> T {
        let s = T::lit((n1 * n1) as f64 * self.q[0] * self.q[0]);
        let t = T::lit((n2 * n2) as f64 * self.q[1] * self.q[1]);
        let c2 = T::lit(self.c * self.c);
        (s + t) * (s + t) - c2 * s + T::one()
    }

    /// Enclosure of `min{λ_n : n ∉ I⁺_N}`.
    ///
    /// For fixed `n₁`, `λ_n` increases in `n₂`, so the complement reduces
    /// to the row `n₂ = 0, n₁ > N₁` and the row `n₂ = N₂+1, n₁ ≤ N₁`. Along
    /// both rows `λ` is a convex quadratic in `n₁²q₁²`; the first row is
    /// scanned near its vertex, the second only up to `⌈c/q₁⌉ + 1`.
    pub fn lambda_min(&self, n: IndexPair) -> Interval<T> {
        let mut best = self.lambda(n.0 + 1, 0);
        // vertex of s² − c²s + 1 at n₁ = c/(q₁√2)
        let vertex = (self.c_iv.checked_div(&self.q_iv[0]).expect("q > 0").hi().to_f64_exact()
            / std::f64::consts::SQRT_2)
            .floor() as usize;
        for m in vertex.saturating_sub(1)..=vertex + 2 {
            if m > n.0 {
                best = best.min(&self.lambda(m, 0));
            }
        }
        let cq = self.c_iv.checked_div(&self.q_iv[0]).expect("q > 0").hi().to_f64_exact().ceil() as usize;
        for i in 0..=n.0.min(cq + 1) {
            best = best.min(&self.lambda(i, n.1 + 1));
        }
        best
    }
}

/// The seven truncation parameters.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TruncationSet {
    pub n_gal: IndexPair,
    pub n_jac: IndexPair,
    pub n_alias: IndexPair,
    pub n_fft: IndexPair,
    pub n_col: IndexPair,
    pub n_row: IndexPair,
    pub n_tail: IndexPair,
}

impl TruncationSet {
    /// `N^Col = N^Tail = N^Jac`, `N^Row = N^Alias`.
    pub fn with_defaults(n_gal: IndexPair, n_jac: IndexPair, n_alias: IndexPair, n_fft: IndexPair) -> Self {
        TruncationSet { n_gal, n_jac, n_alias, n_fft, n_col: n_jac, n_row: n_alias, n_tail: n_jac }
    }

    /// Checks every ordering constraint; returns warnings on success.
    pub fn validate<T: Scalar>(&self, p: &ProblemParams<T>) -> Result<Vec<String>, ProblemError> {
        let mut warnings = Vec::new();
        let ge = |a: IndexPair, b: IndexPair, name: &'static str| -> Result<(), ProblemError> {
            if b.le(&a) {
                Ok(())
            } else {
                Err(violated(name, format!("{a} vs {b}")))
            }
        };
        ge(self.n_alias, self.n_jac, "N^Alias >= N^Jac")?;
        ge(self.n_alias, self.n_gal, "N^Alias >= N^Gal")?;
        for m in [self.n_fft.0, self.n_fft.1] {
            if !m.is_power_of_two() {
                return Err(violated("N^FFT power of two", format!("N^FFT = {}", self.n_fft)));
            }
        }
        if self.n_fft.0 <= self.n_alias.0 || self.n_fft.1 <= self.n_alias.1 {
            return Err(violated("N^FFT > N^Alias", format!("{} vs {}", self.n_fft, self.n_alias)));
        }
        if self.n_fft.0 <= self.n_gal.0 || self.n_fft.1 <= self.n_gal.1 {
            return Err(violated("N^FFT > N^Gal", format!("{} vs {}", self.n_fft, self.n_gal)));
        }
        ge(self.n_col, self.n_jac, "N^Col >= N^Jac")?;
        ge(self.n_row, self.n_jac, "N^Row >= N^Jac")?;
        ge(self.n_tail, self.n_jac, "N^Tail >= N^Jac")?;
        ge(self.n_col, self.n_tail, "N^Tail <= N^Col")?;
        let lmin = p.lambda_min(self.n_jac);
        let cq = (p.c_interval().checked_div(&p.q_interval()[0]).expect("q > 0")).hi().to_f64_exact();
        if lmin.lo() <= T::zero() {
            return Err(violated(
                "N^Jac_1 > c/q_1",
                format!("N^Jac_1 = {} with c/q_1 = {cq:.4} leaves lambda_min = {:e} <= 0", self.n_jac.0, lmin.lo()),
            ));
        }
        if (self.n_jac.0 as f64) <= cq {
            warnings.push(format!(
                "N^Jac_1 = {} <= c/q_1 = {cq:.4}; lambda_min(N^Jac) = {:e} is still positive",
                self.n_jac.0,
                lmin.lo()
            ));
        }
        if self.n_fft.0 < 2 * self.n_alias.0 || self.n_fft.1 < 2 * self.n_alias.1 {
            warnings.push(format!("N^FFT = {} is not much larger than N^Alias = {}", self.n_fft, self.n_alias));
        }
        if p.c >= std::f64::consts::SQRT_2 {
            warnings.push(format!("c = {} >= sqrt(2)", p.c));
        }
        Ok(warnings)
    }
}

/// Enclosure of `F_n(ā) = λ_n ā_n + b̄_n`.
#[allow(non_snake_case)]
pub fn residual_F<T: Scalar>(
    p: &ProblemParams<T>,
    abar: &CoeffGrid<T>,
    b: &EnclosedCoeffs<T>,
    n1: usize,
    n2: usize,
) -> Interval<T> {
    p.lambda(n1, n2) * Interval::point(abar.get(n1, n2)) + b.get(n1, n2)
}

/// `(b′ ∗ e_k)_n = Σ_{m ∈ refl(k)} b′_{|n−m|}` over the distinct reflections.
#[inline]
pub fn toeplitz_entry<V: CoeffValue>(bp: &impl Fn(usize, usize) -> V, n: (usize, usize), k: (usize, usize)) -> V {
    let (n1, n2) = (n.0 as i64, n.1 as i64);
    distinct_reflections(k.0, k.1).fold(V::default(), |acc, (m1, m2)| {
        acc + bp((n1 - m1).unsigned_abs() as usize, (n2 - m2).unsigned_abs() as usize)
    })
}

/// Floating-point `DF(ā)` restricted to `I⁺_N`, flat indices.
#[allow(non_snake_case)]
pub fn assemble_DF<T: Scalar>(p: &ProblemParams<T>, bprime: &CoeffGrid<T>, n: IndexPair) -> Matrix<T> {
    let bp = |a: usize, b: usize| bprime.get(a, b);
    Matrix::from_fn(n.box_len(), n.box_len(), |i, j| {
        let ni = n.unflat(i);
        let kj = n.unflat(j);
        let t = toeplitz_entry(&bp, ni, kj);
        if i == j {
            t + p.lambda_float(ni.0, ni.1)
        } else {
            t
        }
    })
}

/// `A = A^{N^Jac}` on `I⁺_{N^Jac}` and `λ_n⁻¹` elsewhere.
#[derive(Clone, Debug)]
pub struct OperatorA<T: Scalar = f64> {
    pub nj: IndexPair,
    pub block: Matrix<T>,
}

impl<T: Scalar> OperatorA<T> {
    /// Numerical inverse of the truncated Jacobian.
    pub fn from_jacobian(nj: IndexPair, df: &Matrix<T>) -> Result<Self, ProblemError> {
        let block = df.inverse()?;
        Ok(OperatorA { nj, block })
    }

    /// Interval image `A v` on the box of `v`.
    #[allow(non_snake_case)]
    pub fn apply_A(&self, p: &ProblemParams<T>, v: &CoeffGrid<Interval<T>>) -> Result<CoeffGrid<Interval<T>>, ProblemError> {
        let nj = self.nj;
        let dj = nj.box_len();
        let (vm, vr) = crate::linalg::split_intervals(dj, 1, |i, _| {
            let (a, b) = nj.unflat(i);
            v.get(a, b)
        });
        let prod = enclose_product(&self.block, &self.block.abs(), &vm, &vr)?;
        Ok(CoeffGrid::from_fn(v.dims(), |a, b| {
            if nj.contains(a, b) {
                prod.get(nj.flat(a, b), 0)
            } else {
                v.get(a, b).checked_div(&p.lambda(a, b)).expect("lambda positive outside N^Jac")
            }
        }))
    }

    /// Upper bounds of `Σ_n |A_{nk}| ω_n` for every block column `k`.
    pub fn weighted_col_sums(&self, w: &Weights<T>) -> Vec<T> {
        let nj = self.nj;
        let dj = nj.box_len();
        let om: Vec<T> = (0..dj).map(|i| {
            let (a, b) = nj.unflat(i);
            w.omega(a, b).hi()
        }).collect();
        (0..dj)
            .into_par_iter()
            .map(|k| {
                let mut acc = crate::interval::rounding::SumUp::new();
                for (n, &o) in om.iter().enumerate() {
                    acc.add_prod(self.block.get(n, k).abs(), o);
                }
                acc.value()
            })
            .collect()
    }

    /// Upper bound of `‖A‖_{B(X)} = max{max_k Σ_n |A_{nk}| ω_n/ω_k, λ_min(N^Jac)⁻¹}`.
    #[allow(non_snake_case)]
    pub fn norm_A(&self, p: &ProblemParams<T>, w: &Weights<T>) -> Interval<T> {
        let sums = self.weighted_col_sums(w);
        let mut best = Interval::one().checked_div(&p.lambda_min(self.nj)).expect("lambda_min positive");
        for (k, s) in sums.into_iter().enumerate() {
            let (a, b) = self.nj.unflat(k);
            let col = Interval::point(s).checked_div(&w.omega(a, b)).expect("omega positive");
            best = best.max(&Interval::from_ordered(T::zero(), col.hi()));
        }
        best
    }
}
