//! Taylor-truncated nonlinearity `F^(M)`, its tail bound and the parity
//! experiment.

use log::info;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::coeff::{convolve, norm_ell1_nu, CoeffGrid, CoeffValue, IndexPair, Weights};
use crate::interval::rounding::{add_up, mul_up};
use crate::interval::Interval;
use crate::problem::{OperatorA, ProblemError, ProblemParams};
use crate::scalar::Scalar;
use crate::solver::{continuation, BranchPoint, ContinuationConfig, Nonlinearity, SolveConfig, SolveError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SeriesError {
    #[error("series order M = {0} must be at least 2")]
    Order(usize),
    #[error(transparent)]
    Problem(#[from] ProblemError),
}

/// Truncation order `M` of `Σ_{k=2}^M u^k/k!`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "usize", into = "usize")]
pub struct SeriesOrder(usize);

impl SeriesOrder {
    pub fn new(m: usize) -> Result<Self, SeriesError> {
        if m < 2 {
            return Err(SeriesError::Order(m));
        }
        Ok(SeriesOrder(m))
    }

    pub fn get(&self) -> usize {
        self.0
    }
}

impl TryFrom<usize> for SeriesOrder {
    type Error = SeriesError;
    fn try_from(m: usize) -> Result<Self, SeriesError> {
        Self::new(m)
    }
}

impl From<SeriesOrder> for usize {
    fn from(m: SeriesOrder) -> usize {
        m.0
    }
}

/// `Σ_{k=2}^M a^{∗k}/k!` by Horner's scheme in the convolution algebra.
///
/// `inv_fact(k)` must return (an enclosure of) `1/k!`.
pub fn series_sum<V: CoeffValue>(a: &CoeffGrid<V>, m: SeriesOrder, inv_fact: impl Fn(usize) -> V) -> CoeffGrid<V> {
    let m = m.get();
    let mut s = CoeffGrid::from_vec(IndexPair::ZERO, vec![inv_fact(m)]);
    for k in (2..m).rev() {
        s = convolve(a, &s);
        s.set(0, 0, s.get(0, 0) + inv_fact(k));
    }
    convolve(a, &convolve(a, &s))
}

fn inv_fact_float<T: Scalar>(k: usize) -> T {
    T::one() / (1..=k).fold(T::one(), |acc, i| acc * T::from_usize_exact(i))
}

fn inv_fact_interval<T: Scalar>(k: usize) -> Interval<T> {
    let f = (1..=k).fold(Interval::one(), |acc, i| acc * Interval::from_usize(i));
    Interval::one().checked_div(&f).expect("factorial positive")
}

/// Floating-point `F^(M)(a)` on `I⁺_{M N}`.
#[allow(non_snake_case)]
pub fn F_M<T: Scalar>(a: &CoeffGrid<T>, m: SeriesOrder, p: &ProblemParams<T>) -> CoeffGrid<T> {
    let s = series_sum(a, m, inv_fact_float::<T>);
    CoeffGrid::from_fn(s.dims(), |n1, n2| p.lambda_float(n1, n2) * a.get(n1, n2) + s.get(n1, n2))
}

/// Interval enclosure of `F^(M)(a)` on `I⁺_{M N}`.
#[allow(non_snake_case)]
pub fn F_M_interval<T: Scalar>(a: &CoeffGrid<T>, m: SeriesOrder, p: &ProblemParams<T>) -> CoeffGrid<Interval<T>> {
    let ai = a.to_intervals();
    let s = series_sum(&ai, m, inv_fact_interval::<T>);
    CoeffGrid::from_fn(s.dims(), |n1, n2| p.lambda(n1, n2) * ai.get(n1, n2) + s.get(n1, n2))
}

/// Enclosure of `e^x − Σ_{k=0}^M x^k/k!` for `x ∈ norm_a`, `x ≥ 0`.
///
/// Summed forward from `k = M+1` with a geometric remainder, so there is
/// no cancellation.
pub fn tail_norm<T: Scalar>(norm_a: Interval<T>, m: SeriesOrder) -> Interval<T> {
    let lo = norm_a.lo().max(T::zero());
    let hi = norm_a.hi();
    let sum = |x: T| -> Interval<T> {
        let x = Interval::point(x);
        let mut term = x.powi((m.get() + 1) as u32) * inv_fact_interval::<T>(m.get() + 1);
        let mut acc = term;
        let mut k = m.get() + 1;
        loop {
            k += 1;
            term = term * x * inv_fact_ratio::<T>(k);
            // Σ_{j≥k} x^j/j! ≤ t_k / (1 − x/(k+1)) once k + 1 > x
            let q = x.checked_div(&Interval::from_usize(k + 1)).expect("positive");
            if q.hi() < T::lit(0.5) {
                let rem = term.checked_div(&(Interval::one() - q)).expect("positive");
                let ulp = (acc.hi().next_up_() - acc.hi()).max(T::min_subnormal());
                if rem.hi() <= ulp || term.hi() == T::zero() {
                    return acc + Interval::new(T::zero(), rem.hi()).expect("ordered");
                }
            }
            acc = acc + term;
        }
    };
    if hi == T::zero() {
        return Interval::zero();
    }
    Interval::new(sum(lo).lo(), sum(hi).hi()).expect("ordered")
}

fn inv_fact_ratio<T: Scalar>(k: usize) -> Interval<T> {
    Interval::one().checked_div(&Interval::from_usize(k)).expect("positive")
}

/// `‖A F^(M)(ā)‖_ν + ‖A‖ (e^{‖ā‖_ν} − Σ_{k≤M} ‖ā‖_ν^k/k!)`.
#[allow(non_snake_case)]
pub fn bound_Y_ps<T: Scalar>(
    abar: &CoeffGrid<T>,
    a: &OperatorA<T>,
    m: SeriesOrder,
    p: &ProblemParams<T>,
    w: &Weights<T>,
) -> Result<T, SeriesError> {
    let f = F_M_interval(abar, m, p);
    let f = f.resized(f.dims().max(a.nj));
    let af = a.apply_A(p, &f)?;
    let head = norm_ell1_nu(&af, w).hi();
    let tail = tail_norm(norm_ell1_nu(abar, w), m).hi();
    Ok(add_up(head, mul_up(a.norm_A(p, w).hi(), tail)))
}

/// One continuation branch per `M`.
#[derive(Clone, Debug)]
pub struct ParityBranch<T: Scalar = f64> {
    pub m: usize,
    pub points: Vec<BranchPoint<T>>,
    /// Set when the branch could not start.
    pub error: Option<String>,
}

/// Continues `base` in `c` with `F^(M)` for every `M` in `orders`.
pub fn parity_experiment<T: Scalar>(
    q: [f64; 2],
    range: &ContinuationConfig,
    orders: &[SeriesOrder],
    base: &CoeffGrid<T>,
    cfg: &SolveConfig,
) -> Vec<ParityBranch<T>> {
    orders
        .par_iter()
        .map(|&m| {
            let r: Result<_, SolveError> = continuation(q, range, base, Nonlinearity::PowerSeries(m.get()), cfg);
            match r {
                Ok(points) => {
                    info!("M = {}: {} points down to c = {}", m.get(), points.len(), points.last().map_or(f64::NAN, |b| b.c));
                    ParityBranch { m: m.get(), points, error: None }
                }
                Err(e) => ParityBranch { m: m.get(), points: Vec::new(), error: Some(e.to_string()) },
            }
        })
        .collect()
}

/// Plot data with columns `c, M, norm, converged`.
pub fn parity_csv<T: Scalar>(branches: &[ParityBranch<T>]) -> String {
    let mut s = String::from("c,M,norm,norm_ell1,converged\n");
    for b in branches {
        for pt in &b.points {
            s.push_str(&format!("{},{},{:e},{:e},{}\n", pt.c, b.m, pt.norm_inf, pt.norm_ell1, pt.converged as u8));
        }
    }
    s
}
