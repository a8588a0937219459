//! Shared oracles and fixtures for the integration tests.
#![allow(dead_code)]

use bridgewave::bounds::{bound_Z, truncated_defect, max_weighted_col_norm, ZBound};
use bridgewave::coeff::{convolve, gamma};
use bridgewave::dft::{enclose_all, AnalyticityParams};
use bridgewave::problem::assemble_DF;
use bridgewave::{CoeffGrid, IndexPair, OperatorA, ProblemParams, TruncationSet, Weights};
use astro_float::{BigFloat, Consts, RoundingMode};
use bridgewave::dft::Direction;
use bridgewave::Interval;
use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random coefficients with `|a_n| ≤ amp·decay^{n₁+n₂}`.
pub fn random_abar(rng: &mut ChaCha8Rng, dims: IndexPair, amp: f64, decay: f64) -> CoeffGrid<f64> {
    let data = dims.iter().map(|(a, b)| amp * decay.powi((a + b) as i32) * rng.gen_range(-1.0..1.0)).collect();
    CoeffGrid::from_vec(dims, data)
}

/// `Σ_{n ∉ I⁺_N, n ≤ K} γ_n ξ₁^{n₁} ξ₂^{n₂}` summed term by term, and the
/// analytic remainder bound for `n₁ > K` or `n₂ > K`.
pub fn fgeo_partial(xi: [f64; 2], n: IndexPair, k: usize) -> (f64, f64) {
    let mut rows = Vec::with_capacity(k + 1);
    for a in 0..=k {
        let mut s = 0.0;
        for b in (0..=k).rev() {
            if !n.contains(a, b) {
                s += gamma(a, b) as f64 * xi[0].powi(a as i32) * xi[1].powi(b as i32);
            }
        }
        rows.push(s);
    }
    let sum = rows.iter().rev().sum();
    let g = |x: f64| 1.0 + 2.0 * x / (1.0 - x);
    let tail = |x: f64| 2.0 * x.powi(k as i32 + 1) / (1.0 - x);
    (sum, tail(xi[0]) * g(xi[1]) + tail(xi[1]) * g(xi[0]))
}

/// `min λ_n` over `n ∈ I⁺_{N+(200,200)} ∖ I⁺_N`, lower interval endpoint.
pub fn lambda_min_enumerated(p: &ProblemParams<f64>, n: IndexPair) -> f64 {
    let mut best = f64::INFINITY;
    for a in 0..=n.0 + 200 {
        for b in 0..=n.1 + 200 {
            if !n.contains(a, b) {
                best = best.min(p.lambda(a, b).lo());
            }
        }
    }
    best
}

/// Full `ℤ²` coefficient of the square of the cosine series, with the
/// images `n + 2 N^FFT j` added, evaluated by brute force.
pub fn aliased_square(a: &CoeffGrid<f64>, nfft: IndexPair, n: (usize, usize)) -> f64 {
    let sq = convolve(a, a);
    let d = sq.dims();
    let (m1, m2) = (2 * nfft.0 as i64, 2 * nfft.1 as i64);
    let mut s = 0.0;
    let r1 = d.0 as i64 / m1 + 1;
    let r2 = d.1 as i64 / m2 + 1;
    for j1 in -r1..=r1 {
        for j2 in -r2..=r2 {
            s += sq.get_signed(n.0 as i64 + j1 * m1, n.1 as i64 + j2 * m2);
        }
    }
    s
}

/// A small `Z` problem: bound and finite oracle.
pub struct ZCase {
    pub label: String,
    pub z: ZBound<f64>,
    pub oracle: f64,
}

pub fn z_case(c: f64, q: [f64; 2], abar: &CoeffGrid<f64>, nj: IndexPair, nu: f64, rho: [f64; 2]) -> ZCase {
    let p = ProblemParams::<f64>::new(c, q).unwrap();
    let ng = abar.dims();
    let na = IndexPair(4 * ng.0.max(nj.0), 4 * ng.1.max(nj.1));
    let nfft = IndexPair(
        bridgewave::dft::pow2_above(2 * na.0).max(64),
        bridgewave::dft::pow2_above(2 * na.1).max(64),
    );
    let mut tr = TruncationSet::with_defaults(ng, nj, na, nfft);
    tr.n_col = IndexPair(2 * nj.0 + 4, 2 * nj.1 + 4);
    tr.n_tail = nj;
    tr.validate(&p).unwrap();
    let ap = AnalyticityParams::new(rho).unwrap();
    let [_, bp, _] = enclose_all(abar, &ap, na, nfft).unwrap();
    let span = tr.n_row.plus(tr.n_col).max(na);
    let w = Weights::new([nu, nu], span);
    let bmid = CoeffGrid::from_fn(nj.plus(nj), |a, b| bp.get(a, b).mid());
    let a = OperatorA::from_jacobian(nj, &assemble_DF(&p, &bmid, nj)).unwrap();
    let z = bound_Z(&p, &a, &bp, &tr, &w).unwrap();
    let bx = tr.n_col.plus(IndexPair(6, 6));
    let bfull = CoeffGrid::from_fn(bx.plus(bx), |a, b| bp.get(a, b).mid());
    let m = truncated_defect(&p, &a, &bfull, bx);
    let oracle = max_weighted_col_norm(&m, bx, &w);
    ZCase { label: format!("c={c} q={q:?} N^Jac={nj} nu={nu}"), z, oracle }
}

pub const PREC: usize = 160;
pub const RM: RoundingMode = RoundingMode::None;

pub fn big(x: f64) -> BigFloat {
    BigFloat::from_f64(x, PREC)
}

/// Containment up to the oracle's own precision.
pub fn contains_big(iv: Interval<f64>, x: &BigFloat) -> bool {
    let slack = big(1e-40);
    big(iv.lo()).sub(&slack, PREC, RM) <= *x && *x <= big(iv.hi()).add(&slack, PREC, RM)
}

/// Exact DFT of point data in multiprecision, `exp(∓2πi n·k/m)`.
pub fn exact_dft(data: &[Complex<f64>], m1: usize, m2: usize, dir: Direction, cc: &mut Consts) -> Vec<(BigFloat, BigFloat)> {
    let two_pi = cc.pi(PREC, RM).mul(&big(2.0), PREC, RM);
    let table = |m: usize, cc: &mut Consts| -> Vec<(BigFloat, BigFloat)> {
        (0..m)
            .map(|j| {
                let t = two_pi.mul(&big(j as f64), PREC, RM).div(&big(m as f64), PREC, RM);
                let s = t.sin(PREC, RM, cc);
                let s = if dir == Direction::Forward { s.neg() } else { s };
                (t.cos(PREC, RM, cc), s)
            })
            .collect()
    };
    let (w1, w2) = (table(m1, cc), table(m2, cc));
    let cmul = |a: &(BigFloat, BigFloat), b: &(BigFloat, BigFloat)| {
        (
            a.0.mul(&b.0, PREC, RM).sub(&a.1.mul(&b.1, PREC, RM), PREC, RM),
            a.0.mul(&b.1, PREC, RM).add(&a.1.mul(&b.0, PREC, RM), PREC, RM),
        )
    };
    let mut out = Vec::with_capacity(m1 * m2);
    for k1 in 0..m1 {
        for k2 in 0..m2 {
            let mut acc = (big(0.0), big(0.0));
            for n1 in 0..m1 {
                for n2 in 0..m2 {
                    let w = cmul(&w1[(n1 * k1) % m1], &w2[(n2 * k2) % m2]);
                    let z = data[n1 * m2 + n2];
                    let t = cmul(&w, &(big(z.re), big(z.im)));
                    acc = (acc.0.add(&t.0, PREC, RM), acc.1.add(&t.1, PREC, RM));
                }
            }
            out.push(acc);
        }
    }
    out
}

