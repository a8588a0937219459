//! The `Y`, `Z` and `W` bounds, the radius search and certificates.
//!
//! Every bound is returned as an upward-rounded float.

pub mod certificate;
pub mod radii;

use log::debug;
use rayon::prelude::*;
use thiserror::Error;

use crate::coeff::{distinct_reflections, CoeffGrid, IndexPair, Weights};
use crate::dft::{f_geo, DftError, EnclosedCoeffs};
use crate::interval::rounding::{add_up, div_up, mul_up, SumUp};
use crate::interval::Interval;
use crate::linalg::{enclose_product, gamma_n, split_intervals, LinalgError, Matrix};
use crate::problem::{toeplitz_entry, OperatorA, ProblemError, ProblemParams, TruncationSet};
use crate::scalar::Scalar;

pub use certificate::{check_certificate, prove, Certificate, ProofInputs, Status};
pub use radii::{find_rstar, verify_radii, Radii};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BoundError {
    #[error("nu = {nu:?} must lie strictly below nu_bar = exp(rho_bar) = {nu_bar:?}")]
    NuNotBelowNuBar { nu: [f64; 2], nu_bar: [f64; 2] },
    #[error("condition {0} fails: {1}")]
    Condition(&'static str, String),
    #[error(transparent)]
    Dft(#[from] DftError),
    #[error(transparent)]
    Problem(#[from] ProblemError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// `ν/ν̄` componentwise, checked to lie in `[0,1)`.
pub fn nu_ratio<T: Scalar>(w: &Weights<T>, nu_bar: &Weights<T>) -> Result<[Interval<T>; 2], BoundError> {
    let (a, b) = (w.base(), nu_bar.base());
    let r = [a[0].checked_div(&b[0]).expect("positive"), a[1].checked_div(&b[1]).expect("positive")];
    if r[0].hi() >= T::one() || r[1].hi() >= T::one() {
        return Err(BoundError::NuNotBelowNuBar {
            nu: [a[0].hi().to_f64_exact(), a[1].hi().to_f64_exact()],
            nu_bar: [b[0].lo().to_f64_exact(), b[1].lo().to_f64_exact()],
        });
    }
    Ok(r)
}

fn recip_lambda_min<T: Scalar>(p: &ProblemParams<T>, n: IndexPair) -> Result<Interval<T>, BoundError> {
    let l = p.lambda_min(n);
    if l.lo() <= T::zero() {
        return Err(BoundError::Condition("lambda_min > 0", format!("lambda_min({n}) = {l:?}")));
    }
    Ok(Interval::one().checked_div(&l).expect("positive"))
}

/// Upper bound of `‖A F(ā)‖_ν`.
#[allow(non_snake_case)]
pub fn bound_Y<T: Scalar>(
    p: &ProblemParams<T>,
    abar: &CoeffGrid<T>,
    a: &OperatorA<T>,
    b: &EnclosedCoeffs<T>,
    trunc: &TruncationSet,
    w: &Weights<T>,
) -> Result<T, BoundError> {
    let nj = trunc.n_jac;
    let na = trunc.n_alias;
    let xi = nu_ratio(w, b.nu_bar())?;
    // block part |A^{N^Jac} F^{N^Jac}|
    let (fm, fr) = split_intervals(nj.box_len(), 1, |i, _| {
        let (n1, n2) = nj.unflat(i);
        crate::problem::residual_F(p, abar, b, n1, n2)
    });
    let af = enclose_product(&a.block, &a.block.abs(), &fm, &fr)?;
    let mut y1 = SumUp::new();
    for (i, (n1, n2)) in nj.iter().enumerate() {
        y1.add_prod(af.get(i, 0).mag(), w.omega(n1, n2).hi());
    }
    // mid range n ∈ I⁺_{N^Alias} ∖ I⁺_{N^Jac}
    let rows: Vec<T> = (0..=na.0)
        .into_par_iter()
        .map(|n1| {
            let mut acc = SumUp::new();
            for n2 in 0..=na.1 {
                if nj.contains(n1, n2) {
                    continue;
                }
                let lam = p.lambda(n1, n2);
                let v = lam * Interval::point(abar.get(n1, n2)) + b.fft_part.get(n1, n2);
                let mag = add_up(v.mag(), b.alias_error(n1, n2));
                let f = w.omega(n1, n2).checked_div(&lam).expect("lambda positive");
                acc.add_prod(mag, f.hi());
            }
            acc.value()
        })
        .collect();
    let y2 = rows.into_iter().fold(T::zero(), add_up);
    // tail n ∉ I⁺_{N^Alias}
    let y3 = (Interval::point(b.c_hat) * f_geo(xi, na)? * recip_lambda_min(p, na)?).hi();
    debug!("Y parts: block {:e}, alias range {:e}, tail {:e}", y1.value(), y2, y3);
    Ok(add_up(add_up(y1.value(), y2), y3))
}

/// `μ̂(j, N)` tables for `j ≤ jmax`.
///
/// `μ(j,k) = ¼ P₁(j₁,k₁) P₂(j₂,k₂)` with
/// `P_d(j,k) = (ν̄_d^{−|j−k|} + ν̄_d^{−(j+k)}) ν_d^{−k}`, so the maximum over
/// the boundary set `𝓘_N` splits into one-dimensional maxima.
#[derive(Clone, Debug)]
pub struct MuHat<T: Scalar = f64> {
    /// `max_{k ≤ N_d} P_d(j, k)`.
    inner: [Vec<Interval<T>>; 2],
    /// `P_d(j, N_d + 1)`.
    edge: [Vec<Interval<T>>; 2],
}

/// `P_d(j,k)` for one direction.
pub fn mu_factor<T: Scalar>(nu: Interval<T>, nu_bar: Interval<T>, j: usize, k: usize) -> Interval<T> {
    let one = Interval::one();
    let inv_bar = one.checked_div(&nu_bar).expect("positive");
    let inv_nu = one.checked_div(&nu).expect("positive");
    (inv_bar.powi(j.abs_diff(k) as u32) + inv_bar.powi((j + k) as u32)) * inv_nu.powi(k as u32)
}

/// `μ(j,k) = ¼ Σᵢ ν̄^{−|j−hᵢ(k)|} ν^{−k}`.
pub fn mu<T: Scalar>(nu: [Interval<T>; 2], nu_bar: [Interval<T>; 2], j: (usize, usize), k: (usize, usize)) -> Interval<T> {
    mu_factor(nu[0], nu_bar[0], j.0, k.0) * mu_factor(nu[1], nu_bar[1], j.1, k.1) * Interval::from_f64(0.25)
}

impl<T: Scalar> MuHat<T> {
    pub fn new(nu: [Interval<T>; 2], nu_bar: [Interval<T>; 2], n: IndexPair, jmax: IndexPair) -> Self {
        let dir = |d: usize, nd: usize, jm: usize| -> (Vec<Interval<T>>, Vec<Interval<T>>) {
            let one = Interval::one();
            let inv_bar = one.checked_div(&nu_bar[d]).expect("positive");
            let inv_nu = one.checked_div(&nu[d]).expect("positive");
            let bar_pows = powers(inv_bar, jm + nd + 2);
            let nu_pows = powers(inv_nu, nd + 1);
            let pf = |j: usize, k: usize| (bar_pows[j.abs_diff(k)] + bar_pows[j + k]) * nu_pows[k];
            let inner = (0..=jm)
                .map(|j| (0..=nd).map(|k| pf(j, k)).reduce(|a, b| a.max(&b)).expect("nonempty"))
                .collect();
            let edge = (0..=jm).map(|j| pf(j, nd + 1)).collect();
            (inner, edge)
        };
        let (i1, e1) = dir(0, n.0, jmax.0);
        let (i2, e2) = dir(1, n.1, jmax.1);
        MuHat { inner: [i1, i2], edge: [e1, e2] }
    }

    /// Enclosure of `max_{k ∈ 𝓘_N} μ(j, k)`.
    pub fn get(&self, j1: usize, j2: usize) -> Interval<T> {
        let top = self.edge[1][j2] * self.inner[0][j1];
        let right = self.edge[0][j1] * self.inner[1][j2];
        top.max(&right) * Interval::from_f64(0.25)
    }
}

fn powers<T: Scalar>(x: Interval<T>, n: usize) -> Vec<Interval<T>> {
    let mut v = Vec::with_capacity(n + 1);
    let mut p = Interval::one();
    for _ in 0..=n {
        v.push(p);
        p = p * x;
    }
    v
}

/// `μ̂(j, N)` for a single index (`j ∈ I⁺_N`).
pub fn mu_hat<T: Scalar>(j: (usize, usize), n: IndexPair, nu: [Interval<T>; 2], nu_bar: [Interval<T>; 2]) -> Result<Interval<T>, BoundError> {
    if !n.contains(j.0, j.1) {
        return Err(BoundError::Condition("j in I+_N", format!("j = ({},{}), N = {n}", j.0, j.1)));
    }
    Ok(MuHat::new(nu, nu_bar, n, IndexPair(j.0, j.1)).get(j.0, j.1))
}

/// The parts of the `Z` bound.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ZBound<T: Scalar = f64> {
    pub z: T,
    pub z_col: T,
    pub z_est: T,
    /// Column attaining `Z^Col`.
    pub worst_col: IndexPair,
    pub z_est_parts: [T; 3],
}

const COL_CHUNK: usize = 256;

/// Upper bound of `‖I − A DF(ā)‖_{B(X)} = max{Z^Col, Z^Est}`.
#[allow(non_snake_case)]
pub fn bound_Z<T: Scalar>(
    p: &ProblemParams<T>,
    a: &OperatorA<T>,
    bp: &EnclosedCoeffs<T>,
    trunc: &TruncationSet,
    w: &Weights<T>,
) -> Result<ZBound<T>, BoundError> {
    let nj = trunc.n_jac;
    let ncol = trunc.n_col;
    let nrow = trunc.n_row;
    let ntail = trunc.n_tail;
    let xi = nu_ratio(w, bp.nu_bar())?;
    let c1 = Interval::point(bp.c_hat);

    // b̄′ enclosures on every index |n − h| that occurs
    let bgrid = bp.grid(nrow.plus(ncol));
    let bget = |n1: usize, n2: usize| bgrid.get(n1, n2);

    let dj = nj.box_len();
    let omega_j: Vec<T> = nj.iter().map(|(a1, a2)| w.omega(a1, a2).hi()).collect();
    let rows = RowSums::new(p, w, &bgrid, nj, nrow, ncol);
    let a_abs = a.block.abs();
    let term3_const = (c1 * f_geo(xi, nrow)? * recip_lambda_min(p, nrow)?).hi();

    let cols: Vec<(usize, usize)> = ncol.iter().collect();
    let chunk_results: Vec<Result<(T, IndexPair), BoundError>> = cols
        .par_chunks(COL_CHUNK)
        .map(|chunk| {
            let (tm, tr) = split_intervals(dj, chunk.len(), |j, c| toeplitz_entry(&bget, nj.unflat(j), chunk[c]));
            let prod = enclose_product(&a.block, &a_abs, &tm, &tr)?;
            let mut best = (T::zero(), IndexPair::ZERO);
            for (c, &k) in chunk.iter().enumerate() {
                let k_in = nj.contains(k.0, k.1);
                let kflat = if k_in { nj.flat(k.0, k.1) } else { 0 };
                let lam_k = p.lambda(k.0, k.1);
                let mut s1 = SumUp::new();
                for n in 0..dj {
                    let mut e = -prod.get(n, c);
                    if k_in {
                        let delta = if n == kflat { Interval::one() } else { Interval::zero() };
                        e = e + delta - Interval::point(a.block.get(n, kflat)) * lam_k;
                    }
                    s1.add_prod(e.mag(), omega_j[n]);
                }
                let om_k = w.omega(k.0, k.1).lo();
                let t1 = div_up(s1.value(), om_k);
                let t2 = div_up(rows.column(k), om_k);
                let ratio = bp.nu_bar().nu_pow(k.0, k.1).checked_div(&w.nu_pow(k.0, k.1)).expect("positive").hi();
                let t3 = mul_up(term3_const, ratio);
                let total = add_up(add_up(t1, t2), t3);
                if c == 0 || total > best.0 {
                    best = (total, IndexPair(k.0, k.1));
                }
            }
            Ok(best)
        })
        .collect();
    let mut z_col = T::zero();
    let mut worst_col = IndexPair::ZERO;
    for r in chunk_results {
        let (v, k) = r?;
        if v > z_col {
            z_col = v;
            worst_col = k;
        }
    }

    // Z^Est
    let nu = w.base();
    let nub = bp.nu_bar().base();
    let mh = MuHat::new(nu, nub, ncol, ntail);
    let colsum = a.weighted_col_sums(w);
    let mut e1 = SumUp::new();
    for (j, (j1, j2)) in nj.iter().enumerate() {
        e1.add_prod(mh.get(j1, j2).hi(), colsum[j]);
    }
    let e1 = mul_up(bp.c_hat, e1.value());
    let mut e2 = SumUp::new();
    for (n1, n2) in ntail.iter() {
        if nj.contains(n1, n2) {
            continue;
        }
        let f = w.omega(n1, n2).checked_div(&p.lambda(n1, n2)).expect("lambda positive");
        e2.add_prod(mh.get(n1, n2).hi(), f.hi());
    }
    let e2 = mul_up(bp.c_hat, e2.value());
    let na = bp.n_alias();
    let mut bn = SumUp::new();
    for (n1, n2) in na.iter() {
        bn.add_prod(bp.mag(n1, n2), w.omega(n1, n2).hi());
    }
    let bnorm = add_up(bn.value(), (c1 * f_geo(xi, na)?).hi());
    let e3 = (Interval::point(bnorm) * recip_lambda_min(p, ntail)?).hi();
    let z_est = add_up(add_up(e1, e2), e3);
    debug!("Z^Col = {z_col:e} (column {worst_col}), Z^Est = {z_est:e} [{e1:e}, {e2:e}, {e3:e}]");
    Ok(ZBound { z: z_col.max(z_est), z_col, z_est, worst_col, z_est_parts: [e1, e2, e3] })
}

/// `Σ_{n ∈ I⁺_{N^Row} ∖ I⁺_{N^Jac}} |T_nk| ω_n/λ_n`, bounded through
/// `|T_nk| ≤ Σ_h |b̄′_{|n−h|}|`.
///
/// Each row of `|b̄′|` is stored mirrored so the inner sums are contiguous
/// dot products; the rounding error is bounded once per column.
struct RowSums<T: Scalar> {
    /// `up(ω_n/λ_n)` on `I⁺_{N^Row}`, zero on `I⁺_{N^Jac}`.
    wl: Vec<T>,
    /// Row `r` holds `|b̄′_{r, |t − R₂|}|` for `t ∈ [0, 2R₂]`.
    mirror: Vec<T>,
    nrow: IndexPair,
    r2: usize,
    slack: T,
    terms_per_refl: usize,
}

impl<T: Scalar> RowSums<T> {
    fn new(
        p: &ProblemParams<T>,
        w: &Weights<T>,
        bgrid: &CoeffGrid<Interval<T>>,
        nj: IndexPair,
        nrow: IndexPair,
        ncol: IndexPair,
    ) -> Self {
        let r = nrow.plus(ncol);
        let width = 2 * r.1 + 1;
        let mut mirror = vec![T::zero(); (r.0 + 1) * width];
        for (i, row) in mirror.chunks_mut(width).enumerate() {
            for (t, x) in row.iter_mut().enumerate() {
                *x = bgrid.get(i, t.abs_diff(r.1)).mag();
            }
        }
        let wl = nrow
            .iter()
            .map(|(n1, n2)| {
                if nj.contains(n1, n2) {
                    T::zero()
                } else {
                    w.omega(n1, n2).checked_div(&p.lambda(n1, n2)).expect("lambda positive").hi()
                }
            })
            .collect();
        let terms_per_refl = nrow.box_len();
        let n = 4 * terms_per_refl;
        let slack = div_up(T::one(), crate::interval::rounding::sub_down(T::one(), gamma_n::<T>(n)));
        RowSums { wl, mirror, nrow, r2: r.1, slack, terms_per_refl }
    }

    fn column(&self, k: (usize, usize)) -> T {
        let width = 2 * self.r2 + 1;
        let len2 = self.nrow.1 + 1;
        let mut acc = T::zero();
        let mut count = 0;
        for (h1, h2) in distinct_reflections(k.0, k.1) {
            let start = (self.r2 as i64 - h2) as usize;
            for n1 in 0..=self.nrow.0 {
                let m = (n1 as i64 - h1).unsigned_abs() as usize;
                let mrow = &self.mirror[m * width + start..m * width + start + len2];
                let wrow = &self.wl[n1 * len2..(n1 + 1) * len2];
                acc = acc + dot(mrow, wrow);
            }
            count += self.terms_per_refl;
        }
        // nonnegative terms: exact ≤ fl/(1 − γ_n) + n·η
        let eta = mul_up(T::from_usize_exact(count), T::min_subnormal());
        add_up(mul_up(acc, self.slack), eta)
    }
}

fn dot<T: Scalar>(a: &[T], b: &[T]) -> T {
    let mut acc = [T::zero(); 8];
    let ca = a.chunks_exact(8);
    let cb = b.chunks_exact(8);
    let tail: T = ca.remainder().iter().zip(cb.remainder()).map(|(&x, &y)| x * y).fold(T::zero(), |s, v| s + v);
    for (x, y) in ca.zip(cb) {
        for i in 0..8 {
            acc[i] = acc[i] + x[i] * y[i];
        }
    }
    acc.iter().fold(tail, |s, &v| s + v)
}

/// Upper bound of `‖e^ā‖_ν` from the `𝒢″` enclosure.
pub fn exp_norm<T: Scalar>(bpp: &EnclosedCoeffs<T>, w: &Weights<T>) -> Result<T, BoundError> {
    let xi = nu_ratio(w, bpp.nu_bar())?;
    let na = bpp.n_alias();
    let mut s = SumUp::new();
    for (n1, n2) in na.iter() {
        let m = add_up(bpp.fft_part.get(n1, n2).mag(), bpp.alias_error(n1, n2));
        s.add_prod(m, w.omega(n1, n2).hi());
    }
    Ok(add_up(s.value(), (Interval::point(bpp.c_hat) * f_geo(xi, na)?).hi()))
}

/// `Ŵ = ‖A‖ ‖e^ā‖_ν`, returned with `‖A‖`.
#[allow(non_snake_case)]
pub fn bound_W_hat<T: Scalar>(
    p: &ProblemParams<T>,
    a: &OperatorA<T>,
    bpp: &EnclosedCoeffs<T>,
    w: &Weights<T>,
) -> Result<(T, T), BoundError> {
    let na = a.norm_A(p, w).hi();
    Ok((mul_up(na, exp_norm(bpp, w)?), na))
}

/// `W = Ŵ e^{r*}`.
#[allow(non_snake_case)]
pub fn bound_W<T: Scalar>(w_hat: T, r_star: T) -> T {
    (Interval::point(w_hat) * crate::interval::elementary::exp(&Interval::point(r_star))).hi()
}

/// Dense `I − A·DF(ā)` on a finite box, used as an oracle for `Z`.
///
/// Rows and columns cover `I⁺_{box}` with `b̄′` given by midpoints.
pub fn truncated_defect<T: Scalar>(
    p: &ProblemParams<T>,
    a: &OperatorA<T>,
    bprime_mid: &CoeffGrid<T>,
    bx: IndexPair,
) -> Matrix<T> {
    let nj = a.nj;
    let bp = |n1: usize, n2: usize| bprime_mid.get(n1, n2);
    let d = bx.box_len();
    Matrix::from_fn(d, d, |i, j| {
        let n = bx.unflat(i);
        let k = bx.unflat(j);
        let delta = if i == j { T::one() } else { T::zero() };
        let adf = if nj.contains(n.0, n.1) {
            let nf = nj.flat(n.0, n.1);
            let mut s = T::zero();
            for (jf, jj) in nj.iter().enumerate() {
                let mut df = toeplitz_entry(&bp, jj, k);
                if jj == k {
                    df = df + p.lambda_float(k.0, k.1);
                }
                s = s + a.block.get(nf, jf) * df;
            }
            s
        } else {
            let df = toeplitz_entry(&bp, n, k) + if n == k { p.lambda_float(k.0, k.1) } else { T::zero() };
            df / p.lambda_float(n.0, n.1)
        };
        delta - adf
    })
}

/// Largest weighted column norm of a dense defect on `I⁺_{box}`.
pub fn max_weighted_col_norm<T: Scalar>(m: &Matrix<T>, bx: IndexPair, w: &Weights<T>) -> T {
    let d = bx.box_len();
    (0..d)
        .map(|j| {
            let (k1, k2) = bx.unflat(j);
            let s: T = (0..d).map(|i| {
                let (n1, n2) = bx.unflat(i);
                m.get(i, j).abs() * w.omega(n1, n2).mid()
            }).sum();
            s / w.omega(k1, k2).mid()
        })
        .fold(T::zero(), |a, b| a.max(b))
}
