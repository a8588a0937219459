//! Non-rigorous numerics: initial guesses, damped Newton on the Galerkin
//! truncation and natural continuation in the wave speed.

use std::path::PathBuf;

use log::{debug, info, warn};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::coeff::{norm_ell1_nu, CoeffGrid, DumpError, IndexPair, Weights};
use crate::dft::{forward_float, pow2_above, sample_u_float, DftError};
use crate::linalg::LinalgError;
use crate::problem::{assemble_DF, ProblemError, ProblemParams};
use crate::scalar::Scalar;

#[derive(Debug, Error)]
pub enum SolveError {
    #[error("Newton did not converge after {iters} iterations (residual {residual:e})")]
    NoConvergence { iters: usize, residual: f64 },
    #[error("singular Jacobian")]
    Singular,
    #[error("invalid solver configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Dft(#[from] DftError),
    #[error(transparent)]
    Problem(#[from] ProblemError),
    #[error(transparent)]
    Dump(#[from] DumpError),
}

impl From<LinalgError> for SolveError {
    fn from(_: LinalgError) -> Self {
        SolveError::Singular
    }
}

/// Nonlinearity used by the numerics: the full `eᵘ−u−1` or its Taylor
/// polynomial `Σ_{k=2}^M uᵏ/k!`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Nonlinearity {
    Full,
    PowerSeries(usize),
}

impl Nonlinearity {
    pub fn g<T: Scalar>(&self, u: T) -> T {
        match *self {
            Nonlinearity::Full => u.exp_m1() - u,
            Nonlinearity::PowerSeries(m) => {
                // Horner on Σ_{k=2}^m u^k/k! = u²(1/2! + u(1/3! + ...))
                let mut acc = T::zero();
                for k in (2..=m).rev() {
                    acc = acc * u + T::one() / factorial::<T>(k);
                }
                acc * u * u
            }
        }
    }

    pub fn gp<T: Scalar>(&self, u: T) -> T {
        match *self {
            Nonlinearity::Full => u.exp_m1(),
            Nonlinearity::PowerSeries(m) => {
                let mut acc = T::zero();
                for k in (1..m).rev() {
                    acc = acc * u + T::one() / factorial::<T>(k);
                }
                acc * u
            }
        }
    }

    /// FFT size for evaluating `g(ū)` and `g′(ū)` up to index `2N^Gal`.
    ///
    /// For the polynomial the transform is alias-free on that range.
    pub fn fft_size(&self, n_gal: IndexPair) -> IndexPair {
        let f = |n: usize| match *self {
            Nonlinearity::Full => pow2_above(2 * n).max(8),
            Nonlinearity::PowerSeries(m) => pow2_above(((m + 2) * n).div_ceil(2)).max(8),
        };
        IndexPair(f(n_gal.0), f(n_gal.1))
    }
}

fn factorial<T: Scalar>(k: usize) -> T {
    (1..=k).fold(T::one(), |acc, i| acc * T::from_usize_exact(i))
}

/// Initial guess for Newton's method.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Guess {
    Zero,
    /// `−α exp(−|x|²/σ²)`.
    OnePeak { amplitude: f64, width: f64 },
    /// Two bumps at `x₁ = ±separation/2`.
    TwoPeak { amplitude: f64, width: f64, separation: f64 },
    /// One bump at the origin and a two-peak pair around `x₁ = L₁`.
    Combination { amplitude: f64, width: f64, separation: f64 },
    /// Coefficients from a CSV or binary dump.
    FromFile { path: PathBuf },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolveConfig {
    pub max_iters: usize,
    pub residual_tol: f64,
    pub damping: f64,
    pub guess: Guess,
}

impl Default for SolveConfig {
    fn default() -> Self {
        SolveConfig {
            max_iters: 60,
            residual_tol: 1e-12,
            damping: 1.0,
            guess: Guess::OnePeak { amplitude: 4.0, width: 3.0 },
        }
    }
}

impl SolveConfig {
    pub fn validate(&self) -> Result<(), SolveError> {
        if self.max_iters < 1 {
            return Err(SolveError::Config("max_iters must be at least 1".into()));
        }
        if !(self.residual_tol > 0.0) {
            return Err(SolveError::Config("residual_tol must be positive".into()));
        }
        if !(self.damping > 0.0 && self.damping <= 1.0) {
            return Err(SolveError::Config("damping must lie in (0,1]".into()));
        }
        Ok(())
    }
}

fn bump(x1: f64, x2: f64, amplitude: f64, width: f64) -> f64 {
    -amplitude * (-(x1 * x1 + x2 * x2) / (width * width)).exp()
}

/// Cosine coefficients of a profile given in physical coordinates.
pub fn project<T: Scalar>(
    p: &ProblemParams<T>,
    n_gal: IndexPair,
    f: impl Fn(f64, f64) -> f64 + Sync,
) -> Result<CoeffGrid<T>, SolveError> {
    let nfft = IndexPair(pow2_above(2 * n_gal.0).max(8), pow2_above(2 * n_gal.1).max(8));
    let (m1, m2) = (2 * nfft.0, 2 * nfft.1);
    let coord = |k: usize, m: usize, q: f64| {
        let k = if k > m / 2 { k as f64 - m as f64 } else { k as f64 };
        2.0 * std::f64::consts::PI * k / (m as f64 * q)
    };
    let samples: Vec<T> = (0..m1 * m2)
        .into_par_iter()
        .map(|i| T::lit(f(coord(i / m2, m1, p.q[0]), coord(i % m2, m2, p.q[1]))))
        .collect();
    Ok(forward_float(&samples, nfft, n_gal)?)
}

pub fn initial_guess<T: Scalar>(p: &ProblemParams<T>, n_gal: IndexPair, g: &Guess) -> Result<CoeffGrid<T>, SolveError>
where
    CoeffGrid<T>: LoadCoeffs,
{
    let [l1, _] = p.half_periods();
    match g {
        Guess::Zero => Ok(CoeffGrid::zeros(n_gal)),
        Guess::OnePeak { amplitude, width } => project(p, n_gal, |x1, x2| bump(x1, x2, *amplitude, *width)),
        Guess::TwoPeak { amplitude, width, separation } => project(p, n_gal, |x1, x2| {
            let h = separation / 2.0;
            bump(x1 - h, x2, *amplitude, *width) + bump(x1 + h, x2, *amplitude, *width)
        }),
        Guess::Combination { amplitude, width, separation } => project(p, n_gal, |x1, x2| {
            let h = separation / 2.0;
            let far = l1 - x1.abs();
            bump(x1, x2, *amplitude, *width) + bump(far - h, x2, *amplitude, *width) + bump(far + h, x2, *amplitude, *width)
        }),
        Guess::FromFile { path } => Ok(CoeffGrid::<T>::load(path)?.resized(n_gal)),
    }
}

/// Loading coefficient files (CSV by extension, binary dump otherwise).
pub trait LoadCoeffs: Sized {
    fn load(path: &std::path::Path) -> Result<Self, DumpError>;
}

impl LoadCoeffs for CoeffGrid<f64> {
    fn load(path: &std::path::Path) -> Result<Self, DumpError> {
        if path.extension().and_then(|e| e.to_str()) == Some("csv") {
            CoeffGrid::from_csv(&std::fs::read_to_string(path)?)
        } else {
            CoeffGrid::read_binary(path)
        }
    }
}

impl LoadCoeffs for CoeffGrid<f32> {
    fn load(path: &std::path::Path) -> Result<Self, DumpError> {
        Ok(CoeffGrid::<f64>::load(path)?.map(|x| x as f32))
    }
}

/// `g(ū)` on `I⁺_{N^Gal}` and `g′(ū)` on `I⁺_{2N^Gal}`.
pub fn nonlinear_terms<T: Scalar>(
    a: &CoeffGrid<T>,
    nl: Nonlinearity,
) -> Result<(CoeffGrid<T>, CoeffGrid<T>), SolveError> {
    let n = a.dims();
    let nfft = nl.fft_size(n);
    let u = sample_u_float(a, nfft)?;
    let g: Vec<T> = u.par_iter().map(|&x| nl.g(x)).collect();
    let gp: Vec<T> = u.par_iter().map(|&x| nl.gp(x)).collect();
    Ok((forward_float(&g, nfft, n)?, forward_float(&gp, nfft, n.plus(n))?))
}

/// Floating-point `Π^{N^Gal} F(a)`.
pub fn residual_float<T: Scalar>(p: &ProblemParams<T>, a: &CoeffGrid<T>, nl: Nonlinearity) -> Result<CoeffGrid<T>, SolveError> {
    let (b, _) = nonlinear_terms(a, nl)?;
    Ok(CoeffGrid::from_fn(a.dims(), |n1, n2| p.lambda_float(n1, n2) * a.get(n1, n2) + b.get(n1, n2)))
}

#[derive(Clone, Debug)]
pub struct Solution<T: Scalar = f64> {
    pub abar: CoeffGrid<T>,
    pub residual: f64,
    pub iterations: usize,
    pub history: Vec<f64>,
}

/// Damped Newton iteration on `Π^{N^Gal} F` with backtracking.
pub fn newton_solve<T: Scalar>(
    p: &ProblemParams<T>,
    start: CoeffGrid<T>,
    nl: Nonlinearity,
    cfg: &SolveConfig,
) -> Result<Solution<T>, SolveError> {
    cfg.validate()?;
    let n = start.dims();
    let mut a = start;
    let sup = |g: &CoeffGrid<T>| {
        if g.data().iter().any(|x| !x.is_finite()) {
            f64::INFINITY
        } else {
            g.max_abs().to_f64_exact()
        }
    };
    let (b, mut bp) = nonlinear_terms(&a, nl)?;
    let mut f = CoeffGrid::from_fn(n, |i, j| p.lambda_float(i, j) * a.get(i, j) + b.get(i, j));
    let mut res = sup(&f);
    let mut history = vec![res];
    for it in 0..cfg.max_iters {
        if res <= cfg.residual_tol {
            debug!("Newton converged after {it} iterations, residual {res:e}");
            return Ok(Solution { abar: a, residual: res, iterations: it, history });
        }
        let jac = assemble_DF(p, &bp, n);
        let rhs: Vec<T> = f.data().iter().map(|&x| -x).collect();
        let delta = jac.solve(&rhs)?;
        let mut t = cfg.damping;
        let mut accepted = false;
        for _ in 0..30 {
            let cand = CoeffGrid::from_fn(n, |i, j| a.get(i, j) + T::lit(t) * delta[n.flat(i, j)]);
            let (cb, cbp) = nonlinear_terms(&cand, nl)?;
            let cf = CoeffGrid::from_fn(n, |i, j| p.lambda_float(i, j) * cand.get(i, j) + cb.get(i, j));
            let cres = sup(&cf);
            if cres.is_finite() && (cres < res || cres <= cfg.residual_tol) {
                a = cand;
                bp = cbp;
                f = cf;
                res = cres;
                accepted = true;
                break;
            }
            t *= 0.5;
        }
        history.push(res);
        if !accepted {
            // residual cannot decrease any further in floating point
            if res <= cfg.residual_tol.max(1e3 * f64::EPSILON * (1.0 + sup(&a))) {
                break;
            }
            return Err(SolveError::NoConvergence { iters: it + 1, residual: res });
        }
        debug!("Newton step {}: residual {res:e}, step {t}", it + 1);
    }
    if res <= cfg.residual_tol {
        Ok(Solution { abar: a, residual: res, iterations: history.len() - 1, history })
    } else {
        Err(SolveError::NoConvergence { iters: cfg.max_iters, residual: res })
    }
}

/// Builds the guess from the configuration and runs Newton.
pub fn solve<T: Scalar>(p: &ProblemParams<T>, n_gal: IndexPair, nl: Nonlinearity, cfg: &SolveConfig) -> Result<Solution<T>, SolveError>
where
    CoeffGrid<T>: LoadCoeffs,
{
    let start = initial_guess(p, n_gal, &cfg.guess)?;
    newton_solve(p, start, nl, cfg)
}

/// One row of a continuation branch.
#[derive(Clone, Debug)]
pub struct BranchPoint<T: Scalar = f64> {
    pub c: f64,
    pub norm_inf: f64,
    pub norm_ell1: f64,
    pub converged: bool,
    pub abar: CoeffGrid<T>,
}

/// `sup |u|` sampled on the FFT mesh of twice the grid size.
pub fn sup_norm<T: Scalar>(a: &CoeffGrid<T>) -> f64 {
    let d = a.dims();
    let nfft = IndexPair(pow2_above(2 * d.0).max(8), pow2_above(2 * d.1).max(8));
    match sample_u_float(a, nfft) {
        Ok(u) => u.iter().fold(0.0f64, |m, x| m.max(x.to_f64_exact().abs())),
        Err(_) => f64::NAN,
    }
}

pub fn ell1_norm<T: Scalar>(a: &CoeffGrid<T>) -> f64 {
    let w = Weights::new([T::one(), T::one()], a.dims());
    norm_ell1_nu(a, &w).hi().to_f64_exact()
}

/// Continuation settings: `c` moves from `c_start` toward `c_end`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ContinuationConfig {
    pub c_start: f64,
    pub c_end: f64,
    pub step: f64,
    pub min_step: f64,
}

/// Natural continuation in `c` from a solution at `range.c_start`.
///
/// A failed step is halved until `min_step`; after that the partial branch
/// is returned.
pub fn continuation<T: Scalar>(
    q: [f64; 2],
    range: &ContinuationConfig,
    base: &CoeffGrid<T>,
    nl: Nonlinearity,
    cfg: &SolveConfig,
) -> Result<Vec<BranchPoint<T>>, SolveError> {
    let dir = if range.c_end < range.c_start { -1.0 } else { 1.0 };
    let p0 = ProblemParams::<T>::new(range.c_start, q)?;
    let first = newton_solve(&p0, base.clone(), nl, cfg)?;
    let mut branch = vec![point(range.c_start, first.abar, true)];
    let mut c = range.c_start;
    let mut step = range.step.abs();
    let done = |c: f64| dir * (c - range.c_end) >= -1e-12;
    while !done(c) {
        let next = if dir * (range.c_end - c) < step { range.c_end } else { c + dir * step };
        let p = ProblemParams::<T>::new(next, q)?;
        let prev = &branch.last().expect("nonempty").abar;
        match newton_solve(&p, prev.clone(), nl, cfg) {
            Ok(s) => {
                debug!("continuation {:?}: c = {next:.6}, |u| = {:.6}", nl, sup_norm(&s.abar));
                branch.push(point(next, s.abar, true));
                c = next;
            }
            Err(e) => {
                step *= 0.5;
                if step < range.min_step {
                    warn!("continuation {:?} stopped at c = {c}: {e}", nl);
                    break;
                }
            }
        }
    }
    info!("continuation {:?}: {} points down to c = {c}", nl, branch.len());
    Ok(branch)
}

fn point<T: Scalar>(c: f64, abar: CoeffGrid<T>, converged: bool) -> BranchPoint<T> {
    BranchPoint { c, norm_inf: sup_norm(&abar), norm_ell1: ell1_norm(&abar), converged, abar }
}

/// Branch table CSV: `c,norm_inf,norm_ell1,converged_flag,coefficient_file`.
pub fn branch_csv<T: Scalar>(branch: &[BranchPoint<T>], files: &[String]) -> String {
    let mut s = String::from("c,norm_inf,norm_ell1,converged_flag,coefficient_file\n");
    for (i, b) in branch.iter().enumerate() {
        let f = files.get(i).map(String::as_str).unwrap_or("");
        s.push_str(&format!("{},{:e},{:e},{},{}\n", b.c, b.norm_inf, b.norm_ell1, b.converged as u8, f));
    }
    s
}
