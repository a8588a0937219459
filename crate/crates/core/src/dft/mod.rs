//! Rigorous Fourier coefficients of `𝒢(ū)` for a finitely supported `ā`.
//!
//! The nonlinearity is sampled on the uniform mesh `x_k = πk/N^FFT`,
//! `k ∈ J = [−N^FFT, N^FFT−1]`, transformed back with an interval FFT, and
//! the aliasing error is bounded through the contour-shift constant `Ĉ`.
//! Coefficients with index beyond `N^Alias` are enclosed by `Ĉ/ν̄^{|n|}`.

pub mod fft;

use log::{debug, warn};
use num_complex::Complex;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::coeff::{norm_ell1_nu, CoeffGrid, IndexPair, Weights};
use crate::interval::elementary::{exp, expm1mx, pi};
use crate::interval::rounding::{add_up, div_up, mul_up};
use crate::interval::{ComplexInterval, Interval};
use crate::scalar::Scalar;
pub use fft::{fft_2d, naive_dft_2d, Direction, FftError, FftValue, Plan};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DftError {
    #[error(transparent)]
    Fft(#[from] FftError),
    #[error("N^FFT = {nfft} must exceed the support {support} of the coefficients")]
    SupportTooLarge { support: IndexPair, nfft: IndexPair },
    #[error("N^Alias = {nalias} must be below N^FFT = {nfft}")]
    AliasTooLarge { nalias: IndexPair, nfft: IndexPair },
    #[error("rho_bar must be positive, got {0:?}")]
    NonPositiveRho([f64; 2]),
    #[error("geometric ratio must lie in [0,1), upper bound is {0}")]
    RatioOutOfRange(f64),
}

/// `𝒢(u) = eᵘ−u−1`, `𝒢′(u) = eᵘ−1`, `𝒢″(u) = eᵘ`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum NonlinearityVariant {
    G,
    Gp,
    Gpp,
}

impl NonlinearityVariant {
    pub const ALL: [NonlinearityVariant; 3] = [Self::G, Self::Gp, Self::Gpp];

    pub fn name(&self) -> &'static str {
        match self {
            Self::G => "G",
            Self::Gp => "Gp",
            Self::Gpp => "Gpp",
        }
    }

    pub fn eval<T: Scalar>(&self, u: &Interval<T>) -> Interval<T> {
        match self {
            Self::G => expm1mx(u),
            Self::Gp => exp(u) - Interval::one(),
            Self::Gpp => exp(u),
        }
    }

    pub fn eval_complex<T: Scalar>(&self, z: &ComplexInterval<T>) -> ComplexInterval<T> {
        if z.im.lo() == T::zero() && z.im.hi() == T::zero() {
            return ComplexInterval::from_real(self.eval(&z.re));
        }
        let e = z.exp();
        let one = ComplexInterval::from_real(Interval::one());
        match self {
            Self::G => e - *z - one,
            Self::Gp => e - one,
            Self::Gpp => e,
        }
    }

    pub fn eval_float<T: Scalar>(&self, u: T) -> T {
        match self {
            Self::G => u.exp_m1() - u,
            Self::Gp => u.exp_m1(),
            Self::Gpp => u.exp(),
        }
    }
}

/// Contour shift `ρ̄ > 0` and `ν̄ = e^{ρ̄}`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AnalyticityParams<T: Scalar = f64> {
    pub rho_bar: [T; 2],
    pub nu_bar: [Interval<T>; 2],
}

impl<T: Scalar> AnalyticityParams<T> {
    pub fn new(rho_bar: [T; 2]) -> Result<Self, DftError> {
        if !(rho_bar[0] > T::zero() && rho_bar[1] > T::zero()) {
            return Err(DftError::NonPositiveRho([rho_bar[0].to_f64_exact(), rho_bar[1].to_f64_exact()]));
        }
        let nu_bar = [exp(&Interval::point(rho_bar[0])), exp(&Interval::point(rho_bar[1]))];
        Ok(AnalyticityParams { rho_bar, nu_bar })
    }
}

/// `f_geo(ξ, N) = Σ_{n∉I⁺_N} γ_n ξ^{|n|}` in closed form.
pub fn f_geo<T: Scalar>(xi: [Interval<T>; 2], n: IndexPair) -> Result<Interval<T>, DftError> {
    for x in &xi {
        if x.hi() >= T::one() || x.lo() < T::zero() {
            return Err(DftError::RatioOutOfRange(x.hi().to_f64_exact()));
        }
    }
    let one = Interval::one();
    let two = Interval::from_f64(2.0);
    let p1 = xi[0].powi(n.0 as u32 + 1);
    let p2 = xi[1].powi(n.1 as u32 + 1);
    let num = two * p1 * (one + xi[1]) + two * p2 * (one + xi[0]) - Interval::from_f64(4.0) * p1 * p2;
    let den = (one - xi[0]) * (one - xi[1]);
    let r = num.checked_div(&den).expect("denominator is positive");
    Ok(Interval::from_ordered(r.lo().max(T::zero()), r.hi()))
}

fn check_support<T: Scalar>(abar: &CoeffGrid<T>, nfft: IndexPair) -> Result<IndexPair, DftError> {
    let s = abar.support();
    if s.0 >= nfft.0 || s.1 >= nfft.1 {
        return Err(DftError::SupportTooLarge { support: s, nfft });
    }
    for m in [nfft.0, nfft.1] {
        if !m.is_power_of_two() {
            return Err(FftError::NotPowerOfTwo(m).into());
        }
    }
    Ok(s)
}

/// Places `f(m₁, m₂)` for `|m| ≤ support` at positions `m mod 2N^FFT`.
fn spectrum<V: FftValue>(support: IndexPair, nfft: IndexPair, f: impl Fn(i64, i64) -> V + Sync) -> Vec<V> {
    let (m1, m2) = (2 * nfft.0, 2 * nfft.1);
    let mut s = vec![V::default(); m1 * m2];
    let (s1, s2) = (support.0 as i64, support.1 as i64);
    for a in -s1..=s1 {
        for b in -s2..=s2 {
            let i = a.rem_euclid(m1 as i64) as usize;
            let j = b.rem_euclid(m2 as i64) as usize;
            s[i * m2 + j] = f(a, b);
        }
    }
    s
}

/// Interval enclosures of `ū(x_k)` at every mesh point (index `k mod 2N^FFT`).
pub fn sample_u<T: Scalar>(abar: &CoeffGrid<T>, nfft: IndexPair) -> Result<Vec<Interval<T>>, DftError> {
    let s = check_support(abar, nfft)?;
    let mut g = spectrum(s, nfft, |a, b| ComplexInterval::from_real(Interval::point(abar.get_signed(a, b))));
    fft_2d(&mut g, 2 * nfft.0, 2 * nfft.1, Direction::Inverse)?;
    // ū is real; the real part of the enclosure contains it
    Ok(g.into_iter().map(|z| z.re).collect())
}

/// `(1/(4N₁N₂)) Σ_k g_k e^{−in·x_k}` for `n ∈ I⁺_{N^FFT−1}`.
pub fn forward_from_samples<T: Scalar>(samples: &[Interval<T>], nfft: IndexPair) -> Result<CoeffGrid<Interval<T>>, DftError> {
    let (m1, m2) = (2 * nfft.0, 2 * nfft.1);
    let mut g: Vec<ComplexInterval<T>> = samples.iter().map(|&x| ComplexInterval::from_real(x)).collect();
    fft_2d(&mut g, m1, m2, Direction::Forward)?;
    let scale = Interval::from_f64(1.0 / (m1 as f64 * m2 as f64));
    let out = IndexPair(nfft.0 - 1, nfft.1 - 1);
    Ok(CoeffGrid::from_fn(out, |a, b| g[a * m2 + b].re * scale))
}

/// Interval `b̄^FFT` for an arbitrary pointwise map `g` of `ū`.
pub fn bfft_with<T: Scalar>(
    abar: &CoeffGrid<T>,
    nfft: IndexPair,
    g: impl Fn(&Interval<T>) -> Interval<T> + Sync,
) -> Result<CoeffGrid<Interval<T>>, DftError> {
    let u = sample_u(abar, nfft)?;
    let gu: Vec<Interval<T>> = u.par_iter().map(&g).collect();
    forward_from_samples(&gu, nfft)
}

pub fn compute_bfft<T: Scalar>(
    abar: &CoeffGrid<T>,
    variant: NonlinearityVariant,
    nfft: IndexPair,
) -> Result<CoeffGrid<Interval<T>>, DftError> {
    bfft_with(abar, nfft, |u| variant.eval(u))
}

/// Enclosures of `ū(x_k + δ − iρ̄)` over `δ ∈ Δ = [0,π/N₁]×[0,π/N₂]`.
pub fn sample_u_shifted<T: Scalar>(
    abar: &CoeffGrid<T>,
    ap: &AnalyticityParams<T>,
    nfft: IndexPair,
) -> Result<Vec<ComplexInterval<T>>, DftError> {
    let s = check_support(abar, nfft)?;
    let p = pi::<T>();
    let d1 = (p * Interval::from_f64(1.0 / nfft.0 as f64)).hull(&Interval::zero());
    let d2 = (p * Interval::from_f64(1.0 / nfft.1 as f64)).hull(&Interval::zero());
    let r1 = Interval::point(ap.rho_bar[0]);
    let r2 = Interval::point(ap.rho_bar[1]);
    let mut g = spectrum(s, nfft, |a, b| {
        let v = abar.get_signed(a, b);
        if v == T::zero() {
            return ComplexInterval::zero();
        }
        let (ia, ib) = (Interval::from_i64(a), Interval::from_i64(b));
        let grow = exp(&(ia * r1 + ib * r2));
        let phase = ComplexInterval::cis(&(ia * d1 + ib * d2));
        phase.scale(&(grow * Interval::point(v)))
    });
    fft_2d(&mut g, 2 * nfft.0, 2 * nfft.1, Direction::Inverse)?;
    Ok(g)
}

/// Upward-rounded mean of `|𝒢(z_k)|` over the shifted samples.
fn mean_abs_upper<T: Scalar>(z: &[ComplexInterval<T>], variant: NonlinearityVariant, nfft: IndexPair) -> T {
    let m2 = 2 * nfft.1;
    let rows: Vec<T> = z
        .par_chunks(m2)
        .map(|row| row.iter().fold(T::zero(), |acc, zk| add_up(acc, variant.eval_complex(zk).abs_upper())))
        .collect();
    let total = rows.into_iter().fold(T::zero(), add_up);
    let count = T::lit(4.0 * nfft.0 as f64 * nfft.1 as f64);
    div_up(total, count)
}

/// Upper bound of `Ĉ_ρ̄` for one variant.
#[allow(non_snake_case)]
pub fn compute_C<T: Scalar>(
    abar: &CoeffGrid<T>,
    ap: &AnalyticityParams<T>,
    variant: NonlinearityVariant,
    nfft: IndexPair,
) -> Result<T, DftError> {
    let z = sample_u_shifted(abar, ap, nfft)?;
    Ok(mean_abs_upper(&z, variant, nfft))
}

/// Two-regime enclosure of the coefficients of `𝒢(ū)`.
#[derive(Clone, Debug)]
pub struct EnclosedCoeffs<T: Scalar = f64> {
    pub variant: NonlinearityVariant,
    /// `b̄^FFT_n` on `I⁺_{N^Alias}`.
    pub fft_part: CoeffGrid<Interval<T>>,
    /// Upper bound of `Ĉ_ρ̄`.
    pub c_hat: T,
    pub n_fft: IndexPair,
    /// Upper bound of `f_geo(ν̄^{−2N^FFT}, 0)`.
    pub eps0: T,
    nu_bar: Weights<T>,
}

impl<T: Scalar> EnclosedCoeffs<T> {
    pub fn n_alias(&self) -> IndexPair {
        self.fft_part.dims()
    }

    pub fn nu_bar(&self) -> &Weights<T> {
        &self.nu_bar
    }

    /// Upper bound of `ε̄_n = ν̄^{|n|} f_geo(ν̄^{−2N^FFT}, 0)`.
    pub fn eps(&self, n1: usize, n2: usize) -> T {
        (self.nu_bar.nu_pow(n1, n2) * Interval::point(self.eps0)).hi()
    }

    /// Upper bound of `Ĉ ε̄_n`.
    pub fn alias_error(&self, n1: usize, n2: usize) -> T {
        mul_up(self.c_hat, self.eps(n1, n2))
    }

    /// Upper bound of `Ĉ/ν̄^{|n|}`.
    pub fn tail_bound(&self, n1: usize, n2: usize) -> T {
        Interval::point(self.c_hat).checked_div(&self.nu_bar.nu_pow(n1, n2)).expect("positive").hi()
    }

    /// Interval containing `b̄_n` for any `n ≥ 0`.
    pub fn get(&self, n1: usize, n2: usize) -> Interval<T> {
        if self.n_alias().contains(n1, n2) {
            self.fft_part.get(n1, n2) + Interval::symmetric(self.alias_error(n1, n2))
        } else {
            Interval::symmetric(self.tail_bound(n1, n2))
        }
    }

    /// Upper bound of `|b̄_n|`.
    pub fn mag(&self, n1: usize, n2: usize) -> T {
        self.get(n1, n2).mag()
    }

    /// Enclosures on an arbitrary box.
    pub fn grid(&self, dims: IndexPair) -> CoeffGrid<Interval<T>> {
        CoeffGrid::from_fn(dims, |a, b| self.get(a, b))
    }
}

fn assemble<T: Scalar>(
    variant: NonlinearityVariant,
    bfft: &CoeffGrid<Interval<T>>,
    c_hat: T,
    ap: &AnalyticityParams<T>,
    nalias: IndexPair,
    nfft: IndexPair,
) -> Result<EnclosedCoeffs<T>, DftError> {
    let one = Interval::one();
    let r1 = one.checked_div(&ap.nu_bar[0].powi(2 * nfft.0 as u32)).expect("positive");
    let r2 = one.checked_div(&ap.nu_bar[1].powi(2 * nfft.1 as u32)).expect("positive");
    let eps0 = f_geo([r1, r2], IndexPair::ZERO)?.hi();
    let table = IndexPair(2 * nfft.0, 2 * nfft.1);
    Ok(EnclosedCoeffs {
        variant,
        fft_part: bfft.resized(nalias),
        c_hat,
        n_fft: nfft,
        eps0,
        nu_bar: Weights::from_intervals(ap.nu_bar, table),
    })
}

fn check_alias(nalias: IndexPair, nfft: IndexPair) -> Result<(), DftError> {
    if nalias.0 >= nfft.0 || nalias.1 >= nfft.1 {
        return Err(DftError::AliasTooLarge { nalias, nfft });
    }
    Ok(())
}

fn warn_alias<T: Scalar>(abar: &CoeffGrid<T>, e: &EnclosedCoeffs<T>) {
    let na = e.n_alias();
    let err = e.alias_error(na.0, na.1).to_f64_exact();
    let w = Weights::new([T::one(), T::one()], abar.dims());
    let norm = norm_ell1_nu(abar, &w).hi().to_f64_exact();
    debug!("{}: C_hat = {:e}, alias error at N^Alias = {:e}", e.variant.name(), e.c_hat.to_f64_exact(), err);
    if err > 1e-14 * norm {
        warn!(
            "{}: aliasing error {:e} at N^Alias {} exceeds 1e-14 * |a| = {:e}; consider a larger N^FFT",
            e.variant.name(),
            err,
            na,
            1e-14 * norm
        );
    }
}

pub fn enclose_b<T: Scalar>(
    abar: &CoeffGrid<T>,
    ap: &AnalyticityParams<T>,
    variant: NonlinearityVariant,
    nalias: IndexPair,
    nfft: IndexPair,
) -> Result<EnclosedCoeffs<T>, DftError> {
    check_alias(nalias, nfft)?;
    let bfft = compute_bfft(abar, variant, nfft)?;
    let c = compute_C(abar, ap, variant, nfft)?;
    let e = assemble(variant, &bfft, c, ap, nalias, nfft)?;
    warn_alias(abar, &e);
    Ok(e)
}

/// All three variants, sharing the mesh samples of `ū`.
pub fn enclose_all<T: Scalar>(
    abar: &CoeffGrid<T>,
    ap: &AnalyticityParams<T>,
    nalias: IndexPair,
    nfft: IndexPair,
) -> Result<[EnclosedCoeffs<T>; 3], DftError> {
    check_alias(nalias, nfft)?;
    let u = sample_u(abar, nfft)?;
    let z = sample_u_shifted(abar, ap, nfft)?;
    let mut out = Vec::with_capacity(3);
    for v in NonlinearityVariant::ALL {
        let gu: Vec<Interval<T>> = u.par_iter().map(|x| v.eval(x)).collect();
        let bfft = forward_from_samples(&gu, nfft)?;
        let c = mean_abs_upper(&z, v, nfft);
        let e = assemble(v, &bfft, c, ap, nalias, nfft)?;
        warn_alias(abar, &e);
        out.push(e);
    }
    Ok(out.try_into().map_err(|_| ()).expect("three variants"))
}

/// Plain floating-point `b^FFT` of `g(ū)` on `I⁺_{out}` (`out < N^FFT`).
pub fn bfft_float<T: Scalar>(
    abar: &CoeffGrid<T>,
    nfft: IndexPair,
    out: IndexPair,
    g: impl Fn(T) -> T + Sync,
) -> Result<CoeffGrid<T>, DftError> {
    let u = sample_u_float(abar, nfft)?;
    let gu: Vec<T> = u.par_iter().map(|&x| g(x)).collect();
    forward_float(&gu, nfft, out)
}

/// Floating-point cosine coefficients on `I⁺_{out}` of mesh samples
/// (index `k mod 2N^FFT`).
pub fn forward_float<T: Scalar>(samples: &[T], nfft: IndexPair, out: IndexPair) -> Result<CoeffGrid<T>, DftError> {
    let (m1, m2) = (2 * nfft.0, 2 * nfft.1);
    let mut c: Vec<Complex<T>> = samples.iter().map(|&x| Complex::new(x, T::zero())).collect();
    fft_2d(&mut c, m1, m2, Direction::Forward)?;
    let scale = T::lit(1.0 / (m1 as f64 * m2 as f64));
    Ok(CoeffGrid::from_fn(out, |a, b| c[a * m2 + b].re * scale))
}

/// Plain floating-point samples of `ū` on the mesh.
pub fn sample_u_float<T: Scalar>(abar: &CoeffGrid<T>, nfft: IndexPair) -> Result<Vec<T>, DftError> {
    let s = check_support(abar, nfft)?;
    let mut g = spectrum(s, nfft, |a, b| Complex::new(abar.get_signed(a, b), T::zero()));
    fft_2d(&mut g, 2 * nfft.0, 2 * nfft.1, Direction::Inverse)?;
    Ok(g.into_iter().map(|z| z.re).collect())
}

/// Smallest power of two strictly greater than `n`.
pub fn pow2_above(n: usize) -> usize {
    (n + 1).next_power_of_two()
}
