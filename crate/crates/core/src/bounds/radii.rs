//! Radius search and rigorous verification of the radii polynomial.

use crate::interval::elementary::exp;
use crate::interval::Interval;
use crate::scalar::Scalar;

use super::BoundError;

/// Verified radii: every `r ∈ [r_min, r_max]` gives a contraction ball.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Radii<T: Scalar = f64> {
    pub r_star: T,
    /// Upper bound of the smallest admissible radius.
    pub r_min: T,
    /// Lower bound of the largest admissible radius.
    pub r_max: T,
    /// Upper bound of `W = Ŵ e^{r*}`.
    pub w: T,
}

fn p_hat(y: f64, z: f64, w_hat: f64, r: f64) -> f64 {
    0.5 * w_hat * r.exp() * r * r - (1.0 - z) * r + y
}

/// Floating-point minimizer of `½ Ŵ e^r r² − (1−Z) r + Y` over `r ∈ [1e-20, 10]`.
pub fn find_rstar(y: f64, z: f64, w_hat: f64) -> f64 {
    const POINTS: usize = 400;
    let (lo, hi) = (1e-20f64.ln(), 10f64.ln());
    let at = |i: usize| lo + (hi - lo) * i as f64 / (POINTS - 1) as f64;
    let f = |t: f64| p_hat(y, z, w_hat, t.exp());
    let best = (0..POINTS).min_by(|&a, &b| f(at(a)).total_cmp(&f(at(b)))).expect("nonempty");
    let mut a = at(best.saturating_sub(1));
    let mut b = at((best + 1).min(POINTS - 1));
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    for _ in 0..200 {
        if f(c) < f(d) {
            b = d;
        } else {
            a = c;
        }
        c = b - g * (b - a);
        d = a + g * (b - a);
        if (b - a).abs() < 1e-15 {
            break;
        }
    }
    ((a + b) / 2.0).exp()
}

/// Checks `Z < 1`, `2YW < (1−Z)²` and `r_min < r_max` in interval arithmetic.
pub fn verify_radii<T: Scalar>(y: T, z: T, w_hat: T, r_star: T) -> Result<Radii<T>, BoundError> {
    let yi = Interval::point(y);
    let zi = Interval::point(z);
    let one = Interval::one();
    let w = Interval::point(w_hat) * exp(&Interval::point(r_star));
    let gap = one - zi;
    if gap.lo() <= T::zero() {
        return Err(BoundError::Condition("Z<1", format!("Z = {z:?}")));
    }
    let disc = gap.sqr() - Interval::from_f64(2.0) * yi * w;
    if disc.lo() <= T::zero() {
        return Err(BoundError::Condition(
            "2YW<(1-Z)^2",
            format!("2YW = {:?}, (1-Z)^2 = {:?}", (Interval::from_f64(2.0) * yi * w).hi(), gap.sqr().lo()),
        ));
    }
    let root = disc.sqrt().expect("positive");
    let r_min = (Interval::from_f64(2.0) * yi).checked_div(&(gap + root)).expect("positive").hi();
    let r_max = gap.checked_div(&w).expect("positive").lo().min(r_star);
    if !(r_min < r_max) {
        return Err(BoundError::Condition("r_min<r_max", format!("r_min = {r_min:?}, r_max = {r_max:?}")));
    }
    Ok(Radii { r_star, r_min, r_max, w: w.hi() })
}
