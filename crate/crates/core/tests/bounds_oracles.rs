mod common;

use bridgewave::bounds::{
    bound_W, check_certificate, mu, prove, verify_radii, BoundError, Certificate, MuHat, ProofInputs, Status,
};
use bridgewave::power_series::{tail_norm, SeriesOrder};
use bridgewave::{CoeffGrid, IndexPair, Interval, TruncationSet};
use proptest::prelude::*;
use rand::Rng;

fn iv(x: f64) -> Interval<f64> {
    Interval::point(x)
}

fn brute_mu(nu: [f64; 2], nu_bar: [f64; 2], j: (usize, usize), n: IndexPair, extra: usize) -> f64 {
    let nu = [iv(nu[0]), iv(nu[1])];
    let nb = [iv(nu_bar[0]), iv(nu_bar[1])];
    let mut best = 0f64;
    for k1 in 0..=n.0 + extra {
        for k2 in 0..=n.1 + extra {
            if !n.contains(k1, k2) {
                best = best.max(mu(nu, nb, j, (k1, k2)).lo());
            }
        }
    }
    best
}

#[test]
fn mu_hat_dominates_enumeration() {
    let mut rng = common::rng(11);
    for _ in 0..50 {
        let n = IndexPair(rng.gen_range(0..25), rng.gen_range(0..25));
        let j = (rng.gen_range(0..=n.0), rng.gen_range(0..=n.1));
        let nu = [1.0 + rng.gen_range(0.0..0.05), 1.0 + rng.gen_range(0.0..0.05)];
        let nu_bar = [nu[0] * (1.0 + rng.gen_range(0.01..0.3)), nu[1] * (1.0 + rng.gen_range(0.01..0.3))];
        let table = MuHat::new([iv(nu[0]), iv(nu[1])], [iv(nu_bar[0]), iv(nu_bar[1])], n, n);
        let hat = table.get(j.0, j.1).hi();
        let brute = brute_mu(nu, nu_bar, j, n, 60);
        assert!(brute <= hat, "j={j:?} N={n}: {brute:e} > {hat:e}");
        // the maximum sits on the boundary set
        assert!(hat <= brute * (1.0 + 1e-12), "j={j:?} N={n}: {hat:e} vs {brute:e}");
    }
}

#[test]
fn mu_hat_at_origin_and_monotone_in_n() {
    let (nu, nb) = ([iv(1.01), iv(1.02)], [iv(1.1), iv(1.2)]);
    let mut prev = f64::INFINITY;
    for m in 0..20 {
        let n = IndexPair(m, m);
        let h = MuHat::new(nu, nb, n, IndexPair(0, 0)).get(0, 0).hi();
        assert!(h <= prev);
        prev = h;
    }
    // j = 0: both reflections coincide, so μ(0,k) = ((ν̄₁ν₁)^{−k₁})((ν̄₂ν₂)^{−k₂})
    let n = IndexPair(3, 5);
    let h = MuHat::new(nu, nb, n, n).get(0, 0);
    let top = (1.0f64 / (1.02 * 1.2)).powi(6);
    let right = (1.0f64 / (1.01 * 1.1)).powi(4);
    assert!(h.contains(top.max(right)), "{h:?}");
    assert!(bridgewave::bounds::mu_hat((4, 0), n, nu, nb).is_err());
}

#[test]
fn z_bound_dominates_truncated_operator() {
    let mut rng = common::rng(5);
    let cases = [
        (1.3, [0.05, 0.1], IndexPair(4, 4), IndexPair(4, 4), 0.3, 1.0 + 1e-7),
        (1.3, [0.3, 0.4], IndexPair(6, 3), IndexPair(8, 4), 0.8, 1.0001),
        (1.1, [0.2, 0.25], IndexPair(5, 5), IndexPair(6, 6), 0.5, 1.0 + 1e-7),
        (0.9, [0.3, 0.3], IndexPair(3, 3), IndexPair(3, 3), 1.5, 1.01),
        (1.4, [0.25, 0.5], IndexPair(8, 8), IndexPair(8, 8), 0.2, 1.0),
        (1.2, [0.35, 0.2], IndexPair(4, 6), IndexPair(2, 3), 1.0, 1.001),
    ];
    for (c, q, ng, nj, amp, nu) in cases {
        let a = common::random_abar(&mut rng, ng, amp, 0.5);
        let case = common::z_case(c, q, &a, nj, nu, [0.2, 0.2]);
        eprintln!("{}: Z {:e}, oracle {:e}", case.label, case.z.z, case.oracle);
        assert!(case.oracle <= case.z.z, "{}: oracle {:e} > Z {:e}", case.label, case.oracle, case.z.z);
        assert!(case.z.z.is_finite());
    }
}

#[test]
fn z_of_zero_profile_is_rounding() {
    let a = CoeffGrid::zeros(IndexPair(3, 3));
    let case = common::z_case(1.3, [0.3, 0.3], &a, IndexPair(3, 3), 1.0 + 1e-7, [0.1, 0.1]);
    assert!(case.z.z <= 1e-8, "{:e}", case.z.z);
}

#[test]
fn w_grows_with_r_star() {
    let mut prev = 0.0;
    for k in 0..20 {
        let w = bound_W(110.0, k as f64 * 1e-3);
        assert!(w >= prev);
        prev = w;
    }
}

#[test]
fn radii_of_published_bounds() {
    let r = verify_radii(2.4708e-8, 2.9545e-1, 1.1042e2 / (6.3605e-3f64).exp(), 6.3605e-3).unwrap();
    assert!((r.r_min / 3.5069e-8 - 1.0).abs() < 5e-5, "{:e}", r.r_min);
    assert!((r.w / 1.1042e2 - 1.0).abs() < 1e-12);
    let zero = verify_radii(0.0, 0.5, 7.0, 0.01).unwrap();
    assert!(zero.r_min >= 0.0 && zero.r_min < 1e-300);
}

fn trivial_inputs() -> ProofInputs {
    let ng = IndexPair(10, 10);
    ProofInputs {
        c: 1.3,
        q: [0.05, 0.1],
        trunc: TruncationSet::with_defaults(ng, ng, IndexPair(20, 20), IndexPair(64, 64)),
        nu: [1.0 + 1e-7; 2],
        rho_bar: [0.09531; 2],
    }
}

fn reason(e: BoundError) -> &'static str {
    match e {
        BoundError::Condition(n, _) => n,
        other => panic!("{other}"),
    }
}

#[test]
fn certificate_round_trip_and_tampering() {
    let cert = prove(&trivial_inputs(), &CoeffGrid::<f64>::zeros(IndexPair(10, 10))).unwrap();
    assert_eq!(cert.status, Status::Proven);
    let back = Certificate::from_json(&cert.to_json()).unwrap();
    assert_eq!(back, cert);
    let r = check_certificate(&back).unwrap();
    assert!(r.r_min <= cert.r_min_value().unwrap());

    let mut forged = back.clone();
    forged.y = "1e-1".into();
    assert_eq!(reason(check_certificate(&forged).unwrap_err()), "2YW<(1-Z)^2");
    let mut forged = back.clone();
    forged.z = "1.5".into();
    assert_eq!(reason(check_certificate(&forged).unwrap_err()), "Z<1");
    let mut forged = back.clone();
    forged.y = "1e-12".into();
    assert_eq!(reason(check_certificate(&forged).unwrap_err()), "recorded r_min");
    let mut forged = back;
    forged.format = "other".into();
    assert_eq!(reason(check_certificate(&forged).unwrap_err()), "certificate fields");
}

#[test]
fn nu_at_or_above_nu_bar_is_rejected() {
    let mut inp = trivial_inputs();
    inp.nu = [1.2, 1.0];
    inp.rho_bar = [0.1, 0.1];
    let e = prove(&inp, &CoeffGrid::<f64>::zeros(IndexPair(10, 10))).unwrap_err();
    assert!(matches!(e, BoundError::NuNotBelowNuBar { .. }), "{e}");
}

#[test]
fn series_tail_matches_chain_of_partial_sums() {
    // e^x − Σ_{k≤M} = (e^x − Σ_{k≤M+1}) + x^{M+1}/(M+1)!
    for &x in &[0.1, 0.7, 1.0, 2.5, 6.0] {
        for m in 2..25 {
            let a = tail_norm(iv(x), SeriesOrder::new(m).unwrap());
            let b = tail_norm(iv(x), SeriesOrder::new(m + 1).unwrap());
            let term = (1..=m + 1).fold(1.0f64, |acc, k| acc * x / k as f64);
            let gap = (a.mid() - b.mid() - term).abs();
            assert!(gap <= 1e-14 * a.mid().max(1e-300) + 4.0 * a.width() + 4.0 * b.width(), "x={x} M={m}: {gap:e}");
        }
    }
}

proptest! {
    #[test]
    fn tail_encloses_remainder(x in 0.0f64..5.0, m in 2usize..30) {
        let t = tail_norm(iv(x), SeriesOrder::new(m).unwrap());
        let mut term = (1..=m).fold(1.0f64, |acc, k| acc * x / k as f64);
        let mut rest = 0.0;
        for k in m + 1..m + 200 {
            term *= x / k as f64;
            rest += term;
        }
        prop_assert!(t.lo() <= rest * (1.0 + 1e-13) && rest * (1.0 - 1e-13) <= t.hi(), "{t:?} {rest:e}");
    }
}
