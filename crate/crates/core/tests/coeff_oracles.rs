mod common;

use bridgewave::coeff::{convolve, gamma, norm_ell1_nu, reflect_sum};
use bridgewave::dft::sample_u_float;
use bridgewave::{CoeffGrid, IndexPair, Interval, Weights};
use proptest::prelude::*;
use rand::Rng;

#[test]
fn gamma_weights() {
    assert_eq!(gamma(0, 0), 1);
    assert_eq!(gamma(0, 3), 2);
    assert_eq!(gamma(2, 5), 4);
}

#[test]
fn norms_of_unit_vectors() {
    let w = Weights::new([2.0, 1.0], IndexPair(3, 3));
    let e0 = CoeffGrid::<f64>::unit(IndexPair(3, 3), 0, 0);
    assert!(norm_ell1_nu(&e0, &Weights::new([1.0, 1.0], IndexPair(3, 3))).contains(1.0));
    let e1 = CoeffGrid::<f64>::unit(IndexPair(3, 3), 1, 0);
    assert!(norm_ell1_nu(&e1, &w).contains(4.0));
}

#[test]
fn norm_is_independent_of_summation_order() {
    let mut rng = common::rng(31);
    let a = common::random_abar(&mut rng, IndexPair(20, 15), 1.0, 0.9);
    let w = Weights::new([1.01, 1.02], a.dims());
    let n = norm_ell1_nu(&a, &w);
    let rev = a
        .dims()
        .iter()
        .collect::<Vec<_>>()
        .into_iter()
        .rev()
        .fold(Interval::zero(), |acc, (n1, n2)| acc + Interval::point(a.get(n1, n2).abs()) * w.omega(n1, n2));
    assert!(n.intersect(&rev).is_ok(), "{n:?} vs {rev:?}");
    assert!(n.width() <= 1e-12 * n.hi());
}

/// `(a∗b)_n` from explicit full-`ℤ²` arrays.
fn brute_convolve(a: &CoeffGrid<f64>, b: &CoeffGrid<f64>, n: (i64, i64)) -> f64 {
    let (da, db) = (a.dims(), b.dims());
    let mut s = 0.0;
    for m1 in -(da.0 as i64)..=da.0 as i64 {
        for m2 in -(da.1 as i64)..=da.1 as i64 {
            let (k1, k2) = (n.0 - m1, n.1 - m2);
            if k1.unsigned_abs() as usize <= db.0 && k2.unsigned_abs() as usize <= db.1 {
                s += a.get(m1.unsigned_abs() as usize, m2.unsigned_abs() as usize)
                    * b.get(k1.unsigned_abs() as usize, k2.unsigned_abs() as usize);
            }
        }
    }
    s
}

#[test]
fn convolution_matches_full_lattice_sum() {
    let e = CoeffGrid::<f64>::unit(IndexPair(1, 0), 1, 0);
    let sq = convolve(&e, &e);
    assert_eq!((sq.get(0, 0), sq.get(1, 0), sq.get(2, 0)), (2.0, 0.0, 1.0));
    let mut rng = common::rng(32);
    for (da, db) in [(IndexPair(3, 2), IndexPair(4, 1)), (IndexPair(5, 0), IndexPair(0, 5)), (IndexPair(2, 2), IndexPair(2, 2))] {
        let a = CoeffGrid::from_vec(da, da.iter().map(|_| rng.gen_range(-8i32..=8) as f64).collect());
        let b = CoeffGrid::from_vec(db, db.iter().map(|_| rng.gen_range(-8i32..=8) as f64).collect());
        let c = convolve(&a, &b);
        for (n1, n2) in c.dims().iter() {
            assert_eq!(c.get(n1, n2), brute_convolve(&a, &b, (n1 as i64, n2 as i64)));
        }
        let ident = convolve(&CoeffGrid::unit(IndexPair::ZERO, 0, 0), &a);
        assert_eq!(ident, a);
    }
}

#[test]
fn reflected_sum_counts_axes_once() {
    let mut rng = common::rng(33);
    let d = IndexPair(4, 3);
    let vals: Vec<f64> = (0..81).map(|_| rng.gen_range(-4i32..=4) as f64).collect();
    let f = |a: i64, b: i64| vals[((a + 4) * 9 + (b + 4)) as usize];
    let mut full = 0.0;
    for a in -4..=4 {
        for b in -3..=3 {
            full += f(a, b);
        }
    }
    assert_eq!(reflect_sum(d, f), full);
    // axis-only support
    let g = |a: i64, b: i64| if b == 0 { (a * a) as f64 } else { 0.0 };
    assert_eq!(reflect_sum(d, g), 2.0 * (1.0 + 4.0 + 9.0 + 16.0));
    assert_eq!(reflect_sum(IndexPair::ZERO, |_, _| 1.0), 1.0);
}

#[test]
fn mesh_evaluation_matches_inverse_dft() {
    let mut rng = common::rng(34);
    let a = common::random_abar(&mut rng, IndexPair(6, 5), 1.0, 0.7);
    let q = [0.3, 0.45];
    let nfft = IndexPair(8, 8);
    let u = sample_u_float(&a, nfft).unwrap();
    let norm = norm_ell1_nu(&a, &Weights::new([1.0, 1.0], a.dims())).hi();
    for k1 in 0..2 * nfft.0 {
        for k2 in 0..2 * nfft.1 {
            let x = [
                std::f64::consts::PI * k1 as f64 / (nfft.0 as f64 * q[0]),
                std::f64::consts::PI * k2 as f64 / (nfft.1 as f64 * q[1]),
            ];
            let direct = bridgewave::coeff::evaluate_u(&a, q, x);
            let v = u[k1 * 2 * nfft.1 + k2];
            assert!((direct - v).abs() < 1e-13, "({k1},{k2}): {direct} vs {v}");
            assert!(v.abs() <= norm);
        }
    }
    let one = CoeffGrid::<f64>::unit(IndexPair(2, 2), 0, 0);
    assert_eq!(bridgewave::coeff::evaluate_u(&one, q, [0.7, -1.3]), 1.0);
}

fn grid(dims: IndexPair) -> impl Strategy<Value = CoeffGrid<Interval<f64>>> {
    prop::collection::vec((-1.0f64..1.0, 0.0f64..1e-6), dims.box_len())
        .prop_map(move |v| CoeffGrid::from_vec(dims, v.into_iter().map(|(x, w)| Interval::new(x, x + w).unwrap()).collect()))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn banach_algebra_inequality(a in grid(IndexPair(4, 3)), b in grid(IndexPair(3, 5)), nu1 in 1.0f64..1.5, nu2 in 1.0f64..1.5) {
        let c = convolve(&a, &b);
        let w = Weights::new([nu1, nu2], c.dims());
        let lhs = norm_ell1_nu(&c, &w);
        let rhs = norm_ell1_nu(&a, &w) * norm_ell1_nu(&b, &w);
        prop_assert!(lhs.lo() <= rhs.hi(), "{lhs:?} > {rhs:?}");
    }

    #[test]
    fn convolution_is_commutative(a in grid(IndexPair(2, 3)), b in grid(IndexPair(3, 1))) {
        let (ab, ba) = (convolve(&a, &b), convolve(&b, &a));
        for (n1, n2) in ab.dims().iter() {
            prop_assert!(ab.get(n1, n2).intersect(&ba.get(n1, n2)).is_ok());
        }
    }

    #[test]
    fn binary_dump_round_trips(v in prop::collection::vec(-1e3f64..1e3, 12)) {
        let a = CoeffGrid::from_vec(IndexPair(3, 2), v);
        prop_assert_eq!(CoeffGrid::<f64>::from_bytes(&a.to_bytes()).unwrap(), a.clone());
        prop_assert_eq!(CoeffGrid::<f64>::from_csv(&a.to_csv()).unwrap(), a);
    }
}
