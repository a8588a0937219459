mod common;

use bridgewave::power_series::{bound_Y_ps, F_M, SeriesOrder};
use bridgewave::problem::assemble_DF;
use bridgewave::solver::{
    continuation, initial_guess, newton_solve, nonlinear_terms, residual_float, solve, ContinuationConfig, Guess,
    Nonlinearity, SolveConfig,
};
use bridgewave::linalg::Matrix;
use bridgewave::{CoeffGrid, IndexPair, OperatorA, ProblemParams, Weights};
use rand::Rng;

#[test]
fn lambda_min_equals_enumeration() {
    let mut rng = common::rng(41);
    for _ in 0..20 {
        let c = rng.gen_range(0.0..1.414);
        let q = [rng.gen_range(0.02..0.5), rng.gen_range(0.02..0.5)];
        let n = IndexPair(rng.gen_range(0..40), rng.gen_range(0..40));
        let p = ProblemParams::<f64>::new(c, q).unwrap();
        assert_eq!(p.lambda_min(n).lo(), common::lambda_min_enumerated(&p, n), "c={c} q={q:?} N={n}");
    }
}

#[test]
fn lambda_min_is_monotone_and_symmetric() {
    let p = ProblemParams::<f64>::new(1.3, [0.05, 0.1]).unwrap();
    let mut prev = 0.0;
    for m in 0..60 {
        let l = p.lambda_min(IndexPair(m, m / 3)).lo();
        assert!(l >= prev);
        prev = l;
    }
    assert_eq!(p.lambda(0, 0).lo(), 1.0);
    assert!(p.lambda(1, 0).contains(0.99578125));
    // small c: the first axis mode past the box
    let p = ProblemParams::<f64>::new(1e-3, [0.2, 0.3]).unwrap();
    let n = IndexPair(4, 6);
    assert_eq!(p.lambda_min(n).lo(), p.lambda(5, 0).lo().min(p.lambda(0, 7).lo()));
}

fn small_solution() -> (ProblemParams<f64>, CoeffGrid<f64>) {
    let p = ProblemParams::<f64>::new(1.3, [0.3, 0.4]).unwrap();
    let cfg = SolveConfig { guess: Guess::OnePeak { amplitude: 2.0, width: 3.0 }, ..SolveConfig::default() };
    let s = solve(&p, IndexPair(16, 12), Nonlinearity::Full, &cfg).unwrap();
    assert!(s.residual <= 1e-10);
    (p, s.abar)
}

#[test]
fn jacobian_matches_central_differences() {
    let (p, a) = small_solution();
    let n = IndexPair(5, 4);
    let a = a.resized(n);
    let (_, bp) = nonlinear_terms(&a, Nonlinearity::Full).unwrap();
    let df = assemble_DF(&p, &bp, n);
    let eps = 1e-6;
    for k in [(0, 0), (1, 0), (0, 2), (3, 3), (5, 4)] {
        let mut plus = a.clone();
        plus.set(k.0, k.1, a.get(k.0, k.1) + eps);
        let mut minus = a.clone();
        minus.set(k.0, k.1, a.get(k.0, k.1) - eps);
        let fp = residual_float(&p, &plus, Nonlinearity::Full).unwrap();
        let fm = residual_float(&p, &minus, Nonlinearity::Full).unwrap();
        let col = n.flat(k.0, k.1);
        let scale = (0..n.box_len()).map(|i| df.get(i, col).abs()).fold(0.0, f64::max);
        for (i, (n1, n2)) in n.iter().enumerate() {
            let fd = (fp.get(n1, n2) - fm.get(n1, n2)) / (2.0 * eps);
            assert!((fd - df.get(i, col)).abs() <= 1e-6 * scale, "k={k:?} n=({n1},{n2}): {fd} vs {}", df.get(i, col));
        }
    }
}

#[test]
fn approximate_inverse_and_its_norm() {
    let (p, a) = small_solution();
    let nj = IndexPair(6, 6);
    let (_, bp) = nonlinear_terms(&a, Nonlinearity::Full).unwrap();
    let df = assemble_DF(&p, &bp, nj);
    let op = OperatorA::from_jacobian(nj, &df).unwrap();
    let prod = op.block.matmul(&df).unwrap();
    for i in 0..nj.box_len() {
        for j in 0..nj.box_len() {
            let id = if i == j { 1.0 } else { 0.0 };
            assert!((prod.get(i, j) - id).abs() < 1e-10);
        }
    }
    // brute-force weighted column sums
    let w = Weights::new([1.01, 1.02], nj);
    let mut brute = 1.0 / p.lambda_min(nj).lo();
    for (j, (k1, k2)) in nj.iter().enumerate() {
        let s: f64 = nj.iter().enumerate().map(|(i, (n1, n2))| op.block.get(i, j).abs() * w.omega(n1, n2).mid()).sum();
        brute = brute.max(s / w.omega(k1, k2).mid());
    }
    let norm = op.norm_A(&p, &w);
    assert!(norm.hi() >= brute && norm.hi() <= brute * (1.0 + 1e-12), "{norm:?} vs {brute}");

    // diagonal block: max(|d_k|, 1/λ_min)
    let d = [0.5, 3.0, 0.25, 1.5];
    let nd = IndexPair(1, 1);
    let diag = OperatorA { nj: nd, block: Matrix::from_fn(4, 4, |i, j| if i == j { d[i] } else { 0.0 }) };
    let expect = 3.0f64.max(1.0 / p.lambda_min(nd).lo());
    assert!((diag.norm_A(&p, &Weights::new([1.0, 1.0], nd)).hi() - expect).abs() < 1e-12);
    let ident = OperatorA { nj: nd, block: Matrix::identity(4) };
    let q = ProblemParams::<f64>::new(1e-9, [1.0, 1.0]).unwrap();
    assert!(ident.norm_A(&q, &Weights::new([1.0, 1.0], nd)).hi() <= 1.0 + 1e-15);
}

#[test]
fn solver_basics() {
    let p = ProblemParams::<f64>::new(1.3, [0.05, 0.1]).unwrap();
    let z = solve(&p, IndexPair(10, 10), Nonlinearity::Full, &SolveConfig { guess: Guess::Zero, ..SolveConfig::default() }).unwrap();
    assert!(z.abar.data().iter().all(|&x| x == 0.0));
    assert_eq!(z.iterations, 0);
    let f = residual_float(&p, &z.abar, Nonlinearity::Full).unwrap();
    assert!(f.data().iter().all(|&x| x == 0.0));

    let (p, a) = small_solution();
    let mut rng = common::rng(42);
    let noisy = CoeffGrid::from_vec(a.dims(), a.data().iter().map(|&x| x + 1e-6 * rng.gen_range(-1.0..1.0)).collect());
    let again = newton_solve(&p, noisy, Nonlinearity::Full, &SolveConfig::default()).unwrap();
    let diff = again.abar.data().iter().zip(a.data()).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
    assert!(diff <= 1e-9, "{diff:e}");
    let f = residual_float(&p, &a, Nonlinearity::Full).unwrap();
    let norm = bridgewave::solver::ell1_norm(&a);
    assert!(f.data().iter().all(|x| x.abs() <= 1e-8 * norm));
}

#[test]
fn continuation_branches() {
    let q = [0.3, 0.4];
    let zero = CoeffGrid::<f64>::zeros(IndexPair(6, 6));
    let range = ContinuationConfig { c_start: 1.4, c_end: 1.0, step: 0.1, min_step: 0.01 };
    let b = continuation(q, &range, &zero, Nonlinearity::Full, &SolveConfig::default()).unwrap();
    assert!((b.last().unwrap().c - 1.0).abs() < 1e-12);
    assert!(b.iter().all(|pt| pt.abar.data().iter().all(|&x| x == 0.0)));

    let (_, a) = small_solution();
    let range = ContinuationConfig { c_start: 1.3, c_end: 1.0, step: 0.05, min_step: 0.005 };
    let b = continuation(q, &range, &a, Nonlinearity::Full, &SolveConfig::default()).unwrap();
    assert!((b.last().unwrap().c - 1.0).abs() < 1e-12, "stopped at {}", b.last().unwrap().c);
    for w in b.windows(2) {
        assert!(w[1].norm_inf > w[0].norm_inf, "{} -> {}", w[0].norm_inf, w[1].norm_inf);
    }
}

#[test]
fn power_series_agrees_with_fft_path_for_small_profiles() {
    let p = ProblemParams::<f64>::new(1.4, [0.3, 0.4]).unwrap();
    let a = initial_guess(&p, IndexPair(12, 10), &Guess::OnePeak { amplitude: 0.3, width: 3.0 }).unwrap();
    let fft = residual_float(&p, &a, Nonlinearity::Full).unwrap();
    let ps = F_M(&a, SeriesOrder::new(20).unwrap(), &p);
    for (n1, n2) in a.dims().iter() {
        assert!((fft.get(n1, n2) - ps.get(n1, n2)).abs() <= 1e-10);
    }
}

#[test]
fn power_series_y_bound_tracks_fft_y_only_for_small_profiles() {
    use bridgewave::bounds::bound_Y;
    use bridgewave::dft::{enclose_b, AnalyticityParams, NonlinearityVariant};
    use bridgewave::TruncationSet;
    // the small profile is not a solution, so both bounds see the same residual
    let ys = |c: f64, amplitude: f64, solved: bool| {
        let p = ProblemParams::<f64>::new(c, [0.3, 0.4]).unwrap();
        let g = Guess::OnePeak { amplitude, width: 3.0 };
        let ng = IndexPair(16, 12);
        let a = if solved {
            solve(&p, ng, Nonlinearity::Full, &SolveConfig { guess: g, ..SolveConfig::default() }).unwrap().abar
        } else {
            initial_guess(&p, ng, &g).unwrap()
        };
        let tr = TruncationSet::with_defaults(ng, ng, IndexPair(40, 40), IndexPair(128, 128));
        let w = Weights::new([1.0 + 1e-7; 2], IndexPair(80, 80));
        let ap = AnalyticityParams::new([0.09531; 2]).unwrap();
        let b = enclose_b(&a, &ap, NonlinearityVariant::G, tr.n_alias, tr.n_fft).unwrap();
        let bp = enclose_b(&a, &ap, NonlinearityVariant::Gp, tr.n_alias, tr.n_fft).unwrap();
        let bmid = CoeffGrid::from_fn(ng.plus(ng), |x, y| bp.get(x, y).mid());
        let op = OperatorA::from_jacobian(ng, &assemble_DF(&p, &bmid, ng)).unwrap();
        let y = bound_Y(&p, &a, &op, &b, &tr, &w).unwrap();
        let yps = bound_Y_ps(&a, &op, SeriesOrder::new(14).unwrap(), &p, &w).unwrap();
        (y, yps)
    };
    let (y, yps) = ys(1.4, 0.3, false);
    assert!(yps <= 10.0 * y, "small: {yps:e} vs {y:e}");
    let (y, yps) = ys(1.0, 8.0, true);
    assert!(yps >= 1e3 * y, "large: {yps:e} vs {y:e}");
}
