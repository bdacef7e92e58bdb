mod common;

use std::f64::consts::TAU;
use std::sync::OnceLock;

use nashtopo::cli::{self, Verdict};
use nashtopo::equilibrium::{find_equilibria, product_br_map, SearchVerdict};
use nashtopo::fta::{boundary_winding, locate_roots, rectangle_winding, Polynomial, WindingOutcome, DEFAULT_SAMPLES};
use nashtopo::game::{br_correspondence_table, default_eps, evaluate_utility, Game};
use nashtopo::homology::{homology, is_acyclic, kunneth_predict, smith_normal_form, IntegerMatrix};
use nashtopo::obstruction::{
    certify_null_homotopic, degree_matrix, fixed_point_game, lefschetz_number, winding_number, CircleMapSample,
    NullHomotopy, SampledMap,
};
use nashtopo::spaces::{distance, make_circle, make_interval, product, triangulate, DiscreteSpace};
use num_bigint::BigInt;
use num_complex::Complex64;
use num_traits::Signed;
use proptest::prelude::*;

fn corpus() -> &'static [(String, Game)] {
    static CORPUS: OnceLock<Vec<(String, Game)>> = OnceLock::new();
    CORPUS.get_or_init(|| common::lemma_corpus(6))
}

fn factor_strategy() -> impl Strategy<Value = (bool, usize)> {
    (any::<bool>(), 2usize..6)
}

fn build(factors: &[(bool, usize)]) -> DiscreteSpace {
    let parts: Vec<DiscreteSpace> = factors
        .iter()
        .map(|&(circle, n)| if circle { make_circle(n + 1).unwrap() } else { make_interval(n).unwrap() })
        .collect();
    product(&parts).unwrap()
}

fn sorted_points(space: &DiscreteSpace) -> Vec<Vec<f64>> {
    let mut pts: Vec<Vec<f64>> = space.points().map(<[f64]>::to_vec).collect();
    pts.sort_by(|a, b| a.iter().zip(b).map(|(x, y)| x.total_cmp(y)).find(|o| o.is_ne()).unwrap_or(std::cmp::Ordering::Equal));
    pts
}

fn det_i128(rows: &[Vec<i64>]) -> i128 {
    let n = rows.len();
    let mut a: Vec<Vec<i128>> = rows.iter().map(|r| r.iter().map(|&v| v as i128).collect()).collect();
    let mut sign = 1;
    let mut prev = 1i128;
    for k in 0..n {
        let Some(p) = (k..n).find(|&r| a[r][k] != 0) else {
            return 0;
        };
        if p != k {
            a.swap(p, k);
            sign = -sign;
        }
        for i in k + 1..n {
            for j in k + 1..n {
                a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) / prev;
            }
        }
        prev = a[k][k];
    }
    sign * a[n - 1][n - 1]
}

fn roots_strategy() -> impl Strategy<Value = Vec<(f64, f64)>> {
    proptest::collection::vec((-3.0f64..3.0, -3.0f64..3.0), 1..7)
}

fn poly_from(roots: &[(f64, f64)], lead: (f64, f64)) -> Polynomial {
    let roots: Vec<Complex64> = roots.iter().map(|&(re, im)| Complex64::new(re, im)).collect();
    let p = Polynomial::from_roots(&roots);
    let c = Complex64::from_polar(lead.0, lead.1);
    Polynomial::new(p.coefficients().iter().map(|a| a * c).collect()).unwrap()
}

fn on_circle(theta: f64) -> Vec<f64> {
    vec![theta.cos(), theta.sin()]
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 48, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn catalog_spaces_are_connected(factors in proptest::collection::vec(factor_strategy(), 1..4)) {
        prop_assert!(build(&factors).is_connected());
    }

    #[test]
    fn distance_is_a_metric(factors in proptest::collection::vec(factor_strategy(), 1..4), picks in any::<[usize; 3]>()) {
        let s = build(&factors);
        let [a, b, c] = picks.map(|k| k % s.len());
        let d = |x, y| distance(&s, x, y).unwrap();
        prop_assert_eq!(d(a, b), d(b, a));
        prop_assert_eq!(d(a, a), 0.0);
        prop_assert!(d(a, c) <= d(a, b) + d(b, c) + 1e-12);
    }

    #[test]
    fn product_is_associative(f in proptest::collection::vec(factor_strategy(), 3)) {
        let [a, b, c] = [build(&f[..1]), build(&f[1..2]), build(&f[2..])];
        let left = product(&[product(&[a.clone(), b.clone()]).unwrap(), c.clone()]).unwrap();
        let right = product(&[a, product(&[b, c]).unwrap()]).unwrap();
        prop_assert_eq!(left.len(), right.len());
        prop_assert_eq!(sorted_points(&left), sorted_points(&right));
    }

    #[test]
    fn interval_is_acyclic_and_circle_is_not(n in 2usize..40) {
        prop_assert!(is_acyclic(&homology(&triangulate(&make_interval(n).unwrap()).unwrap()).unwrap()));
        let circle = homology(&triangulate(&make_circle(n + 1).unwrap()).unwrap()).unwrap();
        prop_assert!(!is_acyclic(&circle));
        prop_assert_eq!(circle.betti, vec![1, 1]);
    }

    #[test]
    fn kunneth_on_small_products(a in factor_strategy(), b in factor_strategy()) {
        let (x, y) = (build(&[a]), build(&[b]));
        let hx = homology(&triangulate(&x).unwrap()).unwrap();
        let hy = homology(&triangulate(&y).unwrap()).unwrap();
        let hxy = homology(&triangulate(&product(&[x, y]).unwrap()).unwrap()).unwrap();
        prop_assert_eq!(hxy, kunneth_predict(&hx, &hy).unwrap());
    }

    #[test]
    fn smith_factors_multiply_to_determinant(rows in (1usize..6).prop_flat_map(|n| proptest::collection::vec(proptest::collection::vec(-9i64..=9, n), n))) {
        let det = det_i128(&rows);
        let form = smith_normal_form(&IntegerMatrix::from_rows(&rows));
        if det == 0 {
            prop_assert!(form.rank < rows.len());
        } else {
            prop_assert_eq!(form.rank, rows.len());
            let prod: BigInt = form.factors.iter().product();
            prop_assert_eq!(prod, BigInt::from(det).abs());
        }
    }

    #[test]
    fn best_responses_are_nonempty_and_eps_optimal(g in 0usize..20, eps in 0.0f64..0.3) {
        let game = &corpus()[g].1;
        for player in 0..game.num_players() {
            let table = br_correspondence_table(game, player, eps).unwrap();
            for (idx, entry) in table.entries().iter().enumerate() {
                prop_assert!(!entry.points.is_empty());
                let opp = table.opponent_indexer().unflatten(idx);
                for (&k, &u) in entry.points.iter().zip(&entry.payoffs) {
                    prop_assert!(u >= entry.max_payoff - eps);
                    let mut profile = opp.clone();
                    profile.insert(player, k);
                    prop_assert_eq!(u, evaluate_utility(game, player, &profile).unwrap());
                }
            }
        }
    }

    #[test]
    fn own_coordinate_never_moves_own_output(g in 0usize..20, seed in any::<u64>()) {
        let game = &corpus()[g].1;
        let tables = (0..game.num_players()).map(|i| br_correspondence_table(game, i, 0.05).unwrap()).collect();
        let phi = product_br_map(tables).unwrap();
        let mut profile = phi.domain().unflatten(seed as usize % phi.domain().total());
        for i in 0..game.num_players() {
            let before = phi.output(&profile)[i].to_vec();
            for k in 0..game.space(i).len() {
                profile[i] = k;
                prop_assert_eq!(phi.output(&profile)[i], before.as_slice());
            }
        }
    }

    #[test]
    fn exact_equilibria_are_exact_fixed_points(g in 0usize..20) {
        let game = &corpus()[g].1;
        let report = find_equilibria(game, 0.0, 0.0).unwrap();
        let tables = (0..game.num_players()).map(|i| br_correspondence_table(game, i, 0.0).unwrap()).collect();
        let phi = product_br_map(tables).unwrap();
        let found: Vec<usize> = report.equilibria.iter().map(|e| phi.domain().flatten(&e.profile)).collect();
        let fixed: Vec<usize> = (0..phi.domain().total()).filter(|&k| phi.is_fixed_point(&phi.domain().unflatten(k))).collect();
        prop_assert_eq!(found, fixed);
    }

    #[test]
    fn winding_survives_doubling(m in -4i64..=4, wobble in -0.4f64..0.4, k in 1usize..4, phase in 0.0f64..TAU, n in 8usize..64) {
        let f = |t: f64| m as f64 * t + wobble * (k as f64 * t).sin() + phase;
        let sample = |n: usize| CircleMapSample::from_angles(&(0..n).map(|j| f(TAU * j as f64 / n as f64)).collect::<Vec<_>>()).unwrap();
        let true_step = (0..n).map(|j| (f(TAU * (j + 1) as f64 / n as f64) - f(TAU * j as f64 / n as f64)).abs()).fold(0.0, f64::max);
        prop_assume!(true_step < std::f64::consts::PI);
        let w = winding_number(&sample(n)).unwrap();
        prop_assert_eq!(w, m);
        prop_assert_eq!(winding_number(&sample(2 * n)).unwrap(), w);
    }

    #[test]
    fn winding_of_composite_is_product(m1 in -3i64..=3, m2 in -3i64..=3, s1 in 0i64..64, s2 in 0i64..64, n in 20usize..48) {
        let c = make_circle(n).unwrap();
        let lin = |m: i64, s: i64| move |k: usize| (m * k as i64 + s).rem_euclid(n as i64) as usize;
        let (f, g) = (lin(m1, s1), lin(m2, s2));
        let deg = |h: &dyn Fn(usize) -> usize| degree_matrix(&SampledMap::from_fn(&c, &c, h).unwrap()).unwrap().get(0, 0);
        prop_assert_eq!(deg(&|k| f(g(k))), deg(&f) * deg(&g));
    }

    #[test]
    fn rectangle_winding_is_additive(roots in roots_strategy(), x in (-4.0f64..0.0, 0.5f64..4.0), y in (-4.0f64..0.0, 0.5f64..4.0), split in (0.1f64..0.9, 0.1f64..0.9)) {
        let p = poly_from(&roots, (1.0, 0.0));
        let (x0, x1, y0, y1) = (x.0, x.0 + x.1, y.0, y.0 + y.1);
        let (xm, ym) = (x0 + split.0 * (x1 - x0), y0 + split.1 * (y1 - y0));
        let w = |a: (f64, f64), b: (f64, f64)| match rectangle_winding(&p, Complex64::new(a.0, a.1), Complex64::new(b.0, b.1), DEFAULT_SAMPLES).unwrap() {
            WindingOutcome::Certified(c) => Some(c.winding),
            WindingOutcome::RootOnContour(_) => None,
        };
        let parts = [w((x0, y0), (xm, ym)), w((xm, y0), (x1, ym)), w((x0, ym), (xm, y1)), w((xm, ym), (x1, y1))];
        let whole = w((x0, y0), (x1, y1));
        prop_assume!(whole.is_some() && parts.iter().all(Option::is_some));
        prop_assert_eq!(whole.unwrap(), parts.iter().map(|p| p.unwrap()).sum::<i64>());
        let inside = roots.iter().filter(|&&(re, im)| re > x0 && re < x1 && im > y0 && im < y1).count();
        prop_assert_eq!(whole.unwrap(), inside as i64);
    }

    #[test]
    fn winding_at_large_radius_is_degree(roots in roots_strategy(), lead in (0.1f64..10.0, 0.0f64..TAU), stretch in 1.0f64..20.0) {
        let p = poly_from(&roots, lead);
        let r = p.cauchy_bound() * stretch;
        match boundary_winding(&p, r, DEFAULT_SAMPLES).unwrap() {
            WindingOutcome::Certified(c) => prop_assert_eq!(c.winding, p.degree() as i64),
            WindingOutcome::RootOnContour(z) => prop_assert!(false, "root on contour at {:?}", z),
        }
    }

    #[test]
    fn located_roots_have_small_residual(roots in roots_strategy(), lead in (0.5f64..4.0, 0.0f64..TAU)) {
        let p = poly_from(&roots, lead);
        let tol = 1e-8;
        let found = locate_roots(&p, p.cauchy_bound(), tol).unwrap();
        prop_assert_eq!(found.len(), p.degree());
        let dp = p.derivative().unwrap();
        for z in found {
            let bound = (0..16)
                .map(|j| dp.eval(z + Complex64::from_polar(tol, TAU * j as f64 / 16.0)).norm())
                .fold(dp.eval(z).norm(), f64::max);
            let floor = 1e-12 * p.scale();
            prop_assert!(p.eval(z).norm() <= 10.0 * bound * tol + floor, "|P({})| = {:e}, bound {:e}", z, p.eval(z).norm(), bound * tol);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 24, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn null_homotopic_self_maps_have_grid_fixed_points(cx in -3.0f64..3.0, cy in -3.0f64..3.0, a in 0.2f64..1.0, n in 8usize..40) {
        let c = (cx, cy);
        let r = (c.0 * c.0 + c.1 * c.1).sqrt();
        prop_assume!(r > a + 0.1);
        let f = move |x: &[f64]| {
            let (u, v) = (c.0 + a * x[0], c.1 + a * x[1]);
            let norm = (u * u + v * v).sqrt();
            vec![u / norm, v / norm]
        };
        let circle = make_circle(n).unwrap();
        let nearest = |k: usize| {
            let y = f(circle.coords(k).unwrap());
            (y[1].atan2(y[0]).rem_euclid(TAU) / TAU * n as f64).round() as usize % n
        };
        let cert = certify_null_homotopic(&SampledMap::from_fn(&circle, &circle, nearest).unwrap()).unwrap();
        prop_assert_eq!(cert.verdict, NullHomotopy::NullHomotopic);
        let game = fixed_point_game(&circle, f).unwrap();
        let eps = default_eps(&game, None).unwrap();
        prop_assert_eq!(find_equilibria(&game, eps, eps).unwrap().verdict, SearchVerdict::Found);
    }

    #[test]
    fn nonzero_lefschetz_gives_grid_fixed_points(m in prop_oneof![Just(-2i64), Just(-1), Just(0), Just(2), Just(3)], alpha in 0.0f64..TAU, n in 16usize..40) {
        let f = move |x: &[f64]| on_circle(m as f64 * x[1].atan2(x[0]) + alpha);
        let circle = make_circle(n).unwrap();
        let sampled = SampledMap::from_fn(&circle, &circle, |k| {
            let y = f(circle.coords(k).unwrap());
            (y[1].atan2(y[0]).rem_euclid(TAU) / TAU * n as f64).round() as usize % n
        })
        .unwrap();
        let l = lefschetz_number(&degree_matrix(&sampled).unwrap()).unwrap();
        prop_assert_eq!(l, 1 - m);
        let game = fixed_point_game(&circle, f).unwrap();
        let eps = default_eps(&game, None).unwrap();
        prop_assert_eq!(find_equilibria(&game, eps, eps).unwrap().verdict, SearchVerdict::Found);
    }
}

fn run(list: &[&str]) -> cli::Outcome {
    let args: Vec<String> = std::iter::once("nashtopo").chain(list.iter().copied()).map(String::from).collect();
    cli::run(&args)
}

#[test]
fn exit_codes_follow_verdicts() {
    let cases: &[&[&str]] = &[
        &["demo", "torus", "--resolution", "8"],
        &["demo", "coordination", "--resolution", "8"],
        &["demo", "antipodal", "--resolution", "8"],
        &["solve", "torus-mismatch", "--resolution", "8"],
        &["solve", "circle-coordination", "--resolution", "6"],
        &["certify", "circle-coordination", "--resolution", "6"],
        &["solve", "torus-mismatch", "--resolution", "8", "--eps", "0.5", "--tol", "0.5"],
        &["homology", "--space", "torus:4"],
        &["fta", "--coeffs", "1,0;0,0;1,0"],
        &["fta", "--coeffs", "-1,0;0,0;1,0", "--verify-only"],
    ];
    for case in cases {
        let out = run(case);
        let report = out.report.unwrap_or_else(|| panic!("{case:?}: no report ({})", out.stderr));
        let expected = match report.verdict {
            Verdict::EquilibriumFound | Verdict::ExistenceCertified | Verdict::RootsCertified | Verdict::Computed => 0,
            Verdict::ObstructionDetected => 1,
            Verdict::Inconclusive => 2,
        };
        assert_eq!(out.exit_code, expected, "{case:?}");
        assert_eq!(report.exit_code, expected, "{case:?}");
    }
    for bad in [&["solve", "no-such-game"][..], &["fta", "--coeffs", "0,0"], &["homology", "--space", "sphere:3"], &["frobnicate"]] {
        let out = run(bad);
        assert_eq!(out.exit_code, 3, "{bad:?}: {}", out.stderr);
        assert!(out.report.is_none());
    }
}
