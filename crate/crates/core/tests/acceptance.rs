//! Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any failure.

mod common;

use std::collections::BTreeSet;
use std::time::Instant;

use nashtopo::cli::{self, RunReport};
use nashtopo::equilibrium::{find_equilibria, SearchVerdict};
use nashtopo::fta::{boundary_winding, locate_roots, Polynomial, WindingOutcome, DEFAULT_SAMPLES};
use nashtopo::game::{best_response_set, default_eps, Game, Utility};
use nashtopo::homology::{boundary_matrix, homology, kunneth_predict, smith_decomposition, IntegerMatrix};
use nashtopo::obstruction::{
    analyze_game, antipodal_witness, degree_matrix, DegreeMatrix, ExistenceVerdict, SampledMap,
};
use nashtopo::spaces::{distance, make_circle, make_interval, product, triangulate, DiscreteSpace};
use num_bigint::BigInt;
use num_complex::Complex64;
use num_traits::{Signed, Zero};
use proptest::prelude::*;
use proptest::test_runner::{Config, TestRunner};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

type Check = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn args(list: &[&str]) -> Vec<String> {
    std::iter::once("nashtopo").chain(list.iter().copied()).map(String::from).collect()
}

fn torus_demo() -> Check {
    let start = Instant::now();
    let mut min256 = 0.0;
    for n in [8usize, 32, 256] {
        let res = n.to_string();
        let out = cli::run(&args(&["demo", "torus", "--resolution", &res, "--no-timing"]));
        let r = out.report.ok_or(out.stderr)?;
        let e = r.equilibrium.as_ref().unwrap();
        let o = r.obstruction.as_ref().unwrap();
        ensure(e.verdict == SearchVerdict::NoneAtResolution, || format!("n={n}: equilibria found"))?;
        for p in &o.players {
            ensure(p.null_homotopy.degrees == Some(DegreeMatrix::from_rows(&[vec![1]])), || {
                format!("n={n}: degree of {} is {:?}", p.player, p.null_homotopy.degrees)
            })?;
        }
        ensure(o.lefschetz == Some(0), || format!("n={n}: Lefschetz {:?}", o.lefschetz))?;
        ensure(o.verdict == ExistenceVerdict::ObstructionDetected, || format!("n={n}: verdict {:?}", o.verdict))?;
        ensure(out.exit_code == 1, || format!("n={n}: exit code {}", out.exit_code))?;
        if n == 256 {
            min256 = e.min_residual.residual;
        }
    }
    ensure(min256 >= 1.9, || format!("minimum residual {min256} at n=256"))?;
    let t = start.elapsed().as_secs_f64();
    ensure(t < 10.0, || format!("took {t:.2} s"))?;
    Ok(format!("min residual {min256:.6} at n=256, degrees [1],[1], L=0, {t:.2} s"))
}

fn lemma_corpus() -> Check {
    let mut failures = Vec::new();
    let corpus = common::lemma_corpus(32);
    for (label, game) in &corpus {
        let eps = default_eps(game, None).map_err(|e| e.to_string())?;
        let tol = eps;
        let (search, report) = analyze_game(game, eps, tol).map_err(|e| e.to_string())?;
        let ok_eq = search.equilibria.iter().any(|p| p.residual <= tol);
        if report.verdict != ExistenceVerdict::GuaranteedExistence || !ok_eq {
            failures.push(format!("{label}: {:?}, {} equilibria", report.verdict, search.equilibria.len()));
        }
    }
    ensure(failures.is_empty(), || failures.join("; "))?;
    Ok(format!("{} games: GuaranteedExistence with an equilibrium each", corpus.len()))
}

fn kunneth() -> Check {
    let mut checked = 0;
    for r in 3..=8 {
        let c = make_circle(r).unwrap();
        let spaces: [(&str, DiscreteSpace); 3] = [
            ("I", make_interval(r).unwrap()),
            ("C", c.clone()),
            ("T", product(&[c.clone(), c.clone()]).unwrap()),
        ];
        let h = |s: &DiscreteSpace| homology(&triangulate(s).unwrap()).unwrap();
        let torus = h(&spaces[2].1);
        ensure(torus.betti == vec![1, 2, 1], || format!("torus({r}) betti {:?}", torus.betti))?;
        for (nx, x) in &spaces {
            for (ny, y) in &spaces {
                let got = h(&product(&[x.clone(), y.clone()]).unwrap());
                let want = kunneth_predict(&h(x), &h(y)).unwrap();
                ensure(got == want, || format!("{nx}x{ny} at {r}: {got:?} vs {want:?}"))?;
                checked += 1;
            }
        }
    }
    Ok(format!("{checked} products match, torus betti (1,2,1)"))
}

fn antipodal() -> Check {
    let mut count = 0;
    for n in (4..=1024).step_by(2) {
        let w = antipodal_witness(n).map_err(|e| e.to_string())?;
        let circle = make_circle(n).unwrap();
        for k in 0..n {
            let d = distance(&circle, k, (k + n / 2) % n).unwrap();
            ensure(w.residuals[k] >= d - 0.0 && w.residuals[k] > 0.0, || format!("n={n}, k={k}: residual {}", w.residuals[k]))?;
        }
        ensure(w.grid_fixed_points.is_empty(), || format!("n={n}: fixed points"))?;
        ensure(w.winding == 1, || format!("n={n}: winding {}", w.winding))?;
        ensure(w.circle_homology.betti == vec![1, 1] && !w.circle_acyclic, || format!("n={n}: circle homology"))?;
        count += 1;
    }
    Ok(format!("{count} even resolutions 4..=1024: fixed-point free, winding 1, betti (1,1)"))
}

fn random_polynomial(rng: &mut StdRng) -> Polynomial {
    let degree = rng.random_range(1..=6);
    let coeffs: Vec<Complex64> = (0..=degree)
        .map(|_| Complex64::from_polar(rng.random_range(0.0..=10.0), rng.random_range(0.0..std::f64::consts::TAU)))
        .collect();
    Polynomial::new(coeffs).unwrap()
}

fn fta() -> Check {
    let start = Instant::now();
    let mut rng = StdRng::seed_from_u64(20_260_101);
    let mut worst: f64 = 0.0;
    for case in 0..50 {
        let p = random_polynomial(&mut rng);
        let r = p.cauchy_bound();
        match boundary_winding(&p, r, DEFAULT_SAMPLES).map_err(|e| e.to_string())? {
            WindingOutcome::Certified(c) => {
                ensure(c.winding == p.degree() as i64, || format!("case {case}: winding {} for degree {}", c.winding, p.degree()))?
            }
            WindingOutcome::RootOnContour(z) => return Err(format!("case {case}: root on the Cauchy circle at {z:?}")),
        }
        let roots = locate_roots(&p, r, 1e-8).map_err(|e| format!("case {case}: {e}"))?;
        ensure(roots.len() == p.degree(), || format!("case {case}: {} roots for degree {}", roots.len(), p.degree()))?;
        for z in roots {
            let m = p.eval(z).norm();
            worst = worst.max(m);
            ensure(m <= 1e-6, || format!("case {case}: |P({z})| = {m:e}"))?;
        }
    }
    let t = start.elapsed().as_secs_f64();
    ensure(t < 30.0, || format!("took {t:.2} s"))?;
    Ok(format!("50 polynomials: winding = degree, max |P(root)| {worst:.2e}, {t:.2} s"))
}

fn coordination() -> Check {
    for n in [8usize, 16, 64] {
        let file = cli::preset("circle-coordination", Some(n)).unwrap();
        let game = file.build().map_err(|e| e.to_string())?;
        let t = file.tolerances.unwrap();
        let (eps, tol) = (t.eps.unwrap(), t.tol.unwrap());
        let (search, report) = analyze_game(&game, eps, tol).map_err(|e| e.to_string())?;
        let found: BTreeSet<(usize, usize)> = search.equilibria.iter().map(|p| (p.profile[0], p.profile[1])).collect();
        let oracle: BTreeSet<(usize, usize)> = common::coordination_oracle(n, tol).into_iter().collect();
        let diagonal: BTreeSet<(usize, usize)> = (0..n).map(|k| (k, k)).collect();
        ensure(oracle == diagonal, || format!("n={n}: brute force disagrees with the diagonal"))?;
        ensure(found == oracle, || format!("n={n}: {} equilibria, brute force {}", found.len(), oracle.len()))?;
        ensure(search.verdict == SearchVerdict::Found, || format!("n={n}: verdict {:?}", search.verdict))?;
        ensure(report.lefschetz == Some(0), || format!("n={n}: Lefschetz {:?}", report.lefschetz))?;
    }
    Ok("diagonal exactly, Found with Lefschetz 0, for n = 8, 16, 64".into())
}

fn run_suite<S: Strategy>(name: &str, cases: u32, strategy: S, test: impl Fn(S::Value) -> Result<(), TestCaseError>) -> Result<(), String>
where
    S::Value: std::fmt::Debug,
{
    let mut runner = TestRunner::new(Config {
        cases,
        failure_persistence: None,
        ..Config::default()
    });
    runner.run(&strategy, test).map_err(|e| format!("{name}: {e}"))
}

fn affine(game: &Game, a: f64, b: f64) -> Game {
    let utilities = game
        .utilities()
        .iter()
        .map(|u| {
            let u = u.clone();
            Utility::native(format!("{a}*({}) + {b}", u.describe()), move |x: &[&[f64]]| a * u.eval(x) + b)
        })
        .collect();
    Game::new(game.players().to_vec(), game.spaces().to_vec(), utilities).unwrap()
}

fn invariants() -> Check {
    let corpus = common::lemma_corpus(8);
    let mut suites = 0;

    run_suite("winding stability", 48, (8usize..40, -3i64..=3, 0usize..40), |(n, m, s)| {
        let d = |n: usize, s: usize| {
            let c = make_circle(n).unwrap();
            let map = SampledMap::from_fn(&c, &c, |k| ((m * k as i64 + s as i64).rem_euclid(n as i64)) as usize).unwrap();
            degree_matrix(&map).unwrap().get(0, 0)
        };
        prop_assert_eq!(d(n, s), m);
        prop_assert_eq!(d(2 * n, 2 * s), m);
        Ok(())
    })?;
    for n in [8, 16, 32] {
        let game = cli::preset("torus-mismatch", Some(n)).unwrap().build().unwrap();
        let (_, report) = analyze_game(&game, 1e-9, 1e-9).map_err(|e| e.to_string())?;
        for p in &report.players {
            ensure(p.null_homotopy.degrees == Some(DegreeMatrix::from_rows(&[vec![1]])), || format!("torus game at {n}"))?;
        }
    }
    suites += 1;

    run_suite("eps monotonicity", 64, (0..corpus.len(), any::<u64>(), 0.0f64..0.5, 0.0f64..0.5), |(g, seed, e1, e2)| {
        let game = &corpus[g].1;
        let player = (seed % game.num_players() as u64) as usize;
        let opp = game.opponent_indexer(player).unwrap();
        let x = opp.unflatten((seed as usize / 7) % opp.total());
        let (lo, hi) = (e1.min(e2), e1.max(e2));
        let small = best_response_set(game, player, &x, lo).unwrap();
        let large = best_response_set(game, player, &x, hi).unwrap();
        prop_assert!(small.iter().all(|k| large.contains(k)));
        Ok(())
    })?;
    suites += 1;

    run_suite("affine invariance", 48, (0..corpus.len(), any::<u64>(), 0.25f64..8.0, -20.0f64..20.0), |(g, seed, a, b)| {
        let game = &corpus[g].1;
        let scaled = affine(game, a, b);
        let player = (seed % game.num_players() as u64) as usize;
        let opp = game.opponent_indexer(player).unwrap();
        let x = opp.unflatten((seed as usize / 5) % opp.total());
        let eps = 1e-3;
        prop_assert_eq!(
            best_response_set(game, player, &x, eps).unwrap(),
            best_response_set(&scaled, player, &x, a * eps).unwrap()
        );
        Ok(())
    })?;
    suites += 1;

    let matrix = (1usize..6, 1usize..6).prop_flat_map(|(r, c)| proptest::collection::vec(proptest::collection::vec(-9i64..=9, c), r));
    run_suite("SNF divisibility", 128, matrix, |rows| {
        let m = IntegerMatrix::from_rows(&rows);
        let s = smith_decomposition(&m);
        let f = &s.form.factors;
        prop_assert_eq!(f.len(), s.form.rank);
        for w in f.windows(2) {
            prop_assert!((&w[1] % &w[0]).is_zero());
        }
        prop_assert!(f.iter().all(|d| d.is_positive()));
        prop_assert_eq!(s.left.mul(&m).mul(&s.right), s.diagonal.clone());
        for r in 0..m.rows() {
            for c in 0..m.cols() {
                let want = if r == c && r < f.len() { f[r].clone() } else { BigInt::zero() };
                prop_assert_eq!(s.diagonal.get(r, c), &want);
            }
        }
        Ok(())
    })?;
    suites += 1;

    let space = proptest::collection::vec((any::<bool>(), 2usize..5), 1..4);
    run_suite("boundary of boundary", 48, space, |factors| {
        let parts: Vec<DiscreteSpace> = factors
            .iter()
            .map(|&(circle, n)| if circle { make_circle(n + 1).unwrap() } else { make_interval(n).unwrap() })
            .collect();
        let k = triangulate(&product(&parts).unwrap()).unwrap();
        for d in 1..k.top_dim() {
            prop_assert!(boundary_matrix(&k, d).unwrap().mul(&boundary_matrix(&k, d + 1).unwrap()).is_zero());
        }
        Ok(())
    })?;
    suites += 1;

    let commands: [&[&str]; 6] = [
        &["demo", "torus", "--resolution", "16"],
        &["demo", "coordination", "--resolution", "8"],
        &["demo", "antipodal", "--resolution", "16"],
        &["solve", "torus-mismatch", "--resolution", "12"],
        &["homology", "--space", "circle:5*interval:3"],
        &["fta", "--coeffs", "1,1;0,-2;3,0;1,0"],
    ];
    for c in commands {
        let mut full = c.to_vec();
        full.extend(["--json", "--no-timing"]);
        let a = cli::run(&args(&full));
        let b = cli::run(&args(&full));
        ensure(a.stdout == b.stdout && !a.stdout.is_empty(), || format!("report for {c:?} differs between runs"))?;
        let parsed: RunReport = serde_json::from_str(&a.stdout).map_err(|e| e.to_string())?;
        ensure(parsed == a.report.unwrap(), || format!("report for {c:?} does not round-trip"))?;
    }
    for (label, game) in corpus.iter().take(6) {
        let x = find_equilibria(game, 0.1, 0.1).map_err(|e| e.to_string())?;
        let y = find_equilibria(game, 0.1, 0.1).map_err(|e| e.to_string())?;
        ensure(x == y, || format!("{label}: search differs between runs"))?;
    }
    suites += 1;

    Ok(format!("{suites} suites passed"))
}

fn main() {
    let criteria: [(&str, fn() -> Check); 7] = [
        ("torus counterexample", torus_demo),
        ("constant and degree-zero best responses", lemma_corpus),
        ("Kunneth products", kunneth),
        ("antipodal map", antipodal),
        ("polynomial roots", fta),
        ("coordination diagonal", coordination),
        ("invariant suites", invariants),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let result = check();
        let t = start.elapsed().as_secs_f64();
        match result {
            Ok(detail) => println!("criterion {}: PASS  {name}: {detail} [{t:.2} s]", i + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {}: FAIL  {name}: {detail} [{t:.2} s]", i + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
