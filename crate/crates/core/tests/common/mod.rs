#![allow(dead_code)]

use std::f64::consts::TAU;

use nashtopo::game::Game;
use nashtopo::spaces::{make_circle, product, DiscreteSpace};

pub fn names(m: usize) -> Vec<String> {
    (1..=m).map(|i| format!("x{i}")).collect()
}

fn circle_factors(space: &DiscreteSpace) -> usize {
    space.factors().len()
}

fn fmt(v: f64) -> String {
    format!("{v:.6}")
}

/// Circle or torus at resolution `n`.
pub fn circle_or_torus(n: usize, torus: bool) -> DiscreteSpace {
    let c = make_circle(n).unwrap();
    if torus {
        product(&[c.clone(), c]).unwrap()
    } else {
        c
    }
}

fn corpus_space(k: usize, i: usize, n: usize) -> DiscreteSpace {
    circle_or_torus(n, (k % 4 == 1 && i == 0) || (k == 5 && i == 1))
}

/// Twenty games on circles and tori whose best responses are constant
/// (`k < 10`) or of degree zero (`k >= 10`). Each circle factor of a
/// player aims at a point off the unit circle; in the degree-zero games
/// that point is `c + a·y` with `y` the opponent's first circle and
/// `|a| < |c|`, so it never winds around the origin.
pub fn lemma_corpus(n: usize) -> Vec<(String, Game)> {
    let mut out = Vec::new();
    for k in 0..20 {
        let m = if k % 10 >= 7 { 3 } else { 2 };
        let spaces: Vec<DiscreteSpace> = (0..m).map(|i| corpus_space(k, i, n)).collect();
        let mut utilities = Vec::new();
        for i in 0..m {
            let j = (i + 1) % m;
            let mut target = Vec::new();
            for f in 0..circle_factors(&spaces[i]) {
                let kf = (k + i + f) as f64;
                if k < 10 {
                    let theta = 0.37 + 1.1 * k as f64 + 0.9 * i as f64 + 2.3 * f as f64;
                    let r = 1.5 + 0.25 * ((k + i + f) % 3) as f64;
                    target.push(fmt(r * theta.cos()));
                    target.push(fmt(r * theta.sin()));
                } else {
                    let phi = 0.5 + 0.7 * kf;
                    let rc = 2.0 + 0.2 * (k % 3) as f64;
                    let a = if (k + f) % 2 == 0 { 0.5 } else { -0.6 };
                    target.push(format!("{} + {}*x{}[0]", fmt(rc * phi.cos()), fmt(a), j + 1));
                    target.push(format!("{} + {}*x{}[1]", fmt(rc * phi.sin()), fmt(a), j + 1));
                }
            }
            utilities.push(format!("-norm(x{} - [{}])", i + 1, target.join(", ")));
        }
        let refs: Vec<&str> = utilities.iter().map(String::as_str).collect();
        let game = Game::from_expressions(names(m), spaces, &refs).unwrap();
        let label = format!("{}-{k}", if k < 10 { "constant" } else { "degree0" });
        out.push((label, game));
    }
    out
}

/// Pure equilibria of the circle coordination game by direct enumeration
/// over angles `2πk/n`, without the library's payoff machinery.
pub fn coordination_oracle(n: usize, eps: f64) -> Vec<(usize, usize)> {
    let pt = |k: usize| {
        let t = TAU * k as f64 / n as f64;
        (t.cos(), t.sin())
    };
    let u = |a: usize, b: usize| {
        let (p, q) = (pt(a), pt(b));
        -((p.0 - q.0).powi(2) + (p.1 - q.1).powi(2)).sqrt()
    };
    let mut out = Vec::new();
    for a in 0..n {
        for b in 0..n {
            let here = u(a, b);
            let best1 = (0..n).map(|a2| u(a2, b)).fold(f64::NEG_INFINITY, f64::max);
            let best2 = (0..n).map(|b2| u(a, b2)).fold(f64::NEG_INFINITY, f64::max);
            if best1 - here <= eps && best2 - here <= eps {
                out.push((a, b));
            }
        }
    }
    out
}
