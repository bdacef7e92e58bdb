//! Games on catalog spaces and their sampled best-response correspondences.

use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use rayon::prelude::*;
use thiserror::Error;

use crate::expr::{Expr, ExprError, Shape};
use crate::homology::{homology, is_acyclic};
use crate::spaces::{euclidean, triangulate, DiscreteSpace, SpaceError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GameError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("utility of player {player} is {value} at profile {profile:?}")]
    UtilityDomain {
        player: usize,
        profile: Vec<usize>,
        value: f64,
    },
    #[error("utility of player '{player}': {error}")]
    Expression { player: String, error: ExprError },
    #[error("utility of player '{player}': {message}")]
    UtilityShape { player: String, message: String },
    #[error(transparent)]
    Space(#[from] SpaceError),
}

pub type UtilityFn = dyn Fn(&[&[f64]]) -> f64 + Send + Sync;

/// A player's payoff as a function of every player's embedding coordinates.
#[derive(Clone)]
pub enum Utility {
    Expr(Expr),
    Native { label: String, f: Arc<UtilityFn> },
}

impl Utility {
    pub fn native(label: impl Into<String>, f: impl Fn(&[&[f64]]) -> f64 + Send + Sync + 'static) -> Utility {
        Utility::Native {
            label: label.into(),
            f: Arc::new(f),
        }
    }

    /// `−‖x_own − sign·x_other‖`; `sign = 1` matches, `sign = −1` anti-matches.
    pub fn neg_distance(own: usize, other: usize, sign: f64) -> Utility {
        Utility::native(
            format!("-norm(p{own} - {sign}*p{other})"),
            move |x: &[&[f64]]| {
                -x[own]
                    .iter()
                    .zip(x[other])
                    .map(|(a, b)| (a - sign * b) * (a - sign * b))
                    .sum::<f64>()
                    .sqrt()
            },
        )
    }

    /// `−‖x_own − target‖` for a fixed point `target` of the ambient space.
    pub fn neg_distance_to(own: usize, target: Vec<f64>) -> Utility {
        Utility::native(format!("-norm(p{own} - {target:?})"), move |x: &[&[f64]]| {
            -euclidean(x[own], &target)
        })
    }

    pub fn eval(&self, coords: &[&[f64]]) -> f64 {
        match self {
            Utility::Expr(e) => e.eval(coords),
            Utility::Native { f, .. } => f(coords),
        }
    }

    pub fn describe(&self) -> String {
        match self {
            Utility::Expr(e) => e.source().to_string(),
            Utility::Native { label, .. } => label.clone(),
        }
    }
}

impl fmt::Debug for Utility {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Utility({})", self.describe())
    }
}

/// Mixed-radix indexing of profiles, first coordinate most significant.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProfileIndexer {
    sizes: Vec<usize>,
    strides: Vec<usize>,
    total: usize,
}

impl ProfileIndexer {
    /// `None` when the total count overflows `usize`.
    pub fn new(sizes: Vec<usize>) -> Option<ProfileIndexer> {
        let mut strides = vec![1; sizes.len()];
        let mut total: usize = 1;
        for i in (0..sizes.len()).rev() {
            strides[i] = total;
            total = total.checked_mul(sizes[i])?;
        }
        Some(ProfileIndexer {
            sizes,
            strides,
            total,
        })
    }

    pub fn total(&self) -> usize {
        self.total
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn flatten(&self, profile: &[usize]) -> usize {
        profile.iter().zip(&self.strides).map(|(k, s)| k * s).sum()
    }

    pub fn unflatten_into(&self, index: usize, out: &mut [usize]) {
        for ((o, s), n) in out.iter_mut().zip(&self.strides).zip(&self.sizes) {
            *o = (index / s) % n;
        }
    }

    pub fn unflatten(&self, index: usize) -> Vec<usize> {
        let mut out = vec![0; self.sizes.len()];
        self.unflatten_into(index, &mut out);
        out
    }
}

/// A finite game: players, per-player strategy spaces, per-player utilities.
#[derive(Debug, Clone)]
pub struct Game {
    players: Vec<String>,
    spaces: Vec<DiscreteSpace>,
    utilities: Vec<Utility>,
}

impl Game {
    pub fn new(players: Vec<String>, spaces: Vec<DiscreteSpace>, utilities: Vec<Utility>) -> Result<Game, GameError> {
        if players.is_empty() {
            return Err(GameError::InvalidArgument("a game needs at least one player".into()));
        }
        if spaces.len() != players.len() || utilities.len() != players.len() {
            return Err(GameError::InvalidArgument(format!(
                "{} players but {} spaces and {} utilities",
                players.len(),
                spaces.len(),
                utilities.len()
            )));
        }
        for (i, p) in players.iter().enumerate() {
            if players[..i].contains(p) {
                return Err(GameError::InvalidArgument(format!("duplicate player '{p}'")));
            }
        }
        let dims: Vec<usize> = spaces.iter().map(|s| s.ambient_dim()).collect();
        for (p, u) in players.iter().zip(&utilities) {
            if let Utility::Expr(e) = u {
                match e.shape(&dims) {
                    Ok(Shape::Scalar) => {}
                    Ok(s) => {
                        return Err(GameError::UtilityShape {
                            player: p.clone(),
                            message: format!("utility must be a scalar, got {s}"),
                        })
                    }
                    Err(message) => {
                        return Err(GameError::UtilityShape {
                            player: p.clone(),
                            message,
                        })
                    }
                }
            }
        }
        Ok(Game {
            players,
            spaces,
            utilities,
        })
    }

    /// Build a game whose utilities are expressions over player names.
    pub fn from_expressions(players: Vec<String>, spaces: Vec<DiscreteSpace>, utilities: &[&str]) -> Result<Game, GameError> {
        let parsed = utilities
            .iter()
            .zip(&players)
            .map(|(src, p)| {
                Expr::parse(src, &players)
                    .map(Utility::Expr)
                    .map_err(|error| GameError::Expression {
                        player: p.clone(),
                        error,
                    })
            })
            .collect::<Result<Vec<_>, _>>()?;
        Game::new(players, spaces, parsed)
    }

    pub fn num_players(&self) -> usize {
        self.players.len()
    }

    pub fn players(&self) -> &[String] {
        &self.players
    }

    pub fn player_index(&self, name: &str) -> Option<usize> {
        self.players.iter().position(|p| p == name)
    }

    pub fn spaces(&self) -> &[DiscreteSpace] {
        &self.spaces
    }

    pub fn space(&self, player: usize) -> &DiscreteSpace {
        &self.spaces[player]
    }

    pub fn utilities(&self) -> &[Utility] {
        &self.utilities
    }

    pub fn sizes(&self) -> Vec<usize> {
        self.spaces.iter().map(|s| s.len()).collect()
    }

    pub fn profile_indexer(&self) -> Option<ProfileIndexer> {
        ProfileIndexer::new(self.sizes())
    }

    pub fn opponent_indexer(&self, player: usize) -> Option<ProfileIndexer> {
        ProfileIndexer::new(
            self.sizes()
                .into_iter()
                .enumerate()
                .filter(|(j, _)| *j != player)
                .map(|(_, n)| n)
                .collect(),
        )
    }

    /// The same game on spaces refined by `factor`.
    pub fn refined(&self, factor: usize) -> Game {
        Game {
            players: self.players.clone(),
            spaces: self.spaces.iter().map(|s| s.refined(factor)).collect(),
            utilities: self.utilities.clone(),
        }
    }

    /// The same game with every elementary factor at resolution `n`.
    pub fn with_resolution(&self, n: usize) -> Result<Game, GameError> {
        Ok(Game {
            players: self.players.clone(),
            spaces: self
                .spaces
                .iter()
                .map(|s| s.with_resolution(n))
                .collect::<Result<_, _>>()?,
            utilities: self.utilities.clone(),
        })
    }

    pub(crate) fn check_player(&self, player: usize) -> Result<(), GameError> {
        if player < self.players.len() {
            Ok(())
        } else {
            Err(GameError::InvalidArgument(format!(
                "unknown player {player} (game has {})",
                self.players.len()
            )))
        }
    }

    pub(crate) fn check_profile(&self, profile: &[usize]) -> Result<(), GameError> {
        if profile.len() != self.players.len() {
            return Err(GameError::InvalidArgument(format!(
                "profile has {} entries, game has {} players",
                profile.len(),
                self.players.len()
            )));
        }
        for (s, &k) in self.spaces.iter().zip(profile) {
            s.coords(k)?;
        }
        Ok(())
    }

    /// Payoff of `player` at an already-validated profile.
    pub(crate) fn payoff(&self, player: usize, profile: &[usize]) -> Result<f64, GameError> {
        let coords: Vec<&[f64]> = self
            .spaces
            .iter()
            .zip(profile)
            .map(|(s, &k)| s.point(k))
            .collect();
        let v = self.utilities[player].eval(&coords);
        if v.is_finite() {
            Ok(v)
        } else {
            Err(GameError::UtilityDomain {
                player,
                profile: profile.to_vec(),
                value: v,
            })
        }
    }

    /// Payoffs of every own grid point against a fixed opponent profile,
    /// with the maximum.
    pub(crate) fn conditional_payoffs(&self, player: usize, profile: &mut [usize]) -> Result<(Vec<f64>, f64), GameError> {
        let n = self.spaces[player].len();
        let mut out = Vec::with_capacity(n);
        let mut best = f64::NEG_INFINITY;
        for k in 0..n {
            profile[player] = k;
            let v = self.payoff(player, profile)?;
            best = best.max(v);
            out.push(v);
        }
        Ok((out, best))
    }

    /// Full profile from an opponent profile with `player`'s slot set to `own`.
    pub(crate) fn insert(&self, player: usize, x_minus_i: &[usize], own: usize) -> Vec<usize> {
        let mut p = Vec::with_capacity(self.players.len());
        p.extend_from_slice(&x_minus_i[..player]);
        p.push(own);
        p.extend_from_slice(&x_minus_i[player..]);
        p
    }
}

pub fn evaluate_utility(game: &Game, player: usize, profile: &[usize]) -> Result<f64, GameError> {
    game.check_player(player)?;
    game.check_profile(profile)?;
    game.payoff(player, profile)
}

/// Own grid points whose payoff is within `eps` of the conditional grid
/// maximum, in index order.
pub fn best_response_set(game: &Game, player: usize, x_minus_i: &[usize], eps: f64) -> Result<Vec<usize>, GameError> {
    game.check_player(player)?;
    check_eps(eps)?;
    if x_minus_i.len() + 1 != game.num_players() {
        return Err(GameError::InvalidArgument(format!(
            "opponent profile has {} entries, expected {}",
            x_minus_i.len(),
            game.num_players() - 1
        )));
    }
    let mut profile = game.insert(player, x_minus_i, 0);
    game.check_profile(&profile)?;
    let (payoffs, best) = game.conditional_payoffs(player, &mut profile)?;
    Ok(argmax_set(&payoffs, best, eps).0)
}

fn argmax_set(payoffs: &[f64], best: f64, eps: f64) -> (Vec<usize>, Vec<f64>) {
    payoffs
        .iter()
        .enumerate()
        .filter(|(_, &v)| v >= best - eps)
        .map(|(k, &v)| (k, v))
        .unzip()
}

fn check_eps(eps: f64) -> Result<(), GameError> {
    if eps >= 0.0 && eps.is_finite() {
        Ok(())
    } else {
        Err(GameError::InvalidArgument(format!("tolerance must be finite and nonnegative, got {eps}")))
    }
}

/// One sampled value of a best-response correspondence.
#[derive(Debug, Clone, PartialEq)]
pub struct BrEntry {
    /// Own grid points in the ε-argmax set, ascending.
    pub points: Vec<usize>,
    /// Payoff at each listed point.
    pub payoffs: Vec<f64>,
    /// Conditional grid maximum.
    pub max_payoff: f64,
}

/// Sampled best-response correspondence of one player: one entry per
/// opponent grid profile, in opponent-profile index order.
#[derive(Debug, Clone)]
pub struct CorrespondenceTable {
    pub player: usize,
    pub eps: f64,
    pub own_space: DiscreteSpace,
    pub opponent_spaces: Vec<DiscreteSpace>,
    indexer: ProfileIndexer,
    entries: Vec<BrEntry>,
}

impl CorrespondenceTable {
    pub fn entries(&self) -> &[BrEntry] {
        &self.entries
    }

    pub fn opponent_indexer(&self) -> &ProfileIndexer {
        &self.indexer
    }

    pub fn entry(&self, x_minus_i: &[usize]) -> &BrEntry {
        &self.entries[self.indexer.flatten(x_minus_i)]
    }

    /// Entry for the opponents of `player` inside a full profile.
    pub fn entry_for_profile(&self, profile: &[usize]) -> &BrEntry {
        let mut idx = 0;
        let mut j = 0;
        for (p, &k) in profile.iter().enumerate() {
            if p != self.player {
                idx = idx * self.indexer.sizes()[j] + k;
                j += 1;
            }
        }
        &self.entries[idx]
    }
}

pub fn br_correspondence_table(game: &Game, player: usize, eps: f64) -> Result<CorrespondenceTable, GameError> {
    game.check_player(player)?;
    check_eps(eps)?;
    let indexer = game
        .opponent_indexer(player)
        .ok_or_else(|| GameError::InvalidArgument("opponent grid too large".into()))?;
    let entries = (0..indexer.total())
        .into_par_iter()
        .map(|idx| {
            let opp = indexer.unflatten(idx);
            let mut profile = game.insert(player, &opp, 0);
            let (payoffs, best) = game.conditional_payoffs(player, &mut profile)?;
            let (points, payoffs) = argmax_set(&payoffs, best, eps);
            Ok(BrEntry {
                points,
                payoffs,
                max_payoff: best,
            })
        })
        .collect::<Result<Vec<_>, GameError>>()?;
    Ok(CorrespondenceTable {
        player,
        eps,
        own_space: game.space(player).clone(),
        opponent_spaces: game
            .spaces()
            .iter()
            .enumerate()
            .filter(|(j, _)| *j != player)
            .map(|(_, s)| s.clone())
            .collect(),
        indexer,
        entries,
    })
}

/// Largest embedding-coordinate diameter of a set of grid points.
pub fn set_diameter(space: &DiscreteSpace, points: &[usize]) -> f64 {
    let mut d: f64 = 0.0;
    for (i, &a) in points.iter().enumerate() {
        for &b in &points[i + 1..] {
            d = d.max(euclidean(space.point(a), space.point(b)));
        }
    }
    d
}

/// Every entry has diameter at most `diameter_tol`.
pub fn check_single_valued(table: &CorrespondenceTable, diameter_tol: f64) -> bool {
    table
        .entries
        .iter()
        .all(|e| set_diameter(&table.own_space, &e.points) <= diameter_tol)
}

/// Every entry spans an acyclic induced subcomplex of the own-space
/// triangulation.
pub fn check_acyclic_valued(table: &CorrespondenceTable) -> bool {
    let Ok(complex) = triangulate(&table.own_space) else {
        return false;
    };
    let mut memo: HashMap<&[usize], bool> = HashMap::new();
    for e in &table.entries {
        if e.points.len() == 1 {
            continue;
        }
        let ok = *memo.entry(&e.points).or_insert_with(|| {
            homology(&complex.induced(&e.points))
                .map(|h| is_acyclic(&h))
                .unwrap_or(false)
        });
        if !ok {
            return false;
        }
    }
    true
}

/// Largest observed `|Δu| / ‖Δx‖` over own-coordinate grid steps, sampled
/// over at most `budget` opponent profiles at a deterministic stride.
pub fn estimate_lipschitz(game: &Game, player: usize, budget: usize) -> Result<f64, GameError> {
    game.check_player(player)?;
    let indexer = game
        .opponent_indexer(player)
        .ok_or_else(|| GameError::InvalidArgument("opponent grid too large".into()))?;
    let space = game.space(player);
    let stride = indexer.total().div_ceil(budget.max(1)).max(1);
    let samples: Vec<usize> = (0..indexer.total()).step_by(stride).collect();
    let per_sample = samples
        .par_iter()
        .map(|&idx| {
            let opp = indexer.unflatten(idx);
            let mut profile = game.insert(player, &opp, 0);
            let (payoffs, _) = game.conditional_payoffs(player, &mut profile)?;
            let mut l: f64 = 0.0;
            for a in 0..space.len() {
                for b in space.neighbors(a)? {
                    if b > a {
                        let d = euclidean(space.point(a), space.point(b));
                        l = l.max((payoffs[a] - payoffs[b]).abs() / d);
                    }
                }
            }
            Ok(l)
        })
        .collect::<Result<Vec<f64>, GameError>>()?;
    Ok(per_sample.into_iter().fold(0.0, f64::max))
}

/// Default argmax tolerance `max_i 2·L_i·h_i` with `h_i` the own grid
/// spacing and `L_i` the supplied Lipschitz bound or a sampled estimate.
pub fn default_eps(game: &Game, lipschitz: Option<f64>) -> Result<f64, GameError> {
    let mut eps: f64 = 0.0;
    for i in 0..game.num_players() {
        let l = match lipschitz {
            Some(l) => l,
            None => estimate_lipschitz(game, i, 4096)?,
        };
        eps = eps.max(2.0 * l * game.space(i).spacing());
    }
    Ok(eps)
}
