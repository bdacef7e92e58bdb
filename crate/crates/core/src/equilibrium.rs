//! Exhaustive grid search for pure-strategy Nash equilibria.
//!
//! The scalar residual of a profile is the total deviation gain
//! `Σᵢ (maxᵧ uᵢ(y, x₋ᵢ) − uᵢ(x))` over the grid. It vanishes exactly at grid
//! equilibria and bounds every single player's gain from above.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::game::{br_correspondence_table, CorrespondenceTable, Game, GameError, ProfileIndexer};

pub const DEFAULT_RESOLUTION_CAP: usize = 10_000_000;
pub const RESOLUTION_CAP_ENV: &str = "NASHTOPO_RESOLUTION_CAP";

/// Profile cap from the environment, falling back to [`DEFAULT_RESOLUTION_CAP`].
pub fn resolution_cap() -> usize {
    std::env::var(RESOLUTION_CAP_ENV)
        .ok()
        .and_then(|v| v.trim().parse().ok())
        .unwrap_or(DEFAULT_RESOLUTION_CAP)
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EquilibriumError {
    #[error(transparent)]
    Game(#[from] GameError),
    #[error("incompatible tables: {0}")]
    IncompatibleTables(String),
    #[error("grid has {} profiles, above the cap of {cap}", .profiles.map_or("more than usize::MAX".to_string(), |p| p.to_string()))]
    ResolutionCap { profiles: Option<usize>, cap: usize },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

/// The extended product best-response map sampled on the full grid:
/// coordinate `i` of the output at `x` is player `i`'s table entry at `x₋ᵢ`.
#[derive(Debug, Clone)]
pub struct ProductMapSample {
    tables: Vec<CorrespondenceTable>,
    indexer: ProfileIndexer,
}

impl ProductMapSample {
    pub fn domain(&self) -> &ProfileIndexer {
        &self.indexer
    }

    pub fn tables(&self) -> &[CorrespondenceTable] {
        &self.tables
    }

    /// Per-player factors of the output set at `profile`; the output is
    /// their Cartesian product.
    pub fn output(&self, profile: &[usize]) -> Vec<&[usize]> {
        self.tables
            .iter()
            .map(|t| t.entry_for_profile(profile).points.as_slice())
            .collect()
    }

    /// Whether `profile` lies in its own output set.
    pub fn is_fixed_point(&self, profile: &[usize]) -> bool {
        self.tables
            .iter()
            .zip(profile)
            .all(|(t, k)| t.entry_for_profile(profile).points.binary_search(k).is_ok())
    }
}

pub fn product_br_map(tables: Vec<CorrespondenceTable>) -> Result<ProductMapSample, EquilibriumError> {
    if tables.is_empty() {
        return Err(EquilibriumError::IncompatibleTables("no tables".into()));
    }
    for (i, t) in tables.iter().enumerate() {
        if t.player != i {
            return Err(EquilibriumError::IncompatibleTables(format!(
                "table {i} belongs to player {}",
                t.player
            )));
        }
        let others: Vec<_> = tables
            .iter()
            .enumerate()
            .filter(|(j, _)| *j != i)
            .map(|(_, o)| &o.own_space)
            .collect();
        if t.opponent_spaces.len() != others.len() || t.opponent_spaces.iter().zip(&others).any(|(a, b)| a != *b) {
            return Err(EquilibriumError::IncompatibleTables(format!(
                "table {i} was built on different opponent spaces"
            )));
        }
    }
    let indexer = ProfileIndexer::new(tables.iter().map(|t| t.own_space.len()).collect())
        .ok_or(EquilibriumError::ResolutionCap {
            profiles: None,
            cap: usize::MAX,
        })?;
    Ok(ProductMapSample { tables, indexer })
}

/// Per-player deviation gains `maxᵧ uᵢ(y, x₋ᵢ) − uᵢ(x)` on the grid.
pub fn deviation_gaps(game: &Game, profile: &[usize]) -> Result<Vec<f64>, GameError> {
    game.check_profile(profile)?;
    let mut scratch = profile.to_vec();
    (0..game.num_players())
        .map(|i| {
            let own = game.payoff(i, profile)?;
            let (_, best) = game.conditional_payoffs(i, &mut scratch)?;
            scratch[i] = profile[i];
            Ok(best - own)
        })
        .collect()
}

/// Total deviation gain over all players; zero exactly at grid equilibria.
pub fn equilibrium_residual(game: &Game, profile: &[usize]) -> Result<f64, GameError> {
    Ok(deviation_gaps(game, profile)?.iter().sum())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SearchVerdict {
    Found,
    NoneAtResolution,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EquilibriumPoint {
    pub profile: Vec<usize>,
    pub coords: Vec<Vec<f64>>,
    /// Per-player deviation gains.
    pub gaps: Vec<f64>,
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EquilibriumReport {
    pub players: Vec<String>,
    /// Per-player elementary-factor resolutions.
    pub resolution: Vec<Vec<usize>>,
    pub grid_sizes: Vec<usize>,
    pub eps: f64,
    pub tol: f64,
    pub profiles_scanned: usize,
    pub equilibria: Vec<EquilibriumPoint>,
    pub verdict: SearchVerdict,
    /// Smallest residual anywhere on the grid and where it is attained.
    pub min_residual: EquilibriumPoint,
    pub note: Option<String>,
}

const NONE_NOTE: &str = "no grid profile is within tolerance; this is a statement about the grid, \
not a proof that the continuum game has no equilibrium";

pub fn find_equilibria(game: &Game, eps: f64, tol: f64) -> Result<EquilibriumReport, EquilibriumError> {
    find_equilibria_with_cap(game, eps, tol, resolution_cap())
}

pub fn find_equilibria_with_cap(game: &Game, eps: f64, tol: f64, cap: usize) -> Result<EquilibriumReport, EquilibriumError> {
    if !(eps >= 0.0 && tol >= 0.0 && eps.is_finite() && tol.is_finite()) {
        return Err(EquilibriumError::InvalidArgument(format!(
            "tolerances must be finite and nonnegative (eps={eps}, tol={tol})"
        )));
    }
    let indexer = game.profile_indexer().ok_or(EquilibriumError::ResolutionCap { profiles: None, cap })?;
    if indexer.total() > cap {
        return Err(EquilibriumError::ResolutionCap {
            profiles: Some(indexer.total()),
            cap,
        });
    }
    let tables = (0..game.num_players())
        .map(|i| br_correspondence_table(game, i, eps))
        .collect::<Result<Vec<_>, _>>()?;
    let map = product_br_map(tables)?;

    const CHUNK: usize = 4096;
    let chunks = indexer.total().div_ceil(CHUNK);
    let results = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut profile = vec![0; game.num_players()];
            let mut found = Vec::new();
            let mut best: Option<(f64, usize)> = None;
            for idx in c * CHUNK..((c + 1) * CHUNK).min(indexer.total()) {
                indexer.unflatten_into(idx, &mut profile);
                let mut residual = 0.0;
                for (i, t) in map.tables().iter().enumerate() {
                    residual += t.entry_for_profile(&profile).max_payoff - game.payoff(i, &profile)?;
                }
                if residual <= tol {
                    found.push(idx);
                }
                if best.is_none_or(|(r, _)| residual < r) {
                    best = Some((residual, idx));
                }
            }
            Ok((found, best))
        })
        .collect::<Result<Vec<_>, GameError>>()?;

    let mut equilibria = Vec::new();
    let mut best: Option<(f64, usize)> = None;
    for (found, b) in results {
        equilibria.extend(found);
        if let Some((r, idx)) = b {
            if best.is_none_or(|(br, _)| r < br) {
                best = Some((r, idx));
            }
        }
    }
    let point = |idx: usize| -> Result<EquilibriumPoint, GameError> {
        let profile = indexer.unflatten(idx);
        let gaps: Vec<f64> = map
            .tables()
            .iter()
            .enumerate()
            .map(|(i, t)| Ok(t.entry_for_profile(&profile).max_payoff - game.payoff(i, &profile)?))
            .collect::<Result<_, GameError>>()?;
        Ok(EquilibriumPoint {
            coords: profile_coords(game, &profile),
            residual: gaps.iter().sum(),
            gaps,
            profile,
        })
    };
    let equilibria = equilibria.into_iter().map(point).collect::<Result<Vec<_>, _>>()?;
    let min_residual = point(best.expect("grid is nonempty").1)?;
    let verdict = if equilibria.is_empty() {
        SearchVerdict::NoneAtResolution
    } else {
        SearchVerdict::Found
    };
    Ok(EquilibriumReport {
        players: game.players().to_vec(),
        resolution: game.spaces().iter().map(|s| s.resolution()).collect(),
        grid_sizes: game.sizes(),
        eps,
        tol,
        profiles_scanned: indexer.total(),
        equilibria,
        verdict,
        min_residual,
        note: (verdict == SearchVerdict::NoneAtResolution).then(|| NONE_NOTE.to_string()),
    })
}

pub(crate) fn profile_coords(game: &Game, profile: &[usize]) -> Vec<Vec<f64>> {
    game.spaces()
        .iter()
        .zip(profile)
        .map(|(s, &k)| s.point(k).to_vec())
        .collect()
}

/// Outcome of a local refinement around a candidate profile.
#[derive(Debug, Clone)]
pub struct Refinement {
    /// The game on the refined grid; `profile` indexes into its spaces.
    pub game: Game,
    pub profile: Vec<usize>,
    pub gaps: Vec<f64>,
    pub residual: f64,
    /// Whether `residual ≤ tol`.
    pub converged: bool,
}

/// Re-search a window of one coarse step around `candidate` on the grid
/// refined by `factor`. The candidate itself is part of the window, so the
/// result is never worse than the candidate measured on the refined grid.
pub fn refine(game: &Game, candidate: &[usize], factor: usize, tol: f64) -> Result<Refinement, EquilibriumError> {
    refine_with_cap(game, candidate, factor, tol, resolution_cap())
}

pub fn refine_with_cap(
    game: &Game,
    candidate: &[usize],
    factor: usize,
    tol: f64,
    cap: usize,
) -> Result<Refinement, EquilibriumError> {
    if factor < 2 {
        return Err(EquilibriumError::InvalidArgument(format!("refinement factor must be ≥ 2, got {factor}")));
    }
    game.check_profile(candidate)?;
    let fine = game.refined(factor);
    // per-player list of refined grid indices in the window
    let mut windows: Vec<Vec<usize>> = Vec::new();
    for (coarse, &k) in game.spaces().iter().zip(candidate) {
        let space = coarse.refined(factor);
        let center: Vec<usize> = coarse.unflatten(k).iter().map(|m| m * factor).collect();
        let mut offsets: Vec<Vec<usize>> = vec![Vec::new()];
        for (f, &c) in space.factors().iter().zip(&center) {
            let n = f.resolution();
            let mut axis = Vec::new();
            for d in -(factor as isize)..=(factor as isize) {
                let v = c as isize + d;
                let v = if f.is_circle() {
                    v.rem_euclid(n as isize) as usize
                } else if v < 0 || v >= n as isize {
                    continue;
                } else {
                    v as usize
                };
                if !axis.contains(&v) {
                    axis.push(v);
                }
            }
            offsets = offsets
                .into_iter()
                .flat_map(|prefix| {
                    axis.iter().map(move |&v| {
                        let mut p = prefix.clone();
                        p.push(v);
                        p
                    })
                })
                .collect();
        }
        let mut pts: Vec<usize> = offsets.iter().map(|m| space.flatten(m)).collect();
        pts.sort_unstable();
        windows.push(pts);
    }
    let window = ProfileIndexer::new(windows.iter().map(|w| w.len()).collect())
        .ok_or(EquilibriumError::ResolutionCap { profiles: None, cap })?;
    let work = window.total().saturating_mul(fine.sizes().iter().sum::<usize>());
    if work > cap {
        return Err(EquilibriumError::ResolutionCap {
            profiles: Some(work),
            cap,
        });
    }
    let scored = (0..window.total())
        .into_par_iter()
        .map(|w| {
            let local = window.unflatten(w);
            let profile: Vec<usize> = local.iter().zip(&windows).map(|(&j, pts)| pts[j]).collect();
            let gaps = deviation_gaps(&fine, &profile)?;
            Ok((gaps.iter().sum::<f64>(), profile, gaps))
        })
        .collect::<Result<Vec<_>, GameError>>()?;
    let center: Vec<usize> = game
        .spaces()
        .iter()
        .zip(candidate)
        .map(|(s, &k)| s.refine_index(k, factor))
        .collect();
    // ties go to the candidate, then to the earliest window profile
    let (residual, profile, gaps) = scored
        .into_iter()
        .reduce(|a, b| {
            if b.0 < a.0 || (b.0 == a.0 && b.1 == center && a.1 != center) {
                b
            } else {
                a
            }
        })
        .expect("window contains the candidate");
    Ok(Refinement {
        game: fine,
        profile,
        gaps,
        residual,
        converged: residual <= tol,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::Utility;
    use crate::spaces::{make_circle, make_interval, product};

    fn names(n: usize) -> Vec<String> {
        (1..=n).map(|i| format!("x{i}")).collect()
    }

    fn circle_game(n: usize, u: [&str; 2]) -> Game {
        let c = make_circle(n).unwrap();
        Game::from_expressions(names(2), vec![c.clone(), c], &u).unwrap()
    }

    #[test]
    fn torus_product_map_swaps_and_negates() {
        let g = circle_game(8, ["-norm(x1 - x2)", "-norm(x1 + x2)"]);
        let tables = (0..2).map(|i| br_correspondence_table(&g, i, 0.0).unwrap()).collect();
        let phi = product_br_map(tables).unwrap();
        for a in 0..8 {
            for b in 0..8 {
                assert_eq!(phi.output(&[a, b]), vec![&[b][..], &[(a + 4) % 8][..]]);
                assert!(!phi.is_fixed_point(&[a, b]));
            }
        }
    }

    #[test]
    fn coordination_map_swaps() {
        let g = circle_game(6, ["-norm(x1 - x2)", "-norm(x1 - x2)"]);
        let tables = (0..2).map(|i| br_correspondence_table(&g, i, 0.0).unwrap()).collect();
        let phi = product_br_map(tables).unwrap();
        for a in 0..6 {
            for b in 0..6 {
                assert_eq!(phi.output(&[a, b]), vec![&[b][..], &[a][..]]);
            }
        }
    }

    #[test]
    fn mismatched_tables_are_rejected() {
        let g8 = circle_game(8, ["0", "0"]);
        let g6 = circle_game(6, ["0", "0"]);
        let tables = vec![
            br_correspondence_table(&g8, 0, 0.0).unwrap(),
            br_correspondence_table(&g6, 1, 0.0).unwrap(),
        ];
        assert!(matches!(product_br_map(tables), Err(EquilibriumError::IncompatibleTables(_))));
        let swapped = vec![
            br_correspondence_table(&g8, 1, 0.0).unwrap(),
            br_correspondence_table(&g8, 0, 0.0).unwrap(),
        ];
        assert!(product_br_map(swapped).is_err());
    }

    #[test]
    fn torus_residuals_at_resolution_four() {
        let g = circle_game(4, ["-norm(x1 - x2)", "-norm(x1 + x2)"]);
        let mut min = f64::INFINITY;
        for a in 0..4 {
            for b in 0..4 {
                let r = equilibrium_residual(&g, &[a, b]).unwrap();
                assert!(r > 0.0);
                min = min.min(r);
            }
        }
        assert!((min - 2.0).abs() < 1e-12, "{min}");
    }

    #[test]
    fn coordination_diagonal() {
        let g = circle_game(12, ["-norm(x1 - x2)", "-norm(x1 - x2)"]);
        assert_eq!(equilibrium_residual(&g, &[5, 5]).unwrap(), 0.0);
        let report = find_equilibria(&g, 0.0, 0.0).unwrap();
        assert_eq!(report.verdict, SearchVerdict::Found);
        let profiles: Vec<Vec<usize>> = report.equilibria.iter().map(|e| e.profile.clone()).collect();
        assert_eq!(profiles, (0..12).map(|k| vec![k, k]).collect::<Vec<_>>());
    }

    #[test]
    fn constant_best_responses_have_one_equilibrium() {
        let c = make_circle(10).unwrap();
        let t1 = c.coords(3).unwrap().to_vec();
        let t2 = c.coords(7).unwrap().to_vec();
        let g = Game::new(
            names(2),
            vec![c.clone(), c],
            vec![Utility::neg_distance_to(0, t1), Utility::neg_distance_to(1, t2)],
        )
        .unwrap();
        let report = find_equilibria(&g, 0.0, 0.0).unwrap();
        assert_eq!(report.equilibria.len(), 1);
        assert_eq!(report.equilibria[0].profile, vec![3, 7]);
    }

    #[test]
    fn single_player_argmax() {
        let g = Game::from_expressions(names(1), vec![make_interval(11).unwrap()], &["-abs(x1[0] - 0.3)"]).unwrap();
        let report = find_equilibria(&g, 0.0, 1e-12).unwrap();
        assert_eq!(report.equilibria.len(), 1);
        assert_eq!(report.equilibria[0].profile, vec![3]);
        assert!(equilibrium_residual(&g, &[3]).unwrap().abs() < 1e-12);
    }

    #[test]
    fn torus_has_no_grid_equilibrium() {
        for n in [4, 8, 32] {
            let g = circle_game(n, ["-norm(x1 - x2)", "-norm(x1 + x2)"]);
            let report = find_equilibria(&g, 0.0, 1.9).unwrap();
            assert_eq!(report.verdict, SearchVerdict::NoneAtResolution);
            assert!(report.min_residual.residual >= 2.0 - 1e-12);
            assert!(report.note.is_some());
        }
    }

    #[test]
    fn resolution_cap_is_enforced() {
        let g = circle_game(100, ["0", "0"]);
        assert!(matches!(
            find_equilibria_with_cap(&g, 0.0, 0.0, 9_999),
            Err(EquilibriumError::ResolutionCap { profiles: Some(10_000), cap: 9_999 })
        ));
        assert!(find_equilibria(&g, -1.0, 0.0).is_err());
    }

    #[test]
    fn listed_profiles_are_fixed_points() {
        let g = circle_game(16, ["-norm(x1 - x2)", "-norm(x1 - [0.6, 0.8]) - 0.5 * norm(x2 - x1)"]);
        for tol in [0.0, 0.05, 0.4] {
            let report = find_equilibria(&g, tol, tol).unwrap();
            let tables = (0..2).map(|i| br_correspondence_table(&g, i, tol).unwrap()).collect();
            let phi = product_br_map(tables).unwrap();
            for e in &report.equilibria {
                assert!(phi.is_fixed_point(&e.profile));
                assert!(e.gaps.iter().all(|&g| g <= tol));
            }
            // every fixed point of the tol/2 map is listed
            let tables = (0..2).map(|i| br_correspondence_table(&g, i, tol / 2.0).unwrap()).collect();
            let half = product_br_map(tables).unwrap();
            for a in 0..16 {
                for b in 0..16 {
                    if half.is_fixed_point(&[a, b]) {
                        assert!(report.equilibria.iter().any(|e| e.profile == vec![a, b]));
                    }
                }
            }
        }
    }

    #[test]
    fn refine_converges_to_analytic_maximizer() {
        let g = Game::from_expressions(names(1), vec![make_interval(6).unwrap()], &["-(x1[0] - 0.3) * (x1[0] - 0.3)"]).unwrap();
        let report = find_equilibria(&g, 0.0, 1e-9).unwrap();
        let start = &report.equilibria[0].profile;
        let r = refine(&g, start, 4, 1e-9).unwrap();
        let x = r.game.space(0).coords(r.profile[0]).unwrap()[0];
        assert!((x - 0.3).abs() <= 0.2 / 4.0 + 1e-12);
        assert!(r.converged);
    }

    #[test]
    fn refine_keeps_exact_equilibria_and_never_fixes_the_torus() {
        let g = circle_game(8, ["-norm(x1 - x2)", "-norm(x1 - x2)"]);
        let r = refine(&g, &[3, 3], 2, 0.0).unwrap();
        assert_eq!(r.residual, 0.0);
        let fine = r.game.space(0).coords(r.profile[0]).unwrap();
        let coarse = g.space(0).coords(3).unwrap();
        assert!(fine.iter().zip(coarse).all(|(a, b)| (a - b).abs() < 1e-12));

        let t = circle_game(8, ["-norm(x1 - x2)", "-norm(x1 + x2)"]);
        for start in [[0, 0], [0, 2], [1, 5]] {
            let r = refine(&t, &start, 3, 1.0).unwrap();
            assert!(!r.converged && r.residual >= 2.0 - 1e-12);
        }
        assert!(refine(&t, &[0, 0], 1, 1.0).is_err());
    }

    #[test]
    fn product_space_player() {
        let sq = product(&[make_interval(5).unwrap(), make_interval(5).unwrap()]).unwrap();
        let g = Game::from_expressions(
            names(2),
            vec![sq.clone(), sq],
            &["-norm(x1 - x2)", "-norm(x2 - [0.25, 0.75])"],
        )
        .unwrap();
        let report = find_equilibria(&g, 0.0, 0.0).unwrap();
        assert_eq!(report.equilibria.len(), 1);
        assert_eq!(report.equilibria[0].coords, vec![vec![0.25, 0.75], vec![0.25, 0.75]]);
    }
}
