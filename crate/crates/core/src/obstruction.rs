//! Homotopy invariants of sampled maps and the existence verdict.
//!
//! Maps into catalog spaces are classified up to homotopy by what they do
//! on the circle factors: a map between products of circles and intervals is
//! null-homotopic iff every winding of a target circle factor along a domain
//! circle factor vanishes. Windings are computed by lifting angles along
//! sampled loops.

use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::equilibrium::{find_equilibria, EquilibriumError, EquilibriumReport, SearchVerdict};
use crate::game::{br_correspondence_table, check_acyclic_valued, set_diameter, CorrespondenceTable, Game, GameError, Utility};
use crate::homology::{homology, is_acyclic, HomologyResult};
use crate::spaces::{euclidean, make_circle, triangulate, DiscreteSpace, Factor};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ObstructionError {
    #[error("insufficient resolution: step {index} turns by {step:.6} rad (needs < π); refine the sampling")]
    InsufficientResolution { index: usize, step: f64 },
    #[error("degree is not well defined: winding {at_base} at the base point but {at_mid} at the mid-grid point (target factor {row}, domain factor {col})")]
    NotWellDefined {
        row: usize,
        col: usize,
        at_base: i64,
        at_mid: i64,
    },
    #[error("best-response value spans an arc of {diameter:.4} rad on a target circle; a continuous selection needs less than π")]
    AmbiguousSelection { diameter: f64 },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error(transparent)]
    Game(#[from] GameError),
    #[error(transparent)]
    Equilibrium(#[from] EquilibriumError),
}

/// Samples of a map `S¹ → S¹` along one traversal of the domain loop. The
/// loop closes from the last sample back to the first.
#[derive(Debug, Clone, PartialEq)]
pub struct CircleMapSample {
    outputs: Vec<[f64; 2]>,
}

impl CircleMapSample {
    /// Outputs are points of the plane away from the origin; only their
    /// direction matters.
    pub fn new(outputs: Vec<[f64; 2]>) -> Result<Self, ObstructionError> {
        if outputs.is_empty() {
            return Err(ObstructionError::InvalidArgument("empty circle map sample".into()));
        }
        if let Some(i) = outputs.iter().position(|p| !(p[0].hypot(p[1]) > 0.0)) {
            return Err(ObstructionError::InvalidArgument(format!("sample {i} is not on a circle around the origin")));
        }
        Ok(CircleMapSample { outputs })
    }

    pub fn from_angles(angles: &[f64]) -> Result<Self, ObstructionError> {
        Self::new(angles.iter().map(|a| [a.cos(), a.sin()]).collect())
    }

    pub fn len(&self) -> usize {
        self.outputs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.outputs.is_empty()
    }

    /// Largest absolute turning angle between consecutive samples.
    pub fn max_step(&self) -> f64 {
        self.steps().map(f64::abs).fold(0.0, f64::max)
    }

    fn steps(&self) -> impl Iterator<Item = f64> + '_ {
        let n = self.outputs.len();
        (0..n).map(move |i| {
            let a = self.outputs[i];
            let b = self.outputs[(i + 1) % n];
            (a[0] * b[1] - a[1] * b[0]).atan2(a[0] * b[0] + a[1] * b[1])
        })
    }
}

/// Net number of turns of a sampled circle map.
pub fn winding_number(sample: &CircleMapSample) -> Result<i64, ObstructionError> {
    let mut total = 0.0;
    for (index, step) in sample.steps().enumerate() {
        if step.abs() >= PI {
            return Err(ObstructionError::InsufficientResolution { index, step });
        }
        total += step;
    }
    let turns = total / TAU;
    let rounded = turns.round();
    if (turns - rounded).abs() > 0.25 {
        return Err(ObstructionError::InsufficientResolution {
            index: sample.len(),
            step: total,
        });
    }
    Ok(rounded as i64)
}

/// A set-valued map from a product grid into a catalog space.
#[derive(Debug, Clone)]
pub struct SampledMap {
    domain: Vec<Factor>,
    strides: Vec<usize>,
    target: DiscreteSpace,
    values: Vec<Vec<usize>>,
}

impl SampledMap {
    /// `values[i]` is the (nonempty) image of domain grid point `i`, indexed
    /// in mixed radix over `domain` with the last factor fastest.
    pub fn new(domain: Vec<Factor>, target: DiscreteSpace, values: Vec<Vec<usize>>) -> Result<Self, ObstructionError> {
        let mut strides = vec![1; domain.len()];
        for i in (0..domain.len().saturating_sub(1)).rev() {
            strides[i] = strides[i + 1] * domain[i + 1].resolution();
        }
        let count: usize = domain.iter().map(|f| f.resolution()).product();
        if values.len() != count {
            return Err(ObstructionError::InvalidArgument(format!(
                "{} values for a domain of {count} points",
                values.len()
            )));
        }
        if let Some(i) = values.iter().position(|v| v.is_empty() || v.iter().any(|&k| k >= target.len())) {
            return Err(ObstructionError::InvalidArgument(format!("value {i} is empty or out of range")));
        }
        Ok(SampledMap {
            domain,
            strides,
            target,
            values,
        })
    }

    /// Point-valued map given on grid indices.
    pub fn from_fn(domain: &DiscreteSpace, target: &DiscreteSpace, f: impl Fn(usize) -> usize) -> Result<Self, ObstructionError> {
        Self::new(
            domain.factors().to_vec(),
            target.clone(),
            (0..domain.len()).map(|i| vec![f(i)]).collect(),
        )
    }

    /// Best-response map of a table: domain is the opponents' product grid.
    pub fn from_table(table: &CorrespondenceTable) -> Self {
        let domain: Vec<Factor> = table
            .opponent_spaces
            .iter()
            .flat_map(|s| s.factors().iter().copied())
            .collect();
        Self::new(
            domain,
            table.own_space.clone(),
            table.entries().iter().map(|e| e.points.clone()).collect(),
        )
        .expect("tables are consistent with their spaces")
    }

    pub fn target(&self) -> &DiscreteSpace {
        &self.target
    }

    pub fn domain(&self) -> &[Factor] {
        &self.domain
    }

    pub fn value(&self, index: usize) -> &[usize] {
        &self.values[index]
    }
}

/// Integer matrix of windings; rows are target circle factors, columns are
/// domain circle factors.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DegreeMatrix {
    pub rows: usize,
    pub cols: usize,
    pub entries: Vec<i64>,
}

impl DegreeMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        DegreeMatrix {
            rows,
            cols,
            entries: vec![0; rows * cols],
        }
    }

    pub fn from_rows(rows: &[Vec<i64>]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |v| v.len());
        DegreeMatrix {
            rows: r,
            cols: c,
            entries: rows.concat(),
        }
    }

    pub fn get(&self, r: usize, c: usize) -> i64 {
        self.entries[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: i64) {
        self.entries[r * self.cols + c] = v;
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(|&e| e == 0)
    }
}

/// Ambient offsets of the circle factors of a space.
fn circle_offsets(space: &DiscreteSpace) -> Vec<usize> {
    let mut out = Vec::new();
    let mut off = 0;
    for f in space.factors() {
        if f.is_circle() {
            out.push(off);
        }
        off += f.ambient_dim();
    }
    out
}

/// Length of the shortest arc containing a set of target points on one
/// circle factor.
fn angular_span(target: &DiscreteSpace, offset: usize, points: &[usize]) -> f64 {
    let mut angles: Vec<f64> = points
        .iter()
        .map(|&k| {
            let p = target.point(k);
            p[offset + 1].atan2(p[offset]).rem_euclid(TAU)
        })
        .collect();
    angles.sort_by(f64::total_cmp);
    let mut gap = TAU - (angles[angles.len() - 1] - angles[0]);
    for w in angles.windows(2) {
        gap = gap.max(w[1] - w[0]);
    }
    TAU - gap
}

fn loop_windings(map: &SampledMap, base: &[usize], col: usize, offsets: &[usize]) -> Result<Vec<i64>, ObstructionError> {
    let n = map.domain[col].resolution();
    let mut multi = base.to_vec();
    let mut selected: Vec<usize> = Vec::with_capacity(n);
    for k in 0..n {
        multi[col] = k;
        let idx: usize = multi.iter().zip(&map.strides).map(|(a, s)| a * s).sum();
        let set = &map.values[idx];
        for &off in offsets {
            let diameter = angular_span(&map.target, off, set);
            if diameter >= PI {
                return Err(ObstructionError::AmbiguousSelection { diameter });
            }
        }
        // continuous selection: the value nearest the previous choice
        let pick = match selected.last() {
            None => set[0],
            Some(&prev) => *set
                .iter()
                .min_by(|&&a, &&b| {
                    let pa = euclidean(map.target.point(a), map.target.point(prev));
                    let pb = euclidean(map.target.point(b), map.target.point(prev));
                    pa.total_cmp(&pb)
                })
                .expect("nonempty"),
        };
        selected.push(pick);
    }
    offsets
        .iter()
        .map(|&off| {
            let sample = CircleMapSample::new(
                selected
                    .iter()
                    .map(|&k| {
                        let p = map.target.point(k);
                        [p[off], p[off + 1]]
                    })
                    .collect(),
            )?;
            winding_number(&sample)
        })
        .collect()
}

/// Windings of every target circle factor along every domain circle factor,
/// with the other domain coordinates held at grid index 0 and re-checked at
/// the mid-grid index.
pub fn degree_matrix(map: &SampledMap) -> Result<DegreeMatrix, ObstructionError> {
    let offsets = circle_offsets(&map.target);
    let cols: Vec<usize> = (0..map.domain.len()).filter(|&c| map.domain[c].is_circle()).collect();
    let base = vec![0; map.domain.len()];
    let mid: Vec<usize> = map.domain.iter().map(|f| f.resolution() / 2).collect();
    let mut d = DegreeMatrix::zeros(offsets.len(), cols.len());
    for (j, &c) in cols.iter().enumerate() {
        let at_base = loop_windings(map, &base, c, &offsets)?;
        let at_mid = loop_windings(map, &mid, c, &offsets)?;
        for (r, (&a, &b)) in at_base.iter().zip(&at_mid).enumerate() {
            if a != b {
                return Err(ObstructionError::NotWellDefined {
                    row: r,
                    col: j,
                    at_base: a,
                    at_mid: b,
                });
            }
            d.set(r, j, a);
        }
    }
    Ok(d)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum NullHomotopy {
    NullHomotopic,
    Obstructed,
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NullHomotopyCertificate {
    pub verdict: NullHomotopy,
    pub degrees: Option<DegreeMatrix>,
    pub reason: String,
}

pub fn certify_null_homotopic(map: &SampledMap) -> Result<NullHomotopyCertificate, ObstructionError> {
    if !map.target.has_circle_factor() {
        return Ok(NullHomotopyCertificate {
            verdict: NullHomotopy::NullHomotopic,
            degrees: None,
            reason: "target is contractible".into(),
        });
    }
    match degree_matrix(map) {
        Ok(d) if d.is_zero() => Ok(NullHomotopyCertificate {
            verdict: NullHomotopy::NullHomotopic,
            degrees: Some(d),
            reason: "every circle-factor winding is zero".into(),
        }),
        Ok(d) => Ok(NullHomotopyCertificate {
            verdict: NullHomotopy::Obstructed,
            degrees: Some(d),
            reason: "nonzero winding on a circle factor".into(),
        }),
        Err(e @ (ObstructionError::NotWellDefined { .. } | ObstructionError::AmbiguousSelection { .. })) => {
            Ok(NullHomotopyCertificate {
                verdict: NullHomotopy::Inconclusive,
                degrees: None,
                reason: e.to_string(),
            })
        }
        Err(e) => Err(e),
    }
}

/// `det(I − D)`, the Lefschetz number of a self-map of a product of circles
/// whose action on first homology is `D`.
pub fn lefschetz_number(d: &DegreeMatrix) -> Result<i64, ObstructionError> {
    if d.rows != d.cols {
        return Err(ObstructionError::InvalidArgument(format!(
            "Lefschetz number needs a square matrix, got {}×{}",
            d.rows, d.cols
        )));
    }
    let n = d.rows;
    let mut a: Vec<Vec<i128>> = (0..n)
        .map(|r| (0..n).map(|c| i128::from(r == c) - i128::from(d.get(r, c))).collect())
        .collect();
    Ok(bareiss_det(&mut a) as i64)
}

/// Fraction-free Gaussian elimination; exact for integer input.
fn bareiss_det(a: &mut [Vec<i128>]) -> i128 {
    let n = a.len();
    if n == 0 {
        return 1;
    }
    let mut sign = 1;
    let mut prev = 1i128;
    for k in 0..n - 1 {
        if a[k][k] == 0 {
            match (k + 1..n).find(|&r| a[r][k] != 0) {
                Some(r) => {
                    a.swap(k, r);
                    sign = -sign;
                }
                None => return 0,
            }
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

/// Degree matrix of the product best-response map on the whole outcome
/// space, assembled from per-player blocks. Player `i`'s block row has its
/// own columns zero because its best response ignores its own coordinate.
pub fn combined_degree_matrix(game: &Game, blocks: &[DegreeMatrix]) -> Result<DegreeMatrix, ObstructionError> {
    let circles: Vec<usize> = game
        .spaces()
        .iter()
        .map(|s| s.factors().iter().filter(|f| f.is_circle()).count())
        .collect();
    let start: Vec<usize> = circles
        .iter()
        .scan(0, |acc, &c| {
            let s = *acc;
            *acc += c;
            Some(s)
        })
        .collect();
    let total: usize = circles.iter().sum();
    if blocks.len() != game.num_players() {
        return Err(ObstructionError::InvalidArgument("one degree block per player expected".into()));
    }
    let mut d = DegreeMatrix::zeros(total, total);
    for (i, b) in blocks.iter().enumerate() {
        let opponent_cols: Vec<usize> = (0..game.num_players())
            .filter(|&j| j != i)
            .flat_map(|j| start[j]..start[j] + circles[j])
            .collect();
        if b.rows != circles[i] || b.cols != opponent_cols.len() {
            return Err(ObstructionError::InvalidArgument(format!("degree block of player {i} has the wrong shape")));
        }
        for r in 0..b.rows {
            for (c, &col) in opponent_cols.iter().enumerate() {
                d.set(start[i] + r, col, b.get(r, c));
            }
        }
    }
    Ok(d)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ExistenceVerdict {
    /// Every best response is acyclic-valued and null-homotopic.
    GuaranteedExistence,
    /// The product best-response map has nonzero Lefschetz number.
    FixedPointByLefschetz,
    /// Some best response is not null-homotopic and the grid has no equilibrium.
    ObstructionDetected,
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlayerCertificate {
    pub player: String,
    pub single_valued: bool,
    pub max_value_diameter: f64,
    pub acyclic_valued: bool,
    pub null_homotopy: NullHomotopyCertificate,
}

/// Inputs to the existence verdict.
#[derive(Debug, Clone, PartialEq)]
pub struct GameAnalysis {
    pub players: Vec<PlayerCertificate>,
    pub lefschetz: Option<i64>,
    pub equilibrium_found: bool,
}

pub fn existence_verdict(analysis: &GameAnalysis) -> ExistenceVerdict {
    let all = |p: fn(&PlayerCertificate) -> bool| analysis.players.iter().all(p);
    if all(|c| c.acyclic_valued && c.null_homotopy.verdict == NullHomotopy::NullHomotopic) {
        ExistenceVerdict::GuaranteedExistence
    } else if analysis.lefschetz.is_some_and(|l| l != 0) {
        ExistenceVerdict::FixedPointByLefschetz
    } else if !analysis.equilibrium_found
        && analysis
            .players
            .iter()
            .any(|c| c.null_homotopy.verdict == NullHomotopy::Obstructed)
    {
        ExistenceVerdict::ObstructionDetected
    } else {
        ExistenceVerdict::Inconclusive
    }
}

pub const M_MAP_ASSUMPTION: &str = "assumed, not checked: every best-response value has a neighborhood \
in which loops contract (m-map condition)";
pub const HOMOTOPY_ASSUMPTION: &str = "assumed, not checked: for set-valued best responses, the \
contracting homotopy is itself acyclic-valued";
pub const CATALOG_NOTE: &str = "null-homotopy certificates are exact for interval and circle factors only";
pub const LEFSCHETZ_ZERO_NOTE: &str = "Lefschetz number 0 certifies nothing either way";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObstructionReport {
    pub players: Vec<PlayerCertificate>,
    pub combined_degrees: Option<DegreeMatrix>,
    pub lefschetz: Option<i64>,
    pub equilibrium_found: bool,
    pub verdict: ExistenceVerdict,
    pub assumptions: Vec<String>,
    pub notes: Vec<String>,
}

/// Certificates for every player's best-response correspondence at `eps`,
/// combined with a finished grid search into an existence verdict.
pub fn certify_game(game: &Game, eps: f64, search: &EquilibriumReport) -> Result<ObstructionReport, ObstructionError> {
    let tables = (0..game.num_players())
        .map(|i| br_correspondence_table(game, i, eps))
        .collect::<Result<Vec<_>, _>>()?;
    certify_tables(game, &tables, search.verdict == SearchVerdict::Found)
}

pub fn certify_tables(game: &Game, tables: &[CorrespondenceTable], equilibrium_found: bool) -> Result<ObstructionReport, ObstructionError> {
    let mut players = Vec::new();
    let mut set_valued = false;
    for t in tables {
        let max_value_diameter = t
            .entries()
            .iter()
            .map(|e| set_diameter(&t.own_space, &e.points))
            .fold(0.0, f64::max);
        set_valued |= t.entries().iter().any(|e| e.points.len() > 1);
        players.push(PlayerCertificate {
            player: game.players()[t.player].clone(),
            single_valued: max_value_diameter <= 2.0 * t.own_space.spacing(),
            max_value_diameter,
            acyclic_valued: check_acyclic_valued(t),
            null_homotopy: certify_null_homotopic(&SampledMap::from_table(t))?,
        });
    }
    let blocks: Option<Vec<DegreeMatrix>> = players
        .iter()
        .zip(tables)
        .map(|(p, t)| match p.null_homotopy.verdict {
            NullHomotopy::Inconclusive => None,
            _ => Some(p.null_homotopy.degrees.clone().unwrap_or_else(|| {
                // contractible target: no rows
                let cols = t.opponent_spaces.iter().flat_map(|s| s.factors()).filter(|f| f.is_circle()).count();
                DegreeMatrix::zeros(0, cols)
            })),
        })
        .collect();
    let combined_degrees = blocks.map(|b| combined_degree_matrix(game, &b)).transpose()?;
    let lefschetz = combined_degrees.as_ref().map(lefschetz_number).transpose()?;
    let analysis = GameAnalysis {
        players,
        lefschetz,
        equilibrium_found,
    };
    let verdict = existence_verdict(&analysis);
    let mut assumptions = vec![M_MAP_ASSUMPTION.to_string()];
    if set_valued {
        assumptions.push(HOMOTOPY_ASSUMPTION.to_string());
    }
    let mut notes = vec![CATALOG_NOTE.to_string()];
    if lefschetz == Some(0) {
        notes.push(LEFSCHETZ_ZERO_NOTE.to_string());
    }
    Ok(ObstructionReport {
        players: analysis.players,
        combined_degrees,
        lefschetz,
        equilibrium_found,
        verdict,
        assumptions,
        notes,
    })
}

/// Grid search followed by certification.
pub fn analyze_game(game: &Game, eps: f64, tol: f64) -> Result<(EquilibriumReport, ObstructionReport), ObstructionError> {
    let search = find_equilibria(game, eps, tol)?;
    let report = certify_game(game, eps, &search)?;
    Ok((search, report))
}

/// Two copies of `space`; player 1 matches player 2, player 2 matches `f`
/// applied to player 1. Pure equilibria are exactly the pairs `(x, x)` with
/// `x` a fixed point of `f`.
pub fn fixed_point_game(
    space: &DiscreteSpace,
    f: impl Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static,
) -> Result<Game, GameError> {
    Game::new(
        vec!["x1".into(), "x2".into()],
        vec![space.clone(), space.clone()],
        vec![
            Utility::neg_distance(0, 1, 1.0),
            Utility::native("-norm(f(x1) - x2)", move |x: &[&[f64]]| -euclidean(&f(x[0]), x[1])),
        ],
    )
}

/// Evidence that the antipodal map of the circle has no fixed point while
/// the circle is not acyclic.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AntipodalWitness {
    pub resolution: usize,
    pub grid_fixed_points: Vec<usize>,
    /// `‖x − (−x)‖` at every grid point.
    pub residuals: Vec<f64>,
    pub min_residual: f64,
    pub winding: i64,
    pub circle_homology: HomologyResult,
    pub circle_acyclic: bool,
}

pub fn antipodal_witness(n: usize) -> Result<AntipodalWitness, ObstructionError> {
    let circle = make_circle(n).map_err(GameError::from)?;
    let antipode = |k: usize| (k + n / 2) % n;
    let map = SampledMap::from_fn(&circle, &circle, antipode)?;
    let residuals: Vec<f64> = (0..n)
        .map(|k| euclidean(circle.point(k), circle.point(antipode(k))))
        .collect();
    let grid_fixed_points = (0..n).filter(|&k| antipode(k) == k).collect();
    let winding = degree_matrix(&map)?.get(0, 0);
    let circle_homology = homology(&triangulate(&circle).map_err(GameError::from)?)
        .map_err(|e| ObstructionError::InvalidArgument(e.to_string()))?;
    Ok(AntipodalWitness {
        resolution: n,
        min_residual: residuals.iter().copied().fold(f64::INFINITY, f64::min),
        residuals,
        grid_fixed_points,
        winding,
        circle_acyclic: is_acyclic(&circle_homology),
        circle_homology,
    })
}
