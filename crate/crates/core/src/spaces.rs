//! Discretized compact connected strategy spaces.
//!
//! The catalog holds intervals, circles and finite products of them. A
//! product is stored as a flat list of elementary factors, so products of
//! products flatten and `(A×B)×C` and `A×(B×C)` are literally the same
//! space. Grid points are indexed in mixed radix with the last factor
//! varying fastest.

use std::collections::HashMap;
use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpaceError {
    #[error("invalid resolution {resolution} for {kind}: need at least {min}")]
    InvalidResolution {
        kind: &'static str,
        resolution: usize,
        min: usize,
    },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("grid point {index} out of range (space has {count} points)")]
    InvalidPoint { index: usize, count: usize },
    #[error("unsupported space: {0}")]
    UnsupportedSpace(String),
}

/// One elementary factor of a catalog space.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", content = "resolution", rename_all = "lowercase")]
pub enum Factor {
    /// `n` evenly spaced points of `[0, 1]`.
    Interval(usize),
    /// `n` points of the unit circle, point `k` at angle `2πk/n`.
    Circle(usize),
}

impl Factor {
    pub fn resolution(self) -> usize {
        match self {
            Factor::Interval(n) | Factor::Circle(n) => n,
        }
    }

    pub fn ambient_dim(self) -> usize {
        match self {
            Factor::Interval(_) => 1,
            Factor::Circle(_) => 2,
        }
    }

    pub fn is_circle(self) -> bool {
        matches!(self, Factor::Circle(_))
    }

    fn write_coords(self, k: usize, out: &mut Vec<f64>) {
        match self {
            Factor::Interval(n) => out.push(k as f64 / (n - 1) as f64),
            Factor::Circle(n) => {
                let (s, c) = circle_angle(k, n).sin_cos();
                out.push(c);
                out.push(s);
            }
        }
    }

    /// Whether a staircase step of +1 is allowed from coordinate `k`.
    fn can_step(self, k: usize) -> bool {
        match self {
            Factor::Interval(n) => k + 1 < n,
            Factor::Circle(_) => true,
        }
    }

    fn step(self, k: usize) -> usize {
        match self {
            Factor::Interval(_) => k + 1,
            Factor::Circle(n) => (k + 1) % n,
        }
    }

    fn neighbors(self, k: usize) -> Vec<usize> {
        match self {
            Factor::Interval(n) => {
                let mut v = Vec::with_capacity(2);
                if k > 0 {
                    v.push(k - 1);
                }
                if k + 1 < n {
                    v.push(k + 1);
                }
                v
            }
            Factor::Circle(n) => {
                let prev = (k + n - 1) % n;
                let next = (k + 1) % n;
                if prev == next {
                    vec![prev]
                } else {
                    vec![prev, next]
                }
            }
        }
    }

    fn refined(self, factor: usize) -> Factor {
        match self {
            Factor::Interval(n) => Factor::Interval((n - 1) * factor + 1),
            Factor::Circle(n) => Factor::Circle(n * factor),
        }
    }
}

/// Angle of circle grid point `k` out of `n`, reduced to `[0, 2π)`.
pub fn circle_angle(k: usize, n: usize) -> f64 {
    TAU * (k % n) as f64 / n as f64
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SpaceKind {
    Interval,
    Circle,
    Product,
}

/// A discretized compact connected strategy space.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteSpace {
    factors: Vec<Factor>,
    strides: Vec<usize>,
    len: usize,
    ambient_dim: usize,
    coords: Vec<f64>,
}

impl DiscreteSpace {
    fn from_factors(factors: Vec<Factor>) -> DiscreteSpace {
        let mut strides = vec![1; factors.len()];
        for i in (0..factors.len().saturating_sub(1)).rev() {
            strides[i] = strides[i + 1] * factors[i + 1].resolution();
        }
        let len = factors.iter().map(|f| f.resolution()).product();
        let ambient_dim = factors.iter().map(|f| f.ambient_dim()).sum();
        let mut space = DiscreteSpace {
            factors,
            strides,
            len,
            ambient_dim,
            coords: Vec::new(),
        };
        let mut coords = Vec::with_capacity(len * ambient_dim);
        let mut multi = vec![0; space.factors.len()];
        for idx in 0..len {
            space.unflatten_into(idx, &mut multi);
            for (f, &k) in space.factors.iter().zip(&multi) {
                f.write_coords(k, &mut coords);
            }
        }
        space.coords = coords;
        space
    }

    pub fn kind(&self) -> SpaceKind {
        match self.factors.as_slice() {
            [Factor::Interval(_)] => SpaceKind::Interval,
            [Factor::Circle(_)] => SpaceKind::Circle,
            _ => SpaceKind::Product,
        }
    }

    pub fn factors(&self) -> &[Factor] {
        &self.factors
    }

    /// Per-factor resolutions.
    pub fn resolution(&self) -> Vec<usize> {
        self.factors.iter().map(|f| f.resolution()).collect()
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn has_circle_factor(&self) -> bool {
        self.factors.iter().any(|f| f.is_circle())
    }

    pub fn coords(&self, index: usize) -> Result<&[f64], SpaceError> {
        self.check(index)?;
        Ok(self.point(index))
    }

    /// Embedding coordinates of a point known to be in range.
    pub(crate) fn point(&self, index: usize) -> &[f64] {
        &self.coords[index * self.ambient_dim..(index + 1) * self.ambient_dim]
    }

    /// Iterator over embedding coordinates of all grid points in index order.
    pub fn points(&self) -> impl Iterator<Item = &[f64]> {
        self.coords.chunks_exact(self.ambient_dim)
    }

    fn check(&self, index: usize) -> Result<(), SpaceError> {
        if index < self.len {
            Ok(())
        } else {
            Err(SpaceError::InvalidPoint {
                index,
                count: self.len,
            })
        }
    }

    pub fn flatten(&self, multi: &[usize]) -> usize {
        multi.iter().zip(&self.strides).map(|(k, s)| k * s).sum()
    }

    pub fn unflatten(&self, index: usize) -> Vec<usize> {
        let mut multi = vec![0; self.factors.len()];
        self.unflatten_into(index, &mut multi);
        multi
    }

    pub(crate) fn unflatten_into(&self, index: usize, multi: &mut [usize]) {
        for ((m, f), s) in multi.iter_mut().zip(&self.factors).zip(&self.strides) {
            *m = (index / s) % f.resolution();
        }
    }

    /// Grid-scale neighbors: points differing by one step in exactly one factor.
    pub fn neighbors(&self, index: usize) -> Result<Vec<usize>, SpaceError> {
        self.check(index)?;
        let multi = self.unflatten(index);
        let mut out = Vec::new();
        for (i, f) in self.factors.iter().enumerate() {
            for k in f.neighbors(multi[i]) {
                let delta = k as isize - multi[i] as isize;
                out.push((index as isize + delta * self.strides[i] as isize) as usize);
            }
        }
        out.sort_unstable();
        out.dedup();
        Ok(out)
    }

    /// Whether the grid adjacency graph is connected.
    pub fn is_connected(&self) -> bool {
        let mut seen = vec![false; self.len];
        let mut stack = vec![0];
        seen[0] = true;
        let mut count = 1;
        while let Some(v) = stack.pop() {
            for w in self.neighbors(v).expect("in range") {
                if !seen[w] {
                    seen[w] = true;
                    count += 1;
                    stack.push(w);
                }
            }
        }
        count == self.len
    }

    /// Largest embedding distance between grid neighbors.
    pub fn spacing(&self) -> f64 {
        self.factors
            .iter()
            .map(|f| match *f {
                Factor::Interval(n) => 1.0 / (n - 1) as f64,
                Factor::Circle(n) => 2.0 * (std::f64::consts::PI / n as f64).sin(),
            })
            .fold(0.0, f64::max)
    }

    /// The same space with every factor refined by `factor`; old grid point
    /// multi-index `k` lands on `k·factor`.
    pub fn refined(&self, factor: usize) -> DiscreteSpace {
        DiscreteSpace::from_factors(self.factors.iter().map(|f| f.refined(factor)).collect())
    }

    /// Map a grid index of `self` to the matching index of `self.refined(factor)`.
    pub fn refine_index(&self, index: usize, factor: usize) -> usize {
        let fine = self.refined(factor);
        let multi: Vec<usize> = self.unflatten(index).iter().map(|k| k * factor).collect();
        fine.flatten(&multi)
    }

    /// The same factor structure with every resolution replaced by `n`.
    pub fn with_resolution(&self, n: usize) -> Result<DiscreteSpace, SpaceError> {
        let factors = self
            .factors
            .iter()
            .map(|f| match f {
                Factor::Interval(_) => make_interval(n),
                Factor::Circle(_) => make_circle(n),
            })
            .collect::<Result<Vec<_>, _>>()?;
        product(&factors)
    }

    pub fn spec(&self) -> SpaceSpec {
        match self.factors.as_slice() {
            [f] => SpaceSpec::elementary(*f),
            fs => SpaceSpec {
                kind: SpaceKind::Product,
                resolution: None,
                factors: fs.iter().map(|f| SpaceSpec::elementary(*f)).collect(),
            },
        }
    }
}

pub fn make_interval(n: usize) -> Result<DiscreteSpace, SpaceError> {
    if n < 2 {
        return Err(SpaceError::InvalidResolution {
            kind: "interval",
            resolution: n,
            min: 2,
        });
    }
    Ok(DiscreteSpace::from_factors(vec![Factor::Interval(n)]))
}

pub fn make_circle(n: usize) -> Result<DiscreteSpace, SpaceError> {
    if n < 3 {
        return Err(SpaceError::InvalidResolution {
            kind: "circle",
            resolution: n,
            min: 3,
        });
    }
    Ok(DiscreteSpace::from_factors(vec![Factor::Circle(n)]))
}

/// Cartesian product of catalog spaces with concatenated embeddings.
pub fn product(factors: &[DiscreteSpace]) -> Result<DiscreteSpace, SpaceError> {
    if factors.is_empty() {
        return Err(SpaceError::InvalidArgument(
            "product of an empty factor list".into(),
        ));
    }
    Ok(DiscreteSpace::from_factors(
        factors.iter().flat_map(|s| s.factors.iter().copied()).collect(),
    ))
}

/// Euclidean distance between the embeddings of two grid points.
pub fn distance(space: &DiscreteSpace, a: usize, b: usize) -> Result<f64, SpaceError> {
    Ok(euclidean(space.coords(a)?, space.coords(b)?))
}

pub(crate) fn euclidean(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// Space description as it appears in game files and on the command line.
///
/// A product's `resolution`, when given, is inherited by factors that omit
/// their own.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpaceSpec {
    pub kind: SpaceKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub resolution: Option<usize>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub factors: Vec<SpaceSpec>,
}

impl SpaceSpec {
    fn elementary(f: Factor) -> SpaceSpec {
        SpaceSpec {
            kind: match f {
                Factor::Interval(_) => SpaceKind::Interval,
                Factor::Circle(_) => SpaceKind::Circle,
            },
            resolution: Some(f.resolution()),
            factors: Vec::new(),
        }
    }

    pub fn build(&self) -> Result<DiscreteSpace, SpaceError> {
        self.build_inherit(None)
    }

    fn build_inherit(&self, inherited: Option<usize>) -> Result<DiscreteSpace, SpaceError> {
        let res = self.resolution.or(inherited);
        let need = |kind: &str| {
            res.ok_or_else(|| SpaceError::InvalidArgument(format!("{kind} needs a resolution")))
        };
        match self.kind {
            SpaceKind::Interval => make_interval(need("interval")?),
            SpaceKind::Circle => make_circle(need("circle")?),
            SpaceKind::Product => {
                let parts = self
                    .factors
                    .iter()
                    .map(|f| f.build_inherit(res))
                    .collect::<Result<Vec<_>, _>>()?;
                product(&parts)
            }
        }
    }
}

/// An ordered simplicial complex on vertices `0..vertex_count`.
///
/// Each simplex is stored as its strictly increasing vertex tuple; that
/// order is also its orientation. Simplices of each dimension are listed in
/// lexicographic order.
#[derive(Debug, Clone, PartialEq)]
pub struct SimplicialComplex {
    vertex_count: usize,
    // simplices[d] holds the d-simplices flattened with stride d+1
    simplices: Vec<Vec<usize>>,
}

impl SimplicialComplex {
    /// Build from explicit simplices (any order); vertex tuples are sorted.
    pub fn from_simplices(vertex_count: usize, simplices: &[Vec<usize>]) -> SimplicialComplex {
        let mut by_dim: Vec<Vec<Vec<usize>>> = Vec::new();
        for s in simplices {
            let mut s = s.clone();
            s.sort_unstable();
            let d = s.len() - 1;
            if by_dim.len() <= d {
                by_dim.resize(d + 1, Vec::new());
            }
            by_dim[d].push(s);
        }
        let mut flat: Vec<Vec<usize>> = by_dim
            .into_iter()
            .map(|mut v| {
                v.sort();
                v.dedup();
                v.concat()
            })
            .collect();
        if flat.is_empty() {
            flat.push(Vec::new());
        }
        // vertices are implicit; dimension 0 always lists every vertex
        flat[0] = (0..vertex_count).collect();
        SimplicialComplex {
            vertex_count,
            simplices: flat,
        }
    }

    pub fn vertex_count(&self) -> usize {
        self.vertex_count
    }

    pub fn top_dim(&self) -> usize {
        self.simplices
            .iter()
            .rposition(|v| !v.is_empty())
            .unwrap_or(0)
    }

    pub fn count(&self, dim: usize) -> usize {
        self.simplices.get(dim).map_or(0, |v| v.len() / (dim + 1))
    }

    pub fn simplices(&self, dim: usize) -> impl Iterator<Item = &[usize]> {
        self.simplices
            .get(dim)
            .map(|v| v.as_slice())
            .unwrap_or(&[])
            .chunks_exact(dim + 1)
    }

    pub fn euler_characteristic(&self) -> i64 {
        (0..=self.top_dim())
            .map(|d| {
                let c = self.count(d) as i64;
                if d % 2 == 0 {
                    c
                } else {
                    -c
                }
            })
            .sum()
    }

    /// Position of a sorted vertex tuple among the `dim`-simplices, which
    /// are kept in lexicographic order.
    pub(crate) fn index_of(&self, dim: usize, simplex: &[usize]) -> Option<usize> {
        let w = dim + 1;
        let flat = self.simplices.get(dim)?;
        let (mut lo, mut hi) = (0, flat.len() / w);
        while lo < hi {
            let mid = (lo + hi) / 2;
            match flat[mid * w..(mid + 1) * w].cmp(simplex) {
                std::cmp::Ordering::Less => lo = mid + 1,
                std::cmp::Ordering::Greater => hi = mid,
                std::cmp::Ordering::Equal => return Some(mid),
            }
        }
        None
    }

    /// Subcomplex of all simplices whose vertices lie in `vertices`.
    /// Vertices are relabeled `0..vertices.len()` in sorted order.
    pub fn induced(&self, vertices: &[usize]) -> SimplicialComplex {
        let mut keep: Vec<usize> = vertices.to_vec();
        keep.sort_unstable();
        keep.dedup();
        let relabel: HashMap<usize, usize> =
            keep.iter().enumerate().map(|(i, &v)| (v, i)).collect();
        let mut simplices: Vec<Vec<usize>> = vec![Vec::new(); self.simplices.len()];
        simplices[0] = (0..keep.len()).collect();
        for d in 1..self.simplices.len() {
            for s in self.simplices(d) {
                if let Some(mapped) = s
                    .iter()
                    .map(|v| relabel.get(v).copied())
                    .collect::<Option<Vec<_>>>()
                {
                    // relabeling is monotone, order is preserved
                    simplices[d].extend(mapped);
                }
            }
        }
        while simplices.len() > 1 && simplices.last().is_some_and(|v| v.is_empty()) {
            simplices.pop();
        }
        SimplicialComplex {
            vertex_count: keep.len(),
            simplices,
        }
    }
}

/// Triangulate a catalog space: intervals become paths, circles cycles, and
/// products the staircase subdivision of their prism cells. Vertices are the
/// grid indices of `space`.
pub fn triangulate(space: &DiscreteSpace) -> Result<SimplicialComplex, SpaceError> {
    for f in &space.factors {
        let ok = match *f {
            Factor::Interval(n) => n >= 2,
            Factor::Circle(n) => n >= 3,
        };
        if !ok {
            return Err(SpaceError::UnsupportedSpace(format!("{f:?}")));
        }
    }
    let k = space.factors.len();
    let mut simplices: Vec<Vec<usize>> = vec![Vec::new(); k + 1];
    simplices[0] = (0..space.len).collect();
    let mut multi = vec![0; k];
    let mut chain = Vec::with_capacity(k + 1);
    for base in 0..space.len {
        space.unflatten_into(base, &mut multi);
        let movable: Vec<usize> = (0..k)
            .filter(|&i| space.factors[i].can_step(multi[i]))
            .collect();
        chain.clear();
        chain.push(base);
        staircase(space, &multi, &movable, 0, &mut chain, &mut simplices);
    }
    for (d, flat) in simplices.iter_mut().enumerate() {
        let mut chunks: Vec<&[usize]> = flat.chunks_exact(d + 1).collect();
        chunks.sort_unstable();
        *flat = chunks.concat();
    }
    Ok(SimplicialComplex {
        vertex_count: space.len,
        simplices,
    })
}

/// Extend `chain` by every ordered sequence of nonempty disjoint blocks drawn
/// from the unused `movable` factors, emitting each resulting simplex.
fn staircase(
    space: &DiscreteSpace,
    multi: &[usize],
    movable: &[usize],
    used: u64,
    chain: &mut Vec<usize>,
    out: &mut [Vec<usize>],
) {
    let free: Vec<usize> = movable
        .iter()
        .copied()
        .filter(|i| used & (1 << i) == 0)
        .collect();
    // every nonempty subset of the free factors is a candidate next block
    for mask in 1u64..(1 << free.len()) {
        let mut block = 0u64;
        for (j, &i) in free.iter().enumerate() {
            if mask & (1 << j) != 0 {
                block |= 1 << i;
            }
        }
        let now = used | block;
        let mut m = multi.to_vec();
        for i in 0..m.len() {
            if now & (1 << i) != 0 {
                m[i] = space.factors[i].step(multi[i]);
            }
        }
        chain.push(space.flatten(&m));
        let mut sorted = chain.clone();
        sorted.sort_unstable();
        out[chain.len() - 1].extend(sorted);
        staircase(space, multi, movable, now, chain, out);
        chain.pop();
    }
}
