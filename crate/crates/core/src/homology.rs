//! Integer simplicial homology.
//!
//! `homology` first shrinks the chain complex by eliminating cell pairs with
//! a unit incidence (exact over ℤ), then reads off Betti numbers and torsion
//! from the Smith normal form of what is left.

use std::collections::VecDeque;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::spaces::SimplicialComplex;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum HomologyError {
    #[error("invalid dimension {dim} (complex has top dimension {top})")]
    InvalidDimension { dim: usize, top: usize },
    #[error("invalid complex: face {face:?} of {simplex:?} is missing")]
    InvalidComplex {
        simplex: Vec<usize>,
        face: Vec<usize>,
    },
    #[error("Künneth prediction needs torsion-free inputs; found torsion in dimension {0}")]
    UnsupportedTorsion(usize),
    #[error("torsion coefficient does not fit in 64 bits")]
    Overflow,
}

/// Dense matrix of arbitrary-precision integers, row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IntegerMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<BigInt>,
}

impl IntegerMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        IntegerMatrix {
            rows,
            cols,
            entries: vec![BigInt::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, 1);
        }
        m
    }

    pub fn from_rows(rows: &[Vec<i64>]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |v| v.len());
        assert!(rows.iter().all(|v| v.len() == c), "ragged rows");
        IntegerMatrix {
            rows: r,
            cols: c,
            entries: rows.iter().flatten().map(|&x| BigInt::from(x)).collect(),
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> &BigInt {
        &self.entries[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: impl Into<BigInt>) {
        self.entries[r * self.cols + c] = v.into();
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(|e| e.is_zero())
    }

    pub fn mul(&self, other: &IntegerMatrix) -> IntegerMatrix {
        assert_eq!(self.cols, other.rows, "dimension mismatch");
        let mut out = IntegerMatrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let b = other.get(k, j);
                    if !b.is_zero() {
                        out.entries[i * other.cols + j] += a * b;
                    }
                }
            }
        }
        out
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a != b {
            for c in 0..self.cols {
                self.entries.swap(a * self.cols + c, b * self.cols + c);
            }
        }
    }

    fn swap_cols(&mut self, a: usize, b: usize) {
        if a != b {
            for r in 0..self.rows {
                self.entries.swap(r * self.cols + a, r * self.cols + b);
            }
        }
    }

    /// row[dst] -= q * row[src]
    fn sub_row(&mut self, dst: usize, src: usize, q: &BigInt) {
        for c in 0..self.cols {
            let s = &self.entries[src * self.cols + c];
            if !s.is_zero() {
                let d = q * s;
                self.entries[dst * self.cols + c] -= d;
            }
        }
    }

    /// col[dst] -= q * col[src]
    fn sub_col(&mut self, dst: usize, src: usize, q: &BigInt) {
        for r in 0..self.rows {
            let s = &self.entries[r * self.cols + src];
            if !s.is_zero() {
                let d = q * s;
                self.entries[r * self.cols + dst] -= d;
            }
        }
    }

    fn negate_row(&mut self, r: usize) {
        for c in 0..self.cols {
            let e = &mut self.entries[r * self.cols + c];
            *e = -std::mem::take(e);
        }
    }
}

/// Result of a Smith normal form reduction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SmithForm {
    /// Invariant factors `d₁ | d₂ | … | d_r`, all positive.
    pub factors: Vec<BigInt>,
    pub rank: usize,
}

/// Smith form together with unimodular `U`, `V` such that `U·M·V = D`.
#[derive(Debug, Clone)]
pub struct SmithDecomposition {
    pub form: SmithForm,
    pub left: IntegerMatrix,
    pub right: IntegerMatrix,
    pub diagonal: IntegerMatrix,
}

pub fn smith_normal_form(m: &IntegerMatrix) -> SmithForm {
    let mut d = m.clone();
    reduce(&mut d, None)
}

pub fn smith_decomposition(m: &IntegerMatrix) -> SmithDecomposition {
    let mut d = m.clone();
    let mut left = IntegerMatrix::identity(m.rows);
    let mut right = IntegerMatrix::identity(m.cols);
    let form = reduce(&mut d, Some((&mut left, &mut right)));
    SmithDecomposition {
        form,
        left,
        right,
        diagonal: d,
    }
}

/// In-place diagonalization. The pivot at each stage is the nonzero entry of
/// least absolute value in the trailing block; transforms are tracked when
/// requested.
fn reduce(d: &mut IntegerMatrix, mut tr: Option<(&mut IntegerMatrix, &mut IntegerMatrix)>) -> SmithForm {
    let (rows, cols) = (d.rows, d.cols);
    let mut t = 0;
    while t < rows.min(cols) {
        let Some((pr, pc)) = min_entry(d, t) else {
            break;
        };
        move_pivot(d, &mut tr, t, pr, pc);
        loop {
            let mut dirty = false;
            for r in t + 1..rows {
                if d.get(r, t).is_zero() {
                    continue;
                }
                let q = d.get(r, t).div_floor(d.get(t, t));
                d.sub_row(r, t, &q);
                if let Some((u, _)) = tr.as_mut() {
                    u.sub_row(r, t, &q);
                }
                dirty |= !d.get(r, t).is_zero();
            }
            for c in t + 1..cols {
                if d.get(t, c).is_zero() {
                    continue;
                }
                let q = d.get(t, c).div_floor(d.get(t, t));
                d.sub_col(c, t, &q);
                if let Some((_, v)) = tr.as_mut() {
                    v.sub_col(c, t, &q);
                }
                dirty |= !d.get(t, c).is_zero();
            }
            if dirty {
                // a smaller remainder appeared in row/col t; make it the pivot
                let (pr, pc) = min_in_cross(d, t);
                move_pivot(d, &mut tr, t, pr, pc);
                continue;
            }
            // row and column are clear; enforce divisibility on the block
            let p = d.get(t, t).clone();
            let bad = (t + 1..rows)
                .find(|&r| (t + 1..cols).any(|c| !d.get(r, c).is_multiple_of(&p)));
            match bad {
                Some(r) => {
                    let one = -BigInt::one();
                    d.sub_row(t, r, &one);
                    if let Some((u, _)) = tr.as_mut() {
                        u.sub_row(t, r, &one);
                    }
                }
                None => break,
            }
        }
        if d.get(t, t).is_negative() {
            d.negate_row(t);
            if let Some((u, _)) = tr.as_mut() {
                u.negate_row(t);
            }
        }
        t += 1;
    }
    let factors: Vec<BigInt> = (0..t).map(|i| d.get(i, i).clone()).collect();
    SmithForm { rank: t, factors }
}

fn min_entry(d: &IntegerMatrix, t: usize) -> Option<(usize, usize)> {
    let mut best: Option<(usize, usize, BigInt)> = None;
    for r in t..d.rows {
        for c in t..d.cols {
            let e = d.get(r, c);
            if e.is_zero() {
                continue;
            }
            let a = e.abs();
            if best.as_ref().is_none_or(|(_, _, b)| a < *b) {
                let unit = a.is_one();
                best = Some((r, c, a));
                if unit {
                    let (r, c, _) = best.unwrap();
                    return Some((r, c));
                }
            }
        }
    }
    best.map(|(r, c, _)| (r, c))
}

fn min_in_cross(d: &IntegerMatrix, t: usize) -> (usize, usize) {
    let mut best = (t, t);
    let mut val = d.get(t, t).abs();
    for r in t + 1..d.rows {
        let a = d.get(r, t).abs();
        if !a.is_zero() && a < val {
            val = a;
            best = (r, t);
        }
    }
    for c in t + 1..d.cols {
        let a = d.get(t, c).abs();
        if !a.is_zero() && a < val {
            val = a;
            best = (t, c);
        }
    }
    best
}

fn move_pivot(
    d: &mut IntegerMatrix,
    tr: &mut Option<(&mut IntegerMatrix, &mut IntegerMatrix)>,
    t: usize,
    r: usize,
    c: usize,
) {
    d.swap_rows(t, r);
    d.swap_cols(t, c);
    if let Some((u, v)) = tr.as_mut() {
        u.swap_rows(t, r);
        v.swap_cols(t, c);
    }
}

/// Per-dimension Betti numbers and torsion coefficients.
///
/// Trailing dimensions with trivial homology are trimmed, so a point has
/// `betti == [1]` regardless of how the complex was built.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HomologyResult {
    pub betti: Vec<usize>,
    pub torsion: Vec<Vec<u64>>,
}

impl HomologyResult {
    pub fn new(mut betti: Vec<usize>, mut torsion: Vec<Vec<u64>>) -> Self {
        let len = betti.len().max(torsion.len());
        betti.resize(len, 0);
        torsion.resize(len, Vec::new());
        while betti.len() > 1 && betti.last() == Some(&0) && torsion.last().is_some_and(|t| t.is_empty()) {
            betti.pop();
            torsion.pop();
        }
        HomologyResult { betti, torsion }
    }

    /// Homology of a single point.
    pub fn point() -> Self {
        HomologyResult::new(vec![1], vec![vec![]])
    }

    pub fn has_torsion(&self) -> bool {
        self.torsion.iter().any(|t| !t.is_empty())
    }
}

/// Dense matrix of `∂_dim` with rows indexed by (dim−1)-simplices and
/// columns by dim-simplices, both in the complex's stored order.
pub fn boundary_matrix(complex: &SimplicialComplex, dim: usize) -> Result<IntegerMatrix, HomologyError> {
    let top = complex.top_dim();
    if dim == 0 || dim > top {
        return Err(HomologyError::InvalidDimension { dim, top });
    }
    let mut m = IntegerMatrix::zeros(complex.count(dim - 1), complex.count(dim));
    for (c, simplex) in complex.simplices(dim).enumerate() {
        for (r, sign) in simplex_faces(complex, simplex)? {
            m.set(r, c, sign);
        }
    }
    Ok(m)
}

/// Face indices with orientation signs `(−1)^i` for deleting vertex `i`.
fn simplex_faces(complex: &SimplicialComplex, simplex: &[usize]) -> Result<Vec<(usize, i64)>, HomologyError> {
    let mut out = Vec::with_capacity(simplex.len());
    let mut face = Vec::with_capacity(simplex.len() - 1);
    for skip in 0..simplex.len() {
        face.clear();
        face.extend(
            simplex
                .iter()
                .enumerate()
                .filter(|(j, _)| *j != skip)
                .map(|(_, v)| *v),
        );
        let idx = complex
            .index_of(simplex.len() - 2, &face)
            .ok_or_else(|| HomologyError::InvalidComplex {
                simplex: simplex.to_vec(),
                face: face.clone(),
            })?;
        out.push((idx, if skip % 2 == 0 { 1 } else { -1 }));
    }
    Ok(out)
}

/// Sparse augmented chain complex; cell 0 is the (−1)-cell every vertex
/// bounds, so what survives reduction computes reduced homology.
/// Invariant: `g ∈ coboundary[f]` iff `f` has a nonzero entry in `boundary[g]`.
struct Reducer {
    /// Dimension plus one.
    level: Vec<usize>,
    boundary: Vec<Vec<(usize, i64)>>,
    coboundary: Vec<Vec<usize>>,
    alive: Vec<bool>,
}

fn remove_item(v: &mut Vec<usize>, x: usize) {
    if let Some(i) = v.iter().position(|&y| y == x) {
        v.swap_remove(i);
    }
}

fn coefficient(chain: &[(usize, i64)], f: usize) -> i64 {
    chain.iter().find(|(g, _)| *g == f).map_or(0, |&(_, c)| c)
}

impl Reducer {
    fn build(complex: &SimplicialComplex) -> Result<Reducer, HomologyError> {
        let top = complex.top_dim();
        let mut offset = vec![1usize; top + 2];
        for d in 0..=top {
            offset[d + 1] = offset[d] + complex.count(d);
        }
        let total = offset[top + 1];
        let mut level = vec![0; total];
        let mut boundary = vec![Vec::new(); total];
        for v in 0..complex.count(0) {
            level[offset[0] + v] = 1;
            boundary[offset[0] + v].push((0, 1));
        }
        for d in 1..=top {
            for (i, s) in complex.simplices(d).enumerate() {
                let id = offset[d] + i;
                level[id] = d + 1;
                boundary[id] = simplex_faces(complex, s)?
                    .into_iter()
                    .map(|(f, sign)| (offset[d - 1] + f, sign))
                    .collect();
            }
        }
        let mut coboundary = vec![Vec::new(); total];
        for (id, fs) in boundary.iter().enumerate() {
            for &(f, _) in fs {
                coboundary[f].push(id);
            }
        }
        Ok(Reducer {
            level,
            boundary,
            coboundary,
            alive: vec![true; total],
        })
    }

    /// Removes `a` and its face `b` (incidence `±1`): every other coface
    /// `g` of `b` gets `∂g − ⟨∂g,b⟩·u·∂a`, and `a` drops out of the
    /// boundaries of its own cofaces. Cells whose chains changed are
    /// appended to `touched`.
    fn eliminate(&mut self, a: usize, b: usize, touched: &mut Vec<usize>) -> Result<(), HomologyError> {
        let u = coefficient(&self.boundary[a], b);
        let da = self.boundary[a].clone();
        let others: Vec<usize> = self.coboundary[b].iter().copied().filter(|&g| g != a).collect();
        for g in others {
            let k = coefficient(&self.boundary[g], b);
            let factor = k.checked_mul(u).ok_or(HomologyError::Overflow)?;
            for &(f, c) in &da {
                let delta = factor.checked_mul(c).ok_or(HomologyError::Overflow)?;
                let chain = &mut self.boundary[g];
                match chain.iter().position(|(h, _)| *h == f) {
                    Some(i) => {
                        let v = chain[i].1.checked_sub(delta).ok_or(HomologyError::Overflow)?;
                        if v == 0 {
                            chain.swap_remove(i);
                            remove_item(&mut self.coboundary[f], g);
                        } else {
                            chain[i].1 = v;
                        }
                    }
                    None => {
                        chain.push((f, delta.checked_neg().ok_or(HomologyError::Overflow)?));
                        self.coboundary[f].push(g);
                    }
                }
            }
            touched.push(g);
        }
        for cell in [a, b] {
            for (f, _) in std::mem::take(&mut self.boundary[cell]) {
                remove_item(&mut self.coboundary[f], cell);
                touched.push(f);
            }
            for g in std::mem::take(&mut self.coboundary[cell]) {
                let chain = &mut self.boundary[g];
                if let Some(i) = chain.iter().position(|(h, _)| *h == cell) {
                    chain.swap_remove(i);
                }
                touched.push(g);
            }
            self.alive[cell] = false;
        }
        Ok(())
    }

    /// A pair that can go without fill-in: a cell with a single face, or a
    /// face with a single coface, at unit incidence.
    fn free_pair(&self, c: usize) -> Option<(usize, usize)> {
        if !self.alive[c] {
            return None;
        }
        if let [(f, k)] = self.boundary[c][..] {
            if k.abs() == 1 {
                return Some((c, f));
            }
        }
        if let [g] = self.coboundary[c][..] {
            if coefficient(&self.boundary[g], c).abs() == 1 {
                return Some((g, c));
            }
        }
        None
    }

    fn reduce(&mut self) -> Result<(), HomologyError> {
        let mut touched = Vec::new();
        // coreductions and collapses
        let mut queue: VecDeque<usize> = (0..self.level.len()).collect();
        while let Some(c) = queue.pop_front() {
            if let Some((a, b)) = self.free_pair(c) {
                touched.clear();
                self.eliminate(a, b, &mut touched)?;
                queue.extend(touched.iter().copied());
            }
        }
        // general elimination on what is left, lowest level first
        let top = self.level.iter().copied().max().unwrap_or(0);
        for lvl in 1..=top {
            let mut queue: VecDeque<usize> =
                (0..self.level.len()).filter(|&c| self.alive[c] && self.level[c] == lvl).collect();
            while let Some(a) = queue.pop_front() {
                if !self.alive[a] {
                    continue;
                }
                // the unit face with the fewest cofaces keeps fill-in low
                let pick = self.boundary[a]
                    .iter()
                    .filter(|(_, c)| c.abs() == 1)
                    .min_by_key(|(f, _)| self.coboundary[*f].len())
                    .map(|&(f, _)| f);
                if let Some(b) = pick {
                    touched.clear();
                    self.eliminate(a, b, &mut touched)?;
                    queue.extend(touched.iter().copied().filter(|&g| self.level[g] == lvl));
                }
            }
        }
        Ok(())
    }
}

/// Integer homology of a simplicial complex.
pub fn homology(complex: &SimplicialComplex) -> Result<HomologyResult, HomologyError> {
    let top = complex.top_dim();
    if complex.vertex_count() == 0 {
        return Ok(HomologyResult::new(vec![0], vec![vec![]]));
    }
    let mut red = Reducer::build(complex)?;
    red.reduce()?;

    let mut survivors: Vec<Vec<usize>> = vec![Vec::new(); top + 2];
    for c in 0..red.level.len() {
        if red.alive[c] {
            survivors[red.level[c]].push(c);
        }
    }
    // ranks[l] is the rank of the boundary from level l to level l − 1
    let mut ranks = vec![0usize; top + 3];
    let mut factors: Vec<Vec<BigInt>> = vec![Vec::new(); top + 3];
    for l in 1..=top + 1 {
        let rows = &survivors[l - 1];
        let cols = &survivors[l];
        if rows.is_empty() || cols.is_empty() {
            continue;
        }
        let pos: std::collections::HashMap<usize, usize> = rows.iter().enumerate().map(|(i, &c)| (c, i)).collect();
        let mut m = IntegerMatrix::zeros(rows.len(), cols.len());
        for (j, &c) in cols.iter().enumerate() {
            for &(f, coef) in &red.boundary[c] {
                if let Some(&i) = pos.get(&f) {
                    m.set(i, j, coef);
                }
            }
        }
        let snf = smith_normal_form(&m);
        ranks[l] = snf.rank;
        factors[l] = snf.factors;
    }
    let mut betti = Vec::with_capacity(top + 1);
    let mut torsion = Vec::with_capacity(top + 1);
    for d in 0..=top {
        let l = d + 1;
        let mut b = survivors[l].len() - ranks[l] - ranks[l + 1];
        if d == 0 {
            b += 1;
        }
        betti.push(b);
        torsion.push(torsion_of(&factors[l + 1])?);
    }
    Ok(HomologyResult::new(betti, torsion))
}

fn torsion_of(factors: &[BigInt]) -> Result<Vec<u64>, HomologyError> {
    factors
        .iter()
        .filter(|f| !f.is_one())
        .map(|f| f.to_u64().ok_or(HomologyError::Overflow))
        .collect()
}

/// Homology straight from the Smith forms of the full boundary matrices.
/// Quadratic memory in the simplex count; meant for small complexes and as
/// a cross-check of [`homology`].
pub fn homology_dense(complex: &SimplicialComplex) -> Result<HomologyResult, HomologyError> {
    let top = complex.top_dim();
    let mut ranks = vec![0usize; top + 2];
    let mut factors: Vec<Vec<BigInt>> = vec![Vec::new(); top + 2];
    for d in 1..=top {
        let snf = smith_normal_form(&boundary_matrix(complex, d)?);
        ranks[d] = snf.rank;
        factors[d] = snf.factors;
    }
    let mut betti = Vec::new();
    let mut torsion = Vec::new();
    for d in 0..=top {
        betti.push(complex.count(d) - ranks[d] - ranks[d + 1]);
        torsion.push(torsion_of(&factors[d + 1])?);
    }
    Ok(HomologyResult::new(betti, torsion))
}

/// Homology of a point: one component, nothing else.
pub fn is_acyclic(h: &HomologyResult) -> bool {
    h.betti.first() == Some(&1) && h.betti.iter().skip(1).all(|&b| b == 0) && !h.has_torsion()
}

/// Betti numbers of a product from those of its factors, torsion-free case.
pub fn kunneth_predict(hx: &HomologyResult, hy: &HomologyResult) -> Result<HomologyResult, HomologyError> {
    for h in [hx, hy] {
        if let Some(d) = h.torsion.iter().position(|t| !t.is_empty()) {
            return Err(HomologyError::UnsupportedTorsion(d));
        }
    }
    let mut betti = vec![0usize; hx.betti.len() + hy.betti.len() - 1];
    for (i, a) in hx.betti.iter().enumerate() {
        for (j, b) in hy.betti.iter().enumerate() {
            betti[i + j] += a * b;
        }
    }
    let len = betti.len();
    Ok(HomologyResult::new(betti, vec![Vec::new(); len]))
}
