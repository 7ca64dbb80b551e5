//! Integer partitions and Young-diagram combinatorics.
//!
//! Partitions index three different things in this crate: irreducible
//! representations of the symmetric group, label patterns of partially
//! distinguishable particles, and cycle types of permutations. This module
//! provides the diagram statistics (hooks, contents, tableau counts, Kostka
//! numbers) and the two partial orders (majorization and refinement) the
//! rest of the crate builds on, plus ordered set partitions and randomized
//! box transfers used by the monotonicity scans.

use std::collections::BTreeSet;
use std::fmt;

use rand::Rng;
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::tol;

/// A partition of a nonnegative integer: a nonincreasing list of positive
/// parts. The empty partition (of 0) is allowed.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Partition {
    parts: Vec<usize>,
}

/// Position of a cell in a Young diagram; `row` and `col` are 1-based.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct Cell {
    pub row: usize,
    pub col: usize,
}

impl Cell {
    /// Diagonal content `col − row`.
    pub fn content(&self) -> i64 {
        self.col as i64 - self.row as i64
    }
}

impl Partition {
    /// Builds a partition from a nonincreasing list of parts. Trailing
    /// zeros are stripped; any other zero or an increase is rejected.
    pub fn new(mut parts: Vec<usize>) -> Result<Self> {
        while parts.last() == Some(&0) {
            parts.pop();
        }
        if parts.iter().any(|&p| p == 0) {
            return Err(Error::InvalidPartition(
                "zero part before the end of the list".into(),
            ));
        }
        if parts.windows(2).any(|w| w[0] < w[1]) {
            return Err(Error::InvalidPartition(format!(
                "parts must be nonincreasing, got {parts:?}"
            )));
        }
        Ok(Partition { parts })
    }

    /// Builds a partition from parts in any order, dropping zeros.
    pub fn from_unsorted(parts: impl IntoIterator<Item = usize>) -> Self {
        let mut parts: Vec<usize> = parts.into_iter().filter(|&p| p > 0).collect();
        parts.sort_unstable_by(|a, b| b.cmp(a));
        Partition { parts }
    }

    /// The empty partition of 0.
    pub fn empty() -> Self {
        Partition { parts: Vec::new() }
    }

    /// Single-row partition `(n)`; the empty partition when `n = 0`.
    pub fn single_row(n: usize) -> Self {
        if n == 0 {
            Self::empty()
        } else {
            Partition { parts: vec![n] }
        }
    }

    /// Single-column partition `(1, …, 1)` with `n` parts.
    pub fn single_column(n: usize) -> Self {
        Partition { parts: vec![1; n] }
    }

    pub fn parts(&self) -> &[usize] {
        &self.parts
    }

    /// Total being partitioned.
    pub fn n(&self) -> usize {
        self.parts.iter().sum()
    }

    /// Number of parts.
    pub fn len(&self) -> usize {
        self.parts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parts.is_empty()
    }

    /// Part at 0-based `row`, or 0 past the end.
    pub fn part(&self, row: usize) -> usize {
        self.parts.get(row).copied().unwrap_or(0)
    }

    /// Conjugate (transposed) diagram.
    pub fn conjugate(&self) -> Partition {
        let cols = self.part(0);
        let parts = (1..=cols)
            .map(|c| self.parts.iter().take_while(|&&p| p >= c).count())
            .collect();
        Partition { parts }
    }

    /// Iterates the cells of the diagram in row-major order.
    pub fn cells(&self) -> impl Iterator<Item = Cell> + '_ {
        self.parts.iter().enumerate().flat_map(|(r, &len)| {
            (1..=len).map(move |c| Cell {
                row: r + 1,
                col: c,
            })
        })
    }

    /// Hook length of `cell`: arm + leg + 1.
    pub fn hook_length(&self, cell: Cell) -> usize {
        let arm = self.part(cell.row - 1) - cell.col;
        let leg = self
            .parts
            .iter()
            .skip(cell.row)
            .take_while(|&&p| p >= cell.col)
            .count();
        arm + leg + 1
    }

    /// Product of the factorials of the parts.
    pub fn factorial(&self) -> u128 {
        self.parts.iter().map(|&p| factorial(p)).product()
    }

    /// Exact integer majorization test against another partition of the
    /// same total.
    pub fn majorizes(&self, other: &Partition) -> Result<bool> {
        if self.n() != other.n() {
            return Err(Error::TotalsMismatch(format!(
                "cannot compare partitions of {} and {}",
                self.n(),
                other.n()
            )));
        }
        let rows = self.len().max(other.len());
        let (mut pa, mut pb) = (0usize, 0usize);
        for r in 0..rows {
            pa += self.part(r);
            pb += other.part(r);
            if pa < pb {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Compact comma-separated rendering, e.g. `3,1,1`; empty string for
    /// the empty partition.
    pub fn to_compact_string(&self) -> String {
        self.parts
            .iter()
            .map(|p| p.to_string())
            .collect::<Vec<_>>()
            .join(",")
    }

    /// Parses the compact form produced by [`Self::to_compact_string`].
    pub fn parse_compact(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.is_empty() {
            return Ok(Self::empty());
        }
        let parts: Vec<usize> = s
            .split(',')
            .map(|tok| {
                tok.trim()
                    .parse::<usize>()
                    .map_err(|_| Error::InvalidPartition(format!("bad part {tok:?} in {s:?}")))
            })
            .collect::<Result<_>>()?;
        Self::new(parts)
    }
}

impl std::str::FromStr for Partition {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::parse_compact(s)
    }
}

impl fmt::Display for Partition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, p) in self.parts.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{p}")?;
        }
        write!(f, ")")
    }
}

/// Canonical order: descending lexicographic on the part lists, so `(n)`
/// comes first and `(1,…,1)` last among partitions of the same total.
impl Ord for Partition {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        other.parts.cmp(&self.parts)
    }
}

impl PartialOrd for Partition {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Serialize for Partition {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.parts.serialize(s)
    }
}

impl<'de> Deserialize<'de> for Partition {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let parts = Vec::<usize>::deserialize(d)?;
        Partition::new(parts).map_err(D::Error::custom)
    }
}

/// Exact factorial in u128; `n ≤ 33` keeps the product in range.
pub fn factorial(n: usize) -> u128 {
    assert!(n <= 33, "factorial({n}) exceeds u128");
    (1..=n as u128).product()
}

/// All partitions of `n` with at most `max_len` parts, in the canonical
/// descending-lexicographic order, each exactly once.
pub fn enumerate_partitions(n: usize, max_len: usize) -> Vec<Partition> {
    if n == 0 {
        return vec![Partition::empty()];
    }
    let mut out = Vec::new();
    let mut prefix = Vec::new();
    descend(n, n, max_len, &mut prefix, &mut out);
    out
}

fn descend(
    remaining: usize,
    max_part: usize,
    slots: usize,
    prefix: &mut Vec<usize>,
    out: &mut Vec<Partition>,
) {
    if remaining == 0 {
        out.push(Partition {
            parts: prefix.clone(),
        });
        return;
    }
    if slots == 0 {
        return;
    }
    // Smallest admissible head: the remaining slots must absorb the rest.
    let lo = remaining.div_ceil(slots);
    let hi = max_part.min(remaining);
    for p in (lo..=hi).rev() {
        prefix.push(p);
        descend(remaining - p, p, slots - 1, prefix, out);
        prefix.pop();
    }
}

/// All partitions of `n`.
pub fn partitions_of(n: usize) -> Vec<Partition> {
    enumerate_partitions(n, n.max(1))
}

/// Number of standard tableaux of shape `shape`, by the hook length
/// formula. Exact for totals up to 20.
pub fn dim_standard(shape: &Partition) -> u64 {
    let n = shape.n();
    let hooks: u128 = shape.cells().map(|c| shape.hook_length(c) as u128).product();
    let n_fact = factorial(n);
    let dim = n_fact / hooks;
    assert_eq!(dim * hooks, n_fact, "hook product must divide {n}!");
    u64::try_from(dim).expect("standard tableau count exceeds u64")
}

/// Rising factorial of `shape` at `d`: the product of `d + content` over
/// all cells. Zero exactly when the diagram has more than `d` rows.
pub fn rising_factorial(d: usize, shape: &Partition) -> u128 {
    let mut acc: u128 = 1;
    for cell in shape.cells() {
        let term = d as i64 + cell.content();
        if term <= 0 {
            // A nonpositive term can only be the zero at content −d, which
            // occurs exactly when the column below it is deeper than d.
            return 0;
        }
        acc = acc
            .checked_mul(term as u128)
            .expect("rising factorial exceeds u128");
    }
    acc
}

/// Number of semistandard tableaux of shape `shape` and weight `weight`
/// (the Kostka number). Both arguments must partition the same total.
pub fn kostka(shape: &Partition, weight: &Partition) -> Result<u64> {
    if shape.n() != weight.n() {
        return Err(Error::SizeMismatch(format!(
            "shape partitions {} but weight partitions {}",
            shape.n(),
            weight.n()
        )));
    }
    Ok(ssyt_count_with_weight(shape, weight.parts()))
}

/// Number of semistandard tableaux of shape `shape` whose entry counts are
/// given by the composition `weight` (entry `v+1` appears `weight[v]`
/// times). Counted by stacking one horizontal strip per entry value.
pub fn ssyt_count_with_weight(shape: &Partition, weight: &[usize]) -> u64 {
    if shape.n() != weight.iter().sum::<usize>() {
        return 0;
    }
    let cur = vec![0usize; shape.len()];
    strips(shape.parts(), weight, 0, &cur)
}

fn strips(shape: &[usize], weight: &[usize], v: usize, cur: &[usize]) -> u64 {
    if v == weight.len() {
        // Totals match by construction, so the diagram is full.
        return 1;
    }
    horizontal_strip_growths(shape, cur, weight[v])
        .iter()
        .map(|g| strips(shape, weight, v + 1, g))
        .sum()
}

/// Every way to grow the row profile `cur` by a horizontal strip of
/// exactly `boxes` boxes while staying inside `shape`.
pub(crate) fn horizontal_strip_growths(
    shape: &[usize],
    cur: &[usize],
    boxes: usize,
) -> Vec<Vec<usize>> {
    let mut grown = Vec::new();
    let mut next = cur.to_vec();
    place_strip(shape, cur, &mut next, 0, boxes, &mut grown);
    grown
}

/// Collects every way to grow `cur` by a horizontal strip of `todo` boxes
/// inside `shape`.
fn place_strip(
    shape: &[usize],
    cur: &[usize],
    next: &mut Vec<usize>,
    row: usize,
    todo: usize,
    grown: &mut Vec<Vec<usize>>,
) {
    if row == shape.len() {
        if todo == 0 {
            grown.push(next.clone());
        }
        return;
    }
    // Adding to this row is capped by the shape, by the strip condition
    // (no two new boxes in one column: stay at or left of the previous
    // row's old length), and by the boxes still to place.
    let ceiling = if row == 0 {
        shape[0]
    } else {
        cur[row - 1].min(shape[row])
    };
    let max_add = ceiling.saturating_sub(cur[row]).min(todo);
    for add in 0..=max_add {
        next[row] = cur[row] + add;
        place_strip(shape, cur, next, row + 1, todo - add, grown);
    }
    next[row] = cur[row];
}

/// Number of semistandard tableaux of shape `shape` with entries at most
/// `d`, by the content formula; cross-checked in tests against direct
/// enumeration.
pub fn count_ssyt(shape: &Partition, d: usize) -> u128 {
    let n = shape.n();
    let rising = rising_factorial(d, shape);
    if rising == 0 {
        return 0;
    }
    let num = dim_standard(shape) as u128 * rising;
    let n_fact = factorial(n);
    let count = num / n_fact;
    assert_eq!(count * n_fact, num, "tableau count must be an integer");
    count
}

/// Majorization test on real vectors: after padding with zeros to a common
/// length and sorting in descending order, every prefix sum of `a` must
/// dominate the corresponding prefix sum of `b`. The totals must agree
/// within 1e-12.
pub fn majorizes(a: &[f64], b: &[f64]) -> Result<bool> {
    let len = a.len().max(b.len());
    let sorted = |v: &[f64]| {
        let mut s = v.to_vec();
        s.resize(len, 0.0);
        s.sort_unstable_by(|x, y| y.total_cmp(x));
        s
    };
    let (sa, sb) = (sorted(a), sorted(b));
    let (ta, tb): (f64, f64) = (sa.iter().sum(), sb.iter().sum());
    if (ta - tb).abs() > tol::MAJORIZATION {
        return Err(Error::TotalsMismatch(format!(
            "vector totals {ta} and {tb} differ beyond {}",
            tol::MAJORIZATION
        )));
    }
    let (mut pa, mut pb) = (0.0, 0.0);
    for i in 0..len {
        pa += sa[i];
        pb += sb[i];
        if pa < pb - tol::MAJORIZATION {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Whether `fine` refines `coarse`: the parts of `fine` can be split into
/// groups partitioning each part of `coarse`. Decided by exact
/// backtracking over assignments of parts to rows.
pub fn refines(coarse: &Partition, fine: &Partition) -> Result<bool> {
    if coarse.n() != fine.n() {
        return Err(Error::SizeMismatch(format!(
            "cannot compare partitions of {} and {}",
            coarse.n(),
            fine.n()
        )));
    }
    let mut remaining: Vec<usize> = coarse.parts().to_vec();
    Ok(assign(fine.parts(), 0, &mut remaining))
}

fn assign(parts: &[usize], idx: usize, remaining: &mut Vec<usize>) -> bool {
    if idx == parts.len() {
        return remaining.iter().all(|&r| r == 0);
    }
    let mut tried = BTreeSet::new();
    for bin in 0..remaining.len() {
        // Bins with equal residual capacity are interchangeable.
        if remaining[bin] >= parts[idx] && tried.insert(remaining[bin]) {
            remaining[bin] -= parts[idx];
            if assign(parts, idx + 1, remaining) {
                remaining[bin] += parts[idx];
                return true;
            }
            remaining[bin] += parts[idx];
        }
    }
    false
}

/// All ordered partitions of `items` into blocks of sizes `sizes.parts()`.
/// Blocks are ordered (slot r has size `sizes.parts()[r]`), elements inside
/// a block are sorted. There are `n!/sizes.factorial()` of them.
pub fn ordered_set_partitions(items: &[usize], sizes: &Partition) -> Result<Vec<Vec<Vec<usize>>>> {
    let set: BTreeSet<usize> = items.iter().copied().collect();
    if set.len() != items.len() {
        return Err(Error::InvalidOccupation(
            "ordered set partition items must be distinct".into(),
        ));
    }
    if items.len() != sizes.n() {
        return Err(Error::SizeMismatch(format!(
            "{} items cannot fill blocks of total size {}",
            items.len(),
            sizes.n()
        )));
    }
    let pool: Vec<usize> = set.into_iter().collect();
    let mut out = Vec::new();
    let mut blocks: Vec<Vec<usize>> = Vec::new();
    split_blocks(&pool, sizes.parts(), &mut blocks, &mut out);
    Ok(out)
}

fn split_blocks(
    pool: &[usize],
    sizes: &[usize],
    blocks: &mut Vec<Vec<usize>>,
    out: &mut Vec<Vec<Vec<usize>>>,
) {
    let Some(&size) = sizes.first() else {
        out.push(blocks.clone());
        return;
    };
    for combo in combinations(pool, size) {
        let rest: Vec<usize> = pool.iter().copied().filter(|x| !combo.contains(x)).collect();
        blocks.push(combo);
        split_blocks(&rest, &sizes[1..], blocks, out);
        blocks.pop();
    }
}

fn combinations(pool: &[usize], k: usize) -> Vec<Vec<usize>> {
    use itertools::Itertools;
    pool.iter().copied().combinations(k).collect()
}

/// Applies one random "robin hood" move to `p`: a box is taken from a
/// longer row and appended to a row at least two boxes shorter (possibly a
/// new row). The result is strictly majorized by `p`. Returns `None` when
/// no such move exists (only for `p = (1,…,1)` or `p = (1)`).
pub fn robin_hood_transfer<R: Rng + ?Sized>(rng: &mut R, p: &Partition) -> Option<Partition> {
    let parts = p.parts();
    let mut moves: Vec<(usize, Option<usize>)> = Vec::new();
    for s in 0..parts.len() {
        for t in 0..parts.len() {
            if parts[s] >= parts[t] + 2 {
                moves.push((s, Some(t)));
            }
        }
        if parts[s] >= 2 {
            moves.push((s, None));
        }
    }
    if moves.is_empty() {
        return None;
    }
    let (s, t) = moves[rng.random_range(0..moves.len())];
    let mut next = parts.to_vec();
    next[s] -= 1;
    match t {
        Some(t) => next[t] += 1,
        None => next.push(1),
    }
    Some(Partition::from_unsorted(next))
}

/// Draws `count` pairs `(coarse, fine)` of distinct partitions of `n` with
/// `coarse` strictly majorizing `fine`, produced by one to three random
/// robin-hood moves from a random starting partition.
pub fn robin_hood_pairs<R: Rng + ?Sized>(
    rng: &mut R,
    n: usize,
    count: usize,
) -> Result<Vec<(Partition, Partition)>> {
    if n < 2 {
        return Err(Error::OutOfRange(format!(
            "robin-hood pairs need n >= 2, got {n}"
        )));
    }
    let all = partitions_of(n);
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let start = all[rng.random_range(0..all.len())].clone();
        let Some(mut cur) = robin_hood_transfer(rng, &start) else {
            continue;
        };
        for _ in 0..rng.random_range(0..3u32) {
            match robin_hood_transfer(rng, &cur) {
                Some(next) => cur = next,
                None => break,
            }
        }
        out.push((start, cur));
    }
    Ok(out)
}
