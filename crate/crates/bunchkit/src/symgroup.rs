//! Permutations, cycle types, conjugacy classes, and irreducible
//! characters of the symmetric group.
//!
//! Characters are computed by the Murnaghan–Nakayama border-strip
//! recursion on beta-numbers and memoized process-wide, since the same
//! small tables are consulted from many call sites (immanants, weight
//! extraction, projector assembly).

use std::collections::{BTreeSet, HashMap};
use std::sync::{LazyLock, Mutex};

use crate::error::{Error, Result};
use crate::partitions::{factorial, partitions_of, Partition};
use crate::tol;

/// A permutation of `{0, …, n−1}` in one-line form: `images[x]` is the
/// image of `x`.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Permutation {
    images: Vec<usize>,
}

impl Permutation {
    /// Validates that `images` is a bijection on `{0, …, n−1}`.
    pub fn from_images(images: Vec<usize>) -> Result<Self> {
        let n = images.len();
        let mut seen = vec![false; n];
        for &y in &images {
            if y >= n || seen[y] {
                return Err(Error::InvalidPermutation(format!(
                    "{images:?} is not a bijection on 0..{n}"
                )));
            }
            seen[y] = true;
        }
        Ok(Permutation { images })
    }

    pub fn identity(n: usize) -> Self {
        Permutation {
            images: (0..n).collect(),
        }
    }

    /// Number of letters.
    pub fn n(&self) -> usize {
        self.images.len()
    }

    pub fn apply(&self, x: usize) -> usize {
        self.images[x]
    }

    pub fn images(&self) -> &[usize] {
        &self.images
    }

    pub fn inverse(&self) -> Permutation {
        let mut inv = vec![0; self.images.len()];
        for (x, &y) in self.images.iter().enumerate() {
            inv[y] = x;
        }
        Permutation { images: inv }
    }

    /// Composition `self ∘ other`: apply `other` first, then `self`.
    pub fn compose(&self, other: &Permutation) -> Result<Permutation> {
        if self.n() != other.n() {
            return Err(Error::SizeMismatch(format!(
                "cannot compose permutations of {} and {} letters",
                self.n(),
                other.n()
            )));
        }
        Ok(Permutation {
            images: (0..self.n()).map(|x| self.apply(other.apply(x))).collect(),
        })
    }

    /// Cycle lengths as a partition of `n`.
    pub fn cycle_type(&self) -> Partition {
        let n = self.n();
        let mut seen = vec![false; n];
        let mut lengths = Vec::new();
        for start in 0..n {
            if seen[start] {
                continue;
            }
            let mut len = 0;
            let mut x = start;
            while !seen[x] {
                seen[x] = true;
                x = self.apply(x);
                len += 1;
            }
            lengths.push(len);
        }
        Partition::from_unsorted(lengths)
    }

    /// Signature: +1 for even permutations, −1 for odd.
    pub fn sign(&self) -> i64 {
        let ct = self.cycle_type();
        if (ct.n() - ct.len()) % 2 == 0 {
            1
        } else {
            -1
        }
    }

    /// Permutes the slots of a string: slot `x` of the input lands in slot
    /// `self.apply(x)` of the output. This makes string actions compose
    /// the same way as the permutations themselves.
    pub fn act_on_string<T: Copy>(&self, s: &[T]) -> Vec<T> {
        assert_eq!(s.len(), self.n(), "string length must match letter count");
        let mut out = s.to_vec();
        for (x, &v) in s.iter().enumerate() {
            out[self.apply(x)] = v;
        }
        out
    }
}

/// All `n!` permutations, ordered lexicographically by one-line form.
pub fn all_permutations(n: usize) -> Vec<Permutation> {
    use itertools::Itertools;
    (0..n)
        .permutations(n)
        .map(|images| Permutation { images })
        .collect()
}

/// Order of the centralizer of a permutation with cycle type `ct`:
/// the product over cycle lengths `l` of `l^{m_l} · m_l!` where `m_l`
/// counts cycles of length `l`.
pub fn centralizer_order(ct: &Partition) -> u128 {
    let mut mult: HashMap<usize, u32> = HashMap::new();
    for &l in ct.parts() {
        *mult.entry(l).or_insert(0) += 1;
    }
    mult.iter()
        .map(|(&l, &m)| (l as u128).pow(m) * factorial(m as usize))
        .product()
}

/// Number of permutations with cycle type `ct`.
pub fn class_size(ct: &Partition) -> u128 {
    factorial(ct.n()) / centralizer_order(ct)
}

/// Cycle types of all conjugacy classes of the symmetric group on `n`
/// letters with their sizes, in canonical partition order.
pub fn conjugacy_classes(n: usize) -> Vec<(Partition, u128)> {
    partitions_of(n)
        .into_iter()
        .map(|ct| {
            let size = class_size(&ct);
            (ct, size)
        })
        .collect()
}

/// Full character table of the symmetric group on `n` letters. Rows are
/// irrep labels and columns are cycle types, both in canonical partition
/// order.
#[derive(Clone, Debug)]
pub struct CharacterTable {
    n: usize,
    classes: Vec<(Partition, u128)>,
    irreps: Vec<Partition>,
    values: Vec<Vec<i64>>,
}

impl CharacterTable {
    /// Computes the table; `n` is capped at 10.
    pub fn new(n: usize) -> Result<Self> {
        if n == 0 || n > tol::CHAR_TABLE_CAP {
            return Err(Error::CapExceeded(format!(
                "character tables are supported for 1 <= n <= {}, got {n}",
                tol::CHAR_TABLE_CAP
            )));
        }
        let classes = conjugacy_classes(n);
        let irreps = partitions_of(n);
        let values = irreps
            .iter()
            .map(|lam| {
                classes
                    .iter()
                    .map(|(ct, _)| character(lam, ct))
                    .collect::<Result<Vec<i64>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(CharacterTable {
            n,
            classes,
            irreps,
            values,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Cycle types with class sizes, in column order.
    pub fn classes(&self) -> &[(Partition, u128)] {
        &self.classes
    }

    /// Irrep labels in row order.
    pub fn irreps(&self) -> &[Partition] {
        &self.irreps
    }

    /// Character value by labels; `None` if either label is foreign.
    pub fn value(&self, irrep: &Partition, class: &Partition) -> Option<i64> {
        let r = self.irreps.iter().position(|l| l == irrep)?;
        let c = self.classes.iter().position(|(ct, _)| ct == class)?;
        Some(self.values[r][c])
    }

    /// Row of character values for one irrep, in column order.
    pub fn row(&self, irrep: &Partition) -> Option<&[i64]> {
        let r = self.irreps.iter().position(|l| l == irrep)?;
        Some(&self.values[r])
    }

    /// CSV rendering: a header of cycle types, then one row per irrep
    /// label. Partition labels use their compact comma form, so the
    /// writer quotes them.
    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let mut header = vec!["shape".to_string()];
        header.extend(
            self.classes
                .iter()
                .map(|(ct, _)| ct.to_compact_string()),
        );
        w.write_record(&header)
            .map_err(|e| Error::InternalFault(format!("csv write failed: {e}")))?;
        for (lam, row) in self.irreps.iter().zip(&self.values) {
            let mut rec = vec![lam.to_compact_string()];
            rec.extend(row.iter().map(|v| v.to_string()));
            w.write_record(&rec)
                .map_err(|e| Error::InternalFault(format!("csv write failed: {e}")))?;
        }
        let bytes = w
            .into_inner()
            .map_err(|e| Error::InternalFault(format!("csv flush failed: {e}")))?;
        String::from_utf8(bytes).map_err(|e| Error::InternalFault(format!("csv utf8: {e}")))
    }
}

type CharKey = (Vec<usize>, Vec<usize>);
static CHARACTER_MEMO: LazyLock<Mutex<HashMap<CharKey, i64>>> =
    LazyLock::new(|| Mutex::new(HashMap::new()));

/// Irreducible character of the symmetric group: the value of the
/// representation labeled by `shape` on the class with cycle type
/// `class`. Both must partition the same `n ≤ 10`.
pub fn character(shape: &Partition, class: &Partition) -> Result<i64> {
    let n = shape.n();
    if n != class.n() {
        return Err(Error::SizeMismatch(format!(
            "shape partitions {} but class partitions {}",
            n,
            class.n()
        )));
    }
    if n > tol::CHAR_TABLE_CAP {
        return Err(Error::CapExceeded(format!(
            "character tables are supported up to n = {}, got {n}",
            tol::CHAR_TABLE_CAP
        )));
    }
    Ok(character_inner(shape.parts(), class.parts()))
}

fn character_inner(shape: &[usize], class: &[usize]) -> i64 {
    if class.is_empty() {
        // Equal totals means the shape is empty too.
        return 1;
    }
    let key = (shape.to_vec(), class.to_vec());
    if let Some(&v) = CHARACTER_MEMO.lock().unwrap().get(&key) {
        return v;
    }
    // Peel off the largest cycle as a border strip in every legal way.
    let strip = class[0];
    let rest = &class[1..];
    let k = shape.len();
    let betas: Vec<usize> = shape
        .iter()
        .enumerate()
        .map(|(i, &p)| p + (k - 1 - i))
        .collect();
    let beta_set: BTreeSet<usize> = betas.iter().copied().collect();
    let mut total = 0i64;
    for &b in &betas {
        if b < strip || beta_set.contains(&(b - strip)) {
            continue;
        }
        let target = b - strip;
        let height = betas
            .iter()
            .filter(|&&o| o > target && o < b)
            .count();
        let sign = if height % 2 == 0 { 1 } else { -1 };
        let mut new_betas: Vec<usize> = betas
            .iter()
            .map(|&o| if o == b { target } else { o })
            .collect();
        new_betas.sort_unstable_by(|x, y| y.cmp(x));
        let new_shape: Vec<usize> = new_betas
            .iter()
            .enumerate()
            .map(|(i, &beta)| beta - (k - 1 - i))
            .filter(|&p| p > 0)
            .collect();
        total += sign * character_inner(&new_shape, rest);
    }
    CHARACTER_MEMO.lock().unwrap().insert(key, total);
    total
}
