//! Dense complex matrices and the matrix functions the bunching formulas
//! consume: Haar-random unitaries, random PSD matrices, Gram matrices of
//! interferometer columns, permanents, and normalized immanants.

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::partitions::{partitions_of, Partition};
use crate::symgroup::character;
use crate::tol;

/// Dense row-major complex matrix with finite entries.
#[derive(Clone, PartialEq, Debug)]
pub struct ComplexMatrix {
    inner: DMatrix<C64>,
}

impl ComplexMatrix {
    pub fn from_dmatrix(inner: DMatrix<C64>) -> Result<Self> {
        if inner.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::InvalidMatrix(
                "matrix entries must be finite".into(),
            ));
        }
        Ok(ComplexMatrix { inner })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        ComplexMatrix {
            inner: DMatrix::zeros(rows, cols),
        }
    }

    pub fn identity(n: usize) -> Self {
        ComplexMatrix {
            inner: DMatrix::identity(n, n),
        }
    }

    /// Builds from a row-major nested list.
    pub fn from_rows(rows: Vec<Vec<C64>>) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        if rows.iter().any(|row| row.len() != c) {
            return Err(Error::InvalidMatrix("ragged row lengths".into()));
        }
        let inner = DMatrix::from_fn(r, c, |i, j| rows[i][j]);
        Self::from_dmatrix(inner)
    }

    pub fn rows(&self) -> usize {
        self.inner.nrows()
    }

    pub fn cols(&self) -> usize {
        self.inner.ncols()
    }

    pub fn is_square(&self) -> bool {
        self.rows() == self.cols()
    }

    pub fn get(&self, r: usize, c: usize) -> C64 {
        self.inner[(r, c)]
    }

    pub fn inner(&self) -> &DMatrix<C64> {
        &self.inner
    }

    pub fn into_inner(self) -> DMatrix<C64> {
        self.inner
    }

    pub fn dagger(&self) -> ComplexMatrix {
        ComplexMatrix {
            inner: self.inner.adjoint(),
        }
    }

    pub fn trace(&self) -> C64 {
        self.inner.trace()
    }

    /// Largest entrywise deviation of `self† self` from the identity.
    pub fn unitarity_defect(&self) -> f64 {
        let gram = self.inner.adjoint() * &self.inner;
        let n = gram.nrows();
        let mut defect = 0.0f64;
        for r in 0..n {
            for c in 0..n {
                let target = if r == c { C64::ONE } else { C64::ZERO };
                defect = defect.max((gram[(r, c)] - target).norm());
            }
        }
        defect
    }

    pub fn is_unitary(&self, tolerance: f64) -> bool {
        self.is_square() && self.unitarity_defect() <= tolerance
    }

    /// Largest entrywise deviation from the conjugate transpose.
    pub fn hermiticity_defect(&self) -> f64 {
        let adj = self.inner.adjoint();
        self.inner
            .iter()
            .zip(adj.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0f64, f64::max)
    }

    /// Eigenvalues (descending) and matching column eigenvectors of a
    /// Hermitian matrix. The input is symmetrized first; callers are
    /// responsible for passing a genuinely Hermitian matrix.
    pub fn hermitian_eigen(&self) -> Result<(Vec<f64>, ComplexMatrix)> {
        if !self.is_square() {
            return Err(Error::InvalidMatrix(format!(
                "eigendecomposition needs a square matrix, got {}x{}",
                self.rows(),
                self.cols()
            )));
        }
        let sym = (&self.inner + self.inner.adjoint()).scale(0.5);
        let eig = nalgebra::linalg::SymmetricEigen::new(sym);
        let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
        let values: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
        let vectors = DMatrix::from_fn(self.rows(), self.rows(), |r, c| {
            eig.eigenvectors[(r, order[c])]
        });
        Ok((values, ComplexMatrix { inner: vectors }))
    }

    pub fn max_abs_diff(&self, other: &ComplexMatrix) -> f64 {
        assert_eq!(self.rows(), other.rows());
        assert_eq!(self.cols(), other.cols());
        self.inner
            .iter()
            .zip(other.inner.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0f64, f64::max)
    }
}

#[derive(Serialize, Deserialize)]
struct MatrixJson {
    rows: usize,
    cols: usize,
    re: Vec<Vec<f64>>,
    im: Vec<Vec<f64>>,
}

impl Serialize for ComplexMatrix {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let (r, c) = (self.rows(), self.cols());
        let grid = |f: fn(&C64) -> f64| -> Vec<Vec<f64>> {
            (0..r)
                .map(|i| (0..c).map(|j| f(&self.inner[(i, j)])).collect())
                .collect()
        };
        MatrixJson {
            rows: r,
            cols: c,
            re: grid(|z| z.re),
            im: grid(|z| z.im),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for ComplexMatrix {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let raw = MatrixJson::deserialize(d)?;
        let check = |grid: &Vec<Vec<f64>>, name: &str| -> std::result::Result<(), D::Error> {
            if grid.len() != raw.rows || grid.iter().any(|row| row.len() != raw.cols) {
                return Err(D::Error::custom(format!(
                    "{name} grid does not match declared {}x{}",
                    raw.rows, raw.cols
                )));
            }
            Ok(())
        };
        check(&raw.re, "re")?;
        check(&raw.im, "im")?;
        let inner = DMatrix::from_fn(raw.rows, raw.cols, |r, c| {
            C64::new(raw.re[r][c], raw.im[r][c])
        });
        ComplexMatrix::from_dmatrix(inner).map_err(D::Error::custom)
    }
}

/// A nonempty set of distinct output modes, stored sorted, 0-based,
/// bounded by the mode count `m`.
#[derive(Clone, PartialEq, Eq, Debug, Serialize)]
pub struct ModeSubset {
    indices: Vec<usize>,
    m: usize,
}

impl ModeSubset {
    pub fn new(mut indices: Vec<usize>, m: usize) -> Result<Self> {
        indices.sort_unstable();
        indices.dedup();
        if indices.is_empty() {
            return Err(Error::InvalidModeSubset("empty mode subset".into()));
        }
        if let Some(&bad) = indices.iter().find(|&&i| i >= m) {
            return Err(Error::InvalidModeSubset(format!(
                "mode {bad} out of range for {m} modes (0-based)"
            )));
        }
        Ok(ModeSubset { indices, m })
    }

    pub fn full(m: usize) -> Result<Self> {
        Self::new((0..m).collect(), m)
    }

    /// Parses a 1-based selection such as `1-4,7` or `all`.
    pub fn parse_one_based(spec: &str, m: usize) -> Result<Self> {
        let spec = spec.trim();
        if spec.eq_ignore_ascii_case("all") {
            return Self::full(m);
        }
        let mut indices = Vec::new();
        for tok in spec.split(',') {
            let tok = tok.trim();
            let parse = |s: &str| -> Result<usize> {
                let v: usize = s.parse().map_err(|_| {
                    Error::InvalidModeSubset(format!("bad mode index {s:?} in {spec:?}"))
                })?;
                if v == 0 {
                    return Err(Error::InvalidModeSubset(
                        "mode indices are 1-based; 0 is not a mode".into(),
                    ));
                }
                Ok(v - 1)
            };
            match tok.split_once('-') {
                Some((a, b)) => {
                    let (lo, hi) = (parse(a)?, parse(b)?);
                    if lo > hi {
                        return Err(Error::InvalidModeSubset(format!(
                            "descending range {tok:?}"
                        )));
                    }
                    indices.extend(lo..=hi);
                }
                None => indices.push(parse(tok)?),
            }
        }
        Self::new(indices, m)
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn mode_count(&self) -> usize {
        self.m
    }

    pub fn contains(&self, mode: usize) -> bool {
        self.indices.binary_search(&mode).is_ok()
    }

    pub fn is_full(&self) -> bool {
        self.indices.len() == self.m
    }
}

fn ginibre<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> DMatrix<C64> {
    let entries: Vec<C64> = (0..rows * cols)
        .map(|_| {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            C64::new(re, im) / 2.0f64.sqrt()
        })
        .collect();
    // from_fn keeps the draws row-major so the layout matches the draw order.
    let mut it = entries.into_iter();
    let mut m = DMatrix::zeros(rows, cols);
    for r in 0..rows {
        for c in 0..cols {
            m[(r, c)] = it.next().expect("sized iterator");
        }
    }
    m
}

/// Haar-distributed random unitary: complex Ginibre matrix, QR, then the
/// Q columns rephased by the signs of R's diagonal.
pub fn haar_unitary<R: Rng + ?Sized>(rng: &mut R, m: usize) -> ComplexMatrix {
    assert!(m >= 1, "need at least one mode");
    let z = ginibre(rng, m, m);
    let qr = nalgebra::linalg::QR::new(z);
    let r = qr.r();
    let q = qr.q();
    let phases: Vec<C64> = (0..m)
        .map(|i| {
            let d = r[(i, i)];
            if d.norm() == 0.0 {
                C64::ONE
            } else {
                d / d.norm()
            }
        })
        .collect();
    let mut u = q;
    for c in 0..m {
        for r in 0..m {
            u[(r, c)] *= phases[c];
        }
    }
    ComplexMatrix { inner: u }
}

/// Random PSD matrix `B B†` with `B` an `n × rank` complex Gaussian
/// matrix. The result is exactly Hermitian: the lower triangle is the
/// conjugate mirror of the computed upper triangle.
pub fn random_psd<R: Rng + ?Sized>(rng: &mut R, n: usize, rank: usize) -> Result<ComplexMatrix> {
    if rank == 0 || rank > n {
        return Err(Error::OutOfRange(format!(
            "rank must lie in 1..={n}, got {rank}"
        )));
    }
    let b = ginibre(rng, n, rank);
    let mut a = DMatrix::zeros(n, n);
    for r in 0..n {
        for c in r..n {
            let v: C64 = (0..rank).map(|k| b[(r, k)] * b[(c, k)].conj()).sum();
            if r == c {
                a[(r, c)] = C64::new(v.re, 0.0);
            } else {
                a[(r, c)] = v;
                a[(c, r)] = v.conj();
            }
        }
    }
    Ok(ComplexMatrix { inner: a })
}

/// Gram matrix of the interferometer columns at the input sites,
/// restricted to the output subset: `G_{xy} = Σ_{s∈S} U*_{s,i_x} U_{s,i_y}`.
/// Hermitian PSD with eigenvalues in [0, 1]; the identity when S is all
/// modes.
pub fn gram_matrix(u: &ComplexMatrix, sites: &[usize], subset: &ModeSubset) -> Result<ComplexMatrix> {
    let m = u.rows();
    if !u.is_square() {
        return Err(Error::InvalidMatrix(format!(
            "interferometer must be square, got {}x{}",
            u.rows(),
            u.cols()
        )));
    }
    if !u.is_unitary(tol::UNITARITY) {
        return Err(Error::NotUnitary(format!(
            "unitarity defect {} exceeds {}",
            u.unitarity_defect(),
            tol::UNITARITY
        )));
    }
    if subset.mode_count() != m {
        return Err(Error::InvalidModeSubset(format!(
            "subset is over {} modes but the interferometer has {m}",
            subset.mode_count()
        )));
    }
    validate_sites(sites, m)?;
    let n = sites.len();
    let mut g = DMatrix::zeros(n, n);
    for x in 0..n {
        for y in x..n {
            let v: C64 = subset
                .indices()
                .iter()
                .map(|&s| u.get(s, sites[x]).conj() * u.get(s, sites[y]))
                .sum();
            if x == y {
                g[(x, y)] = C64::new(v.re, 0.0);
            } else {
                g[(x, y)] = v;
                g[(y, x)] = v.conj();
            }
        }
    }
    Ok(ComplexMatrix { inner: g })
}

/// Validates distinct, in-range input sites.
pub fn validate_sites(sites: &[usize], m: usize) -> Result<()> {
    if sites.is_empty() {
        return Err(Error::InvalidModeSubset("no input sites given".into()));
    }
    let mut seen = vec![false; m];
    for &s in sites {
        if s >= m {
            return Err(Error::InvalidModeSubset(format!(
                "input site {s} out of range for {m} modes (0-based)"
            )));
        }
        if seen[s] {
            return Err(Error::InvalidModeSubset(format!(
                "input site {s} listed twice"
            )));
        }
        seen[s] = true;
    }
    Ok(())
}

/// Permanent by Ryser's inclusion-exclusion with Gray-code column
/// updates, `O(2^n n)`. Capped at 20 rows; the 0×0 permanent is 1.
pub fn permanent(a: &ComplexMatrix) -> Result<C64> {
    if !a.is_square() {
        return Err(Error::InvalidMatrix(format!(
            "permanent needs a square matrix, got {}x{}",
            a.rows(),
            a.cols()
        )));
    }
    let n = a.rows();
    if n > tol::PERMANENT_CAP {
        return Err(Error::CapExceeded(format!(
            "permanent supported up to {} rows, got {n}",
            tol::PERMANENT_CAP
        )));
    }
    if n == 0 {
        return Ok(C64::ONE);
    }
    let mut row_sums = vec![C64::ZERO; n];
    let mut inner = C64::ZERO;
    for k in 1u64..(1u64 << n) {
        let col = k.trailing_zeros() as usize;
        let gray = k ^ (k >> 1);
        let added = gray & (1u64 << col) != 0;
        for (r, sum) in row_sums.iter_mut().enumerate() {
            let v = a.get(r, col);
            if added {
                *sum += v;
            } else {
                *sum -= v;
            }
        }
        let prod: C64 = row_sums.iter().copied().product();
        if gray.count_ones() % 2 == 0 {
            inner += prod;
        } else {
            inner -= prod;
        }
    }
    let outer = if n % 2 == 0 { 1.0 } else { -1.0 };
    Ok(inner * outer)
}

fn cycle_lengths(images: &[usize]) -> Vec<usize> {
    let n = images.len();
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
            x = images[x];
            len += 1;
        }
        lengths.push(len);
    }
    lengths.sort_unstable_by(|a, b| b.cmp(a));
    lengths
}

/// Sums `∏_x A_{x,σ(x)}` over all permutations, grouped by cycle type.
/// Returns the per-class product sums in canonical partition order.
///
/// Grouping the *sum* by cycle type is exact regrouping; the product term
/// itself is not a class function, so every permutation is visited.
fn cycle_type_product_sums(a: &ComplexMatrix) -> Result<Vec<(Partition, C64)>> {
    use itertools::Itertools;
    let n = a.rows();
    if !a.is_square() {
        return Err(Error::InvalidMatrix(format!(
            "immanants need a square matrix, got {}x{}",
            a.rows(),
            a.cols()
        )));
    }
    if n > tol::IMMANANT_CAP {
        return Err(Error::CapExceeded(format!(
            "immanants supported up to {} rows, got {n}",
            tol::IMMANANT_CAP
        )));
    }
    let types = partitions_of(n);
    let index: std::collections::HashMap<Vec<usize>, usize> = types
        .iter()
        .enumerate()
        .map(|(i, ct)| (ct.parts().to_vec(), i))
        .collect();
    let mut acc = vec![C64::ZERO; types.len()];
    if n == 0 {
        acc[0] = C64::ONE;
    } else {
        for sigma in (0..n).permutations(n) {
            let prod: C64 = (0..n).map(|x| a.get(x, sigma[x])).product();
            acc[index[&cycle_lengths(&sigma)]] += prod;
        }
    }
    Ok(types.into_iter().zip(acc).collect())
}

/// Normalized immanant of shape `shape`:
/// `(1/χ_shape(e)) Σ_σ χ_shape(σ) ∏_x A_{x,σ(x)}`.
/// Equals the permanent for a single row and the determinant for a single
/// column. Capped at 9 rows (full factorial sweep).
pub fn normalized_immanant(shape: &Partition, a: &ComplexMatrix) -> Result<C64> {
    if shape.n() != a.rows() {
        return Err(Error::SizeMismatch(format!(
            "shape partitions {} but the matrix has {} rows",
            shape.n(),
            a.rows()
        )));
    }
    let sums = cycle_type_product_sums(a)?;
    let mut acc = C64::ZERO;
    for (ct, sum) in &sums {
        acc += C64::from(character(shape, ct)? as f64) * sum;
    }
    let dim = character(shape, &Partition::single_column(shape.n()))? as f64;
    Ok(acc / dim)
}

/// Normalized immanants of every shape of the matching size, sharing one
/// factorial sweep. Returned in canonical partition order.
pub fn normalized_immanants_all(a: &ComplexMatrix) -> Result<Vec<(Partition, C64)>> {
    let n = a.rows();
    let sums = cycle_type_product_sums(a)?;
    partitions_of(n)
        .into_iter()
        .map(|shape| {
            let mut acc = C64::ZERO;
            for (ct, sum) in &sums {
                acc += C64::from(character(&shape, ct)? as f64) * sum;
            }
            let dim = character(&shape, &Partition::single_column(n))? as f64;
            Ok((shape, acc / dim))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seeding::substream;
    use itertools::Itertools;

    fn p(parts: &[usize]) -> Partition {
        Partition::new(parts.to_vec()).unwrap()
    }

    fn random_complex<R: Rng>(rng: &mut R, n: usize) -> ComplexMatrix {
        let inner = DMatrix::from_fn(n, n, |_, _| {
            C64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)
        });
        ComplexMatrix::from_dmatrix(inner).unwrap()
    }

    fn naive_permanent(a: &ComplexMatrix) -> C64 {
        let n = a.rows();
        if n == 0 {
            return C64::ONE;
        }
        (0..n)
            .permutations(n)
            .map(|sigma| (0..n).map(|x| a.get(x, sigma[x])).product::<C64>())
            .sum()
    }

    #[test]
    fn matrix_construction_and_validation() {
        assert!(ComplexMatrix::from_rows(vec![
            vec![C64::ONE, C64::ZERO],
            vec![C64::ZERO]
        ])
        .is_err());
        let nan = C64::new(f64::NAN, 0.0);
        assert!(ComplexMatrix::from_rows(vec![vec![nan]]).is_err());
        let id = ComplexMatrix::identity(3);
        assert_eq!(id.get(0, 0), C64::ONE);
        assert_eq!(id.get(0, 1), C64::ZERO);
        assert!(id.is_unitary(0.0));
    }

    #[test]
    fn matrix_json_schema_and_roundtrip() {
        let m = ComplexMatrix::from_rows(vec![
            vec![C64::new(1.0, -2.0), C64::new(0.25, 0.0)],
            vec![C64::new(0.0, 3.5), C64::new(-1.0, 1.0)],
        ])
        .unwrap();
        let json = serde_json::to_value(&m).unwrap();
        assert_eq!(json["rows"], 2);
        assert_eq!(json["cols"], 2);
        assert_eq!(json["re"][0][1], 0.25);
        assert_eq!(json["im"][1][0], 3.5);
        let back: ComplexMatrix = serde_json::from_value(json).unwrap();
        assert_eq!(back, m);
        let bad = serde_json::json!({
            "rows": 2, "cols": 2,
            "re": [[1.0, 0.0]], "im": [[0.0, 0.0]]
        });
        assert!(serde_json::from_value::<ComplexMatrix>(bad).is_err());
    }

    #[test]
    fn mode_subset_parsing() {
        let s = ModeSubset::parse_one_based("1-4,7", 8).unwrap();
        assert_eq!(s.indices(), &[0, 1, 2, 3, 6]);
        assert!(s.contains(0));
        assert!(!s.contains(4));
        let all = ModeSubset::parse_one_based("all", 5).unwrap();
        assert!(all.is_full());
        assert_eq!(ModeSubset::parse_one_based("2,2,2", 4).unwrap().len(), 1);
        assert!(ModeSubset::parse_one_based("0", 4).is_err());
        assert!(ModeSubset::parse_one_based("5", 4).is_err());
        assert!(ModeSubset::parse_one_based("3-1", 4).is_err());
        assert!(ModeSubset::parse_one_based("", 4).is_err());
        assert!(ModeSubset::new(vec![], 4).is_err());
    }

    #[test]
    fn haar_matrices_are_unitary_and_reproducible() {
        for m in [1usize, 2, 5, 8] {
            let u = haar_unitary(&mut substream(41, m as u64), m);
            assert!(
                u.unitarity_defect() < 1e-12,
                "m={m} defect={}",
                u.unitarity_defect()
            );
            let again = haar_unitary(&mut substream(41, m as u64), m);
            assert_eq!(u, again);
        }
        let single = haar_unitary(&mut substream(41, 99), 1);
        assert!((single.get(0, 0).norm() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn haar_distribution_is_left_invariant_statistically() {
        // |u_00|² averages to 1/m, and pre-rotating by a fixed unitary
        // must not shift that average. Loose 4σ bands; fixed seeds.
        let m = 3;
        let v = haar_unitary(&mut substream(41, 1000), m);
        let (mut plain, mut rotated) = (0.0, 0.0);
        let draws = 400;
        for j in 0..draws {
            let u = haar_unitary(&mut substream(41, 2000 + j), m);
            plain += u.get(0, 0).norm_sqr();
            let vu = ComplexMatrix::from_dmatrix(v.inner() * u.inner()).unwrap();
            rotated += vu.get(0, 0).norm_sqr();
        }
        plain /= draws as f64;
        rotated /= draws as f64;
        assert!((plain - 1.0 / m as f64).abs() < 0.05, "plain={plain}");
        assert!((rotated - 1.0 / m as f64).abs() < 0.05, "rotated={rotated}");
    }

    #[test]
    fn psd_matrices_are_hermitian_with_nonnegative_spectrum() {
        let mut rng = substream(41, 10);
        for n in 1..=6 {
            for rank in 1..=n {
                let a = random_psd(&mut rng, n, rank).unwrap();
                assert_eq!(a.hermiticity_defect(), 0.0);
                let (eigs, _) = a.hermitian_eigen().unwrap();
                for e in &eigs {
                    assert!(*e >= tol::PSD_EIG_FLOOR, "n={n} rank={rank} eig={e}");
                }
                // Rank deficiency shows up as (near) zero eigenvalues.
                let scale = eigs[0].max(1.0);
                for e in eigs.iter().skip(rank) {
                    assert!(e.abs() < 1e-10 * scale);
                }
            }
        }
        let thin = random_psd(&mut rng, 2, 1).unwrap();
        assert!(thin.inner().determinant().norm() < 1e-12);
        assert!(random_psd(&mut rng, 3, 0).is_err());
        assert!(random_psd(&mut rng, 3, 4).is_err());
    }

    #[test]
    fn gram_matrix_examples() {
        let mut rng = substream(41, 20);
        let u = haar_unitary(&mut rng, 4);
        let full = ModeSubset::full(4).unwrap();
        let g = gram_matrix(&u, &[0, 2, 3], &full).unwrap();
        assert!(g.max_abs_diff(&ComplexMatrix::identity(3)) < 1e-12);

        let id = ComplexMatrix::identity(4);
        let covering = ModeSubset::new(vec![0, 1, 2], 4).unwrap();
        let g = gram_matrix(&id, &[0, 1], &covering).unwrap();
        assert!(g.max_abs_diff(&ComplexMatrix::identity(2)) < 1e-15);

        let disjoint = ModeSubset::new(vec![2, 3], 4).unwrap();
        let g = gram_matrix(&id, &[0, 1], &disjoint).unwrap();
        assert!(g.max_abs_diff(&ComplexMatrix::zeros(2, 2)) < 1e-15);

        assert!(gram_matrix(&id, &[0, 0], &full).is_err());
        assert!(gram_matrix(&id, &[0, 9], &full).is_err());
        let skewed = ComplexMatrix::from_rows(vec![
            vec![C64::ONE, C64::ONE],
            vec![C64::ZERO, C64::ONE],
        ])
        .unwrap();
        let full2 = ModeSubset::full(2).unwrap();
        assert!(matches!(
            gram_matrix(&skewed, &[0, 1], &full2),
            Err(Error::NotUnitary(_))
        ));
    }

    #[test]
    fn gram_spectrum_is_a_contraction() {
        let mut rng = substream(41, 21);
        for trial in 0..20 {
            let m = 3 + trial % 4;
            let u = haar_unitary(&mut rng, m);
            let take = 1 + (trial % m);
            let subset = ModeSubset::new((0..take).collect(), m).unwrap();
            let sites: Vec<usize> = (0..2.min(m)).collect();
            let g = gram_matrix(&u, &sites, &subset).unwrap();
            let (eigs, _) = g.hermitian_eigen().unwrap();
            for e in eigs {
                assert!(e >= -1e-10 && e <= 1.0 + 1e-10, "eig={e}");
            }
        }
    }

    #[test]
    fn permanent_examples() {
        assert_eq!(permanent(&ComplexMatrix::identity(4)).unwrap(), C64::ONE);
        let ones = ComplexMatrix::from_rows(vec![
            vec![C64::ONE, C64::ONE],
            vec![C64::ONE, C64::ONE],
        ])
        .unwrap();
        assert!((permanent(&ones).unwrap() - C64::from(2.0)).norm() < 1e-14);
        let half = ComplexMatrix::from_rows(vec![
            vec![C64::ONE, C64::from(0.5)],
            vec![C64::from(0.5), C64::ONE],
        ])
        .unwrap();
        assert!((permanent(&half).unwrap() - C64::from(1.25)).norm() < 1e-14);
        assert_eq!(permanent(&ComplexMatrix::zeros(0, 0)).unwrap(), C64::ONE);
        assert!(permanent(&ComplexMatrix::zeros(2, 3)).is_err());
    }

    #[test]
    fn ryser_matches_the_naive_sum() {
        let mut rng = substream(41, 30);
        for n in 1..=6 {
            for _ in 0..5 {
                let a = random_complex(&mut rng, n);
                let fast = permanent(&a).unwrap();
                let slow = naive_permanent(&a);
                assert!(
                    (fast - slow).norm() <= 1e-10 * slow.norm().max(1.0),
                    "n={n}: {fast} vs {slow}"
                );
            }
        }
    }

    #[test]
    fn immanant_examples() {
        for n in 1..=4 {
            for shape in partitions_of(n) {
                let v = normalized_immanant(&shape, &ComplexMatrix::identity(n)).unwrap();
                assert!((v - C64::ONE).norm() < 1e-12, "shape={shape}");
            }
        }
        let m = ComplexMatrix::from_rows(vec![
            vec![C64::new(1.0, 1.0), C64::new(2.0, 0.0)],
            vec![C64::new(0.5, 0.0), C64::new(0.0, -1.0)],
        ])
        .unwrap();
        let det = normalized_immanant(&p(&[1, 1]), &m).unwrap();
        let ad_minus_bc = m.get(0, 0) * m.get(1, 1) - m.get(0, 1) * m.get(1, 0);
        assert!((det - ad_minus_bc).norm() < 1e-14);

        let ones3 = ComplexMatrix::from_rows(vec![vec![C64::ONE; 3]; 3]).unwrap();
        assert!(normalized_immanant(&p(&[2, 1]), &ones3).unwrap().norm() < 1e-12);

        assert!(normalized_immanant(&p(&[2]), &ones3).is_err());
    }

    #[test]
    fn immanant_specializes_to_permanent_and_determinant() {
        let mut rng = substream(41, 31);
        for n in 1..=5 {
            let a = random_complex(&mut rng, n);
            let perm = normalized_immanant(&Partition::single_row(n), &a).unwrap();
            assert!((perm - permanent(&a).unwrap()).norm() < 1e-10);
            let det = normalized_immanant(&Partition::single_column(n), &a).unwrap();
            let lu_det = a.inner().clone().determinant();
            assert!((det - lu_det).norm() < 1e-10, "n={n}: {det} vs {lu_det}");
        }
    }

    #[test]
    fn shared_sweep_matches_per_shape_calls() {
        let mut rng = substream(41, 32);
        for n in 1..=5 {
            let a = random_complex(&mut rng, n);
            for (shape, value) in normalized_immanants_all(&a).unwrap() {
                let single = normalized_immanant(&shape, &a).unwrap();
                assert!((value - single).norm() < 1e-12, "shape={shape}");
            }
        }
    }

    #[test]
    fn immanants_of_psd_matrices_are_real_nonnegative_and_det_minimal() {
        let mut rng = substream(41, 33);
        for trial in 0..100 {
            let n = 1 + trial % 6;
            let rank = 1 + trial % n.max(1);
            let a = random_psd(&mut rng, n, rank).unwrap();
            let values = normalized_immanants_all(&a).unwrap();
            let det = values
                .iter()
                .find(|(s, _)| *s == Partition::single_column(n))
                .unwrap()
                .1;
            for (shape, v) in &values {
                assert!(v.im.abs() < 1e-10, "shape={shape} imag={}", v.im);
                assert!(v.re >= -1e-10, "shape={shape} value={}", v.re);
                assert!(det.re <= v.re + 1e-10, "det not minimal at {shape}");
            }
        }
    }

    #[test]
    fn immanant_cap_is_enforced() {
        let big = ComplexMatrix::identity(tol::IMMANANT_CAP + 1);
        let shape = Partition::single_row(tol::IMMANANT_CAP + 1);
        assert!(matches!(
            normalized_immanant(&shape, &big),
            Err(Error::CapExceeded(_))
        ));
        let wide = ComplexMatrix::identity(tol::PERMANENT_CAP + 1);
        assert!(matches!(permanent(&wide), Err(Error::CapExceeded(_))));
    }
}
