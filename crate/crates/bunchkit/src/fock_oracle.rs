//! Brute-force Fock-space reference implementation.
//!
//! Everything here recomputes bunching statistics from first principles:
//! the hidden-label state is an explicit density matrix on `L^n`
//! dimensions, the full system is an explicit vector on `(mL)^n`
//! dimensions, and output probabilities come from projecting onto number
//! states. Deliberately slow and dimension-capped; the point is to be an
//! independent check on the closed-form routes, so nothing in this
//! module may call them.

use std::collections::BTreeMap;

use num_complex::Complex64 as C64;
use rand::Rng;
use serde::ser::SerializeSeq;
use serde::{Serialize, Serializer};

use crate::bunching::{ExperimentConfig, IrrepDistribution, StateKind, StateSpec};
use crate::error::{Error, Result};
use crate::linalg::{gram_matrix, validate_sites, ComplexMatrix};
use crate::partitions::{dim_standard, factorial, partitions_of, Partition};
use crate::symgroup::{all_permutations, character, Permutation};
use crate::tol;

/// Occupation-number outcome: how many particles sit in each visible
/// mode. Serializes as a map from mode index to nonzero count.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct Occupation {
    counts: Vec<usize>,
}

impl Occupation {
    pub fn from_counts(counts: Vec<usize>) -> Result<Self> {
        if counts.is_empty() {
            return Err(Error::InvalidOccupation("no modes".into()));
        }
        Ok(Occupation { counts })
    }

    /// Builds the occupation counting each entry of `modes` (the inverse
    /// of `mode_list`).
    pub fn from_mode_list(modes: &[usize], mode_count: usize) -> Result<Self> {
        let mut counts = vec![0usize; mode_count];
        for &m in modes {
            if m >= mode_count {
                return Err(Error::InvalidOccupation(format!(
                    "mode {m} out of range for {mode_count} modes"
                )));
            }
            counts[m] += 1;
        }
        Occupation::from_counts(counts)
    }

    pub fn from_sparse(mode_count: usize, entries: &BTreeMap<usize, usize>) -> Result<Self> {
        let mut counts = vec![0usize; mode_count];
        for (&m, &c) in entries {
            if m >= mode_count {
                return Err(Error::InvalidOccupation(format!(
                    "mode {m} out of range for {mode_count} modes"
                )));
            }
            counts[m] = c;
        }
        Occupation::from_counts(counts)
    }

    pub fn total(&self) -> usize {
        self.counts.iter().sum()
    }

    pub fn mode_count(&self) -> usize {
        self.counts.len()
    }

    pub fn count(&self, mode: usize) -> usize {
        self.counts.get(mode).copied().unwrap_or(0)
    }

    pub fn counts(&self) -> &[usize] {
        &self.counts
    }

    pub fn occupied_modes(&self) -> Vec<usize> {
        (0..self.counts.len())
            .filter(|&m| self.counts[m] > 0)
            .collect()
    }

    /// The nondecreasing list of modes with repetition (one entry per
    /// particle); the left inverse of `from_mode_list`.
    pub fn mode_list(&self) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.total());
        for (m, &c) in self.counts.iter().enumerate() {
            out.extend(std::iter::repeat(m).take(c));
        }
        out
    }

    /// Product of factorials of the counts.
    pub fn multiplicity(&self) -> u128 {
        self.counts.iter().map(|&c| factorial(c)).product()
    }

    pub fn supported_within(&self, modes: &[usize]) -> bool {
        self.occupied_modes().iter().all(|m| modes.contains(m))
    }
}

impl Serialize for Occupation {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let map: BTreeMap<String, usize> = self
            .counts
            .iter()
            .enumerate()
            .filter(|(_, &c)| c > 0)
            .map(|(m, &c)| (m.to_string(), c))
            .collect();
        map.serialize(s)
    }
}

/// All occupations of `n` particles supported on the given distinct
/// modes, in lexicographic order of the count vectors. There are
/// `C(n + |modes| − 1, n)` of them.
pub fn enumerate_occupations(n: usize, modes: &[usize], mode_count: usize) -> Result<Vec<Occupation>> {
    validate_sites(modes, mode_count)?;
    let mut out = Vec::new();
    let mut counts = vec![0usize; mode_count];
    fn descend(
        modes: &[usize],
        pos: usize,
        left: usize,
        counts: &mut Vec<usize>,
        out: &mut Vec<Occupation>,
    ) {
        if pos == modes.len() {
            if left == 0 {
                out.push(Occupation {
                    counts: counts.clone(),
                });
            }
            return;
        }
        if pos + 1 == modes.len() {
            counts[modes[pos]] = left;
            out.push(Occupation {
                counts: counts.clone(),
            });
            counts[modes[pos]] = 0;
            return;
        }
        for take in 0..=left {
            counts[modes[pos]] = take;
            descend(modes, pos + 1, left - take, counts, out);
        }
        counts[modes[pos]] = 0;
    }
    descend(modes, 0, n, &mut counts, &mut out);
    Ok(out)
}

fn string_index(s: &[usize], base: usize) -> usize {
    s.iter().fold(0, |acc, &d| acc * base + d)
}

fn index_to_string(mut idx: usize, base: usize, n: usize) -> Vec<usize> {
    let mut s = vec![0usize; n];
    for x in (0..n).rev() {
        s[x] = idx % base;
        idx /= base;
    }
    s
}

fn hidden_dim_pow(hidden_dim: usize, n: usize) -> Result<usize> {
    let dim = (hidden_dim as u128).checked_pow(n as u32).unwrap_or(u128::MAX);
    if dim > tol::DENSE_DIM_CAP as u128 {
        return Err(Error::CapExceeded(format!(
            "state dimension {hidden_dim}^{n} exceeds the dense cap {}",
            tol::DENSE_DIM_CAP
        )));
    }
    Ok(dim as usize)
}

/// Density matrix of the hidden labels on `(C^L)^{⊗n}`, stored dense.
/// Hermiticity and unit trace are checked at construction; positivity is
/// checked where the matrix is eigendecomposed.
#[derive(Clone, Debug)]
pub struct AuxState {
    n: usize,
    hidden_dim: usize,
    matrix: ComplexMatrix,
}

impl AuxState {
    pub fn new(n: usize, hidden_dim: usize, matrix: ComplexMatrix) -> Result<Self> {
        if n == 0 || hidden_dim == 0 {
            return Err(Error::InvalidStateSpec(
                "need at least one particle and one label".into(),
            ));
        }
        let dim = hidden_dim_pow(hidden_dim, n)?;
        if matrix.rows() != dim || matrix.cols() != dim {
            return Err(Error::InvalidStateSpec(format!(
                "hidden state is {}x{}, expected {dim}x{dim}",
                matrix.rows(),
                matrix.cols()
            )));
        }
        let herm = matrix.hermiticity_defect();
        if herm > tol::AUX_HERMITICITY {
            return Err(Error::InvalidStateSpec(format!(
                "hidden state is not Hermitian (defect {herm})"
            )));
        }
        let trace = matrix.trace();
        if (trace.re - 1.0).abs() > tol::AUX_TRACE || trace.im.abs() > tol::AUX_TRACE {
            return Err(Error::InvalidStateSpec(format!(
                "hidden state trace is {trace}, expected 1"
            )));
        }
        Ok(AuxState {
            n,
            hidden_dim,
            matrix,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn hidden_dim(&self) -> usize {
        self.hidden_dim
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    /// Spectral decomposition restricted to nonnegligible eigenvalues.
    /// Fails if any eigenvalue is negative beyond tolerance.
    pub fn eigen_ensemble(&self) -> Result<Vec<(f64, Vec<C64>)>> {
        let (values, vectors) = self.matrix.hermitian_eigen()?;
        let mut out = Vec::new();
        for (r, &p) in values.iter().enumerate() {
            if p < tol::AUX_PSD_FLOOR {
                return Err(Error::InvalidStateSpec(format!(
                    "hidden state has negative eigenvalue {p}"
                )));
            }
            if p <= 0.0 {
                continue;
            }
            let col = (0..self.dim()).map(|i| vectors.get(i, r)).collect();
            out.push((p, col));
        }
        Ok(out)
    }
}

/// Projector weight `(dim(shape)/n!) Σ_σ χ(σ) R(σ⁻¹)` onto the sector of
/// `shape` inside `(C^L)^{⊗n}`, unnormalized. Its trace equals
/// `dim(shape) · #SSYT(shape, L)`.
pub(crate) fn sector_projector(shape: &Partition, hidden_dim: usize) -> Result<ComplexMatrix> {
    let n = shape.n();
    let dim = hidden_dim_pow(hidden_dim, n)?;
    let mut entries = vec![vec![C64::ZERO; dim]; dim];
    let prefactor = dim_standard(shape) as f64 / factorial(n) as f64;
    for sigma in all_permutations(n) {
        let chi = character(shape, &sigma.cycle_type())? as f64;
        if chi == 0.0 {
            continue;
        }
        let weight = C64::from(prefactor * chi);
        let inv = sigma.inverse();
        for col in 0..dim {
            let j = index_to_string(col, hidden_dim, n);
            let row = string_index(&inv.act_on_string(&j), hidden_dim);
            entries[row][col] += weight;
        }
    }
    ComplexMatrix::from_rows(entries)
}

/// Explicit density matrix of the hidden labels for a state description.
pub fn aux_state(spec: &StateSpec) -> Result<AuxState> {
    spec.validate()?;
    let n = spec.n();
    let l = spec.hidden_dim;
    let dim = hidden_dim_pow(l, n)?;
    let matrix = match &spec.kind {
        StateKind::Indistinguishable => {
            // Every particle carries label 0: the string index is 0.
            let mut entries = vec![vec![C64::ZERO; dim]; dim];
            entries[0][0] = C64::ONE;
            ComplexMatrix::from_rows(entries)?
        }
        StateKind::Uniform { spectrum } => {
            let mut entries = vec![vec![C64::ZERO; dim]; dim];
            for (idx, entry) in entries.iter_mut().enumerate() {
                let labels = index_to_string(idx, l, n);
                let p: f64 = labels.iter().map(|&j| spectrum.weights()[j]).product();
                entry[idx] = C64::from(p);
            }
            ComplexMatrix::from_rows(entries)?
        }
        StateKind::PartiallyLabelled { pattern } => {
            let mut canonical = Vec::with_capacity(n);
            for (label, &count) in pattern.parts().iter().enumerate() {
                canonical.extend(std::iter::repeat(label).take(count));
            }
            let weight = 1.0 / factorial(n) as f64;
            let mut entries = vec![vec![C64::ZERO; dim]; dim];
            for sigma in all_permutations(n) {
                let idx = string_index(&sigma.act_on_string(&canonical), l);
                entries[idx][idx] += C64::from(weight);
            }
            ComplexMatrix::from_rows(entries)?
        }
        StateKind::PureIrrep { shape } => {
            let proj = sector_projector(shape, l)?;
            let trace = proj.trace().re;
            ComplexMatrix::from_dmatrix(proj.inner().scale(1.0 / trace))?
        }
        StateKind::ExplicitQ { weights } => {
            let mut acc = nalgebra::DMatrix::<C64>::zeros(dim, dim);
            for (shape, q) in weights.support() {
                if q == 0.0 {
                    continue;
                }
                let proj = sector_projector(shape, l)?;
                let trace = proj.trace().re;
                acc += proj.inner().scale(q / trace);
            }
            ComplexMatrix::from_dmatrix(acc)?
        }
    };
    AuxState::new(n, l, matrix)
}

/// `Tr(R(σ) h)` where `R` permutes tensor factors of `(C^L)^{⊗n}`.
fn trace_permuted(h: &ComplexMatrix, sigma: &Permutation, hidden_dim: usize) -> C64 {
    let n = sigma.n();
    let dim = h.rows();
    let inv = sigma.inverse();
    let mut acc = C64::ZERO;
    for col in 0..dim {
        let j = index_to_string(col, hidden_dim, n);
        let row = string_index(&inv.act_on_string(&j), hidden_dim);
        acc += h.get(row, col);
    }
    acc
}

/// Bunching probability by the permutation-sum route:
/// `Σ_σ Tr(R(σ) h) · Π_x G[x, σ(x)]` with `G` the Gram matrix of the
/// occupied columns compressed onto the subset.
///
/// The trace factor enters through its conjugacy-class average: the
/// physical state is symmetrized over particle exchange, which leaves
/// only the exchange-invariant part of `h` observable. For states that
/// already commute with the exchange action the average is a no-op.
pub fn oracle_bunch_perm_sum(
    u: &ComplexMatrix,
    cfg: &ExperimentConfig,
    sites: &[usize],
    h: &AuxState,
) -> Result<f64> {
    if h.n() != cfg.n || sites.len() != cfg.n {
        return Err(Error::InvalidConfig(format!(
            "hidden state is for {} particles on {} sites, experiment has {}",
            h.n(),
            sites.len(),
            cfg.n
        )));
    }
    if h.hidden_dim() != cfg.hidden_dim {
        return Err(Error::InvalidConfig(format!(
            "hidden dimension mismatch: state {}, experiment {}",
            h.hidden_dim(),
            cfg.hidden_dim
        )));
    }
    let n = cfg.n;
    if n > tol::PERM_SUM_CAP {
        return Err(Error::CapExceeded(format!(
            "permutation sum supports n <= {}, got {n}",
            tol::PERM_SUM_CAP
        )));
    }
    let gram = gram_matrix(u, sites, &cfg.subset)?;
    // Accumulate the Gram product and the permuted trace per cycle type,
    // then pair each class's product sum with its averaged trace.
    let mut class_mode: BTreeMap<Partition, C64> = BTreeMap::new();
    let mut class_trace: BTreeMap<Partition, (C64, usize)> = BTreeMap::new();
    for sigma in all_permutations(n) {
        let mut prod = C64::ONE;
        for x in 0..n {
            prod *= gram.get(x, sigma.apply(x));
        }
        let ct = sigma.cycle_type();
        *class_mode.entry(ct.clone()).or_insert(C64::ZERO) += prod;
        let entry = class_trace.entry(ct).or_insert((C64::ZERO, 0));
        entry.0 += trace_permuted(h.matrix(), &sigma, cfg.hidden_dim);
        entry.1 += 1;
    }
    let mut acc = C64::ZERO;
    for (ct, prod_sum) in &class_mode {
        let (trace_sum, count) = class_trace[ct];
        acc += *prod_sum * (trace_sum / count as f64);
    }
    if acc.im.abs() > tol::IMAG_RESIDUE {
        return Err(Error::InternalFault(format!(
            "permutation-sum bunching has imaginary residue {}",
            acc.im
        )));
    }
    Ok(acc.re)
}

/// `n`-particle first-quantized state on `(C^{mL})^{⊗n}` as an ensemble
/// of symmetrized pure vectors. Combined single-particle index is
/// `mode * L + label`.
pub struct DenseNParticleState {
    n: usize,
    site_dim: usize,
    ensemble: Vec<(f64, Vec<C64>)>,
}

impl DenseNParticleState {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.site_dim.pow(self.n as u32)
    }

    pub fn ensemble(&self) -> &[(f64, Vec<C64>)] {
        &self.ensemble
    }

    /// Largest deviation of any ensemble vector from permutation
    /// symmetry of its tensor factors.
    pub fn symmetry_defect(&self) -> f64 {
        let dim = self.dim();
        let mut worst = 0.0f64;
        for tau in all_permutations(self.n) {
            for (_, psi) in &self.ensemble {
                for idx in 0..dim {
                    let e = index_to_string(idx, self.site_dim, self.n);
                    let moved = string_index(&tau.act_on_string(&e), self.site_dim);
                    worst = worst.max((psi[moved] - psi[idx]).norm());
                }
            }
        }
        worst
    }

    /// Applies a single-particle operator to every tensor factor.
    pub fn evolve(&mut self, v: &ComplexMatrix) -> Result<()> {
        let d = self.site_dim;
        if v.rows() != d || v.cols() != d {
            return Err(Error::SizeMismatch(format!(
                "single-particle operator is {}x{}, need {d}x{d}",
                v.rows(),
                v.cols()
            )));
        }
        let dim = self.dim();
        for axis in 0..self.n {
            let stride = d.pow((self.n - 1 - axis) as u32);
            for (_, psi) in self.ensemble.iter_mut() {
                let mut next = vec![C64::ZERO; dim];
                for (idx, out) in next.iter_mut().enumerate() {
                    let digit = (idx / stride) % d;
                    let base = idx - digit * stride;
                    let mut acc = C64::ZERO;
                    for b in 0..d {
                        acc += v.get(digit, b) * psi[base + b * stride];
                    }
                    *out = acc;
                }
                *psi = next;
            }
        }
        Ok(())
    }
}

/// Symmetrizes the hidden state onto the full first-quantized space:
/// each eigenvector of `h` becomes a superposition of symmetrized basis
/// vectors `(1/√n!) Σ_σ |σ·(site, label) string⟩`.
fn build_dense_state(
    aux: &AuxState,
    sites: &[usize],
    m: usize,
) -> Result<DenseNParticleState> {
    let n = aux.n();
    let l = aux.hidden_dim();
    let site_dim = m * l;
    let full_dim = (site_dim as u128).checked_pow(n as u32).unwrap_or(u128::MAX);
    if full_dim > tol::DENSE_DIM_CAP as u128 {
        return Err(Error::CapExceeded(format!(
            "full dimension ({m}*{l})^{n} exceeds the dense cap {}",
            tol::DENSE_DIM_CAP
        )));
    }
    let full_dim = full_dim as usize;
    let ensemble = aux.eigen_ensemble()?;
    let inv_sqrt = 1.0 / (factorial(n) as f64).sqrt();
    let perms = all_permutations(n);
    let mut vectors = Vec::with_capacity(ensemble.len());
    for (p, chi) in ensemble {
        let mut psi = vec![C64::ZERO; full_dim];
        for (j_idx, &c) in chi.iter().enumerate() {
            if c.norm_sqr() < 1e-32 {
                continue;
            }
            let labels = index_to_string(j_idx, l, n);
            let combined: Vec<usize> = (0..n).map(|x| sites[x] * l + labels[x]).collect();
            // Sites are distinct, so the n! arrangements hit distinct
            // basis vectors and the symmetrized vector stays normalized.
            for sigma in &perms {
                let idx = string_index(&sigma.act_on_string(&combined), site_dim);
                psi[idx] += c * inv_sqrt;
            }
        }
        vectors.push((p, psi));
    }
    let state = DenseNParticleState {
        n,
        site_dim,
        ensemble: vectors,
    };
    let defect = state.symmetry_defect();
    if defect > tol::DUAL_ORACLE {
        return Err(Error::InternalFault(format!(
            "dense state breaks exchange symmetry by {defect}"
        )));
    }
    Ok(state)
}

/// Probability distribution over visible occupation patterns.
#[derive(Clone, Debug)]
pub struct VisibleDistribution {
    n: usize,
    mode_count: usize,
    probs: BTreeMap<Occupation, f64>,
}

impl VisibleDistribution {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn mode_count(&self) -> usize {
        self.mode_count
    }

    pub fn probability(&self, v: &Occupation) -> f64 {
        self.probs.get(v).copied().unwrap_or(0.0)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Occupation, f64)> {
        self.probs.iter().map(|(k, &v)| (k, v))
    }

    /// Total probability of outcomes with every particle inside `modes`.
    /// An empty mode list has no supported outcomes for n >= 1, so the
    /// mass is 0.
    pub fn mass_on_modes(&self, modes: &[usize]) -> f64 {
        self.probs
            .iter()
            .filter(|(v, _)| v.supported_within(modes))
            .map(|(_, &p)| p)
            .sum()
    }
}

impl Serialize for VisibleDistribution {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Entry<'a> {
            occupation: &'a Occupation,
            probability: f64,
        }
        let mut seq = s.serialize_seq(Some(self.probs.len()))?;
        for (occupation, &probability) in &self.probs {
            seq.serialize_element(&Entry {
                occupation,
                probability,
            })?;
        }
        seq.end()
    }
}

/// All ways to split visible occupation `v` across `l` hidden labels:
/// occupations over `m*l` combined modes with visible marginal `v`.
fn hidden_refinements(v: &Occupation, l: usize) -> Vec<Vec<usize>> {
    let m = v.mode_count();
    let mut out = vec![vec![0usize; m * l]];
    for mode in 0..m {
        let c = v.count(mode);
        if c == 0 {
            continue;
        }
        let splits = compositions(c, l);
        let mut next = Vec::with_capacity(out.len() * splits.len());
        for base in &out {
            for split in &splits {
                let mut g = base.clone();
                for (label, &cnt) in split.iter().enumerate() {
                    g[mode * l + label] = cnt;
                }
                next.push(g);
            }
        }
        out = next;
    }
    out
}

/// All ways to write `total` as an ordered sum of `parts` nonnegative
/// integers.
fn compositions(total: usize, parts: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = vec![0usize; parts];
    fn descend(pos: usize, left: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if pos + 1 == cur.len() {
            cur[pos] = left;
            out.push(cur.clone());
            return;
        }
        for take in 0..=left {
            cur[pos] = take;
            descend(pos + 1, left - take, cur, out);
        }
        cur[pos] = 0;
    }
    if parts == 0 {
        return out;
    }
    descend(0, total, &mut cur, &mut out);
    out
}

/// Exact output distribution over visible occupations, computed by full
/// first-quantized evolution and projection onto number states.
pub fn oracle_visible_distribution(
    u: &ComplexMatrix,
    cfg: &ExperimentConfig,
    spec: &StateSpec,
) -> Result<VisibleDistribution> {
    cfg.check_spec(spec)?;
    if !u.is_square() || u.rows() != cfg.m {
        return Err(Error::SizeMismatch(format!(
            "unitary is {}x{}, experiment has {} modes",
            u.rows(),
            u.cols(),
            cfg.m
        )));
    }
    if !u.is_unitary(tol::UNITARITY) {
        return Err(Error::NotUnitary(format!(
            "matrix has unitarity defect {}",
            u.unitarity_defect()
        )));
    }
    let n = cfg.n;
    let l = cfg.hidden_dim;
    let aux = aux_state(spec)?;
    let mut state = build_dense_state(&aux, &spec.sites, cfg.m)?;

    // Single-particle evolution acts on modes and leaves labels alone.
    let site_dim = cfg.m * l;
    let mut v_entries = vec![vec![C64::ZERO; site_dim]; site_dim];
    for s in 0..cfg.m {
        for sp in 0..cfg.m {
            let amp = u.get(s, sp);
            for label in 0..l {
                v_entries[s * l + label][sp * l + label] = amp;
            }
        }
    }
    state.evolve(&ComplexMatrix::from_rows(v_entries)?)?;

    let all_modes: Vec<usize> = (0..cfg.m).collect();
    let perms = all_permutations(n);
    let nfact = factorial(n) as f64;
    let mut probs = BTreeMap::new();
    let mut total = 0.0;
    for v in enumerate_occupations(n, &all_modes, cfg.m)? {
        let mut p = 0.0;
        for g in hidden_refinements(&v, l) {
            let g_occ = Occupation::from_counts(g)?;
            let zeta = g_occ.mode_list();
            debug_assert_eq!(
                Occupation::from_mode_list(&zeta, site_dim).unwrap(),
                g_occ,
                "mode list does not invert the occupation"
            );
            let norm = 1.0 / (nfact * g_occ.multiplicity() as f64).sqrt();
            for (weight, psi) in state.ensemble() {
                let mut amp = C64::ZERO;
                for sigma in &perms {
                    amp += psi[string_index(&sigma.act_on_string(&zeta), site_dim)];
                }
                p += weight * (amp * norm).norm_sqr();
            }
        }
        total += p;
        probs.insert(v, p);
    }
    if (total - 1.0).abs() > tol::DIST_NORM {
        return Err(Error::InternalFault(format!(
            "oracle distribution sums to {total}, not 1"
        )));
    }
    Ok(VisibleDistribution {
        n,
        mode_count: cfg.m,
        probs,
    })
}

/// Bunching probability by summing the oracle distribution over outcomes
/// supported inside the configured subset.
pub fn oracle_bunch(u: &ComplexMatrix, cfg: &ExperimentConfig, spec: &StateSpec) -> Result<f64> {
    let dist = oracle_visible_distribution(u, cfg, spec)?;
    Ok(dist.mass_on_modes(cfg.subset.indices()))
}

/// Reads off the sector weights of a hidden state by projecting onto
/// each symmetry sector: `q(shape) = Tr(Θ_shape h)` computed from
/// permuted traces.
pub fn extract_q(h: &AuxState) -> Result<IrrepDistribution> {
    let n = h.n();
    if n > tol::PERM_SUM_CAP {
        return Err(Error::CapExceeded(format!(
            "sector extraction supports n <= {}, got {n}",
            tol::PERM_SUM_CAP
        )));
    }
    // Group permuted traces by cycle type; characters are constant on
    // classes, so only the per-class sums matter.
    let mut class_sums: BTreeMap<Partition, C64> = BTreeMap::new();
    for sigma in all_permutations(n) {
        let tr = trace_permuted(h.matrix(), &sigma.inverse(), h.hidden_dim());
        *class_sums.entry(sigma.cycle_type()).or_insert(C64::ZERO) += tr;
    }
    let nfact = factorial(n) as f64;
    let mut weights = Vec::new();
    for shape in partitions_of(n) {
        let mut acc = C64::ZERO;
        for (ct, &sum) in &class_sums {
            acc += C64::from(character(&shape, ct)? as f64) * sum;
        }
        let q = acc * (dim_standard(&shape) as f64 / nfact);
        if q.im.abs() > tol::IMAG_RESIDUE {
            return Err(Error::InternalFault(format!(
                "sector weight at {shape} has imaginary residue {}",
                q.im
            )));
        }
        if q.re < -tol::PROB_EXCURSION {
            return Err(Error::InternalFault(format!(
                "sector weight at {shape} is negative: {}",
                q.re
            )));
        }
        weights.push((shape, q.re.max(0.0)));
    }
    let total: f64 = weights.iter().map(|(_, q)| q).sum();
    if (total - 1.0).abs() > tol::DIST_NORM {
        return Err(Error::InternalFault(format!(
            "sector weights sum to {total}, not 1"
        )));
    }
    IrrepDistribution::new(n, weights)
}

/// Draws occupation outcomes from the oracle distribution by inverse
/// CDF over its canonical ordering.
pub fn sample_outcomes<R: Rng + ?Sized>(
    rng: &mut R,
    u: &ComplexMatrix,
    cfg: &ExperimentConfig,
    spec: &StateSpec,
    count: usize,
) -> Result<Vec<Occupation>> {
    let dist = oracle_visible_distribution(u, cfg, spec)?;
    let entries: Vec<(&Occupation, f64)> = dist.iter().collect();
    let mut cdf = Vec::with_capacity(entries.len());
    let mut acc = 0.0;
    for (v, p) in &entries {
        acc += p.max(0.0);
        cdf.push((acc, *v));
    }
    let mut out = Vec::with_capacity(count);
    for _ in 0..count {
        let x: f64 = rng.random::<f64>() * acc;
        let pos = cdf.partition_point(|(c, _)| *c < x);
        let pick = cdf.get(pos).or_else(|| cdf.last()).expect("nonempty cdf");
        out.push(pick.1.clone());
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{haar_unitary, ModeSubset};
    use crate::seeding::substream;
    use crate::symfunc::ProbVector;

    fn p(parts: &[usize]) -> Partition {
        Partition::new(parts.to_vec()).unwrap()
    }

    fn beamsplitter() -> ComplexMatrix {
        let s = 1.0 / 2.0f64.sqrt();
        ComplexMatrix::from_rows(vec![
            vec![C64::from(s), C64::from(s)],
            vec![C64::from(s), C64::from(-s)],
        ])
        .unwrap()
    }

    fn hom_config() -> ExperimentConfig {
        ExperimentConfig::new(2, 2, 2, ModeSubset::new(vec![0], 2).unwrap(), 5).unwrap()
    }

    #[test]
    fn occupation_counts_and_round_trip() {
        assert_eq!(enumerate_occupations(2, &[0, 1], 2).unwrap().len(), 3);
        for m in 1..=5 {
            let modes: Vec<usize> = (0..m).collect();
            assert_eq!(enumerate_occupations(1, &modes, m).unwrap().len(), m);
        }
        assert_eq!(enumerate_occupations(3, &[0, 1, 2, 3], 4).unwrap().len(), 20);

        let occ = Occupation::from_counts(vec![2, 0, 1]).unwrap();
        assert_eq!(occ.mode_list(), vec![0, 0, 2]);
        assert_eq!(
            Occupation::from_mode_list(&occ.mode_list(), 3).unwrap(),
            occ
        );
        assert_eq!(occ.multiplicity(), 2);
        assert_eq!(occ.occupied_modes(), vec![0, 2]);
        let json = serde_json::to_string(&occ).unwrap();
        assert_eq!(json, r#"{"0":2,"2":1}"#);
    }

    #[test]
    fn string_indexing_round_trips() {
        for base in 2..=3usize {
            for n in 1..=3usize {
                for idx in 0..base.pow(n as u32) {
                    let s = index_to_string(idx, base, n);
                    assert_eq!(string_index(&s, base), idx);
                }
            }
        }
    }

    #[test]
    fn indistinguishable_hidden_state_is_a_corner_point_mass() {
        let spec = StateSpec::new(StateKind::Indistinguishable, vec![0, 1], 2).unwrap();
        let h = aux_state(&spec).unwrap();
        assert_eq!(h.dim(), 4);
        assert_eq!(h.matrix().get(0, 0), C64::ONE);
        let uniform_point = StateSpec::new(
            StateKind::Uniform {
                spectrum: ProbVector::new(vec![1.0, 0.0]).unwrap(),
            },
            vec![0, 1],
            2,
        )
        .unwrap();
        let h2 = aux_state(&uniform_point).unwrap();
        assert!(h.matrix().max_abs_diff(h2.matrix()) < 1e-15);
    }

    #[test]
    fn labelled_hidden_state_spreads_over_rearrangements() {
        let spec = StateSpec::new(
            StateKind::PartiallyLabelled { pattern: p(&[1, 1]) },
            vec![0, 1],
            2,
        )
        .unwrap();
        let h = aux_state(&spec).unwrap();
        // Strings (0,1) and (1,0) are indices 1 and 2.
        assert!((h.matrix().get(1, 1).re - 0.5).abs() < 1e-15);
        assert!((h.matrix().get(2, 2).re - 0.5).abs() < 1e-15);
        assert_eq!(h.matrix().get(0, 0), C64::ZERO);
        assert_eq!(h.matrix().get(1, 2), C64::ZERO);
    }

    #[test]
    fn sector_projector_trace_counts_tableaux() {
        use crate::partitions::count_ssyt;
        for l in 1..=3usize {
            for n in 1..=3usize {
                for shape in partitions_of(n) {
                    let proj = sector_projector(&shape, l).unwrap();
                    let expect = (dim_standard(&shape) as u128 * count_ssyt(&shape, l)) as f64;
                    assert!(
                        (proj.trace().re - expect).abs() < 1e-8,
                        "shape={shape} l={l}"
                    );
                }
            }
        }
    }

    #[test]
    fn sector_state_has_unit_trace_and_pure_spectrum_weights() {
        let spec =
            StateSpec::new(StateKind::PureIrrep { shape: p(&[1, 1]) }, vec![0, 1], 2).unwrap();
        let h = aux_state(&spec).unwrap();
        assert!((h.matrix().trace().re - 1.0).abs() < 1e-12);
        let q = extract_q(&h).unwrap();
        assert!((q.probability(&p(&[1, 1])) - 1.0).abs() < 1e-12);
        assert!(q.probability(&p(&[2])).abs() < 1e-12);
    }

    #[test]
    fn extracted_weights_match_closed_forms() {
        use crate::bunching::aux_irrep_distribution;
        let l = 3;
        let specs = vec![
            StateSpec::new(StateKind::Indistinguishable, vec![0, 1, 2], l).unwrap(),
            StateSpec::new(
                StateKind::PartiallyLabelled {
                    pattern: p(&[1, 1, 1]),
                },
                vec![0, 1, 2],
                l,
            )
            .unwrap(),
            StateSpec::new(
                StateKind::PartiallyLabelled { pattern: p(&[2, 1]) },
                vec![0, 1, 2],
                l,
            )
            .unwrap(),
            StateSpec::new(
                StateKind::Uniform {
                    spectrum: ProbVector::new(vec![0.2, 0.3, 0.5]).unwrap(),
                },
                vec![0, 1, 2],
                l,
            )
            .unwrap(),
        ];
        for spec in &specs {
            let closed = aux_irrep_distribution(spec).unwrap();
            let measured = extract_q(&aux_state(spec).unwrap()).unwrap();
            assert!(
                closed.max_abs_diff(&measured) < 1e-10,
                "spec={spec:?}: closed={closed:?} measured={measured:?}"
            );
        }
    }

    #[test]
    fn fully_distinct_labels_have_dimension_squared_weights() {
        let spec = StateSpec::new(
            StateKind::PartiallyLabelled {
                pattern: p(&[1, 1, 1]),
            },
            vec![0, 1, 2],
            3,
        )
        .unwrap();
        let q = extract_q(&aux_state(&spec).unwrap()).unwrap();
        assert!((q.probability(&p(&[3])) - 1.0 / 6.0).abs() < 1e-12);
        assert!((q.probability(&p(&[2, 1])) - 4.0 / 6.0).abs() < 1e-12);
        assert!((q.probability(&p(&[1, 1, 1])) - 1.0 / 6.0).abs() < 1e-12);
    }

    #[test]
    fn perm_sum_reproduces_hom_goldens() {
        let u = beamsplitter();
        let cfg = hom_config();
        let indist = StateSpec::new(StateKind::Indistinguishable, vec![0, 1], 2).unwrap();
        let b = oracle_bunch_perm_sum(&u, &cfg, &[0, 1], &aux_state(&indist).unwrap()).unwrap();
        assert!((b - 0.5).abs() < 1e-12);

        let labelled = StateSpec::new(
            StateKind::PartiallyLabelled { pattern: p(&[1, 1]) },
            vec![0, 1],
            2,
        )
        .unwrap();
        let b = oracle_bunch_perm_sum(&u, &cfg, &[0, 1], &aux_state(&labelled).unwrap()).unwrap();
        assert!((b - 0.25).abs() < 1e-12);
    }

    #[test]
    fn identity_interferometer_gives_a_point_mass_at_the_input() {
        let m = 3;
        let u = ComplexMatrix::identity(m);
        let cfg =
            ExperimentConfig::new(m, 2, 2, ModeSubset::new(vec![0], m).unwrap(), 1).unwrap();
        let spec = StateSpec::new(
            StateKind::Uniform {
                spectrum: ProbVector::new(vec![0.5, 0.5]).unwrap(),
            },
            vec![0, 2],
            2,
        )
        .unwrap();
        let dist = oracle_visible_distribution(&u, &cfg, &spec).unwrap();
        let expect = Occupation::from_mode_list(&[0, 2], m).unwrap();
        assert!((dist.probability(&expect) - 1.0).abs() < 1e-12);
        assert_eq!(dist.iter().count(), 6);
    }

    #[test]
    fn single_particle_distribution_is_a_column_modulus() {
        let m = 3;
        let u = haar_unitary(&mut substream(55, 0), m);
        let cfg =
            ExperimentConfig::new(m, 1, 1, ModeSubset::new(vec![1], m).unwrap(), 1).unwrap();
        let spec = StateSpec::new(StateKind::Indistinguishable, vec![2], 1).unwrap();
        let dist = oracle_visible_distribution(&u, &cfg, &spec).unwrap();
        for v in 0..m {
            let occ = Occupation::from_mode_list(&[v], m).unwrap();
            let expect = u.get(v, 2).norm_sqr();
            assert!((dist.probability(&occ) - expect).abs() < 1e-12, "v={v}");
        }
    }

    #[test]
    fn hom_distribution_has_no_coincidences() {
        let u = beamsplitter();
        let cfg = hom_config();
        let spec = StateSpec::new(StateKind::Indistinguishable, vec![0, 1], 2).unwrap();
        let dist = oracle_visible_distribution(&u, &cfg, &spec).unwrap();
        let both_top = Occupation::from_counts(vec![2, 0]).unwrap();
        let both_bottom = Occupation::from_counts(vec![0, 2]).unwrap();
        let split = Occupation::from_counts(vec![1, 1]).unwrap();
        assert!((dist.probability(&both_top) - 0.5).abs() < 1e-12);
        assert!((dist.probability(&both_bottom) - 0.5).abs() < 1e-12);
        assert!(dist.probability(&split).abs() < 1e-12);
    }

    #[test]
    fn oracle_routes_agree_and_empty_mode_lists_hold_nothing() {
        let m = 3;
        let cfg =
            ExperimentConfig::new(m, 2, 2, ModeSubset::new(vec![0, 2], m).unwrap(), 1).unwrap();
        let spec = StateSpec::new(
            StateKind::PartiallyLabelled { pattern: p(&[1, 1]) },
            vec![0, 1],
            2,
        )
        .unwrap();
        for draw in 0..4 {
            let u = haar_unitary(&mut substream(56, draw), m);
            let via_sum =
                oracle_bunch_perm_sum(&u, &cfg, &[0, 1], &aux_state(&spec).unwrap()).unwrap();
            let via_dist = oracle_bunch(&u, &cfg, &spec).unwrap();
            assert!((via_sum - via_dist).abs() < 1e-10, "draw={draw}");
            let dist = oracle_visible_distribution(&u, &cfg, &spec).unwrap();
            assert_eq!(dist.mass_on_modes(&[]), 0.0);
            assert!((dist.mass_on_modes(&[0, 1, 2]) - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn site_relabelling_leaves_bunching_invariant() {
        let m = 4;
        let u = haar_unitary(&mut substream(57, 0), m);
        let cfg =
            ExperimentConfig::new(m, 3, 3, ModeSubset::new(vec![1, 3], m).unwrap(), 1).unwrap();
        let orders: [&[usize]; 3] = [&[0, 1, 3], &[1, 3, 0], &[3, 0, 1]];
        let mut labelled_values = Vec::new();
        let mut uniform_values = Vec::new();
        for sites in orders {
            let labelled = StateSpec::new(
                StateKind::PartiallyLabelled { pattern: p(&[2, 1]) },
                sites.to_vec(),
                3,
            )
            .unwrap();
            labelled_values.push(oracle_bunch(&u, &cfg, &labelled).unwrap());
            let uniform = StateSpec::new(
                StateKind::Uniform {
                    spectrum: ProbVector::new(vec![0.6, 0.3, 0.1]).unwrap(),
                },
                sites.to_vec(),
                3,
            )
            .unwrap();
            uniform_values.push(oracle_bunch(&u, &cfg, &uniform).unwrap());
        }
        for vals in [&labelled_values, &uniform_values] {
            for w in vals.windows(2) {
                assert!((w[0] - w[1]).abs() < 1e-12, "{vals:?}");
            }
        }
    }

    #[test]
    fn sampling_is_deterministic_and_respects_null_events() {
        let u = beamsplitter();
        let cfg = hom_config();
        let spec = StateSpec::new(StateKind::Indistinguishable, vec![0, 1], 2).unwrap();
        let samples =
            sample_outcomes(&mut substream(58, 0), &u, &cfg, &spec, 100_000).unwrap();
        let split = Occupation::from_counts(vec![1, 1]).unwrap();
        let coincidences = samples.iter().filter(|s| **s == split).count();
        assert!(
            (coincidences as f64) / 100_000.0 < 0.001,
            "{coincidences} coincidences"
        );
        let again = sample_outcomes(&mut substream(58, 0), &u, &cfg, &spec, 100).unwrap();
        assert_eq!(&samples[..100], &again[..]);
    }

    #[test]
    fn aux_state_rejects_bad_matrices_and_oversize_requests() {
        let skew = ComplexMatrix::from_rows(vec![
            vec![C64::ONE, C64::ONE],
            vec![C64::ZERO, C64::ZERO],
        ])
        .unwrap();
        assert!(AuxState::new(1, 2, skew).is_err());
        let half = ComplexMatrix::from_dmatrix(ComplexMatrix::identity(2).inner().scale(0.5))
            .unwrap();
        assert!(AuxState::new(1, 2, half).is_ok());
        let spec = StateSpec::new(StateKind::Indistinguishable, (0..13).collect(), 2).unwrap();
        assert!(matches!(
            aux_state(&spec),
            Err(Error::CapExceeded(_))
        ));
    }
}
