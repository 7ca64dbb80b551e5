//! Generalized bunching probabilities: the chance that all `n` input
//! bosons leave an interferometer inside a chosen subset of output modes.
//!
//! The closed form is a mixture of normalized immanants of the Gram
//! matrix of evolved input columns, with mixture weights determined by
//! the hidden-label state. This module implements every supported state
//! family, the exact Haar-mean formula, Monte Carlo Haar averaging, a
//! subset-averaged estimator, and two numerical scanners (immanant
//! dominance and per-unitary Schur convexity).

use std::collections::BTreeMap;

use num_complex::Complex64 as C64;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::linalg::{
    gram_matrix, haar_unitary, normalized_immanants_all, permanent, random_psd, validate_sites,
    ComplexMatrix, ModeSubset,
};
use crate::partitions::{
    dim_standard, factorial, kostka, ordered_set_partitions, partitions_of, refines, Partition,
};
use crate::seeding::substream;
use crate::symfunc::{sw_distribution, ProbVector};
use crate::tol;

/// Hidden-label preparation of the `n` input bosons.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum StateKind {
    /// Every boson carries the same hidden label.
    Indistinguishable,
    /// Permutation-invariant state supported on a single symmetry sector.
    PureIrrep { shape: Partition },
    /// Labels fixed up to relabeling: `pattern_j` bosons share label `j`.
    PartiallyLabelled { pattern: Partition },
    /// Each boson draws its label independently from `spectrum`.
    Uniform { spectrum: ProbVector },
    /// Arbitrary sector weights, realizable whenever `L ≥ n`.
    ExplicitQ { weights: IrrepDistribution },
}

/// Input-state description: which modes the bosons enter (one boson per
/// site), the hidden-space dimension, and the label preparation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StateSpec {
    pub kind: StateKind,
    pub sites: Vec<usize>,
    pub hidden_dim: usize,
}

impl StateSpec {
    pub fn new(kind: StateKind, sites: Vec<usize>, hidden_dim: usize) -> Result<Self> {
        let spec = StateSpec {
            kind,
            sites,
            hidden_dim,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn n(&self) -> usize {
        self.sites.len()
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.n();
        if n == 0 {
            return Err(Error::InvalidStateSpec("no input sites".into()));
        }
        let mut sorted = self.sites.clone();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.len() != n {
            return Err(Error::InvalidStateSpec(format!(
                "input sites {:?} are not distinct",
                self.sites
            )));
        }
        let l = self.hidden_dim;
        if l == 0 {
            return Err(Error::InvalidStateSpec("hidden dimension is zero".into()));
        }
        match &self.kind {
            StateKind::Indistinguishable => {}
            StateKind::PureIrrep { shape } => {
                if shape.n() != n {
                    return Err(Error::InvalidStateSpec(format!(
                        "sector shape {shape} does not partition the particle number {n}"
                    )));
                }
                if l < n {
                    return Err(Error::InvalidStateSpec(format!(
                        "single-sector states need hidden dimension >= {n}, got {l}"
                    )));
                }
            }
            StateKind::PartiallyLabelled { pattern } => {
                if pattern.n() != n {
                    return Err(Error::InvalidStateSpec(format!(
                        "label pattern {pattern} does not partition the particle number {n}"
                    )));
                }
                if pattern.len() > l {
                    return Err(Error::InvalidStateSpec(format!(
                        "label pattern {pattern} uses {} labels but the hidden dimension is {l}",
                        pattern.len()
                    )));
                }
            }
            StateKind::Uniform { spectrum } => {
                if spectrum.len() != l {
                    return Err(Error::InvalidStateSpec(format!(
                        "spectrum has {} entries but the hidden dimension is {l}",
                        spectrum.len()
                    )));
                }
            }
            StateKind::ExplicitQ { weights } => {
                if weights.n() != n {
                    return Err(Error::InvalidStateSpec(format!(
                        "sector weights are over partitions of {} but there are {n} particles",
                        weights.n()
                    )));
                }
                if l < n {
                    return Err(Error::InvalidStateSpec(format!(
                        "explicit sector weights need hidden dimension >= {n}, got {l}"
                    )));
                }
            }
        }
        Ok(())
    }
}

/// A probability distribution over the symmetry sectors (partitions of
/// `n`) of the hidden-label space.
#[derive(Clone, Debug, PartialEq)]
pub struct IrrepDistribution {
    n: usize,
    q: BTreeMap<Partition, f64>,
}

impl IrrepDistribution {
    /// Validates weights: each ≥ −1e-12, total 1 within 1e-10, every
    /// shape a partition of `n`.
    pub fn new(n: usize, weights: impl IntoIterator<Item = (Partition, f64)>) -> Result<Self> {
        let mut q = BTreeMap::new();
        let mut total = 0.0;
        for (shape, w) in weights {
            if shape.n() != n {
                return Err(Error::InvalidStateSpec(format!(
                    "sector {shape} is not a partition of {n}"
                )));
            }
            if !w.is_finite() || w < -1e-12 {
                return Err(Error::InvalidStateSpec(format!(
                    "sector weight {w} at {shape} is negative or not finite"
                )));
            }
            total += w;
            if q.insert(shape.clone(), w.max(0.0)).is_some() {
                return Err(Error::InvalidStateSpec(format!(
                    "sector {shape} listed twice"
                )));
            }
        }
        if (total - 1.0).abs() > tol::DIST_NORM {
            return Err(Error::InvalidStateSpec(format!(
                "sector weights sum to {total}, not 1"
            )));
        }
        Ok(IrrepDistribution { n, q })
    }

    pub fn point_mass(shape: Partition) -> Self {
        let n = shape.n();
        let mut q = BTreeMap::new();
        q.insert(shape, 1.0);
        IrrepDistribution { n, q }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn probability(&self, shape: &Partition) -> f64 {
        self.q.get(shape).copied().unwrap_or(0.0)
    }

    /// Entries in canonical partition order.
    pub fn support(&self) -> impl Iterator<Item = (&Partition, f64)> {
        self.q.iter().map(|(k, &v)| (k, v))
    }

    pub fn max_abs_diff(&self, other: &IrrepDistribution) -> f64 {
        let mut shapes: Vec<&Partition> = self.q.keys().collect();
        shapes.extend(other.q.keys());
        shapes
            .into_iter()
            .map(|s| (self.probability(s) - other.probability(s)).abs())
            .fold(0.0, f64::max)
    }
}

impl Serialize for IrrepDistribution {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Raw {
            n: usize,
            q: BTreeMap<String, f64>,
        }
        let q = self
            .q
            .iter()
            .map(|(shape, &w)| (serde_json::to_string(shape).unwrap_or_default(), w))
            .collect();
        Raw { n: self.n, q }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for IrrepDistribution {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        #[derive(Deserialize)]
        struct Raw {
            n: usize,
            q: BTreeMap<String, f64>,
        }
        let raw = Raw::deserialize(d)?;
        let weights = raw
            .q
            .into_iter()
            .map(|(key, w)| {
                let shape: Partition = serde_json::from_str(&key)
                    .map_err(|e| D::Error::custom(format!("bad sector key {key:?}: {e}")))?;
                Ok((shape, w))
            })
            .collect::<std::result::Result<Vec<_>, D::Error>>()?;
        IrrepDistribution::new(raw.n, weights).map_err(D::Error::custom)
    }
}

/// Fixed experiment geometry: `m` visible modes, `n` particles, hidden
/// dimension, the bunching subset, and the master seed all randomness
/// derives from.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExperimentConfig {
    pub m: usize,
    pub n: usize,
    pub hidden_dim: usize,
    pub subset: ModeSubset,
    pub seed: u64,
}

impl ExperimentConfig {
    pub fn new(m: usize, n: usize, hidden_dim: usize, subset: ModeSubset, seed: u64) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidConfig("need at least one particle".into()));
        }
        if n > m {
            return Err(Error::InvalidConfig(format!(
                "{n} particles in single occupation need at least {n} modes, got {m}"
            )));
        }
        if hidden_dim == 0 {
            return Err(Error::InvalidConfig("hidden dimension is zero".into()));
        }
        if subset.mode_count() != m {
            return Err(Error::InvalidConfig(format!(
                "subset is over {} modes but the experiment has {m}",
                subset.mode_count()
            )));
        }
        Ok(ExperimentConfig {
            m,
            n,
            hidden_dim,
            subset,
            seed,
        })
    }

    pub(crate) fn check_spec(&self, spec: &StateSpec) -> Result<()> {
        spec.validate()?;
        if spec.n() != self.n {
            return Err(Error::InvalidConfig(format!(
                "state occupies {} sites but the experiment has {} particles",
                spec.n(),
                self.n
            )));
        }
        if spec.hidden_dim != self.hidden_dim {
            return Err(Error::InvalidConfig(format!(
                "state hidden dimension {} differs from the experiment's {}",
                spec.hidden_dim, self.hidden_dim
            )));
        }
        validate_sites(&spec.sites, self.m)
    }
}

/// A bunching probability with its unclamped raw value retained for
/// diagnostics; rounding can push the raw value a hair outside [0, 1].
#[derive(Clone, Copy, Debug, Serialize)]
pub struct BunchValue {
    probability: f64,
    raw: f64,
}

impl BunchValue {
    fn from_complex(value: C64) -> Result<Self> {
        if value.im.abs() > tol::IMAG_RESIDUE {
            return Err(Error::InternalFault(format!(
                "bunching value has imaginary residue {}",
                value.im
            )));
        }
        Self::from_real(value.re)
    }

    fn from_real(raw: f64) -> Result<Self> {
        if !raw.is_finite() || raw < -tol::PROB_EXCURSION || raw > 1.0 + tol::PROB_EXCURSION {
            return Err(Error::InternalFault(format!(
                "bunching value {raw} is outside [0, 1] beyond tolerance"
            )));
        }
        Ok(BunchValue {
            probability: raw.clamp(0.0, 1.0),
            raw,
        })
    }

    /// Clamped to [0, 1].
    pub fn probability(&self) -> f64 {
        self.probability
    }

    /// Raw mixture value before clamping.
    pub fn raw(&self) -> f64 {
        self.raw
    }
}

/// Sector weights induced by a state: the mixture weights with which the
/// closed-form bunching probability combines normalized immanants.
///
/// For partially labelled patterns the weight of sector `λ` is
/// `dim(λ) · (pattern!/n!) · K_{λ,pattern}`; the Kostka numbers enter with
/// a dimension factor so the weights sum to 1.
pub fn aux_irrep_distribution(spec: &StateSpec) -> Result<IrrepDistribution> {
    spec.validate()?;
    let n = spec.n();
    match &spec.kind {
        StateKind::Indistinguishable => {
            Ok(IrrepDistribution::point_mass(Partition::single_row(n)))
        }
        StateKind::PureIrrep { shape } => Ok(IrrepDistribution::point_mass(shape.clone())),
        StateKind::PartiallyLabelled { pattern } => {
            let prefactor = pattern.factorial() as f64 / factorial(n) as f64;
            let weights = partitions_of(n)
                .into_iter()
                .filter(|shape| shape.len() <= spec.hidden_dim)
                .map(|shape| {
                    let k = kostka(&shape, pattern)? as f64;
                    let dim = dim_standard(&shape) as f64;
                    Ok((shape, dim * prefactor * k))
                })
                .collect::<Result<Vec<_>>>()?;
            IrrepDistribution::new(n, weights)
        }
        StateKind::Uniform { spectrum } => {
            let sw = sw_distribution(n, spectrum)?;
            let weights: Vec<(Partition, f64)> =
                sw.support().map(|(s, p)| (s.clone(), p)).collect();
            IrrepDistribution::new(n, weights)
        }
        StateKind::ExplicitQ { weights } => Ok(weights.clone()),
    }
}

/// Generalized bunching probability of `spec` through `u` into the
/// configured subset: the sector-weighted mixture of normalized immanants
/// of the Gram matrix.
pub fn bunch_probability(
    u: &ComplexMatrix,
    cfg: &ExperimentConfig,
    spec: &StateSpec,
) -> Result<BunchValue> {
    cfg.check_spec(spec)?;
    let q = aux_irrep_distribution(spec)?;
    let gram = gram_matrix(u, &spec.sites, &cfg.subset)?;
    let immanants = normalized_immanants_all(&gram)?;
    let mut acc = C64::ZERO;
    for (shape, imm) in &immanants {
        acc += C64::from(q.probability(shape)) * imm;
    }
    BunchValue::from_complex(acc)
}

/// Bunching probability of a partially labelled pattern by the ordered
/// set-partition route: the pattern-weighted sum over ways to split the
/// sites into label groups of the product of indistinguishable bunching
/// probabilities (permanents) of the groups. Independent of the
/// Kostka-weight route and must agree with it.
pub fn bunch_partially_labelled_direct(
    u: &ComplexMatrix,
    cfg: &ExperimentConfig,
    sites: &[usize],
    pattern: &Partition,
) -> Result<BunchValue> {
    let spec = StateSpec::new(
        StateKind::PartiallyLabelled {
            pattern: pattern.clone(),
        },
        sites.to_vec(),
        cfg.hidden_dim,
    )?;
    cfg.check_spec(&spec)?;
    let n = spec.n();
    let prefactor = pattern.factorial() as f64 / factorial(n) as f64;
    let mut total = C64::ZERO;
    for blocks in ordered_set_partitions(sites, pattern)? {
        let mut prod = C64::ONE;
        for block in &blocks {
            let g = gram_matrix(u, block, &cfg.subset)?;
            prod *= permanent(&g)?;
        }
        total += prod;
    }
    BunchValue::from_complex(total * prefactor)
}

/// Outcome of one refinement-monotonicity comparison: bunching of the
/// coarser label pattern minus the finer one. Coarser patterns are more
/// indistinguishable, so the gap should be nonnegative; a gap below
/// −1e-9 is flagged.
#[derive(Clone, Debug, Serialize)]
pub struct RefinementReport {
    pub coarse: Partition,
    pub fine: Partition,
    pub bunch_coarse: f64,
    pub bunch_fine: f64,
    pub gap: f64,
    pub violation: bool,
}

/// Compares bunching probabilities of two label patterns ordered by
/// refinement (`coarse` must be refined by `fine`).
pub fn refinement_monotonicity_check(
    u: &ComplexMatrix,
    cfg: &ExperimentConfig,
    sites: &[usize],
    coarse: &Partition,
    fine: &Partition,
) -> Result<RefinementReport> {
    if !refines(coarse, fine)? {
        return Err(Error::InvalidConfig(format!(
            "{fine} does not refine {coarse}; the comparison is undefined"
        )));
    }
    let bunch_of = |pattern: &Partition| -> Result<f64> {
        let spec = StateSpec::new(
            StateKind::PartiallyLabelled {
                pattern: pattern.clone(),
            },
            sites.to_vec(),
            cfg.hidden_dim,
        )?;
        Ok(bunch_probability(u, cfg, &spec)?.raw())
    };
    let bunch_coarse = bunch_of(coarse)?;
    let bunch_fine = bunch_of(fine)?;
    let gap = bunch_coarse - bunch_fine;
    Ok(RefinementReport {
        coarse: coarse.clone(),
        fine: fine.clone(),
        bunch_coarse,
        bunch_fine,
        gap,
        violation: gap < -tol::REFINEMENT_SLACK,
    })
}

fn rising_ratio(k: usize, m: usize, shape: &Partition) -> f64 {
    shape
        .cells()
        .map(|cell| {
            let c = cell.content() as f64;
            (k as f64 + c) / (m as f64 + c)
        })
        .product()
}

/// Exact Haar average of the bunching probability of a uniform state
/// with spectrum `alpha` over subsets of size `k`: the mixture over
/// sectors of ratios of rising factorials.
pub fn mean_bunch_closed(n: usize, m: usize, k: usize, alpha: &ProbVector) -> Result<f64> {
    if n == 0 || n > m {
        return Err(Error::OutOfRange(format!(
            "need 1 <= n <= m, got n={n}, m={m}"
        )));
    }
    if k == 0 || k > m {
        return Err(Error::OutOfRange(format!(
            "subset size must lie in 1..={m}, got {k}"
        )));
    }
    if alpha.len() < n {
        return Err(Error::OutOfRange(format!(
            "hidden dimension {} is smaller than the particle number {n}",
            alpha.len()
        )));
    }
    let sw = sw_distribution(n, alpha)?;
    let mean = sw
        .support()
        .map(|(shape, p)| p * rising_ratio(k, m, shape))
        .sum::<f64>();
    if !(-tol::PROB_EXCURSION..=1.0 + tol::PROB_EXCURSION).contains(&mean) {
        return Err(Error::InternalFault(format!(
            "mean bunching {mean} is outside [0, 1]"
        )));
    }
    Ok(mean.clamp(0.0, 1.0))
}

/// Monte Carlo mean estimate with its standard error.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct MeanEstimate {
    pub estimate: f64,
    pub std_error: f64,
    pub draws: usize,
}

/// Haar-averaged bunching probability by Monte Carlo: unitary `j` is
/// drawn from the substream `(cfg.seed, j)`, so the result is bit-stable
/// for a fixed seed regardless of thread count.
pub fn mean_bunch_mc(
    cfg: &ExperimentConfig,
    spec: &StateSpec,
    num_unitaries: usize,
) -> Result<MeanEstimate> {
    if num_unitaries < 2 {
        return Err(Error::InvalidConfig(format!(
            "need at least 2 draws for a standard error, got {num_unitaries}"
        )));
    }
    cfg.check_spec(spec)?;
    let values: Vec<f64> = (0..num_unitaries)
        .into_par_iter()
        .map(|j| {
            let mut rng = substream(cfg.seed, j as u64);
            let u = haar_unitary(&mut rng, cfg.m);
            bunch_probability(&u, cfg, spec).map(|b| b.probability())
        })
        .collect::<Result<Vec<f64>>>()?;
    // Sequential reduction in draw order keeps the result exact across
    // thread counts.
    let nf = values.len() as f64;
    let mean = values.iter().sum::<f64>() / nf;
    let ss = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>();
    let std_error = (ss / (nf * (nf - 1.0))).sqrt();
    Ok(MeanEstimate {
        estimate: mean,
        std_error,
        draws: values.len(),
    })
}

fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc
}

/// Unbiased estimator of the uniform average over all size-`k` subsets of
/// the bunching probability, from outcome samples: a sample occupying `t`
/// distinct modes contributes the fraction of size-`k` subsets containing
/// those `t` modes, `C(m−t, k−t)/C(m, k)`.
pub fn subset_avg_estimator(
    samples: &[crate::fock_oracle::Occupation],
    k: usize,
    m: usize,
) -> Result<f64> {
    if k == 0 || k > m {
        return Err(Error::OutOfRange(format!(
            "subset size must lie in 1..={m}, got {k}"
        )));
    }
    if samples.is_empty() {
        return Err(Error::InvalidConfig("no samples given".into()));
    }
    let denom = binomial(m, k) as f64;
    let mut acc = 0.0;
    for sample in samples {
        if sample.mode_count() != m {
            return Err(Error::InvalidOccupation(format!(
                "sample is over {} modes, expected {m}",
                sample.mode_count()
            )));
        }
        let t = sample.occupied_modes().len();
        if t <= k {
            acc += binomial(m - t, k - t) as f64 / denom;
        }
    }
    Ok(acc / samples.len() as f64)
}

/// One trial of the immanant-dominance scan.
#[derive(Clone, Debug, Serialize)]
pub struct LiebTrial {
    pub trial: usize,
    pub rank: usize,
    /// Shape attaining the largest normalized immanant.
    pub worst_shape: Partition,
    /// Largest immanant minus the permanent (0 when the permanent wins).
    pub gap: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct LiebFinding {
    pub trial: usize,
    pub shape: Partition,
    pub gap: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct LiebConfig {
    pub n: usize,
    pub trials: usize,
    pub seed: u64,
}

#[derive(Clone, Debug, Serialize)]
pub struct LiebSummary {
    pub worst_gap: f64,
    pub worst_trial: usize,
}

/// Scan report; `findings` lists trials where some normalized immanant
/// exceeded the permanent beyond 1e-9 (candidate counterexamples to
/// permanent dominance).
#[derive(Clone, Debug, Serialize)]
pub struct LiebReport {
    pub config: LiebConfig,
    pub per_trial: Vec<LiebTrial>,
    pub summary: LiebSummary,
    pub findings: Vec<LiebFinding>,
}

/// Tests permanent dominance on random PSD matrices of mixed ranks.
/// Trial `j` uses the substream `(seed, j)`, so reports are reproducible.
pub fn lieb_scan(seed: u64, n: usize, trials: usize) -> Result<LiebReport> {
    if n == 0 || n > tol::IMMANANT_CAP {
        return Err(Error::OutOfRange(format!(
            "scan supports 1 <= n <= {}, got {n}",
            tol::IMMANANT_CAP
        )));
    }
    if trials == 0 {
        return Err(Error::InvalidConfig("no trials requested".into()));
    }
    let per_trial: Vec<LiebTrial> = (0..trials)
        .into_par_iter()
        .map(|trial| {
            let mut rng = substream(seed, trial as u64);
            let rank = 1 + trial % n;
            let a = random_psd(&mut rng, n, rank)?;
            // Rescale to unit mean diagonal; scaling by c multiplies every
            // immanant by c^n, so gap signs are unchanged.
            let tr = a.trace().re;
            let scaled = ComplexMatrix::from_dmatrix(a.inner().scale(n as f64 / tr))?;
            let values = normalized_immanants_all(&scaled)?;
            let perm = values
                .iter()
                .find(|(s, _)| *s == Partition::single_row(n))
                .expect("single-row shape present")
                .1
                .re;
            let (worst_shape, worst_value) = values
                .iter()
                .map(|(s, v)| (s, v.re))
                .max_by(|a, b| a.1.total_cmp(&b.1))
                .expect("nonempty shape list");
            Ok(LiebTrial {
                trial,
                rank,
                worst_shape: worst_shape.clone(),
                gap: worst_value - perm,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let worst = per_trial
        .iter()
        .max_by(|a, b| a.gap.total_cmp(&b.gap))
        .expect("at least one trial");
    let findings = per_trial
        .iter()
        .filter(|t| t.gap > tol::DOMINANCE_SLACK)
        .map(|t| LiebFinding {
            trial: t.trial,
            shape: t.worst_shape.clone(),
            gap: t.gap,
        })
        .collect();
    Ok(LiebReport {
        config: LiebConfig { n, trials, seed },
        summary: LiebSummary {
            worst_gap: worst.gap,
            worst_trial: worst.trial,
        },
        per_trial,
        findings,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct ProbeTrial {
    pub trial: usize,
    pub alpha: Vec<f64>,
    pub alpha_prime: Vec<f64>,
    pub bunch_alpha: f64,
    pub bunch_alpha_prime: f64,
    /// `b(alpha) − b(alpha_prime)`; alpha majorizes alpha_prime.
    pub gap: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct ProbeConfig {
    pub m: usize,
    pub n: usize,
    pub hidden_dim: usize,
    pub subset: Vec<usize>,
    pub seed: u64,
    pub pairs: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct ProbeSummary {
    pub most_negative_gap: f64,
    pub negative_trials: usize,
}

/// Exploration report for per-unitary Schur convexity. Negative gaps are
/// surfaced as findings for inspection, never as failures: whether the
/// per-unitary statement holds is an open question, and this probe only
/// gathers evidence.
#[derive(Clone, Debug, Serialize)]
pub struct ProbeReport {
    pub config: ProbeConfig,
    pub per_trial: Vec<ProbeTrial>,
    pub summary: ProbeSummary,
    pub findings: Vec<ProbeTrial>,
}

/// For random spectrum pairs `alpha ≻ alpha'` and a fresh fixed unitary
/// per trial, records the signed bunching gap of the two uniform states.
pub fn schur_convexity_probe(
    cfg: &ExperimentConfig,
    sites: &[usize],
    pairs: usize,
) -> Result<ProbeReport> {
    if pairs == 0 {
        return Err(Error::InvalidConfig("no pairs requested".into()));
    }
    validate_sites(sites, cfg.m)?;
    let l = cfg.hidden_dim;
    if l < 2 || sites.len() != cfg.n {
        return Err(Error::InvalidConfig(
            "probe needs hidden dimension >= 2 and one site per particle".into(),
        ));
    }
    let per_trial: Vec<ProbeTrial> = (0..pairs)
        .into_par_iter()
        .map(|trial| {
            let mut rng = substream(cfg.seed, trial as u64);
            let u = haar_unitary(&mut rng, cfg.m);
            let raw: Vec<f64> = (0..l).map(|_| rng.random::<f64>() + 1e-3).collect();
            let alpha = ProbVector::normalized(raw)?;
            // One averaging transfer between two entries keeps the
            // original spectrum majorizing the new one.
            let i = rng.random_range(0..l);
            let mut j = rng.random_range(0..l - 1);
            if j >= i {
                j += 1;
            }
            let mut moved = alpha.weights().to_vec();
            let (hi, lo) = if moved[i] >= moved[j] { (i, j) } else { (j, i) };
            let delta = rng.random::<f64>() * (moved[hi] - moved[lo]) / 2.0;
            moved[hi] -= delta;
            moved[lo] += delta;
            let alpha_prime = ProbVector::new(moved)?;

            let bunch_of = |spectrum: &ProbVector| -> Result<f64> {
                let spec = StateSpec::new(
                    StateKind::Uniform {
                        spectrum: spectrum.clone(),
                    },
                    sites.to_vec(),
                    l,
                )?;
                Ok(bunch_probability(&u, cfg, &spec)?.raw())
            };
            let bunch_alpha = bunch_of(&alpha)?;
            let bunch_alpha_prime = bunch_of(&alpha_prime)?;
            Ok(ProbeTrial {
                trial,
                alpha: alpha.weights().to_vec(),
                alpha_prime: alpha_prime.weights().to_vec(),
                bunch_alpha,
                bunch_alpha_prime,
                gap: bunch_alpha - bunch_alpha_prime,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let most_negative = per_trial
        .iter()
        .map(|t| t.gap)
        .fold(f64::INFINITY, f64::min);
    let findings: Vec<ProbeTrial> = per_trial
        .iter()
        .filter(|t| t.gap < -tol::DOMINANCE_SLACK)
        .cloned()
        .collect();
    Ok(ProbeReport {
        config: ProbeConfig {
            m: cfg.m,
            n: cfg.n,
            hidden_dim: l,
            subset: cfg.subset.indices().to_vec(),
            seed: cfg.seed,
            pairs,
        },
        summary: ProbeSummary {
            most_negative_gap: most_negative,
            negative_trials: per_trial.iter().filter(|t| t.gap < 0.0).count(),
        },
        per_trial,
        findings,
    })
}
