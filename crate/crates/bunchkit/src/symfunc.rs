//! Power sums, Schur polynomials, and the Schur-Weyl distribution.
//!
//! Schur values are always computed by two independent algorithms, a
//! tableau weight enumeration and a character expansion over power sums,
//! and the two are compared on every call. The tableau route is the
//! returned value: it is a sum of nonnegative terms for nonnegative
//! arguments, so it has no cancellation.

use std::collections::BTreeMap;

use rand::Rng;
use serde::ser::SerializeMap;
use serde::{Deserialize, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::partitions::{
    dim_standard, enumerate_partitions, factorial, horizontal_strip_growths, Partition,
};
use crate::symgroup::conjugacy_classes;
use crate::tol;

/// A probability vector: nonnegative weights summing to 1.
#[derive(Clone, PartialEq, Debug, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct ProbVector {
    weights: Vec<f64>,
}

impl ProbVector {
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::InvalidProbVector("empty weight list".into()));
        }
        if let Some(bad) = weights.iter().find(|w| !w.is_finite() || **w < 0.0) {
            return Err(Error::InvalidProbVector(format!(
                "weight {bad} is negative or not finite"
            )));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > tol::PROBVEC_NORM {
            return Err(Error::InvalidProbVector(format!(
                "weights sum to {total}, not 1"
            )));
        }
        Ok(ProbVector { weights })
    }

    /// Normalizes an arbitrary nonnegative weight list.
    pub fn normalized(weights: Vec<f64>) -> Result<Self> {
        if let Some(bad) = weights.iter().find(|w| !w.is_finite() || **w < 0.0) {
            return Err(Error::InvalidProbVector(format!(
                "weight {bad} is negative or not finite"
            )));
        }
        let total: f64 = weights.iter().sum();
        if total <= 0.0 {
            return Err(Error::InvalidProbVector(
                "weights sum to zero; cannot normalize".into(),
            ));
        }
        Self::new(weights.iter().map(|w| w / total).collect())
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    /// Number of effectively nonzero entries; weights at or below 1e-15
    /// count as exact zeros.
    pub fn support_len(&self) -> usize {
        self.weights
            .iter()
            .filter(|&&w| w > tol::SUPPORT_EPS)
            .count()
    }
}

impl TryFrom<Vec<f64>> for ProbVector {
    type Error = Error;
    fn try_from(v: Vec<f64>) -> Result<Self> {
        ProbVector::new(v)
    }
}

impl From<ProbVector> for Vec<f64> {
    fn from(p: ProbVector) -> Vec<f64> {
        p.weights
    }
}

/// Power-sum polynomial of shape `shape` evaluated at `alpha`: the
/// product over parts `l` of `Σ_i alpha_i^l`.
pub fn power_sum(shape: &Partition, alpha: &[f64]) -> f64 {
    shape
        .parts()
        .iter()
        .map(|&l| alpha.iter().map(|a| a.powi(l as i32)).sum::<f64>())
        .product()
}

/// Schur polynomial by tableau weight enumeration: the sum over
/// semistandard tableaux of shape `shape` with entries in `1..=len(alpha)`
/// of the product of `alpha` over entries.
pub fn schur_poly_tableau(shape: &Partition, alpha: &[f64]) -> f64 {
    if shape.is_empty() {
        return 1.0;
    }
    if shape.len() > alpha.len() {
        return 0.0;
    }
    let cur = vec![0usize; shape.len()];
    weighted_strips(shape.parts(), alpha, 0, &cur)
}

fn weighted_strips(shape: &[usize], alpha: &[f64], v: usize, cur: &[usize]) -> f64 {
    let placed: usize = cur.iter().sum();
    let total: usize = shape.iter().sum();
    if v == alpha.len() {
        return if placed == total { 1.0 } else { 0.0 };
    }
    let mut acc = 0.0;
    for boxes in 0..=(total - placed) {
        let weight = alpha[v].powi(boxes as i32);
        if weight == 0.0 && boxes > 0 {
            continue;
        }
        for grown in horizontal_strip_growths(shape, cur, boxes) {
            acc += weight * weighted_strips(shape, alpha, v + 1, &grown);
        }
    }
    acc
}

/// Schur polynomial by character expansion: the class-weighted sum of
/// power sums, `(1/n!) Σ_classes size · χ_shape(ct) · p_ct(alpha)`.
pub fn schur_poly_character(shape: &Partition, alpha: &[f64]) -> Result<f64> {
    let n = shape.n();
    let mut acc = 0.0;
    for (ct, size) in conjugacy_classes(n) {
        let chi = crate::symgroup::character(shape, &ct)?;
        acc += size as f64 * chi as f64 * power_sum(&ct, alpha);
    }
    Ok(acc / factorial(n) as f64)
}

/// Schur polynomial of `shape` at `alpha`. Both algorithms run on every
/// call and must agree within 1e-10 (scaled by the value's magnitude);
/// disagreement is a bug and panics. The tableau value is returned.
///
/// The internal cross-check uses character tables, so totals are capped
/// at 10.
pub fn schur_poly(shape: &Partition, alpha: &[f64]) -> f64 {
    let tableau = schur_poly_tableau(shape, alpha);
    let character = schur_poly_character(shape, alpha)
        .expect("schur_poly supports partitions of at most 10");
    let gap = (tableau - character).abs();
    assert!(
        gap <= tol::DUAL_ROUTE * tableau.abs().max(1.0),
        "schur algorithms disagree for {shape} at {alpha:?}: \
         tableau {tableau} vs character {character}"
    );
    tableau
}

/// The distribution over partitions of `n` induced by `n` copies of a
/// source with spectrum `alpha`: shape `λ` has probability
/// `dim_standard(λ) · schur_poly(λ, alpha)`.
#[derive(Clone, Debug)]
pub struct SchurWeylDistribution {
    n: usize,
    support: BTreeMap<Partition, f64>,
}

impl SchurWeylDistribution {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn probability(&self, shape: &Partition) -> f64 {
        self.support.get(shape).copied().unwrap_or(0.0)
    }

    /// Support in canonical partition order.
    pub fn support(&self) -> impl Iterator<Item = (&Partition, f64)> {
        self.support.iter().map(|(k, &v)| (k, v))
    }
}

impl Serialize for SchurWeylDistribution {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut map = s.serialize_map(Some(self.support.len()))?;
        for (shape, prob) in &self.support {
            let key = serde_json::to_string(shape).map_err(serde::ser::Error::custom)?;
            map.serialize_entry(&key, prob)?;
        }
        map.end()
    }
}

/// Builds the distribution for `n` copies of spectrum `alpha`. The
/// support is restricted to shapes with at most `alpha.support_len()`
/// rows; total probability must come out 1 within 1e-10 or the call
/// reports an internal-consistency fault.
pub fn sw_distribution(n: usize, alpha: &ProbVector) -> Result<SchurWeylDistribution> {
    if n == 0 {
        return Err(Error::OutOfRange("need at least one copy, got n=0".into()));
    }
    let rows = alpha.support_len();
    let mut support = BTreeMap::new();
    let mut total = 0.0;
    for shape in enumerate_partitions(n, rows.max(1)) {
        let p = dim_standard(&shape) as f64 * schur_poly(&shape, alpha.weights());
        if p < -tol::PROB_EXCURSION {
            return Err(Error::InternalFault(format!(
                "negative probability {p} at shape {shape}"
            )));
        }
        total += p;
        support.insert(shape, p.max(0.0));
    }
    if (total - 1.0).abs() > tol::DIST_NORM {
        return Err(Error::InternalFault(format!(
            "shape probabilities sum to {total}, not 1"
        )));
    }
    Ok(SchurWeylDistribution { n, support })
}

/// Draws `count` i.i.d. shapes from `dist` by inverse CDF over the
/// canonically ordered support.
pub fn sw_sample<R: Rng + ?Sized>(
    rng: &mut R,
    dist: &SchurWeylDistribution,
    count: usize,
) -> Vec<Partition> {
    let cumulative: Vec<(&Partition, f64)> = dist
        .support
        .iter()
        .scan(0.0, |acc, (shape, &p)| {
            *acc += p;
            Some((shape, *acc))
        })
        .collect();
    (0..count)
        .map(|_| {
            let u: f64 = rng.random();
            cumulative
                .iter()
                .find(|(_, c)| u < *c)
                .map(|(shape, _)| (*shape).clone())
                // Cumulative can fall short of u by rounding; take the top.
                .unwrap_or_else(|| cumulative.last().expect("nonempty support").0.clone())
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seeding::substream;

    fn p(parts: &[usize]) -> Partition {
        Partition::new(parts.to_vec()).unwrap()
    }

    fn random_simplex<R: Rng>(rng: &mut R, len: usize) -> ProbVector {
        let raw: Vec<f64> = (0..len).map(|_| rng.random::<f64>() + 1e-3).collect();
        ProbVector::normalized(raw).unwrap()
    }

    #[test]
    fn prob_vector_validation() {
        assert!(ProbVector::new(vec![0.5, 0.5]).is_ok());
        assert!(ProbVector::new(vec![0.5, 0.6]).is_err());
        assert!(ProbVector::new(vec![1.5, -0.5]).is_err());
        assert!(ProbVector::new(vec![]).is_err());
        assert!(ProbVector::normalized(vec![2.0, 6.0]).is_ok());
        assert!(ProbVector::normalized(vec![0.0, 0.0]).is_err());
        let pv = ProbVector::new(vec![1.0 - 1e-16, 1e-16]).unwrap();
        assert_eq!(pv.support_len(), 1);
    }

    #[test]
    fn power_sum_examples() {
        let half = [0.5, 0.5];
        assert!((power_sum(&p(&[1, 1]), &half) - 1.0).abs() < 1e-15);
        assert!((power_sum(&p(&[2]), &half) - 0.5).abs() < 1e-15);
        assert!((power_sum(&p(&[2, 1]), &half) - 0.5).abs() < 1e-15);
        assert_eq!(power_sum(&Partition::empty(), &half), 1.0);
    }

    #[test]
    fn schur_examples() {
        let point = [1.0, 0.0, 0.0];
        assert!((schur_poly(&p(&[4]), &point) - 1.0).abs() < 1e-15);
        assert!(schur_poly(&p(&[3, 1]), &point).abs() < 1e-15);
        assert!((schur_poly(&p(&[2]), &[0.5, 0.5]) - 0.75).abs() < 1e-12);
        assert!((schur_poly(&p(&[1, 1]), &[0.3, 0.7]) - 0.21).abs() < 1e-12);
        assert_eq!(schur_poly(&Partition::empty(), &[0.5, 0.5]), 1.0);
    }

    #[test]
    fn schur_routes_agree_on_random_spectra() {
        let mut rng = substream(23, 0);
        for trial in 0..100 {
            let n = 1 + (trial % 6);
            let len = 1 + (trial % 5);
            let alpha = random_simplex(&mut rng, len);
            for shape in enumerate_partitions(n, n) {
                let a = schur_poly_tableau(&shape, alpha.weights());
                let b = schur_poly_character(&shape, alpha.weights()).unwrap();
                assert!(
                    (a - b).abs() <= 1e-10 * a.abs().max(1.0),
                    "shape={shape} alpha={:?}: {a} vs {b}",
                    alpha.weights()
                );
            }
        }
    }

    #[test]
    fn schur_vanishes_beyond_support() {
        let mut rng = substream(23, 1);
        for _ in 0..20 {
            let alpha = random_simplex(&mut rng, 2);
            let mut padded = alpha.weights().to_vec();
            padded.push(0.0);
            for shape in [p(&[1, 1, 1]), p(&[2, 1, 1]), p(&[1, 1, 1, 1])] {
                assert!(schur_poly(&shape, &padded).abs() < 1e-12, "shape={shape}");
            }
        }
    }

    #[test]
    fn schur_is_symmetric_in_the_spectrum() {
        let mut rng = substream(23, 2);
        for _ in 0..20 {
            let alpha = random_simplex(&mut rng, 4);
            let mut shuffled = alpha.weights().to_vec();
            // Fisher-Yates with the test generator.
            for i in (1..shuffled.len()).rev() {
                let j = rng.random_range(0..=i);
                shuffled.swap(i, j);
            }
            for n in 1..=4 {
                for shape in enumerate_partitions(n, n) {
                    let a = schur_poly(&shape, alpha.weights());
                    let b = schur_poly(&shape, &shuffled);
                    assert!((a - b).abs() < 1e-12, "shape={shape}");
                }
            }
        }
    }

    #[test]
    fn sw_distribution_examples() {
        let point = ProbVector::new(vec![1.0, 0.0]).unwrap();
        let d = sw_distribution(3, &point).unwrap();
        assert!((d.probability(&p(&[3])) - 1.0).abs() < 1e-12);
        assert_eq!(d.probability(&p(&[2, 1])), 0.0);

        let half = ProbVector::new(vec![0.5, 0.5]).unwrap();
        let d = sw_distribution(2, &half).unwrap();
        assert!((d.probability(&p(&[2])) - 0.75).abs() < 1e-12);
        assert!((d.probability(&p(&[1, 1])) - 0.25).abs() < 1e-12);

        let any = ProbVector::new(vec![0.2, 0.8]).unwrap();
        let d = sw_distribution(1, &any).unwrap();
        assert!((d.probability(&p(&[1])) - 1.0).abs() < 1e-12);

        assert!(sw_distribution(0, &half).is_err());
    }

    #[test]
    fn sw_distribution_normalizes_for_random_spectra() {
        let mut rng = substream(23, 3);
        for n in 1..=8 {
            let alpha = random_simplex(&mut rng, 3);
            let d = sw_distribution(n, &alpha).unwrap();
            let total: f64 = d.support().map(|(_, p)| p).sum();
            assert!((total - 1.0).abs() < 1e-10, "n={n} total={total}");
            for (shape, prob) in d.support() {
                assert!(prob >= 0.0);
                assert!(shape.len() <= alpha.support_len());
            }
        }
    }

    #[test]
    fn sampling_follows_the_distribution() {
        let mut rng = substream(23, 4);
        let point = ProbVector::new(vec![1.0]).unwrap();
        let d = sw_distribution(4, &point).unwrap();
        for shape in sw_sample(&mut rng, &d, 50) {
            assert_eq!(shape, p(&[4]));
        }

        let half = ProbVector::new(vec![0.5, 0.5]).unwrap();
        let d = sw_distribution(2, &half).unwrap();
        assert!(sw_sample(&mut rng, &d, 0).is_empty());
        let draws = sw_sample(&mut rng, &d, 100_000);
        let hits = draws.iter().filter(|s| **s == p(&[2])).count() as f64;
        let freq = hits / 100_000.0;
        // 3σ binomial band around 0.75.
        assert!((freq - 0.75).abs() < 0.0042, "freq={freq}");
    }

    #[test]
    fn sampling_is_reproducible() {
        let half = ProbVector::new(vec![0.4, 0.6]).unwrap();
        let d = sw_distribution(3, &half).unwrap();
        let a = sw_sample(&mut substream(7, 9), &d, 25);
        let b = sw_sample(&mut substream(7, 9), &d, 25);
        assert_eq!(a, b);
    }

    #[test]
    fn distribution_serializes_as_a_keyed_map() {
        let half = ProbVector::new(vec![0.5, 0.5]).unwrap();
        let d = sw_distribution(2, &half).unwrap();
        let json = serde_json::to_value(&d).unwrap();
        let map = json.as_object().unwrap();
        assert_eq!(map.len(), 2);
        assert!((map["[2]"].as_f64().unwrap() - 0.75).abs() < 1e-12);
        assert!((map["[1,1]"].as_f64().unwrap() - 0.25).abs() < 1e-12);
    }

    #[test]
    fn prob_vector_roundtrips_as_plain_array() {
        let pv = ProbVector::new(vec![0.25, 0.75]).unwrap();
        let json = serde_json::to_string(&pv).unwrap();
        assert_eq!(json, "[0.25,0.75]");
        let back: ProbVector = serde_json::from_str(&json).unwrap();
        assert_eq!(back, pv);
        assert!(serde_json::from_str::<ProbVector>("[0.5,0.9]").is_err());
    }
}
