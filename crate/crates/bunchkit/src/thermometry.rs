//! Temperature estimation from mean bunching.
//!
//! A thermal single-particle spectrum at inverse temperature β induces a
//! Gibbs label distribution; the Haar-averaged bunching probability is
//! strictly increasing in β (colder gas, more indistinguishable, more
//! bunching), so measuring it fixes the temperature. This module builds
//! the β ↦ mean-bunching curve and inverts it by bisection.

use serde::Serialize;

use crate::bunching::mean_bunch_closed;
use crate::error::{Error, Result};
use crate::symfunc::ProbVector;
use crate::tol;

/// Single-particle energy levels, nondecreasing with the ground state
/// pinned at exactly 0 (only gaps are physical).
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EnergySpectrum {
    levels: Vec<f64>,
}

impl EnergySpectrum {
    pub fn new(levels: Vec<f64>) -> Result<Self> {
        if levels.is_empty() {
            return Err(Error::InvalidConfig("spectrum has no levels".into()));
        }
        if levels.iter().any(|e| !e.is_finite()) {
            return Err(Error::InvalidConfig("spectrum has non-finite levels".into()));
        }
        if levels[0] != 0.0 {
            return Err(Error::InvalidConfig(format!(
                "ground state must sit at exactly 0, got {}",
                levels[0]
            )));
        }
        if levels.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::InvalidConfig(
                "levels must be nondecreasing".into(),
            ));
        }
        Ok(EnergySpectrum { levels })
    }

    pub fn levels(&self) -> &[f64] {
        &self.levels
    }

    pub fn len(&self) -> usize {
        self.levels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.levels.is_empty()
    }

    /// True when all levels coincide; the Gibbs state is then uniform at
    /// every temperature and the bunching curve carries no information.
    pub fn is_flat(&self) -> bool {
        *self.levels.last().expect("nonempty") == 0.0
    }
}

/// Gibbs label distribution at inverse temperature `beta`. Weights are
/// computed with the ground state subtracted, so no overflow occurs for
/// any β ≥ 0.
pub fn gibbs(spectrum: &EnergySpectrum, beta: f64) -> Result<ProbVector> {
    if !beta.is_finite() || beta < 0.0 {
        return Err(Error::OutOfRange(format!(
            "inverse temperature must be finite and >= 0, got {beta}; \
             use the cold limit for beta = infinity"
        )));
    }
    let weights: Vec<f64> = spectrum.levels().iter().map(|e| (-beta * e).exp()).collect();
    let total: f64 = weights.iter().sum();
    ProbVector::new(weights.into_iter().map(|w| w / total).collect())
}

/// β → ∞ limit of the Gibbs distribution: uniform over the zero-energy
/// levels.
pub fn gibbs_cold_limit(spectrum: &EnergySpectrum) -> ProbVector {
    let ground: Vec<f64> = spectrum
        .levels()
        .iter()
        .map(|&e| if e == 0.0 { 1.0 } else { 0.0 })
        .collect();
    let total: f64 = ground.iter().sum();
    ProbVector::new(ground.into_iter().map(|w| w / total).collect())
        .expect("ground-state indicator normalizes")
}

/// Mean bunching as a function of inverse temperature, on a fixed grid.
#[derive(Clone, Debug, Serialize)]
pub struct ThermoCurve {
    pub n: usize,
    pub m: usize,
    pub k: usize,
    pub betas: Vec<f64>,
    pub values: Vec<f64>,
    /// False when the curve is constant (single particle or flat
    /// spectrum) and carries no temperature information.
    pub invertible: bool,
}

impl ThermoCurve {
    /// Two-column CSV with a `beta,mean_bunching` header.
    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["beta", "mean_bunching"])
            .map_err(|e| Error::InternalFault(format!("csv: {e}")))?;
        for (b, v) in self.betas.iter().zip(&self.values) {
            w.write_record([b.to_string(), v.to_string()])
                .map_err(|e| Error::InternalFault(format!("csv: {e}")))?;
        }
        let bytes = w
            .into_inner()
            .map_err(|e| Error::InternalFault(format!("csv: {e}")))?;
        String::from_utf8(bytes).map_err(|e| Error::InternalFault(format!("csv: {e}")))
    }
}

fn mean_at(spectrum: &EnergySpectrum, n: usize, m: usize, k: usize, beta: f64) -> Result<f64> {
    mean_bunch_closed(n, m, k, &gibbs(spectrum, beta)?)
}

/// Evaluates the mean-bunching curve on `betas` (strictly increasing).
/// A decrease anywhere along the curve beyond tolerance is an internal
/// fault: the curve is provably nondecreasing in β.
pub fn thermo_curve(
    spectrum: &EnergySpectrum,
    n: usize,
    m: usize,
    k: usize,
    betas: &[f64],
) -> Result<ThermoCurve> {
    if betas.is_empty() {
        return Err(Error::InvalidConfig("empty grid of inverse temperatures".into()));
    }
    if betas.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidConfig(
            "inverse temperatures must be strictly increasing".into(),
        ));
    }
    if spectrum.len() < n {
        return Err(Error::OutOfRange(format!(
            "spectrum has {} levels but the gas has {n} particles",
            spectrum.len()
        )));
    }
    let values = betas
        .iter()
        .map(|&b| mean_at(spectrum, n, m, k, b))
        .collect::<Result<Vec<f64>>>()?;
    for (w, pair) in values.windows(2).enumerate() {
        if pair[1] <= pair[0] - tol::THERMO_MONOTONE_SLACK {
            return Err(Error::InternalFault(format!(
                "mean bunching decreased from {} to {} between beta {} and {}",
                pair[0],
                pair[1],
                betas[w],
                betas[w + 1]
            )));
        }
    }
    Ok(ThermoCurve {
        n,
        m,
        k,
        betas: betas.to_vec(),
        values,
        invertible: n >= 2 && !spectrum.is_flat(),
    })
}

pub const DEFAULT_BETA_MAX: f64 = 50.0;

/// Recovers the inverse temperature from a measured mean bunching value
/// by bisection on [0, `beta_max`]. The curve is strictly increasing, so
/// the root is unique; targets outside the reachable range are rejected
/// with the bracketing values.
pub fn invert_temperature(
    spectrum: &EnergySpectrum,
    n: usize,
    m: usize,
    k: usize,
    target: f64,
    beta_max: Option<f64>,
) -> Result<f64> {
    let beta_max = beta_max.unwrap_or(DEFAULT_BETA_MAX);
    if !beta_max.is_finite() || beta_max <= 0.0 {
        return Err(Error::OutOfRange(format!(
            "search bound must be finite and positive, got {beta_max}"
        )));
    }
    if n < 2 {
        return Err(Error::Degenerate(
            "a single particle bunches with probability k/m at every temperature; \
             the curve is constant and cannot be inverted"
                .into(),
        ));
    }
    if spectrum.is_flat() {
        return Err(Error::Degenerate(
            "all levels coincide, so the label distribution is uniform at every \
             temperature and the curve is constant"
                .into(),
        ));
    }
    let y_lo = mean_at(spectrum, n, m, k, 0.0)?;
    let y_hi = mean_at(spectrum, n, m, k, beta_max)?;
    if y_hi - y_lo <= 1e-9 {
        return Err(Error::Degenerate(format!(
            "mean bunching varies by only {} over beta in [0, {beta_max}]; the \
             curve is too flat to invert (with k = m it is identically 1)",
            y_hi - y_lo
        )));
    }
    if target < y_lo - tol::INVERT_RESIDUAL || target > y_hi + tol::INVERT_RESIDUAL {
        return Err(Error::OutOfRange(format!(
            "target {target} is outside the reachable range [{y_lo}, {y_hi}] for \
             beta in [0, {beta_max}]; the curve flattens exponentially, so raising \
             beta_max barely extends the upper end"
        )));
    }
    let target = target.clamp(y_lo, y_hi);
    let mut lo = 0.0f64;
    let mut hi = beta_max;
    for _ in 0..200 {
        if hi - lo <= 1e-14 {
            break;
        }
        let mid = 0.5 * (lo + hi);
        let y = mean_at(spectrum, n, m, k, mid)?;
        if (y - target).abs() <= tol::INVERT_RESIDUAL {
            return Ok(mid);
        }
        if y < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let beta = 0.5 * (lo + hi);
    let residual = (mean_at(spectrum, n, m, k, beta)? - target).abs();
    if residual > tol::INVERT_RESIDUAL {
        return Err(Error::InternalFault(format!(
            "bisection stalled at beta {beta} with residual {residual}"
        )));
    }
    Ok(beta)
}
