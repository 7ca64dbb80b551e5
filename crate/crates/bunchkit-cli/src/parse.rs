//! Turns flag strings into domain values: site lists, state specs,
//! spectra, and interferometer files.

use std::path::Path;

use bunchkit::bunching::{IrrepDistribution, StateKind};
use bunchkit::linalg::ComplexMatrix;
use bunchkit::partitions::Partition;
use bunchkit::symfunc::ProbVector;
use bunchkit::{tol, Error, Result};

/// 1-based comma list such as `1,3` into 0-based indices.
pub fn parse_sites(spec: &str) -> Result<Vec<usize>> {
    spec.split(',')
        .map(|tok| {
            let v: usize = tok.trim().parse().map_err(|_| {
                Error::InvalidConfig(format!("bad site index {tok:?} in {spec:?}"))
            })?;
            if v == 0 {
                return Err(Error::InvalidConfig(
                    "site indices are 1-based; 0 is not a site".into(),
                ));
            }
            Ok(v - 1)
        })
        .collect()
}

/// Comma-separated floats.
pub fn parse_floats(spec: &str) -> Result<Vec<f64>> {
    spec.split(',')
        .map(|tok| {
            tok.trim()
                .parse::<f64>()
                .map_err(|_| Error::InvalidConfig(format!("bad number {tok:?} in {spec:?}")))
        })
        .collect()
}

/// State forms: `indist`, `labelled:2,1`, `irrep:2,1`, `uniform:0.5,0.5`,
/// `q:FILE`. Returns the kind and the smallest hidden dimension it fits in.
pub fn parse_state(spec: &str, normalize: bool) -> Result<(StateKind, usize)> {
    let (head, rest) = match spec.split_once(':') {
        Some((h, r)) => (h, Some(r)),
        None => (spec, None),
    };
    let need = |name: &str| -> Result<&str> {
        rest.filter(|r| !r.trim().is_empty()).ok_or_else(|| {
            Error::InvalidStateSpec(format!("state form {name}: expects an argument, got {spec:?}"))
        })
    };
    match head {
        "indist" => {
            if rest.is_some() {
                return Err(Error::InvalidStateSpec(format!(
                    "state form indist takes no argument, got {spec:?}"
                )));
            }
            Ok((StateKind::Indistinguishable, 1))
        }
        "labelled" => {
            let pattern = Partition::parse_compact(need("labelled")?)?;
            let min_l = pattern.len().max(1);
            Ok((StateKind::PartiallyLabelled { pattern }, min_l))
        }
        "irrep" => {
            let shape = Partition::parse_compact(need("irrep")?)?;
            let min_l = shape.n().max(1);
            Ok((StateKind::PureIrrep { shape }, min_l))
        }
        "uniform" => {
            let raw = parse_floats(need("uniform")?)?;
            let spectrum = if normalize {
                ProbVector::normalized(raw)?
            } else {
                ProbVector::new(raw)?
            };
            let min_l = spectrum.len();
            Ok((StateKind::Uniform { spectrum }, min_l))
        }
        "q" => {
            let path = need("q")?.trim();
            let text = std::fs::read_to_string(path)
                .map_err(|e| Error::InvalidConfig(format!("cannot read {path}: {e}")))?;
            let weights: IrrepDistribution = serde_json::from_str(&text)
                .map_err(|e| Error::InvalidStateSpec(format!("bad weight file {path}: {e}")))?;
            let min_l = weights.n().max(1);
            Ok((StateKind::ExplicitQ { weights }, min_l))
        }
        other => Err(Error::InvalidStateSpec(format!(
            "unknown state form {other:?}; expected indist | labelled:2,1 | irrep:2,1 | \
             uniform:0.5,0.5 | q:FILE"
        ))),
    }
}

/// Loads a unitary from a JSON file shaped `{"rows", "cols", "re", "im"}`
/// and checks it really is one.
pub fn load_unitary(path: &Path) -> Result<ComplexMatrix> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::InvalidConfig(format!("cannot read {}: {e}", path.display())))?;
    let u: ComplexMatrix = serde_json::from_str(&text)
        .map_err(|e| Error::InvalidMatrix(format!("bad matrix file {}: {e}", path.display())))?;
    if !u.is_square() {
        return Err(Error::InvalidMatrix(format!(
            "interferometer must be square, got {}x{}",
            u.rows(),
            u.cols()
        )));
    }
    let defect = u.unitarity_defect();
    if defect > tol::UNITARITY {
        return Err(Error::NotUnitary(format!(
            "defect {defect:.3e} exceeds {:.0e}; supply full double-precision entries",
            tol::UNITARITY
        )));
    }
    Ok(u)
}

/// Echoes 0-based indices back as the 1-based values the user typed.
pub fn one_based(indices: &[usize]) -> Vec<usize> {
    indices.iter().map(|&i| i + 1).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sites_are_one_based() {
        assert_eq!(parse_sites("1,3").unwrap(), vec![0, 2]);
        assert!(parse_sites("0,1").is_err());
        assert!(parse_sites("1,x").is_err());
    }

    #[test]
    fn state_forms_parse() {
        let (kind, l) = parse_state("labelled:2,1", false).unwrap();
        assert!(matches!(kind, StateKind::PartiallyLabelled { .. }));
        assert_eq!(l, 2);
        let (kind, l) = parse_state("uniform:0.25,0.75", false).unwrap();
        assert!(matches!(kind, StateKind::Uniform { .. }));
        assert_eq!(l, 2);
        assert!(parse_state("uniform:0.3,0.3", false).is_err());
        assert!(parse_state("uniform:0.3,0.3", true).is_ok());
        assert!(parse_state("labelled:2,x", false).is_err());
        assert!(parse_state("labelled", false).is_err());
        assert!(parse_state("mystery:1", false).is_err());
    }
}
