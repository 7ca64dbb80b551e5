//! Exact bunching statistics of partially distinguishable bosons in
//! linear interferometers.
//!
//! The crate computes the probability that all `n` photons of a
//! partially distinguishable input exit an interferometer inside a
//! chosen subset of output modes, exactly, via symmetric-group
//! representation theory. It also provides the Haar average of that
//! probability in closed form, a brute-force Fock-space oracle used to
//! validate every fast route, numerical scanners for two open
//! monotonicity questions, and a temperature estimation pipeline built
//! on the mean-bunching curve.
//!
//! ```
//! use bunchkit::{
//!     bunch_probability, haar_unitary, ExperimentConfig, ModeSubset,
//!     StateKind, StateSpec,
//! };
//! use bunchkit::seeding::substream;
//!
//! fn main() -> bunchkit::Result<()> {
//!     // 2 photons into a Haar-random 4-mode interferometer.
//!     let u = haar_unitary(&mut substream(7, 0), 4);
//!     let subset = ModeSubset::parse_one_based("1-2", 4)?;
//!     let cfg = ExperimentConfig::new(4, 2, 2, subset, 7)?;
//!
//!     // Photons at sites 1 and 2 carrying orthogonal internal labels.
//!     let spec = StateSpec::new(
//!         StateKind::PartiallyLabelled { pattern: "1,1".parse()? },
//!         vec![0, 1],
//!         2,
//!     )?;
//!
//!     let b = bunch_probability(&u, &cfg, &spec)?;
//!     assert!(b.probability() > 0.0 && b.probability() < 1.0);
//!     Ok(())
//! }
//! ```

pub mod bunching;
pub mod error;
pub mod fock_oracle;
pub mod linalg;
pub mod partitions;
pub mod seeding;
pub mod symfunc;
pub mod symgroup;
pub mod thermometry;
pub mod tol;

pub use bunching::{
    aux_irrep_distribution, bunch_partially_labelled_direct, bunch_probability,
    mean_bunch_closed, mean_bunch_mc, refinement_monotonicity_check, subset_avg_estimator,
    BunchValue, ExperimentConfig, IrrepDistribution, StateKind, StateSpec,
};
pub use error::{Error, Result};
pub use fock_oracle::{
    aux_state, enumerate_occupations, extract_q, oracle_bunch, oracle_bunch_perm_sum,
    oracle_visible_distribution, sample_outcomes, AuxState, Occupation, VisibleDistribution,
};
pub use linalg::{gram_matrix, haar_unitary, normalized_immanant, permanent, ComplexMatrix, ModeSubset};
pub use partitions::Partition;
pub use symfunc::ProbVector;
pub use thermometry::{gibbs, invert_temperature, thermo_curve, EnergySpectrum, ThermoCurve};
