//! Numerical tolerances and size caps used across the crate.
//!
//! Every floating-point comparison in the library and its test suite goes
//! through one of these constants so that the accuracy contract lives in a
//! single place. All matrices handled here are O(1)-scaled, so the
//! tolerances are absolute unless a name says otherwise.

/// Per-entry defect allowed in `U†U − I` for a matrix to count as unitary.
pub const UNITARITY: f64 = 1e-12;

/// Per-entry defect allowed in `A − A†` for a matrix to count as Hermitian.
pub const HERMITICITY: f64 = 1e-14;

/// Most negative eigenvalue tolerated in a positive-semidefinite matrix.
pub const PSD_EIG_FLOOR: f64 = -1e-12;

/// Agreement required between two exact closed-form routes to the same
/// quantity (e.g. the two Schur-polynomial algorithms, or the Kostka route
/// against the ordered-set-partition route).
pub const DUAL_ROUTE: f64 = 1e-10;

/// Agreement required between a closed form and the brute-force Fock
/// simulation.
pub const ORACLE: f64 = 1e-9;

/// Agreement required between the two independent brute-force routes
/// (dense first-quantized vs permutation sum).
pub const DUAL_ORACLE: f64 = 1e-10;

/// Tolerance on two-photon beamsplitter golden values.
pub const GOLDEN: f64 = 1e-12;

/// Imaginary residue allowed when a quantity is real by symmetry.
pub const IMAG_RESIDUE: f64 = 1e-10;

/// Allowed excursion of a probability outside [0, 1] before clamping; a
/// larger excursion is treated as an internal fault.
pub const PROB_EXCURSION: f64 = 1e-10;

/// Normalization slack for probability distributions assembled from
/// floating-point weights.
pub const DIST_NORM: f64 = 1e-10;

/// Normalization slack for user-supplied probability vectors.
pub const PROBVEC_NORM: f64 = 1e-12;

/// Entries of a probability vector at or below this threshold are treated
/// as exact zeros when computing support sizes.
pub const SUPPORT_EPS: f64 = 1e-15;

/// Slack when checking monotonicity of mean bunching under majorization.
pub const MEAN_MONOTONE_SLACK: f64 = 1e-12;

/// Slack when checking monotonicity under label-pattern refinement.
pub const REFINEMENT_SLACK: f64 = 1e-9;

/// Excess of a normalized immanant over the permanent that counts as a
/// candidate counterexample in the dominance scan.
pub const DOMINANCE_SLACK: f64 = 1e-9;

/// Slack when checking strict growth of the temperature curve.
pub const THERMO_MONOTONE_SLACK: f64 = 1e-12;

/// Residual |curve(beta) − target| accepted by the temperature inversion.
pub const INVERT_RESIDUAL: f64 = 1e-12;

/// Relative error allowed in a temperature round trip.
pub const INVERT_ROUNDTRIP_REL: f64 = 1e-6;

/// Tolerance used when comparing real vectors for majorization.
pub const MAJORIZATION: f64 = 1e-12;

/// Hermiticity defect allowed in a user-supplied hidden-label state.
pub const AUX_HERMITICITY: f64 = 1e-12;

/// Deviation from unit trace allowed in a hidden-label state.
pub const AUX_TRACE: f64 = 1e-10;

/// Most negative eigenvalue tolerated in a hidden-label state.
pub const AUX_PSD_FLOOR: f64 = -1e-10;

/// Largest matrix size accepted by the Ryser permanent (2^n terms).
pub const PERMANENT_CAP: usize = 20;

/// Largest matrix size accepted by the immanant permutation sum (n! terms).
pub const IMMANANT_CAP: usize = 9;

/// Largest n for which a full character table is built.
pub const CHAR_TABLE_CAP: usize = 10;

/// Largest n for the permutation-sum brute-force routes (n! terms).
pub const PERM_SUM_CAP: usize = 8;

/// Largest dense dimension (L^n or (m·L)^n) accepted by the brute-force
/// Fock simulation.
pub const DENSE_DIM_CAP: usize = 4096;

/// Largest total accepted when a factorial must stay exact in u128.
pub const FACTORIAL_CAP: usize = 20;
