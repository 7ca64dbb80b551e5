//! Cross-module consistency checks that exercise several independent
//! computation routes against each other on randomized inputs.

use bunchkit::bunching::{
    aux_irrep_distribution, bunch_partially_labelled_direct, bunch_probability,
    ExperimentConfig, StateKind, StateSpec,
};
use bunchkit::fock_oracle::{aux_state, extract_q, oracle_bunch_perm_sum, AuxState};
use bunchkit::linalg::{haar_unitary, random_psd, ComplexMatrix, ModeSubset};
use bunchkit::partitions::{partitions_of, Partition};
use bunchkit::seeding::substream;
use bunchkit::symfunc::ProbVector;
use itertools::Itertools;
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// Reorders the base-`l` digits of `idx` (big-endian, `n` digits) by `perm`.
fn permute_index(idx: usize, l: usize, n: usize, perm: &[usize]) -> usize {
    let mut digits = vec![0usize; n];
    let mut rem = idx;
    for x in (0..n).rev() {
        digits[x] = rem % l;
        rem /= l;
    }
    (0..n).fold(0, |acc, x| acc * l + digits[perm[x]])
}

/// Averages `h` over all simultaneous row/column digit permutations.
fn exchange_average(h: &DMatrix<Complex64>, l: usize, n: usize) -> DMatrix<Complex64> {
    let dim = h.nrows();
    let mut out = DMatrix::<Complex64>::zeros(dim, dim);
    let mut count = 0usize;
    for perm in (0..n).permutations(n) {
        count += 1;
        for r in 0..dim {
            for c in 0..dim {
                out[(permute_index(r, l, n, &perm), permute_index(c, l, n, &perm))] += h[(r, c)];
            }
        }
    }
    out.unscale(count as f64)
}

fn random_spectrum(rng: &mut ChaCha8Rng, len: usize) -> ProbVector {
    ProbVector::normalized((0..len).map(|_| rng.random::<f64>() + 1e-3).collect()).unwrap()
}

fn random_subset(rng: &mut ChaCha8Rng, m: usize) -> ModeSubset {
    let size = rng.random_range(1..=m);
    let mut modes: Vec<usize> = (0..m).collect();
    modes.shuffle(rng);
    modes.truncate(size);
    ModeSubset::new(modes, m).unwrap()
}

#[test]
fn labelled_routes_agree_for_all_patterns_up_to_four_particles() {
    for n in 2..=4usize {
        let m = n + 1;
        let sites: Vec<usize> = (0..n).collect();
        for draw in 0..20u64 {
            let mut rng = substream(2001, (n as u64) * 100 + draw);
            let u = haar_unitary(&mut rng, m);
            let subset = random_subset(&mut rng, m);
            let cfg = ExperimentConfig::new(m, n, n, subset, draw).unwrap();
            for pattern in partitions_of(n) {
                let spec = StateSpec::new(
                    StateKind::PartiallyLabelled {
                        pattern: pattern.clone(),
                    },
                    sites.clone(),
                    n,
                )
                .unwrap();
                let via_weights = bunch_probability(&u, &cfg, &spec).unwrap().raw();
                let direct = bunch_partially_labelled_direct(&u, &cfg, &sites, &pattern)
                    .unwrap()
                    .raw();
                assert!(
                    (via_weights - direct).abs() < 1e-10,
                    "n={n} draw={draw} pattern={pattern}: {via_weights} vs {direct}"
                );
            }
        }
    }
}

#[test]
fn no_state_bunches_more_than_the_indistinguishable_one() {
    for n in 2..=3usize {
        let m = n + 2;
        let l = n;
        let sites: Vec<usize> = (0..n).collect();
        for draw in 0..15u64 {
            let mut rng = substream(2002, (n as u64) * 100 + draw);
            let u = haar_unitary(&mut rng, m);
            let subset = random_subset(&mut rng, m);
            let cfg = ExperimentConfig::new(m, n, l, subset, draw).unwrap();
            let indist =
                StateSpec::new(StateKind::Indistinguishable, sites.clone(), l).unwrap();
            let ceiling = bunch_probability(&u, &cfg, &indist).unwrap().raw();

            let mut rivals: Vec<StateSpec> = Vec::new();
            for pattern in partitions_of(n) {
                rivals.push(
                    StateSpec::new(
                        StateKind::PartiallyLabelled { pattern },
                        sites.clone(),
                        l,
                    )
                    .unwrap(),
                );
            }
            for shape in partitions_of(n) {
                rivals.push(
                    StateSpec::new(StateKind::PureIrrep { shape }, sites.clone(), l).unwrap(),
                );
            }
            rivals.push(
                StateSpec::new(
                    StateKind::Uniform {
                        spectrum: random_spectrum(&mut rng, l),
                    },
                    sites.clone(),
                    l,
                )
                .unwrap(),
            );
            for spec in &rivals {
                let b = bunch_probability(&u, &cfg, spec).unwrap().raw();
                assert!(
                    b <= ceiling + 1e-9,
                    "n={n} draw={draw} spec={spec:?}: {b} > {ceiling}"
                );
            }
        }
    }
}

/// Any hidden state's bunching probability is the sector-weight mixture
/// of labelled-pattern probabilities: expand the extracted weights of a
/// random density matrix in the basis of labelled-pattern weight vectors
/// and check the same coefficients combine the labelled bunching values
/// into the brute-force answer.
#[test]
fn bunching_is_linear_in_the_sector_weights() {
    for n in 2..=3usize {
        let l = n;
        let m = n + 1;
        let sites: Vec<usize> = (0..n).collect();
        let shapes = partitions_of(n);
        let patterns = shapes.clone();
        let basis = DMatrix::<f64>::from_fn(shapes.len(), patterns.len(), |row, col| {
            let spec = StateSpec::new(
                StateKind::PartiallyLabelled {
                    pattern: patterns[col].clone(),
                },
                sites.clone(),
                l,
            )
            .unwrap();
            aux_irrep_distribution(&spec)
                .unwrap()
                .probability(&shapes[row])
        });
        let lu = basis.lu();
        for draw in 0..10u64 {
            let mut rng = substream(2003, (n as u64) * 100 + draw);
            let dim = l.pow(n as u32);
            let raw = random_psd(&mut rng, dim, 1 + (draw as usize) % dim).unwrap();
            let trace = raw.trace().re;
            let h = AuxState::new(
                n,
                l,
                ComplexMatrix::from_dmatrix(raw.inner().scale(1.0 / trace)).unwrap(),
            )
            .unwrap();
            let q = extract_q(&h).unwrap();
            let rhs = DVector::<f64>::from_fn(shapes.len(), |row, _| q.probability(&shapes[row]));
            let coeffs = lu.solve(&rhs).expect("pattern weight vectors span");

            let u = haar_unitary(&mut rng, m);
            let subset = random_subset(&mut rng, m);
            let cfg = ExperimentConfig::new(m, n, l, subset, draw).unwrap();
            let direct = oracle_bunch_perm_sum(&u, &cfg, &sites, &h).unwrap();

            // Only the exchange-invariant part of the hidden state is
            // observable: explicitly averaging it must change nothing.
            let averaged = AuxState::new(
                n,
                l,
                ComplexMatrix::from_dmatrix(exchange_average(h.matrix().inner(), l, n)).unwrap(),
            )
            .unwrap();
            let direct_avg = oracle_bunch_perm_sum(&u, &cfg, &sites, &averaged).unwrap();
            assert!(
                (direct - direct_avg).abs() < 1e-12,
                "n={n} draw={draw}: raw {direct} vs averaged {direct_avg}"
            );

            let combined: f64 = patterns
                .iter()
                .zip(coeffs.iter())
                .map(|(pattern, &c)| {
                    c * bunch_partially_labelled_direct(&u, &cfg, &sites, pattern)
                        .unwrap()
                        .raw()
                })
                .sum();
            assert!(
                (direct - combined).abs() < 1e-8,
                "n={n} draw={draw}: {direct} vs {combined}"
            );
        }
    }
}

#[test]
fn extracted_weights_match_closed_forms_for_every_kind_and_dimension() {
    for l in 1..=3usize {
        for n in 1..=3usize {
            let sites: Vec<usize> = (0..n).collect();
            let mut specs =
                vec![StateSpec::new(StateKind::Indistinguishable, sites.clone(), l).unwrap()];
            for pattern in partitions_of(n) {
                if pattern.len() <= l {
                    specs.push(
                        StateSpec::new(
                            StateKind::PartiallyLabelled { pattern },
                            sites.clone(),
                            l,
                        )
                        .unwrap(),
                    );
                }
            }
            if l >= n {
                for shape in partitions_of(n) {
                    specs.push(
                        StateSpec::new(StateKind::PureIrrep { shape }, sites.clone(), l)
                            .unwrap(),
                    );
                }
            }
            let mut rng = substream(2004, (l * 10 + n) as u64);
            specs.push(
                StateSpec::new(
                    StateKind::Uniform {
                        spectrum: random_spectrum(&mut rng, l),
                    },
                    sites.clone(),
                    l,
                )
                .unwrap(),
            );
            for spec in &specs {
                let closed = aux_irrep_distribution(spec).unwrap();
                let measured = extract_q(&aux_state(spec).unwrap()).unwrap();
                assert!(
                    closed.max_abs_diff(&measured) < 1e-10,
                    "l={l} n={n} spec={spec:?}"
                );
            }
        }
    }
}

#[test]
fn enlarging_the_subset_never_lowers_bunching() {
    let n = 3;
    let m = 6;
    let l = 3;
    let sites: Vec<usize> = vec![0, 2, 4];
    for draw in 0..20u64 {
        let mut rng = substream(2005, draw);
        let u = haar_unitary(&mut rng, m);
        let small = random_subset(&mut rng, m);
        let mut grown: Vec<usize> = small.indices().to_vec();
        for mode in 0..m {
            if !grown.contains(&mode) && rng.random::<f64>() < 0.5 {
                grown.push(mode);
            }
        }
        grown.sort_unstable();
        let large = ModeSubset::new(grown, m).unwrap();
        let spec = StateSpec::new(
            StateKind::Uniform {
                spectrum: random_spectrum(&mut rng, l),
            },
            sites.clone(),
            l,
        )
        .unwrap();
        let cfg_small = ExperimentConfig::new(m, n, l, small, draw).unwrap();
        let cfg_large = ExperimentConfig::new(m, n, l, large, draw).unwrap();
        let b_small = bunch_probability(&u, &cfg_small, &spec).unwrap().raw();
        let b_large = bunch_probability(&u, &cfg_large, &spec).unwrap().raw();
        assert!(
            b_small <= b_large + 1e-10,
            "draw={draw}: {b_small} > {b_large}"
        );
    }
}

#[test]
fn closed_route_is_invariant_under_site_reordering() {
    let m = 4;
    let l = 3;
    let u = haar_unitary(&mut substream(2006, 0), m);
    let cfg =
        ExperimentConfig::new(m, 3, l, ModeSubset::new(vec![0, 3], m).unwrap(), 0).unwrap();
    let orders: [&[usize]; 3] = [&[0, 1, 2], &[2, 0, 1], &[1, 2, 0]];
    for kind_idx in 0..2 {
        let mut values = Vec::new();
        for sites in orders {
            let kind = if kind_idx == 0 {
                StateKind::PartiallyLabelled {
                    pattern: Partition::new(vec![2, 1]).unwrap(),
                }
            } else {
                StateKind::Uniform {
                    spectrum: ProbVector::new(vec![0.5, 0.3, 0.2]).unwrap(),
                }
            };
            let spec = StateSpec::new(kind, sites.to_vec(), l).unwrap();
            values.push(bunch_probability(&u, &cfg, &spec).unwrap().raw());
        }
        for w in values.windows(2) {
            assert!((w[0] - w[1]).abs() < 1e-12, "kind={kind_idx}: {values:?}");
        }
    }
}
