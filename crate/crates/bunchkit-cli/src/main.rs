//! `bunchkit` command line: bunching probabilities, interferometer
//! averages, thermometry curves, dominance scans, the brute-force oracle,
//! and the sampling estimator, all with reproducible seeding.
//!
//! Exit codes: 0 success, 2 bad usage or invalid input, 1 broken internal
//! invariant.

mod emit;
mod parse;

use std::panic::AssertUnwindSafe;
use std::path::{Path, PathBuf};

use bunchkit::bunching::{
    aux_irrep_distribution, bunch_probability, lieb_scan, mean_bunch_closed, mean_bunch_mc,
    subset_avg_estimator, ExperimentConfig, StateKind, StateSpec,
};
use bunchkit::fock_oracle::{aux_state, extract_q, oracle_visible_distribution, sample_outcomes};
use bunchkit::linalg::{gram_matrix, haar_unitary, ComplexMatrix, ModeSubset};
use bunchkit::partitions::Partition;
use bunchkit::seeding::substream;
use bunchkit::symfunc::ProbVector;
use bunchkit::thermometry::{invert_temperature, thermo_curve, EnergySpectrum};
use bunchkit::{tol, Error, Result};
use clap::{Args, Parser, Subcommand};
use num_complex::Complex64;
use serde_json::{json, Value};

use emit::emit;

#[derive(Parser)]
#[command(
    name = "bunchkit",
    version,
    about = "Bunching statistics of partially distinguishable bosons in linear interferometers"
)]
struct Cli {
    /// Write the JSON result, with a run manifest, to this file instead of stdout.
    #[arg(long, global = true, value_name = "FILE")]
    out: Option<PathBuf>,

    /// Worker threads for parallel commands. Results never depend on this.
    #[arg(long, global = true, value_name = "N")]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Probability that all particles land in a detector subset.
    Bunch(BunchArgs),
    /// Interferometer-averaged bunching: closed form plus optional Monte Carlo.
    Mean(MeanArgs),
    /// Mean-bunching curve against inverse temperature, with inversion.
    Thermo(ThermoArgs),
    /// Scan random positive semidefinite matrices for dominance violations.
    Lieb(LiebArgs),
    /// Brute-force outcome distribution in the full output basis.
    Oracle(OracleArgs),
    /// Estimate the subset-averaged bunching from sampled outcomes.
    Estimate(EstimateArgs),
}

/// Where the interferometer and the input state come from. Shared by the
/// commands that evaluate a specific experiment.
#[derive(Args)]
struct SourceArgs {
    /// Draw the interferometer from this seed.
    #[arg(long, value_name = "SEED", conflicts_with = "unitary")]
    haar_seed: Option<u64>,

    /// Load the interferometer from a JSON file ({"rows", "cols", "re", "im"}).
    #[arg(long, value_name = "FILE")]
    unitary: Option<PathBuf>,

    /// Number of optical modes (required unless --unitary fixes it).
    #[arg(long, value_name = "M")]
    modes: Option<usize>,

    /// Input sites, 1-based comma list such as "1,2"; one per particle.
    #[arg(long, value_name = "LIST")]
    sites: Option<String>,

    /// Internal state: indist | labelled:2,1 | irrep:2,1 | uniform:0.5,0.5 | q:FILE.
    #[arg(long, default_value = "indist", value_name = "SPEC")]
    state: String,

    /// Internal label-space dimension (default: smallest that fits the state).
    #[arg(long, value_name = "L")]
    hidden_dim: Option<usize>,

    /// Rescale a uniform spectrum to total 1 instead of rejecting it.
    #[arg(long)]
    normalize: bool,
}

#[derive(Args)]
struct BunchArgs {
    #[command(flatten)]
    source: SourceArgs,

    /// Detector subset, 1-based such as "1-4,7", or "all".
    #[arg(long, value_name = "SPEC")]
    subset: Option<String>,

    /// Two-particle balanced-coupler preset; ignores the other flags.
    #[arg(long)]
    hom: bool,
}

#[derive(Args)]
struct MeanArgs {
    /// Number of particles.
    #[arg(long = "n", value_name = "N")]
    n: usize,

    /// Number of optical modes.
    #[arg(long = "m", value_name = "M")]
    m: usize,

    /// Detector subset size.
    #[arg(long = "k", value_name = "K")]
    k: usize,

    /// Label spectrum, comma floats (default: fully indistinguishable).
    #[arg(long, value_name = "LIST")]
    alpha: Option<String>,

    /// Rescale the spectrum to total 1 instead of rejecting it.
    #[arg(long)]
    normalize: bool,

    /// Also estimate the average over this many drawn interferometers.
    #[arg(long, value_name = "N")]
    mc_draws: Option<usize>,

    /// Master seed for the Monte Carlo draws (default: drawn and reported).
    #[arg(long, value_name = "SEED")]
    seed: Option<u64>,
}

#[derive(Args)]
struct ThermoArgs {
    /// Energy levels, comma floats, nondecreasing with first exactly 0.
    #[arg(long, value_name = "LIST")]
    levels: String,

    /// Number of particles.
    #[arg(long = "n", value_name = "N")]
    n: usize,

    /// Number of optical modes.
    #[arg(long = "m", value_name = "M")]
    m: usize,

    /// Detector subset size.
    #[arg(long = "k", value_name = "K")]
    k: usize,

    /// Largest inverse temperature for the curve and the inversion bracket.
    #[arg(long, default_value_t = 10.0, value_name = "BETA")]
    beta_max: f64,

    /// Number of grid points on [0, beta-max].
    #[arg(long, default_value_t = 50, value_name = "N")]
    points: usize,

    /// Recover the inverse temperature matching this mean bunching value.
    #[arg(long, value_name = "VALUE")]
    invert: Option<f64>,

    /// Write the curve as CSV ("beta,mean_bunching") to this file.
    #[arg(long, value_name = "FILE")]
    csv: Option<PathBuf>,
}

#[derive(Args)]
struct LiebArgs {
    /// Matrix dimension to scan.
    #[arg(long = "n", value_name = "N")]
    n: usize,

    /// Number of random matrices.
    #[arg(long, default_value_t = 1000, value_name = "N")]
    trials: usize,

    /// Master seed (default: drawn and reported).
    #[arg(long, value_name = "SEED")]
    seed: Option<u64>,
}

#[derive(Args)]
struct OracleArgs {
    #[command(flatten)]
    source: SourceArgs,

    /// Detector subset, 1-based or "all"; adds the bunching mass to the output.
    #[arg(long, value_name = "SPEC")]
    subset: Option<String>,

    /// Also draw this many outcome samples.
    #[arg(long, value_name = "N")]
    samples: Option<usize>,

    /// Seed for sampling (default: drawn and reported).
    #[arg(long, value_name = "SEED")]
    seed: Option<u64>,
}

#[derive(Args)]
struct EstimateArgs {
    #[command(flatten)]
    source: SourceArgs,

    /// Detector subset size being averaged over.
    #[arg(long = "k", value_name = "K")]
    k: usize,

    /// Number of outcome samples.
    #[arg(long, default_value_t = 10_000, value_name = "N")]
    count: usize,

    /// Seed for sampling (default: drawn and reported).
    #[arg(long, value_name = "SEED")]
    seed: Option<u64>,
}

/// Inputs resolved from [`SourceArgs`]: the actual unitary, the 0-based
/// sites, the validated state, and an echo of it all for the output.
struct Source {
    u: ComplexMatrix,
    m: usize,
    sites: Vec<usize>,
    spec: StateSpec,
    hidden_dim: usize,
    haar_seed: Option<u64>,
    inputs: Value,
}

fn resolve(source: &SourceArgs) -> Result<Source> {
    let sites_str = source
        .sites
        .as_deref()
        .ok_or_else(|| Error::InvalidConfig("--sites is required".into()))?;
    let sites = parse::parse_sites(sites_str)?;
    let (kind, min_l) = parse::parse_state(&source.state, source.normalize)?;
    let hidden_dim = source.hidden_dim.unwrap_or(min_l);
    let (u, m, haar_seed) = match &source.unitary {
        Some(path) => {
            let u = parse::load_unitary(path)?;
            let m = u.rows();
            if let Some(flag_m) = source.modes {
                if flag_m != m {
                    return Err(Error::InvalidConfig(format!(
                        "--modes {flag_m} contradicts the {m}x{m} matrix in {}",
                        path.display()
                    )));
                }
            }
            (u, m, None)
        }
        None => {
            let m = source.modes.ok_or_else(|| {
                Error::InvalidConfig("--modes is required when the interferometer is drawn".into())
            })?;
            let seed = source.haar_seed.unwrap_or_else(rand::random);
            (haar_unitary(&mut substream(seed, 0), m), m, Some(seed))
        }
    };
    let spec = StateSpec::new(kind, sites.clone(), hidden_dim)?;
    let inputs = json!({
        "modes": m,
        "particles": sites.len(),
        "hidden_dim": hidden_dim,
        "sites": parse::one_based(&sites),
        "state": source.state,
        "haar_seed": haar_seed,
    });
    Ok(Source {
        u,
        m,
        sites,
        spec,
        hidden_dim,
        haar_seed,
        inputs,
    })
}

fn add_field(inputs: &mut Value, key: &str, value: Value) {
    inputs
        .as_object_mut()
        .expect("inputs are an object")
        .insert(key.into(), value);
}

fn cmd_bunch(args: BunchArgs, out: Option<&Path>) -> Result<()> {
    if args.hom {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let u = ComplexMatrix::from_rows(vec![
            vec![Complex64::new(s, 0.0), Complex64::new(s, 0.0)],
            vec![Complex64::new(s, 0.0), Complex64::new(-s, 0.0)],
        ])?;
        let cfg = ExperimentConfig::new(2, 2, 2, ModeSubset::new(vec![0], 2)?, 0)?;
        let value = |kind: StateKind| -> Result<f64> {
            let spec = StateSpec::new(kind, vec![0, 1], 2)?;
            Ok(bunch_probability(&u, &cfg, &spec)?.probability())
        };
        return emit(
            "bunchkit.bunch.hom.v1",
            json!({}),
            json!({
                "bunching_indistinguishable": value(StateKind::Indistinguishable)?,
                "bunching_labelled": value(StateKind::PartiallyLabelled {
                    pattern: Partition::new(vec![1, 1])?,
                })?,
            }),
            None,
            out,
        );
    }
    let src = resolve(&args.source)?;
    let subset_str = args
        .subset
        .as_deref()
        .ok_or_else(|| Error::InvalidConfig("--subset is required (or use --hom)".into()))?;
    let subset = ModeSubset::parse_one_based(subset_str, src.m)?;
    let cfg = ExperimentConfig::new(
        src.m,
        src.sites.len(),
        src.hidden_dim,
        subset.clone(),
        src.haar_seed.unwrap_or(0),
    )?;
    let value = bunch_probability(&src.u, &cfg, &src.spec)?;
    let weights = aux_irrep_distribution(&src.spec)?;
    let (gram_eigs, _) = gram_matrix(&src.u, &src.sites, &subset)?.hermitian_eigen()?;
    let mut inputs = src.inputs;
    add_field(&mut inputs, "subset", json!(parse::one_based(subset.indices())));
    emit(
        "bunchkit.bunch.v1",
        inputs,
        json!({
            "bunching": value.probability(),
            "raw": value.raw(),
            "sector_weights": weights,
            "gram_eigenvalues": gram_eigs,
        }),
        src.haar_seed,
        out,
    )
}

fn cmd_mean(args: MeanArgs, out: Option<&Path>) -> Result<()> {
    let mut raw = match args.alpha.as_deref() {
        Some(spec) => parse::parse_floats(spec)?,
        None => vec![1.0],
    };
    // The closed form needs one spectrum entry per particle; trailing
    // zeros change nothing physically.
    while raw.len() < args.n {
        raw.push(0.0);
    }
    let spectrum = if args.normalize {
        ProbVector::normalized(raw)?
    } else {
        ProbVector::new(raw)?
    };
    let closed = mean_bunch_closed(args.n, args.m, args.k, &spectrum)?;
    let (mc, seed) = match args.mc_draws {
        None => (Value::Null, None),
        Some(draws) => {
            let seed = args.seed.unwrap_or_else(rand::random);
            let sites: Vec<usize> = (0..args.n).collect();
            let subset = ModeSubset::new((0..args.k).collect(), args.m)?;
            let cfg =
                ExperimentConfig::new(args.m, args.n, spectrum.len(), subset, seed)?;
            let spec = StateSpec::new(
                StateKind::Uniform {
                    spectrum: spectrum.clone(),
                },
                sites,
                spectrum.len(),
            )?;
            let estimate = mean_bunch_mc(&cfg, &spec, draws)?;
            let value = serde_json::to_value(estimate)
                .map_err(|e| Error::InternalFault(format!("serialize: {e}")))?;
            (value, Some(seed))
        }
    };
    emit(
        "bunchkit.mean.v1",
        json!({
            "particles": args.n,
            "modes": args.m,
            "subset_size": args.k,
            "alpha": spectrum.weights(),
            "seed": seed,
        }),
        json!({ "closed": closed, "mc": mc }),
        seed,
        out,
    )
}

fn cmd_thermo(args: ThermoArgs, out: Option<&Path>) -> Result<()> {
    let spectrum = EnergySpectrum::new(parse::parse_floats(&args.levels)?)?;
    if args.points < 2 {
        return Err(Error::InvalidConfig(format!(
            "need at least 2 grid points, got {}",
            args.points
        )));
    }
    if !args.beta_max.is_finite() || args.beta_max <= 0.0 {
        return Err(Error::InvalidConfig(format!(
            "--beta-max must be finite and positive, got {}",
            args.beta_max
        )));
    }
    let betas: Vec<f64> = (0..args.points)
        .map(|i| args.beta_max * i as f64 / (args.points - 1) as f64)
        .collect();
    let curve = thermo_curve(&spectrum, args.n, args.m, args.k, &betas)?;
    if let Some(path) = &args.csv {
        std::fs::write(path, curve.to_csv()?)
            .map_err(|e| Error::InvalidConfig(format!("cannot write {}: {e}", path.display())))?;
        eprintln!("wrote {}", path.display());
    }
    let inverted = match args.invert {
        None => Value::Null,
        Some(target) => json!(invert_temperature(
            &spectrum,
            args.n,
            args.m,
            args.k,
            target,
            Some(args.beta_max),
        )?),
    };
    emit(
        "bunchkit.thermo.v1",
        json!({
            "particles": args.n,
            "modes": args.m,
            "subset_size": args.k,
            "levels": spectrum.levels(),
            "beta_max": args.beta_max,
            "points": args.points,
        }),
        json!({ "curve": curve, "inverted_beta": inverted }),
        None,
        out,
    )
}

fn cmd_lieb(args: LiebArgs, out: Option<&Path>) -> Result<()> {
    let seed = args.seed.unwrap_or_else(rand::random);
    let report = lieb_scan(seed, args.n, args.trials)?;
    emit(
        "bunchkit.lieb.v1",
        json!({ "size": args.n, "trials": args.trials, "seed": seed }),
        json!({ "report": report }),
        Some(seed),
        out,
    )
}

fn cmd_oracle(args: OracleArgs, out: Option<&Path>) -> Result<()> {
    let src = resolve(&args.source)?;
    let subset = args
        .subset
        .as_deref()
        .map(|s| ModeSubset::parse_one_based(s, src.m))
        .transpose()?;
    let cfg = ExperimentConfig::new(
        src.m,
        src.sites.len(),
        src.hidden_dim,
        subset.clone().map_or_else(|| ModeSubset::full(src.m), Ok)?,
        src.haar_seed.unwrap_or(0),
    )?;
    let dist = oracle_visible_distribution(&src.u, &cfg, &src.spec)?;
    let bunching = subset
        .as_ref()
        .map(|s| dist.mass_on_modes(s.indices()));
    let sector_weights = if src.sites.len() <= tol::PERM_SUM_CAP {
        serde_json::to_value(extract_q(&aux_state(&src.spec)?)?)
            .map_err(|e| Error::InternalFault(format!("serialize: {e}")))?
    } else {
        Value::Null
    };
    let (samples, sample_seed) = match args.samples {
        None => (Value::Null, None),
        Some(count) => {
            let seed = args.seed.unwrap_or_else(rand::random);
            let drawn =
                sample_outcomes(&mut substream(seed, 0), &src.u, &cfg, &src.spec, count)?;
            let value = serde_json::to_value(&drawn)
                .map_err(|e| Error::InternalFault(format!("serialize: {e}")))?;
            (value, Some(seed))
        }
    };
    let mut inputs = src.inputs;
    add_field(
        &mut inputs,
        "subset",
        subset
            .as_ref()
            .map_or(Value::Null, |s| json!(parse::one_based(s.indices()))),
    );
    add_field(&mut inputs, "sample_seed", json!(sample_seed));
    emit(
        "bunchkit.oracle.v1",
        inputs,
        json!({
            "distribution": dist,
            "bunching": bunching,
            "sector_weights": sector_weights,
            "samples": samples,
        }),
        sample_seed.or(src.haar_seed),
        out,
    )
}

fn cmd_estimate(args: EstimateArgs, out: Option<&Path>) -> Result<()> {
    let src = resolve(&args.source)?;
    let seed = args.seed.unwrap_or_else(rand::random);
    let cfg = ExperimentConfig::new(
        src.m,
        src.sites.len(),
        src.hidden_dim,
        ModeSubset::full(src.m)?,
        seed,
    )?;
    let samples = sample_outcomes(&mut substream(seed, 0), &src.u, &cfg, &src.spec, args.count)?;
    let estimate = subset_avg_estimator(&samples, args.k, src.m)?;
    let mut inputs = src.inputs;
    add_field(&mut inputs, "subset_size", json!(args.k));
    add_field(&mut inputs, "count", json!(args.count));
    add_field(&mut inputs, "seed", json!(seed));
    emit(
        "bunchkit.estimate.v1",
        inputs,
        json!({ "estimate": estimate }),
        Some(seed),
        out,
    )
}

fn run(cli: Cli) -> Result<()> {
    if let Some(threads) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .map_err(|e| Error::InvalidConfig(format!("thread pool: {e}")))?;
    }
    let out = cli.out.as_deref();
    match cli.command {
        Command::Bunch(args) => cmd_bunch(args, out),
        Command::Mean(args) => cmd_mean(args, out),
        Command::Thermo(args) => cmd_thermo(args, out),
        Command::Lieb(args) => cmd_lieb(args, out),
        Command::Oracle(args) => cmd_oracle(args, out),
        Command::Estimate(args) => cmd_estimate(args, out),
    }
}

fn exit_code(e: &Error) -> u8 {
    if e.is_internal_fault() {
        1
    } else {
        2
    }
}

fn main() -> std::process::ExitCode {
    let cli = Cli::parse();
    let code = match std::panic::catch_unwind(AssertUnwindSafe(|| run(cli))) {
        Ok(Ok(())) => 0,
        Ok(Err(e)) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<String>()
                .map(String::as_str)
                .or_else(|| payload.downcast_ref::<&str>().copied())
                .unwrap_or("unexpected panic");
            eprintln!("internal fault: {msg}");
            1
        }
    };
    std::process::ExitCode::from(code)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn internal_faults_and_bad_input_map_to_distinct_codes() {
        assert_eq!(exit_code(&Error::InternalFault("x".into())), 1);
        assert_eq!(exit_code(&Error::InvalidConfig("x".into())), 2);
        assert_eq!(exit_code(&Error::NotUnitary("x".into())), 2);
        assert_eq!(exit_code(&Error::Degenerate("x".into())), 2);
    }
}
