//! Command-line front end: exact degree computations, bundled tables, and
//! exact-vs-Monte-Carlo validation runs.
//!
//! Exit codes: 0 success, 2 invalid input, 3 rank profile not realizable
//! (without --force), 4 resource limit exceeded, 5 statistical validation
//! failure.

mod cache;
mod records;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use subvar::{
    estimate_f, segre_degree, subspace_degree_with, DiagonalStrategy, EngineOptions, Error,
    FormatProfile, DEFAULT_TERM_CAP,
};

use cache::{Cache, ResultCacheEntry};
use records::{DegreeRecord, OutputFormat, TableRow, ValidateRecord};

const EXIT_INVALID_INPUT: u8 = 2;
const EXIT_NOT_REALIZABLE: u8 = 3;
const EXIT_RESOURCE: u8 = 4;
const EXIT_STAT_FAIL: u8 = 5;

const ENGINE_VERSION: &str = env!("CARGO_PKG_VERSION");
const Z_GATE: f64 = 4.0;

#[derive(Parser)]
#[command(
    name = "subvar",
    version,
    about = "Exact projective degrees of bounded-multilinear-rank tensor varieties"
)]
struct Cli {
    /// Cap on rayon worker threads for polynomial products and sampling.
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Output format: text, json, or csv.
    #[arg(long, global = true, default_value = "text")]
    format: OutputFormat,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct ProfileArgs {
    /// Rank bounds, comma separated (e.g. 1,2,2).
    #[arg(short, long, value_delimiter = ',', required = true)]
    k: Vec<u32>,

    /// Ambient dimensions, comma separated (e.g. 3,3,3).
    #[arg(short, long, value_delimiter = ',', required = true)]
    n: Vec<u32>,
}

#[derive(Args)]
struct EngineArgs {
    /// Compute the formula value even for non-realizable rank profiles.
    #[arg(long)]
    force: bool,

    /// Abort once a polynomial expansion would exceed this many terms.
    #[arg(long, default_value_t = DEFAULT_TERM_CAP)]
    term_cap: u64,

    /// Extract diagonal coefficients by pairing partial products instead of
    /// expanding the final multiplication.
    #[arg(long)]
    paired: bool,
}

impl EngineArgs {
    fn options(&self) -> EngineOptions {
        EngineOptions {
            term_cap: self.term_cap,
            diagonal: if self.paired {
                DiagonalStrategy::Paired
            } else {
                DiagonalStrategy::Expand
            },
            allow_unrealizable: self.force,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Compute the exact degree of one rank profile.
    Degree {
        #[command(flatten)]
        profile: ProfileArgs,
        #[command(flatten)]
        engine: EngineArgs,
        /// Result cache file (overridden by SUBSPACE_DEGREE_CACHE).
        #[arg(long)]
        cache: Option<PathBuf>,
        /// Skip the result cache entirely.
        #[arg(long)]
        no_cache: bool,
    },
    /// Compute a table of degrees from a preset or explicit pairs.
    Table {
        /// Bundled table: "paper-ex2" (18 reference entries) or "segre"
        /// (rank-one profiles against the closed form).
        #[arg(long, conflicts_with = "pair")]
        preset: Option<String>,
        /// Explicit k:n pair, e.g. 1,2,2:3,3,3 (repeatable).
        #[arg(long)]
        pair: Vec<String>,
        /// Largest variety dimension included by the segre preset.
        #[arg(long, default_value_t = 6)]
        max_dim: u32,
        #[command(flatten)]
        engine: EngineArgs,
    },
    /// Compare the exact degree against a Monte Carlo estimate.
    Validate {
        #[command(flatten)]
        profile: ProfileArgs,
        #[command(flatten)]
        engine: EngineArgs,
        /// Number of Gaussian samples.
        #[arg(long, default_value_t = 1_000_000)]
        samples: u64,
        /// Sampling seed; drawn from entropy (and reported) when omitted.
        #[arg(long)]
        seed: Option<u64>,
    },
}

fn parse_csv_u32(s: &str) -> Result<Vec<u32>, String> {
    if s.trim().is_empty() {
        return Err("expected a comma-separated list of positive integers".into());
    }
    s.split(',')
        .map(|part| {
            part.trim()
                .parse::<u32>()
                .map_err(|_| format!("'{part}' is not a positive integer"))
        })
        .collect()
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(threads) = cli.threads {
        if let Err(err) = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
        {
            eprintln!("warning: could not configure {threads} threads: {err}");
        }
    }
    match cli.command {
        Command::Degree {
            profile,
            engine,
            cache,
            no_cache,
        } => cmd_degree(profile, engine, cache, no_cache, cli.format),
        Command::Table {
            preset,
            pair,
            max_dim,
            engine,
        } => cmd_table(preset, pair, max_dim, engine, cli.format),
        Command::Validate {
            profile,
            engine,
            samples,
            seed,
        } => cmd_validate(profile, engine, samples, seed, cli.format),
    }
}

fn build_profile(args: &ProfileArgs) -> Result<FormatProfile, ExitCode> {
    FormatProfile::new(args.k.clone(), args.n.clone()).map_err(|err| {
        eprintln!("error: {err}");
        ExitCode::from(EXIT_INVALID_INPUT)
    })
}

fn exit_for(err: &Error) -> ExitCode {
    match err {
        Error::InvalidProfile(_) => ExitCode::from(EXIT_INVALID_INPUT),
        Error::RankNotRealizable { .. } => ExitCode::from(EXIT_NOT_REALIZABLE),
        Error::ResourceExceeded(_) => ExitCode::from(EXIT_RESOURCE),
        Error::IntegralityViolation { .. } => ExitCode::FAILURE,
    }
}

fn warn_if_formal(profile: &FormatProfile, force: bool) {
    if force && !profile.formula_applies() {
        eprintln!(
            "note: formal value only; no tensor attains this rank profile, \
             the degree hypothesis is not met"
        );
    }
}

fn cmd_degree(
    profile_args: ProfileArgs,
    engine: EngineArgs,
    cache_flag: Option<PathBuf>,
    no_cache: bool,
    format: OutputFormat,
) -> ExitCode {
    let profile = match build_profile(&profile_args) {
        Ok(p) => p,
        Err(code) => return code,
    };
    if !profile.formula_applies() && !engine.force {
        eprintln!(
            "error: {}",
            Error::RankNotRealizable {
                k: profile.rank_bounds().to_vec()
            }
        );
        return ExitCode::from(EXIT_NOT_REALIZABLE);
    }
    let options = engine.options();
    let cache = if no_cache {
        None
    } else {
        Some(Cache::at(cache::resolve_path(cache_flag.as_deref())))
    };
    let key = cache::canonical_key(profile.rank_bounds(), profile.ambient_dims());

    if let Some(cache) = &cache {
        if let Some(hit) = cache.lookup(&key, ENGINE_VERSION) {
            let record =
                DegreeRecord::from_cached(&profile, &hit.degree, &hit.f, &hit.grass_degrees);
            eprintln!("cache hit ({})", cache.path().display());
            warn_if_formal(&profile, engine.force);
            println!("{}", record.render(format));
            return ExitCode::SUCCESS;
        }
    }

    let result = match subspace_degree_with(&profile, &options) {
        Ok(r) => r,
        Err(err) => {
            eprintln!("error: {err}");
            return exit_for(&err);
        }
    };
    let record = DegreeRecord::from_result(&result);
    if let Some(cache) = &cache {
        let entry = ResultCacheEntry {
            key,
            degree: record.degree.clone(),
            f: record.f.clone(),
            grass_degrees: record.grass_degrees.clone(),
            engine_version: ENGINE_VERSION.to_string(),
            timestamp: cache::unix_timestamp(),
        };
        if let Err(err) = cache.upsert(entry) {
            eprintln!(
                "warning: could not write cache {}: {err}",
                cache.path().display()
            );
        }
    }
    eprintln!(
        "computed in {:.2?}{}",
        result.elapsed,
        result
            .term_count
            .map(|t| format!(", {t} expanded terms"))
            .unwrap_or_default()
    );
    warn_if_formal(&profile, engine.force);
    println!("{}", record.render(format));
    ExitCode::SUCCESS
}

fn cmd_table(
    preset: Option<String>,
    pairs: Vec<String>,
    max_dim: u32,
    engine: EngineArgs,
    format: OutputFormat,
) -> ExitCode {
    let mut spec: Vec<(Vec<u32>, Vec<u32>)> = Vec::new();
    let mut with_oracle = false;

    match preset.as_deref() {
        Some("paper-ex2") => spec.extend(reference_table_pairs()),
        Some("segre") => {
            with_oracle = true;
            spec.extend(segre_pairs(max_dim));
        }
        Some(other) => {
            eprintln!("error: unknown preset '{other}' (expected paper-ex2 or segre)");
            return ExitCode::from(EXIT_INVALID_INPUT);
        }
        None => {
            for pair in &pairs {
                match parse_pair(pair) {
                    Ok(kn) => spec.push(kn),
                    Err(err) => {
                        eprintln!("error: {err}");
                        return ExitCode::from(EXIT_INVALID_INPUT);
                    }
                }
            }
        }
    }
    if spec.is_empty() {
        eprintln!("error: empty table spec; pass --preset or at least one --pair");
        return ExitCode::from(EXIT_INVALID_INPUT);
    }

    let options = engine.options();
    let mut rows = Vec::with_capacity(spec.len());
    let mut worst: Option<ExitCode> = None;
    for (k, n) in spec {
        let row = match FormatProfile::new(k.clone(), n.clone())
            .and_then(|p| subspace_degree_with(&p, &options))
        {
            Ok(result) => {
                let oracle = with_oracle.then(|| segre_degree(&n).to_string());
                TableRow {
                    k,
                    n,
                    degree: Some(result.degree.to_string()),
                    oracle,
                    error: None,
                }
            }
            Err(err) => {
                worst = Some(worst.unwrap_or(exit_for(&err)));
                TableRow {
                    k,
                    n,
                    degree: None,
                    oracle: None,
                    error: Some(err.to_string()),
                }
            }
        };
        rows.push(row);
    }
    println!("{}", records::render_table(&rows, with_oracle, format));
    worst.unwrap_or(ExitCode::SUCCESS)
}

/// The eighteen bundled reference profiles.
fn reference_table_pairs() -> Vec<(Vec<u32>, Vec<u32>)> {
    let mut out = Vec::new();
    for k in [vec![1u32, 2, 2], vec![2, 2, 2], vec![2, 2, 3]] {
        for n in [vec![3u32, 3, 3], vec![3, 3, 4], vec![3, 4, 4]] {
            out.push((k.clone(), n));
        }
    }
    for k in [vec![1u32, 1, 2, 2], vec![1, 2, 2, 2], vec![1, 2, 2, 3]] {
        for n in [vec![2u32, 2, 3, 3], vec![2, 3, 3, 3], vec![3, 3, 3, 3]] {
            out.push((k.clone(), n));
        }
    }
    out
}

/// Rank-one profiles of every shape with variety dimension at most
/// `max_dim`, in canonical nondecreasing order.
fn segre_pairs(max_dim: u32) -> Vec<(Vec<u32>, Vec<u32>)> {
    fn extend(
        prefix: &mut Vec<u32>,
        min: u32,
        budget: u32,
        out: &mut Vec<(Vec<u32>, Vec<u32>)>,
    ) {
        if prefix.len() >= 2 {
            out.push((vec![1; prefix.len()], prefix.clone()));
        }
        let mut next = min;
        while next - 1 <= budget {
            prefix.push(next);
            extend(prefix, next, budget - (next - 1), out);
            prefix.pop();
            next += 1;
        }
    }
    let mut out = Vec::new();
    extend(&mut Vec::new(), 2, max_dim, &mut out);
    out
}

fn parse_pair(s: &str) -> Result<(Vec<u32>, Vec<u32>), String> {
    let (k, n) = s
        .split_once(':')
        .ok_or_else(|| format!("pair '{s}' must look like 1,2,2:3,3,3"))?;
    Ok((parse_csv_u32(k)?, parse_csv_u32(n)?))
}

fn cmd_validate(
    profile_args: ProfileArgs,
    engine: EngineArgs,
    samples: u64,
    seed: Option<u64>,
    format: OutputFormat,
) -> ExitCode {
    let profile = match build_profile(&profile_args) {
        Ok(p) => p,
        Err(code) => return code,
    };
    if samples < 2 {
        eprintln!("error: need at least two samples");
        return ExitCode::from(EXIT_INVALID_INPUT);
    }
    let seed = seed.unwrap_or_else(rand::random::<u64>);
    let exact = match subspace_degree_with(&profile, &engine.options()) {
        Ok(r) => r,
        Err(err) => {
            eprintln!("error: {err}");
            return exit_for(&err);
        }
    };
    warn_if_formal(&profile, engine.force);
    let est = estimate_f(&profile, samples, seed).with_exact(&exact.degree);
    let z = est.z_score.expect("z-score present after with_exact");
    let pass = z.abs() <= Z_GATE;
    let record = ValidateRecord {
        k: profile.rank_bounds().to_vec(),
        n: profile.ambient_dims().to_vec(),
        exact_degree: exact.degree.to_string(),
        samples: est.samples,
        seed: est.seed,
        mean: est.mean,
        std_error: est.std_error,
        batch_std_error: est.batch_std_error,
        derived_f: est.derived_f,
        derived_degree: est.derived_degree,
        z_score: z,
        gate: Z_GATE,
        pass,
    };
    println!("{}", record.render(format));
    if pass {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(EXIT_STAT_FAIL)
    }
}
