//! `icewall`: compute, cross-check and tabulate DWBC six-vertex partition
//! functions.
//!
//! Exit codes: 0 success, 1 a cross-check or verification exceeded its
//! tolerance, 2 invalid arguments, 3 a computation failed.

mod compute;
mod config;
mod output;
mod verify;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, ensure, Result};
use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;

use compute::{run_all, run_job, Cache};
use config::{parse_complex, parse_weights, Format, Job, Model, Representation, MAX_GRID_POINTS};

const EXIT_CHECK_FAILED: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_COMPUTE: u8 = 3;

#[derive(Parser)]
#[command(name = "icewall", version, about = "Six-vertex model partition functions with domain wall boundaries")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute Z_N by one representation, or by all of them with a
    /// cross-check.
    Compute(ComputeArgs),
    /// Tabulate Z_N over a range of N and a grid of lambda and eta.
    Sweep(SweepArgs),
    /// Run an invariant suite and report each check.
    Verify(VerifyArgs),
    /// List every DWBC configuration of an N x N lattice.
    EnumerateDump(DumpArgs),
}

#[derive(Args)]
struct Common {
    /// Spectral parameter as "re" or "re,im" (radians).
    #[arg(long, allow_hyphen_values = true)]
    lambda: Vec<String>,
    /// Crossing parameter as "re" or "re,im" (radians).
    #[arg(long, allow_hyphen_values = true)]
    eta: Vec<String>,
    /// Mantissa bits for the multiprecision paths (default 64 + 16 N, at least 128).
    #[arg(long)]
    bits: Option<u32>,
    /// Cross-check and quadrature convergence tolerance.
    #[arg(long, default_value_t = 1e-8)]
    tol: f64,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Write to this file instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Cache results under this directory (ICEWALL_CACHE_DIR takes precedence).
    #[arg(long, num_args = 0..=1, default_missing_value = ".icewall-cache")]
    cache: Option<PathBuf>,
}

#[derive(Args)]
struct ComputeArgs {
    #[arg(long, value_enum, default_value_t = Representation::Hankel)]
    rep: Representation,
    #[arg(long)]
    n: usize,
    /// Explicit weights w1,...,w6 (enumerate and dp only).
    #[arg(long)]
    weights: Option<String>,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long, value_enum, default_value_t = Representation::Hankel)]
    rep: Representation,
    /// First N of the range.
    #[arg(long, default_value_t = 1)]
    n: usize,
    /// Last N of the range (defaults to --n).
    #[arg(long)]
    n_max: Option<usize>,
    #[arg(long)]
    weights: Option<String>,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(value_enum, default_value_t = verify::Suite::All)]
    suite: verify::Suite,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct DumpArgs {
    #[arg(long)]
    n: usize,
    /// Weights w1,...,w6 used for the per-configuration weight column.
    #[arg(long)]
    weights: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    lambda: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    eta: Option<String>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Argument problems detected after clap parsing.
#[derive(Debug)]
struct UsageError(String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

fn usage<T>(r: Result<T>) -> Result<T> {
    r.map_err(|e| UsageError(format!("{e:#}")).into())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Compute(a) => cmd_compute(a),
        Command::Sweep(a) => cmd_sweep(a),
        Command::Verify(a) => cmd_verify(a),
        Command::EnumerateDump(a) => cmd_dump(a),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.is::<UsageError>() {
                ExitCode::from(EXIT_USAGE)
            } else {
                ExitCode::from(EXIT_COMPUTE)
            }
        }
    }
}

fn open_cache(flag: &Option<PathBuf>) -> Result<Option<Cache>> {
    let Some(dir) = flag else { return Ok(None) };
    let dir = std::env::var_os("ICEWALL_CACHE_DIR").map(PathBuf::from).unwrap_or_else(|| dir.clone());
    Cache::new(dir).map(Some)
}

fn models(common: &Common, weights: &Option<String>) -> Result<Vec<Model>> {
    if let Some(w) = weights {
        ensure!(common.lambda.is_empty() && common.eta.is_empty(), "--weights cannot be combined with --lambda/--eta");
        return Ok(vec![Model::Weights { weights: parse_weights(w)? }]);
    }
    ensure!(!common.lambda.is_empty() && !common.eta.is_empty(), "give --lambda and --eta, or --weights");
    let ls = common.lambda.iter().map(|s| parse_complex(s)).collect::<Result<Vec<_>>>()?;
    let es = common.eta.iter().map(|s| parse_complex(s)).collect::<Result<Vec<_>>>()?;
    Ok(ls.iter().flat_map(|&l| es.iter().map(move |&e| Model::spectral(l, e))).collect())
}

fn cmd_compute(a: ComputeArgs) -> Result<u8> {
    let model = usage((|| {
        let ms = models(&a.common, &a.weights)?;
        ensure!(ms.len() == 1, "compute takes a single --lambda and --eta; use sweep for grids");
        Ok(ms.into_iter().next().unwrap())
    })())?;
    let job = Job {
        representation: a.rep,
        n: a.n,
        model,
        bits: a.common.bits,
        tol: a.common.tol,
    };
    usage(job.validate())?;
    let cache = open_cache(&a.common.cache)?;
    let (records, summary) = if a.rep == Representation::All {
        let (r, s) = run_all(&job, cache.as_ref())?;
        (r, Some(s))
    } else {
        (vec![run_job(&job, cache.as_ref())?], None)
    };
    if let Some(c) = &cache {
        eprintln!("{}", c.summary());
    }
    let failed = summary.as_ref().is_some_and(|s| !s.passed);
    output::write(&a.common.out, &output::compute(&records, summary.as_ref(), a.common.format)?)?;
    Ok(if failed { EXIT_CHECK_FAILED } else { 0 })
}

fn cmd_sweep(a: SweepArgs) -> Result<u8> {
    let jobs = usage((|| {
        if a.rep == Representation::All {
            bail!("sweep needs a single representation");
        }
        let n_max = a.n_max.unwrap_or(a.n);
        ensure!(a.n >= 1 && n_max >= a.n, "need 1 <= --n <= --n-max");
        let ms = models(&a.common, &a.weights)?;
        let points = (n_max - a.n + 1) * ms.len();
        ensure!(points <= MAX_GRID_POINTS, "grid has {points} points, limit {MAX_GRID_POINTS}");
        let jobs: Vec<Job> = (a.n..=n_max)
            .flat_map(|n| {
                ms.iter().map(move |m| Job {
                    representation: a.rep,
                    n,
                    model: m.clone(),
                    bits: a.common.bits,
                    tol: a.common.tol,
                })
            })
            .collect();
        for j in &jobs {
            j.validate()?;
        }
        Ok(jobs)
    })())?;
    let cache = open_cache(&a.common.cache)?;
    let results: Vec<output::SweepPoint> = jobs
        .par_iter()
        .map(|j| output::SweepPoint::new(j, run_job(j, cache.as_ref())))
        .collect();
    if let Some(c) = &cache {
        eprintln!("{}", c.summary());
    }
    let errors = results.iter().filter(|p| p.error.is_some()).count();
    output::write(&a.common.out, &output::sweep(&results, a.common.format)?)?;
    if errors > 0 {
        eprintln!("{errors} of {} points failed", results.len());
        return Ok(EXIT_COMPUTE);
    }
    Ok(0)
}

fn cmd_verify(a: VerifyArgs) -> Result<u8> {
    let report = verify::run(a.suite);
    output::write(&a.out, &output::verify(&report, a.format)?)?;
    Ok(if report.passed { 0 } else { EXIT_CHECK_FAILED })
}

fn cmd_dump(a: DumpArgs) -> Result<u8> {
    let w = usage((|| {
        Ok(match (&a.weights, &a.lambda, &a.eta) {
            (Some(w), None, None) => Model::Weights { weights: parse_weights(w)? }.vertex_weights(),
            (None, Some(l), Some(e)) => Model::spectral(parse_complex(l)?, parse_complex(e)?).vertex_weights(),
            (None, None, None) => icewall::VertexWeights64::uniform(icewall::C64::new(1.0, 0.0)),
            _ => bail!("give --weights, or both --lambda and --eta, or neither"),
        })
    })())?;
    let configs: Vec<_> = usage(icewall::enumeration::config_iterator(a.n).map_err(anyhow::Error::from))?.collect();
    output::write(&a.out, &output::dump(a.n, &configs, &w, a.format)?)?;
    Ok(0)
}
