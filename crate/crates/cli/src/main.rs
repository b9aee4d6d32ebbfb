//! `cpz`: inclusion checks, sampling and linear maps on set documents.
//!
//! Exit codes: 0 proven / success, 1 usage, I/O or encoding error,
//! 2 not proven (or no samples drawn), 3 falsified.

use std::fmt::Display;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use clap::{Parser, Subcommand};

use cpz_core::document::{
    parse_matrix, parse_set, residual_map, serialize_set, CertificateDocument, VerdictDocument, VerdictStatus,
    WitnessDocument,
};
use cpz_core::oracle::{falsify_inclusion, OracleOptions};
use cpz_core::sampling::sample_points;
use cpz_core::solve::{check_inclusion, Method, SolveOptions, Status};

#[derive(Parser)]
#[command(name = "cpz", version, about = "Constrained polynomial zonotope tools")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Try to certify that INNER is contained in OUTER.
    Check(CheckArgs),
    /// Draw points of a set and write them as CSV.
    Sample(SampleArgs),
    /// Apply a linear map x -> M x to a set.
    Map(MapArgs),
}

#[derive(clap::Args)]
struct CheckArgs {
    #[arg(long)]
    inner: PathBuf,
    #[arg(long)]
    outer: PathBuf,
    /// prop1, cor1, cz-lp or auto.
    #[arg(long, default_value = "auto")]
    method: Method,
    #[arg(long, default_value_t = 1e-8)]
    tol_eq: f64,
    #[arg(long, default_value_t = 1e-8)]
    tol_ineq: f64,
    #[arg(long, default_value_t = 16)]
    restarts: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// When no certificate is found, search this many inner samples for a
    /// point outside OUTER.
    #[arg(long, value_name = "N")]
    falsify: Option<usize>,
    /// Write a verdict document here.
    #[arg(long, value_name = "PATH")]
    json: Option<PathBuf>,
    /// Wall-clock budget of the solver in seconds.
    #[arg(long, value_name = "S", default_value_t = 120.0)]
    time_limit: f64,
}

#[derive(clap::Args)]
struct SampleArgs {
    #[arg(long)]
    set: PathBuf,
    #[arg(long)]
    count: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Constraint tolerance of accepted samples.
    #[arg(long, default_value_t = 1e-8)]
    tol_c: f64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(clap::Args)]
struct MapArgs {
    /// JSON array of rows.
    #[arg(long)]
    matrix: PathBuf,
    #[arg(long)]
    set: PathBuf,
    #[arg(long)]
    out: PathBuf,
}

/// Failure that ends the program with exit code 1.
struct Failure(String);

impl<E: Display> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure(e.to_string())
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match cli.command {
        Command::Check(args) => check(args),
        Command::Sample(args) => sample(args),
        Command::Map(args) => map(args),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(Failure(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}

fn check(args: CheckArgs) -> Result<u8, Failure> {
    if !(args.time_limit > 0.0 && args.time_limit.is_finite()) {
        return Err(Failure("--time-limit must be a positive number of seconds".into()));
    }
    let (inner, inner_name) = parse_set(&args.inner)?;
    let (outer, outer_name) = parse_set(&args.outer)?;
    let opts = SolveOptions {
        tol_eq: args.tol_eq,
        tol_ineq: args.tol_ineq,
        restarts: args.restarts,
        seed: args.seed,
        time_limit: Duration::from_secs_f64(args.time_limit),
        ..SolveOptions::default()
    };
    let label = |name: Option<String>, path: &Path| name.unwrap_or_else(|| path.display().to_string());
    let inner_label = label(inner_name, &args.inner);
    let outer_label = label(outer_name, &args.outer);

    println!("seed: {}", args.seed);
    let outcome = check_inclusion(&inner, &outer, args.method, &opts)?;
    let wall_time = outcome.wall_time.as_secs_f64();
    println!("check: {inner_label} ⊆ {outer_label}");
    println!("method: {} (encoding {})", args.method, outcome.encoding);

    let mut status = match outcome.status {
        Status::Feasible => VerdictStatus::Proven,
        Status::NotProven => VerdictStatus::NotProven,
    };
    let mut witness = None;
    if status == VerdictStatus::NotProven {
        if let Some(samples) = args.falsify {
            let oracle = OracleOptions { seed: args.seed, ..OracleOptions::default() };
            witness = falsify_inclusion(&inner, &outer, samples, &oracle)?;
            if witness.is_some() {
                status = VerdictStatus::Falsified;
            }
        }
    }

    match status {
        VerdictStatus::Proven => println!("status: proven"),
        VerdictStatus::NotProven => {
            println!("status: not proven (best violation {:.3e})", outcome.best_violation);
            if args.falsify.is_some() {
                println!("no sample of the inner set was found outside the outer set");
            }
        }
        VerdictStatus::Falsified => {
            let w = witness.as_ref().expect("falsified implies a witness");
            println!("status: falsified");
            println!("witness: point {:?} at distance {:.6e} from the outer set", w.point.as_slice(), w.outer_distance);
        }
    }
    println!("solver time: {wall_time:.3} s over {} restart(s)", outcome.restarts_used);
    let residuals = outcome.report.as_ref().map(residual_map).unwrap_or_default();
    for (name, value) in &residuals {
        match value {
            Some(v) => println!("  {name:<22} {v:.3e}"),
            None => println!("  {name:<22} -inf"),
        }
    }

    if let Some(path) = &args.json {
        let doc = VerdictDocument {
            inner: inner_label,
            outer: outer_label,
            method: args.method.to_string(),
            status,
            wall_time_s: wall_time,
            seed: args.seed,
            certificate: outcome.certificate.as_ref().map(CertificateDocument::from_certificate),
            witness: witness.as_ref().map(WitnessDocument::from),
            residuals,
        };
        let text = serde_json::to_string_pretty(&doc)?;
        fs::write(path, text + "\n").map_err(|e| Failure(format!("{}: {e}", path.display())))?;
    }

    Ok(match status {
        VerdictStatus::Proven => 0,
        VerdictStatus::NotProven => 2,
        VerdictStatus::Falsified => 3,
    })
}

fn sample(args: SampleArgs) -> Result<u8, Failure> {
    let (set, _) = parse_set(&args.set)?;
    println!("seed: {}", args.seed);
    let drawn = sample_points(&set, args.count, args.tol_c, args.seed);
    let mut writer = csv::Writer::from_path(&args.out).map_err(|e| Failure(format!("{}: {e}", args.out.display())))?;
    writer.write_record((1..=set.dim()).map(|i| format!("x{i}")))?;
    for s in &drawn.samples {
        writer.write_record(s.point.iter().map(|v| v.to_string()))?;
    }
    writer.flush()?;
    println!("wrote {} of {} requested points ({} attempts)", drawn.len(), args.count, drawn.attempts);
    Ok(if drawn.is_empty() { 2 } else { 0 })
}

fn map(args: MapArgs) -> Result<u8, Failure> {
    let m = parse_matrix(&args.matrix)?;
    let (set, name) = parse_set(&args.set)?;
    let mapped = set.linear_map(&m)?;
    fs::write(&args.out, serialize_set(&mapped, name)).map_err(|e| Failure(format!("{}: {e}", args.out.display())))?;
    println!("mapped set of dimension {} to dimension {}", set.dim(), mapped.dim());
    Ok(0)
}
