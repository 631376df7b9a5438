use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use convmod::harness::{
    mann_whitney_u, run_experiments, summarize_to_files, Metric, PolicySelection, RunConfig,
};
use convmod::sim::Preset;

#[derive(Parser)]
#[command(name = "convmod", version, about = "Simulate and compare group-conversation moderation policies")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run simulated groups under one or all policies and write CSV/JSONL results.
    Run(RunArgs),
    /// Mann-Whitney U test between two CSV columns.
    TestStats(TestStatsArgs),
}

#[derive(Args)]
struct RunArgs {
    /// TOML config file; flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    /// N, BH, BS, CH, CS or all.
    #[arg(long)]
    policy: Option<PolicySelection>,
    /// Groups per policy.
    #[arg(long)]
    groups: Option<usize>,
    #[arg(long)]
    participants: Option<usize>,
    /// Session length in seconds.
    #[arg(long)]
    duration: Option<f64>,
    /// Moving-window capacity in seconds.
    #[arg(long)]
    window: Option<f64>,
    #[arg(long)]
    gamma1: Option<f64>,
    #[arg(long)]
    gamma2: Option<f64>,
    /// dominant-one or two-cliques.
    #[arg(long)]
    preset: Option<Preset>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Seconds of session time per moderator response.
    #[arg(long)]
    overhead: Option<f64>,
    #[arg(long)]
    max_repeats: Option<u32>,
}

impl RunArgs {
    fn overrides(&self) -> RunConfig {
        RunConfig {
            policy: self.policy,
            groups: self.groups,
            participants: self.participants,
            duration: self.duration,
            window: self.window,
            gamma1: self.gamma1,
            gamma2: self.gamma2,
            preset: self.preset,
            seed: self.seed,
            out: self.out.clone(),
            overhead: self.overhead,
            max_repeats: self.max_repeats,
        }
    }
}

#[derive(Args)]
struct TestStatsArgs {
    /// CSV file holding column A (and column B unless --file-b is given).
    file: PathBuf,
    /// Column for sample A.
    #[arg(long = "a")]
    col_a: String,
    /// Column for sample B.
    #[arg(long = "b")]
    col_b: String,
    /// Read column B from this file instead.
    #[arg(long)]
    file_b: Option<PathBuf>,
    /// Keep only rows whose `policy` column equals this value for sample A.
    #[arg(long)]
    policy_a: Option<String>,
    /// Keep only rows whose `policy` column equals this value for sample B.
    #[arg(long)]
    policy_b: Option<String>,
}

fn read_column(path: &Path, column: &str, policy: Option<&str>) -> Result<Vec<f64>> {
    let mut reader =
        csv::Reader::from_path(path).with_context(|| format!("opening {}", path.display()))?;
    let headers = reader
        .headers()
        .with_context(|| format!("reading header of {}", path.display()))?
        .clone();
    let Some(idx) = headers.iter().position(|h| h == column) else {
        bail!("{}: no column `{column}`", path.display());
    };
    let policy_idx = match policy {
        Some(_) => match headers.iter().position(|h| h == "policy") {
            Some(i) => Some(i),
            None => bail!("{}: no `policy` column to filter on", path.display()),
        },
        None => None,
    };
    let mut values = Vec::new();
    for (line, record) in reader.records().enumerate() {
        let record = record.with_context(|| format!("{}: row {}", path.display(), line + 2))?;
        if let (Some(pi), Some(want)) = (policy_idx, policy) {
            if record.get(pi) != Some(want) {
                continue;
            }
        }
        let cell = record.get(idx).unwrap_or("").trim();
        if cell.is_empty() {
            continue;
        }
        let v: f64 = cell
            .parse()
            .with_context(|| format!("{}: row {}: `{cell}` is not a number", path.display(), line + 2))?;
        values.push(v);
    }
    Ok(values)
}

fn run(args: RunArgs) -> Result<()> {
    let base = match &args.config {
        Some(path) => RunConfig::from_file(path)?,
        None => RunConfig::default(),
    };
    let resolved = base.merged(args.overrides()).resolve()?;
    let started = Instant::now();
    let results = run_experiments(&resolved.spec)?;
    let files = summarize_to_files(&results, &resolved.out)?;

    println!(
        "preset {} | {} groups x {} policies | seed {} | {:.2}s",
        resolved.preset,
        resolved.spec.groups_per_policy,
        resolved.spec.policies.len(),
        resolved.spec.base_seed,
        started.elapsed().as_secs_f64()
    );
    print!("{:<12}", "metric");
    for row in &results.table.rows {
        print!("{:>18}", row.policy.code());
    }
    println!();
    for metric in Metric::ALL {
        print!("{:<12}", metric.name());
        for row in &results.table.rows {
            let v = row.metric(metric);
            print!("{:>18}", format!("{:.2} ± {:.2}", v.mean, v.std));
        }
        println!();
    }
    println!("wrote {} files to {}", files.len(), resolved.out.display());
    Ok(())
}

fn test_stats(args: TestStatsArgs) -> Result<()> {
    let a = read_column(&args.file, &args.col_a, args.policy_a.as_deref())?;
    let file_b = args.file_b.as_deref().unwrap_or(&args.file);
    let b = read_column(file_b, &args.col_b, args.policy_b.as_deref())?;
    let r = mann_whitney_u(&a, &b)?;
    println!("n_a={} n_b={}", a.len(), b.len());
    println!("U={} U_a={} U_b={}", r.u, r.u_a, r.u_b);
    println!("p={} ({:?})", r.p, r.method);
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Run(args) => run(args),
        Command::TestStats(args) => test_stats(args),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
