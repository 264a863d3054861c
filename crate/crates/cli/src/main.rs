//! `ecasim` — run, sweep, and compare WLAN medium-access scenarios.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use ecasim_core::report::{emit_rows, render, rows_from, OutputFormat};
use ecasim_core::runner::{summarize_scenario, sweep};
use ecasim_core::scenario::Scenario;

#[derive(Parser)]
#[command(name = "ecasim", version, about = "Slotted WLAN medium-access simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct CommonOpts {
    /// Override the scenario seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Override the replication count.
    #[arg(long)]
    replications: Option<u32>,
    /// Override the run duration in seconds of virtual time.
    #[arg(long)]
    duration: Option<f64>,
    /// Output format.
    #[arg(long, default_value = "csv", value_parser = parse_format)]
    format: OutputFormat,
    /// Output path; stdout when omitted.
    #[arg(long)]
    output: Option<PathBuf>,
}

fn parse_format(s: &str) -> Result<OutputFormat, String> {
    OutputFormat::parse(s).ok_or_else(|| format!("unknown format `{s}` (csv or json)"))
}

#[derive(Subcommand)]
enum Command {
    /// Run every replication of one scenario and emit a summary.
    Run {
        /// Scenario file (`key = value` lines, see the README grammar).
        #[arg(long)]
        scenario: PathBuf,
        #[command(flatten)]
        common: CommonOpts,
    },
    /// Run a scenario once per station count.
    Sweep {
        #[arg(long)]
        scenario: PathBuf,
        /// Station counts: comma list (`4,8,12`) and/or ranges with an
        /// optional step (`2-30:2`).
        #[arg(long)]
        stations: String,
        #[command(flatten)]
        common: CommonOpts,
    },
    /// Run two scenarios with the same overrides and emit paired rows
    /// tagged `a` and `b`.
    Compare {
        #[arg(long)]
        a: PathBuf,
        #[arg(long)]
        b: PathBuf,
        #[command(flatten)]
        common: CommonOpts,
    },
}

fn load_scenario(path: &Path, common: &CommonOpts) -> Result<Scenario> {
    let text = fs::read_to_string(path)
        .with_context(|| format!("cannot read scenario file {}", path.display()))?;
    let mut scenario = ecasim_core::parse_scenario(&text)
        .with_context(|| format!("in {}", path.display()))?;
    if let Some(seed) = common.seed {
        scenario.seed = seed;
    }
    if let Some(reps) = common.replications {
        scenario.replications = reps;
    }
    if let Some(duration) = common.duration {
        scenario.duration_s = duration;
    }
    scenario.validate().map_err(anyhow::Error::msg)?;
    Ok(scenario)
}

fn parse_station_list(spec: &str) -> Result<Vec<u32>> {
    let mut out = Vec::new();
    for part in spec.split(',') {
        let part = part.trim();
        if part.is_empty() {
            continue;
        }
        if let Some((range, step)) = part.split_once(':') {
            let step: u32 = step.trim().parse().context("invalid sweep step")?;
            let (lo, hi) = parse_range(range)?;
            if step == 0 {
                bail!("sweep step must be positive");
            }
            let mut n = lo;
            while n <= hi {
                out.push(n);
                n += step;
            }
        } else if part.contains('-') {
            let (lo, hi) = parse_range(part)?;
            out.extend(lo..=hi);
        } else {
            out.push(part.parse().with_context(|| format!("invalid station count `{part}`"))?);
        }
    }
    if out.is_empty() {
        bail!("empty station list");
    }
    Ok(out)
}

fn parse_range(s: &str) -> Result<(u32, u32)> {
    let (lo, hi) = s.split_once('-').context("expected `lo-hi` range")?;
    let lo: u32 = lo.trim().parse().context("invalid range start")?;
    let hi: u32 = hi.trim().parse().context("invalid range end")?;
    if lo > hi {
        bail!("range start {lo} exceeds end {hi}");
    }
    Ok((lo, hi))
}

fn write_output(rows: &[ecasim_core::ResultRow], common: &CommonOpts) -> Result<()> {
    match &common.output {
        Some(path) => emit_rows(rows, common.format, path)
            .with_context(|| format!("cannot write {}", path.display()))?,
        None => {
            let buf = render(rows, common.format);
            print!("{}", String::from_utf8_lossy(&buf));
        }
    }
    Ok(())
}

fn real_main() -> Result<()> {
    let cli = Cli::parse();
    match cli.command {
        Command::Run { scenario, common } => {
            let s = load_scenario(&scenario, &common)?;
            let point = summarize_scenario(&s)?;
            write_output(&rows_from(&[point], ""), &common)
        }
        Command::Sweep { scenario, stations, common } => {
            let s = load_scenario(&scenario, &common)?;
            let counts = parse_station_list(&stations)?;
            let points = sweep(&s, &counts)?;
            write_output(&rows_from(&points, ""), &common)
        }
        Command::Compare { a, b, common } => {
            let sa = load_scenario(&a, &common)?;
            let sb = load_scenario(&b, &common)?;
            let pa = summarize_scenario(&sa)?;
            let pb = summarize_scenario(&sb)?;
            let mut rows = rows_from(&[pa], "a");
            rows.extend(rows_from(&[pb], "b"));
            write_output(&rows, &common)
        }
    }
}

fn main() -> ExitCode {
    match real_main() {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::FAILURE
        }
    }
}
