//! Command-line driver for the `jtcomp` library: seeded Monte-Carlo
//! experiments over the precoder designs, emitting CSV tables.
//!
//! Configuration comes from a flat `key = value` file plus command-line
//! overrides; every run is fully determined by the config and the master
//! seed, so identical invocations produce byte-identical CSV files.

use std::collections::BTreeMap;
use std::fs;
use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};

use jtcomp::harness::{
    certify, parse_config_text, run_experiment, trace_run, write_bounds, write_rates, write_trace,
    BoundsRow, RateRow, RunConfig,
};

#[derive(Parser)]
#[command(
    name = "jtcomp",
    version,
    about = "Monte-Carlo harness for joint-transmission precoder design under limited CSI feedback"
)]
struct Cli {
    /// Key-value config file (`key = value` lines, `#` comments).
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,

    /// Master seed; overrides the config file.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Directory for CSV output; overrides the `out_dir` config key.
    #[arg(long, global = true, value_name = "DIR")]
    out_dir: Option<PathBuf>,

    /// Worker threads for drop-level parallelism (0 = automatic).
    #[arg(long, global = true)]
    workers: Option<usize>,

    /// Override one config key, e.g. `--set drops=50`. Repeatable.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    overrides: Vec<String>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the drop x threshold x algorithm rate grid and write `rates.csv`.
    Run,
    /// Certify drops with branch-and-bound bounds and write `bounds.csv`.
    Certify,
    /// Dump per-iteration convergence traces for one drop to `trace.csv`.
    Trace,
}

fn load_config(cli: &Cli) -> Result<RunConfig> {
    let text = match &cli.config {
        Some(path) => fs::read_to_string(path)
            .with_context(|| format!("reading config file {}", path.display()))?,
        None => String::new(),
    };
    let mut map: BTreeMap<String, String> = parse_config_text(&text)?;
    for pair in &cli.overrides {
        let Some((key, value)) = pair.split_once('=') else {
            bail!("--set expects KEY=VALUE, got `{pair}`");
        };
        map.insert(key.trim().to_string(), value.trim().to_string());
    }
    if let Some(seed) = cli.seed {
        map.insert("seed".to_string(), seed.to_string());
    }
    if let Some(workers) = cli.workers {
        map.insert("workers".to_string(), workers.to_string());
    }
    Ok(RunConfig::from_map(map)?)
}

fn output_dir(cli: &Cli, config: &RunConfig) -> PathBuf {
    cli.out_dir
        .clone()
        .or_else(|| config.get("out_dir").map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("."))
}

/// Per-cell mean rates over the drop axis, in first-seen row order.
fn print_rate_summary(rows: &[RateRow]) {
    struct Cell {
        algorithm: String,
        threshold_db: f64,
        edge_snr_db: f64,
        drops: usize,
        failed: usize,
        sum_expected: f64,
        sum_actual: f64,
    }
    let mut cells: Vec<Cell> = Vec::new();
    for row in rows {
        let found = cells.iter_mut().find(|c| {
            c.algorithm == row.algorithm
                && c.threshold_db.to_bits() == row.threshold_db.to_bits()
                && c.edge_snr_db.to_bits() == row.edge_snr_db.to_bits()
        });
        let cell = match found {
            Some(cell) => cell,
            None => {
                cells.push(Cell {
                    algorithm: row.algorithm.clone(),
                    threshold_db: row.threshold_db,
                    edge_snr_db: row.edge_snr_db,
                    drops: 0,
                    failed: 0,
                    sum_expected: 0.0,
                    sum_actual: 0.0,
                });
                cells.last_mut().unwrap()
            }
        };
        cell.drops += 1;
        if row.actual_rate_bps_hz.is_nan() {
            cell.failed += 1;
        } else {
            cell.sum_expected += row.expected_rate_bps_hz;
            cell.sum_actual += row.actual_rate_bps_hz;
        }
    }
    if cells.is_empty() {
        println!("no rows produced");
        return;
    }
    println!(
        "{:<20} {:>12} {:>11} {:>6} {:>6} {:>13} {:>13}",
        "algorithm", "threshold_db", "edge_snr_db", "drops", "failed", "mean_expected", "mean_actual"
    );
    for c in &cells {
        let ok = (c.drops - c.failed) as f64;
        println!(
            "{:<20} {:>12} {:>11} {:>6} {:>6} {:>13.4} {:>13.4}",
            c.algorithm,
            c.threshold_db,
            c.edge_snr_db,
            c.drops,
            c.failed,
            c.sum_expected / ok,
            c.sum_actual / ok
        );
    }
}

/// Per-mode bound-gap summary over the certified drops.
fn print_bounds_summary(rows: &[BoundsRow]) {
    let mut modes: Vec<String> = Vec::new();
    for row in rows {
        if !modes.contains(&row.mode) {
            modes.push(row.mode.clone());
        }
    }
    if modes.is_empty() {
        println!("no rows produced");
        return;
    }
    println!(
        "{:<16} {:>6} {:>10} {:>10} {:>12}",
        "mode", "drops", "mean_gap", "max_gap", "mean_ssocp"
    );
    for mode in &modes {
        let picked: Vec<&BoundsRow> = rows.iter().filter(|r| &r.mode == mode).collect();
        let n = picked.len() as f64;
        let mean_gap: f64 = picked.iter().map(|r| r.bb_ub - r.bb_lb).sum::<f64>() / n;
        let max_gap = picked
            .iter()
            .map(|r| r.bb_ub - r.bb_lb)
            .fold(f64::NEG_INFINITY, f64::max);
        let mean_rate: f64 = picked.iter().map(|r| r.ssocp_rate).sum::<f64>() / n;
        println!(
            "{:<16} {:>6} {:>10.4} {:>10.4} {:>12.4}",
            mode,
            picked.len(),
            mean_gap,
            max_gap,
            mean_rate
        );
    }
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    let config = load_config(&cli)?;
    let dir = output_dir(&cli, &config);
    fs::create_dir_all(&dir)
        .with_context(|| format!("creating output directory {}", dir.display()))?;

    match cli.command {
        Command::Run => {
            let rows = run_experiment(&config)?;
            let path = dir.join("rates.csv");
            let mut file = fs::File::create(&path)
                .with_context(|| format!("creating {}", path.display()))?;
            write_rates(&mut file, &rows).context("writing rates.csv")?;
            print_rate_summary(&rows);
            println!("wrote {} rows to {}", rows.len(), path.display());
        }
        Command::Certify => {
            let rows = certify(&config)?;
            let path = dir.join("bounds.csv");
            let mut file = fs::File::create(&path)
                .with_context(|| format!("creating {}", path.display()))?;
            write_bounds(&mut file, &rows).context("writing bounds.csv")?;
            print_bounds_summary(&rows);
            println!("wrote {} rows to {}", rows.len(), path.display());
        }
        Command::Trace => {
            let rows = trace_run(&config)?;
            let path = dir.join("trace.csv");
            let mut file = fs::File::create(&path)
                .with_context(|| format!("creating {}", path.display()))?;
            write_trace(&mut file, &rows).context("writing trace.csv")?;
            println!("wrote {} rows to {}", rows.len(), path.display());
        }
    }
    Ok(())
}
