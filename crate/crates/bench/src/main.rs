use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand};
use spformat::{gen_band, gen_random, write_matrix_market, WorkloadSpec};
use spformat_bench::{
    emit_report, normalize_summary, read_json_reports, run_experiment, BenchError, ExperimentConfig, OutputFormat,
};

/// Band widths appended by `--xl`.
const XL_BAND_WIDTHS: [usize; 6] = [1, 2, 4, 16, 32, 64];
const XL_N: usize = 8000;

#[derive(Parser)]
#[command(name = "bench", version, about = "Sparse format characterization sweeps")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the sweep described by a config file and write the report.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Worker threads (default: all cores).
        #[arg(long)]
        threads: Option<usize>,
        /// Include per-partition metrics in the output.
        #[arg(long)]
        per_partition: bool,
        /// Add the n=8000 band sweep to the configured workloads.
        #[arg(long)]
        xl: bool,
        /// Override the configured output path.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Override the configured output format.
        #[arg(long, value_parser = ["csv", "json"])]
        format: Option<String>,
    },
    /// Write a synthetic matrix as a Matrix Market file.
    Gen {
        #[command(subcommand)]
        kind: GenKind,
    },
    /// Print per-group normalized scores for JSON reports as CSV.
    Summarize {
        #[arg(required = true)]
        reports: Vec<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum GenKind {
    Random {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        density: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    Band {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        k: usize,
        #[arg(long)]
        out: PathBuf,
    },
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit_code(&err))
        }
    }
}

/// 2 for a failed SpMV verification, 1 for anything else.
fn exit_code(err: &anyhow::Error) -> u8 {
    let verification = err
        .chain()
        .any(|e| matches!(e.downcast_ref::<BenchError>(), Some(BenchError::Verification { .. })));
    if verification {
        2
    } else {
        1
    }
}

fn execute(cli: Cli) -> anyhow::Result<()> {
    match cli.command {
        Command::Run {
            config,
            threads,
            per_partition,
            xl,
            out,
            format,
        } => {
            let mut cfg = ExperimentConfig::load(&config)?;
            if xl {
                cfg.workloads
                    .extend(XL_BAND_WIDTHS.iter().map(|&k| WorkloadSpec::Band { n: XL_N, k }));
            }
            if let Some(out) = out {
                cfg.output.path = out;
            }
            match format.as_deref() {
                Some("json") => cfg.output.format = OutputFormat::Json,
                Some("csv") => cfg.output.format = OutputFormat::Csv,
                _ => {}
            }
            let reports = run_experiment(&cfg, threads)?;
            let path = cfg.output.resolved_path();
            for written in emit_report(&reports, cfg.output.format, &path, per_partition)? {
                eprintln!("wrote {}", written.display());
            }
        }
        Command::Gen { kind } => {
            let (matrix, out) = match kind {
                GenKind::Random { n, density, seed, out } => (gen_random(n, density, seed)?, out),
                GenKind::Band { n, k, out } => (gen_band(n, k)?, out),
            };
            write_matrix_market(&matrix, &out)?;
            eprintln!("wrote {} ({} non-zeros)", out.display(), matrix.nnz());
        }
        Command::Summarize { reports, out } => {
            let mut all = Vec::new();
            for path in &reports {
                all.extend(read_json_reports(path)?);
            }
            let csv = normalize_summary(&all)?.to_csv();
            match out {
                Some(path) => std::fs::write(&path, csv).with_context(|| format!("writing {}", path.display()))?,
                None => print!("{csv}"),
            }
        }
    }
    Ok(())
}
