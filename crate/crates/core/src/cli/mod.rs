//! The `ghvfdt` command line.

pub mod config;
pub mod report;

use std::ffi::OsString;
use std::fs::File;
use std::io::{self, BufReader, Write};
use std::path::PathBuf;

use clap::{Parser, Subcommand};

use crate::error::{Error, Result};
use crate::harness::dataset::{convert_to_binary, scan_csv, Dataset};
use crate::harness::run_grid;

pub use config::{ExperimentConfig, OutputFormat};
pub use report::{build_report, render, write_atomically, Report};

pub const THREADS_ENV: &str = "GHVFDT_THREADS";

#[derive(Debug, Parser)]
#[command(
    name = "ghvfdt",
    version,
    about = "Hoeffding trees with Hellinger split criteria on imbalanced streams"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run an experiment grid described by a config file.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Worker threads; defaults to the number of cores.
        #[arg(long, env = THREADS_ENV)]
        threads: Option<usize>,
        /// Overrides `output_path` from the config.
        #[arg(long)]
        output: Option<PathBuf>,
        /// Overrides `output_format` from the config.
        #[arg(long, value_enum)]
        format: Option<OutputFormat>,
    },
    /// Report row, feature and class counts of a dataset and flag bad values.
    Validate {
        path: PathBuf,
        #[arg(long, default_value_t = 200)]
        pretrain_pos: usize,
        #[arg(long, default_value_t = 1000)]
        pretrain_neg: usize,
        /// Ratios to check for feasibility.
        #[arg(long, value_delimiter = ',', default_value = "10,100,1000,10000")]
        ratios: Vec<u64>,
    },
    /// Convert a multi-class file into the binary CSV format.
    Convert {
        path: PathBuf,
        /// Class label(s) mapped to Positive; defaults to the least frequent class.
        #[arg(long, value_delimiter = ',')]
        minority_class: Vec<String>,
        /// Output file; stdout when omitted.
        #[arg(long)]
        output: Option<PathBuf>,
    },
}

/// Parses `args` (program name first) and runs the command, returning the
/// process exit code: 0 on success, 1 on error, 2 when some grid cells failed.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    match execute(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}

fn execute(command: Command) -> Result<i32> {
    match command {
        Command::Run {
            config,
            threads,
            output,
            format,
        } => cmd_run(config, threads, output, format),
        Command::Validate {
            path,
            pretrain_pos,
            pretrain_neg,
            ratios,
        } => cmd_validate(path, pretrain_pos, pretrain_neg, &ratios),
        Command::Convert {
            path,
            minority_class,
            output,
        } => cmd_convert(path, minority_class, output),
    }
}

pub fn cmd_run(
    config_path: PathBuf,
    threads: Option<usize>,
    output: Option<PathBuf>,
    format: Option<OutputFormat>,
) -> Result<i32> {
    let mut config = ExperimentConfig::from_path(&config_path)?;
    if let Some(f) = format {
        config.output_format = f;
        if output.is_none() && config.output_path.extension().is_some() {
            config.output_path.set_extension(f.extension());
        }
    }
    if let Some(o) = output {
        config.output_path = o;
    }
    let dataset = Dataset::from_csv_path(&config.dataset_path)?;
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = threads {
        if n == 0 {
            return Err(Error::Config("--threads must be at least 1".into()));
        }
        pool = pool.num_threads(n);
    }
    let pool = pool
        .build()
        .map_err(|e| Error::Config(format!("cannot start worker pool: {e}")))?;
    let records = pool.install(|| run_grid(&dataset, &config.grid))?;
    let report = build_report(&config, &records);
    let files = render(&report, &config.output_path, config.output_format)?;
    write_atomically(&files)?;
    let failed = report.failed_runs();
    eprintln!(
        "{} runs ({} failed) written to {}",
        records.len(),
        failed,
        config.output_path.display()
    );
    for r in records.iter().filter(|r| r.result().is_none()) {
        if let crate::harness::RunOutcome::Failed { error } = &r.outcome {
            eprintln!(
                "  failed: {} ratio {} labeling {} repeat {}: {error}",
                r.key.algorithm, r.key.ratio, r.key.labeling, r.key.repeat
            );
        }
    }
    Ok(if failed > 0 { 2 } else { 0 })
}

pub fn cmd_validate(
    path: PathBuf,
    pretrain_pos: usize,
    pretrain_neg: usize,
    ratios: &[u64],
) -> Result<i32> {
    let file = File::open(&path)?;
    let report = scan_csv(BufReader::new(file));
    let stdout = io::stdout();
    let mut out = stdout.lock();
    writeln!(out, "file: {}", path.display())?;
    writeln!(out, "rows: {}", report.rows)?;
    writeln!(out, "features: {}", report.features)?;
    writeln!(out, "positives: {}", report.positives)?;
    writeln!(out, "negatives: {}", report.negatives)?;
    writeln!(
        out,
        "pre-training quotas: {pretrain_pos} positive, {pretrain_neg} negative"
    )?;
    for &r in ratios {
        let (p, n) = report.achievable(r, pretrain_pos, pretrain_neg);
        let verdict = if p > 0 { "ok" } else { "not achievable" };
        writeln!(
            out,
            "ratio +1:-{r}: {p} positives, {n} negatives ({verdict})"
        )?;
    }
    for w in &report.warnings {
        writeln!(out, "warning: {w}")?;
    }
    for issue in &report.issues {
        writeln!(out, "line {}: {}", issue.line, issue.message)?;
    }
    writeln!(out, "issues: {}", report.issues.len())?;
    Ok(0)
}

pub fn cmd_convert(path: PathBuf, minority: Vec<String>, output: Option<PathBuf>) -> Result<i32> {
    let input = BufReader::new(File::open(&path)?);
    let minority = (!minority.is_empty()).then_some(minority);
    let source = path.display().to_string();
    let summary = match &output {
        Some(out) => {
            let mut buf = Vec::new();
            let s = convert_to_binary(input, &source, minority.as_deref(), &mut buf)?;
            write_atomically(&[(out.clone(), buf)])?;
            s
        }
        None => convert_to_binary(input, &source, minority.as_deref(), io::stdout().lock())?,
    };
    eprintln!(
        "{} rows, {} features; positive class {:?}: {} positive, {} negative",
        summary.rows, summary.features, summary.minority, summary.positives, summary.negatives
    );
    Ok(0)
}
