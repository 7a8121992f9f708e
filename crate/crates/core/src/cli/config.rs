//! Flat `key = value` experiment configuration.
//!
//! Blank lines and lines starting with `#` are ignored. Lists are comma
//! separated. Relative paths are resolved against the config file's directory.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::harness::GridSpec;
use crate::split::Criterion;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Csv,
    Json,
}

impl OutputFormat {
    pub fn extension(self) -> &'static str {
        match self {
            OutputFormat::Csv => "csv",
            OutputFormat::Json => "json",
        }
    }
}

impl FromStr for OutputFormat {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            _ => Err(format!("'{s}' is not csv or json")),
        }
    }
}

impl fmt::Display for OutputFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.extension())
    }
}

pub const KEYS: [&str; 18] = [
    "dataset_path",
    "algorithms",
    "ratios",
    "labelings",
    "repeats",
    "seed",
    "delta",
    "tau",
    "bins",
    "grace_period",
    "max_leaves",
    "pretrain_pos",
    "pretrain_neg",
    "shuffle",
    "max_eval_positives",
    "alpha",
    "output_path",
    "output_format",
];

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    /// As written in the config file.
    pub dataset: String,
    pub dataset_path: PathBuf,
    pub grid: GridSpec,
    pub alpha: f64,
    pub output_path: PathBuf,
    pub output_format: OutputFormat,
}

/// Everything needed to reproduce a run, in a fixed order.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConfigEcho {
    pub dataset: String,
    pub algorithms: Vec<String>,
    pub ratios: Vec<u64>,
    pub labelings: Vec<f64>,
    pub repeats: u32,
    pub seed: u64,
    pub delta: f64,
    pub tau: f64,
    pub bins: usize,
    pub grace_period: u64,
    pub max_leaves: usize,
    pub pretrain_pos: usize,
    pub pretrain_neg: usize,
    pub shuffle: bool,
    pub max_eval_positives: Option<usize>,
    pub alpha: f64,
}

fn parse_list<T: FromStr>(value: &str) -> std::result::Result<Vec<T>, String>
where
    T::Err: fmt::Display,
{
    let items: Vec<&str> = value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .collect();
    if items.is_empty() {
        return Err("empty list".into());
    }
    items
        .iter()
        .map(|s| s.parse::<T>().map_err(|e| format!("'{s}': {e}")))
        .collect()
}

fn parse_one<T: FromStr>(value: &str) -> std::result::Result<T, String>
where
    T::Err: fmt::Display,
{
    value.parse::<T>().map_err(|e| format!("'{value}': {e}"))
}

fn parse_bool(value: &str) -> std::result::Result<bool, String> {
    match value.to_ascii_lowercase().as_str() {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        _ => Err(format!("'{value}' is not a boolean")),
    }
}

impl ExperimentConfig {
    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        let base = path.parent().unwrap_or_else(|| Path::new("."));
        Self::parse(&text, base)
    }

    /// Parses config text. All problems are collected and reported together.
    pub fn parse(text: &str, base_dir: &Path) -> Result<Self> {
        let mut grid = GridSpec::default();
        let mut alpha = 0.01;
        let mut dataset: Option<String> = None;
        let mut output: Option<String> = None;
        let mut output_format = OutputFormat::Csv;
        let mut seen: Vec<&str> = Vec::new();
        let mut problems: Vec<String> = Vec::new();

        for (i, raw) in text.lines().enumerate() {
            let line_no = i + 1;
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                problems.push(format!("line {line_no}: expected key = value"));
                continue;
            };
            let key = key.trim();
            let value = value.trim();
            let Some(&known) = KEYS.iter().find(|k| **k == key) else {
                problems.push(format!("line {line_no}: unknown key '{key}'"));
                continue;
            };
            if seen.contains(&known) {
                problems.push(format!("line {line_no}: duplicate key '{key}'"));
                continue;
            }
            seen.push(known);
            let outcome: std::result::Result<(), String> = (|| {
                match known {
                    "dataset_path" => dataset = Some(value.to_string()),
                    "algorithms" => grid.algorithms = parse_list::<Criterion>(value)?,
                    "ratios" => grid.ratios = parse_list(value)?,
                    "labelings" => grid.labelings = parse_list(value)?,
                    "repeats" => grid.repeats = parse_one(value)?,
                    "seed" => grid.base_seed = parse_one(value)?,
                    "delta" => grid.tree.delta = parse_one(value)?,
                    "tau" => grid.tree.tau = parse_one(value)?,
                    "bins" => grid.tree.bins = parse_one(value)?,
                    "grace_period" => grid.tree.grace_period = parse_one(value)?,
                    "max_leaves" => grid.tree.max_leaves = parse_one(value)?,
                    "pretrain_pos" => grid.pretrain_pos = parse_one(value)?,
                    "pretrain_neg" => grid.pretrain_neg = parse_one(value)?,
                    "shuffle" => grid.shuffle = parse_bool(value)?,
                    "max_eval_positives" => {
                        grid.max_eval_positives = match value {
                            "" | "all" | "0" => None,
                            v => Some(parse_one(v)?),
                        }
                    }
                    "alpha" => {
                        alpha = parse_one(value)?;
                        if !(alpha > 0.0 && alpha < 1.0) {
                            return Err(format!("'{value}' must lie in (0, 1)"));
                        }
                    }
                    "output_path" => output = Some(value.to_string()),
                    "output_format" => output_format = parse_one(value)?,
                    _ => unreachable!("key list and match arms agree"),
                }
                Ok(())
            })();
            if let Err(msg) = outcome {
                problems.push(format!("line {line_no}: invalid value for '{key}': {msg}"));
            }
        }
        if dataset.is_none() {
            problems.push("missing required key 'dataset_path'".into());
        }
        if problems.is_empty() {
            if let Err(e) = grid.validate() {
                problems.push(e.to_string());
            }
        }
        if !problems.is_empty() {
            return Err(Error::Config(problems.join("; ")));
        }
        let dataset = dataset.expect("checked above");
        let output_path = match output {
            Some(p) => base_dir.join(p),
            None => PathBuf::from(format!("results.{}", output_format.extension())),
        };
        Ok(Self {
            dataset_path: base_dir.join(&dataset),
            dataset,
            grid,
            alpha,
            output_path,
            output_format,
        })
    }

    pub fn echo(&self) -> ConfigEcho {
        let g = &self.grid;
        ConfigEcho {
            dataset: self.dataset.clone(),
            algorithms: g
                .algorithms
                .iter()
                .map(|a| a.algorithm_name().to_string())
                .collect(),
            ratios: g.ratios.clone(),
            labelings: g.labelings.clone(),
            repeats: g.repeats,
            seed: g.base_seed,
            delta: g.tree.delta,
            tau: g.tree.tau,
            bins: g.tree.bins,
            grace_period: g.tree.grace_period,
            max_leaves: g.tree.max_leaves,
            pretrain_pos: g.pretrain_pos,
            pretrain_neg: g.pretrain_neg,
            shuffle: g.shuffle,
            max_eval_positives: g.max_eval_positives,
            alpha: self.alpha,
        }
    }
}
