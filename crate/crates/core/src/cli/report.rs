//! Result tables: per-run rows, per-cell summaries and significance blocks.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use super::config::{ConfigEcho, ExperimentConfig, OutputFormat};
use crate::error::{Error, Result};
use crate::harness::{RunOutcome, RunRecord};
use crate::metrics::{Metric, MetricSet};
use crate::significance::tukey_hsd;
use crate::split::Criterion;

/// Metrics that get a significance block, in table order.
pub const SIGNIFICANCE_METRICS: [Metric; 4] =
    [Metric::FScore, Metric::GMean, Metric::Recall, Metric::Fpr];

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MeanStd {
    pub mean: f64,
    /// Sample standard deviation; 0 for a single run.
    pub std: f64,
}

pub fn mean_std(values: &[f64]) -> Option<MeanStd> {
    if values.is_empty() {
        return None;
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let std = if values.len() < 2 {
        0.0
    } else {
        (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
    };
    Some(MeanStd { mean, std })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AlgorithmSummary {
    pub algorithm: String,
    pub completed: usize,
    pub failed: usize,
    pub recall: Option<MeanStd>,
    pub fpr: Option<MeanStd>,
    pub gmean: Option<MeanStd>,
    pub fscore: Option<MeanStd>,
    pub precision: Option<MeanStd>,
}

impl AlgorithmSummary {
    fn get(&self, m: Metric) -> Option<MeanStd> {
        match m {
            Metric::Recall => self.recall,
            Metric::Fpr => self.fpr,
            Metric::GMean => self.gmean,
            Metric::FScore => self.fscore,
            Metric::Precision => self.precision,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PairRow {
    pub a: String,
    pub b: String,
    pub mean_a: f64,
    pub mean_b: f64,
    pub mean_difference: f64,
    pub p_value: f64,
    pub significant: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricSignificance {
    pub metric: String,
    pub f_statistic: Option<f64>,
    pub p_value: Option<f64>,
    pub pairwise: Vec<PairRow>,
    /// Why the tests could not run, if they could not.
    pub note: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CellRuns {
    pub algorithm: String,
    pub runs: Vec<RunRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CellReport {
    pub ratio: u64,
    pub labeling: f64,
    pub summaries: Vec<AlgorithmSummary>,
    pub significance: Vec<MetricSignificance>,
    pub runs: Vec<CellRuns>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub config: ConfigEcho,
    pub cells: Vec<CellReport>,
}

impl Report {
    pub fn failed_runs(&self) -> usize {
        self.cells
            .iter()
            .flat_map(|c| &c.summaries)
            .map(|s| s.failed)
            .sum()
    }
}

fn values(runs: &[&RunRecord], m: Metric) -> Vec<f64> {
    runs.iter()
        .filter_map(|r| r.result())
        .map(|r| r.confusion.metrics().get(m))
        .collect()
}

fn significance(
    groups: &[(Criterion, Vec<&RunRecord>)],
    metric: Metric,
    alpha: f64,
) -> MetricSignificance {
    let named: Vec<(&str, Vec<f64>)> = groups
        .iter()
        .map(|(a, runs)| (a.algorithm_name(), values(runs, metric)))
        .collect();
    let mut out = MetricSignificance {
        metric: metric.name().to_string(),
        f_statistic: None,
        p_value: None,
        pairwise: Vec::new(),
        note: None,
    };
    if named.len() < 2 {
        out.note = Some("needs at least two algorithms".into());
        return out;
    }
    match tukey_hsd(&named, alpha) {
        Ok(rep) => {
            out.f_statistic = Some(rep.f_statistic);
            out.p_value = Some(rep.p_value);
            let mean_of = |name: &str| {
                let i = rep
                    .groups
                    .iter()
                    .position(|g| g == name)
                    .expect("group present");
                rep.means[i]
            };
            out.pairwise = rep
                .pairwise
                .iter()
                .map(|p| PairRow {
                    a: p.a.clone(),
                    b: p.b.clone(),
                    mean_a: mean_of(&p.a),
                    mean_b: mean_of(&p.b),
                    mean_difference: p.mean_difference,
                    p_value: p.p_value,
                    significant: p.significant,
                })
                .collect();
        }
        Err(e) => out.note = Some(e.to_string()),
    }
    out
}

pub fn build_report(config: &ExperimentConfig, records: &[RunRecord]) -> Report {
    let g = &config.grid;
    let mut cells = Vec::new();
    for &ratio in &g.ratios {
        for &labeling in &g.labelings {
            let groups: Vec<(Criterion, Vec<&RunRecord>)> = g
                .algorithms
                .iter()
                .map(|&a| {
                    let runs = records
                        .iter()
                        .filter(|r| {
                            r.key.algorithm == a
                                && r.key.ratio == ratio
                                && r.key.labeling == labeling
                        })
                        .collect();
                    (a, runs)
                })
                .collect();
            let summaries = groups
                .iter()
                .map(|(a, runs)| {
                    let completed = runs.iter().filter(|r| r.result().is_some()).count();
                    AlgorithmSummary {
                        algorithm: a.algorithm_name().to_string(),
                        completed,
                        failed: runs.len() - completed,
                        recall: mean_std(&values(runs, Metric::Recall)),
                        fpr: mean_std(&values(runs, Metric::Fpr)),
                        gmean: mean_std(&values(runs, Metric::GMean)),
                        fscore: mean_std(&values(runs, Metric::FScore)),
                        precision: mean_std(&values(runs, Metric::Precision)),
                    }
                })
                .collect();
            let significance = SIGNIFICANCE_METRICS
                .iter()
                .map(|&m| significance(&groups, m, config.alpha))
                .collect();
            let runs = groups
                .iter()
                .map(|(a, runs)| CellRuns {
                    algorithm: a.algorithm_name().to_string(),
                    runs: runs.iter().map(|r| (*r).clone()).collect(),
                })
                .collect();
            cells.push(CellReport {
                ratio,
                labeling,
                summaries,
                significance,
                runs,
            });
        }
    }
    Report {
        config: config.echo(),
        cells,
    }
}

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn csv_err(e: csv::Error) -> Error {
    Error::Io(std::io::Error::other(e))
}

/// Config columns carried by every CSV row.
fn provenance(c: &ConfigEcho) -> Vec<(&'static str, String)> {
    vec![
        ("dataset", c.dataset.clone()),
        ("delta", c.delta.to_string()),
        ("tau", c.tau.to_string()),
        ("bins", c.bins.to_string()),
        ("grace_period", c.grace_period.to_string()),
        ("max_leaves", c.max_leaves.to_string()),
        ("pretrain_pos", c.pretrain_pos.to_string()),
        ("pretrain_neg", c.pretrain_neg.to_string()),
        ("shuffle", c.shuffle.to_string()),
        ("max_eval_positives", opt(c.max_eval_positives)),
    ]
}

pub fn runs_csv(report: &Report) -> Result<Vec<u8>> {
    let prov = provenance(&report.config);
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header: Vec<&str> = vec!["algorithm", "ratio", "labeling", "repeat", "seed"];
    header.extend(prov.iter().map(|(k, _)| *k));
    header.extend([
        "status",
        "tp",
        "fp",
        "tn",
        "fn",
        "instances",
        "labeled",
        "recall",
        "fpr",
        "gmean",
        "fscore",
        "precision",
        "splits",
        "leaves",
        "depth",
        "memory_cells",
        "error",
    ]);
    w.write_record(&header).map_err(csv_err)?;
    for cell in &report.cells {
        for group in &cell.runs {
            for run in &group.runs {
                let k = &run.key;
                let mut row = vec![
                    k.algorithm.algorithm_name().to_string(),
                    k.ratio.to_string(),
                    k.labeling.to_string(),
                    k.repeat.to_string(),
                    k.seed.to_string(),
                ];
                row.extend(prov.iter().map(|(_, v)| v.clone()));
                match &run.outcome {
                    RunOutcome::Completed(r) => {
                        let m: MetricSet = r.confusion.metrics();
                        let c = r.confusion;
                        row.push("completed".into());
                        for v in [c.tp, c.fp, c.tn, c.fn_, r.instances_processed, r.labeled] {
                            row.push(v.to_string());
                        }
                        for v in [m.recall, m.fpr, m.gmean, m.fscore, m.precision] {
                            row.push(v.to_string());
                        }
                        row.push(r.splits.to_string());
                        for v in [r.leaves, r.depth, r.memory_cells] {
                            row.push(v.to_string());
                        }
                        row.push(String::new());
                    }
                    RunOutcome::Failed { error } => {
                        row.push("failed".into());
                        row.extend(std::iter::repeat_n(String::new(), 15));
                        row.push(error.clone());
                    }
                }
                w.write_record(&row).map_err(csv_err)?;
            }
        }
    }
    w.into_inner().map_err(|e| Error::Io(e.into_error()))
}

pub fn summary_csv(report: &Report) -> Result<Vec<u8>> {
    let prov = provenance(&report.config);
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header: Vec<String> = ["algorithm", "ratio", "labeling", "repeats", "seed"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    header.extend(prov.iter().map(|(k, _)| k.to_string()));
    header.extend(["completed".to_string(), "failed".to_string()]);
    for m in Metric::ALL {
        header.push(format!("{}_mean", m.name()));
        header.push(format!("{}_std", m.name()));
    }
    w.write_record(&header).map_err(csv_err)?;
    for cell in &report.cells {
        for s in &cell.summaries {
            let mut row = vec![
                s.algorithm.clone(),
                cell.ratio.to_string(),
                cell.labeling.to_string(),
                report.config.repeats.to_string(),
                report.config.seed.to_string(),
            ];
            row.extend(prov.iter().map(|(_, v)| v.clone()));
            row.push(s.completed.to_string());
            row.push(s.failed.to_string());
            for m in Metric::ALL {
                let ms = s.get(m);
                row.push(opt(ms.map(|x| x.mean)));
                row.push(opt(ms.map(|x| x.std)));
            }
            w.write_record(&row).map_err(csv_err)?;
        }
    }
    w.into_inner().map_err(|e| Error::Io(e.into_error()))
}

pub fn significance_csv(report: &Report) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record([
        "dataset",
        "ratio",
        "labeling",
        "metric",
        "alpha",
        "f_statistic",
        "anova_p",
        "a",
        "b",
        "mean_a",
        "mean_b",
        "mean_difference",
        "tukey_p",
        "significant",
        "note",
    ])
    .map_err(csv_err)?;
    let c = &report.config;
    for cell in &report.cells {
        for sig in &cell.significance {
            let lead = vec![
                c.dataset.clone(),
                cell.ratio.to_string(),
                cell.labeling.to_string(),
                sig.metric.clone(),
                c.alpha.to_string(),
                opt(sig.f_statistic),
                opt(sig.p_value),
            ];
            if sig.pairwise.is_empty() {
                let mut row = lead.clone();
                row.extend(std::iter::repeat_n(String::new(), 7));
                row.push(opt(sig.note.clone()));
                w.write_record(&row).map_err(csv_err)?;
            }
            for p in &sig.pairwise {
                let mut row = lead.clone();
                row.extend([
                    p.a.clone(),
                    p.b.clone(),
                    p.mean_a.to_string(),
                    p.mean_b.to_string(),
                    p.mean_difference.to_string(),
                    p.p_value.to_string(),
                    p.significant.to_string(),
                    opt(sig.note.clone()),
                ]);
                w.write_record(&row).map_err(csv_err)?;
            }
        }
    }
    w.into_inner().map_err(|e| Error::Io(e.into_error()))
}

/// `results.csv` gives `results.summary.csv` and `results.significance.csv`.
pub fn companion_path(path: &Path, tag: &str) -> PathBuf {
    let stem = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    let ext = path
        .extension()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "csv".into());
    path.with_file_name(format!("{stem}.{tag}.{ext}"))
}

/// Serialized output files for `report`, as `(path, bytes)`.
pub fn render(
    report: &Report,
    path: &Path,
    format: OutputFormat,
) -> Result<Vec<(PathBuf, Vec<u8>)>> {
    Ok(match format {
        OutputFormat::Csv => vec![
            (path.to_path_buf(), runs_csv(report)?),
            (companion_path(path, "summary"), summary_csv(report)?),
            (
                companion_path(path, "significance"),
                significance_csv(report)?,
            ),
        ],
        OutputFormat::Json => {
            let mut bytes = serde_json::to_vec_pretty(report)?;
            bytes.push(b'\n');
            vec![(path.to_path_buf(), bytes)]
        }
    })
}

/// Writes every file to a temporary sibling first and renames only once all
/// writes succeeded, so a failure never leaves partial results behind.
pub fn write_atomically(files: &[(PathBuf, Vec<u8>)]) -> Result<()> {
    let mut staged: Vec<(PathBuf, &Path)> = Vec::new();
    let cleanup = |staged: &[(PathBuf, &Path)]| {
        for (tmp, _) in staged {
            let _ = fs::remove_file(tmp);
        }
    };
    for (path, bytes) in files {
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            if let Err(e) = fs::create_dir_all(dir) {
                cleanup(&staged);
                return Err(e.into());
            }
        }
        let name = path
            .file_name()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_default();
        let tmp = path.with_file_name(format!(".{name}.{}.tmp", std::process::id()));
        if let Err(e) = fs::write(&tmp, bytes) {
            let _ = fs::remove_file(&tmp);
            cleanup(&staged);
            return Err(e.into());
        }
        staged.push((tmp, path.as_path()));
    }
    for (tmp, path) in &staged {
        if let Err(e) = fs::rename(tmp, path) {
            cleanup(&staged);
            return Err(e.into());
        }
    }
    Ok(())
}
