//! Binary-labeled datasets loaded from CSV.
//!
//! File format: a header row, then one row per instance with `m` decimal
//! feature columns followed by the class label. Labels are `1` (Positive)
//! and `-1` (Negative); `0` is also read as Negative so `{0, 1}` files load
//! unchanged.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::types::ClassLabel;

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub name: String,
    pub feature_names: Vec<String>,
    rows: Vec<Vec<f64>>,
    labels: Vec<ClassLabel>,
}

impl Dataset {
    pub fn new(
        name: impl Into<String>,
        feature_names: Vec<String>,
        rows: Vec<Vec<f64>>,
        labels: Vec<ClassLabel>,
    ) -> Result<Self> {
        if rows.len() != labels.len() {
            return Err(Error::invalid("rows and labels differ in length"));
        }
        let dims = feature_names.len();
        if dims == 0 {
            return Err(Error::invalid("dataset needs at least one feature"));
        }
        for (i, row) in rows.iter().enumerate() {
            if row.len() != dims {
                return Err(Error::invalid(format!(
                    "row {i} has {} features, expected {dims}",
                    row.len()
                )));
            }
            if row.iter().any(|v| !v.is_finite()) {
                return Err(Error::invalid(format!("row {i} has a non-finite feature")));
            }
        }
        Ok(Self {
            name: name.into(),
            feature_names,
            rows,
            labels,
        })
    }

    pub fn from_csv_path(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = File::open(path)?;
        let name = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "dataset".into());
        Self::from_csv_reader(file, &path.display().to_string(), &name)
    }

    /// Parses CSV text. `source` is used in error messages.
    pub fn from_csv_reader<R: Read>(reader: R, source: &str, name: &str) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(true)
            .flexible(true)
            .trim(csv::Trim::All)
            .from_reader(reader);
        let parse_err = |line: u64, message: String| Error::Parse {
            path: source.to_string(),
            line,
            message,
        };
        let header = rdr
            .headers()
            .map_err(|e| parse_err(1, e.to_string()))?
            .clone();
        if header.len() < 2 {
            return Err(parse_err(
                1,
                "header needs at least one feature column and a label column".into(),
            ));
        }
        let dims = header.len() - 1;
        let feature_names = header.iter().take(dims).map(str::to_string).collect();

        let mut rows = Vec::new();
        let mut labels = Vec::new();
        for record in rdr.records() {
            let record = record.map_err(|e| {
                let line = e.position().map_or(0, |p| p.line());
                parse_err(line, e.to_string())
            })?;
            let line = record.position().map_or(0, |p| p.line());
            if record.len() != dims + 1 {
                return Err(parse_err(
                    line,
                    format!("expected {} columns, found {}", dims + 1, record.len()),
                ));
            }
            let mut row = Vec::with_capacity(dims);
            for (j, field) in record.iter().take(dims).enumerate() {
                let v: f64 = field.parse().map_err(|_| {
                    parse_err(line, format!("column {j}: '{field}' is not a number"))
                })?;
                if !v.is_finite() {
                    return Err(parse_err(
                        line,
                        format!("column {j}: non-finite value '{field}'"),
                    ));
                }
                row.push(v);
            }
            let label = parse_label(&record[dims]).ok_or_else(|| {
                parse_err(
                    line,
                    format!("label '{}' is not one of -1, 0, 1", &record[dims]),
                )
            })?;
            rows.push(row);
            labels.push(label);
        }
        Ok(Self {
            name: name.to_string(),
            feature_names,
            rows,
            labels,
        })
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn dims(&self) -> usize {
        self.feature_names.len()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.rows[i]
    }

    pub fn label(&self, i: usize) -> ClassLabel {
        self.labels[i]
    }

    pub fn labels(&self) -> &[ClassLabel] {
        &self.labels
    }

    pub fn class_count(&self, label: ClassLabel) -> usize {
        self.labels.iter().filter(|&&l| l == label).count()
    }

    /// Writes the dataset in the loader's CSV format.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        let mut header: Vec<&str> = self.feature_names.iter().map(String::as_str).collect();
        header.push("label");
        w.write_record(&header).map_err(csv_io)?;
        for (row, label) in self.rows.iter().zip(&self.labels) {
            let mut fields: Vec<String> = row.iter().map(|v| v.to_string()).collect();
            fields.push(label.as_signed().to_string());
            w.write_record(&fields).map_err(csv_io)?;
        }
        w.flush()?;
        Ok(())
    }
}

fn csv_io(e: csv::Error) -> Error {
    Error::Io(std::io::Error::other(e))
}

fn parse_label(field: &str) -> Option<ClassLabel> {
    let v: f64 = field.parse().ok()?;
    if v == 1.0 {
        Some(ClassLabel::Positive)
    } else if v == -1.0 || v == 0.0 {
        Some(ClassLabel::Negative)
    } else {
        None
    }
}

/// A problem found while scanning a dataset file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Issue {
    pub line: u64,
    pub message: String,
}

/// Report-only summary of a dataset file.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationReport {
    pub rows: usize,
    pub features: usize,
    pub positives: usize,
    pub negatives: usize,
    pub issues: Vec<Issue>,
    pub warnings: Vec<String>,
}

impl ValidationReport {
    /// Largest evaluation stream available at ratio `+1:-r` once the
    /// pre-training quotas are set aside, as `(positives, negatives)`.
    pub fn achievable(
        &self,
        ratio: u64,
        pretrain_pos: usize,
        pretrain_neg: usize,
    ) -> (usize, usize) {
        let pos = self.positives.saturating_sub(pretrain_pos);
        let neg = self.negatives.saturating_sub(pretrain_neg);
        let n_pos = pos.min(neg / ratio.max(1) as usize);
        (n_pos, n_pos * ratio as usize)
    }
}

/// Scans a dataset without failing on bad rows: every problem is recorded
/// with its line number.
pub fn scan_csv<R: Read>(reader: R) -> ValidationReport {
    let mut report = ValidationReport {
        rows: 0,
        features: 0,
        positives: 0,
        negatives: 0,
        issues: Vec::new(),
        warnings: Vec::new(),
    };
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let mut records = rdr.records();
    let header = match records.next() {
        None => {
            report.warnings.push("file is empty".into());
            return report;
        }
        Some(Err(e)) => {
            report.issues.push(Issue {
                line: 1,
                message: e.to_string(),
            });
            return report;
        }
        Some(Ok(h)) => h,
    };
    if header.len() < 2 {
        report.issues.push(Issue {
            line: 1,
            message: "header needs a feature column and a label column".into(),
        });
        return report;
    }
    let dims = header.len() - 1;
    report.features = dims;
    for record in records {
        let record = match record {
            Ok(r) => r,
            Err(e) => {
                report.issues.push(Issue {
                    line: e.position().map_or(0, |p| p.line()),
                    message: e.to_string(),
                });
                continue;
            }
        };
        let line = record.position().map_or(0, |p| p.line());
        report.rows += 1;
        if record.len() != dims + 1 {
            report.issues.push(Issue {
                line,
                message: format!("expected {} columns, found {}", dims + 1, record.len()),
            });
            continue;
        }
        for (j, field) in record.iter().take(dims).enumerate() {
            match field.parse::<f64>() {
                Ok(v) if v.is_finite() => {}
                Ok(_) => report.issues.push(Issue {
                    line,
                    message: format!("column {j}: non-finite value '{field}'"),
                }),
                Err(_) => report.issues.push(Issue {
                    line,
                    message: format!("column {j}: '{field}' is not a number"),
                }),
            }
        }
        match parse_label(&record[dims]) {
            Some(ClassLabel::Positive) => report.positives += 1,
            Some(ClassLabel::Negative) => report.negatives += 1,
            None => report.issues.push(Issue {
                line,
                message: format!("label '{}' is not one of -1, 0, 1", &record[dims]),
            }),
        }
    }
    if report.rows == 0 {
        report.warnings.push("no data rows".into());
    }
    if report.positives > report.negatives {
        report
            .warnings
            .push("more positives than negatives: Positive is expected to be the minority".into());
    }
    report
}

/// What [`convert_to_binary`] did.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConversionSummary {
    pub rows: usize,
    pub features: usize,
    pub had_header: bool,
    pub minority: Vec<String>,
    pub class_counts: BTreeMap<String, usize>,
    pub positives: usize,
    pub negatives: usize,
}

fn split_fields(line: &str) -> Vec<String> {
    let fields: Vec<&str> = if line.contains(',') {
        line.split(',').collect()
    } else if line.contains(';') {
        line.split(';').collect()
    } else {
        line.split_whitespace().collect()
    };
    fields.iter().map(|f| f.trim().to_string()).collect()
}

/// Turns a multi-class file into the binary loader format: rows whose
/// final column is one of `minority` become Positive, all others Negative.
/// With no minority given, the least frequent class is used (ties go to the
/// lexicographically smallest label).
///
/// The input may be comma, semicolon, tab or whitespace separated, with or
/// without a header row (detected by a non-numeric feature field on the first line).
pub fn convert_to_binary<R: BufRead, W: Write>(
    input: R,
    source: &str,
    minority: Option<&[String]>,
    output: W,
) -> Result<ConversionSummary> {
    let mut header: Option<Vec<String>> = None;
    let mut rows: Vec<(Vec<String>, String)> = Vec::new();
    let mut dims = None;
    for (i, line) in input.lines().enumerate() {
        let line = line?;
        let line_no = i as u64 + 1;
        if line.trim().is_empty() {
            continue;
        }
        let fields = split_fields(&line);
        if fields.len() < 2 {
            return Err(Error::Parse {
                path: source.into(),
                line: line_no,
                message: "need at least one feature and a label".into(),
            });
        }
        let d = fields.len() - 1;
        if header.is_none()
            && rows.is_empty()
            && fields[..d].iter().any(|f| f.parse::<f64>().is_err())
        {
            header = Some(fields[..d].to_vec());
            dims = Some(d);
            continue;
        }
        match dims {
            None => dims = Some(d),
            Some(expected) if expected != d => {
                return Err(Error::Parse {
                    path: source.into(),
                    line: line_no,
                    message: format!("expected {} columns, found {}", expected + 1, d + 1),
                })
            }
            _ => {}
        }
        for (j, f) in fields[..d].iter().enumerate() {
            match f.parse::<f64>() {
                Ok(v) if v.is_finite() => {}
                _ => {
                    return Err(Error::Parse {
                        path: source.into(),
                        line: line_no,
                        message: format!("column {j}: '{f}' is not a finite number"),
                    })
                }
            }
        }
        let mut fields = fields;
        let label = fields.pop().expect("at least two fields");
        rows.push((fields, label));
    }
    let dims = dims.ok_or_else(|| Error::invalid(format!("{source}: no data rows")))?;

    let mut class_counts: BTreeMap<String, usize> = BTreeMap::new();
    for (_, label) in &rows {
        *class_counts.entry(label.clone()).or_default() += 1;
    }
    let minority: Vec<String> = match minority {
        Some(labels) if !labels.is_empty() => {
            for l in labels {
                if !class_counts.contains_key(l) {
                    return Err(Error::Config(format!(
                        "minority class '{l}' does not occur in {source}"
                    )));
                }
            }
            labels.to_vec()
        }
        _ => {
            let (label, _) = class_counts
                .iter()
                .min_by(|a, b| a.1.cmp(b.1).then_with(|| a.0.cmp(b.0)))
                .expect("at least one row");
            vec![label.clone()]
        }
    };

    let mut w = csv::Writer::from_writer(output);
    let mut head: Vec<String> = header
        .clone()
        .unwrap_or_else(|| (0..dims).map(|j| format!("f{j}")).collect());
    head.push("label".into());
    w.write_record(&head).map_err(csv_io)?;
    let mut positives = 0;
    for (features, label) in &rows {
        let positive = minority.contains(label);
        positives += positive as usize;
        let mut out = features.clone();
        out.push(if positive { "1" } else { "-1" }.into());
        w.write_record(&out).map_err(csv_io)?;
    }
    w.flush()?;
    Ok(ConversionSummary {
        rows: rows.len(),
        features: dims,
        had_header: header.is_some(),
        minority,
        class_counts,
        positives,
        negatives: rows.len() - positives,
    })
}

/// Loads either a binary CSV in the loader format or, when that fails, a raw
/// multi-class file converted on the fly with `minority` as Positive.
pub fn load_or_convert(path: impl AsRef<Path>, minority: &[String]) -> Result<Dataset> {
    let path = path.as_ref();
    match Dataset::from_csv_path(path) {
        Ok(ds) if !ds.is_empty() => Ok(ds),
        _ => {
            let input = BufReader::new(File::open(path)?);
            let mut buf = Vec::new();
            convert_to_binary(input, &path.display().to_string(), Some(minority), &mut buf)?;
            let name = path
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_else(|| "dataset".into());
            Dataset::from_csv_reader(buf.as_slice(), &path.display().to_string(), &name)
        }
    }
}
