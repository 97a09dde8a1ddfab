//! Collects the CSVs of one or more run directories into one place, with a
//! long-format table for aggregation over repeated runs.
//!
//! Output files:
//!
//! ```text
//! reports.csv    every report row, prefixed with its run
//! aggregate.csv  iteration,metric,run,value
//! summary.csv    iteration,metric,runs,mean,stderr
//! records.csv    game rows of runs that have them
//! elo.csv        ratings fitted to those records
//! ```

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::eval::{compute_elo, read_records_csv, write_elo_csv, write_records_csv, MatchRecord, PairResult};
use crate::pipeline::{read_reports, ReportRow};

#[derive(Serialize)]
struct RunReportRow<'a> {
    run: &'a str,
    i: usize,
    examples: usize,
    mean_loss: f64,
    arena_w: usize,
    arena_d: usize,
    arena_l: usize,
    accepted: bool,
}

#[derive(Serialize)]
struct AggregateRow<'a> {
    iteration: usize,
    metric: &'a str,
    run: &'a str,
    value: f64,
}

#[derive(Serialize)]
struct SummaryRow<'a> {
    iteration: usize,
    metric: &'a str,
    runs: usize,
    mean: f64,
    stderr: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExportSummary {
    pub runs: usize,
    pub report_rows: usize,
    pub record_rows: usize,
    pub files: Vec<PathBuf>,
}

const METRICS: [&str; 4] = ["mean_loss", "examples", "arena_score", "accepted"];

fn metric(row: &ReportRow, name: &str) -> f64 {
    match name {
        "mean_loss" => row.mean_loss,
        "examples" => row.examples as f64,
        "arena_score" => {
            let n = row.arena_w + row.arena_d + row.arena_l;
            if n == 0 {
                f64::NAN
            } else {
                (row.arena_w as f64 + 0.5 * row.arena_d as f64) / n as f64
            }
        }
        _ => row.accepted as u8 as f64,
    }
}

fn run_label(dir: &Path, index: usize) -> String {
    dir.file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_else(|| format!("run{index}"))
}

fn writer(path: &Path) -> Result<csv::Writer<fs::File>> {
    csv::Writer::from_path(path).map_err(|e| Error::csv(path, e))
}

/// Exports `runs` into `out`. Every run needs a `reports.csv`; `records.csv`
/// is optional per run.
pub fn export_results(runs: &[PathBuf], out: &Path) -> Result<ExportSummary> {
    if runs.is_empty() {
        return Err(Error::Config("no run directories given".into()));
    }
    let mut loaded = Vec::new();
    for (k, dir) in runs.iter().enumerate() {
        let path = dir.join("reports.csv");
        if !path.exists() {
            return Err(Error::MissingInput(path));
        }
        loaded.push((run_label(dir, k), read_reports(&path)?));
    }
    let mut labels: Vec<&str> = loaded.iter().map(|(l, _)| l.as_str()).collect();
    labels.sort();
    labels.dedup();
    if labels.len() != loaded.len() {
        return Err(Error::Config("run directories must have distinct names".into()));
    }

    fs::create_dir_all(out).map_err(|e| Error::io(out, e))?;
    let mut files = Vec::new();

    let path = out.join("reports.csv");
    let mut w = writer(&path)?;
    let mut report_rows = 0;
    for (run, rows) in &loaded {
        for row in rows {
            w.serialize(RunReportRow {
                run,
                i: row.i,
                examples: row.examples,
                mean_loss: row.mean_loss,
                arena_w: row.arena_w,
                arena_d: row.arena_d,
                arena_l: row.arena_l,
                accepted: row.accepted,
            })
            .map_err(|e| Error::csv(&path, e))?;
            report_rows += 1;
        }
    }
    w.flush().map_err(|e| Error::io(&path, e))?;
    files.push(path);

    let path = out.join("aggregate.csv");
    let mut w = writer(&path)?;
    let mut groups: BTreeMap<(usize, usize), Vec<f64>> = BTreeMap::new();
    for (m, name) in METRICS.iter().enumerate() {
        for (run, rows) in &loaded {
            for row in rows {
                let value = metric(row, name);
                w.serialize(AggregateRow {
                    iteration: row.i,
                    metric: name,
                    run,
                    value,
                })
                .map_err(|e| Error::csv(&path, e))?;
                groups.entry((row.i, m)).or_default().push(value);
            }
        }
    }
    w.flush().map_err(|e| Error::io(&path, e))?;
    files.push(path);

    let path = out.join("summary.csv");
    let mut w = writer(&path)?;
    for ((iteration, m), values) in &groups {
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let stderr = if values.len() > 1 {
            let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
            (var / n).sqrt()
        } else {
            0.0
        };
        w.serialize(SummaryRow {
            iteration: *iteration,
            metric: METRICS[*m],
            runs: values.len(),
            mean,
            stderr,
        })
        .map_err(|e| Error::csv(&path, e))?;
    }
    w.flush().map_err(|e| Error::io(&path, e))?;
    files.push(path);

    let mut game_rows = Vec::new();
    for dir in runs {
        let path = dir.join("records.csv");
        if path.exists() {
            game_rows.extend(read_records_csv(&path)?);
        }
    }
    if !game_rows.is_empty() {
        let records = MatchRecord::from_rows(&game_rows);
        let path = out.join("records.csv");
        write_records_csv(&path, &records)?;
        files.push(path);
        let pairs: Vec<PairResult> = records.iter().map(MatchRecord::pair_result).collect();
        let table = compute_elo(&pairs)?;
        let path = out.join("elo.csv");
        write_elo_csv(&path, &table)?;
        files.push(path);
    }

    Ok(ExportSummary {
        runs: runs.len(),
        report_rows,
        record_rows: game_rows.len(),
        files,
    })
}
