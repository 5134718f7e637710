//! CSV reports and the run manifest.
//!
//! Raw files carry full precision (17 significant digits); display files
//! are rounded to whole numbers, costs in million PLN. Column layouts are
//! documented in `docs/outputs.md`.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::config::{write_param_rows, ParamRow};
use crate::engine::{ExperimentResult, Metric, Scenario};
use crate::error::{Error, Result};
use crate::stats::{mean_ci, SampleSummary};

pub const CONFIDENCE_LEVEL: f64 = 0.95;
const MILLION: f64 = 1e6;

/// One aggregate line: a metric for one scenario and year (or the total).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub year: Option<i32>,
    pub metric: Metric,
    pub scenario: Scenario,
    pub n: usize,
    pub mean: f64,
    pub sd: f64,
    pub ci_low: f64,
    pub ci_high: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FileEntry {
    pub name: String,
    pub bytes: u64,
    pub sha256: String,
}

/// Everything needed to reproduce a run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub config_path: String,
    pub config: String,
    pub simulation: crate::engine::SimulationConfig,
    pub calibrated_params: Vec<ParamRow>,
    pub seeds: Vec<(Scenario, Vec<u64>)>,
    pub cohort_size: usize,
    pub started_unix: u64,
    pub finished_unix: u64,
    pub files: Vec<FileEntry>,
}

/// Run metadata that is not part of the experiment result itself.
#[derive(Clone, Debug)]
pub struct RunInfo {
    pub config_path: String,
    pub config_text: String,
    pub calibrated_params: Vec<ParamRow>,
    pub started_unix: u64,
    pub finished_unix: u64,
}

pub fn raw(x: f64) -> String {
    format!("{x:.16e}")
}

fn period(year: Option<i32>) -> String {
    year.map_or_else(|| "TOTAL".to_string(), |y| y.to_string())
}

/// Summary of replication values; with a single replication the spread and
/// interval are NaN.
pub fn summarize(samples: &[f64]) -> SampleSummary {
    mean_ci(samples, CONFIDENCE_LEVEL).unwrap_or_else(|_| {
        let mean = samples.iter().sum::<f64>() / samples.len() as f64;
        SampleSummary {
            n: samples.len(),
            mean,
            sd: f64::NAN,
            ci_low: f64::NAN,
            ci_high: f64::NAN,
            confidence_level: CONFIDENCE_LEVEL,
        }
    })
}

fn periods(result: &ExperimentResult) -> Vec<Option<i32>> {
    result.years.iter().map(|&y| Some(y)).chain([None]).collect()
}

pub fn report_rows(result: &ExperimentResult) -> Vec<ReportRow> {
    let mut rows = Vec::new();
    for runs in &result.runs {
        for metric in Metric::ALL {
            for year in periods(result) {
                let s = summarize(&result.samples(runs.scenario, metric, year));
                rows.push(ReportRow {
                    year,
                    metric,
                    scenario: runs.scenario,
                    n: s.n,
                    mean: s.mean,
                    sd: s.sd,
                    ci_low: s.ci_low,
                    ci_high: s.ci_high,
                });
            }
        }
    }
    rows
}

struct CsvBuf(csv::Writer<Vec<u8>>);

impl CsvBuf {
    fn new() -> Self {
        CsvBuf(csv::Writer::from_writer(Vec::new()))
    }

    fn row<I, S>(&mut self, fields: I)
    where
        I: IntoIterator<Item = S>,
        S: AsRef<[u8]>,
    {
        self.0.write_record(fields).expect("writing to memory");
    }

    fn finish(self) -> Vec<u8> {
        self.0.into_inner().expect("writing to memory")
    }
}

fn summary_file(rows: &[ReportRow]) -> Vec<u8> {
    let mut w = CsvBuf::new();
    w.row(["scenario", "metric", "year", "n", "mean", "sd", "ci_low", "ci_high"]);
    for r in rows {
        w.row([
            r.scenario.name().to_string(),
            r.metric.name().to_string(),
            period(r.year),
            r.n.to_string(),
            raw(r.mean),
            raw(r.sd),
            raw(r.ci_low),
            raw(r.ci_high),
        ]);
    }
    w.finish()
}

fn metric_file(rows: &[ReportRow], scenario: Scenario, metric: Metric) -> Vec<u8> {
    let mut w = CsvBuf::new();
    w.row(["year", "n", "mean", "sd", "ci_low", "ci_high"]);
    for r in rows.iter().filter(|r| r.scenario == scenario && r.metric == metric) {
        w.row([
            period(r.year),
            r.n.to_string(),
            raw(r.mean),
            raw(r.sd),
            raw(r.ci_low),
            raw(r.ci_high),
        ]);
    }
    w.finish()
}

fn replications_file(result: &ExperimentResult) -> Vec<u8> {
    let mut w = CsvBuf::new();
    let mut header = vec!["scenario".to_string(), "replication".into(), "seed".into(), "year".into()];
    header.extend(Metric::ALL.iter().map(|m| m.name().to_string()));
    w.row(&header);
    for runs in &result.runs {
        for rep in &runs.replications {
            for y in &rep.years {
                let mut rec = vec![
                    runs.scenario.name().to_string(),
                    rep.index.to_string(),
                    rep.seed.to_string(),
                    y.year.to_string(),
                ];
                rec.extend(y.values.iter().map(|&v| raw(v)));
                w.row(&rec);
            }
        }
    }
    w.finish()
}

fn display_costs_file(result: &ExperimentResult, scenario: Scenario) -> Vec<u8> {
    let metrics = [
        Metric::DirectCost,
        Metric::IndirectDeathCost,
        Metric::IndirectOtherCost,
        Metric::TotalCost,
    ];
    let mut w = CsvBuf::new();
    let mut header = vec!["year".to_string()];
    for m in metrics {
        let short = m.name().trim_end_matches("_cost");
        header.push(format!("{short}_mln_pln"));
        header.push(format!("{short}_ci_half_width"));
    }
    w.row(&header);
    for year in periods(result) {
        let mut rec = vec![period(year)];
        for m in metrics {
            let s = summarize(&result.samples(scenario, m, year));
            rec.push(format!("{:.0}", s.mean / MILLION));
            rec.push(format!("{:.0}", s.half_width() / MILLION));
        }
        w.row(&rec);
    }
    w.finish()
}

fn display_totals_file(result: &ExperimentResult) -> Vec<u8> {
    let mut w = CsvBuf::new();
    let mut header = vec!["year".to_string()];
    for runs in &result.runs {
        header.push(format!("{}_mln_pln", runs.scenario.name()));
        header.push(format!("{}_ci_half_width", runs.scenario.name()));
    }
    w.row(&header);
    for year in periods(result) {
        let mut rec = vec![period(year)];
        for runs in &result.runs {
            let s = summarize(&result.samples(runs.scenario, Metric::TotalCost, year));
            rec.push(format!("{:.0}", s.mean / MILLION));
            rec.push(format!("{:.0}", s.half_width() / MILLION));
        }
        w.row(&rec);
    }
    w.finish()
}

fn events_file(result: &ExperimentResult) -> Vec<u8> {
    let mut w = CsvBuf::new();
    w.row([
        "year",
        "scenario",
        "cancer_deaths",
        "cancer_deaths_ci_low",
        "cancer_deaths_ci_high",
        "diagnoses",
        "diagnoses_ci_low",
        "diagnoses_ci_high",
    ]);
    for year in periods(result) {
        for runs in &result.runs {
            let d = summarize(&result.samples(runs.scenario, Metric::CancerDeaths, year));
            let g = summarize(&result.samples(runs.scenario, Metric::Diagnoses, year));
            w.row([
                period(year),
                runs.scenario.name().to_string(),
                format!("{:.0}", d.mean),
                format!("{:.0}", d.ci_low),
                format!("{:.0}", d.ci_high),
                format!("{:.0}", g.mean),
                format!("{:.0}", g.ci_low),
                format!("{:.0}", g.ci_high),
            ]);
        }
    }
    w.finish()
}

fn differences_file(result: &ExperimentResult) -> Vec<u8> {
    let mut w = CsvBuf::new();
    w.row(["metric", "year", "n", "mean_difference", "ci_low", "ci_high", "p_value"]);
    for metric in Metric::ALL {
        for year in periods(result) {
            let covid = result.samples(Scenario::Covid, metric, year);
            let nocovid = result.samples(Scenario::NoCovid, metric, year);
            let diffs: Vec<f64> = covid.iter().zip(&nocovid).map(|(a, b)| a - b).collect();
            let s = summarize(&diffs);
            let p = crate::stats::welch_t_test(&covid, &nocovid).unwrap_or(f64::NAN);
            w.row([
                metric.name().to_string(),
                period(year),
                s.n.to_string(),
                raw(s.mean),
                raw(s.ci_low),
                raw(s.ci_high),
                raw(p),
            ]);
        }
    }
    w.finish()
}

fn unix_now() -> u64 {
    std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map_or(0, |d| d.as_secs())
}

impl RunInfo {
    pub fn now(config_path: String, config_text: String, calibrated_params: Vec<ParamRow>) -> Self {
        let t = unix_now();
        RunInfo {
            config_path,
            config_text,
            calibrated_params,
            started_unix: t,
            finished_unix: t,
        }
    }

    pub fn finish(&mut self) {
        self.finished_unix = unix_now();
    }
}

/// Writes every report file plus `manifest.json` into `out_dir` and returns
/// the written paths. Nothing is written if the result has no replications.
pub fn emit_reports(result: &ExperimentResult, info: &RunInfo, out_dir: &Path) -> Result<Vec<PathBuf>> {
    if result.runs.is_empty() || result.runs.iter().any(|r| r.replications.is_empty()) {
        return Err(Error::domain("cannot report an experiment without replications"));
    }
    let rows = report_rows(result);
    let mut files: Vec<(String, Vec<u8>)> = vec![
        ("summary.csv".into(), summary_file(&rows)),
        ("replications.csv".into(), replications_file(result)),
        ("total_costs.csv".into(), display_totals_file(result)),
        ("deaths_diagnoses.csv".into(), events_file(result)),
    ];
    for runs in &result.runs {
        files.push((format!("costs_{}.csv", runs.scenario.name()), display_costs_file(result, runs.scenario)));
        for metric in Metric::ALL {
            files.push((
                format!("{}_{}.csv", runs.scenario.name(), metric.name()),
                metric_file(&rows, runs.scenario, metric),
            ));
        }
    }
    if result.runs(Scenario::Covid).is_some() && result.runs(Scenario::NoCovid).is_some() {
        files.push(("differences.csv".into(), differences_file(result)));
    }
    let mut params = Vec::new();
    write_param_rows(&info.calibrated_params, &mut params)?;
    files.push(("calibrated_params.csv".into(), params));

    std::fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let mut written = Vec::new();
    let mut entries = Vec::new();
    for (name, bytes) in &files {
        let path = out_dir.join(name);
        std::fs::write(&path, bytes).map_err(|e| Error::io(&path, e))?;
        entries.push(FileEntry {
            name: name.clone(),
            bytes: bytes.len() as u64,
            sha256: hex::encode(Sha256::digest(bytes)),
        });
        written.push(path);
    }

    let manifest = RunManifest {
        tool: env!("CARGO_PKG_NAME").to_string(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        config_path: info.config_path.clone(),
        config: info.config_text.clone(),
        simulation: result.config.clone(),
        calibrated_params: info.calibrated_params.clone(),
        seeds: result
            .runs
            .iter()
            .map(|r| (r.scenario, r.replications.iter().map(|x| x.seed).collect()))
            .collect(),
        cohort_size: result.cohort_size,
        started_unix: info.started_unix,
        finished_unix: info.finished_unix,
        files: entries,
    };
    let path = out_dir.join("manifest.json");
    let json = serde_json::to_vec_pretty(&manifest).expect("manifest serializes");
    std::fs::write(&path, json).map_err(|e| Error::io(&path, e))?;
    written.push(path);
    Ok(written)
}

/// One parsed metric-file row: period (`None` for the total), `n`, and
/// `[mean, sd, ci_low, ci_high]`.
pub type MetricFileRow = (Option<i32>, usize, [f64; 4]);

pub fn read_metric_file(path: &Path) -> Result<Vec<MetricFileRow>> {
    let mut reader = csv::Reader::from_path(path).map_err(|e| Error::io(path, std::io::Error::other(e)))?;
    let mut out = Vec::new();
    for rec in reader.records() {
        let rec = rec.map_err(|e| Error::config(format!("{}: {e}", path.display())))?;
        let bad = || Error::config(format!("{}: malformed row {:?}", path.display(), rec));
        let year = match &rec[0] {
            "TOTAL" => None,
            y => Some(y.parse().map_err(|_| bad())?),
        };
        let n = rec[1].parse().map_err(|_| bad())?;
        let mut vals = [0.0; 4];
        for (i, v) in vals.iter_mut().enumerate() {
            *v = rec[2 + i].parse().map_err(|_| bad())?;
        }
        out.push((year, n, vals));
    }
    Ok(out)
}
