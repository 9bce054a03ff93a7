//! File formats: spectrum and state inputs, report CSV / JSON lines,
//! density CSV, and measurement export.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use eur_core::nalgebra::DMatrix;
use eur_core::{BoundReport, ComplementMeasurement, ExtendedSystem, C64};
use serde::{Deserialize, Serialize};

use crate::config::{Order, StateSpec};
use crate::error::CliError;

/// Report output formats.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, clap::ValueEnum)]
pub enum Format {
    Csv,
    Jsonl,
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Jsonl => "jsonl",
        }
    }
}

/// Levels from a text file (one per line; blank lines and `#` comments
/// skipped) or from JSON `{"levels": [...]}`.
pub fn read_spectrum(path: &Path) -> Result<Vec<f64>, CliError> {
    let text = read_input(path)?;
    if text.trim_start().starts_with('{') {
        #[derive(Deserialize)]
        #[serde(deny_unknown_fields)]
        struct Levels {
            levels: Vec<f64>,
        }
        let parsed: Levels =
            serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        return Ok(parsed.levels);
    }
    text.lines()
        .enumerate()
        .map(|(i, line)| (i, line.split('#').next().unwrap_or("").trim()))
        .filter(|(_, line)| !line.is_empty())
        .map(|(i, line)| {
            line.parse::<f64>()
                .map_err(|e| CliError::Config(format!("{}:{}: {e}", path.display(), i + 1)))
        })
        .collect()
}

/// A state description stored as JSON.
pub fn read_state_spec(path: &Path) -> Result<StateSpec, CliError> {
    let text = read_input(path)?;
    serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
}

fn read_input(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))
}

/// Flat CSV row of a report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub relation_id: String,
    pub alpha: Option<Order>,
    pub beta: Option<Order>,
    pub s: Option<usize>,
    pub d: usize,
    pub purity: f64,
    pub eta: Option<f64>,
    pub lhs: f64,
    pub rhs: f64,
    pub slack: f64,
    pub holds: bool,
}

impl From<&BoundReport> for ReportRow {
    fn from(report: &BoundReport) -> Self {
        let p = &report.params;
        Self {
            relation_id: report.relation.as_str().to_owned(),
            alpha: p.alpha.map(Order),
            beta: p.beta.map(Order),
            s: p.s,
            d: p.d,
            purity: p.purity,
            eta: p.eta,
            lhs: report.lhs,
            rhs: report.rhs,
            slack: report.slack,
            holds: report.holds,
        }
    }
}

#[derive(Debug, Serialize)]
struct JsonParameters {
    alpha: Option<Order>,
    beta: Option<Order>,
    mu: Option<Order>,
    eta: Option<f64>,
    s: Option<usize>,
    d: usize,
    purity: f64,
}

/// JSON-lines record of a report, with its parameters nested.
#[derive(Debug, Serialize)]
struct JsonReport<'a> {
    relation_id: &'a str,
    lhs: f64,
    rhs: f64,
    slack: f64,
    tolerance: f64,
    holds: bool,
    parameters: JsonParameters,
}

impl<'a> From<&'a BoundReport> for JsonReport<'a> {
    fn from(report: &'a BoundReport) -> Self {
        let p = &report.params;
        Self {
            relation_id: report.relation.as_str(),
            lhs: report.lhs,
            rhs: report.rhs,
            slack: report.slack,
            tolerance: report.tolerance,
            holds: report.holds,
            parameters: JsonParameters {
                alpha: p.alpha.map(Order),
                beta: p.beta.map(Order),
                mu: p.mu.map(Order),
                eta: p.eta,
                s: p.s,
                d: p.d,
                purity: p.purity,
            },
        }
    }
}

/// Writes `reports` as `<stem>.<ext>` for each format; returns the paths.
pub fn write_reports(
    dir: &Path,
    stem: &str,
    reports: &[BoundReport],
    formats: &[Format],
) -> Result<Vec<PathBuf>, CliError> {
    formats
        .iter()
        .map(|&format| {
            let path = dir.join(format!("{stem}.{}", format.extension()));
            match format {
                Format::Csv => write_csv(&path, reports.iter().map(ReportRow::from))?,
                Format::Jsonl => write_jsonl(&path, reports.iter().map(JsonReport::from))?,
            }
            Ok(path)
        })
        .collect()
}

/// Serializes `rows` with a header line.
pub fn write_csv<T: Serialize>(path: &Path, rows: impl IntoIterator<Item = T>) -> Result<(), CliError> {
    let mut writer = csv::Writer::from_path(path).map_err(CliError::output)?;
    for row in rows {
        writer.serialize(row).map_err(CliError::output)?;
    }
    writer.flush().map_err(CliError::output)
}

pub fn write_jsonl<T: Serialize>(path: &Path, rows: impl IntoIterator<Item = T>) -> Result<(), CliError> {
    let mut writer = BufWriter::new(File::create(path).map_err(CliError::output)?);
    for row in rows {
        serde_json::to_writer(&mut writer, &row).map_err(CliError::output)?;
        writer.write_all(b"\n").map_err(CliError::output)?;
    }
    writer.flush().map_err(CliError::output)
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let mut writer = BufWriter::new(File::create(path).map_err(CliError::output)?);
    serde_json::to_writer_pretty(&mut writer, value).map_err(CliError::output)?;
    writer.write_all(b"\n").map_err(CliError::output)?;
    writer.flush().map_err(CliError::output)
}

/// Reads back a report CSV.
pub fn read_report_csv(path: &Path) -> Result<Vec<ReportRow>, CliError> {
    let mut reader = csv::Reader::from_path(path).map_err(|e| CliError::Config(e.to_string()))?;
    reader
        .deserialize()
        .collect::<Result<_, _>>()
        .map_err(|e| CliError::Config(e.to_string()))
}

#[derive(Debug, Serialize)]
pub struct DensityRow {
    pub tau: f64,
    pub w: f64,
}

/// A complex matrix as rows of `[re, im]` pairs.
fn matrix_pairs(m: &DMatrix<C64>) -> Vec<Vec<[f64; 2]>> {
    m.row_iter()
        .map(|row| row.iter().map(|z| [z.re, z.im]).collect())
        .collect()
}

#[derive(Debug, Serialize)]
pub struct MeasurementExport {
    pub s: usize,
    pub tau0: f64,
    pub period: f64,
    pub levels: Vec<f64>,
    pub r: Vec<u64>,
    pub tau_grid: Vec<f64>,
    pub identity_defect: f64,
    /// `|θ_m⟩` in the energy basis, as `[re, im]` pairs.
    pub kets: Vec<Vec<[f64; 2]>>,
}

impl From<&ComplementMeasurement> for MeasurementExport {
    fn from(m: &ComplementMeasurement) -> Self {
        let structure = m.structure();
        Self {
            s: m.s(),
            tau0: m.tau0(),
            period: structure.period(),
            levels: structure.levels().to_vec(),
            r: structure.r().to_vec(),
            tau_grid: m.tau_grid().to_vec(),
            identity_defect: m.identity_defect(),
            kets: m
                .kets()
                .iter()
                .map(|k| k.iter().map(|z| [z.re, z.im]).collect())
                .collect(),
        }
    }
}

#[derive(Debug, Serialize)]
pub struct ExtensionExport {
    pub dimension: usize,
    pub index_map: Vec<usize>,
    pub theta_grid: Vec<f64>,
    pub level_operator: Vec<Vec<[f64; 2]>>,
    pub phase_operator: Vec<Vec<[f64; 2]>>,
}

impl From<&ExtendedSystem> for ExtensionExport {
    fn from(system: &ExtendedSystem) -> Self {
        let (level, phase) = eur_core::naimark::conjugate_operators(system);
        Self {
            dimension: system.dimension(),
            index_map: system.index_map().to_vec(),
            theta_grid: system.theta_grid().to_vec(),
            level_operator: matrix_pairs(&level),
            phase_operator: matrix_pairs(&phase),
        }
    }
}
