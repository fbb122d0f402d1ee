//! Sample files in, reports out.
//!
//! Input is a single-column text/CSV file: one number per line, `.` as the
//! decimal point, an optional non-numeric header on the first non-blank
//! line. Blank lines are skipped and counted.
//!
//! Reports are JSON objects tagged by `command` and carrying
//! `schema_version`. The `test` report has the fixed key set
//!
//! ```text
//! schema_version, command, alpha, n, duplication_factor, a_n, b_n, a, b,
//! sigma{s11, s22, s12, det}, j_n, p_value, verdict
//! ```
//!
//! plus `level`, `calibration`, `sigma_route`, `data` and `wall_time_ms`.
//! Floats are written in shortest round-trip form, which reproduces every
//! bit of the value. The CSV form is a single header row and a single data
//! row; nested objects are flattened with `_` (`sigma_s11`) and arrays are
//! joined with `;`.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::gjb::{Calibration, CovarianceMatrix2};
use crate::testing::{AlphaEstimate, GridPoint, SubsampleScreen, TestOutcome};
use crate::{Error, Result};

pub const SCHEMA_VERSION: &str = "1.0";

#[derive(Clone, Debug, PartialEq)]
pub struct SampleFile {
    pub values: Vec<f64>,
    pub source_path: PathBuf,
    pub header: Option<String>,
    pub parsed_rows: usize,
    pub skipped_rows: usize,
}

pub fn read_sample_csv(path: impl AsRef<Path>) -> Result<SampleFile> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_owned(),
        source,
    })?;
    let mut sample = parse_sample(&text)?;
    sample.source_path = path.to_owned();
    if sample.values.is_empty() {
        return Err(Error::EmptyInput(path.to_owned()));
    }
    Ok(sample)
}

/// Parses the body of a sample file. An empty result is not an error here.
pub fn parse_sample(text: &str) -> Result<SampleFile> {
    let mut values = Vec::new();
    let mut header = None;
    let mut skipped_rows = 0;
    let mut seen_content = false;

    for (idx, raw_line) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw_line.trim();
        if line.is_empty() {
            skipped_rows += 1;
            continue;
        }
        if line.contains(',') || line.contains(';') || line.contains('\t') {
            return Err(Error::Parse {
                line: line_no,
                message: "expected a single column; multi-column files are not supported".into(),
            });
        }
        let first = !seen_content;
        seen_content = true;
        match line.parse::<f64>() {
            Ok(v) if v.is_finite() => values.push(v),
            Ok(v) => {
                return Err(Error::Parse {
                    line: line_no,
                    message: format!("non-finite value {v}"),
                })
            }
            Err(_) if first => header = Some(line.to_owned()),
            Err(_) => {
                return Err(Error::Parse {
                    line: line_no,
                    message: format!("not a number: '{line}'"),
                })
            }
        }
    }
    Ok(SampleFile {
        parsed_rows: values.len(),
        values,
        source_path: PathBuf::new(),
        header,
        skipped_rows,
    })
}

/// Writes one value per line in shortest round-trip form.
pub fn write_sample_csv(values: &[f64], dest: Option<&Path>) -> Result<()> {
    let mut text = String::with_capacity(values.len() * 20);
    for v in values {
        text.push_str(&format!("{v:?}\n"));
    }
    write_bytes(text.as_bytes(), dest)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

impl std::str::FromStr for Format {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "json" => Ok(Self::Json),
            "csv" => Ok(Self::Csv),
            other => Err(Error::InvalidParameter(format!("unknown format '{other}'"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TestReport {
    pub schema_version: String,
    pub alpha: f64,
    pub n: usize,
    pub duplication_factor: usize,
    pub a_n: f64,
    pub b_n: f64,
    pub a: f64,
    pub b: f64,
    pub sigma: CovarianceMatrix2,
    pub j_n: f64,
    pub p_value: f64,
    /// `reject` when `p_value < level`, else `accept`.
    pub verdict: String,
    pub level: f64,
    pub calibration: Calibration,
    pub sigma_route: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub data: Option<String>,
    pub wall_time_ms: u64,
}

impl TestReport {
    pub fn new(
        alpha: f64,
        outcome: &TestOutcome,
        level: f64,
        calibration: Calibration,
        route: &str,
    ) -> Self {
        Self {
            schema_version: SCHEMA_VERSION.into(),
            alpha,
            n: outcome.n,
            duplication_factor: outcome.duplication_factor,
            a_n: outcome.a_n,
            b_n: outcome.b_n,
            a: outcome.a,
            b: outcome.b,
            sigma: outcome.sigma,
            j_n: outcome.j_n,
            p_value: outcome.p_value,
            verdict: if outcome.p_value < level {
                "reject"
            } else {
                "accept"
            }
            .into(),
            level,
            calibration,
            sigma_route: route.into(),
            data: None,
            wall_time_ms: 0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CampaignReport {
    pub schema_version: String,
    /// Shape under the null hypothesis.
    pub alpha: f64,
    /// `normal` or `sn(<alpha>)`.
    pub data_law: String,
    pub sample_size: usize,
    pub replications: usize,
    pub seed: u64,
    pub sigma_route: String,
    pub calibration: Calibration,
    pub level: f64,
    pub mean_p_value: f64,
    pub rejection_rate: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p_values: Option<Vec<f64>>,
    pub wall_time_ms: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RejectSizeReport {
    pub schema_version: String,
    pub alpha: f64,
    pub level: f64,
    pub cap: usize,
    pub seed: u64,
    pub replications: usize,
    pub calibration: Calibration,
    pub needed_n: Option<usize>,
    pub cap_exceeded: bool,
    pub grid: Vec<GridPoint>,
    pub wall_time_ms: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecideReport {
    pub schema_version: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub data: Option<String>,
    pub n: usize,
    pub level: f64,
    pub k_cap: usize,
    pub seed: u64,
    pub alpha_hat: AlphaEstimate,
    pub interval: [f64; 2],
    pub target_size: Option<f64>,
    pub capped: bool,
    pub duplication_factor: usize,
    pub j_n: f64,
    pub p_value: f64,
    pub verdict: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub experimental_subsample: Option<SubsampleScreen>,
    pub wall_time_ms: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TableReport {
    pub schema_version: String,
    pub which: u8,
    pub budget: String,
    pub calibration: Calibration,
    pub seed: u64,
    pub columns: Vec<String>,
    pub rows: Vec<TableRow>,
    pub wall_time_ms: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TableRow {
    pub label: String,
    pub values: Vec<Option<f64>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "kebab-case")]
pub enum Report {
    Test(TestReport),
    Simulate(CampaignReport),
    Power(CampaignReport),
    RejectSize(RejectSizeReport),
    Decide(DecideReport),
    Tables(TableReport),
}

impl Report {
    pub fn command(&self) -> &'static str {
        match self {
            Self::Test(_) => "test",
            Self::Simulate(_) => "simulate",
            Self::Power(_) => "power",
            Self::RejectSize(_) => "reject-size",
            Self::Decide(_) => "decide",
            Self::Tables(_) => "tables",
        }
    }

    pub fn set_wall_time(&mut self, ms: u64) {
        match self {
            Self::Test(r) => r.wall_time_ms = ms,
            Self::Simulate(r) | Self::Power(r) => r.wall_time_ms = ms,
            Self::RejectSize(r) => r.wall_time_ms = ms,
            Self::Decide(r) => r.wall_time_ms = ms,
            Self::Tables(r) => r.wall_time_ms = ms,
        }
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::Serialization(e.to_string()))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Serialization(e.to_string()))
    }

    /// Header row and data row of the flattened report.
    pub fn to_csv(&self) -> Result<String> {
        let value = serde_json::to_value(self).map_err(|e| Error::Serialization(e.to_string()))?;
        let mut flat = Vec::new();
        flatten("", &value, &mut flat);
        let mut writer = csv::Writer::from_writer(Vec::new());
        let csv_err = |e: csv::Error| Error::Serialization(e.to_string());
        writer
            .write_record(flat.iter().map(|(k, _)| k))
            .map_err(csv_err)?;
        writer
            .write_record(flat.iter().map(|(_, v)| v))
            .map_err(csv_err)?;
        let bytes = writer
            .into_inner()
            .map_err(|e| Error::Serialization(e.to_string()))?;
        String::from_utf8(bytes).map_err(|e| Error::Serialization(e.to_string()))
    }
}

fn flatten(prefix: &str, value: &Value, out: &mut Vec<(String, String)>) {
    match value {
        Value::Object(map) => flatten_object(prefix, map, out),
        other => out.push((prefix.to_owned(), scalar_text(other))),
    }
}

fn flatten_object(prefix: &str, map: &Map<String, Value>, out: &mut Vec<(String, String)>) {
    for (key, value) in map {
        let name = if prefix.is_empty() {
            key.clone()
        } else {
            format!("{prefix}_{key}")
        };
        flatten(&name, value, out);
    }
}

fn scalar_text(value: &Value) -> String {
    match value {
        Value::Null => String::new(),
        Value::String(s) => s.clone(),
        Value::Array(items) => items.iter().map(scalar_text).collect::<Vec<_>>().join(";"),
        Value::Object(_) => serde_json::to_string(value).unwrap_or_default(),
        other => other.to_string(),
    }
}

/// Serializes `report` to `dest`, or stdout when `dest` is `None`.
pub fn write_report(report: &Report, dest: Option<&Path>, format: Format) -> Result<()> {
    let mut text = match format {
        Format::Json => report.to_json()?,
        Format::Csv => report.to_csv()?,
    };
    if !text.ends_with('\n') {
        text.push('\n');
    }
    write_bytes(text.as_bytes(), dest)
}

pub fn write_text(text: &str, dest: Option<&Path>) -> Result<()> {
    write_bytes(text.as_bytes(), dest)
}

fn write_bytes(bytes: &[u8], dest: Option<&Path>) -> Result<()> {
    match dest {
        Some(path) => fs::write(path, bytes).map_err(|source| Error::Io {
            path: path.to_owned(),
            source,
        }),
        None => {
            let stdout = std::io::stdout();
            let mut lock = stdout.lock();
            lock.write_all(bytes)
                .and_then(|_| lock.flush())
                .map_err(|source| Error::Io {
                    path: PathBuf::from("<stdout>"),
                    source,
                })
        }
    }
}
