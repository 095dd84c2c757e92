//! CSV and JSON serialization of sweep results.
//!
//! Each grid point contributes one record per requested mode pair. Columns,
//! in order: `axis1,axis2,stable,pair,E_N,G_fwd,G_bwd,regime,n_first,n_second,abs_corr`.
//! `axis2` is empty for one-axis sweeps; the measure columns and `regime` are
//! empty on unstable points. Floats are written in shortest round-trip form.

use std::fs;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::io::plot::render_svg;
use crate::measures::{ModePair, Regime};
use crate::sweep::SweepResult;

pub const CSV_HEADER: &str =
    "axis1,axis2,stable,pair,E_N,G_fwd,G_bwd,regime,n_first,n_second,abs_corr";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Csv,
    Json,
    Both,
}

impl OutputFormat {
    fn csv(self) -> bool {
        matches!(self, OutputFormat::Csv | OutputFormat::Both)
    }

    fn json(self) -> bool {
        matches!(self, OutputFormat::Json | OutputFormat::Both)
    }
}

impl FromStr for OutputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            "both" => Ok(OutputFormat::Both),
            other => Err(Error::Contract(format!("unknown output format `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Record {
    pub axis1: f64,
    pub axis2: Option<f64>,
    pub stable: bool,
    pub pair: ModePair,
    #[serde(rename = "E_N")]
    pub e_n: Option<f64>,
    #[serde(rename = "G_fwd")]
    pub g_fwd: Option<f64>,
    #[serde(rename = "G_bwd")]
    pub g_bwd: Option<f64>,
    pub regime: Option<Regime>,
    pub n_first: Option<f64>,
    pub n_second: Option<f64>,
    pub abs_corr: Option<f64>,
}

/// JSON form of a sweep: the CSV records plus the axis names.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultsDocument {
    pub axis1: String,
    pub axis2: Option<String>,
    pub pairs: Vec<ModePair>,
    pub records: Vec<Record>,
}

pub fn records(result: &SweepResult) -> Vec<Record> {
    let mut out = Vec::with_capacity(result.rows.len() * result.pairs.len());
    for row in &result.rows {
        for &pair in &result.pairs {
            let report = row.report(pair);
            out.push(Record {
                axis1: row.axis1,
                axis2: row.axis2,
                stable: row.stable,
                pair,
                e_n: report.map(|r| r.e_n),
                g_fwd: report.map(|r| r.g_fwd),
                g_bwd: report.map(|r| r.g_bwd),
                regime: report.map(|r| r.regime),
                n_first: report.map(|r| r.moments.n_first),
                n_second: report.map(|r| r.moments.n_second),
                abs_corr: report.map(|r| r.moments.abs_corr()),
            });
        }
    }
    out
}

pub fn write_csv<W: Write>(result: &SweepResult, writer: W) -> Result<()> {
    let mut w = csv::WriterBuilder::new()
        .has_headers(false)
        .from_writer(writer);
    w.write_record(CSV_HEADER.split(','))
        .map_err(|e| Error::Serialization(e.to_string()))?;
    for record in records(result) {
        w.serialize(record)
            .map_err(|e| Error::Serialization(e.to_string()))?;
    }
    w.flush().map_err(|e| Error::Serialization(e.to_string()))?;
    Ok(())
}

pub fn read_csv<R: Read>(reader: R) -> Result<Vec<Record>> {
    let mut r = csv::Reader::from_reader(reader);
    let header: Vec<String> = r
        .headers()
        .map_err(|e| Error::Serialization(e.to_string()))?
        .iter()
        .map(str::to_owned)
        .collect();
    if header.join(",") != CSV_HEADER {
        return Err(Error::Serialization(format!(
            "unexpected CSV header `{}`",
            header.join(",")
        )));
    }
    r.deserialize()
        .map(|rec| rec.map_err(|e| Error::Serialization(e.to_string())))
        .collect()
}

pub fn document(result: &SweepResult) -> ResultsDocument {
    ResultsDocument {
        axis1: result.axis1.name().to_owned(),
        axis2: result.axis2.map(|a| a.name().to_owned()),
        pairs: result.pairs.clone(),
        records: records(result),
    }
}

pub fn to_json(result: &SweepResult) -> Result<String> {
    serde_json::to_string_pretty(&document(result)).map_err(|e| Error::Serialization(e.to_string()))
}

pub fn from_json(text: &str) -> Result<ResultsDocument> {
    serde_json::from_str(text).map_err(|e| Error::Serialization(e.to_string()))
}

fn write_file(path: &Path, contents: &[u8]) -> Result<()> {
    fs::write(path, contents).map_err(|source| Error::Io {
        path: path.to_owned(),
        source,
    })
}

/// Writes `<stem>.csv` and/or `<stem>.json` (and `<stem>.svg` with `plot`)
/// into `dir`, creating it if needed. Returns the paths written.
pub fn emit_results(
    result: &SweepResult,
    dir: &Path,
    stem: &str,
    format: OutputFormat,
    plot: bool,
) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir).map_err(|source| Error::Io {
        path: dir.to_owned(),
        source,
    })?;
    let mut written = Vec::new();
    if format.csv() {
        let path = dir.join(format!("{stem}.csv"));
        let mut buf = Vec::new();
        write_csv(result, &mut buf)?;
        write_file(&path, &buf)?;
        written.push(path);
    }
    if format.json() {
        let path = dir.join(format!("{stem}.json"));
        write_file(&path, to_json(result)?.as_bytes())?;
        written.push(path);
    }
    if plot {
        let path = dir.join(format!("{stem}.svg"));
        write_file(&path, render_svg(result, stem).as_bytes())?;
        written.push(path);
    }
    Ok(written)
}
