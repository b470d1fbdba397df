use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use super::config::ExperimentConfig;
use crate::error::{Error, Result};
use crate::numerics::FitResult;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Column {
    pub name: String,
    pub unit: String,
}

/// A numeric table written as one CSV file.
#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    pub name: String,
    pub columns: Vec<Column>,
    pub rows: Vec<Vec<f64>>,
    /// Plot on logarithmic axes.
    pub loglog: bool,
}

impl Table {
    pub fn new(name: &str, columns: &[(&str, &str)]) -> Self {
        Table {
            name: name.into(),
            columns: columns.iter().map(|(n, u)| Column { name: (*n).into(), unit: (*u).into() }).collect(),
            rows: Vec::new(),
            loglog: false,
        }
    }

    pub fn loglog(mut self) -> Self {
        self.loglog = true;
        self
    }

    pub fn push(&mut self, row: Vec<f64>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let j = self.columns.iter().position(|c| c.name == name)?;
        Some(self.rows.iter().map(|r| r[j]).collect())
    }
}

/// Everything one experiment produced.
#[derive(Clone, Debug, Default)]
pub struct RunOutput {
    pub tables: Vec<Table>,
    pub summary: Map<String, Value>,
    pub fits: BTreeMap<String, FitResult>,
    pub warnings: Vec<String>,
    /// Set when the run completed but a required result (e.g. a fit) was refused.
    pub refusal: Option<String>,
}

impl RunOutput {
    pub fn note(&mut self, key: &str, value: impl Serialize) {
        self.summary.insert(key.into(), serde_json::to_value(value).expect("summary value serializes"));
    }

    pub fn table(&self, name: &str) -> Option<&Table> {
        self.tables.iter().find(|t| t.name == name)
    }
}

/// Contents of `<run id>.json`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunRecord {
    pub run_id: String,
    pub kind: String,
    pub config_sha256: String,
    pub config: Value,
    pub summary: Map<String, Value>,
    pub fits: BTreeMap<String, FitResult>,
    pub tables: Vec<TableRecord>,
    pub warnings: Vec<String>,
    pub refusal: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TableRecord {
    pub name: String,
    pub file: String,
    pub columns: Vec<Column>,
    pub loglog: bool,
}

fn csv_error(e: csv::Error) -> Error {
    Error::Numerical(format!("CSV output: {e}"))
}

/// Header lines, column-name row and data rows. Numbers use the shortest representation
/// that round-trips, so identical inputs give identical bytes.
pub fn render_csv(table: &Table, run_id: &str, hash: &str) -> Result<Vec<u8>> {
    let mut out = Vec::new();
    out.extend_from_slice(format!("# run: {run_id}\n# config-sha256: {hash}\n# table: {}\n", table.name).as_bytes());
    let units: Vec<String> = table.columns.iter().map(|c| format!("{} [{}]", c.name, c.unit)).collect();
    out.extend_from_slice(format!("# units: {}\n", units.join(", ")).as_bytes());
    let mut w = csv::Writer::from_writer(out);
    w.write_record(table.columns.iter().map(|c| c.name.as_str())).map_err(csv_error)?;
    for row in &table.rows {
        w.write_record(row.iter().map(|x| format!("{x:?}"))).map_err(csv_error)?;
    }
    w.into_inner().map_err(|e| Error::Numerical(format!("CSV output: {e}")))
}

/// Reads a CSV written by [`render_csv`], skipping `#` lines.
pub fn parse_csv(bytes: &[u8]) -> Result<(Vec<String>, Vec<Vec<f64>>)> {
    let mut r = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(bytes);
    let header: Vec<String> = r
        .headers()
        .map_err(|e| Error::Config(format!("CSV header: {e}")))?
        .iter()
        .map(String::from)
        .collect();
    let mut rows = Vec::new();
    for rec in r.records() {
        let rec = rec.map_err(|e| Error::Config(format!("CSV row: {e}")))?;
        let row = rec
            .iter()
            .map(|s| s.parse::<f64>().map_err(|e| Error::Config(format!("CSV value {s:?}: {e}"))))
            .collect::<Result<Vec<_>>>()?;
        if row.len() != header.len() {
            return Err(Error::Config(format!("CSV row has {} fields, header {}", row.len(), header.len())));
        }
        rows.push(row);
    }
    Ok((header, rows))
}

pub fn table_file(run_id: &str, table: &str) -> String {
    format!("{run_id}.{table}.csv")
}

/// Writes the tables and the run record into `dir`; returns the written paths.
pub fn write_run(dir: &Path, cfg: &ExperimentConfig, out: &RunOutput) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let run_id = cfg.run_id();
    let hash = cfg.hash();
    let mut written = Vec::new();
    let mut tables = Vec::new();
    for t in &out.tables {
        let file = table_file(&run_id, &t.name);
        let path = dir.join(&file);
        fs::write(&path, render_csv(t, &run_id, &hash)?)?;
        written.push(path);
        tables.push(TableRecord { name: t.name.clone(), file, columns: t.columns.clone(), loglog: t.loglog });
    }
    let record = RunRecord {
        run_id: run_id.clone(),
        kind: cfg.experiment.kind().into(),
        config_sha256: hash,
        config: serde_json::to_value(cfg).expect("configuration serializes"),
        summary: out.summary.clone(),
        fits: out.fits.clone(),
        tables,
        warnings: out.warnings.clone(),
        refusal: out.refusal.clone(),
    };
    let path = dir.join(format!("{run_id}.json"));
    let mut text = serde_json::to_string_pretty(&record).expect("run record serializes");
    text.push('\n');
    fs::write(&path, text)?;
    written.push(path);
    Ok(written)
}
