//! CSV and JSON writers and the output manifest.

use std::fs;
use std::path::Path;
use std::str::FromStr;

use cbgame_core::montecarlo::RNG_ALGORITHM;
use serde::Serialize;
use serde_json::{json, Value};

use crate::config::SCHEMA_VERSION;
use crate::error::{CliError, Result};
use crate::report::{Cell, ReportSet, Table};

pub const MANIFEST: &str = "manifest.json";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

impl FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            _ => Err(format!("unknown format {s:?} (expected csv or json)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ManifestEntry {
    pub path: String,
    pub format: Format,
    pub table: String,
    pub rows: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Manifest {
    pub schema_version: u32,
    pub command: String,
    pub master_seed: Option<u64>,
    pub rng_algorithm: &'static str,
    pub files: Vec<ManifestEntry>,
}

/// 17 significant digits in scientific notation.
pub fn format_float(x: f64) -> String {
    format!("{x:.16e}")
}

fn csv_field(cell: &Cell) -> String {
    match cell {
        Cell::Num(x) => format_float(*x),
        Cell::Int(i) => i.to_string(),
        Cell::Text(s) => s.clone(),
    }
}

fn json_value(cell: &Cell) -> Value {
    match cell {
        Cell::Num(x) => Value::from(*x),
        Cell::Int(i) => Value::from(*i),
        Cell::Text(s) => Value::from(s.as_str()),
    }
}

pub fn write_csv(table: &Table, path: &Path) -> Result<()> {
    let csv_err = |source| CliError::Csv {
        path: path.to_path_buf(),
        source,
    };
    let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
    w.write_record(&table.columns).map_err(csv_err)?;
    for row in &table.rows {
        w.write_record(row.iter().map(csv_field)).map_err(csv_err)?;
    }
    w.flush().map_err(|e| CliError::io(path, e))
}

pub fn table_json(table: &Table) -> Value {
    let rows: Vec<Value> = table
        .rows
        .iter()
        .map(|r| Value::Array(r.iter().map(json_value).collect()))
        .collect();
    json!({
        "schema_version": SCHEMA_VERSION,
        "table": table.name,
        "columns": table.columns,
        "rows": rows,
    })
}

pub fn write_json(table: &Table, path: &Path) -> Result<()> {
    let mut text = serde_json::to_string_pretty(&table_json(table)).map_err(|e| CliError::Internal(e.to_string()))?;
    text.push('\n');
    fs::write(path, text).map_err(|e| CliError::io(path, e))
}

/// Writes every table in every format plus `manifest.json` into `out_dir`.
pub fn emit_outputs(reports: &ReportSet, out_dir: &Path, formats: &[Format]) -> Result<Manifest> {
    fs::create_dir_all(out_dir).map_err(|e| CliError::io(out_dir, e))?;
    let mut files = Vec::new();
    for table in &reports.tables {
        for &format in formats {
            let name = format!("{}.{}", table.name, format.extension());
            let path = out_dir.join(&name);
            match format {
                Format::Csv => write_csv(table, &path)?,
                Format::Json => write_json(table, &path)?,
            }
            files.push(ManifestEntry {
                path: name,
                format,
                table: table.name.clone(),
                rows: table.rows.len(),
            });
        }
    }
    let manifest = Manifest {
        schema_version: SCHEMA_VERSION,
        command: reports.command.clone(),
        master_seed: reports.seed,
        rng_algorithm: RNG_ALGORITHM,
        files,
    };
    let path = out_dir.join(MANIFEST);
    let mut text = serde_json::to_string_pretty(&manifest).map_err(|e| CliError::Internal(e.to_string()))?;
    text.push('\n');
    fs::write(&path, text).map_err(|e| CliError::io(&path, e))?;
    Ok(manifest)
}
