//! CSV and JSON rendering and atomic file output.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::{Map, Number, Value};

use super::config::Format;
use super::CliError;

/// Experiment rows, kept as the canonical CSV rendering.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    csv: Vec<u8>,
}

impl Table {
    /// Rows must share one shape; the header comes from the field names.
    pub fn from_rows<T: Serialize>(rows: &[T]) -> Result<Self, CliError> {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::CRLF)
            .from_writer(Vec::new());
        for row in rows {
            w.serialize(row).map_err(|e| CliError::Output(e.to_string()))?;
        }
        let csv = w.into_inner().map_err(|e| CliError::Output(e.to_string()))?;
        Ok(Self { csv })
    }

    pub fn csv(&self) -> &[u8] {
        &self.csv
    }

    pub fn len(&self) -> usize {
        self.records().map(|(_, r)| r.len()).unwrap_or(0)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn records(&self) -> Result<(Vec<String>, Vec<csv::StringRecord>), CliError> {
        let mut r = csv::Reader::from_reader(self.csv.as_slice());
        let headers = r
            .headers()
            .map_err(|e| CliError::Output(e.to_string()))?
            .iter()
            .map(str::to_string)
            .collect();
        let records = r
            .records()
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| CliError::Output(e.to_string()))?;
        Ok((headers, records))
    }

    /// Array of row objects. Non-finite numbers become the strings `inf`,
    /// `-inf` and `NaN`, empty cells become `null`.
    pub fn to_json(&self) -> Result<Value, CliError> {
        let (headers, records) = self.records()?;
        Ok(Value::Array(
            records
                .iter()
                .map(|rec| {
                    let obj: Map<String, Value> = headers
                        .iter()
                        .zip(rec.iter())
                        .map(|(h, cell)| (h.clone(), cell_value(cell)))
                        .collect();
                    Value::Object(obj)
                })
                .collect(),
        ))
    }

    pub fn render(&self, format: Format) -> Result<Vec<u8>, CliError> {
        match format {
            Format::Csv => Ok(self.csv.clone()),
            Format::Json => pretty(&self.to_json()?),
        }
    }
}

fn cell_value(cell: &str) -> Value {
    if cell.is_empty() {
        return Value::Null;
    }
    match cell {
        "true" => return Value::Bool(true),
        "false" => return Value::Bool(false),
        _ => {}
    }
    if let Ok(u) = cell.parse::<u64>() {
        return Value::Number(u.into());
    }
    if let Ok(i) = cell.parse::<i64>() {
        return Value::Number(i.into());
    }
    if let Ok(f) = cell.parse::<f64>() {
        if let Some(n) = Number::from_f64(f) {
            return Value::Number(n);
        }
    }
    Value::String(cell.to_string())
}

/// TOML value as JSON, keeping non-finite floats as strings.
pub fn toml_to_json(v: &toml::Value) -> Value {
    match v {
        toml::Value::String(s) => Value::String(s.clone()),
        toml::Value::Integer(i) => Value::Number((*i).into()),
        toml::Value::Float(f) => Number::from_f64(*f)
            .map(Value::Number)
            .unwrap_or_else(|| Value::String(f.to_string())),
        toml::Value::Boolean(b) => Value::Bool(*b),
        toml::Value::Datetime(d) => Value::String(d.to_string()),
        toml::Value::Array(a) => Value::Array(a.iter().map(toml_to_json).collect()),
        toml::Value::Table(t) => Value::Object(t.iter().map(|(k, v)| (k.clone(), toml_to_json(v))).collect()),
    }
}

pub fn pretty(v: &Value) -> Result<Vec<u8>, CliError> {
    let mut bytes = serde_json::to_vec_pretty(v).map_err(|e| CliError::Output(e.to_string()))?;
    bytes.push(b'\n');
    Ok(bytes)
}

/// Sidecar path next to the main output: `run.csv` becomes `run.meta.json`.
pub fn sidecar_path(out: &Path) -> PathBuf {
    out.with_extension("meta.json")
}

/// Writes through a temporary file in the same directory and renames it.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    let io = |source| CliError::Io {
        path: path.to_path_buf(),
        source,
    };
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    fs::create_dir_all(dir).map_err(io)?;
    let name = path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
    let tmp = dir.join(format!(".{name}.tmp{}", std::process::id()));
    let result = fs::File::create(&tmp)
        .and_then(|mut f| {
            f.write_all(bytes)?;
            f.sync_all()
        })
        .and_then(|_| fs::rename(&tmp, path));
    if result.is_err() {
        let _ = fs::remove_file(&tmp);
    }
    result.map_err(io)
}
