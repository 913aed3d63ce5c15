//! Report documents: `{"kind", "config", "rows", "pass", ...}` plus an opt-in CSV projection.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

pub const TOOL: &str = "equidist";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Everything needed to reproduce a report with the same binary.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub subcommand: String,
    /// Arguments after the program name, as executed.
    pub argv: Vec<String>,
    /// Fully resolved configuration of the run.
    pub resolved: Value,
    pub outputs: Outputs,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Outputs {
    pub json: Option<PathBuf>,
    pub csv: Option<PathBuf>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub kind: String,
    pub config: RunManifest,
    pub rows: Vec<Value>,
    pub pass: bool,
    #[serde(default, skip_serializing_if = "Value::is_null")]
    pub summary: Value,
}

impl Report {
    pub fn write(&self) -> Result<()> {
        if let Some(path) = &self.config.outputs.json {
            let mut text = serde_json::to_string_pretty(self)?;
            text.push('\n');
            fs::write(path, text).with_context(|| format!("writing {}", path.display()))?;
        }
        if let Some(path) = &self.config.outputs.csv {
            write_csv(path, &self.rows)?;
        }
        Ok(())
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text =
            fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        serde_json::from_str(&text).with_context(|| format!("parsing report {}", path.display()))
    }
}

/// Flattens nested objects and arrays into dotted column names.
fn flatten(prefix: &str, value: &Value, out: &mut Vec<(String, String)>) {
    let key = |k: &str| {
        if prefix.is_empty() {
            k.to_string()
        } else {
            format!("{prefix}.{k}")
        }
    };
    match value {
        Value::Object(map) => {
            for (k, v) in map {
                flatten(&key(k), v, out);
            }
        }
        Value::Array(items) => {
            for (i, v) in items.iter().enumerate() {
                flatten(&key(&i.to_string()), v, out);
            }
        }
        Value::Null => out.push((prefix.to_string(), String::new())),
        Value::String(s) => out.push((prefix.to_string(), s.clone())),
        other => out.push((prefix.to_string(), other.to_string())),
    }
}

pub fn write_csv(path: &Path, rows: &[Value]) -> Result<()> {
    let mut writer =
        csv::Writer::from_path(path).with_context(|| format!("creating {}", path.display()))?;
    let mut header: Option<Vec<String>> = None;
    for row in rows {
        let mut cells = Vec::new();
        flatten("", row, &mut cells);
        let names: Vec<String> = cells.iter().map(|(k, _)| k.clone()).collect();
        match &header {
            None => {
                writer.write_record(&names)?;
                header = Some(names);
            }
            Some(h) if *h != names => bail!("CSV rows have inconsistent columns"),
            Some(_) => {}
        }
        writer.write_record(cells.iter().map(|(_, v)| v))?;
    }
    writer.flush()?;
    Ok(())
}

/// Serializes each element into a JSON row object.
pub fn to_rows<T: Serialize>(items: &[T]) -> Result<Vec<Value>> {
    items.iter().map(|x| Ok(serde_json::to_value(x)?)).collect()
}

pub fn object(pairs: Vec<(&str, Value)>) -> Value {
    Value::Object(
        pairs
            .into_iter()
            .map(|(k, v)| (k.to_string(), v))
            .collect::<Map<_, _>>(),
    )
}
