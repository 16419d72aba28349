//! Output envelopes. JSON carries full precision; CSV rounds to six
//! significant digits and starts with `#` lines holding the tool version,
//! seed and resolved config.

use std::io::Write;
use std::path::Path;

use anyhow::{Context, Result};
use serde::Serialize;
use serde_json::{json, Value};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Provenance block embedded in every artifact.
#[derive(Debug, Clone, Serialize)]
pub struct Meta {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: &'static str,
    pub seed: u64,
    pub config: Value,
}

impl Meta {
    pub fn new(command: &'static str, seed: u64, config: Value) -> Self {
        Meta {
            tool: "degbias",
            version: VERSION,
            command,
            seed,
            config,
        }
    }
}

/// Six significant digits, fixed notation for moderate magnitudes.
pub fn sig6(x: f64) -> String {
    if !x.is_finite() {
        return x.to_string();
    }
    if x == 0.0 {
        return "0".to_string();
    }
    let sci = format!("{x:.5e}");
    let exp: i32 = sci.rsplit('e').next().and_then(|e| e.parse().ok()).unwrap_or(0);
    if (-4..15).contains(&exp) {
        format!("{:.*}", (5 - exp).max(0) as usize, x)
    } else {
        sci
    }
}

pub fn json_document<T: Serialize>(meta: &Meta, result: &T) -> Result<String> {
    let mut doc = serde_json::to_value(meta)?;
    doc["result"] = serde_json::to_value(result)?;
    Ok(serde_json::to_string_pretty(&doc)? + "\n")
}

/// One CSV cell.
pub enum Cell {
    Text(String),
    Int(usize),
    Num(f64),
    Missing,
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::Text(s) => s.clone(),
            Cell::Int(i) => i.to_string(),
            Cell::Num(x) => sig6(*x),
            Cell::Missing => String::new(),
        }
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Num(x)
    }
}

impl From<Option<f64>> for Cell {
    fn from(x: Option<f64>) -> Self {
        x.map_or(Cell::Missing, Cell::Num)
    }
}

impl From<usize> for Cell {
    fn from(i: usize) -> Self {
        Cell::Int(i)
    }
}

impl From<u64> for Cell {
    fn from(i: u64) -> Self {
        Cell::Text(i.to_string())
    }
}

impl From<&str> for Cell {
    fn from(s: &str) -> Self {
        Cell::Text(s.to_string())
    }
}

impl From<String> for Cell {
    fn from(s: String) -> Self {
        Cell::Text(s)
    }
}

impl From<bool> for Cell {
    fn from(b: bool) -> Self {
        Cell::Text(b.to_string())
    }
}

pub fn csv_document(meta: &Meta, header: &[&str], rows: Vec<Vec<Cell>>) -> Result<String> {
    let mut out = format!(
        "# {} {}\n# command={}\n# seed={}\n# config={}\n",
        meta.tool,
        meta.version,
        meta.command,
        meta.seed,
        serde_json::to_string(&meta.config)?
    );
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header)?;
    for r in rows {
        w.write_record(r.iter().map(Cell::render))?;
    }
    out.push_str(&String::from_utf8(w.into_inner()?)?);
    Ok(out)
}

/// `key,value` rows from the scalar leaves of a JSON object, with nested
/// keys joined by dots.
pub fn flatten_json(prefix: &str, v: &Value, rows: &mut Vec<Vec<Cell>>) {
    match v {
        Value::Object(m) => {
            for (k, x) in m {
                let key = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
                flatten_json(&key, x, rows);
            }
        }
        Value::Number(n) => rows.push(vec![prefix.into(), n.as_f64().map_or(Cell::Missing, Cell::Num)]),
        Value::Null => rows.push(vec![prefix.into(), Cell::Missing]),
        Value::Bool(b) => rows.push(vec![prefix.into(), (*b).into()]),
        Value::String(s) => rows.push(vec![prefix.into(), s.as_str().into()]),
        Value::Array(a) => rows.push(vec![prefix.into(), Cell::Text(json!(a).to_string())]),
    }
}

pub fn emit(text: &str, path: Option<&Path>) -> Result<()> {
    match path {
        Some(p) => std::fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            std::io::stdout().write_all(text.as_bytes())?;
            Ok(())
        }
    }
}
