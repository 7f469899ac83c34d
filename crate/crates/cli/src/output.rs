//! Artifact IO. Floats are written in the shortest decimal form that reads
//! back to the same `f64`, so identical runs produce identical bytes.

use std::fs::File;
use std::io::{self, Write};
use std::path::Path;

use serde::Deserialize;
use serde_json::{json, Map, Value};

use crate::error::CliError;

pub const SCHEMA_VERSION: u32 = 1;

pub const PROFILE_COLUMNS: [&str; 3] = ["r", "w", "wprime"];
pub const ORBIT_COLUMNS: [&str; 3] = ["t", "x", "y"];
pub const SWEEP_COLUMNS: [&str; 2] = ["a", "lambda"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

/// Shortest round-trip decimal (`1e-7`, `0.25`, `inf`).
pub fn fmt_f64(v: f64) -> String {
    if v.is_nan() {
        "nan".to_string()
    } else {
        format!("{v:?}")
    }
}

/// JSON number, or a string for non-finite values.
pub fn num(v: f64) -> Value {
    if v.is_finite() {
        json!(v)
    } else if v.is_nan() {
        json!("nan")
    } else if v > 0.0 {
        json!("inf")
    } else {
        json!("-inf")
    }
}

pub fn opt(v: Option<f64>) -> Value {
    v.map_or(Value::Null, num)
}

pub fn write_csv<W: Write>(out: W, columns: &[&str], rows: &[Vec<f64>]) -> io::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(columns)?;
    for row in rows {
        w.write_record(row.iter().map(|&v| fmt_f64(v)))?;
    }
    w.flush()
}

pub fn table_json(columns: &[&str], rows: &[Vec<f64>]) -> Value {
    let rows: Vec<Value> = rows.iter().map(|r| Value::Array(r.iter().map(|&v| num(v)).collect())).collect();
    json!({ "schema_version": SCHEMA_VERSION, "columns": columns, "rows": rows })
}

pub fn write_table(path: &Path, columns: &[&str], rows: &[Vec<f64>], format: Format) -> Result<(), CliError> {
    let file = File::create(path).map_err(|e| CliError::output(path, e))?;
    let res = match format {
        Format::Csv => write_csv(io::BufWriter::new(file), columns, rows),
        Format::Json => {
            let mut w = io::BufWriter::new(file);
            serde_json::to_writer(&mut w, &table_json(columns, rows))
                .map_err(io::Error::from)
                .and_then(|_| writeln!(w))
                .and_then(|_| w.flush())
        }
    };
    res.map_err(|e| CliError::output(path, e))
}

/// Read a CSV with exactly the given header.
pub fn read_table(path: &Path, columns: &[&str]) -> Result<Vec<Vec<f64>>, CliError> {
    let file = File::open(path).map_err(|e| CliError::unreadable(path, e))?;
    let bad = |m: String| CliError::Core(khess_core::Error::Input(format!("{}: {m}", path.display())));
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(file);
    let header = rdr.headers().map_err(|e| bad(e.to_string()))?.clone();
    if header.iter().ne(columns.iter().copied()) {
        return Err(bad(format!(
            "expected columns {}, found {}",
            columns.join(","),
            header.iter().collect::<Vec<_>>().join(",")
        )));
    }
    let mut rows = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| bad(e.to_string()))?;
        let row = rec
            .iter()
            .map(|f| f.parse::<f64>().map_err(|_| bad(format!("row {}: not a number: {f:?}", i + 2))))
            .collect::<Result<Vec<f64>, _>>()?;
        rows.push(row);
    }
    Ok(rows)
}

/// Print a single JSON object, with `schema_version`, on stdout.
pub fn print_json(mut fields: Map<String, Value>) {
    fields.insert("schema_version".into(), json!(SCHEMA_VERSION));
    println!("{}", Value::Object(fields));
}
