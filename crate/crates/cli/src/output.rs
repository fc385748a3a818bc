use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use serde::Serialize;
use serde_json::{Map, Value};

use crate::cli::{Format, TableOutput};
use crate::error::CliError;

/// Fibre attenuation behind every distance axis.
pub const FIBRE_LOSS_DB_PER_KM: f64 = 0.2;

/// Header block shared by all JSON documents.
#[derive(Debug, Clone, Serialize)]
pub struct Metadata {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: &'static str,
    pub units: &'static str,
    pub fibre_loss_db_per_km: f64,
    pub parameters: Map<String, Value>,
}

impl Metadata {
    pub fn new(command: &'static str, parameters: Map<String, Value>) -> Self {
        Metadata {
            tool: "cvqkd",
            version: env!("CARGO_PKG_VERSION"),
            command,
            units: "quadratures in shot-noise units, rates in bits per symbol",
            fibre_loss_db_per_km: FIBRE_LOSS_DB_PER_KM,
            parameters,
        }
    }
}

pub fn open(path: Option<&Path>) -> Result<Box<dyn Write>, CliError> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

/// Shortest round-trip text, switching to exponent form for tiny or huge values.
pub fn fmt_number(v: f64) -> String {
    let a = v.abs();
    if v != 0.0 && a.is_finite() && !(1e-4..1e15).contains(&a) {
        format!("{v:e}")
    } else {
        format!("{v}")
    }
}

/// Numeric table written as CSV or as a JSON document.
#[derive(Debug, Clone)]
pub struct Table {
    pub command: &'static str,
    pub columns: &'static [&'static str],
    pub rows: Vec<Vec<f64>>,
    pub parameters: Map<String, Value>,
}

impl Table {
    pub fn write(&self, out: &TableOutput) -> Result<(), CliError> {
        let mut sink = open(out.output.as_deref())?;
        match out.format {
            Format::Csv => {
                let mut w = csv::Writer::from_writer(sink);
                w.write_record(self.columns)?;
                for row in &self.rows {
                    w.write_record(row.iter().map(|v| fmt_number(*v)))?;
                }
                w.flush()?;
            }
            Format::Json => {
                let rows: Vec<Value> = self
                    .rows
                    .iter()
                    .map(|row| {
                        let obj: Map<String, Value> =
                            self.columns.iter().zip(row).map(|(c, v)| (c.to_string(), Value::from(*v))).collect();
                        Value::Object(obj)
                    })
                    .collect();
                let doc = serde_json::json!({
                    "metadata": Metadata::new(self.command, self.parameters.clone()),
                    "columns": self.columns,
                    "rows": rows,
                });
                serde_json::to_writer_pretty(&mut sink, &doc)?;
                writeln!(sink)?;
                sink.flush()?;
            }
        }
        Ok(())
    }
}
