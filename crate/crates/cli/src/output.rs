//! Output destinations and record rendering (CSV with header, or JSON lines).

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;

use serde_json::{json, Value};

use crate::config::{Format, RunConfig};
use crate::{CliError, OUTPUT_DIR_ENV};

/// One field of a record.
#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Int(i64),
    Float(f64),
    Text(String),
    Bool(bool),
    /// Space-separated in CSV, an array in JSON.
    Ints(Vec<i64>),
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Int(v) => v.to_string(),
            Cell::Float(v) => format_float(*v),
            Cell::Text(s) => s.clone(),
            Cell::Bool(b) => b.to_string(),
            Cell::Ints(v) => v.iter().map(i64::to_string).collect::<Vec<_>>().join(" "),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Int(v) => json!(v),
            // non-finite values have no JSON number; keep them as strings
            Cell::Float(v) if !v.is_finite() => json!(v.to_string()),
            Cell::Float(v) => json!(v),
            Cell::Text(s) => json!(s),
            Cell::Bool(b) => json!(b),
            Cell::Ints(v) => json!(v),
        }
    }
}

/// 17 significant digits.
pub fn format_float(v: f64) -> String {
    format!("{v:.16e}")
}

enum Dest {
    Stdout(io::Stdout),
    File(BufWriter<File>),
    Memory(Vec<u8>),
}

pub struct Sink {
    dest: Dest,
    format: Format,
    header: Option<Vec<String>>,
    path: Option<PathBuf>,
}

/// Format a command writes when none is configured.
pub fn default_format(command: &str) -> Format {
    match command {
        "paths" | "dirichlet" | "mc-verify" => Format::Json,
        _ => Format::Csv,
    }
}

fn extension(format: Format) -> &'static str {
    match format {
        Format::Csv => "csv",
        Format::Json => "jsonl",
    }
}

/// `--output`, placed under the output directory when that is set and the
/// path is relative; `<dir>/<command>.<ext>` when only the directory is set.
pub fn resolve_path(command: &str, format: Format, output: Option<&PathBuf>) -> Option<PathBuf> {
    let dir = std::env::var_os(OUTPUT_DIR_ENV).map(PathBuf::from);
    match (output, dir) {
        (Some(p), Some(d)) if p.is_relative() => Some(d.join(p)),
        (Some(p), _) => Some(p.clone()),
        (None, Some(d)) => Some(d.join(format!("{command}.{}", extension(format)))),
        (None, None) => None,
    }
}

impl Sink {
    /// Logs the resolved config to stderr and opens the destination.
    pub fn open(command: &str, cfg: &RunConfig) -> Result<Self, CliError> {
        let format = cfg.format.unwrap_or_else(|| default_format(command));
        let path = resolve_path(command, format, cfg.output.as_ref());
        let resolved = RunConfig { format: Some(format), output: path.clone(), ..cfg.clone() };
        eprintln!("pam {command}: {}", resolved.to_json());
        let dest = match &path {
            Some(p) => {
                if let Some(parent) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
                    std::fs::create_dir_all(parent)?;
                }
                Dest::File(BufWriter::new(File::create(p)?))
            }
            None => Dest::Stdout(io::stdout()),
        };
        Ok(Self { dest, format, header: None, path })
    }

    /// Collects output in memory.
    pub fn memory(format: Format) -> Self {
        Self { dest: Dest::Memory(Vec::new()), format, header: None, path: None }
    }

    pub fn format(&self) -> Format {
        self.format
    }

    pub fn path(&self) -> Option<&PathBuf> {
        self.path.as_ref()
    }

    fn write_line(&mut self, line: &str) -> io::Result<()> {
        match &mut self.dest {
            Dest::Stdout(s) => writeln!(s.lock(), "{line}"),
            Dest::File(f) => writeln!(f, "{line}"),
            Dest::Memory(m) => writeln!(m, "{line}"),
        }
    }

    /// One record; in CSV the first record fixes the header.
    pub fn record(&mut self, fields: &[(&str, Cell)]) -> Result<(), CliError> {
        match self.format {
            Format::Csv => {
                let names: Vec<String> = fields.iter().map(|(k, _)| k.to_string()).collect();
                match &self.header {
                    None => {
                        self.write_line(&names.join(","))?;
                        self.header = Some(names);
                    }
                    Some(h) if *h != names => {
                        return Err(CliError::Usage("record fields differ from the CSV header".into()));
                    }
                    Some(_) => {}
                }
                let row: Vec<String> = fields.iter().map(|(_, c)| c.csv()).collect();
                self.write_line(&row.join(","))?;
            }
            Format::Json => {
                let obj: serde_json::Map<String, Value> =
                    fields.iter().map(|(k, c)| (k.to_string(), c.json())).collect();
                self.write_line(&Value::Object(obj).to_string())?;
            }
        }
        Ok(())
    }

    /// A whole JSON document on one line, regardless of format.
    pub fn json(&mut self, value: &Value) -> Result<(), CliError> {
        self.write_line(&value.to_string())?;
        Ok(())
    }

    /// Free text line.
    pub fn text(&mut self, line: &str) -> Result<(), CliError> {
        self.write_line(line)?;
        Ok(())
    }

    pub fn finish(&mut self) -> Result<(), CliError> {
        match &mut self.dest {
            Dest::Stdout(s) => s.flush()?,
            Dest::File(f) => f.flush()?,
            Dest::Memory(_) => {}
        }
        Ok(())
    }

    /// Bytes collected by a memory sink.
    pub fn into_bytes(self) -> Vec<u8> {
        match self.dest {
            Dest::Memory(m) => m,
            _ => Vec::new(),
        }
    }
}
