//! Run records, the append-only ledger, and the command implementations
//! behind the `aplab` binary.

mod commands;
mod verify;

use std::fs::OpenOptions;
use std::io::{self, BufRead, BufReader, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::ser::Formatter;
use serde_json::Value;

use crate::error::{Error, Result};

pub use commands::{
    cmd_check, cmd_critical_size, cmd_khintchine, cmd_kimvu, cmd_norms, cmd_verify, CheckArgs,
    CommonArgs, CriticalSizeArgs, KhintchineArgs, KimvuArgs, NormDemo, NormsArgs, OutputFormat,
    VerifyArgs,
};
pub use verify::{run_verify_suite, VerifyOptions};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Assertion {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

impl Assertion {
    pub fn new(name: impl Into<String>, pass: bool, detail: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            pass,
            detail: detail.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub command: String,
    pub params: Value,
    pub seed: u64,
    pub results: Value,
    pub assertions: Vec<Assertion>,
    pub version: String,
    /// Seconds; not part of the payload.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wall_time: Option<f64>,
}

impl RunRecord {
    pub fn new<P: Serialize, R: Serialize>(
        command: &str,
        params: &P,
        seed: u64,
        results: &R,
        assertions: Vec<Assertion>,
    ) -> Result<Self> {
        Ok(Self {
            command: command.to_string(),
            params: serde_json::to_value(params)?,
            seed,
            results: serde_json::to_value(results)?,
            assertions,
            version: crate::VERSION.to_string(),
            wall_time: None,
        })
    }

    pub fn all_pass(&self) -> bool {
        self.assertions.iter().all(|a| a.pass)
    }

    /// The record without wall time, as one JSON line. Identical inputs give
    /// identical bytes.
    pub fn payload(&self) -> Result<String> {
        to_json(&Self {
            wall_time: None,
            ..self.clone()
        })
    }

    pub fn to_line(&self) -> Result<String> {
        to_json(self)
    }

    pub fn from_line(line: &str) -> Result<Self> {
        Ok(serde_json::from_str(line)?)
    }
}

/// Compact JSON whose floats carry 17 significant digits.
struct FloatFormatter;

impl Formatter for FloatFormatter {
    fn write_f64<W: ?Sized + Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        writer.write_all(format_f64(value).as_bytes())
    }

    fn write_f32<W: ?Sized + Write>(&mut self, writer: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(writer, value as f64)
    }
}

/// `d.dddddddddddddddde±x`: 17 significant digits, valid as a JSON number.
pub fn format_f64(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else {
        // serde_json already maps these to null; CSV gets the plain spelling
        format!("{v}")
    }
}

pub fn to_json<T: Serialize>(value: &T) -> Result<String> {
    let mut out = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut out, FloatFormatter);
    value.serialize(&mut ser)?;
    Ok(String::from_utf8(out).expect("serde_json writes UTF-8"))
}

/// Appends one line per record.
pub fn append_ledger(path: &Path, record: &RunRecord) -> Result<()> {
    let mut f = OpenOptions::new().create(true).append(true).open(path)?;
    writeln!(f, "{}", record.to_line()?)?;
    Ok(())
}

pub fn read_ledger(path: &Path) -> Result<Vec<RunRecord>> {
    let f = std::fs::File::open(path)?;
    let mut out = Vec::new();
    for (no, line) in BufReader::new(f).lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(RunRecord::from_line(&line).map_err(|e| Error::Parse(format!("ledger line {}: {e}", no + 1)))?);
    }
    Ok(out)
}

fn cell(v: &Value) -> String {
    match v {
        Value::Null => String::new(),
        Value::String(s) => s.clone(),
        Value::Number(n) if n.is_f64() => format_f64(n.as_f64().unwrap_or(f64::NAN)),
        other => other.to_string(),
    }
}

/// Flat CSV: the probe curve (one row per `m`) for critical-size runs, the
/// assertion list otherwise.
pub fn to_csv(record: &RunRecord) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    if let Some(curve) = record.results.get("p_curve").and_then(Value::as_array) {
        let cols = ["m", "trials", "successes", "p_hat", "ci_low", "ci_high"];
        w.write_record(cols)?;
        for point in curve {
            w.write_record(cols.iter().map(|c| cell(point.get(*c).unwrap_or(&Value::Null))))?;
        }
    } else {
        w.write_record(["name", "pass", "detail"])?;
        for a in &record.assertions {
            w.write_record([a.name.as_str(), if a.pass { "true" } else { "false" }, a.detail.as_str()])?;
        }
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv writes UTF-8"))
}
