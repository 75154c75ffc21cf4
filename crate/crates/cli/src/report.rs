use std::fmt::Write as _;

use anyhow::Result;
use serde::Serialize;
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::args::Format;

/// Rows shared by the CSV and table renderings.
#[derive(Debug, Default)]
pub struct Table {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(columns: &[&'static str]) -> Self {
        Table {
            columns: columns.to_vec(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }
}

#[derive(Debug, Serialize)]
pub struct RunReport {
    pub command: String,
    pub args: Vec<String>,
    pub input_digest: Option<String>,
    pub seed: u64,
    pub results: Value,
    pub diagnostics: Value,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wall_clock_ms: Option<f64>,
}

/// What a command hands back for rendering.
pub struct Outcome {
    pub results: Value,
    pub diagnostics: Value,
    pub table: Table,
    /// Summary lines appended to the human table.
    pub notes: Vec<(String, String)>,
}

pub fn digest(bytes: &[u8]) -> String {
    let hash = Sha256::digest(bytes);
    let mut s = String::from("sha256:");
    for b in hash {
        let _ = write!(s, "{b:02x}");
    }
    s
}

/// Floats in tables and CSV: shortest round-trip form, in exponent notation when tiny or huge.
pub fn num(v: f64) -> String {
    if v != 0.0 && v.is_finite() && !(1e-4..1e15).contains(&v.abs()) {
        format!("{v:e}")
    } else {
        format!("{v}")
    }
}

pub fn yes_no(b: bool) -> String {
    if b { "yes" } else { "no" }.to_string()
}

pub fn render(report: &RunReport, outcome: &Outcome, format: Format) -> Result<String> {
    match format {
        Format::Json => {
            let mut s = serde_json::to_string_pretty(report)?;
            s.push('\n');
            Ok(s)
        }
        Format::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(&outcome.table.columns)?;
            for row in &outcome.table.rows {
                w.write_record(row)?;
            }
            Ok(String::from_utf8(w.into_inner()?)?)
        }
        Format::Table => Ok(human(report, outcome)),
    }
}

fn human(report: &RunReport, outcome: &Outcome) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "# fsc {}", report.args.join(" "));
    if let Some(d) = &report.input_digest {
        let _ = writeln!(out, "# input {d}");
    }
    let _ = writeln!(out, "# seed {}", report.seed);
    let t = &outcome.table;
    let mut widths: Vec<usize> = t.columns.iter().map(|c| c.len()).collect();
    for row in &t.rows {
        for (w, cell) in widths.iter_mut().zip(row) {
            *w = (*w).max(cell.len());
        }
    }
    let line = |cells: Vec<&str>| {
        let padded: Vec<String> = cells.iter().zip(&widths).map(|(c, w)| format!("{c:<w$}")).collect();
        padded.join("  ").trim_end().to_string()
    };
    let _ = writeln!(out, "{}", line(t.columns.clone()));
    for row in &t.rows {
        let _ = writeln!(out, "{}", line(row.iter().map(String::as_str).collect()));
    }
    if !outcome.notes.is_empty() {
        out.push('\n');
        let key_w = outcome.notes.iter().map(|(k, _)| k.len()).max().unwrap_or(0);
        for (k, v) in &outcome.notes {
            let _ = writeln!(out, "{:<key_w$}  {v}", format!("{k}:"), key_w = key_w + 1);
        }
    }
    if let Some(ms) = report.wall_clock_ms {
        let _ = writeln!(out, "# wall-clock {ms:.1} ms");
    }
    out
}
