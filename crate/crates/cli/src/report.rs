//! Run manifests and table/CSV/JSON emission.

use std::io::Write;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::args::Format;

/// Everything needed to repeat a run. `argv` is the fully resolved command
/// line; feeding it back to the tool reproduces the result.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub subcommand: String,
    pub problem: String,
    pub pr: f64,
    pub order: Option<usize>,
    pub pade: Vec<usize>,
    pub mode: String,
    pub a: Option<f64>,
    pub b: Option<f64>,
    pub tol: Option<f64>,
    pub max_iter: usize,
    pub eta_max: f64,
    pub step: f64,
    pub guess: Option<Vec<f64>>,
    pub source: Option<String>,
    pub grid: Option<String>,
    pub check_paper: bool,
    pub format: String,
    pub digits: usize,
    pub argv: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(i64),
    Text(String),
    Empty,
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Num(v)
    }
}

impl From<Option<f64>> for Cell {
    fn from(v: Option<f64>) -> Self {
        v.map_or(Cell::Empty, Cell::Num)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}

impl From<String> for Cell {
    fn from(v: String) -> Self {
        Cell::Text(v)
    }
}

#[derive(Debug, Clone, Default)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new<S: Into<String>>(columns: impl IntoIterator<Item = S>) -> Self {
        Self {
            columns: columns.into_iter().map(Into::into).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }
}

#[derive(Debug)]
pub struct Report {
    pub manifest: RunManifest,
    pub result: Value,
    pub table: Table,
}

/// `v` to `digits` significant digits, trailing zeros removed.
pub fn fmt_sig(v: f64, digits: usize) -> String {
    if v == 0.0 {
        return "0".into();
    }
    if !v.is_finite() {
        return v.to_string();
    }
    let digits = digits.max(1);
    // round in exponent form first so the integer part also respects `digits`
    let v: f64 = format!("{:.*e}", digits - 1, v)
        .parse()
        .expect("round trip");
    let exp = v.abs().log10().floor() as i32;
    if !(-5..16).contains(&exp) {
        let s = format!("{:.*e}", digits - 1, v);
        let (mantissa, e) = s.split_once('e').expect("exponent form");
        return format!("{}e{}", trim_zeros(mantissa), e);
    }
    let decimals = (digits as i32 - 1 - exp).max(0) as usize;
    let s = format!("{:.*}", decimals, v);
    let s = trim_zeros(&s);
    if s == "-0" {
        "0".into()
    } else {
        s
    }
}

fn trim_zeros(s: &str) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s.to_string()
    }
}

fn render(cell: &Cell, digits: usize) -> String {
    match cell {
        Cell::Num(v) => fmt_sig(*v, digits),
        Cell::Int(i) => i.to_string(),
        Cell::Text(t) => t.clone(),
        Cell::Empty => String::new(),
    }
}

pub fn emit(
    report: &Report,
    format: Format,
    digits: usize,
    out: &mut dyn Write,
) -> std::io::Result<()> {
    match format {
        Format::Json => {
            let doc = serde_json::json!({ "manifest": report.manifest, "result": report.result });
            serde_json::to_writer_pretty(&mut *out, &doc)?;
            writeln!(out)
        }
        Format::Csv => {
            writeln!(
                out,
                "# manifest: {}",
                serde_json::to_string(&report.manifest)?
            )?;
            let mut w = csv::WriterBuilder::new()
                .terminator(csv::Terminator::Any(b'\n'))
                .from_writer(&mut *out);
            w.write_record(&report.table.columns)?;
            for row in &report.table.rows {
                w.write_record(row.iter().map(|c| render(c, digits)))?;
            }
            w.flush()
        }
        Format::Table => {
            writeln!(out, "# {}", report.manifest.argv.join(" "))?;
            let cells: Vec<Vec<String>> = report
                .table
                .rows
                .iter()
                .map(|r| r.iter().map(|c| render(c, digits)).collect())
                .collect();
            let widths: Vec<usize> = report
                .table
                .columns
                .iter()
                .enumerate()
                .map(|(j, h)| {
                    cells
                        .iter()
                        .map(|r| r[j].chars().count())
                        .chain([h.chars().count()])
                        .max()
                        .unwrap_or(0)
                })
                .collect();
            let line = |vals: &[String]| {
                vals.iter()
                    .zip(&widths)
                    .map(|(v, w)| format!("{v:>w$}"))
                    .collect::<Vec<_>>()
                    .join("  ")
            };
            writeln!(out, "{}", line(&report.table.columns))?;
            for r in &cells {
                writeln!(out, "{}", line(r))?;
            }
            Ok(())
        }
    }
}
