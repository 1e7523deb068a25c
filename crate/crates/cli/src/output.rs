//! Table emission as commented CSV or a single JSON document.

use std::io::Write;

use serde_json::{json, Map, Value};

use crate::config::{Format, RunConfig, CONFIG_LINE};
use crate::VERSION;

/// Significant digits of every printed number.
pub const DIGITS: usize = 12;

/// `%.12g`-style rendering; exponent form below `1e-4` and from `1e12`.
pub fn fmt_num(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0".into();
    }
    let sci = format!("{:.*e}", DIGITS - 1, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent");
    let exp: i32 = exp.parse().expect("integer exponent");
    if exp < -4 || exp >= DIGITS as i32 {
        format!("{}e{}", trim_zeros(mantissa), exp)
    } else {
        let decimals = (DIGITS as i32 - 1 - exp).max(0) as usize;
        trim_zeros(&format!("{x:.decimals$}")).to_owned()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// The value as it appears in CSV output.
pub fn rounded(x: f64) -> f64 {
    fmt_num(x).parse().unwrap_or(x)
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(i64),
    Text(String),
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Num(x) => fmt_num(*x),
            Cell::Int(i) => i.to_string(),
            Cell::Text(s) => s.clone(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Num(x) if x.is_finite() => json!(rounded(*x)),
            Cell::Num(x) => json!(fmt_num(*x)),
            Cell::Int(i) => json!(i),
            Cell::Text(s) => json!(s),
        }
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Num(x)
    }
}

impl From<usize> for Cell {
    fn from(i: usize) -> Self {
        Cell::Int(i as i64)
    }
}

impl From<&str> for Cell {
    fn from(s: &str) -> Self {
        Cell::Text(s.to_owned())
    }
}

/// A command's result: metadata lines plus a rectangular table.
#[derive(Debug, Clone, Default)]
pub struct Report {
    pub meta: Vec<(String, String)>,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
    /// Extra top-level members of the JSON form.
    pub extra: Map<String, Value>,
}

impl Report {
    pub fn new(columns: &[&str]) -> Self {
        Report {
            columns: columns.iter().map(|c| (*c).to_owned()).collect(),
            ..Default::default()
        }
    }

    pub fn meta(&mut self, key: &str, value: impl Into<String>) {
        self.meta.push((key.to_owned(), value.into()));
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }
}

fn csv_escape(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_owned()
    }
}

pub fn write_report<W: Write>(out: &mut W, command: &str, cfg: &RunConfig, report: &Report) -> std::io::Result<()> {
    match cfg.format {
        Format::Csv => {
            writeln!(out, "# sivstrain {command} {VERSION}")?;
            writeln!(out, "{CONFIG_LINE}{}", cfg.echo())?;
            for (k, v) in &report.meta {
                writeln!(out, "# {k}: {}", v.replace('\n', " "))?;
            }
            writeln!(out, "{}", report.columns.join(","))?;
            for row in &report.rows {
                let cells: Vec<String> = row.iter().map(|c| csv_escape(&c.csv())).collect();
                writeln!(out, "{}", cells.join(","))?;
            }
        }
        Format::Json => {
            let mut doc = Map::new();
            doc.insert("command".into(), json!(command));
            doc.insert("version".into(), json!(VERSION));
            doc.insert(
                "config_echo".into(),
                serde_json::to_value(cfg).expect("config serializes"),
            );
            let meta: Map<String, Value> = report.meta.iter().map(|(k, v)| (k.clone(), json!(v))).collect();
            doc.insert("meta".into(), Value::Object(meta));
            for (k, v) in &report.extra {
                doc.insert(k.clone(), v.clone());
            }
            doc.insert("columns".into(), json!(report.columns));
            let rows: Vec<Value> = report
                .rows
                .iter()
                .map(|r| Value::Array(r.iter().map(Cell::json).collect()))
                .collect();
            doc.insert("rows".into(), Value::Array(rows));
            serde_json::to_writer_pretty(&mut *out, &Value::Object(doc))?;
            writeln!(out)?;
        }
    }
    Ok(())
}
