//! CSV and JSON writers for result tables.
//!
//! CSV floats carry a fixed number of significant digits; JSON floats are
//! written in shortest round-trip form.

use std::io::Write;

use serde_json::{json, Value};

use crate::montecarlo::{Cell, SweepTable};

/// Header plus rows, every row as wide as the header.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(columns: Vec<String>) -> Self {
        Table {
            columns,
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }
}

impl From<SweepTable> for Table {
    fn from(t: SweepTable) -> Self {
        Table {
            columns: t.columns,
            rows: t.rows,
        }
    }
}

/// `x` rounded to `digits` significant digits, plain notation for moderate
/// magnitudes and scientific otherwise, trailing zeros removed.
pub fn format_sig(x: f64, digits: usize) -> String {
    if !x.is_finite() {
        return x.to_string();
    }
    if x == 0.0 {
        return "0".into();
    }
    let digits = digits.max(1);
    let sci = format!("{:.*e}", digits - 1, x);
    let (mantissa, exp) = sci.split_once('e').expect("scientific notation");
    let exp: i32 = exp.parse().expect("integer exponent");
    if exp < -5 || exp >= digits as i32 {
        return format!("{}e{exp}", trim_zeros(mantissa));
    }
    let decimals = (digits as i32 - 1 - exp).max(0) as usize;
    trim_zeros(&format!("{x:.decimals$}")).to_string()
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

fn csv_field(c: &Cell, digits: usize) -> String {
    match c {
        Cell::Num(x) => format_sig(*x, digits),
        Cell::Int(n) => n.to_string(),
        Cell::Text(s) => s.clone(),
        Cell::Empty => String::new(),
    }
}

pub fn write_csv(table: &Table, digits: usize, out: impl Write) -> std::io::Result<()> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(out);
    w.write_record(&table.columns)?;
    for row in &table.rows {
        w.write_record(row.iter().map(|c| csv_field(c, digits)))?;
    }
    w.flush()
}

fn json_cell(c: &Cell) -> Value {
    match c {
        Cell::Num(x) => json!(x),
        Cell::Int(n) => json!(n),
        Cell::Text(s) => json!(s),
        Cell::Empty => Value::Null,
    }
}

/// `{"columns": [...], "rows": [[...], ...]}` followed by a newline.
pub fn write_json(table: &Table, mut out: impl Write) -> std::io::Result<()> {
    let rows: Vec<Value> = table
        .rows
        .iter()
        .map(|r| Value::Array(r.iter().map(json_cell).collect()))
        .collect();
    let doc = json!({ "columns": table.columns, "rows": rows });
    serde_json::to_writer_pretty(&mut out, &doc)?;
    out.write_all(b"\n")
}
