//! Bundled reference values for Tables 1 through 4, and per-cell comparison.

use crate::error::{Error, Result};
use serde::Serialize;

pub const BUNDLED: &str = include_str!("../data/reference.csv");

const HEADER: [&str; 5] = ["table", "row", "column", "value", "uncertainty"];

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReferenceCell {
    pub table: u8,
    pub row: String,
    pub column: String,
    pub value: f64,
    pub uncertainty: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ReferenceData {
    pub cells: Vec<ReferenceCell>,
}

/// Parse `table,row,column,value,uncertainty` records. `#` lines are comments.
pub fn parse_reference(text: &str) -> Result<ReferenceData> {
    let mut rd = csv::ReaderBuilder::new().comment(Some(b'#')).has_headers(true).from_reader(text.as_bytes());
    let line_of = |p: Option<&csv::Position>| p.map_or(0, |p| p.line() as usize);
    let header = rd.headers().map_err(|e| Error::Reference { line: line_of(e.position()), msg: e.to_string() })?;
    if header.iter().map(str::trim).ne(HEADER) {
        return Err(Error::Reference { line: 1, msg: format!("header must be `{}`", HEADER.join(",")) });
    }
    let mut cells = Vec::new();
    for rec in rd.records() {
        let rec = rec.map_err(|e| Error::Reference { line: line_of(e.position()), msg: e.to_string() })?;
        let line = line_of(rec.position());
        let bad = |msg: String| Error::Reference { line, msg };
        let field = |i: usize| rec.get(i).map(str::trim).unwrap_or("");
        let table: u8 = field(0).parse().map_err(|_| bad(format!("bad table `{}`", field(0))))?;
        if !(1..=4).contains(&table) {
            return Err(bad(format!("table {table} out of range")));
        }
        let value: f64 = field(3).parse().map_err(|_| bad(format!("bad value `{}`", field(3))))?;
        if !value.is_finite() {
            return Err(bad("value is not finite".into()));
        }
        let uncertainty = match field(4) {
            "" => None,
            u => Some(u.parse::<f64>().ok().filter(|u| *u >= 0.0 && u.is_finite()).ok_or_else(|| bad(format!("bad uncertainty `{u}`")))?),
        };
        if field(1).is_empty() || field(2).is_empty() {
            return Err(bad("empty row or column".into()));
        }
        cells.push(ReferenceCell { table, row: field(1).into(), column: field(2).into(), value, uncertainty });
    }
    Ok(ReferenceData { cells })
}

impl ReferenceData {
    pub fn bundled() -> Self {
        parse_reference(BUNDLED).expect("bundled reference data parses")
    }

    pub fn get(&self, table: u8, row: &str, column: &str) -> Option<&ReferenceCell> {
        self.cells.iter().find(|c| c.table == table && c.row == row && c.column == column)
    }

    pub fn value(&self, table: u8, row: &str, column: &str) -> Option<f64> {
        self.get(table, row, column).map(|c| c.value)
    }
}

/// One computed value set against its reference cell.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Deviation {
    pub table: u8,
    pub row: String,
    pub column: String,
    pub reference: f64,
    pub computed: f64,
    pub deviation: f64,
}

/// `computed − reference` for every key present in both.
pub fn compare<'a>(reference: &ReferenceData, computed: impl IntoIterator<Item = ((u8, String, String), f64)> + 'a) -> Vec<Deviation> {
    computed
        .into_iter()
        .filter_map(|((table, row, column), v)| {
            reference.get(table, &row, &column).map(|c| Deviation {
                table,
                reference: c.value,
                computed: v,
                deviation: v - c.value,
                row,
                column,
            })
        })
        .collect()
}
