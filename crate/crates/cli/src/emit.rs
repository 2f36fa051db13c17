//! CSV and JSON writers shared by every command.

use serde_json::{Map, Value};
use std::fmt::Write as _;

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Opt(Option<f64>),
    Bool(bool),
    Text(String),
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Num(x) => num_csv(*x),
            Cell::Opt(Some(x)) => num_csv(*x),
            Cell::Opt(None) => String::new(),
            Cell::Bool(b) => b.to_string(),
            Cell::Text(s) => s.clone(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Num(x) | Cell::Opt(Some(x)) => num_json(*x),
            Cell::Opt(None) => Value::Null,
            Cell::Bool(b) => Value::Bool(*b),
            Cell::Text(s) => Value::String(s.clone()),
        }
    }
}

/// 17 significant digits in scientific notation, so every value reparses exactly.
pub fn num_csv(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else if x.is_nan() {
        "NaN".into()
    } else if x > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

/// Non-finite values have no JSON form and become `null`.
pub fn num_json(x: f64) -> Value {
    serde_json::Number::from_f64(x).map_or(Value::Null, Value::Number)
}

pub fn opt_json(x: Option<f64>) -> Value {
    x.map_or(Value::Null, num_json)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(columns: &[&'static str]) -> Self {
        Self { columns: columns.to_vec(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(row.len(), self.columns.len(), "row width does not match the header");
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> String {
        let mut s = self.columns.join(",");
        s.push('\n');
        for row in &self.rows {
            let fields: Vec<String> = row.iter().map(Cell::csv).collect();
            let _ = writeln!(s, "{}", fields.join(","));
        }
        s
    }

    fn json_rows(&self) -> Value {
        let rows = self
            .rows
            .iter()
            .map(|row| {
                let obj: Map<String, Value> =
                    self.columns.iter().zip(row).map(|(c, v)| (c.to_string(), v.json())).collect();
                Value::Object(obj)
            })
            .collect();
        Value::Array(rows)
    }
}

/// What a command produces: scalar summary fields plus a table.
#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub summary: Map<String, Value>,
    pub table: Table,
}

impl Report {
    pub fn new(table: Table) -> Self {
        Self { summary: Map::new(), table }
    }

    pub fn set(&mut self, key: &str, value: Value) {
        self.summary.insert(key.into(), value);
    }

    /// One top-level object: summary fields, then `rows`.
    pub fn to_json(&self) -> String {
        let mut obj = self.summary.clone();
        obj.insert("rows".into(), self.table.json_rows());
        let mut s = serde_json::to_string_pretty(&Value::Object(obj)).expect("JSON values always serialize");
        s.push('\n');
        s
    }

    pub fn summary_json(&self) -> String {
        serde_json::to_string(&self.summary).expect("JSON values always serialize")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_table_is_header_only() {
        let t = Table::new(&["a", "b"]);
        assert_eq!(t.to_csv(), "a,b\n");
    }

    #[test]
    fn one_row() {
        let mut t = Table::new(&["x", "flag", "s", "o"]);
        t.push(vec![Cell::Num(0.1), Cell::Bool(true), Cell::Text("blowup".into()), Cell::Opt(None)]);
        assert_eq!(t.to_csv(), "x,flag,s,o\n1.0000000000000001e-1,true,blowup,\n");
        let mut r = Report::new(t);
        r.set("k", num_json(2.0));
        let v: Value = serde_json::from_str(&r.to_json()).unwrap();
        assert_eq!(v["k"], 2.0);
        assert_eq!(v["rows"][0]["o"], Value::Null);
        assert_eq!(v["rows"][0]["flag"], true);
    }

    #[test]
    fn csv_numbers_round_trip() {
        for x in [std::f64::consts::PI, 1e-300, -2.5e17, 0.1 + 0.2, f64::MIN_POSITIVE, 0.0] {
            assert_eq!(num_csv(x).parse::<f64>().unwrap(), x);
        }
        assert_eq!(num_csv(f64::NAN), "NaN");
    }
}
