//! Column-oriented result tables with CSV and JSON emission.

use std::collections::BTreeMap;
use std::io::Write;

use serde::ser::{SerializeMap, Serializer};
use serde::Serialize;

use super::config::ExperimentConfig;

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(u64),
    Text(String),
    Bool(bool),
}

impl Cell {
    /// CSV text: 17 significant digits, `inf`/`-inf`/`nan` for non-finite values.
    pub fn to_csv_field(&self) -> String {
        match self {
            Cell::Num(x) if x.is_nan() => "nan".into(),
            Cell::Num(x) if x.is_infinite() => if *x > 0.0 { "inf" } else { "-inf" }.into(),
            Cell::Num(x) => format!("{x:.16e}"),
            Cell::Int(n) => n.to_string(),
            Cell::Text(s) => s.clone(),
            Cell::Bool(b) => b.to_string(),
        }
    }
}

impl Serialize for Cell {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            Cell::Num(x) if x.is_finite() => s.serialize_f64(*x),
            Cell::Num(x) => {
                let tag = if x.is_nan() {
                    "nan"
                } else if *x > 0.0 {
                    "inf"
                } else {
                    "-inf"
                };
                let mut map = s.serialize_map(Some(1))?;
                map.serialize_entry("non_finite", tag)?;
                map.end()
            }
            Cell::Int(n) => s.serialize_u64(*n),
            Cell::Text(t) => s.serialize_str(t),
            Cell::Bool(b) => s.serialize_bool(*b),
        }
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Num(x)
    }
}

impl From<bool> for Cell {
    fn from(b: bool) -> Self {
        Cell::Bool(b)
    }
}

impl From<usize> for Cell {
    fn from(n: usize) -> Self {
        Cell::Int(n as u64)
    }
}

impl From<&str> for Cell {
    fn from(t: &str) -> Self {
        Cell::Text(t.to_string())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Column {
    pub name: String,
    pub values: Vec<Cell>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Metadata {
    pub command: String,
    pub version: String,
    pub config: ExperimentConfig,
    pub tolerances: BTreeMap<String, f64>,
    pub summary: BTreeMap<String, Cell>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResultTable {
    pub metadata: Metadata,
    pub columns: Vec<Column>,
}

impl ResultTable {
    pub fn new(command: &str, config: &ExperimentConfig) -> Self {
        ResultTable {
            metadata: Metadata {
                command: command.to_string(),
                version: env!("CARGO_PKG_VERSION").to_string(),
                config: config.clone(),
                tolerances: BTreeMap::new(),
                summary: BTreeMap::new(),
            },
            columns: Vec::new(),
        }
    }

    pub fn push_column(&mut self, name: &str, values: Vec<Cell>) {
        if let Some(first) = self.columns.first() {
            assert_eq!(first.values.len(), values.len(), "column {name} has the wrong length");
        }
        self.columns.push(Column {
            name: name.to_string(),
            values,
        });
    }

    pub fn tolerance(&mut self, name: &str, value: f64) {
        self.metadata.tolerances.insert(name.to_string(), value);
    }

    pub fn summary(&mut self, name: &str, value: impl Into<Cell>) {
        self.metadata.summary.insert(name.to_string(), value.into());
    }

    pub fn column(&self, name: &str) -> Option<&[Cell]> {
        self.columns
            .iter()
            .find(|c| c.name == name)
            .map(|c| c.values.as_slice())
    }

    pub fn rows(&self) -> usize {
        self.columns.first().map_or(0, |c| c.values.len())
    }

    pub fn write_csv(&self, out: impl Write) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(self.columns.iter().map(|c| c.name.as_str()))?;
        for r in 0..self.rows() {
            w.write_record(self.columns.iter().map(|c| c.values[r].to_csv_field()))?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn write_json(&self, mut out: impl Write) -> std::io::Result<()> {
        serde_json::to_writer_pretty(&mut out, self)?;
        writeln!(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cli::config::parse_config;

    fn table() -> ResultTable {
        let cfg = parse_config(r#"{"model": {"circulant": {"p": 2, "alpha": [0, 1]}}}"#).unwrap();
        let mut t = ResultTable::new("epr", &cfg);
        t.push_column("t", vec![0.1.into(), 0.05.into()]);
        t.push_column("S", vec![f64::INFINITY.into(), Cell::Num(1.0 / 3.0)]);
        t
    }

    #[test]
    fn csv_uses_seventeen_digits_and_inf() {
        let mut buf = Vec::new();
        table().write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "t,S");
        assert_eq!(lines[1], "1.0000000000000001e-1,inf");
        let third: f64 = lines[2].split(',').nth(1).unwrap().parse().unwrap();
        assert_eq!(third, 1.0 / 3.0);
    }

    #[test]
    fn json_tags_non_finite_values() {
        let mut buf = Vec::new();
        table().write_json(&mut buf).unwrap();
        let v: serde_json::Value = serde_json::from_slice(&buf).unwrap();
        assert_eq!(v["columns"][1]["values"][0]["non_finite"], "inf");
        assert_eq!(v["metadata"]["command"], "epr");
        let echoed: ExperimentConfig =
            serde_json::from_value(v["metadata"]["config"].clone()).unwrap();
        assert_eq!(echoed, table().metadata.config);
    }
}
