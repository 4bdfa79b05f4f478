//! CSV and JSON report emission.
//!
//! Floats are written with 17 significant digits (`{:.16e}`), so they parse
//! back to the same bits; NaN is the literal `nan`.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::{Serialize, Serializer};
use serde_json::Value;

use crate::error::HarnessError;

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Float(f64),
    Int(i64),
    Text(String),
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Float(x)
    }
}

impl From<usize> for Cell {
    fn from(x: usize) -> Self {
        Cell::Int(x as i64)
    }
}

impl From<u64> for Cell {
    fn from(x: u64) -> Self {
        Cell::Int(x as i64)
    }
}

impl From<i64> for Cell {
    fn from(x: i64) -> Self {
        Cell::Int(x)
    }
}

impl From<&str> for Cell {
    fn from(x: &str) -> Self {
        Cell::Text(x.to_string())
    }
}

impl From<String> for Cell {
    fn from(x: String) -> Self {
        Cell::Text(x)
    }
}

pub fn format_float(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{x:.16e}")
    }
}

pub fn parse_float(s: &str) -> Option<f64> {
    match s {
        "nan" => Some(f64::NAN),
        "inf" => Some(f64::INFINITY),
        "-inf" => Some(f64::NEG_INFINITY),
        _ => s.parse().ok(),
    }
}

fn quote(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// A table whose first column is the measured quantity.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub quantity: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(quantity: &str, columns: &[&str]) -> Self {
        Table {
            quantity: quantity.to_string(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(row.len(), self.columns.len(), "row width");
        self.rows.push(row);
    }

    pub fn nan_count(&self) -> usize {
        self.rows
            .iter()
            .flatten()
            .filter(|c| matches!(c, Cell::Float(x) if x.is_nan()))
            .count()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("quantity");
        for c in &self.columns {
            out.push(',');
            out.push_str(&quote(c));
        }
        out.push('\n');
        for row in &self.rows {
            out.push_str(&quote(&self.quantity));
            for cell in row {
                out.push(',');
                match cell {
                    Cell::Float(x) => out.push_str(&format_float(*x)),
                    Cell::Int(i) => write!(out, "{i}").unwrap(),
                    Cell::Text(s) => out.push_str(&quote(s)),
                }
            }
            out.push('\n');
        }
        out
    }
}

/// Serializes a float field as a JSON number, or `"nan"`/`"inf"` strings.
pub fn float<S: Serializer>(x: &f64, s: S) -> Result<S::Ok, S::Error> {
    if x.is_finite() {
        s.serialize_f64(*x)
    } else {
        s.serialize_str(&format_float(*x))
    }
}

/// Named scalar diagnostics, written in key order.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct Diagnostics(#[serde(serialize_with = "diag_map")] pub BTreeMap<String, f64>);

fn diag_map<S: Serializer>(m: &BTreeMap<String, f64>, s: S) -> Result<S::Ok, S::Error> {
    use serde::ser::SerializeMap;
    let mut map = s.serialize_map(Some(m.len()))?;
    for (k, v) in m {
        if v.is_finite() {
            map.serialize_entry(k, v)?;
        } else {
            map.serialize_entry(k, &format_float(*v))?;
        }
    }
    map.end()
}

impl Diagnostics {
    pub fn set(&mut self, key: &str, value: f64) {
        self.0.insert(key.to_string(), value);
    }

    pub fn get(&self, key: &str) -> Option<f64> {
        self.0.get(key).copied()
    }

    pub fn nan_keys(&self) -> Vec<String> {
        self.0.iter().filter(|(_, v)| v.is_nan()).map(|(k, _)| k.clone()).collect()
    }
}

/// JSON with object keys sorted, so output bytes depend only on content.
pub fn to_json<T: Serialize>(value: &T) -> Result<String, HarnessError> {
    let v: Value = serde_json::to_value(value).map_err(|e| HarnessError::Io(e.to_string()))?;
    let mut s = serde_json::to_string_pretty(&v).map_err(|e| HarnessError::Io(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

/// Files written by one run, in write order.
#[derive(Debug, Default)]
pub struct Artifacts {
    pub dir: PathBuf,
    pub written: Vec<(String, Vec<u8>)>,
}

impl Artifacts {
    pub fn new(dir: &Path) -> Result<Self, HarnessError> {
        std::fs::create_dir_all(dir).map_err(|e| HarnessError::Io(format!("{}: {e}", dir.display())))?;
        Ok(Artifacts { dir: dir.to_path_buf(), written: Vec::new() })
    }

    pub fn write(&mut self, name: &str, bytes: Vec<u8>) -> Result<(), HarnessError> {
        let path = self.dir.join(name);
        std::fs::write(&path, &bytes).map_err(|e| HarnessError::Io(format!("{}: {e}", path.display())))?;
        self.written.push((name.to_string(), bytes));
        Ok(())
    }

    pub fn csv(&mut self, name: &str, table: &Table) -> Result<(), HarnessError> {
        self.write(name, table.to_csv().into_bytes())
    }

    pub fn json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<(), HarnessError> {
        self.write(name, to_json(value)?.into_bytes())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_table_is_header_only() {
        let t = Table::new("mass drift", &["t", "drift"]);
        assert_eq!(t.to_csv(), "quantity,t,drift\n");
    }

    #[test]
    fn floats_round_trip() {
        for x in [0.1, 1.0 / 3.0, std::f64::consts::PI * 1e-300, -2.5e17, f64::MIN_POSITIVE, 5e-324] {
            assert_eq!(parse_float(&format_float(x)).unwrap().to_bits(), x.to_bits());
        }
        assert!(parse_float(&format_float(f64::NAN)).unwrap().is_nan());
        assert_eq!(format_float(f64::NAN), "nan");
        assert_eq!(parse_float("inf"), Some(f64::INFINITY));
    }

    #[test]
    fn rows_and_nan() {
        let mut t = Table::new("ratio, normalized", &["beta", "value"]);
        t.push(vec![2usize.into(), f64::NAN.into()]);
        t.push(vec![4usize.into(), 0.5.into()]);
        let csv = t.to_csv();
        assert_eq!(csv.lines().nth(1).unwrap(), "\"ratio, normalized\",2,nan");
        assert!(csv.lines().nth(2).unwrap().ends_with(",5.0000000000000000e-1"));
        assert_eq!(t.nan_count(), 1);
    }

    #[test]
    fn json_keys_are_sorted_and_nan_is_text() {
        let mut d = Diagnostics::default();
        d.set("zeta", 1.0);
        d.set("alpha", f64::NAN);
        let s = to_json(&d).unwrap();
        assert!(s.find("alpha").unwrap() < s.find("zeta").unwrap());
        assert!(s.contains("\"nan\""));
        assert_eq!(d.nan_keys(), vec!["alpha".to_string()]);
    }
}
