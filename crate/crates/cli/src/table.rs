//! Result tables and their CSV/JSON serializations.

use conebook_core::{Error, Result};
use serde_json::{Map, Number, Value};
use std::f64::consts::PI;
use std::fs;
use std::path::{Path, PathBuf};

/// A scalar cell. Probability and angle cells carry their range constraints.
#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Int(i64),
    Float(f64),
    Prob(f64),
    Angle(f64),
    Bool(bool),
    Text(String),
    Missing,
}

impl Cell {
    pub fn text(s: impl Into<String>) -> Self {
        Cell::Text(s.into())
    }

    pub fn opt(v: Option<f64>) -> Self {
        v.map_or(Cell::Missing, Cell::Float)
    }

    fn csv(&self) -> String {
        match self {
            Cell::Int(v) => v.to_string(),
            Cell::Float(v) | Cell::Prob(v) | Cell::Angle(v) => format_float(*v),
            Cell::Bool(b) => b.to_string(),
            Cell::Text(s) => s.clone(),
            Cell::Missing => String::new(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Int(v) => Value::from(*v),
            Cell::Float(v) | Cell::Prob(v) | Cell::Angle(v) => float_value(*v),
            Cell::Bool(b) => Value::Bool(*b),
            Cell::Text(s) => Value::String(s.clone()),
            Cell::Missing => Value::Null,
        }
    }
}

/// 17 significant digits; non-finite values spelled out.
pub fn format_float(v: f64) -> String {
    if v.is_nan() {
        "NaN".into()
    } else if v.is_infinite() {
        if v > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{v:.16e}")
    }
}

pub fn float_value(v: f64) -> Value {
    if v.is_finite() {
        Value::Number(format_float(v).parse::<Number>().expect("formatted float is valid JSON"))
    } else {
        Value::String(format_float(v))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResultTable {
    pub name: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl ResultTable {
    pub fn new(name: &str, columns: &[&str]) -> Self {
        Self { name: name.into(), columns: columns.iter().map(|c| c.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(row.len(), self.columns.len(), "row width of table {}", self.name);
        self.rows.push(row);
    }

    /// Probability cells must lie in `[0, 1]`, angle cells in `[0, π)`.
    pub fn validate(&self) -> Result<()> {
        for (i, row) in self.rows.iter().enumerate() {
            for (j, cell) in row.iter().enumerate() {
                let bad = match cell {
                    Cell::Prob(p) => !(0.0..=1.0).contains(p),
                    Cell::Angle(a) => !(0.0..PI).contains(a),
                    _ => false,
                };
                if bad {
                    return Err(Error::InvalidInput(format!(
                        "table {} row {i} column {}: {cell:?} out of range",
                        self.name, self.columns[j]
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn to_csv(&self) -> String {
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
        w.write_record(&self.columns).expect("in-memory write");
        for row in &self.rows {
            w.write_record(row.iter().map(Cell::csv)).expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("cells are UTF-8")
    }

    pub fn to_json(&self) -> Value {
        let rows = self.rows.iter().map(|r| Value::Array(r.iter().map(Cell::json).collect())).collect();
        let mut m = Map::new();
        m.insert("columns".into(), Value::Array(self.columns.iter().cloned().map(Value::String).collect()));
        m.insert("rows".into(), Value::Array(rows));
        Value::Object(m)
    }
}

/// Run metadata attached to every JSON output.
#[derive(Debug, Clone, PartialEq)]
pub struct Metadata {
    pub command: String,
    pub seed: u64,
    pub config_hash: String,
    pub tool_version: String,
    pub measure: String,
    pub conventions: Vec<(String, String)>,
}

impl Metadata {
    pub fn to_json(&self) -> Value {
        let mut conv = Map::new();
        for (k, v) in &self.conventions {
            conv.insert(k.clone(), Value::String(v.clone()));
        }
        let mut m = Map::new();
        m.insert("command".into(), Value::String(self.command.clone()));
        m.insert("seed".into(), Value::from(self.seed));
        m.insert("config_hash".into(), Value::String(self.config_hash.clone()));
        m.insert("tool_version".into(), Value::String(self.tool_version.clone()));
        m.insert("measure".into(), Value::String(self.measure.clone()));
        m.insert("conventions".into(), Value::Object(conv));
        Value::Object(m)
    }
}

/// `{metadata, tables, error}`; `error` is null on success.
pub fn document(meta: &Metadata, tables: &[ResultTable], error: Option<&Error>) -> String {
    let mut t = Map::new();
    for table in tables {
        t.insert(table.name.clone(), table.to_json());
    }
    let mut m = Map::new();
    m.insert("metadata".into(), meta.to_json());
    m.insert("tables".into(), Value::Object(t));
    m.insert("error".into(), error.map_or(Value::Null, error_json));
    let mut s = serde_json::to_string_pretty(&Value::Object(m)).expect("JSON values serialize");
    s.push('\n');
    s
}

pub fn error_json(e: &Error) -> Value {
    let mut m = Map::new();
    m.insert("kind".into(), Value::String(e.kind().into()));
    m.insert("message".into(), Value::String(e.to_string()));
    m.insert("exit_status".into(), Value::from(exit_status(e)));
    Value::Object(m)
}

/// `2` for validation failures, `3` for numerical failures.
pub fn exit_status(e: &Error) -> i32 {
    match e {
        Error::InvalidInput(_) | Error::Io { .. } | Error::EmptyA { .. } | Error::AngleOutOfRange { .. } => 2,
        Error::BindingPoint { .. }
        | Error::QuadratureDivergence { .. }
        | Error::NoEnclosingCone { .. }
        | Error::ZeroVector { .. }
        | Error::FieldDegenerate { .. }
        | Error::NonIntegrableTau { .. }
        | Error::StuckAtBinding { .. } => 3,
    }
}

/// Writes through a sibling temporary file and renames it into place.
pub fn write_atomic(path: &Path, contents: &str) -> Result<()> {
    let io = |e: std::io::Error| Error::Io { path: path.display().to_string(), message: e.to_string() };
    let tmp: PathBuf = {
        let mut name = path.file_name().map(|n| n.to_os_string()).unwrap_or_default();
        name.push(".tmp");
        path.with_file_name(name)
    };
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(io)?;
    }
    fs::write(&tmp, contents).map_err(io)?;
    fs::rename(&tmp, path).map_err(io)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table() -> ResultTable {
        let mut t = ResultTable::new("demo", &["name", "p", "angle", "x", "k", "flag", "gap"]);
        t.push(vec![
            Cell::text("a,b"),
            Cell::Prob(0.25),
            Cell::Angle(1.0),
            Cell::Float(-1.0 / 3.0),
            Cell::Int(7),
            Cell::Bool(true),
            Cell::Missing,
        ]);
        t
    }

    #[test]
    fn csv_dialect() {
        let csv = table().to_csv();
        assert_eq!(
            csv,
            "name,p,angle,x,k,flag,gap\n\"a,b\",2.5000000000000000e-1,1.0000000000000000e0,-3.3333333333333331e-1,7,true,\n"
        );
    }

    #[test]
    fn floats_round_trip_through_text() {
        for v in [0.1, 1.0 / 3.0, 1e-300, -2.5e17, std::f64::consts::PI] {
            assert_eq!(format_float(v).parse::<f64>().unwrap(), v);
        }
    }

    #[test]
    fn json_keeps_seventeen_digits() {
        let j = serde_json::to_string(&table().to_json()).unwrap();
        assert!(j.contains("-3.3333333333333331e-1"), "{j}");
        assert!(j.contains("null"));
    }

    #[test]
    fn range_checks() {
        assert!(table().validate().is_ok());
        let mut t = ResultTable::new("bad", &["p"]);
        t.push(vec![Cell::Prob(1.5)]);
        assert!(t.validate().is_err());
        let mut t = ResultTable::new("bad", &["a"]);
        t.push(vec![Cell::Angle(PI)]);
        assert!(t.validate().is_err());
        let mut t = ResultTable::new("ok", &["a"]);
        t.push(vec![Cell::Angle(0.0)]);
        assert!(t.validate().is_ok());
    }

    #[test]
    fn every_error_has_one_status() {
        let errors = [
            Error::BindingPoint { modulus: 0.0 },
            Error::QuadratureDivergence { node: "x".into() },
            Error::NoEnclosingCone { half_angle: 2.0 },
            Error::ZeroVector { norm: 0.0 },
            Error::AngleOutOfRange { theta: 4.0 },
            Error::EmptyA { radius: 0.0 },
            Error::FieldDegenerate { modulus: 0.1, reason: "r".into() },
            Error::NonIntegrableTau { tau: 1.0, cap: 0.5, re: 0.0, im: 0.0 },
            Error::StuckAtBinding { modulus: 0.0, steps: 1 },
            Error::InvalidInput("x".into()),
            Error::Io { path: "p".into(), message: "m".into() },
        ];
        for e in &errors {
            let s = exit_status(e);
            assert!(s == 2 || s == 3);
            assert_eq!(error_json(e)["kind"], e.kind());
        }
    }

    #[test]
    fn atomic_write_replaces_contents() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("sub").join("out.csv");
        write_atomic(&p, "one").unwrap();
        write_atomic(&p, "two").unwrap();
        assert_eq!(fs::read_to_string(&p).unwrap(), "two");
        assert!(!dir.path().join("sub").join("out.csv.tmp").exists());
    }
}
