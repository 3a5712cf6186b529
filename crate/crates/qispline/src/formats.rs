//! CSV tables, the operator JSON record and the audit stream.

use std::fmt;
use std::io::{self, Write};

use qispline_core::QuasiInterpolant;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Int(i64),
    Float(f64),
    Text(String),
    Bool(bool),
    Empty,
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<u64> for Cell {
    fn from(v: u64) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Float(v)
    }
}

impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::Bool(v)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}

impl<T: Into<Cell>> From<Option<T>> for Cell {
    fn from(v: Option<T>) -> Self {
        v.map_or(Cell::Empty, Into::into)
    }
}

impl fmt::Display for Cell {
    // f64 Debug is the shortest round-trip string, with exponents for extremes
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Cell::Int(v) => write!(f, "{v}"),
            Cell::Float(v) => write!(f, "{v:?}"),
            Cell::Text(s) if s.contains([',', '"', '\n']) => {
                write!(f, "\"{}\"", s.replace('"', "\"\""))
            }
            Cell::Text(s) => f.write_str(s),
            Cell::Bool(v) => write!(f, "{v}"),
            Cell::Empty => Ok(()),
        }
    }
}

impl Cell {
    fn to_json(&self) -> Value {
        match self {
            Cell::Int(v) => Value::from(*v),
            Cell::Float(v) => serde_json::Number::from_f64(*v).map_or(Value::Null, Value::Number),
            Cell::Text(s) => Value::from(s.as_str()),
            Cell::Bool(v) => Value::from(*v),
            Cell::Empty => Value::Null,
        }
    }
}

/// Rows of named columns, written as CSV or as a JSON array of objects.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Table {
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(row.len(), self.columns.len(), "row width");
        self.rows.push(row);
    }

    pub fn write_csv(&self, w: &mut dyn Write) -> io::Result<()> {
        writeln!(w, "{}", self.columns.join(","))?;
        for row in &self.rows {
            let line: Vec<String> = row.iter().map(Cell::to_string).collect();
            writeln!(w, "{}", line.join(","))?;
        }
        Ok(())
    }

    pub fn to_json(&self) -> Value {
        Value::Array(
            self.rows
                .iter()
                .map(|row| {
                    let obj: Map<String, Value> = self
                        .columns
                        .iter()
                        .cloned()
                        .zip(row.iter().map(Cell::to_json))
                        .collect();
                    Value::Object(obj)
                })
                .collect(),
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StencilRecord {
    pub index: usize,
    pub offsets: Vec<isize>,
    pub weights: Vec<f64>,
}

/// Serialized operator: kind, degree, half-width, exactness and the
/// per-index stencils.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OperatorRecord {
    pub kind: String,
    pub m: usize,
    pub p: Option<usize>,
    pub q: usize,
    pub stencils: Vec<StencilRecord>,
}

impl OperatorRecord {
    pub fn from_qi(qi: &QuasiInterpolant, p: Option<usize>) -> Self {
        OperatorRecord {
            kind: qi.kind().name().to_string(),
            m: qi.space().degree(),
            p,
            q: qi.exactness(),
            stencils: qi
                .stencils()
                .iter()
                .map(|st| StencilRecord {
                    index: st.center,
                    offsets: st.offsets.clone(),
                    weights: st.weights.clone(),
                })
                .collect(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("finite weights")
    }

    pub fn from_json(text: &str) -> serde_json::Result<Self> {
        serde_json::from_str(text)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CertificateStatus {
    Pass,
    Fail,
    /// Window clamped at the boundary or `p = 1`; no certificate exists.
    Na,
}

/// One line of the near-best audit stream.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "record", rename_all = "lowercase")]
pub enum AuditRecord {
    Index {
        m: usize,
        p: usize,
        q: usize,
        family: String,
        seed: u64,
        n: usize,
        i: usize,
        lo: usize,
        hi: usize,
        interior: bool,
        lp_norm: f64,
        three_point_norm: Option<f64>,
        gap: Option<f64>,
        knot_condition: Option<bool>,
        certificate: CertificateStatus,
        iterations: usize,
        residual: f64,
    },
    Summary {
        m: usize,
        p: usize,
        q: usize,
        family: String,
        seed: u64,
        n: usize,
        nu1_star: Option<f64>,
        nu1_all: f64,
        passes: usize,
        failures: usize,
    },
}

pub fn write_jsonl(records: &[AuditRecord], w: &mut dyn Write) -> io::Result<()> {
    for r in records {
        serde_json::to_writer(&mut *w, r)?;
        writeln!(w)?;
    }
    Ok(())
}
