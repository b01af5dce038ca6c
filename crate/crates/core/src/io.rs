//! Matrix literals in JSON and CSV.
//!
//! JSON is either `{"n": 3, "rows": [[...], ...]}` or a bare array of rows.
//! Entries may be numbers or strings; strings may hold `"p/q"` rationals.
//! CSV is one row per line, comma separated. Entry text is kept verbatim so
//! it can be read either as floats or as exact rationals.

use std::path::Path;

use serde_json::Value;

use crate::error::{Error, Result};
use crate::exact::{parse_rational, to_f64, RationalMatrix};
use crate::matrix::PositiveMatrix;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MatrixLiteral {
    rows: Vec<Vec<String>>,
}

impl MatrixLiteral {
    pub fn rows(&self) -> &[Vec<String>] {
        &self.rows
    }

    pub fn parse_json(text: &str) -> Result<Self> {
        let value: Value = serde_json::from_str(text).map_err(|e| Error::Parse(format!("invalid JSON: {e}")))?;
        let (declared, rows) = match &value {
            Value::Array(rows) => (None, rows),
            Value::Object(obj) => {
                let rows = obj
                    .get("rows")
                    .and_then(Value::as_array)
                    .ok_or_else(|| Error::Parse("matrix object needs a \"rows\" array".into()))?;
                let n = match obj.get("n") {
                    None => None,
                    Some(n) => Some(n.as_u64().ok_or_else(|| Error::Parse("\"n\" must be a positive integer".into()))?),
                };
                (n, rows)
            }
            _ => return Err(Error::Parse("matrix must be an array of rows or an object".into())),
        };
        let rows = rows
            .iter()
            .enumerate()
            .map(|(i, row)| {
                let row = row.as_array().ok_or_else(|| Error::Parse(format!("row {} is not an array", i + 1)))?;
                row.iter()
                    .map(|v| match v {
                        Value::Number(n) => Ok(n.to_string()),
                        Value::String(s) => Ok(s.trim().to_string()),
                        other => Err(Error::Parse(format!("entry {other} is not a number"))),
                    })
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        if let Some(n) = declared {
            let n = n as usize;
            if rows.len() != n || rows.iter().any(|r| r.len() != n) {
                return Err(Error::Parse(format!("rows do not form the declared {n}×{n} matrix")));
            }
        }
        Self::checked(rows)
    }

    pub fn parse_csv(text: &str) -> Result<Self> {
        let rows = text
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty())
            .map(|l| l.split(',').map(|v| v.trim().to_string()).collect())
            .collect();
        Self::checked(rows)
    }

    /// Reads a file, choosing CSV for a `.csv` extension and JSON otherwise.
    pub fn load(path: &Path) -> Result<Self> {
        let text =
            std::fs::read_to_string(path).map_err(|e| Error::Parse(format!("cannot read {}: {e}", path.display())))?;
        let is_csv = path.extension().is_some_and(|e| e.eq_ignore_ascii_case("csv"));
        if is_csv {
            Self::parse_csv(&text)
        } else {
            Self::parse_json(&text)
        }
    }

    fn checked(rows: Vec<Vec<String>>) -> Result<Self> {
        if rows.is_empty() || rows[0].is_empty() {
            return Err(Error::Empty);
        }
        let expected = rows[0].len();
        if let Some((i, r)) = rows.iter().enumerate().find(|(_, r)| r.len() != expected) {
            return Err(Error::Ragged { row: i + 1, expected, found: r.len() });
        }
        Ok(Self { rows })
    }

    pub fn to_float(&self) -> Result<PositiveMatrix> {
        let rows = self
            .rows
            .iter()
            .map(|r| r.iter().map(|v| parse_float(v)).collect::<Result<Vec<_>>>())
            .collect::<Result<Vec<_>>>()?;
        PositiveMatrix::from_rows(rows)
    }

    pub fn to_rational(&self) -> Result<RationalMatrix> {
        let rows = self
            .rows
            .iter()
            .map(|r| r.iter().map(|v| parse_rational(v)).collect::<Result<Vec<_>>>())
            .collect::<Result<Vec<_>>>()?;
        RationalMatrix::from_rows(rows)
    }
}

/// A decimal literal, or a `"p/q"` rational rounded to the nearest float.
pub fn parse_float(text: &str) -> Result<f64> {
    if text.contains('/') {
        return parse_rational(text).map(|r| to_f64(&r));
    }
    text.trim().parse::<f64>().map_err(|_| Error::Parse(format!("'{text}' is not a number")))
}
