//! JSON problem files and matrix serialization.
//!
//! Matrices are `{"rows": n, "cols": m, "data": [[re, im], ...]}` with `data`
//! in row-major order. Floats are written in shortest round-trip form, so a
//! serialized matrix reads back bit for bit.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{c64, ComplexMatrix};
use crate::spectral::Rect;
use crate::tolerances::Tolerances;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatrixJson {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<[f64; 2]>,
}

impl MatrixJson {
    pub fn to_matrix(&self) -> Result<ComplexMatrix> {
        let expected = self.rows.checked_mul(self.cols).ok_or_else(|| {
            Error::InvalidInput(format!("matrix dimensions {}x{} overflow", self.rows, self.cols))
        })?;
        if self.data.len() != expected {
            return Err(Error::InvalidInput(format!(
                "matrix declared {}x{} but has {} entries",
                self.rows,
                self.cols,
                self.data.len()
            )));
        }
        if let Some(bad) = self.data.iter().position(|[re, im]| !re.is_finite() || !im.is_finite()) {
            return Err(Error::InvalidInput(format!("non-finite entry at index {bad}")));
        }
        Ok(ComplexMatrix::from_row_iterator(
            self.rows,
            self.cols,
            self.data.iter().map(|&[re, im]| c64(re, im)),
        ))
    }
}

impl From<&ComplexMatrix> for MatrixJson {
    fn from(m: &ComplexMatrix) -> Self {
        let data = (0..m.nrows())
            .flat_map(|i| (0..m.ncols()).map(move |j| (i, j)))
            .map(|(i, j)| [m[(i, j)].re, m[(i, j)].im])
            .collect();
        Self {
            rows: m.nrows(),
            cols: m.ncols(),
            data,
        }
    }
}

/// Serializes a matrix in the problem-file layout.
pub fn serialize_matrix<S: serde::Serializer>(m: &ComplexMatrix, s: S) -> std::result::Result<S::Ok, S::Error> {
    MatrixJson::from(m).serialize(s)
}

/// An input file. Each command reads the matrices it needs.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemFile {
    #[serde(rename = "A", default, skip_serializing_if = "Option::is_none")]
    pub a: Option<MatrixJson>,
    #[serde(rename = "B", default, skip_serializing_if = "Option::is_none")]
    pub b: Option<MatrixJson>,
    #[serde(rename = "C", default, skip_serializing_if = "Option::is_none")]
    pub c: Option<MatrixJson>,
    #[serde(rename = "D", default, skip_serializing_if = "Option::is_none")]
    pub d: Option<MatrixJson>,
    #[serde(rename = "Y", default, skip_serializing_if = "Option::is_none")]
    pub y: Option<MatrixJson>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tolerances: Option<Tolerances>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rect: Option<Rect>,
    /// Seed of the generator that produced the file, echoed in reports.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

impl ProblemFile {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::InvalidInput(format!("malformed problem file: {e}")))
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::InvalidInput(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        to_pretty_json(self)
    }

    pub fn with_matrix(mut self, name: char, m: &ComplexMatrix) -> Self {
        let slot = match name {
            'A' => &mut self.a,
            'B' => &mut self.b,
            'C' => &mut self.c,
            'D' => &mut self.d,
            'Y' => &mut self.y,
            _ => panic!("unknown matrix slot {name}"),
        };
        *slot = Some(MatrixJson::from(m));
        self
    }

    pub fn tolerances(&self) -> Result<Tolerances> {
        let tol = self.tolerances.unwrap_or_default();
        tol.validate()?;
        Ok(tol)
    }

    pub fn rect(&self) -> Result<Rect> {
        let r = self
            .rect
            .ok_or_else(|| Error::InvalidInput("problem file has no \"rect\"".into()))?;
        r.validate()?;
        Ok(r)
    }

    /// The named matrix, or `InvalidInput` when absent.
    pub fn require(&self, name: char) -> Result<ComplexMatrix> {
        let slot = match name {
            'A' => &self.a,
            'B' => &self.b,
            'C' => &self.c,
            'D' => &self.d,
            'Y' => &self.y,
            _ => return Err(Error::InvalidInput(format!("unknown matrix {name}"))),
        };
        slot.as_ref()
            .ok_or_else(|| Error::InvalidInput(format!("problem file has no \"{name}\"")))?
            .to_matrix()
    }
}

/// Indented JSON with arrays of scalars kept on one line, so matrix entries
/// read as `[re, im]`.
pub fn to_pretty_json<T: Serialize>(value: &T) -> String {
    let value = serde_json::to_value(value).expect("value serializes to JSON");
    let mut out = String::new();
    write_value(&mut out, &value, 0);
    out
}

fn write_value(out: &mut String, v: &serde_json::Value, depth: usize) {
    use serde_json::Value;
    let pad = |out: &mut String, d: usize| out.extend(std::iter::repeat_n("  ", d));
    match v {
        Value::Array(items) if items.iter().all(|x| !x.is_array() && !x.is_object()) => {
            out.push('[');
            for (i, x) in items.iter().enumerate() {
                if i > 0 {
                    out.push_str(", ");
                }
                out.push_str(&x.to_string());
            }
            out.push(']');
        }
        Value::Array(items) => {
            out.push_str("[\n");
            for (i, x) in items.iter().enumerate() {
                pad(out, depth + 1);
                write_value(out, x, depth + 1);
                out.push_str(if i + 1 < items.len() { ",\n" } else { "\n" });
            }
            pad(out, depth);
            out.push(']');
        }
        Value::Object(map) if map.is_empty() => out.push_str("{}"),
        Value::Object(map) => {
            out.push_str("{\n");
            for (i, (k, x)) in map.iter().enumerate() {
                pad(out, depth + 1);
                out.push_str(&Value::String(k.clone()).to_string());
                out.push_str(": ");
                write_value(out, x, depth + 1);
                out.push_str(if i + 1 < map.len() { ",\n" } else { "\n" });
            }
            pad(out, depth);
            out.push('}');
        }
        scalar => out.push_str(&scalar.to_string()),
    }
}
