//! Matrix file format and full-precision JSON output.
//!
//! Matrices are stored as
//! `{"n": 2, "entries": [[{"re": 1.0, "im": 0.0}, ...], ...]}` in row-major
//! order. Every float written by [`to_string`] carries 17 significant digits,
//! so files re-parse to bit-identical values.

use std::io;

use num_complex::Complex64;
use serde::Serialize;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::linalg::ComplexMatrix;

/// Formatter printing every `f64` as `{:.16e}`.
#[derive(Debug, Default, Clone, Copy)]
pub struct FullPrecision;

impl serde_json::ser::Formatter for FullPrecision {
    fn write_f64<W>(&mut self, writer: &mut W, value: f64) -> io::Result<()>
    where
        W: ?Sized + io::Write,
    {
        write!(writer, "{value:.16e}")
    }

    fn write_f32<W>(&mut self, writer: &mut W, value: f32) -> io::Result<()>
    where
        W: ?Sized + io::Write,
    {
        self.write_f64(writer, value as f64)
    }
}

pub fn to_writer<W: io::Write, T: Serialize + ?Sized>(writer: W, value: &T) -> Result<()> {
    let mut ser = serde_json::Serializer::with_formatter(writer, FullPrecision);
    value
        .serialize(&mut ser)
        .map_err(|e| Error::InvalidArgument(format!("serialization failed: {e}")))
}

pub fn to_string<T: Serialize + ?Sized>(value: &T) -> Result<String> {
    let mut buf = Vec::new();
    to_writer(&mut buf, value)?;
    Ok(String::from_utf8(buf).expect("json output is utf-8"))
}

pub fn complex_value(z: Complex64) -> Value {
    json!({ "re": z.re, "im": z.im })
}

/// `serialize_with` helper writing a complex number as `{"re", "im"}`.
pub fn serialize_complex<S: serde::Serializer>(z: &Complex64, s: S) -> std::result::Result<S::Ok, S::Error> {
    use serde::ser::SerializeStruct;
    let mut st = s.serialize_struct("Complex", 2)?;
    st.serialize_field("re", &z.re)?;
    st.serialize_field("im", &z.im)?;
    st.end()
}

#[derive(Serialize)]
struct ComplexRef {
    re: f64,
    im: f64,
}

impl From<Complex64> for ComplexRef {
    fn from(z: Complex64) -> Self {
        Self { re: z.re, im: z.im }
    }
}

pub fn serialize_complex_pair<S: serde::Serializer>(
    pair: &(Complex64, Complex64),
    s: S,
) -> std::result::Result<S::Ok, S::Error> {
    [ComplexRef::from(pair.0), ComplexRef::from(pair.1)].serialize(s)
}

pub fn serialize_complex_vec<S: serde::Serializer>(v: &[Complex64], s: S) -> std::result::Result<S::Ok, S::Error> {
    s.collect_seq(v.iter().map(|&z| ComplexRef::from(z)))
}

pub fn serialize_matrix<S: serde::Serializer>(m: &ComplexMatrix, s: S) -> std::result::Result<S::Ok, S::Error> {
    matrix_value(m).serialize(s)
}

pub fn matrix_value(m: &ComplexMatrix) -> Value {
    let entries: Vec<Value> = m
        .rows()
        .into_iter()
        .map(|row| Value::Array(row.into_iter().map(complex_value).collect()))
        .collect();
    json!({ "n": m.n(), "entries": entries })
}

pub fn matrix_to_string(m: &ComplexMatrix) -> Result<String> {
    to_string(&matrix_value(m))
}

fn entry_error(row: usize, col: usize, what: impl std::fmt::Display) -> Error {
    Error::Parse(format!("entry at row {row}, column {col}: {what}"))
}

fn parse_entry(v: &Value, row: usize, col: usize) -> Result<Complex64> {
    let obj = v
        .as_object()
        .ok_or_else(|| entry_error(row, col, "expected an object {\"re\", \"im\"}"))?;
    if let Some(extra) = obj.keys().find(|k| *k != "re" && *k != "im") {
        return Err(entry_error(row, col, format!("unexpected field `{extra}`")));
    }
    let part = |name: &str| -> Result<f64> {
        let field = obj
            .get(name)
            .ok_or_else(|| entry_error(row, col, format!("missing field `{name}`")))?;
        let x = field
            .as_f64()
            .ok_or_else(|| entry_error(row, col, format!("field `{name}` is not a number")))?;
        Ok(x)
    };
    Ok(Complex64::new(part("re")?, part("im")?))
}

/// Parses the matrix format from an already decoded JSON value.
pub fn matrix_from_value(v: &Value) -> Result<ComplexMatrix> {
    let obj = v
        .as_object()
        .ok_or_else(|| Error::Parse("top level must be an object with `n` and `entries`".into()))?;
    let n = obj
        .get("n")
        .and_then(Value::as_u64)
        .ok_or_else(|| Error::Parse("`n` must be a positive integer".into()))? as usize;
    if n == 0 {
        return Err(Error::Parse("`n` must be a positive integer".into()));
    }
    let rows = obj
        .get("entries")
        .and_then(Value::as_array)
        .ok_or_else(|| Error::Parse("`entries` must be an array of rows".into()))?;
    if rows.len() != n {
        return Err(Error::Parse(format!("expected {n} rows, found {}", rows.len())));
    }
    let mut data = Vec::with_capacity(n * n);
    for (i, row) in rows.iter().enumerate() {
        let cells = row
            .as_array()
            .ok_or_else(|| Error::Parse(format!("row {i}: expected an array")))?;
        if cells.len() != n {
            return Err(Error::Parse(format!(
                "row {i}: expected {n} entries, found {}",
                cells.len()
            )));
        }
        for (j, cell) in cells.iter().enumerate() {
            data.push(parse_entry(cell, i, j)?);
        }
    }
    ComplexMatrix::from_row_major(n, data).map_err(|e| match e {
        Error::NonFinite { row, col } => entry_error(row, col, "value is not finite"),
        other => other,
    })
}

pub fn matrix_from_str(s: &str) -> Result<ComplexMatrix> {
    let v: Value = serde_json::from_str(s).map_err(|e| {
        Error::Parse(format!("invalid JSON at line {}, column {}: {e}", e.line(), e.column()))
    })?;
    matrix_from_value(&v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn parses_documented_format() {
        let m = matrix_from_str(
            r#"{"n": 2, "entries": [[{"re": 1, "im": 0}, {"re": 1, "im": 0}],
                                     [{"re": 0, "im": 0}, {"re": 1, "im": -0.5}]]}"#,
        )
        .unwrap();
        assert_eq!(m[(1, 1)], Complex64::new(1.0, -0.5));
    }

    #[test]
    fn errors_carry_location() {
        let err = matrix_from_str(
            r#"{"n": 2, "entries": [[{"re": 1, "im": 0}, {"re": 1, "im": 0}],
                                     [{"re": 0, "im": 0}, {"re": 1}]]}"#,
        )
        .unwrap_err()
        .to_string();
        assert!(err.contains("row 1, column 1"), "{err}");
        assert!(err.contains("`im`"), "{err}");

        let err = matrix_from_str(r#"{"n": 2, "entries": [[{"re": 1, "im": 0}]]}"#)
            .unwrap_err()
            .to_string();
        assert!(err.contains("expected 2 rows"), "{err}");

        let err = matrix_from_str(r#"{"n": 1, "entries": [["x"]]}"#).unwrap_err().to_string();
        assert!(err.contains("row 0, column 0"), "{err}");

        let err = matrix_from_str("{\"n\": 1,\n \"entries\": [[}").unwrap_err().to_string();
        assert!(err.contains("line 2"), "{err}");
    }

    #[test]
    fn seventeen_significant_digits() {
        let s = to_string(&json!({"x": 1.0 / 3.0, "y": 0.25})).unwrap();
        assert_eq!(s, r#"{"x":3.3333333333333331e-1,"y":2.5000000000000000e-1}"#);
    }

    proptest! {
        #[test]
        fn written_matrices_reparse_bit_identically(
            n in 1usize..5,
            raw in proptest::collection::vec((-1e300f64..1e300, -1e-300f64..1e-300), 16),
        ) {
            let data: Vec<Complex64> = raw.iter().take(n * n).map(|&(a, b)| Complex64::new(a, b)).collect();
            let m = ComplexMatrix::from_row_major(n, data).unwrap();
            let back = matrix_from_str(&matrix_to_string(&m).unwrap()).unwrap();
            for (x, y) in m.as_slice().iter().zip(back.as_slice()) {
                prop_assert_eq!(x.re.to_bits(), y.re.to_bits());
                prop_assert_eq!(x.im.to_bits(), y.im.to_bits());
            }
        }
    }
}
