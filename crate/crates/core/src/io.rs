//! Matrix exchange: Matrix Market array files and a JSON bundle.
//!
//! The bundle is `{"m": 2, "field": "real", "A0": [...], "A1": [...], "A2": [...]}`
//! with each coefficient a row-major array of `m * m` numbers, or of `[re, im]`
//! pairs when `field` is `"complex"`. Nested row arrays are accepted on input.

use std::fs;
use std::path::Path;

use serde_json::{json, Value};

use crate::dense::{c, Matrix};
use crate::poly::{Field, QuadMatrixPolynomial};
use crate::{QmeError, Result, C64};

/// Digits that make `f64 -> text -> f64` lossless.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn write_matrix_market(a: &Matrix, field: Field) -> String {
    let kind = match field {
        Field::Real => "real",
        Field::Complex => "complex",
    };
    let mut out = format!("%%MatrixMarket matrix array {kind} general\n{} {}\n", a.nrows(), a.ncols());
    // Array format is column-major, which is also nalgebra's storage order.
    for x in a.iter() {
        match field {
            Field::Real => out.push_str(&fmt_f64(x.re)),
            Field::Complex => {
                out.push_str(&fmt_f64(x.re));
                out.push(' ');
                out.push_str(&fmt_f64(x.im));
            }
        }
        out.push('\n');
    }
    out
}

pub fn read_matrix_market(text: &str) -> Result<(Matrix, Field)> {
    let mut lines = text.lines();
    let header = lines.next().ok_or_else(|| QmeError::Parse("empty Matrix Market file".into()))?;
    let words: Vec<String> = header.split_whitespace().map(str::to_ascii_lowercase).collect();
    if words.len() != 5 || words[0] != "%%matrixmarket" || words[1] != "matrix" {
        return Err(QmeError::Parse(format!("bad Matrix Market header: {header}")));
    }
    if words[2] != "array" {
        return Err(QmeError::Parse(format!("only the dense array format is supported, got {}", words[2])));
    }
    let field = match words[3].as_str() {
        "real" | "integer" | "double" => Field::Real,
        "complex" => Field::Complex,
        other => return Err(QmeError::Parse(format!("unsupported field {other}"))),
    };
    if words[4] != "general" {
        return Err(QmeError::Parse(format!("unsupported symmetry {}", words[4])));
    }
    let mut tokens = lines
        .filter(|l| !l.trim_start().starts_with('%'))
        .flat_map(str::split_whitespace);
    let mut next_num = |what: &str| -> Result<f64> {
        let t = tokens.next().ok_or_else(|| QmeError::Parse(format!("file ends before {what}")))?;
        t.parse::<f64>().map_err(|_| QmeError::Parse(format!("cannot parse {t:?} as {what}")))
    };
    let rows = next_num("row count")?;
    let cols = next_num("column count")?;
    if rows < 1.0 || cols < 1.0 || rows.fract() != 0.0 || cols.fract() != 0.0 {
        return Err(QmeError::Parse(format!("bad size line {rows} {cols}")));
    }
    let (rows, cols) = (rows as usize, cols as usize);
    let mut data = Vec::with_capacity(rows * cols);
    for _ in 0..rows * cols {
        let re = next_num("matrix entry")?;
        let im = if field == Field::Complex { next_num("imaginary part")? } else { 0.0 };
        data.push(c(re, im));
    }
    if tokens.next().is_some() {
        return Err(QmeError::Parse("trailing data after the last entry".into()));
    }
    Ok((Matrix::from_vec(rows, cols, data), field))
}

pub fn load_matrix_market(path: &Path) -> Result<(Matrix, Field)> {
    read_matrix_market(&fs::read_to_string(path)?).map_err(|e| QmeError::Parse(format!("{}: {e}", path.display())))
}

/// Builds a polynomial from three Matrix Market files; the field is real
/// only when all three are.
pub fn load_polynomial_mtx(a0: &Path, a1: &Path, a2: &Path) -> Result<QuadMatrixPolynomial> {
    let (a0, f0) = load_matrix_market(a0)?;
    let (a1, f1) = load_matrix_market(a1)?;
    let (a2, f2) = load_matrix_market(a2)?;
    let field = if [f0, f1, f2].iter().all(|f| *f == Field::Real) { Field::Real } else { Field::Complex };
    QuadMatrixPolynomial::with_field(a0, a1, a2, field)
}

fn field_name(f: Field) -> &'static str {
    match f {
        Field::Real => "real",
        Field::Complex => "complex",
    }
}

pub fn bundle_to_json(p: &QuadMatrixPolynomial) -> Value {
    let field = if p.is_real() { Field::Real } else { Field::Complex };
    let flat = |a: &Matrix| -> Value {
        let entries = (0..a.nrows()).flat_map(|i| (0..a.ncols()).map(move |j| a[(i, j)]));
        match field {
            Field::Real => entries.map(|x| json!(x.re)).collect(),
            Field::Complex => entries.map(|x| json!([x.re, x.im])).collect(),
        }
    };
    json!({
        "m": p.m(),
        "field": field_name(field),
        "A0": flat(&p.a0),
        "A1": flat(&p.a1),
        "A2": flat(&p.a2),
    })
}

fn scalar(v: &Value, field: Field) -> Result<C64> {
    match (field, v) {
        (Field::Real, Value::Number(n)) => Ok(c(n.as_f64().unwrap_or(f64::NAN), 0.0)),
        (Field::Complex, Value::Array(pair)) if pair.len() == 2 => {
            let part = |x: &Value| x.as_f64().ok_or_else(|| QmeError::Parse(format!("bad complex part {x}")));
            Ok(c(part(&pair[0])?, part(&pair[1])?))
        }
        // A bare number is a complex value with zero imaginary part.
        (Field::Complex, Value::Number(n)) => Ok(c(n.as_f64().unwrap_or(f64::NAN), 0.0)),
        _ => Err(QmeError::Parse(format!("bad {} entry {v}", field_name(field)))),
    }
}

fn coefficient(v: &Value, name: &str, m: usize, field: Field) -> Result<Matrix> {
    let items = v
        .get(name)
        .and_then(Value::as_array)
        .ok_or_else(|| QmeError::Parse(format!("bundle lacks array {name}")))?;
    // m * m items is flat; m row arrays of m scalars is nested.
    let nested = items.len() != m * m && items.iter().all(|r| r.as_array().is_some_and(|r| r.len() == m));
    let flat: Vec<&Value> = if nested {
        items.iter().flat_map(|r| r.as_array().expect("checked").iter()).collect()
    } else {
        items.iter().collect()
    };
    if flat.len() != m * m {
        return Err(QmeError::Parse(format!("{name} has {} entries, expected {}", flat.len(), m * m)));
    }
    let data = flat.into_iter().map(|x| scalar(x, field)).collect::<Result<Vec<_>>>()?;
    Ok(Matrix::from_row_slice(m, m, &data))
}

pub fn bundle_from_json(v: &Value) -> Result<QuadMatrixPolynomial> {
    let m = v
        .get("m")
        .and_then(Value::as_u64)
        .filter(|&m| m >= 1)
        .ok_or_else(|| QmeError::Parse("bundle needs a positive integer m".into()))? as usize;
    let field = match v.get("field").and_then(Value::as_str) {
        Some("real") => Field::Real,
        Some("complex") => Field::Complex,
        other => return Err(QmeError::Parse(format!("bundle field must be \"real\" or \"complex\", got {other:?}"))),
    };
    let a0 = coefficient(v, "A0", m, field)?;
    let a1 = coefficient(v, "A1", m, field)?;
    let a2 = coefficient(v, "A2", m, field)?;
    QuadMatrixPolynomial::with_field(a0, a1, a2, field)
}

pub fn load_bundle(path: &Path) -> Result<QuadMatrixPolynomial> {
    let v: Value = serde_json::from_str(&fs::read_to_string(path)?)?;
    bundle_from_json(&v).map_err(|e| QmeError::Parse(format!("{}: {e}", path.display())))
}
