//! Canonical JSON text: sorted keys, two-space indentation, reals with 17
//! significant digits, so equal documents give byte-identical files.

use std::fmt::Write;

use serde_json::{Map, Number, Value};

use crate::error::{Error, Result};
use crate::linalg::matrix::{ComplexMatrix, C64};

pub const SCHEMA_VERSION: &str = "1";

/// Renders a real so that parsing it back yields the same bits.
pub fn format_real(x: f64) -> String {
    if x == 0.0 {
        // keep the sign of negative zero out of certificates
        return "0.0000000000000000e0".into();
    }
    format!("{x:.16e}")
}

fn write_value(out: &mut String, v: &Value, indent: usize) {
    match v {
        Value::Null => out.push_str("null"),
        Value::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
        Value::Number(n) => {
            if n.is_f64() {
                match n.as_f64() {
                    Some(x) if x.is_finite() => out.push_str(&format_real(x)),
                    _ => out.push_str("null"),
                }
            } else {
                let _ = write!(out, "{n}");
            }
        }
        Value::String(s) => out.push_str(&serde_json::to_string(s).expect("strings serialize")),
        Value::Array(items) => {
            if items.is_empty() {
                out.push_str("[]");
                return;
            }
            // arrays of scalars stay on one line
            if items.iter().all(|x| !x.is_array() && !x.is_object()) {
                out.push('[');
                for (i, x) in items.iter().enumerate() {
                    if i > 0 {
                        out.push_str(", ");
                    }
                    write_value(out, x, indent);
                }
                out.push(']');
                return;
            }
            out.push_str("[\n");
            for (i, x) in items.iter().enumerate() {
                push_indent(out, indent + 1);
                write_value(out, x, indent + 1);
                out.push_str(if i + 1 < items.len() { ",\n" } else { "\n" });
            }
            push_indent(out, indent);
            out.push(']');
        }
        Value::Object(map) => {
            if map.is_empty() {
                out.push_str("{}");
                return;
            }
            let mut keys: Vec<&String> = map.keys().collect();
            keys.sort();
            out.push_str("{\n");
            for (i, k) in keys.iter().enumerate() {
                push_indent(out, indent + 1);
                out.push_str(&serde_json::to_string(k).expect("strings serialize"));
                out.push_str(": ");
                write_value(out, &map[*k], indent + 1);
                out.push_str(if i + 1 < keys.len() { ",\n" } else { "\n" });
            }
            push_indent(out, indent);
            out.push('}');
        }
    }
}

fn push_indent(out: &mut String, level: usize) {
    for _ in 0..level {
        out.push_str("  ");
    }
}

pub fn to_canonical_string(v: &Value) -> String {
    let mut out = String::new();
    write_value(&mut out, v, 0);
    out.push('\n');
    out
}

pub fn real(x: f64) -> Value {
    Number::from_f64(x).map(Value::Number).unwrap_or(Value::Null)
}

pub fn complex(z: C64) -> Value {
    Value::Array(vec![real(z.re), real(z.im)])
}

/// Row-major nested arrays of `[re, im]` pairs.
pub fn matrix(m: &ComplexMatrix) -> Value {
    Value::Array((0..m.rows()).map(|i| Value::Array((0..m.cols()).map(|j| complex(m[(i, j)])).collect())).collect())
}

pub fn vector(v: &[C64]) -> Value {
    Value::Array(v.iter().map(|z| complex(*z)).collect())
}

pub fn parse_complex(pair: &[f64; 2]) -> C64 {
    C64::new(pair[0], pair[1])
}

pub fn parse_matrix(rows: &[Vec<[f64; 2]>]) -> Result<ComplexMatrix> {
    let parsed: Vec<Vec<C64>> = rows.iter().map(|r| r.iter().map(parse_complex).collect()).collect();
    ComplexMatrix::from_rows(parsed)
}

/// Builder for objects; keys are sorted on output anyway.
#[derive(Default)]
pub struct Object(Map<String, Value>);

impl Object {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with(mut self, key: &str, v: impl Into<Value>) -> Self {
        self.0.insert(key.into(), v.into());
        self
    }

    pub fn real(self, key: &str, x: f64) -> Self {
        self.with(key, real(x))
    }

    pub fn build(self) -> Value {
        Value::Object(self.0)
    }
}

/// Removes the `timestamp` field at any depth.
pub fn strip_timestamp(v: &mut Value) {
    match v {
        Value::Object(map) => {
            map.remove("timestamp");
            for x in map.values_mut() {
                strip_timestamp(x);
            }
        }
        Value::Array(items) => items.iter_mut().for_each(strip_timestamp),
        _ => {}
    }
}

pub fn parse_document(text: &str, origin: &str) -> Result<Value> {
    serde_json::from_str(text).map_err(|e| Error::invalid(format!("{origin}:{}:{}: {e}", e.line(), e.column())))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reals_round_trip_bitwise() {
        for x in [0.1, 1.0 / 3.0, -2.5e-300, 4.0 - 2.0 * 2f64.sqrt(), f64::MAX, 5e-324] {
            let s = format_real(x);
            assert_eq!(s.parse::<f64>().unwrap().to_bits(), x.to_bits(), "{s}");
        }
        assert_eq!(format_real(-0.0), format_real(0.0));
    }

    #[test]
    fn keys_sorted_and_stable() {
        let v = Object::new().real("b", 1.0).with("a", vec![1, 2]).with("c", Object::new().with("z", true).build()).build();
        let s = to_canonical_string(&v);
        assert!(s.find("\"a\"").unwrap() < s.find("\"b\"").unwrap());
        let again = to_canonical_string(&parse_document(&s, "mem").unwrap());
        assert_eq!(s, again);
    }
}
