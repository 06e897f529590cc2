//! JSON report building blocks.

use serde_json::{json, Map, Value};
use sha2::{Digest, Sha256};

use crate::linalg::{CMatrix, C64};

pub const SCHEMA_VERSION: u32 = 1;

pub fn complex(z: C64) -> Value {
    json!([z.re, z.im])
}

pub fn complex_list(zs: &[C64]) -> Value {
    Value::Array(zs.iter().map(|&z| complex(z)).collect())
}

/// `{"re": rows, "im": rows}`, row-major.
pub fn matrix(m: &CMatrix) -> Value {
    let rows = |f: fn(&C64) -> f64| -> Value {
        Value::Array(
            (0..m.nrows())
                .map(|i| Value::Array((0..m.ncols()).map(|j| json!(f(&m[(i, j)]))).collect()))
                .collect(),
        )
    };
    json!({ "re": rows(|z| z.re), "im": rows(|z| z.im) })
}

/// A measured value with the bound it is checked against.
pub fn at_most(value: f64, tolerance: f64) -> Value {
    json!({ "value": value, "tolerance": tolerance, "pass": value <= tolerance })
}

/// A measured value that must exceed a bound.
pub fn at_least(value: f64, bound: f64) -> Value {
    json!({ "value": value, "tolerance": bound, "relation": ">", "pass": value > bound })
}

/// An exact comparison of integers or labels.
pub fn equals<T: serde::Serialize + PartialEq>(value: T, expected: T) -> Value {
    let pass = value == expected;
    json!({ "value": value, "tolerance": expected, "relation": "==", "pass": pass })
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    let digest = Sha256::digest(bytes);
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

/// Report header shared by all commands.
pub fn header(command: &str, input_digest: &str, seed: Option<u64>) -> Map<String, Value> {
    let mut m = Map::new();
    m.insert("schema_version".into(), json!(SCHEMA_VERSION));
    m.insert(
        "tool".into(),
        json!({ "name": env!("CARGO_PKG_NAME"), "version": env!("CARGO_PKG_VERSION") }),
    );
    m.insert("command".into(), json!(command));
    m.insert("input_digest".into(), json!(format!("sha256:{input_digest}")));
    m.insert("seed".into(), json!(seed));
    m
}

/// Collects every `pass` flag in a report tree.
pub fn all_pass(v: &Value) -> bool {
    match v {
        Value::Object(m) => m.get("pass").and_then(Value::as_bool).unwrap_or(true) && m.values().all(all_pass),
        Value::Array(a) => a.iter().all(all_pass),
        _ => true,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn digest_of_empty_input() {
        assert_eq!(
            sha256_hex(b""),
            "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855"
        );
    }

    #[test]
    fn pass_flags_propagate() {
        let v = json!({ "a": at_most(1.0, 2.0), "b": [at_most(3.0, 2.0)] });
        assert!(!all_pass(&v));
        assert!(all_pass(&json!({ "a": at_least(1.0, 0.5) })));
    }

    #[test]
    fn matrix_layout() {
        let m = CMatrix::from_row_slice(1, 2, &[C64::new(1.0, 2.0), C64::new(3.0, 4.0)]);
        assert_eq!(matrix(&m), json!({ "re": [[1.0, 3.0]], "im": [[2.0, 4.0]] }));
    }
}
