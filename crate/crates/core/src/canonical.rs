//! Canonical JSON: object keys sorted, floats rounded to six significant
//! digits. Used for fingerprints and for byte-stable result files.

use serde::Serialize;
use serde_json::Value;
use sha2::{Digest, Sha256};

/// Rounds to six significant digits.
pub fn round6(x: f64) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return x;
    }
    format!("{x:.5e}").parse().unwrap_or(x)
}

/// Canonical text of a float: six significant digits, plain notation
/// within `[1e-4, 1e15)`.
pub fn number(x: f64) -> String {
    let x = round6(x);
    let a = x.abs();
    if x == 0.0 {
        "0".to_string()
    } else if !x.is_finite() {
        "null".to_string()
    } else if (1e-4..1e15).contains(&a) {
        x.to_string()
    } else {
        format!("{x:e}")
    }
}

fn write_number(out: &mut String, n: &serde_json::Number) {
    if let Some(i) = n.as_i64() {
        out.push_str(&i.to_string());
    } else if let Some(u) = n.as_u64() {
        out.push_str(&u.to_string());
    } else {
        out.push_str(&number(n.as_f64().unwrap_or(f64::NAN)));
    }
}

fn write_value(out: &mut String, v: &Value) {
    match v {
        Value::Null => out.push_str("null"),
        Value::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
        Value::Number(n) => write_number(out, n),
        Value::String(s) => out.push_str(&Value::String(s.clone()).to_string()),
        Value::Array(items) => {
            out.push('[');
            for (i, item) in items.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                write_value(out, item);
            }
            out.push(']');
        }
        Value::Object(map) => {
            let mut keys: Vec<&String> = map.keys().collect();
            keys.sort();
            out.push('{');
            for (i, k) in keys.into_iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                out.push_str(&Value::String(k.clone()).to_string());
                out.push(':');
                write_value(out, &map[k]);
            }
            out.push('}');
        }
    }
}

/// Canonical text of an already built JSON tree.
pub fn to_string_value(v: &Value) -> String {
    let mut out = String::new();
    write_value(&mut out, v);
    out
}

/// Canonical text of any serializable value. Non-finite floats become null.
pub fn to_string<T: Serialize + ?Sized>(value: &T) -> String {
    let v = serde_json::to_value(value).unwrap_or(Value::Null);
    to_string_value(&v)
}

/// Hex SHA-256 of the canonical text.
pub fn fingerprint<T: Serialize + ?Sized>(value: &T) -> String {
    let digest = Sha256::digest(to_string(value).as_bytes());
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn sorted_keys_and_six_digits() {
        let v = json!({"b": 1.23456789, "a": [1, 2.5, true, null], "c": {"z": 0.0, "y": "q\"x"}});
        assert_eq!(
            to_string_value(&v),
            r#"{"a":[1,2.5,true,null],"b":1.23457,"c":{"y":"q\"x","z":0}}"#
        );
    }

    #[test]
    fn rounding_examples() {
        assert_eq!(round6(4715.1749), 4715.17);
        assert_eq!(round6(-0.000123456789), -0.000123457);
        assert_eq!(round6(0.0), 0.0);
        assert_eq!(to_string(&1.0e-7_f64), "1e-7");
        assert_eq!(to_string(&123456789.0_f64), "123457000");
    }

    #[test]
    fn fingerprint_ignores_key_order_and_noise() {
        let a = json!({"x": 1.0000000001, "y": 2});
        let b = json!({"y": 2, "x": 1.0});
        assert_eq!(fingerprint(&a), fingerprint(&b));
        assert_eq!(fingerprint(&a).len(), 64);
        assert_ne!(fingerprint(&a), fingerprint(&json!({"y": 3, "x": 1.0})));
    }
}
