//! Fixed 12-significant-digit number formatting for reports and CSV.

use serde_json::Value;

/// Rounds to 12 significant digits. Non-finite values and zero pass through
/// (negative zero becomes zero).
pub fn round12(v: f64) -> f64 {
    if !v.is_finite() {
        return v;
    }
    if v == 0.0 {
        return 0.0;
    }
    format!("{v:.11e}").parse().expect("formatted float parses")
}

pub fn sig12(v: f64) -> String {
    round12(v).to_string()
}

/// Rounds every number in a JSON tree to 12 significant digits.
pub fn round_json(v: &mut Value) {
    match v {
        Value::Number(n) => {
            if let Some(f) = n.as_f64().filter(|_| !n.is_i64() && !n.is_u64()) {
                if let Some(r) = serde_json::Number::from_f64(round12(f)) {
                    *n = r;
                }
            }
        }
        Value::Array(items) => items.iter_mut().for_each(round_json),
        Value::Object(map) => map.values_mut().for_each(round_json),
        _ => {}
    }
}
