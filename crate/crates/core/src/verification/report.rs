//! JSON reports `{test, parameters, schedule, values, pass}`.
//!
//! Keys are sorted and every float is rounded to 12 significant digits, so
//! identical runs produce identical bytes.

use serde::Serialize;
use serde_json::{Number, Value};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub test: String,
    pub parameters: Value,
    pub schedule: Value,
    pub values: Value,
    pub pass: bool,
}

impl Report {
    pub fn new(test: impl Into<String>, parameters: Value, schedule: Value, values: Value, pass: bool) -> Self {
        Self { test: test.into(), parameters, schedule, values, pass }
    }

    pub fn to_value(&self) -> Value {
        canonical(serde_json::to_value(self).expect("reports serialize"))
    }
}

/// Rounds to 12 significant digits; non-finite values become `null`.
pub fn round12(x: f64) -> Value {
    if !x.is_finite() {
        return Value::Null;
    }
    let r: f64 = format!("{x:.11e}").parse().expect("formatted float parses");
    Number::from_f64(if r == 0.0 { 0.0 } else { r }).map_or(Value::Null, Value::Number)
}

/// Rounds every float inside `v`. Object keys come out sorted because
/// `serde_json::Map` is ordered.
pub fn canonical(v: Value) -> Value {
    match v {
        Value::Number(n) if n.is_f64() => round12(n.as_f64().expect("f64")),
        Value::Array(a) => Value::Array(a.into_iter().map(canonical).collect()),
        Value::Object(m) => Value::Object(m.into_iter().map(|(k, v)| (k, canonical(v))).collect()),
        other => other,
    }
}

pub fn render(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(&canonical(v.clone())).expect("json renders");
    s.push('\n');
    s
}
