//! Deterministic number formatting for JSON and CSV output.

use serde_json::Value;
use sphereum::Estimate;

/// Rounds to 12 significant digits.
pub fn round12(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    format!("{x:.11e}").parse().expect("formatted float parses")
}

/// JSON number rounded to 12 significant digits; `null` when not finite.
pub fn num(x: f64) -> Value {
    serde_json::Number::from_f64(round12(x)).map_or(Value::Null, Value::Number)
}

pub fn estimate(e: Estimate<f64>) -> Value {
    match e {
        Estimate::Finite(x) => num(x),
        Estimate::Divergent => Value::String("divergent".into()),
    }
}

pub fn matrix(m: &[Vec<f64>]) -> Value {
    Value::Array(
        m.iter()
            .map(|row| Value::Array(row.iter().map(|&x| num(x)).collect()))
            .collect(),
    )
}

pub fn vector(v: &[f64]) -> Value {
    Value::Array(v.iter().map(|&x| num(x)).collect())
}

/// CSV field for a float: shortest representation after rounding, in
/// exponent form for very small or large magnitudes.
pub fn csv(x: f64) -> String {
    let r = round12(x);
    let a = r.abs();
    if r != 0.0 && a.is_finite() && !(1e-4..1e15).contains(&a) {
        format!("{r:e}")
    } else {
        format!("{r}")
    }
}
