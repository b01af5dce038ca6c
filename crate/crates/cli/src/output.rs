//! JSON envelope and deterministic number formatting.

use std::str::FromStr;

use serde_json::{json, Map, Number, Value};
use sinkhorn_core::exact::format_rational;
use sinkhorn_core::{Error, Permutation, PositiveMatrix, RationalMatrix};

/// 17 significant digits: positional for moderate exponents, scientific
/// otherwise. Round-trips every `f64`.
pub fn format_float(v: f64) -> String {
    if !v.is_finite() {
        return v.to_string();
    }
    if v == 0.0 {
        return if v.is_sign_negative() { "-0.0".into() } else { "0.0".into() };
    }
    let sci = format!("{v:.16e}");
    let (mantissa, exp) = sci.split_once('e').expect("scientific format has an exponent");
    let exp: i32 = exp.parse().expect("exponent is an integer");
    if !(-5..17).contains(&exp) {
        return sci;
    }
    let (sign, mantissa) = match mantissa.strip_prefix('-') {
        Some(m) => ("-", m),
        None => ("", mantissa),
    };
    let digits: String = mantissa.chars().filter(char::is_ascii_digit).collect();
    if exp < 0 {
        format!("{sign}0.{}{digits}", "0".repeat((-exp - 1) as usize))
    } else {
        let split = exp as usize + 1;
        let (int, frac) = digits.split_at(split);
        if frac.is_empty() {
            format!("{sign}{int}.0")
        } else {
            format!("{sign}{int}.{frac}")
        }
    }
}

pub fn num(v: f64) -> Value {
    if !v.is_finite() {
        return Value::Null;
    }
    Value::Number(Number::from_str(&format_float(v)).expect("formatted float is a JSON number"))
}

pub fn nums(v: &[f64]) -> Value {
    Value::Array(v.iter().map(|&x| num(x)).collect())
}

pub fn matrix(m: &PositiveMatrix) -> Value {
    Value::Array((0..m.nrows()).map(|i| nums(m.row(i))).collect())
}

pub fn rational_matrix(m: &RationalMatrix) -> Value {
    Value::Array(
        (0..m.nrows())
            .map(|i| Value::Array(m.row(i).iter().map(|v| Value::String(format_rational(v))).collect()))
            .collect(),
    )
}

pub fn permutation(p: &Permutation) -> Value {
    json!(p.as_slice())
}

#[derive(Default)]
pub struct Diagnostics {
    pub iterations: Option<usize>,
    pub residual: Option<f64>,
    pub warnings: Vec<String>,
}

pub struct Envelope {
    pub command: &'static str,
    pub inputs: Value,
    pub result: Value,
    pub provenance: &'static str,
    pub diagnostics: Diagnostics,
}

impl Envelope {
    pub fn to_value(&self) -> Value {
        let mut diag = Map::new();
        diag.insert("iterations".into(), self.diagnostics.iterations.map_or(Value::Null, |i| json!(i)));
        diag.insert("residual".into(), self.diagnostics.residual.map_or(Value::Null, num));
        diag.insert("warnings".into(), json!(self.diagnostics.warnings));
        let mut out = Map::new();
        out.insert("command".into(), json!(self.command));
        out.insert("inputs".into(), self.inputs.clone());
        out.insert("result".into(), self.result.clone());
        out.insert("provenance".into(), json!(self.provenance));
        out.insert("diagnostics".into(), Value::Object(diag));
        Value::Object(out)
    }
}

pub fn render(value: &Value, pretty: bool) -> String {
    if pretty {
        serde_json::to_string_pretty(value).expect("values serialize")
    } else {
        serde_json::to_string(value).expect("values serialize")
    }
}

/// Short machine-readable category for an error.
pub fn error_kind(e: &Error) -> &'static str {
    match e {
        Error::Parse(_)
        | Error::NonPositiveEntry { .. }
        | Error::Empty
        | Error::Ragged { .. }
        | Error::NotSquare { .. }
        | Error::DimensionMismatch { .. }
        | Error::NotSymmetric { .. }
        | Error::InvalidParameter(_)
        | Error::TargetSumMismatch { .. }
        | Error::NotTwoValue => "input",
        Error::ResourceLimit { .. } => "resource_limit",
        Error::NotConverged { .. } => "not_converged",
        _ => "numeric",
    }
}

pub fn exit_code(e: &Error) -> u8 {
    match error_kind(e) {
        "input" => 1,
        "resource_limit" => 3,
        _ => 2,
    }
}

pub fn error_value(command: &str, kind: &str, message: &str) -> Value {
    let mut err = Map::new();
    err.insert("kind".into(), json!(kind));
    err.insert("message".into(), json!(message));
    let mut out = Map::new();
    out.insert("command".into(), json!(command));
    out.insert("error".into(), Value::Object(err));
    Value::Object(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_have_17_significant_digits() {
        assert_eq!(format_float(0.5), "0.50000000000000000");
        assert_eq!(format_float(12.0), "12.000000000000000");
        assert_eq!(format_float(1.0 / 3.0), "0.33333333333333331");
        assert_eq!(format_float(-2.5e-3), "-0.0025000000000000001");
        assert_eq!(format_float(1e-7), "9.9999999999999995e-8");
        assert_eq!(format_float(1e20), "1.0000000000000000e20");
        assert_eq!(format_float(0.0), "0.0");
        for v in [0.1, 1.0 / 7.0, 123456.789, 3e-300, f64::MAX, 1e16, 9.87654321e16] {
            assert_eq!(format_float(v).parse::<f64>().unwrap(), v);
        }
    }

    #[test]
    fn envelope_key_order() {
        let env = Envelope {
            command: "x",
            inputs: json!({}),
            result: json!({"b": 1, "a": 2}),
            provenance: "iterated",
            diagnostics: Diagnostics::default(),
        };
        let text = render(&env.to_value(), false);
        assert_eq!(
            text,
            r#"{"command":"x","inputs":{},"result":{"b":1,"a":2},"provenance":"iterated","diagnostics":{"iterations":null,"residual":null,"warnings":[]}}"#
        );
    }
}
