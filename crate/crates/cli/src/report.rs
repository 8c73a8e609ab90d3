//! Report envelope, float normalization and output sinks.

use std::fmt::Write as _;
use std::path::Path;

use serde::Serialize;
use serde_json::{json, Map, Value};

pub const SCHEMA: &str = "qflowsec-report/1";

/// Exit codes: success or certified, violation or mismatch, input error.
pub const EXIT_OK: i32 = 0;
pub const EXIT_VIOLATION: i32 = 1;
pub const EXIT_INPUT: i32 = 2;

pub struct Outcome {
    pub command: &'static str,
    pub inputs: Value,
    pub result: Value,
    pub summary: Vec<String>,
    pub exit: i32,
}

impl Outcome {
    pub fn new(command: &'static str, inputs: Value, result: &impl Serialize, exit: i32) -> Self {
        Self {
            command,
            inputs,
            result: serde_json::to_value(result).expect("reports serialize"),
            summary: Vec::new(),
            exit,
        }
    }

    pub fn line(mut self, s: impl Into<String>) -> Self {
        self.summary.push(s.into());
        self
    }

    pub fn envelope(&self) -> Value {
        json!({
            "schema": SCHEMA,
            "command": self.command,
            "inputs": self.inputs,
            "exit_code": self.exit,
            "result": normalize(&self.result),
        })
    }
}

pub fn error_envelope(command: &str, kind: &str, message: &str) -> Value {
    json!({
        "schema": SCHEMA,
        "command": command,
        "exit_code": EXIT_INPUT,
        "error": { "kind": kind, "message": message },
    })
}

/// Rounds every non-integer number to 12 significant digits.
pub fn normalize(v: &Value) -> Value {
    match v {
        Value::Number(n) if n.is_f64() => {
            let x = n.as_f64().expect("f64 number");
            let r: f64 = format!("{x:.11e}").parse().expect("formatted float parses");
            let r = if r == 0.0 { 0.0 } else { r };
            serde_json::Number::from_f64(r).map_or(Value::Null, Value::Number)
        }
        Value::Array(xs) => Value::Array(xs.iter().map(normalize).collect()),
        Value::Object(m) => Value::Object(m.iter().map(|(k, x)| (k.clone(), normalize(x))).collect::<Map<_, _>>()),
        other => other.clone(),
    }
}

pub fn to_json(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("values serialize");
    s.push('\n');
    s
}

/// One `path,value` row per leaf of the result, keys in sorted order.
pub fn to_csv(v: &Value) -> String {
    fn walk(prefix: &str, v: &Value, out: &mut String) {
        match v {
            Value::Object(m) => {
                for (k, x) in m {
                    walk(&join(prefix, k), x, out);
                }
            }
            Value::Array(xs) => {
                for (i, x) in xs.iter().enumerate() {
                    walk(&join(prefix, &i.to_string()), x, out);
                }
            }
            Value::String(s) => {
                let _ = writeln!(out, "{},\"{}\"", prefix, s.replace('"', "\"\""));
            }
            leaf => {
                let _ = writeln!(out, "{prefix},{leaf}");
            }
        }
    }
    fn join(prefix: &str, k: &str) -> String {
        if prefix.is_empty() {
            k.to_string()
        } else {
            format!("{prefix}.{k}")
        }
    }
    let mut out = String::from("path,value\n");
    walk("", v, &mut out);
    out
}

pub fn write(path: &Path, text: &str) -> std::io::Result<()> {
    if path.as_os_str() == "-" {
        print!("{text}");
        Ok(())
    } else {
        std::fs::write(path, text)
    }
}

/// Compact float for human-readable lines.
pub fn f(x: f64) -> String {
    let r: f64 = format!("{x:.11e}").parse().unwrap_or(x);
    if r == 0.0 {
        "0".into()
    } else if !(1e-4..1e6).contains(&r.abs()) {
        format!("{r:e}")
    } else {
        format!("{r}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn normalization_rounds_and_clears_negative_zero() {
        let v = json!({"a": 0.1 + 0.2, "b": -0.0, "c": [1, 2.5e-17], "d": 1.0 / 3.0});
        let n = normalize(&v);
        assert_eq!(n["a"], json!(0.3));
        assert_eq!(serde_json::to_string(&n["b"]).unwrap(), "0.0");
        assert_eq!(n["c"][0], json!(1));
        assert_eq!(n["d"], json!(0.333333333333));
    }

    #[test]
    fn csv_lists_leaves() {
        let v = json!({"x": {"y": [1, 2]}, "s": "a\"b"});
        assert_eq!(to_csv(&v), "path,value\ns,\"a\"\"b\"\nx.y.0,1\nx.y.1,2\n");
    }
}
