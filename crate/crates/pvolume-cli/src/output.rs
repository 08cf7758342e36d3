//! Number formatting, CSV assembly and the bundle of outputs a command produces.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use serde_json::Value;

/// Twelve significant digits in scientific notation; non-finite values spelled out.
pub fn sci(v: f64) -> String {
    if v == 0.0 {
        // no signed zeros in tables
        "0.00000000000e0".into()
    } else if v.is_finite() {
        format!("{v:.11e}")
    } else if v.is_nan() {
        "nan".into()
    } else if v > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

/// A JSON number rounded to twelve significant digits, or null.
pub fn jnum(v: f64) -> Value {
    if v == 0.0 {
        serde_json::json!(0.0)
    } else if v.is_finite() {
        let r: f64 = format!("{v:.11e}").parse().expect("formatted float parses");
        serde_json::Number::from_f64(r).map_or(Value::Null, Value::Number)
    } else {
        Value::Null
    }
}

pub fn jopt(v: Option<f64>) -> Value {
    v.map_or(Value::Null, jnum)
}

/// CSV text opened by a comment with the configuration hash and a header row.
pub struct Csv {
    text: String,
}

impl Csv {
    pub fn new(command: &str, hash: &str, header: &[&str]) -> Self {
        let mut text = format!("# pvolume {command} config_sha256={hash}\n");
        text.push_str(&header.join(","));
        text.push('\n');
        Self { text }
    }

    pub fn row<S: AsRef<str>>(&mut self, fields: &[S]) {
        let line: Vec<&str> = fields.iter().map(|f| f.as_ref()).collect();
        self.text.push_str(&line.join(","));
        self.text.push('\n');
    }

    pub fn finish(self) -> String {
        self.text
    }
}

pub fn json_text(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("JSON values serialize");
    s.push('\n');
    s
}

/// Primary output plus named side artifacts (resonances, gnuplot, trace).
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Outputs {
    pub primary: String,
    pub artifacts: BTreeMap<String, String>,
}
