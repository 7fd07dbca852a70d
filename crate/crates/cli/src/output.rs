//! Errors with exit codes, and twelve-digit JSON/CSV output.

use std::fs;
use std::path::Path;

use opensusy::io::{csv_row, fmt12};
use opensusy::{Cx, Error, Mode};
use serde::Serialize;
use serde_json::{json, Value};

#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub kind: &'static str,
    pub message: String,
}

impl CliError {
    pub fn validation(message: String) -> Self {
        Self { code: 2, kind: "validation", message }
    }

    pub fn record(&self) -> Value {
        json!({ "error": self.kind, "message": self.message, "exit_code": self.code })
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let numeric = matches!(e, Error::NonConvergence(_) | Error::Overflow | Error::SuspectedHigherOrderZero { .. } | Error::NodeAtPoint(_));
        if numeric {
            Self { code: 3, kind: "non_convergence", message: e.to_string() }
        } else {
            Self { code: 2, kind: "validation", message: e.to_string() }
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        Self { code: 2, kind: "io", message: e.to_string() }
    }
}

/// Round to twelve significant digits; non-finite values become `null`.
pub fn num(x: f64) -> Value {
    if !x.is_finite() {
        return Value::Null;
    }
    let r: f64 = fmt12(x).parse().unwrap_or(x);
    json!(r)
}

pub fn cx(z: Cx<f64>) -> Value {
    json!({ "re": num(z.re), "im": num(z.im) })
}

#[derive(Serialize)]
pub struct ModeRecord {
    pub re_omega: Value,
    pub im_omega: Value,
    pub kind: &'static str,
    pub order: usize,
    pub residual: Value,
}

impl From<&Mode<f64>> for ModeRecord {
    fn from(m: &Mode<f64>) -> Self {
        Self { re_omega: num(m.omega.re), im_omega: num(m.omega.im), kind: m.kind.label(), order: m.order, residual: num(m.residual) }
    }
}

pub fn modes_json(modes: &[Mode<f64>]) -> Value {
    serde_json::to_value(modes.iter().map(ModeRecord::from).collect::<Vec<_>>()).unwrap_or(Value::Null)
}

pub fn modes_csv(modes: &[Mode<f64>]) -> String {
    let mut s = String::from("re_omega,im_omega,kind,order,residual\n");
    for m in modes {
        s.push_str(&format!("{},{},{},{},{}\n", fmt12(m.omega.re), fmt12(m.omega.im), m.kind.label(), m.order, fmt12(m.residual)));
    }
    s
}

pub fn table_csv(header: &str, rows: &[Vec<f64>]) -> String {
    let mut s = format!("{header}\n");
    for r in rows {
        s.push_str(&csv_row(r));
        s.push('\n');
    }
    s
}

pub fn write(path: &Path, text: &str) -> Result<(), CliError> {
    fs::write(path, text).map_err(|e| CliError { code: 2, kind: "io", message: format!("{}: {e}", path.display()) })
}

/// Pretty JSON with a trailing newline.
pub fn render(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).unwrap_or_default();
    s.push('\n');
    s
}
