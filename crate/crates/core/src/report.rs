//! Reports: one header, then records, then a verdict. The machine format is
//! line-delimited JSON and contains nothing that depends on timing, thread
//! scheduling or cache state, so equal inputs give byte-identical reports.

use std::fmt::Write as _;

use serde::Serialize;
use serde_json::{json, Value};

/// Stated once in every header.
pub const ASSUMPTIONS: [&str; 4] = [
    "projectivity of the input spaces is assumed, not certified",
    "bundle bases are toric presentations",
    "the grading lattice has one coordinate per homogeneous coordinate",
    "wall-crossing transforms are verified on K-classes only",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Table,
    Machine,
}

#[derive(Debug, Clone, Serialize)]
struct Line {
    kind: String,
    inputs: Value,
    #[serde(flatten)]
    body: Value,
}

#[derive(Debug, Clone)]
pub struct Report {
    lines: Vec<Line>,
    text: Vec<String>,
    passed: Option<bool>,
}

impl Report {
    /// `options` are echoed in order; pass them already formatted.
    pub fn new(command: &str, input: &str, options: &[(&str, String)]) -> Self {
        let opts: serde_json::Map<String, Value> =
            options.iter().map(|(k, v)| (k.to_string(), Value::String(v.clone()))).collect();
        let header = Line {
            kind: "header".into(),
            inputs: json!({ "command": command, "input": input, "options": opts }),
            body: json!({ "assumptions": ASSUMPTIONS }),
        };
        let mut text = vec![format!("{command} on {input}")];
        for (k, v) in options {
            text.push(format!("  {k}: {v}"));
        }
        text.push("  assumptions:".into());
        text.extend(ASSUMPTIONS.iter().map(|a| format!("    - {a}")));
        Report { lines: vec![header], text, passed: None }
    }

    /// Adds a record; `body` must serialize to a JSON object.
    pub fn record(&mut self, kind: &str, inputs: Value, body: impl Serialize, text: impl Into<String>) {
        let body = serde_json::to_value(body).expect("serializable record");
        let body = if body.is_object() { body } else { json!({ "value": body }) };
        self.lines.push(Line { kind: kind.into(), inputs, body });
        let text = text.into();
        if !text.is_empty() {
            self.text.push(text);
        }
    }

    pub fn verdict(&mut self, passed: bool, summary: impl Serialize) {
        self.passed = Some(passed);
        let body = json!({ "passed": passed, "summary": serde_json::to_value(summary).expect("serializable summary") });
        self.lines.push(Line { kind: "verdict".into(), inputs: Value::Null, body });
        self.text.push(format!("verdict: {}", if passed { "PASS" } else { "FAIL" }));
    }

    pub fn passed(&self) -> Option<bool> {
        self.passed
    }

    pub fn render(&self, format: Format) -> String {
        let mut out = String::new();
        match format {
            Format::Machine => {
                for line in &self.lines {
                    let _ = writeln!(out, "{}", serde_json::to_string(line).expect("serializable line"));
                }
            }
            Format::Table => {
                for line in &self.text {
                    let _ = writeln!(out, "{line}");
                }
            }
        }
        out
    }
}
