use serde::{Deserialize, Serialize};
use serde_json::{Map, Number, Value};

use crate::error::{Error, Result};

pub const REPORT_SCHEMA: &str = "report_v1";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    Pass,
    Fail,
    Informational,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    /// Informational checks are reported but do not enter the verdict.
    pub gating: bool,
    pub detail: String,
}

impl Check {
    pub fn gating(name: &str, pass: bool, detail: String) -> Self {
        Self {
            name: name.into(),
            pass,
            gating: true,
            detail,
        }
    }

    pub fn informational(name: &str, pass: bool, detail: String) -> Self {
        Self {
            name: name.into(),
            pass,
            gating: false,
            detail,
        }
    }
}

pub type Record = Map<String, Value>;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub schema: String,
    pub name: String,
    /// Resolved run configuration; replaying with it reproduces the records.
    pub config: Value,
    /// Algebra (as an `alg_v1` object) and vector the experiment ran on.
    pub inputs: Value,
    pub records: Vec<Record>,
    pub checks: Vec<Check>,
    pub verdict: Verdict,
    pub summary: Map<String, Value>,
}

impl ExperimentReport {
    pub(crate) fn new(name: &str, config: Value, inputs: Value) -> Self {
        Self {
            schema: REPORT_SCHEMA.into(),
            name: name.into(),
            config,
            inputs,
            records: Vec::new(),
            checks: Vec::new(),
            verdict: Verdict::Pass,
            summary: Map::new(),
        }
    }

    /// Sets the verdict from the gating checks: `Fail` if any fails,
    /// otherwise `pass_verdict`.
    pub(crate) fn conclude(&mut self, pass_verdict: Verdict) {
        let ok = self.checks.iter().filter(|c| c.gating).all(|c| c.pass);
        self.verdict = if ok { pass_verdict } else { Verdict::Fail };
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn passed(&self) -> bool {
        self.verdict != Verdict::Fail
    }

    /// JSON value with every float rounded to 15 significant digits.
    pub fn to_json_value(&self) -> Value {
        let mut v = serde_json::to_value(self).expect("report is serializable");
        round_floats(&mut v);
        v
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_json_value()).expect("report is serializable")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let r: Self =
            serde_json::from_str(text).map_err(|e| Error::InvalidInput(format!("report: {e}")))?;
        if r.schema != REPORT_SCHEMA {
            return Err(Error::InvalidInput(format!(
                "unsupported report schema '{}'",
                r.schema
            )));
        }
        Ok(r)
    }

    /// Records as CSV: header is the union of record keys in first-seen
    /// order, floats in shortest round-trip form, nested values as JSON.
    pub fn to_csv(&self) -> Result<String> {
        let mut header: Vec<&str> = Vec::new();
        for r in &self.records {
            for k in r.keys() {
                if !header.contains(&k.as_str()) {
                    header.push(k);
                }
            }
        }
        let mut w = csv::Writer::from_writer(Vec::new());
        let io = |e: csv::Error| Error::InvalidInput(format!("csv: {e}"));
        w.write_record(&header).map_err(io)?;
        for r in &self.records {
            w.write_record(
                header
                    .iter()
                    .map(|k| r.get(*k).map(csv_cell).unwrap_or_default()),
            )
            .map_err(io)?;
        }
        let bytes = w
            .into_inner()
            .map_err(|e| Error::InvalidInput(format!("csv: {e}")))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }
}

fn csv_cell(v: &Value) -> String {
    match v {
        Value::Null => String::new(),
        Value::String(s) => s.clone(),
        Value::Number(n) => match (n.as_i64(), n.as_u64()) {
            (Some(i), _) => i.to_string(),
            (_, Some(u)) => u.to_string(),
            _ => format!("{}", n.as_f64().unwrap_or(f64::NAN)),
        },
        other => other.to_string(),
    }
}

pub(crate) fn round_sig(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    format!("{x:.14e}").parse().expect("formatted float parses")
}

/// Rounds every float in `v` to 15 significant digits; integers are untouched.
pub fn round_floats(v: &mut Value) {
    match v {
        Value::Number(n) if n.is_f64() => {
            if let Some(r) = n.as_f64().map(round_sig).and_then(Number::from_f64) {
                *n = r;
            }
        }
        Value::Array(items) => items.iter_mut().for_each(round_floats),
        Value::Object(map) => map.values_mut().for_each(round_floats),
        _ => {}
    }
}
