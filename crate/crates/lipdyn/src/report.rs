//! JSON reports. Every report carries the run manifest and a status that
//! maps to the process exit code.
//!
//! Reports are bit-reproducible: object keys are sorted, floats are printed
//! in shortest round-trip form, and wall time is kept out of the JSON (it is
//! printed on stderr instead).

use serde::Serialize;
use serde_json::{json, Value};

use crate::error::CliError;

pub const SCHEMA_VERSION: &str = "lipdyn.report/1";
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");
/// Environment variable read for the worker-thread count. The numerics are
/// sequential, so the value is only recorded.
pub const THREADS_ENV: &str = "LIPDYN_THREADS";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Pass,
    Fail,
    Inconclusive,
    Error,
}

impl Status {
    pub fn exit_code(self) -> i32 {
        match self {
            Status::Pass => 0,
            Status::Fail => 1,
            Status::Inconclusive => 2,
            Status::Error => 3,
        }
    }

    pub fn from_verdict(v: lipdyn_core::hyperbolic::Verdict) -> Status {
        use lipdyn_core::hyperbolic::Verdict;
        match v {
            Verdict::Certified => Status::Pass,
            Verdict::Rejected => Status::Fail,
            Verdict::Inconclusive => Status::Inconclusive,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ConfigRef {
    pub role: String,
    pub path: String,
    pub sha256: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub subcommand: String,
    pub configs: Vec<ConfigRef>,
    pub seed: u64,
    pub pairs: usize,
    pub tol: f64,
    pub grid: Option<usize>,
    pub margin: f64,
    pub threads: Option<String>,
    pub tool_version: &'static str,
}

#[derive(Debug, Clone, Serialize)]
pub struct ErrorInfo {
    pub kind: &'static str,
    pub message: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub schema: &'static str,
    pub manifest: RunManifest,
    pub status: Status,
    pub result: Value,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<ErrorInfo>,
}

impl Report {
    pub fn error(manifest: RunManifest, e: &CliError) -> Report {
        Report {
            schema: SCHEMA_VERSION,
            manifest,
            status: Status::Error,
            result: Value::Null,
            error: Some(ErrorInfo {
                kind: e.kind(),
                message: e.to_string(),
            }),
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("reports serialize");
        s.push('\n');
        s
    }
}

/// A quantity compared against a bound after inflation by `margin`.
pub fn bounded(value: f64, margin: f64, bound: f64) -> Value {
    json!({
        "value": value,
        "margin": margin,
        "bound": bound,
        "holds": value * margin < bound,
    })
}

/// A quantity that must stay at or below `bound`, with no margin.
pub fn at_most(value: f64, bound: f64) -> Value {
    json!({
        "value": value,
        "margin": 1.0,
        "bound": bound,
        "holds": value <= bound,
    })
}
