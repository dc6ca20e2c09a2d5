use std::fs;
use std::io::{self, Write};
use std::path::Path;
use std::time::Duration;

use serde::Serialize;
use serde_json::Value;

pub const SCHEMA: &str = "ramsey-approx/1";

/// Outcome of a verification or search, carried in `data.status`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    Pass,
    Violation,
    Infeasible,
    NoWitness,
}

impl Status {
    pub fn exit_code(self) -> u8 {
        match self {
            Status::Pass => 0,
            Status::Violation => 3,
            Status::Infeasible => 4,
            Status::NoWitness => 5,
        }
    }
}

/// `data` is deterministic for fixed parameters; `meta` holds run details.
#[derive(Debug, Serialize)]
pub struct Report {
    pub schema: &'static str,
    pub command: String,
    pub params: Value,
    pub data: Value,
    pub meta: Meta,
}

#[derive(Debug, Serialize)]
pub struct Meta {
    pub elapsed_ms: f64,
    pub threads: usize,
    pub version: &'static str,
}

impl Report {
    pub fn new(command: &str, params: Value, data: Value, elapsed: Duration) -> Self {
        Report {
            schema: SCHEMA,
            command: command.to_string(),
            params,
            data,
            meta: Meta {
                elapsed_ms: elapsed.as_secs_f64() * 1e3,
                threads: rayon::current_num_threads(),
                version: env!("CARGO_PKG_VERSION"),
            },
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }
}

/// Writes to `out` if given, else stdout.
pub fn emit(out: Option<&Path>, text: &str) -> io::Result<()> {
    match out {
        Some(path) => fs::write(path, text),
        None => {
            let mut stdout = io::stdout().lock();
            stdout.write_all(text.as_bytes())?;
            stdout.flush()
        }
    }
}
