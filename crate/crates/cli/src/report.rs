use std::time::Instant;

use k3e_core::LatticeError;
use serde::Serialize;
use serde_json::Value;

pub const EXIT_PARSE: i32 = 2;
pub const EXIT_PRECONDITION: i32 = 3;
pub const EXIT_DIFF: i32 = 4;
pub const EXIT_CAP: i32 = 5;

#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub message: String,
}

impl Failure {
    pub fn parse(m: impl Into<String>) -> Self {
        Failure { code: EXIT_PARSE, message: m.into() }
    }

    pub fn precondition(m: impl Into<String>) -> Self {
        Failure { code: EXIT_PRECONDITION, message: m.into() }
    }
}

impl From<LatticeError> for Failure {
    fn from(e: LatticeError) -> Self {
        let code = match e {
            LatticeError::Parse(_) | LatticeError::Io(_) => EXIT_PARSE,
            LatticeError::CapExceeded(_) => EXIT_CAP,
            _ => EXIT_PRECONDITION,
        };
        Failure { code, message: e.to_string() }
    }
}

impl From<serde_json::Error> for Failure {
    fn from(e: serde_json::Error) -> Self {
        Failure::parse(e.to_string())
    }
}

#[derive(Serialize)]
pub struct CacheStats {
    pub dir: String,
    pub hits: u64,
    pub misses: u64,
}

#[derive(Serialize)]
pub struct Timings {
    pub total_ms: u64,
}

/// Envelope printed by every JSON-producing command.
#[derive(Serialize)]
pub struct RunReport {
    pub command: String,
    pub inputs: Value,
    pub verdicts: Value,
    pub witnesses: Vec<Value>,
    pub timings: Timings,
    pub cache: Option<CacheStats>,
    pub version: String,
    pub seed: Option<u64>,
}

/// What a command hands back before the envelope is filled in.
pub struct Outcome {
    pub inputs: Value,
    pub verdicts: Value,
    pub witnesses: Vec<Value>,
    pub cache: Option<CacheStats>,
    pub seed: Option<u64>,
    /// Exit code after printing; nonzero for diffs and strict-mode gaps.
    pub exit: i32,
}

impl Outcome {
    pub fn new(inputs: Value, verdicts: impl Serialize) -> Result<Self, Failure> {
        Ok(Outcome { inputs, verdicts: serde_json::to_value(verdicts)?, witnesses: Vec::new(), cache: None, seed: None, exit: 0 })
    }

    pub fn witness(mut self, w: impl Serialize) -> Result<Self, Failure> {
        self.witnesses.push(serde_json::to_value(w)?);
        Ok(self)
    }
}

pub fn finish(command: &str, start: Instant, out: Outcome) -> RunReport {
    RunReport {
        command: command.to_string(),
        inputs: out.inputs,
        verdicts: out.verdicts,
        witnesses: out.witnesses,
        timings: Timings { total_ms: start.elapsed().as_millis() as u64 },
        cache: out.cache,
        version: env!("CARGO_PKG_VERSION").to_string(),
        seed: out.seed,
    }
}
