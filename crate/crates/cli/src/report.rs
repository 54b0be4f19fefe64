//! Versioned run report.

use crate::config::RunConfig;
use serde::Serialize;
use serde_json::{Map, Value};

pub const SCHEMA: u32 = 1;

#[derive(Clone, Debug, Serialize)]
pub struct Assertion {
    pub name: String,
    pub passed: bool,
    pub value: Option<f64>,
    /// `<=`, `>=` or `flag`.
    pub relation: &'static str,
    pub limit: Option<f64>,
}

impl Assertion {
    pub fn at_most(name: &str, value: f64, limit: f64) -> Self {
        Assertion { name: name.into(), passed: value <= limit, value: Some(value), relation: "<=", limit: Some(limit) }
    }

    pub fn at_least(name: &str, value: f64, limit: f64) -> Self {
        Assertion { name: name.into(), passed: value >= limit, value: Some(value), relation: ">=", limit: Some(limit) }
    }

    pub fn flag(name: &str, passed: bool) -> Self {
        Assertion { name: name.into(), passed, value: None, relation: "flag", limit: None }
    }
}

/// What an experiment produced.
#[derive(Debug, Default)]
pub struct Outcome {
    pub metrics: Map<String, Value>,
    pub assertions: Vec<Assertion>,
    pub files: Vec<String>,
}

impl Outcome {
    pub fn metric(&mut self, key: &str, v: Value) {
        self.metrics.insert(key.to_string(), v);
    }

    pub fn check(&mut self, a: Assertion) {
        self.assertions.push(a);
    }

    pub fn passed(&self) -> bool {
        self.assertions.iter().all(|a| a.passed)
    }
}

#[derive(Debug, Serialize)]
pub struct Timings {
    pub total_seconds: f64,
}

#[derive(Debug, Serialize)]
pub struct Report<'a> {
    pub schema: u32,
    pub experiment: &'a str,
    pub version: &'static str,
    pub seed: Option<u64>,
    pub threads: usize,
    pub inputs: &'a RunConfig,
    pub timings: Timings,
    pub metrics: &'a Map<String, Value>,
    pub assertions: &'a [Assertion],
    pub files: &'a [String],
    pub passed: bool,
    pub exit_code: i32,
    pub error: Option<String>,
}
