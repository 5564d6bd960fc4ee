//! The JSON report written by every subcommand.

use nalgebra::{DMatrix, DVector};
use qhm_core::lie::GroupElement;
use serde::Serialize;
use serde_json::{json, Map, Value};

pub const SCHEMA_VERSION: u32 = 1;

/// How a check compares its value with the tolerance.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Bound {
    /// Passes when `value ≤ tol`.
    AtMost,
    /// Passes when `value ≥ tol`.
    AtLeast,
    /// Reported only.
    Info,
}

#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub tol: f64,
    pub bound: Bound,
    pub passed: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct Report {
    pub schema_version: u32,
    pub command: String,
    pub config: Value,
    pub checks: Vec<Check>,
    pub data: Map<String, Value>,
    pub passed: bool,
}

impl Report {
    pub fn new(command: &str, config: Value) -> Self {
        Report {
            schema_version: SCHEMA_VERSION,
            command: command.to_string(),
            config,
            checks: Vec::new(),
            data: Map::new(),
            passed: true,
        }
    }

    pub fn at_most(&mut self, name: &str, value: f64, tol: f64) {
        self.push(name, value, tol, Bound::AtMost);
    }

    pub fn at_least(&mut self, name: &str, value: f64, tol: f64) {
        self.push(name, value, tol, Bound::AtLeast);
    }

    pub fn info(&mut self, name: &str, value: f64) {
        self.push(name, value, f64::NAN, Bound::Info);
    }

    /// A yes/no condition recorded as 0 (holds) or 1 (violated).
    pub fn flag(&mut self, name: &str, holds: bool) {
        self.push(name, if holds { 0.0 } else { 1.0 }, 0.0, Bound::AtMost);
    }

    fn push(&mut self, name: &str, value: f64, tol: f64, bound: Bound) {
        // NaN never passes a bound.
        let passed = match bound {
            Bound::AtMost => value <= tol,
            Bound::AtLeast => value >= tol,
            Bound::Info => true,
        };
        self.passed &= passed;
        self.checks.push(Check { name: name.to_string(), value, tol, bound, passed });
    }

    pub fn put(&mut self, key: &str, value: Value) {
        self.data.insert(key.to_string(), value);
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn failed_checks(&self) -> Vec<&Check> {
        self.checks.iter().filter(|c| !c.passed).collect()
    }
}

/// Row-major nested arrays.
pub fn matrix(m: &DMatrix<f64>) -> Value {
    Value::Array((0..m.nrows()).map(|i| json!((0..m.ncols()).map(|j| m[(i, j)]).collect::<Vec<_>>())).collect())
}

pub fn vector(v: &DVector<f64>) -> Value {
    json!(v.iter().copied().collect::<Vec<_>>())
}

/// Row-major `[re, im]` pairs.
pub fn group_element(g: &GroupElement) -> Value {
    let m = &g.matrix;
    Value::Array(
        (0..m.nrows())
            .map(|i| json!((0..m.ncols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect::<Vec<_>>()))
            .collect(),
    )
}

pub fn group_elements(gs: &[GroupElement]) -> Value {
    Value::Array(gs.iter().map(group_element).collect())
}
