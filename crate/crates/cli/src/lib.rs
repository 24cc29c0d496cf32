//! Batch front-end: each subcommand runs a family of numerical checks and
//! returns a [`Report`] whose JSON rendering depends only on the request.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

mod algebra;
mod model;
mod params;
mod relindex;
mod symbols;
mod toeplitz;
mod topo;

pub use params::Params;

/// Significant digits kept for floats in rendered reports.
pub const FLOAT_DIGITS: usize = 10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Subcommand {
    VerifyAlgebra,
    VerifySymbols,
    ModelInvert,
    Relindex,
    Toeplitz,
    Topo,
}

impl Subcommand {
    pub const ALL: [Subcommand; 6] =
        [Self::VerifyAlgebra, Self::VerifySymbols, Self::ModelInvert, Self::Relindex, Self::Toeplitz, Self::Topo];

    pub fn name(self) -> &'static str {
        match self {
            Self::VerifyAlgebra => "verify-algebra",
            Self::VerifySymbols => "verify-symbols",
            Self::ModelInvert => "model-invert",
            Self::Relindex => "relindex",
            Self::Toeplitz => "toeplitz",
            Self::Topo => "topo",
        }
    }
}

impl FromStr for Subcommand {
    type Err = RunError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL.into_iter().find(|c| c.name() == s).ok_or_else(|| RunError::Usage(format!("unknown subcommand `{s}`")))
    }
}

impl fmt::Display for Subcommand {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Json,
    Text,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunRequest {
    pub subcommand: Subcommand,
    pub params: BTreeMap<String, Value>,
    pub seed: u64,
    pub format: Format,
}

impl RunRequest {
    pub fn new(subcommand: Subcommand, seed: u64) -> Self {
        Self { subcommand, params: BTreeMap::new(), seed, format: Format::Json }
    }

    pub fn param(mut self, key: &str, value: impl Into<Value>) -> Self {
        self.params.insert(key.to_string(), value.into());
        self
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    /// The identity or formula being verified.
    pub anchor: String,
    pub status: Status,
    pub max_error: Option<f64>,
    pub tolerance: Option<f64>,
    pub details: Value,
}

impl Check {
    /// Passes when `max_error <= tolerance`.
    pub fn within(name: impl Into<String>, anchor: &str, max_error: f64, tolerance: f64) -> Self {
        let status = if max_error <= tolerance { Status::Pass } else { Status::Fail };
        Self { name: name.into(), anchor: anchor.into(), status, max_error: Some(max_error), tolerance: Some(tolerance), details: Value::Null }
    }

    pub fn holds(name: impl Into<String>, anchor: &str, ok: bool) -> Self {
        let status = if ok { Status::Pass } else { Status::Fail };
        Self { name: name.into(), anchor: anchor.into(), status, max_error: None, tolerance: None, details: Value::Null }
    }

    pub fn with_details(mut self, details: Value) -> Self {
        self.details = details;
        self
    }

    pub fn passed(&self) -> bool {
        self.status == Status::Pass
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Outcome {
    Pass,
    Fail,
    Rejected,
}

impl Outcome {
    pub fn exit_code(self) -> i32 {
        match self {
            Self::Pass => 0,
            Self::Rejected => 2,
            Self::Fail => 3,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Report {
    pub request: RunRequest,
    pub outcome: Outcome,
    pub pass: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rejection: Option<String>,
    pub checks: Vec<Check>,
    pub values: BTreeMap<String, Value>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wall_time_ms: Option<f64>,
}

impl Report {
    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn to_json(&self) -> String {
        let mut v = serde_json::to_value(self).expect("report is serializable");
        round_floats(&mut v);
        serde_json::to_string_pretty(&v).expect("value is serializable")
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("{} (seed {}): {:?}\n", self.request.subcommand, self.request.seed, self.outcome);
        if let Some(r) = &self.rejection {
            out.push_str(&format!("rejected: {r}\n"));
        }
        for c in &self.checks {
            let status = if c.passed() { "PASS" } else { "FAIL" };
            match (c.max_error, c.tolerance) {
                (Some(e), Some(t)) => out.push_str(&format!("{status} {} [{}] max_error {e:.3e} (tol {t:.0e})\n", c.name, c.anchor)),
                _ => out.push_str(&format!("{status} {} [{}]\n", c.name, c.anchor)),
            }
        }
        for (k, v) in &self.values {
            out.push_str(&format!("{k} = {v}\n"));
        }
        out
    }

    pub fn render(&self) -> String {
        match self.request.format {
            Format::Json => self.to_json(),
            Format::Text => self.to_text(),
        }
    }
}

fn round_floats(v: &mut Value) {
    match v {
        Value::Number(n) if n.is_f64() => {
            let x = n.as_f64().unwrap_or(f64::NAN);
            let rounded: f64 = format!("{:.*e}", FLOAT_DIGITS - 1, x).parse().unwrap_or(x);
            if let Some(num) = serde_json::Number::from_f64(rounded) {
                *n = num;
            }
        }
        Value::Array(items) => items.iter_mut().for_each(round_floats),
        Value::Object(map) => map.values_mut().for_each(round_floats),
        _ => {}
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RunError {
    #[error("usage: {0}")]
    Usage(String),
}

impl RunError {
    pub fn exit_code(&self) -> i32 {
        1
    }
}

/// Collected output of one subcommand before the report is assembled.
#[derive(Debug, Default)]
pub(crate) struct Findings {
    pub checks: Vec<Check>,
    pub values: BTreeMap<String, Value>,
    pub rejection: Option<String>,
}

impl Findings {
    pub fn push(&mut self, c: Check) {
        self.checks.push(c);
    }

    pub fn value(&mut self, key: &str, v: impl Serialize) {
        self.values.insert(key.to_string(), serde_json::to_value(v).expect("serializable value"));
    }

    pub fn reject(mut self, reason: impl fmt::Display) -> Self {
        self.rejection = Some(reason.to_string());
        self
    }
}

/// Independent generator for substream `k` of `seed`.
pub(crate) fn stream(seed: u64, k: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(k);
    rng
}

/// Dispatches `request` to its subcommand. Admissibility failures become a
/// `Rejected` report; malformed or unknown parameters are usage errors and are
/// detected before any computation starts.
pub fn run(request: &RunRequest) -> Result<Report, RunError> {
    let params = Params::new(&request.params);
    let findings = match request.subcommand {
        Subcommand::VerifyAlgebra => algebra::run(&params, request.seed)?,
        Subcommand::VerifySymbols => symbols::run(&params, request.seed)?,
        Subcommand::ModelInvert => model::run(&params, request.seed)?,
        Subcommand::Relindex => relindex::run(&params, request.seed)?,
        Subcommand::Toeplitz => toeplitz::run(&params)?,
        Subcommand::Topo => topo::run(&params)?,
    };
    let Findings { mut checks, values, rejection } = findings;
    checks.sort_by(|a, b| a.name.cmp(&b.name));
    let all_pass = checks.iter().all(Check::passed);
    let outcome = match (&rejection, all_pass) {
        (Some(_), _) => Outcome::Rejected,
        (None, true) => Outcome::Pass,
        (None, false) => Outcome::Fail,
    };
    Ok(Report { request: request.clone(), outcome, pass: outcome == Outcome::Pass, rejection, checks, values, wall_time_ms: None })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn subcommand_names_round_trip() {
        for c in Subcommand::ALL {
            assert_eq!(c.name().parse::<Subcommand>().unwrap(), c);
            assert_eq!(serde_json::to_value(c).unwrap(), Value::String(c.name().into()));
        }
        assert!("nope".parse::<Subcommand>().is_err());
    }

    #[test]
    fn floats_are_rounded_to_fixed_digits() {
        let mut v = serde_json::json!({"a": [0.1 + 0.2, 1], "b": 1.0e-17 / 3.0});
        round_floats(&mut v);
        assert_eq!(v["a"][0], serde_json::json!(0.3));
        assert_eq!(v["a"][1], serde_json::json!(1));
        assert_eq!(v["b"], serde_json::json!(3.333333333e-18));
    }

    #[test]
    fn exit_codes() {
        assert_eq!(Outcome::Pass.exit_code(), 0);
        assert_eq!(Outcome::Rejected.exit_code(), 2);
        assert_eq!(Outcome::Fail.exit_code(), 3);
        assert_eq!(RunError::Usage(String::new()).exit_code(), 1);
    }

    #[test]
    fn unknown_parameter_is_a_usage_error() {
        let req = RunRequest::new(Subcommand::Toeplitz, 0).param("windw", 8);
        assert!(matches!(run(&req), Err(RunError::Usage(_))));
    }
}
