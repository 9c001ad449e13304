//! Named numeric checks with pass/fail status, and their JSON-lines and table
//! renderings.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
}

impl Status {
    pub fn as_str(self) -> &'static str {
        match self {
            Status::Pass => "pass",
            Status::Fail => "fail",
        }
    }
}

/// One check. `status` is `Pass` exactly when `residual <= tol`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub anchor: String,
    pub status: Status,
    pub residual: f64,
    pub tol: f64,
    pub witness: Option<Value>,
}

impl Check {
    pub fn new(name: impl Into<String>, anchor: impl Into<String>, residual: f64, tol: f64) -> Check {
        let status = if residual <= tol { Status::Pass } else { Status::Fail };
        Check {
            name: name.into(),
            anchor: anchor.into(),
            status,
            residual,
            tol,
            witness: None,
        }
    }

    /// Pass/fail check without a meaningful magnitude: residual 0 or 1, tol 0.
    pub fn flag(name: impl Into<String>, anchor: impl Into<String>, ok: bool) -> Check {
        Check::new(name, anchor, if ok { 0.0 } else { 1.0 }, 0.0)
    }

    /// Passes when `inner` fails by a wide margin: the residual is
    /// `inner.tol / inner.residual`, required to be at most `1e-3`.
    pub fn negative_control(name: impl Into<String>, anchor: impl Into<String>, inner: &Check) -> Check {
        let ratio = if inner.residual > 0.0 { inner.tol / inner.residual } else { f64::INFINITY };
        Check::new(name, anchor, ratio, 1e-3).with_witness(json!({
            "control": inner.name,
            "control_residual": round12(inner.residual),
            "control_tol": inner.tol,
            "control_status": inner.status.as_str(),
        }))
    }

    pub fn with_witness(mut self, witness: Value) -> Check {
        self.witness = Some(witness);
        self
    }

    pub fn passed(&self) -> bool {
        self.status == Status::Pass
    }

    pub fn to_json(&self) -> Value {
        json!({
            "check": self.name,
            "anchor": self.anchor,
            "status": self.status.as_str(),
            "residual": number(self.residual),
            "tol": number(self.tol),
            "witness": self.witness,
        })
    }
}

/// Rounds to 12 significant digits so printed output is stable.
pub fn round12(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    format!("{x:.11e}").parse().unwrap_or(x)
}

fn number(x: f64) -> Value {
    if x.is_finite() {
        json!(round12(x))
    } else if x > 0.0 {
        json!("inf")
    } else {
        json!("nan")
    }
}

pub fn fmt12(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.11e}")
    } else {
        format!("{x}")
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub checks: Vec<Check>,
    pub seed: Option<u64>,
    pub dims: Vec<usize>,
}

impl VerificationReport {
    pub fn new() -> VerificationReport {
        VerificationReport::default()
    }

    pub fn with_seed(seed: u64) -> VerificationReport {
        VerificationReport { seed: Some(seed), ..Default::default() }
    }

    pub fn push(&mut self, check: Check) {
        self.checks.push(check);
    }

    pub fn extend(&mut self, other: VerificationReport) {
        self.checks.extend(other.checks);
        for d in other.dims {
            if !self.dims.contains(&d) {
                self.dims.push(d);
            }
        }
    }

    /// Prefixes every check name with `prefix/`.
    pub fn prefixed(mut self, prefix: &str) -> VerificationReport {
        for c in &mut self.checks {
            c.name = format!("{prefix}/{}", c.name);
        }
        self
    }

    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(Check::passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed())
    }

    pub fn get(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    /// First check whose name starts with `prefix`.
    pub fn find(&self, prefix: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name.starts_with(prefix))
    }

    pub fn sort_by_name(&mut self) {
        self.checks.sort_by(|a, b| a.name.cmp(&b.name));
    }

    pub fn to_json_lines(&self) -> String {
        let mut out = String::new();
        for c in &self.checks {
            out.push_str(&c.to_json().to_string());
            out.push('\n');
        }
        out
    }

    pub fn to_table(&self) -> String {
        let width = self.checks.iter().map(|c| c.name.len()).max().unwrap_or(5).max(5);
        let mut out = String::new();
        let _ = writeln!(out, "{:<width$}  {:<6}  {:>18}  {:>18}", "check", "status", "residual", "tol");
        for c in &self.checks {
            let _ = writeln!(
                out,
                "{:<width$}  {:<6}  {:>18}  {:>18}",
                c.name,
                c.status.as_str().to_uppercase(),
                fmt12(c.residual),
                fmt12(c.tol)
            );
        }
        let passed = self.checks.iter().filter(|c| c.passed()).count();
        let _ = writeln!(out, "{passed}/{} checks passed", self.checks.len());
        out
    }
}
