//! Machine-readable run reports. Every CLI command emits one [`Report`]:
//! the command name, the numeric parameters it resolved, a list of
//! [`Check`]s, and a wall-clock timing. Serialization is deterministic —
//! params are kept sorted and field order is fixed — so identical runs
//! produce byte-identical reports apart from the timing field.

use std::collections::BTreeMap;

use serde::Serialize;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum CheckStatus {
    Pass,
    Fail,
    /// Measurement recorded for the reader; never affects the exit code.
    Info,
}

/// One named measurement with its verdict. `measured <= bound + tolerance`
/// is the pass rule for threshold checks; informational checks carry only
/// the measurement.
#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub name: String,
    pub status: CheckStatus,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub measured: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bound: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tolerance: Option<f64>,
}

impl Check {
    /// Threshold check: passes iff `measured <= bound + tolerance`.
    pub fn against(name: impl Into<String>, measured: f64, bound: f64, tolerance: f64) -> Self {
        let status = if measured <= bound + tolerance {
            CheckStatus::Pass
        } else {
            CheckStatus::Fail
        };
        Self {
            name: name.into(),
            status,
            measured: Some(measured),
            bound: Some(bound),
            tolerance: Some(tolerance),
        }
    }

    /// Violation-count check: passes iff the count is zero.
    pub fn count(name: impl Into<String>, violations: usize) -> Self {
        Self::against(name, violations as f64, 0.0, 0.0)
    }

    /// Informational measurement; cannot fail.
    pub fn info(name: impl Into<String>, measured: f64) -> Self {
        Self {
            name: name.into(),
            status: CheckStatus::Info,
            measured: Some(measured),
            bound: None,
            tolerance: None,
        }
    }

    pub fn passed(&self) -> bool {
        self.status != CheckStatus::Fail
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Report {
    pub command: String,
    /// Resolved run parameters; a sorted map so serialization order never
    /// depends on insertion order.
    pub params: BTreeMap<String, serde_json::Value>,
    pub checks: Vec<Check>,
    /// Wall-clock milliseconds — the one field allowed to differ between
    /// otherwise identical runs.
    pub timing: u64,
}

impl Report {
    pub fn new(command: impl Into<String>, params: BTreeMap<String, serde_json::Value>) -> Self {
        Self {
            command: command.into(),
            params,
            checks: Vec::new(),
            timing: 0,
        }
    }

    pub fn extend(&mut self, checks: impl IntoIterator<Item = Check>) {
        self.checks.extend(checks);
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(Check::passed)
    }

    pub fn to_json(&self) -> String {
        let mut text = serde_json::to_string_pretty(self).expect("report is plain data");
        text.push('\n');
        text
    }

    /// Human-readable per-check lines for standard output.
    pub fn summary(&self) -> String {
        let mut out = String::new();
        for check in &self.checks {
            let tag = match check.status {
                CheckStatus::Pass => "PASS",
                CheckStatus::Fail => "FAIL",
                CheckStatus::Info => "info",
            };
            out.push_str(&format!("[{tag}] {}", check.name));
            if let Some(m) = check.measured {
                out.push_str(&format!("  measured={m:.3e}"));
            }
            if let Some(b) = check.bound {
                out.push_str(&format!("  bound={b:.3e}"));
            }
            out.push('\n');
        }
        let verdict = if self.passed() { "PASS" } else { "FAIL" };
        out.push_str(&format!(
            "{}: {verdict} ({} checks)\n",
            self.command,
            self.checks.len()
        ));
        out
    }
}
