//! Structured reports: one record per check, machine-readable JSON or a
//! human text rendering. Timing fields are informational only and excluded
//! from determinism comparisons.

use serde::Serialize;
use serde_json::Value;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckStatus {
    Pass,
    Fail,
    Infeasible,
    Capacity,
}

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub status: CheckStatus,
    pub data: Value,
}

impl Check {
    pub fn new(name: impl Into<String>, status: CheckStatus, data: Value) -> Self {
        Check { name: name.into(), status, data }
    }

    pub fn pass(name: impl Into<String>, data: Value) -> Self {
        Check::new(name, CheckStatus::Pass, data)
    }

    /// Pass when the condition holds, fail otherwise.
    pub fn verdict(name: impl Into<String>, ok: bool, data: Value) -> Self {
        Check::new(
            name,
            if ok { CheckStatus::Pass } else { CheckStatus::Fail },
            data,
        )
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub schema_version: u32,
    pub scenario: String,
    pub kind: String,
    pub seed: u64,
    pub checks: Vec<Check>,
    pub status: CheckStatus,
    pub timing_ms: u64,
}

impl Report {
    pub fn new(scenario: String, kind: String, seed: u64, checks: Vec<Check>) -> Self {
        let status = if checks.iter().all(|c| c.status == CheckStatus::Pass) {
            CheckStatus::Pass
        } else {
            CheckStatus::Fail
        };
        Report {
            schema_version: SCHEMA_VERSION,
            scenario,
            kind,
            seed,
            checks,
            status,
            timing_ms: 0,
        }
    }

    pub fn all_pass(&self) -> bool {
        self.status == CheckStatus::Pass
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SuiteSummary {
    pub scenarios: usize,
    pub checks: usize,
    pub pass: usize,
    pub fail: usize,
    pub infeasible: usize,
    pub capacity: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct SuiteReport {
    pub schema_version: u32,
    pub suite: String,
    pub reports: Vec<Report>,
    pub summary: SuiteSummary,
    pub timing_ms: u64,
}

impl SuiteReport {
    pub fn new(suite: String, reports: Vec<Report>) -> Self {
        let mut summary = SuiteSummary {
            scenarios: reports.len(),
            checks: 0,
            pass: 0,
            fail: 0,
            infeasible: 0,
            capacity: 0,
        };
        for report in &reports {
            for check in &report.checks {
                summary.checks += 1;
                match check.status {
                    CheckStatus::Pass => summary.pass += 1,
                    CheckStatus::Fail => summary.fail += 1,
                    CheckStatus::Infeasible => summary.infeasible += 1,
                    CheckStatus::Capacity => summary.capacity += 1,
                }
            }
        }
        SuiteReport {
            schema_version: SCHEMA_VERSION,
            suite,
            reports,
            summary,
            timing_ms: 0,
        }
    }

    pub fn all_pass(&self) -> bool {
        self.summary.checks == self.summary.pass
    }
}

pub fn render_report_text(report: &Report) -> String {
    let mut out = String::new();
    out.push_str(&format!(
        "scenario {} ({}) seed={}\n",
        report.scenario, report.kind, report.seed
    ));
    for check in &report.checks {
        out.push_str(&format!(
            "  [{}] {}\n",
            status_word(check.status),
            check.name
        ));
    }
    out.push_str(&format!(
        "result: {} ({} checks, {} ms)\n",
        status_word(report.status),
        report.checks.len(),
        report.timing_ms
    ));
    out
}

pub fn render_suite_text(suite: &SuiteReport) -> String {
    let mut out = String::new();
    for report in &suite.reports {
        out.push_str(&render_report_text(report));
    }
    out.push_str(&format!(
        "suite {}: {}/{} checks pass ({} scenarios, {} ms)\n",
        suite.suite,
        suite.summary.pass,
        suite.summary.checks,
        suite.summary.scenarios,
        suite.timing_ms
    ));
    out
}

fn status_word(status: CheckStatus) -> &'static str {
    match status {
        CheckStatus::Pass => "pass",
        CheckStatus::Fail => "fail",
        CheckStatus::Infeasible => "infeasible",
        CheckStatus::Capacity => "capacity",
    }
}
