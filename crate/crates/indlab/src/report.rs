//! Versioned JSON reports and their consolidation.
//!
//! Every report is an [`Envelope`]: command-specific `result` data plus a
//! uniform list of checks, optional numeric series and the assumptions the
//! run exercised. Consolidation reads only the uniform part.

use std::fmt::Write as _;
use std::path::PathBuf;

use indlab_core::randomness::Verdict;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::manifest::RunManifest;

/// Report schemas this build reads and writes.
pub const SCHEMAS: &[&str] = &[
    "seqgen/v1",
    "randlab/v1",
    "hvreport/v1",
    "bellreport/v1",
    "ks/v1",
    "summary/v1",
];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub verdict: Verdict,
    pub detail: String,
}

impl Check {
    pub fn new(name: impl Into<String>, passed: bool, detail: impl Into<String>) -> Self {
        Check {
            name: name.into(),
            verdict: if passed { Verdict::Pass } else { Verdict::Fail },
            detail: detail.into(),
        }
    }

    pub fn skipped(name: impl Into<String>, detail: impl Into<String>) -> Self {
        Check {
            name: name.into(),
            verdict: Verdict::Skipped,
            detail: detail.into(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeriesPoint {
    pub series: String,
    pub x: f64,
    pub y: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    /// Nothing was checked.
    Ok,
    Pass,
    Fail,
    Error,
}

impl Status {
    pub fn from_checks(checks: &[Check]) -> Status {
        if checks.iter().any(|c| c.verdict == Verdict::Fail) {
            Status::Fail
        } else if checks.iter().any(|c| c.verdict == Verdict::Pass) {
            Status::Pass
        } else {
            Status::Ok
        }
    }

    pub fn exit_code(self) -> i32 {
        match self {
            Status::Ok | Status::Pass => 0,
            Status::Fail => 2,
            Status::Error => 1,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Envelope {
    pub schema: String,
    pub subcommand: String,
    pub status: Status,
    pub exit_code: i32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    #[serde(default)]
    pub result: serde_json::Value,
    #[serde(default)]
    pub checks: Vec<Check>,
    #[serde(default)]
    pub series: Vec<SeriesPoint>,
    #[serde(default)]
    pub assumptions: Vec<String>,
    pub manifest: RunManifest,
}

/// Reads a report, rejecting unknown schemas and other versions by name.
pub fn parse_envelope(text: &str, context: &str) -> Result<Envelope> {
    let v: serde_json::Value = serde_json::from_str(text).map_err(|e| Error::json(context, e))?;
    let schema = v.get("schema").and_then(|s| s.as_str()).unwrap_or("(none)").to_string();
    if !SCHEMAS.contains(&schema.as_str()) {
        let family = schema.split('/').next().unwrap_or("");
        let expected = SCHEMAS
            .iter()
            .find(|s| s.split('/').next() == Some(family))
            .map_or_else(|| SCHEMAS.join(" | "), |s| s.to_string());
        return Err(Error::Schema {
            context: context.into(),
            found: schema,
            expected,
        });
    }
    serde_json::from_value(v).map_err(|e| Error::json(context, e))
}

#[derive(Clone, Debug, PartialEq)]
pub struct Summary {
    pub text: String,
    pub plot_csv: String,
    pub any_failed: bool,
}

fn verdict_word(v: Verdict) -> &'static str {
    match v {
        Verdict::Pass => "PASS",
        Verdict::Fail => "FAIL",
        Verdict::Skipped => "SKIP",
    }
}

/// Consolidates reports in a fixed order: schema, then subcommand, then path.
pub fn consolidate(mut reports: Vec<(PathBuf, Envelope)>) -> Result<Summary> {
    if reports.is_empty() {
        return Err(Error::Usage("report needs at least one input".into()));
    }
    reports.sort_by(|a, b| (&a.1.schema, &a.1.subcommand, &a.0).cmp(&(&b.1.schema, &b.1.subcommand, &b.0)));
    let mut text = String::new();
    let mut plot = String::from("source,series,x,y\n");
    let (mut pass, mut fail, mut skip) = (0, 0, 0);
    let mut any_failed = false;
    for (path, e) in &reports {
        let _ = writeln!(
            text,
            "== {} [{} {}] status={:?} exit={}",
            path.display(),
            e.schema,
            e.subcommand,
            e.status,
            e.exit_code
        );
        if let Some(err) = &e.error {
            let _ = writeln!(text, "   error: {err}");
        }
        any_failed |= matches!(e.status, Status::Fail | Status::Error);
        for a in &e.assumptions {
            let _ = writeln!(text, "   exercises: {a}");
        }
        let width = e.checks.iter().map(|c| c.name.len()).max().unwrap_or(0);
        for c in &e.checks {
            match c.verdict {
                Verdict::Pass => pass += 1,
                Verdict::Fail => fail += 1,
                Verdict::Skipped => skip += 1,
            }
            let _ = writeln!(text, "   {:<width$}  {}  {}", c.name, verdict_word(c.verdict), c.detail);
        }
        for p in &e.series {
            let _ = writeln!(plot, "{},{},{},{}", path.display(), p.series, p.x, p.y);
        }
    }
    let _ = writeln!(
        text,
        "-- {} reports, {pass} checks passed, {fail} failed, {skip} skipped",
        reports.len()
    );
    Ok(Summary {
        text,
        plot_csv: plot,
        any_failed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn manifest() -> RunManifest {
        RunManifest {
            schema: crate::manifest::SCHEMA.into(),
            tool_version: "0".into(),
            subcommand: "x".into(),
            argv: vec![],
            parameters: serde_json::Value::Null,
            seeds: vec![],
            deterministic: true,
            inputs: vec![],
            outputs: vec![],
            wall_time_ms: 0.0,
            exit_code: 0,
        }
    }

    fn envelope(schema: &str, sub: &str, checks: Vec<Check>) -> Envelope {
        let status = Status::from_checks(&checks);
        Envelope {
            schema: schema.into(),
            subcommand: sub.into(),
            status,
            exit_code: status.exit_code(),
            error: None,
            result: serde_json::Value::Null,
            checks,
            series: vec![SeriesPoint {
                series: "margin".into(),
                x: 10.0,
                y: -3.0,
            }],
            assumptions: vec![],
            manifest: manifest(),
        }
    }

    #[test]
    fn status_from_checks() {
        assert_eq!(Status::from_checks(&[]), Status::Ok);
        assert_eq!(Status::from_checks(&[Check::skipped("a", "")]), Status::Ok);
        assert_eq!(Status::from_checks(&[Check::new("a", true, "")]), Status::Pass);
        assert_eq!(
            Status::from_checks(&[Check::new("a", true, ""), Check::new("b", false, "")]),
            Status::Fail
        );
    }

    #[test]
    fn order_is_independent_of_input_order() {
        let a = (
            PathBuf::from("a.json"),
            envelope("randlab/v1", "analyze", vec![Check::new("borel_l1", true, "")]),
        );
        let b = (
            PathBuf::from("b.json"),
            envelope(
                "bellreport/v1",
                "bell analyze",
                vec![Check::new("violation", false, "")],
            ),
        );
        let s1 = consolidate(vec![a.clone(), b.clone()]).unwrap();
        let s2 = consolidate(vec![b, a]).unwrap();
        assert_eq!(s1, s2);
        assert!(s1.any_failed);
        assert!(s1.text.find("b.json").unwrap() < s1.text.find("a.json").unwrap());
        assert_eq!(s1.plot_csv.lines().count(), 3);
    }

    #[test]
    fn version_mismatch_is_named() {
        let mut e = envelope("randlab/v1", "analyze", vec![]);
        e.schema = "randlab/v2".into();
        let text = serde_json::to_string(&e).unwrap();
        let err = parse_envelope(&text, "r.json").unwrap_err();
        assert!(
            err.to_string().contains("randlab/v2") && err.to_string().contains("randlab/v1"),
            "{err}"
        );
        assert!(consolidate(vec![]).is_err());
    }
}
