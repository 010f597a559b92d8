//! Bell trial records as CSV (`a_deg,b_deg,alpha,beta,lambda_id`) with a
//! JSON sidecar `<file>.json` describing the run.

use std::path::{Path, PathBuf};

use indlab_core::bell::TrialRecord;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const SIDECAR_SCHEMA: &str = "bellrun/v1";

#[derive(Debug, Serialize, Deserialize)]
struct Row {
    a_deg: f64,
    b_deg: f64,
    alpha: u8,
    beta: u8,
    lambda_id: Option<u32>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunSidecar {
    pub schema: String,
    pub model: String,
    pub settings: Vec<f64>,
    pub sampler: String,
    pub n: u64,
    pub seed: u64,
    pub records_sha256: String,
}

pub fn sidecar_path(csv: &Path) -> PathBuf {
    let mut s = csv.as_os_str().to_owned();
    s.push(".json");
    PathBuf::from(s)
}

fn csv_err(path: &Path, e: csv::Error) -> Error {
    Error::Csv {
        context: path.display().to_string(),
        source: e,
    }
}

pub fn records_to_csv(records: &[TrialRecord]) -> Vec<u8> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in records {
        w.serialize(Row {
            a_deg: r.a,
            b_deg: r.b,
            alpha: r.alpha,
            beta: r.beta,
            lambda_id: r.lambda,
        })
        .expect("in-memory write");
    }
    w.into_inner().expect("in-memory flush")
}

pub fn records_from_csv(bytes: &[u8], path: &Path) -> Result<Vec<TrialRecord>> {
    let mut rd = csv::Reader::from_reader(bytes);
    let mut out = Vec::new();
    for (i, row) in rd.deserialize::<Row>().enumerate() {
        let row = row.map_err(|e| csv_err(path, e))?;
        if row.alpha > 1 || row.beta > 1 {
            return Err(Error::parse("bell csv", i + 2, "outcomes must be 0 or 1"));
        }
        out.push(TrialRecord {
            a: row.a_deg,
            b: row.b_deg,
            alpha: row.alpha,
            beta: row.beta,
            lambda: row.lambda_id,
        });
    }
    Ok(out)
}

pub fn read_sidecar(csv: &Path) -> Result<Option<RunSidecar>> {
    let p = sidecar_path(csv);
    if !p.exists() {
        return Ok(None);
    }
    let v: serde_json::Value = crate::matrix::read_json(&p)?;
    let schema = v.get("schema").and_then(|s| s.as_str()).unwrap_or("(none)");
    if schema != SIDECAR_SCHEMA {
        return Err(Error::Schema {
            context: p.display().to_string(),
            found: schema.into(),
            expected: SIDECAR_SCHEMA.into(),
        });
    }
    serde_json::from_value(v)
        .map(Some)
        .map_err(|e| Error::json(p.display().to_string(), e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn header_and_empty_lambda() {
        let r = TrialRecord {
            a: 0.0,
            b: 30.0,
            alpha: 1,
            beta: 0,
            lambda: None,
        };
        let text = String::from_utf8(records_to_csv(&[r])).unwrap();
        assert_eq!(text, "a_deg,b_deg,alpha,beta,lambda_id\n0.0,30.0,1,0,\n");
    }

    #[test]
    fn bad_outcome_rejected() {
        let bytes = b"a_deg,b_deg,alpha,beta,lambda_id\n0,0,2,0,\n";
        assert!(records_from_csv(bytes, Path::new("x")).is_err());
    }

    proptest! {
        #[test]
        fn round_trip(rows in proptest::collection::vec((0u32..8, 0u32..8, 0u8..2, 0u8..2, proptest::option::of(0u32..100)), 0..50)) {
            let recs: Vec<TrialRecord> = rows
                .into_iter()
                .map(|(a, b, alpha, beta, lambda)| TrialRecord { a: a as f64 * 22.5, b: b as f64 * 7.5, alpha, beta, lambda })
                .collect();
            let back = records_from_csv(&records_to_csv(&recs), Path::new("x")).unwrap();
            prop_assert_eq!(back, recs);
        }
    }
}
