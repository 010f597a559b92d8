//! `hv/v1` model files: the model itself plus an optional sampler spec.
//!
//! ```json
//! {"schema": "hv/v1",
//!  "model": {"name": "...", "space": {"kind": "discrete", ...}, ...},
//!  "sampler": {"kind": "counter", "start": 0, "step": 1}}
//! ```

use std::path::{Path, PathBuf};

use indlab_core::hv::{HVModel, Rule, Sampler};
use serde::{Deserialize, Serialize};

use crate::entropy::OsLambda;
use crate::error::{Error, Result};
use crate::seqfile;

pub const SCHEMA: &str = "hv/v1";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SamplerSpec {
    Counter {
        start: u32,
        step: u32,
    },
    Recurrence {
        start: u32,
        next: Vec<u32>,
    },
    /// Weights default to the model's μ_ψ.
    SeededPrng {
        seed: u64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        weights: Option<Vec<f64>>,
    },
    /// A `seq/v1` λ-trace; relative paths resolve against the model file.
    Recorded {
        path: PathBuf,
        #[serde(default)]
        provenance: String,
    },
    OsEntropy,
}

impl SamplerSpec {
    pub fn build(&self, model: &HVModel, base: Option<&Path>) -> Result<Sampler> {
        Ok(match self {
            SamplerSpec::Counter { start, step } => Sampler::Deterministic(Rule::Counter {
                start: *start,
                step: *step,
            }),
            SamplerSpec::Recurrence { start, next } => Sampler::Deterministic(Rule::Recurrence {
                start: *start,
                next: next.clone(),
            }),
            SamplerSpec::SeededPrng { seed, weights } => Sampler::SeededPrng {
                seed: *seed,
                weights: weights.clone().unwrap_or_else(|| model.measure.clone()),
            },
            SamplerSpec::Recorded { path, provenance } => {
                let full = match base {
                    Some(b) if path.is_relative() => b.join(path),
                    _ => path.clone(),
                };
                let trace = seqfile::read_seq(&full)?;
                if trace.alphabet_size() != model.states() {
                    return Err(Error::Usage(format!(
                        "trace {} is over {} states, the model has {}",
                        full.display(),
                        trace.alphabet_size(),
                        model.states()
                    )));
                }
                let note = if provenance.is_empty() {
                    full.display().to_string()
                } else {
                    provenance.clone()
                };
                Sampler::Recorded {
                    trace: trace.into_symbols(),
                    provenance: note,
                }
            }
            SamplerSpec::OsEntropy => Sampler::External(Box::new(OsLambda)),
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelFile {
    pub schema: String,
    pub model: HVModel,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sampler: Option<SamplerSpec>,
}

impl ModelFile {
    pub fn new(model: HVModel, sampler: Option<SamplerSpec>) -> Self {
        ModelFile {
            schema: SCHEMA.into(),
            model,
            sampler,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("model serialises") + "\n"
    }
}

/// Parses and validates; the model's contracts are rechecked after decoding.
pub fn parse_model(text: &str, context: &str) -> Result<ModelFile> {
    let v: serde_json::Value = serde_json::from_str(text).map_err(|e| Error::json(context, e))?;
    let schema = v.get("schema").and_then(|s| s.as_str()).unwrap_or("(none)");
    if schema != SCHEMA {
        return Err(Error::Schema {
            context: context.into(),
            found: schema.into(),
            expected: SCHEMA.into(),
        });
    }
    let f: ModelFile = serde_json::from_value(v).map_err(|e| Error::json(context, e))?;
    f.model.validate()?;
    Ok(f)
}

#[cfg(test)]
mod tests {
    use super::*;
    use indlab_core::hv::{bohm_coin, thooft_parity, SamplerKind};

    #[test]
    fn bundled_models_round_trip() {
        for m in [bohm_coin(8).unwrap(), thooft_parity().unwrap()] {
            let f = ModelFile::new(m, Some(SamplerSpec::Counter { start: 0, step: 1 }));
            let back = parse_model(&f.to_json(), "test").unwrap();
            assert_eq!(back, f);
        }
    }

    #[test]
    fn schema_and_contract_checked() {
        let f = ModelFile::new(thooft_parity().unwrap(), None);
        let text = f.to_json().replace("hv/v1", "hv/v9");
        assert!(matches!(parse_model(&text, "t"), Err(Error::Schema { .. })));
        let mut bad = f.clone();
        bad.model.born = vec![0.9, 0.1];
        let text = serde_json::to_string(&bad).unwrap();
        assert!(matches!(parse_model(&text, "t"), Err(Error::Core(_))));
    }

    #[test]
    fn sampler_kinds() {
        let m = thooft_parity().unwrap();
        let s = SamplerSpec::SeededPrng { seed: 3, weights: None }
            .build(&m, None)
            .unwrap();
        assert_eq!(s.kind(), SamplerKind::SeededPrng);
        let s = SamplerSpec::OsEntropy.build(&m, None).unwrap();
        assert_eq!(s.kind(), SamplerKind::ExternalEntropy);
    }
}
