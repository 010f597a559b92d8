use std::path::PathBuf;

use clap::{Args, ValueEnum};
use indlab_core::born::{self, BornMeasure};
use indlab_core::rng::CHUNK_LEN;
use indlab_core::sequence::{Champernowne, ConstantSource, PeriodicSource, Prefixes};
use indlab_core::SymbolString;
use rayon::prelude::*;
use serde::Serialize;

use super::{parse_list, seed_or_default, write_file, Global, Outcome};
use crate::entropy::OsEntropySource;
use crate::error::{Error, Result};
use crate::manifest::sha256_hex;
use crate::matrix;
use crate::seqfile::format_seq;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SourceArg {
    FairCoin,
    Born,
    Champernowne,
    Constant,
    Periodic,
    OsEntropy,
}

#[derive(Debug, Args, Serialize)]
pub struct GenerateArgs {
    /// Shorthand for `--source fair-coin`.
    #[arg(long, conflicts_with = "source")]
    pub fair_coin: bool,
    #[arg(long, value_enum)]
    pub source: Option<SourceArg>,
    /// Number of symbols.
    #[arg(long)]
    pub n: usize,
    /// Alphabet size for champernowne, constant and os-entropy.
    #[arg(long, default_value_t = 2)]
    pub base: u32,
    /// Champernowne variant starting at numeral 1.
    #[arg(long)]
    pub start_at_one: bool,
    /// Symbol repeated by the constant source.
    #[arg(long, default_value_t = 1)]
    pub symbol: u32,
    /// Digits repeated by the periodic source.
    #[arg(long)]
    pub pattern: Option<String>,
    /// Outcome probabilities for the Born sampler, e.g. `0.5,0.5`.
    #[arg(long)]
    pub probs: Option<String>,
    /// State JSON for the Born sampler (with `--observable`).
    #[arg(long, requires = "observable")]
    pub state: Option<PathBuf>,
    /// Observable JSON for the Born sampler.
    #[arg(long, requires = "state")]
    pub observable: Option<PathBuf>,
}

/// Draws in chunks aligned with the generator's key schedule; the result is
/// the same for every thread count.
pub(crate) fn sample_parallel(mu: &BornMeasure, seed: u64, n: usize) -> Result<SymbolString> {
    let chunks = (n as u64).div_ceil(CHUNK_LEN);
    let parts: Vec<Vec<u32>> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let start = c * CHUNK_LEN;
            let len = (n as u64 - start).min(CHUNK_LEN) as usize;
            born::sample_range(mu, seed, start, len)
        })
        .collect();
    Ok(SymbolString::new((mu.len() as u32).max(2), parts.concat())?)
}

pub(crate) fn fair_coin() -> BornMeasure {
    BornMeasure::scalar(&[0.0, 1.0], &[0.5, 0.5]).expect("valid measure")
}

pub(super) fn generate(a: &GenerateArgs, g: &Global) -> Result<Outcome> {
    let source = match (a.fair_coin, a.source) {
        (true, _) => SourceArg::FairCoin,
        (false, Some(s)) => s,
        (false, None) => return Err(Error::Usage("choose a source with --source or --fair-coin".into())),
    };
    let mut o = Outcome::new("seqgen/v1");
    let seed = seed_or_default(g);
    let mut key = serde_json::Value::Null;
    let seq = match source {
        SourceArg::FairCoin => {
            o.seeds.push(seed);
            sample_parallel(&fair_coin(), seed, a.n)?
        }
        SourceArg::Born => {
            let mu = match (&a.probs, &a.state, &a.observable) {
                (Some(p), None, None) => {
                    let probs: Vec<f64> = parse_list(p, "probability")?;
                    let values: Vec<f64> = (0..probs.len()).map(|i| i as f64).collect();
                    BornMeasure::scalar(&values, &probs)?
                }
                (None, Some(s), Some(obs)) => {
                    o.inputs.extend([s.clone(), obs.clone()]);
                    born::born_measure(&matrix::read_state(s)?, &matrix::read_observable(obs)?)?
                }
                _ => {
                    return Err(Error::Usage(
                        "the born source needs --probs or --state with --observable".into(),
                    ))
                }
            };
            key = serde_json::json!({ "outcomes": mu.outcomes, "probabilities": mu.probabilities });
            o.seeds.push(seed);
            sample_parallel(&mu, seed, a.n)?
        }
        SourceArg::Champernowne => Prefixes::new(Champernowne::new(a.base, a.start_at_one)?).truncate(a.n)?,
        SourceArg::Constant => Prefixes::new(ConstantSource::new(a.base, a.symbol)?).truncate(a.n)?,
        SourceArg::Periodic => {
            let pat = a
                .pattern
                .as_deref()
                .ok_or_else(|| Error::Usage("--pattern is required".into()))?;
            let k = a
                .base
                .max(pat.chars().filter_map(|c| c.to_digit(10)).max().map_or(2, |d| d + 1));
            Prefixes::new(PeriodicSource::new(SymbolString::from_digits(k, pat)?)?).truncate(a.n)?
        }
        SourceArg::OsEntropy => {
            o.nondeterministic = true;
            Prefixes::new(OsEntropySource::new(a.base)?).truncate(a.n)?
        }
    };
    let text = format_seq(&seq);
    match &g.out {
        Some(p) => {
            write_file(p, text.as_bytes())?;
            o.outputs.push(p.clone());
        }
        None => o.stdout_artifact = Some(text.clone()),
    }
    let digest = sha256_hex(text.as_bytes());
    let shown: String = seq.prefix(seq.len().min(64)).to_text();
    o.summary = format!(
        "generated {} symbols (base {}) from {}; sha256 {}\n  prefix {}\n",
        seq.len(),
        seq.alphabet_size(),
        source.to_possible_value().expect("no skipped variants").get_name(),
        digest,
        shown
    );
    o.result = serde_json::json!({
        "source": source,
        "n": seq.len(),
        "alphabet_size": seq.alphabet_size(),
        "seed": (!o.seeds.is_empty()).then_some(seed),
        "reproducible": !o.nondeterministic,
        "sha256": digest,
        "prefix": shown,
        "key": key,
    });
    Ok(o)
}
