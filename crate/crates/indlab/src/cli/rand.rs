use std::path::PathBuf;

use clap::Args;
use indlab_core::randomness::complexity::{self, Budget, ExactK, OmegaEstimate};
use indlab_core::randomness::stats::{self, monkey_report, Z_THRESHOLD};
use indlab_core::randomness::{TestReport, Verdict};
use indlab_core::sequence::{block_frequencies_with, Prefixes, WindowMode};
use indlab_core::SymbolString;
use rayon::prelude::*;
use serde::Serialize;

use super::{check_lines, parse_list, Global, Outcome};
use crate::error::{Error, Result};
use crate::report::{Check, SeriesPoint};
use crate::seqfile::{read_seq, FileSource};

#[derive(Debug, Args, Serialize)]
pub struct AnalyzeArgs {
    /// Sequence file (`seq/v1`).
    #[arg(long = "in", value_name = "PATH")]
    pub input: PathBuf,
    /// Any of borel, frequency, blocks, monkey.
    #[arg(long, default_value = "borel")]
    pub tests: String,
    #[arg(long, default_value_t = 3)]
    pub max_block: usize,
    /// z threshold for scored tests.
    #[arg(long, default_value_t = Z_THRESHOLD)]
    pub z: f64,
    /// Tolerance of the deterministic frequency test.
    #[arg(long, default_value_t = 0.05)]
    pub tolerance: f64,
    /// Monkey-search target, as digits.
    #[arg(long, default_value = "0110")]
    pub target: String,
    /// Count blocks on disjoint windows in the blocks table.
    #[arg(long)]
    pub disjoint: bool,
}

#[derive(Debug, Args, Serialize)]
pub struct KomplexityArgs {
    /// Binary sequence file.
    #[arg(long = "in", value_name = "PATH", required_unless_present = "count_n")]
    pub input: Option<PathBuf>,
    /// Exhaustive search over programs up to this length (0 turns it off).
    #[arg(long, default_value_t = 0)]
    pub exact_max_len: usize,
    #[arg(long, default_value_t = 10_000)]
    pub steps: u64,
    /// Margins `K_upper - N` at these prefix lengths.
    #[arg(long)]
    pub checkpoints: Option<String>,
    /// Count c-incompressible strings of this length instead.
    #[arg(long, conflicts_with = "input")]
    pub count_n: Option<usize>,
    #[arg(long, default_value_t = 1)]
    pub count_c: usize,
}

#[derive(Debug, Args, Serialize)]
pub struct OmegaArgs {
    #[arg(long, default_value_t = 16)]
    pub max_len: usize,
    #[arg(long, default_value_t = 10_000)]
    pub steps: u64,
    /// Include every halting program in the JSON report.
    #[arg(long)]
    pub log: bool,
}

fn test_check(r: &TestReport) -> Check {
    let mut label = r.test_name.clone();
    for key in ["block", "target"] {
        if let Some(v) = r.parameters.get(key) {
            label = format!("{label}[{v}]");
        }
    }
    let detail = match r.verdict {
        Verdict::Skipped => r.parameters.get("reason").cloned().unwrap_or_default(),
        _ => format!(
            "stat {:.6} expected {:.6} z {:+.3} (|z| <= {})",
            r.statistic, r.expected, r.z_score, r.threshold
        ),
    };
    Check {
        name: label,
        verdict: r.verdict,
        detail,
    }
}

pub(super) fn analyze(a: &AnalyzeArgs, _g: &Global) -> Result<Outcome> {
    let sigma = read_seq(&a.input)?;
    let mut o = Outcome::new("randlab/v1");
    o.inputs.push(a.input.clone());
    let mut reports: Vec<TestReport> = Vec::new();
    let mut tables = serde_json::Map::new();
    for t in a.tests.split(',').map(str::trim).filter(|t| !t.is_empty()) {
        match t {
            "borel" => reports.extend(stats::borel_with_threshold(&sigma, a.max_block, a.z)?),
            "frequency" => reports.extend(stats::frequency_deviation_test(&sigma, a.max_block, a.tolerance)?),
            "monkey" => {
                let target = SymbolString::from_digits(sigma.alphabet_size(), &a.target)?;
                let mut src = FileSource::new(sigma.clone());
                let hits = stats::monkey_search(&target, &mut src, sigma.len())?;
                reports.push(monkey_report(&target, hits.len(), sigma.len(), a.z));
            }
            "blocks" => {
                let mode = if a.disjoint {
                    WindowMode::Disjoint
                } else {
                    WindowMode::Overlapping
                };
                for l in 1..=a.max_block.min(sigma.len()) {
                    let f = block_frequencies_with(&sigma, l, mode)?;
                    let m: serde_json::Map<String, serde_json::Value> = f
                        .iter()
                        .map(|(b, p)| {
                            (
                                SymbolString::new(sigma.alphabet_size(), b)
                                    .map(|s| s.to_text())
                                    .unwrap_or_default(),
                                p.into(),
                            )
                        })
                        .collect();
                    tables.insert(format!("l{l}"), serde_json::Value::Object(m));
                }
            }
            other => {
                return Err(Error::Usage(format!(
                    "unknown test `{other}` (borel, frequency, blocks, monkey)"
                )))
            }
        }
    }
    o.checks = reports.iter().map(test_check).collect();
    o.series = reports
        .iter()
        .enumerate()
        .map(|(i, r)| SeriesPoint {
            series: format!("z:{}", r.test_name),
            x: i as f64,
            y: r.z_score,
        })
        .collect();
    o.summary = format!(
        "{}: {} symbols, base {}\n{}",
        a.input.display(),
        sigma.len(),
        sigma.alphabet_size(),
        check_lines(&o.checks)
    );
    o.result = serde_json::json!({ "n": sigma.len(), "alphabet_size": sigma.alphabet_size(), "tests": reports, "blocks": tables });
    Ok(o)
}

pub(super) fn komplexity(a: &KomplexityArgs, _g: &Global) -> Result<Outcome> {
    let mut o = Outcome::new("randlab/v1");
    if let Some(n) = a.count_n {
        let r = complexity::count_c_incompressible(n, a.count_c, a.steps)?;
        o.checks.push(Check::new(
            format!("counting_bound_n{n}_c{}", a.count_c),
            r.satisfies_bound(),
            format!("{} c-incompressible >= {}", r.count, r.lower_bound),
        ));
        o.summary = check_lines(&o.checks);
        o.result = serde_json::to_value(&r).expect("serialisable");
        return Ok(o);
    }
    let path = a.input.as_ref().expect("clap enforces --in");
    let sigma = read_seq(path)?;
    o.inputs.push(path.clone());
    let est = complexity::k_upper_bound(
        &sigma,
        Budget {
            max_len: a.exact_max_len,
            max_steps: a.steps,
        },
    )?;
    let mut summary = format!(
        "{}: {} bits; K <= {} ({:?}, {:?}{})\n",
        path.display(),
        sigma.len(),
        est.value,
        est.kind,
        est.method,
        est.generator.map(|g| format!(", {g}")).unwrap_or_default()
    );
    let exact = if a.exact_max_len > 0 {
        let e = complexity::exact_k_small(&sigma, a.exact_max_len, a.steps)?;
        summary += &match &e {
            ExactK::Found(f) => format!("  exhaustive search: {} bits ({:?})\n", f.value, f.kind),
            ExactK::NotFound { max_len, unresolved } => {
                format!("  no program of <= {max_len} bits found ({unresolved} timed out)\n")
            }
        };
        Some(match e {
            ExactK::Found(f) => serde_json::json!({ "found": f }),
            ExactK::NotFound { max_len, unresolved } => {
                serde_json::json!({ "not_found": { "max_len": max_len, "unresolved": unresolved } })
            }
        })
    } else {
        None
    };
    let mut margins = Vec::new();
    if let Some(cp) = &a.checkpoints {
        let cps: Vec<usize> = parse_list(cp, "checkpoint")?;
        let mut src = Prefixes::new(FileSource::new(sigma.clone()));
        margins = complexity::levin_chaitin_margin(&mut src, &cps)?;
        for m in &margins {
            summary += &format!("  N = {:>8}  K <= {:>8}  margin {:+}\n", m.n, m.k_upper, m.margin);
            o.series.push(SeriesPoint {
                series: "margin".into(),
                x: m.n as f64,
                y: m.margin as f64,
            });
        }
    }
    let witness: String = est.witness.iter().map(|&b| if b { '1' } else { '0' }).collect();
    o.result = serde_json::json!({
        "n": sigma.len(),
        "k_upper": est.value,
        "kind": est.kind,
        "method": est.method,
        "generator": est.generator,
        "witness": witness,
        "exact": exact,
        "margins": margins,
    });
    o.summary = summary;
    Ok(o)
}

/// Splits the program tree on its first bits and merges exactly.
pub(crate) fn omega_parallel(max_len: usize, steps: u64) -> Result<OmegaEstimate> {
    // every program is at least one 4-bit opcode long, so 4-bit prefixes
    // partition the tree
    let split = max_len.min(4);
    let parts: Vec<OmegaEstimate> = (0..1u32 << split)
        .into_par_iter()
        .map(|p| {
            let prefix: Vec<bool> = (0..split).rev().map(|i| p >> i & 1 == 1).collect();
            complexity::omega_subtree(&prefix, max_len, steps)
        })
        .collect::<indlab_core::Result<_>>()?;
    Ok(OmegaEstimate::merge(parts).expect("at least one part"))
}

pub(super) fn omega(a: &OmegaArgs, _g: &Global) -> Result<Outcome> {
    let est = omega_parallel(a.max_len, a.steps)?;
    let mut o = Outcome::new("randlab/v1");
    let lb = est.lower_bound;
    o.checks
        .push(Check::new("omega_positive", lb.numerator > 0, format!("{lb}")));
    o.checks.push(Check::new(
        "omega_below_one",
        lb.is_below_one(),
        format!("{:.12}", lb.to_f64()),
    ));
    let violation = est.prefix_violation();
    o.checks.push(Check::new(
        "prefix_free",
        violation.is_none(),
        match violation {
            Some((x, y)) => format!("{x:?} is a prefix of {y:?}"),
            None => format!("{} halting programs, no prefix pair", est.programs_found),
        },
    ));
    o.summary = format!(
        "Omega >= {lb} = {:.12} (max_len {}, {} steps, {} halting, {} timeouts)\n{}",
        lb.to_f64(),
        a.max_len,
        a.steps,
        est.programs_found,
        est.timeouts,
        check_lines(&o.checks)
    );
    let programs: Option<Vec<String>> = a.log.then(|| {
        est.halting_programs
            .iter()
            .map(|p| p.unpack().iter().map(|&b| if b { '1' } else { '0' }).collect())
            .collect()
    });
    o.result = serde_json::json!({
        "lower_bound": lb.to_string(),
        "lower_bound_f64": lb.to_f64(),
        "programs_found": est.programs_found,
        "timeouts": est.timeouts,
        "max_len": a.max_len,
        "max_steps": a.steps,
        "halting_programs": programs,
    });
    Ok(o)
}
