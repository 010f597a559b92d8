use std::path::PathBuf;

use clap::{Args, Subcommand, ValueEnum};
use indlab_core::bell::{
    self, BipartiteModel, LocalStrategy, MismatchFunctional, SettingSet, SettingsSampler, TrialRecord,
};
use indlab_core::randomness::stats::Z_THRESHOLD;
use indlab_core::randomness::{TestReport, Verdict};
use rayon::prelude::*;
use serde::Serialize;

use super::{check_lines, parse_list, seed_or_default, write_file, Global, Outcome};
use crate::bellio::{self, RunSidecar, SIDECAR_SCHEMA};
use crate::error::{Error, Result};
use crate::manifest::sha256_hex;
use crate::report::{Check, SeriesPoint};

/// Trials per parallel work item.
const TRIAL_CHUNK: u64 = 1 << 14;
/// Deviation allowed between the quantum law and a quantum-model run.
const LAW_SIGMAS: f64 = 6.0;

#[derive(Debug, Args, Serialize)]
pub struct BellArgs {
    #[command(subcommand)]
    pub cmd: BellCmd,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BellCmd {
    /// Generate trial records.
    Run(BellRunArgs),
    /// Estimate the functional and check locality assumptions.
    Analyze(BellAnalyzeArgs),
}

impl BellCmd {
    pub(super) fn name(&self) -> &'static str {
        match self {
            BellCmd::Run(_) => "run",
            BellCmd::Analyze(_) => "analyze",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelArg {
    Quantum,
    Hv,
    Signaling,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SettingsArg {
    Uniform,
    Fixed,
    Superdeterministic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum EnsembleArg {
    /// Strategies with identical responses on both wings, uniformly weighted.
    Correlated,
    /// Every strategy pair, uniformly weighted.
    All,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FunctionalArg {
    Default,
    Chsh,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ExpectArg {
    Violation,
    NoViolation,
    Any,
}

#[derive(Debug, Args, Serialize)]
pub struct BellRunArgs {
    #[arg(long, value_enum, default_value_t = ModelArg::Quantum)]
    pub model: ModelArg,
    /// Angles in degrees.
    #[arg(long, default_value = "0,30,60")]
    pub settings: String,
    #[arg(long, value_enum, default_value_t = SettingsArg::Uniform)]
    pub sampler: SettingsArg,
    /// Index pairs for the fixed sampler, e.g. `0:0,1:2`.
    #[arg(long)]
    pub pairs: Option<String>,
    #[arg(long, value_enum, default_value_t = EnsembleArg::Correlated)]
    pub ensemble: EnsembleArg,
    #[arg(long, default_value_t = 100_000)]
    pub n: u64,
}

#[derive(Debug, Args, Serialize)]
pub struct BellAnalyzeArgs {
    /// Records CSV; a `<file>.json` sidecar is read when present.
    #[arg(long = "in", value_name = "PATH")]
    pub input: PathBuf,
    #[arg(long, value_enum, default_value_t = FunctionalArg::Default)]
    pub functional: FunctionalArg,
    #[arg(long, value_enum, default_value_t = ExpectArg::Violation)]
    pub expect: ExpectArg,
}

fn ensemble(s: usize, kind: EnsembleArg) -> Result<BipartiteModel> {
    let full = 1u32 << s;
    let strategies: Vec<LocalStrategy> = match kind {
        EnsembleArg::Correlated => (0..full).map(|m| LocalStrategy { left: m, right: m }).collect(),
        EnsembleArg::All => {
            if s > 6 {
                return Err(Error::Usage(format!(
                    "the full ensemble over {s} settings is too large"
                )));
            }
            (0..full)
                .flat_map(|l| (0..full).map(move |r| LocalStrategy { left: l, right: r }))
                .collect()
        }
    };
    let w = 1.0 / strategies.len() as f64;
    Ok(BipartiteModel::Hidden {
        weights: vec![w; strategies.len()],
        strategies,
    })
}

/// Splits trials into fixed chunks; records are identical for every thread
/// count because each trial owns its slice of the random stream.
pub(crate) fn run_parallel(
    model: &BipartiteModel,
    settings: &SettingSet,
    sampler: &SettingsSampler,
    n: u64,
    seed: u64,
) -> Result<Vec<TrialRecord>> {
    if n == 0 {
        return Err(Error::Usage("need at least one trial".into()));
    }
    let chunks = n.div_ceil(TRIAL_CHUNK);
    let parts: Vec<Vec<TrialRecord>> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let start = c * TRIAL_CHUNK;
            bell::run_bipartite_range(model, settings, sampler, seed, start, TRIAL_CHUNK.min(n - start))
        })
        .collect::<indlab_core::Result<_>>()?;
    Ok(parts.concat())
}

pub(super) fn run(a: &BellArgs, g: &Global) -> Result<Outcome> {
    match &a.cmd {
        BellCmd::Run(r) => run_cmd(r, g),
        BellCmd::Analyze(r) => analyze(r, g),
    }
}

fn run_cmd(a: &BellRunArgs, g: &Global) -> Result<Outcome> {
    let settings = SettingSet::new(parse_list(&a.settings, "angle")?)?;
    let model = match a.model {
        ModelArg::Quantum => BipartiteModel::Quantum,
        ModelArg::Hv => ensemble(settings.len(), a.ensemble)?,
        ModelArg::Signaling => BipartiteModel::Signaling,
    };
    let sampler = match a.sampler {
        SettingsArg::Uniform => SettingsSampler::Uniform,
        SettingsArg::Superdeterministic => SettingsSampler::Superdeterministic,
        SettingsArg::Fixed => {
            let spec = a
                .pairs
                .as_deref()
                .ok_or_else(|| Error::Usage("the fixed sampler needs --pairs".into()))?;
            let pairs = spec
                .split(',')
                .map(|p| {
                    let (x, y) = p
                        .trim()
                        .split_once(':')
                        .ok_or_else(|| Error::Usage(format!("bad pair `{p}`")))?;
                    Ok((
                        x.parse().map_err(|_| Error::Usage(format!("bad pair `{p}`")))?,
                        y.parse().map_err(|_| Error::Usage(format!("bad pair `{p}`")))?,
                    ))
                })
                .collect::<Result<Vec<(usize, usize)>>>()?;
            SettingsSampler::Fixed(pairs)
        }
    };
    let seed = seed_or_default(g);
    let records = run_parallel(&model, &settings, &sampler, a.n, seed)?;
    let csv = bellio::records_to_csv(&records);
    let out = g
        .out
        .clone()
        .ok_or_else(|| Error::Usage("bell run writes records to --out".into()))?;
    write_file(&out, &csv)?;
    let side = RunSidecar {
        schema: SIDECAR_SCHEMA.into(),
        model: model.name().into(),
        settings: settings.angles().to_vec(),
        sampler: sampler.name().into(),
        n: a.n,
        seed,
        records_sha256: sha256_hex(&csv),
    };
    let side_path = bellio::sidecar_path(&out);
    write_file(
        &side_path,
        (serde_json::to_string_pretty(&side).expect("serialisable") + "\n").as_bytes(),
    )?;
    let mut o = Outcome::new("bellreport/v1");
    o.seeds.push(seed);
    o.outputs = vec![out.clone(), side_path];
    o.summary = format!(
        "{} trials of the {} model, settings {:?}, {} settings sampler -> {}\n",
        a.n,
        side.model,
        side.settings,
        side.sampler,
        out.display()
    );
    o.result = serde_json::to_value(&side).expect("serialisable");
    Ok(o)
}

fn report_check(r: &TestReport) -> Check {
    Check {
        name: r.test_name.clone(),
        verdict: r.verdict,
        detail: match r.verdict {
            Verdict::Skipped => r.parameters.get("reason").cloned().unwrap_or_default(),
            _ => format!("chi2 {:.2} on {} dof, z {:+.2}", r.statistic, r.expected, r.z_score),
        },
    }
}

fn skipped_on_shortage(name: &str, r: indlab_core::Result<TestReport>) -> Result<TestReport> {
    match r {
        Ok(t) => Ok(t),
        Err(indlab_core::Error::InvalidArgument(m)) => Ok(TestReport::skipped(name, &m)),
        Err(e) => Err(e.into()),
    }
}

fn analyze(a: &BellAnalyzeArgs, _g: &Global) -> Result<Outcome> {
    let bytes = std::fs::read(&a.input).map_err(|e| Error::io(&a.input, e))?;
    let records = bellio::records_from_csv(&bytes, &a.input)?;
    let side = bellio::read_sidecar(&a.input)?;
    let mut o = Outcome::new("bellreport/v1");
    o.inputs.push(a.input.clone());
    if let Some(s) = &side {
        o.inputs.push(bellio::sidecar_path(&a.input));
        if s.records_sha256 != sha256_hex(&bytes) {
            return Err(Error::Usage(format!(
                "{} does not match the digest in its sidecar",
                a.input.display()
            )));
        }
    }
    let settings = match &side {
        Some(s) => SettingSet::new(s.settings.clone())?,
        None => bell::settings_from_records(&records)?,
    };
    let functional = match a.functional {
        FunctionalArg::Default => MismatchFunctional::default_three(),
        FunctionalArg::Chsh => MismatchFunctional::chsh(),
    };
    let model_name = side.as_ref().map_or("unknown", |s| s.model.as_str()).to_string();
    let sampler_name = side.as_ref().map_or("unknown", |s| s.sampler.as_str()).to_string();

    let bound = bell::local_bound_bruteforce(&settings, &functional)?;
    let enumerated = match bell::local_bound_enumerate(&settings, &functional) {
        Ok(b) => Some(b),
        Err(indlab_core::Error::Capacity { .. }) => None,
        Err(e) => return Err(e.into()),
    };
    let quantum = bell::quantum_value(&settings, &functional)?;
    let est = bell::estimate_functional(&records, &settings, &functional)?;
    let z = if est.sigma > 0.0 {
        (est.value - bound.to_f64()) / est.sigma
    } else if est.value > bound.to_f64() {
        f64::INFINITY
    } else {
        0.0
    };
    let observed = z > Z_THRESHOLD;
    let detail = format!(
        "estimate {:.5} ± {:.5}, local bound {}, quantum {:.5}, z {:+.2}",
        est.value, est.sigma, bound.bound, quantum, z
    );
    if functional.is_degenerate() {
        o.checks
            .push(Check::skipped("violation", "functional has no nonzero coefficient"));
    } else {
        match a.expect {
            ExpectArg::Violation => o.checks.push(Check::new("violation", observed, detail.clone())),
            ExpectArg::NoViolation => o.checks.push(Check::new("no_violation", !observed, detail.clone())),
            ExpectArg::Any => o.checks.push(Check::skipped("violation", detail.clone())),
        }
    }

    o.checks.push(match &enumerated {
        Some(e) => Check::new(
            "local_bound_routes",
            e.bound == bound.bound,
            format!("separable search {} vs plain enumeration {}", bound.bound, e.bound),
        ),
        None => Check::skipped("local_bound_routes", "too many settings for plain enumeration"),
    });

    let pc = bell::perfect_correlation_violations(&records);
    let equal_trials = records.iter().filter(|r| r.a == r.b).count();
    if functional.perfect_correlation {
        o.checks.push(Check::new(
            "perfect_correlation",
            pc == 0,
            format!("{pc} mismatches in {equal_trials} equal-setting trials"),
        ));
    }

    let (alice, bob) = match bell::no_signaling_check(&records, &settings) {
        Ok(p) => p,
        Err(indlab_core::Error::InvalidArgument(m)) => (
            TestReport::skipped("no_signaling_alice", &m),
            TestReport::skipped("no_signaling_bob", &m),
        ),
        Err(e) => return Err(e.into()),
    };
    o.checks.push(report_check(&alice));
    o.checks.push(report_check(&bob));
    if records.iter().all(|r| r.lambda.is_some()) {
        let fc = skipped_on_shortage("free_choice", bell::free_choice_check(&records, &settings))?;
        o.checks.push(report_check(&fc));
    } else {
        o.checks
            .push(Check::skipped("free_choice", "records carry no hidden-state labels"));
    }

    let pairs = bell::pair_estimates(&records, &settings)?;
    if model_name == "quantum" {
        let worst = pairs.iter().map(|p| p.z.abs()).fold(0.0, f64::max);
        o.checks.push(Check::new(
            "sin2_law",
            worst <= LAW_SIGMAS,
            format!("worst pair |z| {worst:.2} (<= {LAW_SIGMAS})"),
        ));
    }
    for p in &pairs {
        o.series.push(SeriesPoint {
            series: format!("mismatch@{}-{}", p.a, p.b),
            x: p.trials as f64,
            y: p.mismatch,
        });
    }

    o.assumptions = assumptions(&model_name, &sampler_name);
    let mut s = format!(
        "{}: {} trials, model {}, settings {:?}\n  functional {}: {}\n",
        a.input.display(),
        records.len(),
        model_name,
        settings.angles(),
        functional.name,
        detail
    );
    for p in &pairs {
        s += &format!(
            "  P(a != b | {:>5}, {:>5}) = {:.4}  sin^2 = {:.4}  n = {}\n",
            p.a, p.b, p.mismatch, p.quantum, p.trials
        );
    }
    s += &check_lines(&o.checks);
    o.summary = s;
    o.result = serde_json::json!({
        "model": model_name,
        "sampler": sampler_name,
        "settings": settings.angles(),
        "functional": functional.name,
        "estimate": est.value,
        "sigma": est.sigma,
        "local_bound": bound.bound.to_string(),
        "local_bound_witness": bound.witness,
        "strategies": bound.strategies.to_string(),
        "feasible_strategies": bound.feasible.to_string(),
        "quantum_value": quantum,
        "violation_z": z,
        "violation_observed": observed,
        "perfect_correlation_mismatches": pc,
        "pairs": pairs,
        "no_signaling": [alice, bob],
    });
    Ok(o)
}

/// Which locality-theorem assumptions a run exercises or drops.
fn assumptions(model: &str, sampler: &str) -> Vec<String> {
    let mut v = Vec::new();
    match model {
        "quantum" => v.push("quantum predictions: sin^2 mismatch law with perfect correlation".to_string()),
        "hv" => v.push("determinism and local contextuality: local deterministic strategies".to_string()),
        "signaling" => v.push("local contextuality dropped: Alice's outcome depends on Bob's setting".to_string()),
        _ => v.push("model unknown (no sidecar)".to_string()),
    }
    match sampler {
        "uniform" | "fixed" => v.push("free choice: settings independent of each other and of λ".to_string()),
        "superdeterministic" => v.push("free choice dropped: settings computed from λ".to_string()),
        _ => {}
    }
    v
}
