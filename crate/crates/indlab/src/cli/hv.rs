use std::path::{Path, PathBuf};

use clap::{Args, Subcommand, ValueEnum};
use indlab_core::hv::{self, HVModel, Sampler, DEFAULT_FLAG_MARGIN};
use indlab_core::SymbolString;
use serde::Serialize;

use super::{check_lines, parse_list, seed_or_default, write_file, Global, Outcome};
use crate::data;
use crate::error::{Error, Result};
use crate::hvfile::{parse_model, SamplerSpec};
use crate::report::{Check, SeriesPoint};
use crate::seqfile::format_seq;

#[derive(Debug, Args, Serialize)]
pub struct HvArgs {
    #[command(subcommand)]
    pub cmd: HvCmd,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum HvCmd {
    /// Print `x_i = g(h(i))`.
    Run(HvRunArgs),
    /// Scenario one: compressibility of `x` when `h` is part of the theory.
    Audit1(Audit1Args),
    /// Scenario two: `h` samples μ_ψ from outside the theory.
    Audit2(Audit2Args),
}

impl HvCmd {
    pub(super) fn name(&self) -> &'static str {
        match self {
            HvCmd::Run(_) => "run",
            HvCmd::Audit1(_) => "audit1",
            HvCmd::Audit2(_) => "audit2",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SamplerArg {
    /// The sampler declared in the model file (counter if none).
    Model,
    Counter,
    Prng,
    Os,
    Recorded,
}

#[derive(Debug, Args, Serialize)]
pub struct ModelSel {
    /// Model file (`hv/v1`) or bundled name (bohm_coin, thooft_parity).
    #[arg(long)]
    pub model: String,
    #[arg(long, value_enum, default_value_t = SamplerArg::Model)]
    pub sampler: SamplerArg,
    /// λ-trace (`seq/v1`) for the recorded sampler.
    #[arg(long)]
    pub trace: Option<PathBuf>,
    /// Sampler weights overriding μ_ψ, e.g. `0.6,0.4`.
    #[arg(long)]
    pub weights: Option<String>,
    #[arg(long, default_value_t = 0)]
    pub start: u32,
    #[arg(long, default_value_t = 1)]
    pub step: u32,
}

#[derive(Debug, Args, Serialize)]
pub struct HvRunArgs {
    #[command(flatten)]
    pub sel: ModelSel,
    #[arg(long)]
    pub n: usize,
    /// Also write the λ-trace as `seq/v1`.
    #[arg(long)]
    pub trace_out: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct Audit1Args {
    #[command(flatten)]
    pub sel: ModelSel,
    #[arg(long, default_value_t = 10_000)]
    pub n: usize,
    /// Ascending prefix lengths; defaults to N/100, N/10, N.
    #[arg(long)]
    pub checkpoints: Option<String>,
    #[arg(long, default_value_t = DEFAULT_FLAG_MARGIN, allow_negative_numbers = true)]
    pub flag_margin: i64,
}

#[derive(Debug, Args, Serialize)]
pub struct Audit2Args {
    #[command(flatten)]
    pub sel: ModelSel,
    #[arg(long, default_value_t = 100_000)]
    pub n: usize,
    #[arg(long, default_value_t = 6.0)]
    pub sigmas: f64,
}

pub(crate) struct Loaded {
    pub model: HVModel,
    pub declared: Option<SamplerSpec>,
    pub origin: data::Origin,
}

pub(crate) fn load_model(name: &str) -> Result<Loaded> {
    let (text, origin) = data::resolve(name)?;
    let f = parse_model(&text, &origin.describe())?;
    Ok(Loaded {
        model: f.model,
        declared: f.sampler,
        origin,
    })
}

fn build_sampler(sel: &ModelSel, l: &Loaded, seed: u64) -> Result<(Sampler, Vec<u64>, Option<PathBuf>)> {
    let weights = sel
        .weights
        .as_deref()
        .map(|w| parse_list::<f64>(w, "weight"))
        .transpose()?;
    let base = l.origin.path().and_then(Path::parent);
    let spec = match sel.sampler {
        SamplerArg::Model => l.declared.clone().unwrap_or(SamplerSpec::Counter { start: 0, step: 1 }),
        SamplerArg::Counter => SamplerSpec::Counter {
            start: sel.start,
            step: sel.step,
        },
        SamplerArg::Prng => SamplerSpec::SeededPrng { seed, weights: None },
        SamplerArg::Os => SamplerSpec::OsEntropy,
        SamplerArg::Recorded => SamplerSpec::Recorded {
            path: sel
                .trace
                .clone()
                .ok_or_else(|| Error::Usage("the recorded sampler needs --trace".into()))?,
            provenance: String::new(),
        },
    };
    let spec = match (spec, weights) {
        (SamplerSpec::SeededPrng { seed, .. }, Some(w)) => SamplerSpec::SeededPrng { seed, weights: Some(w) },
        (_, Some(_)) => return Err(Error::Usage("--weights applies to the prng sampler only".into())),
        (s, None) => s,
    };
    let seeds = match &spec {
        SamplerSpec::SeededPrng { seed, .. } => vec![*seed],
        _ => vec![],
    };
    // traces named on the command line resolve against the working directory
    let resolve_base = if sel.sampler == SamplerArg::Model { base } else { None };
    let trace = match &spec {
        SamplerSpec::Recorded { path, .. } => Some(match resolve_base {
            Some(b) if path.is_relative() => b.join(path),
            _ => path.clone(),
        }),
        _ => None,
    };
    Ok((spec.build(&l.model, resolve_base)?, seeds, trace))
}

fn inputs_of(l: &Loaded, trace: Option<PathBuf>) -> Vec<PathBuf> {
    l.origin
        .path()
        .map(Path::to_path_buf)
        .into_iter()
        .chain(trace)
        .collect()
}

pub(super) fn run(a: &HvArgs, g: &Global) -> Result<Outcome> {
    match &a.cmd {
        HvCmd::Run(r) => run_cmd(r, g),
        HvCmd::Audit1(r) => audit1(r, g),
        HvCmd::Audit2(r) => audit2(r, g),
    }
}

fn run_cmd(a: &HvRunArgs, g: &Global) -> Result<Outcome> {
    let l = load_model(&a.sel.model)?;
    let (mut h, seeds, trace) = build_sampler(&a.sel, &l, seed_or_default(g))?;
    let mut o = Outcome::new("hvreport/v1");
    o.seeds = seeds;
    o.nondeterministic = matches!(h, Sampler::External(_));
    o.inputs = inputs_of(&l, trace);
    let (x, lambdas) = hv::run_model_traced(&l.model, &mut h, a.n)?;
    let text = format_seq(&x);
    match &g.out {
        Some(p) => {
            write_file(p, text.as_bytes())?;
            o.outputs.push(p.clone());
        }
        None => o.stdout_artifact = Some(text),
    }
    if let Some(p) = &a.trace_out {
        let t = SymbolString::new(l.model.states().max(2), lambdas)?;
        write_file(p, format_seq(&t).as_bytes())?;
        o.outputs.push(p.clone());
    }
    o.summary = format!(
        "{}: {} outcomes via {} [{}]\n  prefix {}\n",
        l.model.name,
        x.len(),
        h.kind(),
        h.provenance(),
        x.prefix(x.len().min(64)).to_text()
    );
    o.result = serde_json::json!({
        "model": l.model.name,
        "sampler_kind": h.kind(),
        "provenance": h.provenance(),
        "n": x.len(),
        "pushforward_defect": l.model.pushforward_defect(),
        "sha256": crate::manifest::sha256_hex(format_seq(&x).as_bytes()),
    });
    Ok(o)
}

fn audit1(a: &Audit1Args, g: &Global) -> Result<Outcome> {
    let l = load_model(&a.sel.model)?;
    let (h, seeds, trace) = build_sampler(&a.sel, &l, seed_or_default(g))?;
    let checkpoints: Vec<usize> = match &a.checkpoints {
        Some(c) => parse_list(c, "checkpoint")?,
        None => {
            let mut c: Vec<usize> = [a.n / 100, a.n / 10, a.n].into_iter().filter(|&x| x > 0).collect();
            c.dedup();
            c
        }
    };
    let r = hv::scenario_one_audit(&l.model, &h, &checkpoints, a.flag_margin)?;
    let mut o = Outcome::new("hvreport/v1");
    o.seeds = seeds;
    o.inputs = inputs_of(&l, trace);
    o.assumptions = vec![
        "hidden-variable determinism with h supplied by the theory (deterministic, computable)".into(),
        "outcome sequence claimed 1-random as the Born rule requires".into(),
    ];
    let last = r.points.last().expect("non-empty");
    o.checks.push(Check::new(
        "compatible_with_randomness",
        !r.incompatible_with_randomness,
        format!(
            "margin {:+} bits at N = {} (flag at <= {})",
            last.margin, last.n, r.flag_margin
        ),
    ));
    o.checks.push(Check::new(
        "pushforward_matches_born",
        r.pushforward_defect <= hv::MEASURE_TOLERANCE,
        format!("sup defect {:.3e}", r.pushforward_defect),
    ));
    for p in &r.points {
        o.series.push(SeriesPoint {
            series: "margin".into(),
            x: p.n as f64,
            y: p.margin as f64,
        });
    }
    let mut s = format!(
        "{} with {}: model {} bits, sampler {} bits\n",
        r.model, r.sampler, r.model_bits, r.sampler_bits
    );
    for p in &r.points {
        s += &format!(
            "  N = {:>8}  K <= {:>6} ({:?})  a priori <= {:>4}  margin {:+}\n",
            p.n, p.k_upper, p.method, p.a_priori_bound, p.margin
        );
    }
    s += &check_lines(&o.checks);
    o.summary = s;
    o.result = serde_json::to_value(&r).expect("serialisable");
    Ok(o)
}

fn audit2(a: &Audit2Args, g: &Global) -> Result<Outcome> {
    let l = load_model(&a.sel.model)?;
    let sel_is_model = a.sel.sampler == SamplerArg::Model && l.declared.is_none();
    let (mut h, seeds, trace) = if sel_is_model {
        // no declared sampler: scenario two defaults to seeded sampling of μ_ψ
        let spec = ModelSel {
            model: a.sel.model.clone(),
            sampler: SamplerArg::Prng,
            trace: None,
            weights: a.sel.weights.clone(),
            start: 0,
            step: 1,
        };
        build_sampler(&spec, &l, seed_or_default(g))?
    } else {
        build_sampler(&a.sel, &l, seed_or_default(g))?
    };
    let r = hv::scenario_two_audit(&l.model, &mut h, a.n, a.sigmas)?;
    let mut o = Outcome::new("hvreport/v1");
    o.seeds = seeds;
    o.nondeterministic = matches!(h, Sampler::External(_));
    o.inputs = inputs_of(&l, trace);
    o.assumptions = vec![format!(
        "h supplied from outside the theory ({}), required to sample the Born measure",
        r.sampler_kind
    )];
    let worst =
        |cells: &[indlab_core::randomness::TestReport]| cells.iter().map(|c| c.z_score.abs()).fold(0.0, f64::max);
    o.checks.push(Check::new(
        "sampling_contract",
        r.sampling_ok,
        format!("worst λ-cell |z| {:.2} (<= {})", worst(&r.lambda_cells), r.sigmas),
    ));
    o.checks.push(Check::new(
        "pushforward_frequencies",
        r.pushforward_ok,
        format!("worst outcome |z| {:.2} (<= {})", worst(&r.outcome_cells), r.sigmas),
    ));
    o.summary = format!(
        "{}: n = {}, sampler {} [{}], randomness external: {}\n{}",
        r.model,
        r.n,
        r.sampler_kind,
        r.provenance,
        r.randomness_external,
        check_lines(&o.checks)
    );
    o.result = serde_json::to_value(&r).expect("serialisable");
    Ok(o)
}
