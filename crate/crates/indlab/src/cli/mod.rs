//! Command-line front end. [`run`] returns the process exit code: 0 on
//! success, 2 when a statistical or logical check fails, 1 on usage and
//! I/O errors.

mod bell;
mod hv;
mod ks;
mod rand;
mod seq;

use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::manifest::{self, RunManifest};
use crate::report::{self, Check, Envelope, SeriesPoint, Status};

pub use bell::{BellArgs, BellCmd};
pub use hv::{HvArgs, HvCmd};
pub use ks::{KsArgs, KsCmd};
pub use rand::{AnalyzeArgs, KomplexityArgs, OmegaArgs};
pub use seq::GenerateArgs;

#[derive(Debug, Parser)]
#[command(
    name = "indlab",
    version,
    about = "Born-rule sampling, randomness audits, Bell and Kochen-Specker checks"
)]
pub struct Cli {
    #[command(flatten)]
    pub global: Global,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct Global {
    /// Write a JSON report here, also on failure.
    #[arg(long, global = true, value_name = "PATH")]
    pub json: Option<PathBuf>,
    /// Primary output artifact.
    #[arg(long, global = true, value_name = "PATH")]
    pub out: Option<PathBuf>,
    /// Seed for every stochastic step.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker cap; results do not depend on it.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Manifest path; defaults to `<out>.manifest.json`, else stderr.
    #[arg(long, global = true, value_name = "PATH")]
    pub manifest: Option<PathBuf>,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Command {
    /// Write a sequence from a reference generator or sampler.
    Generate(GenerateArgs),
    /// Frequency, block and monkey tests on a sequence file.
    Analyze(AnalyzeArgs),
    /// Complexity bounds, exact search and margins on the toy machine.
    Komplexity(KomplexityArgs),
    /// Halting-probability lower bound by budgeted enumeration.
    Omega(OmegaArgs),
    /// Hidden-variable models: runs and the two sampling audits.
    Hv(HvArgs),
    /// Bipartite experiment: generate records and analyse them.
    Bell(BellArgs),
    /// Ray sets: validation, colouring search and verification.
    Ks(KsArgs),
    /// Consolidate JSON reports into a summary.
    Report(ReportArgs),
}

#[derive(Debug, Args, Serialize)]
pub struct ReportArgs {
    /// JSON reports to consolidate.
    pub inputs: Vec<PathBuf>,
    /// CSV of every numeric series in the inputs.
    #[arg(long, value_name = "PATH")]
    pub plot_data: Option<PathBuf>,
}

/// What a command produced, before it is rendered.
#[derive(Debug, Default)]
pub struct Outcome {
    pub schema: &'static str,
    pub result: serde_json::Value,
    pub checks: Vec<Check>,
    pub series: Vec<SeriesPoint>,
    pub assumptions: Vec<String>,
    pub summary: String,
    pub inputs: Vec<PathBuf>,
    pub outputs: Vec<PathBuf>,
    pub seeds: Vec<u64>,
    pub nondeterministic: bool,
    /// Artifact text destined for stdout when no `--out` is given.
    pub stdout_artifact: Option<String>,
}

impl Outcome {
    fn new(schema: &'static str) -> Self {
        Outcome {
            schema,
            ..Default::default()
        }
    }
}

impl Command {
    fn name(&self) -> String {
        match self {
            Command::Generate(_) => "generate".into(),
            Command::Analyze(_) => "analyze".into(),
            Command::Komplexity(_) => "komplexity".into(),
            Command::Omega(_) => "omega".into(),
            Command::Hv(a) => format!("hv {}", a.cmd.name()),
            Command::Bell(a) => format!("bell {}", a.cmd.name()),
            Command::Ks(a) => format!("ks {}", a.cmd.name()),
            Command::Report(_) => "report".into(),
        }
    }

    fn schema(&self) -> &'static str {
        match self {
            Command::Generate(_) => "seqgen/v1",
            Command::Analyze(_) | Command::Komplexity(_) | Command::Omega(_) => "randlab/v1",
            Command::Hv(_) => "hvreport/v1",
            Command::Bell(_) => "bellreport/v1",
            Command::Ks(_) => "ks/v1",
            Command::Report(_) => "summary/v1",
        }
    }
}

fn dispatch(cli: &Cli) -> Result<Outcome> {
    let g = &cli.global;
    match &cli.command {
        Command::Generate(a) => seq::generate(a, g),
        Command::Analyze(a) => rand::analyze(a, g),
        Command::Komplexity(a) => rand::komplexity(a, g),
        Command::Omega(a) => rand::omega(a, g),
        Command::Hv(a) => hv::run(a, g),
        Command::Bell(a) => bell::run(a, g),
        Command::Ks(a) => ks::run(a, g),
        Command::Report(a) => run_report(a, g),
    }
}

fn run_report(a: &ReportArgs, g: &Global) -> Result<Outcome> {
    if a.inputs.is_empty() {
        return Err(Error::Usage("report needs at least one JSON report".into()));
    }
    let mut envs = Vec::new();
    for p in &a.inputs {
        let text = std::fs::read_to_string(p).map_err(|e| Error::io(p, e))?;
        envs.push((p.clone(), report::parse_envelope(&text, &p.display().to_string())?));
    }
    let s = report::consolidate(envs)?;
    let mut o = Outcome::new("summary/v1");
    if let Some(p) = &a.plot_data {
        write_file(p, s.plot_csv.as_bytes())?;
        o.outputs.push(p.clone());
    }
    if let Some(p) = &g.out {
        write_file(p, s.text.as_bytes())?;
        o.outputs.push(p.clone());
    }
    o.inputs = a.inputs.clone();
    o.checks.push(Check::new(
        "inputs_passed",
        !s.any_failed,
        if s.any_failed {
            "at least one input failed"
        } else {
            "no input failed"
        },
    ));
    o.result = serde_json::json!({ "reports": a.inputs.len(), "summary": s.text });
    o.summary = s.text;
    Ok(o)
}

pub(crate) fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    std::fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

pub(crate) fn seed_or_default(g: &Global) -> u64 {
    g.seed.unwrap_or(0)
}

fn write_json(path: &Path, env: &Envelope) -> Result<()> {
    let text = serde_json::to_string_pretty(env).expect("report serialises") + "\n";
    write_file(path, text.as_bytes())
}

/// Runs the CLI on `argv` (including the program name) and returns the exit
/// code. Output goes to stdout and stderr.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let argv: Vec<std::ffi::OsString> = argv.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&argv) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return code;
        }
    };
    let start = Instant::now();
    let outcome = match cli.global.threads {
        Some(0) => Err(Error::Usage("--threads must be at least 1".into())),
        Some(t) => match rayon::ThreadPoolBuilder::new().num_threads(t).build() {
            Ok(pool) => pool.install(|| dispatch(&cli)),
            Err(e) => Err(Error::Usage(format!("thread pool: {e}"))),
        },
        None => dispatch(&cli),
    };
    let wall_time_ms = start.elapsed().as_secs_f64() * 1e3;
    finish(&cli, &argv, outcome, wall_time_ms)
}

fn finish(cli: &Cli, argv: &[std::ffi::OsString], outcome: Result<Outcome>, wall_time_ms: f64) -> i32 {
    let g = &cli.global;
    let (status, error, o) = match outcome {
        Ok(o) => (Status::from_checks(&o.checks), None, o),
        Err(e) => (Status::Error, Some(e.to_string()), Outcome::new(cli.command.schema())),
    };
    let code = status.exit_code();

    match &o.stdout_artifact {
        Some(a) => {
            print!("{a}");
            eprint!("{}", o.summary);
        }
        None => print!("{}", o.summary),
    }
    if let Some(e) = &error {
        eprintln!("error: {e}");
    }

    let mut outputs = o.outputs.clone();
    outputs.sort();
    outputs.dedup();
    let manifest = RunManifest {
        schema: manifest::SCHEMA.into(),
        tool_version: env!("CARGO_PKG_VERSION").into(),
        subcommand: cli.command.name(),
        argv: argv.iter().skip(1).map(|s| s.to_string_lossy().into_owned()).collect(),
        parameters: serde_json::to_value(&cli.command).unwrap_or_default(),
        seeds: o.seeds.clone(),
        deterministic: !o.nondeterministic,
        inputs: manifest::digest_existing(&o.inputs).unwrap_or_default(),
        outputs: manifest::digest_existing(&outputs).unwrap_or_default(),
        wall_time_ms,
        exit_code: code,
    };
    let manifest_text = serde_json::to_string_pretty(&manifest).expect("manifest serialises") + "\n";
    let manifest_path = g.manifest.clone().or_else(|| {
        g.out.as_ref().map(|p| {
            let mut s = p.as_os_str().to_owned();
            s.push(".manifest.json");
            PathBuf::from(s)
        })
    });
    let mut code = code;
    match &manifest_path {
        Some(p) => {
            if let Err(e) = write_file(p, manifest_text.as_bytes()) {
                eprintln!("error: {e}");
                code = 1;
            }
        }
        None if g.json.is_none() => eprintln!(
            "manifest: {}",
            serde_json::to_string(&manifest).expect("manifest serialises")
        ),
        None => {}
    }
    if let Some(p) = &g.json {
        let env = Envelope {
            schema: o.schema.to_string(),
            subcommand: cli.command.name(),
            status,
            exit_code: code,
            error,
            result: o.result,
            checks: o.checks,
            series: o.series,
            assumptions: o.assumptions,
            manifest,
        };
        if let Err(e) = write_json(p, &env) {
            eprintln!("error: {e}");
            code = 1;
        }
    }
    code
}

/// Comma-separated list parser shared by several flags.
pub(crate) fn parse_list<T: std::str::FromStr>(s: &str, what: &str) -> Result<Vec<T>> {
    s.split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(|t| t.parse().map_err(|_| Error::Usage(format!("bad {what} `{t}`"))))
        .collect()
}

pub(crate) fn check_lines(checks: &[Check]) -> String {
    let width = checks.iter().map(|c| c.name.len()).max().unwrap_or(0);
    checks
        .iter()
        .map(|c| {
            let v = match c.verdict {
                indlab_core::randomness::Verdict::Pass => "PASS",
                indlab_core::randomness::Verdict::Fail => "FAIL",
                indlab_core::randomness::Verdict::Skipped => "SKIP",
            };
            format!("  {:<width$}  {v}  {}\n", c.name, c.detail)
        })
        .collect()
}
