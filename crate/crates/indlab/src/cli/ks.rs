use std::collections::BTreeMap;
use std::path::PathBuf;

use clap::{Args, Subcommand, ValueEnum};
use indlab_core::ks::{self, ColoringProblem, ColoringResult};
use serde::{Deserialize, Serialize};

use super::{check_lines, write_file, Global, Outcome};
use crate::data;
use crate::error::{Error, Result};
use crate::manifest::sha256_hex;
use crate::rays::parse_rays;
use crate::report::Check;

pub const COLORING_SCHEMA: &str = "coloring/v1";
pub const VALUE_MAP_SCHEMA: &str = "valuemap/v1";
const HEURISTIC: &str = "most-constrained-first";

#[derive(Debug, Args, Serialize)]
pub struct KsArgs {
    #[command(subcommand)]
    pub cmd: KsCmd,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum KsCmd {
    /// Search for a 0/1 colouring; report a certificate.
    Search(SearchArgs),
    /// Check a colouring or a per-basis value map.
    Verify(VerifyArgs),
    /// Check orthogonality and normalisation of every basis.
    Validate(RaysArg),
}

impl KsCmd {
    pub(super) fn name(&self) -> &'static str {
        match self {
            KsCmd::Search(_) => "search",
            KsCmd::Verify(_) => "verify",
            KsCmd::Validate(_) => "validate",
        }
    }
}

#[derive(Debug, Args, Serialize)]
pub struct RaysArg {
    /// Ray file, or the name of a bundled set (`peres33`, `demo`).
    #[arg(long, default_value = "peres33")]
    pub rays: String,
    /// Drop the at-most-one constraint on orthogonal pairs outside bases.
    #[arg(long)]
    pub no_pairs: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ExpectSat {
    Sat,
    Unsat,
}

#[derive(Debug, Args, Serialize)]
pub struct SearchArgs {
    #[command(flatten)]
    pub rays: RaysArg,
    /// Count every colouring instead of stopping at the first.
    #[arg(long)]
    pub count: bool,
    #[arg(long, value_enum)]
    pub expect: Option<ExpectSat>,
    /// Write a found colouring in the `coloring/v1` format.
    #[arg(long, value_name = "PATH")]
    pub coloring_out: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub rays: RaysArg,
    /// `{"schema":"coloring/v1","values":{"ray":0|1}}`; missing rays are unset.
    #[arg(long, value_name = "PATH", conflicts_with = "value_map")]
    pub coloring: Option<PathBuf>,
    /// `{"schema":"valuemap/v1","bases":{"basis":[0,1,1]}}`.
    #[arg(long, value_name = "PATH")]
    pub value_map: Option<PathBuf>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct ColoringFile {
    pub schema: String,
    pub values: BTreeMap<String, u8>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct ValueMapFile {
    pub schema: String,
    pub bases: BTreeMap<String, [Option<u8>; 3]>,
}

struct Loaded {
    problem: ColoringProblem,
    origin: data::Origin,
    digest: String,
}

fn load(a: &RaysArg) -> Result<Loaded> {
    let (text, origin) = data::resolve(&a.rays)?;
    let mut problem = parse_rays(&text)?;
    if a.no_pairs {
        problem.pairs.clear();
    }
    Ok(Loaded {
        problem,
        digest: sha256_hex(text.as_bytes()),
        origin,
    })
}

fn base_outcome(l: &Loaded) -> Outcome {
    let mut o = Outcome::new("ks/v1");
    if let Some(p) = l.origin.path() {
        o.inputs.push(p.to_path_buf());
    }
    o
}

pub(super) fn run(a: &KsArgs, g: &Global) -> Result<Outcome> {
    match &a.cmd {
        KsCmd::Search(s) => search(s, g),
        KsCmd::Verify(v) => verify(v),
        KsCmd::Validate(r) => validate(r),
    }
}

fn validate(a: &RaysArg) -> Result<Outcome> {
    let l = load(a)?;
    let mut o = base_outcome(&l);
    let v = ks::validate_problem(&l.problem)?;
    o.checks.push(Check::new(
        "bases_orthonormal",
        true,
        format!("{} bases of mutually orthogonal rays", v.bases),
    ));
    o.summary = format!(
        "{}: {} rays, {} bases, {} orthogonal pairs, {} exact rays, max norm defect {:.1e}\n",
        l.origin.describe(),
        v.rays,
        v.bases,
        v.orthogonal_pairs,
        v.exact_rays,
        v.max_norm_defect
    ) + &check_lines(&o.checks);
    o.result = serde_json::json!({
        "source": l.origin.describe(),
        "problem_sha256": l.digest,
        "validation": v,
    });
    Ok(o)
}

fn search(a: &SearchArgs, g: &Global) -> Result<Outcome> {
    let l = load(&a.rays)?;
    let mut o = base_outcome(&l);
    let v = ks::validate_problem(&l.problem)?;
    let p = &l.problem;
    let result = ks::search_coloring(p);
    let stats = result.stats();
    let count = a.count.then(|| ks::count_colorings(p));
    let sat = !result.is_unsat();
    let status = if sat { "sat" } else { "unsat" };

    let mut coloring = None;
    if let ColoringResult::Colored { assignment, .. } = &result {
        if !ks::verify_total(p, assignment) {
            return Err(Error::Usage("search returned an invalid colouring".into()));
        }
        let file = ColoringFile {
            schema: COLORING_SCHEMA.into(),
            values: p
                .ray_names
                .iter()
                .cloned()
                .zip(assignment.iter().map(|&b| u8::from(b)))
                .collect(),
        };
        if let Some(path) = &a.coloring_out {
            let text = serde_json::to_string_pretty(&file).expect("serialisable") + "\n";
            write_file(path, text.as_bytes())?;
            o.outputs.push(path.clone());
        }
        coloring = Some(file);
    }
    if let Some(e) = a.expect {
        let want = e == ExpectSat::Sat;
        o.checks.push(Check::new(
            "expected_status",
            want == sat,
            format!("expected {}, found {status}", if want { "sat" } else { "unsat" }),
        ));
    }
    if let Some((n, _)) = count {
        o.checks.push(Check::new(
            "count_consistent",
            (n > 0) == sat,
            format!("{n} colourings"),
        ));
    }
    let mut s = format!(
        "{}: {} rays, {} bases, {} pair constraints\n  {status} after {} nodes, {} backtracks, depth {} ({HEURISTIC})\n",
        l.origin.describe(),
        v.rays,
        v.bases,
        p.pairs.len(),
        stats.nodes,
        stats.backtracks,
        stats.max_depth
    );
    if let Some((n, cs)) = count {
        s += &format!("  {n} colourings ({} nodes)\n", cs.nodes);
    }
    s += &check_lines(&o.checks);
    o.summary = s;
    o.result = serde_json::json!({
        "source": l.origin.describe(),
        "problem_sha256": l.digest,
        "rays": v.rays,
        "bases": v.bases,
        "pair_constraints": p.pairs.len(),
        "status": status,
        "heuristic": HEURISTIC,
        "stats": stats,
        "count": count.map(|c| c.0),
        "coloring": coloring,
    });
    if let Some(path) = &g.out {
        let text = serde_json::to_string_pretty(&o.result).expect("serialisable") + "\n";
        write_file(path, text.as_bytes())?;
        o.outputs.push(path.clone());
    }
    Ok(o)
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &std::path::Path, schema: &str) -> Result<T> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let v: serde_json::Value = serde_json::from_str(&text).map_err(|e| Error::json(path.display().to_string(), e))?;
    let found = v.get("schema").and_then(|s| s.as_str()).unwrap_or("").to_string();
    if found != schema {
        return Err(Error::Schema {
            context: path.display().to_string(),
            found,
            expected: schema.into(),
        });
    }
    let t = serde_json::from_value(v).map_err(|e| Error::json(path.display().to_string(), e))?;
    Ok(t)
}

fn verify(a: &VerifyArgs) -> Result<Outcome> {
    let l = load(&a.rays)?;
    let mut o = base_outcome(&l);
    let p = &l.problem;
    match (&a.coloring, &a.value_map) {
        (Some(path), None) => {
            let f = read_json::<ColoringFile>(path, COLORING_SCHEMA)?;
            o.inputs.push(path.clone());
            let mut assignment = vec![None; p.rays.len()];
            for (name, v) in &f.values {
                let i = p
                    .ray_names
                    .iter()
                    .position(|n| n == name)
                    .ok_or_else(|| Error::Usage(format!("{}: unknown ray {name}", path.display())))?;
                if *v > 1 {
                    return Err(Error::Usage(format!("{}: ray {name} has value {v}", path.display())));
                }
                assignment[i] = Some(*v == 1);
            }
            let assigned = assignment.iter().filter(|x| x.is_some()).count();
            let ok = ks::verify_coloring(p, &assignment)?;
            o.checks.push(Check::new(
                "coloring_valid",
                ok,
                format!("{assigned} of {} rays assigned", p.rays.len()),
            ));
            o.result = serde_json::json!({
                "source": l.origin.describe(),
                "problem_sha256": l.digest,
                "kind": "coloring",
                "assigned": assigned,
                "valid": ok,
            });
        }
        (None, Some(path)) => {
            let f = read_json::<ValueMapFile>(path, VALUE_MAP_SCHEMA)?;
            o.inputs.push(path.clone());
            let mut map = vec![[None; 3]; p.bases.len()];
            for (name, vals) in &f.bases {
                let i = p
                    .basis_names
                    .iter()
                    .position(|n| n == name)
                    .ok_or_else(|| Error::Usage(format!("{}: unknown basis {name}", path.display())))?;
                map[i] = *vals;
            }
            let r = ks::fwt_reduction_check(p, &map)?;
            let detail = match (&r.violation, r.induced_coloring_valid) {
                (Some(v), _) => format!(
                    "ray {} reads {} in {} and {} in {}",
                    v.ray, v.first_value, v.first_basis, v.second_value, v.second_basis
                ),
                (None, Some(true)) => "basis-independent and a valid colouring".into(),
                (None, _) => "basis-independent but the induced colouring is invalid".into(),
            };
            o.checks.push(Check::new("value_map_consistent", r.passed(), detail));
            o.result = serde_json::json!({
                "source": l.origin.describe(),
                "problem_sha256": l.digest,
                "kind": "value_map",
                "fwt": r,
            });
        }
        _ => {
            return Err(Error::Usage(
                "ks verify needs exactly one of --coloring or --value-map".into(),
            ))
        }
    }
    o.summary = format!("{}\n", l.origin.describe()) + &check_lines(&o.checks);
    Ok(o)
}
