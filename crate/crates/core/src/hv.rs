//! Hidden-variable models `x = g ∘ h`: a state space Λ, an outcome map
//! `g`, a compatibility measure μ_ψ on Λ and a sampler `h`.

use alloc::boxed::Box;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::born::linalg::C64;
use crate::error::{Error, Result};
use crate::invalid;
use crate::randomness::complexity::{k_upper_bound, witness_steps, Budget, ComplexityEstimate, Method};
use crate::randomness::machine::{self, programs};
use crate::randomness::stats::{cell_frequency_tests, TestReport};
use crate::rng::{cumulative, pick, ChunkedUniform};
use crate::sequence::SymbolString;

/// Tolerance on normalisation of measures over Λ.
pub const MEASURE_TOLERANCE: f64 = 1e-10;
/// Tolerance on wavefunction and coefficient normalisation.
pub const NORM_TOLERANCE: f64 = 1e-8;
/// Additive constant in `K(x_N) <= desc + 2⌈log₂ N⌉ + C_MACHINE`.
pub const C_MACHINE: usize = 22;
/// Default margin at or below which scenario one flags incompatibility.
pub const DEFAULT_FLAG_MARGIN: i64 = -64;
/// Minimum sample size for scenario two.
pub const SCENARIO_TWO_MIN_N: usize = 10_000;

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(tag = "kind", rename_all = "snake_case"))]
pub enum HVSpace {
    Discrete { states: u32, labels: Vec<String> },
    IntervalDiscretized { bins: u32, range: (f64, f64) },
}

impl HVSpace {
    pub fn discrete(states: u32) -> Result<Self> {
        let s = HVSpace::Discrete {
            states,
            labels: Vec::new(),
        };
        s.validate()?;
        Ok(s)
    }

    pub fn interval(bins: u32, range: (f64, f64)) -> Result<Self> {
        let s = HVSpace::IntervalDiscretized { bins, range };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            HVSpace::Discrete { states, labels } => {
                if *states == 0 {
                    return Err(invalid!("hidden-state space needs at least one state"));
                }
                if !labels.is_empty() && labels.len() != *states as usize {
                    return Err(invalid!("{} labels for {states} states", labels.len()));
                }
            }
            HVSpace::IntervalDiscretized { bins, range } => {
                if *bins == 0 {
                    return Err(invalid!("need at least one bin"));
                }
                if !(range.0 < range.1) || !range.0.is_finite() || !range.1.is_finite() {
                    return Err(invalid!("bad interval [{}, {}]", range.0, range.1));
                }
            }
        }
        Ok(())
    }

    pub fn size(&self) -> u32 {
        match self {
            HVSpace::Discrete { states, .. } => *states,
            HVSpace::IntervalDiscretized { bins, .. } => *bins,
        }
    }

    /// Bin widths for interval spaces, unit weights for discrete ones.
    pub fn widths(&self) -> Vec<f64> {
        match self {
            HVSpace::Discrete { states, .. } => alloc::vec![1.0; *states as usize],
            HVSpace::IntervalDiscretized { bins, range } => {
                alloc::vec![(range.1 - range.0) / *bins as f64; *bins as usize]
            }
        }
    }
}

/// The outcome map `g: Λ → outcomes`.
#[derive(Clone, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(tag = "rule", rename_all = "snake_case"))]
pub enum OutcomeMap {
    Table {
        values: Vec<u32>,
    },
    Identity,
    Parity,
    /// `λ >= at ↦ 1`, else `0`.
    Threshold {
        at: u32,
    },
}

impl OutcomeMap {
    pub fn apply(&self, lambda: u32) -> u32 {
        match self {
            OutcomeMap::Table { values } => values[lambda as usize],
            OutcomeMap::Identity => lambda,
            OutcomeMap::Parity => lambda & 1,
            OutcomeMap::Threshold { at } => (lambda >= *at) as u32,
        }
    }

    fn check_total(&self, states: u32, outcomes: u32) -> Result<()> {
        if let OutcomeMap::Table { values } = self {
            if values.len() != states as usize {
                return Err(invalid!(
                    "outcome table has {} entries for {states} states",
                    values.len()
                ));
            }
        }
        for l in 0..states {
            let v = self.apply(l);
            if v >= outcomes {
                return Err(invalid!("g({l}) = {v} is outside the {outcomes} outcomes"));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct HVModel {
    pub name: String,
    pub space: HVSpace,
    pub outcome_map: OutcomeMap,
    pub outcomes: u32,
    /// μ_ψ over Λ.
    pub measure: Vec<f64>,
    /// The Born measure the model claims to reproduce.
    pub born: Vec<f64>,
}

impl HVModel {
    pub fn new(
        name: impl Into<String>,
        space: HVSpace,
        outcome_map: OutcomeMap,
        measure: Vec<f64>,
        born: Vec<f64>,
    ) -> Result<Self> {
        let m = HVModel {
            name: name.into(),
            space,
            outcome_map,
            outcomes: born.len() as u32,
            measure,
            born,
        };
        m.validate()?;
        Ok(m)
    }

    /// Checks totality of `g`, normalisation of μ_ψ and the pushforward
    /// contract.
    pub fn validate(&self) -> Result<()> {
        self.space.validate()?;
        if self.outcomes < 2 || self.born.len() != self.outcomes as usize {
            return Err(invalid!("need at least two outcomes with a Born weight each"));
        }
        let m = self.space.size();
        if self.measure.len() != m as usize {
            return Err(invalid!(
                "measure has {} cells for {m} hidden states",
                self.measure.len()
            ));
        }
        self.outcome_map.check_total(m, self.outcomes)?;
        for (name, probs) in [("measure", &self.measure), ("Born measure", &self.born)] {
            if probs.iter().any(|p| !(*p >= 0.0)) {
                return Err(invalid!("{name} has a negative or non-finite weight"));
            }
            let total: f64 = probs.iter().sum();
            if (total - 1.0).abs() > MEASURE_TOLERANCE {
                return Err(invalid!("{name} sums to {total}"));
            }
        }
        let defect = self.pushforward_defect();
        if defect > MEASURE_TOLERANCE {
            return Err(Error::ContractViolation(format!(
                "pushforward of μ_ψ misses the Born measure by {defect:e}"
            )));
        }
        Ok(())
    }

    pub fn pushforward(&self) -> Vec<f64> {
        let mut out = alloc::vec![0.0; self.outcomes as usize];
        for (l, p) in self.measure.iter().enumerate() {
            out[self.outcome_map.apply(l as u32) as usize] += p;
        }
        out
    }

    /// L∞ distance between the pushforward of μ_ψ and the Born measure.
    pub fn pushforward_defect(&self) -> f64 {
        self.pushforward()
            .iter()
            .zip(&self.born)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    pub fn states(&self) -> u32 {
        self.space.size()
    }

    /// Bits to serialise `g` as a table: `γ₀(m) + m⌈log₂ k⌉`.
    pub fn description_bits(&self) -> usize {
        let m = self.states() as u64;
        machine::gamma0_len(m) + m as usize * ceil_log2(self.outcomes as u64)
    }
}

fn ceil_log2(x: u64) -> usize {
    if x <= 1 {
        0
    } else {
        64 - (x - 1).leading_zeros() as usize
    }
}

/// Bin probabilities `|ψ(q_i)|² Δq_i` of a discretised wavefunction.
pub fn bohm_measure(psi: &[C64], widths: &[f64]) -> Result<Vec<f64>> {
    if psi.is_empty() || psi.len() != widths.len() {
        return Err(invalid!("{} amplitudes for {} bins", psi.len(), widths.len()));
    }
    if widths.iter().any(|w| !(*w > 0.0)) {
        return Err(invalid!("bin widths must be positive"));
    }
    let probs: Vec<f64> = psi.iter().zip(widths).map(|(a, w)| a.norm_sqr() * w).collect();
    let norm: f64 = probs.iter().sum();
    if (norm - 1.0).abs() > NORM_TOLERANCE {
        return Err(invalid!("wavefunction is not normalised: Σ|ψ|²Δq = {norm}"));
    }
    Ok(probs)
}

/// Probabilities `|c_m|²` over basis labels.
pub fn thooft_measure(coefficients: &[C64]) -> Result<Vec<f64>> {
    if coefficients.is_empty() {
        return Err(invalid!("no coefficients"));
    }
    let probs: Vec<f64> = coefficients.iter().map(|c| c.norm_sqr()).collect();
    let norm: f64 = probs.iter().sum();
    if (norm - 1.0).abs() > NORM_TOLERANCE {
        return Err(invalid!("coefficients are not normalised: Σ|c|² = {norm}"));
    }
    Ok(probs)
}

/// Midpoint discretisation of `ψ` on `bins` equal bins, with the raw mass
/// `Σ|ψ(q_i)|²Δq` before renormalisation.
pub fn discretize(psi: impl Fn(f64) -> C64, range: (f64, f64), bins: u32) -> Result<(Vec<f64>, f64)> {
    HVSpace::interval(bins, range)?;
    let dq = (range.1 - range.0) / bins as f64;
    let raw: Vec<f64> = (0..bins)
        .map(|i| psi(range.0 + (i as f64 + 0.5) * dq).norm_sqr() * dq)
        .collect();
    let mass: f64 = raw.iter().sum();
    if !(mass > 0.0) {
        return Err(invalid!("wavefunction vanishes on the grid"));
    }
    Ok((raw.iter().map(|p| p / mass).collect(), mass))
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct RefinementStep {
    pub bins: u32,
    pub raw_mass: f64,
    /// Total-variation distance to the previous grid, coarsened onto it;
    /// `None` for the first grid or when the bin counts do not nest.
    pub tv_to_previous: Option<f64>,
}

/// Convergence of the discretised Born measure under grid refinement.
pub fn refinement_series(psi: impl Fn(f64) -> C64, range: (f64, f64), bins: &[u32]) -> Result<Vec<RefinementStep>> {
    let mut out: Vec<RefinementStep> = Vec::new();
    let mut prev: Option<Vec<f64>> = None;
    for &b in bins {
        let (probs, raw_mass) = discretize(&psi, range, b)?;
        let tv = prev.as_ref().and_then(|p| {
            let coarse = p.len();
            if !(b as usize).is_multiple_of(coarse) {
                return None;
            }
            let f = b as usize / coarse;
            let d: f64 = (0..coarse)
                .map(|i| (probs[i * f..(i + 1) * f].iter().sum::<f64>() - p[i]).abs())
                .sum();
            Some(d / 2.0)
        });
        out.push(RefinementStep {
            bins: b,
            raw_mass,
            tv_to_previous: tv,
        });
        prev = Some(probs);
    }
    Ok(out)
}

/// Deterministic rules the theory itself could ship.
#[derive(Clone, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(tag = "rule", rename_all = "snake_case"))]
pub enum Rule {
    /// `λ_i = (start + i·step) mod m`.
    Counter { start: u32, step: u32 },
    /// `λ_0 = start`, `λ_{i+1} = next[λ_i]`.
    Recurrence { start: u32, next: Vec<u32> },
}

/// External source of hidden states, e.g. OS entropy.
pub trait LambdaSource {
    fn next_lambda(&mut self, states: u32) -> Result<u32>;
    fn provenance(&self) -> String;
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum SamplerKind {
    DeterministicComputable,
    SeededPrng,
    ExternalEntropy,
    RecordedFile,
}

impl fmt::Display for SamplerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SamplerKind::DeterministicComputable => "deterministic_computable",
            SamplerKind::SeededPrng => "seeded_prng",
            SamplerKind::ExternalEntropy => "external_entropy",
            SamplerKind::RecordedFile => "recorded_file",
        })
    }
}

/// The per-trial hidden-state sampler `h`.
pub enum Sampler {
    Deterministic(Rule),
    SeededPrng { seed: u64, weights: Vec<f64> },
    Recorded { trace: Vec<u32>, provenance: String },
    External(Box<dyn LambdaSource>),
}

impl fmt::Debug for Sampler {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Sampler::Deterministic(r) => f.debug_tuple("Deterministic").field(r).finish(),
            Sampler::SeededPrng { seed, weights } => f
                .debug_struct("SeededPrng")
                .field("seed", seed)
                .field("weights", weights)
                .finish(),
            Sampler::Recorded { trace, provenance } => f
                .debug_struct("Recorded")
                .field("len", &trace.len())
                .field("provenance", provenance)
                .finish(),
            Sampler::External(s) => f.debug_tuple("External").field(&s.provenance()).finish(),
        }
    }
}

impl Sampler {
    pub fn counter(start: u32, step: u32) -> Self {
        Sampler::Deterministic(Rule::Counter { start, step })
    }

    pub fn kind(&self) -> SamplerKind {
        match self {
            Sampler::Deterministic(_) => SamplerKind::DeterministicComputable,
            Sampler::SeededPrng { .. } => SamplerKind::SeededPrng,
            Sampler::Recorded { .. } => SamplerKind::RecordedFile,
            Sampler::External(_) => SamplerKind::ExternalEntropy,
        }
    }

    /// Whether `h` is supplied by the theory rather than by an outside source.
    pub fn internal_to_theory(&self) -> bool {
        matches!(self, Sampler::Deterministic(_))
    }

    pub fn provenance(&self) -> String {
        match self {
            Sampler::Deterministic(Rule::Counter { start, step }) => {
                format!("counter(start={start}, step={step}); provided by the model")
            }
            Sampler::Deterministic(Rule::Recurrence { start, next }) => {
                format!(
                    "recurrence(start={start}, table of {}); provided by the model",
                    next.len()
                )
            }
            Sampler::SeededPrng { seed, .. } => {
                format!("chacha8 seeded with {seed}; randomness supplied from outside the model")
            }
            Sampler::Recorded { provenance, trace } => {
                format!("recorded trace of {} states: {provenance}", trace.len())
            }
            Sampler::External(s) => format!("{}; randomness supplied from outside the model", s.provenance()),
        }
    }

    /// Serialised length of a deterministic rule on `m` states.
    pub fn description_bits(&self, m: u32) -> Option<usize> {
        match self {
            Sampler::Deterministic(Rule::Counter { start, step }) => {
                Some(machine::gamma0_len(*start as u64) + machine::gamma0_len(*step as u64))
            }
            Sampler::Deterministic(Rule::Recurrence { start, .. }) => {
                Some(machine::gamma0_len(*start as u64) + m as usize * ceil_log2(m as u64))
            }
            _ => None,
        }
    }

    /// The first `n` hidden states, validated against `m` states.
    pub fn draw(&mut self, m: u32, n: usize) -> Result<Vec<u32>> {
        let out: Vec<u32> = match self {
            Sampler::Deterministic(Rule::Counter { start, step }) => {
                let (s, d, m) = (*start as u64, *step as u64, m as u64);
                (0..n as u64).map(|i| ((s + (i % m) * (d % m)) % m) as u32).collect()
            }
            Sampler::Deterministic(Rule::Recurrence { start, next }) => {
                if next.len() != m as usize {
                    return Err(Error::ContractViolation(format!(
                        "recurrence table has {} entries for {m} states",
                        next.len()
                    )));
                }
                let mut l = *start;
                let mut out = Vec::with_capacity(n);
                for _ in 0..n {
                    out.push(l);
                    l = *next
                        .get(l as usize)
                        .ok_or_else(|| Error::ContractViolation(format!("recurrence left the space at {l}")))?;
                }
                out
            }
            Sampler::SeededPrng { seed, weights } => {
                if weights.len() != m as usize {
                    return Err(Error::ContractViolation(format!(
                        "sampler weights cover {} states, the space has {m}",
                        weights.len()
                    )));
                }
                let cdf = cumulative(weights);
                let mut u = ChunkedUniform::new(*seed);
                (0..n).map(|_| pick(&cdf, u.uniform()) as u32).collect()
            }
            Sampler::Recorded { trace, .. } => {
                if trace.len() < n {
                    return Err(Error::ContractViolation(format!(
                        "recorded trace holds {} states, {n} requested",
                        trace.len()
                    )));
                }
                trace[..n].to_vec()
            }
            Sampler::External(s) => (0..n).map(|_| s.next_lambda(m)).collect::<Result<_>>()?,
        };
        if let Some((i, l)) = out.iter().enumerate().find(|(_, l)| **l >= m) {
            return Err(Error::ContractViolation(format!(
                "sampler emitted λ = {l} at trial {i}, outside the {m}-state space"
            )));
        }
        Ok(out)
    }
}

/// `x_i = g(h(i))` for `i < n`, with the hidden-state trace.
pub fn run_model_traced(model: &HVModel, h: &mut Sampler, n: usize) -> Result<(SymbolString, Vec<u32>)> {
    let lambdas = h.draw(model.states(), n)?;
    let x = lambdas.iter().map(|&l| model.outcome_map.apply(l)).collect();
    Ok((SymbolString::new(model.outcomes, x)?, lambdas))
}

pub fn run_model(model: &HVModel, h: &mut Sampler, n: usize) -> Result<SymbolString> {
    run_model_traced(model, h, n).map(|(x, _)| x)
}

/// Tail and cycle lengths of the hidden-state orbit of a deterministic rule.
pub fn orbit_shape(rule: &Rule, m: u32) -> Result<(usize, usize)> {
    match rule {
        Rule::Counter { step, .. } => {
            let m64 = m as u64;
            let g = gcd(*step as u64 % m64, m64);
            Ok((0, (m64 / g) as usize))
        }
        Rule::Recurrence { start, next } => {
            if next.len() != m as usize || *start >= m || next.iter().any(|&v| v >= m) {
                return Err(Error::ContractViolation("recurrence does not stay in the space".into()));
            }
            let mut seen = alloc::vec![usize::MAX; m as usize];
            let mut l = *start;
            let mut i = 0;
            while seen[l as usize] == usize::MAX {
                seen[l as usize] = i;
                l = next[l as usize];
                i += 1;
            }
            let tail = seen[l as usize];
            Ok((tail, i - tail))
        }
    }
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct AuditPoint {
    pub n: usize,
    /// Best upper bound on `K(x_N)`, witnessed.
    pub k_upper: usize,
    pub method: Method,
    /// `desc + 2⌈log₂ N⌉ + C_MACHINE`.
    pub a_priori_bound: usize,
    pub margin: i64,
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ScenarioOneReport {
    pub model: String,
    pub sampler: String,
    pub model_bits: usize,
    pub sampler_bits: usize,
    pub points: Vec<AuditPoint>,
    pub flag_margin: i64,
    /// Margin at the largest checkpoint is at or below `flag_margin`.
    pub incompatible_with_randomness: bool,
    pub pushforward_defect: f64,
}

/// Witness program printing `x_N` from the model table and the orbit of `h`.
pub fn scenario_witness(model: &HVModel, rule: &Rule, n: usize) -> Result<ComplexityEstimate> {
    if model.outcomes != 2 {
        return Err(invalid!(
            "the bundled machine prints bits; model has {} outcomes",
            model.outcomes
        ));
    }
    let (tail, cycle) = orbit_shape(rule, model.states())?;
    let mut h = Sampler::Deterministic(rule.clone());
    let lambdas = h.draw(model.states(), tail + cycle)?;
    let bits: Vec<bool> = lambdas.iter().map(|&l| model.outcome_map.apply(l) == 1).collect();
    let program = if n > tail + cycle {
        programs::eventually_periodic(&bits[..tail], &bits[tail..], n as u64)
    } else {
        // the cap would stop the run before the loop is read
        programs::literal(&bits[..n])
    };
    let witness = machine::assemble(&program);
    Ok(ComplexityEstimate {
        value: witness.len(),
        kind: crate::randomness::EstimateKind::UpperBound,
        method: Method::GeneratorEncoding,
        generator: Some("model_orbit"),
        witness,
    })
}

/// Scenario one: `h` is supplied by the theory, so `x_N` compresses to the
/// model plus `h` plus `log N` bits.
pub fn scenario_one_audit(
    model: &HVModel,
    h: &Sampler,
    checkpoints: &[usize],
    flag_margin: i64,
) -> Result<ScenarioOneReport> {
    let Sampler::Deterministic(rule) = h else {
        return Err(invalid!(
            "scenario one needs a deterministic computable sampler, got {}",
            h.kind()
        ));
    };
    if checkpoints.is_empty() || checkpoints.windows(2).any(|w| w[0] >= w[1]) {
        return Err(invalid!("checkpoints must be non-empty and strictly ascending"));
    }
    let model_bits = model.description_bits();
    let sampler_bits = h.description_bits(model.states()).expect("deterministic");
    let mut points = Vec::new();
    for &n in checkpoints {
        let mut replay = Sampler::Deterministic(rule.clone());
        let x = run_model(model, &mut replay, n)?;
        let witness = scenario_witness(model, rule, n)?;
        if !witness.verify(&x, witness_steps(n) + 4 * model.states() as u64) {
            return Err(Error::ContractViolation(
                "orbit witness does not reproduce the output".into(),
            ));
        }
        let generic = k_upper_bound(&x, Budget::default())?;
        let best = if generic.value < witness.value {
            generic
        } else {
            witness
        };
        let a_priori = model_bits + sampler_bits + 2 * ceil_log2(n as u64) + C_MACHINE;
        points.push(AuditPoint {
            n,
            k_upper: best.value,
            method: best.method,
            a_priori_bound: a_priori,
            margin: best.value as i64 - n as i64,
        });
    }
    let last = points.last().expect("non-empty");
    Ok(ScenarioOneReport {
        model: model.name.clone(),
        sampler: h.provenance(),
        model_bits,
        sampler_bits,
        incompatible_with_randomness: last.margin <= flag_margin,
        flag_margin,
        points,
        pushforward_defect: model.pushforward_defect(),
    })
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ScenarioTwoReport {
    pub model: String,
    pub n: usize,
    pub sigmas: f64,
    pub sampler_kind: SamplerKind,
    pub provenance: String,
    /// The sampler is not part of the theory.
    pub randomness_external: bool,
    pub lambda_cells: Vec<TestReport>,
    pub outcome_cells: Vec<TestReport>,
    pub sampling_ok: bool,
    pub pushforward_ok: bool,
}

impl ScenarioTwoReport {
    pub fn passed(&self) -> bool {
        self.sampling_ok && self.pushforward_ok
    }
}

/// Scenario two: `h` comes from outside and must sample μ_ψ. Checks each
/// λ-cell and each outcome frequency at `sigmas` binomial deviations.
pub fn scenario_two_audit(model: &HVModel, h: &mut Sampler, n: usize, sigmas: f64) -> Result<ScenarioTwoReport> {
    if n < SCENARIO_TWO_MIN_N {
        return Err(invalid!("scenario two needs n >= {SCENARIO_TWO_MIN_N}, got {n}"));
    }
    let (x, lambdas) = run_model_traced(model, h, n)?;
    let mut lc = alloc::vec![0u64; model.states() as usize];
    for &l in &lambdas {
        lc[l as usize] += 1;
    }
    let mut oc = alloc::vec![0u64; model.outcomes as usize];
    for &s in x.symbols() {
        oc[s as usize] += 1;
    }
    let lambda_cells = cell_frequency_tests("lambda_cell", &lc, &model.measure, sigmas)?;
    let outcome_cells = cell_frequency_tests("outcome_cell", &oc, &model.born, sigmas)?;
    Ok(ScenarioTwoReport {
        model: model.name.clone(),
        n,
        sigmas,
        sampler_kind: h.kind(),
        provenance: h.provenance(),
        randomness_external: !h.internal_to_theory(),
        sampling_ok: lambda_cells.iter().all(TestReport::passed),
        pushforward_ok: outcome_cells.iter().all(TestReport::passed),
        lambda_cells,
        outcome_cells,
    })
}

/// Binned coin: uniform |ψ|² on `bins` equal bins of [-1, 1], outcome 1 on
/// the right half.
pub fn bohm_coin(bins: u32) -> Result<HVModel> {
    if bins == 0 || !bins.is_multiple_of(2) {
        return Err(invalid!("the binned coin needs an even number of bins"));
    }
    let space = HVSpace::interval(bins, (-1.0, 1.0))?;
    let widths = space.widths();
    let amp = libm::sqrt(1.0 / 2.0);
    let psi = alloc::vec![C64::new(amp, 0.0); bins as usize];
    let measure = bohm_measure(&psi, &widths)?;
    HVModel::new(
        "bohm_binned_coin",
        space,
        OutcomeMap::Threshold { at: bins / 2 },
        measure,
        alloc::vec![0.5, 0.5],
    )
}

/// Four basis states with equal coefficients, outcome = parity of the label.
pub fn thooft_parity() -> Result<HVModel> {
    let c = alloc::vec![C64::new(0.5, 0.0); 4];
    HVModel::new(
        "thooft_parity4",
        HVSpace::discrete(4)?,
        OutcomeMap::Parity,
        thooft_measure(&c)?,
        alloc::vec![0.5, 0.5],
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn close(a: &[f64], b: &[f64]) -> bool {
        a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() < 1e-12)
    }

    fn re(v: &[f64]) -> Vec<C64> {
        v.iter().map(|&x| C64::new(x, 0.0)).collect()
    }

    #[test]
    fn bohm_examples() {
        let w = [0.25; 4];
        assert!(close(&bohm_measure(&re(&[1.0; 4]), &w).unwrap(), &[0.25; 4]));
        assert!(close(
            &bohm_measure(&re(&[0.0, 0.0, 2.0, 0.0]), &w).unwrap(),
            &[0.0, 0.0, 1.0, 0.0]
        ));
        let s = libm::sqrt(5.0);
        assert!(close(
            &bohm_measure(&re(&[1.0 / s, 2.0 / s]), &[1.0, 1.0]).unwrap(),
            &[0.2, 0.8]
        ));
        let err = bohm_measure(&re(&[1.0, 2.0]), &[1.0, 1.0]).unwrap_err();
        assert!(format!("{err}").contains('5'));
    }

    #[test]
    fn thooft_examples() {
        let h = libm::sqrt(0.5);
        assert!(close(&thooft_measure(&re(&[h, h])).unwrap(), &[0.5, 0.5]));
        assert!(close(&thooft_measure(&re(&[1.0, 0.0])).unwrap(), &[1.0, 0.0]));
        let c = [C64::new(0.6, 0.0), C64::new(0.0, 0.8)];
        assert!(close(&thooft_measure(&c).unwrap(), &[0.36, 0.64]));
        assert!(thooft_measure(&re(&[1.0, 1.0])).is_err());
    }

    #[test]
    fn identity_with_alternating_sampler() {
        let m = HVModel::new(
            "id",
            HVSpace::discrete(2).unwrap(),
            OutcomeMap::Identity,
            alloc::vec![0.5, 0.5],
            alloc::vec![0.5, 0.5],
        )
        .unwrap();
        let x = run_model(&m, &mut Sampler::counter(0, 1), 6).unwrap();
        assert_eq!(x.to_text(), "010101");
    }

    #[test]
    fn parity_with_counter() {
        let m = thooft_parity().unwrap();
        let x = run_model(&m, &mut Sampler::counter(0, 1), 8).unwrap();
        assert_eq!(x.to_text(), "01010101");
    }

    #[test]
    fn out_of_space_is_contract_violation() {
        let m = thooft_parity().unwrap();
        let mut h = Sampler::Recorded {
            trace: alloc::vec![0, 1, 7],
            provenance: "test".into(),
        };
        assert!(matches!(run_model(&m, &mut h, 3), Err(Error::ContractViolation(_))));
    }

    #[test]
    fn model_validation() {
        let bad_push = HVModel::new(
            "x",
            HVSpace::discrete(2).unwrap(),
            OutcomeMap::Identity,
            alloc::vec![0.7, 0.3],
            alloc::vec![0.5, 0.5],
        );
        assert!(matches!(bad_push, Err(Error::ContractViolation(_))));
        let partial = HVModel::new(
            "x",
            HVSpace::discrete(3).unwrap(),
            OutcomeMap::Table {
                values: alloc::vec![0, 1],
            },
            alloc::vec![0.5, 0.25, 0.25],
            alloc::vec![0.5, 0.5],
        );
        assert!(partial.is_err());
        assert!(HVSpace::discrete(0).is_err());
        assert!(HVSpace::interval(0, (0.0, 1.0)).is_err());
    }

    #[test]
    fn bundled_models_push_forward_exactly() {
        for m in [bohm_coin(8).unwrap(), thooft_parity().unwrap()] {
            assert!(m.pushforward_defect() <= 1e-10, "{}", m.name);
        }
    }

    #[test]
    fn orbit_shapes() {
        assert_eq!(orbit_shape(&Rule::Counter { start: 1, step: 2 }, 8).unwrap(), (0, 4));
        assert_eq!(orbit_shape(&Rule::Counter { start: 0, step: 0 }, 8).unwrap(), (0, 1));
        let r = Rule::Recurrence {
            start: 0,
            next: alloc::vec![1, 2, 3, 2],
        };
        assert_eq!(orbit_shape(&r, 4).unwrap(), (2, 2));
    }

    #[test]
    fn scenario_one_flags_long_runs() {
        let m = thooft_parity().unwrap();
        let r = scenario_one_audit(&m, &Sampler::counter(0, 1), &[100, 1_000, 10_000], DEFAULT_FLAG_MARGIN).unwrap();
        let last = r.points.last().unwrap();
        assert!(last.margin <= -9_000);
        assert!(r.incompatible_with_randomness);
        assert!(r.pushforward_defect <= 1e-10);
        for p in &r.points {
            assert!(p.k_upper <= p.a_priori_bound);
        }
    }

    #[test]
    fn scenario_one_withholds_flag_at_small_n() {
        // 200-state recurrence: description far exceeds N = 100
        let next: Vec<u32> = (0..200u32).map(|i| (i + 1) % 200).collect();
        let mut u = ChunkedUniform::new(5);
        let values: Vec<u32> = (0..200).map(|_| (u.uniform() < 0.5) as u32).collect();
        let ones = values.iter().filter(|v| **v == 1).count() as f64;
        let m = HVModel::new(
            "table",
            HVSpace::discrete(200).unwrap(),
            OutcomeMap::Table { values },
            alloc::vec![1.0 / 200.0; 200],
            alloc::vec![1.0 - ones / 200.0, ones / 200.0],
        )
        .unwrap();
        let h = Sampler::Deterministic(Rule::Recurrence { start: 0, next });
        let r = scenario_one_audit(&m, &h, &[100], DEFAULT_FLAG_MARGIN).unwrap();
        assert!(r.model_bits + r.sampler_bits >= 200);
        assert!(r.points[0].a_priori_bound as i64 - 100 > 0);
        assert!(!r.incompatible_with_randomness);
    }

    #[test]
    fn scenario_one_refuses_recorded() {
        let m = thooft_parity().unwrap();
        let h = Sampler::Recorded {
            trace: alloc::vec![0; 10],
            provenance: "os entropy".into(),
        };
        assert!(scenario_one_audit(&m, &h, &[10], DEFAULT_FLAG_MARGIN).is_err());
    }

    #[test]
    fn scenario_two_fair_and_biased() {
        let m = HVModel::new(
            "coin",
            HVSpace::discrete(2).unwrap(),
            OutcomeMap::Identity,
            alloc::vec![0.5, 0.5],
            alloc::vec![0.5, 0.5],
        )
        .unwrap();
        let mut fair = Sampler::SeededPrng {
            seed: 9,
            weights: alloc::vec![0.5, 0.5],
        };
        let r = scenario_two_audit(&m, &mut fair, 100_000, 6.0).unwrap();
        assert!(r.passed());
        assert!(r.randomness_external);
        let mut biased = Sampler::SeededPrng {
            seed: 9,
            weights: alloc::vec![0.6, 0.4],
        };
        let r = scenario_two_audit(&m, &mut biased, 100_000, 6.0).unwrap();
        assert!(!r.sampling_ok);
        assert!(scenario_two_audit(&m, &mut fair, 100, 6.0).is_err());
    }

    #[test]
    fn scenario_two_point_mass() {
        let m = HVModel::new(
            "point",
            HVSpace::discrete(2).unwrap(),
            OutcomeMap::Identity,
            alloc::vec![1.0, 0.0],
            alloc::vec![1.0, 0.0],
        )
        .unwrap();
        let r = scenario_two_audit(&m, &mut Sampler::counter(0, 0), 10_000, 6.0).unwrap();
        assert!(r.passed());
        assert!(!r.randomness_external);
    }

    #[test]
    fn refinement_converges() {
        let gauss = |q: f64| C64::new(libm::exp(-q * q), 0.0);
        let s = refinement_series(gauss, (-4.0, 4.0), &[8, 16, 32, 64]).unwrap();
        let tvs: Vec<f64> = s.iter().filter_map(|r| r.tv_to_previous).collect();
        assert_eq!(tvs.len(), 3);
        assert!(tvs.windows(2).all(|w| w[1] < w[0]));
    }

    proptest! {
        #[test]
        fn factorization_replays(start in 0u32..16, step in 0u32..16, n in 0usize..200) {
            let m = thooft_parity().unwrap();
            let (x, lambdas) = run_model_traced(&m, &mut Sampler::counter(start, step), n).unwrap();
            for (s, l) in x.symbols().iter().zip(&lambdas) {
                prop_assert_eq!(*s, l & 1);
            }
        }

        #[test]
        fn scenario_one_bound_holds(
            states in 2u32..40,
            seed in any::<u64>(),
            n in 1usize..3_000,
            recurrence in any::<bool>(),
        ) {
            let mut s = seed;
            let mut next_rand = || { s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407); (s >> 33) as u32 };
            let values: Vec<u32> = (0..states).map(|_| next_rand() & 1).collect();
            let ones = values.iter().filter(|v| **v == 1).count() as f64 / states as f64;
            let model = HVModel::new(
                "p",
                HVSpace::discrete(states).unwrap(),
                OutcomeMap::Table { values },
                alloc::vec![1.0 / states as f64; states as usize],
                alloc::vec![1.0 - ones, ones],
            );
            prop_assume!(model.is_ok());
            let model = model.unwrap();
            let h = if recurrence {
                Sampler::Deterministic(Rule::Recurrence {
                    start: next_rand() % states,
                    next: (0..states).map(|_| next_rand() % states).collect(),
                })
            } else {
                Sampler::counter(next_rand() % states, next_rand() % states)
            };
            let r = scenario_one_audit(&model, &h, &[n], DEFAULT_FLAG_MARGIN).unwrap();
            prop_assert!(r.points[0].k_upper <= r.points[0].a_priori_bound);
        }
    }
}
