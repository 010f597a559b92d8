//! Bipartite Alice/Bob experiments: the sin² mismatch law, exact local
//! bounds over deterministic strategies, Monte Carlo trials and marginal
//! independence checks.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use num_rational::Ratio;

use crate::error::{Error, Result};
use crate::invalid;
use crate::randomness::stats::{chi_square_independence, chi_square_z, TestReport, Z_THRESHOLD};
use crate::rng::{cumulative, pick, ChunkedUniform};

/// Largest setting set the local-bound search accepts.
pub const MAX_SETTINGS: usize = 16;
/// Minimum trials per settings pair for the marginal checks.
pub const MIN_TRIALS_PER_PAIR: u64 = 1000;
/// Uniform draws consumed by each trial.
pub const DRAWS_PER_TRIAL: u64 = 5;

const ANGLE_EPS: f64 = 1e-9;

/// Angles in degrees, shared by both wings.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SettingSet {
    angles: Vec<f64>,
}

impl SettingSet {
    pub fn new(angles: Vec<f64>) -> Result<Self> {
        if angles.iter().any(|a| !a.is_finite()) {
            return Err(invalid!("angles must be finite"));
        }
        for (i, a) in angles.iter().enumerate() {
            if angles[..i].iter().any(|b| (a - b).abs() <= ANGLE_EPS) {
                return Err(invalid!("duplicate angle {a}"));
            }
        }
        if angles.len() < 2 {
            return Err(invalid!("need at least two distinct angles, got {}", angles.len()));
        }
        Ok(SettingSet { angles })
    }

    /// `{0°, 30°, 60°}`.
    pub fn three() -> Self {
        SettingSet {
            angles: alloc::vec![0.0, 30.0, 60.0],
        }
    }

    pub fn angles(&self) -> &[f64] {
        &self.angles
    }

    pub fn len(&self) -> usize {
        self.angles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.angles.is_empty()
    }

    pub fn index_of(&self, angle: f64) -> Option<usize> {
        self.angles.iter().position(|a| (a - angle).abs() <= ANGLE_EPS)
    }
}

/// `sin²(d)` for `d` in degrees; exact at multiples of 30° and 45°.
pub fn sin2_deg(d: f64) -> f64 {
    let r = d.rem_euclid(180.0);
    let exact = [
        (0.0, 0.0),
        (30.0, 0.25),
        (45.0, 0.5),
        (60.0, 0.75),
        (90.0, 1.0),
        (120.0, 0.75),
        (135.0, 0.5),
        (150.0, 0.25),
        (180.0, 0.0),
    ];
    if let Some(&(_, v)) = exact.iter().find(|(x, _)| *x == r) {
        return v;
    }
    let s = libm::sin(r.to_radians());
    s * s
}

/// `P(L ≠ R | a, b) = sin²(a − b)`.
pub fn quantum_mismatch(a: f64, b: f64) -> f64 {
    sin2_deg(a - b)
}

/// Linear combination of mismatch probabilities `Σ c · P≠(a, b)`.
#[derive(Clone, Debug, PartialEq)]
pub struct MismatchFunctional {
    pub name: String,
    pub terms: Vec<Term>,
    /// Restrict to strategies with `L(s) = R(s)` on every setting, the
    /// local counterpart of perfect correlation at equal settings.
    pub perfect_correlation: bool,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Term {
    pub a: f64,
    pub b: f64,
    pub coefficient: Ratio<i64>,
}

impl MismatchFunctional {
    pub fn new(name: impl Into<String>, terms: Vec<(f64, f64, Ratio<i64>)>) -> Self {
        MismatchFunctional {
            name: name.into(),
            terms: terms
                .into_iter()
                .map(|(a, b, coefficient)| Term { a, b, coefficient })
                .collect(),
            perfect_correlation: false,
        }
    }

    pub fn with_perfect_correlation(mut self, on: bool) -> Self {
        self.perfect_correlation = on;
        self
    }

    /// `P≠(0,60) − P≠(0,30) − P≠(30,60)` on `{0°, 30°, 60°}`.
    pub fn default_three() -> Self {
        let one = Ratio::from_integer(1);
        MismatchFunctional::new(
            "default",
            alloc::vec![(0.0, 60.0, one), (0.0, 30.0, -one), (30.0, 60.0, -one)],
        )
        .with_perfect_correlation(true)
    }

    /// CHSH in mismatch form on `{0°, 22.5°, 45°, 67.5°}`: Alice uses 0 and
    /// 45, Bob uses 22.5 and 67.5.
    pub fn chsh() -> Self {
        let one = Ratio::from_integer(1);
        MismatchFunctional::new(
            "chsh",
            alloc::vec![
                (0.0, 67.5, one),
                (0.0, 22.5, -one),
                (45.0, 22.5, -one),
                (45.0, 67.5, -one)
            ],
        )
    }

    pub fn chsh_settings() -> SettingSet {
        SettingSet {
            angles: alloc::vec![0.0, 22.5, 45.0, 67.5],
        }
    }

    pub fn is_degenerate(&self) -> bool {
        self.terms.iter().all(|t| t.coefficient == Ratio::from_integer(0))
    }

    /// Terms as `(a index, b index, coefficient)`.
    pub fn indexed(&self, settings: &SettingSet) -> Result<Vec<(usize, usize, Ratio<i64>)>> {
        self.terms
            .iter()
            .map(|t| {
                let ia = settings
                    .index_of(t.a)
                    .ok_or_else(|| invalid!("angle {} is not a setting", t.a))?;
                let ib = settings
                    .index_of(t.b)
                    .ok_or_else(|| invalid!("angle {} is not a setting", t.b))?;
                Ok((ia, ib, t.coefficient))
            })
            .collect()
    }
}

/// Deterministic responses `L, R: S → {0, 1}` as bit masks over setting
/// indices.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct LocalStrategy {
    pub left: u32,
    pub right: u32,
}

impl LocalStrategy {
    pub fn alice(&self, a: usize) -> u8 {
        ((self.left >> a) & 1) as u8
    }

    pub fn bob(&self, b: usize) -> u8 {
        ((self.right >> b) & 1) as u8
    }

    pub fn value(&self, terms: &[(usize, usize, Ratio<i64>)]) -> Ratio<i64> {
        terms
            .iter()
            .filter(|(a, b, _)| self.alice(*a) != self.bob(*b))
            .map(|(_, _, c)| *c)
            .sum()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LocalBound {
    pub bound: Ratio<i64>,
    pub witness: LocalStrategy,
    /// Strategy pairs `2^|S| · 2^|S|` the maximum ranges over.
    pub strategies: u128,
    /// Pairs admitted by the perfect-correlation constraint.
    pub feasible: u128,
}

impl LocalBound {
    pub fn to_f64(&self) -> f64 {
        *self.bound.numer() as f64 / *self.bound.denom() as f64
    }
}

fn check_capacity(settings: &SettingSet) -> Result<()> {
    if settings.len() > MAX_SETTINGS {
        return Err(Error::Capacity {
            what: "setting count",
            needed: settings.len() as u128,
            cap: MAX_SETTINGS as u128,
        });
    }
    Ok(())
}

/// Exact maximum of the functional over all `2^|S| · 2^|S|` deterministic
/// local strategies. For each Alice strategy Bob's best response is chosen
/// per setting, which is exact because the functional separates over `b`.
pub fn local_bound_bruteforce(settings: &SettingSet, functional: &MismatchFunctional) -> Result<LocalBound> {
    check_capacity(settings)?;
    let terms = functional.indexed(settings)?;
    let s = settings.len();
    if functional.perfect_correlation {
        let mut best: Option<(Ratio<i64>, LocalStrategy)> = None;
        for left in 0u32..(1 << s) {
            let st = LocalStrategy { left, right: left };
            let v = st.value(&terms);
            if best.as_ref().is_none_or(|(b, _)| v > *b) {
                best = Some((v, st));
            }
        }
        let (bound, witness) = best.expect("at least one strategy");
        return Ok(LocalBound {
            bound,
            witness,
            strategies: 1u128 << (2 * s),
            feasible: 1u128 << s,
        });
    }
    let mut by_b: Vec<Vec<(usize, Ratio<i64>)>> = alloc::vec![Vec::new(); s];
    for &(a, b, c) in &terms {
        by_b[b].push((a, c));
    }
    let mut best: Option<(Ratio<i64>, LocalStrategy)> = None;
    for left in 0u32..(1 << s) {
        let mut total = Ratio::from_integer(0);
        let mut right = 0u32;
        for (b, ts) in by_b.iter().enumerate() {
            // value if Bob answers 0 versus 1
            let (mut v0, mut v1) = (Ratio::from_integer(0), Ratio::from_integer(0));
            for &(a, c) in ts {
                if (left >> a) & 1 == 1 {
                    v0 += c;
                } else {
                    v1 += c;
                }
            }
            if v1 > v0 {
                right |= 1 << b;
                total += v1;
            } else {
                total += v0;
            }
        }
        if best.as_ref().is_none_or(|(v, _)| total > *v) {
            best = Some((total, LocalStrategy { left, right }));
        }
    }
    let (bound, witness) = best.expect("at least one strategy");
    Ok(LocalBound {
        bound,
        witness,
        strategies: 1u128 << (2 * s),
        feasible: 1u128 << (2 * s),
    })
}

/// Plain enumeration of every strategy pair; for small setting sets.
pub fn local_bound_enumerate(settings: &SettingSet, functional: &MismatchFunctional) -> Result<LocalBound> {
    if settings.len() > 10 {
        return Err(Error::Capacity {
            what: "setting count for plain enumeration",
            needed: settings.len() as u128,
            cap: 10,
        });
    }
    let terms = functional.indexed(settings)?;
    let s = settings.len();
    let mut best: Option<(Ratio<i64>, LocalStrategy)> = None;
    let mut feasible = 0u128;
    for left in 0u32..(1 << s) {
        for right in 0u32..(1 << s) {
            if functional.perfect_correlation && left != right {
                continue;
            }
            feasible += 1;
            let st = LocalStrategy { left, right };
            let v = st.value(&terms);
            if best.as_ref().is_none_or(|(b, _)| v > *b) {
                best = Some((v, st));
            }
        }
    }
    let (bound, witness) = best.expect("at least one strategy");
    Ok(LocalBound {
        bound,
        witness,
        strategies: 1u128 << (2 * s),
        feasible,
    })
}

/// The functional with sin² mismatches.
pub fn quantum_value(settings: &SettingSet, functional: &MismatchFunctional) -> Result<f64> {
    functional.indexed(settings)?;
    Ok(functional
        .terms
        .iter()
        .map(|t| ratio_f64(t.coefficient) * quantum_mismatch(t.a, t.b))
        .sum())
}

fn ratio_f64(r: Ratio<i64>) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TrialRecord {
    pub a: f64,
    pub b: f64,
    pub alpha: u8,
    pub beta: u8,
    pub lambda: Option<u32>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum BipartiteModel {
    /// Uniform marginals, mismatch `sin²(a − b)`.
    Quantum,
    /// Strategy `i` drawn with probability `weights[i]`.
    Hidden {
        strategies: Vec<LocalStrategy>,
        weights: Vec<f64>,
    },
    /// Alice's outcome copies the low bit of Bob's setting index.
    Signaling,
}

impl BipartiteModel {
    pub fn name(&self) -> &'static str {
        match self {
            BipartiteModel::Quantum => "quantum",
            BipartiteModel::Hidden { .. } => "hv",
            BipartiteModel::Signaling => "signaling",
        }
    }

    fn validate(&self, settings: &SettingSet) -> Result<()> {
        if let BipartiteModel::Hidden { strategies, weights } = self {
            if strategies.is_empty() || strategies.len() != weights.len() {
                return Err(invalid!(
                    "{} strategies with {} weights",
                    strategies.len(),
                    weights.len()
                ));
            }
            let total: f64 = weights.iter().sum();
            if weights.iter().any(|w| !(*w >= 0.0)) || (total - 1.0).abs() > 1e-10 {
                return Err(invalid!("strategy weights must be a probability vector"));
            }
            let mask = if settings.len() >= 32 {
                u32::MAX
            } else {
                (1u32 << settings.len()) - 1
            };
            if strategies.iter().any(|s| s.left & !mask != 0 || s.right & !mask != 0) {
                return Err(invalid!("strategy responds to settings outside the set"));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum SettingsSampler {
    /// Both settings uniform and independent of everything else.
    Uniform,
    /// Round-robin over fixed index pairs.
    Fixed(Vec<(usize, usize)>),
    /// Settings computed from the hidden state.
    Superdeterministic,
}

impl SettingsSampler {
    pub fn name(&self) -> &'static str {
        match self {
            SettingsSampler::Uniform => "uniform",
            SettingsSampler::Fixed(_) => "fixed",
            SettingsSampler::Superdeterministic => "superdeterministic",
        }
    }
}

/// `n` i.i.d. trials; trial `t` uses draws `5t .. 5t + 5` of the seeded
/// stream, so any split into ranges gives the same records.
pub fn run_bipartite(
    model: &BipartiteModel,
    settings: &SettingSet,
    sampler: &SettingsSampler,
    n: u64,
    seed: u64,
) -> Result<Vec<TrialRecord>> {
    if n == 0 {
        return Err(invalid!("need at least one trial"));
    }
    run_bipartite_range(model, settings, sampler, seed, 0, n)
}

/// Trials `start .. start + len` of the stream defined by [`run_bipartite`].
pub fn run_bipartite_range(
    model: &BipartiteModel,
    settings: &SettingSet,
    sampler: &SettingsSampler,
    seed: u64,
    start: u64,
    len: u64,
) -> Result<Vec<TrialRecord>> {
    model.validate(settings)?;
    let s = settings.len();
    if let SettingsSampler::Fixed(pairs) = sampler {
        if pairs.is_empty() || pairs.iter().any(|&(a, b)| a >= s || b >= s) {
            return Err(invalid!(
                "fixed settings pairs must be non-empty and index the setting set"
            ));
        }
    }
    let cdf = match model {
        BipartiteModel::Hidden { weights, .. } => cumulative(weights),
        _ => Vec::new(),
    };
    let mut u = ChunkedUniform::starting_at(seed, start * DRAWS_PER_TRIAL);
    let mut out = Vec::with_capacity(len as usize);
    for t in start..start + len {
        let d: [f64; 5] = core::array::from_fn(|_| u.uniform());
        let lambda = match model {
            BipartiteModel::Hidden { .. } => Some(pick(&cdf, d[0]) as u32),
            _ if *sampler == SettingsSampler::Superdeterministic => {
                Some(((d[0] * (s * s) as f64) as u32).min((s * s - 1) as u32))
            }
            _ => None,
        };
        let index = |x: f64| ((x * s as f64) as usize).min(s - 1);
        let (ia, ib) = match sampler {
            SettingsSampler::Uniform => (index(d[1]), index(d[2])),
            SettingsSampler::Fixed(pairs) => pairs[(t % pairs.len() as u64) as usize],
            SettingsSampler::Superdeterministic => {
                let l = lambda.expect("set above") as usize;
                (l % s, (l / s) % s)
            }
        };
        let (a, b) = (settings.angles[ia], settings.angles[ib]);
        let (alpha, beta) = match model {
            BipartiteModel::Quantum => {
                let alpha = (d[3] < 0.5) as u8;
                let beta = if d[4] < quantum_mismatch(a, b) {
                    1 - alpha
                } else {
                    alpha
                };
                (alpha, beta)
            }
            BipartiteModel::Hidden { strategies, .. } => {
                let st = strategies[lambda.expect("hidden model") as usize];
                (st.alice(ia), st.bob(ib))
            }
            BipartiteModel::Signaling => ((ib & 1) as u8, (d[3] < 0.5) as u8),
        };
        out.push(TrialRecord {
            a,
            b,
            alpha,
            beta,
            lambda,
        });
    }
    Ok(out)
}

/// Trials with `a = b` and `α ≠ β`.
pub fn perfect_correlation_violations(records: &[TrialRecord]) -> usize {
    records
        .iter()
        .filter(|r| (r.a - r.b).abs() <= ANGLE_EPS && r.alpha != r.beta)
        .count()
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PairCounts {
    pub trials: u64,
    pub mismatches: u64,
    pub alpha_ones: u64,
    pub beta_ones: u64,
}

/// Counts per `(a index, b index)`.
pub fn pair_counts(records: &[TrialRecord], settings: &SettingSet) -> Result<BTreeMap<(usize, usize), PairCounts>> {
    let mut out: BTreeMap<(usize, usize), PairCounts> = BTreeMap::new();
    for (i, r) in records.iter().enumerate() {
        let ia = settings
            .index_of(r.a)
            .ok_or_else(|| invalid!("record {i}: angle {} is not a setting", r.a))?;
        let ib = settings
            .index_of(r.b)
            .ok_or_else(|| invalid!("record {i}: angle {} is not a setting", r.b))?;
        if r.alpha > 1 || r.beta > 1 {
            return Err(invalid!("record {i}: outcomes must be 0 or 1"));
        }
        let c = out.entry((ia, ib)).or_default();
        c.trials += 1;
        c.mismatches += (r.alpha != r.beta) as u64;
        c.alpha_ones += r.alpha as u64;
        c.beta_ones += r.beta as u64;
    }
    Ok(out)
}

/// Distinct angles in first-appearance order.
pub fn settings_from_records(records: &[TrialRecord]) -> Result<SettingSet> {
    let mut angles: Vec<f64> = Vec::new();
    for r in records {
        for x in [r.a, r.b] {
            if !angles.iter().any(|y| (x - y).abs() <= ANGLE_EPS) {
                angles.push(x);
            }
        }
    }
    angles.sort_by(f64::total_cmp);
    SettingSet::new(angles)
}

fn combined_independence(name: &str, tables: &[Vec<Vec<u64>>], threshold: f64) -> TestReport {
    let (mut chi2, mut dof) = (0.0, 0u64);
    for t in tables {
        if let Some((c, d)) = chi_square_independence(t) {
            chi2 += c;
            dof += d;
        }
    }
    if dof == 0 {
        return TestReport::skipped(name, "no setting has two comparable partners");
    }
    TestReport::scored(name, chi2, dof as f64, chi_square_z(chi2, dof), threshold).with("dof", dof)
}

fn check_trials(counts: &BTreeMap<(usize, usize), PairCounts>) -> Result<()> {
    for (&(a, b), c) in counts {
        if c.trials < MIN_TRIALS_PER_PAIR {
            return Err(invalid!(
                "settings pair ({a}, {b}) has {} trials, {} short of {MIN_TRIALS_PER_PAIR}",
                c.trials,
                MIN_TRIALS_PER_PAIR - c.trials
            ));
        }
    }
    Ok(())
}

/// Alice's marginal against Bob's setting and vice versa, via summed
/// contingency-table chi-square per own setting.
pub fn no_signaling_check(records: &[TrialRecord], settings: &SettingSet) -> Result<(TestReport, TestReport)> {
    let counts = pair_counts(records, settings)?;
    check_trials(&counts)?;
    let s = settings.len();
    let mut alice = Vec::new();
    let mut bob = Vec::new();
    for own in 0..s {
        let mut ta = Vec::new();
        let mut tb = Vec::new();
        for other in 0..s {
            if let Some(c) = counts.get(&(own, other)) {
                ta.push(alloc::vec![c.trials - c.alpha_ones, c.alpha_ones]);
            }
            if let Some(c) = counts.get(&(other, own)) {
                tb.push(alloc::vec![c.trials - c.beta_ones, c.beta_ones]);
            }
        }
        alice.push(ta);
        bob.push(tb);
    }
    Ok((
        combined_independence("no_signaling_alice", &alice, Z_THRESHOLD),
        combined_independence("no_signaling_bob", &bob, Z_THRESHOLD),
    ))
}

/// Independence of `(a, b)`, `(a, λ)` and `(b, λ)`. Skipped when any pair
/// has a degenerate marginal.
pub fn free_choice_check(records: &[TrialRecord], settings: &SettingSet) -> Result<TestReport> {
    if (records.len() as u64) < MIN_TRIALS_PER_PAIR {
        return Err(invalid!(
            "{} trials, {} short of {MIN_TRIALS_PER_PAIR}",
            records.len(),
            MIN_TRIALS_PER_PAIR - records.len() as u64
        ));
    }
    let mut lambdas: BTreeMap<u32, usize> = BTreeMap::new();
    let mut rows = Vec::with_capacity(records.len());
    for (i, r) in records.iter().enumerate() {
        let l = r
            .lambda
            .ok_or_else(|| invalid!("record {i} has no hidden-state label"))?;
        let next = lambdas.len();
        let li = *lambdas.entry(l).or_insert(next);
        let ia = settings
            .index_of(r.a)
            .ok_or_else(|| invalid!("record {i}: angle {} is not a setting", r.a))?;
        let ib = settings
            .index_of(r.b)
            .ok_or_else(|| invalid!("record {i}: angle {} is not a setting", r.b))?;
        rows.push((ia, ib, li));
    }
    let s = settings.len();
    let nl = lambdas.len();
    let mut ab = alloc::vec![alloc::vec![0u64; s]; s];
    let mut al = alloc::vec![alloc::vec![0u64; nl]; s];
    let mut bl = alloc::vec![alloc::vec![0u64; nl]; s];
    for &(a, b, l) in &rows {
        ab[a][b] += 1;
        al[a][l] += 1;
        bl[b][l] += 1;
    }
    let mut worst: Option<(f64, f64, u64)> = None;
    let mut report_params = Vec::new();
    for (name, table) in [("a_b", &ab), ("a_lambda", &al), ("b_lambda", &bl)] {
        let Some((chi2, dof)) = chi_square_independence(table) else {
            return Ok(TestReport::skipped(
                "free_choice",
                &format!("degenerate marginal in {name}"),
            ));
        };
        let z = chi_square_z(chi2, dof);
        report_params.push((name, z));
        if worst.is_none_or(|(wz, _, _)| z.abs() > wz.abs()) {
            worst = Some((z, chi2, dof));
        }
    }
    let (z, chi2, dof) = worst.expect("three tables");
    let mut r = TestReport::scored("free_choice", chi2, dof as f64, z, Z_THRESHOLD);
    for (name, z) in report_params {
        r = r.with(&format!("z_{name}"), z);
    }
    Ok(r)
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PairEstimate {
    pub a: f64,
    pub b: f64,
    pub trials: u64,
    pub mismatch: f64,
    pub quantum: f64,
    pub z: f64,
}

/// Empirical mismatch per pair against `sin²(a − b)`.
pub fn pair_estimates(records: &[TrialRecord], settings: &SettingSet) -> Result<Vec<PairEstimate>> {
    let counts = pair_counts(records, settings)?;
    Ok(counts
        .iter()
        .map(|(&(ia, ib), c)| {
            let (a, b) = (settings.angles[ia], settings.angles[ib]);
            let p = quantum_mismatch(a, b);
            let f = c.mismatches as f64 / c.trials as f64;
            let sd = libm::sqrt(p * (1.0 - p) / c.trials as f64);
            let z = if sd > 0.0 {
                (f - p) / sd
            } else if f == p {
                0.0
            } else {
                f64::INFINITY
            };
            PairEstimate {
                a,
                b,
                trials: c.trials,
                mismatch: f,
                quantum: p,
                z,
            }
        })
        .collect())
}

#[derive(Clone, Debug, PartialEq)]
pub struct FunctionalEstimate {
    pub value: f64,
    pub sigma: f64,
}

/// Empirical value of the functional with its binomial standard error.
pub fn estimate_functional(
    records: &[TrialRecord],
    settings: &SettingSet,
    functional: &MismatchFunctional,
) -> Result<FunctionalEstimate> {
    let terms = functional.indexed(settings)?;
    let counts = pair_counts(records, settings)?;
    let (mut value, mut var) = (0.0, 0.0);
    for (a, b, c) in terms {
        let pc = counts
            .get(&(a, b))
            .ok_or_else(|| invalid!("no trials at ({}, {})", settings.angles[a], settings.angles[b]))?;
        let p = pc.mismatches as f64 / pc.trials as f64;
        let cf = ratio_f64(c);
        value += cf * p;
        var += cf * cf * p * (1.0 - p) / pc.trials as f64;
    }
    Ok(FunctionalEstimate {
        value,
        sigma: libm::sqrt(var),
    })
}
