//! Kolmogorov complexity relative to the bundled machine.
//!
//! Everything here is one-sided. Upper bounds come with a witness program;
//! exact values come from exhaustive enumeration and are only claimed when no
//! shorter program was left unresolved by the step budget.

use alloc::collections::BTreeSet;
use alloc::vec::Vec;
use core::cmp::Ordering;
use core::fmt;

use super::machine::{self, programs, run_machine, Explorer, Instruction, Machine, RunOutcome};
use crate::error::{Error, Result};
use crate::invalid;
use crate::sequence::{Prefixes, SequenceSource, SymbolString};

/// Largest program length the exhaustive searches accept.
pub const MAX_ENUMERATION_LEN: usize = 24;
/// Largest string length for the incompressibility count.
pub const MAX_COUNT_LEN: usize = 14;
/// Longest eventual period probed by [`k_upper_bound`].
pub const MAX_EVENTUAL_PERIOD: usize = 256;
/// Widest fixed-width counter probed by [`k_upper_bound`].
pub const MAX_COUNTER_WIDTH: u8 = 20;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum EstimateKind {
    Exact,
    UpperBound,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Method {
    Exhaustive,
    LiteralEncoding,
    GeneratorEncoding,
}

#[derive(Clone, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ComplexityEstimate {
    /// Bits.
    pub value: usize,
    pub kind: EstimateKind,
    pub method: Method,
    /// Which generator produced the witness, when `method` is a generator.
    pub generator: Option<&'static str>,
    /// Program bits; running them on the machine prints the target.
    pub witness: Vec<bool>,
}

impl ComplexityEstimate {
    /// Runs the witness and compares the output with `sigma`.
    pub fn verify(&self, sigma: &SymbolString, max_steps: u64) -> bool {
        let Some(bits) = sigma.to_bools() else {
            return false;
        };
        matches!(
            run_machine(&self.witness, max_steps),
            RunOutcome::Halted { output, bits_consumed, .. }
                if output == bits && bits_consumed == self.witness.len()
        )
    }
}

/// Budget for the exhaustive part of the upper bound.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Budget {
    /// `0` disables the exhaustive search.
    pub max_len: usize,
    pub max_steps: u64,
}

impl Default for Budget {
    fn default() -> Self {
        Self {
            max_len: 0,
            max_steps: 10_000,
        }
    }
}

fn binary(sigma: &SymbolString) -> Result<Vec<bool>> {
    sigma.to_bools().ok_or_else(|| {
        invalid!(
            "complexity estimates need a binary string, got base {}",
            sigma.alphabet_size()
        )
    })
}

fn ceil_log2(x: u64) -> usize {
    if x <= 1 {
        0
    } else {
        64 - (x - 1).leading_zeros() as usize
    }
}

/// Literal-encoding bound `|σ| + 2⌈log₂(|σ|+1)⌉ + c_lit`.
pub fn literal_bound(n: usize) -> usize {
    n + 2 * ceil_log2(n as u64 + 1) + machine::LITERAL_OVERHEAD
}

/// Smallest period of the whole string (prefix function).
fn smallest_period(bits: &[bool]) -> usize {
    let n = bits.len();
    if n == 0 {
        return 0;
    }
    let mut pi = alloc::vec![0usize; n];
    for i in 1..n {
        let mut k = pi[i - 1];
        while k > 0 && bits[i] != bits[k] {
            k = pi[k - 1];
        }
        if bits[i] == bits[k] {
            k += 1;
        }
        pi[i] = k;
    }
    n - pi[n - 1]
}

/// `(pre, period)` minimising the witness size among eventual periods up to
/// `max_period`.
fn eventual_period(bits: &[bool], max_period: usize) -> Option<(usize, usize)> {
    let n = bits.len();
    let mut best: Option<(usize, usize, usize)> = None;
    for p in 1..=max_period.min(n / 2) {
        let mut pre = 0;
        for i in (0..n - p).rev() {
            if bits[i] != bits[i + p] {
                pre = i + 1;
                break;
            }
        }
        if pre + p >= n {
            continue;
        }
        let cost = pre + p + machine::gamma0_len(pre as u64) + machine::gamma0_len(p as u64);
        if best.is_none_or(|(c, _, _)| cost < c) {
            best = Some((cost, pre, p));
        }
    }
    best.map(|(_, pre, p)| (pre, p))
}

fn estimate(program: &[Instruction], method: Method, generator: Option<&'static str>) -> ComplexityEstimate {
    let witness = machine::assemble(program);
    ComplexityEstimate {
        value: witness.len(),
        kind: EstimateKind::UpperBound,
        method,
        generator,
        witness,
    }
}

/// Candidate upper bounds from the literal and generator encodings.
fn encoding_candidates(bits: &[bool]) -> Vec<ComplexityEstimate> {
    let n = bits.len() as u64;
    let mut out = alloc::vec![estimate(&programs::literal(bits), Method::LiteralEncoding, None)];
    if bits.is_empty() {
        return out;
    }
    let p = smallest_period(bits);
    if p < bits.len() {
        let name = if p == 1 { "constant" } else { "periodic" };
        out.push(estimate(
            &programs::eventually_periodic(&[], &bits[..p], n),
            Method::GeneratorEncoding,
            Some(name),
        ));
    }
    if let Some((pre, p)) = eventual_period(bits, MAX_EVENTUAL_PERIOD) {
        if pre > 0 {
            out.push(estimate(
                &programs::eventually_periodic(&bits[..pre], &bits[pre..pre + p], n),
                Method::GeneratorEncoding,
                Some("eventually_periodic"),
            ));
        }
    }
    let champ = crate::sequence::champernowne(2, bits.len()).expect("base 2 is valid");
    if champ.symbols().iter().zip(bits).all(|(&s, &b)| (s == 1) == b) {
        out.push(estimate(
            &programs::champernowne(n),
            Method::GeneratorEncoding,
            Some("champernowne"),
        ));
    }
    for w in 1..=MAX_COUNTER_WIDTH {
        let matches = bits.iter().enumerate().all(|(i, &b)| {
            let numeral = (i / w as usize) as u64;
            let shift = w as usize - 1 - i % w as usize;
            shift >= 64 || ((numeral >> shift) & 1 == 1) == b
        });
        if matches {
            out.push(estimate(
                &programs::counter(w, n),
                Method::GeneratorEncoding,
                Some("counter"),
            ));
            break;
        }
    }
    out
}

/// Step budget under which every encoding witness for `n` bits runs.
pub fn witness_steps(n: usize) -> u64 {
    4 * n as u64 + 64
}

/// Best available upper bound on `K(σ)`: literal encoding, recognised
/// generators and, when `budget.max_len > 0`, exhaustive search.
pub fn k_upper_bound(sigma: &SymbolString, budget: Budget) -> Result<ComplexityEstimate> {
    let bits = binary(sigma)?;
    let sigma_steps = witness_steps(bits.len());
    // a cap can stop a generator before its loop is read; keep only
    // candidates that consume their whole witness
    let mut best = encoding_candidates(&bits)
        .into_iter()
        .filter(|e| e.method == Method::LiteralEncoding || e.verify(sigma, sigma_steps))
        .min_by_key(|e| e.value)
        .expect("literal candidate always present");
    if budget.max_len > 0 {
        if let ExactK::Found(e) = exact_k_small(sigma, budget.max_len.min(MAX_ENUMERATION_LEN), budget.max_steps)? {
            if e.value <= best.value {
                best = ComplexityEstimate {
                    kind: EstimateKind::UpperBound,
                    ..e
                };
            }
        }
    }
    debug_assert!(best.verify(sigma, sigma_steps.max(budget.max_steps)));
    Ok(best)
}

/// Outcome of an exhaustive search for the shortest program.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ExactK {
    /// `kind` is exact only if every shorter program halted or was rejected.
    Found(ComplexityEstimate),
    /// No program of length `<= max_len` printed σ within the step budget.
    NotFound { max_len: usize, unresolved: u64 },
}

struct Target<'a> {
    target: &'a [bool],
    best: Option<Vec<bool>>,
    shortest_unresolved: Option<usize>,
    unresolved: u64,
}

impl Target<'_> {
    fn on_track(&self, m: &Machine) -> bool {
        self.target.starts_with(m.output())
    }
}

impl Explorer for Target<'_> {
    fn halted(&mut self, m: &Machine) {
        if m.output() == self.target && self.best.as_ref().is_none_or(|b| m.program().len() < b.len()) {
            self.best = Some(m.program().to_vec());
        }
    }

    fn timed_out(&mut self, m: &Machine) {
        if self.on_track(m) {
            self.unresolved += 1;
            let len = m.program().len();
            self.shortest_unresolved = Some(self.shortest_unresolved.map_or(len, |s| s.min(len)));
        }
    }

    fn keep_exploring(&mut self, m: &Machine) -> bool {
        self.on_track(m) && self.best.as_ref().is_none_or(|b| m.program().len() < b.len())
    }
}

/// Exhaustive search for the shortest program printing σ, over programs of at
/// most `max_len <= 24` bits.
pub fn exact_k_small(sigma: &SymbolString, max_len: usize, max_steps: u64) -> Result<ExactK> {
    if max_len > MAX_ENUMERATION_LEN {
        return Err(invalid!(
            "max_len {max_len} exceeds the enumeration cap {MAX_ENUMERATION_LEN}"
        ));
    }
    let bits = binary(sigma)?;
    let mut t = Target {
        target: &bits,
        best: None,
        shortest_unresolved: None,
        unresolved: 0,
    };
    machine::enumerate(&[], max_len, max_steps, &mut t);
    Ok(match t.best {
        Some(witness) => {
            let exact = t.shortest_unresolved.is_none_or(|u| u >= witness.len());
            ExactK::Found(ComplexityEstimate {
                value: witness.len(),
                kind: if exact {
                    EstimateKind::Exact
                } else {
                    EstimateKind::UpperBound
                },
                method: Method::Exhaustive,
                generator: None,
                witness,
            })
        }
        None => ExactK::NotFound {
            max_len,
            unresolved: t.unresolved,
        },
    })
}

#[derive(Clone, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct IncompressibleCount {
    pub n: usize,
    pub c: usize,
    /// Strings of length `n` with no program shorter than `n - c` found.
    pub count: u64,
    /// `2^n - 2^(n-c+1) + 1`.
    pub lower_bound: i64,
    pub compressible: u64,
    pub max_steps: u64,
}

impl IncompressibleCount {
    pub fn satisfies_bound(&self) -> bool {
        self.count as i64 >= self.lower_bound
    }
}

struct Outputs {
    n: usize,
    seen: BTreeSet<Vec<bool>>,
}

impl Explorer for Outputs {
    fn halted(&mut self, m: &Machine) {
        if m.output().len() == self.n {
            self.seen.insert(m.output().to_vec());
        }
    }
    fn keep_exploring(&mut self, m: &Machine) -> bool {
        m.output().len() <= self.n
    }
}

/// Counts strings of length `n <= 14` that are `c`-incompressible on the
/// bundled machine under a step budget.
pub fn count_c_incompressible(n: usize, c: usize, max_steps: u64) -> Result<IncompressibleCount> {
    if n > MAX_COUNT_LEN {
        return Err(invalid!("n = {n} exceeds the counting cap {MAX_COUNT_LEN}"));
    }
    let mut outputs = Outputs {
        n,
        seen: BTreeSet::new(),
    };
    // programs shorter than n - c
    if n > c + 1 {
        machine::enumerate(&[], n - c - 1, max_steps, &mut outputs);
    }
    let total = 1u64 << n;
    let compressible = outputs.seen.len() as u64;
    let lower_bound = (1i64 << n) - if n + 1 >= c { 1i64 << (n + 1 - c) } else { 0 } + 1;
    Ok(IncompressibleCount {
        n,
        c,
        count: total - compressible,
        lower_bound,
        compressible,
        max_steps,
    })
}

#[derive(Clone, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct MarginPoint {
    pub n: usize,
    pub k_upper: usize,
    /// `K_upper(x|N) - N`; very negative values refute randomness, positive
    /// values prove nothing.
    pub margin: i64,
    pub method: Method,
    pub generator: Option<&'static str>,
}

impl MarginPoint {
    /// `K_upper < N - c`: not `c`-incompressible relative to this machine.
    pub fn refutes(&self, c: u64) -> bool {
        self.margin < -(c as i64)
    }
}

/// `K_upper(x|N) - N` at ascending checkpoints.
pub fn levin_chaitin_margin<S: SequenceSource>(
    source: &mut Prefixes<S>,
    checkpoints: &[usize],
) -> Result<Vec<MarginPoint>> {
    if checkpoints.windows(2).any(|w| w[0] >= w[1]) {
        return Err(invalid!("checkpoints must be strictly ascending"));
    }
    checkpoints
        .iter()
        .map(|&n| {
            let prefix = source.truncate(n)?;
            let est = k_upper_bound(&prefix, Budget::default())?;
            Ok(MarginPoint {
                n,
                k_upper: est.value,
                margin: est.value as i64 - n as i64,
                method: est.method,
                generator: est.generator,
            })
        })
        .collect()
}

/// Exact dyadic rational `numerator / 2^exponent`, kept in lowest terms.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Dyadic {
    pub numerator: u64,
    pub exponent: u32,
}

impl core::ops::Add for Dyadic {
    type Output = Dyadic;
    fn add(self, other: Dyadic) -> Dyadic {
        let e = self.exponent.max(other.exponent);
        let a = self.numerator << (e - self.exponent);
        let b = other.numerator << (e - other.exponent);
        Dyadic::new(a + b, e)
    }
}

impl Dyadic {
    pub const ZERO: Dyadic = Dyadic {
        numerator: 0,
        exponent: 0,
    };

    pub fn new(numerator: u64, exponent: u32) -> Self {
        let mut d = Dyadic { numerator, exponent };
        d.reduce();
        d
    }

    /// `2^-len`.
    pub fn unit(len: u32) -> Self {
        Dyadic::new(1, len)
    }

    fn reduce(&mut self) {
        if self.numerator == 0 {
            self.exponent = 0;
            return;
        }
        let tz = self.numerator.trailing_zeros().min(self.exponent);
        self.numerator >>= tz;
        self.exponent -= tz;
    }

    pub fn to_f64(self) -> f64 {
        self.numerator as f64 / libm::exp2(self.exponent as f64)
    }

    pub fn is_below_one(self) -> bool {
        (self.numerator as u128) < (1u128 << self.exponent)
    }
}

impl PartialOrd for Dyadic {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Dyadic {
    fn cmp(&self, other: &Self) -> Ordering {
        let e = self.exponent.max(other.exponent);
        ((self.numerator as u128) << (e - self.exponent)).cmp(&((other.numerator as u128) << (e - other.exponent)))
    }
}

impl fmt::Display for Dyadic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/2^{}", self.numerator, self.exponent)
    }
}

/// Program of at most 32 bits packed into an integer (first bit most
/// significant).
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PackedProgram {
    pub len: u8,
    pub bits: u32,
}

impl PackedProgram {
    pub fn pack(bits: &[bool]) -> Self {
        debug_assert!(bits.len() <= 32);
        PackedProgram {
            len: bits.len() as u8,
            bits: bits.iter().fold(0, |acc, &b| (acc << 1) | b as u32),
        }
    }

    pub fn unpack(self) -> Vec<bool> {
        (0..self.len).rev().map(|s| (self.bits >> s) & 1 == 1).collect()
    }

    /// `self` is a proper prefix of `other`.
    pub fn is_proper_prefix_of(self, other: PackedProgram) -> bool {
        self.len < other.len && other.bits >> (other.len - self.len) == self.bits
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct OmegaEstimate {
    pub lower_bound: Dyadic,
    pub programs_found: u64,
    pub max_len: usize,
    pub max_steps: u64,
    pub timeouts: u64,
    /// Halting programs in lexicographic order.
    pub halting_programs: Vec<PackedProgram>,
}

impl OmegaEstimate {
    /// Merges estimates of disjoint prefix subtrees with the same budget.
    pub fn merge(parts: impl IntoIterator<Item = OmegaEstimate>) -> Option<OmegaEstimate> {
        let mut it = parts.into_iter();
        let mut acc = it.next()?;
        for p in it {
            acc.lower_bound = acc.lower_bound + p.lower_bound;
            acc.programs_found += p.programs_found;
            acc.timeouts += p.timeouts;
            acc.halting_programs.extend(p.halting_programs);
        }
        acc.halting_programs.sort();
        Some(acc)
    }

    /// First pair `(a, b)` with `a` a proper prefix of `b`, if any.
    pub fn prefix_violation(&self) -> Option<(PackedProgram, PackedProgram)> {
        // in lexicographic order a prefix sorts immediately before some run of
        // its extensions, so checking against the last few shorter programs
        // on the stack suffices
        let mut stack: Vec<PackedProgram> = Vec::new();
        let mut sorted = self.halting_programs.clone();
        sorted.sort_by_key(|a| a.unpack());
        for p in sorted {
            while let Some(&top) = stack.last() {
                if top.is_proper_prefix_of(p) {
                    return Some((top, p));
                }
                let common = top.len.min(p.len);
                if top.bits >> (top.len - common) == p.bits >> (p.len - common) && top.len < p.len {
                    break;
                }
                stack.pop();
            }
            stack.push(p);
        }
        None
    }
}

#[derive(Default)]
struct Halting {
    sum: Dyadic,
    found: u64,
    timeouts: u64,
    log: Vec<PackedProgram>,
}

impl Explorer for Halting {
    fn halted(&mut self, m: &Machine) {
        let len = m.program().len();
        self.sum = self.sum + Dyadic::unit(len as u32);
        self.found += 1;
        self.log.push(PackedProgram::pack(m.program()));
    }
    fn timed_out(&mut self, _m: &Machine) {
        self.timeouts += 1;
    }
}

/// Lower bound on the halting probability of the bundled machine from all
/// programs of at most `max_len <= 24` bits that halt within `max_steps`.
pub fn omega_lower_bound(max_len: usize, max_steps: u64) -> Result<OmegaEstimate> {
    omega_subtree(&[], max_len, max_steps)
}

/// Contribution of programs starting with `prefix`; subtrees of a partition
/// merge with [`OmegaEstimate::merge`].
pub fn omega_subtree(prefix: &[bool], max_len: usize, max_steps: u64) -> Result<OmegaEstimate> {
    if max_len > MAX_ENUMERATION_LEN {
        return Err(Error::InvalidArgument(alloc::format!(
            "max_len {max_len} exceeds the enumeration cap {MAX_ENUMERATION_LEN}"
        )));
    }
    let mut h = Halting::default();
    if max_len > 0 {
        machine::enumerate(prefix, max_len, max_steps, &mut h);
    }
    Ok(OmegaEstimate {
        lower_bound: h.sum,
        programs_found: h.found,
        max_len,
        max_steps,
        timeouts: h.timeouts,
        halting_programs: h.log,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sequence::{champernowne, ConstantSource};

    fn s(bits: &str) -> SymbolString {
        SymbolString::from_bits(bits).unwrap()
    }

    #[test]
    fn dyadic_arithmetic() {
        let half = Dyadic::unit(1);
        assert_eq!(half + Dyadic::unit(2), Dyadic::new(3, 2));
        assert_eq!(half + half, Dyadic::new(1, 0));
        assert!(Dyadic::new(3, 2) > half);
        assert!(Dyadic::new(3, 2).is_below_one());
        assert!(!Dyadic::new(1, 0).is_below_one());
        assert_eq!(Dyadic::new(8, 5), Dyadic::new(1, 2));
    }

    #[test]
    fn constant_string_is_short() {
        let sigma = s(&"1".repeat(30));
        let e = k_upper_bound(&sigma, Budget::default()).unwrap();
        assert_eq!(e.generator, Some("constant"));
        // CAP γ₀(30) + LIT γ₀(1) "1" + JMP γ₀(0)
        assert_eq!(e.value, 4 + 9 + 4 + 3 + 1 + 4 + 1);
        assert!(e.value < 30);
        assert!(e.verify(&sigma, 1_000));
    }

    #[test]
    fn champernowne_bound_is_logarithmic() {
        let n = 10_000;
        let sigma = champernowne(2, n).unwrap();
        let e = k_upper_bound(&sigma, Budget::default()).unwrap();
        assert_eq!(e.generator, Some("champernowne"));
        // 4 opcodes + γ₀(0) twice + γ₀(1) + γ₀(n)
        let c_champ = 16 + 1 + 1 + 3 + 1;
        assert!(e.value <= c_champ + 2 * ceil_log2(n as u64));
        assert!(e.verify(&sigma, witness_steps(n)));
    }

    #[test]
    fn literal_bound_always_applies() {
        let sigma = s("10110100111010001101");
        let e = k_upper_bound(&sigma, Budget::default()).unwrap();
        assert!(e.value <= literal_bound(20));
        assert!(e.verify(&sigma, 1_000));
    }

    #[test]
    fn counter_and_eventually_periodic_recognised() {
        let counter = s("000001010011100101110111000001");
        let e = k_upper_bound(&counter, Budget::default()).unwrap();
        assert!(e.verify(&counter, 1_000));

        let mut bits = alloc::string::String::from("1101001");
        bits.push_str(&"011".repeat(40));
        let sigma = s(&bits);
        let e = k_upper_bound(&sigma, Budget::default()).unwrap();
        assert_eq!(e.generator, Some("eventually_periodic"));
        assert!(e.verify(&sigma, 10_000));
    }

    #[test]
    fn non_binary_rejected() {
        let sigma = SymbolString::from_digits(3, "012").unwrap();
        assert!(k_upper_bound(&sigma, Budget::default()).is_err());
    }

    #[test]
    fn exact_k_of_empty_string_is_halt() {
        match exact_k_small(&s(""), 12, 1_000).unwrap() {
            ExactK::Found(e) => {
                assert_eq!(e.value, 4);
                assert_eq!(e.kind, EstimateKind::Exact);
                assert!(e.verify(&s(""), 1_000));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn exact_k_of_single_zero() {
        // OUT R0; HALT is 9 bits and nothing shorter prints "0"
        match exact_k_small(&s("0"), 14, 1_000).unwrap() {
            ExactK::Found(e) => {
                assert_eq!(e.value, 9);
                assert_eq!(e.kind, EstimateKind::Exact);
                assert!(e.verify(&s("0"), 1_000));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn exact_k_not_found_below_cap() {
        let r = exact_k_small(&s("1011001110"), 8, 1_000).unwrap();
        assert!(matches!(r, ExactK::NotFound { max_len: 8, .. }));
        assert!(exact_k_small(&s("1"), 25, 10).is_err());
    }

    #[test]
    fn exhaustive_budget_never_worsens_bound() {
        let sigma = s("0000");
        let loose = k_upper_bound(&sigma, Budget::default()).unwrap();
        let tight = k_upper_bound(
            &sigma,
            Budget {
                max_len: 16,
                max_steps: 1_000,
            },
        )
        .unwrap();
        assert!(tight.value <= loose.value);
        assert!(tight.verify(&sigma, 1_000));
    }

    #[test]
    fn counting_bound_examples() {
        let r = count_c_incompressible(8, 1, 10_000).unwrap();
        assert_eq!(r.lower_bound, 1);
        assert!(r.satisfies_bound());
        let r = count_c_incompressible(8, 3, 10_000).unwrap();
        assert_eq!(r.lower_bound, 193);
        assert!(r.satisfies_bound());
        let r = count_c_incompressible(4, 4, 10_000).unwrap();
        assert_eq!(r.lower_bound, 15);
        assert!(r.count >= 15);
        assert!(count_c_incompressible(15, 1, 10).is_err());
    }

    #[test]
    fn counting_agrees_with_per_string_search() {
        // oracle: exact_k_small run on each string separately
        let (n, c) = (6usize, 1usize);
        let r = count_c_incompressible(n, c, 2_000).unwrap();
        let mut count = 0;
        for v in 0u32..(1 << n) {
            let bits: alloc::string::String = (0..n)
                .rev()
                .map(|i| if (v >> i) & 1 == 1 { '1' } else { '0' })
                .collect();
            let found = matches!(exact_k_small(&s(&bits), n - c - 1, 2_000).unwrap(), ExactK::Found(_));
            if !found {
                count += 1;
            }
        }
        assert_eq!(r.count, count);
    }

    #[test]
    fn constant_source_margin_diverges() {
        let mut src = Prefixes::new(ConstantSource::new(2, 0).unwrap());
        let pts = levin_chaitin_margin(&mut src, &[100, 1_000, 10_000]).unwrap();
        for w in pts.windows(2) {
            assert!(w[1].margin < w[0].margin);
        }
        let last = pts.last().unwrap();
        // CAP γ₀(N) + LIT "0" + JMP: about 2 log₂ N plus opcodes
        assert!(last.margin <= -10_000 + 2 * ceil_log2(10_001) as i64 + 16);
        assert!(last.refutes(64));
        assert!(levin_chaitin_margin(&mut src, &[10, 5]).is_err());
    }

    #[test]
    fn omega_small_budgets() {
        let zero = omega_lower_bound(0, 1_000).unwrap();
        assert_eq!(zero.lower_bound, Dyadic::ZERO);
        let a = omega_lower_bound(10, 1_000).unwrap();
        let b = omega_lower_bound(11, 1_000).unwrap();
        let c = omega_lower_bound(11, 2_000).unwrap();
        assert!(a.lower_bound <= b.lower_bound && b.lower_bound <= c.lower_bound);
        assert!(a.lower_bound >= Dyadic::unit(4));
        assert!(c.lower_bound.is_below_one());
        assert_eq!(c.prefix_violation(), None);
        assert!(omega_lower_bound(25, 1).is_err());
    }

    #[test]
    fn omega_partition_merges_to_whole() {
        let whole = omega_lower_bound(12, 500).unwrap();
        let parts = (0..4u8).map(|p| omega_subtree(&[p & 2 != 0, p & 1 != 0], 12, 500).unwrap());
        let merged = OmegaEstimate::merge(parts).unwrap();
        assert_eq!(merged.lower_bound, whole.lower_bound);
        assert_eq!(merged.programs_found, whole.programs_found);
    }

    #[test]
    fn prefix_violation_detected() {
        let mut e = omega_lower_bound(0, 1).unwrap();
        e.halting_programs = alloc::vec![
            PackedProgram::pack(&[false, true]),
            PackedProgram::pack(&[true]),
            PackedProgram::pack(&[false, true, true]),
        ];
        assert!(e.prefix_violation().is_some());
    }
}
