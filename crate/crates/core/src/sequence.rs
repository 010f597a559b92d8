//! Finite strings over a `k`-symbol alphabet and the sources that emit them.
//!
//! Infinite sequences never exist as objects here. A [`SequenceSource`] is a
//! cursor, and [`Prefixes`] turns a cursor into a prefix-consistent view:
//! asking for `n` and later `m > n` symbols returns an extension of the first
//! answer.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::error::{Error, Result};
use crate::invalid;

/// Finite string over `{0, .., k-1}`.
#[derive(Clone, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SymbolString {
    alphabet_size: u32,
    symbols: Vec<u32>,
}

impl SymbolString {
    pub fn new(alphabet_size: u32, symbols: Vec<u32>) -> Result<Self> {
        if alphabet_size < 2 {
            return Err(invalid!("alphabet size must be at least 2, got {alphabet_size}"));
        }
        if let Some((i, s)) = symbols.iter().enumerate().find(|(_, &s)| s >= alphabet_size) {
            return Err(invalid!("symbol {s} at position {i} is outside base {alphabet_size}"));
        }
        Ok(Self { alphabet_size, symbols })
    }

    pub fn empty(alphabet_size: u32) -> Self {
        Self {
            alphabet_size: alphabet_size.max(2),
            symbols: Vec::new(),
        }
    }

    /// Binary string from `'0'`/`'1'` characters.
    pub fn from_bits(bits: &str) -> Result<Self> {
        Self::from_digits(2, bits)
    }

    /// Parses ASCII digits; only valid for `k <= 10`.
    pub fn from_digits(alphabet_size: u32, digits: &str) -> Result<Self> {
        if alphabet_size > 10 {
            return Err(invalid!("digit notation only covers bases up to 10"));
        }
        let symbols = digits
            .chars()
            .map(|c| c.to_digit(10).ok_or_else(|| invalid!("not a digit: {c:?}")))
            .collect::<Result<Vec<_>>>()?;
        Self::new(alphabet_size, symbols)
    }

    pub fn from_bools(bits: &[bool]) -> Self {
        Self {
            alphabet_size: 2,
            symbols: bits.iter().map(|&b| b as u32).collect(),
        }
    }

    pub fn alphabet_size(&self) -> u32 {
        self.alphabet_size
    }

    pub fn symbols(&self) -> &[u32] {
        &self.symbols
    }

    pub fn into_symbols(self) -> Vec<u32> {
        self.symbols
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    pub fn is_prefix_of(&self, other: &SymbolString) -> bool {
        self.alphabet_size == other.alphabet_size && other.symbols.starts_with(&self.symbols)
    }

    pub fn prefix(&self, n: usize) -> SymbolString {
        SymbolString {
            alphabet_size: self.alphabet_size,
            symbols: self.symbols[..n.min(self.len())].to_vec(),
        }
    }

    /// Bits of a binary string; `None` for larger alphabets.
    pub fn to_bools(&self) -> Option<Vec<bool>> {
        (self.alphabet_size == 2).then(|| self.symbols.iter().map(|&s| s == 1).collect())
    }

    /// Digit notation for `k <= 10`, comma separated otherwise.
    pub fn to_text(&self) -> String {
        use core::fmt::Write;
        let mut out = String::with_capacity(self.len());
        for (i, s) in self.symbols.iter().enumerate() {
            if self.alphabet_size <= 10 {
                out.push(char::from_digit(*s, 10).unwrap_or('?'));
            } else {
                if i > 0 {
                    out.push(',');
                }
                let _ = write!(out, "{s}");
            }
        }
        out
    }
}

impl fmt::Display for SymbolString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

impl fmt::Debug for SymbolString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "SymbolString(k={}, \"{}\")", self.alphabet_size, self.to_text())
    }
}

/// How windows are laid over the string when counting blocks.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum WindowMode {
    #[default]
    Overlapping,
    Disjoint,
}

/// Block counts keyed by the block's base-`k` numeral (first symbol most
/// significant).
#[derive(Clone, Debug, PartialEq)]
pub struct BlockFrequencies {
    pub alphabet_size: u32,
    pub block_len: usize,
    pub windows: u64,
    pub counts: BTreeMap<u64, u64>,
}

impl BlockFrequencies {
    /// Number of possible blocks, `k^ℓ`.
    pub fn block_space(&self) -> u64 {
        (self.alphabet_size as u64).pow(self.block_len as u32)
    }

    pub fn count(&self, block: &[u32]) -> u64 {
        self.counts
            .get(&block_index(self.alphabet_size, block))
            .copied()
            .unwrap_or(0)
    }

    /// Relative frequency of `block`; zero for blocks never seen.
    pub fn frequency(&self, block: &[u32]) -> f64 {
        if block.len() != self.block_len || self.windows == 0 {
            return 0.0;
        }
        self.count(block) as f64 / self.windows as f64
    }

    /// `(block, relative frequency)` for every observed block.
    pub fn iter(&self) -> impl Iterator<Item = (Vec<u32>, f64)> + '_ {
        self.counts.iter().map(|(&idx, &c)| {
            (
                block_from_index(self.alphabet_size, self.block_len, idx),
                c as f64 / self.windows as f64,
            )
        })
    }
}

pub(crate) fn block_index(k: u32, block: &[u32]) -> u64 {
    block.iter().fold(0u64, |acc, &s| acc * k as u64 + s as u64)
}

pub(crate) fn block_from_index(k: u32, len: usize, mut idx: u64) -> Vec<u32> {
    let mut out = alloc::vec![0u32; len];
    for slot in out.iter_mut().rev() {
        *slot = (idx % k as u64) as u32;
        idx /= k as u64;
    }
    out
}

/// Relative frequencies of every length-`block_len` block over overlapping
/// windows.
pub fn block_frequencies(sigma: &SymbolString, block_len: usize) -> Result<BlockFrequencies> {
    block_frequencies_with(sigma, block_len, WindowMode::Overlapping)
}

pub fn block_frequencies_with(sigma: &SymbolString, block_len: usize, mode: WindowMode) -> Result<BlockFrequencies> {
    if block_len == 0 {
        return Err(invalid!("block length must be at least 1"));
    }
    if block_len > sigma.len() {
        return Err(invalid!(
            "block length {block_len} exceeds string length {}",
            sigma.len()
        ));
    }
    let k = sigma.alphabet_size() as u64;
    let space = k
        .checked_pow(block_len as u32)
        .ok_or_else(|| invalid!("k^l overflows for k={k}, l={block_len}"))?;
    let symbols = sigma.symbols();
    let mut counts = BTreeMap::new();
    let windows = match mode {
        WindowMode::Overlapping => {
            // rolling numeral; the leading digit weight is k^(l-1)
            let lead = space / k;
            let mut idx = block_index(k as u32, &symbols[..block_len]);
            *counts.entry(idx).or_insert(0u64) += 1;
            for &s in &symbols[block_len..] {
                idx = (idx % lead) * k + s as u64;
                *counts.entry(idx).or_insert(0) += 1;
            }
            (symbols.len() - block_len + 1) as u64
        }
        WindowMode::Disjoint => {
            let mut n = 0;
            for chunk in symbols.chunks_exact(block_len) {
                *counts.entry(block_index(k as u32, chunk)).or_insert(0) += 1;
                n += 1;
            }
            n
        }
    };
    Ok(BlockFrequencies {
        alphabet_size: sigma.alphabet_size(),
        block_len,
        windows,
        counts,
    })
}

/// First `n` digits of the base-`k` concatenation `0, 1, 2, ...`.
pub fn champernowne(base: u32, n: usize) -> Result<SymbolString> {
    let mut gen = Champernowne::new(base, false)?;
    let symbols = (0..n).map(|_| gen.next_digit()).collect();
    SymbolString::new(base, symbols)
}

/// Streaming Champernowne digits.
#[derive(Clone, Debug)]
pub struct Champernowne {
    base: u32,
    start: u64,
    next_numeral: u64,
    pending: Vec<u32>,
}

impl Champernowne {
    /// `start_at_one` skips the leading numeral `0`.
    pub fn new(base: u32, start_at_one: bool) -> Result<Self> {
        if base < 2 {
            return Err(invalid!("Champernowne base must be at least 2"));
        }
        let start = start_at_one as u64;
        Ok(Self {
            base,
            start,
            next_numeral: start,
            pending: Vec::new(),
        })
    }

    pub fn next_digit(&mut self) -> u32 {
        if self.pending.is_empty() {
            let mut t = self.next_numeral;
            self.next_numeral += 1;
            // digits pushed least significant first, popped most significant first
            loop {
                self.pending.push((t % self.base as u64) as u32);
                t /= self.base as u64;
                if t == 0 {
                    break;
                }
            }
        }
        self.pending.pop().expect("pending digits refilled above")
    }
}

/// Which generator backs a source.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum SourceKind {
    BornSampler,
    Champernowne,
    Constant,
    Periodic,
    File,
    OsEntropy,
}

/// Stateful cursor over an infinite (or at least unbounded) sequence.
pub trait SequenceSource {
    fn kind(&self) -> SourceKind;

    fn alphabet_size(&self) -> u32;

    fn next_symbol(&mut self) -> Result<u32>;

    /// `false` only for sources whose output cannot be regenerated.
    fn is_reproducible(&self) -> bool {
        self.kind() != SourceKind::OsEntropy
    }
}

impl<S: SequenceSource + ?Sized> SequenceSource for alloc::boxed::Box<S> {
    fn kind(&self) -> SourceKind {
        (**self).kind()
    }
    fn alphabet_size(&self) -> u32 {
        (**self).alphabet_size()
    }
    fn next_symbol(&mut self) -> Result<u32> {
        (**self).next_symbol()
    }
    fn is_reproducible(&self) -> bool {
        (**self).is_reproducible()
    }
}

#[derive(Clone, Debug)]
pub struct ConstantSource {
    alphabet_size: u32,
    symbol: u32,
}

impl ConstantSource {
    pub fn new(alphabet_size: u32, symbol: u32) -> Result<Self> {
        if alphabet_size < 2 || symbol >= alphabet_size {
            return Err(invalid!("constant symbol {symbol} not in base {alphabet_size}"));
        }
        Ok(Self { alphabet_size, symbol })
    }
}

impl SequenceSource for ConstantSource {
    fn kind(&self) -> SourceKind {
        SourceKind::Constant
    }
    fn alphabet_size(&self) -> u32 {
        self.alphabet_size
    }
    fn next_symbol(&mut self) -> Result<u32> {
        Ok(self.symbol)
    }
}

#[derive(Clone, Debug)]
pub struct PeriodicSource {
    pattern: SymbolString,
    pos: usize,
}

impl PeriodicSource {
    pub fn new(pattern: SymbolString) -> Result<Self> {
        if pattern.is_empty() {
            return Err(invalid!("periodic pattern must be non-empty"));
        }
        Ok(Self { pattern, pos: 0 })
    }
}

impl SequenceSource for PeriodicSource {
    fn kind(&self) -> SourceKind {
        SourceKind::Periodic
    }
    fn alphabet_size(&self) -> u32 {
        self.pattern.alphabet_size()
    }
    fn next_symbol(&mut self) -> Result<u32> {
        let s = self.pattern.symbols()[self.pos];
        self.pos = (self.pos + 1) % self.pattern.len();
        Ok(s)
    }
}

impl SequenceSource for Champernowne {
    fn kind(&self) -> SourceKind {
        SourceKind::Champernowne
    }
    fn alphabet_size(&self) -> u32 {
        self.base
    }
    fn next_symbol(&mut self) -> Result<u32> {
        Ok(self.next_digit())
    }
}

impl Champernowne {
    pub fn starts_at_one(&self) -> bool {
        self.start == 1
    }
}

/// Prefix-consistent view over a source: symbols are pulled once and kept.
#[derive(Clone, Debug)]
pub struct Prefixes<S> {
    source: S,
    history: Vec<u32>,
}

impl<S: SequenceSource> Prefixes<S> {
    pub fn new(source: S) -> Self {
        Self {
            source,
            history: Vec::new(),
        }
    }

    pub fn source(&self) -> &S {
        &self.source
    }

    /// The first `n` symbols of the sequence.
    pub fn truncate(&mut self, n: usize) -> Result<SymbolString> {
        self.history.reserve(n.saturating_sub(self.history.len()));
        while self.history.len() < n {
            let s = self.source.next_symbol()?;
            if s >= self.source.alphabet_size() {
                return Err(Error::ContractViolation(alloc::format!(
                    "source emitted {s} outside base {}",
                    self.source.alphabet_size()
                )));
            }
            self.history.push(s);
        }
        Ok(SymbolString {
            alphabet_size: self.source.alphabet_size(),
            symbols: self.history[..n].to_vec(),
        })
    }
}

/// One-shot convenience: `n` symbols from a fresh cursor.
pub fn truncate<S: SequenceSource>(source: S, n: usize) -> Result<SymbolString> {
    Prefixes::new(source).truncate(n)
}
