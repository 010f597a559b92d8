//! Frequency and block statistics with z-score verdicts.

use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::error::Result;
use crate::invalid;
use crate::sequence::{block_frequencies, block_from_index, SequenceSource, SymbolString};

/// Default z threshold for battery sub-tests.
pub const Z_THRESHOLD: f64 = 4.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Verdict {
    Pass,
    Fail,
    /// Inconclusive, e.g. a degenerate marginal. Never counts as a pass.
    Skipped,
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TestReport {
    pub test_name: String,
    pub statistic: f64,
    pub expected: f64,
    pub z_score: f64,
    pub threshold: f64,
    pub verdict: Verdict,
    pub parameters: BTreeMap<String, String>,
}

impl TestReport {
    /// Verdict is `Pass` exactly when `|z| <= threshold`.
    pub fn scored(name: impl Into<String>, statistic: f64, expected: f64, z_score: f64, threshold: f64) -> Self {
        let verdict = if z_score.abs() <= threshold {
            Verdict::Pass
        } else {
            Verdict::Fail
        };
        TestReport {
            test_name: name.into(),
            statistic,
            expected,
            z_score,
            threshold,
            verdict,
            parameters: BTreeMap::new(),
        }
    }

    pub fn skipped(name: impl Into<String>, reason: &str) -> Self {
        let mut r = TestReport {
            test_name: name.into(),
            statistic: f64::NAN,
            expected: f64::NAN,
            z_score: f64::NAN,
            threshold: Z_THRESHOLD,
            verdict: Verdict::Skipped,
            parameters: BTreeMap::new(),
        };
        r.parameters.insert("reason".into(), reason.into());
        r
    }

    pub fn with(mut self, key: &str, value: impl ToString) -> Self {
        self.parameters.insert(key.into(), value.to_string());
        self
    }

    pub fn passed(&self) -> bool {
        self.verdict == Verdict::Pass
    }
}

/// Variance of the overlapping-window count of `block` among `windows`
/// windows of an i.i.d. uniform source over `k` symbols.
pub fn overlapping_count_variance(block: &[u32], k: u32, windows: u64) -> f64 {
    let l = block.len();
    let kf = k as f64;
    let p = libm::pow(kf, -(l as f64));
    let w = windows as f64;
    let mut var = w * p * (1.0 - p);
    for d in 1..l {
        if (d as u64) >= windows {
            break;
        }
        let periodic = (0..l - d).all(|j| block[j] == block[j + d]);
        let joint = if periodic { p * libm::pow(kf, -(d as f64)) } else { 0.0 };
        var += 2.0 * (w - d as f64) * (joint - p * p);
    }
    var
}

fn block_label(block: &[u32], k: u32) -> String {
    SymbolString::new(k, block.to_vec())
        .map(|s| s.to_text())
        .unwrap_or_default()
}

fn check_length(sigma: &SymbolString, max_block_len: usize) -> Result<()> {
    if max_block_len == 0 {
        return Err(invalid!("max block length must be at least 1"));
    }
    let k = sigma.alphabet_size() as f64;
    let min = 100.0 * libm::pow(k, max_block_len as f64);
    if (sigma.len() as f64) < min {
        return Err(invalid!(
            "sequence of length {} is too short for blocks up to {max_block_len}; need at least {min}",
            sigma.len()
        ));
    }
    Ok(())
}

/// z-score of every block frequency against `k^-ℓ` for `ℓ <= max_block_len`.
pub fn borel_normality_test(sigma: &SymbolString, max_block_len: usize) -> Result<Vec<TestReport>> {
    borel_with_threshold(sigma, max_block_len, Z_THRESHOLD)
}

pub fn borel_with_threshold(sigma: &SymbolString, max_block_len: usize, threshold: f64) -> Result<Vec<TestReport>> {
    check_length(sigma, max_block_len)?;
    let k = sigma.alphabet_size();
    let mut out = Vec::new();
    for l in 1..=max_block_len {
        let freqs = block_frequencies(sigma, l)?;
        let w = freqs.windows;
        let p = libm::pow(k as f64, -(l as f64));
        for idx in 0..freqs.block_space() {
            let block = block_from_index(k, l, idx);
            let count = freqs.count(&block);
            let sd = libm::sqrt(overlapping_count_variance(&block, k, w));
            let z = (count as f64 - w as f64 * p) / sd;
            out.push(
                TestReport::scored("borel", count as f64 / w as f64, p, z, threshold)
                    .with("block", block_label(&block, k))
                    .with("block_len", l)
                    .with("windows", w),
            );
        }
    }
    Ok(out)
}

/// Deterministic variant for computable sequences: `z = |f - k^-ℓ| / tolerance`,
/// passing at `|z| <= 1`.
pub fn frequency_deviation_test(sigma: &SymbolString, max_block_len: usize, tolerance: f64) -> Result<Vec<TestReport>> {
    if !(tolerance > 0.0) {
        return Err(invalid!("tolerance must be positive, got {tolerance}"));
    }
    check_length(sigma, max_block_len)?;
    let k = sigma.alphabet_size();
    let mut out = Vec::new();
    for l in 1..=max_block_len {
        let freqs = block_frequencies(sigma, l)?;
        let p = libm::pow(k as f64, -(l as f64));
        for idx in 0..freqs.block_space() {
            let block = block_from_index(k, l, idx);
            let f = freqs.frequency(&block);
            out.push(
                TestReport::scored("frequency_deviation", f, p, (f - p) / tolerance, 1.0)
                    .with("block", block_label(&block, k))
                    .with("block_len", l)
                    .with("tolerance", tolerance),
            );
        }
    }
    Ok(out)
}

/// All overlapping occurrence positions of `target` among the first
/// `horizon` symbols of `source`.
pub fn monkey_search<S: SequenceSource + ?Sized>(
    target: &SymbolString,
    source: &mut S,
    horizon: usize,
) -> Result<Vec<usize>> {
    if horizon < target.len() {
        return Err(invalid!(
            "horizon {horizon} is shorter than the target ({})",
            target.len()
        ));
    }
    if target.alphabet_size() != source.alphabet_size() {
        return Err(invalid!(
            "target alphabet {} differs from source alphabet {}",
            target.alphabet_size(),
            source.alphabet_size()
        ));
    }
    let t = target.symbols();
    let m = t.len();
    let mut hits = Vec::new();
    if m == 0 {
        hits.extend(0..=horizon);
        return Ok(hits);
    }
    let mut fail = alloc::vec![0usize; m];
    for i in 1..m {
        let mut k = fail[i - 1];
        while k > 0 && t[i] != t[k] {
            k = fail[k - 1];
        }
        if t[i] == t[k] {
            k += 1;
        }
        fail[i] = k;
    }
    let mut q = 0;
    for i in 0..horizon {
        let s = source.next_symbol()?;
        while q > 0 && (q == m || s != t[q]) {
            q = fail[q - 1];
        }
        if s == t[q] {
            q += 1;
        }
        if q == m {
            hits.push(i + 1 - m);
        }
    }
    Ok(hits)
}

/// Occurrence count against the i.i.d. uniform expectation.
pub fn monkey_report(target: &SymbolString, occurrences: usize, horizon: usize, threshold: f64) -> TestReport {
    let k = target.alphabet_size();
    let windows = (horizon + 1).saturating_sub(target.len()) as u64;
    let p = libm::pow(k as f64, -(target.len() as f64));
    let expected = windows as f64 * p;
    let sd = libm::sqrt(overlapping_count_variance(target.symbols(), k, windows));
    let z = if sd > 0.0 {
        (occurrences as f64 - expected) / sd
    } else {
        0.0
    };
    TestReport::scored("monkey", occurrences as f64, expected, z, threshold)
        .with("target", target.to_text())
        .with("horizon", horizon)
}

/// Per-cell check `|f_i - p_i| <= sigmas * sqrt(p_i(1-p_i)/n)`; each cell
/// reports its z against `sigmas`.
pub fn cell_frequency_tests(name: &str, counts: &[u64], probabilities: &[f64], sigmas: f64) -> Result<Vec<TestReport>> {
    if counts.len() != probabilities.len() {
        return Err(invalid!("{} counts for {} cells", counts.len(), probabilities.len()));
    }
    let n: u64 = counts.iter().sum();
    if n == 0 {
        return Err(invalid!("no samples"));
    }
    Ok(counts
        .iter()
        .zip(probabilities)
        .enumerate()
        .map(|(i, (&c, &p))| {
            let f = c as f64 / n as f64;
            let sd = libm::sqrt(p * (1.0 - p) / n as f64);
            let z = if sd > 0.0 {
                (f - p) / sd
            } else if (f - p).abs() <= 1e-12 {
                0.0
            } else {
                f64::INFINITY
            };
            TestReport::scored(name, f, p, z, sigmas).with("cell", i).with("n", n)
        })
        .collect())
}

/// Pearson chi-square of independence on a contingency table, after
/// dropping empty rows and columns. `None` when fewer than two rows or
/// columns remain.
pub fn chi_square_independence(table: &[Vec<u64>]) -> Option<(f64, u64)> {
    let cols = table.first().map_or(0, Vec::len);
    let rows: Vec<&Vec<u64>> = table.iter().filter(|r| r.iter().sum::<u64>() > 0).collect();
    let keep: Vec<usize> = (0..cols).filter(|&j| rows.iter().any(|r| r[j] > 0)).collect();
    if rows.len() < 2 || keep.len() < 2 {
        return None;
    }
    let row_tot: Vec<f64> = rows
        .iter()
        .map(|r| keep.iter().map(|&j| r[j]).sum::<u64>() as f64)
        .collect();
    let col_tot: Vec<f64> = keep
        .iter()
        .map(|&j| rows.iter().map(|r| r[j]).sum::<u64>() as f64)
        .collect();
    let n: f64 = row_tot.iter().sum();
    let mut chi2 = 0.0;
    for (i, r) in rows.iter().enumerate() {
        for (jj, &j) in keep.iter().enumerate() {
            let e = row_tot[i] * col_tot[jj] / n;
            let d = r[j] as f64 - e;
            chi2 += d * d / e;
        }
    }
    Some((chi2, ((rows.len() - 1) * (keep.len() - 1)) as u64))
}

/// Wilson-Hilferty normal approximation of a chi-square variate.
pub fn chi_square_z(chi2: f64, dof: u64) -> f64 {
    let k = dof as f64;
    let v = 2.0 / (9.0 * k);
    (libm::cbrt(chi2 / k) - (1.0 - v)) / libm::sqrt(v)
}

/// Independence test on a contingency table; degenerate tables are skipped.
pub fn independence_test(name: &str, table: &[Vec<u64>], threshold: f64) -> TestReport {
    match chi_square_independence(table) {
        Some((chi2, dof)) => {
            TestReport::scored(name, chi2, dof as f64, chi_square_z(chi2, dof), threshold).with("dof", dof)
        }
        None => TestReport::skipped(name, "degenerate marginal"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::born::{sample_sequence, BornMeasure};
    use crate::sequence::{champernowne, ConstantSource, PeriodicSource};
    use proptest::prelude::*;

    fn coin(n: usize, seed: u64) -> SymbolString {
        let mu = BornMeasure::scalar(&[0.0, 1.0], &[0.5, 0.5]).unwrap();
        sample_sequence(&mu, n, seed).unwrap().sequence
    }

    #[test]
    fn variance_matches_enumeration() {
        // oracle: exact variance of the count over all 2^n strings
        for block in [&[1u32, 1][..], &[0, 1], &[1, 0, 1], &[0, 0, 1]] {
            let n = 10usize;
            let l = block.len();
            let w = (n - l + 1) as u64;
            let (mut s1, mut s2) = (0f64, 0f64);
            for v in 0u32..(1 << n) {
                let bits: Vec<u32> = (0..n).map(|i| (v >> i) & 1).collect();
                let c = bits.windows(l).filter(|win| *win == block).count() as f64;
                s1 += c;
                s2 += c * c;
            }
            let total = (1u32 << n) as f64;
            let var = s2 / total - (s1 / total) * (s1 / total);
            assert!(
                (overlapping_count_variance(block, 2, w) - var).abs() < 1e-9,
                "{block:?}"
            );
        }
    }

    #[test]
    fn fair_coin_passes_blocks_to_three() {
        let sigma = coin(200_000, 3);
        let reports = borel_normality_test(&sigma, 3).unwrap();
        assert_eq!(reports.len(), 2 + 4 + 8);
        assert!(reports.iter().all(TestReport::passed));
    }

    #[test]
    fn constant_string_fails_single_symbols() {
        let sigma = SymbolString::from_bits(&"1".repeat(1000)).unwrap();
        let reports = borel_normality_test(&sigma, 1).unwrap();
        assert!(reports.iter().all(|r| r.verdict == Verdict::Fail));
    }

    #[test]
    fn short_input_names_minimum() {
        let err = borel_normality_test(&coin(100, 1), 3).unwrap_err();
        assert!(alloc::format!("{err}").contains("800"));
    }

    #[test]
    fn champernowne_within_calibrated_tolerance() {
        let sigma = champernowne(2, 100_000).unwrap();
        let r = frequency_deviation_test(&sigma, 1, 0.05).unwrap();
        assert!(r.iter().all(TestReport::passed));
        let strict = borel_normality_test(&sigma, 1).unwrap();
        assert!(strict.iter().any(|r| !r.passed()));
    }

    #[test]
    fn monkey_examples() {
        let target = SymbolString::from_bits("01").unwrap();
        let mut src = PeriodicSource::new(SymbolString::from_bits("01").unwrap()).unwrap();
        assert_eq!(monkey_search(&target, &mut src, 4).unwrap(), [0, 2]);
        let one = SymbolString::from_bits("1").unwrap();
        let mut zeros = ConstantSource::new(2, 0).unwrap();
        assert!(monkey_search(&one, &mut zeros, 1000).unwrap().is_empty());
        assert!(monkey_search(&target, &mut zeros, 1).is_err());
        let aa = SymbolString::from_bits("11").unwrap();
        let mut ones = ConstantSource::new(2, 1).unwrap();
        assert_eq!(monkey_search(&aa, &mut ones, 5).unwrap(), [0, 1, 2, 3]);
    }

    #[test]
    fn independence_of_product_table_passes() {
        let t = alloc::vec![alloc::vec![250, 250], alloc::vec![250, 250]];
        assert_eq!(chi_square_independence(&t), Some((0.0, 1)));
        let dep = alloc::vec![alloc::vec![500, 0], alloc::vec![0, 500]];
        assert_eq!(independence_test("x", &dep, 4.0).verdict, Verdict::Fail);
        let degenerate = alloc::vec![alloc::vec![1000, 0]];
        assert_eq!(independence_test("x", &degenerate, 4.0).verdict, Verdict::Skipped);
    }

    #[test]
    fn wilson_hilferty_centres_on_mean() {
        for dof in [1u64, 4, 30] {
            let z = chi_square_z(dof as f64 - 2.0 / 3.0, dof);
            assert!(z.abs() < 0.2, "{dof}: {z}");
        }
    }

    #[test]
    fn cell_tests_point_mass() {
        let r = cell_frequency_tests("cells", &[100, 0], &[1.0, 0.0], 6.0).unwrap();
        assert!(r.iter().all(TestReport::passed));
        let r = cell_frequency_tests("cells", &[60_000, 40_000], &[0.5, 0.5], 6.0).unwrap();
        assert!(r.iter().all(|r| !r.passed()));
    }

    proptest! {
        #[test]
        fn verdict_tracks_threshold(z in -10.0f64..10.0, t in 0.1f64..6.0) {
            let r = TestReport::scored("t", 0.0, 0.0, z, t);
            prop_assert_eq!(r.passed(), z.abs() <= t);
        }
    }
}
