//! Born measures of finite-dimensional observables.
//!
//! An [`Observable`] is decomposed into a [`Spectrum`] of distinct eigenvalues
//! and spectral projections; a [`State`] then assigns `ω(e_λ)` to each
//! eigenvalue. Commuting families give joint spectra, and repeated identical
//! measurements can be modelled either jointly on the tensor power of the
//! state or as the product of single measures. [`equivalence_check`] compares
//! the two.

pub mod linalg;

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::invalid;
use crate::rng::{self, ChunkedUniform};
use crate::sequence::{SequenceSource, SourceKind, SymbolString};
use linalg::{c, CMatrix, CVector, C64};

const HERMITIAN_TOL: f64 = 1e-12;
const NORM_TOL: f64 = 1e-12;
const PSD_TOL: f64 = 1e-10;
const MEASURE_TOL: f64 = 1e-10;

/// Self-adjoint `n × n` matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct Observable {
    matrix: CMatrix,
}

impl Observable {
    pub fn new(matrix: CMatrix) -> Result<Self> {
        if matrix.nrows() == 0 {
            return Err(invalid!("observable must have dimension at least 1"));
        }
        let defect = linalg::hermiticity_defect(&matrix);
        if defect > HERMITIAN_TOL {
            return Err(invalid!("observable is not Hermitian (defect {defect:e})"));
        }
        Ok(Self { matrix })
    }

    pub fn diagonal(values: &[f64]) -> Result<Self> {
        Self::new(linalg::real_diagonal(values))
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    /// Merging tolerance used when none is given: `1e-8 · ‖a‖_F`.
    pub fn default_tolerance(&self) -> f64 {
        (1e-8 * linalg::frobenius(&self.matrix)).max(1e-14)
    }

    /// Squared spin-1 component `J_e²` along unit vector `e`, with
    /// `(J_k)_{jl} = -i ε_{kjl}`.
    pub fn spin1_squared(e: [f64; 3]) -> Result<Self> {
        let norm = libm::sqrt(e.iter().map(|x| x * x).sum());
        if (norm - 1.0).abs() > 1e-10 {
            return Err(invalid!("direction must be a unit vector (norm {norm})"));
        }
        let eps = |k: usize, j: usize, l: usize| -> f64 {
            match (k, j, l) {
                (0, 1, 2) | (1, 2, 0) | (2, 0, 1) => 1.0,
                (0, 2, 1) | (2, 1, 0) | (1, 0, 2) => -1.0,
                _ => 0.0,
            }
        };
        let j = CMatrix::from_fn(3, 3, |r, col| {
            let v: f64 = (0..3).map(|k| e[k] * eps(k, r, col)).sum();
            c(0.0, -v)
        });
        Self::new(&j * &j)
    }
}

/// Unit vector or density matrix.
#[derive(Clone, Debug, PartialEq)]
pub enum State {
    Vector(CVector),
    Density(CMatrix),
}

impl State {
    pub fn vector(amplitudes: CVector) -> Result<Self> {
        let norm = amplitudes.norm_squared();
        if amplitudes.is_empty() || (norm - 1.0).abs() > NORM_TOL {
            return Err(invalid!("state vector squared norm is {norm}, expected 1"));
        }
        Ok(State::Vector(amplitudes))
    }

    pub fn real_vector(amplitudes: &[f64]) -> Result<Self> {
        Self::vector(CVector::from_iterator(
            amplitudes.len(),
            amplitudes.iter().map(|&a| c(a, 0.0)),
        ))
    }

    pub fn density(rho: CMatrix) -> Result<Self> {
        let defect = linalg::hermiticity_defect(&rho);
        if defect > HERMITIAN_TOL {
            return Err(invalid!("density matrix is not Hermitian (defect {defect:e})"));
        }
        let trace = rho.trace();
        if (trace.re - 1.0).abs() > NORM_TOL || trace.im.abs() > NORM_TOL {
            return Err(invalid!("density matrix trace is {trace}, expected 1"));
        }
        let min = rho
            .clone()
            .symmetric_eigenvalues()
            .iter()
            .fold(f64::INFINITY, |m, &v| m.min(v));
        if min < -PSD_TOL {
            return Err(invalid!("density matrix has negative eigenvalue {min:e}"));
        }
        Ok(State::Density(rho))
    }

    pub fn dim(&self) -> usize {
        match self {
            State::Vector(v) => v.len(),
            State::Density(m) => m.nrows(),
        }
    }

    /// `ω(m)`: `⟨ψ, mψ⟩` or `Tr(ρ m)`.
    pub fn expectation(&self, m: &CMatrix) -> C64 {
        match self {
            State::Vector(v) => v.dotc(&(m * v)),
            State::Density(rho) => (rho * m).trace(),
        }
    }

    /// `ω(e)` for the projection onto the span of the orthonormal `basis`.
    fn weight(&self, basis: &CMatrix) -> f64 {
        match self {
            State::Vector(v) => (basis.adjoint() * v).norm_squared(),
            State::Density(rho) => (basis.adjoint() * rho * basis).trace().re,
        }
    }

    /// `ω^{⊗n}` on `H^{⊗n}`.
    pub fn tensor_power(&self, n: usize) -> State {
        match self {
            State::Vector(v) => State::Vector(linalg::kron_power_vec(v, n)),
            State::Density(rho) => State::Density(linalg::kron_power(rho, n)),
        }
    }
}

/// Distinct eigenvalues with their spectral projections.
#[derive(Clone, Debug)]
pub struct Spectrum {
    pub eigenvalues: Vec<f64>,
    /// Orthonormal basis of each eigenspace, `dim × multiplicity`.
    pub eigenbases: Vec<CMatrix>,
}

impl Spectrum {
    pub fn projection(&self, i: usize) -> CMatrix {
        linalg::projector(&self.eigenbases[i])
    }

    pub fn projections(&self) -> Vec<CMatrix> {
        (0..self.eigenvalues.len()).map(|i| self.projection(i)).collect()
    }

    pub fn multiplicity(&self, i: usize) -> usize {
        self.eigenbases[i].ncols()
    }

    /// Worst deviation from the idempotence, orthogonality, completeness and
    /// reconstruction identities, in that order.
    pub fn invariant_defects(&self, a: &Observable) -> [f64; 4] {
        let projs = self.projections();
        let n = a.dim();
        let mut idem: f64 = 0.0;
        let mut orth: f64 = 0.0;
        let mut sum = CMatrix::zeros(n, n);
        let mut recon = CMatrix::zeros(n, n);
        for (i, p) in projs.iter().enumerate() {
            idem = idem
                .max(linalg::max_norm(&(p * p - p)))
                .max(linalg::hermiticity_defect(p));
            for q in &projs[i + 1..] {
                orth = orth.max(linalg::max_norm(&(p * q)));
            }
            sum += p;
            recon += p * c(self.eigenvalues[i], 0.0);
        }
        let complete = linalg::max_norm(&(sum - CMatrix::identity(n, n)));
        let reconstruction = linalg::max_norm(&(recon - a.matrix()));
        [idem, orth, complete, reconstruction]
    }
}

/// Spectral decomposition; eigenvalues closer than `tol` (chained) are merged
/// into one degenerate eigenvalue.
pub fn spectral_decompose(a: &Observable, tol: f64) -> Result<Spectrum> {
    if !(tol >= 0.0) {
        return Err(invalid!("merge tolerance must be non-negative"));
    }
    let eig = a.matrix.clone().symmetric_eigen();
    let n = a.dim();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));

    let mut clusters: Vec<Vec<usize>> = Vec::new();
    for &i in &order {
        match clusters.last_mut() {
            Some(cl) if eig.eigenvalues[i] - eig.eigenvalues[*cl.last().unwrap()] <= tol => cl.push(i),
            _ => clusters.push(alloc::vec![i]),
        }
    }
    let eigenvalues = clusters
        .iter()
        .map(|cl| cl.iter().map(|&i| eig.eigenvalues[i]).sum::<f64>() / cl.len() as f64)
        .collect();
    let eigenbases = clusters
        .iter()
        .map(|cl| CMatrix::from_fn(n, cl.len(), |r, k| eig.eigenvectors[(r, cl[k])]))
        .collect();
    Ok(Spectrum {
        eigenvalues,
        eigenbases,
    })
}

/// Probability assignment on a finite set of (joint) outcomes.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct BornMeasure {
    /// Each outcome is a tuple of eigenvalues; single measurements use
    /// 1-tuples.
    pub outcomes: Vec<Vec<f64>>,
    pub probabilities: Vec<f64>,
}

impl BornMeasure {
    pub fn new(outcomes: Vec<Vec<f64>>, probabilities: Vec<f64>) -> Result<Self> {
        if outcomes.len() != probabilities.len() || outcomes.is_empty() {
            return Err(invalid!("outcome and probability lists must be equal and non-empty"));
        }
        if let Some(p) = probabilities.iter().find(|p| !(**p >= 0.0)) {
            return Err(invalid!("negative or NaN probability {p}"));
        }
        let total: f64 = probabilities.iter().sum();
        if (total - 1.0).abs() > MEASURE_TOL {
            return Err(invalid!("probabilities sum to {total}, expected 1"));
        }
        Ok(Self {
            outcomes,
            probabilities,
        })
    }

    /// Measure over scalar outcomes.
    pub fn scalar(values: &[f64], probabilities: &[f64]) -> Result<Self> {
        Self::new(values.iter().map(|&v| alloc::vec![v]).collect(), probabilities.to_vec())
    }

    pub fn len(&self) -> usize {
        self.outcomes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.outcomes.is_empty()
    }

    pub fn probability_of(&self, outcome: &[f64]) -> f64 {
        self.outcomes
            .iter()
            .position(|o| o.as_slice() == outcome)
            .map_or(0.0, |i| self.probabilities[i])
    }

    /// `Σ f(λ) μ(λ)` for scalar measures.
    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.outcomes
            .iter()
            .zip(&self.probabilities)
            .map(|(o, p)| f(o[0]) * p)
            .sum()
    }
}

fn clamp_probability(p: f64) -> f64 {
    if p < 0.0 && p > -1e-12 {
        0.0
    } else {
        p
    }
}

/// Born measure `λ ↦ ω(e_λ)` of `a` in state `state`.
pub fn born_measure(state: &State, a: &Observable) -> Result<BornMeasure> {
    if state.dim() != a.dim() {
        return Err(invalid!(
            "state dimension {} does not match observable dimension {}",
            state.dim(),
            a.dim()
        ));
    }
    let spectrum = spectral_decompose(a, a.default_tolerance())?;
    measure_from_spectrum(state, &spectrum)
}

pub fn measure_from_spectrum(state: &State, spectrum: &Spectrum) -> Result<BornMeasure> {
    let probabilities = spectrum
        .eigenbases
        .iter()
        .map(|b| clamp_probability(state.weight(b)))
        .collect();
    BornMeasure::new(
        spectrum.eigenvalues.iter().map(|&v| alloc::vec![v]).collect(),
        probabilities,
    )
}

/// One joint eigenvalue with the orthonormal basis of its joint eigenspace.
#[derive(Clone, Debug)]
pub struct JointEigen {
    pub values: Vec<f64>,
    pub basis: CMatrix,
}

impl JointEigen {
    /// `e_{λ_1} ⋯ e_{λ_N}`.
    pub fn projection(&self) -> CMatrix {
        linalg::projector(&self.basis)
    }
}

/// Joint spectrum of pairwise commuting observables: exactly the tuples whose
/// product of spectral projections is non-zero. `tol` bounds the commutator
/// max-norm.
pub fn joint_spectrum(ops: &[Observable], tol: f64) -> Result<Vec<JointEigen>> {
    let first = ops.first().ok_or_else(|| invalid!("need at least one observable"))?;
    let n = first.dim();
    if let Some(bad) = ops.iter().position(|o| o.dim() != n) {
        return Err(invalid!(
            "observable {bad} has dimension {}, expected {n}",
            ops[bad].dim()
        ));
    }
    for i in 0..ops.len() {
        for j in i + 1..ops.len() {
            let (a, b) = (ops[i].matrix(), ops[j].matrix());
            let norm = linalg::max_norm(&(a * b - b * a));
            if norm > tol {
                return Err(Error::CommutationViolation {
                    first: i,
                    second: j,
                    norm,
                });
            }
        }
    }
    let spectra = ops
        .iter()
        .map(|o| spectral_decompose(o, o.default_tolerance()))
        .collect::<Result<Vec<_>>>()?;

    // Each partial product of commuting projections is itself a projection;
    // carry it as an orthonormal basis of its range and restrict the next
    // projection to that range.
    let mut partial = alloc::vec![JointEigen {
        values: Vec::new(),
        basis: CMatrix::identity(n, n),
    }];
    for spectrum in &spectra {
        let mut next = Vec::new();
        for p in &partial {
            for (value, eb) in spectrum.eigenvalues.iter().zip(&spectrum.eigenbases) {
                let overlap = eb.adjoint() * &p.basis;
                let restricted = overlap.adjoint() * &overlap;
                if restricted.trace().re < 0.5 {
                    continue;
                }
                let eig = restricted.symmetric_eigen();
                let keep: Vec<usize> = (0..eig.eigenvalues.len())
                    .filter(|&k| eig.eigenvalues[k] > 0.5)
                    .collect();
                if keep.is_empty() {
                    continue;
                }
                let w = CMatrix::from_fn(eig.eigenvectors.nrows(), keep.len(), |r, k| {
                    eig.eigenvectors[(r, keep[k])]
                });
                let mut values = p.values.clone();
                values.push(*value);
                next.push(JointEigen {
                    values,
                    basis: &p.basis * w,
                });
            }
        }
        partial = next;
    }
    Ok(partial)
}

/// Born measure on a joint spectrum.
pub fn joint_measure(state: &State, joint: &[JointEigen]) -> Result<BornMeasure> {
    if let Some(j) = joint.first() {
        if j.basis.nrows() != state.dim() {
            return Err(invalid!("state dimension does not match the joint spectrum"));
        }
    }
    BornMeasure::new(
        joint.iter().map(|j| j.values.clone()).collect(),
        joint
            .iter()
            .map(|j| clamp_probability(state.weight(&j.basis)))
            .collect(),
    )
}

/// Size limits for the finite-`N` constructions.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Caps {
    /// Largest outcome table built explicitly.
    pub max_outcomes: usize,
    /// Largest tensor-product Hilbert space dimension.
    pub max_tensor_dim: usize,
}

impl Default for Caps {
    fn default() -> Self {
        Self {
            max_outcomes: 1 << 20,
            max_tensor_dim: 256,
        }
    }
}

/// `μ^n` over `n`-tuples in lexicographic order.
pub fn product_measure(mu: &BornMeasure, n: usize, caps: Caps) -> Result<BornMeasure> {
    if n == 0 {
        return Err(invalid!("product order must be at least 1"));
    }
    let needed = (mu.len() as u128).checked_pow(n as u32).unwrap_or(u128::MAX);
    if needed > caps.max_outcomes as u128 {
        return Err(Error::Capacity {
            what: "product outcome table",
            needed,
            cap: caps.max_outcomes as u128,
        });
    }
    let mut outcomes: Vec<Vec<f64>> = alloc::vec![Vec::new()];
    let mut probs = alloc::vec![1.0];
    for _ in 0..n {
        let mut o2 = Vec::with_capacity(outcomes.len() * mu.len());
        let mut p2 = Vec::with_capacity(outcomes.len() * mu.len());
        for (o, p) in outcomes.iter().zip(&probs) {
            for (oi, pi) in mu.outcomes.iter().zip(&mu.probabilities) {
                let mut t = o.clone();
                t.extend_from_slice(oi);
                o2.push(t);
                p2.push(p * pi);
            }
        }
        outcomes = o2;
        probs = p2;
    }
    BornMeasure::new(outcomes, probs)
}

/// Joint measurement on `ω^{⊗n}` against the `n`-fold product of the single
/// measure.
#[derive(Clone, Debug)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct EquivalenceReport {
    pub n: usize,
    pub dim: usize,
    pub joint: BornMeasure,
    pub product: BornMeasure,
    /// Sup distance between the two distributions over the union of outcomes.
    pub linf_distance: f64,
}

pub fn equivalence_check(state: &State, a: &Observable, n: usize, caps: Caps) -> Result<EquivalenceReport> {
    if n == 0 {
        return Err(invalid!("number of repetitions must be at least 1"));
    }
    let big = (a.dim() as u128).checked_pow(n as u32).unwrap_or(u128::MAX);
    if big > caps.max_tensor_dim as u128 {
        return Err(Error::Capacity {
            what: "tensor-product dimension",
            needed: big,
            cap: caps.max_tensor_dim as u128,
        });
    }

    let single_spectrum = spectral_decompose(a, a.default_tolerance())?;
    let single = measure_from_spectrum(state, &single_spectrum)?;
    let product = product_measure(&single, n, caps)?;

    let ops = (0..n)
        .map(|k| Observable::new(linalg::embed(a.matrix(), k, n)))
        .collect::<Result<Vec<_>>>()?;
    let commute_tol = 1e-9 * libm::pow(1.0 + linalg::max_norm(a.matrix()), 2.0);
    let joint_spec = joint_spectrum(&ops, commute_tol)?;
    let joint = joint_measure(&state.tensor_power(n), &joint_spec)?;

    // Key both distributions by the index of each coordinate in the single
    // spectrum.
    let scale = 1e-6 * (1.0 + linalg::max_norm(a.matrix()));
    let index_of =
        |v: f64| -> Option<usize> { single_spectrum.eigenvalues.iter().position(|&e| (e - v).abs() <= scale) };
    let mut table: BTreeMap<Vec<usize>, (f64, f64)> = BTreeMap::new();
    let mut unmatched = 0.0f64;
    for (o, p) in joint.outcomes.iter().zip(&joint.probabilities) {
        match o.iter().map(|&v| index_of(v)).collect::<Option<Vec<_>>>() {
            Some(key) => table.entry(key).or_default().0 += p,
            None => unmatched = unmatched.max(*p),
        }
    }
    for (o, p) in product.outcomes.iter().zip(&product.probabilities) {
        let key = o
            .iter()
            .map(|&v| index_of(v))
            .collect::<Option<Vec<_>>>()
            .ok_or_else(|| Error::ContractViolation(format!("product outcome {o:?} outside the spectrum")))?;
        table.entry(key).or_default().1 += p;
    }
    let linf_distance = table.values().map(|(x, y)| (x - y).abs()).fold(unmatched, f64::max);
    Ok(EquivalenceReport {
        n,
        dim: a.dim(),
        joint,
        product,
        linf_distance,
    })
}

/// I.i.d. draws from a Born measure as a [`SequenceSource`]. Symbol `i` is the
/// `i`-th outcome of the measure.
#[derive(Clone, Debug)]
pub struct BornSource {
    cdf: Vec<f64>,
    alphabet_size: u32,
    uniform: ChunkedUniform,
}

impl BornSource {
    pub fn new(mu: &BornMeasure, seed: u64) -> Self {
        Self::starting_at(mu, seed, 0)
    }

    /// Source positioned at draw `index`.
    pub fn starting_at(mu: &BornMeasure, seed: u64, index: u64) -> Self {
        Self {
            cdf: rng::cumulative(&mu.probabilities),
            alphabet_size: (mu.len() as u32).max(2),
            uniform: ChunkedUniform::starting_at(seed, index),
        }
    }
}

impl SequenceSource for BornSource {
    fn kind(&self) -> SourceKind {
        SourceKind::BornSampler
    }
    fn alphabet_size(&self) -> u32 {
        self.alphabet_size
    }
    fn next_symbol(&mut self) -> Result<u32> {
        Ok(rng::pick(&self.cdf, self.uniform.uniform()) as u32)
    }
}

/// Sampled outcome string plus the index → outcome key.
#[derive(Clone, Debug, PartialEq)]
pub struct Sample {
    pub sequence: SymbolString,
    pub key: Vec<Vec<f64>>,
}

/// `n` i.i.d. draws from `mu` by inverse CDF over ChaCha8 (see [`crate::rng`]).
pub fn sample_sequence(mu: &BornMeasure, n: usize, seed: u64) -> Result<Sample> {
    let sequence = crate::sequence::truncate(BornSource::new(mu, seed), n)?;
    Ok(Sample {
        sequence,
        key: mu.outcomes.clone(),
    })
}

/// Draws `start .. start + len` of the sequence produced by
/// [`sample_sequence`] with the same seed.
pub fn sample_range(mu: &BornMeasure, seed: u64, start: u64, len: usize) -> Vec<u32> {
    let mut src = BornSource::starting_at(mu, seed, start);
    (0..len)
        .map(|_| src.next_symbol().expect("Born source never fails"))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use core::f64::consts::FRAC_1_SQRT_2;

    fn pauli_x() -> Observable {
        Observable::new(linalg::from_parts(&[&[0.0, 1.0], &[1.0, 0.0]], None)).unwrap()
    }

    fn assert_close(a: f64, b: f64, tol: f64) {
        assert!((a - b).abs() <= tol, "{a} vs {b}");
    }

    #[test]
    fn diagonal_spectrum() {
        let a = Observable::diagonal(&[0.0, 1.0]).unwrap();
        let s = spectral_decompose(&a, 1e-9).unwrap();
        assert_eq!(s.eigenvalues, vec![0.0, 1.0]);
        let p0 = s.projection(0);
        assert_close(p0[(0, 0)].re, 1.0, 1e-12);
        assert_close(p0[(1, 1)].norm(), 0.0, 1e-12);
    }

    #[test]
    fn degenerate_diagonal_merges() {
        let a = Observable::diagonal(&[1.0, 1.0, 0.0]).unwrap();
        let s = spectral_decompose(&a, a.default_tolerance()).unwrap();
        assert_eq!(s.eigenvalues.len(), 2);
        assert_close(s.eigenvalues[0], 0.0, 1e-12);
        assert_close(s.eigenvalues[1], 1.0, 1e-12);
        assert_eq!(s.multiplicity(1), 2);
        for d in s.invariant_defects(&a) {
            assert!(d < 1e-10);
        }
    }

    #[test]
    fn pauli_x_hand_decomposition() {
        let a = pauli_x();
        let s = spectral_decompose(&a, a.default_tolerance()).unwrap();
        assert_close(s.eigenvalues[0], -1.0, 1e-12);
        assert_close(s.eigenvalues[1], 1.0, 1e-12);
        // ½[[1,-1],[-1,1]] and ½[[1,1],[1,1]]
        let (pm, pp) = (s.projection(0), s.projection(1));
        for (i, j, sign) in [(0, 0, 1.0), (0, 1, -1.0), (1, 0, -1.0), (1, 1, 1.0)] {
            assert_close(pm[(i, j)].re, 0.5 * sign, 1e-12);
            assert_close(pp[(i, j)].re, 0.5, 1e-12);
        }
        let [idem, orth, comp, recon] = s.invariant_defects(&a);
        assert!(idem < 1e-10 && orth < 1e-10 && comp < 1e-10 && recon < 1e-8);
    }

    #[test]
    fn non_hermitian_rejected() {
        let m = linalg::from_parts(&[&[0.0, 1.0], &[0.0, 0.0]], None);
        assert!(matches!(Observable::new(m), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn fair_quantum_coin() {
        let psi = State::real_vector(&[FRAC_1_SQRT_2, FRAC_1_SQRT_2]).unwrap();
        let mu = born_measure(&psi, &Observable::diagonal(&[0.0, 1.0]).unwrap()).unwrap();
        assert_close(mu.probability_of(&[0.0]), 0.5, 1e-12);
        assert_close(mu.probability_of(&[1.0]), 0.5, 1e-12);
    }

    #[test]
    fn eigenstate_is_point_mass() {
        let psi = State::real_vector(&[1.0, 0.0]).unwrap();
        let mu = born_measure(&psi, &Observable::diagonal(&[0.0, 1.0]).unwrap()).unwrap();
        assert_eq!(mu.probabilities, vec![1.0, 0.0]);
    }

    #[test]
    fn maximally_mixed_qutrit() {
        let rho = State::density(linalg::real_diagonal(&[1.0 / 3.0; 3])).unwrap();
        let mu = born_measure(&rho, &Observable::diagonal(&[5.0, 5.0, 7.0]).unwrap()).unwrap();
        assert_close(mu.probability_of(&[5.0]), 2.0 / 3.0, 1e-12);
        assert_close(mu.probability_of(&[7.0]), 1.0 / 3.0, 1e-12);
    }

    #[test]
    fn dimension_mismatch_rejected() {
        let psi = State::real_vector(&[1.0, 0.0]).unwrap();
        let a = Observable::diagonal(&[1.0, 2.0, 3.0]).unwrap();
        assert!(born_measure(&psi, &a).is_err());
    }

    #[test]
    fn invalid_states_rejected() {
        assert!(State::real_vector(&[1.0, 1.0]).is_err());
        assert!(State::density(linalg::real_diagonal(&[0.5, 0.6])).is_err());
        assert!(State::density(linalg::real_diagonal(&[1.5, -0.5])).is_err());
    }

    #[test]
    fn tensor_joint_spectrum() {
        let a = linalg::real_diagonal(&[0.0, 1.0]);
        let ops = [
            Observable::new(linalg::embed(&a, 0, 2)).unwrap(),
            Observable::new(linalg::embed(&a, 1, 2)).unwrap(),
        ];
        let js = joint_spectrum(&ops, 1e-12).unwrap();
        let tuples: Vec<_> = js.iter().map(|j| j.values.clone()).collect();
        assert_eq!(
            tuples,
            vec![vec![0.0, 0.0], vec![0.0, 1.0], vec![1.0, 0.0], vec![1.0, 1.0]]
        );
        assert!(js.iter().all(|j| j.basis.ncols() == 1));
    }

    #[test]
    fn repeated_observable_joint_spectrum_is_diagonal() {
        let a = Observable::diagonal(&[0.0, 1.0]).unwrap();
        let js = joint_spectrum(&[a.clone(), a], 1e-12).unwrap();
        let tuples: Vec<_> = js.iter().map(|j| j.values.clone()).collect();
        assert_eq!(tuples, vec![vec![0.0, 0.0], vec![1.0, 1.0]]);
    }

    #[test]
    fn spin1_orthonormal_triple_joint_spectrum() {
        let s = 0.6;
        let t = 0.8;
        let basis = [[s, t, 0.0], [-t, s, 0.0], [0.0, 0.0, 1.0]];
        let ops: Vec<_> = basis.iter().map(|&e| Observable::spin1_squared(e).unwrap()).collect();
        let js = joint_spectrum(&ops, 1e-10).unwrap();
        let tuples: Vec<Vec<i64>> = js
            .iter()
            .map(|j| j.values.iter().map(|v| libm::round(*v) as i64).collect())
            .collect();
        assert_eq!(tuples, vec![vec![0, 1, 1], vec![1, 0, 1], vec![1, 1, 0]]);
    }

    #[test]
    fn non_commuting_pair_named() {
        let z = Observable::diagonal(&[1.0, -1.0]).unwrap();
        match joint_spectrum(&[z, pauli_x()], 1e-9) {
            Err(Error::CommutationViolation { first, second, norm }) => {
                assert_eq!((first, second), (0, 1));
                assert_close(norm, 2.0, 1e-12);
            }
            other => panic!("expected commutation error, got {other:?}"),
        }
    }

    #[test]
    fn product_measure_cases() {
        let coin = BornMeasure::scalar(&[0.0, 1.0], &[0.5, 0.5]).unwrap();
        let p2 = product_measure(&coin, 2, Caps::default()).unwrap();
        assert_eq!(p2.probabilities, vec![0.25; 4]);

        let skew = BornMeasure::scalar(&[0.0, 1.0], &[0.9, 0.1]).unwrap();
        let p3 = product_measure(&skew, 3, Caps::default()).unwrap();
        assert_close(p3.probability_of(&[1.0, 1.0, 1.0]), 0.001, 1e-15);

        assert_eq!(product_measure(&skew, 1, Caps::default()).unwrap(), skew);

        let tiny = Caps {
            max_outcomes: 16,
            ..Caps::default()
        };
        assert!(matches!(product_measure(&coin, 5, tiny), Err(Error::Capacity { .. })));
    }

    #[test]
    fn equivalence_examples() {
        let a = Observable::diagonal(&[0.0, 1.0]).unwrap();
        let coin = State::real_vector(&[FRAC_1_SQRT_2, FRAC_1_SQRT_2]).unwrap();
        let r = equivalence_check(&coin, &a, 3, Caps::default()).unwrap();
        assert!(r.linf_distance <= 1e-10);

        let eigen = State::real_vector(&[0.0, 1.0]).unwrap();
        let r = equivalence_check(&eigen, &a, 4, Caps::default()).unwrap();
        assert!(r.linf_distance <= 1e-12);
        assert_close(r.product.probability_of(&[1.0; 4]), 1.0, 1e-15);

        let psi = State::real_vector(&[libm::sqrt(0.3), libm::sqrt(0.7)]).unwrap();
        let r = equivalence_check(&psi, &a, 2, Caps::default()).unwrap();
        for (o, p) in [
            ([0.0, 0.0], 0.09),
            ([0.0, 1.0], 0.21),
            ([1.0, 0.0], 0.21),
            ([1.0, 1.0], 0.49),
        ] {
            assert_close(r.product.probability_of(&o), p, 1e-12);
        }
        assert!(r.linf_distance <= 1e-10);
    }

    #[test]
    fn equivalence_respects_tensor_cap() {
        let a = Observable::diagonal(&[0.0, 1.0, 2.0]).unwrap();
        let psi = State::real_vector(&[1.0, 0.0, 0.0]).unwrap();
        assert!(matches!(
            equivalence_check(&psi, &a, 6, Caps::default()),
            Err(Error::Capacity { .. })
        ));
    }

    #[test]
    fn point_mass_sampling_is_constant() {
        let mu = BornMeasure::scalar(&[3.0], &[1.0]).unwrap();
        let s = sample_sequence(&mu, 5, 1).unwrap();
        assert_eq!(s.sequence.to_text(), "00000");
        assert_eq!(s.key, vec![vec![3.0]]);
    }

    #[test]
    fn sample_range_matches_sequential() {
        let mu = BornMeasure::scalar(&[0.0, 1.0, 2.0], &[0.2, 0.3, 0.5]).unwrap();
        let all = sample_sequence(&mu, 200_000, 5).unwrap().sequence;
        let start = 131_000u64;
        let part = sample_range(&mu, 5, start, 1000);
        assert_eq!(&all.symbols()[start as usize..start as usize + 1000], &part[..]);
    }

    #[test]
    fn polynomial_moments_match_functional_calculus() {
        // ω(f(a)) against Σ f(λ) μ(λ) for monomials up to degree 4
        let a = Observable::new(linalg::from_parts(
            &[&[1.0, 0.5, 0.0], &[0.5, 2.0, 0.3], &[0.0, 0.3, -1.0]],
            Some(&[&[0.0, 0.2, -0.1], &[-0.2, 0.0, 0.0], &[0.1, 0.0, 0.0]]),
        ))
        .unwrap();
        let psi = State::vector(CVector::from_vec(vec![c(0.6, 0.0), c(0.0, 0.48), c(0.64, 0.0)])).unwrap();
        let mu = born_measure(&psi, &a).unwrap();
        let mut power = CMatrix::identity(3, 3);
        for degree in 0..=4 {
            let lhs = psi.expectation(&power).re;
            let rhs = mu.integrate(|x| libm::pow(x, degree as f64));
            assert_close(lhs, rhs, 1e-8);
            power *= a.matrix();
        }
    }
}
