//! Truncation-based compression of condensed strings, and the entropy and
//! average-length identities for a source ensemble.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use std::collections::HashMap;

use crate::bits::BitString;
use crate::codes::{
    self, quantum_kraft_sum, shannon_fano_lengths, huffman_lengths, ClassicalCode, QuantumCode,
    LEAKAGE_TOLERANCE,
};
use crate::condense::simple_condense;
use crate::error::{Error, Result};
use crate::lengths::{self, ExactPmf};
use crate::qstate::{
    self, check_dense, hermitian_eigen, relative_entropy, shannon_entropy, von_neumann_entropy,
    DensityMatrix, SparseState, STATE_TOLERANCE,
};

/// Tolerance for the inequality chains checked here.
pub const BOUND_TOLERANCE: f64 = 1e-9;

/// Largest |ensemble|^N enumerated exactly.
pub const MAX_EXACT_TUPLES: usize = 65536;

/// Largest block spectrum handled by [`block_code`].
pub const MAX_BLOCK_SIZE: usize = 65536;

/// Samples per Monte-Carlo work unit; each unit draws from its own stream.
pub const SAMPLES_PER_CHUNK: usize = 256;

/// A probability-weighted list of zef codewords of one code.
#[derive(Clone, Debug, PartialEq)]
pub struct Ensemble {
    code: QuantumCode,
    probs: Vec<f64>,
    states: Vec<SparseState>,
    /// Per-entry length distribution over 0..=l_max.
    pmfs: Vec<Vec<f64>>,
}

impl Ensemble {
    pub fn new(code: QuantumCode, entries: Vec<(f64, SparseState)>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::InvalidDistribution("empty ensemble".into()));
        }
        let (probs, states): (Vec<f64>, Vec<SparseState>) = entries.into_iter().unzip();
        if let Some(p) = probs.iter().find(|p| !(p.is_finite() && **p > 0.0)) {
            return Err(Error::InvalidDistribution(format!(
                "probability {p} is not positive"
            )));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > codes::DISTRIBUTION_TOLERANCE {
            return Err(Error::InvalidDistribution(format!(
                "probabilities sum to {total}"
            )));
        }
        let observable = code.length_observable();
        let mut pmfs = Vec::with_capacity(states.len());
        for s in &states {
            if (s.norm_sqr() - 1.0).abs() > STATE_TOLERANCE {
                return Err(Error::NotNormalized(s.norm_sqr()));
            }
            pmfs.push(observable.codeword_distribution(s)?);
        }
        Ok(Self {
            code,
            probs,
            states,
            pmfs,
        })
    }

    /// Ensemble of the code's own basis codewords with the given weights.
    pub fn from_basis(code: QuantumCode, probs: &[f64]) -> Result<Self> {
        if probs.len() != code.dimension() {
            return Err(Error::InvalidDistribution(format!(
                "{} probabilities for {} basis codewords",
                probs.len(),
                code.dimension()
            )));
        }
        let entries = probs
            .iter()
            .zip(code.basis())
            .map(|(&p, b)| (p, b.zef.clone()))
            .collect();
        Self::new(code, entries)
    }

    pub fn code(&self) -> &QuantumCode {
        &self.code
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn states(&self) -> &[SparseState] {
        &self.states
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    /// P(l) for one word drawn from the ensemble and measured by Λ.
    pub fn length_pmf(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.code.l_max() + 1];
        for (p, pmf) in self.probs.iter().zip(&self.pmfs) {
            for (o, q) in out.iter_mut().zip(pmf) {
                *o += p * q;
            }
        }
        out
    }

    /// ⟨l⟩ = Tr ρΛ.
    pub fn avg_length(&self) -> f64 {
        self.length_pmf()
            .iter()
            .enumerate()
            .map(|(l, p)| l as f64 * p)
            .sum()
    }

    /// Nonzero eigenvalues of ρ, descending, from the weighted Gram matrix of
    /// the ensemble states (works at any register size).
    pub fn spectrum(&self) -> Result<Vec<f64>> {
        let m = self.len();
        let mut g = DMatrix::<Complex64>::zeros(m, m);
        for i in 0..m {
            for j in 0..m {
                let w = (self.probs[i] * self.probs[j]).sqrt();
                g[(i, j)] = qstate::inner(&self.states[i], &self.states[j])? * w;
            }
        }
        let (values, _) = hermitian_eigen(&g);
        let mut values: Vec<f64> = values.into_iter().filter(|&v| v > 1e-12).collect();
        values.reverse();
        Ok(values)
    }

    /// Largest eigenvalue of ρ.
    pub fn lambda_max(&self) -> Result<f64> {
        Ok(self.spectrum()?.first().copied().unwrap_or(0.0))
    }
}

/// ρ = Σ p(a)|a⟩⟨a| on the l_max-qubit register.
pub fn rho_of(ensemble: &Ensemble) -> Result<DensityMatrix> {
    check_dense(ensemble.code.l_max())?;
    let parts: Vec<(f64, SparseState)> = ensemble
        .probs
        .iter()
        .copied()
        .zip(ensemble.states.iter().cloned())
        .collect();
    DensityMatrix::mixture(ensemble.code.l_max(), &parts)
}

/// σ = Tr_{>ℓ}|φ⟩⟨φ| ⊗ |0…0⟩⟨0…0|, as a dense matrix.
pub fn truncate_and_restore(state: &SparseState, ell: usize) -> Result<DensityMatrix> {
    let n = state.num_qubits();
    check_range(n, ell)?;
    let dim = check_dense(n)?;
    let drop = n - ell;
    let mut by_suffix: HashMap<u128, Vec<(usize, Complex64)>> = HashMap::new();
    for (label, amp) in state.terms() {
        let suffix = label & crate::bits::low_mask(drop);
        let kept = (label ^ suffix) as usize;
        by_suffix.entry(suffix).or_default().push((kept, amp));
    }
    let mut m = DMatrix::<Complex64>::zeros(dim, dim);
    for entries in by_suffix.values() {
        for &(i, a) in entries {
            for &(j, b) in entries {
                m[(i, j)] += a * b.conj();
            }
        }
    }
    let norm = state.norm_sqr();
    DensityMatrix::new(n, m / Complex64::new(norm, 0.0))
}

/// The truncation channel on a mixed state: Tr_{>ℓ} ρ ⊗ |0…0⟩⟨0…0|.
pub fn truncated_state(rho: &DensityMatrix, ell: usize) -> Result<DensityMatrix> {
    let n = rho.num_qubits();
    check_range(n, ell)?;
    let kept = rho.partial_trace(&(1..=ell).collect::<Vec<_>>())?;
    if ell == n {
        return Ok(kept);
    }
    let zeros = DensityMatrix::from_pure(&qstate::basis_state(&BitString::zeros(n - ell)))?;
    kept.kron(&zeros)
}

fn check_range(n: usize, ell: usize) -> Result<()> {
    if ell > n {
        return Err(Error::QubitIndex {
            index: ell,
            num_qubits: n,
        });
    }
    Ok(())
}

/// F = ⟨φ|σ|φ⟩ for the truncation at ℓ, computed on the sparse support:
/// F = Σ_y |Σ_x conj(a_{x0}) a_{xy}|² with x the kept prefix and y the
/// discarded suffix.
pub fn truncation_fidelity(state: &SparseState, ell: usize) -> Result<f64> {
    let n = state.num_qubits();
    check_range(n, ell)?;
    let drop = n - ell;
    let mask = crate::bits::low_mask(drop);
    let mut zero_suffix: HashMap<u128, Complex64> = HashMap::new();
    for (label, amp) in state.terms() {
        if label & mask == 0 {
            zero_suffix.insert(label, amp);
        }
    }
    if zero_suffix.is_empty() {
        return Ok(0.0);
    }
    let mut per_suffix: HashMap<u128, Complex64> = HashMap::new();
    for (label, amp) in state.terms() {
        let suffix = label & mask;
        if let Some(a0) = zero_suffix.get(&(label ^ suffix)) {
            *per_suffix.entry(suffix).or_default() += a0.conj() * amp;
        }
    }
    let norm = state.norm_sqr();
    Ok(per_suffix.values().map(|c| c.norm_sqr()).sum::<f64>() / (norm * norm))
}

/// α = ‖Π_ℓ φ‖, the weight on strings that are zero past position ℓ.
pub fn kept_amplitude(state: &SparseState, ell: usize) -> Result<f64> {
    check_range(state.num_qubits(), ell)?;
    let mask = crate::bits::low_mask(state.num_qubits() - ell);
    let kept: f64 = state
        .terms()
        .filter(|(label, _)| label & mask == 0)
        .map(|(_, a)| a.norm_sqr())
        .sum();
    Ok((kept / state.norm_sqr()).sqrt())
}

/// η = P(Λ > ℓ) for a single zef word.
pub fn tail_probability(state: &SparseState, code: &QuantumCode, ell: usize) -> Result<f64> {
    let probs = code.length_observable().codeword_distribution(state)?;
    Ok(probs.iter().skip(ell + 1).sum::<f64>().clamp(0.0, 1.0))
}

/// The quantities of the sufficiency argument at one ℓ.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TruncationOutcome {
    pub kept_qubits: usize,
    pub fidelity: f64,
    pub eta: f64,
    pub alpha: f64,
}

impl TruncationOutcome {
    /// F ≥ α⁴ ≥ (1−η)² ≥ 1−2η, each within 1e-9.
    pub fn chain_holds(&self) -> bool {
        let a4 = self.alpha.powi(4);
        let one_eta = (1.0 - self.eta).powi(2);
        self.fidelity + BOUND_TOLERANCE >= a4
            && a4 + BOUND_TOLERANCE >= one_eta
            && one_eta + BOUND_TOLERANCE >= 1.0 - 2.0 * self.eta
    }

    /// The individual links of the chain: (F − α⁴, α⁴ − (1−η)², (1−η)² − (1−2η)).
    pub fn slack(&self) -> [f64; 3] {
        let a4 = self.alpha.powi(4);
        let one_eta = (1.0 - self.eta).powi(2);
        [self.fidelity - a4, a4 - one_eta, one_eta - (1.0 - 2.0 * self.eta)]
    }
}

/// Truncation outcome of a state whose tail probability is already known.
pub fn truncation_outcome(state: &SparseState, ell: usize, eta: f64) -> Result<TruncationOutcome> {
    Ok(TruncationOutcome {
        kept_qubits: ell,
        fidelity: truncation_fidelity(state, ell)?,
        eta,
        alpha: kept_amplitude(state, ell)?,
    })
}

/// Truncation outcome of a single zef word of `code`.
pub fn sufficiency_bound_check(state: &SparseState, code: &QuantumCode, ell: usize) -> Result<TruncationOutcome> {
    truncation_outcome(state, ell, tail_probability(state, code, ell)?)
}

/// How the N-fold ensemble average is evaluated.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sampling {
    /// Exact when |ensemble|^N ≤ 65536, Monte-Carlo otherwise.
    Auto,
    Exact,
    MonteCarlo,
}

/// Parameters of one sufficiency sweep.
#[derive(Clone, Debug, PartialEq)]
pub struct SweepConfig {
    pub n: usize,
    pub ells: Vec<usize>,
    pub samples: usize,
    pub seed: u64,
    pub sampling: Sampling,
}

/// One CSV row of a sweep.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SweepRow {
    pub n: usize,
    pub ell: usize,
    /// P(𝚲 > ℓ) by exact convolution.
    pub eta_exact: f64,
    pub avg_fidelity: f64,
    /// Standard error of `avg_fidelity` (0 for exact enumeration).
    pub stderr: f64,
    /// Ensemble average of (1 − η)², η the per-string tail probability.
    pub bound_lower: f64,
    /// min(1, min_k ‖ρ‖^k + 15·P(𝚲_{N−k} < ℓ)^{1/4}).
    pub bound_upper: f64,
}

#[derive(Clone, Debug)]
struct Accumulator {
    weight: f64,
    fidelity: Vec<f64>,
    fidelity_sq: Vec<f64>,
    lower: Vec<f64>,
}

impl Accumulator {
    fn new(k: usize) -> Self {
        Self {
            weight: 0.0,
            fidelity: vec![0.0; k],
            fidelity_sq: vec![0.0; k],
            lower: vec![0.0; k],
        }
    }

    fn merge(mut self, other: &Accumulator) -> Self {
        self.weight += other.weight;
        for (a, b) in self.fidelity.iter_mut().zip(&other.fidelity) {
            *a += b;
        }
        for (a, b) in self.fidelity_sq.iter_mut().zip(&other.fidelity_sq) {
            *a += b;
        }
        for (a, b) in self.lower.iter_mut().zip(&other.lower) {
            *a += b;
        }
        self
    }
}

fn evaluate_tuple(
    ensemble: &Ensemble,
    tuple: &[usize],
    ells: &[usize],
    weight: f64,
    acc: &mut Accumulator,
) -> Result<()> {
    let words: Vec<SparseState> = tuple.iter().map(|&i| ensemble.states[i].clone()).collect();
    let cs = simple_condense(&ensemble.code, &words)?;
    let mut pmf = vec![1.0];
    for &i in tuple {
        pmf = lengths::convolve(&pmf, &ensemble.pmfs[i]);
    }
    acc.weight += weight;
    for (k, &ell) in ells.iter().enumerate() {
        let f = truncation_fidelity(&cs.state, ell)?;
        let eta: f64 = pmf.iter().skip(ell + 1).sum();
        acc.fidelity[k] += weight * f;
        acc.fidelity_sq[k] += weight * f * f;
        acc.lower[k] += weight * (1.0 - eta.min(1.0)).powi(2);
    }
    Ok(())
}

fn exact_tuple_count(m: usize, n: usize) -> Option<usize> {
    u32::try_from(n)
        .ok()
        .and_then(|e| m.checked_pow(e))
        .filter(|&c| c <= MAX_EXACT_TUPLES)
}

/// Average truncation fidelity of condensed N-strings at each ℓ, with the
/// exact tail and both bounds.
pub fn sufficiency_experiment(ensemble: &Ensemble, cfg: &SweepConfig) -> Result<Vec<SweepRow>> {
    let width = cfg.n * ensemble.code.l_max();
    if let Some(&bad) = cfg.ells.iter().find(|&&l| l > width) {
        return Err(Error::QubitIndex {
            index: bad,
            num_qubits: width,
        });
    }
    let m = ensemble.len();
    let exact_count = exact_tuple_count(m, cfg.n);
    let exact = match cfg.sampling {
        Sampling::Exact => Some(exact_count.ok_or_else(|| {
            Error::ResourceLimit(format!(
                "{m}^{} tuples exceed {MAX_EXACT_TUPLES} for exact enumeration",
                cfg.n
            ))
        })?),
        Sampling::Auto => exact_count,
        Sampling::MonteCarlo => None,
    };
    let k = cfg.ells.len();
    let (acc, samples) = match exact {
        Some(count) => {
            let acc = (0..count)
                .into_par_iter()
                .map(|index| {
                    let mut rest = index;
                    let mut tuple = vec![0; cfg.n];
                    for slot in tuple.iter_mut().rev() {
                        *slot = rest % m;
                        rest /= m;
                    }
                    let weight: f64 = tuple.iter().map(|&i| ensemble.probs[i]).product();
                    let mut acc = Accumulator::new(k);
                    evaluate_tuple(ensemble, &tuple, &cfg.ells, weight, &mut acc)?;
                    Ok(acc)
                })
                .collect::<Result<Vec<_>>>()?
                .iter()
                .fold(Accumulator::new(k), Accumulator::merge);
            (acc, None)
        }
        None => {
            if cfg.samples == 0 {
                return Err(Error::InvalidDistribution("zero samples requested".into()));
            }
            let dist = WeightedIndex::new(&ensemble.probs)
                .map_err(|e| Error::InvalidDistribution(e.to_string()))?;
            let chunks = cfg.samples.div_ceil(SAMPLES_PER_CHUNK);
            let acc = (0..chunks)
                .into_par_iter()
                .map(|chunk| {
                    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
                    rng.set_stream(chunk as u64);
                    let count = SAMPLES_PER_CHUNK.min(cfg.samples - chunk * SAMPLES_PER_CHUNK);
                    let mut acc = Accumulator::new(k);
                    let mut tuple = vec![0; cfg.n];
                    for _ in 0..count {
                        for slot in tuple.iter_mut() {
                            *slot = dist.sample(&mut rng);
                        }
                        evaluate_tuple(ensemble, &tuple, &cfg.ells, 1.0, &mut acc)?;
                    }
                    Ok(acc)
                })
                .collect::<Result<Vec<_>>>()?
                .iter()
                .fold(Accumulator::new(k), Accumulator::merge);
            (acc, Some(cfg.samples))
        }
    };
    let single = ExactPmf::from_f64(&ensemble.length_pmf())?;
    let total = single.power(cfg.n);
    let upper = UpperBound::new(ensemble, cfg.n)?;
    let mut rows = Vec::with_capacity(k);
    for (i, &ell) in cfg.ells.iter().enumerate() {
        let mean = acc.fidelity[i] / acc.weight;
        let stderr = match samples {
            Some(s) if s > 1 => {
                let s = s as f64;
                let var = (acc.fidelity_sq[i] / acc.weight - mean * mean).max(0.0) * s / (s - 1.0);
                (var / s).sqrt()
            }
            _ => 0.0,
        };
        rows.push(SweepRow {
            n: cfg.n,
            ell,
            eta_exact: lengths::rational_to_f64(&total.mass_where(|l| l > ell)),
            avg_fidelity: mean,
            stderr,
            bound_lower: acc.lower[i] / acc.weight,
            bound_upper: upper.at(ell as f64),
        });
    }
    Ok(rows)
}

/// Evaluates min(1, min_k λ^k + 15·P(𝚲_{N−k} < ℓ)^{1/4}).
struct UpperBound {
    lambda: f64,
    /// Exact pmfs of 𝚲_j for j = 1..N−1.
    partial: Vec<ExactPmf>,
}

impl UpperBound {
    fn new(ensemble: &Ensemble, n: usize) -> Result<Self> {
        let single = ExactPmf::from_f64(&ensemble.length_pmf())?;
        let mut partial = Vec::new();
        let mut acc = ExactPmf::point_mass_zero();
        for _ in 1..n {
            acc = acc.convolve(&single);
            partial.push(acc.clone());
        }
        Ok(Self {
            lambda: ensemble.lambda_max()?,
            partial,
        })
    }

    fn at(&self, ell: f64) -> f64 {
        let n = self.partial.len() + 1;
        let mut best: f64 = 1.0;
        for k in 1..n {
            let below = lengths::rational_to_f64(&self.partial[n - k - 1].mass_where(|l| (l as f64) < ell));
            best = best.min(self.lambda.powi(k as i32) + 15.0 * below.max(0.0).powf(0.25));
        }
        best
    }
}

/// The necessity bound at ℓ = N(⟨l⟩ − δ).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NecessityReport {
    pub n: usize,
    pub k: usize,
    pub delta: f64,
    pub ell: f64,
    pub lambda_max: f64,
    /// ‖W‖ = λ_max^k.
    pub w_norm: f64,
    /// α² = P(𝚲_{N−k} < ℓ).
    pub alpha_sq: f64,
    /// ‖W‖ + 15√α.
    pub bound: f64,
    /// ℓ ≤ (N − k)(⟨l⟩ − δ/2).
    pub side_condition: bool,
}

impl NecessityReport {
    /// A bound of 1 or more says nothing about a fidelity.
    pub fn informative(&self) -> bool {
        self.bound < 1.0
    }
}

/// F̄ ≤ ‖W‖ + 15√α for any recovery, with α² from the exact length tail.
///
/// δ = 0 yields a report flagged non-informative; for δ > 0 the side
/// condition must hold.
pub fn necessity_bound(ensemble: &Ensemble, n: usize, k: usize, delta: f64) -> Result<NecessityReport> {
    if k == 0 || k >= n {
        return Err(Error::SideCondition(format!("need 0 < k < N, got k = {k}, N = {n}")));
    }
    if !(delta.is_finite() && delta >= 0.0) {
        return Err(Error::SideCondition(format!("invalid δ = {delta}")));
    }
    let spectrum = ensemble.spectrum()?;
    if spectrum.len() < 2 {
        return Err(Error::SideCondition(
            "ρ has a single nonzero eigenvalue; the ensemble has one codeword state".into(),
        ));
    }
    let mean = ensemble.avg_length();
    let ell = n as f64 * (mean - delta);
    let side_condition = ell <= (n - k) as f64 * (mean - delta / 2.0);
    if delta > 0.0 && !side_condition {
        return Err(Error::SideCondition(format!(
            "ℓ = {ell} exceeds (N−k)(⟨l⟩−δ/2) = {}",
            (n - k) as f64 * (mean - delta / 2.0)
        )));
    }
    let lambda_max = spectrum[0];
    let w_norm = lambda_max.powi(k as i32);
    let alpha_sq = lengths::prob_less(&ensemble.length_pmf(), n - k, ell)?;
    Ok(NecessityReport {
        n,
        k,
        delta,
        ell,
        lambda_max,
        w_norm,
        alpha_sq,
        bound: w_norm + 15.0 * alpha_sq.powf(0.25),
        side_condition,
    })
}

/// Minimal (k, N) for which the necessity bound drops below ε.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Plan {
    pub epsilon: f64,
    pub delta: f64,
    pub k: usize,
    pub n: usize,
    pub w_norm: f64,
    pub alpha_sq: f64,
    pub bound: f64,
}

/// Picks the least k with λ^k < ε/2, then the least N for which the side
/// condition holds and 15√α < ε/2. Tails use floating-point convolution
/// here, since N can run into the hundreds.
pub fn plan_necessity(ensemble: &Ensemble, epsilon: f64, delta: f64, n_max: usize) -> Result<Plan> {
    if !(epsilon > 0.0 && epsilon <= 2.0 && delta > 0.0) {
        return Err(Error::SideCondition(format!("need ε in (0, 2] and δ > 0, got ε = {epsilon}, δ = {delta}")));
    }
    let lambda = ensemble.lambda_max()?;
    if ensemble.spectrum()?.len() < 2 || lambda >= 1.0 {
        return Err(Error::SideCondition("ρ must have more than one nonzero eigenvalue".into()));
    }
    let mut k = 1;
    while lambda.powi(k as i32) >= epsilon / 2.0 {
        k += 1;
    }
    let w_norm = lambda.powi(k as i32);
    let mean = ensemble.avg_length();
    let single = ensemble.length_pmf();
    let mut tail = vec![1.0];
    // tail holds the pmf of 𝚲_{N−k}; N starts at k + 1.
    for n in k + 1..=n_max {
        tail = lengths::convolve(&tail, &single);
        let ell = n as f64 * (mean - delta);
        if ell > (n - k) as f64 * (mean - delta / 2.0) {
            continue;
        }
        let alpha_sq: f64 = tail
            .iter()
            .enumerate()
            .filter(|&(l, _)| (l as f64) < ell)
            .map(|(_, p)| p)
            .sum();
        if 15.0 * alpha_sq.max(0.0).powf(0.25) < epsilon / 2.0 {
            return Ok(Plan {
                epsilon,
                delta,
                k,
                n,
                w_norm,
                alpha_sq,
                bound: w_norm + 15.0 * alpha_sq.max(0.0).powf(0.25),
            });
        }
    }
    Err(Error::ResourceLimit(format!(
        "no N ≤ {n_max} reaches ε = {epsilon} at δ = {delta}"
    )))
}

/// Both sides of ⟨l⟩ = S(ρ) + D(ρ‖ω) − log K.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LengthIdentity {
    pub avg_length: f64,
    pub entropy: f64,
    pub relative_entropy: f64,
    pub kraft: f64,
    /// −log₂ K.
    pub neg_log_kraft: f64,
    /// ⟨l⟩ − (S + D − log K).
    pub residual: f64,
}

impl LengthIdentity {
    pub fn holds(&self) -> bool {
        self.residual.abs() <= BOUND_TOLERANCE
    }

    /// ⟨l⟩ ≥ S(ρ) within 1e-9 (expected whenever K ≤ 1).
    pub fn entropy_bound_holds(&self) -> bool {
        self.avg_length + BOUND_TOLERANCE >= self.entropy
    }
}

/// Evaluates the identity with each term computed independently.
pub fn length_identity(ensemble: &Ensemble) -> Result<LengthIdentity> {
    let rho = rho_of(ensemble)?;
    let avg_length = codes::avg_length(&rho, &ensemble.code)?;
    let entropy = von_neumann_entropy(&rho);
    let omega = codes::omega_operator(&ensemble.code)?;
    let d = relative_entropy(&rho, &omega)?;
    if d.is_infinite() {
        return Err(Error::Leakage {
            weight: qstate::support_leakage(&rho, &omega)?,
        });
    }
    let kraft = quantum_kraft_sum(&ensemble.code);
    let neg_log_kraft = -kraft.log2();
    Ok(LengthIdentity {
        avg_length,
        entropy,
        relative_entropy: d,
        kraft,
        neg_log_kraft,
        residual: avg_length - (entropy + d + neg_log_kraft),
    })
}

/// Whether the code is length-optimizing for the ensemble.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OptimizingCheck {
    pub optimizing: bool,
    pub kraft: f64,
    /// Max-entry deviation between ρ and ω.
    pub deviation: f64,
    /// D(ρ‖ω), the extra qubits per signal.
    pub overhead: f64,
}

/// True iff K = 1 (± 1e-10) and ρ = ω (± 1e-9 entrywise).
pub fn length_optimizing_check(ensemble: &Ensemble) -> Result<OptimizingCheck> {
    let rho = rho_of(ensemble)?;
    let omega = codes::omega_operator(&ensemble.code)?;
    let kraft = quantum_kraft_sum(&ensemble.code);
    let deviation = rho.max_deviation(&omega)?;
    let overhead = relative_entropy(&rho, &omega)?;
    Ok(OptimizingCheck {
        optimizing: (kraft - 1.0).abs() <= STATE_TOLERANCE && deviation <= BOUND_TOLERANCE,
        kraft,
        deviation,
        overhead,
    })
}

/// Variable-length code construction used for block coding.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Construction {
    ShannonFano,
    Huffman,
}

/// A code over the eigenbasis of ρ^{⊗n}.
#[derive(Clone, Debug, PartialEq)]
pub struct BlockCode {
    pub n: usize,
    pub construction: Construction,
    /// Block eigenvalues, indexed by the tuple of single-signal eigenvalue
    /// indices read as a base-rank number.
    pub probs: Vec<f64>,
    pub lengths: Vec<usize>,
    /// Canonical codewords, one per block eigenvalue.
    pub code: ClassicalCode,
    pub entropy: f64,
    pub avg_length: f64,
}

impl BlockCode {
    pub fn per_signal_length(&self) -> f64 {
        self.avg_length / self.n as f64
    }

    /// S ≤ ⟨l⟩/n < S + 1/n, within 1e-9.
    pub fn bound_holds(&self) -> bool {
        let per = self.per_signal_length();
        per + BOUND_TOLERANCE >= self.entropy && per < self.entropy + 1.0 / self.n as f64 + BOUND_TOLERANCE
    }

    /// The block code as a quantum code on its eigenbasis labels.
    pub fn quantum_code(&self) -> Result<QuantumCode> {
        codes::lift_classical(&self.code, self.code.max_length())
    }
}

/// Codes blocks of n signals drawn from a source with the given spectrum.
/// Zero eigenvalues are dropped.
pub fn block_code(spectrum: &[f64], n: usize, construction: Construction) -> Result<BlockCode> {
    if n == 0 {
        return Err(Error::InvalidDistribution("block length must be positive".into()));
    }
    let support: Vec<f64> = spectrum.iter().copied().filter(|&p| p > 1e-15).collect();
    let total: f64 = support.iter().sum();
    if (total - 1.0).abs() > codes::DISTRIBUTION_TOLERANCE {
        return Err(Error::InvalidDistribution(format!("spectrum sums to {total}")));
    }
    let rank = support.len();
    let size = u32::try_from(n)
        .ok()
        .and_then(|e| rank.checked_pow(e))
        .filter(|&s| s <= MAX_BLOCK_SIZE)
        .ok_or_else(|| Error::ResourceLimit(format!("{rank}^{n} block eigenvalues exceed {MAX_BLOCK_SIZE}")))?;
    let probs: Vec<f64> = (0..size)
        .map(|mut index| {
            let mut p = 1.0;
            for _ in 0..n {
                p *= support[index % rank];
                index /= rank;
            }
            p
        })
        .collect();
    // Products of a normalized spectrum sum to 1 only up to rounding.
    let block_total: f64 = probs.iter().sum();
    let probs: Vec<f64> = probs.iter().map(|p| p / block_total).collect();
    let lengths = match construction {
        Construction::ShannonFano => shannon_fano_lengths(&probs)?,
        Construction::Huffman => huffman_lengths(&probs)?,
    };
    let code = ClassicalCode::new(codes::canonical_codewords(&lengths)?)?;
    let avg_length = probs.iter().zip(&lengths).map(|(p, &l)| p * l as f64).sum();
    Ok(BlockCode {
        n,
        construction,
        probs,
        lengths,
        code,
        entropy: shannon_entropy(&support),
        avg_length,
    })
}

/// Block code for the spectrum of a density matrix.
pub fn block_code_rho(rho: &DensityMatrix, n: usize, construction: Construction) -> Result<BlockCode> {
    let mut values: Vec<f64> = rho.eigenvalues().into_iter().filter(|&v| v > 1e-12).collect();
    let total: f64 = values.iter().sum();
    values.iter_mut().for_each(|v| *v /= total);
    values.reverse();
    block_code(&values, n, construction)
}

/// Fraction of weight outside the code subspace, for callers that build
/// states by hand.
pub fn leakage(state: &SparseState, code: &QuantumCode) -> Result<f64> {
    let (_, leaked) = code.length_observable().distribution(state)?;
    Ok(leaked)
}

/// True if `state` is a valid zef word of `code`.
pub fn is_codeword(state: &SparseState, code: &QuantumCode) -> bool {
    leakage(state, code).is_ok_and(|w| w <= LEAKAGE_TOLERANCE)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codes::lift_classical;
    use crate::qstate::basis_state;

    fn sample() -> QuantumCode {
        lift_classical(&ClassicalCode::parse(&["0", "10", "110", "111"]).unwrap(), 3).unwrap()
    }

    fn dyadic() -> Ensemble {
        Ensemble::from_basis(sample(), &[0.5, 0.25, 0.125, 0.125]).unwrap()
    }

    fn uniform() -> Ensemble {
        Ensemble::from_basis(sample(), &[0.25; 4]).unwrap()
    }

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn zef(bits: &str) -> SparseState {
        basis_state(&bits.parse().unwrap())
    }

    #[test]
    fn rho_examples() {
        let rho = rho_of(&dyadic()).unwrap();
        let d = rho.matrix();
        assert!((d[(0b000, 0b000)].re - 0.5).abs() < 1e-15);
        assert!((d[(0b111, 0b111)].re - 0.125).abs() < 1e-15);
        let single = Ensemble::new(sample(), vec![(1.0, zef("100"))]).unwrap();
        assert_eq!(rho_of(&single).unwrap(), DensityMatrix::from_pure(&zef("100")).unwrap());
        // |000⟩ and (|000⟩+|100⟩)/√2 with equal weight: eigenvalues (1 ± 1/√2)/2.
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let mixed = SparseState::from_bitstrings([("000", c(h)), ("100", c(h))]).unwrap();
        let e = Ensemble::new(sample(), vec![(0.5, zef("000")), (0.5, mixed)]).unwrap();
        let spec = e.spectrum().unwrap();
        assert!((spec[0] - (1.0 + h) / 2.0).abs() < 1e-12);
        assert!((spec[1] - (1.0 - h) / 2.0).abs() < 1e-12);
        let dense = rho_of(&e).unwrap().eigenvalues();
        assert!((dense[7] - spec[0]).abs() < 1e-12);
    }

    #[test]
    fn truncation_examples() {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let phi = SparseState::from_bitstrings([("000", c(h)), ("110", c(h))]).unwrap();
        let sigma = truncate_and_restore(&phi, 1).unwrap();
        let expect = DensityMatrix::diagonal(3, &[0.5, 0.0, 0.0, 0.0, 0.5, 0.0, 0.0, 0.0]).unwrap();
        assert!(sigma.max_deviation(&expect).unwrap() < 1e-15);
        assert!((qstate::fidelity_pure_mixed(&phi, &sigma).unwrap() - 0.25).abs() < 1e-15);
        assert!((truncation_fidelity(&phi, 1).unwrap() - 0.25).abs() < 1e-15);
        assert_eq!(truncation_fidelity(&phi, 3).unwrap(), 1.0);
        assert_eq!(truncation_fidelity(&zef("100"), 2).unwrap(), 1.0);
        assert_eq!(
            truncate_and_restore(&zef("100"), 2).unwrap(),
            DensityMatrix::from_pure(&zef("100")).unwrap()
        );
        assert!(truncation_fidelity(&phi, 4).is_err());
    }

    #[test]
    fn low_rank_truncations_have_finite_spectra() {
        use rand::SeedableRng;
        // Summation order in the channel varies between runs; some orders
        // used to drive the eigensolver to NaN on this state.
        let mut rng = ChaCha8Rng::seed_from_u64(8502414887245705441);
        let phi = crate::random::pure_state(&mut rng, 5).unwrap();
        for _ in 0..200 {
            let values = truncate_and_restore(&phi, 1).unwrap().eigenvalues();
            assert!(values.iter().all(|v| v.is_finite() && *v > -1e-12), "{values:?}");
            assert!((values[31] + values[30] - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn tails() {
        assert_eq!(tail_probability(&zef("110"), &sample(), 2).unwrap(), 1.0);
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let mix = SparseState::from_bitstrings([("000", c(h)), ("110", c(h))]).unwrap();
        assert!((tail_probability(&mix, &sample(), 1).unwrap() - 0.5).abs() < 1e-15);
        assert_eq!(tail_probability(&mix, &sample(), 3).unwrap(), 0.0);
    }

    #[test]
    fn sufficiency_chain_examples() {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let phi = SparseState::from_bitstrings([("000", c(h)), ("110", c(h))]).unwrap();
        let out = sufficiency_bound_check(&phi, &sample(), 1).unwrap();
        assert!((out.fidelity - 0.25).abs() < 1e-15);
        assert!((out.alpha.powi(4) - 0.25).abs() < 1e-15);
        assert!((out.eta - 0.5).abs() < 1e-15);
        assert!(out.chain_holds());
        let [a, b, _] = out.slack();
        assert!(a.abs() < 1e-15 && b.abs() < 1e-15);
        let tight = sufficiency_bound_check(&zef("110"), &sample(), 3).unwrap();
        assert_eq!((tight.fidelity, tight.eta, tight.alpha), (1.0, 0.0, 1.0));
    }

    #[test]
    fn exact_sweep_small() {
        let cfg = SweepConfig {
            n: 2,
            ells: (0..=6).collect(),
            samples: 0,
            seed: 0,
            sampling: Sampling::Exact,
        };
        let rows = sufficiency_experiment(&dyadic(), &cfg).unwrap();
        assert_eq!(rows.last().unwrap().avg_fidelity, 1.0);
        for r in &rows {
            assert_eq!(r.stderr, 0.0);
            assert!(r.bound_lower <= r.avg_fidelity + 1e-12);
            assert!(r.avg_fidelity >= 1.0 - 2.0 * r.eta_exact - 1e-12);
            assert!(r.avg_fidelity <= r.bound_upper + 1e-12);
        }
        for w in rows.windows(2) {
            assert!(w[0].avg_fidelity <= w[1].avg_fidelity + 1e-12);
        }
        // P(𝚲 > 5) for two words = P(3,3) = 1/16.
        assert_eq!(rows[5].eta_exact, 0.0625);
    }

    #[test]
    fn monte_carlo_is_deterministic() {
        let cfg = SweepConfig {
            n: 3,
            ells: vec![3, 5, 7],
            samples: 600,
            seed: 7,
            sampling: Sampling::MonteCarlo,
        };
        let a = sufficiency_experiment(&dyadic(), &cfg).unwrap();
        let b = sufficiency_experiment(&dyadic(), &cfg).unwrap();
        assert_eq!(a, b);
        assert!(a.iter().all(|r| r.stderr > 0.0));
    }

    #[test]
    fn necessity_examples() {
        let e = dyadic();
        assert_eq!(e.lambda_max().unwrap(), 0.5);
        // N = 40, δ = 0.5, k = 7 violates the side condition: 50 > 49.5.
        assert!(matches!(necessity_bound(&e, 40, 7, 0.5), Err(Error::SideCondition(_))));
        let r = necessity_bound(&e, 200, 7, 0.5).unwrap();
        assert_eq!(r.w_norm, 2f64.powi(-7));
        assert!(r.side_condition && r.w_norm < 0.01);
        assert!((r.bound - (r.w_norm + 15.0 * r.alpha_sq.powf(0.25))).abs() < 1e-15);
        let flat = necessity_bound(&e, 40, 7, 0.0).unwrap();
        assert!(!flat.informative());
        assert!(!flat.side_condition);
        let single = Ensemble::new(sample(), vec![(1.0, zef("000"))]).unwrap();
        assert!(necessity_bound(&single, 10, 2, 0.5).is_err());
    }

    #[test]
    fn planner() {
        let plan = plan_necessity(&dyadic(), 0.5, 0.5, 5000).unwrap();
        assert_eq!(plan.k, 3);
        assert!(plan.bound < 0.5);
        let again = necessity_bound(&dyadic(), plan.n, plan.k, 0.5).unwrap();
        assert!(again.bound < 0.5);
        assert!((again.alpha_sq - plan.alpha_sq).abs() < 1e-12);
    }

    #[test]
    fn identity_examples() {
        let d = length_identity(&dyadic()).unwrap();
        assert!((d.avg_length - 1.75).abs() < 1e-12);
        assert!((d.entropy - 1.75).abs() < 1e-12);
        assert!(d.relative_entropy.abs() < 1e-12);
        assert_eq!(d.kraft, 1.0);
        assert!(d.holds() && d.entropy_bound_holds());
        let u = length_identity(&uniform()).unwrap();
        assert!((u.avg_length - 2.25).abs() < 1e-12);
        assert!((u.entropy - 2.0).abs() < 1e-12);
        assert!((u.relative_entropy - 0.25).abs() < 1e-12);
        assert!(u.holds());
        let short = lift_classical(&ClassicalCode::parse(&["0", "10", "110"]).unwrap(), 3).unwrap();
        let e = Ensemble::from_basis(short, &[0.5, 0.25, 0.25]).unwrap();
        let s = length_identity(&e).unwrap();
        assert!((s.neg_log_kraft - (8.0f64 / 7.0).log2()).abs() < 1e-12);
        assert!(s.holds());
    }

    #[test]
    fn optimizing_examples() {
        assert!(length_optimizing_check(&dyadic()).unwrap().optimizing);
        let u = length_optimizing_check(&uniform()).unwrap();
        assert!(!u.optimizing);
        assert!((u.overhead - 0.25).abs() < 1e-12);
        let short = lift_classical(&ClassicalCode::parse(&["0", "10", "110"]).unwrap(), 3).unwrap();
        let e = Ensemble::from_basis(short, &[0.5, 0.25, 0.25]).unwrap();
        assert!(!length_optimizing_check(&e).unwrap().optimizing);
    }

    #[test]
    fn block_examples() {
        let b = block_code(&[0.5, 0.5], 1, Construction::ShannonFano).unwrap();
        assert_eq!(b.per_signal_length(), 1.0);
        assert_eq!(b.entropy, 1.0);
        let per: Vec<f64> = [1, 2, 4]
            .iter()
            .map(|&n| block_code(&[0.9, 0.1], n, Construction::ShannonFano).unwrap())
            .inspect(|b| assert!(b.bound_holds()))
            .map(|b| b.per_signal_length())
            .collect();
        assert!((per[0] - 1.3).abs() < 1e-12);
        assert!((per[1] - 0.8).abs() < 1e-12);
        assert!(per[0] > per[1] && per[1] > per[2]);
        let h = block_code(&[0.9, 0.1], 2, Construction::Huffman).unwrap();
        assert!(h.avg_length <= 1.6 + 1e-12);
        assert!(block_code(&[0.5, 0.5], 17, Construction::ShannonFano).is_err());
        let q = b.quantum_code().unwrap();
        assert_eq!(q.dims().as_slice(), &[2]);
    }
}
