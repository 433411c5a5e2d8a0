//! Simple condensation: concatenate codeword payloads into one zef string.
//!
//! Each input word is expanded in the code's length eigenbasis; every basis
//! combination contributes the tensor product of its payloads followed by
//! zeros out to `N·l_max` qubits. The map is built directly on the codeword
//! subspace and never materialized as a full unitary.

use std::collections::{BTreeMap, HashMap};

use num_complex::Complex64;

use crate::codes::{self, is_prefix_free_quantum, QuantumCode, SectorDims, LEAKAGE_TOLERANCE};
use crate::error::{Error, Result};
use crate::lengths;
use crate::qstate::{self, SparseState, PRUNE_THRESHOLD, STATE_TOLERANCE};

/// Expansion coefficients below this modulus are dropped.
pub const EXPANSION_CUTOFF: f64 = 1e-12;

/// Cap on intermediate product terms during condensation.
pub const MAX_CONDENSE_TERMS: usize = 1 << 22;

/// Cap on enumerated basis products in [`isometry_check`].
pub const MAX_ISOMETRY_PRODUCTS: usize = 4096;

/// Cap on N·l_max for [`dimension_count_check`].
pub const MAX_COUNT_QUBITS: usize = 40;

/// A condensed string of `n_words` codewords on `n_words · l_max` qubits.
#[derive(Clone, Debug, PartialEq)]
pub struct CondensedString {
    pub state: SparseState,
    pub l_max: usize,
    pub n_words: usize,
    /// |‖state‖² − Π‖word‖²|; nonzero only for codes that are not prefix-free.
    pub norm_deviation: f64,
    pub prefix_free: bool,
}

impl CondensedString {
    pub fn num_qubits(&self) -> usize {
        self.state.num_qubits()
    }
}

/// Coefficients ⟨b|word⟩ over the code's zef basis, indexed like
/// [`QuantumCode::basis`], with tiny components dropped.
pub fn expand(code: &QuantumCode, word: &SparseState) -> Result<Vec<(usize, Complex64)>> {
    if word.num_qubits() != code.l_max() {
        return Err(Error::DimensionMismatch {
            expected: code.l_max(),
            found: word.num_qubits(),
        });
    }
    let mut coeffs = Vec::new();
    let mut kept = 0.0;
    for (i, b) in code.basis().iter().enumerate() {
        let c = qstate::inner(&b.zef, word)?;
        kept += c.norm_sqr();
        if c.norm() >= EXPANSION_CUTOFF {
            coeffs.push((i, c));
        }
    }
    let leaked = word.norm_sqr() - kept;
    if leaked > LEAKAGE_TOLERANCE {
        return Err(Error::Leakage { weight: leaked });
    }
    Ok(coeffs)
}

/// Concatenates the payloads of `words` (each a zef codeword of `code`).
pub fn simple_condense(code: &QuantumCode, words: &[SparseState]) -> Result<CondensedString> {
    let l_max = code.l_max();
    let width = words.len() * l_max;
    if width > crate::bits::MAX_WIDTH {
        return Err(Error::ResourceLimit(format!(
            "condensed register of {width} qubits exceeds {}",
            crate::bits::MAX_WIDTH
        )));
    }
    let expansions = words
        .iter()
        .map(|w| expand(code, w))
        .collect::<Result<Vec<_>>>()?;
    // Partial strings keyed by (bits, used length).
    let mut partial: HashMap<(u128, usize), Complex64> = HashMap::new();
    partial.insert((0, 0), Complex64::new(1.0, 0.0));
    for expansion in &expansions {
        let mut next: HashMap<(u128, usize), Complex64> = HashMap::new();
        for (&(bits, used), &amp) in &partial {
            for &(idx, c) in expansion {
                let b = &code.basis()[idx];
                for (label, a) in b.payload.terms() {
                    let key = ((bits << b.length) | label, used + b.length);
                    *next.entry(key).or_default() += amp * c * a;
                }
            }
        }
        next.retain(|_, a| a.norm() > PRUNE_THRESHOLD);
        if next.len() > MAX_CONDENSE_TERMS {
            return Err(Error::ResourceLimit(format!(
                "condensation needs more than {MAX_CONDENSE_TERMS} terms"
            )));
        }
        partial = next;
    }
    let state = SparseState::from_terms(
        width,
        partial
            .into_iter()
            .map(|((bits, used), a)| (bits << (width - used), a)),
    )?;
    let input_norm: f64 = words.iter().map(|w| w.norm_sqr()).product();
    Ok(CondensedString {
        norm_deviation: (state.norm_sqr() - input_norm).abs(),
        state,
        l_max,
        n_words: words.len(),
        prefix_free: is_prefix_free_quantum(code),
    })
}

/// Inverts simple condensation for a prefix-free code.
///
/// The first word is peeled off by contracting the leading qubits with each
/// basis payload; the contracted remainders must all be proportional to one
/// state, which is the condensation of the remaining words. Each recovered
/// word is returned normalized; phases are fixed only up to a global factor
/// on the whole tuple.
pub fn decondense(code: &QuantumCode, cs: &CondensedString) -> Result<Vec<SparseState>> {
    if !is_prefix_free_quantum(code) {
        return Err(Error::NotPrefixFree(
            "decondensation requires a prefix-free code; remap first".into(),
        ));
    }
    let l_max = code.l_max();
    if cs.state.num_qubits() != cs.n_words * l_max {
        return Err(Error::DimensionMismatch {
            expected: cs.n_words * l_max,
            found: cs.state.num_qubits(),
        });
    }
    let mut words = Vec::with_capacity(cs.n_words);
    let mut rest = cs.state.normalize()?;
    for remaining in (1..=cs.n_words).rev() {
        let (word, tail) = peel(code, &rest, remaining)?;
        words.push(word);
        rest = tail;
    }
    Ok(words)
}

/// Splits a condensed string of `n` words into its first word and the
/// condensed string of the other `n − 1`.
fn peel(code: &QuantumCode, state: &SparseState, n: usize) -> Result<(SparseState, SparseState)> {
    let l_max = code.l_max();
    let width = n * l_max;
    let rest_width = width - l_max;
    // Group the support by prefix for each payload length.
    let mut by_prefix: BTreeMap<(usize, u128), Vec<(u128, Complex64)>> = BTreeMap::new();
    for (label, amp) in state.terms() {
        for l in 1..=l_max {
            let prefix = label >> (width - l);
            let suffix = label & crate::bits::low_mask(width - l);
            by_prefix.entry((l, prefix)).or_default().push((suffix, amp));
        }
    }
    let mut remainders = Vec::with_capacity(code.dimension());
    let mut captured = 0.0;
    for b in code.basis() {
        let pad = l_max - b.length;
        let mut acc: BTreeMap<u128, Complex64> = BTreeMap::new();
        for (p_label, p_amp) in b.payload.terms() {
            if let Some(entries) = by_prefix.get(&(b.length, p_label)) {
                for &(suffix, amp) in entries {
                    *acc.entry(suffix).or_default() += p_amp.conj() * amp;
                }
            }
        }
        let mut tail_weight = 0.0;
        let mut kept = Vec::with_capacity(acc.len());
        for (suffix, a) in acc {
            if suffix & crate::bits::low_mask(pad) != 0 {
                tail_weight += a.norm_sqr();
            } else {
                kept.push((suffix >> pad, a));
            }
        }
        if tail_weight > LEAKAGE_TOLERANCE {
            return Err(Error::OutsideImage(tail_weight));
        }
        let m = SparseState::from_terms(rest_width, kept)?;
        captured += m.norm_sqr();
        remainders.push(m);
    }
    let outside = state.norm_sqr() - captured;
    if outside.abs() > LEAKAGE_TOLERANCE {
        return Err(Error::OutsideImage(outside.abs()));
    }
    let pivot = remainders
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.norm_sqr().total_cmp(&b.1.norm_sqr()))
        .map(|(i, _)| i)
        .ok_or_else(|| Error::InvalidCode("code has no codewords".into()))?;
    let tail = remainders[pivot].normalize()?;
    let mut word = SparseState::zero(l_max);
    let mut residual = 0.0;
    for (b, m) in code.basis().iter().zip(&remainders) {
        let c = qstate::inner(&tail, m)?;
        residual += m.add_scaled(&tail, -c)?.norm_sqr();
        word = word.add_scaled(&b.zef, c)?;
    }
    if residual > LEAKAGE_TOLERANCE {
        return Err(Error::OutsideImage(residual));
    }
    Ok((word.normalize()?, tail))
}

/// Report from [`isometry_check`].
#[derive(Clone, Debug, PartialEq)]
pub struct IsometryReport {
    pub n_words: usize,
    pub products: usize,
    /// max |G_ij − δ_ij| over the Gram matrix of condensed basis products.
    pub max_deviation: f64,
    /// The basis-index tuples of the worst off-diagonal pair, if any overlap.
    pub worst_pair: Option<(Vec<usize>, Vec<usize>)>,
}

impl IsometryReport {
    pub fn is_isometric(&self) -> bool {
        self.max_deviation <= STATE_TOLERANCE
    }
}

fn tuple_of(mut index: usize, base: usize, n: usize) -> Vec<usize> {
    let mut digits = vec![0; n];
    for d in digits.iter_mut().rev() {
        *d = index % base;
        index /= base;
    }
    digits
}

/// Gram matrix of the condensed images of all N-fold basis products.
pub fn isometry_check(code: &QuantumCode, n: usize) -> Result<IsometryReport> {
    let base = code.dimension();
    let products = u32::try_from(n)
        .ok()
        .and_then(|e| base.checked_pow(e))
        .filter(|&p| p <= MAX_ISOMETRY_PRODUCTS)
        .ok_or_else(|| {
            Error::ResourceLimit(format!(
                "{base}^{n} basis products exceed {MAX_ISOMETRY_PRODUCTS}"
            ))
        })?;
    let mut by_label: HashMap<u128, Vec<(usize, Complex64)>> = HashMap::new();
    for index in 0..products {
        let words: Vec<SparseState> = tuple_of(index, base, n)
            .into_iter()
            .map(|i| code.basis()[i].zef.clone())
            .collect();
        let cs = simple_condense(code, &words)?;
        for (label, amp) in cs.state.terms() {
            by_label.entry(label).or_default().push((index, amp));
        }
    }
    let mut gram: HashMap<(usize, usize), Complex64> = HashMap::new();
    for entries in by_label.values() {
        for &(i, a) in entries {
            for &(j, b) in entries {
                if i <= j {
                    *gram.entry((i, j)).or_default() += a.conj() * b;
                }
            }
        }
    }
    let mut max_deviation: f64 = 0.0;
    let mut worst = None;
    let mut worst_off: f64 = 0.0;
    for i in 0..products {
        let g = gram.get(&(i, i)).copied().unwrap_or_default();
        max_deviation = max_deviation.max((g - Complex64::new(1.0, 0.0)).norm());
    }
    for (&(i, j), &g) in &gram {
        if i != j && (g.norm() > worst_off || (g.norm() == worst_off && worst.is_some_and(|w| (i, j) < w))) {
            worst_off = g.norm();
            worst = Some((i, j));
        }
    }
    max_deviation = max_deviation.max(worst_off);
    Ok(IsometryReport {
        n_words: n,
        products,
        max_deviation,
        worst_pair: worst
            .filter(|_| worst_off > STATE_TOLERANCE)
            .map(|(i, j)| (tuple_of(i, base, n), tuple_of(j, base, n))),
    })
}

/// Distribution of the total length L over 0..=N·l_max for a product of
/// codewords.
pub fn condensed_length_distribution(code: &QuantumCode, words: &[SparseState]) -> Result<Vec<f64>> {
    let observable = code.length_observable();
    let mut total = vec![1.0];
    for w in words {
        let probs = observable.codeword_distribution(&w.normalize()?)?;
        total = lengths::convolve(&total, &probs);
    }
    Ok(total)
}

/// Σ P(l₁..l_N)(l₁ + ⋯ + l_N) for a product of codewords.
pub fn condensed_length_expectation(code: &QuantumCode, words: &[SparseState]) -> Result<f64> {
    Ok(condensed_length_distribution(code, words)?
        .iter()
        .enumerate()
        .map(|(l, p)| l as f64 * p)
        .sum())
}

/// Expected total length of N i.i.d. words with single-word pmf `pmf`.
pub fn iid_length_expectation(pmf: &[f64], n: usize) -> Result<f64> {
    Ok(lengths::power(pmf, n)?
        .iter()
        .enumerate()
        .map(|(l, p)| l as f64 * p)
        .sum())
}

/// One row of [`DimensionCountReport`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DimensionCount {
    pub total_length: usize,
    /// Σ_{l₁+⋯+l_N = L} d_{l₁}⋯d_{l_N}.
    pub count: u128,
    /// 2^L.
    pub bound: u128,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DimensionCountReport {
    pub n_words: usize,
    pub rows: Vec<DimensionCount>,
    /// Total lengths L whose count exceeds 2^L.
    pub violations: Vec<usize>,
    pub kraft_sum: f64,
    /// K^N.
    pub kraft_power: f64,
    /// N·l_max.
    pub kraft_power_bound: f64,
    /// K^N ≤ N·l_max (checked only when K ≤ 1).
    pub kraft_power_ok: Option<bool>,
}

/// Counts condensed-string dimensions per total length L against 2^L.
pub fn dimension_count_check(dims: &SectorDims, n: usize) -> Result<DimensionCountReport> {
    let l_max = dims.l_max();
    let qubits = n * l_max;
    if qubits > MAX_COUNT_QUBITS {
        return Err(Error::ResourceLimit(format!(
            "N·l_max = {qubits} exceeds {MAX_COUNT_QUBITS}"
        )));
    }
    let single: Vec<u128> = (0..=l_max).map(|l| u128::from(dims.get(l))).collect();
    let mut counts = vec![1u128];
    for _ in 0..n {
        let mut next = vec![0u128; counts.len() + l_max];
        for (i, &a) in counts.iter().enumerate().filter(|(_, &a)| a > 0) {
            for (j, &b) in single.iter().enumerate().filter(|(_, &b)| b > 0) {
                next[i + j] = next[i + j].saturating_add(a.saturating_mul(b));
            }
        }
        counts = next;
    }
    let rows: Vec<DimensionCount> = counts
        .iter()
        .enumerate()
        .filter(|&(_, &c)| c > 0)
        .map(|(l, &c)| DimensionCount {
            total_length: l,
            count: c,
            bound: 1u128 << l,
        })
        .collect();
    let violations = rows
        .iter()
        .filter(|r| r.count > r.bound)
        .map(|r| r.total_length)
        .collect();
    let kraft_sum = dims.kraft_sum();
    let kraft_power = kraft_sum.powi(n as i32);
    let kraft_power_bound = qubits as f64;
    Ok(DimensionCountReport {
        n_words: n,
        rows,
        violations,
        kraft_sum,
        kraft_power,
        kraft_power_bound,
        kraft_power_ok: (kraft_sum <= 1.0).then_some(kraft_power <= kraft_power_bound),
    })
}

/// The code whose sector-l payloads are the computational words listed;
/// handy for fixtures that are not prefix-free.
pub fn payload_code(words: &[&str], l_max: usize) -> Result<QuantumCode> {
    QuantumCode::from_classical_payloads(&codes::ClassicalCode::parse(words)?, l_max)
}
