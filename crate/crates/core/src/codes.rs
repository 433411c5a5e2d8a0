//! Classical variable-length codes and quantum zef codes.
//!
//! A [`QuantumCode`] is stored as an orthonormal basis of length
//! eigenstates grouped by length. Sector `l` holds payload states on `l`
//! qubits; their zero-extended forms on `l_max` qubits span the length-`l`
//! eigenspace of the length observable.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BinaryHeap};

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::bits::BitString;
use crate::error::{Error, Result};
use crate::qstate::{self, check_dense, prefix_overlap, DensityMatrix, SparseState};

/// Tolerance for orthonormality and prefix-free checks.
pub const CODE_TOLERANCE: f64 = 1e-10;

/// Weight allowed outside the codeword subspace before a state is rejected.
pub const LEAKAGE_TOLERANCE: f64 = 1e-8;

/// Tolerance on the sum of a probability vector.
pub const DISTRIBUTION_TOLERANCE: f64 = 1e-10;

/// A set of distinct binary codewords, kept in the order given.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClassicalCode {
    codewords: Vec<BitString>,
}

impl ClassicalCode {
    pub fn new(codewords: Vec<BitString>) -> Result<Self> {
        for (i, a) in codewords.iter().enumerate() {
            if codewords[..i].contains(a) {
                return Err(Error::InvalidCode(format!("duplicate codeword {a}")));
            }
        }
        Ok(Self { codewords })
    }

    pub fn parse(words: &[&str]) -> Result<Self> {
        Self::new(words.iter().map(|w| w.parse()).collect::<Result<_>>()?)
    }

    pub fn codewords(&self) -> &[BitString] {
        &self.codewords
    }

    pub fn len(&self) -> usize {
        self.codewords.len()
    }

    pub fn is_empty(&self) -> bool {
        self.codewords.is_empty()
    }

    pub fn lengths(&self) -> Vec<usize> {
        self.codewords.iter().map(|c| c.len()).collect()
    }

    pub fn max_length(&self) -> usize {
        self.codewords.iter().map(|c| c.len()).max().unwrap_or(0)
    }

    pub fn contains(&self, word: &BitString) -> bool {
        self.codewords.contains(word)
    }
}

/// Σ 2^{-len} over the codewords.
pub fn kraft_sum_classical(code: &ClassicalCode) -> f64 {
    code.codewords
        .iter()
        .map(|c| (-(c.len() as f64)).exp2())
        .sum()
}

/// True iff no codeword is a prefix of another.
pub fn is_prefix_free_classical(code: &ClassicalCode) -> bool {
    let words = &code.codewords;
    words.iter().enumerate().all(|(i, a)| {
        words
            .iter()
            .enumerate()
            .all(|(j, b)| i == j || !a.is_prefix_of(b))
    })
}

fn validate_distribution(probs: &[f64]) -> Result<()> {
    if probs.is_empty() {
        return Err(Error::InvalidDistribution("no symbols".into()));
    }
    if let Some(p) = probs.iter().find(|p| !(p.is_finite() && **p > 0.0)) {
        return Err(Error::InvalidDistribution(format!(
            "probability {p} is not positive"
        )));
    }
    let total: f64 = probs.iter().sum();
    if (total - 1.0).abs() > DISTRIBUTION_TOLERANCE {
        return Err(Error::InvalidDistribution(format!("probabilities sum to {total}")));
    }
    Ok(())
}

#[derive(PartialEq)]
struct HeapNode {
    prob: f64,
    // Leaves are numbered by symbol index, merged nodes after them in
    // creation order; ties on probability go to the lower number.
    order: usize,
    symbols: Vec<usize>,
}

impl Eq for HeapNode {}

impl Ord for HeapNode {
    fn cmp(&self, other: &Self) -> Ordering {
        // min-heap on (prob, order)
        other
            .prob
            .total_cmp(&self.prob)
            .then_with(|| other.order.cmp(&self.order))
    }
}

impl PartialOrd for HeapNode {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Huffman codeword lengths, one per symbol.
///
/// A single-symbol source gets one 1-bit codeword so that every length stays
/// at least 1.
pub fn huffman_lengths(probs: &[f64]) -> Result<Vec<usize>> {
    validate_distribution(probs)?;
    let n = probs.len();
    if n == 1 {
        return Ok(vec![1]);
    }
    let mut heap: BinaryHeap<HeapNode> = probs
        .iter()
        .enumerate()
        .map(|(i, &p)| HeapNode {
            prob: p,
            order: i,
            symbols: vec![i],
        })
        .collect();
    let mut lengths = vec![0usize; n];
    let mut next = n;
    while heap.len() > 1 {
        let a = heap.pop().expect("heap has two nodes");
        let b = heap.pop().expect("heap has two nodes");
        let mut symbols = a.symbols;
        symbols.extend(b.symbols);
        for &s in &symbols {
            lengths[s] += 1;
        }
        heap.push(HeapNode {
            prob: a.prob + b.prob,
            order: next,
            symbols,
        });
        next += 1;
    }
    Ok(lengths)
}

/// Huffman code with canonical codewords, listed in symbol order.
pub fn huffman_from_probs(probs: &[f64]) -> Result<ClassicalCode> {
    let lengths = huffman_lengths(probs)?;
    ClassicalCode::new(canonical_codewords(&lengths)?)
}

/// l_k = max(1, ⌈−log₂ λ_k⌉).
pub fn shannon_fano_lengths(probs: &[f64]) -> Result<Vec<usize>> {
    validate_distribution(probs)?;
    Ok(probs
        .iter()
        .map(|&p| ((-p.log2()).ceil() as usize).max(1))
        .collect())
}

/// Canonical codewords for the given lengths, returned in input order.
///
/// Lengths are visited in nondecreasing order (ties by position) and each
/// receives the lexicographically smallest word that no earlier word
/// prefixes.
pub fn canonical_codewords(lengths: &[usize]) -> Result<Vec<BitString>> {
    if lengths.is_empty() {
        return Err(Error::InvalidCode("no codeword lengths".into()));
    }
    if let Some(&bad) = lengths.iter().find(|&&l| l == 0 || l > 127) {
        return Err(Error::InvalidCode(format!(
            "codeword length {bad} outside 1..=127"
        )));
    }
    let max_len = *lengths.iter().max().expect("nonempty");
    // Exact Kraft check: Σ 2^{max-l} ≤ 2^max.
    let budget: u128 = lengths.iter().map(|&l| 1u128 << (max_len - l)).sum();
    if budget > 1u128 << max_len {
        return Err(Error::KraftViolation(
            lengths.iter().map(|&l| (-(l as f64)).exp2()).sum(),
        ));
    }
    let mut order: Vec<usize> = (0..lengths.len()).collect();
    order.sort_by_key(|&i| (lengths[i], i));
    let mut words = vec![BitString::empty(); lengths.len()];
    let mut next: u128 = 0;
    let mut prev_len = lengths[order[0]];
    for &i in &order {
        let l = lengths[i];
        next <<= l - prev_len;
        prev_len = l;
        words[i] = BitString::new(l, next)?;
        next += 1;
    }
    Ok(words)
}

/// Canonical prefix-free code realizing exactly `lengths`, listed in
/// nondecreasing length order.
pub fn kraft_assign(lengths: &[usize]) -> Result<ClassicalCode> {
    let mut sorted = lengths.to_vec();
    sorted.sort_unstable();
    ClassicalCode::new(canonical_codewords(&sorted)?)
}

/// Sector dimensions d_1..d_{l_max} of a length observable.
///
/// Kept separate from [`QuantumCode`] so that dimension profiles no actual
/// code can realize (such as three length-1 sectors) can still be checked.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SectorDims(Vec<u64>);

impl SectorDims {
    /// `dims[l-1]` is d_l.
    pub fn new(dims: Vec<u64>) -> Self {
        Self(dims)
    }

    /// Multiplicities n_l counted from a multiset of lengths.
    pub fn from_lengths(lengths: &[usize]) -> Self {
        let l_max = lengths.iter().copied().max().unwrap_or(0);
        let mut dims = vec![0u64; l_max];
        for &l in lengths.iter().filter(|&&l| l > 0) {
            dims[l - 1] += 1;
        }
        Self(dims)
    }

    pub fn l_max(&self) -> usize {
        self.0.len()
    }

    /// d_l for l in 1..=l_max (0 outside).
    pub fn get(&self, l: usize) -> u64 {
        if l == 0 {
            0
        } else {
            self.0.get(l - 1).copied().unwrap_or(0)
        }
    }

    pub fn as_slice(&self) -> &[u64] {
        &self.0
    }

    pub fn total(&self) -> u64 {
        self.0.iter().sum()
    }

    /// K = Σ_l d_l 2^{-l}.
    pub fn kraft_sum(&self) -> f64 {
        self.0
            .iter()
            .enumerate()
            .map(|(i, &d)| d as f64 * (-((i + 1) as f64)).exp2())
            .sum()
    }

    /// Lengths with multiplicity, ascending.
    pub fn lengths(&self) -> Vec<usize> {
        self.0
            .iter()
            .enumerate()
            .flat_map(|(i, &d)| std::iter::repeat_n(i + 1, d as usize))
            .collect()
    }
}

/// One zef basis vector of a code.
#[derive(Clone, Debug, PartialEq)]
pub struct ZefBasisVector {
    pub length: usize,
    pub index: usize,
    /// The payload on `length` qubits.
    pub payload: SparseState,
    /// The payload followed by `l_max - length` zeros.
    pub zef: SparseState,
}

/// An indeterminate-length quantum code given by an orthonormal basis of
/// length eigenstates.
#[derive(Clone, Debug, PartialEq)]
pub struct QuantumCode {
    l_max: usize,
    sectors: Vec<Vec<SparseState>>,
    basis: Vec<ZefBasisVector>,
}

impl QuantumCode {
    /// `sectors[l-1]` lists the payload states of length `l`. The zef
    /// extensions of all payloads must be orthonormal within 1e-10.
    pub fn new(l_max: usize, sectors: Vec<Vec<SparseState>>) -> Result<Self> {
        if l_max == 0 {
            return Err(Error::InvalidCode("l_max must be positive".into()));
        }
        if sectors.len() > l_max {
            return Err(Error::LengthOverflow {
                length: sectors.len(),
                l_max,
            });
        }
        let mut sectors = sectors;
        sectors.resize(l_max, Vec::new());
        let mut basis = Vec::new();
        for (i, sector) in sectors.iter().enumerate() {
            let length = i + 1;
            for (index, payload) in sector.iter().enumerate() {
                if payload.num_qubits() != length {
                    return Err(Error::InvalidCode(format!(
                        "payload {index} of sector {length} has {} qubits",
                        payload.num_qubits()
                    )));
                }
                let zef = payload.pad_zeros(l_max - length)?;
                basis.push(ZefBasisVector {
                    length,
                    index,
                    payload: payload.clone(),
                    zef,
                });
            }
        }
        if basis.is_empty() {
            return Err(Error::InvalidCode("code has no codewords".into()));
        }
        let deviation = gram_deviation(basis.iter().map(|b| &b.zef))?;
        if deviation > CODE_TOLERANCE {
            return Err(Error::InvalidCode(format!(
                "zef basis is not orthonormal (Gram deviation {deviation:e})"
            )));
        }
        Ok(Self {
            l_max,
            sectors,
            basis,
        })
    }

    /// Builds the code whose sector-l basis is the computational payloads of
    /// the length-l codewords, without requiring the set to be prefix-free.
    /// Words whose zero-extensions coincide (such as "0" and "00") are
    /// rejected.
    pub fn from_classical_payloads(code: &ClassicalCode, l_max: usize) -> Result<Self> {
        if l_max == 0 {
            return Err(Error::InvalidCode("l_max must be positive".into()));
        }
        let mut sectors = vec![Vec::new(); l_max];
        let mut seen = std::collections::HashSet::new();
        for word in code.codewords() {
            if word.is_empty() {
                return Err(Error::InvalidCode("empty codeword".into()));
            }
            if word.len() > l_max {
                return Err(Error::LengthOverflow {
                    length: word.len(),
                    l_max,
                });
            }
            // Distinct zef labels are orthonormal, so no Gram check is needed.
            if !seen.insert(word.zero_extend(l_max)?) {
                return Err(Error::InvalidCode(format!(
                    "codeword {word} has the same zef form as another"
                )));
            }
            sectors[word.len() - 1].push(qstate::basis_state(word));
        }
        if seen.is_empty() {
            return Err(Error::InvalidCode("code has no codewords".into()));
        }
        let mut basis = Vec::with_capacity(seen.len());
        for (i, sector) in sectors.iter().enumerate() {
            for (index, payload) in sector.iter().enumerate() {
                basis.push(ZefBasisVector {
                    length: i + 1,
                    index,
                    payload: payload.clone(),
                    zef: payload.pad_zeros(l_max - i - 1)?,
                });
            }
        }
        Ok(Self {
            l_max,
            sectors,
            basis,
        })
    }

    pub fn l_max(&self) -> usize {
        self.l_max
    }

    /// Payload states of length `l`.
    pub fn sector(&self, l: usize) -> &[SparseState] {
        if l == 0 || l > self.l_max {
            &[]
        } else {
            &self.sectors[l - 1]
        }
    }

    pub fn dims(&self) -> SectorDims {
        SectorDims::new(self.sectors.iter().map(|s| s.len() as u64).collect())
    }

    /// All zef basis vectors, ordered by length then index.
    pub fn basis(&self) -> &[ZefBasisVector] {
        &self.basis
    }

    pub fn dimension(&self) -> usize {
        self.basis.len()
    }

    /// Payloads as classical words when every basis payload is a single
    /// computational basis state.
    pub fn classical_payloads(&self) -> Option<ClassicalCode> {
        let words = self
            .basis
            .iter()
            .map(|b| {
                let mut terms = b.payload.terms();
                match (terms.next(), terms.next()) {
                    (Some((label, amp)), None) if (amp.norm() - 1.0).abs() < CODE_TOLERANCE => {
                        BitString::new(b.length, label).ok()
                    }
                    _ => None,
                }
            })
            .collect::<Option<Vec<_>>>()?;
        ClassicalCode::new(words).ok()
    }

    pub fn length_observable(&self) -> LengthObservable<'_> {
        LengthObservable { code: self }
    }
}

/// Largest deviation of the Gram matrix of `states` from the identity.
pub(crate) fn gram_deviation<'a, I>(states: I) -> Result<f64>
where
    I: IntoIterator<Item = &'a SparseState>,
{
    let states: Vec<&SparseState> = states.into_iter().collect();
    let mut worst: f64 = 0.0;
    for (i, a) in states.iter().enumerate() {
        for (j, b) in states.iter().enumerate().skip(i) {
            let g = qstate::inner(a, b)?;
            let target = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((g - Complex64::new(target, 0.0)).norm());
        }
    }
    Ok(worst)
}

/// The length observable Λ = Σ_l l π_l of a code, evaluated lazily.
#[derive(Clone, Copy, Debug)]
pub struct LengthObservable<'a> {
    code: &'a QuantumCode,
}

impl LengthObservable<'_> {
    /// Eigenvalues l with their projector ranks d_l.
    pub fn spectrum(&self) -> Vec<(usize, u64)> {
        let dims = self.code.dims();
        (1..=self.code.l_max)
            .filter(|&l| dims.get(l) > 0)
            .map(|l| (l, dims.get(l)))
            .collect()
    }

    /// P(l) = ‖π_l ψ‖² for l = 0..=l_max (index 0 is always 0), plus the
    /// weight outside the codeword subspace.
    pub fn distribution(&self, state: &SparseState) -> Result<(Vec<f64>, f64)> {
        if state.num_qubits() != self.code.l_max {
            return Err(Error::DimensionMismatch {
                expected: self.code.l_max,
                found: state.num_qubits(),
            });
        }
        let mut probs = vec![0.0; self.code.l_max + 1];
        for b in &self.code.basis {
            probs[b.length] += qstate::inner(&b.zef, state)?.norm_sqr();
        }
        let inside: f64 = probs.iter().sum();
        Ok((probs, (state.norm_sqr() - inside).max(0.0)))
    }

    /// Like [`distribution`](Self::distribution) but rejects states that
    /// leak more than 1e-8 outside the codeword subspace.
    pub fn codeword_distribution(&self, state: &SparseState) -> Result<Vec<f64>> {
        let (probs, leaked) = self.distribution(state)?;
        if leaked > LEAKAGE_TOLERANCE {
            return Err(Error::Leakage { weight: leaked });
        }
        Ok(probs)
    }

    /// ⟨ψ|Λ|ψ⟩.
    pub fn expectation(&self, state: &SparseState) -> Result<f64> {
        let probs = self.codeword_distribution(state)?;
        Ok(probs.iter().enumerate().map(|(l, p)| l as f64 * p).sum())
    }

    /// Dense projector π_l on the l_max-qubit register.
    pub fn projector(&self, l: usize) -> Result<DMatrix<Complex64>> {
        let dim = check_dense(self.code.l_max)?;
        let mut m = DMatrix::from_element(dim, dim, Complex64::new(0.0, 0.0));
        for b in self.code.basis.iter().filter(|b| b.length == l) {
            add_outer(&mut m, &b.zef, 1.0);
        }
        Ok(m)
    }

    /// Dense Λ on the l_max-qubit register (zero off the codeword subspace).
    pub fn dense(&self) -> Result<DMatrix<Complex64>> {
        let dim = check_dense(self.code.l_max)?;
        let mut m = DMatrix::from_element(dim, dim, Complex64::new(0.0, 0.0));
        for b in &self.code.basis {
            add_outer(&mut m, &b.zef, b.length as f64);
        }
        Ok(m)
    }
}

fn add_outer(m: &mut DMatrix<Complex64>, v: &SparseState, weight: f64) {
    let terms: Vec<(usize, Complex64)> = v.terms().map(|(k, a)| (k as usize, a)).collect();
    for &(i, a) in &terms {
        for &(j, b) in &terms {
            m[(i, j)] += a * b.conj() * weight;
        }
    }
}

/// Builds the quantum code whose basis is |C_{l,i} 0…0⟩ for a prefix-free
/// classical code.
pub fn lift_classical(code: &ClassicalCode, l_max: usize) -> Result<QuantumCode> {
    if !is_prefix_free_classical(code) {
        return Err(Error::NotPrefixFree(
            "classical code has a codeword that prefixes another".into(),
        ));
    }
    QuantumCode::from_classical_payloads(code, l_max)
}

/// Tr 2^{-Λ} over the zef subspace.
pub fn quantum_kraft_sum(code: &QuantumCode) -> f64 {
    code.dims().kraft_sum()
}

/// Prefix-free test on sector projectors: for every l < l', the first l
/// qubits of every length-l' basis payload carry no weight on the span of
/// the length-l payloads.
pub fn is_prefix_free_quantum(code: &QuantumCode) -> bool {
    prefix_violation(code) <= CODE_TOLERANCE
}

/// Largest Tr[P_l · Tr_{l+1..l'} |ψ⟩⟨ψ|] over sector pairs l < l'.
pub fn prefix_violation(code: &QuantumCode) -> f64 {
    let mut worst: f64 = 0.0;
    for short_len in 1..code.l_max {
        let short = code.sector(short_len);
        if short.is_empty() {
            continue;
        }
        for long_len in short_len + 1..=code.l_max {
            for long in code.sector(long_len) {
                let weight: f64 = short
                    .iter()
                    .map(|s| prefix_overlap(s, long).unwrap_or(f64::INFINITY))
                    .sum();
                worst = worst.max(weight);
            }
        }
    }
    worst
}

/// A linear map defined on a basis: `pairs[k].0 ↦ pairs[k].1`.
#[derive(Clone, Debug, PartialEq)]
pub struct BasisMap {
    pairs: Vec<(SparseState, SparseState)>,
}

impl BasisMap {
    pub fn pairs(&self) -> &[(SparseState, SparseState)] {
        &self.pairs
    }

    /// Expands `state` in the source basis and maps each component.
    pub fn apply(&self, state: &SparseState) -> Result<SparseState> {
        let width = self
            .pairs
            .first()
            .map(|(_, t)| t.num_qubits())
            .unwrap_or(state.num_qubits());
        let mut out = SparseState::zero(width);
        let mut kept = 0.0;
        for (src, dst) in &self.pairs {
            let c = qstate::inner(src, state)?;
            kept += c.norm_sqr();
            out = out.add_scaled(dst, c)?;
        }
        let leaked = state.norm_sqr() - kept;
        if leaked > LEAKAGE_TOLERANCE {
            return Err(Error::Leakage { weight: leaked });
        }
        Ok(out)
    }
}

/// Result of remapping a Kraft-satisfying code onto a prefix-free one.
#[derive(Clone, Debug)]
pub struct Remap {
    pub map: BasisMap,
    pub code: QuantumCode,
    /// Canonical classical code whose payloads define `code`.
    pub classical: ClassicalCode,
    /// Gram deviation of the image basis from the identity.
    pub isometry_deviation: f64,
    /// max over basis vectors of ‖Λ' V|ψ_l⟩ − l V|ψ_l⟩‖.
    pub conjugation_error: f64,
}

/// Maps the i-th length-l basis vector onto |C_{l,i} 0…0⟩ of the canonical
/// prefix-free code with the same multiplicities.
pub fn remap_to_prefix_free(code: &QuantumCode) -> Result<Remap> {
    let dims = code.dims();
    let kraft = dims.kraft_sum();
    let lengths = dims.lengths();
    let classical = kraft_assign(&lengths).map_err(|e| match e {
        Error::KraftViolation(_) => Error::KraftViolation(kraft),
        other => other,
    })?;
    let target = lift_classical(&classical, code.l_max())?;
    let pairs: Vec<(SparseState, SparseState)> = code
        .basis()
        .iter()
        .zip(target.basis())
        .map(|(src, dst)| {
            debug_assert_eq!(src.length, dst.length);
            (src.zef.clone(), dst.zef.clone())
        })
        .collect();
    let isometry_deviation = gram_deviation(pairs.iter().map(|(_, t)| t))?;
    let observable = target.length_observable();
    let mut conjugation_error: f64 = 0.0;
    for (src, dst) in code.basis().iter().zip(target.basis()) {
        let (probs, leaked) = observable.distribution(&dst.zef)?;
        let off: f64 = probs
            .iter()
            .enumerate()
            .filter(|&(l, _)| l != src.length)
            .map(|(_, p)| p)
            .sum();
        conjugation_error = conjugation_error.max((off + leaked).sqrt());
    }
    Ok(Remap {
        map: BasisMap { pairs },
        code: target,
        classical,
        isometry_deviation,
        conjugation_error,
    })
}

/// ⟨l⟩ = Tr ρΛ for ρ on the l_max-qubit register.
pub fn avg_length(rho: &DensityMatrix, code: &QuantumCode) -> Result<f64> {
    let probs = sector_weights(rho, code)?;
    Ok(probs.iter().enumerate().map(|(l, p)| l as f64 * p).sum())
}

/// Tr(ρ π_l) for l = 0..=l_max, rejecting ρ that leaks outside the codeword
/// subspace.
pub fn sector_weights(rho: &DensityMatrix, code: &QuantumCode) -> Result<Vec<f64>> {
    if rho.num_qubits() != code.l_max() {
        return Err(Error::DimensionMismatch {
            expected: code.l_max(),
            found: rho.num_qubits(),
        });
    }
    let mut probs = vec![0.0; code.l_max() + 1];
    for b in code.basis() {
        probs[b.length] += rho.expectation(&b.zef)?;
    }
    let leaked = rho.trace() - probs.iter().sum::<f64>();
    if leaked > LEAKAGE_TOLERANCE {
        return Err(Error::Leakage { weight: leaked });
    }
    Ok(probs)
}

/// ω = 2^{-Λ} / K on the zef subspace.
pub fn omega_operator(code: &QuantumCode) -> Result<DensityMatrix> {
    let dim = check_dense(code.l_max())?;
    let kraft = quantum_kraft_sum(code);
    let mut m = DMatrix::from_element(dim, dim, Complex64::new(0.0, 0.0));
    for b in code.basis() {
        add_outer(&mut m, &b.zef, (-(b.length as f64)).exp2() / kraft);
    }
    DensityMatrix::new(code.l_max(), m)
}

/// Groups codewords of a classical code by length (used for tables).
pub fn length_table(code: &ClassicalCode) -> BTreeMap<usize, Vec<BitString>> {
    let mut table: BTreeMap<usize, Vec<BitString>> = BTreeMap::new();
    for w in code.codewords() {
        table.entry(w.len()).or_default().push(*w);
    }
    table
}
