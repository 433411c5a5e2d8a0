//! Sparse pure states and dense density operators.
//!
//! Pure states of up to 128 qubits live in [`SparseState`], a map from basis
//! labels to amplitudes. Anything that needs a matrix (reduced states,
//! entropies, fidelities between mixed states) goes through
//! [`DensityMatrix`], which is capped at [`DENSE_QUBIT_LIMIT`] qubits.

use std::collections::BTreeMap;
use std::fmt;

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

use crate::bits::{low_mask, BitString, MAX_WIDTH};
use crate::error::{Error, Result};

/// Amplitudes with modulus below this are dropped after every arithmetic pass.
pub const PRUNE_THRESHOLD: f64 = 1e-14;

/// Largest register handed to dense linear algebra.
pub const DENSE_QUBIT_LIMIT: usize = 12;

/// Tolerance for normalization, Hermiticity and trace checks.
pub const STATE_TOLERANCE: f64 = 1e-10;

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };
const ONE: Complex64 = Complex64 { re: 1.0, im: 0.0 };

pub(crate) fn check_dense(qubits: usize) -> Result<usize> {
    if qubits > DENSE_QUBIT_LIMIT {
        Err(Error::DenseLimit {
            qubits,
            limit: DENSE_QUBIT_LIMIT,
        })
    } else {
        Ok(1usize << qubits)
    }
}

/// A pure state stored as its nonzero amplitudes.
///
/// Keys are basis labels in big-endian order (qubit 1 is the most
/// significant of the `num_qubits` low bits), so iteration order is the
/// lexicographic order of the bitstrings.
#[derive(Clone, Debug, PartialEq)]
pub struct SparseState {
    num_qubits: usize,
    amplitudes: BTreeMap<u128, Complex64>,
}

impl SparseState {
    /// Builds a state from raw terms without normalizing. Repeated labels add.
    pub fn from_terms<I>(num_qubits: usize, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (u128, Complex64)>,
    {
        if num_qubits > MAX_WIDTH {
            return Err(Error::ResourceLimit(format!(
                "{num_qubits} qubits exceeds the {MAX_WIDTH}-qubit label width"
            )));
        }
        let mask = low_mask(num_qubits);
        let mut amplitudes = BTreeMap::new();
        for (label, amp) in terms {
            if label & !mask != 0 {
                return Err(Error::InvalidBitString(format!(
                    "label {label:#x} does not fit {num_qubits} qubits"
                )));
            }
            *amplitudes.entry(label).or_insert(ZERO) += amp;
        }
        let mut state = Self {
            num_qubits,
            amplitudes,
        };
        state.prune();
        Ok(state)
    }

    /// Builds a state from terms and rescales it to unit norm.
    pub fn normalized<I>(num_qubits: usize, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (u128, Complex64)>,
    {
        let mut state = Self::from_terms(num_qubits, terms)?;
        let norm = state.norm_sqr().sqrt();
        if norm < PRUNE_THRESHOLD {
            return Err(Error::NotNormalized(0.0));
        }
        state.scale_in_place(Complex64::new(1.0 / norm, 0.0));
        Ok(state)
    }

    /// Builds a state from bitstring/amplitude pairs and rescales it to unit norm.
    pub fn from_bitstrings<'a, I>(terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (&'a str, Complex64)>,
    {
        let mut width = None;
        let mut parsed = Vec::new();
        for (text, amp) in terms {
            let bits: BitString = text.parse()?;
            match width {
                None => width = Some(bits.len()),
                Some(w) if w != bits.len() => {
                    return Err(Error::DimensionMismatch {
                        expected: w,
                        found: bits.len(),
                    })
                }
                _ => {}
            }
            parsed.push((bits.value(), amp));
        }
        let width = width.ok_or_else(|| Error::Parse("state has no terms".into()))?;
        Self::normalized(width, parsed)
    }

    /// The zero vector on `num_qubits` qubits.
    pub fn zero(num_qubits: usize) -> Self {
        Self {
            num_qubits,
            amplitudes: BTreeMap::new(),
        }
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn support_size(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitude(&self, label: u128) -> Complex64 {
        self.amplitudes.get(&label).copied().unwrap_or(ZERO)
    }

    pub fn terms(&self) -> impl Iterator<Item = (u128, Complex64)> + '_ {
        self.amplitudes.iter().map(|(&k, &v)| (k, v))
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.values().map(|a| a.norm_sqr()).sum()
    }

    pub fn is_normalized(&self) -> bool {
        (self.norm_sqr() - 1.0).abs() <= STATE_TOLERANCE
    }

    pub(crate) fn prune(&mut self) {
        self.amplitudes.retain(|_, a| a.norm() >= PRUNE_THRESHOLD);
    }

    pub(crate) fn scale_in_place(&mut self, factor: Complex64) {
        for a in self.amplitudes.values_mut() {
            *a *= factor;
        }
        self.prune();
    }

    pub fn scaled(&self, factor: Complex64) -> Self {
        let mut out = self.clone();
        out.scale_in_place(factor);
        out
    }

    /// Returns a unit-norm copy.
    pub fn normalize(&self) -> Result<Self> {
        let norm = self.norm_sqr().sqrt();
        if norm < PRUNE_THRESHOLD {
            return Err(Error::NotNormalized(0.0));
        }
        Ok(self.scaled(Complex64::new(1.0 / norm, 0.0)))
    }

    /// `self + factor * other`.
    pub fn add_scaled(&self, other: &SparseState, factor: Complex64) -> Result<Self> {
        same_width(self.num_qubits, other.num_qubits)?;
        let mut out = self.clone();
        for (&k, &v) in &other.amplitudes {
            *out.amplitudes.entry(k).or_insert(ZERO) += factor * v;
        }
        out.prune();
        Ok(out)
    }

    /// Appends `extra` qubits in |0⟩.
    pub fn pad_zeros(&self, extra: usize) -> Result<Self> {
        let width = self.num_qubits + extra;
        if width > MAX_WIDTH {
            return Err(Error::ResourceLimit(format!(
                "{width} qubits exceeds the {MAX_WIDTH}-qubit label width"
            )));
        }
        Ok(Self {
            num_qubits: width,
            amplitudes: self
                .amplitudes
                .iter()
                .map(|(&k, &v)| (if extra >= 128 { 0 } else { k << extra }, v))
                .collect(),
        })
    }

    /// Densifies into a column vector (dense limit applies).
    pub fn to_dense(&self) -> Result<Vec<Complex64>> {
        let dim = check_dense(self.num_qubits)?;
        let mut v = vec![ZERO; dim];
        for (&k, &a) in &self.amplitudes {
            v[k as usize] = a;
        }
        Ok(v)
    }

    /// Reduced density matrix on the qubits listed in `keep` (1-based).
    ///
    /// The kept qubits are ordered ascending in the result.
    pub fn partial_trace(&self, keep: &[usize]) -> Result<DensityMatrix> {
        let keep = sorted_qubits(keep, self.num_qubits)?;
        let dim = check_dense(keep.len())?;
        let traced: Vec<usize> = (1..=self.num_qubits)
            .filter(|q| !keep.contains(q))
            .collect();
        let mut groups: BTreeMap<u128, Vec<(usize, Complex64)>> = BTreeMap::new();
        for (&label, &amp) in &self.amplitudes {
            let env = gather(label, self.num_qubits, &traced);
            let sys = gather(label, self.num_qubits, &keep) as usize;
            groups.entry(env).or_default().push((sys, amp));
        }
        let mut m = DMatrix::from_element(dim, dim, ZERO);
        for terms in groups.values() {
            for &(i, a) in terms {
                for &(j, b) in terms {
                    m[(i, j)] += a * b.conj();
                }
            }
        }
        Ok(DensityMatrix {
            num_qubits: keep.len(),
            entries: m,
        })
    }

    /// Applies the dense operator `op` to the listed qubits (first listed is
    /// the most significant index of `op`).
    pub fn apply_local(&self, qubits: &[usize], op: &DMatrix<Complex64>) -> Result<Self> {
        for &q in qubits {
            if q == 0 || q > self.num_qubits {
                return Err(Error::QubitIndex {
                    index: q,
                    num_qubits: self.num_qubits,
                });
            }
        }
        let dim = 1usize << qubits.len();
        if op.nrows() != dim || op.ncols() != dim {
            return Err(Error::DimensionMismatch {
                expected: qubits.len(),
                found: op.nrows().trailing_zeros() as usize,
            });
        }
        let clear_mask = qubits
            .iter()
            .fold(0u128, |m, &q| m | (1u128 << (self.num_qubits - q)));
        let mut out: BTreeMap<u128, Complex64> = BTreeMap::new();
        for (&label, &amp) in &self.amplitudes {
            let j = gather(label, self.num_qubits, qubits) as usize;
            let base = label & !clear_mask;
            for i in 0..dim {
                let m = op[(i, j)];
                if m != ZERO {
                    let target = base | scatter(i as u128, self.num_qubits, qubits);
                    *out.entry(target).or_insert(ZERO) += m * amp;
                }
            }
        }
        let mut state = Self {
            num_qubits: self.num_qubits,
            amplitudes: out,
        };
        state.prune();
        Ok(state)
    }
}

impl fmt::Display for SparseState {
    /// One line per support element: `bitstring re im`, sorted by bitstring.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (&label, amp) in &self.amplitudes {
            let bits = BitString::new(self.num_qubits, label).map_err(|_| fmt::Error)?;
            writeln!(f, "{} {:?} {:?}", bits, amp.re, amp.im)?;
        }
        Ok(())
    }
}

pub(crate) fn max_abs(m: &DMatrix<Complex64>) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

fn same_width(a: usize, b: usize) -> Result<()> {
    if a == b {
        Ok(())
    } else {
        Err(Error::DimensionMismatch {
            expected: a,
            found: b,
        })
    }
}

fn sorted_qubits(qubits: &[usize], n: usize) -> Result<Vec<usize>> {
    let mut q = qubits.to_vec();
    q.sort_unstable();
    q.dedup();
    if let Some(&bad) = q.iter().find(|&&i| i == 0 || i > n) {
        return Err(Error::QubitIndex {
            index: bad,
            num_qubits: n,
        });
    }
    Ok(q)
}

/// Collects the listed qubits of `label` into a compact big-endian index.
fn gather(label: u128, n: usize, qubits: &[usize]) -> u128 {
    qubits
        .iter()
        .fold(0u128, |acc, &q| (acc << 1) | ((label >> (n - q)) & 1))
}

/// Inverse of [`gather`]: places the bits of `index` onto the listed qubits.
fn scatter(index: u128, n: usize, qubits: &[usize]) -> u128 {
    let k = qubits.len();
    qubits.iter().enumerate().fold(0u128, |acc, (pos, &q)| {
        acc | (((index >> (k - 1 - pos)) & 1) << (n - q))
    })
}

/// Single computational basis state.
pub fn basis_state(bits: &BitString) -> SparseState {
    let mut amplitudes = BTreeMap::new();
    amplitudes.insert(bits.value(), ONE);
    SparseState {
        num_qubits: bits.len(),
        amplitudes,
    }
}

/// ⟨a|b⟩.
pub fn inner(a: &SparseState, b: &SparseState) -> Result<Complex64> {
    same_width(a.num_qubits, b.num_qubits)?;
    let (small, large, conj_small) = if a.amplitudes.len() <= b.amplitudes.len() {
        (a, b, true)
    } else {
        (b, a, false)
    };
    let mut acc = ZERO;
    for (k, &x) in &small.amplitudes {
        if let Some(&y) = large.amplitudes.get(k) {
            acc += if conj_small { x.conj() * y } else { y.conj() * x };
        }
    }
    Ok(acc)
}

/// a ⊗ b, with `a` occupying the leading qubits.
pub fn tensor(a: &SparseState, b: &SparseState) -> Result<SparseState> {
    let width = a.num_qubits + b.num_qubits;
    if width > MAX_WIDTH {
        return Err(Error::ResourceLimit(format!(
            "{width} qubits exceeds the {MAX_WIDTH}-qubit label width"
        )));
    }
    let terms = a.amplitudes.iter().flat_map(|(&ka, &va)| {
        b.amplitudes.iter().map(move |(&kb, &vb)| {
            let shifted = if b.num_qubits >= 128 { 0 } else { ka << b.num_qubits };
            (shifted | kb, va * vb)
        })
    });
    SparseState::from_terms(width, terms)
}

/// ⟨short| Tr_{k+1..n}(|long⟩⟨long|) |short⟩ where `short` lives on the
/// first `k` qubits of the `n`-qubit `long`.
///
/// This is the weight that a measurement of the first `k` qubits of `long`
/// would assign to `short`; computed without densifying anything.
pub fn prefix_overlap(short: &SparseState, long: &SparseState) -> Result<f64> {
    let k = short.num_qubits;
    let n = long.num_qubits;
    if k > n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: k,
        });
    }
    let tail = n - k;
    let mut per_suffix: BTreeMap<u128, Complex64> = BTreeMap::new();
    for (&label, &amp) in &long.amplitudes {
        let prefix = if tail >= 128 { 0 } else { label >> tail };
        if let Some(&s) = short.amplitudes.get(&prefix) {
            *per_suffix.entry(label & low_mask(tail)).or_insert(ZERO) += s.conj() * amp;
        }
    }
    Ok(per_suffix.values().map(|c| c.norm_sqr()).sum())
}

/// Hermitian eigendecomposition: ascending eigenvalues and eigenvector columns.
///
/// On low-rank inputs the QR iteration can deflate the null block through a
/// chain of subnormal values and return NaN. When that happens the matrix is
/// decomposed again shifted by a multiple of the identity, which moves the
/// null block away from zero without changing the eigenvectors.
pub fn hermitian_eigen(m: &DMatrix<Complex64>) -> (Vec<f64>, DMatrix<Complex64>) {
    let h = (m + m.adjoint()) * Complex64::new(0.5, 0.0);
    let dim = h.nrows();
    let scale = h.iter().map(|z| z.norm()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
    let mut shift = 0.0;
    let mut eig = SymmetricEigen::new(h.clone());
    for attempt in 1..=4 {
        let finite = eig.eigenvalues.iter().all(|v| v.is_finite())
            && eig.eigenvectors.iter().all(|z| z.re.is_finite() && z.im.is_finite());
        if finite {
            break;
        }
        shift = scale * attempt as f64;
        let shifted = &h + DMatrix::<Complex64>::identity(dim, dim) * Complex64::new(shift, 0.0);
        eig = SymmetricEigen::new(shifted);
    }
    let mut order: Vec<usize> = (0..dim).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let values = order.iter().map(|&i| eig.eigenvalues[i] - shift).collect();
    let vectors = DMatrix::from_fn(dim, dim, |r, c| eig.eigenvectors[(r, order[c])]);
    (values, vectors)
}

/// A dense density operator on a small register.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    num_qubits: usize,
    entries: DMatrix<Complex64>,
}

impl DensityMatrix {
    /// Validates Hermiticity, unit trace and positivity (all within 1e-10).
    pub fn new(num_qubits: usize, entries: DMatrix<Complex64>) -> Result<Self> {
        let dim = check_dense(num_qubits)?;
        if entries.nrows() != dim || entries.ncols() != dim {
            return Err(Error::DimensionMismatch {
                expected: num_qubits,
                found: entries.nrows().trailing_zeros() as usize,
            });
        }
        let herm = max_abs(&(&entries - entries.adjoint()));
        if herm > STATE_TOLERANCE {
            return Err(Error::NotHermitian(herm));
        }
        let trace = entries.trace();
        if (trace.re - 1.0).abs() > STATE_TOLERANCE || trace.im.abs() > STATE_TOLERANCE {
            return Err(Error::NotNormalized(trace.re));
        }
        let (values, _) = hermitian_eigen(&entries);
        if let Some(&min) = values.first() {
            if min < -STATE_TOLERANCE {
                return Err(Error::NegativeEigenvalue(min));
            }
        }
        Ok(Self {
            num_qubits,
            entries,
        })
    }

    pub(crate) fn from_matrix_unchecked(num_qubits: usize, entries: DMatrix<Complex64>) -> Self {
        Self {
            num_qubits,
            entries,
        }
    }

    /// |ψ⟩⟨ψ| for a normalized state.
    pub fn from_pure(state: &SparseState) -> Result<Self> {
        if !state.is_normalized() {
            return Err(Error::NotNormalized(state.norm_sqr()));
        }
        let v = state.to_dense()?;
        let dim = v.len();
        let m = DMatrix::from_fn(dim, dim, |i, j| v[i] * v[j].conj());
        Ok(Self::from_matrix_unchecked(state.num_qubits(), m))
    }

    /// Diagonal density matrix in the computational basis.
    pub fn diagonal(num_qubits: usize, probs: &[f64]) -> Result<Self> {
        let dim = check_dense(num_qubits)?;
        if probs.len() != dim {
            return Err(Error::DimensionMismatch {
                expected: num_qubits,
                found: probs.len().trailing_zeros() as usize,
            });
        }
        let m = DMatrix::from_fn(dim, dim, |i, j| {
            if i == j {
                Complex64::new(probs[i], 0.0)
            } else {
                ZERO
            }
        });
        Self::new(num_qubits, m)
    }

    pub fn maximally_mixed(num_qubits: usize) -> Result<Self> {
        let dim = check_dense(num_qubits)?;
        Self::diagonal(num_qubits, &vec![1.0 / dim as f64; dim])
    }

    /// Σ p_k |ψ_k⟩⟨ψ_k|.
    pub fn mixture(num_qubits: usize, parts: &[(f64, SparseState)]) -> Result<Self> {
        let dim = check_dense(num_qubits)?;
        let mut m = DMatrix::from_element(dim, dim, ZERO);
        for (p, state) in parts {
            same_width(num_qubits, state.num_qubits())?;
            let terms: Vec<(usize, Complex64)> =
                state.terms().map(|(k, a)| (k as usize, a)).collect();
            for &(i, a) in &terms {
                for &(j, b) in &terms {
                    m[(i, j)] += a * b.conj() * *p;
                }
            }
        }
        Self::new(num_qubits, m)
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.entries
    }

    pub fn trace(&self) -> f64 {
        self.entries.trace().re
    }

    /// Ascending eigenvalues.
    pub fn eigenvalues(&self) -> Vec<f64> {
        hermitian_eigen(&self.entries).0
    }

    /// ρ₁ ⊗ ρ₂.
    pub fn kron(&self, other: &DensityMatrix) -> Result<Self> {
        let n = self.num_qubits + other.num_qubits;
        check_dense(n)?;
        Ok(Self::from_matrix_unchecked(n, self.entries.kronecker(&other.entries)))
    }

    /// Reduced state on the listed qubits (1-based, ordered ascending).
    pub fn partial_trace(&self, keep: &[usize]) -> Result<DensityMatrix> {
        let n = self.num_qubits;
        let keep = sorted_qubits(keep, n)?;
        let traced: Vec<usize> = (1..=n).filter(|q| !keep.contains(q)).collect();
        let dk = 1usize << keep.len();
        let dt = 1usize << traced.len();
        let mut m = DMatrix::from_element(dk, dk, ZERO);
        for e in 0..dt {
            let env = scatter(e as u128, n, &traced);
            for i in 0..dk {
                let row = (env | scatter(i as u128, n, &keep)) as usize;
                for j in 0..dk {
                    let col = (env | scatter(j as u128, n, &keep)) as usize;
                    m[(i, j)] += self.entries[(row, col)];
                }
            }
        }
        Ok(Self::from_matrix_unchecked(keep.len(), m))
    }

    /// ⟨v|ρ|v⟩ for a (possibly unnormalized) sparse vector.
    pub fn expectation(&self, v: &SparseState) -> Result<f64> {
        same_width(self.num_qubits, v.num_qubits())?;
        let terms: Vec<(usize, Complex64)> = v.terms().map(|(k, a)| (k as usize, a)).collect();
        let mut acc = ZERO;
        for &(i, a) in &terms {
            for &(j, b) in &terms {
                acc += a.conj() * self.entries[(i, j)] * b;
            }
        }
        Ok(acc.re)
    }

    /// Largest absolute entry of ρ − σ.
    pub fn max_deviation(&self, other: &DensityMatrix) -> Result<f64> {
        same_width(self.num_qubits, other.num_qubits)?;
        Ok(max_abs(&(&self.entries - &other.entries)))
    }

    /// Matrix square root via the eigendecomposition, clamping eigenvalues at 0.
    fn sqrt_matrix(&self) -> DMatrix<Complex64> {
        let (values, vectors) = hermitian_eigen(&self.entries);
        let dim = values.len();
        let roots = DMatrix::from_fn(dim, dim, |i, j| {
            if i == j {
                Complex64::new(clamped_root(values[i], dim), 0.0)
            } else {
                ZERO
            }
        });
        &vectors * roots * vectors.adjoint()
    }
}

/// F = ⟨φ|σ|φ⟩.
pub fn fidelity_pure_mixed(phi: &SparseState, sigma: &DensityMatrix) -> Result<f64> {
    sigma.expectation(phi)
}

/// Square root of an eigenvalue of a unit-trace operator, with values at
/// rounding level (a few ulps per dimension) taken as zero: the root would
/// otherwise turn 1e-16 noise into a 1e-8 contribution.
fn clamped_root(value: f64, dim: usize) -> f64 {
    if value <= 4.0 * f64::EPSILON * dim as f64 {
        0.0
    } else {
        value.sqrt()
    }
}

/// Uhlmann fidelity (Tr √(√ρ₁ ρ₂ √ρ₁))².
pub fn uhlmann_fidelity(r1: &DensityMatrix, r2: &DensityMatrix) -> Result<f64> {
    same_width(r1.num_qubits, r2.num_qubits)?;
    let s = r1.sqrt_matrix();
    let inner = &s * &r2.entries * &s;
    let (values, _) = hermitian_eigen(&inner);
    let root_trace: f64 = values.iter().map(|&v| clamped_root(v, values.len())).sum();
    Ok((root_trace * root_trace).clamp(0.0, 1.0))
}

/// Largest eigenvalue of a positive operator.
pub fn operator_norm(w: &DensityMatrix) -> f64 {
    w.eigenvalues().last().copied().unwrap_or(0.0)
}

/// Shannon entropy in bits; zero-probability terms contribute nothing.
pub fn shannon_entropy(probs: &[f64]) -> f64 {
    probs
        .iter()
        .filter(|&&p| p > 0.0)
        .map(|&p| -p * p.log2())
        .sum()
}

/// −Tr ρ log₂ ρ.
pub fn von_neumann_entropy(rho: &DensityMatrix) -> f64 {
    let values: Vec<f64> = rho.eigenvalues().into_iter().map(|v| v.max(0.0)).collect();
    shannon_entropy(&values)
}

/// Eigenvalues of ω at or below this are treated as outside its support.
pub const SUPPORT_TOLERANCE: f64 = 1e-12;

/// Weight of ρ lying in the kernel of ω.
pub fn support_leakage(rho: &DensityMatrix, omega: &DensityMatrix) -> Result<f64> {
    same_width(rho.num_qubits, omega.num_qubits)?;
    let (values, vectors) = hermitian_eigen(&omega.entries);
    let mut leaked = 0.0;
    for (k, &mu) in values.iter().enumerate() {
        if mu <= SUPPORT_TOLERANCE {
            let w = vectors.column(k);
            leaked += (w.adjoint() * &rho.entries * w)[(0, 0)].re;
        }
    }
    Ok(leaked.max(0.0))
}

/// D(ρ‖ω) = Tr ρ log₂ ρ − Tr ρ log₂ ω.
///
/// Returns `f64::INFINITY` when ρ has more than 1e-10 weight outside the
/// support of ω; [`support_leakage`] reports how much.
pub fn relative_entropy(rho: &DensityMatrix, omega: &DensityMatrix) -> Result<f64> {
    same_width(rho.num_qubits, omega.num_qubits)?;
    let (values, vectors) = hermitian_eigen(&omega.entries);
    let mut cross = 0.0;
    let mut leaked = 0.0;
    for (k, &mu) in values.iter().enumerate() {
        let w = vectors.column(k);
        let weight = (w.adjoint() * &rho.entries * w)[(0, 0)].re;
        if mu <= SUPPORT_TOLERANCE {
            leaked += weight;
        } else {
            cross += weight * mu.log2();
        }
    }
    if leaked > STATE_TOLERANCE {
        return Ok(f64::INFINITY);
    }
    let d = -von_neumann_entropy(rho) - cross;
    Ok(if d < 0.0 && d > -1e-12 { 0.0 } else { d })
}
