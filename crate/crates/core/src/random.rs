//! Seeded random instances: states, density matrices, unitaries, projectors,
//! codes and ensembles.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::bits::BitString;
use crate::codes::{ClassicalCode, QuantumCode, SectorDims};
use crate::compress::Ensemble;
use crate::error::Result;
use crate::qstate::{check_dense, DensityMatrix, SparseState};

fn gaussian<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

/// Positive probabilities summing to one (flat Dirichlet).
pub fn distribution<R: Rng + ?Sized>(rng: &mut R, k: usize) -> Vec<f64> {
    let raw: Vec<f64> = (0..k)
        .map(|_| -(1.0 - rng.random::<f64>()).ln() + 1e-6)
        .collect();
    let total: f64 = raw.iter().sum();
    raw.iter().map(|x| x / total).collect()
}

/// Haar-random pure state on `n` qubits.
pub fn pure_state<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Result<SparseState> {
    let dim = check_dense(n)?;
    SparseState::normalized(n, (0..dim as u128).map(|i| (i, gaussian(rng))))
}

/// Random normalized superposition of the given orthonormal states.
pub fn superposition<R: Rng + ?Sized>(rng: &mut R, states: &[SparseState]) -> Result<SparseState> {
    let mut out = SparseState::zero(states[0].num_qubits());
    for s in states {
        out = out.add_scaled(s, gaussian(rng))?;
    }
    out.normalize()
}

/// Random density matrix G G† / Tr(G G†) with G a `dim × rank` Ginibre
/// matrix (`rank` defaults to full).
pub fn density_matrix<R: Rng + ?Sized>(rng: &mut R, n: usize, rank: Option<usize>) -> Result<DensityMatrix> {
    let dim = check_dense(n)?;
    let rank = rank.unwrap_or(dim).clamp(1, dim);
    let g = DMatrix::from_fn(dim, rank, |_, _| gaussian(rng));
    let m = &g * g.adjoint();
    let tr = m.trace();
    DensityMatrix::new(n, m / tr)
}

/// Haar-random unitary by QR with the phases of R's diagonal divided out.
pub fn unitary<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> DMatrix<Complex64> {
    let g = DMatrix::from_fn(dim, dim, |_, _| gaussian(rng));
    let qr = g.qr();
    let (mut q, r) = (qr.q(), qr.r());
    for j in 0..dim {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { Complex64::new(1.0, 0.0) };
        for i in 0..dim {
            q[(i, j)] *= phase;
        }
    }
    q
}

/// Random orthogonal projector of random rank on `n` qubits.
pub fn projector<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Result<DMatrix<Complex64>> {
    let dim = check_dense(n)?;
    let rank = rng.random_range(0..=dim);
    let u = unitary(rng, dim);
    let cols = u.columns(0, rank);
    Ok(cols * cols.adjoint())
}

/// Random multiset of lengths in 1..=l_max with Σ 2^{-l} ≤ 1, at most
/// `max_words` long. With `saturate`, the sum is then filled up to 1 with
/// length-l_max words where the word budget allows.
pub fn kraft_lengths<R: Rng + ?Sized>(rng: &mut R, l_max: usize, max_words: usize, saturate: bool) -> Vec<usize> {
    let full = 1u64 << l_max;
    let mut used = 0u64;
    let mut lengths = Vec::new();
    while lengths.len() < max_words.max(1) {
        let l = rng.random_range(1..=l_max);
        let cost = 1u64 << (l_max - l);
        if used + cost <= full {
            used += cost;
            lengths.push(l);
        }
        if used == full || (!lengths.is_empty() && rng.random_range(0..4) == 0) {
            break;
        }
    }
    while saturate && used < full && lengths.len() < max_words {
        used += 1;
        lengths.push(l_max);
    }
    lengths.sort_unstable();
    lengths
}

/// Random code with the given sector dimensions (which must satisfy the
/// Kraft inequality). Payloads are generic superpositions, so the code is
/// usually not prefix-free.
pub fn quantum_code<R: Rng + ?Sized>(rng: &mut R, dims: &SectorDims) -> Result<QuantumCode> {
    let l_max = dims.l_max();
    check_dense(l_max)?;
    // Earlier payloads are all no longer than the current sector, so their
    // zero-padded forms are exactly the constraints for orthogonality.
    let mut chosen: Vec<SparseState> = Vec::new();
    let mut sectors = Vec::with_capacity(l_max);
    for l in 1..=l_max {
        let constraints: Vec<SparseState> = chosen
            .iter()
            .map(|p| p.pad_zeros(l - p.num_qubits()))
            .collect::<Result<_>>()?;
        let mut sector: Vec<SparseState> = Vec::new();
        for _ in 0..dims.get(l) {
            let mut v = pure_state(rng, l)?;
            for _ in 0..2 {
                for c in constraints.iter().chain(sector.iter()) {
                    let overlap = crate::qstate::inner(c, &v)?;
                    v = v.add_scaled(c, -overlap)?;
                }
                v = v.normalize()?;
            }
            sector.push(v);
        }
        chosen.extend(sector.iter().cloned());
        sectors.push(sector);
    }
    QuantumCode::new(l_max, sectors)
}

/// Random code on up to `l_max` qubits with random Kraft-valid dimensions.
pub fn any_code<R: Rng + ?Sized>(rng: &mut R, l_max: usize, max_words: usize) -> Result<QuantumCode> {
    let saturate = rng.random_bool(0.5);
    let lengths = kraft_lengths(rng, l_max, max_words, saturate);
    let mut dims = SectorDims::from_lengths(&lengths).as_slice().to_vec();
    dims.resize(l_max, 0);
    quantum_code(rng, &SectorDims::new(dims))
}

/// Random prefix-free code: a canonical classical code whose payloads are
/// rotated by a random unitary within each sector.
pub fn prefix_free_code<R: Rng + ?Sized>(rng: &mut R, l_max: usize, max_words: usize) -> Result<QuantumCode> {
    check_dense(l_max)?;
    let saturate = rng.random_bool(0.5);
    let lengths = kraft_lengths(rng, l_max, max_words, saturate);
    let classical = crate::codes::kraft_assign(&lengths)?;
    let mut sectors = vec![Vec::new(); l_max];
    for l in 1..=l_max {
        let words: Vec<SparseState> = classical
            .codewords()
            .iter()
            .filter(|w| w.len() == l)
            .map(crate::qstate::basis_state)
            .collect();
        let u = unitary(rng, words.len());
        for i in 0..words.len() {
            let mut v = SparseState::zero(l);
            for (j, w) in words.iter().enumerate() {
                v = v.add_scaled(w, u[(j, i)])?;
            }
            sectors[l - 1].push(v);
        }
    }
    QuantumCode::new(l_max, sectors)
}

/// `count` distinct random words with lengths in 1..=max_len.
pub fn classical_code<R: Rng + ?Sized>(rng: &mut R, max_len: usize, count: usize) -> Result<ClassicalCode> {
    let capacity: usize = (1..=max_len).map(|l| 1usize << l).sum();
    let count = count.min(capacity);
    let mut words: Vec<BitString> = Vec::with_capacity(count);
    while words.len() < count {
        let len = rng.random_range(1..=max_len);
        let w = BitString::new(len, rng.random_range(0..1u128 << len))?;
        if !words.contains(&w) {
            words.push(w);
        }
    }
    ClassicalCode::new(words)
}

/// Random superposition of the code's zef basis vectors.
pub fn codeword<R: Rng + ?Sized>(rng: &mut R, code: &QuantumCode) -> Result<SparseState> {
    let basis: Vec<SparseState> = code.basis().iter().map(|b| b.zef.clone()).collect();
    superposition(rng, &basis)
}

/// Ensemble of `entries` random codewords with random weights.
pub fn ensemble<R: Rng + ?Sized>(rng: &mut R, code: &QuantumCode, entries: usize) -> Result<Ensemble> {
    let probs = distribution(rng, entries.max(1));
    let states = probs
        .iter()
        .map(|&p| Ok((p, codeword(rng, code)?)))
        .collect::<Result<Vec<_>>>()?;
    Ensemble::new(code.clone(), states)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qstate::max_abs;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn generators_are_valid() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..20 {
            let p = distribution(&mut rng, 5);
            assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12 && p.iter().all(|&x| x > 0.0));
            assert!(pure_state(&mut rng, 3).unwrap().is_normalized());
            density_matrix(&mut rng, 2, Some(2)).unwrap();
            let u = unitary(&mut rng, 4);
            let id = DMatrix::<Complex64>::identity(4, 4);
            assert!(max_abs(&(u.adjoint() * &u - &id)) < 1e-12);
            let pr = projector(&mut rng, 2).unwrap();
            assert!(max_abs(&(&pr * &pr - &pr)) < 1e-12);
            let lengths = kraft_lengths(&mut rng, 4, 8, true);
            let budget: u64 = lengths.iter().map(|&l| 1u64 << (4 - l)).sum();
            assert!(budget <= 16);
            let code = any_code(&mut rng, 4, 6).unwrap();
            assert!(code.dims().kraft_sum() <= 1.0);
            let e = ensemble(&mut rng, &code, 3).unwrap();
            assert_eq!(e.len(), 3);
            let c = classical_code(&mut rng, 3, 5).unwrap();
            assert_eq!(c.len(), 5);
        }
    }
}
