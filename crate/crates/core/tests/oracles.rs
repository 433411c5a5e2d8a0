//! Cross-checks against independent brute-force computations.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use zefcode::codes::{
    huffman_lengths, is_prefix_free_quantum, kraft_assign, lift_classical, quantum_kraft_sum,
    ClassicalCode, QuantumCode,
};
use zefcode::compress::{block_code, truncate_and_restore, truncation_fidelity, Construction};
use zefcode::lengths::{power, tail_greater};
use zefcode::machine::{codeword_tuples, minimal_deadline, run_condense_program, BranchOperator};
use zefcode::qstate::{fidelity_pure_mixed, uhlmann_fidelity, DensityMatrix};
use zefcode::{random, SparseState};

fn expected_length(probs: &[f64], lengths: &[usize]) -> f64 {
    probs.iter().zip(lengths).map(|(p, &l)| p * l as f64).sum()
}

/// Every length vector over 1..=max with Σ 2^{-l} ≤ 1; each is realizable
/// by a prefix code.
fn all_prefix_length_vectors(k: usize, max: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut current = vec![1; k];
    loop {
        let budget: u64 = current.iter().map(|&l| 1u64 << (max - l)).sum();
        if budget <= 1 << max {
            out.push(current.clone());
        }
        let mut i = 0;
        while i < k && current[i] == max {
            current[i] = 1;
            i += 1;
        }
        if i == k {
            return out;
        }
        current[i] += 1;
    }
}

#[test]
fn huffman_is_optimal_over_short_prefix_codes() {
    let dyadic = [0.5, 0.25, 0.125, 0.125];
    let best = all_prefix_length_vectors(4, 4)
        .iter()
        .map(|l| expected_length(&dyadic, l))
        .fold(f64::INFINITY, f64::min);
    let lengths = huffman_lengths(&dyadic).unwrap();
    assert_eq!(lengths, vec![1, 2, 3, 3]);
    assert_eq!(expected_length(&dyadic, &lengths), best);

    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let vectors: Vec<Vec<Vec<usize>>> = (0..=5).map(|k| all_prefix_length_vectors(k, 4)).collect();
    for _ in 0..200 {
        let k = rng.random_range(2..=5);
        let probs = random::distribution(&mut rng, k);
        let lengths = huffman_lengths(&probs).unwrap();
        // With k ≤ 5 an optimal code never needs a word longer than 4.
        let best = vectors[k]
            .iter()
            .map(|l| expected_length(&probs, l))
            .fold(f64::INFINITY, f64::min);
        assert!((expected_length(&probs, &lengths) - best).abs() < 1e-12, "{probs:?}");
    }
}

#[test]
fn three_leaf_trees() {
    // The only full binary tree with three leaves has depths {1, 2, 2}; for a
    // uniform source every leaf assignment costs 5/3.
    let third = 1.0 / 3.0;
    let mut lengths = huffman_lengths(&[third; 3]).unwrap();
    lengths.sort_unstable();
    assert_eq!(lengths, vec![1, 2, 2]);
    let shapes = all_prefix_length_vectors(3, 3)
        .into_iter()
        .filter(|l| l.iter().map(|&x| 1u64 << (3 - x)).sum::<u64>() == 8)
        .collect::<Vec<_>>();
    assert!(shapes.iter().all(|s| {
        let mut s = s.clone();
        s.sort_unstable();
        s == [1, 2, 2]
    }));
}

#[test]
fn kraft_and_prefix_against_string_oracles() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let (mut free, mut not_free) = (0, 0);
    for _ in 0..200 {
        let count = rng.random_range(1..=5);
        let code = random::classical_code(&mut rng, 4, count).unwrap();
        let words: Vec<String> = code.codewords().iter().map(|w| w.to_string()).collect();
        // Kraft sum as an exact count of length-4 extensions.
        let count16: u64 = words.iter().map(|w| 1u64 << (4 - w.len())).sum();
        let oracle = words
            .iter()
            .enumerate()
            .all(|(i, a)| words.iter().enumerate().all(|(j, b)| i == j || !b.starts_with(a.as_str())));
        assert_eq!(lift_classical(&code, 4).is_ok(), oracle);
        // Words such as "0" and "00" share a zef form and admit no code.
        let Ok(lifted) = QuantumCode::from_classical_payloads(&code, 4) else {
            assert!(!oracle);
            not_free += 1;
            continue;
        };
        assert_eq!(quantum_kraft_sum(&lifted), count16 as f64 / 16.0);
        assert_eq!(is_prefix_free_quantum(&lifted), oracle, "{words:?}");
        if oracle {
            free += 1;
        } else {
            not_free += 1;
        }
    }
    assert!(free > 10 && not_free > 10);
}

fn dense_partial_trace(v: &[Complex64], n: usize, keep: &[usize]) -> DMatrix<Complex64> {
    let bit = |idx: usize, q: usize| (idx >> (n - q)) & 1;
    let k = keep.len();
    let mut out = DMatrix::zeros(1 << k, 1 << k);
    for a in 0..v.len() {
        for b in 0..v.len() {
            let same_env = (1..=n).filter(|q| !keep.contains(q)).all(|q| bit(a, q) == bit(b, q));
            if !same_env {
                continue;
            }
            let i = keep.iter().fold(0, |acc, &q| acc << 1 | bit(a, q));
            let j = keep.iter().fold(0, |acc, &q| acc << 1 | bit(b, q));
            out[(i, j)] += v[a] * v[b].conj();
        }
    }
    out
}

#[test]
fn partial_trace_by_index_contraction() {
    let s: SparseState = SparseState::from_bitstrings([("110", Complex64::new(1.0, 0.0))]).unwrap();
    let reduced = s.partial_trace(&[1]).unwrap();
    assert_eq!(reduced.matrix()[(1, 1)], Complex64::new(1.0, 0.0));
    assert_eq!(reduced.matrix()[(0, 0)], Complex64::new(0.0, 0.0));

    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for keep in [vec![1], vec![2], vec![1, 3], vec![2, 4], vec![1, 2, 4]] {
        let s = random::pure_state(&mut rng, 4).unwrap();
        let v = s.to_dense().unwrap();
        let got = s.partial_trace(&keep).unwrap();
        let want = dense_partial_trace(&v, 4, &keep);
        assert!((got.matrix() - want).iter().all(|z| z.norm() < 1e-12), "keep {keep:?}");
    }
}

#[test]
fn qubit_fidelity_closed_form() {
    // For one qubit, F = Tr ρσ + 2·sqrt(det ρ · det σ).
    let mut rng = ChaCha8Rng::seed_from_u64(14);
    for _ in 0..200 {
        let a = random::density_matrix(&mut rng, 1, None).unwrap();
        let b = random::density_matrix(&mut rng, 1, None).unwrap();
        let (ma, mb) = (a.matrix(), b.matrix());
        let tr = (ma * mb).trace().re;
        let det = |m: &DMatrix<Complex64>| (m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)]).re;
        let closed = tr + 2.0 * (det(ma) * det(mb)).max(0.0).sqrt();
        assert!((uhlmann_fidelity(&a, &b).unwrap() - closed).abs() < 1e-9);
    }
}

#[test]
fn sparse_truncation_fidelity_matches_dense_channel() {
    let mut rng = ChaCha8Rng::seed_from_u64(15);
    for _ in 0..50 {
        let n = rng.random_range(1..=5);
        let s = random::pure_state(&mut rng, n).unwrap();
        for ell in 0..=n {
            let sigma = truncate_and_restore(&s, ell).unwrap();
            let dense = fidelity_pure_mixed(&s, &sigma).unwrap();
            assert!((truncation_fidelity(&s, ell).unwrap() - dense).abs() < 1e-12);
        }
    }
}

#[test]
fn convolution_by_tuple_enumeration() {
    let mut rng = ChaCha8Rng::seed_from_u64(16);
    for _ in 0..20 {
        let mut pmf = random::distribution(&mut rng, 4);
        pmf.insert(0, 0.0);
        let n = 3;
        let mut direct = vec![0.0; 4 * n + 1];
        for a in 0..5 {
            for b in 0..5 {
                for c in 0..5 {
                    direct[a + b + c] += pmf[a] * pmf[b] * pmf[c];
                }
            }
        }
        let conv = power(&pmf, n).unwrap();
        for (x, y) in conv.iter().zip(&direct) {
            assert!((x - y).abs() < 1e-14);
        }
        for ell in 0..=12 {
            let tail: f64 = direct.iter().skip(ell + 1).sum();
            assert!((tail_greater(&pmf, n, ell).unwrap() - tail).abs() < 1e-12);
        }
    }
}

#[test]
fn machine_tape_is_string_concatenation() {
    for words in [vec!["0", "10", "110", "111"], vec!["00", "01", "1"], vec!["1", "01", "001"]] {
        let code = ClassicalCode::parse(&words).unwrap();
        let l_max = code.max_length();
        for n in 1..=3 {
            let deadline = minimal_deadline(&code, n);
            for tuple in codeword_tuples(&code, n).unwrap() {
                let mut concat: String = tuple.iter().map(|w| w.to_string()).collect();
                while concat.len() < n * l_max {
                    concat.push('0');
                }
                let run = run_condense_program(&code, &tuple, deadline).unwrap();
                assert_eq!(run.final_state.tape.to_string(), concat);
                assert_eq!(run.final_state.clock, 2 * deadline);
            }
        }
    }
    let canonical = kraft_assign(&[1, 2, 3, 3]).unwrap();
    assert_eq!(canonical, ClassicalCode::parse(&["0", "10", "110", "111"]).unwrap());
}

#[test]
fn branch_operator_by_explicit_formula() {
    // U(|s⟩|x⟩) = |s⊕1⟩Π|x⟩ + |s⟩(I−Π)|x⟩ with the switch as qubit 1.
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    for k in 1..=3 {
        let dim = 1usize << k;
        let pi = random::projector(&mut rng, k).unwrap();
        let comp = DMatrix::<Complex64>::identity(dim, dim) - &pi;
        let u = BranchOperator::new(1, (2..=k + 1).collect(), pi.clone()).unwrap();
        let s = random::pure_state(&mut rng, k + 1).unwrap();
        let v = s.to_dense().unwrap();
        let mut want = vec![Complex64::new(0.0, 0.0); 2 * dim];
        for sw in 0..2 {
            for y in 0..dim {
                for x in 0..dim {
                    let a = v[sw * dim + x];
                    want[(1 - sw) * dim + y] += pi[(y, x)] * a;
                    want[sw * dim + y] += comp[(y, x)] * a;
                }
            }
        }
        let got = u.apply(&s).unwrap().to_dense().unwrap();
        for (g, w) in got.iter().zip(&want) {
            assert!((g - w).norm() < 1e-12);
        }
    }
}

#[test]
fn block_code_entropy_from_definition() {
    let entropy = -(0.9f64 * 0.9f64.log2() + 0.1 * 0.1f64.log2());
    for n in [1, 2, 4] {
        let b = block_code(&[0.9, 0.1], n, Construction::ShannonFano).unwrap();
        assert!((b.entropy - entropy).abs() < 1e-9);
        // Shannon-Fano lengths recomputed from the block probabilities.
        let direct: f64 = b
            .probs
            .iter()
            .map(|&p| p * ((-p.log2()).ceil().max(1.0)))
            .sum();
        assert!((b.avg_length - direct).abs() < 1e-9);
    }
    let rho = DensityMatrix::diagonal(1, &[0.9, 0.1]).unwrap();
    assert!((zefcode::qstate::von_neumann_entropy(&rho) - entropy).abs() < 1e-12);
}
