//! Property tests over seeded random instances.

use num_complex::Complex64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use zefcode::codes::{
    huffman_lengths, is_prefix_free_classical, is_prefix_free_quantum, kraft_sum_classical,
    lift_classical, quantum_kraft_sum, remap_to_prefix_free, shannon_fano_lengths, QuantumCode,
};
use zefcode::compress::{
    length_identity, length_optimizing_check, rho_of, sufficiency_bound_check,
    sufficiency_experiment, truncate_and_restore, truncated_state, Ensemble, Sampling, SweepConfig,
};
use zefcode::condense::{condensed_length_expectation, decondense, simple_condense};
use zefcode::machine::{
    check_input_independence, check_reversibility, minimal_deadline, BranchOperator,
};
use zefcode::qstate::{
    fidelity_pure_mixed, inner, shannon_entropy, uhlmann_fidelity, von_neumann_entropy,
    DensityMatrix,
};
use zefcode::{random, SparseState};

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn cases(n: u32) -> ProptestConfig {
    ProptestConfig::with_cases(n)
}

proptest! {
    #![proptest_config(cases(64))]

    #[test]
    fn states_normalized_and_traces_preserved(seed in any::<u64>(), n in 1usize..=6) {
        let mut r = rng(seed);
        let s = random::pure_state(&mut r, n).unwrap();
        prop_assert!((s.norm_sqr() - 1.0).abs() < 1e-10);
        let keep: Vec<usize> = (1..=n).filter(|_| r.random_bool(0.5)).collect();
        let reduced = s.partial_trace(&keep).unwrap();
        prop_assert!((reduced.trace() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn fidelity_formulas_agree(seed in any::<u64>(), n in 1usize..=3) {
        let mut r = rng(seed);
        let a = random::pure_state(&mut r, n).unwrap();
        let b = random::pure_state(&mut r, n).unwrap();
        let (pa, pb) = (DensityMatrix::from_pure(&a).unwrap(), DensityMatrix::from_pure(&b).unwrap());
        let overlap = inner(&a, &b).unwrap().norm_sqr();
        prop_assert!((uhlmann_fidelity(&pa, &pb).unwrap() - overlap).abs() < 1e-9);
        let sigma = random::density_matrix(&mut r, n, None).unwrap();
        let direct = fidelity_pure_mixed(&a, &sigma).unwrap();
        prop_assert!((uhlmann_fidelity(&pa, &sigma).unwrap() - direct).abs() < 1e-9);
    }

    #[test]
    fn fidelity_not_decreased_by_truncation(seed in any::<u64>(), n in 1usize..=3) {
        let mut r = rng(seed);
        let rank = r.random_range(1..=1 << n);
        let a = random::density_matrix(&mut r, n, Some(rank)).unwrap();
        let b = random::density_matrix(&mut r, n, None).unwrap();
        let ell = r.random_range(0..=n);
        let before = uhlmann_fidelity(&a, &b).unwrap();
        let after = uhlmann_fidelity(
            &truncated_state(&a, ell).unwrap(),
            &truncated_state(&b, ell).unwrap(),
        ).unwrap();
        prop_assert!(after >= before - 1e-9, "{after} < {before}");
    }

    #[test]
    fn entropy_is_shannon_of_spectrum(seed in any::<u64>(), n in 1usize..=4) {
        let mut r = rng(seed);
        let rho = random::density_matrix(&mut r, n, None).unwrap();
        let direct = shannon_entropy(&rho.eigenvalues().into_iter().map(|v| v.max(0.0)).collect::<Vec<_>>());
        prop_assert!((von_neumann_entropy(&rho) - direct).abs() < 1e-10);
    }

    #[test]
    fn lifted_codes_keep_kraft_sum_and_prefix_property(seed in any::<u64>()) {
        let mut r = rng(seed);
        let count = r.random_range(1..=6);
        let code = random::classical_code(&mut r, 4, count).unwrap();
        match QuantumCode::from_classical_payloads(&code, 4) {
            Ok(q) => {
                prop_assert!((quantum_kraft_sum(&q) - kraft_sum_classical(&code)).abs() < 1e-12);
                prop_assert_eq!(is_prefix_free_quantum(&q), is_prefix_free_classical(&code));
            }
            Err(_) => prop_assert!(!is_prefix_free_classical(&code)),
        }
        if is_prefix_free_classical(&code) {
            prop_assert!(lift_classical(&code, 4).is_ok());
        }
    }

    #[test]
    fn remap_preserves_dims_and_is_isometric(seed in any::<u64>()) {
        let mut r = rng(seed);
        let code = random::any_code(&mut r, 4, 6).unwrap();
        let remap = remap_to_prefix_free(&code).unwrap();
        prop_assert_eq!(remap.code.dims(), code.dims());
        prop_assert!(is_prefix_free_quantum(&remap.code));
        prop_assert!(remap.isometry_deviation < 1e-10);
        prop_assert!(remap.conjugation_error < 1e-10);
        for b in code.basis() {
            let image = remap.map.apply(&b.zef).unwrap();
            prop_assert!((image.norm_sqr() - 1.0).abs() < 1e-10);
        }
    }
}

proptest! {
    #![proptest_config(cases(256))]

    #[test]
    fn shannon_fano_and_huffman_bounds(seed in any::<u64>(), k in 1usize..=12) {
        let mut r = rng(seed);
        let probs = random::distribution(&mut r, k);
        let sf = shannon_fano_lengths(&probs).unwrap();
        let hf = huffman_lengths(&probs).unwrap();
        let kraft: f64 = sf.iter().map(|&l| (-(l as f64)).exp2()).sum();
        prop_assert!(kraft <= 1.0 + 1e-12);
        for (&p, &l) in probs.iter().zip(&sf) {
            prop_assert!((l as f64) < -p.log2() + 1.0 || l == 1);
        }
        let avg = |ls: &[usize]| probs.iter().zip(ls).map(|(p, &l)| p * l as f64).sum::<f64>();
        prop_assert!(avg(&hf) <= avg(&sf) + 1e-12);
        prop_assert!(avg(&hf) + 1e-9 >= shannon_entropy(&probs));
    }
}

proptest! {
    #![proptest_config(cases(64))]

    #[test]
    fn average_length_bounds_entropy(seed in any::<u64>(), entries in 1usize..=5) {
        let mut r = rng(seed);
        let code = random::any_code(&mut r, 4, 6).unwrap();
        let ens = random::ensemble(&mut r, &code, entries).unwrap();
        let id = length_identity(&ens).unwrap();
        prop_assert!(id.kraft <= 1.0 + 1e-12);
        prop_assert!(id.entropy_bound_holds(), "{id:?}");
        prop_assert!(id.holds(), "{id:?}");
        let direct = von_neumann_entropy(&rho_of(&ens).unwrap());
        prop_assert!((id.entropy - direct).abs() < 1e-9);
        if (id.kraft - 1.0).abs() < 1e-12 {
            let check = length_optimizing_check(&ens).unwrap();
            prop_assert!((id.avg_length - id.entropy - id.relative_entropy).abs() < 1e-9);
            prop_assert!((check.overhead - id.relative_entropy).abs() < 1e-9);
        }
    }

    #[test]
    fn condensation_preserves_inner_products(seed in any::<u64>(), n in 1usize..=3) {
        let mut r = rng(seed);
        let code = random::prefix_free_code(&mut r, 3, 5).unwrap();
        let u: Vec<SparseState> = (0..n).map(|_| random::codeword(&mut r, &code).unwrap()).collect();
        let v: Vec<SparseState> = (0..n).map(|_| random::codeword(&mut r, &code).unwrap()).collect();
        let cu = simple_condense(&code, &u).unwrap();
        let cv = simple_condense(&code, &v).unwrap();
        let product = u.iter().zip(&v).fold(Complex64::new(1.0, 0.0), |acc, (a, b)| acc * inner(a, b).unwrap());
        prop_assert!((inner(&cu.state, &cv.state).unwrap() - product).norm() < 1e-10);

        // decondense ∘ condense is the identity up to one global phase.
        let back = decondense(&code, &cu).unwrap();
        let fidelity = back.iter().zip(&u).fold(1.0, |acc, (a, b)| acc * inner(a, b).unwrap().norm_sqr());
        prop_assert!((fidelity - 1.0).abs() < 1e-10);

        let expect: f64 = u.iter().map(|w| code.length_observable().expectation(w).unwrap()).sum();
        prop_assert!((condensed_length_expectation(&code, &u).unwrap() - expect).abs() < 1e-10);
    }

    #[test]
    fn condensed_eigenstates_vanish_past_total_length(seed in any::<u64>(), n in 1usize..=4) {
        let mut r = rng(seed);
        let code = random::prefix_free_code(&mut r, 4, 6).unwrap();
        let picks: Vec<usize> = (0..n).map(|_| r.random_range(0..code.dimension())).collect();
        let words: Vec<SparseState> = picks.iter().map(|&i| code.basis()[i].zef.clone()).collect();
        let total: usize = picks.iter().map(|&i| code.basis()[i].length).sum();
        let cs = simple_condense(&code, &words).unwrap();
        let width = cs.num_qubits();
        for (label, _) in cs.state.terms() {
            prop_assert_eq!(label & ((1u128 << (width - total)) - 1), 0);
        }
    }

    #[test]
    fn machine_halts_uniformly_and_injectively(seed in any::<u64>(), n in 1usize..=3) {
        let mut r = rng(seed);
        let lengths = random::kraft_lengths(&mut r, 3, 4, false);
        let code = zefcode::codes::kraft_assign(&lengths).unwrap();
        let deadline = minimal_deadline(&code, n) + r.random_range(0..3);
        let rev = check_reversibility(&code, n, deadline).unwrap();
        prop_assert!(rev.injective(), "{rev:?}");
        let ind = check_input_independence(&code, n, deadline).unwrap();
        prop_assert!(ind.independent(), "{ind:?}");
    }

    #[test]
    fn branch_operator_is_an_involutive_isometry(seed in any::<u64>(), k in 1usize..=3) {
        let mut r = rng(seed);
        let pi = random::projector(&mut r, k).unwrap();
        let width = k + 1 + r.random_range(0..2);
        let mut qubits: Vec<usize> = (1..=width).collect();
        for i in (1..qubits.len()).rev() {
            qubits.swap(i, r.random_range(0..=i));
        }
        let u = BranchOperator::new(qubits[0], qubits[1..=k].to_vec(), pi).unwrap();
        let x = random::pure_state(&mut r, width).unwrap();
        let y = random::pure_state(&mut r, width).unwrap();
        let (ux, uy) = (u.apply(&x).unwrap(), u.apply(&y).unwrap());
        prop_assert!((inner(&ux, &uy).unwrap() - inner(&x, &y).unwrap()).norm() < 1e-12);
        let uux = u.apply(&ux).unwrap();
        prop_assert!((inner(&uux, &x).unwrap() - Complex64::new(1.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn truncation_channel_outputs_states(seed in any::<u64>(), n in 1usize..=5) {
        let mut r = rng(seed);
        let s = random::pure_state(&mut r, n).unwrap();
        let sigma = truncate_and_restore(&s, r.random_range(0..=n)).unwrap();
        let m = sigma.matrix();
        prop_assert!((m - m.adjoint()).iter().all(|z| z.norm() < 1e-10));
        prop_assert!((sigma.trace() - 1.0).abs() < 1e-10);
        let ev = sigma.eigenvalues();
        prop_assert!(ev.iter().all(|&v| v > -1e-10), "{:?}", ev);
    }

    #[test]
    fn sufficiency_chain(seed in any::<u64>()) {
        let mut r = rng(seed);
        let code = random::any_code(&mut r, 4, 6).unwrap();
        let phi = random::codeword(&mut r, &code).unwrap();
        let ell = r.random_range(0..=4);
        let out = sufficiency_bound_check(&phi, &code, ell).unwrap();
        prop_assert!(out.chain_holds(), "{out:?}");
        prop_assert!((0.0..=1.0).contains(&out.eta));
        prop_assert!(out.alpha * out.alpha + 1e-12 >= 1.0 - out.eta);
    }

    #[test]
    fn fidelity_monotone_in_kept_length_for_basis_ensembles(seed in any::<u64>(), n in 1usize..=3) {
        let mut r = rng(seed);
        // Superposed payloads can lose fidelity as ℓ grows; computational
        // basis codewords cannot.
        let lengths = random::kraft_lengths(&mut r, 3, 4, false);
        let code = lift_classical(&zefcode::codes::kraft_assign(&lengths).unwrap(), 3).unwrap();
        let probs = random::distribution(&mut r, code.dimension());
        let ens = Ensemble::from_basis(code, &probs).unwrap();
        let cfg = SweepConfig { n, ells: (0..=3 * n).collect(), samples: 0, seed, sampling: Sampling::Exact };
        let rows = sufficiency_experiment(&ens, &cfg).unwrap();
        for w in rows.windows(2) {
            prop_assert!(w[0].avg_fidelity <= w[1].avg_fidelity + 1e-9);
        }
        for row in &rows {
            prop_assert!(row.bound_lower <= row.avg_fidelity + 1e-9);
            prop_assert!(row.avg_fidelity <= row.bound_upper + 1e-9);
        }
    }
}
