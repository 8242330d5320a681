//! Dense statevector simulation over named qubit registers.
//!
//! This is the substrate every quantum routine in the crate runs on: encoding
//! preparation, Grover/phase-estimation circuits, pointer-qubit evolution, and
//! the lattice Boltzmann pipeline all manipulate a [`Statevector`] through
//! [`UnitaryOp`] values, post-selection, partial traces, and Hamiltonian
//! evolution. Everything is exact linear algebra on `2^n` complex amplitudes;
//! there is no noise model and no gate decomposition.

mod density;
mod layout;
mod op;
mod state;

pub use density::DensityMatrix;
pub use layout::{default_qubit_cap, set_default_qubit_cap, RegisterLayout, DEFAULT_QUBIT_CAP};
pub use op::{
    hadamard, iqft_matrix, iqft_op, qft_matrix, qft_op, real_rotation, unitarity_deviation,
    UnitaryOp, DENSE_TARGET_CAP, UNITARITY_TOL,
};
pub use state::{
    hermiticity_deviation, Statevector, EXACT_EVOLUTION_DIM, NORM_TOL, POSTSELECT_THRESHOLD,
};

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::Error;
    use nalgebra::DMatrix;
    use num_complex::Complex64;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn single(name: &str, width: usize) -> RegisterLayout {
        RegisterLayout::new(&[(name, width)]).unwrap()
    }

    /// Random unitary from the QR factorization of a Gaussian complex matrix.
    fn random_unitary(dim: usize, rng: &mut ChaCha8Rng) -> DMatrix<Complex64> {
        let raw = DMatrix::from_fn(dim, dim, |_, _| c(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5));
        let qr = raw.qr();
        qr.q()
    }

    #[test]
    fn hadamard_on_zero_gives_uniform_superposition() {
        let state = Statevector::zero(single("q", 1));
        let op = UnitaryOp::dense(hadamard(), vec![0]).unwrap();
        let state = state.apply(&op).unwrap();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        assert!((state.amplitude(0) - c(h, 0.0)).norm() < 1e-15);
        assert!((state.amplitude(1) - c(h, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn qft_on_zero_register_is_uniform() {
        let layout = single("r", 4);
        let targets = layout.register_qubits("r").unwrap();
        let state = Statevector::zero(layout)
            .apply(&qft_op(targets).unwrap())
            .unwrap();
        let expected = 0.25;
        for i in 0..16 {
            assert!((state.amplitude(i) - c(expected, 0.0)).norm() < 1e-12);
        }
    }

    #[test]
    fn random_unitaries_preserve_norm() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for trial in 0..100 {
            let n = 1 + (trial % 4);
            let layout = single("q", n + 1);
            // Random initial state.
            let dim = layout.dimension();
            let mut amps: Vec<Complex64> = (0..dim)
                .map(|_| c(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5))
                .collect();
            let norm = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
            amps.iter_mut().for_each(|a| *a /= norm);
            let state = Statevector::from_amplitudes(layout, amps).unwrap();
            // Random unitary on a strict subset of the qubits.
            let u = random_unitary(1 << n, &mut rng);
            let op = UnitaryOp::dense(u, (0..n).rev().collect()).unwrap();
            let state = state.apply(&op).unwrap();
            assert!((state.norm() - 1.0).abs() < 1e-10, "trial {trial}");
        }
    }

    #[test]
    fn controlled_ops_touch_only_matching_blocks() {
        // |10> with control on qubit 1: X on qubit 0 fires -> |11>.
        let layout = single("q", 2);
        let x = DMatrix::from_row_slice(2, 2, &[c(0.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)]);
        let cx = UnitaryOp::dense(x.clone(), vec![0])
            .unwrap()
            .controlled(1, true)
            .unwrap();
        let state = Statevector::basis(layout.clone(), 0b10).unwrap();
        let state = state.apply(&cx).unwrap();
        assert!((state.amplitude(0b11).norm() - 1.0).abs() < 1e-15);
        // |00>: control fails, state unchanged.
        let state = Statevector::basis(layout, 0b00).unwrap();
        let state = state.apply(&cx).unwrap();
        assert!((state.amplitude(0b00).norm() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn postselect_bell_state_collapses_partner_qubit() {
        let layout = single("q", 2);
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let amps = vec![c(h, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(h, 0.0)];
        let state = Statevector::from_amplitudes(layout, amps).unwrap();
        let (state, prob) = state.postselect(0, false).unwrap();
        assert!((prob - 0.5).abs() < 1e-12);
        assert!((state.amplitude(0b00).norm() - 1.0).abs() < 1e-12);
        assert!((state.norm_ledger() - 0.5f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn postselect_probabilities_sum_to_one_over_branches() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..50 {
            let layout = single("q", 3);
            let dim = layout.dimension();
            let mut amps: Vec<Complex64> = (0..dim)
                .map(|_| c(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5))
                .collect();
            let norm = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
            amps.iter_mut().for_each(|a| *a /= norm);
            let state = Statevector::from_amplitudes(layout, amps).unwrap();
            let qubit = rng.gen_range(0..3);
            let p0 = state.qubit_probability(qubit, false).unwrap();
            let p1 = state.qubit_probability(qubit, true).unwrap();
            assert!((p0 + p1 - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn postselect_impossible_branch_is_an_error() {
        let state = Statevector::basis(single("q", 1), 0).unwrap();
        assert!(matches!(
            state.postselect(0, true),
            Err(Error::ImpossibleOutcome { .. })
        ));
    }

    #[test]
    fn partial_trace_of_product_state_is_pure() {
        // |1>_a x |0>_b: tracing out b leaves |1><1|.
        let layout = RegisterLayout::new(&[("a", 1), ("b", 1)]).unwrap();
        let state = Statevector::basis(layout, 0b10).unwrap();
        let rho = state.partial_trace(&["a"]).unwrap();
        assert_eq!(rho.dimension(), 2);
        assert!((rho.entry(1, 1).re - 1.0).abs() < 1e-12);
        assert!(rho.entry(0, 0).norm() < 1e-12);
    }

    #[test]
    fn partial_trace_of_bell_state_is_maximally_mixed() {
        let layout = RegisterLayout::new(&[("a", 1), ("b", 1)]).unwrap();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let amps = vec![c(h, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(h, 0.0)];
        let state = Statevector::from_amplitudes(layout, amps).unwrap();
        for keep in [&["a"], &["b"]] {
            let rho = state.partial_trace(keep).unwrap();
            assert!((rho.entry(0, 0).re - 0.5).abs() < 1e-12);
            assert!((rho.entry(1, 1).re - 0.5).abs() < 1e-12);
            assert!(rho.entry(0, 1).norm() < 1e-12);
        }
    }

    #[test]
    fn partial_trace_selection_must_be_contiguous() {
        let layout = RegisterLayout::new(&[("a", 1), ("b", 1), ("c", 1)]).unwrap();
        let state = Statevector::zero(layout);
        assert!(matches!(
            state.partial_trace(&["a", "c"]),
            Err(Error::NonContiguousTraceSelection)
        ));
        assert!(state.partial_trace(&["b", "c"]).is_ok());
        assert!(matches!(
            state.partial_trace(&[]),
            Err(Error::EmptyTraceSelection)
        ));
    }

    #[test]
    fn evolution_under_zero_hamiltonian_is_identity() {
        let layout = single("q", 2);
        let dim = layout.dimension();
        let state = Statevector::basis(layout, 2).unwrap();
        let h = DMatrix::from_element(dim, dim, c(0.0, 0.0));
        let evolved = state.clone().evolve(&h, 0.7).unwrap();
        for i in 0..dim {
            assert!((evolved.amplitude(i) - state.amplitude(i)).norm() < 1e-14);
        }
    }

    #[test]
    fn pauli_z_evolution_applies_opposite_phases() {
        let layout = single("q", 1);
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let state =
            Statevector::from_amplitudes(layout, vec![c(h, 0.0), c(h, 0.0)]).unwrap();
        let z = DMatrix::from_row_slice(2, 2, &[c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(-1.0, 0.0)]);
        let t = 0.3;
        let evolved = state.evolve(&z, t).unwrap();
        // exp(i Z t): |0> gains e^{it}, |1> gains e^{-it}.
        assert!((evolved.amplitude(0) - c(h, 0.0) * Complex64::from_polar(1.0, t)).norm() < 1e-12);
        assert!((evolved.amplitude(1) - c(h, 0.0) * Complex64::from_polar(1.0, -t)).norm() < 1e-12);
    }

    #[test]
    fn random_hermitian_evolution_preserves_norm() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let layout = single("q", 3);
        let dim = layout.dimension();
        let raw = DMatrix::from_fn(dim, dim, |_, _| c(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5));
        let herm = (&raw + raw.adjoint()) * c(0.5, 0.0);
        let state = Statevector::zero(single("q", 3));
        let evolved = state.evolve(&herm, 0.1).unwrap();
        assert!((evolved.norm() - 1.0).abs() < 1e-9);
        // Cross-check the eigendecomposition path against the series path.
        let via_series = Statevector::zero(layout);
        let via_series = via_series.evolve_series_for_test(&herm, 0.1);
        for i in 0..dim {
            assert!((evolved.amplitude(i) - via_series.amplitude(i)).norm() < 1e-10);
        }
    }

    #[test]
    fn non_hermitian_hamiltonian_is_rejected() {
        let layout = single("q", 1);
        let state = Statevector::zero(layout);
        let bad = DMatrix::from_row_slice(2, 2, &[c(0.0, 0.0), c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)]);
        assert!(matches!(
            state.evolve(&bad, 1.0),
            Err(Error::NotHermitian { .. })
        ));
    }

    #[test]
    fn measurement_counts_are_deterministic_and_match_marginals() {
        let layout = single("q", 1);
        let amps = vec![c(0.8, 0.0), c(0.6, 0.0)];
        let state = Statevector::from_amplitudes(layout, amps).unwrap();
        let counts_a = state.measure_counts("q", 4000, 11).unwrap();
        let counts_b = state.measure_counts("q", 4000, 11).unwrap();
        assert_eq!(counts_a, counts_b);
        // p(1) = 0.36; five sigma on 4000 shots is about 0.038.
        let ones = *counts_a.get(&1).unwrap_or(&0) as f64 / 4000.0;
        assert!((ones - 0.36).abs() < 0.038, "empirical p(1) = {ones}");
    }

    #[test]
    fn mixed_kind_composition_matches_dense_product() {
        // Sequential diagonal/permutation/dense application must agree with the
        // composed dense matrix on the same qubits.
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for n in 2..=4usize {
            let layout = single("q", n);
            let targets: Vec<usize> = (0..n).rev().collect();
            let dim = layout.dimension();

            let dense = random_unitary(dim, &mut rng);
            let phases: Vec<Complex64> = (0..dim)
                .map(|_| Complex64::from_polar(1.0, rng.gen::<f64>() * 6.28))
                .collect();
            // Cyclic shift permutation.
            let map: Vec<usize> = (0..dim).map(|j| (j + 1) % dim).collect();

            let op_dense = UnitaryOp::dense(dense.clone(), targets.clone()).unwrap();
            let op_diag = UnitaryOp::diagonal(phases.clone(), targets.clone()).unwrap();
            let op_perm = UnitaryOp::permutation(map, targets.clone()).unwrap();

            let composed =
                op_perm.target_matrix() * op_diag.target_matrix() * op_dense.target_matrix();
            let op_composed = UnitaryOp::dense(composed, targets).unwrap();

            let mut amps: Vec<Complex64> = (0..dim)
                .map(|_| c(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5))
                .collect();
            let norm = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
            amps.iter_mut().for_each(|a| *a /= norm);
            let state = Statevector::from_amplitudes(layout, amps).unwrap();

            let sequential = state
                .clone()
                .apply(&op_dense)
                .unwrap()
                .apply(&op_diag)
                .unwrap()
                .apply(&op_perm)
                .unwrap();
            let direct = state.apply(&op_composed).unwrap();
            for i in 0..dim {
                assert!(
                    (sequential.amplitude(i) - direct.amplitude(i)).norm() < 1e-10,
                    "n = {n}, index {i}"
                );
            }
        }
    }

    impl Statevector {
        /// Test hook: force the series path regardless of dimension.
        fn evolve_series_for_test(
            self,
            hamiltonian: &DMatrix<Complex64>,
            t: f64,
        ) -> Statevector {
            self.evolve_series(hamiltonian, t).unwrap()
        }
    }
}
