use std::collections::BTreeSet;

use proptest::prelude::*;

use frustfree_core::generate::{
    golden, labelled_instance, planted_complete, psd_on_frame, random_frame, random_instance, random_state, rng,
    RandomConfig,
};
use frustfree_core::ground::{complete_kernel_dimension, expectation_ground_manifold, GroundSpace};
use frustfree_core::lattice::Lattice;
use frustfree_core::linalg::{
    kernel_basis, kron, operator_rank, outer, pauli_x, pauli_z, schmidt_decompose, CMatrix, HermitianOperator,
    StateVector, TAU_NORM, TAU_RANK,
};
use frustfree_core::model::{
    classify_naturality, projectorize_operator, rescale_to_zero_ground, substitute_nonnatural_rank2, TwoSpinTerm,
};
use frustfree_core::oracle::{ground_data_of, kernel_by_sweep};
use frustfree_core::percolation::{clusters, degeneracy_bound, run_trial, Labeling};
use frustfree_core::reduction::{reduce_with, ReductionOptions, ReductionOrder};
use frustfree_core::variational::restrict_perturbation;
use frustfree_core::{
    heavy_component_bound, reduce_subsystem, reduce_to_complete, reverse_network_instance, schmidt_measure_bound,
    Hamiltonian, LocalOp, Perturbation,
};

fn config(cases: u32) -> ProptestConfig {
    ProptestConfig {
        cases,
        failure_persistence: None,
        ..ProptestConfig::default()
    }
}

fn random_psd(seed: u64, rank: usize) -> HermitianOperator {
    let mut r = rng(seed);
    let frame = random_frame(&mut r, 4, rank);
    HermitianOperator::symmetrized(psd_on_frame(&mut r, &frame))
}

fn projector_onto(vectors: &[nalgebra::DVector<frustfree_core::C64>]) -> CMatrix {
    let m = CMatrix::from_columns(vectors);
    let q = m.qr().q();
    let k = vectors.len();
    let q = q.columns(0, k).into_owned();
    &q * q.adjoint()
}

fn natural_pool(seed: u64) -> Hamiltonian {
    match seed % 3 {
        0 => planted_complete(3 + (seed % 5) as usize, seed),
        1 => reverse_network_instance(&Lattice::chain(5 + (seed % 3) as usize), (seed % 3) as usize, seed).hamiltonian,
        _ => reverse_network_instance(&Lattice::grid(&[2, 3], false), (seed % 2) as usize, seed).hamiltonian,
    }
}

proptest! {
    #![proptest_config(config(200))]

    #[test]
    fn kernel_and_rank_partition_the_dimension(seed in any::<u64>(), rank in 0usize..=4) {
        let m = random_psd(seed, rank);
        let k = kernel_basis(&m, TAU_RANK).unwrap().len();
        prop_assert_eq!(k + operator_rank(&m, TAU_RANK), 4);
        prop_assert_eq!(k, 4 - rank);
    }

    #[test]
    fn schmidt_decomposition_recombines(seed in any::<u64>()) {
        let psi = StateVector::new(random_state(&mut rng(seed), 4)).unwrap();
        let back = schmidt_decompose(&psi).unwrap().recombine();
        prop_assert!((back - psi.amplitudes()).norm() <= TAU_NORM);
    }

    #[test]
    fn rescaling_and_projectorizing_keep_the_kernel(seed in any::<u64>(), rank in 1usize..=3, shift in -3.0f64..3.0) {
        let m = random_psd(seed, rank).shifted(shift);
        let rescaled = rescale_to_zero_ground(&m);
        let projected = projectorize_operator(&rescaled).unwrap();
        let a: Vec<_> = kernel_basis(&rescaled, TAU_RANK).unwrap().into_iter().map(StateVector::into_amplitudes).collect();
        let b: Vec<_> = kernel_basis(&projected, TAU_RANK).unwrap().into_iter().map(StateVector::into_amplitudes).collect();
        prop_assert_eq!(a.len(), b.len());
        prop_assert!((projector_onto(&a) - projector_onto(&b)).norm() < 1e-8);
    }

    #[test]
    fn naturality_matches_sampling_the_image(seed in any::<u64>(), product in any::<bool>()) {
        let mut r = rng(seed);
        let m = if product {
            let phi = random_state(&mut r, 2);
            let frame = random_frame(&mut r, 2, 2);
            let eta = psd_on_frame(&mut r, &frame);
            kron(&outer(&phi, &phi), &eta)
        } else {
            let frame = random_frame(&mut r, 4, 2);
            psd_on_frame(&mut r, &frame)
        };
        let t = TwoSpinTerm::new(0, 1, HermitianOperator::symmetrized(m)).unwrap().rescaled();
        let verdict = classify_naturality(&t).unwrap();
        let image = frustfree_core::model::image_basis(&t.op).unwrap();
        let sampled = (0..1000).any(|_| {
            let c = random_state(&mut r, image.len());
            let v = image.iter().zip(c.iter()).fold(nalgebra::DVector::zeros(4), |acc, (b, z)| acc + b.amplitudes() * *z);
            let s = schmidt_decompose(&StateVector::new(v).unwrap()).unwrap();
            s.coefficients[1] > 100.0 * TAU_RANK
        });
        prop_assert_eq!(verdict.natural, sampled);
        prop_assert_eq!(verdict.natural, !product);
    }

    #[test]
    fn substitution_keeps_the_kernel_dimension(seed in any::<u64>()) {
        let mut r = rng(seed);
        let phi = random_state(&mut r, 2);
        let frame = random_frame(&mut r, 2, 2);
        let eta = psd_on_frame(&mut r, &frame);
        let t = TwoSpinTerm::new(0, 1, HermitianOperator::symmetrized(kron(&outer(&phi, &phi), &eta))).unwrap().rescaled();
        let single = substitute_nonnatural_rank2(&t).unwrap();
        let lifted = HermitianOperator::symmetrized(kron(single.op.matrix(), &CMatrix::identity(2, 2)));
        prop_assert_eq!(kernel_basis(&t.op, TAU_RANK).unwrap().len(), kernel_basis(&lifted, TAU_RANK).unwrap().len());
    }
}

proptest! {
    #![proptest_config(config(40))]

    #[test]
    fn every_reduction_step_keeps_the_kernel_dimension(seed in any::<u64>()) {
        let h = natural_pool(seed);
        let want = ground_data_of(&h).unwrap().kernel_dim;
        let result = reduce_to_complete(&h).unwrap();
        for (i, step) in result.trace().intermediates(&h).iter().enumerate() {
            let got = kernel_by_sweep(step, TAU_RANK).unwrap().len();
            prop_assert_eq!(got, want, "after step {}", i + 1);
        }
    }

    #[test]
    fn natural_inputs_stay_natural_and_keep_their_ranks(seed in any::<u64>()) {
        let h = natural_pool(seed);
        prop_assume!(ground_data_of(&h).unwrap().frustration_free);
        let no_rank1 = h.two_spin_terms().all(|t| t.rank() >= 2);
        let opts = ReductionOptions { check_invariants: true, ..ReductionOptions::default() };
        let result = reduce_with(&h, &opts).unwrap();
        let reduced = result.reduced().expect("unfrustrated");
        prop_assert_eq!(reduced.diagnostics.naturality_violations, 0);
        for step in result.trace().intermediates(&h) {
            for t in step.two_spin_terms() {
                prop_assert!(classify_naturality(&t).unwrap().natural);
                if no_rank1 {
                    prop_assert!(t.rank() >= 2);
                }
            }
        }
        prop_assert!(reduced.network.validate().is_ok());
    }

    #[test]
    fn verdict_and_dimension_do_not_depend_on_the_order(seed in any::<u64>()) {
        let lattice = match seed % 3 {
            0 => Lattice::chain(6),
            1 => Lattice::cycle(5),
            _ => Lattice::grid(&[2, 3], false),
        };
        let cfg = RandomConfig { rank_weights: [0.8, 0.2, 0.0], ..RandomConfig::default() };
        let h = random_instance(&lattice, &cfg, seed);
        let dim_of = |order| {
            let opts = ReductionOptions { order, ..ReductionOptions::default() };
            reduce_with(&h, &opts).unwrap().reduced().map(|r| complete_kernel_dimension(&r.complete).unwrap())
        };
        let canonical = dim_of(ReductionOrder::Canonical);
        for k in 0..10 {
            prop_assert_eq!(dim_of(ReductionOrder::Shuffled(seed ^ k)), canonical);
        }
    }

    #[test]
    fn orthonormalized_kernel_vectors_are_orthonormal(seed in any::<u64>(), n in 2usize..=9) {
        let space = GroundSpace::new(&planted_complete(n, seed)).unwrap();
        for c in 0..space.components().len() {
            let v = space.orthonormal_vectors(c);
            let m = CMatrix::from_columns(&v);
            let g = m.adjoint() * &m;
            prop_assert!((g - CMatrix::identity(v.len(), v.len())).norm() < 1e-9);
        }
    }

    #[test]
    fn different_seeds_span_the_same_kernel(seed in any::<u64>(), n in 2usize..=6) {
        let h = planted_complete(n, seed);
        let shifted = |k: usize| -> Vec<StateVector> {
            (0..=k)
                .map(|j| {
                    let t = 0.3 + j as f64 * std::f64::consts::PI / (k as f64 + 1.7);
                    StateVector::from_slice(&[frustfree_core::linalg::c64(t.cos(), 0.0), frustfree_core::linalg::c64(t.sin(), 0.2)]).unwrap()
                })
                .collect()
        };
        let a = GroundSpace::new(&h).unwrap().orthonormal_basis();
        let b = GroundSpace::with_seeds(&h, Some(&shifted)).unwrap().orthonormal_basis();
        prop_assert!((projector_onto(&a) - projector_onto(&b)).norm() < 1e-8);
    }

    #[test]
    fn manifold_expectation_is_linear(seed in any::<u64>(), x in -2.0f64..2.0, y in -2.0f64..2.0) {
        let h = natural_pool(seed);
        let result = reduce_to_complete(&h).unwrap();
        prop_assume!(!result.is_frustrated());
        let a = LocalOp::new(vec![0], pauli_z()).unwrap();
        let b = LocalOp::new(vec![0, 1], kron(&pauli_x(), &pauli_x())).unwrap();
        let mut sum = a.scaled(frustfree_core::linalg::c64(x, 0.0)).extend(&[0, 1]);
        sum.add_assign(&b.scaled(frustfree_core::linalg::c64(y, 0.0)));
        let lhs = expectation_ground_manifold(&result, &sum).unwrap();
        let rhs = x * expectation_ground_manifold(&result, &a).unwrap() + y * expectation_ground_manifold(&result, &b).unwrap();
        prop_assert!((lhs - rhs).abs() < 1e-9);
    }

    #[test]
    fn heavy_bound_dominates_and_subsystems_keep_the_kernel(seed in any::<u64>(), lo in 0usize..4, len in 1usize..4) {
        let g = reverse_network_instance(&Lattice::chain(7), (seed % 3) as usize, seed);
        prop_assume!(g.kernel_dim > 0);
        let a: BTreeSet<usize> = (lo..(lo + len).min(6)).collect();
        let schmidt = schmidt_measure_bound(&g.hamiltonian, &a).unwrap();
        prop_assert!(heavy_component_bound(&g.hamiltonian, &a) >= schmidt - 1e-12);
        let sub = reduce_subsystem(&g.hamiltonian, &a).unwrap();
        let replayed = sub.reduced.trace.replay(&g.hamiltonian);
        prop_assert_eq!(kernel_by_sweep(&replayed, TAU_RANK).unwrap().len(), g.kernel_dim);
    }

    #[test]
    fn variational_matrix_scales_linearly(seed in any::<u64>(), lambda in -1.0f64..1.0) {
        let h0 = planted_complete(4, seed);
        let h1 = Perturbation::new(vec![
            LocalOp::new(vec![0], pauli_x()).unwrap(),
            LocalOp::new(vec![1, 2], kron(&pauli_z(), &pauli_z())).unwrap(),
        ]).unwrap();
        let r = restrict_perturbation(&h0, &h1).unwrap();
        let scaled = Perturbation::new(h1.terms().iter().map(|t| t.scaled(frustfree_core::linalg::c64(lambda, 0.0))).collect()).unwrap();
        let rs = restrict_perturbation(&h0, &scaled).unwrap();
        prop_assert!((&rs.matrix - r.matrix.scale(lambda)).norm() < 1e-9);
        let e = r.minimize(lambda).energy;
        prop_assert!((rs.minimize(1.0).energy - e).abs() < 1e-9);
    }
}

proptest! {
    #![proptest_config(config(100))]

    #[test]
    fn percolation_bound_decreases_with_p(seed in any::<u64>(), p1 in 0.0f64..1.0, dp in 0.0f64..0.5) {
        let lattice = Lattice::grid(&[8, 8], false);
        let p2 = (p1 + dp).min(1.0);
        let low = degeneracy_bound(&run_trial(&lattice, p1, seed, 3)).log2_bound;
        let high = degeneracy_bound(&run_trial(&lattice, p2, seed, 3)).log2_bound;
        prop_assert!(high <= low + 1e-12);
        prop_assert_eq!(run_trial(&lattice, p1, seed, 3), run_trial(&lattice, p1, seed, 3));
    }
}

proptest! {
    #![proptest_config(config(30))]

    #[test]
    fn entangled_clusters_carry_at_most_size_plus_one_ground_states(seed in any::<u64>(), p in 0.2f64..0.9) {
        let lattice = Lattice::grid(&[2, 4], false);
        let mut r = rng(seed);
        let entangled: Vec<bool> = lattice.edges.iter().map(|_| rand::Rng::random::<f64>(&mut r) < p).collect();
        let h = labelled_instance(&lattice, &entangled, seed).unwrap();
        let dec = clusters(&Labeling { lattice: lattice.clone(), entangled: entangled.clone() });
        for c in 0..dec.count() {
            let members: BTreeSet<usize> = dec.members(c).into_iter().collect();
            if members.len() < 2 {
                continue;
            }
            let mut sub = Hamiltonian::with_spins(lattice.n);
            for (&(a, b), &e) in lattice.edges.iter().zip(&entangled) {
                if e && members.contains(&a) && members.contains(&b) {
                    sub.add_two_spin(a, b, h.pair(a, b).unwrap().op.into_matrix()).unwrap();
                }
            }
            let sub = sub.restricted_to(&members);
            let exact = ground_data_of(&sub).unwrap();
            prop_assert!(exact.kernel_dim <= members.len() + 1);
            let pipeline = reduce_to_complete(&sub).unwrap().reduced().map(|r| complete_kernel_dimension(&r.complete).unwrap());
            prop_assert_eq!(pipeline, exact.frustration_free.then_some(exact.kernel_dim));
        }
    }
}

#[test]
fn generators_are_reproducible() {
    let lattice = Lattice::grid(&[3, 3], false);
    assert_eq!(
        random_instance(&lattice, &RandomConfig::default(), 5).to_model().to_json(),
        random_instance(&lattice, &RandomConfig::default(), 5).to_model().to_json()
    );
    let a = reverse_network_instance(&lattice, 2, 9);
    let b = reverse_network_instance(&lattice, 2, 9);
    assert_eq!(a.hamiltonian, b.hamiltonian);
    assert_eq!(a.kernel_dim, b.kernel_dim);
    assert!(golden("xx4cycle").is_some());
}
