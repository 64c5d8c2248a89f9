//! Property tests over randomized states and measurements.

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

use measim::cq::{born_distribution, convex_combine, transpose_trick_states, Povm};
use measim::qcore::{
    canonical_purification, partial_trace, psd_sqrt_and_pinv_sqrt, trace_distance, trace_norm,
    von_neumann_entropy, DensityOperator, Operator,
};
use measim::sampling;
use measim::typicality::{is_strongly_typical, typical_mass, TypicalSetSpec};

fn relabeled(povm: &Povm) -> Povm {
    let labels = (0..povm.len()).map(|x| x.to_string()).collect();
    Povm::new(povm.elements().to_vec(), labels).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn trace_distance_stays_in_range_and_symmetric(seed in 0u64..1_000_000, d in 2usize..=5) {
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        let a = sampling::random_density(d, &mut rng);
        let b = sampling::random_density(d, &mut rng);
        let dab = trace_distance(&a, &b).unwrap();
        let dba = trace_distance(&b, &a).unwrap();
        prop_assert!((0.0..=2.0 + 1e-10).contains(&dab));
        prop_assert!((dab - dba).abs() < 1e-10);
        prop_assert!(trace_distance(&a, &a).unwrap() < 1e-10);
    }

    #[test]
    fn entropy_lies_between_zero_and_log_dim(seed in 0u64..1_000_000, d in 2usize..=6) {
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        let rho = sampling::random_density(d, &mut rng);
        let h = von_neumann_entropy(&rho);
        prop_assert!(h >= -1e-10);
        prop_assert!(h <= (d as f64).log2() + 1e-10);
    }

    #[test]
    fn purification_recovers_state(seed in 0u64..1_000_000, d in 2usize..=4) {
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        let rho = sampling::random_density(d, &mut rng);
        let (phi, layout) = canonical_purification(&rho);
        let (back, _) = partial_trace(phi.to_density().operator(), &layout, &["A"]).unwrap();
        prop_assert!(trace_norm(&back.sub(rho.operator())).unwrap() < 1e-9);
    }

    #[test]
    fn born_pmf_normalizes_and_mixes_linearly(
        seed in 0u64..1_000_000,
        d in 2usize..=4,
        outcomes in 2usize..=4,
        weight in 0.05f64..0.95,
    ) {
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        let rho = sampling::random_density(d, &mut rng);
        let a = relabeled(&sampling::random_povm(d, outcomes, &mut rng).unwrap());
        let b = relabeled(&sampling::random_povm(d, outcomes, &mut rng).unwrap());
        let pa = born_distribution(&a, &rho).unwrap();
        let pb = born_distribution(&b, &rho).unwrap();
        prop_assert!((pa.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        let mixed = convex_combine(&[a, b], &[weight, 1.0 - weight]).unwrap();
        let pm = born_distribution(&mixed, &rho).unwrap();
        for x in 0..outcomes {
            prop_assert!((pm[x] - (weight * pa[x] + (1.0 - weight) * pb[x])).abs() < 1e-10);
        }
    }

    #[test]
    fn reference_blocks_are_psd_with_born_weights(
        seed in 0u64..1_000_000,
        d in 2usize..=4,
        outcomes in 2usize..=4,
    ) {
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        let rho = sampling::random_density(d, &mut rng);
        let povm = sampling::random_povm(d, outcomes, &mut rng).unwrap();
        let cq = transpose_trick_states(&rho, &povm).unwrap();
        let born = born_distribution(&povm, &rho).unwrap();
        for x in 0..outcomes {
            prop_assert!((cq.weight(x) - born[x]).abs() < 1e-9);
            let min = cq.weighted_block(x).hermitian_eigs().unwrap().values.last().copied().unwrap();
            prop_assert!(min >= -1e-10);
        }
    }

    #[test]
    fn sqrt_and_pinv_sqrt_reconstruct(seed in 0u64..1_000_000, d in 2usize..=5) {
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        let g = sampling::random_complex_matrix(d, &mut rng);
        let psd = g.mul(&g.dagger());
        let (s, p) = psd_sqrt_and_pinv_sqrt(&psd, 1e-12).unwrap();
        let scale = psd.max_abs_entry().max(1.0);
        prop_assert!(trace_norm(&s.mul(&s).sub(&psd)).unwrap() < 1e-7 * scale);
        prop_assert!(trace_norm(&s.mul(&p).mul(&s).sub(&s)).unwrap() < 1e-7 * scale.sqrt().max(1.0));
    }

    #[test]
    fn typical_mass_equals_sum_of_member_probabilities(
        p0 in 0.1f64..0.9,
        n in 1usize..=8,
        delta in 0.0f64..0.5,
    ) {
        let pmf = vec![p0, 1.0 - p0];
        let spec = TypicalSetSpec::new(pmf.clone(), n, delta).unwrap();
        let set = typical_mass(&spec).unwrap();
        // membership and mass agree with the direct per-sequence test
        let mut direct = 0.0;
        for flat in 0..(1usize << n) {
            let xn: Vec<usize> = (0..n).map(|i| (flat >> (n - 1 - i)) & 1).collect();
            if is_strongly_typical(&xn, &spec).unwrap() {
                direct += xn.iter().map(|&x| pmf[x]).product::<f64>();
            }
        }
        prop_assert!((set.mass - direct).abs() < 1e-12);
        prop_assert!(set.mass <= 1.0 + 1e-12);
    }

    #[test]
    fn operator_identity_is_neutral_for_tensor(seed in 0u64..1_000_000, d in 2usize..=4) {
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        let g = sampling::random_complex_matrix(d, &mut rng);
        let lifted = g.tensor(&Operator::identity(1));
        prop_assert!(trace_norm(&lifted.sub(&g)).unwrap() < 1e-12);
        let rho = sampling::random_density(d, &mut rng);
        prop_assert_eq!(DensityOperator::maximally_mixed(1).tensor(&rho).dim(), d);
    }
}
