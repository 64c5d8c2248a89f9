use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha12Rng;

use super::*;
use crate::qcore::PureState;
use crate::sampling;

fn c(re: f64, im: f64) -> crate::qcore::C64 {
    crate::qcore::C64::new(re, im)
}

#[test]
fn gentle_identity_effect_has_no_disturbance() {
    let rho = DensityOperator::maximally_mixed(3);
    let report = gentle_disturbance(&rho, &Operator::identity(3)).unwrap();
    assert!(report.lhs < 1e-12 && report.rhs < 1e-12);
    assert!(report.satisfied);
}

#[test]
fn gentle_projector_on_plus_state() {
    // Lambda = |0><0|, rho = |+><+|: rhs = 2 sqrt(1/2)
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let plus = PureState::new(vec![c(s, 0.0), c(s, 0.0)])
        .unwrap()
        .to_density();
    let p0 = Operator::projector(&[c(1.0, 0.0), c(0.0, 0.0)]);
    let report = gentle_disturbance(&plus, &p0).unwrap();
    assert!((report.rhs - 2.0 * 0.5f64.sqrt()).abs() < 1e-12);
    // direct 2x2 oracle for the lhs: || |+><+| - |0><0|/2 ||_1
    let disturbed = p0.mul(plus.operator()).mul(&p0);
    let oracle = trace_norm(&plus.operator().sub(&disturbed)).unwrap();
    assert!((report.lhs - oracle).abs() < 1e-12);
    assert!(report.satisfied);
}

#[test]
fn gentle_random_instances_always_hold() {
    let mut rng = ChaCha12Rng::seed_from_u64(1);
    for _ in 0..300 {
        let d = 2 + (rng.next_u32() as usize) % 3; // up to 4
        let rho = sampling::random_density(d, &mut rng);
        let lam = sampling::random_effect(d, &mut rng);
        let report = gentle_disturbance(&rho, &lam).unwrap();
        assert!(report.satisfied, "{report:?}");
    }
}

#[test]
fn gentle_rejects_bad_effect() {
    let rho = DensityOperator::maximally_mixed(2);
    let too_big = Operator::identity(2).scale(1.5);
    assert!(matches!(
        gentle_disturbance(&rho, &too_big),
        Err(Error::BadEffect(_))
    ));
}

#[test]
fn gentle_ensemble_cases() {
    let mut rng = ChaCha12Rng::seed_from_u64(2);
    // identity effect
    let ens = Ensemble::new(
        vec![0.5, 0.5],
        vec![
            sampling::random_density(2, &mut rng),
            sampling::random_density(2, &mut rng),
        ],
    )
    .unwrap();
    let report = gentle_ensemble(&ens, &Operator::identity(2)).unwrap();
    assert!(report.lhs < 1e-12 && report.satisfied);

    // two-state ensemble with an explicit effect
    let p0 = Operator::projector(&[c(1.0, 0.0), c(0.0, 0.0)]);
    let report = gentle_ensemble(&ens, &p0).unwrap();
    // oracle: expectation of the per-state disturbances
    let mut lhs = 0.0;
    for x in 0..2 {
        let rho_x = ens.state(x).operator();
        lhs += 0.5 * trace_norm(&rho_x.sub(&p0.mul(rho_x).mul(&p0))).unwrap();
    }
    assert!((report.lhs - lhs).abs() < 1e-12);
    assert!(report.satisfied);

    // Monte Carlo
    for _ in 0..200 {
        let d = 2 + (rng.next_u32() as usize) % 3;
        let k = 2 + (rng.next_u32() as usize) % 3;
        let pmf: Vec<f64> = {
            let raw: Vec<f64> = (0..k).map(|_| rng.next_u32() as f64 + 1.0).collect();
            let t: f64 = raw.iter().sum();
            raw.iter().map(|v| v / t).collect()
        };
        let states = (0..k)
            .map(|_| sampling::random_density(d, &mut rng))
            .collect();
        let ens = Ensemble::new(pmf, states).unwrap();
        let lam = sampling::random_effect(d, &mut rng);
        assert!(gentle_ensemble(&ens, &lam).unwrap().satisfied);
    }
}

#[test]
fn trace_inequality_cases() {
    let mut rng = ChaCha12Rng::seed_from_u64(3);
    let rho = sampling::random_density(2, &mut rng);
    // rho = sigma: slack is exactly zero
    let lam = sampling::random_effect(2, &mut rng);
    let report = trace_inequality(rho.operator(), rho.operator(), &lam).unwrap();
    assert!((report.lhs - report.rhs).abs() < 1e-10);

    // orthogonal pure states with Lambda = rho: 1 <= 0 + 2
    let zero = PureState::basis_state(2, 0).to_density();
    let one = PureState::basis_state(2, 1).to_density();
    let report = trace_inequality(zero.operator(), one.operator(), zero.operator()).unwrap();
    assert!((report.lhs - 1.0).abs() < 1e-12);
    assert!((report.rhs - 2.0).abs() < 1e-10);

    for _ in 0..300 {
        let d = 2 + (rng.next_u32() as usize) % 3;
        let a = sampling::random_density(d, &mut rng);
        let b = sampling::random_density(d, &mut rng);
        let lam = sampling::random_effect(d, &mut rng);
        assert!(
            trace_inequality(a.operator(), b.operator(), &lam)
                .unwrap()
                .satisfied
        );
    }
}

#[test]
fn sen_bound_cases() {
    let mut rng = ChaCha12Rng::seed_from_u64(4);
    let rho = sampling::random_density(4, &mut rng);
    // all projectors identity: gap and bound both vanish
    let report = sen_union_gap(
        rho.operator(),
        &[Operator::identity(4), Operator::identity(4)],
    )
    .unwrap();
    assert!(report.lhs.abs() < 1e-12 && report.rhs.abs() < 1e-12);

    // single support projector leaves the state untouched
    let support = rho.spectrum().projector_onto(|_, v| v > 1e-12);
    let report = sen_union_gap(rho.operator(), &[support]).unwrap();
    assert!(report.lhs.abs() < 1e-9);

    // random triples of projectors at d = 6
    for _ in 0..300 {
        let sigma = sampling::random_density(6, &mut rng);
        let projs: Vec<Operator> = (0..3)
            .map(|_| {
                let basis = sampling::random_density(6, &mut rng);
                let keep = 1 + (rng.next_u32() as usize) % 5;
                basis.spectrum().projector_onto(|i, _| i < keep)
            })
            .collect();
        let report = sen_union_gap(sigma.operator(), &projs).unwrap();
        assert!(report.satisfied, "{report:?}");
    }
}

#[test]
fn sen_bound_monotonicity_under_appended_tests() {
    let mut rng = ChaCha12Rng::seed_from_u64(5);
    let sigma = sampling::random_density(4, &mut rng);
    let p = sampling::random_density(4, &mut rng)
        .spectrum()
        .projector_onto(|i, _| i < 2);
    let base = sen_union_gap(sigma.operator(), std::slice::from_ref(&p)).unwrap();
    // appending an identity test changes neither side
    let with_id = sen_union_gap(sigma.operator(), &[p.clone(), Operator::identity(4)]).unwrap();
    assert!((base.lhs - with_id.lhs).abs() < 1e-10);
    assert!((base.rhs - with_id.rhs).abs() < 1e-10);
    // appending any test cannot shrink the right-hand side
    let q = sampling::random_density(4, &mut rng)
        .spectrum()
        .projector_onto(|i, _| i < 3);
    let appended = sen_union_gap(sigma.operator(), &[p, q]).unwrap();
    assert!(appended.rhs >= base.rhs - 1e-12);
}

#[test]
fn sen_bound_rejects_non_projectors() {
    let mut rng = ChaCha12Rng::seed_from_u64(6);
    let sigma = sampling::random_density(3, &mut rng);
    let not_projector = Operator::identity(3).scale(0.5);
    assert!(matches!(
        sen_union_gap(sigma.operator(), &[not_projector]),
        Err(Error::BadProjector(_))
    ));
}

#[test]
fn chernoff_deterministic_sampler_never_fails() {
    let mut rng = ChaCha12Rng::seed_from_u64(7);
    let fixed = FixedSampler(Operator::from_real_diagonal(&[0.6, 0.5]));
    let report = operator_chernoff_experiment(&fixed, 20, 0.4, 0.2, 50, &mut rng).unwrap();
    assert_eq!(report.empirical_failure, 0.0);
    assert!(report.satisfied);
}

#[test]
fn chernoff_bernoulli_sampler_within_bound() {
    let mut rng = ChaCha12Rng::seed_from_u64(8);
    let sampler = BernoulliDiagonalSampler {
        probs: vec![0.55, 0.45],
        floor_value: 0.3,
    };
    // M = 200 leaves the bound above one (trivially satisfied)
    let report = operator_chernoff_experiment(&sampler, 200, 0.3, 0.2, 200, &mut rng).unwrap();
    assert!(report.empirical_failure <= report.analytic_bound + tol::LEMMA);
    // M = 800 makes the bound informative and it still holds
    let report = operator_chernoff_experiment(&sampler, 800, 0.3, 0.2, 400, &mut rng).unwrap();
    assert!(
        report.bound_is_informative,
        "bound {}",
        report.analytic_bound
    );
    assert!(
        report.empirical_failure <= report.analytic_bound + tol::LEMMA,
        "{} > {}",
        report.empirical_failure,
        report.analytic_bound
    );
}

#[test]
fn chernoff_vacuous_regime_is_flagged() {
    let mut rng = ChaCha12Rng::seed_from_u64(9);
    let sampler = BernoulliDiagonalSampler {
        probs: vec![0.5, 0.5],
        floor_value: 0.3,
    };
    let report = operator_chernoff_experiment(&sampler, 3, 0.3, 0.2, 50, &mut rng).unwrap();
    assert!(!report.bound_is_informative);
    assert!(report.satisfied, "vacuous bounds pass trivially");
}

#[test]
fn chernoff_rejects_bad_preconditions() {
    let mut rng = ChaCha12Rng::seed_from_u64(10);
    let sampler = BernoulliDiagonalSampler {
        probs: vec![0.5, 0.5],
        floor_value: 0.1,
    };
    // floor above the actual smallest mean eigenvalue
    assert!(matches!(
        operator_chernoff_experiment(&sampler, 10, 0.9, 0.1, 10, &mut rng),
        Err(Error::BadSampler(_))
    ));
    assert!(matches!(
        operator_chernoff_experiment(&sampler, 10, 0.3, 0.7, 10, &mut rng),
        Err(Error::BadSampler(_))
    ));
}

#[test]
fn entropy_closeness_exact_iid() {
    let mut rng = ChaCha12Rng::seed_from_u64(11);
    let sigma = sampling::random_density(2, &mut rng);
    let rho_n = sigma.tensor_power(3);
    let report = entropy_closeness(&rho_n, &sigma, 3).unwrap();
    assert!(report.lhs < 1e-9);
    assert!(report.satisfied);
}

#[test]
fn entropy_closeness_depolarized_perturbation() {
    let mut rng = ChaCha12Rng::seed_from_u64(12);
    let sigma = sampling::random_density(2, &mut rng);
    let iid = sigma.tensor_power(3);
    // mix toward the maximally mixed state
    let mixed = DensityOperator::new(
        iid.operator()
            .scale(0.95)
            .add(&Operator::identity(8).scale(0.05 / 8.0)),
    )
    .unwrap();
    let report = entropy_closeness(&mixed, &sigma, 3).unwrap();
    assert!(report.satisfied, "{report:?}");
}

#[test]
fn entropy_closeness_far_state_is_vacuous() {
    // maximally correlated state vs a far IID target: eps is large and the
    // bound becomes loose but still holds
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let ghz_like = PureState::new(vec![c(s, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(s, 0.0)])
        .unwrap()
        .to_density();
    let sigma = PureState::basis_state(2, 0).to_density();
    let report = entropy_closeness(&ghz_like, &sigma, 2).unwrap();
    assert!(report.satisfied);
    assert!(
        report.rhs > 1.0,
        "bound should be loose, got {}",
        report.rhs
    );
}

#[test]
fn lemma_reports_flag_near_violations_consistently() {
    // satisfied is defined as lhs <= rhs + tol
    let r = LemmaReport::new("x", 1.0, 1.0 - tol::LEMMA / 2.0, String::new());
    assert!(r.satisfied);
    let r = LemmaReport::new("x", 1.0, 1.0 - 2.0 * tol::LEMMA, String::new());
    assert!(!r.satisfied);
}
