use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha12Rng;

use super::*;
use crate::qcore::{canonical_purification, trace_norm, von_neumann_entropy, PureState};
use crate::sampling;

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub(crate) fn bb84_povm() -> Povm {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let kets = [
        vec![c(1.0, 0.0), c(0.0, 0.0)],
        vec![c(0.0, 0.0), c(1.0, 0.0)],
        vec![c(s, 0.0), c(s, 0.0)],
        vec![c(s, 0.0), c(-s, 0.0)],
    ];
    let elements = kets
        .iter()
        .map(|k| Operator::projector(k).scale(0.5))
        .collect();
    let labels = vec!["0".into(), "1".into(), "+".into(), "-".into()];
    Povm::new(elements, labels).unwrap()
}

fn z_povm() -> Povm {
    Povm::projective(
        &[
            vec![c(1.0, 0.0), c(0.0, 0.0)],
            vec![c(0.0, 0.0), c(1.0, 0.0)],
        ],
        vec!["0".into(), "1".into()],
    )
    .unwrap()
}

fn x_povm() -> Povm {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    Povm::projective(
        &[vec![c(s, 0.0), c(s, 0.0)], vec![c(s, 0.0), c(-s, 0.0)]],
        vec!["+".into(), "-".into()],
    )
    .unwrap()
}

#[test]
fn born_bb84_on_maximally_mixed() {
    let pmf = born_distribution(&bb84_povm(), &DensityOperator::maximally_mixed(2)).unwrap();
    for p in pmf {
        assert!((p - 0.25).abs() < 1e-12);
    }
}

#[test]
fn born_trivial_and_diagonal() {
    let rho = DensityOperator::from_diagonal(&[0.75, 0.25]).unwrap();
    let pmf = born_distribution(&Povm::identity_povm(2), &rho).unwrap();
    assert!((pmf[0] - 1.0).abs() < 1e-12);
    let pmf = born_distribution(&z_povm(), &rho).unwrap();
    assert!((pmf[0] - 0.75).abs() < 1e-12 && (pmf[1] - 0.25).abs() < 1e-12);
    let qutrit = DensityOperator::maximally_mixed(3);
    assert!(matches!(
        born_distribution(&z_povm(), &qutrit),
        Err(Error::DimMismatch(_))
    ));
}

fn bell() -> (DensityOperator, SystemLayout) {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let psi = PureState::new(vec![c(s, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(s, 0.0)]).unwrap();
    (
        psi.to_density(),
        SystemLayout::new(&["R", "A"], &[2, 2]).unwrap(),
    )
}

#[test]
fn post_measurement_bb84_on_bell() {
    let (bell, layout) = bell();
    let cq = post_measurement_cq(&bb84_povm(), &bell, &layout, "A").unwrap();
    // the four-block quarter-weighted state: conditionals |0>,|1>,|+>,|->
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let expected = [
        vec![c(1.0, 0.0), c(0.0, 0.0)],
        vec![c(0.0, 0.0), c(1.0, 0.0)],
        vec![c(s, 0.0), c(s, 0.0)],
        vec![c(s, 0.0), c(-s, 0.0)],
    ];
    for x in 0..4 {
        assert!((cq.weight(x) - 0.25).abs() < 1e-12);
        let target = Operator::projector(&expected[x]);
        assert!(trace_norm(&cq.conditional(x).sub(&target)).unwrap() < 1e-10);
    }
}

#[test]
fn post_measurement_product_state_has_constant_reference() {
    let mut rng = ChaCha12Rng::seed_from_u64(1);
    let rho_r = sampling::random_density(2, &mut rng);
    let phi = sampling::random_pure_state(2, &mut rng).to_density();
    let joint = rho_r.tensor(&phi);
    let layout = SystemLayout::new(&["R", "A"], &[2, 2]).unwrap();
    let cq = post_measurement_cq(&bb84_povm(), &joint, &layout, "A").unwrap();
    for x in 0..cq.len() {
        if cq.weight(x) > 1e-9 {
            assert!(trace_norm(&cq.conditional(x).sub(rho_r.operator())).unwrap() < 1e-9);
        }
    }
}

#[test]
fn post_measurement_z_on_pure_correlated() {
    // sqrt(0.75)|00> + sqrt(0.25)|11>; brute-force 4x4 oracle values
    let psi = PureState::new(vec![
        c(0.75f64.sqrt(), 0.0),
        c(0.0, 0.0),
        c(0.0, 0.0),
        c(0.25f64.sqrt(), 0.0),
    ])
    .unwrap();
    let layout = SystemLayout::new(&["R", "A"], &[2, 2]).unwrap();
    let cq = post_measurement_cq(&z_povm(), &psi.to_density(), &layout, "A").unwrap();
    assert!((cq.weight(0) - 0.75).abs() < 1e-12);
    assert!((cq.weight(1) - 0.25).abs() < 1e-12);
    let p0 = Operator::projector(&[c(1.0, 0.0), c(0.0, 0.0)]);
    let p1 = Operator::projector(&[c(0.0, 0.0), c(1.0, 0.0)]);
    assert!(trace_norm(&cq.conditional(0).sub(&p0)).unwrap() < 1e-10);
    assert!(trace_norm(&cq.conditional(1).sub(&p1)).unwrap() < 1e-10);
}

#[test]
fn transpose_trick_direct_oracle() {
    // rho = I/2, Lambda = |0><0|/2: block should be |0><0|/4 (2x2 multiply oracle)
    let rho = DensityOperator::maximally_mixed(2);
    let povm = bb84_povm();
    let cq = transpose_trick_states(&rho, &povm).unwrap();
    let target = Operator::projector(&[c(1.0, 0.0), c(0.0, 0.0)]).scale(0.25);
    assert!(trace_norm(&cq.weighted_block(0).sub(&target)).unwrap() < 1e-12);
}

#[test]
fn transpose_trick_commuting_povm() {
    let rho = DensityOperator::from_diagonal(&[0.75, 0.25]).unwrap();
    let cq = transpose_trick_states(&rho, &z_povm()).unwrap();
    // commuting case: p(x) theta_x = rho Lambda_x elementwise on the diagonal
    assert!((cq.weighted_block(0).get(0, 0).re - 0.75).abs() < 1e-12);
    assert!((cq.weighted_block(1).get(1, 1).re - 0.25).abs() < 1e-12);
}

#[test]
fn transpose_trick_matches_purification_route() {
    let mut rng = ChaCha12Rng::seed_from_u64(5);
    for _ in 0..20 {
        let d = 2 + (rng.next_u32() as usize) % 3; // up to 4
        let rho = sampling::random_density(d, &mut rng);
        let povm = sampling::random_povm(d, 3, &mut rng).unwrap();
        let direct = transpose_trick_states(&rho, &povm).unwrap();
        let (phi, layout) = canonical_purification(&rho);
        let via_purification = post_measurement_cq(&povm, &phi.to_density(), &layout, "A").unwrap();
        for x in 0..povm.len() {
            let diff = direct
                .weighted_block(x)
                .sub(via_purification.weighted_block(x));
            assert!(trace_norm(&diff).unwrap() < 1e-9);
        }
    }
}

#[test]
fn measurement_map_entropy_matches_born() {
    let rho = DensityOperator::maximally_mixed(2);
    let map = MeasurementMap::new(bb84_povm());
    let out = map.apply(&rho).unwrap();
    assert_eq!(out.len(), 4);
    let born = born_distribution(&bb84_povm(), &rho).unwrap();
    assert!((out.h_classical() - shannon_entropy(&born)).abs() < 1e-12);

    let id = MeasurementMap::new(Povm::identity_povm(3));
    let out = id.apply(&DensityOperator::maximally_mixed(3)).unwrap();
    assert_eq!(out.len(), 1);
    assert!((out.weight(0) - 1.0).abs() < 1e-12);
}

#[test]
fn tensor_povm_cases() {
    let z = z_povm();
    let t1 = tensor_povm(&z, 1).unwrap();
    for x in 0..2 {
        assert!(trace_norm(&t1.element(x).sub(z.element(x))).unwrap() < 1e-12);
    }
    let t2 = tensor_povm(&z, 2).unwrap();
    assert_eq!(t2.len(), 4);
    for x in 0..4 {
        let spec = t2.element(x).hermitian_eigs().unwrap();
        assert!((spec.values[0] - 1.0).abs() < 1e-12 && spec.values[1].abs() < 1e-12);
    }
    // product-pmf oracle
    let mut rng = ChaCha12Rng::seed_from_u64(9);
    let rho = sampling::random_density(2, &mut rng);
    let povm = bb84_povm();
    let single = born_distribution(&povm, &rho).unwrap();
    let double = born_distribution(&tensor_povm(&povm, 2).unwrap(), &rho.tensor_power(2)).unwrap();
    for (i, p) in double.iter().enumerate() {
        let expected = single[i / 4] * single[i % 4];
        assert!((p - expected).abs() < 1e-10);
    }
}

#[test]
fn tensor_povm_size_limit() {
    let povm = bb84_povm();
    assert!(matches!(tensor_povm(&povm, 15), Err(Error::SizeLimit(_))));
}

#[test]
fn convex_combination_recovers_bb84() {
    // relabel Z and X measurements over the four-symbol alphabet
    let zero2 = Operator::zeros(2);
    let z4 = Povm::new(
        vec![
            z_povm().element(0).clone(),
            z_povm().element(1).clone(),
            zero2.clone(),
            zero2.clone(),
        ],
        vec!["0".into(), "1".into(), "+".into(), "-".into()],
    )
    .unwrap();
    let x4 = Povm::new(
        vec![
            zero2.clone(),
            zero2.clone(),
            x_povm().element(0).clone(),
            x_povm().element(1).clone(),
        ],
        vec!["0".into(), "1".into(), "+".into(), "-".into()],
    )
    .unwrap();
    let mixed = convex_combine(&[z4, x4], &[0.5, 0.5]).unwrap();
    let bb84 = bb84_povm();
    for x in 0..4 {
        assert!(trace_norm(&mixed.element(x).sub(bb84.element(x))).unwrap() < 1e-12);
    }
    // single POVM with weight one is the identity transformation
    let same = convex_combine(&[bb84_povm()], &[1.0]).unwrap();
    for x in 0..4 {
        assert!(trace_norm(&same.element(x).sub(bb84.element(x))).unwrap() < 1e-12);
    }
    assert!(matches!(
        convex_combine(&[bb84_povm()], &[0.7]),
        Err(Error::BadPmf(_))
    ));
}

#[test]
fn born_linearity_under_convex_combination() {
    let mut rng = ChaCha12Rng::seed_from_u64(33);
    let rho = sampling::random_density(2, &mut rng);
    let a = sampling::random_povm(2, 3, &mut rng).unwrap();
    let b = sampling::random_povm(2, 3, &mut rng).unwrap();
    let relabel = |p: &Povm| {
        Povm::new(
            p.elements().to_vec(),
            vec!["0".into(), "1".into(), "2".into()],
        )
        .unwrap()
    };
    let (a, b) = (relabel(&a), relabel(&b));
    let mixed = convex_combine(&[a.clone(), b.clone()], &[0.3, 0.7]).unwrap();
    let pa = born_distribution(&a, &rho).unwrap();
    let pb = born_distribution(&b, &rho).unwrap();
    let pm = born_distribution(&mixed, &rho).unwrap();
    for x in 0..3 {
        assert!((pm[x] - (0.3 * pa[x] + 0.7 * pb[x])).abs() < 1e-12);
    }
}

#[test]
fn refinement_identity_and_coarse_graining() {
    let bb84 = bb84_povm();
    let trivial = Refinement::trivial(&bb84);
    let rec = apply_refinement(&trivial).unwrap();
    for x in 0..4 {
        assert!(trace_norm(&rec.element(x).sub(bb84.element(x))).unwrap() < 1e-12);
    }
    trivial.check_reconstructs(&bb84).unwrap();

    // pure-noise POVM from a single internal outcome
    let noise = Refinement::new(
        Povm::identity_povm(2),
        vec![vec![0.25, 0.25, 0.25, 0.25]],
        vec!["a".into(), "b".into(), "c".into(), "d".into()],
    )
    .unwrap();
    let flat = apply_refinement(&noise).unwrap();
    for x in 0..4 {
        let target = Operator::identity(2).scale(0.25);
        assert!(trace_norm(&flat.element(x).sub(&target)).unwrap() < 1e-12);
    }

    // coarse-grain a 4-outcome projective measurement into 2 outcomes
    let z2 = tensor_povm(&z_povm(), 2).unwrap();
    let coarse = Refinement::new(
        z2.clone(),
        vec![
            vec![1.0, 0.0],
            vec![1.0, 0.0],
            vec![0.0, 1.0],
            vec![0.0, 1.0],
        ],
        vec!["low".into(), "high".into()],
    )
    .unwrap();
    let out = apply_refinement(&coarse).unwrap();
    // direct summation oracle
    let first = z2.element(0).add(z2.element(1));
    let second = z2.element(2).add(z2.element(3));
    assert!(trace_norm(&out.element(0).sub(&first)).unwrap() < 1e-12);
    assert!(trace_norm(&out.element(1).sub(&second)).unwrap() < 1e-12);
}

#[test]
fn rank_one_detection() {
    assert!(is_rank_one_povm(&bb84_povm(), tol::RANK).unwrap());
    let half = Povm::new(
        vec![
            Operator::identity(2).scale(0.5),
            Operator::identity(2).scale(0.5),
        ],
        vec!["0".into(), "1".into()],
    )
    .unwrap();
    assert!(!is_rank_one_povm(&half, tol::RANK).unwrap());
    // projective qutrit measurement with one rank-2 element
    let e0 = Operator::projector(&[c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)]);
    let rest = Operator::identity(3).sub(&e0);
    let povm = Povm::new(vec![e0, rest], vec!["0".into(), "rest".into()]).unwrap();
    assert!(!is_rank_one_povm(&povm, tol::RANK).unwrap());
}

fn lueders_z() -> QuantumInstrument {
    QuantumInstrument::new(vec![
        (
            "0".into(),
            vec![Operator::projector(&[c(1.0, 0.0), c(0.0, 0.0)])],
        ),
        (
            "1".into(),
            vec![Operator::projector(&[c(0.0, 0.0), c(1.0, 0.0)])],
        ),
    ])
    .unwrap()
}

pub(crate) fn amplitude_damping(gamma: f64) -> QuantumInstrument {
    let k0 = Operator::from_rows(&[
        vec![[1.0, 0.0], [0.0, 0.0]],
        vec![[0.0, 0.0], [(1.0 - gamma).sqrt(), 0.0]],
    ])
    .unwrap();
    let k1 = Operator::from_rows(&[
        vec![[0.0, 0.0], [gamma.sqrt(), 0.0]],
        vec![[0.0, 0.0], [0.0, 0.0]],
    ])
    .unwrap();
    QuantumInstrument::new(vec![("keep".into(), vec![k0]), ("decay".into(), vec![k1])]).unwrap()
}

#[test]
fn instrument_apply_cases() {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let plus = PureState::new(vec![c(s, 0.0), c(s, 0.0)])
        .unwrap()
        .to_density();
    let cq = instrument_apply(&lueders_z(), &plus).unwrap();
    assert!((cq.weight(0) - 0.5).abs() < 1e-12 && (cq.weight(1) - 0.5).abs() < 1e-12);
    let p0 = Operator::projector(&[c(1.0, 0.0), c(0.0, 0.0)]);
    assert!(trace_norm(&cq.conditional(0).sub(&p0)).unwrap() < 1e-10);

    // single-outcome unitary instrument
    let mut rng = ChaCha12Rng::seed_from_u64(2);
    let u = sampling::random_unitary(2, &mut rng);
    let rho = sampling::random_density(2, &mut rng);
    let unitary = QuantumInstrument::new(vec![("u".into(), vec![u.clone()])]).unwrap();
    let cq = instrument_apply(&unitary, &rho).unwrap();
    assert!((cq.weight(0) - 1.0).abs() < 1e-10);
    let rotated = u.mul(rho.operator()).mul(&u.dagger());
    assert!(trace_norm(&cq.conditional(0).sub(&rotated)).unwrap() < 1e-10);

    // Kraus algebra oracle Tr{N^dag N rho} for amplitude damping at gamma = 0.3
    let cq = instrument_apply(
        &amplitude_damping(0.3),
        &DensityOperator::maximally_mixed(2),
    )
    .unwrap();
    assert!((cq.weight(0) - 0.85).abs() < 1e-12);
    assert!((cq.weight(1) - 0.15).abs() < 1e-12);
}

#[test]
fn instrument_effects_match_born() {
    // dropping the quantum factor reproduces the Born rule of {sum_y N^dag N}
    let mut rng = ChaCha12Rng::seed_from_u64(8);
    let rho = sampling::random_density(2, &mut rng);
    let instr = amplitude_damping(0.42);
    let cq = instrument_apply(&instr, &rho).unwrap();
    let effects: Vec<Operator> = (0..instr.outcomes()).map(|x| instr.effect(x)).collect();
    let povm = Povm::new(effects, vec!["keep".into(), "decay".into()]).unwrap();
    let born = born_distribution(&povm, &rho).unwrap();
    for x in 0..2 {
        assert!((cq.weight(x) - born[x]).abs() < 1e-10);
    }
}

fn pauli_mixture(probs: [f64; 4]) -> QuantumInstrument {
    let paulis = [
        Operator::identity(2),
        Operator::from_rows(&[vec![[0.0, 0.0], [1.0, 0.0]], vec![[1.0, 0.0], [0.0, 0.0]]]).unwrap(),
        Operator::from_rows(&[vec![[0.0, 0.0], [0.0, -1.0]], vec![[0.0, 1.0], [0.0, 0.0]]])
            .unwrap(),
        Operator::from_rows(&[vec![[1.0, 0.0], [0.0, 0.0]], vec![[0.0, 0.0], [-1.0, 0.0]]])
            .unwrap(),
    ];
    let families = paulis
        .iter()
        .zip(probs.iter())
        .enumerate()
        .map(|(i, (p, &w))| (i.to_string(), vec![p.scale(w.sqrt())]))
        .collect();
    QuantumInstrument::new(families).unwrap()
}

#[test]
fn random_unitary_criterion() {
    let rho = DensityOperator::maximally_mixed(2);
    let dep = pauli_mixture([0.25, 0.25, 0.25, 0.25]);
    assert!(is_random_unitary_kraus(&dep, &rho).unwrap());
    let (cq, _) = instrument_reference_cq(&dep, &rho).unwrap();
    assert!(cq.mutual_information().unwrap() < 1e-9);

    // amplitude damping fails: N_0^dag N_0 = diag(1, 1-gamma) not prop. to I
    let ad = amplitude_damping(0.3);
    assert!(!is_random_unitary_kraus(&ad, &rho).unwrap());

    let multi = QuantumInstrument::new(vec![(
        "both".into(),
        vec![
            Operator::projector(&[c(1.0, 0.0), c(0.0, 0.0)]),
            Operator::projector(&[c(0.0, 0.0), c(1.0, 0.0)]),
        ],
    )])
    .unwrap();
    assert!(matches!(
        is_random_unitary_kraus(&multi, &rho),
        Err(Error::Unsupported(_))
    ));
}

#[test]
fn groenewold_gain_cases() {
    let mut rng = ChaCha12Rng::seed_from_u64(4);
    let u = sampling::random_unitary(2, &mut rng);
    let rho = sampling::random_density(2, &mut rng);
    let unitary = QuantumInstrument::new(vec![("u".into(), vec![u])]).unwrap();
    assert!(groenewold_gain(&rho, &unitary).unwrap().abs() < 1e-10);

    // Lueders Z on diag(p, 1-p): gain = H2(p), matching I(X;R)
    let p = 0.3;
    let rho = DensityOperator::from_diagonal(&[p, 1.0 - p]).unwrap();
    let gain = groenewold_gain(&rho, &lueders_z()).unwrap();
    let h2 = -(p * p.log2() + (1.0 - p) * (1.0 - p).log2());
    assert!((gain - h2).abs() < 1e-10);
    let (cq, _) = instrument_reference_cq(&lueders_z(), &rho).unwrap();
    assert!((gain - cq.mutual_information().unwrap()).abs() < 1e-8);
}

#[test]
fn groenewold_matches_information_gain_for_single_kraus() {
    let mut rng = ChaCha12Rng::seed_from_u64(77);
    for _ in 0..25 {
        let d = 2 + (rng.next_u32() as usize) % 2;
        let rho = sampling::random_density(d, &mut rng);
        let instr = sampling_random_single_kraus(d, 3, &mut rng);
        let gain = groenewold_gain(&rho, &instr).unwrap();
        let (cq, _) = instrument_reference_cq(&instr, &rho).unwrap();
        assert!((gain - cq.mutual_information().unwrap()).abs() < 1e-8);
    }
}

/// Random single-Kraus instrument: K_x = U_x sqrt(E_x) for a random POVM {E_x}.
pub(crate) fn sampling_random_single_kraus(
    dim: usize,
    outcomes: usize,
    rng: &mut impl rand::Rng,
) -> QuantumInstrument {
    let povm = sampling::random_povm(dim, outcomes, rng).unwrap();
    let families = (0..outcomes)
        .map(|x| {
            let (sqrt, _) = crate::qcore::psd_sqrt_and_pinv_sqrt(povm.element(x), 1e-14).unwrap();
            let u = sampling::random_unitary(dim, rng);
            (x.to_string(), vec![u.mul(&sqrt)])
        })
        .collect();
    QuantumInstrument::new(families).unwrap()
}

#[test]
fn born_pmf_sums_to_one_on_random_instances() {
    let mut rng = ChaCha12Rng::seed_from_u64(55);
    for _ in 0..30 {
        let d = 2 + (rng.next_u32() as usize) % 3;
        let rho = sampling::random_density(d, &mut rng);
        let povm = sampling::random_povm(d, 2 + (rng.next_u32() as usize) % 4, &mut rng).unwrap();
        let pmf = born_distribution(&povm, &rho).unwrap();
        assert!((pmf.iter().sum::<f64>() - 1.0).abs() < 1e-9);
    }
}

#[test]
fn zero_probability_outcomes_keep_blocks() {
    // measuring |0><0| with the Z POVM leaves outcome 1 with weight 0
    let rho = PureState::basis_state(2, 0).to_density();
    let cq = transpose_trick_states(&rho, &z_povm()).unwrap();
    assert_eq!(cq.len(), 2);
    assert!(cq.weight(1).abs() < 1e-12);
    assert!(trace_norm(&cq.conditional(1)).unwrap() < 1e-12);
    let vn = von_neumann_entropy(&rho);
    assert!(vn.abs() < 1e-12);
}

#[test]
fn map_valued_refinement_reduces_to_effects() {
    // a dephasing-style instrument as the internal decomposition
    let p0 = Operator::projector(&[c(1.0, 0.0), c(0.0, 0.0)]);
    let p1 = Operator::projector(&[c(0.0, 0.0), c(1.0, 0.0)]);
    let families = vec![
        (
            "w0".to_string(),
            vec![p0.scale(0.8f64.sqrt()), p1.scale(0.8f64.sqrt())],
        ),
        (
            "w1".to_string(),
            vec![p0.scale(0.2f64.sqrt()), p1.scale(0.2f64.sqrt())],
        ),
    ];
    let refinement = Refinement::from_maps(
        families,
        vec![vec![1.0, 0.0], vec![0.0, 1.0]],
        vec!["x0".into(), "x1".into()],
    )
    .unwrap();
    assert!(refinement.is_map_valued());
    // effects are 0.8 I and 0.2 I
    assert!(
        trace_norm(
            &refinement
                .internal_element(0)
                .sub(&Operator::identity(2).scale(0.8))
        )
        .unwrap()
            < 1e-10
    );
    // the induced POVM exists at the effect level
    let target = Povm::new(
        vec![
            Operator::identity(2).scale(0.8),
            Operator::identity(2).scale(0.2),
        ],
        vec!["x0".into(), "x1".into()],
    )
    .unwrap();
    refinement.check_reconstructs(&target).unwrap();
    // but collapsing a map-valued refinement to one POVM is unsupported
    assert!(matches!(
        apply_refinement(&refinement),
        Err(Error::Unsupported(_))
    ));
    // rates still consume it
    let rho = DensityOperator::maximally_mixed(2);
    let union = crate::rates::mc_nonfeedback_region(&rho, &target, &[refinement]).unwrap();
    assert_eq!(union.regions.len(), 2);
    // the noise-only decomposition reaches the origin
    assert!(union.regions[1].corner.0.abs() < 1e-9);
}
