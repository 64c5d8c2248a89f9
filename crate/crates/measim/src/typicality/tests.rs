use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha12Rng;

use super::*;
use crate::qcore::trace_norm;
use crate::sampling;

#[test]
fn strong_typicality_basic() {
    let spec = TypicalSetSpec::new(vec![0.5, 0.5], 10, 0.01).unwrap();
    let alternating: Vec<usize> = (0..10).map(|i| i % 2).collect();
    assert!(is_strongly_typical(&alternating, &spec).unwrap());
    let zeros = vec![0usize; 10];
    let spec_tight = TypicalSetSpec::new(vec![0.5, 0.5], 10, 0.1).unwrap();
    assert!(!is_strongly_typical(&zeros, &spec_tight).unwrap());
    // direct count oracle: seven 0s in n = 10 vs p = (0.7, 0.3), delta = 0.05
    let spec2 = TypicalSetSpec::new(vec![0.7, 0.3], 10, 0.05).unwrap();
    let mut xn = vec![0usize; 7];
    xn.extend([1, 1, 1]);
    assert!(is_strongly_typical(&xn, &spec2).unwrap());
    assert!(matches!(
        is_strongly_typical(
            &[0, 5],
            &TypicalSetSpec::new(vec![0.5, 0.5], 2, 0.1).unwrap()
        ),
        Err(Error::BadSequence(_))
    ));
}

#[test]
fn typical_mass_binomial_oracle() {
    // p = (1/2, 1/2), n = 10, delta = 0.1: counts of zeros in 4..6
    // binomial oracle: [C(10,4) + C(10,5) + C(10,6)] / 1024 = 672/1024
    let spec = TypicalSetSpec::new(vec![0.5, 0.5], 10, 0.1).unwrap();
    let set = typical_mass(&spec).unwrap();
    let binom = |n: u64, k: u64| -> f64 {
        let mut v = 1.0;
        for i in 0..k {
            v = v * (n - i) as f64 / (i + 1) as f64;
        }
        v
    };
    let oracle = (binom(10, 4) + binom(10, 5) + binom(10, 6)) / 1024.0;
    assert!((oracle - 0.65625).abs() < 1e-12);
    assert!((set.mass - oracle).abs() < 1e-12);
    assert_eq!(set.sequences.len(), 672);
}

#[test]
fn typical_mass_saturates() {
    let spec = TypicalSetSpec::new(vec![0.6, 0.4], 6, 1.0).unwrap();
    let set = typical_mass(&spec).unwrap();
    assert!((set.mass - 1.0).abs() < 1e-12);
    assert_eq!(set.sequences.len(), 64);

    // degenerate n = 1, delta = 0: only exact matches are typical
    let spec = TypicalSetSpec::new(vec![0.5, 0.5], 1, 0.0).unwrap();
    let set = typical_mass(&spec).unwrap();
    assert!(set.sequences.is_empty());
    let spec = TypicalSetSpec::new(vec![1.0, 0.0], 1, 0.0).unwrap();
    let set = typical_mass(&spec).unwrap();
    assert_eq!(set.sequences, vec![vec![0]]);
    assert!((set.mass - 1.0).abs() < 1e-12);
}

#[test]
fn typical_mass_trend_in_n() {
    // monotone trend check along n in {4, 8, 12, 16} at fixed delta
    let mut prev = 0.0;
    for n in [4usize, 8, 12, 16] {
        let spec = TypicalSetSpec::new(vec![0.7, 0.3], n, 0.2).unwrap();
        let set = typical_mass(&spec).unwrap();
        // integer boundary effects allow small dips, never large ones
        assert!(set.mass >= prev - 0.05, "mass dipped at n = {n}");
        prev = set.mass;
    }
    assert!(prev > 0.9);
}

#[test]
fn typical_mass_size_limit() {
    let spec = TypicalSetSpec::new(vec![0.25; 4], 15, 0.1).unwrap();
    assert!(matches!(typical_mass(&spec), Err(Error::SizeLimit(_))));
}

#[test]
fn typical_projector_uniform_spectrum_is_identity() {
    let rho = DensityOperator::maximally_mixed(2);
    let proj = typical_projector(&rho, 3, 0.0).unwrap();
    assert_eq!(proj.rank(), 8);
    assert!(trace_norm(&proj.operator().sub(&Operator::identity(8))).unwrap() < 1e-10);
}

#[test]
fn typical_projector_pure_state_is_rank_one() {
    let mut rng = ChaCha12Rng::seed_from_u64(7);
    let psi = sampling::random_pure_state(2, &mut rng);
    let rho = psi.to_density();
    let proj = typical_projector(&rho, 3, 0.2).unwrap();
    assert_eq!(proj.rank(), 1);
    let triple = psi.tensor(&psi).tensor(&psi);
    let target = Operator::projector(triple.amplitudes());
    assert!(trace_norm(&proj.operator().sub(&target)).unwrap() < 1e-9);
}

#[test]
fn typical_projector_rank_matches_count_oracle() {
    let rho = DensityOperator::from_diagonal(&[0.75, 0.25]).unwrap();
    let n = 8;
    let delta = 0.1;
    let proj = typical_projector(&rho, n, delta).unwrap();
    // enumeration oracle: count index sequences with |k/n - 0.75| <= delta
    let mut count = 0usize;
    for flat in 0..(1usize << n) {
        let zeros = (0..n).filter(|i| (flat >> i) & 1 == 0).count() as f64;
        if (zeros / n as f64 - 0.75).abs() <= delta + 1e-12 {
            count += 1;
        }
    }
    assert_eq!(proj.rank(), count);
    assert!(count > 0);
}

#[test]
fn typical_projector_sandwich_bounds() {
    // 2^{-n[H + c d]} Pi <= Pi rho^n Pi <= 2^{-n[H - c d]} Pi as eigenvalue
    // bounds on the compressed block, with c = |X| = 2
    let rho = DensityOperator::from_diagonal(&[0.75, 0.25]).unwrap();
    for n in [4usize, 6] {
        let delta = 0.15;
        let proj = typical_projector(&rho, n, delta).unwrap();
        let h = crate::qcore::von_neumann_entropy(&rho);
        let c = 2.0;
        let lo = (-(n as f64) * (h + c * delta)).exp2();
        let hi = (-(n as f64) * (h - c * delta)).exp2();
        let big = rho.tensor_power(n);
        let sandwich = proj.operator().mul(big.operator()).mul(proj.operator());
        let spec = sandwich.hermitian_eigs().unwrap();
        let nonzero: Vec<f64> = spec.values.iter().copied().filter(|&v| v > 1e-13).collect();
        assert_eq!(nonzero.len(), proj.rank());
        for v in nonzero {
            assert!(
                v >= lo - 1e-12 && v <= hi + 1e-12,
                "{v} outside [{lo}, {hi}]"
            );
        }
    }
}

#[test]
fn conditionally_typical_projector_cases() {
    let mut rng = ChaCha12Rng::seed_from_u64(11);
    // pure-state ensemble: rank-one product projector
    let psi0 = sampling::random_pure_state(2, &mut rng);
    let psi1 = sampling::random_pure_state(2, &mut rng);
    let ens = Ensemble::new(vec![0.5, 0.5], vec![psi0.to_density(), psi1.to_density()]).unwrap();
    let xn = [0usize, 1, 0];
    let proj = conditionally_typical_projector(&ens, &xn, 0.2).unwrap();
    assert_eq!(proj.rank(), 1);
    let target = Operator::projector(psi0.tensor(&psi1).tensor(&psi0).amplitudes());
    assert!(trace_norm(&proj.operator().sub(&target)).unwrap() < 1e-9);

    // constant sequence: one symbol class covering the block, so the
    // conditional projector is exactly the typical projector of that state
    let rho = DensityOperator::from_diagonal(&[0.8, 0.2]).unwrap();
    let ens = Ensemble::new(vec![0.5, 0.5], vec![rho.clone(), rho.clone()]).unwrap();
    let xn = [0usize, 0, 0, 0];
    let cproj = conditionally_typical_projector(&ens, &xn, 0.3).unwrap();
    let tproj = typical_projector(&rho, 4, 0.3).unwrap();
    assert!(trace_norm(&cproj.operator().sub(tproj.operator())).unwrap() < 1e-9);

    // two-state mixed ensemble at n = 6: high conditional success probability
    let rho0 = DensityOperator::from_diagonal(&[0.9, 0.1]).unwrap();
    let rho1 = DensityOperator::from_diagonal(&[0.2, 0.8]).unwrap();
    let ens = Ensemble::new(vec![0.5, 0.5], vec![rho0.clone(), rho1.clone()]).unwrap();
    let xn = [0usize, 0, 0, 1, 1, 1];
    let proj = conditionally_typical_projector(&ens, &xn, 0.34).unwrap();
    let mut joint = Operator::identity(1);
    for &x in &xn {
        joint = joint.tensor(ens.state(x).operator());
    }
    let succ = proj.operator().mul(&joint).trace().re;
    assert!(succ >= 0.8, "Tr(Pi rho_xn) = {succ}");
}

#[test]
fn pruned_distribution_cases() {
    // large delta: pruned equals the IID distribution
    let spec = TypicalSetSpec::new(vec![0.6, 0.4], 4, 1.0).unwrap();
    let pd = pruned(&spec).unwrap();
    assert!((pd.mass() - 1.0).abs() < 1e-12);
    for i in 0..pd.len() {
        let xn = pd.sequence(i).to_vec();
        assert!((pd.probability(i) - spec.sequence_probability(&xn)).abs() < 1e-12);
    }

    // binary n = 10, delta = 0.1: each typical sequence has mass (1/1024)/S
    let spec = TypicalSetSpec::new(vec![0.5, 0.5], 10, 0.1).unwrap();
    let pd = pruned(&spec).unwrap();
    let expected = (1.0 / 1024.0) / 0.65625;
    for i in 0..pd.len() {
        assert!((pd.probability(i) - expected).abs() < 1e-12);
    }

    // empty typical set
    let spec = TypicalSetSpec::new(vec![0.5, 0.5], 1, 0.0).unwrap();
    assert!(matches!(pruned(&spec), Err(Error::EmptyTypicalSet)));
}

#[test]
fn pruned_sampling_follows_pruned_pmf() {
    let spec = TypicalSetSpec::new(vec![0.7, 0.3], 6, 0.15).unwrap();
    let pd = pruned(&spec).unwrap();
    let mut rng = ChaCha12Rng::seed_from_u64(123);
    let draws = 20_000usize;
    let mut counts = vec![0usize; pd.len()];
    for _ in 0..draws {
        let xn = pd.sample(&mut rng);
        let idx = pd.set().index_of(&xn).expect("samples are typical");
        counts[idx] += 1;
    }
    // chi-square against the pruned pmf: statistic within 4 sigma of dof
    let mut chi2 = 0.0;
    for i in 0..pd.len() {
        let expected = pd.probability(i) * draws as f64;
        chi2 += (counts[i] as f64 - expected).powi(2) / expected;
    }
    let dof = (pd.len() - 1) as f64;
    assert!(
        chi2 < dof + 4.0 * (2.0 * dof).sqrt(),
        "chi2 = {chi2}, dof = {dof}"
    );
}

#[test]
fn pruned_average_operator_inequality() {
    // E_pruned[rho_Xn] <= (1 - eps)^{-1} rho^(x)n with eps = 1 - S
    let mut rng = ChaCha12Rng::seed_from_u64(31);
    for _ in 0..10 {
        let k = 2 + (rng.next_u32() as usize) % 2;
        let pmf: Vec<f64> = {
            let raw: Vec<f64> = (0..k).map(|_| rng.random::<f64>() + 0.1).collect();
            let t: f64 = raw.iter().sum();
            raw.iter().map(|v| v / t).collect()
        };
        let states: Vec<DensityOperator> = (0..k)
            .map(|_| sampling::random_density(2, &mut rng))
            .collect();
        let ens = Ensemble::new(pmf.clone(), states).unwrap();
        let n = 4;
        let spec = TypicalSetSpec::new(pmf, n, 0.25).unwrap();
        let Ok(pd) = pruned(&spec) else { continue };
        let mut avg = Operator::zeros(1 << n);
        for i in 0..pd.len() {
            let mut prod = Operator::identity(1);
            for &x in pd.sequence(i) {
                prod = prod.tensor(ens.state(x).operator());
            }
            avg = avg.add(&prod.scale(pd.probability(i)));
        }
        let bound = ens.average_state().tensor_power(n);
        let gap = bound.operator().scale(1.0 / pd.mass()).sub(&avg);
        let min = gap
            .hermitian_eigs()
            .unwrap()
            .values
            .last()
            .copied()
            .unwrap();
        assert!(min >= -1e-10, "operator inequality violated: {min}");
    }
}

#[test]
fn cutoff_projector_cases() {
    let mut rng = ChaCha12Rng::seed_from_u64(41);
    let g = sampling::random_complex_matrix(3, &mut rng);
    let psd = g.mul(&g.dagger());
    // threshold 0: support projector
    let proj = cutoff_projector(&psd, 0.0).unwrap();
    assert_eq!(proj.rank(), 3);
    // threshold above the top eigenvalue: zero projector
    let top = psd.hermitian_eigs().unwrap().values[0];
    let proj = cutoff_projector(&psd, top * 2.0).unwrap();
    assert_eq!(proj.rank(), 0);
    assert!(trace_norm(proj.operator()).unwrap() < 1e-12);
    // diag(0.5, 0.3, 0.01) at threshold 0.1 keeps the first two
    let diag = Operator::from_real_diagonal(&[0.5, 0.3, 0.01]);
    let proj = cutoff_projector(&diag, 0.1).unwrap();
    assert_eq!(proj.rank(), 2);
    assert!((proj.operator().get(0, 0).re - 1.0).abs() < 1e-12);
    assert!((proj.operator().get(2, 2).re).abs() < 1e-12);
    // commutes with its input
    let comm = proj.operator().mul(&diag).sub(&diag.mul(proj.operator()));
    assert!(trace_norm(&comm).unwrap() < 1e-10);
    // trace accounting: Tr{Pi xi Pi} >= Tr{xi} - threshold * dim
    let kept = proj.operator().mul(&diag).mul(proj.operator()).trace().re;
    assert!(kept >= diag.trace().re - 0.1 * 3.0);

    assert!(matches!(
        cutoff_projector(&Operator::from_real_diagonal(&[1.0, -0.5]), 0.0),
        Err(Error::NotPsd(_))
    ));
}

#[test]
fn cutoff_commutes_on_random_psd() {
    let mut rng = ChaCha12Rng::seed_from_u64(53);
    for _ in 0..10 {
        let g = sampling::random_complex_matrix(4, &mut rng);
        let psd = g.mul(&g.dagger());
        let spec = psd.hermitian_eigs().unwrap();
        let thr = spec.values[1].max(0.0) * 0.9;
        let proj = cutoff_projector(&psd, thr).unwrap();
        let comm = proj.operator().mul(&psd).sub(&psd.mul(proj.operator()));
        assert!(comm.spectral_norm().unwrap() < 1e-8 * psd.max_abs_entry().max(1.0));
    }
}

#[test]
fn conditional_rank_bound_holds_for_balanced_spectra() {
    // the declared-constant bound 2^{n [H(B|X) + c delta]} with c = |X| is
    // checked on ensembles whose spectra stay away from zero
    let rho0 = DensityOperator::from_diagonal(&[0.75, 0.25]).unwrap();
    let rho1 = DensityOperator::from_diagonal(&[0.6, 0.4]).unwrap();
    let ens = Ensemble::new(vec![0.5, 0.5], vec![rho0, rho1]).unwrap();
    for delta in [0.15, 0.25, 0.4] {
        for xn in [vec![0usize, 1, 0, 1], vec![0, 0, 1, 1, 0, 1]] {
            let proj = conditionally_typical_projector(&ens, &xn, delta).unwrap();
            let bound = conditional_rank_bound(&ens, &xn, delta);
            assert!(
                (proj.rank() as f64) <= bound * (1.0 + 1e-9),
                "rank {} > bound {bound} at delta {delta}",
                proj.rank()
            );
        }
    }
}
