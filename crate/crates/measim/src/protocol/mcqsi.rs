//! Measurement compression with quantum side information, executed end to
//! end: run the compression construction on the `A` side, hash the codeword
//! index, and have the receiver sequentially decode on his `B` systems.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use serde::Serialize;

use super::decode::{sequential_decode, CandidateTest, ReceivedState};
use super::hash::HashFunction;
use super::{build_simulated_povm, sample_codebook, CompressionSetup};
use crate::cq::{born_distribution, post_measurement_cq, Ensemble, Povm};
use crate::error::{Error, Result};
use crate::qcore::{
    partial_trace, permute_systems, trace_norm, DensityOperator, Operator, SystemLayout,
};
use crate::tol;
use crate::typicality::{conditionally_typical_product, typical_projector};

#[derive(Debug, Clone, Serialize)]
pub struct McQsiReport {
    pub n: usize,
    pub l_size: usize,
    pub m_size: usize,
    pub hash_bins: u64,
    pub hash_rate: f64,
    pub delta: f64,
    pub eps: f64,
    pub trials: usize,
    pub seed: u64,
    /// B-side faithfulness of the simulated measurement.
    pub delta_c: f64,
    pub decode_error_rate: f64,
    pub decode_error_sigma: f64,
    /// Trials aborted because the completion outcome fired.
    pub completion_rate: f64,
    /// Mean trace distance between the recovered B-state and the ideal
    /// post-measurement state (2 per failed trial).
    pub end_to_end_distance: f64,
    /// Decode-error bound with measured typicality masses.
    pub analytic_bound: f64,
    pub measured_eps: f64,
    pub i_x_r_given_b: f64,
    pub chernoff_em_ok: Vec<bool>,
    pub chernoff_e0_ok: bool,
}

pub struct McQsiParams {
    pub n: usize,
    pub l_size: usize,
    pub m_size: usize,
    pub hash_rate: f64,
    pub delta: f64,
    pub eps: f64,
    pub trials: usize,
    pub seed: u64,
}

/// Run the MC-QSI protocol on the `measured` factor of a bipartite state.
pub fn simulate_mcqsi(
    rho_ab: &DensityOperator,
    layout: &SystemLayout,
    povm: &Povm,
    measured: &str,
    side: &str,
    params: &McQsiParams,
) -> Result<McQsiReport> {
    layout.check_operator(rho_ab.operator())?;
    let d_a = layout.dim_of(measured)?;
    let d_b = layout.dim_of(side)?;
    if povm.dim() != d_a {
        return Err(Error::DimMismatch(
            "POVM must act on the measured factor".into(),
        ));
    }
    let n = params.n;
    tol::check_operator_dim((d_a * d_b).checked_pow(n as u32), "MC-QSI joint block")?;

    let (rho_a_op, _) = partial_trace(rho_ab.operator(), layout, &[measured])?;
    let rho_a = DensityOperator::new(rho_a_op)?;
    let setup = CompressionSetup::new(&rho_a, povm, n, params.delta, params.eps)?;
    let cb = sample_codebook(
        setup.outcome_pmf(),
        n,
        params.l_size,
        params.m_size,
        params.delta,
        params.seed,
    )?;
    let sim = build_simulated_povm(&setup, &cb)?;

    // n copies of rho_AB, permuted into (A-block, B-block)
    let per_copy = SystemLayout::new(&[measured, side], &[d_a, d_b])?;
    let (rho_ab_std, _) = permute_systems(rho_ab.operator(), layout, &[measured, side])?;
    let copies = DensityOperator::new(rho_ab_std)?.tensor_power(n);
    let copies_layout = per_copy.tensor_power(n);
    let mut order: Vec<String> = Vec::new();
    for k in 0..n {
        order.push(format!("{measured}{k}"));
    }
    for k in 0..n {
        order.push(format!("{side}{k}"));
    }
    let order_refs: Vec<&str> = order.iter().map(|s| s.as_str()).collect();
    let (big, big_layout) = permute_systems(copies.operator(), &copies_layout, &order_refs)?;
    let _a_block: Vec<&str> = order_refs[..n].to_vec();
    let b_block: Vec<&str> = order_refs[n..].to_vec();

    // outcome probabilities and post-measurement B states per (l, m)
    let d_bn = d_b.pow(n as u32);
    let identity_b = Operator::identity(d_bn);
    let mut q = vec![vec![0.0f64; cb.l_size()]; cb.m_size()];
    let mut post_b: Vec<Vec<Operator>> = vec![Vec::new(); cb.m_size()];
    for m in 0..cb.m_size() {
        for l in 0..cb.l_size() {
            let effect_big = sim.effect(l, m).tensor(&identity_b);
            let moved = effect_big.mul(&big);
            let (reduced, _) = partial_trace(&moved, &big_layout, &b_block)?;
            let w = reduced.trace().re.max(0.0);
            q[m][l] = w;
            post_b[m].push(if w > tol::TRACE {
                reduced.scale(1.0 / w).hermitized()
            } else {
                Operator::zeros(d_bn)
            });
        }
    }

    // ideal per-symbol post-measurement states on B
    let single_cq = post_measurement_cq(povm, rho_ab, layout, measured)?;
    let single_reduced = single_cq.reduce(&[side])?;
    let ideal_b: Vec<DensityOperator> = (0..povm.len())
        .map(|x| {
            let c = single_reduced.conditional(x);
            if c.trace().re > 0.5 {
                DensityOperator::new(c)
            } else {
                Ok(DensityOperator::maximally_mixed(d_b))
            }
        })
        .collect::<Result<_>>()?;
    let pmf = born_distribution(povm, &rho_a)?;
    let b_ensemble = Ensemble::new(pmf.clone(), ideal_b.clone())?;
    let ideal_b_product = |xn: &[usize]| -> Operator {
        let mut out = Operator::identity(1);
        for &x in xn {
            out = out.tensor(ideal_b[x].operator());
        }
        out
    };

    // B-side faithfulness: codebook terms plus the untouched remainder mass
    let mut delta_c = 0.0;
    let mut covered_mass = 0.0;
    let m_weight = 1.0 / cb.m_size() as f64;
    for xn in cb.distinct_sequences() {
        let p = setup.sequence_probability(&xn);
        covered_mass += p;
        let mut sim_block = Operator::zeros(d_bn);
        for m in 0..cb.m_size() {
            for l in 0..cb.l_size() {
                if cb.entry(l, m) == xn.as_slice() {
                    sim_block = sim_block.add(&post_b[m][l].scale(q[m][l] * m_weight));
                }
            }
        }
        let ideal_block = ideal_b_product(&xn).scale(p);
        delta_c += trace_norm(&ideal_block.sub(&sim_block))?;
    }
    delta_c += 1.0 - covered_mass;

    // measured typicality failure masses on the B side
    let avg_proj = typical_projector(&b_ensemble.average_state(), n, params.delta)?;
    let mut eps_avg = 0.0f64;
    let mut eps_cond = 0.0f64;
    for xn in cb.distinct_sequences() {
        let product = ideal_b_product(&xn);
        eps_avg = eps_avg.max(1.0 - avg_proj.operator().mul(&product).trace().re);
        let cond = conditionally_typical_product(&b_ensemble, &xn, params.delta)?;
        eps_cond = eps_cond.max(1.0 - cond.to_operator().mul(&product).trace().re);
    }
    let measured_eps = (1.0 - setup.typical_mass())
        .max(eps_avg)
        .max(eps_cond)
        .clamp(0.0, 1.0);

    let i_x_r_given_b = crate::rates::mcqsi_feedback_region(rho_ab, layout, povm, measured, side)?
        .corner
        .0;
    let hash_bins = ((n as f64 * params.hash_rate).exp2().ceil() as u64).max(1);
    let e = measured_eps;
    let gap = (1.0 - e).recip()
        * (-(n as f64) * (params.hash_rate - i_x_r_given_b - 10.0 * params.delta)).exp2();
    let analytic_bound = delta_c + e + 2.0 * e.sqrt() + 2.0 * (e + 2.0 * e.sqrt() + gap).sqrt();

    // protocol trials
    let domain_bits = (cb.l_size() as f64).log2().ceil().max(1.0) as u32;
    let mut errors = 0usize;
    let mut completions = 0usize;
    let mut total_distance = 0.0;
    for t in 0..params.trials {
        let mut rng = ChaCha12Rng::seed_from_u64(params.seed);
        rng.set_stream(t as u64 + 1);
        let m = rng.random_range(0..cb.m_size());
        // sample the simulated measurement outcome l (or the completion)
        let u: f64 = rng.random();
        let mut acc = 0.0;
        let mut fired: Option<usize> = None;
        for l in 0..cb.l_size() {
            acc += q[m][l];
            if u < acc {
                fired = Some(l);
                break;
            }
        }
        let Some(l) = fired else {
            completions += 1;
            errors += 1;
            total_distance += 2.0;
            continue;
        };
        // no compression requested: pass the index through unhashed,
        // capping the range at the hash domain
        let hash = if hash_bins >= cb.l_size() as u64 {
            let domain = 1u64 << domain_bits;
            HashFunction::with_coefficients(1, 0, domain_bits, hash_bins.min(domain))?
        } else {
            HashFunction::new(rng.random::<u64>(), domain_bits, hash_bins)?
        };
        let bin = hash.eval(l as u64);
        let mut candidates = Vec::new();
        let mut candidate_l = Vec::new();
        for l2 in 0..cb.l_size() {
            if hash.eval(l2 as u64) == bin {
                let cond =
                    conditionally_typical_product(&b_ensemble, cb.entry(l2, m), params.delta)?;
                candidates.push(CandidateTest::Product(cond));
                candidate_l.push(l2);
            }
        }
        let received = ReceivedState::Mixed(post_b[m][l].clone());
        match sequential_decode(&candidates, &received, &mut rng) {
            Ok(outcome) => {
                let decoded_l = candidate_l[outcome.index];
                if cb.entry(decoded_l, m) != cb.entry(l, m) {
                    errors += 1;
                    total_distance += 2.0;
                } else {
                    let ideal = ideal_b_product(cb.entry(l, m));
                    total_distance += trace_norm(&outcome.post_state.to_operator().sub(&ideal))?;
                }
            }
            Err(Error::DecodeFailure) => {
                errors += 1;
                total_distance += 2.0;
            }
            Err(e) => return Err(e),
        }
    }
    let trials = params.trials.max(1) as f64;
    let decode_error_rate = errors as f64 / trials;
    Ok(McQsiReport {
        n,
        l_size: cb.l_size(),
        m_size: cb.m_size(),
        hash_bins,
        hash_rate: params.hash_rate,
        delta: params.delta,
        eps: params.eps,
        trials: params.trials,
        seed: params.seed,
        delta_c,
        decode_error_rate,
        decode_error_sigma: (decode_error_rate * (1.0 - decode_error_rate) / trials).sqrt(),
        completion_rate: completions as f64 / trials,
        end_to_end_distance: total_distance / trials,
        analytic_bound,
        measured_eps,
        i_x_r_given_b,
        chernoff_em_ok: sim.em_flags().to_vec(),
        chernoff_e0_ok: sim.e0_flag(),
    })
}
