//! Non-feedback simulation: compress the refinement's internal POVM
//! over W-codewords; the receiver locally samples the classical output from
//! the post-processing channel. Faithfulness is measured on the joint
//! (reference, classical output) state.

use serde::Serialize;

use super::{build_simulated_povm, sample_codebook, CompressionSetup};
use crate::cq::{apply_refinement, Refinement};
use crate::error::Result;
use crate::qcore::{trace_norm, DensityOperator, Operator};
use crate::tol;

#[derive(Debug, Clone, Serialize)]
pub struct NonFeedbackReport {
    pub n: usize,
    pub l_size: usize,
    pub m_size: usize,
    pub delta: f64,
    pub eps: f64,
    pub trials: usize,
    pub seed: u64,
    /// Joint (R, X) faithfulness per codebook draw.
    pub delta_joint: Vec<f64>,
    pub mean_delta_joint: f64,
    pub median_delta_joint: f64,
    pub chernoff_failures: usize,
}

pub struct NonFeedbackParams {
    pub n: usize,
    pub l_size: usize,
    pub m_size: usize,
    pub delta: f64,
    pub eps: f64,
    pub trials: usize,
    pub seed: u64,
}

/// Simulate the target POVM without feedback through one refinement; each
/// trial draws a fresh codebook over the internal alphabet.
pub fn simulate_nonfeedback(
    rho: &DensityOperator,
    refinement: &Refinement,
    params: &NonFeedbackParams,
) -> Result<NonFeedbackReport> {
    let NonFeedbackParams {
        n,
        l_size,
        m_size,
        delta,
        eps,
        trials,
        seed,
    } = *params;
    let target = apply_refinement(refinement)?;
    let internal = refinement.internal_povm()?;
    let setup = CompressionSetup::new(rho, &internal, n, delta, eps)?;
    let d = rho.dim();
    let dim_n = d.pow(n as u32);
    tol::check_enumeration(target.len().checked_pow(n as u32), "non-feedback outcomes")?;

    // sqrt(omega) Lambda_xn sqrt(omega) = prod of single-copy sandwiches
    let (rho_sqrt, _) = crate::qcore::psd_sqrt_and_pinv_sqrt(rho.operator(), 1e-14)?;
    let ideal_single: Vec<Operator> = target
        .elements()
        .iter()
        .map(|e| rho_sqrt.mul(e).mul(&rho_sqrt).hermitized())
        .collect();

    let n_x = target.len();
    let outcomes = n_x.pow(n as u32);
    let mut delta_joint = Vec::with_capacity(trials);
    let mut chernoff_failures = 0usize;
    for t in 0..trials {
        let cb = sample_codebook(
            setup.outcome_pmf(),
            n,
            l_size,
            m_size,
            delta,
            seed.wrapping_add(t as u64),
        )?;
        let sim = build_simulated_povm(&setup, &cb)?;
        if !sim.e0_flag() || sim.em_flags().iter().any(|ok| !ok) {
            chernoff_failures += 1;
        }

        // sandwiched simulated effects per (l, m)
        let m_weight = 1.0 / cb.m_size() as f64;
        let mut sandwiched: Vec<Vec<Operator>> = Vec::with_capacity(cb.m_size());
        for m in 0..cb.m_size() {
            let mut row = Vec::with_capacity(cb.l_size());
            for l in 0..cb.l_size() {
                row.push(
                    setup
                        .source_sqrt()
                        .mul(sim.effect(l, m))
                        .mul(setup.source_sqrt())
                        .hermitized(),
                );
            }
            sandwiched.push(row);
        }

        let mut total = 0.0;
        let mut xn = vec![0usize; n];
        for flat in 0..outcomes {
            let mut rem = flat;
            for pos in (0..n).rev() {
                xn[pos] = rem % n_x;
                rem /= n_x;
            }
            let mut ideal = Operator::identity(1);
            for &x in &xn {
                ideal = ideal.tensor(&ideal_single[x]);
            }
            let mut sim_block = Operator::zeros(dim_n);
            for m in 0..cb.m_size() {
                for l in 0..cb.l_size() {
                    let wn = cb.entry(l, m);
                    let weight: f64 = xn
                        .iter()
                        .zip(wn.iter())
                        .map(|(&x, &w)| refinement.post_processing(w, x))
                        .product();
                    if weight > 0.0 {
                        sim_block = sim_block.add(&sandwiched[m][l].scale(weight * m_weight));
                    }
                }
            }
            total += trace_norm(&ideal.sub(&sim_block))?;
        }
        delta_joint.push(total);
    }
    let mean = delta_joint.iter().sum::<f64>() / trials.max(1) as f64;
    let mut sorted = delta_joint.clone();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let median = if sorted.is_empty() {
        0.0
    } else {
        sorted[sorted.len() / 2]
    };
    Ok(NonFeedbackReport {
        n,
        l_size,
        m_size,
        delta,
        eps,
        trials,
        seed,
        delta_joint,
        mean_delta_joint: mean,
        median_delta_joint: median,
        chernoff_failures,
    })
}
