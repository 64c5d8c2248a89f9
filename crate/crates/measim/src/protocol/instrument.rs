//! Instrument simulation for single-Kraus instruments: the codeword POVM is
//! lifted to Kraus operators through the polar decomposition of `N_x sqrt(rho)`.

use serde::Serialize;

use super::{Codebook, CompressionSetup};
use crate::cq::{Povm, QuantumInstrument};
use crate::error::{Error, Result};
use crate::qcore::{
    canonical_purification, embed, psd_sqrt_and_pinv_sqrt, trace_norm, Operator, SystemLayout,
};
use crate::tol;

#[derive(Debug, Clone, Serialize)]
pub struct InstrumentSimReport {
    /// Trace distance between the ideal and simulated instrument outputs on
    /// the purified source.
    pub distance: f64,
    /// Measured form of the analytic chain bound
    /// `2 sqrt(2) (sum_xn p ||rho_hat - xi||_1)^{1/4} + count deviation`.
    pub measured_bound: f64,
    /// Whether every block's Kraus operators satisfy `sum F^dag F <= I`.
    pub trace_nonincreasing_ok: bool,
    pub n: usize,
    pub l_size: usize,
    pub m_size: usize,
    pub seed: u64,
}

/// Build the approximate instrument from a codebook and measure its
/// simulation distance on the purified source.
pub fn build_instrument_simulation(
    instr: &QuantumInstrument,
    setup: &CompressionSetup,
    cb: &Codebook,
) -> Result<InstrumentSimReport> {
    if !instr.is_single_kraus() {
        return Err(Error::Unsupported(
            "instrument simulation handles single-Kraus instruments".into(),
        ));
    }
    let d = instr.dim();
    let n = cb.n();
    let rho = setup.rho();
    // the setup must describe the instrument's effect POVM
    let effects: Vec<Operator> = (0..instr.outcomes()).map(|x| instr.effect(x)).collect();
    for (e, s) in effects.iter().zip(setup.povm().elements()) {
        if e.sub(s).spectral_norm()? > 1e-8 * d as f64 {
            return Err(Error::DimMismatch(
                "setup POVM does not match the instrument effects".into(),
            ));
        }
    }

    // polar unitaries: N_x sqrt(rho) = U_x sqrt(p(x) rho_hat_x)
    let (rho_sqrt, _) = psd_sqrt_and_pinv_sqrt(rho.operator(), 1e-14)?;
    let polar_unitaries: Vec<Operator> = (0..instr.outcomes())
        .map(|x| instr.kraus(x)[0].mul(&rho_sqrt).polar_unitary())
        .collect::<Result<_>>()?;

    // Kraus operators per m-block and distinct codeword
    let scale = setup.typical_mass() / (1.0 + setup.eps());
    let mut kraus_blocks: Vec<Vec<(Vec<usize>, Operator)>> = Vec::with_capacity(cb.m_size());
    let mut trace_ok = true;
    for m in 0..cb.m_size() {
        let mut block = Vec::new();
        let mut seen: Vec<Vec<usize>> = Vec::new();
        for l in 0..cb.l_size() {
            let xn = cb.entry(l, m).to_vec();
            if seen.contains(&xn) {
                continue;
            }
            seen.push(xn.clone());
            let weight = cb.frequency_in_block(&xn, m) * scale;
            let (_, clipped) = setup.trimmed_pair(&xn)?;
            let (inner_sqrt, _) = psd_sqrt_and_pinv_sqrt(&clipped.scale(weight), 1e-16)?;
            let mut rotation = Operator::identity(1);
            for &x in &xn {
                rotation = rotation.tensor(&polar_unitaries[x]);
            }
            let f = rotation.mul(&inner_sqrt).mul(setup.source_pinv_sqrt());
            block.push((xn, f));
        }
        let mut gram = Operator::zeros(d.pow(n as u32));
        for (_, f) in &block {
            gram = gram.add(&f.dagger().mul(f));
        }
        let top = gram
            .hermitian_eigs()?
            .values
            .first()
            .copied()
            .unwrap_or(0.0);
        if top > 1.0 + tol::COMPLETE * gram.dim() as f64 {
            trace_ok = false;
        }
        kraus_blocks.push(block);
    }

    // joint (R^n, A^n) blocks of the ideal and simulated instruments
    let joint_dim = tol::check_operator_dim(
        d.checked_pow(n as u32).and_then(|a| a.checked_mul(a)),
        "instrument simulation joint",
    )?;
    let (phi, _) = canonical_purification(rho);
    let mut purified = phi.clone();
    for _ in 1..n {
        purified = purified.tensor(&phi);
    }
    let mut labels_owned = Vec::new();
    let mut dims = Vec::new();
    for k in 0..n {
        labels_owned.push(format!("R{k}"));
        dims.push(d);
        labels_owned.push(format!("A{k}"));
        dims.push(d);
    }
    let labels: Vec<&str> = labels_owned.iter().map(|s| s.as_str()).collect();
    let layout = SystemLayout::new(&labels, &dims)?;
    let a_labels: Vec<&str> = (0..n).map(|k| &*labels[2 * k + 1]).collect();
    let phi_op = purified.to_density();
    debug_assert_eq!(phi_op.dim(), joint_dim);

    let conjugate = |k: &Operator| -> Result<Operator> {
        let big = embed(k, &layout, &a_labels)?;
        Ok(big.mul(phi_op.operator()).mul(&big.dagger()))
    };

    let outcomes = instr.outcomes().pow(n as u32);
    tol::check_enumeration(Some(outcomes), "instrument outcome blocks")?;
    let m_weight = 1.0 / cb.m_size() as f64;
    let mut distance = 0.0;
    let mut count_term = 0.0;
    let mut xn = vec![0usize; n];
    for flat in 0..outcomes {
        let mut rem = flat;
        for pos in (0..n).rev() {
            xn[pos] = rem % instr.outcomes();
            rem /= instr.outcomes();
        }
        let mut ideal_kraus = Operator::identity(1);
        for &x in &xn {
            ideal_kraus = ideal_kraus.tensor(&instr.kraus(x)[0]);
        }
        let ideal_block = conjugate(&ideal_kraus)?;
        let mut sim_block = Operator::zeros(joint_dim);
        for block in &kraus_blocks {
            if let Some((_, f)) = block.iter().find(|(seq, _)| seq == &xn) {
                sim_block = sim_block.add(&conjugate(f)?.scale(m_weight));
            }
        }
        distance += trace_norm(&ideal_block.sub(&sim_block))?;

        let p = setup.sequence_probability(&xn);
        let scaled_freq = cb.frequency(&xn) * setup.typical_mass() / (1.0 + setup.eps());
        count_term += (p - scaled_freq).abs();
    }

    // measured bound: 2 sqrt(2) * D^{1/4} + count term, with
    // D = sum_xn p(xn) || rho_hat_xn - xi_xn ||_1 over all sequences
    let mut d_sum = 0.0;
    for flat in 0..outcomes {
        let mut rem = flat;
        for pos in (0..n).rev() {
            xn[pos] = rem % instr.outcomes();
            rem /= instr.outcomes();
        }
        let p = setup.sequence_probability(&xn);
        if p <= tol::TRACE {
            continue;
        }
        let post = setup.post_state(&xn);
        if crate::typicality::is_strongly_typical(
            &xn,
            &crate::typicality::TypicalSetSpec::new(
                setup.outcome_pmf().to_vec(),
                n,
                setup.delta(),
            )?,
        )? {
            let (_, clipped) = setup.trimmed_pair(&xn)?;
            d_sum += p * trace_norm(&post.sub(&clipped))?;
        } else {
            d_sum += p * trace_norm(&post)?;
        }
    }
    let measured_bound = 2.0 * 2.0f64.sqrt() * d_sum.powf(0.25) + count_term;

    Ok(InstrumentSimReport {
        distance,
        measured_bound,
        trace_nonincreasing_ok: trace_ok,
        n,
        l_size: cb.l_size(),
        m_size: cb.m_size(),
        seed: cb.seed(),
    })
}

/// The effect POVM `{sum_y N_{x,y}^dag N_{x,y}}` of an instrument.
pub fn instrument_effect_povm(instr: &QuantumInstrument) -> Result<Povm> {
    let effects: Vec<Operator> = (0..instr.outcomes()).map(|x| instr.effect(x)).collect();
    let labels = (0..instr.outcomes())
        .map(|x| instr.label(x).to_string())
        .collect();
    Povm::new(effects, labels)
}
