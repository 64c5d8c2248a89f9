//! Executable protocol constructions at small block length: codebooks,
//! simulated POVMs, Chernoff event checks, faithfulness measurement,
//! instrument simulation, two-universal hashing and sequential decoding.

use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use serde::Serialize;

use crate::cq::Povm;
use crate::error::{Error, Result};
use crate::qcore::{
    canonical_purification, partial_trace, psd_sqrt_and_pinv_sqrt, trace_norm, DensityOperator,
    Operator, SystemLayout,
};
use crate::tol;
use crate::typicality::{
    conditionally_typical_projector, cutoff_projector, pruned, typical_projector,
    PrunedDistribution, TypicalSetSpec,
};

mod cdcqsi;
mod decode;
mod hash;
mod instrument;
mod mcqsi;
mod nonfeedback;

pub use cdcqsi::{simulate_cdcqsi, CdcQsiInstance, CdcQsiReport};
pub use decode::{
    sequential_decode, singleton_success_probability, CandidateTest, DecodeOutcome, ReceivedState,
};
pub use hash::HashFunction;
pub use instrument::{build_instrument_simulation, instrument_effect_povm, InstrumentSimReport};
pub use mcqsi::{simulate_mcqsi, McQsiParams, McQsiReport};
pub use nonfeedback::{simulate_nonfeedback, NonFeedbackParams, NonFeedbackReport};

/// Codeword prescription `|L| = 2^{n [I(X;R) + 3 delta]}`, rounded up.
pub fn l_size_prescription(n: usize, i_xr: f64, delta: f64) -> usize {
    (n as f64 * (i_xr + 3.0 * delta)).exp2().ceil() as usize
}

/// Common-randomness prescription `|M| = 2^{n [H(X|R) + delta]}`, rounded up.
pub fn m_size_prescription(n: usize, h_x_given_r: f64, delta: f64) -> usize {
    (n as f64 * (h_x_given_r + delta)).exp2().ceil() as usize
}

/// Codewords `x^n(l, m)` drawn IID from the pruned distribution.
#[derive(Debug, Clone)]
pub struct Codebook {
    entries: Vec<Vec<usize>>, // indexed m * l_size + l
    l_size: usize,
    m_size: usize,
    n: usize,
    delta: f64,
    pmf: Vec<f64>,
    seed: u64,
}

impl Codebook {
    pub fn entry(&self, l: usize, m: usize) -> &[usize] {
        &self.entries[m * self.l_size + l]
    }

    pub fn l_size(&self) -> usize {
        self.l_size
    }

    pub fn m_size(&self) -> usize {
        self.m_size
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn pmf(&self) -> &[f64] {
        &self.pmf
    }

    /// Fraction of `(l, m)` pairs carrying the given sequence.
    pub fn frequency(&self, xn: &[usize]) -> f64 {
        let hits = self.entries.iter().filter(|e| e.as_slice() == xn).count();
        hits as f64 / self.entries.len() as f64
    }

    /// Fraction of `l` values carrying the sequence within one `m`-block.
    pub fn frequency_in_block(&self, xn: &[usize], m: usize) -> f64 {
        let hits = (0..self.l_size).filter(|&l| self.entry(l, m) == xn).count();
        hits as f64 / self.l_size as f64
    }

    /// Distinct sequences appearing anywhere in the codebook.
    pub fn distinct_sequences(&self) -> Vec<Vec<usize>> {
        let mut seqs = self.entries.clone();
        seqs.sort();
        seqs.dedup();
        seqs
    }
}

/// Draw `l_size * m_size` codewords from the pruned distribution,
/// reproducibly from the seed.
pub fn sample_codebook(
    pmf: &[f64],
    n: usize,
    l_size: usize,
    m_size: usize,
    delta: f64,
    seed: u64,
) -> Result<Codebook> {
    if l_size == 0 || m_size == 0 {
        return Err(Error::BadSequence("codebook sizes must be positive".into()));
    }
    tol::check_enumeration(l_size.checked_mul(m_size), "codebook")?;
    let spec = TypicalSetSpec::new(pmf.to_vec(), n, delta)?;
    let dist = pruned(&spec)?;
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let entries = (0..l_size * m_size)
        .map(|_| dist.sample(&mut rng))
        .collect();
    Ok(Codebook {
        entries,
        l_size,
        m_size,
        n,
        delta,
        pmf: pmf.to_vec(),
        seed,
    })
}

/// Everything derived from `(rho, povm, n, delta, eps)` that the randomized
/// constructions share: the pruned source, per-sequence projected
/// post-measurement operators, the eigenvalue cutoff and the source roots.
pub struct CompressionSetup {
    rho: DensityOperator,
    povm: Povm,
    n: usize,
    delta: f64,
    eps: f64,
    outcome_pmf: Vec<f64>,
    /// Normalized single-copy post states `sqrt(rho) Lambda_x sqrt(rho) / p(x)`.
    post_states: Vec<DensityOperator>,
    pruned: PrunedDistribution,
    /// Typical projector of the source block.
    typical_proj: Operator,
    /// Eigenvalue cutoff projector.
    cutoff: Operator,
    /// `Omega`, the cutoff-projected mean of the trimmed operators.
    clipped_mean: Operator,
    source_sqrt: Operator,
    source_pinv_sqrt: Operator,
}

impl CompressionSetup {
    pub fn new(rho: &DensityOperator, povm: &Povm, n: usize, delta: f64, eps: f64) -> Result<Self> {
        if !(eps > 0.0 && eps < 1.0) {
            return Err(Error::BadPmf("eps must lie in (0, 1)".into()));
        }
        let d = rho.dim();
        tol::check_operator_dim(d.checked_pow(n as u32), "compression setup")?;
        let outcome_pmf = crate::cq::born_distribution(povm, rho)?;
        let (rho_sqrt, _) = psd_sqrt_and_pinv_sqrt(rho.operator(), 1e-14)?;
        let post_states: Vec<DensityOperator> = povm
            .elements()
            .iter()
            .zip(outcome_pmf.iter())
            .map(|(e, &p)| {
                let raw = rho_sqrt.mul(e).mul(&rho_sqrt).hermitized();
                if p > tol::TRACE {
                    DensityOperator::new(raw.scale(1.0 / p))
                } else {
                    // zero-probability outcome: placeholder, never drawn
                    Ok(DensityOperator::maximally_mixed(d))
                }
            })
            .collect::<Result<_>>()?;

        let spec = TypicalSetSpec::new(outcome_pmf.clone(), n, delta)?;
        let dist = pruned(&spec)?;
        let typical_proj = typical_projector(rho, n, delta)?.operator().clone();

        let ensemble = crate::cq::Ensemble::new(outcome_pmf.clone(), post_states.clone())?;
        // stream the pruned average of the trimmed operators
        let dim_n = d.pow(n as u32);
        let mut trimmed_mean = Operator::zeros(dim_n);
        for i in 0..dist.len() {
            let xn = dist.sequence(i).to_vec();
            let trimmed = trimmed_operator(&ensemble, &typical_proj, &xn, delta)?;
            trimmed_mean = trimmed_mean.add(&trimmed.scale(dist.probability(i)));
        }
        let alpha = (-(n as f64) * (crate::qcore::von_neumann_entropy(rho) + delta)).exp2();
        let cutoff = cutoff_projector(&trimmed_mean, eps * alpha)?
            .operator()
            .clone();
        let clipped_mean = cutoff.mul(&trimmed_mean).mul(&cutoff).hermitized();

        let big_rho = rho.tensor_power(n);
        let (source_sqrt, source_pinv_sqrt) = psd_sqrt_and_pinv_sqrt(big_rho.operator(), 1e-14)?;

        Ok(Self {
            rho: rho.clone(),
            povm: povm.clone(),
            n,
            delta,
            eps,
            outcome_pmf,
            post_states,
            pruned: dist,
            typical_proj,
            cutoff,
            clipped_mean,
            source_sqrt,
            source_pinv_sqrt,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    pub fn povm(&self) -> &Povm {
        &self.povm
    }

    pub fn rho(&self) -> &DensityOperator {
        &self.rho
    }

    pub fn outcome_pmf(&self) -> &[f64] {
        &self.outcome_pmf
    }

    pub fn pruned(&self) -> &PrunedDistribution {
        &self.pruned
    }

    pub fn typical_mass(&self) -> f64 {
        self.pruned.mass()
    }

    pub fn cutoff(&self) -> &Operator {
        &self.cutoff
    }

    pub fn clipped_mean(&self) -> &Operator {
        &self.clipped_mean
    }

    pub fn source_pinv_sqrt(&self) -> &Operator {
        &self.source_pinv_sqrt
    }

    pub fn source_sqrt(&self) -> &Operator {
        &self.source_sqrt
    }

    pub fn sequence_probability(&self, xn: &[usize]) -> f64 {
        xn.iter().map(|&x| self.outcome_pmf[x]).product()
    }

    /// Product post state `rho_hat_{x^n}`.
    pub fn post_state(&self, xn: &[usize]) -> Operator {
        let mut out = Operator::identity(1);
        for &x in xn {
            out = out.tensor(self.post_states[x].operator());
        }
        out
    }

    /// The typicality-projected operator before the cutoff (`xi'`) and after
    /// it (`xi`), for one typical sequence.
    pub fn trimmed_pair(&self, xn: &[usize]) -> Result<(Operator, Operator)> {
        let ensemble =
            crate::cq::Ensemble::new(self.outcome_pmf.clone(), self.post_states.clone())?;
        let raw = trimmed_operator(&ensemble, &self.typical_proj, xn, self.delta)?;
        let clipped = self.cutoff.mul(&raw).mul(&self.cutoff).hermitized();
        Ok((raw, clipped))
    }

    /// `xi` operators for every distinct sequence of a codebook.
    fn clipped_for(&self, cb: &Codebook) -> Result<Vec<(Vec<usize>, Operator)>> {
        let mut out = Vec::new();
        for seq in cb.distinct_sequences() {
            let (_, clipped) = self.trimmed_pair(&seq)?;
            out.push((seq, clipped));
        }
        Ok(out)
    }
}

/// `Pi_rho^n Pi_cond rho_hat_{x^n} Pi_cond Pi_rho^n` for one typical sequence.
fn trimmed_operator(
    ensemble: &crate::cq::Ensemble,
    typical_proj: &Operator,
    xn: &[usize],
    delta: f64,
) -> Result<Operator> {
    let cond = conditionally_typical_projector(ensemble, xn, delta)?;
    let mut product = Operator::identity(1);
    for &x in xn {
        product = product.tensor(ensemble.state(x).operator());
    }
    let inner = cond.operator().mul(&product).mul(cond.operator());
    Ok(typical_proj.mul(&inner).mul(typical_proj).hermitized())
}

/// Per-`m` POVMs built from a codebook, with their completion elements.
#[derive(Debug, Clone)]
pub struct SimulatedPovm {
    /// `upsilon[m][l]`, the codeword effects.
    upsilon: Vec<Vec<Operator>>,
    /// `completion[m] = I - sum_l upsilon[m][l]`.
    completion: Vec<Operator>,
    codebook: Codebook,
    typical_mass: f64,
    eps: f64,
    em_flags: Vec<bool>,
    e0_flag: bool,
}

impl SimulatedPovm {
    pub fn codebook(&self) -> &Codebook {
        &self.codebook
    }

    pub fn effect(&self, l: usize, m: usize) -> &Operator {
        &self.upsilon[m][l]
    }

    pub fn completion(&self, m: usize) -> &Operator {
        &self.completion[m]
    }

    pub fn em_flags(&self) -> &[bool] {
        &self.em_flags
    }

    pub fn e0_flag(&self) -> bool {
        self.e0_flag
    }

    pub fn typical_mass(&self) -> f64 {
        self.typical_mass
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    /// The mixed simulated effect `Lambda~_{x^n} = |M|^-1 sum_m Gamma_{x^n}^{(m)}`.
    pub fn simulated_effect(&self, xn: &[usize]) -> Operator {
        let dim = self.upsilon[0][0].dim();
        let mut out = Operator::zeros(dim);
        for m in 0..self.codebook.m_size() {
            for l in 0..self.codebook.l_size() {
                if self.codebook.entry(l, m) == xn {
                    out = out.add(&self.upsilon[m][l]);
                }
            }
        }
        out.scale(1.0 / self.codebook.m_size() as f64)
    }
}

/// Chernoff event check: `E_m` asks the per-block sample mean of the clipped
/// operators to lie in `[(1 +- eps) Omega]`; `E_0` asks the empirical
/// codeword counts to lie in `[(1 +- eps) pruned pmf]`.
pub fn check_chernoff_events(setup: &CompressionSetup, cb: &Codebook) -> Result<(Vec<bool>, bool)> {
    let clipped = setup.clipped_for(cb)?;
    let find = |xn: &[usize]| -> &Operator {
        &clipped
            .iter()
            .find(|(seq, _)| seq.as_slice() == xn)
            .expect("codebook sequence was precomputed")
            .1
    };
    let mut em = Vec::with_capacity(cb.m_size());
    for m in 0..cb.m_size() {
        let mut mean = Operator::zeros(setup.clipped_mean.dim());
        for l in 0..cb.l_size() {
            mean = mean.add(find(cb.entry(l, m)));
        }
        let mean = mean.scale(1.0 / cb.l_size() as f64);
        let hi = setup
            .clipped_mean
            .scale(1.0 + setup.eps)
            .sub(&mean)
            .hermitian_eigs()?
            .values
            .last()
            .copied()
            .unwrap_or(0.0);
        let lo = mean
            .sub(&setup.clipped_mean.scale(1.0 - setup.eps))
            .hermitian_eigs()?
            .values
            .last()
            .copied()
            .unwrap_or(0.0);
        em.push(hi >= -tol::PSD && lo >= -tol::PSD);
    }

    let mut e0 = true;
    for i in 0..setup.pruned.len() {
        let p = setup.pruned.probability(i);
        let count = cb.frequency(setup.pruned.sequence(i));
        if count < (1.0 - setup.eps) * p - 1e-12 || count > (1.0 + setup.eps) * p + 1e-12 {
            e0 = false;
            break;
        }
    }
    Ok((em, e0))
}

/// Assemble the simulated POVM
/// `Upsilon_l^{(m)} = [S / (1 + eps)] |L|^-1 omega^{-1/2} xi_{x^n(l,m)} omega^{-1/2}`
/// and its completion. Fails with `SubPovmViolation` if some block's effects
/// sum above the identity.
pub fn build_simulated_povm(setup: &CompressionSetup, cb: &Codebook) -> Result<SimulatedPovm> {
    let (em_flags, e0_flag) = check_chernoff_events(setup, cb)?;
    let clipped = setup.clipped_for(cb)?;
    let find = |xn: &[usize]| -> &Operator {
        &clipped
            .iter()
            .find(|(seq, _)| seq.as_slice() == xn)
            .expect("codebook sequence was precomputed")
            .1
    };
    let scale = setup.typical_mass() / (1.0 + setup.eps) / cb.l_size() as f64;
    let dim = setup.source_pinv_sqrt.dim();
    let mut upsilon = Vec::with_capacity(cb.m_size());
    let mut completion = Vec::with_capacity(cb.m_size());
    for m in 0..cb.m_size() {
        let mut block = Vec::with_capacity(cb.l_size());
        let mut total = Operator::zeros(dim);
        for l in 0..cb.l_size() {
            let effect = setup
                .source_pinv_sqrt
                .mul(find(cb.entry(l, m)))
                .mul(&setup.source_pinv_sqrt)
                .scale(scale)
                .hermitized();
            total = total.add(&effect);
            block.push(effect);
        }
        let top = total
            .hermitian_eigs()?
            .values
            .first()
            .copied()
            .unwrap_or(0.0);
        if top > 1.0 + tol::COMPLETE * dim as f64 {
            return Err(Error::SubPovmViolation(format!(
                "block {m} sums to max eigenvalue {top}"
            )));
        }
        completion.push(Operator::identity(dim).sub(&total).hermitized());
        upsilon.push(block);
    }
    Ok(SimulatedPovm {
        upsilon,
        completion,
        codebook: cb.clone(),
        typical_mass: setup.typical_mass(),
        eps: setup.eps,
        em_flags,
        e0_flag,
    })
}

/// Faithfulness of a simulated POVM against the ideal tensor-power POVM.
#[derive(Debug, Clone, Serialize)]
pub struct FaithfulnessReport {
    /// `Delta = sum_xn || sqrt(omega) (Lambda_xn - Lambda~_xn) sqrt(omega) ||_1`.
    pub delta_c: f64,
    /// Residual between the direct and purification-route values.
    pub route_gap: f64,
    pub chernoff_em_ok: Vec<bool>,
    pub chernoff_e0_ok: bool,
    pub n: usize,
    pub l_size: usize,
    pub m_size: usize,
    pub seed: u64,
}

/// Both computation routes for the faithfulness metric between an ideal
/// tensor-power POVM and an arbitrary family of simulated effects, given as
/// `(sequence, effect)` pairs over the same outcome alphabet. Sequences not
/// listed are treated as having a zero simulated effect.
pub fn faithfulness_between(
    rho: &DensityOperator,
    povm: &Povm,
    n: usize,
    simulated: &[(Vec<usize>, Operator)],
) -> Result<(f64, f64)> {
    let d = rho.dim();
    let joint_dim = tol::check_operator_dim(
        d.checked_pow(n as u32).and_then(|a| a.checked_mul(a)),
        "faithfulness purification route",
    )?;
    tol::check_enumeration(povm.len().checked_pow(n as u32), "faithfulness outcomes")?;

    let big_rho = rho.tensor_power(n);
    let (omega_sqrt, _) = psd_sqrt_and_pinv_sqrt(big_rho.operator(), 1e-14)?;

    // purification of rho^{(x) n}: reference and source factors interleaved
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
    let r_labels: Vec<&str> = (0..n).map(|k| &*labels[2 * k]).collect();
    let phi_op = purified.to_density();
    debug_assert_eq!(phi_op.dim(), joint_dim);

    let find_sim = |xn: &[usize]| -> Option<&Operator> {
        simulated
            .iter()
            .find(|(seq, _)| seq.as_slice() == xn)
            .map(|(_, e)| e)
    };

    let mut direct = 0.0;
    let mut via_purification = 0.0;
    let outcomes = povm.len().pow(n as u32);
    let mut xn = vec![0usize; n];
    for flat in 0..outcomes {
        let mut rem = flat;
        for pos in (0..n).rev() {
            xn[pos] = rem % povm.len();
            rem /= povm.len();
        }
        let mut ideal = Operator::identity(1);
        for &x in &xn {
            ideal = ideal.tensor(povm.element(x));
        }
        let sim = find_sim(&xn);

        // direct route: sandwich with sqrt(omega)
        let diff = match sim {
            Some(e) => ideal.sub(e),
            None => ideal.clone(),
        };
        direct += trace_norm(&omega_sqrt.mul(&diff).mul(&omega_sqrt))?;

        // purification route: partial trace of the embedded measurement
        let reduce = |effect: &Operator| -> Result<Operator> {
            let moved = crate::qcore::embed(effect, &layout, &a_labels)?.mul(phi_op.operator());
            Ok(partial_trace(&moved, &layout, &r_labels)?.0)
        };
        let ideal_block = reduce(&ideal)?;
        let block_diff = match sim {
            Some(e) => ideal_block.sub(&reduce(e)?),
            None => ideal_block,
        };
        via_purification += trace_norm(&block_diff)?;
    }
    Ok((direct, (direct - via_purification).abs()))
}

/// Faithfulness of a [`SimulatedPovm`] with the dual-route equivalence check.
/// The direct and purification routes must agree within `tol::RECON`.
pub fn faithfulness_metric(
    setup: &CompressionSetup,
    sim: &SimulatedPovm,
) -> Result<FaithfulnessReport> {
    let cb = sim.codebook();
    let mut simulated = Vec::new();
    for seq in cb.distinct_sequences() {
        simulated.push((seq.clone(), sim.simulated_effect(&seq)));
    }
    let (delta_c, route_gap) = faithfulness_between(&setup.rho, &setup.povm, setup.n, &simulated)?;
    if route_gap > tol::RECON * (1.0 + delta_c) {
        return Err(Error::InvalidOperator(format!(
            "faithfulness routes disagree by {route_gap}"
        )));
    }
    Ok(FaithfulnessReport {
        delta_c,
        route_gap,
        chernoff_em_ok: sim.em_flags().to_vec(),
        chernoff_e0_ok: sim.e0_flag(),
        n: setup.n,
        l_size: cb.l_size(),
        m_size: cb.m_size(),
        seed: cb.seed(),
    })
}
