//! Standalone verifiers for the supporting operator lemmas, usable both as a
//! test oracle library and as a Monte Carlo suite behind the CLI.

use rand::Rng;
use serde::Serialize;

use crate::cq::Ensemble;
use crate::error::{Error, Result};
use crate::qcore::{
    self, psd_sqrt_and_pinv_sqrt, subsystem_entropy, trace_norm, von_neumann_entropy,
    DensityOperator, Operator, SystemLayout,
};
use crate::tol;

/// One verified inequality instance.
#[derive(Debug, Clone, Serialize)]
pub struct LemmaReport {
    pub lemma: String,
    pub lhs: f64,
    pub rhs: f64,
    pub satisfied: bool,
    pub instance: String,
}

impl LemmaReport {
    fn new(lemma: &str, lhs: f64, rhs: f64, instance: String) -> Self {
        LemmaReport {
            lemma: lemma.into(),
            lhs,
            rhs,
            satisfied: lhs <= rhs + tol::LEMMA,
            instance,
        }
    }
}

fn check_effect(lam: &Operator) -> Result<()> {
    let spec = lam.hermitized().hermitian_eigs()?;
    let scale = lam.max_abs_entry().max(1.0);
    if !lam.is_hermitian(tol::HERM * scale * 10.0) {
        return Err(Error::BadEffect("not Hermitian".into()));
    }
    let top = spec.values.first().copied().unwrap_or(0.0);
    let bottom = spec.values.last().copied().unwrap_or(0.0);
    if bottom < -tol::PSD * 10.0 || top > 1.0 + tol::PSD * 10.0 {
        return Err(Error::BadEffect(format!(
            "eigenvalues in [{bottom}, {top}]"
        )));
    }
    Ok(())
}

/// Gentle operator lemma: `||rho - sqrt(L) rho sqrt(L)||_1 <= 2 sqrt(1 - Tr(L rho))`.
pub fn gentle_disturbance(rho: &DensityOperator, lam: &Operator) -> Result<LemmaReport> {
    check_effect(lam)?;
    if lam.dim() != rho.dim() {
        return Err(Error::DimMismatch("effect vs state".into()));
    }
    let (sqrt_lam, _) = psd_sqrt_and_pinv_sqrt(lam, 1e-14)?;
    let disturbed = sqrt_lam.mul(rho.operator()).mul(&sqrt_lam);
    let lhs = trace_norm(&rho.operator().sub(&disturbed))?;
    let hit = lam.mul(rho.operator()).trace().re.clamp(0.0, 1.0);
    let rhs = 2.0 * (1.0 - hit).max(0.0).sqrt();
    Ok(LemmaReport::new(
        "gentle-operator",
        lhs,
        rhs,
        format!("d={}", rho.dim()),
    ))
}

/// Gentle operator lemma for ensembles:
/// `E_X ||sqrt(L) rho_X sqrt(L) - rho_X||_1 <= 2 sqrt(1 - Tr(L rho_avg))`.
pub fn gentle_ensemble(ens: &Ensemble, lam: &Operator) -> Result<LemmaReport> {
    check_effect(lam)?;
    if lam.dim() != ens.dim() {
        return Err(Error::DimMismatch("effect vs ensemble".into()));
    }
    let (sqrt_lam, _) = psd_sqrt_and_pinv_sqrt(lam, 1e-14)?;
    let mut lhs = 0.0;
    for x in 0..ens.len() {
        let rho_x = ens.state(x).operator();
        let disturbed = sqrt_lam.mul(rho_x).mul(&sqrt_lam);
        lhs += ens.pmf()[x] * trace_norm(&rho_x.sub(&disturbed))?;
    }
    let avg = ens.average_state();
    let hit = lam.mul(avg.operator()).trace().re.clamp(0.0, 1.0);
    let rhs = 2.0 * (1.0 - hit).max(0.0).sqrt();
    Ok(LemmaReport::new(
        "gentle-ensemble",
        lhs,
        rhs,
        format!("d={}, |X|={}", ens.dim(), ens.len()),
    ))
}

/// Trace inequality: `Tr(L rho) <= Tr(L sigma) + ||rho - sigma||_1` for
/// positive `rho`, `sigma` and `0 <= L <= I`.
pub fn trace_inequality(rho: &Operator, sigma: &Operator, lam: &Operator) -> Result<LemmaReport> {
    check_effect(lam)?;
    if rho.dim() != sigma.dim() || rho.dim() != lam.dim() {
        return Err(Error::DimMismatch("operands".into()));
    }
    let lhs = lam.mul(rho).trace().re;
    let rhs = lam.mul(sigma).trace().re + trace_norm(&rho.sub(sigma))?;
    Ok(LemmaReport::new(
        "trace-inequality",
        lhs,
        rhs,
        format!("d={}", rho.dim()),
    ))
}

/// Sen's non-commutative union bound:
/// `Tr(sigma) - Tr(Pi_N..Pi_1 sigma Pi_1..Pi_N) <= 2 sqrt(sum_i Tr((I-Pi_i) sigma))`.
pub fn sen_union_gap(sigma: &Operator, projectors: &[Operator]) -> Result<LemmaReport> {
    let d = sigma.dim();
    let tr = sigma.trace().re;
    if tr > 1.0 + tol::PSD * 10.0 {
        return Err(Error::InvalidOperator("trace above one".into()));
    }
    for p in projectors {
        if p.dim() != d {
            return Err(Error::DimMismatch("projector vs state".into()));
        }
        let dev = p.mul(p).sub(p).spectral_norm()?;
        if dev > tol::PROJ * d as f64 {
            return Err(Error::BadProjector(format!("idempotence defect {dev}")));
        }
    }
    let mut current = sigma.clone();
    for p in projectors {
        current = p.mul(&current).mul(p);
    }
    let lhs = tr - current.trace().re;
    let mut sum = 0.0;
    for p in projectors {
        let miss = Operator::identity(d).sub(p).mul(sigma).trace().re;
        sum += miss.max(0.0);
    }
    let rhs = 2.0 * sum.sqrt();
    Ok(LemmaReport::new(
        "sen-union-bound",
        lhs,
        rhs,
        format!("d={d}, N={}", projectors.len()),
    ))
}

/// A source of IID operator samples in `[0, I]` for the Chernoff experiment.
pub trait OperatorSampler {
    fn dim(&self) -> usize;
    fn sample(&self, rng: &mut dyn rand::RngCore) -> Operator;
    /// Exact expectation of the sampler.
    fn mean(&self) -> Operator;
    fn describe(&self) -> String;
}

/// Deterministic sampler returning a fixed effect.
pub struct FixedSampler(pub Operator);

impl OperatorSampler for FixedSampler {
    fn dim(&self) -> usize {
        self.0.dim()
    }
    fn sample(&self, _rng: &mut dyn rand::RngCore) -> Operator {
        self.0.clone()
    }
    fn mean(&self) -> Operator {
        self.0.clone()
    }
    fn describe(&self) -> String {
        format!("fixed d={}", self.0.dim())
    }
}

/// Diagonal Bernoulli sampler: each diagonal entry is 1 with its own
/// probability, else `floor_value`.
pub struct BernoulliDiagonalSampler {
    pub probs: Vec<f64>,
    pub floor_value: f64,
}

impl OperatorSampler for BernoulliDiagonalSampler {
    fn dim(&self) -> usize {
        self.probs.len()
    }
    fn sample(&self, rng: &mut dyn rand::RngCore) -> Operator {
        let uniform =
            |rng: &mut dyn rand::RngCore| (rng.next_u64() >> 11) as f64 / (1u64 << 53) as f64;
        let diag: Vec<f64> = self
            .probs
            .iter()
            .map(|&p| {
                if uniform(rng) < p {
                    1.0
                } else {
                    self.floor_value
                }
            })
            .collect();
        Operator::from_real_diagonal(&diag)
    }
    fn mean(&self) -> Operator {
        let diag: Vec<f64> = self
            .probs
            .iter()
            .map(|&p| p + (1.0 - p) * self.floor_value)
            .collect();
        Operator::from_real_diagonal(&diag)
    }
    fn describe(&self) -> String {
        format!("bernoulli-diagonal d={}", self.probs.len())
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ChernoffReport {
    pub dim: usize,
    pub samples_per_trial: usize,
    pub eta: f64,
    pub floor: f64,
    pub trials: usize,
    pub empirical_failure: f64,
    pub analytic_bound: f64,
    pub bound_is_informative: bool,
    pub satisfied: bool,
}

/// Operator Chernoff experiment: frequency of the sample average escaping
/// `[(1 +- eta) mean]` versus `2 dim exp(-M eta^2 a / (4 ln 2))`.
pub fn operator_chernoff_experiment(
    sampler: &dyn OperatorSampler,
    samples_per_trial: usize,
    floor: f64,
    eta: f64,
    trials: usize,
    rng: &mut impl Rng,
) -> Result<ChernoffReport> {
    if !(0.0 < eta && eta < 0.5) {
        return Err(Error::BadSampler("eta must lie in (0, 1/2)".into()));
    }
    if floor <= 0.0 || floor * (1.0 + eta) > 1.0 {
        return Err(Error::BadSampler("need 0 < a and a (1 + eta) <= 1".into()));
    }
    let d = sampler.dim();
    let mean = sampler.mean();
    let min_mean = mean.hermitian_eigs()?.values.last().copied().unwrap_or(0.0);
    if min_mean < floor - tol::PSD {
        return Err(Error::BadSampler(format!(
            "sampler mean bottoms out at {min_mean} < a = {floor}"
        )));
    }
    let mut failures = 0usize;
    for _ in 0..trials {
        let mut avg = Operator::zeros(d);
        for _ in 0..samples_per_trial {
            let s = sampler.sample(rng);
            // validate the [0, I] precondition empirically
            let spec = s.hermitized().hermitian_eigs()?;
            let top = spec.values.first().copied().unwrap_or(0.0);
            let bottom = spec.values.last().copied().unwrap_or(0.0);
            if bottom < -tol::PSD * 10.0 || top > 1.0 + tol::PSD * 10.0 {
                return Err(Error::BadSampler(format!(
                    "sample eigenvalues in [{bottom}, {top}]"
                )));
            }
            avg = avg.add(&s);
        }
        avg = avg.scale(1.0 / samples_per_trial as f64);
        let hi_gap = mean
            .scale(1.0 + eta)
            .sub(&avg)
            .hermitian_eigs()?
            .values
            .last()
            .copied()
            .unwrap_or(0.0);
        let lo_gap = avg
            .sub(&mean.scale(1.0 - eta))
            .hermitian_eigs()?
            .values
            .last()
            .copied()
            .unwrap_or(0.0);
        if hi_gap < -tol::PSD || lo_gap < -tol::PSD {
            failures += 1;
        }
    }
    let empirical = failures as f64 / trials.max(1) as f64;
    let bound = 2.0
        * d as f64
        * (-(samples_per_trial as f64) * eta * eta * floor / (4.0 * std::f64::consts::LN_2)).exp();
    let informative = bound < 1.0;
    Ok(ChernoffReport {
        dim: d,
        samples_per_trial,
        eta,
        floor,
        trials,
        empirical_failure: empirical,
        analytic_bound: bound,
        bound_is_informative: informative,
        satisfied: !informative || empirical <= bound + tol::LEMMA,
    })
}

fn binary_entropy(e: f64) -> f64 {
    let e = e.clamp(0.0, 1.0);
    if e <= 0.0 || e >= 1.0 {
        0.0
    } else {
        -e * e.log2() - (1.0 - e) * (1.0 - e).log2()
    }
}

/// Entropy accumulation for states close to IID:
/// `|H(A^n) - sum_k H(A_k)| <= 2 n eps log|A| + (n + 1) H2(eps)` with `eps`
/// the measured trace distance to the reference IID state.
pub fn entropy_closeness(
    rho_n: &DensityOperator,
    sigma: &DensityOperator,
    copies: usize,
) -> Result<LemmaReport> {
    let d = sigma.dim();
    let expected = d
        .checked_pow(copies as u32)
        .ok_or_else(|| Error::DimMismatch("copies overflow".into()))?;
    if rho_n.dim() != expected {
        return Err(Error::DimMismatch(format!(
            "state dim {} != {d}^{copies}",
            rho_n.dim()
        )));
    }
    let iid = sigma.tensor_power(copies);
    // eps is the full 1-norm distance to the IID reference
    let eps = qcore::trace_distance(rho_n, &iid)?.clamp(0.0, 2.0);

    let labels_owned: Vec<String> = (0..copies).map(|k| format!("A{k}")).collect();
    let labels: Vec<&str> = labels_owned.iter().map(|s| s.as_str()).collect();
    let layout = SystemLayout::new(&labels, &vec![d; copies])?;
    let joint = von_neumann_entropy(rho_n);
    let mut marginal_sum = 0.0;
    for l in &labels {
        marginal_sum += subsystem_entropy(rho_n, &layout, &[l])?;
    }
    let lhs = (joint - marginal_sum).abs();
    let rhs =
        2.0 * copies as f64 * eps * (d as f64).log2() + (copies as f64 + 1.0) * binary_entropy(eps);
    Ok(LemmaReport::new(
        "entropy-for-close-iid",
        lhs,
        rhs,
        format!("d={d}, n={copies}, eps={eps:.4}"),
    ))
}

#[cfg(test)]
mod tests;
