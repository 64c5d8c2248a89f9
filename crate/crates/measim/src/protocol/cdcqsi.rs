//! Classical data compression with quantum side information, executed at
//! small block length: hash the source sequence, then sequentially decode
//! among the typical sequences consistent with the hash.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use serde::Serialize;

use super::decode::{sequential_decode, CandidateTest, ReceivedState};
use super::hash::{encode_sequence, HashFunction};
use crate::cq::Ensemble;
use crate::error::{Error, Result};
use crate::qcore::{trace_norm, Operator, C64};
use crate::tol;
use crate::typicality::{
    conditionally_typical_product, sample_iid, typical_mass, typical_projector, TypicalSetSpec,
};

#[derive(Debug, Clone, Serialize)]
pub struct CdcQsiReport {
    pub n: usize,
    pub rate: f64,
    pub hash_bins: u64,
    pub delta: f64,
    pub trials: usize,
    pub seed: u64,
    pub error_rate: f64,
    /// Binomial Monte Carlo deviation of the error estimate.
    pub error_sigma: f64,
    /// Total error bound with the measured typicality failure mass.
    pub analytic_bound: f64,
    /// Measured typicality failure mass entering the bound.
    pub measured_eps: f64,
    pub decode_failures: usize,
    /// Mean trace distance between the recovered state and the ideal one,
    /// counting failed trials at the maximal distance 2.
    pub mean_final_distance: f64,
    pub h_x_given_b: f64,
}

/// Precomputed per-instance data: typical set, projector failure masses and
/// the analytic bound, reusable across seeds.
pub struct CdcQsiInstance {
    ensemble: Ensemble,
    spec: TypicalSetSpec,
    typical: Vec<Vec<usize>>,
    typical_codes: Vec<u64>,
    mass: f64,
    n: usize,
    rate: f64,
    hash_bins: u64,
    domain_bits: u32,
    delta: f64,
    measured_eps: f64,
    analytic_bound: f64,
    h_x_given_b: f64,
    all_pure: bool,
    /// Product state vectors per symbol when the ensemble is pure.
    pure_vectors: Vec<Vec<C64>>,
}

impl CdcQsiInstance {
    pub fn new(ensemble: &Ensemble, n: usize, rate: f64, delta: f64) -> Result<Self> {
        if rate <= 0.0 {
            return Err(Error::BadPmf("rate must be positive".into()));
        }
        tol::check_operator_dim(
            ensemble.dim().checked_pow(n as u32),
            "side-information block",
        )?;
        let spec = TypicalSetSpec::new(ensemble.pmf().to_vec(), n, delta)?;
        let set = typical_mass(&spec)?;
        if set.sequences.is_empty() {
            return Err(Error::EmptyTypicalSet);
        }
        let hash_bins = ((n as f64 * rate).exp2().ceil() as u64).max(1);
        let alphabet = ensemble.len();
        let (_, domain_bits) = encode_sequence(&set.sequences[0], alphabet)?;
        let typical_codes = set
            .sequences
            .iter()
            .map(|xn| encode_sequence(xn, alphabet).map(|(c, _)| c))
            .collect::<Result<Vec<u64>>>()?;

        // measured typicality failure masses, one representative per type class
        let avg = ensemble.average_state();
        let avg_proj = typical_projector(&avg, n, delta)?;
        let mut eps_avg = 0.0f64;
        let mut eps_cond = 0.0f64;
        let mut seen_types: Vec<Vec<usize>> = Vec::new();
        for xn in &set.sequences {
            let mut counts = vec![0usize; alphabet];
            for &x in xn {
                counts[x] += 1;
            }
            if seen_types.contains(&counts) {
                continue;
            }
            seen_types.push(counts);
            let mut product = Operator::identity(1);
            for &x in xn {
                product = product.tensor(ensemble.state(x).operator());
            }
            let hit_avg = avg_proj.operator().mul(&product).trace().re;
            eps_avg = eps_avg.max(1.0 - hit_avg);
            let cond = conditionally_typical_product(ensemble, xn, delta)?;
            let hit_cond = cond.to_operator().mul(&product).trace().re;
            eps_cond = eps_cond.max(1.0 - hit_cond);
        }
        let measured_eps = (1.0 - set.mass).max(eps_avg).max(eps_cond).clamp(0.0, 1.0);

        let h_x_given_b = crate::rates::cdc_qsi_rate(&ensemble.to_cq())?;
        let gap = (-(n as f64) * (rate - h_x_given_b - 3.0 * delta)).exp2();
        let e = measured_eps;
        let analytic_bound = e + 2.0 * e.sqrt() + 2.0 * (e + 2.0 * e.sqrt() + gap).sqrt();

        let all_pure = (0..ensemble.len()).all(|x| {
            let spec = ensemble.state(x).spectrum();
            spec.values.first().copied().unwrap_or(0.0) > 1.0 - 1e-10
        });
        let pure_vectors = if all_pure {
            (0..ensemble.len())
                .map(|x| ensemble.state(x).spectrum().eigenvector(0))
                .collect()
        } else {
            Vec::new()
        };

        Ok(Self {
            ensemble: ensemble.clone(),
            spec,
            typical: set.sequences,
            typical_codes,
            mass: set.mass,
            n,
            rate,
            hash_bins,
            domain_bits,
            delta,
            measured_eps,
            analytic_bound,
            h_x_given_b,
            all_pure,
            pure_vectors,
        })
    }

    pub fn analytic_bound(&self) -> f64 {
        self.analytic_bound
    }

    pub fn typical_mass(&self) -> f64 {
        self.mass
    }

    fn side_information(&self, xn: &[usize]) -> ReceivedState {
        if self.all_pure {
            let mut v = vec![C64::new(1.0, 0.0)];
            for &x in xn {
                let site = &self.pure_vectors[x];
                let mut next = Vec::with_capacity(v.len() * site.len());
                for a in &v {
                    for b in site {
                        next.push(a * b);
                    }
                }
                v = next;
            }
            ReceivedState::Pure(v)
        } else {
            let mut op = Operator::identity(1);
            for &x in xn {
                op = op.tensor(self.ensemble.state(x).operator());
            }
            ReceivedState::Mixed(op)
        }
    }

    /// Run `trials` independent protocol executions.
    pub fn run(&self, trials: usize, seed: u64) -> Result<CdcQsiReport> {
        let mut errors = 0usize;
        let mut failures = 0usize;
        let mut total_distance = 0.0f64;
        for t in 0..trials {
            let mut rng = ChaCha12Rng::seed_from_u64(seed);
            rng.set_stream(t as u64 + 1);
            let xn = sample_iid(self.spec.pmf(), self.n, &mut rng);
            let hash = HashFunction::new(rng.random::<u64>(), self.domain_bits, self.hash_bins)?;
            let (code, _) = encode_sequence(&xn, self.ensemble.len())?;
            let bin = hash.eval(code);

            // candidates consistent with the hash, in enumeration order
            let mut candidates = Vec::new();
            let mut candidate_seqs = Vec::new();
            for (i, c) in self.typical_codes.iter().enumerate() {
                if hash.eval(*c) == bin {
                    let product = conditionally_typical_product(
                        &self.ensemble,
                        &self.typical[i],
                        self.delta,
                    )?;
                    candidates.push(CandidateTest::Product(product));
                    candidate_seqs.push(&self.typical[i]);
                }
            }
            let received = self.side_information(&xn);
            match sequential_decode(&candidates, &received, &mut rng) {
                Ok(outcome) => {
                    let decoded = candidate_seqs[outcome.index];
                    if decoded != &xn {
                        errors += 1;
                        total_distance += 2.0;
                    } else {
                        total_distance += match (&outcome.post_state, &received) {
                            (ReceivedState::Pure(a), ReceivedState::Pure(b)) => {
                                // pure states: ||a><a| - |b><b||_1 from the overlap
                                let overlap: C64 =
                                    a.iter().zip(b.iter()).map(|(x, y)| x.conj() * y).sum();
                                2.0 * (1.0 - overlap.norm_sqr()).max(0.0).sqrt()
                            }
                            _ => {
                                let ideal = self.side_information(&xn).to_operator();
                                trace_norm(&outcome.post_state.to_operator().sub(&ideal))?
                            }
                        };
                    }
                }
                Err(Error::DecodeFailure) => {
                    errors += 1;
                    failures += 1;
                    total_distance += 2.0;
                }
                Err(e) => return Err(e),
            }
        }
        let error_rate = errors as f64 / trials.max(1) as f64;
        let error_sigma = (error_rate * (1.0 - error_rate) / trials.max(1) as f64).sqrt();
        Ok(CdcQsiReport {
            n: self.n,
            rate: self.rate,
            hash_bins: self.hash_bins,
            delta: self.delta,
            trials,
            seed,
            error_rate,
            error_sigma,
            analytic_bound: self.analytic_bound,
            measured_eps: self.measured_eps,
            decode_failures: failures,
            mean_final_distance: total_distance / trials.max(1) as f64,
            h_x_given_b: self.h_x_given_b,
        })
    }
}

/// One-shot convenience wrapper around [`CdcQsiInstance`].
pub fn simulate_cdcqsi(
    ensemble: &Ensemble,
    n: usize,
    rate: f64,
    delta: f64,
    trials: usize,
    seed: u64,
) -> Result<CdcQsiReport> {
    CdcQsiInstance::new(ensemble, n, rate, delta)?.run(trials, seed)
}
