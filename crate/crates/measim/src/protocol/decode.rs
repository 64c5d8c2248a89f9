//! Sequential decoding: a cascade of binary projective tests with Born
//! sampling, gentle collapse, and the polar-decomposition recovery step.

use rand::Rng;

use crate::error::{Error, Result};
use crate::qcore::{Operator, C64};
use crate::typicality::ProductProjector;

/// One candidate's yes/no test. Pure lines avoid materializing projectors
/// when the conditional states are rank one.
#[derive(Debug, Clone)]
pub enum CandidateTest {
    Projector(Operator),
    PureLine(Vec<C64>),
    Product(ProductProjector),
}

impl CandidateTest {
    fn dim(&self) -> usize {
        match self {
            CandidateTest::Projector(p) => p.dim(),
            CandidateTest::PureLine(v) => v.len(),
            CandidateTest::Product(p) => p.dim(),
        }
    }

    fn to_matrix(&self) -> Operator {
        match self {
            CandidateTest::Projector(p) => p.clone(),
            CandidateTest::PureLine(c) => Operator::projector(c),
            CandidateTest::Product(p) => p.to_operator(),
        }
    }

    fn apply_vec(&self, v: &[C64]) -> Vec<C64> {
        match self {
            CandidateTest::Projector(p) => p.apply(v),
            CandidateTest::PureLine(c) => {
                let overlap: C64 = c.iter().zip(v.iter()).map(|(a, b)| a.conj() * b).sum();
                c.iter().map(|a| a * overlap).collect()
            }
            CandidateTest::Product(p) => p.apply_to_vector(v),
        }
    }
}

/// The state the decoder works on.
#[derive(Debug, Clone)]
pub enum ReceivedState {
    Pure(Vec<C64>),
    Mixed(Operator),
}

impl ReceivedState {
    fn dim(&self) -> usize {
        match self {
            ReceivedState::Pure(v) => v.len(),
            ReceivedState::Mixed(op) => op.dim(),
        }
    }

    fn norm(&self) -> f64 {
        match self {
            ReceivedState::Pure(v) => v.iter().map(|a| a.norm_sqr()).sum(),
            ReceivedState::Mixed(op) => op.trace().re,
        }
    }

    /// Probability weight of the "yes" branch.
    fn yes_weight(&self, test: &CandidateTest) -> f64 {
        match (self, test) {
            (ReceivedState::Pure(v), CandidateTest::PureLine(c)) => {
                let overlap: C64 = c.iter().zip(v.iter()).map(|(a, b)| a.conj() * b).sum();
                overlap.norm_sqr()
            }
            (ReceivedState::Pure(v), CandidateTest::Projector(p)) => p
                .apply(v)
                .iter()
                .zip(v.iter())
                .map(|(a, b)| (b.conj() * a).re)
                .sum(),
            (ReceivedState::Pure(v), CandidateTest::Product(p)) => {
                p.apply_to_vector(v).iter().map(|a| a.norm_sqr()).sum()
            }
            (ReceivedState::Mixed(op), test) => test.to_matrix().mul(op).trace().re,
        }
    }

    /// Collapse onto the yes (or no) branch of a test, unnormalized.
    fn collapse(&self, test: &CandidateTest, yes: bool) -> ReceivedState {
        match self {
            ReceivedState::Pure(v) => {
                let projected: Vec<C64> = match test {
                    CandidateTest::PureLine(c) => {
                        let overlap: C64 = c.iter().zip(v.iter()).map(|(a, b)| a.conj() * b).sum();
                        c.iter().map(|a| a * overlap).collect()
                    }
                    CandidateTest::Projector(p) => p.apply(v),
                    CandidateTest::Product(p) => p.apply_to_vector(v),
                };
                if yes {
                    ReceivedState::Pure(projected)
                } else {
                    ReceivedState::Pure(
                        v.iter().zip(projected.iter()).map(|(a, b)| a - b).collect(),
                    )
                }
            }
            ReceivedState::Mixed(op) => {
                let p = test.to_matrix();
                let p = if yes {
                    p
                } else {
                    Operator::identity(p.dim()).sub(&p)
                };
                ReceivedState::Mixed(p.mul(op).mul(&p))
            }
        }
    }

    pub fn to_operator(&self) -> Operator {
        match self {
            ReceivedState::Pure(v) => Operator::projector(v),
            ReceivedState::Mixed(op) => op.clone(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct DecodeOutcome {
    /// Position in the candidate list that fired.
    pub index: usize,
    /// Normalized post-measurement state after the recovery step. Pure
    /// inputs stay in vector form.
    pub post_state: ReceivedState,
    /// Per-step binary outcomes (false = "no"), including the final yes.
    pub outcomes: Vec<bool>,
}

/// Apply `{Pi_i, I - Pi_i}` in candidate order with Born sampling and stop
/// at the first yes. The recovery unitary from the left polar decomposition
/// `A = U sqrt(Theta)` of the accumulated test chain turns the collapsed
/// state `A rho A^dag / p` into `sqrt(Theta) rho sqrt(Theta) / p`, which is
/// what this returns.
pub fn sequential_decode(
    candidates: &[CandidateTest],
    received: &ReceivedState,
    rng: &mut impl Rng,
) -> Result<DecodeOutcome> {
    if candidates.is_empty() {
        return Err(Error::DecodeFailure);
    }
    let dim = received.dim();
    if candidates.iter().any(|c| c.dim() != dim) {
        return Err(Error::DimMismatch("candidate vs state".into()));
    }
    let mut state = received.clone();
    let mut outcomes = Vec::with_capacity(candidates.len());
    for (i, test) in candidates.iter().enumerate() {
        let total = state.norm();
        if total <= 1e-300 {
            return Err(Error::DecodeFailure);
        }
        let p_yes = (state.yes_weight(test) / total).clamp(0.0, 1.0);
        let yes = rng.random::<f64>() < p_yes;
        outcomes.push(yes);
        if yes {
            let theta_sqrt = chain_element_sqrt(&candidates[..=i], dim)?;
            let post = match received {
                ReceivedState::Pure(v) => {
                    let recovered = theta_sqrt.apply(v);
                    let norm: f64 = recovered.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
                    if norm <= 1e-150 {
                        return Err(Error::DecodeFailure);
                    }
                    ReceivedState::Pure(recovered.iter().map(|a| a / norm).collect())
                }
                ReceivedState::Mixed(op) => {
                    let raw = theta_sqrt.mul(op).mul(&theta_sqrt).hermitized();
                    let w = raw.trace().re;
                    if w <= 1e-300 {
                        return Err(Error::DecodeFailure);
                    }
                    ReceivedState::Mixed(raw.scale(1.0 / w))
                }
            };
            return Ok(DecodeOutcome {
                index: i,
                post_state: post,
                outcomes,
            });
        }
        state = state.collapse(test, false);
    }
    Err(Error::DecodeFailure)
}

/// `sqrt(A^dag A)` for the accumulated chain operator
/// `A = Pi_i Pi-hat_{i-1} ... Pi-hat_1`, built by applying the chain to
/// basis vectors; one Hermitian eigendecomposition.
fn chain_element_sqrt(chain: &[CandidateTest], dim: usize) -> Result<Operator> {
    let mut accumulated = Operator::zeros(dim);
    for j in 0..dim {
        let mut v = vec![C64::new(0.0, 0.0); dim];
        v[j] = C64::new(1.0, 0.0);
        for (k, t) in chain.iter().enumerate() {
            let projected = t.apply_vec(&v);
            if k + 1 == chain.len() {
                v = projected;
            } else {
                for (a, b) in v.iter_mut().zip(projected.iter()) {
                    *a -= b;
                }
            }
        }
        for (r, &val) in v.iter().enumerate() {
            accumulated.set(r, j, val);
        }
    }
    let theta = accumulated.dagger().mul(&accumulated).hermitized();
    let spec = theta.hermitian_eigs()?;
    let vals: Vec<f64> = spec.values.iter().map(|&v| v.max(0.0).sqrt()).collect();
    Ok(spec.recompose(&vals))
}

/// Success probability of a single gentle test, `Tr(Pi rho)`; used as the
/// consistency oracle for singleton candidate lists.
pub fn singleton_success_probability(test: &CandidateTest, state: &ReceivedState) -> f64 {
    state.yes_weight(test) / state.norm()
}
