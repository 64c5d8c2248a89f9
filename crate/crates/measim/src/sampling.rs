//! Random instance generation for the Monte Carlo suites: Gaussian-amplitude
//! pure states, mixed states, effects scaled into [0, I], POVMs and unitaries.

use rand::Rng;

use crate::cq::Povm;
use crate::error::Result;
use crate::qcore::{DensityOperator, Operator, PureState, C64};

fn gaussian(rng: &mut impl Rng) -> f64 {
    // Box-Muller; rand_distr is overkill here.
    let u1: f64 = rng.random::<f64>().max(1e-300);
    let u2: f64 = rng.random();
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}

pub fn random_complex_matrix(dim: usize, rng: &mut impl Rng) -> Operator {
    Operator::from_fn(dim, |_, _| C64::new(gaussian(rng), gaussian(rng)))
}

pub fn random_pure_state(dim: usize, rng: &mut impl Rng) -> PureState {
    loop {
        let amps: Vec<C64> = (0..dim)
            .map(|_| C64::new(gaussian(rng), gaussian(rng)))
            .collect();
        let norm: f64 = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if norm > 1e-6 {
            let amps = amps.into_iter().map(|a| a / norm).collect();
            return PureState::new(amps).expect("normalized");
        }
    }
}

/// Full-rank random density operator `G G^dag / Tr`.
pub fn random_density(dim: usize, rng: &mut impl Rng) -> DensityOperator {
    let g = random_complex_matrix(dim, rng);
    let psd = g.mul(&g.dagger());
    let tr = psd.trace().re;
    DensityOperator::new(psd.scale(1.0 / tr)).expect("psd with unit trace")
}

/// Random effect `0 <= E <= I` via `G^dag G` scaled by its largest eigenvalue.
pub fn random_effect(dim: usize, rng: &mut impl Rng) -> Operator {
    let g = random_complex_matrix(dim, rng);
    let psd = g.dagger().mul(&g).hermitized();
    let top = psd
        .hermitian_eigs()
        .expect("finite")
        .values
        .first()
        .copied()
        .unwrap_or(1.0)
        .max(1e-12);
    let margin: f64 = 0.5 + 0.5 * rng.random::<f64>();
    psd.scale(margin / top)
}

pub fn random_unitary(dim: usize, rng: &mut impl Rng) -> Operator {
    random_complex_matrix(dim, rng)
        .polar_unitary()
        .expect("generic matrix has full-rank polar factor")
}

/// Random POVM with `outcomes` elements: draws PSD operators and normalizes
/// their sum to the identity via `S^{-1/2} E_x S^{-1/2}`.
pub fn random_povm(dim: usize, outcomes: usize, rng: &mut impl Rng) -> Result<Povm> {
    let parts: Vec<Operator> = (0..outcomes)
        .map(|_| {
            let g = random_complex_matrix(dim, rng);
            g.dagger().mul(&g)
        })
        .collect();
    let mut total = Operator::zeros(dim);
    for p in &parts {
        total = total.add(p);
    }
    let (_, pinv_sqrt) = crate::qcore::psd_sqrt_and_pinv_sqrt(&total, 1e-12)?;
    let elements: Vec<Operator> = parts
        .iter()
        .map(|p| pinv_sqrt.mul(p).mul(&pinv_sqrt).hermitized())
        .collect();
    let labels: Vec<String> = (0..outcomes).map(|x| x.to_string()).collect();
    Povm::new(elements, labels)
}
