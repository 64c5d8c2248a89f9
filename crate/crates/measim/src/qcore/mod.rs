//! Dense complex-matrix quantum primitives: operators, states, spectral
//! decompositions, partial traces, purifications and entropies.

mod entropy;
mod layout;
mod op;

pub(crate) use entropy::entropy_of_psd;
pub use entropy::{
    conditional_entropy, conditional_mutual_information, mutual_information, shannon_entropy,
    subsystem_entropy, von_neumann_entropy,
};
pub use layout::{embed, partial_trace, permute_systems, SystemLayout};
pub use op::{Operator, Spectrum, C64};

use crate::error::{Error, Result};
use crate::tol;

/// A positive, unit-trace operator. Stored hermitized.
#[derive(Debug, Clone)]
pub struct DensityOperator {
    op: Operator,
}

impl DensityOperator {
    pub fn new(op: Operator) -> Result<Self> {
        let scale = op.max_abs_entry().max(1.0);
        if !op.is_hermitian(tol::HERM * scale) {
            return Err(Error::InvalidOperator("not Hermitian".into()));
        }
        let op = op.hermitized();
        let spec = op.hermitian_eigs()?;
        let top = spec.values.first().copied().unwrap_or(0.0).max(1.0);
        if let Some(&min) = spec.values.last() {
            if min < -tol::PSD * top {
                return Err(Error::NotPsd(format!("eigenvalue {min}")));
            }
        }
        let tr = op.trace().re;
        if (tr - 1.0).abs() > tol::TRACE * op.dim() as f64 {
            return Err(Error::InvalidOperator(format!("trace {tr} != 1")));
        }
        Ok(Self { op })
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        Self {
            op: Operator::identity(dim).scale(1.0 / dim as f64),
        }
    }

    /// Diagonal density operator from a pmf.
    pub fn from_diagonal(probs: &[f64]) -> Result<Self> {
        check_pmf(probs)?;
        Self::new(Operator::from_real_diagonal(probs))
    }

    pub fn dim(&self) -> usize {
        self.op.dim()
    }

    pub fn operator(&self) -> &Operator {
        &self.op
    }

    /// Eigenvalues sorted descending, clamped into [0, 1].
    pub fn spectrum(&self) -> Spectrum {
        let mut spec = self.op.hermitian_eigs().expect("validated at construction");
        for v in &mut spec.values {
            *v = v.clamp(0.0, 1.0);
        }
        spec
    }

    pub fn tensor(&self, other: &DensityOperator) -> DensityOperator {
        DensityOperator {
            op: self.op.tensor(&other.op),
        }
    }

    pub fn tensor_power(&self, n: usize) -> DensityOperator {
        let mut out = self.clone();
        for _ in 1..n {
            out = out.tensor(self);
        }
        out
    }
}

/// A unit vector together with its ambient dimension.
#[derive(Debug, Clone)]
pub struct PureState {
    amplitudes: Vec<C64>,
}

impl PureState {
    pub fn new(amplitudes: Vec<C64>) -> Result<Self> {
        if amplitudes.is_empty()
            || amplitudes
                .iter()
                .any(|a| !a.re.is_finite() || !a.im.is_finite())
        {
            return Err(Error::InvalidOperator("bad amplitudes".into()));
        }
        let norm: f64 = amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if (norm - 1.0).abs() > tol::NORM * amplitudes.len() as f64 {
            return Err(Error::InvalidOperator(format!("norm {norm} != 1")));
        }
        Ok(Self { amplitudes })
    }

    pub fn basis_state(dim: usize, index: usize) -> Self {
        let mut amplitudes = vec![C64::new(0.0, 0.0); dim];
        amplitudes[index] = C64::new(1.0, 0.0);
        Self { amplitudes }
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }

    pub fn to_density(&self) -> DensityOperator {
        let d = self.dim();
        let op = Operator::from_fn(d, |i, j| self.amplitudes[i] * self.amplitudes[j].conj());
        DensityOperator {
            op: op.hermitized(),
        }
    }

    pub fn tensor(&self, other: &PureState) -> PureState {
        let mut amplitudes = Vec::with_capacity(self.dim() * other.dim());
        for a in &self.amplitudes {
            for b in &other.amplitudes {
                amplitudes.push(a * b);
            }
        }
        PureState { amplitudes }
    }
}

/// Trace norm `Tr sqrt(A^dag A)`, the sum of singular values.
pub fn trace_norm(a: &Operator) -> Result<f64> {
    a.check_finite()?;
    let gram = a.dagger().mul(a);
    let spec = gram.hermitian_eigs()?;
    Ok(spec.values.iter().map(|&v| v.max(0.0).sqrt()).sum())
}

/// Trace distance between two density operators; lies in [0, 2].
pub fn trace_distance(rho: &DensityOperator, sigma: &DensityOperator) -> Result<f64> {
    if rho.dim() != sigma.dim() {
        return Err(Error::DimMismatch(format!(
            "{} vs {}",
            rho.dim(),
            sigma.dim()
        )));
    }
    trace_norm(&rho.operator().sub(sigma.operator()))
}

/// Canonical purification `sum_i sqrt(lambda_i) |i>^R |v_i>^A` with eigenpairs
/// sorted by descending eigenvalue and the phase convention fixed in
/// [`Operator::hermitian_eigs`]. The reference factor comes first.
pub fn canonical_purification(rho: &DensityOperator) -> (PureState, SystemLayout) {
    let d = rho.dim();
    let spec = rho.spectrum();
    let mut amplitudes = vec![C64::new(0.0, 0.0); d * d];
    for i in 0..d {
        let w = spec.values[i].sqrt();
        for a in 0..d {
            amplitudes[i * d + a] = spec.basis[(a, i)] * w;
        }
    }
    let layout = SystemLayout::new(&["R", "A"], &[d, d]).expect("two distinct labels");
    (PureState { amplitudes }, layout)
}

/// Square root and pseudo-inverse square root of a PSD operator, the latter
/// restricted to eigenvalues above `support_tol`.
pub fn psd_sqrt_and_pinv_sqrt(op: &Operator, support_tol: f64) -> Result<(Operator, Operator)> {
    let scale = op.max_abs_entry().max(1.0);
    if !op.is_hermitian(tol::HERM * scale) {
        return Err(Error::NotPsd("not Hermitian".into()));
    }
    let spec = op.hermitized().hermitian_eigs()?;
    let top = spec.values.first().copied().unwrap_or(0.0).max(0.0);
    let mut sqrt_vals = Vec::with_capacity(spec.values.len());
    let mut pinv_vals = Vec::with_capacity(spec.values.len());
    for &v in &spec.values {
        if v < -tol::PSD * top.max(1.0) {
            return Err(Error::NotPsd(format!("eigenvalue {v}")));
        }
        let v = v.max(0.0);
        sqrt_vals.push(v.sqrt());
        pinv_vals.push(if v > support_tol { 1.0 / v.sqrt() } else { 0.0 });
    }
    Ok((spec.recompose(&sqrt_vals), spec.recompose(&pinv_vals)))
}

pub(crate) fn check_pmf(p: &[f64]) -> Result<()> {
    if p.is_empty() || p.iter().any(|&x| !x.is_finite() || x < -tol::TRACE) {
        return Err(Error::BadPmf("negative or non-finite entry".into()));
    }
    let total: f64 = p.iter().sum();
    if (total - 1.0).abs() > 1e-8 {
        return Err(Error::BadPmf(format!("sums to {total}")));
    }
    Ok(())
}
