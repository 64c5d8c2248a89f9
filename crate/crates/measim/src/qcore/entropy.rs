//! Entropy functionals, all in bits (base-2 logarithms).

use super::layout::{partial_trace, SystemLayout};
use super::{DensityOperator, Operator};
use crate::error::{Error, Result};
use crate::tol;

pub fn shannon_entropy(pmf: &[f64]) -> f64 {
    pmf.iter()
        .map(|&p| {
            let p = p.clamp(0.0, 1.0);
            if p > 0.0 {
                -p * p.log2()
            } else {
                0.0
            }
        })
        .sum()
}

/// `-Tr(rho log2 rho)`, eigenvalues clamped to [0, 1].
pub fn von_neumann_entropy(rho: &DensityOperator) -> f64 {
    shannon_entropy(&rho.spectrum().values)
}

/// Entropy of a PSD operator after normalizing by its trace. Used on
/// conditional blocks; returns 0 for (numerically) zero operators.
pub(crate) fn entropy_of_psd(op: &Operator) -> Result<f64> {
    let tr = op.trace().re;
    if tr <= tol::TRACE {
        return Ok(0.0);
    }
    let spec = op.hermitized().hermitian_eigs()?;
    let pmf: Vec<f64> = spec
        .values
        .iter()
        .map(|&v| (v / tr).clamp(0.0, 1.0))
        .collect();
    Ok(shannon_entropy(&pmf))
}

fn reduced(rho: &DensityOperator, layout: &SystemLayout, labels: &[&str]) -> Result<Operator> {
    if labels.is_empty() {
        return Err(Error::BadLayout("empty label group".into()));
    }
    let (op, _) = partial_trace(rho.operator(), layout, labels)?;
    Ok(op)
}

fn check_disjoint(groups: &[&[&str]]) -> Result<()> {
    let mut seen: Vec<&str> = Vec::new();
    for g in groups {
        for l in *g {
            if seen.contains(l) {
                return Err(Error::BadLayout(format!("overlapping label {l}")));
            }
            seen.push(l);
        }
    }
    Ok(())
}

/// `H(S)` for the reduced state on the labeled factors.
pub fn subsystem_entropy(
    rho: &DensityOperator,
    layout: &SystemLayout,
    labels: &[&str],
) -> Result<f64> {
    entropy_of_psd(&reduced(rho, layout, labels)?)
}

/// `H(S|T) = H(ST) - H(T)`.
pub fn conditional_entropy(
    rho: &DensityOperator,
    layout: &SystemLayout,
    s: &[&str],
    t: &[&str],
) -> Result<f64> {
    check_disjoint(&[s, t])?;
    let st: Vec<&str> = s.iter().chain(t.iter()).copied().collect();
    Ok(subsystem_entropy(rho, layout, &st)? - subsystem_entropy(rho, layout, t)?)
}

/// `I(S;T) = H(S) + H(T) - H(ST)`.
pub fn mutual_information(
    rho: &DensityOperator,
    layout: &SystemLayout,
    s: &[&str],
    t: &[&str],
) -> Result<f64> {
    check_disjoint(&[s, t])?;
    let st: Vec<&str> = s.iter().chain(t.iter()).copied().collect();
    Ok(
        subsystem_entropy(rho, layout, s)? + subsystem_entropy(rho, layout, t)?
            - subsystem_entropy(rho, layout, &st)?,
    )
}

/// `I(S;T|U) = H(SU) + H(TU) - H(STU) - H(U)`.
pub fn conditional_mutual_information(
    rho: &DensityOperator,
    layout: &SystemLayout,
    s: &[&str],
    t: &[&str],
    u: &[&str],
) -> Result<f64> {
    check_disjoint(&[s, t, u])?;
    let su: Vec<&str> = s.iter().chain(u.iter()).copied().collect();
    let tu: Vec<&str> = t.iter().chain(u.iter()).copied().collect();
    let stu: Vec<&str> = s.iter().chain(t.iter()).chain(u.iter()).copied().collect();
    Ok(
        subsystem_entropy(rho, layout, &su)? + subsystem_entropy(rho, layout, &tu)?
            - subsystem_entropy(rho, layout, &stu)?
            - subsystem_entropy(rho, layout, u)?,
    )
}
