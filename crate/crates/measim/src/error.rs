//! Error type shared across the toolkit.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid operator: {0}")]
    InvalidOperator(String),
    #[error("dimension mismatch: {0}")]
    DimMismatch(String),
    #[error("bad system layout: {0}")]
    BadLayout(String),
    #[error("operator is not positive semidefinite: {0}")]
    NotPsd(String),
    #[error("invalid probability distribution: {0}")]
    BadPmf(String),
    #[error("bad sequence: {0}")]
    BadSequence(String),
    #[error("size limit exceeded: {0}")]
    SizeLimit(String),
    #[error("typical set is empty")]
    EmptyTypicalSet,
    #[error("sub-POVM violation: {0}")]
    SubPovmViolation(String),
    #[error("bad hash range: {0}")]
    BadRange(String),
    #[error("sequential decoding exhausted all candidates")]
    DecodeFailure,
    #[error("effect operator outside [0, I]: {0}")]
    BadEffect(String),
    #[error("operator is not a projector: {0}")]
    BadProjector(String),
    #[error("bad operator sampler: {0}")]
    BadSampler(String),
    #[error("refinement does not reproduce the target POVM: {0}")]
    BadRefinement(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
