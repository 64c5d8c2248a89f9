//! Numerical toolkit for quantum measurement compression: single-letter rate
//! regions, randomized protocol constructions at small block length, and
//! Monte Carlo verifiers for the operator lemmas behind them.

// index loops here usually walk several tensors in lockstep
#![allow(clippy::needless_range_loop)]

pub mod bounds;
pub mod cli;
pub mod cq;
pub mod error;
pub mod protocol;
pub mod qcore;
pub mod rates;
pub mod sampling;
pub mod tol;
pub mod typicality;

pub use error::{Error, Result};
