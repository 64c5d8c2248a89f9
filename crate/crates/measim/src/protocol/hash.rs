//! Multiply-shift hashing over a fixed Mersenne prime. The family's
//! collision probability on distinct inputs is at most `2 / range`, one bit
//! looser than the ideal two-universal `1 / range`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;

use crate::error::{Error, Result};

const PRIME: u128 = (1u128 << 61) - 1;

#[derive(Debug, Clone)]
pub struct HashFunction {
    a: u64,
    b: u64,
    range: u64,
    domain_bits: u32,
    seed: u64,
}

impl HashFunction {
    /// `h(x) = ((a x + b) mod p) mod range` with `(a, b)` drawn from the seed.
    pub fn new(seed: u64, domain_bits: u32, range: u64) -> Result<Self> {
        if domain_bits == 0 || domain_bits > 61 {
            return Err(Error::BadRange(format!(
                "domain of {domain_bits} bits outside 1..=61"
            )));
        }
        if range == 0 {
            return Err(Error::BadRange("empty range".into()));
        }
        let domain = 1u128 << domain_bits;
        if range as u128 > domain {
            return Err(Error::BadRange(format!(
                "range {range} exceeds domain 2^{domain_bits}"
            )));
        }
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        let a = 1 + rng.random_range(0..(PRIME - 1) as u64);
        let b = rng.random_range(0..PRIME as u64);
        Ok(Self {
            a,
            b,
            range,
            domain_bits,
            seed,
        })
    }

    /// Fixed-coefficient instance, used by tests for the injective case.
    pub fn with_coefficients(a: u64, b: u64, domain_bits: u32, range: u64) -> Result<Self> {
        let mut h = Self::new(0, domain_bits, range)?;
        h.a = a;
        h.b = b;
        Ok(h)
    }

    pub fn eval(&self, x: u64) -> u64 {
        debug_assert!(self.domain_bits == 64 || x < (1u64 << self.domain_bits.min(63)));
        (((self.a as u128 * x as u128 + self.b as u128) % PRIME) % self.range as u128) as u64
    }

    pub fn range(&self) -> u64 {
        self.range
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }
}

/// Pack a symbol sequence into the hash domain, base `alphabet`.
pub fn encode_sequence(xn: &[usize], alphabet: usize) -> Result<(u64, u32)> {
    let bits_per = (alphabet as f64).log2().ceil().max(1.0) as u32;
    let total_bits = bits_per * xn.len() as u32;
    if total_bits > 61 {
        return Err(Error::BadRange(format!(
            "sequence needs {total_bits} bits, above the 61-bit hash domain"
        )));
    }
    let mut acc = 0u64;
    for &x in xn {
        acc = (acc << bits_per) | x as u64;
    }
    Ok((acc, total_bits.max(1)))
}
