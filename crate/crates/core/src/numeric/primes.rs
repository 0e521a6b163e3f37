use std::collections::BTreeMap;

use num_bigint::BigUint;
use serde::{Deserialize, Serialize};

use super::NumericError;

fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

fn pow_mod(mut base: u64, mut exp: u64, m: u64) -> u64 {
    let mut acc = 1 % m;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, m);
        }
        base = mul_mod(base, base, m);
        exp >>= 1;
    }
    acc
}

/// Deterministic primality test for the whole `u64` range.
///
/// Small inputs use trial division; larger ones use Miller-Rabin with the
/// first twelve prime bases, which has no pseudoprimes below 3.3e24.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    const SMALL: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];
    for p in SMALL {
        if n == p {
            return true;
        }
        if n.is_multiple_of(p) {
            return false;
        }
    }
    if n < 37 * 37 {
        return true;
    }
    let mut d = n - 1;
    let mut s = 0;
    while d.is_multiple_of(2) {
        d /= 2;
        s += 1;
    }
    'witness: for a in SMALL {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

pub(crate) fn ensure_prime(p: u64) -> Result<(), NumericError> {
    if is_prime(p) {
        Ok(())
    } else {
        Err(NumericError::NotPrime(p))
    }
}

/// Exact factorization `n = ∏ p^e`, keyed by prime in increasing order.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PrimeFactorization {
    factors: BTreeMap<u64, u32>,
}

impl PrimeFactorization {
    /// Exponent of `p`, zero when `p` does not divide the factored integer.
    pub fn exponent(&self, p: u64) -> u32 {
        self.factors.get(&p).copied().unwrap_or(0)
    }

    pub fn primes(&self) -> impl Iterator<Item = u64> + '_ {
        self.factors.keys().copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = (u64, u32)> + '_ {
        self.factors.iter().map(|(&p, &e)| (p, e))
    }

    pub fn is_empty(&self) -> bool {
        self.factors.is_empty()
    }

    /// Reconstructs the factored integer.
    pub fn value(&self) -> BigUint {
        self.factors.iter().fold(BigUint::from(1u32), |acc, (&p, &e)| acc * BigUint::from(p).pow(e))
    }
}

/// Factors `n` by trial division, stopping early once the cofactor is prime.
pub fn factorize(n: u64) -> Result<PrimeFactorization, NumericError> {
    if n == 0 {
        return Err(NumericError::FactorZero);
    }
    let mut factors = BTreeMap::new();
    let mut rest = n;
    let mut push = |p: u64, rest: &mut u64| {
        let mut e = 0;
        while (*rest).is_multiple_of(p) {
            *rest /= p;
            e += 1;
        }
        if e > 0 {
            factors.insert(p, e);
        }
    };
    push(2, &mut rest);
    let mut d = 3u64;
    while rest > 1 {
        if is_prime(rest) {
            push(rest, &mut rest);
            break;
        }
        if d.saturating_mul(d) > rest {
            push(rest, &mut rest);
            break;
        }
        push(d, &mut rest);
        d += 2;
    }
    Ok(PrimeFactorization { factors })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn primality_small_range_matches_sieve() {
        let limit = 10_000usize;
        let mut sieve = vec![true; limit];
        sieve[0] = false;
        sieve[1] = false;
        for i in 2..limit {
            if sieve[i] {
                for j in (i * i..limit).step_by(i) {
                    sieve[j] = false;
                }
            }
        }
        for (n, &expected) in sieve.iter().enumerate() {
            assert_eq!(is_prime(n as u64), expected, "n = {n}");
        }
    }

    #[test]
    fn primality_large() {
        assert!(is_prime(18_446_744_073_709_551_557)); // largest u64 prime
        assert!(!is_prime(3_215_031_751)); // strong pseudoprime to 2,3,5,7
        assert!(!is_prime(u64::MAX));
    }

    #[test]
    fn factor_examples() {
        let f = factorize(12).unwrap();
        assert_eq!(f.iter().collect::<Vec<_>>(), vec![(2, 2), (3, 1)]);
        assert!(factorize(1).unwrap().is_empty());
        let f = factorize(60).unwrap();
        assert_eq!(f.iter().collect::<Vec<_>>(), vec![(2, 2), (3, 1), (5, 1)]);
        assert_eq!(factorize(0), Err(NumericError::FactorZero));
    }

    #[test]
    fn factor_large_prime_cofactor() {
        let n = 18_446_744_073_709_551_557u64;
        let f = factorize(n).unwrap();
        assert_eq!(f.exponent(n), 1);
        let n = 2u64.pow(10) * 4_294_967_291; // 2^10 * largest u32 prime
        let f = factorize(n).unwrap();
        assert_eq!(f.iter().collect::<Vec<_>>(), vec![(2, 10), (4_294_967_291, 1)]);
    }
}
