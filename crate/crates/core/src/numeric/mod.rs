//! Exact rational arithmetic, prime factorization, p-adic valuations and
//! residue classes modulo `p^k Z_p`.

mod primes;
mod rational;
mod residue;

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

pub use primes::{factorize, is_prime, PrimeFactorization};
pub use rational::Rational;
pub use residue::PadicResidue;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum NumericError {
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("cannot factor zero")]
    FactorZero,
    #[error("zero denominator")]
    ZeroDenominator,
    #[error("cannot parse rational from {0:?}")]
    Parse(String),
    #[error("residues at different primes ({0} and {1})")]
    PrimeMismatch(u64, u64),
    #[error("insufficient p-adic depth at prime {prime}: need {needed}, have {available}")]
    Precision { prime: u64, needed: i64, available: u32 },
}

/// A p-adic valuation; zero has valuation `Infinite`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Valuation {
    Finite(i64),
    Infinite,
}

impl Valuation {
    pub fn finite(self) -> Option<i64> {
        match self {
            Valuation::Finite(v) => Some(v),
            Valuation::Infinite => None,
        }
    }

    /// `self >= bound`, with `Infinite` above every integer.
    pub fn at_least(self, bound: i64) -> bool {
        self >= Valuation::Finite(bound)
    }
}

impl fmt::Display for Valuation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Valuation::Finite(v) => write!(f, "{v}"),
            Valuation::Infinite => f.write_str("inf"),
        }
    }
}

/// Exponent of `p` in a nonzero integer.
pub(crate) fn bigint_valuation(n: &BigInt, p: &BigInt) -> u32 {
    debug_assert!(!n.is_zero());
    let mut v = 0;
    let mut m = n.abs();
    loop {
        let (q, r) = m.div_rem(p);
        if !r.is_zero() {
            return v;
        }
        m = q;
        v += 1;
    }
}

/// Inverse of `a` modulo `m`, in `[0, m)`.
pub(crate) fn mod_inverse(a: &BigInt, m: &BigInt) -> Option<BigInt> {
    if m.is_one() {
        return Some(BigInt::zero());
    }
    let e = a.mod_floor(m).extended_gcd(m);
    if !e.gcd.is_one() {
        return None;
    }
    Some(e.x.mod_floor(m))
}

/// Exponent of `p` in `r`.
pub fn valuation(r: &Rational, p: u64) -> Result<Valuation, NumericError> {
    primes::ensure_prime(p)?;
    if r.is_zero() {
        return Ok(Valuation::Infinite);
    }
    let pb = BigInt::from(p);
    let up = bigint_valuation(r.numer(), &pb) as i64;
    let down = bigint_valuation(r.denom(), &pb) as i64;
    Ok(Valuation::Finite(up - down))
}

/// `|r|_p = p^(-v_p(r))`, and `0` for `r = 0`.
pub fn padic_abs(r: &Rational, p: u64) -> Result<Rational, NumericError> {
    Ok(match valuation(r, p)? {
        Valuation::Infinite => Rational::zero(),
        Valuation::Finite(v) => Rational::from_integer(p as i64).pow(-(v as i32)),
    })
}

/// Fractional part of a residue class: see [`PadicResidue::fractional_part`].
pub fn fractional_part(x: &PadicResidue) -> Rational {
    x.fractional_part()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(n: i64, d: i64) -> Rational {
        Rational::new(n, d)
    }

    #[test]
    fn valuation_examples() {
        assert_eq!(valuation(&r(12, 1), 2), Ok(Valuation::Finite(2)));
        assert_eq!(valuation(&r(1, 9), 3), Ok(Valuation::Finite(-2)));
        assert_eq!(valuation(&Rational::zero(), 5), Ok(Valuation::Infinite));
        assert_eq!(valuation(&r(12, 1), 4), Err(NumericError::NotPrime(4)));
        assert_eq!(valuation(&r(12, 1), 1), Err(NumericError::NotPrime(1)));
    }

    #[test]
    fn padic_abs_examples() {
        assert_eq!(padic_abs(&r(12, 1), 2), Ok(r(1, 4)));
        assert_eq!(padic_abs(&r(1, 9), 3), Ok(r(9, 1)));
        assert_eq!(padic_abs(&Rational::zero(), 7), Ok(Rational::zero()));
        assert!(padic_abs(&r(3, 1), 9).is_err());
    }

    #[test]
    fn valuation_ordering() {
        assert!(Valuation::Finite(i64::MAX) < Valuation::Infinite);
        assert!(Valuation::Infinite.at_least(1_000));
        assert!(!Valuation::Finite(2).at_least(3));
    }

    #[test]
    fn inverse_mod() {
        let inv = mod_inverse(&BigInt::from(3), &BigInt::from(8)).unwrap();
        assert_eq!(inv, BigInt::from(3));
        assert!(mod_inverse(&BigInt::from(2), &BigInt::from(8)).is_none());
        assert_eq!(mod_inverse(&BigInt::from(-1), &BigInt::from(7)), Some(BigInt::from(6)));
    }
}
