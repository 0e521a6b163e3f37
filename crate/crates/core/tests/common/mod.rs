#![allow(dead_code)]

use adelic::adele::{Adele, FiniteAdele};
use adelic::numeric::{PadicResidue, Rational};
use proptest::prelude::*;

pub const PRIMES: [u64; 5] = [2, 3, 5, 7, 11];

pub fn r(n: i64, d: i64) -> Rational {
    Rational::new(n, d)
}

pub fn rational() -> impl Strategy<Value = Rational> {
    (-1_000_000i64..=1_000_000, 1i64..=10_000).prop_map(|(n, d)| r(n, d))
}

pub fn nonzero_rational() -> impl Strategy<Value = Rational> {
    rational().prop_filter("nonzero", |q| !q.is_zero())
}

pub fn prime() -> impl Strategy<Value = u64> {
    prop::sample::select(PRIMES.to_vec())
}

/// Finite adele over the first few primes, with denominators up to `p^2`.
pub fn finite_adele(depth: u32) -> impl Strategy<Value = FiniteAdele> {
    prop::collection::vec((any::<bool>(), -500i64..=500, 0u32..=2), PRIMES.len()).prop_map(move |coords| {
        let residues: Vec<PadicResidue> = PRIMES
            .iter()
            .zip(coords)
            .filter(|(_, (keep, _, _))| *keep)
            .map(|(&p, (_, num, d))| PadicResidue::new(p, depth, &r(num, p.pow(d) as i64)).unwrap())
            .collect();
        FiniteAdele::from_residues(residues).unwrap()
    })
}

/// Adele with a dyadic real part in `(-real, real)`, so real sums are exact.
pub fn adele(depth: u32, real: f64) -> impl Strategy<Value = Adele> {
    let bound = (real * 1024.0) as i64;
    (finite_adele(depth), -bound + 1..bound).prop_map(|(f, k)| Adele::new(k as f64 / 1024.0, f).unwrap())
}
