mod common;

use adelic::numeric::{factorize, is_prime, padic_abs, valuation, PadicResidue, Rational, Valuation};
use common::{nonzero_rational, prime, r, rational, PRIMES};
use num_bigint::BigUint;
use proptest::prelude::*;

fn primes_of(q: &Rational) -> Vec<u64> {
    let n = u64::try_from(q.numer().magnitude()).unwrap();
    let d = u64::try_from(q.denom().magnitude()).unwrap();
    let mut ps: Vec<u64> = factorize(n).unwrap().primes().chain(factorize(d).unwrap().primes()).collect();
    ps.sort_unstable();
    ps.dedup();
    ps
}

proptest! {
    #[test]
    fn field_laws(a in rational(), b in rational(), c in rational()) {
        prop_assert_eq!(&(&a + &b) + &c, &a + &(&b + &c));
        prop_assert_eq!(&a * &(&b + &c), &(&a * &b) + &(&a * &c));
        prop_assert_eq!(&a + &b, &b + &a);
        prop_assert!((&a + &(-&a)).is_zero());
        if let Some(inv) = a.recip() {
            prop_assert_eq!(&a * &inv, Rational::one());
        }
    }

    #[test]
    fn floor_and_fraction(a in rational()) {
        let frac = a.fract_floor();
        prop_assert!(!frac.is_negative() && frac < Rational::one());
        prop_assert_eq!(Rational::from_integer(a.floor()) + frac, a);
    }

    #[test]
    fn valuation_is_multiplicative_and_ultrametric(a in nonzero_rational(), b in nonzero_rational(), p in prime()) {
        let va = valuation(&a, p).unwrap().finite().unwrap();
        let vb = valuation(&b, p).unwrap().finite().unwrap();
        prop_assert_eq!(valuation(&(&a * &b), p).unwrap(), Valuation::Finite(va + vb));
        prop_assert!(valuation(&(&a + &b), p).unwrap().at_least(va.min(vb)));
        let abs_sum = padic_abs(&(&a + &b), p).unwrap();
        let bound = padic_abs(&a, p).unwrap().max(padic_abs(&b, p).unwrap());
        prop_assert!(abs_sum <= bound);
    }

    #[test]
    fn product_formula(q in nonzero_rational()) {
        let product = primes_of(&q)
            .into_iter()
            .map(|p| padic_abs(&q, p).unwrap())
            .fold(q.abs(), |acc, x| acc * x);
        prop_assert_eq!(product, Rational::one());
    }

    #[test]
    fn factorize_round_trip(n in 1u64..=1_000_000_000_000) {
        let f = factorize(n).unwrap();
        prop_assert_eq!(f.value(), BigUint::from(n));
        for p in f.primes() {
            prop_assert!(is_prime(p));
        }
    }

    #[test]
    fn residue_is_congruent_to_its_rational(q in rational(), p in prime(), depth in 1u32..=8) {
        let x = PadicResidue::new(p, depth, &q).unwrap();
        let modulus = Rational::from_integer(p.pow(depth) as i64);
        prop_assert!(!x.rep().is_negative() && x.rep() < &modulus);
        prop_assert!(valuation(&(&q - x.rep()), p).unwrap().at_least(depth as i64));
    }

    #[test]
    fn residue_arithmetic_matches_rationals(a in rational(), b in rational(), p in prime(), depth in 1u32..=8) {
        let (x, y) = (PadicResidue::new(p, depth, &a).unwrap(), PadicResidue::new(p, depth, &b).unwrap());
        prop_assert!(x.add(&y).unwrap().congruent(&PadicResidue::new(p, depth, &(&a + &b)).unwrap()));
        prop_assert!(x.sub(&y).unwrap().congruent(&PadicResidue::new(p, depth, &(&a - &b)).unwrap()));
        prop_assert!(x.add(&x.neg()).unwrap().is_zero());
    }

    #[test]
    fn fractional_parts_sum_to_q_mod_one(q in rational()) {
        let den = factorize(u64::try_from(q.denom().magnitude()).unwrap()).unwrap();
        let total: Rational = den.primes().map(|p| PadicResidue::new(p, 4, &q).unwrap().fractional_part()).sum();
        prop_assert!((&q - &total).is_integer(), "q = {}, sum = {}", q, total);
    }

    #[test]
    fn fractional_part_vanishes_off_the_denominator(q in rational(), p in prime()) {
        let integral = valuation(&q, p).unwrap().at_least(0);
        let frac = PadicResidue::new(p, 6, &q).unwrap().fractional_part();
        prop_assert_eq!(frac.is_zero(), integral);
    }
}

#[test]
fn string_round_trip() {
    for p in PRIMES {
        let q = r(-7 * p as i64, 3 * p as i64 + 1);
        assert_eq!(q.to_string().parse::<Rational>().unwrap(), q);
    }
}
