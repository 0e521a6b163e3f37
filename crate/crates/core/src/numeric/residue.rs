use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::One;
use serde::{Deserialize, Serialize};

use super::primes::ensure_prime;
use super::{bigint_valuation, mod_inverse, valuation, NumericError, Rational, Valuation};

/// A class in `Q_p / p^k Z_p`.
///
/// The representative is canonical: the unique rational with a `p`-power
/// denominator lying in `[0, p^k)`. Two residues of the same prime and depth
/// are therefore congruent exactly when they compare equal.
#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "ResidueRepr", into = "ResidueRepr")]
pub struct PadicResidue {
    prime: u64,
    depth: u32,
    rep: Rational,
}

#[derive(Serialize, Deserialize)]
struct ResidueRepr {
    p: u64,
    k: u32,
    rep: Rational,
}

impl TryFrom<ResidueRepr> for PadicResidue {
    type Error = NumericError;
    fn try_from(r: ResidueRepr) -> Result<Self, Self::Error> {
        PadicResidue::new(r.p, r.k, &r.rep)
    }
}

impl From<PadicResidue> for ResidueRepr {
    fn from(r: PadicResidue) -> Self {
        ResidueRepr { p: r.prime, k: r.depth, rep: r.rep }
    }
}

impl PadicResidue {
    /// Class of `value` in `Q_p / p^depth Z_p`. Any rational is accepted;
    /// denominators prime to `p` are inverted modulo the working power of `p`.
    pub fn new(prime: u64, depth: u32, value: &Rational) -> Result<Self, NumericError> {
        ensure_prime(prime)?;
        Ok(Self::reduce(prime, depth, value))
    }

    fn reduce(prime: u64, depth: u32, value: &Rational) -> Self {
        let p = BigInt::from(prime);
        let s = bigint_valuation(value.denom(), &p);
        let p_s = p.pow(s);
        let unit_denom = value.denom() / &p_s;
        let modulus = p.pow(depth + s);
        let rep = if modulus.is_one() {
            Rational::zero()
        } else {
            let inv = mod_inverse(&unit_denom, &modulus).expect("unit part of the denominator is prime to p");
            let numer = (value.numer() * inv).mod_floor(&modulus);
            Rational::from_bigints(numer, p_s).expect("p^s is nonzero")
        };
        Self { prime, depth, rep }
    }

    pub fn zero(prime: u64, depth: u32) -> Result<Self, NumericError> {
        Self::new(prime, depth, &Rational::zero())
    }

    pub fn prime(&self) -> u64 {
        self.prime
    }

    pub fn depth(&self) -> u32 {
        self.depth
    }

    /// Canonical representative in `[0, p^depth)`.
    pub fn rep(&self) -> &Rational {
        &self.rep
    }

    /// Valuation of the canonical representative; `Infinite` means the class
    /// is `p^depth Z_p` itself.
    pub fn valuation(&self) -> Valuation {
        valuation(&self.rep, self.prime).expect("prime validated at construction")
    }

    /// Exponent `d` of the representative's denominator `p^d`.
    pub fn denominator_exponent(&self) -> u32 {
        bigint_valuation(self.rep.denom(), &BigInt::from(self.prime))
    }

    pub fn is_integral(&self) -> bool {
        self.rep.is_integer()
    }

    /// The class is zero modulo `p^depth Z_p`.
    pub fn is_zero(&self) -> bool {
        self.rep.is_zero()
    }

    /// Reduces to a coarser depth. Asking for more depth than is stored is a
    /// precision error.
    pub fn truncate(&self, depth: u32) -> Result<Self, NumericError> {
        if depth > self.depth {
            return Err(NumericError::Precision { prime: self.prime, needed: depth as i64, available: self.depth });
        }
        Ok(Self::reduce(self.prime, depth, &self.rep))
    }

    fn check_prime(&self, other: &Self) -> Result<(), NumericError> {
        if self.prime != other.prime {
            return Err(NumericError::PrimeMismatch(self.prime, other.prime));
        }
        Ok(())
    }

    /// Sum of classes at the smaller of the two depths.
    pub fn add(&self, other: &Self) -> Result<Self, NumericError> {
        self.check_prime(other)?;
        Ok(Self::reduce(self.prime, self.depth.min(other.depth), &(&self.rep + &other.rep)))
    }

    pub fn sub(&self, other: &Self) -> Result<Self, NumericError> {
        self.check_prime(other)?;
        Ok(Self::reduce(self.prime, self.depth.min(other.depth), &(&self.rep - &other.rep)))
    }

    pub fn neg(&self) -> Self {
        Self::reduce(self.prime, self.depth, &-&self.rep)
    }

    /// Adds an exact rational; the depth is unchanged.
    pub fn add_rational(&self, q: &Rational) -> Self {
        Self::reduce(self.prime, self.depth, &(&self.rep + q))
    }

    /// Multiplies by an exact rational `q`. The product is known modulo
    /// `p^(depth + v_p(q))`, which must stay non-negative.
    pub fn scale(&self, q: &Rational) -> Result<Self, NumericError> {
        match valuation(q, self.prime)? {
            Valuation::Infinite => Self::zero(self.prime, self.depth),
            Valuation::Finite(v) => {
                let depth = self.depth as i64 + v;
                if depth < 0 {
                    return Err(NumericError::Precision { prime: self.prime, needed: -v, available: self.depth });
                }
                Ok(Self::reduce(self.prime, depth as u32, &(&self.rep * q)))
            }
        }
    }

    /// Product of two classes. `(x + p^a Z_p)(y + p^b Z_p)` is determined
    /// modulo `p^m` with `m = min(a + v(y), b + v(x), a + b)`.
    pub fn mul(&self, other: &Self) -> Result<Self, NumericError> {
        self.check_prime(other)?;
        let a = self.depth as i64;
        let b = other.depth as i64;
        let mut m = a + b;
        if let Valuation::Finite(vy) = other.valuation() {
            m = m.min(a + vy);
        }
        if let Valuation::Finite(vx) = self.valuation() {
            m = m.min(b + vx);
        }
        if m < 0 {
            return Err(NumericError::Precision {
                prime: self.prime,
                needed: self.depth.min(other.depth) as i64 - m,
                available: self.depth.min(other.depth),
            });
        }
        Ok(Self::reduce(self.prime, m as u32, &(&self.rep * &other.rep)))
    }

    /// Whether `self` and `other` agree modulo `p^min(depths)`.
    pub fn congruent(&self, other: &Self) -> bool {
        self.prime == other.prime && self.sub(other).map(|d| d.is_zero()).unwrap_or(false)
    }

    /// The unique rational in `[0, 1)` with `p`-power denominator that
    /// differs from the class by a `p`-adic integer.
    pub fn fractional_part(&self) -> Rational {
        self.rep.fract_floor()
    }
}

impl fmt::Display for PadicResidue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} mod {}^{}", self.rep, self.prime, self.depth)
    }
}

impl fmt::Debug for PadicResidue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(n: i64, d: i64) -> Rational {
        Rational::new(n, d)
    }

    #[test]
    fn canonical_representative() {
        let x = PadicResidue::new(2, 3, &r(-1, 1)).unwrap();
        assert_eq!(x.rep(), &r(7, 1));
        let x = PadicResidue::new(2, 2, &r(7, 4)).unwrap();
        assert_eq!(x.rep(), &r(7, 4));
        let x = PadicResidue::new(2, 0, &r(7, 4)).unwrap();
        assert_eq!(x.rep(), &r(3, 4));
        let x = PadicResidue::new(3, 2, &r(9, 1)).unwrap();
        assert!(x.is_zero());
    }

    #[test]
    fn unit_denominators_are_inverted() {
        // 1/3 in Z_2 modulo 8: 3 * 3 = 9 = 1 mod 8.
        let x = PadicResidue::new(2, 3, &r(1, 3)).unwrap();
        assert_eq!(x.rep(), &r(3, 1));
        // 5/6 = (5/3)/2 in Q_2; fractional part is 1/2.
        let x = PadicResidue::new(2, 4, &r(5, 6)).unwrap();
        assert_eq!(x.fractional_part(), r(1, 2));
        let y = PadicResidue::new(3, 4, &r(5, 6)).unwrap();
        assert_eq!(y.fractional_part(), r(1, 3));
    }

    #[test]
    fn fractional_part_examples() {
        let fp = |p, q: Rational| PadicResidue::new(p, 4, &q).unwrap().fractional_part();
        assert_eq!(fp(2, r(1, 2)), r(1, 2));
        assert_eq!(fp(2, r(7, 4)), r(3, 4));
        assert_eq!(fp(3, r(5, 1)), Rational::zero());
        assert_eq!(fp(3, r(1, 9)), r(1, 9));
        assert_eq!(fp(5, r(-1, 5)), r(4, 5));
    }

    #[test]
    fn rejects_composite_prime() {
        assert_eq!(PadicResidue::new(6, 2, &r(1, 2)), Err(NumericError::NotPrime(6)));
    }

    #[test]
    fn unequal_depths_reduce_to_minimum() {
        let a = PadicResidue::new(3, 4, &r(10, 1)).unwrap();
        let b = PadicResidue::new(3, 1, &r(2, 1)).unwrap();
        let s = a.add(&b).unwrap();
        assert_eq!(s.depth(), 1);
        assert!(s.is_zero());
        assert!(a.congruent(&PadicResidue::new(3, 1, &r(1, 1)).unwrap()));
        assert!(!a.congruent(&PadicResidue::new(3, 2, &r(2, 1)).unwrap()));
    }

    #[test]
    fn product_depth_tracks_valuations() {
        let x = PadicResidue::new(3, 2, &r(1, 3)).unwrap();
        let y = PadicResidue::new(3, 2, &r(1, 3)).unwrap();
        let xy = x.mul(&y).unwrap();
        assert_eq!(xy.depth(), 1);
        assert_eq!(xy.fractional_part(), r(1, 9));
        let coarse = PadicResidue::new(3, 0, &r(1, 3)).unwrap();
        assert!(coarse.mul(&y).is_err());
    }

    #[test]
    fn scale_by_rational() {
        let x = PadicResidue::new(2, 3, &r(3, 1)).unwrap();
        let half = x.scale(&r(1, 2)).unwrap();
        assert_eq!(half.depth(), 2);
        assert_eq!(half.rep(), &r(3, 2));
        let x0 = PadicResidue::new(2, 0, &r(1, 1)).unwrap();
        assert!(x0.scale(&r(1, 2)).is_err());
    }

    #[test]
    fn json_schema() {
        let x = PadicResidue::new(2, 3, &r(1, 2)).unwrap();
        let s = serde_json::to_string(&x).unwrap();
        assert_eq!(s, r#"{"p":2,"k":3,"rep":"1/2"}"#);
        let back: PadicResidue = serde_json::from_str(&s).unwrap();
        assert_eq!(back, x);
        assert!(serde_json::from_str::<PadicResidue>(r#"{"p":4,"k":3,"rep":"1/2"}"#).is_err());
    }
}
