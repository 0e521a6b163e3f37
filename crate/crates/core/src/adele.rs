//! Finite adeles and adeles over `Q`, the metric
//! `|x|_A = |x_inf| + |x_f|_{A_f}`, the compact open subgroups
//! `K_N = ∏ p^{e_p(N)} Z_p`, and the decomposition of `A_f` into cosets
//! `alpha + K_N` with `alpha` running over `Q / N Z`.
//!
//! A [`FiniteAdele`] stores finitely many coordinates as residue classes;
//! every prime outside the support carries the exact coordinate `0`.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, ToPrimitive};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::numeric::{
    factorize, is_prime, mod_inverse, padic_abs, NumericError, PadicResidue, PrimeFactorization, Rational,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AdeleError {
    #[error(transparent)]
    Numeric(#[from] NumericError),
    #[error("insufficient depth at prime {prime}: need {needed}, have {available}")]
    Precision { prime: u64, needed: u32, available: u32 },
    #[error("real component must be finite, got {0}")]
    NonFiniteReal(f64),
    #[error("prime {0} appears twice in the support")]
    DuplicatePrime(u64),
    #[error("denominator of {value} has prime factors outside the requested prime set")]
    MissingDenominatorPrime { value: Rational },
    #[error("denominator of {0} does not fit in 64 bits")]
    DenominatorTooLarge(Rational),
    #[error("lattice scale must be a positive integer")]
    ZeroScale,
}

/// Element of the finite adeles with finite support.
#[derive(Clone, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "FiniteAdeleRepr", into = "FiniteAdeleRepr")]
pub struct FiniteAdele {
    support: BTreeMap<u64, PadicResidue>,
}

#[derive(Serialize, Deserialize)]
struct FiniteAdeleRepr {
    #[serde(default)]
    support: Vec<PadicResidue>,
}

impl TryFrom<FiniteAdeleRepr> for FiniteAdele {
    type Error = AdeleError;
    fn try_from(r: FiniteAdeleRepr) -> Result<Self, Self::Error> {
        FiniteAdele::from_residues(r.support)
    }
}

impl From<FiniteAdele> for FiniteAdeleRepr {
    fn from(x: FiniteAdele) -> Self {
        FiniteAdeleRepr { support: x.support.into_values().collect() }
    }
}

impl FiniteAdele {
    /// The additive identity `0_f`.
    pub fn zero() -> Self {
        Self::default()
    }

    /// Builds an adele from coordinates at distinct primes. Zero classes are
    /// dropped.
    pub fn from_residues(residues: impl IntoIterator<Item = PadicResidue>) -> Result<Self, AdeleError> {
        let mut support = BTreeMap::new();
        for r in residues {
            let p = r.prime();
            if support.insert(p, r).is_some() {
                return Err(AdeleError::DuplicatePrime(p));
            }
        }
        Ok(Self::canonical(support))
    }

    fn canonical(mut support: BTreeMap<u64, PadicResidue>) -> Self {
        support.retain(|_, r| !r.is_zero());
        Self { support }
    }

    pub fn support(&self) -> impl Iterator<Item = &PadicResidue> {
        self.support.values()
    }

    pub fn primes(&self) -> impl Iterator<Item = u64> + '_ {
        self.support.keys().copied()
    }

    pub fn coordinate(&self, p: u64) -> Option<&PadicResidue> {
        self.support.get(&p)
    }

    pub fn is_zero(&self) -> bool {
        self.support.is_empty()
    }

    /// Every coordinate lies in `Z_p`.
    pub fn is_integral(&self) -> bool {
        self.support.values().all(PadicResidue::is_integral)
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.support.clone();
        for (p, r) in &other.support {
            let sum = match out.get(p) {
                Some(mine) => mine.add(r).expect("same prime"),
                None => r.clone(),
            };
            out.insert(*p, sum);
        }
        Self::canonical(out)
    }

    pub fn neg(&self) -> Self {
        Self::canonical(self.support.iter().map(|(p, r)| (*p, r.neg())).collect())
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    /// Adds the rational `q` at every prime of the support, every prime of
    /// `q`'s denominator, and every prime in `extra_primes`. Coordinates that
    /// did not exist before are created at `depth`; all other primes are left
    /// at their implicit value.
    pub fn translate(
        &self,
        q: &Rational,
        extra_primes: impl IntoIterator<Item = u64>,
        depth: u32,
    ) -> Result<Self, AdeleError> {
        let mut primes: BTreeSet<u64> = extra_primes.into_iter().collect();
        primes.extend(denominator_primes(q)?);
        let mut out = self.support.clone();
        for r in out.values_mut() {
            *r = r.add_rational(q);
        }
        for p in primes {
            if let std::collections::btree_map::Entry::Vacant(slot) = out.entry(p) {
                slot.insert(PadicResidue::new(p, depth, q)?);
            }
        }
        Ok(Self::canonical(out))
    }

    /// Multiplies every coordinate by the rational `q`.
    pub fn scale(&self, q: &Rational) -> Result<Self, AdeleError> {
        let support = self
            .support
            .iter()
            .map(|(p, r)| Ok((*p, r.scale(q)?)))
            .collect::<Result<BTreeMap<_, _>, NumericError>>()?;
        Ok(Self::canonical(support))
    }

    /// `max |x_p|_p / p` when every coordinate is integral, `max |x_p|_p`
    /// otherwise, and `0` for the empty support.
    pub fn finite_norm(&self) -> Rational {
        let integral = self.is_integral();
        self.support
            .values()
            .map(|r| {
                let abs = padic_abs(r.rep(), r.prime()).expect("prime validated");
                if integral {
                    abs / Rational::from_integer(r.prime())
                } else {
                    abs
                }
            })
            .max()
            .unwrap_or_else(Rational::zero)
    }
}

impl fmt::Display for FiniteAdele {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.support.is_empty() {
            return f.write_str("0_f");
        }
        f.write_str("{")?;
        for (i, r) in self.support.values().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{}: {}", r.prime(), r)?;
        }
        f.write_str("}")
    }
}

impl fmt::Debug for FiniteAdele {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// Primes dividing the denominator of `q`.
pub fn denominator_primes(q: &Rational) -> Result<Vec<u64>, AdeleError> {
    let d = q.denom().to_u64().ok_or_else(|| AdeleError::DenominatorTooLarge(q.clone()))?;
    Ok(factorize(d)?.primes().collect())
}

/// A full adele `{x_inf, x_f}`.
#[derive(Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "AdeleRepr", into = "AdeleRepr")]
pub struct Adele {
    real: f64,
    finite: FiniteAdele,
}

#[derive(Serialize, Deserialize)]
struct AdeleRepr {
    #[serde(default)]
    real: f64,
    #[serde(flatten)]
    finite: FiniteAdele,
}

impl TryFrom<AdeleRepr> for Adele {
    type Error = AdeleError;
    fn try_from(r: AdeleRepr) -> Result<Self, Self::Error> {
        Adele::new(r.real, r.finite)
    }
}

impl From<Adele> for AdeleRepr {
    fn from(x: Adele) -> Self {
        AdeleRepr { real: x.real, finite: x.finite }
    }
}

impl Adele {
    pub fn new(real: f64, finite: FiniteAdele) -> Result<Self, AdeleError> {
        if !real.is_finite() {
            return Err(AdeleError::NonFiniteReal(real));
        }
        Ok(Self { real, finite })
    }

    pub fn zero() -> Self {
        Self { real: 0.0, finite: FiniteAdele::zero() }
    }

    pub fn real(&self) -> f64 {
        self.real
    }

    pub fn finite(&self) -> &FiniteAdele {
        &self.finite
    }

    pub fn with_real(&self, real: f64) -> Result<Self, AdeleError> {
        Self::new(real, self.finite.clone())
    }

    /// Diagonal image of `q`: real part `q` (rounded to a double) and finite
    /// part [`embed_rational`] at `primes`.
    pub fn diagonal(q: &Rational, primes: &[u64], depth: u32) -> Result<Self, AdeleError> {
        Self::new(q.to_f64(), embed_rational(q, primes, depth)?)
    }

    /// `x + q` for the diagonal copy of `q`; see [`FiniteAdele::translate`].
    pub fn translate(
        &self,
        q: &Rational,
        extra_primes: impl IntoIterator<Item = u64>,
        depth: u32,
    ) -> Result<Self, AdeleError> {
        Self::new(self.real + q.to_f64(), self.finite.translate(q, extra_primes, depth)?)
    }

    pub fn add(&self, other: &Self) -> Result<Self, AdeleError> {
        Self::new(self.real + other.real, self.finite.add(&other.finite))
    }

    pub fn sub(&self, other: &Self) -> Result<Self, AdeleError> {
        Self::new(self.real - other.real, self.finite.sub(&other.finite))
    }
}

impl fmt::Display for Adele {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{{}, {}}}", self.real, self.finite)
    }
}

impl fmt::Debug for Adele {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// `|x_inf - y_inf| + |x_f - y_f|_{A_f}`, computed exactly: the real parts
/// are converted to rationals without rounding.
pub fn adele_metric(x: &Adele, y: &Adele) -> Rational {
    let xr = Rational::from_f64(x.real).expect("finite by construction");
    let yr = Rational::from_f64(y.real).expect("finite by construction");
    (xr - yr).abs() + x.finite.sub(&y.finite).finite_norm()
}

/// Positive integer `N` together with its factorization; indexes the
/// subgroup `K_N` and the quotient `Q / N Z`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct LatticeScale {
    n: u64,
    factorization: PrimeFactorization,
}

impl LatticeScale {
    pub fn new(n: u64) -> Result<Self, AdeleError> {
        if n == 0 {
            return Err(AdeleError::ZeroScale);
        }
        Ok(Self { n, factorization: factorize(n)? })
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn factorization(&self) -> &PrimeFactorization {
        &self.factorization
    }

    /// `e_p(N)`.
    pub fn exponent(&self, p: u64) -> u32 {
        self.factorization.exponent(p)
    }

    pub fn primes(&self) -> impl Iterator<Item = u64> + '_ {
        self.factorization.primes()
    }

    pub fn max_exponent(&self) -> u32 {
        self.factorization.iter().map(|(_, e)| e).max().unwrap_or(0)
    }

    pub fn as_rational(&self) -> Rational {
        Rational::from_integer(self.n)
    }
}

impl Serialize for LatticeScale {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_u64(self.n)
    }
}

impl<'de> Deserialize<'de> for LatticeScale {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let n = u64::deserialize(d)?;
        LatticeScale::new(n).map_err(serde::de::Error::custom)
    }
}

/// Whether `x` lies in `K_N`, i.e. `v_p(x_p) >= e_p(N)` at every prime.
pub fn in_k_n(x: &FiniteAdele, scale: &LatticeScale) -> Result<bool, AdeleError> {
    let mut inside = true;
    for r in x.support() {
        let e = scale.exponent(r.prime());
        if r.depth() < e {
            return Err(AdeleError::Precision { prime: r.prime(), needed: e, available: r.depth() });
        }
        inside &= r.valuation().at_least(e as i64);
    }
    Ok(inside)
}

/// Diagonal embedding of `q` at the listed primes, each coordinate a class
/// modulo `p^depth`. Every prime dividing the denominator of `q` must be
/// listed.
pub fn embed_rational(q: &Rational, primes: &[u64], depth: u32) -> Result<FiniteAdele, AdeleError> {
    let mut rest = q.denom().clone();
    for &p in primes {
        if !is_prime(p) {
            return Err(NumericError::NotPrime(p).into());
        }
        let pb = BigInt::from(p);
        while rest.is_multiple_of(&pb) {
            rest /= &pb;
        }
    }
    if !rest.is_one() {
        return Err(AdeleError::MissingDenominatorPrime { value: q.clone() });
    }
    let residues = primes
        .iter()
        .collect::<BTreeSet<_>>()
        .into_iter()
        .map(|&p| PadicResidue::new(p, depth, q))
        .collect::<Result<Vec<_>, _>>()?;
    FiniteAdele::from_residues(residues)
}

/// `x - alpha` restricted to the primes that matter for membership in
/// `K_N`: the support of `x`, the primes of `alpha`'s denominator and the
/// primes of `N`.
pub fn shift_by_rational(x: &FiniteAdele, alpha: &Rational, scale: &LatticeScale) -> Result<FiniteAdele, AdeleError> {
    x.translate(&-alpha, scale.primes(), scale.max_exponent())
}

/// Finds `alpha` in `[0, N)` with `x - alpha` in `K_N`.
///
/// For each prime `p_i` where `x` leaves `p_i^{e_i} Z_p`, the representative
/// `alpha_i` of `x_{p_i}` (denominator `p_i^{d_i}`) is multiplied by an
/// integer `M_i` with `M_i = 1 mod p_i^{e_i + d_i}` and
/// `M_i = 0 mod p^{e_p}` for the other primes of `N`. The sum of the
/// `alpha_i M_i` is then reduced modulo `N`.
pub fn crt_decompose(x: &FiniteAdele, scale: &LatticeScale) -> Result<Rational, AdeleError> {
    let mut offending = Vec::new();
    for r in x.support() {
        let p = r.prime();
        let e = scale.exponent(p);
        let d = r.denominator_exponent();
        if r.depth() < e + d {
            return Err(AdeleError::Precision { prime: p, needed: e + d, available: r.depth() });
        }
        if !r.valuation().at_least(e as i64) {
            offending.push((r, e, d));
        }
    }

    let mut alpha = Rational::zero();
    for (r, e, d) in offending {
        let p = r.prime();
        let local_modulus = BigInt::from(p).pow(e + d);
        let others = scale
            .factorization()
            .iter()
            .filter(|&(q, _)| q != p)
            .fold(BigInt::one(), |acc, (q, eq)| acc * BigInt::from(q).pow(eq));
        let inv = mod_inverse(&others, &local_modulus).expect("coprime moduli");
        let m_i = others * inv;
        alpha = alpha + r.rep() * Rational::from_integer(m_i);
    }
    Ok(alpha.rem_euclid(&scale.as_rational()))
}

/// The basic open set `U_0 = (-eps/2, eps/2) × ∏_{p <= 2/eps} p^m Z_p ×
/// ∏_{p > 2/eps} Z_p` with `m = floor(log2 floor(2/eps)) + 1`, which sits
/// inside the metric ball of radius `eps` around `0`.
#[derive(Clone, Debug, PartialEq)]
pub struct BasicNeighborhood {
    pub real_radius: Rational,
    pub prime_bound: u64,
    pub exponent: u32,
}

impl BasicNeighborhood {
    pub fn for_radius(eps: &Rational) -> Self {
        assert!(!eps.is_negative() && !eps.is_zero(), "radius must be positive");
        let bound = (Rational::from_integer(2) / eps).floor();
        let prime_bound = bound.to_u64().expect("radius not absurdly small");
        let exponent = if prime_bound == 0 { 1 } else { prime_bound.ilog2() + 1 };
        Self { real_radius: eps / Rational::from_integer(2), prime_bound, exponent }
    }

    pub fn contains(&self, x: &Adele) -> bool {
        let real = Rational::from_f64(x.real()).expect("finite");
        if real.abs() >= self.real_radius {
            return false;
        }
        x.finite().support().all(|r| {
            let needed = if r.prime() <= self.prime_bound { self.exponent } else { 0 };
            r.depth() >= needed && r.valuation().at_least(needed as i64)
        })
    }
}
