//! Circle-valued maps on the adeles: restrictions to real fibers, the
//! additive character, adelic winding numbers, lifts of winding-zero maps,
//! the integer winding field over the finite adeles and the projection scan.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use num_integer::Integer;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::adele::{crt_decompose, in_k_n, shift_by_rational, Adele, AdeleError, FiniteAdele, LatticeScale};
use crate::circle::{
    chord, generalized_winding, turns_of, unit, winding_compact, CircleError, CircleMap, RealLift, WindingNumber,
    WindingOptions, UNIT_TOLERANCE,
};
use crate::numeric::{NumericError, PadicResidue, Rational};

/// Tolerance for identities that hold exactly up to floating-point rounding.
pub const EVAL_TOLERANCE: f64 = 1e-9;
/// Values of a projection must lie this close to `0` or `1`.
pub const PROJECTION_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AdelicError {
    #[error(transparent)]
    Adele(#[from] AdeleError),
    #[error(transparent)]
    Circle(#[from] CircleError),
    #[error(transparent)]
    Numeric(#[from] NumericError),
    #[error("map is not declared Q-periodic")]
    NotRationalPeriodic,
    #[error("map is not declared as vanishing at infinity plus a constant")]
    NotUnitization,
    #[error("adelic winding is {0}, expected 0")]
    NonZeroWinding(Rational),
    #[error("map varies by {distance} >= 1/8 inside a coset of K_{n} (fiber {fiber}, x = {x})")]
    CosetVariation { n: u64, fiber: String, x: f64, distance: f64 },
    #[error("real coordinate {0} falls outside the lifted range")]
    OutOfRange(f64),
    #[error("shift by {shift} changes the value by {deviation:e}")]
    PeriodicityViolation { shift: Rational, deviation: f64 },
    #[error("|g| = {modulus} at {point}")]
    NotUnit { point: String, modulus: f64 },
    #[error("value {value} at {point} is not 0 or 1")]
    NotAProjection { point: String, value: f64 },
}

/// Claimed behaviour of an adelic map under the diagonal rationals.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Periodicity {
    RationalPeriodic,
    /// `x ↦ f(x) + lambda` with `f` vanishing at infinity.
    VanishingPlusConstant {
        lambda: Complex64,
    },
}

type AdelicEval = dyn Fn(f64, &FiniteAdele) -> Result<Complex64, AdelicError> + Send + Sync;

/// A map `A -> S^1`, evaluated on a real coordinate and a finite adele.
#[derive(Clone)]
pub struct AdelicCircleMap {
    eval: Arc<AdelicEval>,
    periodicity: Periodicity,
    continuity_scale: u64,
    real_radius: f64,
}

impl fmt::Debug for AdelicCircleMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("AdelicCircleMap")
            .field("periodicity", &self.periodicity)
            .field("continuity_scale", &self.continuity_scale)
            .finish_non_exhaustive()
    }
}

impl AdelicCircleMap {
    /// `continuity_scale` is an `N0` such that moving the finite part inside
    /// `K_{N0}` changes the value by less than chord `1/8`.
    pub fn new(
        eval: impl Fn(f64, &FiniteAdele) -> Result<Complex64, AdelicError> + Send + Sync + 'static,
        periodicity: Periodicity,
        continuity_scale: u64,
    ) -> Self {
        Self { eval: Arc::new(eval), periodicity, continuity_scale, real_radius: f64::INFINITY }
    }

    pub fn constant(z: Complex64) -> Self {
        let z = z / z.norm();
        Self::new(move |_, _| Ok(z), Periodicity::RationalPeriodic, 1)
    }

    /// The additive character `e`.
    pub fn character() -> Self {
        Self::new(|x, f| Ok(character_parts(x, f)), Periodicity::RationalPeriodic, 1)
    }

    /// `x ↦ e(q·x)`.
    pub fn character_scaled(q: &Rational) -> Self {
        let q = q.clone();
        let qf = q.to_f64();
        let scale = q.denom().try_into().unwrap_or(u64::MAX);
        Self::new(move |x, f| Ok(character_parts(qf * x, &f.scale(&q)?)), Periodicity::RationalPeriodic, scale)
    }

    pub fn with_real_radius(mut self, radius: f64) -> Self {
        self.real_radius = radius;
        self
    }

    pub fn periodicity(&self) -> Periodicity {
        self.periodicity
    }

    pub fn continuity_scale(&self) -> u64 {
        self.continuity_scale
    }

    pub fn real_radius(&self) -> f64 {
        self.real_radius
    }

    pub fn eval_parts(&self, real: f64, finite: &FiniteAdele) -> Result<Complex64, AdelicError> {
        (self.eval)(real, finite)
    }

    pub fn eval(&self, x: &Adele) -> Result<Complex64, AdelicError> {
        self.eval_parts(x.real(), x.finite())
    }

    /// Pointwise product. Two unitizations multiply their constants; mixed
    /// claims keep the claim of `self`.
    pub fn mul(&self, other: &AdelicCircleMap) -> AdelicCircleMap {
        let (f, g) = (self.eval.clone(), other.eval.clone());
        let periodicity = match (self.periodicity, other.periodicity) {
            (Periodicity::RationalPeriodic, Periodicity::RationalPeriodic) => Periodicity::RationalPeriodic,
            (Periodicity::VanishingPlusConstant { lambda: a }, Periodicity::VanishingPlusConstant { lambda: b }) => {
                Periodicity::VanishingPlusConstant { lambda: a * b }
            }
            (p, _) => p,
        };
        AdelicCircleMap {
            eval: Arc::new(move |x, y| Ok(f(x, y)? * g(x, y)?)),
            periodicity,
            continuity_scale: self.continuity_scale.lcm(&other.continuity_scale),
            real_radius: self.real_radius.min(other.real_radius),
        }
    }

    pub fn powi(&self, n: i32) -> AdelicCircleMap {
        let f = self.eval.clone();
        AdelicCircleMap { eval: Arc::new(move |x, y| Ok(f(x, y)?.powi(n))), ..self.clone() }
    }

    /// Checks `|g| = 1` within `1e-9` at the sample adeles.
    pub fn check_unit_modulus<'a>(&self, samples: impl IntoIterator<Item = &'a Adele>) -> Result<(), AdelicError> {
        for x in samples {
            let modulus = self.eval(x)?.norm();
            if (modulus - 1.0).abs() > UNIT_TOLERANCE {
                return Err(AdelicError::NotUnit { point: x.to_string(), modulus });
            }
        }
        Ok(())
    }

    /// Checks the Q-periodicity claim: `g(x + q) = g(x)` within `1e-9` for
    /// every sample and shift. New coordinates of `x + q` are created at
    /// `depth`. Returns the largest deviation seen.
    pub fn verify_rational_periodicity<'a>(
        &self,
        samples: impl IntoIterator<Item = &'a Adele>,
        shifts: &[Rational],
        depth: u32,
    ) -> Result<f64, AdelicError> {
        if self.periodicity != Periodicity::RationalPeriodic {
            return Err(AdelicError::NotRationalPeriodic);
        }
        let mut worst: f64 = 0.0;
        for x in samples {
            let gx = self.eval(x)?;
            for q in shifts {
                let shifted = x.translate(q, [], depth)?;
                let deviation = chord(self.eval(&shifted)?, gx);
                if deviation > EVAL_TOLERANCE {
                    return Err(AdelicError::PeriodicityViolation { shift: q.clone(), deviation });
                }
                worst = worst.max(deviation);
            }
        }
        Ok(worst)
    }
}

/// `exp(2πi·{y·x})` for one prime: the local character `e_y` at `x`.
pub fn character_p(y: &PadicResidue, x: &PadicResidue) -> Result<Complex64, AdelicError> {
    Ok(unit(character_p_phase(y, x)?.to_f64()))
}

/// Exact phase `{y·x}` in `[0, 1)` of [`character_p`].
pub fn character_p_phase(y: &PadicResidue, x: &PadicResidue) -> Result<Rational, AdelicError> {
    Ok(y.mul(x)?.fractional_part())
}

/// Exact finite phase `Σ_p {x_p}` of the character, reduced into `[0, 1)`.
pub fn finite_character_phase(x: &FiniteAdele) -> Rational {
    x.support().map(|r| r.fractional_part()).sum::<Rational>().fract_floor()
}

fn character_parts(real: f64, finite: &FiniteAdele) -> Complex64 {
    unit(finite_character_phase(finite).to_f64() - real.rem_euclid(1.0))
}

/// The additive character `e(x) = exp(-2πi·x_∞) · ∏_p exp(2πi·{x_p})`,
/// normalised so that its real restriction at `0_f` is `exp(-2πi·x)`.
pub fn adelic_character(x: &Adele) -> Complex64 {
    character_parts(x.real(), x.finite())
}

/// Exact total phase `Σ_p {q}_p - q` of the character at the diagonal
/// image of `q`; always an integer.
pub fn diagonal_character_phase(q: &Rational) -> Result<Rational, AdelicError> {
    let primes = crate::adele::denominator_primes(q)?;
    let finite = crate::adele::embed_rational(q, &primes, 0)?;
    let sum: Rational = finite.support().map(|r| r.fractional_part()).sum();
    Ok(sum - q)
}

/// The real fiber `x_∞ ↦ g({x_∞, x_f})`.
///
/// Evaluation failures depend only on the finite part, so they are detected
/// here once; the returned map is total.
pub fn restrict(g: &AdelicCircleMap, x_f: &FiniteAdele) -> Result<CircleMap, AdelicError> {
    g.eval_parts(0.0, x_f)?;
    let eval = g.eval.clone();
    let fiber = x_f.clone();
    Ok(CircleMap::new(move |x| eval(x, &fiber).unwrap_or(Complex64::new(f64::NAN, f64::NAN)), g.real_radius))
}

/// Winding number of the fiber over `0_f`.
pub fn adelic_winding(g: &AdelicCircleMap, opts: &WindingOptions) -> Result<WindingNumber, AdelicError> {
    if g.periodicity != Periodicity::RationalPeriodic {
        return Err(AdelicError::NotRationalPeriodic);
    }
    Ok(generalized_winding(&restrict(g, &FiniteAdele::zero())?, opts)?)
}

#[derive(Clone, Debug, PartialEq)]
pub struct FiberEntry {
    pub fiber: FiniteAdele,
    pub winding: Result<Rational, AdelicError>,
}

/// Outcome of [`fiber_constancy_check`]. A disagreeing fiber is reported,
/// not raised.
#[derive(Clone, Debug, PartialEq)]
pub struct FiberReport {
    pub reference: Rational,
    pub entries: Vec<FiberEntry>,
}

impl FiberReport {
    pub fn passed(&self) -> bool {
        self.entries.iter().all(|e| e.winding.as_ref() == Ok(&self.reference))
    }

    pub fn failures(&self) -> impl Iterator<Item = &FiberEntry> {
        self.entries.iter().filter(|e| e.winding.as_ref() != Ok(&self.reference))
    }
}

/// Compares the winding of every listed fiber with the winding over `0_f`.
pub fn fiber_constancy_check(
    g: &AdelicCircleMap,
    fibers: &[FiniteAdele],
    opts: &WindingOptions,
) -> Result<FiberReport, AdelicError> {
    let reference = adelic_winding(g, opts)?.value;
    let entries = fibers
        .par_iter()
        .map(|fiber| {
            let winding = restrict(g, fiber).and_then(|f| Ok(generalized_winding(&f, opts)?)).map(|w| w.value);
            FiberEntry { fiber: fiber.clone(), winding }
        })
        .collect();
    Ok(FiberReport { reference, entries })
}

/// Lift of a winding-zero Q-periodic map, `exp(2πi·value) = g`.
///
/// With `alpha = crt_decompose(x_f, N)` and `y_f = x_f - alpha ∈ K_N`,
/// `g(x) = g(x_∞ - alpha, y_f)`, and the value is the lift of the `0_f`
/// fiber at `x_∞ - alpha` corrected by the principal argument of
/// `g(x_∞ - alpha, y_f) / g(x_∞ - alpha, 0_f)`. The `0_f` fiber lift is
/// normalised by `value(0) ∈ [0, 1)`.
#[derive(Clone, Debug)]
pub struct AdelicLift {
    map: AdelicCircleMap,
    scale: LatticeScale,
    base: RealLift,
    radius: f64,
}

impl AdelicLift {
    pub fn scale(&self) -> &LatticeScale {
        &self.scale
    }

    /// Real coordinates in `[-radius, radius]` are supported.
    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn base(&self) -> &RealLift {
        &self.base
    }

    pub fn value(&self, x: &Adele) -> Result<f64, AdelicError> {
        self.value_parts(x.real(), x.finite())
    }

    pub fn value_parts(&self, real: f64, finite: &FiniteAdele) -> Result<f64, AdelicError> {
        if real.abs() > self.radius {
            return Err(AdelicError::OutOfRange(real));
        }
        let alpha = crt_decompose(finite, &self.scale)?;
        let y = shift_by_rational(finite, &alpha, &self.scale)?;
        let t = real - alpha.to_f64();
        let base = self.base.value_at(t).ok_or(AdelicError::OutOfRange(t))?;
        let on_fiber = self.map.eval_parts(t, &y)?;
        let on_zero = self.base.source().eval(t);
        let distance = chord(on_fiber, on_zero);
        if distance >= 0.125 {
            return Err(AdelicError::CosetVariation { n: self.scale.n(), fiber: y.to_string(), x: t, distance });
        }
        Ok(base + turns_of(on_fiber * on_zero.conj()))
    }
}

/// Builds the lift of `g` on real coordinates `[-radius, radius]`.
///
/// Requires winding `0` and certifies, on the given fibers and a real grid,
/// that `g` moves by less than chord `1/8` when the finite part moves inside
/// `K_N`.
pub fn adelic_lift(
    g: &AdelicCircleMap,
    scale: &LatticeScale,
    fibers: &[FiniteAdele],
    radius: f64,
    opts: &WindingOptions,
) -> Result<AdelicLift, AdelicError> {
    let w = adelic_winding(g, opts)?;
    if !w.value.is_zero() {
        return Err(AdelicError::NonZeroWinding(w.value));
    }
    let zero_fiber = restrict(g, &FiniteAdele::zero())?;
    const GRID: usize = 64;
    for fiber in fibers {
        let alpha = crt_decompose(fiber, scale)?;
        let y = shift_by_rational(fiber, &alpha, scale)?;
        for i in 0..=GRID {
            let t = -radius + 2.0 * radius * i as f64 / GRID as f64;
            let distance = chord(g.eval_parts(t, &y)?, zero_fiber.eval(t));
            if distance >= 0.125 {
                return Err(AdelicError::CosetVariation { n: scale.n(), fiber: fiber.to_string(), x: t, distance });
            }
        }
    }
    let reach = radius + scale.n() as f64;
    let anchor = turns_of(zero_fiber.eval(0.0)).rem_euclid(1.0);
    let base = crate::circle::lift(&zero_fiber, 0.0, anchor, (-reach, reach), opts.step)?;
    Ok(AdelicLift { map: g.clone(), scale: scale.clone(), base, radius })
}

/// Finitely supported integer field on the cosets `alpha + K_N`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WindingField {
    pub scale: LatticeScale,
    /// Nonzero windings keyed by coset representative in `[0, N)`.
    pub values: BTreeMap<Rational, i64>,
}

#[derive(Serialize, Deserialize)]
struct WindingFieldRepr {
    #[serde(rename = "N")]
    n: LatticeScale,
    values: Vec<WindingFieldEntry>,
}

#[derive(Serialize, Deserialize)]
struct WindingFieldEntry {
    alpha: Rational,
    w: i64,
}

impl Serialize for WindingField {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        WindingFieldRepr {
            n: self.scale.clone(),
            values: self.values.iter().map(|(a, &w)| WindingFieldEntry { alpha: a.clone(), w }).collect(),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for WindingField {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let repr = WindingFieldRepr::deserialize(deserializer)?;
        let values = repr.values.into_iter().filter(|e| e.w != 0).map(|e| (e.alpha, e.w)).collect();
        Ok(WindingField { scale: repr.n, values })
    }
}

impl WindingField {
    pub fn get(&self, alpha: &Rational) -> i64 {
        self.values.get(alpha).copied().unwrap_or(0)
    }
}

/// Coset representatives `a / D` in `[0, N)`, in lowest terms, without
/// repetition.
pub fn coset_representatives(scale: &LatticeScale, denominator_bound: u64) -> Vec<Rational> {
    let d = denominator_bound.max(1);
    let mut out: Vec<Rational> = (0..scale.n() * d).map(|a| Rational::new(a as i64, d as i64)).collect();
    out.sort();
    out.dedup();
    out
}

/// Finite adele representing the coset `alpha + K_N`, with depth enough for
/// membership tests and CRT at scale `N`.
pub fn coset_fiber(alpha: &Rational, scale: &LatticeScale) -> Result<FiniteAdele, AdelicError> {
    let mut primes: Vec<u64> = crate::adele::denominator_primes(alpha)?;
    primes.extend(scale.primes());
    primes.sort_unstable();
    primes.dedup();
    let extra =
        crate::numeric::factorize(alpha.denom().try_into().unwrap_or(1))?.iter().map(|(_, e)| e).max().unwrap_or(0);
    Ok(crate::adele::embed_rational(alpha, &primes, scale.max_exponent() + extra + 1)?)
}

/// Per-coset winding of the fibers `x_∞ ↦ u({x_∞, alpha})`, for
/// representatives with denominator dividing `denominator_bound`.
pub fn winding_field(
    u: &AdelicCircleMap,
    scale: &LatticeScale,
    denominator_bound: u64,
    tail_radius: f64,
    step: f64,
) -> Result<WindingField, AdelicError> {
    if !matches!(u.periodicity, Periodicity::VanishingPlusConstant { .. }) {
        return Err(AdelicError::NotUnitization);
    }
    let reps = coset_representatives(scale, denominator_bound);
    let computed = reps
        .par_iter()
        .map(|alpha| {
            let fiber = coset_fiber(alpha, scale)?;
            let w = winding_compact(&restrict(u, &fiber)?, tail_radius, step)?;
            Ok((alpha.clone(), w))
        })
        .collect::<Result<Vec<_>, AdelicError>>()?;
    let values = computed.into_iter().filter(|(_, w)| *w != 0).collect();
    Ok(WindingField { scale: scale.clone(), values })
}

/// `σ(t) = (1 + tanh t) / 2`, a smooth step from `0` to `1`.
pub fn smooth_step(t: f64) -> f64 {
    0.5 * (1.0 + t.tanh())
}

/// Whether `x_f ∈ alpha + K_N`.
pub fn in_coset(x_f: &FiniteAdele, alpha: &Rational, scale: &LatticeScale) -> Result<bool, AdelicError> {
    Ok(in_k_n(&shift_by_rational(x_f, alpha, scale)?, scale)?)
}

/// Unitization `lambda · ∏_j exp(2πi·w_j·σ(x_∞)·1[x_f ∈ alpha_j + K_N])`,
/// whose fiber over `alpha_j + K_N` winds `w_j` times.
pub fn bump_unitization(lambda: Complex64, scale: &LatticeScale, bumps: &[(Rational, i64)]) -> AdelicCircleMap {
    let lambda = lambda / lambda.norm();
    let scale_c = scale.clone();
    let bumps = bumps.to_vec();
    AdelicCircleMap::new(
        move |x, f| {
            let mut turns = 0.0;
            for (alpha, w) in &bumps {
                if in_coset(f, alpha, &scale_c)? {
                    turns += *w as f64 * smooth_step(x);
                }
            }
            Ok(lambda * unit(turns))
        },
        Periodicity::VanishingPlusConstant { lambda },
        scale.n(),
    )
}

/// `exp(2πi·h)` with `h(x) = Σ_j a_j·exp(-(x_∞ - c_j)²)·1[x_f ∈ beta_j + K_N]`,
/// a unitization of constant `1` homotopic to `1`.
pub fn gaussian_phase_factor(scale: &LatticeScale, bumps: &[(Rational, f64, f64)]) -> AdelicCircleMap {
    let scale_c = scale.clone();
    let bumps = bumps.to_vec();
    AdelicCircleMap::new(
        move |x, f| {
            let mut turns = 0.0;
            for (beta, amplitude, center) in &bumps {
                if in_coset(f, beta, &scale_c)? {
                    turns += amplitude * (-(x - center) * (x - center)).exp();
                }
            }
            Ok(unit(turns))
        },
        Periodicity::VanishingPlusConstant { lambda: Complex64::new(1.0, 0.0) },
        scale.n(),
    )
}

/// Result of [`projection_scan`].
#[derive(Clone, Debug, PartialEq)]
pub enum ProjectionScan {
    Constant(u8),
    Violation { first: Adele, first_value: u8, second: Adele, second_value: u8 },
}

/// Checks that a claimed `{0, 1}`-valued map is constant on the samples.
pub fn projection_scan<F>(g: F, samples: &[Adele]) -> Result<ProjectionScan, AdelicError>
where
    F: Fn(&Adele) -> Result<f64, AdelicError>,
{
    let mut first: Option<(&Adele, u8)> = None;
    for x in samples {
        let value = g(x)?;
        let bit = if value.abs() <= PROJECTION_TOLERANCE {
            0
        } else if (value - 1.0).abs() <= PROJECTION_TOLERANCE {
            1
        } else {
            return Err(AdelicError::NotAProjection { point: x.to_string(), value });
        };
        match first {
            None => first = Some((x, bit)),
            Some((y, b)) if b != bit => {
                return Ok(ProjectionScan::Violation {
                    first: y.clone(),
                    first_value: b,
                    second: x.clone(),
                    second_value: bit,
                })
            }
            _ => {}
        }
    }
    Ok(ProjectionScan::Constant(first.map_or(0, |(_, b)| b)))
}

/// Whether the rational orbit `x_f + Q` meets `K_N`, witnessed by
/// `x_f - crt_decompose(x_f, N) ∈ K_N`.
pub fn rational_orbit_meets(x_f: &FiniteAdele, scale: &LatticeScale) -> Result<bool, AdelicError> {
    let alpha = crt_decompose(x_f, scale)?;
    in_coset(x_f, &alpha, scale)
}

/// Q-periodic extension of the indicator of `R × K_N`: `1` where the
/// rational orbit of the point meets `R × K_N`, `0` elsewhere.
pub fn periodic_indicator(scale: &LatticeScale) -> impl Fn(&Adele) -> Result<f64, AdelicError> + '_ {
    move |x| Ok(if rational_orbit_meets(x.finite(), scale)? { 1.0 } else { 0.0 })
}

/// Indicator of `R × K_N` itself, not extended periodically.
pub fn lattice_indicator(scale: &LatticeScale) -> impl Fn(&Adele) -> Result<f64, AdelicError> + '_ {
    move |x| Ok(if in_k_n(x.finite(), scale)? { 1.0 } else { 0.0 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::adele::embed_rational;

    fn r(n: i64, d: i64) -> Rational {
        Rational::new(n, d)
    }

    fn fa(entries: &[(u64, u32, Rational)]) -> FiniteAdele {
        FiniteAdele::from_residues(entries.iter().map(|(p, k, q)| PadicResidue::new(*p, *k, q).unwrap())).unwrap()
    }

    fn close(z: Complex64, w: Complex64) -> bool {
        chord(z, w) < 1e-12
    }

    #[test]
    fn local_character_examples() {
        let one = PadicResidue::new(2, 3, &r(1, 1)).unwrap();
        let half = PadicResidue::new(2, 3, &r(1, 2)).unwrap();
        assert!(close(character_p(&one, &half).unwrap(), Complex64::new(-1.0, 0.0)));
        let zero = PadicResidue::zero(5, 2).unwrap();
        let x = PadicResidue::new(5, 2, &r(3, 25)).unwrap();
        assert!(close(character_p(&zero, &x).unwrap(), Complex64::new(1.0, 0.0)));
        let third = PadicResidue::new(3, 2, &r(1, 3)).unwrap();
        assert_eq!(character_p_phase(&third, &third).unwrap(), r(1, 9));
        let coarse = PadicResidue::new(3, 0, &r(1, 3)).unwrap();
        assert!(character_p(&coarse, &third).is_err());
    }

    #[test]
    fn character_examples() {
        assert!(close(adelic_character(&Adele::zero()), Complex64::new(1.0, 0.0)));
        let diag = Adele::diagonal(&r(1, 2), &[2], 3).unwrap();
        assert!(close(adelic_character(&diag), Complex64::new(1.0, 0.0)));
        let x = Adele::new(0.0, fa(&[(2, 3, r(1, 2))])).unwrap();
        assert!(close(adelic_character(&x), Complex64::new(-1.0, 0.0)));
        let y = Adele::new(0.25, FiniteAdele::zero()).unwrap();
        assert!(close(adelic_character(&y), Complex64::new(0.0, -1.0)));
    }

    #[test]
    fn diagonal_phase_is_integral() {
        for (n, d) in [(1, 2), (5, 6), (-7, 12), (13, 360), (0, 1), (4, 1)] {
            assert!(diagonal_character_phase(&r(n, d)).unwrap().is_integer(), "{n}/{d}");
        }
    }

    #[test]
    fn character_winding_is_minus_one() {
        let w = adelic_winding(&AdelicCircleMap::character(), &WindingOptions::default()).unwrap();
        assert_eq!(w.value, r(-1, 1));
        let sq = AdelicCircleMap::character().powi(2);
        assert_eq!(adelic_winding(&sq, &WindingOptions::default()).unwrap().value, r(-2, 1));
        let one = AdelicCircleMap::constant(Complex64::new(1.0, 0.0));
        assert_eq!(adelic_winding(&one, &WindingOptions::default()).unwrap().value, Rational::zero());
    }

    #[test]
    fn restriction_examples() {
        let e0 = restrict(&AdelicCircleMap::character(), &FiniteAdele::zero()).unwrap();
        for x in [0.1, 0.37, -2.2] {
            assert!(close(e0.eval(x), unit(-x)));
        }
        let g = AdelicCircleMap::character_scaled(&r(2, 3));
        let w = generalized_winding(&restrict(&g, &FiniteAdele::zero()).unwrap(), &WindingOptions::default());
        assert_eq!(w.unwrap().value, r(-2, 3));
    }

    #[test]
    fn fiber_constancy_examples() {
        let opts = WindingOptions::default();
        let fibers = vec![FiniteAdele::zero(), fa(&[(2, 3, r(1, 2))]), fa(&[(3, 3, r(1, 3))])];
        let report = fiber_constancy_check(&AdelicCircleMap::character(), &fibers, &opts).unwrap();
        assert!(report.passed());
        assert_eq!(report.reference, r(-1, 1));
        let g = AdelicCircleMap::character_scaled(&r(3, 4));
        let fibers = vec![fa(&[(2, 4, r(3, 4))]), fa(&[(3, 2, r(2, 9)), (2, 3, r(1, 2))]), fa(&[(5, 2, r(1, 5))])];
        let report = fiber_constancy_check(&g, &fibers, &opts).unwrap();
        assert!(report.passed(), "{report:?}");
        assert_eq!(report.reference, r(-3, 4));
    }

    #[test]
    fn periodicity_claim_is_checked() {
        let e = AdelicCircleMap::character();
        let samples = vec![Adele::new(0.3, fa(&[(2, 4, r(3, 4))])).unwrap(), Adele::zero()];
        let shifts = [r(1, 2), r(-5, 6), r(7, 1)];
        assert!(e.verify_rational_periodicity(&samples, &shifts, 6).unwrap() < 1e-9);
        let bad = AdelicCircleMap::new(|x, _| Ok(unit(x / 10.0)), Periodicity::RationalPeriodic, 1);
        assert!(matches!(
            bad.verify_rational_periodicity(&samples, &shifts, 6),
            Err(AdelicError::PeriodicityViolation { .. })
        ));
    }

    #[test]
    fn lift_of_constants() {
        let opts = WindingOptions::default();
        let scale = LatticeScale::new(1).unwrap();
        let one = AdelicCircleMap::constant(Complex64::new(1.0, 0.0));
        let l = adelic_lift(&one, &scale, &[], 5.0, &opts).unwrap();
        assert_eq!(l.value(&Adele::new(1.5, fa(&[(2, 2, r(1, 4))])).unwrap()).unwrap(), 0.0);
        let c = AdelicCircleMap::character()
            .mul(&AdelicCircleMap::character().powi(-1))
            .mul(&AdelicCircleMap::constant(unit(0.1)));
        let l = adelic_lift(&c, &scale, &[], 5.0, &opts).unwrap();
        assert!((l.value(&Adele::new(-3.0, FiniteAdele::zero()).unwrap()).unwrap() - 0.1).abs() < 1e-12);
    }

    #[test]
    fn lift_refuses_nonzero_winding() {
        let scale = LatticeScale::new(1).unwrap();
        assert!(matches!(
            adelic_lift(&AdelicCircleMap::character(), &scale, &[], 5.0, &WindingOptions::default()),
            Err(AdelicError::NonZeroWinding(_))
        ));
    }

    #[test]
    fn winding_field_examples() {
        let scale = LatticeScale::new(2).unwrap();
        let lambda = unit(0.3);
        let flat = bump_unitization(lambda, &scale, &[]);
        assert!(winding_field(&flat, &scale, 2, 12.0, 0.05).unwrap().values.is_empty());
        let single = bump_unitization(lambda, &scale, &[(Rational::zero(), 1)]);
        let field = winding_field(&single, &scale, 2, 12.0, 0.05).unwrap();
        assert_eq!(field.values, BTreeMap::from([(Rational::zero(), 1)]));
        assert_eq!(serde_json::to_string(&field).unwrap(), r#"{"N":2,"values":[{"alpha":"0","w":1}]}"#);
        let back: WindingField = serde_json::from_str(&serde_json::to_string(&field).unwrap()).unwrap();
        assert_eq!(back, field);
        let pair = bump_unitization(lambda, &scale, &[(r(1, 2), 1), (r(3, 2), -2)]);
        let field = winding_field(&pair, &scale, 2, 12.0, 0.05).unwrap();
        assert_eq!(field.values, BTreeMap::from([(r(1, 2), 1), (r(3, 2), -2)]));
    }

    #[test]
    fn winding_field_needs_unitization() {
        let scale = LatticeScale::new(2).unwrap();
        assert!(matches!(
            winding_field(&AdelicCircleMap::character(), &scale, 1, 10.0, 0.1),
            Err(AdelicError::NotUnitization)
        ));
    }

    #[test]
    fn coset_fibers_land_in_their_coset() {
        let scale = LatticeScale::new(12).unwrap();
        for alpha in coset_representatives(&scale, 6) {
            let f = coset_fiber(&alpha, &scale).unwrap();
            assert_eq!(crt_decompose(&f, &scale).unwrap(), alpha);
        }
        assert_eq!(coset_representatives(&scale, 6).len(), 72);
    }

    #[test]
    fn projection_examples() {
        let samples = vec![Adele::zero(), Adele::new(0.5, fa(&[(2, 3, r(1, 2))])).unwrap()];
        assert_eq!(projection_scan(|_| Ok(1.0), &samples).unwrap(), ProjectionScan::Constant(1));
        assert_eq!(projection_scan(|_| Ok(0.0), &samples).unwrap(), ProjectionScan::Constant(0));
        assert!(matches!(projection_scan(|_| Ok(0.5), &samples), Err(AdelicError::NotAProjection { .. })));
        let scale = LatticeScale::new(2).unwrap();
        assert_eq!(projection_scan(periodic_indicator(&scale), &samples).unwrap(), ProjectionScan::Constant(1));
        assert!(matches!(
            projection_scan(lattice_indicator(&scale), &samples).unwrap(),
            ProjectionScan::Violation { first_value: 1, second_value: 0, .. }
        ));
    }

    #[test]
    fn orbit_meets_lattice() {
        let scale = LatticeScale::new(6).unwrap();
        let x = embed_rational(&r(5, 12), &[2, 3], 5).unwrap();
        assert!(rational_orbit_meets(&x, &scale).unwrap());
    }
}
