//! The circles `R/NZ` under the divisibility covers, the pullback of
//! circle maps along them, and the identification of winding classes in the
//! direct limit with the rationals.

use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::circle::{lift, CircleError, CircleMap, COMPACT_TOLERANCE};
use crate::numeric::Rational;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LimitError {
    #[error("level {n} does not divide level {m}")]
    NotDivisor { n: u64, m: u64 },
    #[error("level must be at least 1")]
    ZeroLevel,
    #[error("winding over one period is {value}, not within 1e-6 of an integer")]
    NonIntegerWinding { value: f64 },
    #[error(transparent)]
    Circle(#[from] CircleError),
}

fn check_divides(n: u64, m: u64) -> Result<(), LimitError> {
    if n == 0 || m == 0 {
        return Err(LimitError::ZeroLevel);
    }
    if !m.is_multiple_of(n) {
        return Err(LimitError::NotDivisor { n, m });
    }
    Ok(())
}

/// The degree `M/N` covering `R/MZ -> R/NZ`, `[t]_M ↦ [t]_N`. The result is
/// in `[0, N)`.
pub fn cover_map(t: f64, m: u64, n: u64) -> Result<f64, LimitError> {
    check_divides(n, m)?;
    Ok(t.rem_euclid(m as f64).rem_euclid(n as f64))
}

/// The winding class `w` at level `N`, i.e. the class of `z ↦ z^w` on
/// `R/NZ`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CircleClass {
    pub level: u64,
    pub winding: i64,
}

impl CircleClass {
    pub fn new(level: u64, winding: i64) -> Result<Self, LimitError> {
        if level == 0 {
            return Err(LimitError::ZeroLevel);
        }
        Ok(Self { level, winding })
    }

    /// `t ↦ exp(2πi·w·t/N)`, a representative with period `N`.
    pub fn representative(&self) -> CircleMap {
        let rate = Rational::new(self.winding, self.level as i64);
        CircleMap::exp_rational(&rate)
    }

    /// Arithmetic pullback to level `M`: the winding is multiplied by `M/N`.
    pub fn push(&self, m: u64) -> Result<CircleClass, LimitError> {
        check_divides(self.level, m)?;
        Ok(CircleClass { level: m, winding: self.winding * (m / self.level) as i64 })
    }
}

impl fmt::Display for CircleClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}]_{}", self.winding, self.level)
    }
}

/// Element of the direct limit, stored as the rational `w / N`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct LimitClass(pub Rational);

impl fmt::Display for LimitClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

pub fn limit_identify(c: &CircleClass) -> LimitClass {
    LimitClass(Rational::new(c.winding, c.level as i64))
}

/// Grid step for lifting pullbacks.
const PULLBACK_STEP: f64 = 1.0 / 32.0;

/// Winding of `f ∘ π_{M→N}` over one period `[0, M]`, computed from a lift.
pub fn pullback_winding(n: u64, m: u64, f: &CircleMap) -> Result<i64, LimitError> {
    check_divides(n, m)?;
    let f = f.clone();
    let pulled = CircleMap::new(move |t| f.eval(cover_map(t, m, n).expect("checked divisibility")), f64::INFINITY);
    let l = lift(&pulled, 0.0, crate::circle::turns_of(pulled.eval(0.0)), (0.0, m as f64), PULLBACK_STEP)?;
    let value = l.value_at(m as f64).expect("inside") - l.base_value();
    let rounded = value.round();
    if (value - rounded).abs() > COMPACT_TOLERANCE {
        return Err(LimitError::NonIntegerWinding { value });
    }
    Ok(rounded as i64)
}

/// Numeric counterpart of [`CircleClass::push`], pulling back the
/// representative.
pub fn numeric_push(c: &CircleClass, m: u64) -> Result<CircleClass, LimitError> {
    Ok(CircleClass { level: m, winding: pullback_winding(c.level, m, &c.representative())? })
}

/// One functoriality check `N | M | L` for a winding `w`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChainRow {
    pub n: u64,
    pub m: u64,
    pub l: u64,
    pub winding: i64,
    /// Numeric pullback `N → L`.
    pub direct: i64,
    /// Numeric pullbacks `N → M → L`.
    pub composed: i64,
    /// `(L/N)·w`.
    pub expected: i64,
}

impl ChainRow {
    pub fn passed(&self) -> bool {
        self.direct == self.expected && self.composed == self.expected
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChainReport {
    pub limit: u64,
    pub rows: Vec<ChainRow>,
}

impl ChainReport {
    pub fn passed(&self) -> bool {
        self.rows.iter().all(ChainRow::passed)
    }

    /// Plain-text table, one row per chain.
    pub fn to_table(&self) -> String {
        let mut out = String::from("N\tM\tL\tw\tdirect\tcomposed\texpected\tstatus\n");
        for r in &self.rows {
            out.push_str(&format!(
                "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\n",
                r.n,
                r.m,
                r.l,
                r.winding,
                r.direct,
                r.composed,
                r.expected,
                if r.passed() { "pass" } else { "FAIL" }
            ));
        }
        out
    }
}

/// All divisor chains `N | M | L <= limit`.
pub fn divisor_chains(limit: u64) -> Vec<(u64, u64, u64)> {
    let mut out = Vec::new();
    for n in 1..=limit {
        for m in (n..=limit).step_by(n as usize) {
            for l in (m..=limit).step_by(m as usize) {
                out.push((n, m, l));
            }
        }
    }
    out
}

/// Checks `N → M → L` against `N → L` numerically for every divisor chain
/// up to `limit` and every listed winding.
pub fn check_chains(limit: u64, windings: &[i64]) -> Result<ChainReport, LimitError> {
    let jobs: Vec<_> = divisor_chains(limit).into_iter().flat_map(|c| windings.iter().map(move |&w| (c, w))).collect();
    let rows = jobs
        .par_iter()
        .map(|&((n, m, l), w)| {
            let class = CircleClass::new(n, w)?;
            let direct = pullback_winding(n, l, &class.representative())?;
            let mid = numeric_push(&class, m)?;
            let composed = pullback_winding(m, l, &mid.representative())?;
            Ok(ChainRow { n, m, l, winding: w, direct, composed, expected: w * (l / n) as i64 })
        })
        .collect::<Result<Vec<_>, LimitError>>()?;
    Ok(ChainReport { limit, rows })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cover_examples() {
        assert_eq!(cover_map(2.5, 4, 4).unwrap(), 2.5);
        assert_eq!(cover_map(1.0, 6, 2).unwrap(), 1.0);
        assert_eq!(cover_map(0.0, 6, 3).unwrap(), 0.0);
        assert_eq!(cover_map(5.5, 6, 2).unwrap(), 1.5);
        assert_eq!(cover_map(-0.5, 6, 2).unwrap(), 1.5);
        assert_eq!(cover_map(1.0, 6, 4), Err(LimitError::NotDivisor { n: 4, m: 6 }));
    }

    #[test]
    fn pullback_examples() {
        let u = CircleClass::new(5, 1).unwrap().representative();
        assert_eq!(pullback_winding(5, 10, &u).unwrap(), 2);
        assert_eq!(pullback_winding(5, 5, &u).unwrap(), 1);
        let three = CircleClass::new(2, 3).unwrap().representative();
        assert_eq!(pullback_winding(2, 6, &three).unwrap(), 9);
        assert!(pullback_winding(4, 6, &u).is_err());
    }

    #[test]
    fn identification_examples() {
        assert_eq!(limit_identify(&CircleClass::new(1, 1).unwrap()).0, Rational::one());
        assert_eq!(limit_identify(&CircleClass::new(3, 2).unwrap()).0, Rational::new(2, 3));
        let a = CircleClass::new(2, 1).unwrap();
        let b = CircleClass::new(6, 3).unwrap();
        assert_eq!(limit_identify(&a), limit_identify(&b));
        assert_eq!(a.push(6).unwrap(), b);
        assert_eq!(numeric_push(&a, 6).unwrap(), b);
        assert!(CircleClass::new(0, 1).is_err());
    }

    #[test]
    fn chains_up_to_twelve() {
        let report = check_chains(12, &[-2, 1]).unwrap();
        assert!(report.passed());
        assert!(report.rows.iter().any(|r| (r.n, r.m, r.l) == (2, 4, 12)));
        assert!(report.to_table().lines().nth(1).unwrap().ends_with("pass"));
    }
}
