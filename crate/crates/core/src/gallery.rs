//! Built-in maps: the recursive pre-periodic function, its figure data and a
//! named gallery of circle maps, adelic maps and unitizations.

use std::collections::HashMap;
use std::sync::{Arc, OnceLock, RwLock};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::adele::{AdeleError, LatticeScale};
use crate::adelic::{bump_unitization, AdelicCircleMap};
use crate::circle::{fmt_sig, unit, CircleMap};
use crate::numeric::Rational;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GalleryError {
    #[error("|x| = {x} exceeds 3^{depth}")]
    OutOfDomain { x: f64, depth: u32 },
    #[error("grid step must be positive and finite, got {0}")]
    InvalidStep(f64),
    #[error("unknown gallery entry {0:?}")]
    UnknownEntry(String),
    #[error("entry {name} expects {expected}, got {got} parameters")]
    Arity { name: String, expected: String, got: usize },
    #[error("parameter {index} of {name} is invalid: {reason}")]
    BadParameter { name: String, index: usize, reason: String },
    #[error(transparent)]
    Adele(#[from] AdeleError),
}

/// Default recursion depth: arguments up to `3^10` in absolute value.
pub const DEFAULT_DEPTH: u32 = 10;

/// Affine data of one recursion level `n`: slope `c_n` and offsets
/// `h_n = f(3^n)`, `h_{n+1}`.
#[derive(Clone, Debug)]
struct Level {
    shift: f64,
    slope: Rational,
    h: Rational,
    h_next: Rational,
}

/// The recursive function with `f(x) = x/3` on `[-1, 1)`,
///
/// `f(x) = c_n·(f(x - 2·3^n) + h_n) + h_n` on `[3^n, 3^{n+1})` and
/// `f(x) = c_n·(f(x + 2·3^n) + h_n) - h_{n+1}` on `[-3^{n+1}, -3^n)`,
///
/// with `c_n = (3^n + 3^{-(n+2)}) / (3^n - 3^{-(n+1)})` and
/// `h_n = (3^n - 3^{-(n+1)}) / 2`. Branch coefficients are exact rationals
/// composed before the single conversion to a double; the composition for
/// each branch path is cached.
/// Composed `(slope, offset)` per branch path of `(level, positive side)`.
type PathCache = HashMap<Vec<(u8, bool)>, (f64, f64)>;

#[derive(Clone, Debug)]
pub struct RecursiveMap {
    depth: u32,
    levels: Vec<Level>,
    slope_f: Vec<(f64, f64, f64)>,
    paths: Arc<RwLock<PathCache>>,
}

fn pow3(n: i32) -> Rational {
    Rational::from_integer(3).pow(n)
}

impl RecursiveMap {
    pub fn new(depth: u32) -> Self {
        let h = |n: i32| (pow3(n) - pow3(-(n + 1))) / Rational::from_integer(2);
        let levels: Vec<Level> = (0..depth as i32)
            .map(|n| Level {
                shift: 2.0 * 3f64.powi(n),
                slope: (pow3(n) + pow3(-(n + 2))) / (pow3(n) - pow3(-(n + 1))),
                h: h(n),
                h_next: h(n + 1),
            })
            .collect();
        let slope_f = levels.iter().map(|l| (l.slope.to_f64(), l.h.to_f64(), l.h_next.to_f64())).collect();
        Self { depth, levels, slope_f, paths: Arc::default() }
    }

    pub fn depth(&self) -> u32 {
        self.depth
    }

    /// Arguments with `|x| <= 3^depth` are accepted.
    pub fn radius(&self) -> f64 {
        3f64.powi(self.depth as i32)
    }

    /// Exact slope `c_n`.
    pub fn slope(&self, n: u32) -> Option<&Rational> {
        self.levels.get(n as usize).map(|l| &l.slope)
    }

    /// Exact `h_n = f(3^n)`.
    pub fn offset(&self, n: u32) -> Option<&Rational> {
        self.levels.get(n as usize).map(|l| &l.h)
    }

    pub fn eval(&self, x: f64) -> Result<f64, GalleryError> {
        if x.is_nan() || x.abs() > self.radius() {
            return Err(GalleryError::OutOfDomain { x, depth: self.depth });
        }
        // x = 3^depth itself sits at the right end of the top level.
        if x == self.radius() {
            let top = self.levels.last().map(|l| l.h_next.to_f64()).unwrap_or(1.0 / 3.0);
            return Ok(top);
        }
        let mut path = Vec::new();
        let mut y = x;
        while !(-1.0..1.0).contains(&y) {
            let n = level_of(y);
            let up = y >= 0.0;
            y += if up { -self.levels[n].shift } else { self.levels[n].shift };
            path.push((n as u8, up));
        }
        let cached = self.paths.read().expect("cache lock").get(&path).copied();
        let (a, b) = match cached {
            Some(ab) => ab,
            None => {
                let ab = self.compose(&path);
                self.paths.write().expect("cache lock").insert(path, ab);
                ab
            }
        };
        Ok(a * (y / 3.0) + b)
    }

    /// Exact `(a, b)` with `f(x) = a·f(y) + b` along a branch path.
    fn compose(&self, path: &[(u8, bool)]) -> (f64, f64) {
        let mut a = Rational::one();
        let mut b = Rational::zero();
        for &(n, up) in path {
            let level = &self.levels[n as usize];
            let offset = if up { &level.slope * &level.h + &level.h } else { &level.slope * &level.h - &level.h_next };
            b = &b + &a * offset;
            a = &a * &level.slope;
        }
        (a.to_f64(), b.to_f64())
    }

    /// Same recursion in plain double arithmetic, without exact coefficient
    /// composition.
    pub fn eval_f64(&self, x: f64) -> Result<f64, GalleryError> {
        if x.is_nan() || x.abs() >= self.radius() {
            return Err(GalleryError::OutOfDomain { x, depth: self.depth });
        }
        let (mut a, mut b, mut y) = (1.0, 0.0, x);
        while !(-1.0..1.0).contains(&y) {
            let n = level_of(y);
            let (c, h, h_next) = self.slope_f[n];
            if y >= 0.0 {
                y -= self.levels[n].shift;
                b += a * (c * h + h);
            } else {
                y += self.levels[n].shift;
                b += a * (c * h - h_next);
            }
            a *= c;
        }
        Ok(a * (y / 3.0) + b)
    }

    /// `x ↦ exp(2πi·f(x))`, trusted on `[-3^depth, 3^depth]`.
    pub fn circle_map(&self) -> CircleMap {
        let this = self.clone();
        let radius = self.radius();
        CircleMap::from_phase(move |x| this.eval(x.clamp(-radius, radius)).expect("clamped"), radius)
    }
}

/// Level `n` with `|y| ∈ [3^n, 3^{n+1})` for positive `y`, and
/// `y ∈ [-3^{n+1}, -3^n)` for negative `y`.
fn level_of(y: f64) -> usize {
    let mut n = 0;
    let mut p = 3.0;
    if y >= 0.0 {
        while y >= p {
            p *= 3.0;
            n += 1;
        }
    } else {
        while y < -p {
            p *= 3.0;
            n += 1;
        }
    }
    n
}

fn default_example() -> &'static RecursiveMap {
    static CELL: OnceLock<RecursiveMap> = OnceLock::new();
    CELL.get_or_init(|| RecursiveMap::new(DEFAULT_DEPTH))
}

/// The recursive function at the default depth.
pub fn example42_eval(x: f64) -> Result<f64, GalleryError> {
    default_example().eval(x)
}

/// CSV `x,f` on `[-9, 9]` with the given grid step; both endpoints are
/// present.
pub fn figure1_data(grid_step: f64) -> Result<String, GalleryError> {
    if !(grid_step > 0.0 && grid_step.is_finite()) {
        return Err(GalleryError::InvalidStep(grid_step));
    }
    let steps = (18.0 / grid_step).ceil() as usize;
    let mut out = String::from("x,f\n");
    for i in 0..=steps {
        let x = (-9.0 + i as f64 * grid_step).min(9.0);
        out.push_str(&format!("{},{}\n", fmt_sig(x), fmt_sig(example42_eval(x)?)));
        if x == 9.0 {
            break;
        }
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GalleryKind {
    CircleMap,
    AdelicMap,
    Unitization,
}

/// A constructor parameter: exact rationals are written as strings or
/// integers, reals as JSON floats.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Param {
    Rational(Rational),
    Real(f64),
}

impl Param {
    pub fn as_f64(&self) -> f64 {
        match self {
            Param::Rational(q) => q.to_f64(),
            Param::Real(x) => *x,
        }
    }
}

/// Named map with its constructor parameters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GalleryEntry {
    pub name: String,
    pub kind: GalleryKind,
    pub params: Vec<Param>,
}

/// A constructed gallery entry.
#[derive(Clone, Debug)]
pub enum GalleryObject {
    Circle(CircleMap),
    Adelic(AdelicCircleMap),
    Unitization { map: AdelicCircleMap, scale: LatticeScale },
}

fn q(s: &str) -> Param {
    Param::Rational(s.parse().expect("literal rational"))
}

/// Every built-in entry with default parameters.
pub fn builtin_entries() -> Vec<GalleryEntry> {
    use GalleryKind::*;
    let e = |name: &str, kind, params| GalleryEntry { name: name.to_string(), kind, params };
    vec![
        e("exp(q*x)", CircleMap, vec![q("2/3")]),
        e("constant", CircleMap, vec![Param::Real(0.0)]),
        e("recursive", CircleMap, vec![q("10")]),
        e("wobble", CircleMap, vec![q("1/2"), Param::Real(0.1), q("1")]),
        e("character", AdelicMap, vec![]),
        e("character-scaled", AdelicMap, vec![q("2/3")]),
        e("single-bump", Unitization, vec![q("2"), q("0"), q("1")]),
        e("two-bumps", Unitization, vec![q("2"), q("1/2"), q("1"), q("3/2"), q("-2")]),
    ]
}

impl GalleryEntry {
    /// The built-in entry called `name`, with default parameters.
    pub fn builtin(name: &str) -> Result<GalleryEntry, GalleryError> {
        builtin_entries()
            .into_iter()
            .find(|e| e.name == name)
            .ok_or_else(|| GalleryError::UnknownEntry(name.to_string()))
    }

    pub fn with_params(mut self, params: Vec<Param>) -> Self {
        self.params = params;
        self
    }

    fn arity(&self, expected: &str, ok: bool) -> Result<(), GalleryError> {
        if ok {
            Ok(())
        } else {
            Err(GalleryError::Arity { name: self.name.clone(), expected: expected.to_string(), got: self.params.len() })
        }
    }

    fn rational(&self, index: usize) -> Result<Rational, GalleryError> {
        match &self.params[index] {
            Param::Rational(q) => Ok(q.clone()),
            Param::Real(x) => Rational::from_f64(*x).ok_or_else(|| self.bad(index, "not finite")),
        }
    }

    fn integer(&self, index: usize) -> Result<i64, GalleryError> {
        let q = self.rational(index)?;
        if !q.is_integer() {
            return Err(self.bad(index, "expected an integer"));
        }
        i64::try_from(q.numer()).map_err(|_| self.bad(index, "out of range"))
    }

    fn bad(&self, index: usize, reason: &str) -> GalleryError {
        GalleryError::BadParameter { name: self.name.clone(), index, reason: reason.to_string() }
    }

    /// Builds the map. Unitization parameters are `[N, alpha_1, w_1, ...]`
    /// with the constant fixed to `1`.
    pub fn build(&self) -> Result<GalleryObject, GalleryError> {
        let p = &self.params;
        match self.name.as_str() {
            "exp(q*x)" => {
                self.arity("1", p.len() == 1)?;
                Ok(GalleryObject::Circle(CircleMap::exp_rational(&self.rational(0)?)))
            }
            "constant" => {
                self.arity("1", p.len() == 1)?;
                Ok(GalleryObject::Circle(CircleMap::constant(unit(p[0].as_f64()))))
            }
            "recursive" => {
                self.arity("1", p.len() == 1)?;
                let depth = self.integer(0)?;
                if !(1..=30).contains(&depth) {
                    return Err(self.bad(0, "depth must lie in 1..=30"));
                }
                Ok(GalleryObject::Circle(RecursiveMap::new(depth as u32).circle_map()))
            }
            "wobble" => {
                self.arity("3", p.len() == 3)?;
                let (rate, amp, freq) = (p[0].as_f64(), p[1].as_f64(), p[2].as_f64());
                let phase = move |x: f64| rate * x + amp * (std::f64::consts::TAU * freq * x).sin();
                Ok(GalleryObject::Circle(CircleMap::from_phase(phase, f64::INFINITY)))
            }
            "character" => {
                self.arity("0", p.is_empty())?;
                Ok(GalleryObject::Adelic(AdelicCircleMap::character()))
            }
            "character-scaled" => {
                self.arity("1", p.len() == 1)?;
                Ok(GalleryObject::Adelic(AdelicCircleMap::character_scaled(&self.rational(0)?)))
            }
            "single-bump" | "two-bumps" => {
                let bumps = if self.name == "single-bump" { 1 } else { 2 };
                self.arity(&format!("{}", 1 + 2 * bumps), p.len() == 1 + 2 * bumps)?;
                let n = self.integer(0)?;
                if n < 1 {
                    return Err(self.bad(0, "scale must be positive"));
                }
                let scale = LatticeScale::new(n as u64)?;
                let pairs = (0..bumps)
                    .map(|j| Ok((self.rational(1 + 2 * j)?, self.integer(2 + 2 * j)?)))
                    .collect::<Result<Vec<_>, GalleryError>>()?;
                let map = bump_unitization(Complex64::new(1.0, 0.0), &scale, &pairs);
                Ok(GalleryObject::Unitization { map, scale })
            }
            other => Err(GalleryError::UnknownEntry(other.to_string())),
        }
    }
}
