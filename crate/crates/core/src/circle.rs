//! Circle-valued maps on the real line, their lifts through
//! `p(x) = exp(2πix)`, pre-periodicity certificates and the generalized
//! winding number.
//!
//! Pre-periodicity cannot be decided from finitely many samples, so every
//! certificate here records the [`ProbePlan`] it was obtained with.

use std::f64::consts::TAU;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::numeric::Rational;

/// Tolerance for `|f(x)| = 1`.
pub const UNIT_TOLERANCE: f64 = 1e-9;
/// Tolerance for `exp(2πi·base_value) = f(base_point)`.
pub const BASE_TOLERANCE: f64 = 1e-9;
/// Lift defect allowed by the one-period winding estimator.
pub const DEFECT_BUDGET: f64 = 1.0 / 32.0;
/// Numeric slack added on top of [`DEFECT_BUDGET`].
pub const DEFECT_SLACK: f64 = 1e-6;
/// Tolerance for tails and integer windings of compactly supported maps.
pub const COMPACT_TOLERANCE: f64 = 1e-6;
/// Adjacent grid samples must be closer than this chord distance.
pub const GRID_CHORD: f64 = 1.0;
/// Maximum number of step halvings while lifting.
pub const MAX_REFINEMENTS: u32 = 20;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CircleError {
    #[error("epsilon must lie in (0, 1/8], got {0}")]
    InvalidEpsilon(f64),
    #[error("invalid interval [{a}, {b}] for base point {base}")]
    InvalidInterval { a: f64, b: f64, base: f64 },
    #[error("step hint must be positive and finite, got {0}")]
    InvalidStep(f64),
    #[error("base value {value} does not lift f({point}) (mismatch {mismatch:e})")]
    BaseMismatch { point: f64, value: f64, mismatch: f64 },
    #[error("lift failed near x = {x}: chord {chord} after {MAX_REFINEMENTS} refinements")]
    LiftFailure { x: f64, chord: f64 },
    #[error("maps differ by {distance} >= 1/8 at x = {x}")]
    Proximity { x: f64, distance: f64 },
    #[error("no period N <= {n_max} passed the epsilon = {epsilon} probe")]
    NotPreperiodic { n_max: u64, epsilon: f64 },
    #[error("period {period} needs the map on [-{needed}, {needed}] but it is trusted only on radius {radius}")]
    DomainTooSmall { period: u64, needed: f64, radius: f64 },
    #[error("lift defect {defect} exceeds 1/32 at period {period}")]
    InconsistentWinding { period: u64, defect: f64 },
    #[error("tail not settled at x = {x}: deviation {deviation:e} from the limit")]
    TailNotSettled { x: f64, deviation: f64 },
    #[error("lift difference {value} is not within 1e-6 of an integer")]
    NonIntegerWinding { value: f64 },
    #[error("windings differ: f has {f}, g has {g}, expected {shared}")]
    WindingMismatch { f: Box<Rational>, g: Box<Rational>, shared: Box<Rational> },
    #[error("|f({x})| = {modulus} is not 1")]
    NotUnit { x: f64, modulus: f64 },
}

/// `exp(2πi·turns)`, with the phase reduced mod 1 first.
pub fn unit(turns: f64) -> Complex64 {
    let (s, c) = (TAU * turns.rem_euclid(1.0)).sin_cos();
    Complex64::new(c, s)
}

/// Principal argument in turns, in `(-1/2, 1/2]`.
pub fn turns_of(z: Complex64) -> f64 {
    z.arg() / TAU
}

/// Chord distance on the unit circle.
pub fn chord(z: Complex64, w: Complex64) -> f64 {
    (z - w).norm()
}

type EvalFn = dyn Fn(f64) -> Complex64 + Send + Sync;

/// A continuous map `R -> S^1`, trusted on `[-domain_radius, domain_radius]`.
#[derive(Clone)]
pub struct CircleMap {
    eval: Arc<EvalFn>,
    lipschitz: Option<f64>,
    domain_radius: f64,
}

impl CircleMap {
    pub fn new(eval: impl Fn(f64) -> Complex64 + Send + Sync + 'static, domain_radius: f64) -> Self {
        Self { eval: Arc::new(eval), lipschitz: None, domain_radius }
    }

    /// `x ↦ exp(2πi·phase(x))`.
    pub fn from_phase(phase: impl Fn(f64) -> f64 + Send + Sync + 'static, domain_radius: f64) -> Self {
        Self::new(move |x| unit(phase(x)), domain_radius)
    }

    pub fn constant(z: Complex64) -> Self {
        let z = z / z.norm();
        Self::new(move |_| z, f64::INFINITY).with_lipschitz(0.0)
    }

    /// `x ↦ exp(2πi·q·x)`.
    pub fn exp_rational(q: &Rational) -> Self {
        let qf = q.to_f64();
        Self::from_phase(move |x| qf * x, f64::INFINITY).with_lipschitz(TAU * qf.abs())
    }

    /// Declares a Lipschitz bound for the chord metric; the lift uses it to
    /// pick its initial step.
    pub fn with_lipschitz(mut self, bound: f64) -> Self {
        self.lipschitz = Some(bound);
        self
    }

    pub fn with_domain_radius(mut self, radius: f64) -> Self {
        self.domain_radius = radius;
        self
    }

    pub fn eval(&self, x: f64) -> Complex64 {
        (self.eval)(x)
    }

    pub fn lipschitz(&self) -> Option<f64> {
        self.lipschitz
    }

    pub fn domain_radius(&self) -> f64 {
        self.domain_radius
    }

    /// Pointwise product.
    pub fn mul(&self, other: &CircleMap) -> CircleMap {
        let (f, g) = (self.eval.clone(), other.eval.clone());
        let lipschitz = match (self.lipschitz, other.lipschitz) {
            (Some(a), Some(b)) => Some(a + b),
            _ => None,
        };
        CircleMap {
            eval: Arc::new(move |x| f(x) * g(x)),
            lipschitz,
            domain_radius: self.domain_radius.min(other.domain_radius),
        }
    }

    pub fn conj(&self) -> CircleMap {
        let f = self.eval.clone();
        CircleMap { eval: Arc::new(move |x| f(x).conj()), lipschitz: self.lipschitz, domain_radius: self.domain_radius }
    }

    pub fn powi(&self, n: i32) -> CircleMap {
        let f = self.eval.clone();
        CircleMap {
            eval: Arc::new(move |x| f(x).powi(n)),
            lipschitz: self.lipschitz.map(|l| l * n.unsigned_abs() as f64),
            domain_radius: self.domain_radius,
        }
    }

    /// Checks `|f(x)| = 1` within [`UNIT_TOLERANCE`] at the given points.
    pub fn check_unit_modulus(&self, xs: impl IntoIterator<Item = f64>) -> Result<(), CircleError> {
        for x in xs {
            let modulus = self.eval(x).norm();
            if (modulus - 1.0).abs() > UNIT_TOLERANCE {
                return Err(CircleError::NotUnit { x, modulus });
            }
        }
        Ok(())
    }
}

impl fmt::Debug for CircleMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CircleMap")
            .field("lipschitz", &self.lipschitz)
            .field("domain_radius", &self.domain_radius)
            .finish_non_exhaustive()
    }
}

/// Lift of a circle map on a closed interval, stored as grid nodes.
///
/// Between nodes the lift is evaluated by snapping the source map's
/// principal argument onto the branch nearest the linear interpolant, so
/// `exp(2πi·value_at(x)) = f(x)` holds everywhere, not only at nodes.
#[derive(Clone, Debug)]
pub struct RealLift {
    source: CircleMap,
    base_point: f64,
    base_value: f64,
    nodes: Vec<(f64, f64)>,
}

impl RealLift {
    pub fn base_point(&self) -> f64 {
        self.base_point
    }

    pub fn base_value(&self) -> f64 {
        self.base_value
    }

    pub fn nodes(&self) -> &[(f64, f64)] {
        &self.nodes
    }

    pub fn source(&self) -> &CircleMap {
        &self.source
    }

    pub fn interval(&self) -> (f64, f64) {
        (self.nodes[0].0, self.nodes[self.nodes.len() - 1].0)
    }

    /// Piecewise-linear interpolant, clamped to the end values outside the
    /// interval.
    pub fn interpolate(&self, x: f64) -> f64 {
        let i = self.nodes.partition_point(|&(xi, _)| xi <= x);
        if i == 0 {
            return self.nodes[0].1;
        }
        if i == self.nodes.len() {
            return self.nodes[i - 1].1;
        }
        let (x0, v0) = self.nodes[i - 1];
        let (x1, v1) = self.nodes[i];
        v0 + (v1 - v0) * (x - x0) / (x1 - x0)
    }

    /// Lift value at `x`, or `None` outside the lifted interval.
    pub fn value_at(&self, x: f64) -> Option<f64> {
        let (a, b) = self.interval();
        if !(a..=b).contains(&x) {
            return None;
        }
        Some(self.snapped(x))
    }

    fn snapped(&self, x: f64) -> f64 {
        let hint = self.interpolate(x);
        let theta = turns_of(self.source.eval(x));
        theta + (hint - theta).round()
    }

    /// CSV with header `x,lift`, values to 12 significant digits.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("x,lift\n");
        for &(x, v) in &self.nodes {
            out.push_str(&format!("{},{}\n", fmt_sig(x), fmt_sig(v)));
        }
        out
    }
}

/// Formats a double with 12 significant digits, trimming trailing zeros.
pub fn fmt_sig(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let exp = x.abs().log10().floor() as i32;
    if !(-5..12).contains(&exp) {
        let s = format!("{:.11e}", x);
        let (mantissa, e) = s.split_once('e').expect("exponent form");
        let mantissa = trim_zeros(mantissa);
        return format!("{mantissa}e{e}");
    }
    let decimals = (11 - exp).max(0) as usize;
    trim_zeros(&format!("{:.*}", decimals, x)).to_string()
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

fn initial_step(f: &CircleMap, hint: f64) -> f64 {
    match f.lipschitz {
        Some(l) if l > 0.0 => hint.min(0.5 / l),
        _ => hint,
    }
}

/// Walks from `(x0, v0)` to `x1`, bisecting until adjacent samples are
/// closer than [`GRID_CHORD`]. Appends the nodes after `x0`.
fn extend(
    f: &CircleMap,
    x0: f64,
    z0: Complex64,
    v0: f64,
    x1: f64,
    depth: u32,
    nodes: &mut Vec<(f64, f64)>,
) -> Result<(Complex64, f64), CircleError> {
    let z1 = f.eval(x1);
    let c = chord(z0, z1);
    if c < GRID_CHORD {
        let theta = turns_of(z1);
        let v1 = theta + (v0 - theta).round();
        nodes.push((x1, v1));
        return Ok((z1, v1));
    }
    if depth >= MAX_REFINEMENTS {
        return Err(CircleError::LiftFailure { x: x0, chord: c });
    }
    let mid = 0.5 * (x0 + x1);
    let (zm, vm) = extend(f, x0, z0, v0, mid, depth + 1, nodes)?;
    extend(f, mid, zm, vm, x1, depth + 1, nodes)
}

fn walk(f: &CircleMap, from: f64, to: f64, base_value: f64, step: f64) -> Result<Vec<(f64, f64)>, CircleError> {
    let mut nodes = Vec::new();
    let dir = if to >= from { 1.0 } else { -1.0 };
    let (mut x, mut z, mut v) = (from, f.eval(from), base_value);
    while (to - x) * dir > 0.0 {
        let next = if ((to - x) * dir) <= step { to } else { x + dir * step };
        let (zn, vn) = extend(f, x, z, v, next, 0, &mut nodes)?;
        x = next;
        z = zn;
        v = vn;
    }
    Ok(nodes)
}

/// Lifts `f` on `[a, b]` starting from `lift(base_point) = base_value`.
///
/// The grid starts at `step_hint` (or half the inverse Lipschitz bound, if
/// smaller) and each step is halved, up to [`MAX_REFINEMENTS`] times, until
/// consecutive samples are closer than chord `1`.
pub fn lift(
    f: &CircleMap,
    base_point: f64,
    base_value: f64,
    interval: (f64, f64),
    step_hint: f64,
) -> Result<RealLift, CircleError> {
    let (a, b) = interval;
    if !(a.is_finite() && b.is_finite() && a <= base_point && base_point <= b) {
        return Err(CircleError::InvalidInterval { a, b, base: base_point });
    }
    if !(step_hint > 0.0 && step_hint.is_finite()) {
        return Err(CircleError::InvalidStep(step_hint));
    }
    let mismatch = chord(unit(base_value), f.eval(base_point));
    if mismatch > BASE_TOLERANCE {
        return Err(CircleError::BaseMismatch { point: base_point, value: base_value, mismatch });
    }
    let step = initial_step(f, step_hint);
    let mut left = walk(f, base_point, a, base_value, step)?;
    let right = walk(f, base_point, b, base_value, step)?;
    left.reverse();
    left.push((base_point, base_value));
    left.extend(right);
    Ok(RealLift { source: f.clone(), base_point, base_value, nodes: left })
}

/// Lift of `f` through its principal value at `base_point`.
pub fn principal_lift(
    f: &CircleMap,
    base_point: f64,
    interval: (f64, f64),
    step_hint: f64,
) -> Result<RealLift, CircleError> {
    lift(f, base_point, turns_of(f.eval(base_point)), interval, step_hint)
}

/// The lift of `g` closest to `f_lift`.
///
/// At each node the new value is `f̃(x) + arg(g(x)·f(x)⁻¹)/2π`, which is the
/// unique continuous lift of `g` within a quarter of the sup distance of
/// `f̃`. Requires `|g - f| < 1/8` at every node, with `f` recovered from the
/// lift itself.
pub fn close_lift(f_lift: &RealLift, g: &CircleMap) -> Result<RealLift, CircleError> {
    let mut nodes = Vec::with_capacity(f_lift.nodes.len());
    for &(x, v) in &f_lift.nodes {
        let fz = unit(v);
        let gz = g.eval(x);
        let distance = chord(fz, gz);
        if distance >= 0.125 {
            return Err(CircleError::Proximity { x, distance });
        }
        nodes.push((x, v + turns_of(gz * fz.conj())));
    }
    let base_value = {
        let fz = unit(f_lift.base_value);
        f_lift.base_value + turns_of(g.eval(f_lift.base_point) * fz.conj())
    };
    Ok(RealLift { source: g.clone(), base_point: f_lift.base_point, base_value, nodes })
}

/// Deterministic sampling plan for pre-periodicity probes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProbePlan {
    /// Probe points are spread over `[-radius, radius]`.
    pub radius: f64,
    pub points: usize,
    /// Largest `|k|` in the shifts `x + kN`.
    pub max_shift: u64,
}

impl Default for ProbePlan {
    fn default() -> Self {
        Self { radius: 60.0, points: 97, max_shift: 64 }
    }
}

impl ProbePlan {
    /// Points of a shifted uniform grid on `[-r, r]`. The offset is irrational
    /// so probes do not sit on rational lattice points.
    pub fn sample_points(&self, r: f64) -> Vec<f64> {
        const OFFSET: f64 = 0.618_033_988_749_894_9;
        let n = self.points.max(1);
        let h = 2.0 * r / n as f64;
        (0..n).map(|j| -r + (j as f64 + OFFSET) * h).collect()
    }
}

/// Result of [`estimate_preperiod`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PreperiodCertificate {
    pub period: u64,
    pub epsilon: f64,
    /// Largest `|f(x + kN) - f(x)|` seen for the accepted period.
    pub max_deviation: f64,
    pub pairs_checked: usize,
    pub probe: ProbePlan,
}

fn validate_epsilon(epsilon: f64) -> Result<(), CircleError> {
    if epsilon > 0.0 && epsilon <= 0.125 {
        Ok(())
    } else {
        Err(CircleError::InvalidEpsilon(epsilon))
    }
}

/// Smallest `N <= n_max` with `|f(x + kN) - f(x)| < epsilon` at every probe
/// point `x` and shift `0 < |k| <= max_shift` that stays inside the trusted
/// domain. Periods with no admissible pair cannot be certified.
pub fn estimate_preperiod(
    f: &CircleMap,
    epsilon: f64,
    n_max: u64,
    probe: &ProbePlan,
) -> Result<PreperiodCertificate, CircleError> {
    validate_epsilon(epsilon)?;
    let domain = f.domain_radius();
    let points = probe.sample_points(probe.radius.min(domain));
    let base: Vec<Complex64> = points.iter().map(|&x| f.eval(x)).collect();

    'period: for n in 1..=n_max {
        let mut pairs = 0;
        let mut worst: f64 = 0.0;
        for (&x, &fx) in points.iter().zip(&base) {
            for k in 1..=probe.max_shift {
                let shift = (k * n) as f64;
                if x + shift > domain && x - shift < -domain {
                    break;
                }
                for y in [x + shift, x - shift] {
                    if y.abs() > domain {
                        continue;
                    }
                    let d = chord(f.eval(y), fx);
                    if d >= epsilon {
                        continue 'period;
                    }
                    worst = worst.max(d);
                    pairs += 1;
                }
            }
        }
        if pairs == 0 {
            break;
        }
        return Ok(PreperiodCertificate {
            period: n,
            epsilon,
            max_deviation: worst,
            pairs_checked: pairs,
            probe: probe.clone(),
        });
    }
    Err(CircleError::NotPreperiodic { n_max, epsilon })
}

/// Tuning for [`generalized_winding`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WindingOptions {
    pub epsilon: f64,
    pub n_max: u64,
    pub probe: ProbePlan,
    pub step: f64,
}

impl Default for WindingOptions {
    fn default() -> Self {
        Self { epsilon: 0.125, n_max: 720, probe: ProbePlan::default(), step: 1.0 / 64.0 }
    }
}

/// Generalized winding number `n1 / N` with its certificate data.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WindingNumber {
    pub value: Rational,
    pub n1: i64,
    pub period_used: u64,
    /// Largest `|f̃(x + N) - f̃(x) - n1|` over the defect scan.
    pub lift_defect: f64,
    pub certificate: PreperiodCertificate,
}

impl fmt::Display for WindingNumber {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{} (defect={})", self.n1, self.period_used, fmt_sig(self.lift_defect))
    }
}

/// Generalized winding number of a pre-periodic map.
///
/// With `N` the certified period, the map is lifted on `[-2N, 2N]` and
/// `n1` is the nearest integer to `f̃(N) - f̃(0)`. Since `n_k = k·n1` for
/// every multiple of the period, one period fixes the limit; the defect
/// scan over `[-N, N]` checks the hypothesis at the sampled scale.
pub fn generalized_winding(f: &CircleMap, opts: &WindingOptions) -> Result<WindingNumber, CircleError> {
    let certificate = estimate_preperiod(f, opts.epsilon, opts.n_max, &opts.probe)?;
    let period = certificate.period;
    let n = period as f64;
    if 2.0 * n > f.domain_radius() {
        return Err(CircleError::DomainTooSmall { period, needed: 2.0 * n, radius: f.domain_radius() });
    }
    let lifted = principal_lift(f, 0.0, (-2.0 * n, 2.0 * n), opts.step)?;
    let at = |x: f64| lifted.value_at(x).expect("inside lifted interval");
    let n1 = (at(n) - at(0.0)).round();

    let mut defect: f64 = 0.0;
    for x in opts.probe.sample_points(n) {
        defect = defect.max((at(x + n) - at(x) - n1).abs());
    }
    for &(x, v) in lifted.nodes() {
        if x.abs() <= n && x + n <= 2.0 * n {
            defect = defect.max((at(x + n) - v - n1).abs());
        }
    }
    if defect > DEFECT_BUDGET + DEFECT_SLACK {
        return Err(CircleError::InconsistentWinding { period, defect });
    }
    let n1 = n1 as i64;
    Ok(WindingNumber {
        value: Rational::new(n1, period as i64),
        n1,
        period_used: period,
        lift_defect: defect,
        certificate,
    })
}

/// Integer winding `f̃(R) - f̃(-R)` of a map with equal limits at `±∞`,
/// where `R = tail_radius`.
///
/// The tails are certified by sampling `±[R, 4R]` against `f(R)`.
pub fn winding_compact(f: &CircleMap, tail_radius: f64, step: f64) -> Result<i64, CircleError> {
    let r = tail_radius;
    if !(r > 0.0 && r.is_finite()) {
        return Err(CircleError::InvalidInterval { a: -r, b: r, base: -r });
    }
    let limit = f.eval(r);
    const TAIL_SAMPLES: usize = 64;
    for i in 0..=TAIL_SAMPLES {
        let x = r * (1.0 + 3.0 * i as f64 / TAIL_SAMPLES as f64);
        for y in [x, -x] {
            let deviation = chord(f.eval(y), limit);
            if deviation > COMPACT_TOLERANCE {
                return Err(CircleError::TailNotSettled { x: y, deviation });
            }
        }
    }
    let lifted = principal_lift(f, -r, (-r, r), step)?;
    let diff = lifted.value_at(r).expect("inside") - lifted.base_value();
    let rounded = diff.round();
    if (diff - rounded).abs() > COMPACT_TOLERANCE {
        return Err(CircleError::NonIntegerWinding { value: diff });
    }
    Ok(rounded as i64)
}

/// Point `t` of the straight-line homotopy between `g` (at `t = 0`) and `f`
/// (at `t = 1`), two maps of the same winding `w`.
///
/// Both maps are untwisted by `exp(-2πi·w·x)`, lifted, and the lifts are
/// blended: `H_t = exp(2πi(t·F̃ + (1 - t)·G̃ + w·x))`.
pub fn homotopy_interpolate(
    f: &CircleMap,
    g: &CircleMap,
    t: f64,
    shared_winding: &Rational,
    opts: &WindingOptions,
) -> Result<CircleMap, CircleError> {
    let wf = generalized_winding(f, opts)?;
    let wg = generalized_winding(g, opts)?;
    if &wf.value != shared_winding || &wg.value != shared_winding {
        return Err(CircleError::WindingMismatch {
            f: Box::new(wf.value),
            g: Box::new(wg.value),
            shared: Box::new(shared_winding.clone()),
        });
    }
    let period = wf.period_used.max(wg.period_used).max(opts.n_max.min(1)) as f64;
    let radius = f.domain_radius().min(g.domain_radius()).min(opts.probe.radius.max(4.0 * period) + 1.0);
    let untwist = CircleMap::exp_rational(&-shared_winding);
    let f_lift = principal_lift(&f.mul(&untwist), 0.0, (-radius, radius), opts.step)?;
    let g_lift = principal_lift(&g.mul(&untwist), 0.0, (-radius, radius), opts.step)?;
    let w = shared_winding.to_f64();
    Ok(CircleMap::from_phase(move |x| t * f_lift.snapped(x) + (1.0 - t) * g_lift.snapped(x) + w * x, radius))
}
