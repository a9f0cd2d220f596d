//! Variable exponents and weights as radial scalar fields, the pointwise
//! critical exponent, growth-regime classification and hypothesis checks.

use std::cmp::Ordering;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::radial::{smoothstep, RadialGrid};

pub type Evaluator = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// A continuous function of the radius on `[0, R]` with cached extrema.
///
/// Extrema come from dense uniform sampling (`DEFAULT_SAMPLES + 1` points),
/// together with the radius at which each is attained.
#[derive(Clone)]
pub struct ExponentField {
    eval: Evaluator,
    radius: f64,
    lo: f64,
    hi: f64,
    argmin: f64,
    argmax: f64,
}

impl fmt::Debug for ExponentField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ExponentField")
            .field("radius", &self.radius)
            .field("lo", &self.lo)
            .field("hi", &self.hi)
            .finish()
    }
}

impl ExponentField {
    pub const DEFAULT_SAMPLES: usize = 10_000;

    pub fn from_fn(radius: f64, f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        Self::with_samples(radius, Self::DEFAULT_SAMPLES, f)
    }

    pub fn with_samples(
        radius: f64,
        samples: usize,
        f: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        let eval: Evaluator = Arc::new(f);
        let (lo, argmin, hi, argmax) = sample_extrema(&eval, 0.0, radius, samples);
        Self {
            eval,
            radius,
            lo,
            hi,
            argmin,
            argmax,
        }
    }

    pub fn constant(value: f64, radius: f64) -> Self {
        Self {
            eval: Arc::new(move |_| value),
            radius,
            lo: value,
            hi: value,
            argmin: 0.0,
            argmax: 0.0,
        }
    }

    pub fn from_def(def: &FieldDef, radius: f64) -> Result<Self> {
        def.validate(radius)?;
        Ok(match def.clone() {
            FieldDef::Constant { value } => Self::constant(value, radius),
            FieldDef::Affine { intercept, slope } => {
                Self::from_fn(radius, move |s| intercept + slope * s)
            }
            FieldDef::Bump {
                base,
                amplitude,
                center,
                width,
            } => Self::from_fn(radius, move |s| {
                let x = (s - center) / width;
                if x.abs() < 1.0 {
                    base + amplitude * (1.0 - 1.0 / (1.0 - x * x)).exp()
                } else {
                    base
                }
            }),
            FieldDef::Smoothstep {
                inner,
                outer,
                start,
                end,
            } => Self::from_fn(radius, move |s| {
                inner + (outer - inner) * smoothstep((s - start) / (end - start))
            }),
            FieldDef::BoundaryPower {
                inner,
                start,
                power,
            } => Self::from_fn(radius, move |s| {
                if s <= start {
                    inner
                } else {
                    inner * ((radius - s).max(0.0) / (radius - start)).powf(power)
                }
            }),
            FieldDef::Tabulated { points } => {
                let table = MonotoneTable::new(&points)?;
                Self::from_fn(radius, move |s| table.eval(s))
            }
        })
    }

    #[inline]
    pub fn eval(&self, s: f64) -> f64 {
        (self.eval)(s)
    }
    pub fn lo(&self) -> f64 {
        self.lo
    }
    pub fn hi(&self) -> f64 {
        self.hi
    }
    pub fn argmin(&self) -> f64 {
        self.argmin
    }
    pub fn argmax(&self) -> f64 {
        self.argmax
    }
    pub fn radius(&self) -> f64 {
        self.radius
    }

    /// Sampled extrema over `[a, b]` with the radii where they occur.
    pub fn extrema_on(&self, a: f64, b: f64) -> (f64, f64, f64, f64) {
        sample_extrema(&self.eval, a, b, Self::DEFAULT_SAMPLES)
    }

    pub fn sample(&self, radii: &[f64]) -> Vec<f64> {
        radii.iter().map(|&s| self.eval(s)).collect()
    }

    /// Conjugate exponent `p / (p - 1)`. The map is decreasing, so the
    /// extrema are those of `p` exchanged.
    pub fn conjugate(&self) -> Result<Self> {
        if !(self.lo > 1.0) {
            return Err(Error::ExponentTooSmall {
                value: self.lo,
                radius: self.argmin,
            });
        }
        let inner = self.eval.clone();
        let conj = |p: f64| p / (p - 1.0);
        Ok(Self {
            eval: Arc::new(move |s| {
                let p = inner(s);
                p / (p - 1.0)
            }),
            radius: self.radius,
            lo: conj(self.hi),
            hi: conj(self.lo),
            argmin: self.argmax,
            argmax: self.argmin,
        })
    }
}

fn sample_extrema(eval: &Evaluator, a: f64, b: f64, samples: usize) -> (f64, f64, f64, f64) {
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    let (mut argmin, mut argmax) = (a, a);
    for i in 0..=samples {
        let s = if i == samples {
            b
        } else {
            a + (b - a) * i as f64 / samples as f64
        };
        let v = eval(s);
        if v < lo {
            lo = v;
            argmin = s;
        }
        if v > hi {
            hi = v;
            argmax = s;
        }
    }
    (lo, argmin, hi, argmax)
}

/// Conjugate field `p'(s) = p(s) / (p(s) - 1)`.
pub fn conjugate_field(p: &ExponentField) -> Result<ExponentField> {
    p.conjugate()
}

/// Named field constructors accepted in run configurations.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum FieldDef {
    Constant {
        value: f64,
    },
    /// `intercept + slope * s`
    Affine { intercept: f64, slope: f64 },
    /// `base + amplitude * exp(1 - 1 / (1 - x^2))` with `x = (s - center) / width`.
    Bump {
        base: f64,
        amplitude: f64,
        center: f64,
        width: f64,
    },
    /// `inner` up to `start`, `outer` from `end`, quintic smoothstep between.
    Smoothstep {
        inner: f64,
        outer: f64,
        start: f64,
        end: f64,
    },
    /// `inner` up to `start`, then `inner * ((R - s) / (R - start))^power`,
    /// vanishing at `s = R`.
    BoundaryPower { inner: f64, start: f64, power: f64 },
    /// `(radius, value)` pairs joined by a monotone cubic interpolant.
    Tabulated { points: Vec<[f64; 2]> },
}

impl FieldDef {
    fn validate(&self, radius: f64) -> Result<()> {
        let bad = |msg: &str| Err(Error::InvalidParameter(msg.to_string()));
        match self {
            FieldDef::Bump { width, .. } if !(*width > 0.0) => bad("bump width must be positive"),
            FieldDef::Smoothstep { start, end, .. } if !(end > start) => {
                bad("smoothstep needs start < end")
            }
            FieldDef::BoundaryPower { start, power, .. } if !(*start < radius && *power > 0.0) => {
                bad("boundary-power needs start < R and power > 0")
            }
            FieldDef::Tabulated { points } if points.len() < 2 => {
                bad("tabulated field needs at least two points")
            }
            _ => Ok(()),
        }
    }
}

/// Monotone piecewise-cubic Hermite interpolation (Fritsch-Carlson slopes).
#[derive(Clone, Debug)]
struct MonotoneTable {
    x: Vec<f64>,
    y: Vec<f64>,
    slope: Vec<f64>,
}

impl MonotoneTable {
    fn new(points: &[[f64; 2]]) -> Result<Self> {
        let x: Vec<f64> = points.iter().map(|p| p[0]).collect();
        let y: Vec<f64> = points.iter().map(|p| p[1]).collect();
        if x.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidParameter(
                "tabulated radii must increase strictly".into(),
            ));
        }
        let n = x.len();
        let delta: Vec<f64> = (0..n - 1)
            .map(|i| (y[i + 1] - y[i]) / (x[i + 1] - x[i]))
            .collect();
        let mut slope = vec![0.0; n];
        slope[0] = delta[0];
        slope[n - 1] = delta[n - 2];
        for i in 1..n - 1 {
            slope[i] = if delta[i - 1] * delta[i] <= 0.0 {
                0.0
            } else {
                let h0 = x[i] - x[i - 1];
                let h1 = x[i + 1] - x[i];
                let w0 = 2.0 * h1 + h0;
                let w1 = h1 + 2.0 * h0;
                (w0 + w1) / (w0 / delta[i - 1] + w1 / delta[i])
            };
        }
        for i in 0..n - 1 {
            if delta[i] == 0.0 {
                slope[i] = 0.0;
                slope[i + 1] = 0.0;
            }
        }
        Ok(Self { x, y, slope })
    }

    fn eval(&self, s: f64) -> f64 {
        let n = self.x.len();
        if s <= self.x[0] {
            return self.y[0];
        }
        if s >= self.x[n - 1] {
            return self.y[n - 1];
        }
        let i = self.x.partition_point(|&x| x <= s) - 1;
        let h = self.x[i + 1] - self.x[i];
        let t = (s - self.x[i]) / h;
        let (t2, t3) = (t * t, t * t * t);
        (2.0 * t3 - 3.0 * t2 + 1.0) * self.y[i]
            + (t3 - 2.0 * t2 + t) * h * self.slope[i]
            + (-2.0 * t3 + 3.0 * t2) * self.y[i + 1]
            + (t3 - t2) * h * self.slope[i + 1]
    }
}

/// Critical Sobolev exponent: finite below the dimension, `Infinite` from it.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub enum CriticalExponent {
    Finite(f64),
    Infinite,
}

impl CriticalExponent {
    pub fn of(p: f64, dim: usize) -> Result<Self> {
        if !(p > 1.0) {
            return Err(Error::ExponentTooSmall {
                value: p,
                radius: f64::NAN,
            });
        }
        let n = dim as f64;
        Ok(if p < n {
            CriticalExponent::Finite(n * p / (n - p))
        } else {
            CriticalExponent::Infinite
        })
    }

    pub fn is_infinite(self) -> bool {
        matches!(self, CriticalExponent::Infinite)
    }

    pub fn finite(self) -> Option<f64> {
        match self {
            CriticalExponent::Finite(v) => Some(v),
            CriticalExponent::Infinite => None,
        }
    }

    /// Ordering of the real value `q` against this exponent.
    pub fn compare(self, q: f64) -> Ordering {
        match self {
            CriticalExponent::Infinite => Ordering::Less,
            CriticalExponent::Finite(v) => q.partial_cmp(&v).unwrap_or(Ordering::Equal),
        }
    }

    /// `q - p*`, negative infinity when `p*` is infinite.
    pub fn gap(self, q: f64) -> f64 {
        match self {
            CriticalExponent::Infinite => f64::NEG_INFINITY,
            CriticalExponent::Finite(v) => q - v,
        }
    }
}

impl fmt::Display for CriticalExponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CriticalExponent::Finite(v) => write!(f, "{v}"),
            CriticalExponent::Infinite => f.write_str("inf"),
        }
    }
}

pub fn critical_exponent(p: &ExponentField, dim: usize, s: f64) -> Result<CriticalExponent> {
    let v = p.eval(s);
    CriticalExponent::of(v, dim).map_err(|_| Error::ExponentTooSmall { value: v, radius: s })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum HypothesisSet {
    /// (H1)-(H4): subcritical on the inner ball, unrestricted on the annulus.
    #[serde(rename = "H1-H4")]
    Radial,
    /// (H9)-(H12): reaction exponent vanishing at the boundary.
    #[serde(rename = "H9-H12")]
    BoundaryVanishing,
}

impl fmt::Display for HypothesisSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            HypothesisSet::Radial => "H1-H4",
            HypothesisSet::BoundaryVanishing => "H9-H12",
        })
    }
}

/// A complete problem instance on the ball `B_R` in `R^N`.
#[derive(Clone, Debug)]
pub struct ProblemSpec {
    pub p: ExponentField,
    pub q: ExponentField,
    pub m: ExponentField,
    pub a: ExponentField,
    pub outer_radius: f64,
    pub inner_radius: f64,
    pub dim: usize,
    pub lambda: f64,
    pub hypothesis_set: HypothesisSet,
    /// Upper bound `L` on the weight; `None` only requires `a` bounded.
    pub weight_bound: Option<f64>,
}

impl ProblemSpec {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        p: ExponentField,
        q: ExponentField,
        m: ExponentField,
        a: ExponentField,
        outer_radius: f64,
        inner_radius: f64,
        dim: usize,
        lambda: f64,
        hypothesis_set: HypothesisSet,
    ) -> Result<Self> {
        if !(inner_radius > 0.0 && inner_radius < outer_radius) {
            return Err(Error::InvalidParameter(format!(
                "need 0 < r < R, got r = {inner_radius}, R = {outer_radius}"
            )));
        }
        if dim < 2 {
            return Err(Error::InvalidParameter(format!("need N >= 2, got {dim}")));
        }
        if !(lambda >= 0.0) || !lambda.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "lambda must be a nonnegative real, got {lambda}"
            )));
        }
        Ok(Self {
            p,
            q,
            m,
            a,
            outer_radius,
            inner_radius,
            dim,
            lambda,
            hypothesis_set,
            weight_bound: None,
        })
    }

    /// Constant exponents and weight, convenient for tests and demos.
    #[allow(clippy::too_many_arguments)]
    pub fn constant(
        p: f64,
        q: f64,
        m: f64,
        a: f64,
        outer_radius: f64,
        inner_radius: f64,
        dim: usize,
        lambda: f64,
        hypothesis_set: HypothesisSet,
    ) -> Result<Self> {
        let f = |v| ExponentField::constant(v, outer_radius);
        Self::new(
            f(p),
            f(q),
            f(m),
            f(a),
            outer_radius,
            inner_radius,
            dim,
            lambda,
            hypothesis_set,
        )
    }

    pub fn with_lambda(&self, lambda: f64) -> Self {
        Self {
            lambda,
            ..self.clone()
        }
    }

    pub fn with_weight_bound(mut self, bound: Option<f64>) -> Self {
        self.weight_bound = bound;
        self
    }

    /// `min_x p*(x)`; `p*` increases with `p`, so it is attained at `p_-`.
    pub fn min_critical_exponent(&self) -> Result<CriticalExponent> {
        CriticalExponent::of(self.p.lo(), self.dim)
    }
}

/// Partition of grid node indices by the sign of `q - p*`.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct RegimeMap {
    pub subcritical: Vec<usize>,
    pub critical: Vec<usize>,
    pub supercritical: Vec<usize>,
}

pub fn classify_regime(spec: &ProblemSpec, grid: &RadialGrid, tol: f64) -> Result<RegimeMap> {
    let mut map = RegimeMap::default();
    for (i, &s) in grid.nodes().iter().enumerate() {
        let gap = critical_exponent(&spec.p, spec.dim, s)?.gap(spec.q.eval(s));
        if gap < -tol {
            map.subcritical.push(i);
        } else if gap > tol {
            map.supercritical.push(i);
        } else {
            map.critical.push(i);
        }
    }
    Ok(map)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Witness {
    pub radius: f64,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ClauseResult {
    pub clause: String,
    pub description: String,
    pub passed: bool,
    pub witness: Option<Witness>,
    pub note: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HypothesisReport {
    pub hypothesis_set: HypothesisSet,
    pub clauses: Vec<ClauseResult>,
}

impl HypothesisReport {
    pub fn passed(&self) -> bool {
        self.clauses.iter().all(|c| c.passed)
    }

    pub fn failed_clauses(&self) -> Vec<&str> {
        self.clauses
            .iter()
            .filter(|c| !c.passed)
            .map(|c| c.clause.as_str())
            .collect()
    }
}

/// Number of boundary-adjacent nodes in the vanishing-exponent band check.
pub const BOUNDARY_BAND_NODES: usize = 5;
/// Band threshold as a fraction of `min(p_-, m_-)`.
pub const BOUNDARY_BAND_FRACTION: f64 = 0.1;
const CONSTANCY_TOL: f64 = 1e-12;

struct Clauses(Vec<ClauseResult>);

impl Clauses {
    fn push(&mut self, clause: &str, description: &str, failure: Option<Witness>) {
        self.0.push(ClauseResult {
            clause: clause.into(),
            description: description.into(),
            passed: failure.is_none(),
            witness: failure,
            note: None,
        });
    }

    fn note(&mut self, note: &str) {
        if let Some(c) = self.0.last_mut() {
            c.note = Some(note.into());
        }
    }
}

fn first_failure(checks: Vec<(bool, f64, String)>) -> Option<Witness> {
    checks
        .into_iter()
        .find(|c| !c.0)
        .map(|(_, radius, detail)| Witness { radius, detail })
}

fn exponent_range(name: &str, f: &ExponentField, dim: usize) -> Vec<(bool, f64, String)> {
    let n = dim as f64;
    vec![
        (
            f.lo() > 1.0,
            f.argmin(),
            format!("{name}_- = {} is not > 1", f.lo()),
        ),
        (
            f.hi() < n,
            f.argmax(),
            format!("{name}_+ = {} is not < N = {dim}", f.hi()),
        ),
    ]
}

fn weight_checks(spec: &ProblemSpec) -> Vec<(bool, f64, String)> {
    let a = &spec.a;
    let mut checks = vec![(
        a.lo() >= 0.0,
        a.argmin(),
        format!("a = {} is negative", a.lo()),
    )];
    match spec.weight_bound {
        Some(l) => checks.push((a.hi() <= l, a.argmax(), format!("a = {} exceeds L = {l}", a.hi()))),
        None => checks.push((a.hi().is_finite(), a.argmax(), "a is unbounded".into())),
    }
    checks
}

fn nonnegative_q(spec: &ProblemSpec) -> (bool, f64, String) {
    (
        spec.q.lo() >= 0.0,
        spec.q.argmin(),
        format!("q = {} is negative", spec.q.lo()),
    )
}

/// Checks the declared hypothesis set clause by clause. Failures are report
/// entries carrying a witness radius.
pub fn validate_hypotheses(spec: &ProblemSpec, grid: &RadialGrid) -> HypothesisReport {
    let mut out = Clauses(Vec::new());
    let dim = spec.dim;
    let r = spec.inner_radius;
    let (q_lo, q_lo_at, q_hi, q_hi_at) = spec.q.extrema_on(0.0, r);
    let pstar = CriticalExponent::of(spec.p.lo().max(1.0 + f64::EPSILON), dim)
        .unwrap_or(CriticalExponent::Infinite);
    let below_pstar = |q: f64| pstar.compare(q) == Ordering::Less;

    let mut range = exponent_range("p", &spec.p, dim);
    range.extend(exponent_range("m", &spec.m, dim));
    let (h_range, h_weight) = match spec.hypothesis_set {
        HypothesisSet::Radial => ("H1", "H2"),
        HypothesisSet::BoundaryVanishing => ("H9", "H11"),
    };
    out.push(
        h_range,
        "1 < p_- <= p_+ < N and 1 < m_- <= m_+ < N",
        first_failure(range),
    );

    match spec.hypothesis_set {
        HypothesisSet::Radial => {
            out.push(h_weight, "0 <= a <= L", first_failure(weight_checks(spec)));
            out.push("H3", "p, q, a depend on |x| only", None);
            out.note("fields are functions of the radius by construction");
            let checks = vec![
                nonnegative_q(spec),
                (
                    spec.p.hi() < q_lo,
                    q_lo_at,
                    format!("p_+ = {} is not < q_-^r = {q_lo}", spec.p.hi()),
                ),
                (
                    below_pstar(q_hi),
                    q_hi_at,
                    format!("q_+^r = {q_hi} is not < min p* = {pstar}"),
                ),
            ];
            out.push(
                "H4",
                "q >= 0 and p_+ < q_-^r <= q_+^r < min p*",
                first_failure(checks),
            );
        }
        HypothesisSet::BoundaryVanishing => {
            let top = spec.p.hi().max(spec.m.hi());
            let checks = vec![
                (
                    top < q_lo,
                    q_lo_at,
                    format!("max(p_+, m_+) = {top} is not < q_- = {q_lo} on the inner ball"),
                ),
                (
                    below_pstar(q_hi),
                    q_hi_at,
                    format!("q_+ = {q_hi} on the inner ball is not < min p* = {pstar}"),
                ),
            ];
            out.push(
                "H10",
                "max(p_+, m_+) < q_- <= q_+ < min p* on the inner ball",
                first_failure(checks),
            );
            out.note("the chain is read as q_- <= q_+, not as equality");

            let mut checks = weight_checks(spec);
            let (a_lo, a_lo_at, a_hi, _) = spec.a.extrema_on(r, spec.outer_radius);
            checks.push((
                a_hi - a_lo <= CONSTANCY_TOL * (1.0 + a_hi.abs()),
                a_lo_at,
                format!("a varies on the annulus: [{a_lo}, {a_hi}]"),
            ));
            out.push(h_weight, "0 <= a <= L and a = a_0 on the annulus", first_failure(checks));

            let threshold = BOUNDARY_BAND_FRACTION * spec.p.lo().min(spec.m.lo());
            let mut checks = vec![nonnegative_q(spec)];
            let nodes = grid.nodes();
            for &s in nodes.iter().rev().take(BOUNDARY_BAND_NODES) {
                let q = spec.q.eval(s);
                checks.push((
                    q < threshold,
                    s,
                    format!("q = {q} is not < {threshold} next to the boundary"),
                ));
            }
            out.push(
                "H12",
                "q >= 0 and q -> 0 at the boundary (band check)",
                first_failure(checks),
            );
        }
    }
    HypothesisReport {
        hypothesis_set: spec.hypothesis_set,
        clauses: out.0,
    }
}
