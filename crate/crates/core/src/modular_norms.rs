//! Modulars and Luxemburg norms of variable-exponent spaces on the ball,
//! plus the norm-modular and Hölder inequality checks.
//!
//! All integrals are restricted to `B_R`; the whole-space setting is never
//! needed for the Dirichlet problems handled here.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::exponent_fields::{ExponentField, ProblemSpec};
use crate::radial::{RadialFunction, RadialGrid};

/// Target `|modular(u / lambda) - 1|` for the norm root-finding.
pub const LUXEMBURG_TOL: f64 = 1e-10;
pub const LUXEMBURG_MAX_ITER: usize = 200;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModularKind {
    /// `int |grad u|^p + |u|^p`
    Full,
    /// `int |u|^p`
    Value,
    /// `int |grad u|^p`
    Gradient,
    /// `int a |grad u|^m`; only a seminorm where `a` vanishes.
    WeightedGradient,
}

#[derive(Clone, Debug)]
pub struct Modular {
    pub kind: ModularKind,
    pub exponent: ExponentField,
    pub weight: Option<ExponentField>,
}

impl Modular {
    pub fn full(p: ExponentField) -> Self {
        Self { kind: ModularKind::Full, exponent: p, weight: None }
    }
    pub fn value(p: ExponentField) -> Self {
        Self { kind: ModularKind::Value, exponent: p, weight: None }
    }
    pub fn gradient(p: ExponentField) -> Self {
        Self { kind: ModularKind::Gradient, exponent: p, weight: None }
    }
    pub fn weighted_gradient(m: ExponentField, a: ExponentField) -> Self {
        Self { kind: ModularKind::WeightedGradient, exponent: m, weight: Some(a) }
    }

    fn terms(&self, u: &RadialFunction, grid: &RadialGrid) -> Result<Terms> {
        grid.check(u)?;
        let mut terms = Terms::default();
        let with_cells = !matches!(self.kind, ModularKind::Value);
        let with_nodes = matches!(self.kind, ModularKind::Full | ModularKind::Value);
        if with_cells {
            let grad = u.cell_gradient(grid);
            for ((d, &c), &s) in grad.iter().zip(grid.cell_measures()).zip(grid.midpoints()) {
                let coef = match &self.weight {
                    Some(a) => c * a.eval(s),
                    None => c,
                };
                terms.push(coef, d.abs(), self.exponent.eval(s));
            }
        }
        if with_nodes {
            for ((v, &w), &s) in u.values().iter().zip(grid.weights()).zip(grid.nodes()) {
                terms.push(w, v.abs(), self.exponent.eval(s));
            }
        }
        Ok(terms)
    }
}

/// Integrand terms `coef * (magnitude / lambda)^exponent` of a modular.
#[derive(Clone, Debug, Default)]
pub struct Terms {
    coef: Vec<f64>,
    log_mag: Vec<f64>,
    exponent: Vec<f64>,
    p_lo: f64,
    p_hi: f64,
}

impl Terms {
    pub fn with_capacity(n: usize) -> Self {
        Self {
            coef: Vec::with_capacity(n),
            log_mag: Vec::with_capacity(n),
            exponent: Vec::with_capacity(n),
            p_lo: f64::INFINITY,
            p_hi: f64::NEG_INFINITY,
        }
    }

    /// Zero magnitudes and zero coefficients contribute nothing and are dropped.
    pub fn push(&mut self, coef: f64, magnitude: f64, exponent: f64) {
        if coef == 0.0 || magnitude == 0.0 {
            return;
        }
        self.coef.push(coef);
        self.log_mag.push(magnitude.ln());
        self.exponent.push(exponent);
        if self.coef.len() == 1 {
            self.p_lo = exponent;
            self.p_hi = exponent;
        } else {
            self.p_lo = self.p_lo.min(exponent);
            self.p_hi = self.p_hi.max(exponent);
        }
    }

    pub fn is_empty(&self) -> bool {
        self.coef.is_empty()
    }

    /// Modular of `u / lambda`.
    pub fn eval(&self, lambda: f64) -> f64 {
        let ll = lambda.ln();
        self.coef
            .iter()
            .zip(&self.log_mag)
            .zip(&self.exponent)
            .map(|((c, lm), p)| c * (p * (lm - ll)).exp())
            .sum()
    }

    /// Smallest `lambda > 0` with `modular(u / lambda) <= 1`, located by
    /// doubling/halving from `rho^{1/p_-}` and then bisection.
    pub fn luxemburg(&self, tol: f64) -> Result<f64> {
        if !(tol > 0.0) {
            return Err(Error::InvalidParameter(format!("tolerance must be positive, got {tol}")));
        }
        if self.is_empty() {
            return Ok(0.0);
        }
        let rho = self.eval(1.0);
        if !rho.is_finite() {
            return Err(Error::NormNoConvergence(format!("modular is {rho}")));
        }
        let start = if rho > 0.0 { rho.powf(1.0 / self.p_lo) } else { 1.0 };
        let mut f_start = self.eval(start);
        if (f_start - 1.0).abs() <= tol {
            return Ok(start);
        }
        let (mut lo, mut hi, mut f_lo, mut f_hi);
        let mut iter = 0;
        if f_start > 1.0 {
            lo = start;
            f_lo = f_start;
            hi = start;
            loop {
                hi *= 2.0;
                f_hi = self.eval(hi);
                iter += 1;
                if f_hi <= 1.0 {
                    break;
                }
                if iter >= LUXEMBURG_MAX_ITER {
                    return Err(Error::NormNoConvergence("upper bracket not found".into()));
                }
                lo = hi;
                f_lo = f_hi;
            }
        } else {
            hi = start;
            f_hi = f_start;
            lo = start;
            loop {
                lo *= 0.5;
                f_lo = self.eval(lo);
                iter += 1;
                if f_lo > 1.0 {
                    break;
                }
                if iter >= LUXEMBURG_MAX_ITER {
                    return Err(Error::NormNoConvergence("lower bracket not found".into()));
                }
                hi = lo;
                f_hi = f_lo;
            }
        }
        for _ in 0..LUXEMBURG_MAX_ITER {
            if !(f_lo >= f_hi) {
                return Err(Error::NormNoConvergence(
                    "modular is not decreasing in lambda".into(),
                ));
            }
            let mid = 0.5 * (lo + hi);
            f_start = self.eval(mid);
            if (f_start - 1.0).abs() <= tol {
                return Ok(mid);
            }
            if !(f_start <= f_lo && f_start >= f_hi) {
                return Err(Error::NormNoConvergence(
                    "modular is not decreasing in lambda".into(),
                ));
            }
            if f_start > 1.0 {
                lo = mid;
                f_lo = f_start;
            } else {
                hi = mid;
                f_hi = f_start;
            }
            if hi - lo <= 4.0 * f64::EPSILON * hi {
                return Ok(0.5 * (lo + hi));
            }
        }
        Err(Error::NormNoConvergence(format!(
            "bisection stopped at |rho - 1| = {:e}",
            (f_start - 1.0).abs()
        )))
    }
}

pub fn modular_eval(modular: &Modular, u: &RadialFunction, grid: &RadialGrid) -> Result<f64> {
    Ok(modular.terms(u, grid)?.eval(1.0))
}

pub fn luxemburg_norm(modular: &Modular, u: &RadialFunction, grid: &RadialGrid, tol: f64) -> Result<f64> {
    modular.terms(u, grid)?.luxemburg(tol)
}

/// `||grad u||_{p(x)} + ||grad u||_{m(x), a(x)}`.
pub fn composite_norm(u: &RadialFunction, spec: &ProblemSpec, grid: &RadialGrid) -> Result<f64> {
    let first = luxemburg_norm(&Modular::gradient(spec.p.clone()), u, grid, LUXEMBURG_TOL)?;
    let second = luxemburg_norm(
        &Modular::weighted_gradient(spec.m.clone(), spec.a.clone()),
        u,
        grid,
        LUXEMBURG_TOL,
    )?;
    Ok(first + second)
}

#[derive(Clone, Debug, Serialize)]
pub struct HolderReport {
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
}

/// `|int u v| <= (1/p_- + 1/p'_-) |u|_{p(x)} |v|_{p'(x)}`.
pub fn holder_check(
    u: &RadialFunction,
    v: &RadialFunction,
    p: &ExponentField,
    grid: &RadialGrid,
    tol: f64,
) -> Result<HolderReport> {
    grid.check(u)?;
    grid.check(v)?;
    let conj = p.conjugate()?;
    let lhs = grid
        .weights()
        .iter()
        .zip(u.values())
        .zip(v.values())
        .map(|((w, a), b)| w * a * b)
        .sum::<f64>()
        .abs();
    let nu = luxemburg_norm(&Modular::value(p.clone()), u, grid, LUXEMBURG_TOL)?;
    let nv = luxemburg_norm(&Modular::value(conj.clone()), v, grid, LUXEMBURG_TOL)?;
    let rhs = (1.0 / p.lo() + 1.0 / conj.lo()) * nu * nv;
    Ok(HolderReport { lhs, rhs, holds: lhs <= rhs + tol })
}

#[derive(Clone, Debug, Serialize)]
pub struct BoundsReport {
    pub norm: f64,
    pub modular: f64,
    pub p_minus: f64,
    pub p_plus: f64,
    /// `n^{p_-} <= rho` when `n >= 1`, `n^{p_+} <= rho` when `n <= 1`.
    pub lower: bool,
    /// `rho <= n^{p_+}` when `n >= 1`, `rho <= n^{p_-}` when `n <= 1`.
    pub upper: bool,
    /// `n <= max(rho^{1/p_-}, rho^{1/p_+})`
    pub norm_above: bool,
    /// `min(rho^{1/p_-}, rho^{1/p_+}) <= n`
    pub norm_below: bool,
}

impl BoundsReport {
    pub fn holds(&self) -> bool {
        self.lower && self.upper && self.norm_above && self.norm_below
    }
}

fn le(a: f64, b: f64, tol: f64) -> bool {
    a <= b + tol * 1f64.max(a.abs()).max(b.abs())
}

/// Verifies the two-sided power bounds between a Luxemburg norm and its
/// modular, with relative slack `tol`.
pub fn norm_modular_bounds_check(
    u: &RadialFunction,
    modular: &Modular,
    grid: &RadialGrid,
    tol: f64,
) -> Result<BoundsReport> {
    let terms = modular.terms(u, grid)?;
    let n = terms.luxemburg(LUXEMBURG_TOL)?;
    let rho = terms.eval(1.0);
    let (pm, pp) = (modular.exponent.lo(), modular.exponent.hi());
    let (small, large) = if n >= 1.0 { (n.powf(pm), n.powf(pp)) } else { (n.powf(pp), n.powf(pm)) };
    let (ra, rb) = (rho.powf(1.0 / pm), rho.powf(1.0 / pp));
    Ok(BoundsReport {
        norm: n,
        modular: rho,
        p_minus: pm,
        p_plus: pp,
        lower: le(small, rho, tol),
        upper: le(rho, large, tol),
        norm_above: le(n, ra.max(rb), tol),
        norm_below: le(ra.min(rb), n, tol),
    })
}
