//! Radial grids on `[0, R]`, nodal functions, cutoff functions and the
//! shell-cutoff decay measurement.
//!
//! Every integral over the ball `B_R` in `N` dimensions is reduced to the
//! radial variable: `int_{B_R} f(|x|) dx = |S^{N-1}| int_0^R f(s) s^{N-1} ds`.
//! Nodal integrals use the product trapezoid rule: the factor `s^{N-1}` is
//! integrated exactly against the piecewise-linear interpolant of `f`.
//! Gradients live on cells, `(u_{k+1} - u_k) / h_k`, and are integrated with
//! the exact cell measure `|S^{N-1}| int_{s_k}^{s_{k+1}} s^{N-1} ds`.

use std::f64::consts::PI;
use std::fmt::Write as _;
use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const MIN_NODES: usize = 16;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Spacing {
    #[default]
    Uniform,
    /// Spacing shrinks linearly towards `s = R`, ending at a quarter of the
    /// uniform width.
    BoundaryRefined,
}

/// Surface area of the unit sphere `S^{N-1}` in `R^N`.
pub fn sphere_area(dim: usize) -> f64 {
    2.0 * PI.powf(dim as f64 / 2.0) / gamma_half(dim)
}

// Gamma(n / 2) for a positive integer n.
fn gamma_half(n: usize) -> f64 {
    let (mut g, mut x) = if n.is_multiple_of(2) { (1.0, 1.0) } else { (PI.sqrt(), 0.5) };
    let target = n as f64 / 2.0;
    while x < target - 1e-12 {
        g *= x;
        x += 1.0;
    }
    g
}

pub fn ball_volume(radius: f64, dim: usize) -> f64 {
    sphere_area(dim) * radius.powi(dim as i32) / dim as f64
}

fn binomial(n: usize, k: usize) -> f64 {
    let mut c = 1.0;
    for j in 0..k {
        c = c * (n - j) as f64 / (j + 1) as f64;
    }
    c
}

// int_0^1 (a + h t)^{n} t^{j} dt * h, expanded without cancellation.
fn shifted_moment(a: f64, h: f64, n: usize, j: usize) -> f64 {
    (0..=n)
        .map(|i| binomial(n, i) * a.powi((n - i) as i32) * h.powi(i as i32 + 1) / (i + j + 1) as f64)
        .sum()
}

#[derive(Clone, Debug, PartialEq)]
pub struct RadialGrid {
    nodes: Vec<f64>,
    dim: usize,
    weights: Vec<f64>,
    cell_measures: Vec<f64>,
    midpoints: Vec<f64>,
    widths: Vec<f64>,
}

impl RadialGrid {
    pub fn new(outer_radius: f64, dim: usize, nodes: usize, spacing: Spacing) -> Result<Self> {
        if nodes < MIN_NODES {
            return Err(Error::TooFewNodes {
                min: MIN_NODES,
                got: nodes,
            });
        }
        if !(outer_radius > 0.0) || !outer_radius.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "outer radius must be positive, got {outer_radius}"
            )));
        }
        if dim < 1 {
            return Err(Error::InvalidParameter("dimension must be positive".into()));
        }
        let n = nodes - 1;
        let radii: Vec<f64> = (0..nodes)
            .map(|i| {
                let x = i as f64 / n as f64;
                let y = match spacing {
                    Spacing::Uniform => x,
                    Spacing::BoundaryRefined => x + 0.75 * x * (1.0 - x),
                };
                outer_radius * y
            })
            .collect();
        let mut radii = radii;
        radii[n] = outer_radius;
        Self::from_nodes(radii, dim)
    }

    /// Builds a grid from explicit strictly increasing nodes starting at 0.
    pub fn from_nodes(nodes: Vec<f64>, dim: usize) -> Result<Self> {
        if nodes.len() < MIN_NODES {
            return Err(Error::TooFewNodes {
                min: MIN_NODES,
                got: nodes.len(),
            });
        }
        if nodes[0] != 0.0 || nodes.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidParameter(
                "grid nodes must start at 0 and increase strictly".into(),
            ));
        }
        let omega = sphere_area(dim);
        let m = nodes.len();
        let mut weights = vec![0.0; m];
        let mut cell_measures = Vec::with_capacity(m - 1);
        let mut midpoints = Vec::with_capacity(m - 1);
        let mut widths = Vec::with_capacity(m - 1);
        for k in 0..m - 1 {
            let a = nodes[k];
            let h = nodes[k + 1] - a;
            let total = omega * shifted_moment(a, h, dim - 1, 0);
            let upper = omega * shifted_moment(a, h, dim - 1, 1);
            weights[k] += total - upper;
            weights[k + 1] += upper;
            cell_measures.push(total);
            midpoints.push(a + 0.5 * h);
            widths.push(h);
        }
        Ok(Self {
            nodes,
            dim,
            weights,
            cell_measures,
            midpoints,
            widths,
        })
    }

    /// Replaces the nodal quadrature weights. Meant for fault-injection tests.
    pub fn with_node_weights(mut self, weights: Vec<f64>) -> Result<Self> {
        if weights.len() != self.nodes.len() {
            return Err(Error::LengthMismatch {
                values: weights.len(),
                nodes: self.nodes.len(),
            });
        }
        self.weights = weights;
        Ok(self)
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }
    pub fn len(&self) -> usize {
        self.nodes.len()
    }
    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
    pub fn cells(&self) -> usize {
        self.nodes.len() - 1
    }
    pub fn dim(&self) -> usize {
        self.dim
    }
    pub fn outer_radius(&self) -> f64 {
        self.nodes[self.nodes.len() - 1]
    }
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }
    pub fn cell_measures(&self) -> &[f64] {
        &self.cell_measures
    }
    pub fn midpoints(&self) -> &[f64] {
        &self.midpoints
    }
    pub fn widths(&self) -> &[f64] {
        &self.widths
    }
    pub fn sphere_area(&self) -> f64 {
        sphere_area(self.dim)
    }

    /// `int_{B_R} f(|x|) dx` for nodal values `f`.
    pub fn integrate(&self, values: &[f64]) -> f64 {
        self.weights.iter().zip(values).map(|(w, f)| w * f).sum()
    }

    pub fn check(&self, u: &RadialFunction) -> Result<()> {
        if u.len() != self.len() {
            return Err(Error::LengthMismatch {
                values: u.len(),
                nodes: self.len(),
            });
        }
        Ok(())
    }

    /// Index of the cell containing `s` (clamped to the grid).
    pub fn locate(&self, s: f64) -> usize {
        match self
            .nodes
            .binary_search_by(|x| x.partial_cmp(&s).unwrap_or(std::cmp::Ordering::Less))
        {
            Ok(i) => i.min(self.cells() - 1),
            Err(i) => i.saturating_sub(1).min(self.cells() - 1),
        }
    }
}

/// Nodal values of a radial function on a [`RadialGrid`].
#[derive(Clone, Debug, PartialEq)]
pub struct RadialFunction {
    values: Vec<f64>,
}

impl RadialFunction {
    pub fn zeros(grid: &RadialGrid) -> Self {
        Self {
            values: vec![0.0; grid.len()],
        }
    }

    pub fn from_values(values: Vec<f64>) -> Self {
        Self { values }
    }

    pub fn from_fn(grid: &RadialGrid, f: impl Fn(f64) -> f64) -> Self {
        Self {
            values: grid.nodes().iter().map(|&s| f(s)).collect(),
        }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }
    pub fn into_values(self) -> Vec<f64> {
        self.values
    }
    pub fn len(&self) -> usize {
        self.values.len()
    }
    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn is_dirichlet(&self) -> bool {
        self.values.last().is_some_and(|&v| v == 0.0)
    }

    pub fn with_dirichlet(mut self) -> Self {
        if let Some(v) = self.values.last_mut() {
            *v = 0.0;
        }
        self
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|&v| v == 0.0)
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self {
            values: self.values.iter().map(|v| c * v).collect(),
        }
    }

    /// `self + c * other`
    pub fn axpy(&self, c: f64, other: &Self) -> Self {
        Self {
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| a + c * b)
                .collect(),
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Cell gradients `(u_{k+1} - u_k) / h_k`.
    pub fn cell_gradient(&self, grid: &RadialGrid) -> Vec<f64> {
        self.values
            .windows(2)
            .zip(grid.widths())
            .map(|(w, h)| (w[1] - w[0]) / h)
            .collect()
    }

    /// Nodal derivative: zero at the origin (radial symmetry), centered at
    /// interior nodes, one-sided at `s = R`.
    pub fn nodal_derivative(&self, grid: &RadialGrid) -> Vec<f64> {
        let s = grid.nodes();
        let u = &self.values;
        let m = u.len();
        let mut d = vec![0.0; m];
        for i in 1..m - 1 {
            d[i] = (u[i + 1] - u[i - 1]) / (s[i + 1] - s[i - 1]);
        }
        d[m - 1] = (u[m - 1] - u[m - 2]) / (s[m - 1] - s[m - 2]);
        d
    }

    /// Piecewise-linear interpolation at radius `s`.
    pub fn interpolate(&self, grid: &RadialGrid, s: f64) -> f64 {
        let k = grid.locate(s);
        let a = grid.nodes()[k];
        let h = grid.widths()[k];
        let t = ((s - a) / h).clamp(0.0, 1.0);
        self.values[k] * (1.0 - t) + self.values[k + 1] * t
    }

    pub fn write_csv<W: Write>(&self, grid: &RadialGrid, mut out: W) -> Result<()> {
        let mut buf = String::from("radius,value\n");
        for (s, v) in grid.nodes().iter().zip(&self.values) {
            let _ = writeln!(buf, "{s:.16e},{v:.16e}");
        }
        out.write_all(buf.as_bytes())?;
        Ok(())
    }

    /// Reads a two-column `(radius, value)` CSV. The radii must match the
    /// grid nodes to a relative `1e-12`.
    pub fn read_csv<R: BufRead>(grid: &RadialGrid, input: R) -> Result<Self> {
        let mut values = Vec::with_capacity(grid.len());
        for (lineno, line) in input.lines().enumerate() {
            let line = line?;
            let line = line.trim();
            if line.is_empty() || (lineno == 0 && line.starts_with("radius")) {
                continue;
            }
            let mut cols = line.split(',');
            let parse = |c: Option<&str>| -> Result<f64> {
                c.ok_or_else(|| Error::Csv(format!("line {}: missing column", lineno + 1)))?
                    .trim()
                    .parse::<f64>()
                    .map_err(|e| Error::Csv(format!("line {}: {e}", lineno + 1)))
            };
            let s = parse(cols.next())?;
            let v = parse(cols.next())?;
            let i = values.len();
            let expected = *grid.nodes().get(i).ok_or_else(|| {
                Error::Csv(format!("line {}: more rows than grid nodes", lineno + 1))
            })?;
            if (s - expected).abs() > 1e-12 * grid.outer_radius() {
                return Err(Error::Csv(format!(
                    "line {}: radius {s} does not match grid node {expected}",
                    lineno + 1
                )));
            }
            values.push(v);
        }
        let u = Self { values };
        grid.check(&u)?;
        Ok(u)
    }
}

/// Quintic smoothstep on `[0, 1]`, clamped outside.
pub fn smoothstep(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else if x >= 1.0 {
        1.0
    } else {
        x * x * x * (10.0 + x * (-15.0 + 6.0 * x))
    }
}

pub fn smoothstep_derivative(x: f64) -> f64 {
    if x <= 0.0 || x >= 1.0 {
        0.0
    } else {
        30.0 * x * x * (1.0 - x) * (1.0 - x)
    }
}

/// Radial cutoff equal to 1 on `[0, r/2]` and 0 on `[3r/5, inf)`.
pub fn smooth_cutoff_xi(s: f64, r: f64) -> f64 {
    let lo = 0.5 * r;
    let hi = 0.6 * r;
    if s <= lo {
        1.0
    } else if s >= hi {
        0.0
    } else {
        1.0 - smoothstep((s - lo) / (hi - lo))
    }
}

/// Even cutoff: 0 on `[-1, 1]`, 1 for `|t| >= 2`.
pub fn shell_cutoff_phi(t: f64) -> f64 {
    smoothstep(t.abs() - 1.0)
}

pub fn shell_cutoff_phi_derivative(t: f64) -> f64 {
    t.signum() * smoothstep_derivative(t.abs() - 1.0)
}

/// Gauss-Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            if n == 0 {
                break;
            }
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            let pn = if n == 1 { z } else { p1 };
            let pm = if n == 1 { 1.0 } else { p0 };
            dp = n as f64 * (z * pn - pm) / (z * z - 1.0);
            let dz = pn / dp;
            z -= dz;
            if dz.abs() < 1e-15 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
        w[n - 1 - i] = w[i];
    }
    (x, w)
}

/// Integrand of the shell-cutoff estimate at radius `s`:
/// `|grad phi_eps|^p |v|^p s^{N-1}` with `phi_eps(x) = phi((|x| - r) / eps)`.
pub fn cutoff_integrand(v: &RadialFunction, grid: &RadialGrid, p: f64, r: f64, eps: f64, s: f64) -> f64 {
    let dphi = shell_cutoff_phi_derivative((s - r) / eps) / eps;
    if dphi == 0.0 {
        return 0.0;
    }
    let val = v.interpolate(grid, s);
    (dphi.abs() * val.abs()).powf(p) * s.powi(grid.dim() as i32 - 1)
}

#[derive(Clone, Debug, Serialize)]
pub struct DecayRow {
    pub eps: f64,
    pub integral: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct DecayTable {
    pub rows: Vec<DecayRow>,
    /// Least-squares slope of `log(integral)` against `log(eps)`; NaN when
    /// fewer than two positive integrals exist.
    pub slope: f64,
    /// Slopes between consecutive rows.
    pub pair_slopes: Vec<f64>,
    /// `N - p_+`
    pub shell_volume_exponent: f64,
    /// `1 - p_+`
    pub direct_exponent: f64,
}

/// Subintervals per bridge; each carries a 4-point Gauss rule.
const SHELL_SUBINTERVALS: usize = 64;

/// Measures `int |grad phi_eps|^{p_+} |v|^{p_+} dx` for each `eps` on a
/// refined sub-grid across the two bridges `1 <= |(|x| - r)/eps| <= 2`.
pub fn measure_cutoff_decay(
    v: &RadialFunction,
    p_plus: f64,
    r: f64,
    eps_list: &[f64],
    grid: &RadialGrid,
) -> Result<DecayTable> {
    grid.check(v)?;
    let outer = grid.outer_radius();
    let (gx, gw) = gauss_legendre(4);
    let omega = grid.sphere_area();
    let mut rows = Vec::with_capacity(eps_list.len());
    for &eps in eps_list {
        if !(eps > 0.0) {
            return Err(Error::InvalidParameter(format!("eps must be positive, got {eps}")));
        }
        let (lo, hi) = (r - 2.0 * eps, r + 2.0 * eps);
        if lo < 0.0 || hi > outer {
            return Err(Error::ShellOutsideGrid { lo, hi, outer });
        }
        let mut total = 0.0;
        for (a, b) in [(r - 2.0 * eps, r - eps), (r + eps, r + 2.0 * eps)] {
            let h = (b - a) / SHELL_SUBINTERVALS as f64;
            for j in 0..SHELL_SUBINTERVALS {
                let c = a + (j as f64 + 0.5) * h;
                for (x, w) in gx.iter().zip(&gw) {
                    let s = c + 0.5 * h * x;
                    total += 0.5 * h * w * cutoff_integrand(v, grid, p_plus, r, eps, s);
                }
            }
        }
        rows.push(DecayRow {
            eps,
            integral: omega * total,
        });
    }
    let logs: Vec<(f64, f64)> = rows
        .iter()
        .filter(|row| row.integral > 0.0)
        .map(|row| (row.eps.ln(), row.integral.ln()))
        .collect();
    let slope = if logs.len() >= 2 {
        let n = logs.len() as f64;
        let mx = logs.iter().map(|p| p.0).sum::<f64>() / n;
        let my = logs.iter().map(|p| p.1).sum::<f64>() / n;
        let sxy: f64 = logs.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
        let sxx: f64 = logs.iter().map(|p| (p.0 - mx).powi(2)).sum();
        sxy / sxx
    } else {
        f64::NAN
    };
    let pair_slopes = logs
        .windows(2)
        .map(|w| (w[1].1 - w[0].1) / (w[1].0 - w[0].0))
        .collect();
    Ok(DecayTable {
        rows,
        slope,
        pair_slopes,
        shell_volume_exponent: grid.dim() as f64 - p_plus,
        direct_exponent: 1.0 - p_plus,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weights_sum_to_ball_volume() {
        let g = RadialGrid::new(1.0, 3, 100, Spacing::Uniform).unwrap();
        let vol: f64 = g.weights().iter().sum();
        assert!((vol - 4.0 * PI / 3.0).abs() < 1e-12);
        let cells: f64 = g.cell_measures().iter().sum();
        assert!((cells - 4.0 * PI / 3.0).abs() < 1e-12);

        let g = RadialGrid::new(2.0, 2, 200, Spacing::BoundaryRefined).unwrap();
        let vol: f64 = g.weights().iter().sum();
        assert!((vol / (4.0 * PI) - 1.0).abs() < 1e-6);
    }

    #[test]
    fn rejects_small_grids() {
        assert!(matches!(
            RadialGrid::new(1.0, 3, 8, Spacing::Uniform),
            Err(Error::TooFewNodes { .. })
        ));
        assert!(RadialGrid::new(-1.0, 3, 32, Spacing::Uniform).is_err());
    }

    #[test]
    fn sphere_areas() {
        assert!((sphere_area(2) - 2.0 * PI).abs() < 1e-14);
        assert!((sphere_area(3) - 4.0 * PI).abs() < 1e-14);
        assert!((sphere_area(4) - 2.0 * PI * PI).abs() < 1e-13);
    }

    #[test]
    fn trapezoid_rate() {
        // int_0^1 cos(s) s^2 ds times 4 pi; exact antiderivative
        // (s^2 - 2) sin s + 2 s cos s.
        let exact = 4.0 * PI * ((1.0 - 2.0) * 1f64.sin() + 2.0 * 1f64.cos());
        let err = |m| {
            let g = RadialGrid::new(1.0, 3, m, Spacing::Uniform).unwrap();
            let f: Vec<f64> = g.nodes().iter().map(|s| s.cos()).collect();
            (g.integrate(&f) - exact).abs()
        };
        let ratio = err(41) / err(81);
        assert!((ratio - 4.0).abs() < 0.1, "ratio {ratio}");
    }

    #[test]
    fn cutoff_plateaus_are_exact() {
        let r = 0.4;
        for s in [0.0, 0.05, 0.1, 0.2] {
            assert_eq!(smooth_cutoff_xi(s, r), 1.0);
        }
        for s in [0.24, 0.3, 0.9] {
            assert_eq!(smooth_cutoff_xi(s, r), 0.0);
        }
        let mut prev = 1.0;
        for i in 1..50 {
            let s = 0.2 + 0.04 * i as f64 / 50.0;
            let v = smooth_cutoff_xi(s, r);
            assert!(v > 0.0 && v < 1.0 && v <= prev);
            prev = v;
        }
        assert_eq!(shell_cutoff_phi(0.5), 0.0);
        assert_eq!(shell_cutoff_phi(-1.0), 0.0);
        assert_eq!(shell_cutoff_phi(-3.0), 1.0);
        assert_eq!(shell_cutoff_phi(2.0), 1.0);
        let v = shell_cutoff_phi(1.5);
        assert!(v > 0.0 && v < 1.0);
        assert_eq!(v, shell_cutoff_phi(-1.5));
    }

    #[test]
    fn gauss_legendre_integrates_polynomials() {
        let (x, w) = gauss_legendre(32);
        let sum: f64 = w.iter().sum();
        assert!((sum - 2.0).abs() < 1e-13);
        let i: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(62)).sum();
        assert!((i - 2.0 / 63.0).abs() < 1e-13);
        let (x, w) = gauss_legendre(3);
        assert!((x[2] - (0.6f64).sqrt()).abs() < 1e-14);
        assert!((w[1] - 8.0 / 9.0).abs() < 1e-14);
    }

    #[test]
    fn decay_zero_cases() {
        let g = RadialGrid::new(1.0, 3, 400, Spacing::Uniform).unwrap();
        let zero = RadialFunction::zeros(&g);
        let t = measure_cutoff_decay(&zero, 2.0, 0.5, &[0.02, 0.01], &g).unwrap();
        assert!(t.rows.iter().all(|r| r.integral == 0.0));
        // supported in [0, 0.3], shell at most [0.46, 0.54]
        let v = RadialFunction::from_fn(&g, |s| if s < 0.3 { (0.3 - s).powi(2) } else { 0.0 });
        let t = measure_cutoff_decay(&v, 2.0, 0.5, &[0.02, 0.01], &g).unwrap();
        assert!(t.rows.iter().all(|r| r.integral == 0.0));
        assert!(matches!(
            measure_cutoff_decay(&v, 2.0, 0.5, &[0.3], &g),
            Err(Error::ShellOutsideGrid { .. })
        ));
    }

    #[test]
    fn decay_integrand_vanishes_off_shell() {
        let g = RadialGrid::new(1.0, 3, 200, Spacing::Uniform).unwrap();
        let v = RadialFunction::from_fn(&g, |s| 1.0 - s * s);
        let (r, eps) = (0.5, 0.01);
        for i in 0..=1000 {
            let s = i as f64 / 1000.0;
            let f = cutoff_integrand(&v, &g, 2.0, r, eps, s);
            if (s - r).abs() > 2.0 * eps || (s - r).abs() < eps {
                assert_eq!(f, 0.0);
            }
        }
    }

    #[test]
    fn csv_round_trip() {
        let g = RadialGrid::new(1.0, 3, 20, Spacing::BoundaryRefined).unwrap();
        let u = RadialFunction::from_fn(&g, |s| (1.0 - s).exp() - 1.0);
        let mut buf = Vec::new();
        u.write_csv(&g, &mut buf).unwrap();
        let v = RadialFunction::read_csv(&g, buf.as_slice()).unwrap();
        assert_eq!(u, v);
        assert!(RadialFunction::read_csv(&g, "radius,value\n0.5,1\n".as_bytes()).is_err());
    }
}
