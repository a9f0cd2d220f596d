//! The double-phase energy
//! `I(u) = int (|grad u|^p / p + a |grad u|^m / m) - lambda int |u|^q / q`
//! on radial functions, with its weak derivative, Hessian, residual
//! measures and the truncated functional `J`.
//!
//! The gradient terms are integrated cellwise with exponents sampled at
//! cell midpoints; the reaction term uses the nodal product-trapezoid
//! weights. The discrete energy is therefore an exact function of the nodal
//! values and its derivative is assembled in closed form.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::exponent_fields::ProblemSpec;
use crate::linalg::Tridiagonal;
use crate::modular_norms::{Terms, LUXEMBURG_TOL};
use crate::radial::{gauss_legendre, smooth_cutoff_xi, RadialFunction, RadialGrid};

/// Reaction exponents at or below this value are treated as degenerate
/// wherever `u != 0`.
pub const Q_FLOOR: f64 = 1e-6;
/// Floor on `|grad u|` inside second derivatives with exponent below 2.
const SLOPE_FLOOR: f64 = 1e-12;

/// `|x|^{p-2} x`, defined as 0 at `x = 0`.
#[inline]
pub fn signed_power(x: f64, p: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        x.signum() * x.abs().powf(p - 1.0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct EnergyReport {
    pub total: f64,
    pub gradient_part_p: f64,
    pub gradient_part_m: f64,
    /// Includes the factor `lambda`.
    pub reaction_part: f64,
}

impl EnergyReport {
    fn new(gradient_part_p: f64, gradient_part_m: f64, reaction_part: f64) -> Self {
        Self {
            total: gradient_part_p + gradient_part_m - reaction_part,
            gradient_part_p,
            gradient_part_m,
            reaction_part,
        }
    }
}

/// Exponents and weights sampled on a grid, with the energy and its
/// derivatives as methods.
#[derive(Clone, Debug)]
pub struct Functional<'a> {
    pub spec: &'a ProblemSpec,
    pub grid: &'a RadialGrid,
    lambda: f64,
    p_cell: Vec<f64>,
    m_cell: Vec<f64>,
    a_cell: Vec<f64>,
    q_node: Vec<f64>,
    stiffness: Tridiagonal,
    metric: Tridiagonal,
}

impl<'a> Functional<'a> {
    pub fn new(spec: &'a ProblemSpec, grid: &'a RadialGrid) -> Self {
        let mids = grid.midpoints();
        let p_cell = spec.p.sample(mids);
        let m_cell = spec.m.sample(mids);
        let a_cell = spec.a.sample(mids);
        let q_node = spec.q.sample(grid.nodes());
        let free = grid.len() - 1;
        let mut stiffness = Tridiagonal::zeros(free);
        let mut metric = Tridiagonal::zeros(free);
        for k in 0..grid.cells() {
            let c = grid.cell_measures()[k] / grid.widths()[k].powi(2);
            let cm = c * (1.0 + a_cell[k].max(0.0));
            if k + 1 < free {
                stiffness.add_edge(k, c);
                metric.add_edge(k, cm);
            } else {
                stiffness.diag[k] += c;
                metric.diag[k] += cm;
            }
        }
        Self {
            spec,
            grid,
            lambda: spec.lambda,
            p_cell,
            m_cell,
            a_cell,
            q_node,
            stiffness,
            metric,
        }
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    /// Number of free (non-Dirichlet) nodes.
    pub fn free(&self) -> usize {
        self.grid.len() - 1
    }

    pub fn q_node(&self) -> &[f64] {
        &self.q_node
    }

    /// Discrete `H^1_0` stiffness: `v^T K v = int |grad v|^2`.
    pub fn stiffness(&self) -> &Tridiagonal {
        &self.stiffness
    }

    /// Stiffness weighted by `1 + a`, the descent metric.
    pub fn metric(&self) -> &Tridiagonal {
        &self.metric
    }

    fn check_reaction(&self, u: &RadialFunction) -> Result<()> {
        self.grid.check(u)?;
        for ((&q, &v), &s) in self.q_node.iter().zip(u.values()).zip(self.grid.nodes()) {
            if q <= Q_FLOOR && v != 0.0 {
                return Err(Error::DegenerateReaction {
                    radius: s,
                    exponent: q,
                    value: v,
                });
            }
        }
        Ok(())
    }

    pub fn energy(&self, u: &RadialFunction) -> Result<EnergyReport> {
        self.check_reaction(u)?;
        let (gp, gm) = self.gradient_parts(u);
        Ok(EnergyReport::new(gp, gm, self.lambda * self.reaction_integral(u)))
    }

    pub fn value(&self, u: &RadialFunction) -> Result<f64> {
        Ok(self.energy(u)?.total)
    }

    fn gradient_parts(&self, u: &RadialFunction) -> (f64, f64) {
        let grad = u.cell_gradient(self.grid);
        let mut gp = 0.0;
        let mut gm = 0.0;
        for (k, d) in grad.iter().enumerate() {
            if *d == 0.0 {
                continue;
            }
            let c = self.grid.cell_measures()[k];
            let ad = d.abs();
            gp += c * ad.powf(self.p_cell[k]) / self.p_cell[k];
            if self.a_cell[k] != 0.0 {
                gm += c * self.a_cell[k] * ad.powf(self.m_cell[k]) / self.m_cell[k];
            }
        }
        (gp, gm)
    }

    /// `int |u|^q / q` (without `lambda`).
    pub fn reaction_integral(&self, u: &RadialFunction) -> f64 {
        u.values()
            .iter()
            .zip(&self.q_node)
            .zip(self.grid.weights())
            .filter(|((v, _), _)| **v != 0.0)
            .map(|((v, q), w)| w * v.abs().powf(*q) / q)
            .sum()
    }

    /// `int |u|^q` (without `lambda` or `1/q`).
    pub fn reaction_modular(&self, u: &RadialFunction) -> f64 {
        u.values()
            .iter()
            .zip(&self.q_node)
            .zip(self.grid.weights())
            .filter(|((v, _), _)| **v != 0.0)
            .map(|((v, q), w)| w * v.abs().powf(*q))
            .sum()
    }

    /// Cellwise flux `|d|^{p-2} d + a |d|^{m-2} d` of the gradient terms.
    fn flux(&self, k: usize, d: f64) -> f64 {
        let mut f = signed_power(d, self.p_cell[k]);
        if self.a_cell[k] != 0.0 {
            f += self.a_cell[k] * signed_power(d, self.m_cell[k]);
        }
        f
    }

    /// Solves `flux(k, d) = y` for `d`; the flux is odd and increasing.
    pub fn inverse_flux(&self, k: usize, y: f64) -> f64 {
        if y == 0.0 {
            return 0.0;
        }
        let (p, m, a) = (self.p_cell[k], self.m_cell[k], self.a_cell[k]);
        let target = y.abs();
        let mut hi = target.powf(1.0 / (p - 1.0));
        if a == 0.0 {
            return y.signum() * hi;
        }
        hi = hi.min((target / a).powf(1.0 / (m - 1.0)));
        let phi = |d: f64| d.powf(p - 1.0) + a * d.powf(m - 1.0);
        let mut lo = 0.0;
        let mut d = 0.5 * hi;
        for _ in 0..200 {
            let r = phi(d) - target;
            if r == 0.0 {
                break;
            }
            if r > 0.0 {
                hi = d;
            } else {
                lo = d;
            }
            let slope = (p - 1.0) * d.powf(p - 2.0) + a * (m - 1.0) * d.powf(m - 2.0);
            let newton = d - r / slope;
            let next = if newton > lo && newton < hi { newton } else { 0.5 * (lo + hi) };
            if (next - d).abs() <= 2.0 * f64::EPSILON * d {
                d = next;
                break;
            }
            d = next;
        }
        y.signum() * d
    }

    /// Nodal values solving every free-node equation `dI/du_i = 0` given
    /// the value at the origin. The last entry is the boundary mismatch.
    pub fn march(&self, u0: f64) -> Vec<f64> {
        let n = self.grid.len();
        let mut u = Vec::with_capacity(n);
        u.push(u0);
        let mut t = 0.0;
        for k in 0..n - 1 {
            let uk = u[k];
            t -= self.lambda * self.grid.weights()[k] * signed_power(uk, self.q_node[k]);
            let h = self.grid.widths()[k];
            let d = self.inverse_flux(k, t * h / self.grid.cell_measures()[k]);
            u.push(uk + h * d);
            if !u[k + 1].is_finite() {
                u.resize(n, u[k + 1]);
                break;
            }
        }
        u
    }

    fn flux_slope(&self, k: usize, d: f64) -> f64 {
        let ad = d.abs().max(SLOPE_FLOOR);
        let p = self.p_cell[k];
        let mut s = if d == 0.0 && p > 2.0 { 0.0 } else { (p - 1.0) * ad.powf(p - 2.0) };
        if self.a_cell[k] != 0.0 {
            let m = self.m_cell[k];
            s += self.a_cell[k] * if d == 0.0 && m > 2.0 { 0.0 } else { (m - 1.0) * ad.powf(m - 2.0) };
        }
        s
    }

    /// Partial derivatives `dI/du_i` of the discrete energy; the Dirichlet
    /// entry is zero.
    pub fn derivative(&self, u: &RadialFunction) -> Result<Vec<f64>> {
        self.check_reaction(u)?;
        let n = self.grid.len();
        let mut out = vec![0.0; n];
        let grad = u.cell_gradient(self.grid);
        for (k, &d) in grad.iter().enumerate() {
            let t = self.grid.cell_measures()[k] * self.flux(k, d) / self.grid.widths()[k];
            out[k] -= t;
            out[k + 1] += t;
        }
        for i in 0..n {
            let v = u.values()[i];
            if v != 0.0 {
                out[i] -= self.lambda * self.grid.weights()[i] * signed_power(v, self.q_node[i]);
            }
        }
        out[n - 1] = 0.0;
        Ok(out)
    }

    /// Hessian of the discrete energy on the free nodes.
    pub fn hessian(&self, u: &RadialFunction) -> Result<Tridiagonal> {
        let mut h = self.principal_hessian(u)?;
        for (i, d) in h.diag.iter_mut().enumerate() {
            *d += self.reaction_curvature(u.values()[i], i);
        }
        Ok(h)
    }

    /// Hessian of the gradient terms plus the convex part of the reaction.
    pub fn convex_hessian(&self, u: &RadialFunction) -> Result<Tridiagonal> {
        let mut h = self.principal_hessian(u)?;
        for (i, d) in h.diag.iter_mut().enumerate() {
            *d += self.reaction_curvature(u.values()[i], i).max(0.0);
        }
        Ok(h)
    }

    fn principal_hessian(&self, u: &RadialFunction) -> Result<Tridiagonal> {
        self.check_reaction(u)?;
        let free = self.free();
        let mut h = Tridiagonal::zeros(free);
        let grad = u.cell_gradient(self.grid);
        for (k, &d) in grad.iter().enumerate() {
            let c = self.grid.cell_measures()[k] * self.flux_slope(k, d) / self.grid.widths()[k].powi(2);
            if k + 1 < free {
                h.add_edge(k, c);
            } else {
                h.diag[k] += c;
            }
        }
        Ok(h)
    }

    // second derivative of -lambda w |v|^q / q
    fn reaction_curvature(&self, v: f64, i: usize) -> f64 {
        let q = self.q_node[i];
        if v == 0.0 {
            return if q == 2.0 { -self.lambda * self.grid.weights()[i] } else { 0.0 };
        }
        -self.lambda * self.grid.weights()[i] * (q - 1.0) * v.abs().powf(q - 2.0)
    }

    /// Nodal representation `g` of the weak derivative:
    /// `sum_i w_i g_i v_i = I'(u) v` for every `v` vanishing at `R`.
    pub fn gradient(&self, u: &RadialFunction) -> Result<RadialFunction> {
        let d = self.derivative(u)?;
        Ok(RadialFunction::from_values(
            d.iter().zip(self.grid.weights()).map(|(d, w)| d / w).collect(),
        ))
    }

    /// Dual norm `sup_v I'(u) v / ||grad v||_{L^2}` of a derivative vector.
    pub fn dual_norm(&self, derivative: &[f64]) -> Result<f64> {
        let free = &derivative[..self.free()];
        let z = self.stiffness.solve(free)?;
        Ok(z.iter().zip(free).map(|(a, b)| a * b).sum::<f64>().max(0.0).sqrt())
    }

    pub fn composite_norm(&self, u: &RadialFunction) -> Result<f64> {
        let grad = u.cell_gradient(self.grid);
        let n = grad.len();
        let mut tp = Terms::with_capacity(n);
        let mut tm = Terms::with_capacity(n);
        for (k, d) in grad.iter().enumerate() {
            let c = self.grid.cell_measures()[k];
            tp.push(c, d.abs(), self.p_cell[k]);
            tm.push(c * self.a_cell[k], d.abs(), self.m_cell[k]);
        }
        Ok(tp.luxemburg(LUXEMBURG_TOL)? + tm.luxemburg(LUXEMBURG_TOL)?)
    }

    /// Dual norm of `I'(u)` normalized by `max(1, ||u||)`.
    pub fn residual(&self, u: &RadialFunction) -> Result<f64> {
        let d = self.derivative(u)?;
        self.residual_from(u, &d)
    }

    pub fn residual_from(&self, u: &RadialFunction, derivative: &[f64]) -> Result<f64> {
        Ok(self.dual_norm(derivative)? / self.composite_norm(u)?.max(1.0))
    }

    /// Pointwise residual of the radial equation
    /// `(s^{N-1} (|u'|^{p-2} u' + a |u'|^{m-2} u'))' + lambda s^{N-1} |u|^{q-2} u = 0`
    /// at interior nodes of the annulus `(r, R)`.
    pub fn ode_residual(&self, u: &RadialFunction) -> Result<OdeResidual> {
        self.check_reaction(u)?;
        let grid = self.grid;
        let s = grid.nodes();
        let dim = grid.dim() as i32;
        let grad = u.cell_gradient(grid);
        let flux: Vec<f64> = grad
            .iter()
            .enumerate()
            .map(|(k, &d)| grid.midpoints()[k].powi(dim - 1) * self.flux(k, d))
            .collect();
        let mut radii = Vec::new();
        let mut residual = Vec::new();
        let mut singular = Vec::new();
        let mut scale: f64 = 0.0;
        for i in 1..grid.len() - 1 {
            if s[i] <= self.spec.inner_radius {
                continue;
            }
            let is_singular = [i - 1, i].iter().any(|&k| {
                let sub_quadratic = self.p_cell[k] < 2.0 || (self.a_cell[k] != 0.0 && self.m_cell[k] < 2.0);
                sub_quadratic && grad[k].abs() < 1e-12
            });
            let reaction = self.lambda * s[i].powi(dim - 1) * signed_power(u.values()[i], self.q_node[i]);
            scale = scale.max(reaction.abs());
            radii.push(s[i]);
            if is_singular {
                singular.push(s[i]);
                residual.push(f64::NAN);
            } else {
                let dflux = (flux[i] - flux[i - 1]) / (0.5 * (s[i + 1] - s[i - 1]));
                residual.push(dflux + reaction);
            }
        }
        let scale = if scale > 0.0 { scale } else { 1.0 };
        let scaled_max = residual
            .iter()
            .filter(|r| r.is_finite())
            .fold(0.0_f64, |m, r| m.max(r.abs()))
            / scale;
        Ok(OdeResidual {
            radii,
            residual,
            scale,
            scaled_max,
            singular,
        })
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct OdeResidual {
    pub radii: Vec<f64>,
    /// NaN where the flux coefficient is singular.
    pub residual: Vec<f64>,
    /// Largest reaction magnitude `lambda s^{N-1} |u|^{q-1}` on the annulus.
    pub scale: f64,
    /// `max |residual| / scale` over finite entries.
    pub scaled_max: f64,
    /// Radii where `|u'| < 1e-12` meets an exponent below 2.
    pub singular: Vec<f64>,
}

pub fn energy(u: &RadialFunction, spec: &ProblemSpec, grid: &RadialGrid) -> Result<EnergyReport> {
    Functional::new(spec, grid).energy(u)
}

pub fn energy_gradient(u: &RadialFunction, spec: &ProblemSpec, grid: &RadialGrid) -> Result<RadialFunction> {
    Functional::new(spec, grid).gradient(u)
}

pub fn weak_residual(u: &RadialFunction, spec: &ProblemSpec, grid: &RadialGrid) -> Result<f64> {
    Functional::new(spec, grid).residual(u)
}

pub fn radial_ode_residual(u: &RadialFunction, spec: &ProblemSpec, grid: &RadialGrid) -> Result<OdeResidual> {
    Functional::new(spec, grid).ode_residual(u)
}

/// Discrete pairing `sum_i w_i g_i v_i`.
pub fn pairing(grid: &RadialGrid, g: &RadialFunction, v: &RadialFunction) -> f64 {
    grid.weights()
        .iter()
        .zip(g.values())
        .zip(v.values())
        .map(|((w, a), b)| w * a * b)
        .sum()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CutoffMode {
    /// `xi = 1` on `B_{r/2}`, `0` outside `B_{3r/5}`.
    Standard,
    /// `xi = 1` everywhere; `J` coincides with `I`.
    Disabled,
}

/// Gauss points for the primitive `G` across the cutoff bridge.
pub const BRIDGE_GAUSS_POINTS: usize = 32;

/// The truncated reaction
/// `g(s, t) = xi(s) |t|^{q-2} t + (1 - xi(s)) |u_ref(s)|^{q-2} u_ref(s)`
/// built around a frozen reference function.
#[derive(Clone, Debug)]
pub struct Truncation<'a> {
    pub spec: &'a ProblemSpec,
    pub grid: &'a RadialGrid,
    pub u_ref: &'a RadialFunction,
    pub mode: CutoffMode,
    gauss: (Vec<f64>, Vec<f64>),
}

impl<'a> Truncation<'a> {
    pub fn new(spec: &'a ProblemSpec, grid: &'a RadialGrid, u_ref: &'a RadialFunction, mode: CutoffMode) -> Self {
        Self {
            spec,
            grid,
            u_ref,
            mode,
            gauss: gauss_legendre(BRIDGE_GAUSS_POINTS),
        }
    }

    pub fn xi(&self, s: f64) -> f64 {
        match self.mode {
            CutoffMode::Standard => smooth_cutoff_xi(s, self.spec.inner_radius),
            CutoffMode::Disabled => 1.0,
        }
    }

    pub fn reaction(&self, s: f64, t: f64) -> f64 {
        let xi = self.xi(s);
        let q = self.spec.q.eval(s);
        let mut g = xi * signed_power(t, q);
        if xi < 1.0 {
            g += (1.0 - xi) * signed_power(self.u_ref.interpolate(self.grid, s), q);
        }
        g
    }

    /// `G(s, t) = int_0^t g(s, tau) d tau`: closed forms where `xi` is 0 or
    /// 1, Gauss-Legendre in `t` across the bridge.
    pub fn primitive(&self, s: f64, t: f64) -> f64 {
        let xi = self.xi(s);
        if xi == 1.0 || xi == 0.0 {
            self.primitive_closed(s, t)
        } else {
            self.primitive_quadrature(s, t)
        }
    }

    pub fn primitive_closed(&self, s: f64, t: f64) -> f64 {
        let xi = self.xi(s);
        let q = self.spec.q.eval(s);
        let mut g = 0.0;
        if xi != 0.0 && t != 0.0 {
            g += xi * t.abs().powf(q) / q;
        }
        if xi != 1.0 {
            g += (1.0 - xi) * signed_power(self.u_ref.interpolate(self.grid, s), q) * t;
        }
        g
    }

    pub fn primitive_quadrature(&self, s: f64, t: f64) -> f64 {
        let (x, w) = &self.gauss;
        0.5 * t
            * x.iter()
                .zip(w)
                .map(|(x, w)| w * self.reaction(s, 0.5 * t * (x + 1.0)))
                .sum::<f64>()
    }

    /// `C` in `|g(s, t)| <= C (|t|^{q_+^r} + 1)`.
    pub fn growth_constant(&self) -> f64 {
        let r = self.spec.inner_radius;
        let mut c: f64 = 0.0;
        for (&s, &v) in self.grid.nodes().iter().zip(self.u_ref.values()) {
            if s >= 0.5 * r && v != 0.0 {
                c = c.max(v.abs().powf(self.spec.q.eval(s) - 1.0));
            }
        }
        2.0 + c
    }

    /// Exponent `q_+^r`.
    pub fn growth_exponent(&self) -> f64 {
        self.spec.q.extrema_on(0.0, self.spec.inner_radius).2
    }

    /// `J(w)`: gradient terms minus `lambda int G(x, w)`.
    pub fn energy(&self, w: &RadialFunction) -> Result<f64> {
        let f = Functional::new(self.spec, self.grid);
        self.grid.check(w)?;
        let (gp, gm) = f.gradient_parts(w);
        let reaction: f64 = self
            .grid
            .nodes()
            .iter()
            .zip(w.values())
            .zip(self.grid.weights())
            .map(|((&s, &t), wt)| wt * self.primitive(s, t))
            .sum();
        Ok(gp + gm - self.spec.lambda * reaction)
    }

    /// `J'(w) v`.
    pub fn derivative_pairing(&self, w: &RadialFunction, v: &RadialFunction) -> Result<f64> {
        let f = Functional::new(self.spec, self.grid);
        self.grid.check(w)?;
        self.grid.check(v)?;
        let grad = w.cell_gradient(self.grid);
        let gv = v.cell_gradient(self.grid);
        let principal: f64 = (0..grad.len())
            .map(|k| self.grid.cell_measures()[k] * f.flux(k, grad[k]) * gv[k])
            .sum();
        let reaction: f64 = (0..self.grid.len())
            .map(|i| {
                let s = self.grid.nodes()[i];
                self.grid.weights()[i] * self.reaction(s, w.values()[i]) * v.values()[i]
            })
            .sum();
        Ok(principal - self.spec.lambda * reaction)
    }
}

pub fn truncated_reaction(
    s: f64,
    t: f64,
    u_ref: &RadialFunction,
    spec: &ProblemSpec,
    grid: &RadialGrid,
) -> f64 {
    Truncation::new(spec, grid, u_ref, CutoffMode::Standard).reaction(s, t)
}

pub fn truncated_energy(
    w: &RadialFunction,
    u_ref: &RadialFunction,
    spec: &ProblemSpec,
    grid: &RadialGrid,
) -> Result<f64> {
    Truncation::new(spec, grid, u_ref, CutoffMode::Standard).energy(w)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exponent_fields::{ExponentField, HypothesisSet};
    use crate::radial::Spacing;

    fn setup(p: f64, m: f64, a: f64, q: f64) -> (ProblemSpec, RadialGrid) {
        let spec = ProblemSpec::constant(p, q, m, a, 1.0, 0.5, 3, 1.0, HypothesisSet::Radial).unwrap();
        let grid = RadialGrid::new(1.0, 3, 120, Spacing::Uniform).unwrap();
        (spec, grid)
    }

    #[test]
    fn zero_function_has_zero_energy_and_gradient() {
        let (spec, grid) = setup(2.0, 2.0, 1.0, 4.0);
        let z = RadialFunction::zeros(&grid);
        let f = Functional::new(&spec, &grid);
        assert_eq!(f.energy(&z).unwrap().total, 0.0);
        assert!(f.gradient(&z).unwrap().is_zero());
        assert_eq!(f.residual(&z).unwrap(), 0.0);
    }

    #[test]
    fn constant_exponent_energy_matches_direct_sum() {
        let a0 = 0.7;
        let (spec, grid) = setup(2.0, 2.0, a0, 4.0);
        let u = RadialFunction::from_fn(&grid, |s| (1.0 - s * s) * (1.0 + s));
        let rep = energy(&u, &spec, &grid).unwrap();
        let dir: f64 = grid
            .cell_measures()
            .iter()
            .zip(u.cell_gradient(&grid))
            .map(|(c, d)| c * d * d)
            .sum();
        let quart: f64 = grid.weights().iter().zip(u.values()).map(|(w, v)| w * v.powi(4)).sum();
        let expected = 0.5 * (1.0 + a0) * dir - 0.25 * quart;
        assert!((rep.total - expected).abs() < 1e-12 * expected.abs().max(1.0));
        assert_eq!(rep.total, rep.gradient_part_p + rep.gradient_part_m - rep.reaction_part);
    }

    #[test]
    fn scaling_polynomial() {
        let (spec, grid) = setup(1.7, 2.5, 0.4, 3.3);
        let u = RadialFunction::from_fn(&grid, |s| (1.0 - s) * (2.0 + s.cos()));
        let base = energy(&u, &spec, &grid).unwrap();
        for t in [0.3, 1.7, 4.0] {
            let rep = energy(&u.scaled(t), &spec, &grid).unwrap();
            let poly = t.powf(1.7) * base.gradient_part_p + t.powf(2.5) * base.gradient_part_m
                - t.powf(3.3) * base.reaction_part;
            assert!((rep.total - poly).abs() <= 1e-8 * poly.abs().max(1.0));
        }
    }

    #[test]
    fn derivative_matches_central_differences() {
        let mut spec = ProblemSpec::constant(2.0, 3.0, 2.0, 0.5, 1.0, 0.5, 3, 0.8, HypothesisSet::Radial).unwrap();
        spec.p = ExponentField::from_fn(1.0, |s| 1.6 + s);
        spec.m = ExponentField::from_fn(1.0, |s| 2.8 - s);
        spec.a = ExponentField::from_fn(1.0, |s| 0.5 + 0.5 * s * s);
        spec.q = ExponentField::from_fn(1.0, |s| 3.0 + s);
        let grid = RadialGrid::new(1.0, 3, 60, Spacing::BoundaryRefined).unwrap();
        let f = Functional::new(&spec, &grid);
        let u = RadialFunction::from_fn(&grid, |s| (1.0 - s) * (1.0 + 2.0 * s) * (5.0 * s).cos().abs().max(0.1))
            .with_dirichlet();
        let v = RadialFunction::from_fn(&grid, |s| (1.0 - s * s) * (3.0 * s).sin() + 0.2).with_dirichlet();
        let g = f.gradient(&u).unwrap();
        let h = 1e-6;
        let fd = (f.value(&u.axpy(h, &v)).unwrap() - f.value(&u.axpy(-h, &v)).unwrap()) / (2.0 * h);
        let pr = pairing(&grid, &g, &v);
        assert!((fd - pr).abs() <= 1e-6 * pr.abs().max(1.0), "{fd} vs {pr}");
    }

    #[test]
    fn hessian_matches_derivative_differences() {
        let (spec, grid) = setup(2.5, 2.0, 0.3, 3.5);
        let f = Functional::new(&spec, &grid);
        let u = RadialFunction::from_fn(&grid, |s| 1.0 - s * s);
        let v = RadialFunction::from_fn(&grid, |s| (1.0 - s) * (4.0 * s).cos());
        let hess = f.hessian(&u).unwrap();
        let hv = hess.mul(&v.values()[..f.free()]);
        let h = 1e-4;
        let dp = f.derivative(&u.axpy(h, &v)).unwrap();
        let dm = f.derivative(&u.axpy(-h, &v)).unwrap();
        for i in 0..f.free() {
            let fd = (dp[i] - dm[i]) / (2.0 * h);
            assert!((fd - hv[i]).abs() <= 1e-6 * hv[i].abs().max(1e-3), "{i}: {fd} vs {}", hv[i]);
        }
    }

    #[test]
    fn gradient_is_linear_operator_for_quadratic_case() {
        // p = m = 2, a = 1, q = 4: the derivative is 2 K u - M u^3
        let (spec, grid) = setup(2.0, 2.0, 1.0, 4.0);
        let f = Functional::new(&spec, &grid);
        let u = RadialFunction::from_fn(&grid, |s| 2.0 * (1.0 - s * s));
        let d = f.derivative(&u).unwrap();
        let mut k = Tridiagonal::zeros(grid.len());
        for c in 0..grid.cells() {
            k.add_edge(c, grid.cell_measures()[c] / grid.widths()[c].powi(2));
        }
        let ku = k.mul(u.values());
        for i in 0..grid.len() - 1 {
            let expected = 2.0 * ku[i] - grid.weights()[i] * u.values()[i].powi(3);
            assert!((d[i] - expected).abs() < 1e-10 * expected.abs().max(1.0));
        }
    }

    #[test]
    fn inverse_flux_round_trip() {
        let (mut spec, grid) = setup(1.5, 2.5, 0.3, 4.0);
        spec.a = ExponentField::from_fn(1.0, |s| if s < 0.5 { 0.0 } else { 0.3 });
        let f = Functional::new(&spec, &grid);
        for k in [0, 40, 100] {
            for d in [-3.0, -1e-9, 0.0, 2e-6, 0.7, 12.0] {
                let back = f.inverse_flux(k, f.flux(k, d));
                assert!((back - d).abs() <= 1e-12 * d.abs().max(1e-300), "{k} {d} {back}");
            }
        }
    }

    #[test]
    fn marching_zeroes_free_equations() {
        let (spec, grid) = setup(1.5, 1.8, 0.4, 3.0);
        let f = Functional::new(&spec, &grid);
        let u = RadialFunction::from_values(f.march(0.7));
        let mut d = f.derivative(&u).unwrap();
        let n = d.len();
        // the last free equation is closed only when the march lands on 0
        d[n - 2] = 0.0;
        assert!(d.iter().all(|x| x.abs() < 1e-12), "{:?}", d);
    }

    #[test]
    fn degenerate_reaction_is_reported() {
        let (mut spec, grid) = setup(2.0, 2.0, 1.0, 4.0);
        spec.q = ExponentField::from_fn(1.0, |s| 4.0 * (1.0 - s));
        let bad = RadialFunction::from_fn(&grid, |_| 1.0);
        assert!(matches!(energy(&bad, &spec, &grid), Err(Error::DegenerateReaction { .. })));
        let ok = bad.with_dirichlet();
        assert!(energy(&ok, &spec, &grid).is_ok());
    }

    #[test]
    fn residual_of_generic_function_is_positive() {
        let (spec, grid) = setup(2.0, 2.0, 1.0, 4.0);
        let u = RadialFunction::from_fn(&grid, |s| (1.0 - s) * (1.0 + 3.0 * s));
        assert!(weak_residual(&u, &spec, &grid).unwrap() > 1e-3);
    }

    #[test]
    fn manufactured_ode_profile() {
        let q = 3.0;
        let spec = ProblemSpec::constant(2.0, q, 2.0, 0.0, 1.0, 0.5, 3, 1.0, HypothesisSet::Radial).unwrap();
        let grid = RadialGrid::new(1.0, 3, 400, Spacing::Uniform).unwrap();
        let u = RadialFunction::from_fn(&grid, |s| 1.0 - s * s);
        let res = radial_ode_residual(&u, &spec, &grid).unwrap();
        for (s, r) in res.radii.iter().zip(&res.residual) {
            let expected = -6.0 * s * s + s * s * (1.0 - s * s).powf(q - 1.0);
            assert!((r - expected).abs() < 5e-5, "{s}: {r} vs {expected}");
        }
        let zero = radial_ode_residual(&RadialFunction::zeros(&grid), &spec, &grid).unwrap();
        assert!(zero.residual.iter().all(|r| *r == 0.0));
    }

    #[test]
    fn ode_residual_flags_singular_nodes() {
        let spec = ProblemSpec::constant(1.5, 3.0, 1.5, 0.0, 1.0, 0.5, 3, 1.0, HypothesisSet::Radial).unwrap();
        let grid = RadialGrid::new(1.0, 3, 100, Spacing::Uniform).unwrap();
        let u = RadialFunction::from_fn(&grid, |s| if s < 0.8 { 1.0 } else { 5.0 * (1.0 - s) });
        let res = radial_ode_residual(&u, &spec, &grid).unwrap();
        assert!(!res.singular.is_empty());
        assert!(res.residual.iter().any(|r| r.is_nan()));
    }

    fn reference() -> (ProblemSpec, RadialGrid, RadialFunction) {
        let (spec, grid) = setup(2.0, 2.0, 1.0, 4.0);
        let mut spec = spec;
        spec.q = ExponentField::from_fn(1.0, |s| 3.0 + s);
        let u = RadialFunction::from_fn(&grid, |s| (1.0 - s * s) * (1.5 + (4.0 * s).sin()));
        (spec, grid, u)
    }

    #[test]
    fn truncation_plateaus_and_collapse() {
        let (spec, grid, u) = reference();
        let tr = Truncation::new(&spec, &grid, &u, CutoffMode::Standard);
        for t in [-2.0, 0.3, 1.7] {
            let s = 0.1;
            assert_eq!(tr.reaction(s, t), signed_power(t, spec.q.eval(s)));
            let s = 0.8;
            assert_eq!(tr.reaction(s, t), tr.reaction(s, 0.0));
        }
        for (&s, &v) in grid.nodes().iter().zip(u.values()) {
            let expected = signed_power(v, spec.q.eval(s));
            assert!((tr.reaction(s, v) - expected).abs() <= 1e-15 * expected.abs().max(1.0));
        }
    }

    #[test]
    fn truncation_growth_bound() {
        let (spec, grid, u) = reference();
        let tr = Truncation::new(&spec, &grid, &u, CutoffMode::Standard);
        let c = tr.growth_constant();
        let e = tr.growth_exponent();
        for &s in grid.nodes() {
            for j in 0..=200 {
                let t = -10.0 + 0.1 * j as f64;
                assert!(tr.reaction(s, t).abs() <= c * (t.abs().powf(e) + 1.0));
            }
        }
    }

    #[test]
    fn bridge_quadrature_matches_closed_form() {
        let (spec, grid, u) = reference();
        let tr = Truncation::new(&spec, &grid, &u, CutoffMode::Standard);
        for s in [0.26, 0.27, 0.29] {
            assert!(tr.xi(s) > 0.0 && tr.xi(s) < 1.0);
            for t in [-1.5, 0.4, 2.2] {
                let a = tr.primitive_quadrature(s, t);
                let b = tr.primitive_closed(s, t);
                // |t|^{q-2} t is not smooth at 0, so the rule converges algebraically
                assert!((a - b).abs() < 1e-9 * b.abs().max(1.0), "{s} {t}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn truncated_energy_cases() {
        let (spec, grid, u) = reference();
        let z = RadialFunction::zeros(&grid);
        assert_eq!(truncated_energy(&z, &u, &spec, &grid).unwrap(), 0.0);
        let off = Truncation::new(&spec, &grid, &u, CutoffMode::Disabled);
        let w = RadialFunction::from_fn(&grid, |s| 0.5 * (1.0 - s));
        let i = energy(&w, &spec, &grid).unwrap().total;
        assert!((off.energy(&w).unwrap() - i).abs() < 1e-13 * i.abs().max(1.0));
    }

    #[test]
    fn truncated_derivative_agrees_at_reference() {
        let (spec, grid, u) = reference();
        let tr = Truncation::new(&spec, &grid, &u, CutoffMode::Standard);
        let g = energy_gradient(&u, &spec, &grid).unwrap();
        let inner = RadialFunction::from_fn(&grid, |s| if s < 0.25 { (0.25 - s).powi(2) } else { 0.0 });
        let everywhere = RadialFunction::from_fn(&grid, |s| (1.0 - s) * (2.0 * s).cos());
        for v in [inner, everywhere] {
            let j = tr.derivative_pairing(&u, &v).unwrap();
            let i = pairing(&grid, &g, &v);
            assert!((j - i).abs() < 1e-10 * i.abs().max(1.0), "{j} vs {i}");
        }
    }

    #[test]
    fn plateau_independence_in_t() {
        let (spec, grid, u) = reference();
        let tr = Truncation::new(&spec, &grid, &u, CutoffMode::Standard);
        for &s in grid.nodes().iter().filter(|&&s| s >= 0.3) {
            let h = 1e-5;
            let d = (tr.reaction(s, 1.0 + h) - tr.reaction(s, 1.0 - h)) / (2.0 * h);
            assert_eq!(d, 0.0);
        }
    }
}
