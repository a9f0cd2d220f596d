use crate::energy::Functional;
use crate::error::{Error, Result};
use crate::exponent_fields::ProblemSpec;
use crate::parallel::Execution;
use crate::radial::{RadialFunction, RadialGrid};

use super::newton::{polish, Merit};
use super::{CriticalKind, CriticalPoint, SolverOptions, TraceRow};

const ENDPOINT_MAX_SCALE: f64 = 1e6;
const TIE: f64 = 1e-12;
const ARMIJO: f64 = 1e-4;
const BACKTRACKS: usize = 30;
/// A bead moves at most this fraction of the bead spacing per sweep.
const STEP_CAP: f64 = 0.5;
const POLISH_EVERY: usize = 10;
/// Top-bead residual below which Newton refinement is tried early.
const POLISH_TRIGGER: f64 = 1e-2;
const POLISH_ITER: usize = 60;

/// Beads of a discrete path from 0 to an endpoint with negative energy.
#[derive(Clone, Debug)]
pub struct PathState {
    pub beads: Vec<RadialFunction>,
    pub energies: Vec<f64>,
}

fn metric_sq(f: &Functional, x: &[f64]) -> f64 {
    let free = &x[..f.free()];
    f.metric().mul(free).iter().zip(free).map(|(a, b)| a * b).sum()
}

fn difference(a: &RadialFunction, b: &RadialFunction) -> Vec<f64> {
    a.values().iter().zip(b.values()).map(|(x, y)| x - y).collect()
}

impl PathState {
    /// Straight segment `t e`, `t` in `[0, 1]`.
    pub fn segment(f: &Functional, endpoint: &RadialFunction, beads: usize, execution: Execution) -> Result<Self> {
        let beads = beads.max(3);
        let beads: Vec<RadialFunction> = (0..beads)
            .map(|j| endpoint.scaled(j as f64 / (beads - 1) as f64))
            .collect();
        let mut path = Self {
            energies: Vec::new(),
            beads,
        };
        path.evaluate(f, execution)?;
        Ok(path)
    }

    fn evaluate(&mut self, f: &Functional, execution: Execution) -> Result<()> {
        self.energies = execution
            .map(&self.beads, |b| f.value(b))
            .into_iter()
            .collect::<Result<_>>()?;
        Ok(())
    }

    /// Index of the highest bead; the lowest index wins ties within `1e-12`.
    pub fn max_index(&self) -> usize {
        let top = self.energies.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        self.energies.iter().position(|e| *e >= top - TIE).unwrap_or(0)
    }

    pub fn max_energy(&self) -> f64 {
        self.energies[self.max_index()]
    }

    fn arc_lengths(&self, f: &Functional) -> Vec<f64> {
        let mut arc = vec![0.0];
        for w in self.beads.windows(2) {
            let d = metric_sq(f, &difference(&w[1], &w[0])).sqrt();
            arc.push(arc.last().unwrap() + d);
        }
        arc
    }

    /// Redistributes beads to equal spacing in the metric `int (1 + a) |grad v|^2`.
    pub fn reparametrize(&mut self, f: &Functional) {
        let arc = self.arc_lengths(f);
        let total = *arc.last().unwrap();
        if total == 0.0 {
            return;
        }
        let n = self.beads.len();
        let mut out = Vec::with_capacity(n);
        out.push(self.beads[0].clone());
        let mut k = 0;
        for j in 1..n - 1 {
            let target = total * j as f64 / (n - 1) as f64;
            while k + 2 < n && arc[k + 1] < target {
                k += 1;
            }
            let span = arc[k + 1] - arc[k];
            let theta = if span > 0.0 { ((target - arc[k]) / span).clamp(0.0, 1.0) } else { 0.0 };
            let diff = RadialFunction::from_values(difference(&self.beads[k + 1], &self.beads[k]));
            out.push(self.beads[k].axpy(theta, &diff));
        }
        out.push(self.beads[n - 1].clone());
        self.beads = out;
    }

    fn spacing(&self, f: &Functional) -> f64 {
        *self.arc_lengths(f).last().unwrap() / (self.beads.len() - 1) as f64
    }
}

/// Scales a bump supported in `B_r` by `t = 1, 2, 4, ...` until the energy
/// turns negative.
pub fn find_endpoint(f: &Functional) -> Result<RadialFunction> {
    let r = f.spec.inner_radius;
    let phi = RadialFunction::from_fn(f.grid, |s| {
        let x = s / r;
        if x < 1.0 {
            (1.0 - x * x).powi(2)
        } else {
            0.0
        }
    })
    .with_dirichlet();
    let mut t = 1.0;
    while t <= ENDPOINT_MAX_SCALE {
        let e = phi.scaled(t);
        if f.value(&e)? < 0.0 {
            return Ok(e);
        }
        t *= 2.0;
    }
    Err(Error::Geometry(format!(
        "energy along the inner bump stays nonnegative up to scale {ENDPOINT_MAX_SCALE}"
    )))
}

/// One preconditioned Armijo descent step for a single bead.
fn descend(f: &Functional, bead: &RadialFunction, cap: f64) -> Result<RadialFunction> {
    let d = f.derivative(bead)?;
    let free = f.free();
    let rhs: Vec<f64> = d[..free].iter().map(|x| -x).collect();
    let mut dir = f.metric().solve(&rhs)?;
    dir.push(0.0);
    let slope: f64 = dir.iter().zip(&d).map(|(a, b)| a * b).sum();
    if slope >= 0.0 {
        return Ok(bead.clone());
    }
    let len = metric_sq(f, &dir).sqrt();
    let e0 = f.value(bead)?;
    let dir = RadialFunction::from_values(dir);
    let mut alpha = if len > 0.0 { (cap / len).min(1.0) } else { 1.0 };
    for _ in 0..BACKTRACKS {
        let v = bead.axpy(alpha, &dir);
        if f.value(&v).is_ok_and(|e| e <= e0 + ARMIJO * alpha * slope) {
            return Ok(v);
        }
        alpha *= 0.5;
    }
    Ok(bead.clone())
}

/// String-method search for a mountain-pass critical point: beads descend
/// independently, are respaced along the path, and the highest bead is
/// periodically refined by Newton's method on the residual.
pub fn mountain_pass_solve(spec: &ProblemSpec, grid: &RadialGrid, opts: &SolverOptions) -> Result<CriticalPoint> {
    let f = Functional::new(spec, grid);
    let endpoint = find_endpoint(&f)?;
    let mut path = PathState::segment(&f, &endpoint, opts.beads, opts.execution)?;
    let mut trace = Vec::new();
    let mut best_level = f64::INFINITY;
    let mut last_residual = f64::NAN;
    for iteration in 0..=opts.max_iter {
        let top = path.max_index();
        best_level = best_level.min(path.energies[top]);
        let candidate = &path.beads[top];
        last_residual = f.residual(candidate)?;
        trace.push(TraceRow {
            iteration,
            level: best_level,
            residual: last_residual,
        });
        let due = iteration > 0 && iteration % POLISH_EVERY == 0;
        if (due || last_residual <= POLISH_TRIGGER) && top > 0 {
            if let Ok((u, residual, _)) = polish(&f, candidate, opts.tol, POLISH_ITER, Merit::Residual, None) {
                let level = f.value(&u)?;
                if level > 0.0 && u.max_abs() > 1e-8 {
                    trace.push(TraceRow {
                        iteration,
                        level: best_level.min(level),
                        residual,
                    });
                    return Ok(CriticalPoint {
                        norm: f.composite_norm(&u)?,
                        residual: f.residual(&u)?,
                        u,
                        level,
                        kind: CriticalKind::MountainPass,
                        iterations: iteration,
                        lambda: spec.lambda,
                        seed: None,
                        trace,
                    });
                }
            }
        }
        if iteration == opts.max_iter {
            break;
        }
        let cap = STEP_CAP * path.spacing(&f);
        let n = path.beads.len();
        let moved: Vec<Result<RadialFunction>> = opts.execution.map_indexed(n, |j| {
            if j == 0 || j == n - 1 {
                Ok(path.beads[j].clone())
            } else {
                descend(&f, &path.beads[j], cap)
            }
        });
        path.beads = moved.into_iter().collect::<Result<_>>()?;
        path.reparametrize(&f);
        path.evaluate(&f, opts.execution)?;
    }
    Err(Error::NoConvergence {
        iterations: opts.max_iter,
        residual: last_residual,
    })
}
