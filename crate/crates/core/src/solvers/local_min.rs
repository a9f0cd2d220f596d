use serde::Serialize;

use crate::energy::Functional;
use crate::error::{Error, Result};
use crate::exponent_fields::ProblemSpec;
use crate::radial::{RadialFunction, RadialGrid};

use super::newton::{polish, Merit};
use super::{CriticalKind, CriticalPoint, SolverOptions, TraceRow};

/// Halvings of the amplitude scanned below the ball radius.
const AMPLITUDE_SCAN: usize = 48;

/// Bump `(1 - ((s - center) / width)^2)^2` supported in `[center - width, center + width]`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Seed {
    pub label: String,
    pub center: f64,
    pub width: f64,
}

impl Seed {
    pub fn profile(&self, grid: &RadialGrid) -> RadialFunction {
        RadialFunction::from_fn(grid, |s| {
            let x = (s - self.center) / self.width;
            if x.abs() < 1.0 {
                (1.0 - x * x).powi(2)
            } else {
                0.0
            }
        })
        .with_dirichlet()
    }
}

/// Bumps touching or close to the outer sphere, narrowest first.
pub fn boundary_seeds(outer_radius: f64) -> Vec<Seed> {
    let mut seeds = Vec::new();
    for frac in [0.05, 0.1, 0.2, 0.3] {
        let width = frac * outer_radius;
        for (tag, offset) in [("edge", 1.0), ("inset", 2.0)] {
            seeds.push(Seed {
                label: format!("{tag}-{frac}"),
                center: outer_radius - offset * width,
                width,
            });
        }
    }
    seeds
}

#[derive(Clone, Debug, Serialize)]
struct SeedScan {
    label: String,
    best_energy: f64,
    amplitude: f64,
}

/// Lowest energy along `t * phi` for `t = t_max 2^{-j}`, with `t_max`
/// putting `t phi` on the sphere of radius `tau`.
fn scan(f: &Functional, phi: &RadialFunction, tau: f64) -> Result<(f64, f64)> {
    let n = f.composite_norm(phi)?;
    if n == 0.0 {
        return Ok((0.0, 0.0));
    }
    let mut best = (0.0, 0.0);
    let mut t = 0.999 * tau / n;
    for _ in 0..AMPLITUDE_SCAN {
        if let Ok(e) = f.value(&phi.scaled(t)) {
            if e < best.0 {
                best = (e, t);
            }
        }
        t *= 0.5;
    }
    Ok(best)
}

/// Negative-energy critical point inside `{composite_norm <= tau}`, reached
/// by constrained descent from boundary-adjacent seeds.
pub fn local_min_solve(spec: &ProblemSpec, grid: &RadialGrid, opts: &SolverOptions) -> Result<CriticalPoint> {
    let f = Functional::new(spec, grid);
    let mut scans = Vec::new();
    let mut last_err = None;
    for seed in boundary_seeds(grid.outer_radius()) {
        let phi = seed.profile(grid);
        let (energy, t) = scan(&f, &phi, opts.tau)?;
        scans.push(SeedScan {
            label: seed.label.clone(),
            best_energy: energy,
            amplitude: t,
        });
        if energy >= 0.0 {
            continue;
        }
        match polish(&f, &phi.scaled(t), opts.tol, opts.max_iter, Merit::Energy, Some(opts.tau)) {
            Ok((u, residual, iterations)) => {
                let level = f.value(&u)?;
                if level < 0.0 {
                    return Ok(CriticalPoint {
                        norm: f.composite_norm(&u)?,
                        residual: f.residual(&u)?,
                        u,
                        level,
                        kind: CriticalKind::LocalMin,
                        iterations,
                        lambda: spec.lambda,
                        seed: Some(seed.label),
                        trace: vec![TraceRow {
                            iteration: iterations,
                            level,
                            residual,
                        }],
                    });
                }
            }
            Err(e) => last_err = Some(e),
        }
    }
    if scans.iter().any(|s| s.best_energy < 0.0) {
        return Err(last_err.unwrap_or(Error::NoConvergence {
            iterations: opts.max_iter,
            residual: f64::NAN,
        }));
    }
    Err(Error::NoNegativeSeed(
        serde_json::to_string(&scans).unwrap_or_default(),
    ))
}
