use crate::energy::Functional;
use crate::error::{Error, Result};
use crate::radial::RadialFunction;

use super::shooting::shooting_refine;

const ARMIJO: f64 = 1e-4;
const BACKTRACKS: usize = 40;
/// Iterations without halving the residual before handing over to shooting.
const STALL: usize = 25;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Merit {
    /// Decrease the energy; fall back to the convex part of the Hessian
    /// when the Newton step is not a descent direction.
    Energy,
    /// Decrease the squared dual residual; converges to any nondegenerate
    /// critical point near the start.
    Residual,
}

fn step(u: &RadialFunction, dir: &[f64], alpha: f64) -> RadialFunction {
    let mut v = u.clone();
    for (x, d) in v.values_mut().iter_mut().zip(dir) {
        *x += alpha * d;
    }
    v
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn admissible(f: &Functional, v: &RadialFunction, ball: Option<f64>) -> bool {
    match ball {
        Some(r) => f.composite_norm(v).is_ok_and(|n| n <= r),
        None => true,
    }
}

/// Damped Newton iteration on the free nodes, optionally confined to the
/// ball `composite_norm <= ball`. When Newton stalls (typically where an
/// exponent below 2 meets a nearly flat profile) the iterate is refined by
/// shooting. Returns the final iterate, its residual and the iteration count.
pub fn polish(
    f: &Functional,
    u0: &RadialFunction,
    tol: f64,
    max_iter: usize,
    merit: Merit,
    ball: Option<f64>,
) -> Result<(RadialFunction, f64, usize)> {
    let free = f.free();
    let mut u = u0.clone().with_dirichlet();
    let mut d = f.derivative(&u)?;
    let mut res = f.residual_from(&u, &d)?;
    let mut mark = res;
    let mut since = 0;
    let mut iterations = max_iter;
    for it in 0..max_iter {
        if res <= tol {
            return Ok((u, res, it));
        }
        if res < 0.5 * mark {
            mark = res;
            since = 0;
        } else {
            since += 1;
            if since > STALL {
                iterations = it;
                break;
            }
        }
        let rhs: Vec<f64> = d[..free].iter().map(|x| -x).collect();
        let newton = f.hessian(&u).and_then(|h| h.solve(&rhs)).ok();
        let next = match merit {
            Merit::Energy => energy_step(f, &u, &d, &rhs, newton, ball)?,
            Merit::Residual => match newton {
                Some(dir) => residual_step(f, &u, &d, &dir, ball)?,
                None => None,
            },
        };
        let Some(v) = next else {
            iterations = it;
            break;
        };
        u = v;
        d = f.derivative(&u)?;
        res = f.residual_from(&u, &d)?;
    }
    if res <= tol {
        return Ok((u, res, iterations));
    }
    if let Ok((v, r)) = shooting_refine(f, &u) {
        if r <= tol && admissible(f, &v, ball) {
            return Ok((v, r, iterations + 1));
        }
    }
    Err(Error::NoConvergence {
        iterations,
        residual: res,
    })
}

fn energy_step(
    f: &Functional,
    u: &RadialFunction,
    d: &[f64],
    rhs: &[f64],
    newton: Option<Vec<f64>>,
    ball: Option<f64>,
) -> Result<Option<RadialFunction>> {
    let free = f.free();
    let e0 = f.value(u)?;
    let dir = match newton {
        Some(dir) if dot(&dir, &d[..free]) < 0.0 => dir,
        _ => f.convex_hessian(u)?.solve(rhs)?,
    };
    let slope = dot(&dir, &d[..free]);
    let mut alpha = 1.0;
    for _ in 0..BACKTRACKS {
        let v = step(u, &dir, alpha);
        if let Ok(e) = f.value(&v) {
            if e <= e0 + ARMIJO * alpha * slope && admissible(f, &v, ball) {
                return Ok(Some(v));
            }
        }
        alpha *= 0.5;
    }
    // near roundoff the energy stops resolving progress; the residual still does
    residual_step(f, u, d, &dir, ball)
}

fn residual_step(
    f: &Functional,
    u: &RadialFunction,
    d: &[f64],
    dir: &[f64],
    ball: Option<f64>,
) -> Result<Option<RadialFunction>> {
    let m0 = f.dual_norm(d)?.powi(2);
    let mut alpha = 1.0;
    for _ in 0..BACKTRACKS {
        let v = step(u, dir, alpha);
        if let Ok(dv) = f.derivative(&v) {
            let m = f.dual_norm(&dv)?.powi(2);
            if m <= m0 * (1.0 - 2.0 * ARMIJO * alpha) && admissible(f, &v, ball) {
                return Ok(Some(v));
            }
        }
        alpha *= 0.5;
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exponent_fields::{HypothesisSet, ProblemSpec};
    use crate::radial::{RadialGrid, Spacing};

    #[test]
    fn linear_problem_is_solved_in_one_step() {
        // p = m = q = 2: the derivative is affine, zero is the only critical point
        let spec = ProblemSpec::constant(2.0, 2.0, 2.0, 1.0, 1.0, 0.5, 3, 1.0, HypothesisSet::Radial).unwrap();
        let grid = RadialGrid::new(1.0, 3, 50, Spacing::Uniform).unwrap();
        let f = Functional::new(&spec, &grid);
        let u0 = RadialFunction::from_fn(&grid, |s| 1.0 - s * s);
        let (u, res, it) = polish(&f, &u0, 1e-10, 5, Merit::Residual, None).unwrap();
        assert!(res <= 1e-10 && it <= 2);
        assert!(u.max_abs() < 1e-8);
    }

    #[test]
    fn energy_merit_minimizes_convex_problem() {
        let spec = ProblemSpec::constant(3.0, 1.5, 2.0, 0.5, 1.0, 0.5, 2, 1.0, HypothesisSet::Radial).unwrap();
        let grid = RadialGrid::new(1.0, 2, 60, Spacing::Uniform).unwrap();
        let f = Functional::new(&spec, &grid);
        let u0 = RadialFunction::from_fn(&grid, |s| 0.1 * (1.0 - s));
        let (u, res, _) = polish(&f, &u0, 1e-9, 100, Merit::Energy, Some(10.0)).unwrap();
        assert!(res <= 1e-9);
        assert!(f.value(&u).unwrap() < 0.0);
    }
}
