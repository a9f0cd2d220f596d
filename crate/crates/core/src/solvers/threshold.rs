use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::energy::Functional;
use crate::error::{Error, Result};
use crate::exponent_fields::ProblemSpec;
use crate::parallel::Execution;
use crate::radial::{RadialFunction, RadialGrid};

use super::SolverOptions;

/// Cosine modes in a random trial function.
pub const TRIAL_MODES: usize = 8;
/// Slack allowed below the ring level.
pub const RING_SLACK: f64 = 1e-9;

const C_TAU_STREAM: u64 = 0;
const RING_STREAM: u64 = 1;

/// `min{tau^{p+}, tau^{p-}} / (2 C_tau)`.
pub fn lambda_star(tau: f64, c_tau: f64, p_minus: f64, p_plus: f64) -> Result<f64> {
    if !(tau > 0.0) || !(c_tau > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "tau and C_tau must be positive, got {tau} and {c_tau}"
        )));
    }
    if !(p_minus > 1.0) || !(p_plus >= p_minus) {
        return Err(Error::InvalidParameter(format!(
            "need 1 < p- <= p+, got {p_minus} and {p_plus}"
        )));
    }
    Ok(tau.powf(p_plus).min(tau.powf(p_minus)) / (2.0 * c_tau))
}

/// `sum_k c_k cos((k - 1/2) pi s / R)` with `c_k` uniform in `[-1, 1] / k`;
/// vanishes at `R`.
pub fn random_trial(grid: &RadialGrid, rng: &mut impl Rng) -> RadialFunction {
    let coefs: Vec<f64> = (1..=TRIAL_MODES).map(|k| rng.gen_range(-1.0..=1.0) / k as f64).collect();
    trial_from(grid, &coefs)
}

fn trial_from(grid: &RadialGrid, coefs: &[f64]) -> RadialFunction {
    let r = grid.outer_radius();
    RadialFunction::from_fn(grid, |s| {
        coefs
            .iter()
            .enumerate()
            .map(|(k, c)| c * ((k as f64 + 0.5) * PI * s / r).cos())
            .sum()
    })
    .with_dirichlet()
}

fn trials(grid: &RadialGrid, samples: usize, seed: u64, stream: u64) -> Vec<RadialFunction> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    (0..samples).map(|_| random_trial(grid, &mut rng)).collect()
}

fn normalized(f: &Functional, u: &RadialFunction, tau: f64) -> Result<RadialFunction> {
    let n = f.composite_norm(u)?;
    if n == 0.0 {
        return Err(Error::InvalidParameter("trial function has zero norm".into()));
    }
    Ok(u.scaled(tau / n))
}

/// Twice the largest reaction integral `int |u|^q / q` over the given trials
/// rescaled to norm `tau`. The `1/q` factor is kept because `q` may vanish
/// at the boundary, where it dominates the energy.
pub fn c_tau_over(
    spec: &ProblemSpec,
    grid: &RadialGrid,
    tau: f64,
    trials: &[RadialFunction],
    execution: Execution,
) -> Result<f64> {
    let f = Functional::new(spec, grid);
    let values = execution.map(trials, |u| normalized(&f, u, tau).map(|v| f.reaction_integral(&v)));
    let mut best: f64 = 0.0;
    for v in values {
        best = best.max(v?);
    }
    Ok(2.0 * best)
}

pub fn estimate_c_tau(
    spec: &ProblemSpec,
    grid: &RadialGrid,
    tau: f64,
    samples: usize,
    seed: u64,
    execution: Execution,
) -> Result<f64> {
    c_tau_over(spec, grid, tau, &trials(grid, samples, seed, C_TAU_STREAM), execution)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Threshold {
    pub tau: f64,
    pub c_tau: f64,
    pub p_minus: f64,
    pub p_plus: f64,
    pub lambda_star: f64,
}

pub fn threshold_for(spec: &ProblemSpec, grid: &RadialGrid, opts: &SolverOptions) -> Result<Threshold> {
    let c_tau = estimate_c_tau(spec, grid, opts.tau, opts.samples, opts.seed, opts.execution)?;
    let (p_minus, p_plus) = (spec.p.lo(), spec.p.hi());
    Ok(Threshold {
        tau: opts.tau,
        c_tau,
        p_minus,
        p_plus,
        lambda_star: lambda_star(opts.tau, c_tau, p_minus, p_plus)?,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct RingReport {
    pub rho: f64,
    pub min_energy: f64,
    pub samples: usize,
    pub violations: usize,
    pub holds: bool,
}

/// Checks `I(u) >= min{tau^{p+}, tau^{p-}} / 2` on the given trials
/// rescaled to norm `tau`.
pub fn ring_certificate_over(
    spec: &ProblemSpec,
    grid: &RadialGrid,
    tau: f64,
    trials: &[RadialFunction],
    execution: Execution,
) -> Result<RingReport> {
    let f = Functional::new(spec, grid);
    let rho = tau.powf(spec.p.hi()).min(tau.powf(spec.p.lo())) / 2.0;
    let energies = execution.map(trials, |u| normalized(&f, u, tau).and_then(|v| f.value(&v)));
    let mut min_energy = f64::INFINITY;
    let mut violations = 0;
    for e in energies {
        let e = e?;
        min_energy = min_energy.min(e);
        if e < rho - RING_SLACK {
            violations += 1;
        }
    }
    Ok(RingReport {
        rho,
        min_energy,
        samples: trials.len(),
        violations,
        holds: violations == 0,
    })
}

pub fn ring_certificate(
    spec: &ProblemSpec,
    grid: &RadialGrid,
    tau: f64,
    samples: usize,
    seed: u64,
    execution: Execution,
) -> Result<RingReport> {
    ring_certificate_over(spec, grid, tau, &trials(grid, samples, seed, RING_STREAM), execution)
}
