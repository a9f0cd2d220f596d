//! Critical points of the double-phase energy: a mountain-pass solution by
//! a string method, a negative-energy local minimizer inside a norm ball,
//! and the explicit `lambda*` threshold together with a sampled check of
//! the ring geometry around the origin.

mod driver;
mod local_min;
mod mountain_pass;
mod newton;
mod shooting;
mod threshold;

use std::io::Write;

use serde::Serialize;

use crate::error::Result;
use crate::parallel::Execution;
use crate::radial::RadialFunction;

pub use driver::{sweep, two_solution_driver, SweepRow};
pub use local_min::{boundary_seeds, local_min_solve, Seed};
pub use mountain_pass::{find_endpoint, mountain_pass_solve, PathState};
pub use newton::{polish, Merit};
pub use shooting::shooting_refine;
pub use threshold::{
    estimate_c_tau, lambda_star, random_trial, ring_certificate, threshold_for, RingReport, Threshold,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CriticalKind {
    LocalMin,
    MountainPass,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TraceRow {
    pub iteration: usize,
    pub level: f64,
    pub residual: f64,
}

/// Writes `iteration,level,residual` rows.
pub fn write_trace<W: Write>(rows: &[TraceRow], mut out: W) -> Result<()> {
    writeln!(out, "iteration,level,residual")?;
    for r in rows {
        writeln!(out, "{},{:.16e},{:.16e}", r.iteration, r.level, r.residual)?;
    }
    Ok(())
}

#[derive(Clone, Debug, Serialize)]
pub struct CriticalPoint {
    #[serde(skip)]
    pub u: RadialFunction,
    pub level: f64,
    pub residual: f64,
    pub kind: CriticalKind,
    pub iterations: usize,
    pub lambda: f64,
    pub norm: f64,
    /// Label of the seed that produced a local minimizer.
    pub seed: Option<String>,
    #[serde(skip)]
    pub trace: Vec<TraceRow>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SolverOptions {
    pub tau: f64,
    pub tol: f64,
    pub beads: usize,
    pub max_iter: usize,
    /// Random trials behind `C_tau` and the ring certificate.
    pub samples: usize,
    pub seed: u64,
    #[serde(skip)]
    pub execution: Execution,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            tau: 1.0,
            tol: 1e-6,
            beads: 32,
            max_iter: 2000,
            samples: 500,
            seed: 0,
            execution: Execution::default(),
        }
    }
}
