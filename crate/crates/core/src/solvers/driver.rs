use serde::Serialize;

use crate::error::{Error, Result};
use crate::exponent_fields::ProblemSpec;
use crate::modular_norms::composite_norm;
use crate::parallel::Execution;
use crate::radial::RadialGrid;

use super::local_min::local_min_solve;
use super::mountain_pass::mountain_pass_solve;
use super::{CriticalPoint, SolverOptions};

/// Mountain-pass point and local minimizer at the same `lambda`, with the
/// sign structure `A < 0 < c` and the residuals re-checked.
pub fn two_solution_driver(
    spec: &ProblemSpec,
    grid: &RadialGrid,
    opts: &SolverOptions,
) -> Result<(CriticalPoint, CriticalPoint)> {
    let mp = mountain_pass_solve(spec, grid, opts)?;
    let min = local_min_solve(spec, grid, opts)?;
    for cp in [&min, &mp] {
        if !(cp.residual <= opts.tol) {
            return Err(Error::Certificate(format!(
                "{:?} residual {:e} exceeds {:e}",
                cp.kind, cp.residual, opts.tol
            )));
        }
    }
    if !(min.level < 0.0 && 0.0 < mp.level) {
        return Err(Error::Certificate(format!(
            "levels {:e} and {:e} do not straddle 0",
            min.level, mp.level
        )));
    }
    let gap = composite_norm(&min.u.axpy(-1.0, &mp.u), spec, grid)?;
    let scale = min.norm.max(mp.norm);
    if !(gap > 10.0 * opts.tol * scale) {
        return Err(Error::Certificate(format!(
            "solutions are not distinguished: relative distance {:e}",
            gap / scale
        )));
    }
    Ok((min, mp))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepRow {
    pub lambda: f64,
    pub a_lambda: f64,
    pub c_lambda: f64,
    pub residual_min: f64,
    pub residual_mp: f64,
    pub iterations_min: usize,
    pub iterations_mp: usize,
    /// `ok` or the failure message.
    pub status: String,
}

impl SweepRow {
    pub const HEADER: &'static str =
        "lambda,A_lambda,c_lambda,residual_min,residual_mp,iterations_min,iterations_mp,status";

    pub fn succeeded(&self) -> bool {
        self.status == "ok"
    }

    pub fn csv_line(&self) -> String {
        format!(
            "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{},{},{}",
            self.lambda,
            self.a_lambda,
            self.c_lambda,
            self.residual_min,
            self.residual_mp,
            self.iterations_min,
            self.iterations_mp,
            self.status.replace([',', '\n', '"'], " ")
        )
    }
}

/// Runs the two-solution driver at each `lambda`; rows come back in input
/// order whatever the execution mode.
pub fn sweep(spec: &ProblemSpec, grid: &RadialGrid, lambdas: &[f64], opts: &SolverOptions) -> Vec<SweepRow> {
    // the rows already run concurrently; the solvers inside each row stay serial
    let inner = SolverOptions {
        execution: Execution::Sequential,
        ..*opts
    };
    opts.execution.map(lambdas, |&lambda| {
        let spec = spec.with_lambda(lambda);
        match two_solution_driver(&spec, grid, &inner) {
            Ok((min, mp)) => SweepRow {
                lambda,
                a_lambda: min.level,
                c_lambda: mp.level,
                residual_min: min.residual,
                residual_mp: mp.residual,
                iterations_min: min.iterations,
                iterations_mp: mp.iterations,
                status: "ok".into(),
            },
            Err(e) => SweepRow {
                lambda,
                a_lambda: f64::NAN,
                c_lambda: f64::NAN,
                residual_min: f64::NAN,
                residual_mp: f64::NAN,
                iterations_min: 0,
                iterations_mp: 0,
                status: e.to_string(),
            },
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exponent_fields::HypothesisSet;
    use crate::radial::Spacing;

    #[test]
    fn no_reaction_reports_geometry_failure() {
        let spec = ProblemSpec::constant(2.0, 4.0, 2.0, 0.0, 1.0, 0.5, 3, 0.0, HypothesisSet::Radial).unwrap();
        let grid = RadialGrid::new(1.0, 3, 40, Spacing::Uniform).unwrap();
        let err = two_solution_driver(&spec, &grid, &SolverOptions::default()).unwrap_err();
        assert!(matches!(err, Error::Geometry(_)));
        let rows = sweep(&spec, &grid, &[0.0], &SolverOptions::default());
        assert!(!rows[0].succeeded());
        assert!(rows[0].csv_line().ends_with(&rows[0].status.replace(',', " ")));
    }
}
