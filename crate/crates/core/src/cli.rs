//! Command-line front end: `validate`, `solve`, `sweep` and `verify` on a
//! JSON run configuration.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::energy::{pairing, EnergyReport, Functional};
use crate::error::{Error, Result};
use crate::exponent_fields::{
    classify_regime, validate_hypotheses, ExponentField, FieldDef, HypothesisReport, HypothesisSet, ProblemSpec,
};
use crate::modular_norms::{holder_check, norm_modular_bounds_check, Modular};
use crate::parallel::{set_jobs, Execution};
use crate::radial::{measure_cutoff_decay, DecayTable, RadialFunction, RadialGrid, Spacing};
use crate::solvers::{
    local_min_solve, mountain_pass_solve, random_trial, sweep, threshold_for, two_solution_driver, write_trace,
    CriticalPoint, SolverOptions, SweepRow, Threshold,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "double-phase", version, about = "Double-phase Lane-Emden solver on the ball")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Run configuration (JSON).
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Output directory; overrides the configuration.
    #[arg(long, global = true, value_name = "DIR")]
    pub out: Option<PathBuf>,
    /// Random seed; overrides the configuration.
    #[arg(long, global = true, value_name = "UINT")]
    pub seed: Option<u64>,
    /// Worker threads (0 = all cores).
    #[arg(long, global = true, value_name = "UINT")]
    pub jobs: Option<usize>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Check the declared hypothesis set.
    Validate,
    /// Compute critical points and write solutions, report and traces.
    Solve,
    /// Two-solution runs over a range of lambda.
    Sweep,
    /// Property suites on the configured instance.
    Verify,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    MountainPass,
    LocalMin,
    TwoSolution,
}

/// Either an absolute value or a fraction of the estimated `lambda*`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum LambdaDef {
    Value(f64),
    Relative { fraction_of_lambda_star: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub nodes: usize,
    #[serde(default)]
    pub spacing: Spacing,
}

fn default_tau() -> f64 {
    1.0
}
fn default_tol() -> f64 {
    1e-6
}
fn default_beads() -> usize {
    32
}
fn default_max_iter() -> usize {
    2000
}
fn default_samples() -> usize {
    500
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverConfig {
    pub mode: Option<Mode>,
    #[serde(default = "default_tau")]
    pub tau: f64,
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default = "default_beads")]
    pub beads: usize,
    #[serde(default = "default_max_iter")]
    pub max_iter: usize,
    #[serde(default = "default_samples")]
    pub samples: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            mode: None,
            tau: default_tau(),
            tol: default_tol(),
            beads: default_beads(),
            max_iter: default_max_iter(),
            samples: default_samples(),
        }
    }
}

/// `count` values `from + (to - from) k / (count + 1)`, `k = 1..=count`;
/// `to` defaults to `lambda*`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub count: usize,
    #[serde(default)]
    pub from: f64,
    pub to: Option<f64>,
}

fn default_verify_samples() -> usize {
    100
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifyConfig {
    #[serde(default = "default_verify_samples")]
    pub samples: usize,
    pub eps: Option<Vec<f64>>,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        Self {
            samples: default_verify_samples(),
            eps: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub p: FieldDef,
    pub q: FieldDef,
    pub m: FieldDef,
    pub a: FieldDef,
    pub outer_radius: f64,
    pub inner_radius: f64,
    pub dim: usize,
    pub lambda: LambdaDef,
    pub hypothesis_set: HypothesisSet,
    pub weight_bound: Option<f64>,
    pub grid: GridConfig,
    #[serde(default)]
    pub solver: SolverConfig,
    pub sweep: Option<SweepConfig>,
    #[serde(default)]
    pub verify: VerifyConfig,
    #[serde(default)]
    pub seed: u64,
    pub out: Option<PathBuf>,
}

/// Configuration failure; `line` is set for JSON syntax and schema errors.
#[derive(Debug)]
pub struct ConfigError {
    pub message: String,
    pub line: Option<usize>,
}

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self.line {
            Some(line) => write!(f, "config line {line}: {}", self.message),
            None => write!(f, "config: {}", self.message),
        }
    }
}

impl RunConfig {
    pub fn parse(text: &str) -> std::result::Result<Self, ConfigError> {
        serde_json::from_str(text).map_err(|e| ConfigError {
            line: Some(e.line()),
            message: e.to_string(),
        })
    }

    pub fn load(path: &Path) -> std::result::Result<Self, ConfigError> {
        let text = fs::read_to_string(path).map_err(|e| ConfigError {
            message: format!("{}: {e}", path.display()),
            line: None,
        })?;
        Self::parse(&text)
    }

    pub fn grid(&self) -> Result<RadialGrid> {
        RadialGrid::new(self.outer_radius, self.dim, self.grid.nodes, self.grid.spacing)
    }

    /// The problem with `lambda` taken literally, or 0 when it is relative.
    pub fn base_spec(&self) -> Result<ProblemSpec> {
        let field = |d: &FieldDef| ExponentField::from_def(d, self.outer_radius);
        let lambda = match self.lambda {
            LambdaDef::Value(v) => v,
            LambdaDef::Relative { .. } => 0.0,
        };
        Ok(ProblemSpec::new(
            field(&self.p)?,
            field(&self.q)?,
            field(&self.m)?,
            field(&self.a)?,
            self.outer_radius,
            self.inner_radius,
            self.dim,
            lambda,
            self.hypothesis_set,
        )?
        .with_weight_bound(self.weight_bound))
    }

    pub fn options(&self, execution: Execution) -> SolverOptions {
        SolverOptions {
            tau: self.solver.tau,
            tol: self.solver.tol,
            beads: self.solver.beads,
            max_iter: self.solver.max_iter,
            samples: self.solver.samples,
            seed: self.seed,
            execution,
        }
    }

    pub fn mode(&self) -> Mode {
        self.solver.mode.unwrap_or(match self.hypothesis_set {
            HypothesisSet::Radial => Mode::MountainPass,
            HypothesisSet::BoundaryVanishing => Mode::TwoSolution,
        })
    }

    fn needs_threshold(&self) -> bool {
        matches!(self.lambda, LambdaDef::Relative { .. })
            || self.mode() != Mode::MountainPass
            || self.sweep.as_ref().is_some_and(|s| s.to.is_none())
    }
}

/// A configured instance: spec with resolved `lambda`, grid and options.
pub struct Instance {
    pub config: RunConfig,
    pub spec: ProblemSpec,
    pub grid: RadialGrid,
    pub options: SolverOptions,
    pub threshold: Option<Threshold>,
}

impl Instance {
    pub fn new(config: RunConfig, execution: Execution) -> Result<Self> {
        let grid = config.grid()?;
        let base = config.base_spec()?;
        let options = config.options(execution);
        let threshold = if config.needs_threshold() {
            Some(threshold_for(&base, &grid, &options)?)
        } else {
            None
        };
        let spec = match (config.lambda, &threshold) {
            (LambdaDef::Relative { fraction_of_lambda_star }, Some(t)) => {
                base.with_lambda(fraction_of_lambda_star * t.lambda_star)
            }
            _ => base,
        };
        Ok(Self {
            config,
            spec,
            grid,
            options,
            threshold,
        })
    }

    pub fn sweep_lambdas(&self) -> Vec<f64> {
        let Some(sw) = &self.config.sweep else {
            return Vec::new();
        };
        let to = sw.to.or(self.threshold.map(|t| t.lambda_star)).unwrap_or(sw.from);
        if !(to > sw.from) {
            return Vec::new();
        }
        (1..=sw.count)
            .map(|k| sw.from + (to - sw.from) * k as f64 / (sw.count + 1) as f64)
            .collect()
    }
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut out, value).map_err(|e| Error::Csv(e.to_string()))?;
    writeln!(out)?;
    out.flush()?;
    Ok(())
}

fn write_with<F: FnOnce(&mut BufWriter<File>) -> Result<()>>(path: &Path, f: F) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    f(&mut out)?;
    out.flush()?;
    Ok(())
}

#[derive(Serialize)]
struct RegimeCounts {
    subcritical: usize,
    critical: usize,
    supercritical: usize,
}

#[derive(Serialize)]
struct ValidationOutput<'a> {
    passed: bool,
    failed_clauses: Vec<&'a str>,
    report: &'a HypothesisReport,
    regimes: RegimeCounts,
}

pub fn cmd_validate(inst: &Instance, out: &Path) -> Result<i32> {
    let report = validate_hypotheses(&inst.spec, &inst.grid);
    let regimes = classify_regime(&inst.spec, &inst.grid, 1e-9)?;
    for c in &report.clauses {
        let status = if c.passed { "pass" } else { "FAIL" };
        println!("{:<4} {status}  {}", c.clause, c.description);
        if let Some(w) = &c.witness {
            println!("      at s = {}: {}", w.radius, w.detail);
        }
        if let Some(n) = &c.note {
            println!("      note: {n}");
        }
    }
    let output = ValidationOutput {
        passed: report.passed(),
        failed_clauses: report.failed_clauses(),
        report: &report,
        regimes: RegimeCounts {
            subcritical: regimes.subcritical.len(),
            critical: regimes.critical.len(),
            supercritical: regimes.supercritical.len(),
        },
    };
    write_json(&out.join("validation.json"), &output)?;
    Ok(if report.passed() { EXIT_OK } else { EXIT_FAIL })
}

#[derive(Serialize)]
struct SolutionEntry {
    point: CriticalPoint,
    energy: EnergyReport,
    solution_file: String,
    trace_file: String,
}

#[derive(Serialize)]
struct SolveOutput {
    lambda: f64,
    mode: Mode,
    tol: f64,
    hypotheses_passed: bool,
    threshold: Option<Threshold>,
    /// `Some(false)` when `lambda` lies outside `(0, lambda*)`.
    lambda_in_range: Option<bool>,
    certificate: bool,
    solutions: Vec<SolutionEntry>,
    error: Option<String>,
}

fn kind_name(cp: &CriticalPoint) -> &'static str {
    match cp.kind {
        crate::solvers::CriticalKind::LocalMin => "local_min",
        crate::solvers::CriticalKind::MountainPass => "mountain_pass",
    }
}

pub fn cmd_solve(inst: &Instance, out: &Path) -> Result<i32> {
    let spec = &inst.spec;
    let grid = &inst.grid;
    let opts = &inst.options;
    let mode = inst.config.mode();
    let hypotheses_passed = validate_hypotheses(spec, grid).passed();
    let lambda_in_range = inst
        .threshold
        .map(|t| spec.lambda > 0.0 && spec.lambda < t.lambda_star);
    let result: Result<Vec<CriticalPoint>> = match mode {
        Mode::MountainPass => mountain_pass_solve(spec, grid, opts).map(|c| vec![c]),
        Mode::LocalMin => local_min_solve(spec, grid, opts).map(|c| vec![c]),
        Mode::TwoSolution => two_solution_driver(spec, grid, opts).map(|(a, b)| vec![a, b]),
    };
    let f = Functional::new(spec, grid);
    let mut solutions = Vec::new();
    let (points, error) = match result {
        Ok(points) => (points, None),
        Err(e) => (Vec::new(), Some(e.to_string())),
    };
    for cp in points {
        let name = kind_name(&cp);
        let solution_file = format!("solution_{name}.csv");
        let trace_file = format!("trace_{name}.csv");
        write_with(&out.join(&solution_file), |w| cp.u.write_csv(grid, w))?;
        write_with(&out.join(&trace_file), |w| write_trace(&cp.trace, w))?;
        solutions.push(SolutionEntry {
            energy: f.energy(&cp.u)?,
            point: cp,
            solution_file,
            trace_file,
        });
    }
    let certificate = error.is_none()
        && !solutions.is_empty()
        && solutions.iter().all(|s| s.point.residual <= opts.tol);
    for s in &solutions {
        println!(
            "{:<13} level {:.16e}  residual {:.3e}  iterations {}",
            kind_name(&s.point),
            s.point.level,
            s.point.residual,
            s.point.iterations
        );
    }
    if let Some(e) = &error {
        eprintln!("solve failed: {e}");
    }
    if lambda_in_range == Some(false) {
        eprintln!("warning: lambda lies outside (0, lambda*); no two-solution certificate applies");
    }
    write_json(
        &out.join("report.json"),
        &SolveOutput {
            lambda: spec.lambda,
            mode,
            tol: opts.tol,
            hypotheses_passed,
            threshold: inst.threshold,
            lambda_in_range,
            certificate,
            solutions,
            error,
        },
    )?;
    Ok(if certificate { EXIT_OK } else { EXIT_FAIL })
}

pub fn write_sweep_csv<W: Write>(rows: &[SweepRow], mut out: W) -> Result<()> {
    writeln!(out, "{}", SweepRow::HEADER)?;
    for r in rows {
        writeln!(out, "{}", r.csv_line())?;
    }
    Ok(())
}

pub fn cmd_sweep(inst: &Instance, out: &Path) -> Result<i32> {
    let lambdas = inst.sweep_lambdas();
    let rows = sweep(&inst.spec, &inst.grid, &lambdas, &inst.options);
    write_with(&out.join("sweep.csv"), |w| write_sweep_csv(&rows, w))?;
    let ok = rows.iter().filter(|r| r.succeeded()).count();
    println!("{ok} of {} lambda values certified", rows.len());
    Ok(if ok > 0 { EXIT_OK } else { EXIT_FAIL })
}

#[derive(Clone, Debug, Serialize)]
pub struct SuiteResult {
    pub name: String,
    pub passed: bool,
    pub checked: usize,
    pub failures: usize,
    pub detail: Option<String>,
}

impl SuiteResult {
    fn tally(name: &str, outcomes: Vec<Result<bool>>) -> Self {
        let checked = outcomes.len();
        let mut failures = 0;
        let mut detail = None;
        for o in outcomes {
            match o {
                Ok(true) => {}
                Ok(false) => failures += 1,
                Err(e) => {
                    failures += 1;
                    detail.get_or_insert(e.to_string());
                }
            }
        }
        Self {
            name: name.into(),
            passed: failures == 0 && checked > 0,
            checked,
            failures,
            detail,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct VerifyOutput {
    pub passed: bool,
    pub suites: Vec<SuiteResult>,
    pub decay: Option<DecayTable>,
}

pub const DEFAULT_DECAY_EPS: [f64; 4] = [0.02, 0.01, 0.005, 0.0025];
/// Successive decay slopes must agree to this.
pub const DECAY_SLOPE_SPREAD: f64 = 0.1;
const BOUNDS_TOL: f64 = 1e-9;
const HOLDER_SLACK: f64 = 1e-10;
const GRADIENT_TOL: f64 = 1e-5;

/// Runs the property suites on `spec` over `grid`; `grid` may carry
/// modified weights to exercise failure paths.
pub fn verify_suites(spec: &ProblemSpec, grid: &RadialGrid, cfg: &VerifyConfig, seed: u64) -> VerifyOutput {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(2);
    let trials: Vec<RadialFunction> = (0..2 * cfg.samples).map(|_| random_trial(grid, &mut rng)).collect();
    let (us, vs) = trials.split_at(cfg.samples);
    let mut suites = Vec::new();

    let modular = Modular::value(spec.p.clone());
    suites.push(SuiteResult::tally(
        "norm-modular bounds",
        us.iter()
            .map(|u| norm_modular_bounds_check(u, &modular, grid, BOUNDS_TOL).map(|r| r.holds()))
            .collect(),
    ));
    suites.push(SuiteResult::tally(
        "holder",
        us.iter()
            .zip(vs)
            .map(|(u, v)| holder_check(u, v, &spec.p, grid, HOLDER_SLACK).map(|r| r.holds))
            .collect(),
    ));
    let f = Functional::new(spec, grid);
    suites.push(SuiteResult::tally(
        "energy gradient",
        us.iter()
            .zip(vs)
            .map(|(u, v)| gradient_check(&f, grid, u, v))
            .collect(),
    ));
    let eps = cfg.eps.clone().unwrap_or(DEFAULT_DECAY_EPS.to_vec());
    let profile = RadialFunction::from_fn(grid, |s| 1.0 - (s / spec.outer_radius).powi(2));
    let decay = measure_cutoff_decay(&profile, spec.p.hi(), spec.inner_radius, &eps, grid);
    let decay_suite = match &decay {
        Ok(t) => SuiteResult::tally(
            "cutoff decay",
            t.pair_slopes
                .windows(2)
                .map(|w| Ok((w[1] - w[0]).abs() <= DECAY_SLOPE_SPREAD))
                .collect(),
        ),
        Err(e) => SuiteResult::tally("cutoff decay", vec![Err(Error::InvalidParameter(e.to_string()))]),
    };
    suites.push(decay_suite);
    VerifyOutput {
        passed: suites.iter().all(|s| s.passed),
        suites,
        decay: decay.ok(),
    }
}

/// Central difference of the energy along `v` against the pairing with the
/// assembled gradient, relative error at most `1e-5`.
pub fn gradient_check(f: &Functional, grid: &RadialGrid, u: &RadialFunction, v: &RadialFunction) -> Result<bool> {
    let g = f.gradient(u)?;
    let exact = pairing(grid, &g, v);
    let h = 1e-5 * (1.0 + u.max_abs()) / v.max_abs().max(1e-300);
    let fd = (f.value(&u.axpy(h, v))? - f.value(&u.axpy(-h, v))?) / (2.0 * h);
    let scale = exact.abs().max(fd.abs()).max(1e-12);
    Ok((fd - exact).abs() <= GRADIENT_TOL * scale)
}

pub fn cmd_verify(spec: &ProblemSpec, grid: &RadialGrid, cfg: &VerifyConfig, seed: u64, out: &Path) -> Result<i32> {
    let report = verify_suites(spec, grid, cfg, seed);
    for s in &report.suites {
        let status = if s.passed { "pass" } else { "FAIL" };
        println!("{:<20} {status}  {}/{} ok", s.name, s.checked - s.failures, s.checked);
    }
    if let Some(t) = &report.decay {
        println!("eps,integral");
        for r in &t.rows {
            println!("{:.16e},{:.16e}", r.eps, r.integral);
        }
        println!(
            "fitted slope {:.6}  (N - p+ = {}, 1 - p+ = {})",
            t.slope, t.shell_volume_exponent, t.direct_exponent
        );
    }
    write_json(&out.join("verify.json"), &report)?;
    if let Some(t) = &report.decay {
        write_with(&out.join("decay.csv"), |w| {
            writeln!(w, "eps,integral,pair_slope")?;
            for (i, r) in t.rows.iter().enumerate() {
                let slope = if i == 0 { f64::NAN } else { t.pair_slopes.get(i - 1).copied().unwrap_or(f64::NAN) };
                writeln!(w, "{:.16e},{:.16e},{:.16e}", r.eps, r.integral, slope)?;
            }
            Ok(())
        })?;
    }
    Ok(if report.passed { EXIT_OK } else { EXIT_FAIL })
}

/// Parses, sets up and dispatches; returns the process exit code.
pub fn run(cli: Cli) -> i32 {
    let Some(path) = cli.config.as_deref() else {
        eprintln!("--config PATH is required");
        return EXIT_CONFIG;
    };
    let mut config = match RunConfig::load(path) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("{e}");
            return EXIT_CONFIG;
        }
    };
    if let Some(seed) = cli.seed {
        config.seed = seed;
    }
    if let Some(jobs) = cli.jobs {
        set_jobs(jobs);
    }
    let out = cli
        .out
        .clone()
        .or_else(|| config.out.clone())
        .unwrap_or_else(|| PathBuf::from("out"));
    if let Err(e) = fs::create_dir_all(&out) {
        eprintln!("cannot create {}: {e}", out.display());
        return EXIT_FAIL;
    }
    let result = match cli.command {
        Command::Verify => config
            .grid()
            .and_then(|grid| Ok((config.base_spec()?, grid)))
            .map_err(|e| (EXIT_CONFIG, e))
            .and_then(|(spec, grid)| {
                cmd_verify(&spec, &grid, &config.verify, config.seed, &out).map_err(|e| (EXIT_FAIL, e))
            }),
        command => Instance::new(config, Execution::default())
            .map_err(|e| (EXIT_CONFIG, e))
            .and_then(|inst| {
                match command {
                    Command::Validate => cmd_validate(&inst, &out),
                    Command::Solve => cmd_solve(&inst, &out),
                    Command::Sweep => cmd_sweep(&inst, &out),
                    Command::Verify => unreachable!(),
                }
                .map_err(|e| (EXIT_FAIL, e))
            }),
    };
    match result {
        Ok(code) => code,
        Err((code, e)) => {
            eprintln!("error: {e}");
            code
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"{
  "p": {"kind": "constant", "value": 2.0},
  "q": {"kind": "constant", "value": 4.0},
  "m": {"kind": "constant", "value": 2.0},
  "a": {"kind": "constant", "value": 0.0},
  "outer_radius": 1.0,
  "inner_radius": 0.5,
  "dim": 3,
  "lambda": 1.0,
  "hypothesis_set": "H1-H4",
  "weight_bound": null,
  "grid": {"nodes": 64}
}"#;

    #[test]
    fn minimal_config_defaults() {
        let c = RunConfig::parse(MINIMAL).unwrap();
        assert_eq!(c.grid.spacing, Spacing::Uniform);
        assert_eq!(c.solver, SolverConfig::default());
        assert_eq!(c.mode(), Mode::MountainPass);
        assert_eq!(c.seed, 0);
        assert!(!c.needs_threshold());
    }

    #[test]
    fn parse_error_carries_line() {
        let broken = MINIMAL.replace("\"dim\": 3,", "\"dim\": 3");
        let e = RunConfig::parse(&broken).unwrap_err();
        assert_eq!(e.line, Some(9));
        let unknown = MINIMAL.replace("\"dim\": 3,", "\"dim\": 3,\n  \"colour\": 1,");
        let e = RunConfig::parse(&unknown).unwrap_err();
        assert!(e.line.is_some() && e.message.contains("colour"));
    }

    #[test]
    fn relative_lambda_resolves_against_threshold() {
        let text = MINIMAL
            .replace("\"lambda\": 1.0", "\"lambda\": {\"fraction_of_lambda_star\": 0.5}")
            .replace("\"grid\": {\"nodes\": 64}", "\"grid\": {\"nodes\": 64}, \"solver\": {\"samples\": 20}");
        let inst = Instance::new(RunConfig::parse(&text).unwrap(), Execution::Sequential).unwrap();
        let t = inst.threshold.unwrap();
        assert!((inst.spec.lambda - 0.5 * t.lambda_star).abs() < 1e-15);
    }

    #[test]
    fn sweep_values_and_empty_range() {
        let text = MINIMAL.replace(
            "\"grid\": {\"nodes\": 64}",
            "\"grid\": {\"nodes\": 64}, \"sweep\": {\"count\": 3, \"from\": 0.0, \"to\": 1.0}",
        );
        let inst = Instance::new(RunConfig::parse(&text).unwrap(), Execution::Sequential).unwrap();
        assert_eq!(inst.sweep_lambdas(), vec![0.25, 0.5, 0.75]);
        let empty = text.replace("\"to\": 1.0", "\"to\": 0.0");
        let inst = Instance::new(RunConfig::parse(&empty).unwrap(), Execution::Sequential).unwrap();
        assert!(inst.sweep_lambdas().is_empty());
    }

    #[test]
    fn verify_passes_and_detects_broken_weights() {
        let spec = ProblemSpec::constant(2.5, 4.0, 2.0, 0.5, 1.0, 0.5, 3, 1.0, HypothesisSet::Radial).unwrap();
        let grid = RadialGrid::new(1.0, 3, 200, Spacing::Uniform).unwrap();
        let cfg = VerifyConfig {
            samples: 20,
            eps: None,
        };
        let good = verify_suites(&spec, &grid, &cfg, 1);
        assert!(good.passed, "{:?}", good.suites);
        // Hoelder holds for every positive measure, so the fault flips the sign
        let w = grid.weights().iter().map(|x| -x).collect();
        let broken = grid.clone().with_node_weights(w).unwrap();
        let bad = verify_suites(&spec, &broken, &cfg, 1);
        let holder = bad.suites.iter().find(|s| s.name == "holder").unwrap();
        assert!(!holder.passed);
        assert!(!bad.passed);
    }
}
