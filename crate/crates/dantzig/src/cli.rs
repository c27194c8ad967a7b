//! The `dantzig` command.
//!
//! Exit codes: 0 on success, 1 when a solver fails or a check does not
//! pass, 2 on bad flags or unreadable/inconsistent input. Every successful
//! command prints one line of JSON carrying `"schema": 1`.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use dantzig_core::bench::{aggregate, gen_instance, Method, RecordStatus, Scale, SweepConfig};
use dantzig_core::classify::{
    classify_config, misdiagnosis_count, predict_labels, reduced_problem, select_top_variance, train_reduced_timed,
    LabeledDataset, DEFAULT_N_TOP, DELTA_GRID,
};
use dantzig_core::fpsolver::solve_with_operator;
use dantzig_core::oracle::{feasibility_violation, lp_reference_solve, SIZE_LIMIT};
use dantzig_core::rng::derive_seed;
use dantzig_core::{
    norm1, validate_config, ChangeMeasure, Clock, DantzigOperator, Error, ProblemInstance, Scheme, SolverConfig,
};
use serde_json::json;

use crate::clock::StdClock;
use crate::io;
use crate::sweep::{resolve_jobs, run_sweep_parallel};

pub const SCHEMA_VERSION: u32 = 1;
/// Largest objective gap accepted by `oracle-check`.
pub const ORACLE_GAP_TOL: f64 = 1e-4;
/// Largest constraint violation accepted by `oracle-check`.
pub const ORACLE_FEAS_TOL: f64 = 1e-6;

#[derive(Debug, Parser)]
#[command(name = "dantzig", version, about = "Dantzig selector solvers, benchmarks and checks")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve one instance read from CSV files.
    Solve(SolveArgs),
    /// Run a synthetic benchmark sweep and write CSV results.
    Bench(BenchArgs),
    /// Train on a screened feature set and classify a test set.
    Classify(ClassifyArgs),
    /// Compare the solver against the exact LP on random small instances.
    OracleCheck(OracleArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum SchemeArg {
    BetaFirst,
    TauFirst,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum MeasureArg {
    Primal,
    PrimalDual,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum MethodArg {
    Fp,
    Adm,
    Ladm,
}

impl From<MethodArg> for Method {
    fn from(m: MethodArg) -> Self {
        match m {
            MethodArg::Fp => Method::FpSolver,
            MethodArg::Adm => Method::Adm,
            MethodArg::Ladm => Method::Ladm,
        }
    }
}

/// Solver settings shared by `solve` and `classify`.
#[derive(Debug, Clone, Args)]
pub struct SolverArgs {
    /// Penalty α (default depends on the command).
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Step λ (default 0.999·α/‖A‖²).
    #[arg(long)]
    pub lambda: Option<f64>,
    /// Support threshold of the refit.
    #[arg(long)]
    pub tol: Option<f64>,
    /// Relative-change stopping threshold.
    #[arg(long)]
    pub epsilon: Option<f64>,
    /// Support-stationarity window.
    #[arg(long)]
    pub eta: Option<usize>,
    #[arg(long)]
    pub max_iters: Option<usize>,
    #[arg(long, value_enum)]
    pub scheme: Option<SchemeArg>,
    /// Quantity whose relative change is compared with ε.
    #[arg(long, value_enum)]
    pub change_measure: Option<MeasureArg>,
}

impl SolverArgs {
    fn apply(&self, mut cfg: SolverConfig) -> SolverConfig {
        if let Some(v) = self.alpha {
            cfg.alpha = v;
        }
        if self.lambda.is_some() {
            cfg.lambda = self.lambda;
        }
        if let Some(v) = self.tol {
            cfg.tol = v;
        }
        if let Some(v) = self.epsilon {
            cfg.epsilon = v;
        }
        if let Some(v) = self.eta {
            cfg.eta = v;
        }
        if let Some(v) = self.max_iters {
            cfg.max_iters = v;
        }
        if let Some(s) = self.scheme {
            cfg.scheme = match s {
                SchemeArg::BetaFirst => Scheme::BetaFirst,
                SchemeArg::TauFirst => Scheme::TauFirst,
            };
        }
        if let Some(m) = self.change_measure {
            cfg.change_measure = match m {
                MeasureArg::Primal => ChangeMeasure::Primal,
                MeasureArg::PrimalDual => ChangeMeasure::PrimalDual,
            };
        }
        cfg
    }
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    /// Design matrix, headerless CSV (rows = observations).
    #[arg(long)]
    pub x: PathBuf,
    /// Observations, single-column CSV.
    #[arg(long)]
    pub y: PathBuf,
    /// Tube radius δ.
    #[arg(long, allow_hyphen_values = true)]
    pub delta: f64,
    #[command(flatten)]
    pub solver: SolverArgs,
    /// Skip the least-squares refit and report β∞.
    #[arg(long)]
    pub no_postprocess: bool,
    /// Where to write β̂ as a single-column CSV.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Seed of the power-iteration start vector.
    #[arg(long, default_value_t = dantzig_core::linop::POWER_SEED)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    #[arg(long, value_delimiter = ',', required = true)]
    pub m_list: Vec<usize>,
    #[arg(long, value_delimiter = ',', required = true)]
    pub sigma_list: Vec<f64>,
    #[arg(long)]
    pub reps: usize,
    #[arg(long)]
    pub seed: u64,
    #[arg(long, value_enum, value_delimiter = ',', default_value = "fp,adm")]
    pub methods: Vec<MethodArg>,
    #[arg(long)]
    pub out_dir: PathBuf,
    /// Problem size `n,p,s` per unit of m.
    #[arg(long, value_delimiter = ',', num_args = 1)]
    pub scale: Option<Vec<usize>>,
    /// Worker threads (default: DANTZIG_JOBS, else physical cores).
    #[arg(long)]
    pub jobs: Option<usize>,
}

#[derive(Debug, Args)]
pub struct ClassifyArgs {
    #[arg(long)]
    pub train_x: PathBuf,
    #[arg(long)]
    pub train_y: PathBuf,
    #[arg(long)]
    pub test_x: PathBuf,
    #[arg(long)]
    pub test_y: PathBuf,
    /// Number of highest-variance features kept.
    #[arg(long, default_value_t = DEFAULT_N_TOP)]
    pub n_top: usize,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub delta_list: Option<Vec<f64>>,
    #[command(flatten)]
    pub solver: SolverArgs,
    /// Refit the training solution on its support.
    #[arg(long)]
    pub postprocess: bool,
    /// Results CSV: `delta,misdiagnoses,iterations,wall_seconds`.
    #[arg(long)]
    pub out: PathBuf,
    /// Also write the test scores, one line per `(δ, row)`.
    #[arg(long)]
    pub emit_raw: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct OracleArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub p: usize,
    #[arg(long, allow_hyphen_values = true)]
    pub delta: f64,
    #[arg(long)]
    pub seed: u64,
    #[arg(long)]
    pub trials: usize,
    /// Noise level of the generated observations.
    #[arg(long, default_value_t = 0.05, allow_hyphen_values = true)]
    pub sigma: f64,
}

/// Why a command stopped.
#[derive(Debug)]
pub enum Failure {
    /// Bad flags or input files (exit 2).
    Usage(String),
    /// Solver error or failed check (exit 1).
    Numerical(String),
}

impl Failure {
    pub fn exit_code(&self) -> i32 {
        match self {
            Failure::Usage(_) => 2,
            Failure::Numerical(_) => 1,
        }
    }
}

type CmdResult = Result<serde_json::Value, Failure>;

fn usage(flag: &str, msg: impl std::fmt::Display) -> Failure {
    Failure::Usage(format!("{flag}: {msg}"))
}

fn numerical(msg: impl std::fmt::Display) -> Failure {
    Failure::Numerical(msg.to_string())
}

/// Parses `args` (program name first), runs the command and returns the
/// exit code. The JSON summary goes to `out`, diagnostics to stderr.
pub fn run_with<I, T>(args: I, out: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let result = match cli.command {
        Command::Solve(a) => cmd_solve(&a),
        Command::Bench(a) => cmd_bench(&a),
        Command::Classify(a) => cmd_classify(&a),
        Command::OracleCheck(a) => cmd_oracle_check(&a),
    };
    match result {
        Ok(summary) => {
            let _ = writeln!(out, "{summary}");
            0
        }
        Err(f) => {
            match &f {
                Failure::Usage(m) | Failure::Numerical(m) => eprintln!("error: {m}"),
            }
            f.exit_code()
        }
    }
}

pub fn run() -> i32 {
    run_with(std::env::args_os(), &mut std::io::stdout().lock())
}

/// Maps a construction error to the flag most likely responsible.
fn problem_error(e: Error) -> Failure {
    match e {
        Error::DimensionMismatch { expected, found, .. } => {
            usage("--y", format!("has {found} entries but --x has {expected} rows"))
        }
        Error::ZeroColumn(j) => usage("--x", format!("column {j} is identically zero")),
        Error::InvalidParameter { name: "delta", reason } => usage("--delta", reason),
        other => usage("--x", other),
    }
}

fn config_error(e: Error) -> Failure {
    match e {
        Error::StepSizeTooLarge { .. } => usage("--lambda/--alpha", e),
        Error::InvalidParameter { name, reason } => usage(&format!("--{}", name.replace('_', "-")), reason),
        other => numerical(other),
    }
}

fn cmd_solve(a: &SolveArgs) -> CmdResult {
    let x = io::read_matrix(&a.x).map_err(|e| usage("--x", e))?;
    let y = io::read_vector(&a.y).map_err(|e| usage("--y", e))?;
    let problem = ProblemInstance::from_design(x, y, a.delta).map_err(problem_error)?;

    let clock = StdClock::new();
    let op = DantzigOperator::with_seed(&problem, a.seed).map_err(numerical)?;
    let norm = op.norm_estimate();
    let mut cfg = a.solver.apply(SolverConfig {
        tol: 0.1,
        ..SolverConfig::new(0.2 * norm * norm)
    });
    cfg.postprocess = !a.no_postprocess;
    validate_config(&cfg, op.guarded_norm()).map_err(config_error)?;
    let mut res = solve_with_operator(&op, &cfg, &clock).map_err(numerical)?;
    res.wall_seconds = clock.now();

    if let Some(path) = &a.out {
        io::write_vector(path, &res.beta_hat).map_err(|e| usage("--out", e))?;
    }
    Ok(json!({
        "schema": SCHEMA_VERSION,
        "command": "solve",
        "iterations": res.iterations,
        "seconds": res.wall_seconds,
        "termination": res.termination.as_str(),
        "l1_norm": norm1(&res.beta_hat),
        "feasibility_violation": res.feasibility_violation,
        "support_size": res.beta_hat.iter().filter(|v| **v != 0.0).count(),
        "empty_support": res.empty_support,
    }))
}

fn cmd_bench(a: &BenchArgs) -> CmdResult {
    let mut cfg = SweepConfig::new(
        a.m_list.clone(),
        a.sigma_list.clone(),
        a.reps,
        a.seed,
        a.methods.iter().map(|m| Method::from(*m)).collect(),
    );
    if let Some(s) = &a.scale {
        let [n, p, s] = s[..] else {
            return Err(usage("--scale", "expected three integers n,p,s"));
        };
        cfg.scale = Scale {
            n_per_m: n,
            p_per_m: p,
            s_per_m: s,
        };
    }
    cfg.validate().map_err(|e| match e {
        Error::InvalidParameter { name, reason } => {
            let flag = match name {
                "replicates" => "--reps",
                "methods" => "--methods",
                "m_values" => "--m-list",
                "sigma_values" => "--sigma-list",
                _ => "--scale",
            };
            usage(flag, reason)
        }
        other => usage("bench", other),
    })?;
    let jobs = resolve_jobs(a.jobs).map_err(|m| usage("--jobs", m))?;

    std::fs::create_dir_all(&a.out_dir).map_err(|e| usage("--out-dir", e))?;
    let records = run_sweep_parallel(&cfg, jobs).map_err(numerical)?;
    let records_path = a.out_dir.join("records.csv");
    let aggregate_path = a.out_dir.join("aggregate.csv");
    io::write_records(&records_path, &records).map_err(|e| usage("--out-dir", e))?;
    io::write_aggregate(&aggregate_path, &aggregate(&records)).map_err(|e| usage("--out-dir", e))?;

    let failed = records.iter().filter(|r| r.termination == RecordStatus::Failed).count();
    for r in records.iter().filter(|r| r.error.is_some()) {
        eprintln!(
            "warning: {} m={} sigma={} replicate={} failed: {}",
            r.method.as_str(),
            r.m,
            r.sigma,
            r.replicate,
            r.error.as_deref().unwrap_or("")
        );
    }
    Ok(json!({
        "schema": SCHEMA_VERSION,
        "command": "bench",
        "records": records.len(),
        "failed": failed,
        "jobs": jobs,
        "records_path": records_path.display().to_string(),
        "aggregate_path": aggregate_path.display().to_string(),
    }))
}

fn cmd_classify(a: &ClassifyArgs) -> CmdResult {
    let train_x = io::read_matrix(&a.train_x).map_err(|e| usage("--train-x", e))?;
    let train_y = io::read_labels(&a.train_y).map_err(|e| usage("--train-y", e))?;
    let test_x = io::read_matrix(&a.test_x).map_err(|e| usage("--test-x", e))?;
    let test_y = io::read_labels(&a.test_y).map_err(|e| usage("--test-y", e))?;
    if train_x.nrows() != train_y.len() {
        return Err(usage(
            "--train-y",
            format!(
                "has {} labels but --train-x has {} rows",
                train_y.len(),
                train_x.nrows()
            ),
        ));
    }
    if test_x.nrows() != test_y.len() {
        return Err(usage(
            "--test-y",
            format!("has {} labels but --test-x has {} rows", test_y.len(), test_x.nrows()),
        ));
    }
    if test_x.ncols() != train_x.ncols() {
        return Err(usage(
            "--test-x",
            format!("has {} features but --train-x has {}", test_x.ncols(), train_x.ncols()),
        ));
    }
    let deltas = a.delta_list.clone().unwrap_or_else(|| DELTA_GRID.to_vec());
    if deltas.is_empty() || deltas.iter().any(|d| !(*d >= 0.0) || !d.is_finite()) {
        return Err(usage("--delta-list", "values must be finite and nonnegative"));
    }
    let train = LabeledDataset::new(train_x, train_y).map_err(|e| usage("--train-y", e))?;
    let test = LabeledDataset::new(test_x, test_y).map_err(|e| usage("--test-y", e))?;
    let support = select_top_variance(&train, a.n_top).map_err(|e| usage("--n-top", e))?;

    let mut rows = Vec::with_capacity(deltas.len());
    for &delta in &deltas {
        let problem = reduced_problem(&train, &support, delta).map_err(numerical)?;
        let norm = DantzigOperator::new(&problem).map_err(numerical)?.norm_estimate();
        let mut cfg = a.solver.apply(classify_config(norm));
        cfg.postprocess = a.postprocess;
        validate_config(&cfg, norm * dantzig_core::linop::NORM_GUARD).map_err(config_error)?;
        let clock = StdClock::new();
        let model = train_reduced_timed(&train, &support, delta, Some(&cfg), &clock).map_err(numerical)?;
        let (scores, labels) = predict_labels(test.features(), &model.beta_hat).map_err(numerical)?;
        let misdiagnoses = misdiagnosis_count(&labels, test.labels()).map_err(numerical)?;
        rows.push(io::ClassifyRow {
            delta,
            misdiagnoses,
            iterations: model.result.iterations,
            wall_seconds: model.result.wall_seconds,
            scores,
            labels,
        });
    }
    io::write_classify(&a.out, &rows).map_err(|e| usage("--out", e))?;
    if let Some(path) = &a.emit_raw {
        io::write_raw_scores(path, &rows).map_err(|e| usage("--emit-raw", e))?;
    }
    let best = rows.iter().min_by_key(|r| r.misdiagnoses).expect("nonempty δ list");
    Ok(json!({
        "schema": SCHEMA_VERSION,
        "command": "classify",
        "deltas": rows.len(),
        "features_kept": support.len(),
        "best_delta": best.delta,
        "best_misdiagnoses": best.misdiagnoses,
        "out": a.out.display().to_string(),
    }))
}

/// Stage-I settings used by `oracle-check`: `α = 0.2‖A‖²`, stacked
/// relative change below 1e-10, no refit.
pub fn oracle_check_config(norm: f64) -> SolverConfig {
    SolverConfig {
        epsilon: 1e-10,
        eta: usize::MAX,
        max_iters: 2_000_000,
        postprocess: false,
        change_measure: ChangeMeasure::PrimalDual,
        ..SolverConfig::new(0.2 * norm * norm)
    }
}

fn cmd_oracle_check(a: &OracleArgs) -> CmdResult {
    if a.trials == 0 {
        return Err(usage("--trials", "must be at least 1"));
    }
    if a.n == 0 || a.n > SIZE_LIMIT {
        return Err(usage("--n", format!("must be between 1 and {SIZE_LIMIT}")));
    }
    if a.p < 2 || a.p > SIZE_LIMIT {
        return Err(usage("--p", format!("must be between 2 and {SIZE_LIMIT}")));
    }
    if !(a.delta >= 0.0) || !a.delta.is_finite() {
        return Err(usage("--delta", "must be finite and nonnegative"));
    }
    if !(a.sigma >= 0.0) || !a.sigma.is_finite() {
        return Err(usage("--sigma", "must be finite and nonnegative"));
    }

    let mut max_gap = 0.0_f64;
    let mut max_violation = 0.0_f64;
    let mut failures = Vec::new();
    for trial in 0..a.trials {
        let seed = derive_seed(&[a.seed, trial as u64]);
        let inst = gen_instance(a.n, a.p, (a.p / 4).max(1), a.sigma, seed).map_err(numerical)?;
        let problem = inst.problem.with_delta(a.delta).map_err(numerical)?;
        let op = DantzigOperator::new(&problem).map_err(numerical)?;
        let res = solve_with_operator(&op, &oracle_check_config(op.norm_estimate()), &dantzig_core::NullClock)
            .map_err(numerical)?;
        let lp = lp_reference_solve(&problem).map_err(numerical)?;
        let gap = (norm1(&res.beta_hat) - lp.objective).abs();
        let violation = feasibility_violation(&problem, &res.beta_hat).map_err(numerical)?;
        max_gap = max_gap.max(gap);
        max_violation = max_violation.max(violation);
        if !(gap <= ORACLE_GAP_TOL && violation <= ORACLE_FEAS_TOL) {
            eprintln!("trial {trial} (instance seed {seed}): objective gap {gap:e}, violation {violation:e}");
            failures.push(trial);
        }
    }
    if !failures.is_empty() {
        return Err(numerical(format!(
            "{} of {} trials outside tolerance (gap {ORACLE_GAP_TOL:e}, violation {ORACLE_FEAS_TOL:e})",
            failures.len(),
            a.trials
        )));
    }
    Ok(json!({
        "schema": SCHEMA_VERSION,
        "command": "oracle-check",
        "trials": a.trials,
        "max_gap": max_gap,
        "max_violation": max_violation,
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn cli_definition_is_consistent() {
        Cli::command().debug_assert();
    }
}
